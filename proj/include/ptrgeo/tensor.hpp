#pragma once

// Dense float64 tensors, named parameters and a define-by-run reverse-mode
// tape. Only what LSTM encoder/decoder models with content attention need:
// rank-1 and rank-2 values, matrix products, gates and softmaxes.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <new>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ptrgeo::ad {

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);

// 64-byte aligned storage. Vectorized kernels pick their peeling and
// summation order from the buffer address, so a fixed alignment keeps results
// bit-identical across processes with different allocation histories.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};
  AlignedAllocator() noexcept = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }
  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using Buffer = std::vector<double, AlignedAllocator<double>>;

class Tensor {
 public:
  Tensor() = default;
  // Zero-filled tensor of the given shape.
  explicit Tensor(Shape shape);
  // Throws DimensionError if the value count does not match the shape and
  // ContractError if any value is NaN or infinite.
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double v);
  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t rows() const noexcept { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const noexcept { return shape_.size() < 2 ? 1 : shape_[1]; }

  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  // Value of a single-element tensor.
  double item() const;

  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  Buffer data_;
};

// Numerically stable softmax of a rank-1 tensor: exp(x - max x) / sum.
Tensor stable_softmax(const Tensor& x);

class Parameter {
 public:
  Parameter(std::string name, Tensor value, std::size_t slot)
      : name_(std::move(name)), value_(std::move(value)), slot_(slot) {}

  const std::string& name() const noexcept { return name_; }
  const Tensor& value() const noexcept { return value_; }
  std::span<double> mutable_values() noexcept { return value_.values(); }
  // Replaces the value; the shape is fixed at creation.
  void assign(Tensor value);
  std::size_t slot() const noexcept { return slot_; }

 private:
  std::string name_;
  Tensor value_;
  std::size_t slot_;
};

// Owns the parameters of one model. Addresses are stable for its lifetime.
class ParamStore {
 public:
  ParamStore() = default;
  Parameter& add(std::string name, Tensor init);
  const Parameter& get(std::string_view name) const;
  Parameter& get(std::string_view name);
  const Parameter* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }

  std::size_t size() const noexcept { return params_.size(); }
  const Parameter& operator[](std::size_t slot) const { return params_[slot]; }
  Parameter& operator[](std::size_t slot) { return params_[slot]; }
  std::size_t scalar_count() const;

  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }

 private:
  std::deque<Parameter> params_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// One gradient tensor per parameter slot of a ParamStore.
//
// Rank-one updates g x^T into matrix slots can be queued with add_outer();
// they are applied together as one matrix product by flush(). Queued updates
// are flushed by add, scale, zero and sgd_step; reading a slot or the norm
// with updates still queued is a contract error.
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParamStore& store);

  std::size_t size() const noexcept { return grads_.size(); }
  Tensor& operator[](std::size_t slot);
  const Tensor& operator[](std::size_t slot) const;

  void add(const Gradients& other);
  void scale(double factor);
  void zero();
  double global_norm() const;

  void add_outer(std::size_t slot, std::span<const double> g, std::span<const double> x);
  void flush();
  bool pending() const noexcept;

 private:
  struct Outer {
    Buffer g;  // one row per queued update
    Buffer x;
    std::size_t count = 0;
  };
  void flush_slot(std::size_t slot);
  void require_flushed() const;

  std::vector<Tensor> grads_;
  std::vector<Outer> queued_;
};

struct SgdStats {
  double grad_norm = 0.0;  // before clipping
  double scale = 1.0;      // factor applied to every gradient
};

// Global-norm clipping followed by a plain SGD update, in place.
// Throws TrainingError naming the first parameter whose gradient is not finite.
SgdStats sgd_step(ParamStore& params, Gradients& grads, double lr, double clip_norm);

enum class OpKind : std::uint8_t {
  Constant,
  Param,
  MatMul,
  MatVec,
  VecMat,
  Add,
  Sub,
  Mul,
  Tanh,
  Sigmoid,
  AddToColumns,
  Softmax,
  LogSoftmax,
  Pick,
  Sum,
  Scale,
  Concat,
  Slice,
  StackColumns,
};

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Tape* tape() const noexcept { return tape_; }
  int id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  struct Node {
    OpKind op = OpKind::Constant;
    int lhs = -1;
    int rhs = -1;
    std::vector<int> extra;  // StackColumns parents
    Tensor value;            // unused for Param nodes
    const Parameter* param = nullptr;
    std::size_t offset = 0;  // Slice offset, Pick index
    double factor = 0.0;     // Scale factor
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Leaf for a parameter. Repeated calls with the same parameter return the
  // same node. The parameter must outlive the tape.
  Var param(const Parameter& p);

  const Tensor& value(Var v) const;
  // Gradient of the last backward() w.r.t. v; zeros when v was unreached.
  Tensor grad(Var v) const;

  // Reverse sweep from a single-element node. Visits nodes in strictly
  // decreasing id order, each at most once. With a sink, parameter gradients
  // are added straight into it (by slot) instead of being kept on the tape.
  void backward(Var loss, Gradients* sink = nullptr);
  // Adds the gradients of every parameter leaf into grads (by slot).
  void accumulate(Gradients& grads) const;

  std::size_t size() const noexcept { return nodes_.size(); }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

  // When enabled every recorded value is checked for NaN/Inf.
  void set_validation(bool on) noexcept { validate_ = on; }

  Var record(Node node);

 private:
  void check_owner(Var v) const;
  Tensor& grad_slot(int id);

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, int> param_nodes_;
  std::vector<Tensor> grads_;
  std::vector<char> has_grad_;
  Gradients* sink_ = nullptr;
  bool validate_ = false;
};

// Differentiable operations. All operands must live on the same tape.
Var matmul(Var a, Var b);        // [m x k] * [k x n]
Var matvec(Var w, Var x);        // [m x k] * [k]
Var vecmat(Var x, Var w);        // [k] * [k x n]  (x^T W)
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var tanh(Var a);
Var sigmoid(Var a);
Var add_to_columns(Var m, Var v);  // [m x n] + [m] broadcast over columns
Var softmax(Var x);
Var log_softmax(Var x);
Var pick(Var x, std::size_t index);
Var sum(Var x);
Var scale(Var x, double factor);
Var concat(Var a, Var b);
Var slice(Var x, std::size_t offset, std::size_t length);
Var stack_columns(std::span<const Var> columns);

enum class Pointwise { tanh, sigmoid, add, mul, sub };
// Dispatcher over the elementwise family; unary ops ignore `b`.
Var pointwise(Pointwise op, Var a, Var b = {});

}  // namespace ptrgeo::ad
