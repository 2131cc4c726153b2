#include "ptrgeo/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ptrgeo/error.hpp"

namespace ptrgeo::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

ConstMatMap as_matrix(const Tensor& t) {
  return ConstMatMap(t.values().data(), static_cast<Eigen::Index>(t.rows()),
                     static_cast<Eigen::Index>(t.cols()));
}
MatMap as_matrix(Tensor& t) {
  return MatMap(t.values().data(), static_cast<Eigen::Index>(t.rows()),
                static_cast<Eigen::Index>(t.cols()));
}
ConstVecMap as_vector(const Tensor& t) {
  return ConstVecMap(t.values().data(), static_cast<Eigen::Index>(t.size()));
}
VecMap as_vector(Tensor& t) {
  return VecMap(t.values().data(), static_cast<Eigen::Index>(t.size()));
}

std::size_t product(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

[[noreturn]] void shape_error(std::string_view op, const Shape& a, const Shape& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + to_string(a) + " and " +
                       to_string(b));
}

double sigmoid_scalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void require_rank(std::string_view op, const Tensor& t, std::size_t rank) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         ", got shape " + to_string(t.shape()));
  }
}

Tape& same_tape(Var a, Var b) {
  if (!a.valid() || a.tape() != b.tape()) {
    throw ContractError("operands belong to different tapes");
  }
  return *a.tape();
}

Tape& tape_of(Var a) {
  if (!a.valid()) throw ContractError("operation on an empty Var");
  return *a.tape();
}

Var unary(OpKind op, Var a, Tensor out) {
  Tape::Node n;
  n.op = op;
  n.lhs = a.id();
  n.value = std::move(out);
  return tape_of(a).record(std::move(n));
}

Var binary(OpKind op, Var a, Var b, Tensor out) {
  Tape& t = same_tape(a, b);
  Tape::Node n;
  n.op = op;
  n.lhs = a.id();
  n.rhs = b.id();
  n.value = std::move(out);
  return t.record(std::move(n));
}

}  // namespace

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

// ---------------------------------------------------------------- Tensor

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(product(shape_), 0.0) {
  for (auto d : shape_) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive: " + to_string(shape_));
  }
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(values.begin(), values.end()) {
  for (auto d : shape_) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive: " + to_string(shape_));
  }
  if (product(shape_) != data_.size()) {
    throw DimensionError("shape " + to_string(shape_) + " needs " +
                         std::to_string(product(shape_)) + " values, got " +
                         std::to_string(data_.size()));
  }
  if (!all_finite()) throw ContractError("tensor literal contains NaN or Inf");
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw ContractError("item() on a tensor of shape " + to_string(shape_));
  }
  return data_[0];
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor stable_softmax(const Tensor& x) {
  require_rank("softmax", x, 1);
  Tensor out(x.shape());
  const double mx = *std::max_element(x.values().begin(), x.values().end());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - mx);
    total += out[i];
  }
  for (auto& v : out.values()) v /= total;
  return out;
}

// ---------------------------------------------------------------- Parameters

void Parameter::assign(Tensor value) {
  if (value.shape() != value_.shape()) {
    throw DimensionError("parameter " + name_ + " has shape " + to_string(value_.shape()) +
                         ", cannot assign " + to_string(value.shape()));
  }
  value_ = std::move(value);
}

Parameter& ParamStore::add(std::string name, Tensor init) {
  if (index_.contains(name)) throw ContractError("duplicate parameter name: " + name);
  const std::size_t slot = params_.size();
  index_.emplace(name, slot);
  return params_.emplace_back(std::move(name), std::move(init), slot);
}

const Parameter* ParamStore::find(std::string_view name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second];
}

const Parameter& ParamStore::get(std::string_view name) const {
  if (const Parameter* p = find(name)) return *p;
  throw ContractError("unknown parameter: " + std::string(name));
}

Parameter& ParamStore::get(std::string_view name) {
  return const_cast<Parameter&>(std::as_const(*this).get(name));
}

std::size_t ParamStore::scalar_count() const {
  std::size_t total = 0;
  for (const auto& p : params_) total += p.value().size();
  return total;
}

Gradients::Gradients(const ParamStore& store) {
  grads_.reserve(store.size());
  for (const auto& p : store) grads_.emplace_back(p.value().shape());
  queued_.resize(grads_.size());
}

Tensor& Gradients::operator[](std::size_t slot) {
  if (queued_[slot].count) flush_slot(slot);
  return grads_[slot];
}

const Tensor& Gradients::operator[](std::size_t slot) const {
  if (queued_[slot].count) throw ContractError("gradient slot read with queued updates");
  return grads_[slot];
}

bool Gradients::pending() const noexcept {
  return std::any_of(queued_.begin(), queued_.end(), [](const Outer& o) { return o.count > 0; });
}

void Gradients::require_flushed() const {
  if (pending()) throw ContractError("gradients read with queued updates; call flush()");
}

void Gradients::add_outer(std::size_t slot, std::span<const double> g, std::span<const double> x) {
  if (slot >= grads_.size()) throw ContractError("parameter slot outside gradient set");
  const Tensor& w = grads_[slot];
  if (w.rank() != 2 || w.rows() != g.size() || w.cols() != x.size()) {
    throw DimensionError("outer product " + std::to_string(g.size()) + "x" +
                         std::to_string(x.size()) + " into " + to_string(w.shape()));
  }
  Outer& q = queued_[slot];
  q.g.insert(q.g.end(), g.begin(), g.end());
  q.x.insert(q.x.end(), x.begin(), x.end());
  if (++q.count >= 512) flush_slot(slot);
}

void Gradients::flush_slot(std::size_t slot) {
  Outer& q = queued_[slot];
  if (!q.count) return;
  Tensor& w = grads_[slot];
  const auto count = static_cast<Eigen::Index>(q.count);
  ConstMatMap G(q.g.data(), count, static_cast<Eigen::Index>(w.rows()));
  ConstMatMap X(q.x.data(), count, static_cast<Eigen::Index>(w.cols()));
  as_matrix(w).noalias() += G.transpose() * X;
  q.g.clear();
  q.x.clear();
  q.count = 0;
}

void Gradients::flush() {
  for (std::size_t i = 0; i < queued_.size(); ++i) flush_slot(i);
}

void Gradients::add(const Gradients& other) {
  if (other.size() != size()) throw ContractError("gradient sets are not aligned");
  other.require_flushed();
  flush();
  for (std::size_t i = 0; i < grads_.size(); ++i) {
    auto dst = grads_[i].values();
    auto src = other.grads_[i].values();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
}

void Gradients::scale(double factor) {
  flush();
  for (auto& g : grads_) {
    for (auto& v : g.values()) v *= factor;
  }
}

void Gradients::zero() {
  for (auto& q : queued_) {
    q.g.clear();
    q.x.clear();
    q.count = 0;
  }
  for (auto& g : grads_) std::fill(g.values().begin(), g.values().end(), 0.0);
}

double Gradients::global_norm() const {
  require_flushed();
  double sq = 0.0;
  for (const auto& g : grads_) {
    for (double v : g.values()) sq += v * v;
  }
  return std::sqrt(sq);
}

SgdStats sgd_step(ParamStore& params, Gradients& grads, double lr, double clip_norm) {
  if (!(lr > 0.0) || !(clip_norm > 0.0)) {
    throw ContractError("sgd_step needs positive learning rate and clip norm");
  }
  if (grads.size() != params.size()) throw ContractError("gradients not aligned with parameters");
  grads.flush();
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].shape() != params[i].value().shape()) {
      throw DimensionError("gradient for " + params[i].name() + " has shape " +
                           to_string(grads[i].shape()));
    }
    if (!grads[i].all_finite()) {
      throw TrainingError("non-finite gradient for parameter " + params[i].name(),
                          params[i].name());
    }
  }
  SgdStats stats;
  stats.grad_norm = grads.global_norm();
  if (stats.grad_norm > clip_norm) {
    stats.scale = clip_norm / stats.grad_norm;
    grads.scale(stats.scale);
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i].mutable_values();
    auto g = grads[i].values();
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= lr * g[k];
  }
  return stats;
}

// ---------------------------------------------------------------- Tape

const Tensor& Var::value() const {
  if (!tape_) throw ContractError("value() on an empty Var");
  return tape_->value(*this);
}

void Tape::check_owner(Var v) const {
  if (v.tape() != this || v.id() < 0 || static_cast<std::size_t>(v.id()) >= nodes_.size()) {
    throw ContractError("Var does not belong to this tape");
  }
}

Var Tape::record(Node node) {
  if (validate_ && node.op != OpKind::Param && !node.value.all_finite()) {
    throw TrainingError("non-finite value produced on tape at node " +
                        std::to_string(nodes_.size()));
  }
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::constant(Tensor value) {
  Node n;
  n.op = OpKind::Constant;
  n.value = std::move(value);
  return record(std::move(n));
}

Var Tape::param(const Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var(this, it->second);
  Node n;
  n.op = OpKind::Param;
  n.param = &p;
  Var v = record(std::move(n));
  param_nodes_.emplace(&p, v.id());
  return v;
}

const Tensor& Tape::value(Var v) const {
  check_owner(v);
  const Node& n = nodes_[static_cast<std::size_t>(v.id())];
  return n.op == OpKind::Param ? n.param->value() : n.value;
}

Tensor Tape::grad(Var v) const {
  check_owner(v);
  const auto id = static_cast<std::size_t>(v.id());
  if (id < has_grad_.size() && has_grad_[id]) return grads_[id];
  return Tensor(value(v).shape());
}

Tensor& Tape::grad_slot(int id) {
  const auto i = static_cast<std::size_t>(id);
  if (sink_ && nodes_[i].op == OpKind::Param) {
    const std::size_t slot = nodes_[i].param->slot();
    if (slot >= sink_->size()) throw ContractError("parameter slot outside gradient set");
    return (*sink_)[slot];
  }
  if (!has_grad_[i]) {
    grads_[i] = Tensor(value(Var(this, id)).shape());
    has_grad_[i] = 1;
  }
  return grads_[i];
}

void Tape::backward(Var loss, Gradients* sink) {
  check_owner(loss);
  if (value(loss).size() != 1) {
    throw ContractError("backward needs a scalar loss, got shape " +
                        to_string(value(loss).shape()));
  }
  grads_.assign(nodes_.size(), Tensor());
  has_grad_.assign(nodes_.size(), 0);
  sink_ = nullptr;
  grad_slot(loss.id())[0] = 1.0;
  sink_ = sink;
  struct Reset {
    Tape* t;
    ~Reset() { t->sink_ = nullptr; }
  } reset{this};

  for (int k = loss.id(); k >= 0; --k) {
    const auto ku = static_cast<std::size_t>(k);
    if (!has_grad_[ku]) continue;
    const Node& n = nodes_[ku];
    const Tensor& g = grads_[ku];
    switch (n.op) {
      case OpKind::Constant:
      case OpKind::Param:
        break;
      case OpKind::MatMul: {
        const Tensor& a = value(Var(this, n.lhs));
        const Tensor& b = value(Var(this, n.rhs));
        auto G = as_matrix(g);
        as_matrix(grad_slot(n.lhs)).noalias() += G * as_matrix(b).transpose();
        as_matrix(grad_slot(n.rhs)).noalias() += as_matrix(a).transpose() * G;
        break;
      }
      case OpKind::MatVec: {
        const Tensor& w = value(Var(this, n.lhs));
        const Tensor& x = value(Var(this, n.rhs));
        auto gv = as_vector(g);
        const Node& wn = nodes_[static_cast<std::size_t>(n.lhs)];
        if (sink_ && wn.op == OpKind::Param) {
          sink_->add_outer(wn.param->slot(), g.values(), x.values());
        } else {
          as_matrix(grad_slot(n.lhs)).noalias() += gv * as_vector(x).transpose();
        }
        as_vector(grad_slot(n.rhs)).noalias() += as_matrix(w).transpose() * gv;
        break;
      }
      case OpKind::VecMat: {
        const Tensor& x = value(Var(this, n.lhs));
        const Tensor& w = value(Var(this, n.rhs));
        auto gv = as_vector(g);
        as_vector(grad_slot(n.lhs)).noalias() += as_matrix(w) * gv;
        as_matrix(grad_slot(n.rhs)).noalias() += as_vector(x) * gv.transpose();
        break;
      }
      case OpKind::Add:
        as_vector(grad_slot(n.lhs)) += as_vector(g);
        as_vector(grad_slot(n.rhs)) += as_vector(g);
        break;
      case OpKind::Sub:
        as_vector(grad_slot(n.lhs)) += as_vector(g);
        as_vector(grad_slot(n.rhs)) -= as_vector(g);
        break;
      case OpKind::Mul: {
        const Tensor& a = value(Var(this, n.lhs));
        const Tensor& b = value(Var(this, n.rhs));
        as_vector(grad_slot(n.lhs)).array() += as_vector(g).array() * as_vector(b).array();
        as_vector(grad_slot(n.rhs)).array() += as_vector(g).array() * as_vector(a).array();
        break;
      }
      case OpKind::Tanh: {
        auto y = as_vector(n.value).array();
        as_vector(grad_slot(n.lhs)).array() += as_vector(g).array() * (1.0 - y * y);
        break;
      }
      case OpKind::Sigmoid: {
        auto y = as_vector(n.value).array();
        as_vector(grad_slot(n.lhs)).array() += as_vector(g).array() * y * (1.0 - y);
        break;
      }
      case OpKind::AddToColumns: {
        auto G = as_matrix(g);
        as_matrix(grad_slot(n.lhs)) += G;
        as_vector(grad_slot(n.rhs)).noalias() += G.rowwise().sum();
        break;
      }
      case OpKind::Softmax: {
        auto y = as_vector(n.value);
        const double dot = y.dot(as_vector(g));
        as_vector(grad_slot(n.lhs)).array() += y.array() * (as_vector(g).array() - dot);
        break;
      }
      case OpKind::LogSoftmax: {
        // d/dx_j = g_j - softmax_j * sum(g)
        auto y = as_vector(n.value);
        const double total = as_vector(g).sum();
        as_vector(grad_slot(n.lhs)).array() += as_vector(g).array() - y.array().exp() * total;
        break;
      }
      case OpKind::Pick:
        grad_slot(n.lhs)[n.offset] += g[0];
        break;
      case OpKind::Sum:
        as_vector(grad_slot(n.lhs)).array() += g[0];
        break;
      case OpKind::Scale:
        as_vector(grad_slot(n.lhs)) += n.factor * as_vector(g);
        break;
      case OpKind::Concat: {
        Tensor& ga = grad_slot(n.lhs);
        Tensor& gb = grad_slot(n.rhs);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[ga.size() + i];
        break;
      }
      case OpKind::Slice: {
        Tensor& gx = grad_slot(n.lhs);
        for (std::size_t i = 0; i < g.size(); ++i) gx[n.offset + i] += g[i];
        break;
      }
      case OpKind::StackColumns: {
        const std::size_t rows = g.rows();
        const std::size_t cols = g.cols();
        for (std::size_t c = 0; c < cols; ++c) {
          Tensor& gc = grad_slot(n.extra[c]);
          for (std::size_t r = 0; r < rows; ++r) gc[r] += g[r * cols + c];
        }
        break;
      }
    }
  }
}

void Tape::accumulate(Gradients& grads) const {
  for (const auto& [param, id] : param_nodes_) {
    const auto i = static_cast<std::size_t>(id);
    if (i >= has_grad_.size() || !has_grad_[i]) continue;
    if (param->slot() >= grads.size()) throw ContractError("parameter slot outside gradient set");
    as_vector(grads[param->slot()]) += as_vector(grads_[i]);
  }
}

// ---------------------------------------------------------------- ops

Var matmul(Var a, Var b) {
  same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.rank() != 2 || B.rank() != 2 || A.cols() != B.rows()) {
    shape_error("matmul", A.shape(), B.shape());
  }
  Tensor out({A.rows(), B.cols()});
  as_matrix(out).noalias() = as_matrix(A) * as_matrix(B);
  return binary(OpKind::MatMul, a, b, std::move(out));
}

Var matvec(Var w, Var x) {
  same_tape(w, x);
  const Tensor& W = w.value();
  const Tensor& X = x.value();
  if (W.rank() != 2 || X.rank() != 1 || W.cols() != X.size()) {
    shape_error("matvec", W.shape(), X.shape());
  }
  Tensor out({W.rows()});
  as_vector(out).noalias() = as_matrix(W) * as_vector(X);
  return binary(OpKind::MatVec, w, x, std::move(out));
}

Var vecmat(Var x, Var w) {
  same_tape(x, w);
  const Tensor& X = x.value();
  const Tensor& W = w.value();
  if (W.rank() != 2 || X.rank() != 1 || W.rows() != X.size()) {
    shape_error("vecmat", X.shape(), W.shape());
  }
  Tensor out({W.cols()});
  as_vector(out).noalias() = as_matrix(W).transpose() * as_vector(X);
  return binary(OpKind::VecMat, x, w, std::move(out));
}

namespace {

template <typename F>
Var elementwise(OpKind op, std::string_view name, Var a, Var b, F f) {
  same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.shape() != B.shape()) shape_error(name, A.shape(), B.shape());
  Tensor out(A.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(A[i], B[i]);
  return binary(op, a, b, std::move(out));
}

template <typename F>
Var map_unary(OpKind op, Var a, F f) {
  const Tensor& A = tape_of(a).value(a);
  Tensor out(A.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(A[i]);
  return unary(op, a, std::move(out));
}

}  // namespace

Var add(Var a, Var b) {
  return elementwise(OpKind::Add, "add", a, b, [](double x, double y) { return x + y; });
}
Var sub(Var a, Var b) {
  return elementwise(OpKind::Sub, "sub", a, b, [](double x, double y) { return x - y; });
}
Var mul(Var a, Var b) {
  return elementwise(OpKind::Mul, "mul", a, b, [](double x, double y) { return x * y; });
}
Var tanh(Var a) {
  return map_unary(OpKind::Tanh, a, [](double x) { return std::tanh(x); });
}
Var sigmoid(Var a) { return map_unary(OpKind::Sigmoid, a, sigmoid_scalar); }

Var add_to_columns(Var m, Var v) {
  same_tape(m, v);
  const Tensor& M = m.value();
  const Tensor& V = v.value();
  if (M.rank() != 2 || V.rank() != 1 || M.rows() != V.size()) {
    shape_error("add_to_columns", M.shape(), V.shape());
  }
  Tensor out = M;
  as_matrix(out).colwise() += as_vector(V);
  return binary(OpKind::AddToColumns, m, v, std::move(out));
}

Var softmax(Var x) { return unary(OpKind::Softmax, x, stable_softmax(tape_of(x).value(x))); }

Var log_softmax(Var x) {
  const Tensor& X = tape_of(x).value(x);
  require_rank("log_softmax", X, 1);
  const double mx = *std::max_element(X.values().begin(), X.values().end());
  double total = 0.0;
  for (double v : X.values()) total += std::exp(v - mx);
  const double log_z = mx + std::log(total);
  Tensor out(X.shape());
  for (std::size_t i = 0; i < X.size(); ++i) out[i] = X[i] - log_z;
  return unary(OpKind::LogSoftmax, x, std::move(out));
}

Var pick(Var x, std::size_t index) {
  const Tensor& X = tape_of(x).value(x);
  require_rank("pick", X, 1);
  if (index >= X.size()) {
    throw DimensionError("pick index " + std::to_string(index) + " outside " +
                         to_string(X.shape()));
  }
  Tape::Node n;
  n.op = OpKind::Pick;
  n.lhs = x.id();
  n.offset = index;
  n.value = Tensor::scalar(X[index]);
  return x.tape()->record(std::move(n));
}

Var sum(Var x) {
  const Tensor& X = tape_of(x).value(x);
  return unary(OpKind::Sum, x, Tensor::scalar(as_vector(X).sum()));
}

Var scale(Var x, double factor) {
  const Tensor& X = tape_of(x).value(x);
  Tensor out(X.shape());
  as_vector(out) = factor * as_vector(X);
  Tape::Node n;
  n.op = OpKind::Scale;
  n.lhs = x.id();
  n.factor = factor;
  n.value = std::move(out);
  return x.tape()->record(std::move(n));
}

Var concat(Var a, Var b) {
  same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.rank() != 1 || B.rank() != 1) shape_error("concat", A.shape(), B.shape());
  Tensor out({A.size() + B.size()});
  std::copy(A.values().begin(), A.values().end(), out.values().begin());
  std::copy(B.values().begin(), B.values().end(), out.values().begin() + A.size());
  return binary(OpKind::Concat, a, b, std::move(out));
}

Var slice(Var x, std::size_t offset, std::size_t length) {
  const Tensor& X = tape_of(x).value(x);
  require_rank("slice", X, 1);
  if (length == 0 || offset + length > X.size()) {
    throw DimensionError("slice [" + std::to_string(offset) + ", +" + std::to_string(length) +
                         ") outside " + to_string(X.shape()));
  }
  Tensor out({length});
  std::copy_n(X.values().begin() + static_cast<std::ptrdiff_t>(offset), length,
              out.values().begin());
  Tape::Node n;
  n.op = OpKind::Slice;
  n.lhs = x.id();
  n.offset = offset;
  n.value = std::move(out);
  return x.tape()->record(std::move(n));
}

Var stack_columns(std::span<const Var> columns) {
  if (columns.empty()) throw DimensionError("stack_columns of nothing");
  Tape& t = tape_of(columns.front());
  const std::size_t rows = columns.front().value().size();
  const std::size_t cols = columns.size();
  Tensor out({rows, cols});
  Tape::Node n;
  n.op = OpKind::StackColumns;
  n.extra.reserve(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    const Var& v = columns[c];
    if (v.tape() != &t) throw ContractError("operands belong to different tapes");
    const Tensor& col = v.value();
    if (col.rank() != 1 || col.size() != rows) {
      shape_error("stack_columns", columns.front().shape(), col.shape());
    }
    for (std::size_t r = 0; r < rows; ++r) out[r * cols + c] = col[r];
    n.extra.push_back(v.id());
  }
  n.value = std::move(out);
  return t.record(std::move(n));
}

Var pointwise(Pointwise op, Var a, Var b) {
  switch (op) {
    case Pointwise::tanh:
      return tanh(a);
    case Pointwise::sigmoid:
      return sigmoid(a);
    case Pointwise::add:
      return add(a, b);
    case Pointwise::mul:
      return mul(a, b);
    case Pointwise::sub:
      return sub(a, b);
  }
  throw ContractError("unknown pointwise op");
}

}  // namespace ptrgeo::ad
