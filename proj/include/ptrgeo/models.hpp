#pragma once

// LSTM encoder/decoder models over planar point sequences.
//
//   ptrnet        decoder state scores every encoder position with
//                 v . tanh(W1 e_j + W2 d); the softmax over positions 0..n is
//                 the output distribution. Position 0 is a learned sentinel
//                 standing for the end token.
//   seq2seq       fixed dictionary: d is projected to n + 2 logits
//                 (end, 1..n, start).
//   seq2seq_attn  as seq2seq, but the projection reads [d' ; d] where d' is
//                 the attention-weighted blend of e_1..e_n.
//
// In every architecture the decoder input at step i is the embedded point
// picked at step i-1 and a learned start vector at step 1.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ptrgeo/dataset.hpp"
#include "ptrgeo/geometry.hpp"
#include "ptrgeo/task.hpp"
#include "ptrgeo/tensor.hpp"

namespace ptrgeo::nn {

using ad::Var;

enum class Arch { ptrnet, seq2seq, seq2seq_attn };

// CLI names: "ptrnet", "lstm", "lstm-attn".
std::string_view to_string(Arch arch);
Arch parse_arch(std::string_view name);

struct HyperParams {
  std::size_t hidden = 256;
  double lr = 1.0;
  std::size_t batch = 128;
  double clip = 2.0;
  double init_range = 0.08;
  std::size_t beam = 1;
  std::size_t max_steps = 10000;
  std::uint64_t seed = 1;

  // Throws ArgumentError for non-positive values.
  void validate() const;
};

struct LstmParams {
  const ad::Parameter* w_ih = nullptr;  // [4h x in], gate order i, f, o, g
  const ad::Parameter* w_hh = nullptr;  // [4h x h]
  const ad::Parameter* bias = nullptr;  // [4h]
  std::size_t hidden = 0;
  std::size_t input = 0;
};

struct LstmState {
  Var h;  // output-gated hidden state
  Var c;  // cell
};

LstmState lstm_zero_state(ad::Tape& tape, std::size_t hidden);
LstmState lstm_step(const LstmParams& p, Var x, const LstmState& s);

struct AttentionParams {
  const ad::Parameter* w1 = nullptr;  // [h x h], applied to encoder states
  const ad::Parameter* w2 = nullptr;  // [h x h], applied to the decoder state
  const ad::Parameter* v = nullptr;   // [h]
};

// u_j = v . tanh(W1 e_j + W2 d) for every entry of `states`.
Var pointer_logits(const AttentionParams& a, std::span<const Var> states, Var d);

// [sum_j softmax(u)_j e_j ; d] over `states` (the sentinel is not passed).
Var attention_blend(const AttentionParams& a, std::span<const Var> states, Var d);

class Model {
 public:
  // Fixed-dictionary architectures need `fixed_n`; ptrnet ignores it.
  static Model create(Arch arch, Task task, std::size_t hidden, std::uint64_t seed,
                      double init_range = 0.08, std::optional<std::size_t> fixed_n = {});
  // Rebuilds a model around loaded parameters; the architecture, hidden size
  // and dictionary size are inferred from parameter names and shapes.
  static Model from_params(Task task, ad::ParamStore params);

  Arch arch() const noexcept { return arch_; }
  Task task() const noexcept { return task_; }
  std::size_t hidden() const noexcept { return hidden_; }
  std::optional<std::size_t> fixed_n() const noexcept { return fixed_n_; }

  const ad::ParamStore& params() const noexcept { return params_; }
  ad::ParamStore& params() noexcept { return params_; }

  // Size of the output distribution for an input of n points.
  std::size_t num_classes(std::size_t n) const;
  // Throws UnsupportedLengthError when a fixed-dictionary model gets n != trained n.
  void check_length(std::size_t n) const;

  LstmParams encoder() const;
  LstmParams decoder() const;
  AttentionParams attention() const;

  struct Encoding {
    std::size_t n = 0;
    std::vector<Var> embedded;  // embedded[j] is point j+1
    std::vector<Var> states;    // ptrnet: sentinel then e_1..e_n; baselines: e_1..e_n
    LstmState final_state;
    Var keys;    // W1 [states as columns], pointer/attention scoring
    Var memory;  // e_1..e_n as columns (seq2seq_attn)
  };

  // Throws ArgumentError for an empty point set.
  Encoding encode(ad::Tape& tape, std::span<const geom::Point> points) const;

  // Input for the step after emitting `token`; -1 selects the start vector.
  Var decoder_input(ad::Tape& tape, const Encoding& enc, int token) const;

  struct StepResult {
    Var log_probs;
    LstmState state;
  };
  StepResult step(ad::Tape& tape, const Encoding& enc, const LstmState& state, Var input) const;

  // Teacher-forced negative log-likelihood of example.targets() (label plus
  // end token), summed over steps. Throws ValidationError for targets outside
  // [0, n].
  Var forward_nll(ad::Tape& tape, const data::Example& example) const;

 private:
  Model() = default;
  void bind();

  Arch arch_ = Arch::ptrnet;
  Task task_ = Task::hull;
  std::size_t hidden_ = 0;
  std::optional<std::size_t> fixed_n_;
  ad::ParamStore params_;

  std::size_t embed_w_ = 0, embed_b_ = 0;
  std::size_t enc_ih_ = 0, enc_hh_ = 0, enc_b_ = 0;
  std::size_t dec_ih_ = 0, dec_hh_ = 0, dec_b_ = 0;
  std::size_t att_w1_ = 0, att_w2_ = 0, att_v_ = 0;
  std::size_t start_ = 0, sentinel_ = 0;
  std::size_t out_w_ = 0, out_b_ = 0;
};

}  // namespace ptrgeo::nn
