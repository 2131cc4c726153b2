#include "ptrgeo/models.hpp"

#include <string>

#include "ptrgeo/error.hpp"
#include "ptrgeo/rng.hpp"

namespace ptrgeo::nn {

namespace {

constexpr std::uint64_t kInitStream = 0x1a1d;

std::size_t slot_of(const ad::ParamStore& store, std::string_view name, const ad::Shape& shape) {
  const ad::Parameter* p = store.find(name);
  if (!p) throw ContractError("model is missing parameter " + std::string(name));
  if (p->value().shape() != shape) {
    throw DimensionError("parameter " + std::string(name) + " has shape " +
                         ad::to_string(p->value().shape()) + ", expected " +
                         ad::to_string(shape));
  }
  return p->slot();
}

Var scores(ad::Tape& tape, const AttentionParams& a, Var keys, Var d) {
  Var projected = ad::matvec(tape.param(*a.w2), d);
  return ad::vecmat(tape.param(*a.v), ad::tanh(ad::add_to_columns(keys, projected)));
}

}  // namespace

std::string_view to_string(Arch arch) {
  switch (arch) {
    case Arch::ptrnet:
      return "ptrnet";
    case Arch::seq2seq:
      return "lstm";
    case Arch::seq2seq_attn:
      return "lstm-attn";
  }
  return "?";
}

Arch parse_arch(std::string_view name) {
  if (name == "ptrnet") return Arch::ptrnet;
  if (name == "lstm" || name == "seq2seq") return Arch::seq2seq;
  if (name == "lstm-attn" || name == "seq2seq-attn") return Arch::seq2seq_attn;
  throw ArgumentError("unknown architecture: " + std::string(name));
}

void HyperParams::validate() const {
  if (hidden == 0 || batch == 0 || beam == 0 || max_steps == 0) {
    throw ArgumentError("hidden, batch, beam and max steps must be positive");
  }
  if (!(lr > 0.0) || !(clip > 0.0) || !(init_range > 0.0)) {
    throw ArgumentError("learning rate, clip norm and init range must be positive");
  }
}

// ---------------------------------------------------------------- LSTM

LstmState lstm_zero_state(ad::Tape& tape, std::size_t hidden) {
  return {tape.constant(ad::Tensor({hidden})), tape.constant(ad::Tensor({hidden}))};
}

LstmState lstm_step(const LstmParams& p, Var x, const LstmState& s) {
  const std::size_t h = p.hidden;
  if (x.shape() != ad::Shape{p.input} || s.h.shape() != ad::Shape{h} ||
      s.c.shape() != ad::Shape{h}) {
    throw DimensionError("lstm_step: input " + ad::to_string(x.shape()) + " / state " +
                         ad::to_string(s.h.shape()) + " do not match input size " +
                         std::to_string(p.input) + " and hidden size " + std::to_string(h));
  }
  ad::Tape& tape = *x.tape();
  Var gates = ad::add(ad::add(ad::matvec(tape.param(*p.w_ih), x),
                              ad::matvec(tape.param(*p.w_hh), s.h)),
                      tape.param(*p.bias));
  Var ifo = ad::sigmoid(ad::slice(gates, 0, 3 * h));
  Var g = ad::tanh(ad::slice(gates, 3 * h, h));
  Var i = ad::slice(ifo, 0, h);
  Var f = ad::slice(ifo, h, h);
  Var o = ad::slice(ifo, 2 * h, h);
  Var c = ad::add(ad::mul(f, s.c), ad::mul(i, g));
  return {ad::mul(o, ad::tanh(c)), c};
}

Var pointer_logits(const AttentionParams& a, std::span<const Var> states, Var d) {
  if (states.empty()) throw DimensionError("pointer_logits over no states");
  ad::Tape& tape = *d.tape();
  Var keys = ad::matmul(tape.param(*a.w1), ad::stack_columns(states));
  return scores(tape, a, keys, d);
}

Var attention_blend(const AttentionParams& a, std::span<const Var> states, Var d) {
  if (states.empty()) throw DimensionError("attention_blend over no states");
  ad::Tape& tape = *d.tape();
  Var memory = ad::stack_columns(states);
  Var keys = ad::matmul(tape.param(*a.w1), memory);
  Var weights = ad::softmax(scores(tape, a, keys, d));
  return ad::concat(ad::matvec(memory, weights), d);
}

// ---------------------------------------------------------------- Model

Model Model::create(Arch arch, Task task, std::size_t hidden, std::uint64_t seed,
                    double init_range, std::optional<std::size_t> fixed_n) {
  if (hidden == 0) throw ArgumentError("hidden size must be positive");
  if (arch != Arch::ptrnet && (!fixed_n || *fixed_n == 0)) {
    throw ArgumentError("fixed-dictionary models need the training n");
  }
  Model m;
  m.arch_ = arch;
  m.task_ = task;
  m.hidden_ = hidden;
  if (arch != Arch::ptrnet) m.fixed_n_ = fixed_n;

  Pcg64 rng(seed, kInitStream);
  auto init = [&](const std::string& name, ad::Shape shape) {
    ad::Tensor t(std::move(shape));
    for (auto& v : t.values()) v = (2.0 * rng.uniform() - 1.0) * init_range;
    m.params_.add(name, std::move(t));
  };
  const std::size_t h = hidden;
  init("embed.w", {h, 2});
  init("embed.b", {h});
  for (const std::string side : {"encoder", "decoder"}) {
    init(side + ".w_ih", {4 * h, h});
    init(side + ".w_hh", {4 * h, h});
    init(side + ".b", {4 * h});
  }
  if (arch != Arch::seq2seq) {
    init("attention.w1", {h, h});
    init("attention.w2", {h, h});
    init("attention.v", {h});
  }
  init("start", {h});
  if (arch == Arch::ptrnet) {
    init("sentinel", {h});
  } else {
    const std::size_t classes = *m.fixed_n_ + 2;
    init("output.w", {classes, arch == Arch::seq2seq_attn ? 2 * h : h});
    init("output.b", {classes});
  }
  m.bind();
  return m;
}

Model Model::from_params(Task task, ad::ParamStore params) {
  Model m;
  m.task_ = task;
  const ad::Parameter* eb = params.find("embed.b");
  if (!eb || eb->value().rank() != 1) throw ContractError("parameters lack embed.b");
  m.hidden_ = eb->value().size();
  if (params.contains("sentinel")) {
    m.arch_ = Arch::ptrnet;
  } else {
    m.arch_ = params.contains("attention.v") ? Arch::seq2seq_attn : Arch::seq2seq;
    const ad::Parameter* ob = params.find("output.b");
    if (!ob || ob->value().size() < 3) throw ContractError("parameters lack output.b");
    m.fixed_n_ = ob->value().size() - 2;
  }
  m.params_ = std::move(params);
  m.bind();
  return m;
}

void Model::bind() {
  const std::size_t h = hidden_;
  const auto& s = params_;
  embed_w_ = slot_of(s, "embed.w", {h, 2});
  embed_b_ = slot_of(s, "embed.b", {h});
  enc_ih_ = slot_of(s, "encoder.w_ih", {4 * h, h});
  enc_hh_ = slot_of(s, "encoder.w_hh", {4 * h, h});
  enc_b_ = slot_of(s, "encoder.b", {4 * h});
  dec_ih_ = slot_of(s, "decoder.w_ih", {4 * h, h});
  dec_hh_ = slot_of(s, "decoder.w_hh", {4 * h, h});
  dec_b_ = slot_of(s, "decoder.b", {4 * h});
  if (arch_ != Arch::seq2seq) {
    att_w1_ = slot_of(s, "attention.w1", {h, h});
    att_w2_ = slot_of(s, "attention.w2", {h, h});
    att_v_ = slot_of(s, "attention.v", {h});
  }
  start_ = slot_of(s, "start", {h});
  if (arch_ == Arch::ptrnet) {
    sentinel_ = slot_of(s, "sentinel", {h});
  } else {
    const std::size_t classes = *fixed_n_ + 2;
    out_w_ = slot_of(s, "output.w", {classes, arch_ == Arch::seq2seq_attn ? 2 * h : h});
    out_b_ = slot_of(s, "output.b", {classes});
  }
}

std::size_t Model::num_classes(std::size_t n) const {
  return arch_ == Arch::ptrnet ? n + 1 : *fixed_n_ + 2;
}

void Model::check_length(std::size_t n) const {
  if (fixed_n_ && *fixed_n_ != n) throw UnsupportedLengthError(*fixed_n_, n);
}

LstmParams Model::encoder() const {
  return {&params_[enc_ih_], &params_[enc_hh_], &params_[enc_b_], hidden_, hidden_};
}

LstmParams Model::decoder() const {
  return {&params_[dec_ih_], &params_[dec_hh_], &params_[dec_b_], hidden_, hidden_};
}

AttentionParams Model::attention() const {
  if (arch_ == Arch::seq2seq) throw ContractError("plain seq2seq has no attention parameters");
  return {&params_[att_w1_], &params_[att_w2_], &params_[att_v_]};
}

Model::Encoding Model::encode(ad::Tape& tape, std::span<const geom::Point> points) const {
  if (points.empty()) throw ArgumentError("cannot encode an empty point set");
  check_length(points.size());
  Encoding enc;
  enc.n = points.size();
  Var we = tape.param(params_[embed_w_]);
  Var be = tape.param(params_[embed_b_]);
  const LstmParams lstm = encoder();
  LstmState state = lstm_zero_state(tape, hidden_);
  if (arch_ == Arch::ptrnet) enc.states.push_back(tape.param(params_[sentinel_]));
  enc.embedded.reserve(enc.n);
  for (const auto& p : points) {
    Var xy = tape.constant(ad::Tensor::vector({p.x, p.y}));
    Var e = ad::add(ad::matvec(we, xy), be);
    enc.embedded.push_back(e);
    state = lstm_step(lstm, e, state);
    enc.states.push_back(state.h);
  }
  enc.final_state = state;
  if (arch_ == Arch::ptrnet) {
    enc.keys = ad::matmul(tape.param(params_[att_w1_]), ad::stack_columns(enc.states));
  } else if (arch_ == Arch::seq2seq_attn) {
    enc.memory = ad::stack_columns(enc.states);
    enc.keys = ad::matmul(tape.param(params_[att_w1_]), enc.memory);
  }
  return enc;
}

Var Model::decoder_input(ad::Tape& tape, const Encoding& enc, int token) const {
  if (token < 0) return tape.param(params_[start_]);
  if (token == kEndToken || static_cast<std::size_t>(token) > enc.n) {
    throw ValidationError("no decoder input for token " + std::to_string(token));
  }
  return enc.embedded[static_cast<std::size_t>(token - 1)];
}

Model::StepResult Model::step(ad::Tape& tape, const Encoding& enc, const LstmState& state,
                              Var input) const {
  StepResult r;
  r.state = lstm_step(decoder(), input, state);
  const Var d = r.state.h;
  switch (arch_) {
    case Arch::ptrnet:
      r.log_probs = ad::log_softmax(scores(tape, attention(), enc.keys, d));
      break;
    case Arch::seq2seq:
      r.log_probs = ad::log_softmax(
          ad::add(ad::matvec(tape.param(params_[out_w_]), d), tape.param(params_[out_b_])));
      break;
    case Arch::seq2seq_attn: {
      Var weights = ad::softmax(scores(tape, attention(), enc.keys, d));
      Var blended = ad::concat(ad::matvec(enc.memory, weights), d);
      r.log_probs = ad::log_softmax(
          ad::add(ad::matvec(tape.param(params_[out_w_]), blended), tape.param(params_[out_b_])));
      break;
    }
  }
  return r;
}

Var Model::forward_nll(ad::Tape& tape, const data::Example& example) const {
  const std::size_t n = example.n();
  check_length(n);
  const auto targets = example.targets();
  for (int t : targets) {
    if (t < 0 || static_cast<std::size_t>(t) > n) {
      throw ValidationError("target index " + std::to_string(t) + " outside [0, " +
                            std::to_string(n) + "]");
    }
  }
  const Encoding enc = encode(tape, example.points);
  LstmState state = enc.final_state;
  Var input = decoder_input(tape, enc, -1);
  Var total;
  for (int t : targets) {
    StepResult r = step(tape, enc, state, input);
    Var lp = ad::pick(r.log_probs, static_cast<std::size_t>(t));
    total = total.valid() ? ad::add(total, lp) : lp;
    state = r.state;
    if (t != kEndToken) input = enc.embedded[static_cast<std::size_t>(t - 1)];
  }
  return ad::scale(total, -1.0);
}

}  // namespace ptrgeo::nn
