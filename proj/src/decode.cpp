#include "ptrgeo/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ptrgeo/error.hpp"

namespace ptrgeo::decode {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Hypothesis {
  std::vector<int> tokens;
  double log_prob = 0.0;
  nn::LstmState state;
  ad::Var input;
  std::vector<char> visited;  // index 1..n
  std::size_t visited_count = 0;
};

// Whether `token` may be emitted next.
bool allowed(const nn::Model& model, Constraint constraint, std::size_t n, const Hypothesis& h,
             std::size_t token) {
  if (model.arch() != nn::Arch::ptrnet && token == n + 1) return false;  // start symbol
  if (constraint == Constraint::valid_tour) {
    if (token == kEndToken) return h.visited_count == n;
    return !h.visited[token];
  }
  return true;
}

bool better(double lp_a, const std::vector<int>& a, double lp_b, const std::vector<int>& b) {
  if (lp_a != lp_b) return lp_a > lp_b;
  return a < b;
}

}  // namespace

std::string_view to_string(Constraint c) {
  return c == Constraint::valid_tour ? "valid-tour" : "none";
}

Constraint parse_constraint(std::string_view name) {
  if (name == "none") return Constraint::none;
  if (name == "valid-tour" || name == "valid_tour") return Constraint::valid_tour;
  throw ArgumentError("unknown constraint: " + std::string(name));
}

std::size_t length_cap(Task task, std::size_t n) {
  switch (task) {
    case Task::hull:
      return 2 * n + 3;
    case Task::delaunay:
      return 3 * (3 * n) + 2;
    case Task::tsp:
      return n + 1;
  }
  return 2 * n + 3;
}

Decoded beam_search(const nn::Model& model, std::span<const geom::Point> points,
                    const Options& options) {
  if (options.width < 1) throw ArgumentError("beam width must be at least 1");
  const std::size_t n = points.size();
  model.check_length(n);
  const std::size_t cap = length_cap(model.task(), n);

  ad::Tape tape;
  const auto enc = model.encode(tape, points);
  std::vector<Hypothesis> live(1);
  live[0].state = enc.final_state;
  live[0].input = model.decoder_input(tape, enc, -1);
  live[0].visited.assign(n + 1, 0);

  struct Candidate {
    std::size_t parent;
    int token;
    double log_prob;
    std::vector<int> tokens;  // parent tokens + token (end token kept as 0)
  };
  std::vector<Decoded> finished;

  while (!live.empty()) {
    std::vector<Candidate> cands;
    std::vector<nn::LstmState> next_states(live.size());
    for (std::size_t h = 0; h < live.size(); ++h) {
      auto out = model.step(tape, enc, live[h].state, live[h].input);
      next_states[h] = out.state;
      const auto lp = out.log_probs.value().values();
      for (std::size_t tok = 0; tok < lp.size(); ++tok) {
        if (!allowed(model, options.constraint, n, live[h], tok)) continue;
        Candidate c{h, static_cast<int>(tok), live[h].log_prob + lp[tok], live[h].tokens};
        c.tokens.push_back(static_cast<int>(tok));
        cands.push_back(std::move(c));
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      return better(a.log_prob, a.tokens, b.log_prob, b.tokens);
    });
    if (cands.size() > options.width) cands.resize(options.width);

    std::vector<Hypothesis> next;
    for (auto& c : cands) {
      const Hypothesis& parent = live[c.parent];
      if (c.token == kEndToken) {
        finished.push_back({parent.tokens, c.log_prob, true, false, false});
        continue;
      }
      Hypothesis h;
      h.tokens = std::move(c.tokens);
      h.log_prob = c.log_prob;
      h.state = next_states[c.parent];
      h.input = model.decoder_input(tape, enc, c.token);
      h.visited = parent.visited;
      h.visited_count = parent.visited_count;
      if (!h.visited[static_cast<std::size_t>(c.token)]) {
        h.visited[static_cast<std::size_t>(c.token)] = 1;
        ++h.visited_count;
      }
      if (h.tokens.size() >= cap) {
        finished.push_back({h.tokens, h.log_prob, false, true, false});
        continue;
      }
      next.push_back(std::move(h));
    }
    live = std::move(next);

    // Scores only decrease, so no live hypothesis can overtake the best finished one.
    if (!finished.empty() && !live.empty()) {
      const auto best_done = std::max_element(
          finished.begin(), finished.end(),
          [](const Decoded& a, const Decoded& b) { return better(b.log_prob, b.tokens, a.log_prob, a.tokens); });
      double best_live = kNegInf;
      for (const auto& h : live) best_live = std::max(best_live, h.log_prob);
      if (best_done->log_prob > best_live) break;
    }
  }

  if (finished.empty()) {
    Decoded fail;
    fail.failed = true;
    return fail;
  }
  return *std::max_element(finished.begin(), finished.end(), [](const Decoded& a, const Decoded& b) {
    return better(b.log_prob, b.tokens, a.log_prob, a.tokens);
  });
}

Decoded greedy_decode(const nn::Model& model, std::span<const geom::Point> points,
                      Constraint constraint) {
  const std::size_t n = points.size();
  model.check_length(n);
  const std::size_t cap = length_cap(model.task(), n);
  ad::Tape tape;
  const auto enc = model.encode(tape, points);
  Hypothesis h;
  h.state = enc.final_state;
  h.input = model.decoder_input(tape, enc, -1);
  h.visited.assign(n + 1, 0);
  for (;;) {
    auto out = model.step(tape, enc, h.state, h.input);
    const auto lp = out.log_probs.value().values();
    std::size_t best = lp.size();
    for (std::size_t tok = 0; tok < lp.size(); ++tok) {
      if (!allowed(model, constraint, n, h, tok)) continue;
      if (best == lp.size() || lp[tok] > lp[best]) best = tok;
    }
    if (best == lp.size()) return {h.tokens, h.log_prob, false, false, true};
    h.log_prob += lp[best];
    if (best == static_cast<std::size_t>(kEndToken)) return {h.tokens, h.log_prob, true, false, false};
    h.tokens.push_back(static_cast<int>(best));
    if (!h.visited[best]) {
      h.visited[best] = 1;
      ++h.visited_count;
    }
    h.state = out.state;
    h.input = model.decoder_input(tape, enc, static_cast<int>(best));
    if (h.tokens.size() >= cap) return {h.tokens, h.log_prob, false, true, false};
  }
}

double sequence_log_prob(const nn::Model& model, std::span<const geom::Point> points,
                         std::span<const int> tokens) {
  data::Example ex;
  ex.task = model.task();
  ex.points.assign(points.begin(), points.end());
  ex.output.assign(tokens.begin(), tokens.end());
  ad::Tape tape;
  return -model.forward_nll(tape, ex).value().item();
}

}  // namespace ptrgeo::decode
