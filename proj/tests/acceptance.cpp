// Acceptance gate. Prints one PASS/FAIL line per criterion:
//
//   ptrgeo_acceptance [--only 1,5] [--workdir DIR] [--fresh] [--report FILE]
//
// --report also writes the PASS/FAIL lines to FILE.
//
// Criterion 5 trains real models. Its checkpoints are kept in the work
// directory together with the exact configuration that produced them, so an
// interrupted run resumes where it stopped (training is bit-deterministic, so
// a resumed run ends in the same state as an uninterrupted one). --fresh
// discards them first.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fd_check.hpp"
#include "geometry_oracles.hpp"
#include "ptrgeo/dataset.hpp"
#include "ptrgeo/decode.hpp"
#include "ptrgeo/error.hpp"
#include "ptrgeo/metrics.hpp"
#include "ptrgeo/models.hpp"
#include "ptrgeo/train.hpp"
#include "ptrgeo/tsp.hpp"

#ifndef PTRGEO_CLI
#error "PTRGEO_CLI must point at the ptrgeo executable"
#endif
#ifndef PTRGEO_WORKDIR
#define PTRGEO_WORKDIR "acceptance_work"
#endif

namespace fs = std::filesystem;
using namespace ptrgeo;
using geom::Point;

namespace {

fs::path g_workdir = PTRGEO_WORKDIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<Point> random_points(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng)};
  return pts;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args, std::string* output = nullptr) {
  const fs::path log = g_workdir / "cli.log";
  const std::string cmd = std::string(PTRGEO_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  if (output) *output = slurp(log);
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

// ------------------------------------------------------------------ 1

Outcome gradient_check() {
  constexpr double kLimit = 1e-4;
  double worst = 0.0;
  std::string worst_at;
  int configs = 0;
  for (auto arch : {nn::Arch::ptrnet, nn::Arch::seq2seq, nn::Arch::seq2seq_attn}) {
    for (std::size_t hidden : {4u, 8u}) {
      for (std::size_t n : {3u, 4u}) {
        for (Task task : {Task::hull, Task::tsp}) {
          data::GenSpec spec{task, 1, n, n, 100 + n + hidden, data::TspSolver::optimal};
          const auto ex = data::generate_one(spec, 0);
          auto model = nn::Model::create(arch, task, hidden, 7 * hidden + n, 0.5, n);
          for (const auto& pe : fdcheck::model_param_errors(model, ex, 1e-5)) {
            if (pe.error > worst) {
              worst = pe.error;
              worst_at = std::string(nn::to_string(arch)) + " h=" + std::to_string(hidden) +
                         " n=" + std::to_string(n) + " " + pe.name;
            }
          }
          ++configs;
        }
      }
    }
  }
  return {worst < kLimit, fmt("worst relative error %.3g at %s (limit %g, %d configurations, h=1e-5)",
                              worst, worst_at.c_str(), kLimit, configs)};
}

// ------------------------------------------------------------------ 2

Outcome solver_oracles() {
  std::mt19937_64 rng(2024);
  std::size_t hull_bad = 0;
  std::uniform_int_distribution<std::size_t> hull_n(3, 50);
  for (int trial = 0; trial < 10000; ++trial) {
    auto pts = random_points(rng, hull_n(rng));
    std::vector<int> h;
    try {
      h = geom::convex_hull(pts);
    } catch (const DegenerateInputError&) {
      --trial;
      continue;
    }
    bool ok = h == oracle::brute_force_hull(pts);
    for (const auto& p : pts) ok = ok && oracle::inside_or_on(pts, h, p);
    hull_bad += !ok;
  }

  std::size_t hk_bad = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto pts = random_points(rng, 7);
    const auto t = tsp::held_karp(tsp::DistanceMatrix::euclidean(pts));
    std::vector<int> rest{2, 3, 4, 5, 6, 7};
    double best = 1e300;
    do {
      if (rest.front() > rest.back()) continue;
      std::vector<int> tour{1};
      tour.insert(tour.end(), rest.begin(), rest.end());
      best = std::min(best, tsp::tour_length(pts, tour));
    } while (std::next_permutation(rest.begin(), rest.end()));
    hk_bad += t.length != best;
  }

  std::size_t del_bad = 0;
  std::uniform_int_distribution<std::size_t> del_n(4, 20);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto pts = random_points(rng, del_n(rng));
    const auto tris = geom::delaunay(pts);
    const std::size_t h = geom::convex_hull(pts).size() - 1;
    bool ok = tris.size() == 2 * pts.size() - 2 - h;
    for (const auto& t : tris) {
      Point a = pts[t[0] - 1], b = pts[t[1] - 1], c = pts[t[2] - 1];
      if (geom::cross(a, b, c) < 0) std::swap(b, c);
      for (std::size_t k = 0; k < pts.size(); ++k) {
        const int idx = static_cast<int>(k) + 1;
        if (idx == t[0] || idx == t[1] || idx == t[2]) continue;
        ok = ok && oracle::exact_in_circle(a, b, c, pts[k]) <= 0;
      }
    }
    del_bad += !ok;
  }
  return {hull_bad == 0 && hk_bad == 0 && del_bad == 0,
          fmt("hull mismatches %zu/10000, held-karp mismatches %zu/500, delaunay failures %zu/1000",
              hull_bad, hk_bad, del_bad)};
}

// ------------------------------------------------------------------ 3

Outcome tsp_table() {
  struct Row {
    std::size_t n;
    double opt_ref, opt_tol, a1_ref, a1_tol;
  };
  const Row rows[] = {{5, 2.12, 0.02, 2.18, 0.03}, {10, 2.87, 0.03, 3.07, 0.04}};
  constexpr std::size_t kCount = 10000;
  bool pass = true;
  std::string detail;
  std::size_t a3_checked = 0, a3_bad = 0;
  double a3_worst = 0.0;
  auto check_a3 = [&](std::span<const Point> pts, double opt) {
    const double r = tsp::christofides(pts).length / opt;
    a3_worst = std::max(a3_worst, r);
    a3_bad += r > 1.5;
    ++a3_checked;
  };
  for (const auto& row : rows) {
    const auto examples = data::generate({Task::tsp, kCount, row.n, row.n, 500 + row.n,
                                          data::TspSolver::optimal});
    double opt = 0.0, a1 = 0.0;
    for (const auto& ex : examples) {
      const double o = tsp::tour_length(ex.points, ex.output);
      opt += o;
      a1 += tsp::greedy_edge(tsp::DistanceMatrix::euclidean(ex.points)).length;
      check_a3(ex.points, o);
    }
    opt /= kCount;
    a1 /= kCount;
    const bool ok_opt = std::abs(opt - row.opt_ref) <= row.opt_tol;
    const bool ok_a1 = std::abs(a1 - row.a1_ref) <= row.a1_tol;
    pass = pass && ok_opt && ok_a1;
    detail += fmt("n=%zu optimal %.4f (%.2f±%.2f%s) A1 %.4f (%.2f±%.2f%s); ", row.n, opt,
                  row.opt_ref, row.opt_tol, ok_opt ? "" : " MISS", a1, row.a1_ref, row.a1_tol,
                  ok_a1 ? "" : " MISS");
  }
  std::mt19937_64 rng(16);
  for (std::size_t n = 3; n <= 16; ++n) {
    for (int trial = 0; trial < 100; ++trial) {
      const auto pts = random_points(rng, n);
      check_a3(pts, tsp::held_karp(tsp::DistanceMatrix::euclidean(pts)).length);
    }
  }
  pass = pass && a3_bad == 0;
  detail += fmt("A3/optimal worst %.4f over %zu instances with n<=16, %zu above 1.5", a3_worst,
                a3_checked, a3_bad);
  return {pass, detail};
}

// ------------------------------------------------------------------ 4

Outcome any_length() {
  const fs::path dir = g_workdir / "c4";
  fs::create_directories(dir);
  auto p = [&](const char* leaf) { return (dir / leaf).string(); };
  bool pass = true;
  std::string detail;
  if (run_cli("generate --task hull --n 5 --count 64 --seed 41 -o " + p("train5.txt")) != 0) {
    return {false, "could not generate training data"};
  }
  const std::string common = " --data " + p("train5.txt") +
                             " --task hull --hidden 16 --batch 16 --steps 20 --force --checkpoint ";
  if (run_cli("train --arch ptrnet" + common + p("ptr.bin")) != 0 ||
      run_cli("train --arch lstm" + common + p("lstm.bin")) != 0 ||
      run_cli("train --arch lstm-attn" + common + p("attn.bin")) != 0) {
    return {false, "could not train the small models"};
  }

  // One pointer checkpoint, many input lengths.
  const auto ptr = nn::load_checkpoint(p("ptr.bin"));
  std::mt19937_64 rng(4);
  std::size_t lengths_ok = 0;
  const std::vector<std::size_t> lengths{3, 4, 5, 6, 8, 10, 13, 20, 35, 50};
  for (std::size_t n : lengths) {
    const auto pts = random_points(rng, n);
    ad::Tape tape;
    const auto enc = ptr.encode(tape, pts);
    const auto out = ptr.step(tape, enc, enc.final_state, ptr.decoder_input(tape, enc, -1));
    double mass = 0.0;
    for (double lp : out.log_probs.value().values()) mass += std::exp(lp);
    const auto d = decode::beam_search(ptr, pts, {2, decode::Constraint::none});
    const bool ok = out.log_probs.value().size() == n + 1 && std::abs(mass - 1.0) < 1e-12 &&
                    !d.failed;
    lengths_ok += ok;
  }
  pass = pass && lengths_ok == lengths.size();
  detail += fmt("ptrnet checkpoint decoded %zu/%zu lengths in [3,50]; ", lengths_ok, lengths.size());

  // Through the CLI: n=8 data against each checkpoint.
  if (run_cli("generate --task hull --n 8 --count 20 --seed 42 -o " + p("test8.txt")) != 0) {
    return {false, "could not generate n=8 data"};
  }
  std::string out;
  const int ptr_status = run_cli("eval --data " + p("test8.txt") + " --task hull --checkpoint " + p("ptr.bin"), &out);
  pass = pass && ptr_status == 0;
  for (const char* name : {"lstm.bin", "attn.bin"}) {
    const int status = run_cli("eval --data " + p("test8.txt") + " --task hull --checkpoint " + p(name), &out);
    const bool rejected = status != 0 && out.find("error:") != std::string::npos &&
                          out.find("n=5") != std::string::npos;
    pass = pass && rejected;
    detail += fmt("%s at n=8: %s; ", name, rejected ? "rejected" : "NOT rejected");
    if (rejected) {
      const auto first_line = out.substr(0, out.find('\n'));
      detail += "\"" + first_line + "\"; ";
    }
  }
  // Library level: the typed error.
  const auto base = nn::load_checkpoint(p("lstm.bin"));
  bool typed = false;
  try {
    decode::greedy_decode(base, random_points(rng, 6));
  } catch (const UnsupportedLengthError&) {
    typed = true;
  }
  pass = pass && typed;
  detail += fmt("ptrnet eval at n=8 exit %d; baseline n=6 decode raises UnsupportedLengthError: %s",
                ptr_status, typed ? "yes" : "no");
  return {pass, detail};
}

// ------------------------------------------------------------------ 5

// Trains `model` from `base_step` to `steps`, resuming from a checkpoint in
// the work directory when one with the identical configuration exists.
struct Run {
  std::string name;
  std::string config;
  std::size_t resumed_from = 0;
  double seconds = 0.0;
};

nn::Model train_cached(Run& run, nn::Model model, std::span<const data::Example> dataset,
                       const nn::HyperParams& hp, std::size_t steps, std::size_t every,
                       std::size_t base_step = 0) {
  const fs::path ckpt = g_workdir / (run.name + ".bin");
  const fs::path meta = g_workdir / (run.name + ".meta");
  std::size_t start = base_step;
  if (fs::exists(ckpt) && fs::exists(meta)) {
    std::istringstream in(slurp(meta));
    std::string config_line, step_line;
    std::getline(in, config_line);
    std::getline(in, step_line);
    if (config_line == run.config && step_line.rfind("step=", 0) == 0) {
      const std::size_t saved = std::stoull(step_line.substr(5));
      if (saved >= base_step && saved <= steps) {
        model = nn::load_checkpoint(ckpt);
        start = saved;
      }
    }
  }
  run.resumed_from = start;
  nn::TrainOptions opt;
  opt.steps = steps;
  opt.start_step = start;
  opt.checkpoint_every = every;
  opt.checkpoint = [&](const nn::Model& m, std::size_t step) {
    nn::save_checkpoint(m, ckpt);
    std::ofstream(meta) << run.config << "\nstep=" << step << "\n";
  };
  opt.log = [&](const nn::TrainLogRecord& r) {
    if (r.step % every == 0) {
      std::fprintf(stderr, "  [%s] step %zu loss %.4f (%.0f ex/s)\n", run.name.c_str(), r.step,
                   r.mean_nll, r.examples_per_sec);
    }
  };
  const auto t0 = std::chrono::steady_clock::now();
  nn::train(model, dataset, hp, opt);
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return model;
}

eval::Report greedy_report(const nn::Model& model, std::span<const data::Example> examples) {
  return eval::evaluate(
      examples,
      [&](const data::Example& ex) { return decode::greedy_decode(model, ex.points); },
      "acceptance");
}

std::string hp_config(const std::string& tag, const nn::HyperParams& hp, std::size_t data_seed,
                      std::size_t count) {
  return fmt("%s hidden=%zu lr=%g batch=%zu clip=%g init=%g seed=%llu data_seed=%zu count=%zu",
             tag.c_str(), hp.hidden, hp.lr, hp.batch, hp.clip, hp.init_range,
             static_cast<unsigned long long>(hp.seed), data_seed, count);
}

// Initial weights are drawn from U(-r, r) with r = 0.08 * sqrt(512 / hidden):
// the pre-activation spread of the 512-unit reference setting at r = 0.08.
double scaled_init(std::size_t hidden) { return 0.08 * std::sqrt(512.0 / static_cast<double>(hidden)); }

Outcome overfit_small() {
  const auto ds = data::generate({Task::hull, 64, 5, 5, 64, data::TspSolver::optimal});
  nn::HyperParams hp;
  hp.hidden = 64;
  hp.batch = 64;
  hp.lr = 1.0;
  hp.clip = 2.0;
  hp.init_range = scaled_init(hp.hidden);
  hp.seed = 3;
  bool pass = true;
  std::string detail;
  for (auto arch : {nn::Arch::ptrnet, nn::Arch::seq2seq_attn, nn::Arch::seq2seq}) {
    auto model = nn::Model::create(arch, Task::hull, hp.hidden, hp.seed, hp.init_range, 5);
    const std::string name = std::string("c5a_") + std::string(nn::to_string(arch));
    Run run{name, hp_config(name, hp, 64, 64)};
    model = train_cached(run, std::move(model), ds, hp, 2000, 250);
    const auto report = greedy_report(model, ds);
    // Informational: teacher-forced NLL below ln(1.05) per target token.
    std::size_t confident = 0;
    for (const auto& ex : ds) {
      ad::Tape tape;
      const double nll = model.forward_nll(tape, ex).value().item();
      confident += nll < std::log(1.05) * static_cast<double>(ex.output.size() + 1);
    }
    const bool ok = report.accuracy_pct == 100.0;
    if (arch == nn::Arch::ptrnet) pass = ok;
    detail += fmt("%s greedy accuracy %.1f%%, NLL<ln(1.05)*m on %zu/64%s; ",
                  std::string(nn::to_string(arch)).c_str(), report.accuracy_pct, confident,
                  arch == nn::Arch::ptrnet ? "" : " (baseline, informational)");
  }
  detail += "2000 steps, hidden 64, batch 64";
  return {pass, detail};
}

struct Learned {
  bool ready = false;
  std::string error;
  nn::Model model = nn::Model::create(nn::Arch::ptrnet, Task::hull, 1, 0);
  Run run;
};

// Two phases over one batch stream: lr 1.0 up to kLearnSteps, then lr 0.1 up
// to kAnnealSteps. The switch point and length were chosen on a separate
// validation set (seed 21), never on the held-out sets below.
constexpr std::size_t kLearnSteps = 12000;
constexpr std::size_t kAnnealSteps = 14000;
constexpr double kAnnealLr = 0.1;

Learned& learned_hull_model() {
  static Learned cache;
  if (cache.ready || !cache.error.empty()) return cache;
  try {
    const auto ds = data::generate({Task::hull, 50000, 5, 5, 11, data::TspSolver::optimal});
    nn::HyperParams hp;
    hp.hidden = 128;
    hp.batch = 128;
    hp.lr = 1.0;
    hp.clip = 2.0;
    hp.init_range = scaled_init(hp.hidden);
    hp.seed = 5;
    auto model = nn::Model::create(nn::Arch::ptrnet, Task::hull, hp.hidden, hp.seed, hp.init_range);
    cache.run = Run{"c5b_ptrnet", hp_config("c5b_ptrnet", hp, 11, 50000)};
    model = train_cached(cache.run, std::move(model), ds, hp, kLearnSteps, 500);
    const std::string phase1 = cache.run.config;
    const double phase1_seconds = cache.run.seconds;
    hp.lr = kAnnealLr;
    cache.run = Run{"c5b_ptrnet_anneal", phase1 + fmt(" then lr=%g from %zu", kAnnealLr, kLearnSteps)};
    cache.model = train_cached(cache.run, std::move(model), ds, hp, kAnnealSteps, 500, kLearnSteps);
    cache.run.seconds += phase1_seconds;
    cache.ready = true;
  } catch (const std::exception& e) {
    cache.error = e.what();
  }
  return cache;
}

Outcome learn_hull() {
  auto& l = learned_hull_model();
  if (!l.ready) return {false, "training failed: " + l.error};
  const auto test = data::generate({Task::hull, 1000, 5, 5, 12, data::TspSolver::optimal});
  const auto r = greedy_report(l.model, test);
  const bool pass = r.accuracy_pct >= 80.0 && !r.fail && r.coverage_pct >= 99.0;
  return {pass, fmt("held-out n=5: accuracy %.2f%% (>=80), area coverage %s%.3f%% (>=99), "
                    "not simple %zu/1000; %zu steps at lr 1 then %zu at lr %g, batch 128, "
                    "50000 examples, hidden 128, %.0f s this run (second phase resumed from "
                    "step %zu)",
                    r.accuracy_pct, r.fail ? "FAIL " : "", r.coverage_pct, r.not_simple,
                    kLearnSteps, kAnnealSteps - kLearnSteps, kAnnealLr, l.run.seconds,
                    l.run.resumed_from)};
}

Outcome generalize_hull() {
  auto& l = learned_hull_model();
  if (!l.ready) return {false, "training failed: " + l.error};
  const auto test = data::generate({Task::hull, 1000, 8, 8, 13, data::TspSolver::optimal});
  const auto r = greedy_report(l.model, test);
  const bool pass = !r.fail && r.coverage_pct >= 90.0;
  return {pass, fmt("n=5-trained model at n=8: area coverage %s%.3f%% (>=90), accuracy %.2f%%, "
                    "not simple %zu/1000",
                    r.fail ? "FAIL " : "", r.coverage_pct, r.accuracy_pct, r.not_simple)};
}

// ------------------------------------------------------------------ 6

Outcome metric_suite() {
  std::mt19937_64 rng(6);
  std::size_t failures = 0;
  std::size_t checks = 0;
  auto expect = [&](bool ok) {
    ++checks;
    failures += !ok;
  };

  for (int trial = 0; trial < 2000; ++trial) {
    const auto pts = random_points(rng, 3 + trial % 30);
    std::vector<int> hull;
    try {
      hull = geom::convex_hull(pts);
    } catch (const DegenerateInputError&) {
      continue;
    }
    const std::vector<int> cycle(hull.begin(), hull.end() - 1);
    for (std::size_t r = 0; r < cycle.size(); ++r) {
      std::vector<int> rotated(cycle.begin() + r, cycle.end());
      rotated.insert(rotated.end(), cycle.begin(), cycle.begin() + r);
      expect(eval::hull_accuracy(rotated, hull));
      rotated.push_back(rotated.front());
      expect(eval::hull_accuracy(rotated, hull));
      const auto c = eval::area_coverage(rotated, hull, pts);
      expect(c.simple && c.ratio == 1.0);
    }
    if (cycle.size() >= 3) {
      std::vector<int> reflected(cycle.rbegin(), cycle.rend());
      expect(!eval::hull_accuracy(reflected, hull));
    }
  }

  for (std::size_t total : {1u, 50u, 99u, 100u, 1000u, 12345u}) {
    for (std::size_t bad = 0; bad <= std::min<std::size_t>(total, 200); ++bad) {
      expect(eval::coverage_fails(bad, total) == (bad * 100 > total));
    }
  }

  for (int trial = 0; trial < 300; ++trial) {
    const auto pts = random_points(rng, 4 + trial % 17);
    const auto tris = geom::delaunay(pts);
    std::vector<int> truth;
    for (const auto& t : tris) truth.insert(truth.end(), t.begin(), t.end());
    auto shuffled = tris;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::vector<int> pred;
    for (auto t : shuffled) {
      std::shuffle(t.begin(), t.end(), rng);
      pred.insert(pred.end(), t.begin(), t.end());
    }
    const auto s = eval::triangulation_metrics(pred, truth);
    expect(s.exact && s.coverage == 1.0 && s.malformed == 0);
  }

  std::size_t tours = 0, valid = 0;
  for (std::size_t n = 3; n <= 20; ++n) {
    const auto model = nn::Model::create(nn::Arch::ptrnet, Task::tsp, 16, 90 + n, 1.0);
    for (std::size_t width : {1u, 3u}) {
      for (int trial = 0; trial < 10; ++trial) {
        const auto pts = random_points(rng, n);
        const auto d = decode::beam_search(model, pts, {width, decode::Constraint::valid_tour});
        ++tours;
        valid += tsp::is_permutation_of_cities(d.tokens, n);
      }
    }
  }
  expect(valid == tours);
  return {failures == 0, fmt("%zu/%zu exact assertions hold; constrained beam validity %zu/%zu",
                             checks - failures, checks, valid, tours)};
}

// ------------------------------------------------------------------ 7

Outcome determinism() {
  const fs::path dir = g_workdir / "c7";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::vector<std::string> mismatches;
  std::size_t compared = 0;
  auto twice = [&](const std::string& what, const std::function<std::string(const std::string&)>& cmd,
                   const std::vector<std::string>& outputs) {
    for (const char* tag : {"a", "b"}) {
      if (run_cli(cmd(tag)) != 0) {
        mismatches.push_back(what + " failed to run");
        return;
      }
    }
    for (const auto& o : outputs) {
      ++compared;
      const auto a = slurp(dir / (o + ".a")), b = slurp(dir / (o + ".b"));
      if (a.empty() || a != b) mismatches.push_back(what + ":" + o);
    }
  };
  auto p = [&](const std::string& leaf) { return (dir / leaf).string(); };

  for (const char* task : {"hull", "delaunay", "tsp"}) {
    const std::string t = task;
    twice("generate " + t, [&](const std::string& tag) {
      return "generate --task " + t + " --n-min 5 --n-max 9 --count 200 --seed 7 -o " + p(t + ".txt." + tag);
    }, {t + ".txt"});
  }
  if (run_cli("generate --task tsp --n 6 --count 60 --seed 8 -o " + p("tsp6.txt")) != 0) {
    return {false, "generate failed"};
  }
  twice("train", [&](const std::string& tag) {
    return "train --data " + p("tsp6.txt") + " --task tsp --hidden 16 --batch 8 --steps 15 --seed 4 --force "
           "--checkpoint " + p("m.bin." + tag) + " --loss-trace " + p("trace." + tag);
  }, {"m.bin", "trace"});
  twice("eval", [&](const std::string& tag) {
    return "eval --data " + p("tsp6.txt") + " --task tsp --checkpoint " + p("m.bin.a") +
           " --beam 3 --constraint valid-tour --per-example " + p("detail." + tag) + " -o " +
           p("report." + tag);
  }, {"detail", "report"});
  twice("eval solver", [&](const std::string& tag) {
    return "eval --data " + p("tsp6.txt") + " --task tsp --solver a3 -o " + p("solver." + tag);
  }, {"solver"});
  twice("plot", [&](const std::string& tag) {
    return "plot --detail " + p("detail.a") + " --task tsp --index 2 -o " + p("fig." + tag);
  }, {"fig"});
  twice("plot data", [&](const std::string& tag) {
    return "plot --data " + p("hull.txt.a") + " --task hull --index 5 -o " + p("hfig." + tag);
  }, {"hfig"});

  std::string detail = fmt("%zu artifact pairs compared", compared);
  for (const auto& m : mismatches) detail += "; differs: " + m;
  return {mismatches.empty(), detail};
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*fn)();
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  bool fresh = false;
  std::string report_path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      std::string item;
      while (std::getline(list, item, ',')) only.insert(std::stoi(item));
    } else if (arg == "--workdir" && i + 1 < argc) {
      g_workdir = argv[++i];
    } else if (arg == "--report" && i + 1 < argc) {
      report_path = argv[++i];
    } else if (arg == "--fresh") {
      fresh = true;
    } else {
      std::fprintf(stderr, "usage: %s [--only N[,M...]] [--workdir DIR] [--fresh] [--report FILE]\n", argv[0]);
      return 2;
    }
  }
  if (fresh) fs::remove_all(g_workdir);
  fs::create_directories(g_workdir);

  const Criterion criteria[] = {
      {1, "gradient correctness", gradient_check},
      {2, "solver oracle equivalence", solver_oracles},
      {3, "classical tsp tour lengths", tsp_table},
      {4, "pointer model accepts any n, baselines reject", any_length},
      {5, "5a overfit 64 hull examples", overfit_small},
      {5, "5b hull n=5 learning", learn_hull},
      {5, "5c hull n=8 generalization", generalize_hull},
      {6, "metric unit suite", metric_suite},
      {7, "determinism of cli artifacts", determinism},
  };
  std::ofstream report;
  if (!report_path.empty()) report.open(report_path, std::ios::trunc);
  bool all = true;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all = all && o.pass;
    const std::string line = fmt("criterion %d %s | %s | ", c.id, o.pass ? "PASS" : "FAIL", c.name) +
                             o.detail + fmt(" [%.1fs]\n", secs);
    std::fputs(line.c_str(), stdout);
    std::fflush(stdout);
    if (report) report << line << std::flush;
  }
  return all ? 0 : 1;
}
