// ptrgeo command-line tool: generate | train | eval | plot.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ptrgeo/dataset.hpp"
#include "ptrgeo/decode.hpp"
#include "ptrgeo/error.hpp"
#include "ptrgeo/metrics.hpp"
#include "ptrgeo/svg.hpp"
#include "ptrgeo/train.hpp"
#include "ptrgeo/tsp.hpp"

namespace fs = std::filesystem;
using namespace ptrgeo;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

// FNV-1a, 64 bit.
std::uint64_t checksum(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::map<std::string, std::string> read_key_values(const fs::path& path) {
  std::map<std::string, std::string> kv;
  std::istringstream in(read_text(path));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

fs::path meta_path(const fs::path& checkpoint) {
  auto p = checkpoint;
  p += ".meta";
  return p;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string task;
  std::optional<std::size_t> n;
  std::size_t n_min = 0, n_max = 0;
  std::size_t count = 0;
  std::uint64_t seed = 1;
  std::string solver = "optimal";
  std::string out;
};

int run_generate(const GenerateArgs& a) {
  data::GenSpec spec;
  spec.task = parse_task(a.task);
  if (a.n) {
    spec.n_min = spec.n_max = *a.n;
  } else {
    if (!a.n_min || !a.n_max) throw ArgumentError("give --n or both --n-min and --n-max");
    spec.n_min = a.n_min;
    spec.n_max = a.n_max;
  }
  spec.count = a.count;
  spec.seed = a.seed;
  spec.solver = data::parse_tsp_solver(a.solver);
  data::validate(spec);

  const auto examples = data::generate(spec);
  std::string text;
  for (const auto& ex : examples) text += data::serialize(ex) + '\n';
  write_text(a.out, text);

  std::ostringstream manifest;
  manifest << "task=" << to_string(spec.task) << '\n'
           << "count=" << spec.count << '\n'
           << "n_min=" << spec.n_min << '\n'
           << "n_max=" << spec.n_max << '\n'
           << "seed=" << spec.seed << '\n'
           << "solver=" << (spec.task == Task::tsp ? data::to_string(spec.solver) : "exact") << '\n'
           << "checksum=fnv1a64:" << hex(checksum(text)) << '\n';
  auto mpath = fs::path(a.out);
  mpath += ".manifest";
  write_text(mpath, manifest.str());
  std::cout << "wrote " << examples.size() << " examples to " << a.out << '\n';
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string arch = "ptrnet";
  std::string data;
  std::string task;
  nn::HyperParams hp;
  std::size_t steps = 1000;
  std::string checkpoint;
  std::size_t checkpoint_every = 0;
  bool resume = false;
  bool force = false;
  std::string loss_trace;
  std::size_t log_every = 100;
};

int run_train(const TrainArgs& a) {
  const Task task = parse_task(a.task);
  const nn::Arch arch = nn::parse_arch(a.arch);
  a.hp.validate();
  const fs::path ckpt(a.checkpoint);
  if (a.resume && !fs::exists(ckpt)) throw ArgumentError("--resume: no checkpoint at " + a.checkpoint);
  if (!a.resume && !a.force && fs::exists(ckpt)) {
    throw ArgumentError("checkpoint " + a.checkpoint +
                        " already exists; pass --force to overwrite or --resume to continue");
  }

  const auto dataset = data::read_file(a.data, task);
  if (dataset.empty()) throw ArgumentError("no examples in " + a.data);

  std::size_t start_step = 0;
  std::optional<nn::Model> model;
  if (a.resume) {
    model = nn::load_checkpoint(ckpt);
    if (model->task() != task) throw ArgumentError("checkpoint task does not match --task");
    if (model->arch() != arch) throw ArgumentError("checkpoint architecture does not match --arch");
    const auto meta = read_key_values(meta_path(ckpt));
    const auto it = meta.find("step");
    if (it == meta.end()) throw ParseError("checkpoint metadata lacks step");
    start_step = std::stoull(it->second);
    if (meta.count("seed") && std::stoull(meta.at("seed")) != a.hp.seed) {
      throw ArgumentError("--seed differs from the checkpointed run");
    }
  } else {
    std::optional<std::size_t> fixed_n;
    if (arch != nn::Arch::ptrnet) fixed_n = dataset.front().n();
    model = nn::Model::create(arch, task, a.hp.hidden, a.hp.seed, a.hp.init_range, fixed_n);
  }

  std::ofstream trace;
  if (!a.loss_trace.empty()) {
    trace.open(a.loss_trace, a.resume ? std::ios::app : std::ios::trunc);
    if (!trace) throw Error("cannot open " + a.loss_trace);
  }

  nn::TrainOptions opt;
  opt.steps = a.steps;
  opt.start_step = start_step;
  opt.checkpoint_every = a.checkpoint_every;
  opt.checkpoint = [&](const nn::Model& m, std::size_t step) {
    nn::save_checkpoint(m, ckpt);
    write_text(meta_path(ckpt), "step=" + std::to_string(step) + "\nseed=" +
                                    std::to_string(a.hp.seed) + "\narch=" +
                                    std::string(nn::to_string(arch)) + "\n");
  };
  opt.log = [&](const nn::TrainLogRecord& r) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%zu\t%.17g\n", r.step, r.mean_nll);
    if (trace) trace << buf;
    if (a.log_every && (r.step % a.log_every == 0 || r.step == a.steps)) {
      std::printf("step=%zu loss=%.6f examples_per_sec=%.1f\n", r.step, r.mean_nll,
                  r.examples_per_sec);
      std::fflush(stdout);
    }
  };
  const auto result = nn::train(*model, dataset, a.hp, opt);
  if (result.steps_done == 0) {
    std::cout << "nothing to do: checkpoint already at step " << start_step << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string data;
  std::string task;
  std::string checkpoint;
  std::string solver;
  std::size_t beam = 1;
  std::string constraint = "none";
  std::string per_example;
  std::string out;
};

decode::Decoded from_label(std::vector<int> tokens) {
  decode::Decoded d;
  d.tokens = std::move(tokens);
  d.terminated = true;
  return d;
}

eval::Predictor solver_predictor(Task task, const std::string& name) {
  if (name == "label") return [](const data::Example& ex) { return from_label(ex.output); };
  if (task != Task::tsp) {
    if (name != "exact") throw ArgumentError("solver for " + std::string(to_string(task)) +
                                             " must be exact or label");
    return [task](const data::Example& ex) { return from_label(data::solve(task, ex.points)); };
  }
  const auto solver = data::parse_tsp_solver(name);
  return [solver](const data::Example& ex) {
    return from_label(data::solve(Task::tsp, ex.points, solver));
  };
}

int run_eval(const EvalArgs& a) {
  const Task task = parse_task(a.task);
  if (a.checkpoint.empty() == a.solver.empty()) {
    throw ArgumentError("give exactly one of --checkpoint and --solver");
  }
  const auto examples = data::read_file(a.data, task);

  eval::Report report;
  if (!a.checkpoint.empty()) {
    const nn::Model model = nn::load_checkpoint(a.checkpoint);
    if (model.task() != task) {
      throw ArgumentError("checkpoint was trained on " + std::string(to_string(model.task())) +
                          " but --task is " + std::string(to_string(task)));
    }
    decode::Options opt;
    opt.width = a.beam;
    opt.constraint = decode::parse_constraint(a.constraint);
    if (opt.width < 1) throw ArgumentError("--beam must be at least 1");
    for (const auto& ex : examples) model.check_length(ex.n());
    report = eval::evaluate(
        examples, [&](const data::Example& ex) { return decode::beam_search(model, ex.points, opt); },
        "checkpoint:" + fs::path(a.checkpoint).filename().string() + " beam=" +
            std::to_string(opt.width) + " constraint=" + std::string(decode::to_string(opt.constraint)));
  } else {
    report = eval::evaluate(examples, solver_predictor(task, a.solver), "solver:" + a.solver);
  }

  const std::string text = report.to_text();
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_text(a.out, text);
  }
  if (!a.per_example.empty()) write_text(a.per_example, report.to_tsv());
  return 0;
}

// ---------------------------------------------------------------- plot

struct PlotArgs {
  std::string data;
  std::string detail;
  std::string task;
  std::size_t index = 0;
  std::string out;
};

int run_plot(const PlotArgs& a) {
  const Task task = parse_task(a.task);
  if (a.data.empty() == a.detail.empty()) throw ArgumentError("give exactly one of --data and --detail");
  svg::Figure fig;
  fig.task = task;
  std::string doc;
  if (!a.data.empty()) {
    const auto examples = data::read_file(a.data, task);
    if (a.index >= examples.size()) throw ArgumentError("--index out of range");
    const auto& ex = examples[a.index];
    fig.points = ex.points;
    fig.truth = ex.output;
    fig.title = std::string(to_string(task)) + " example " + std::to_string(a.index);
    doc = svg::render(fig);
  } else {
    const auto records = eval::parse_tsv(read_text(a.detail));
    if (a.index >= records.size()) throw ArgumentError("--index out of range");
    const auto& r = records[a.index];
    fig.points = r.points;
    fig.truth = r.truth;
    fig.pred = r.pred;
    fig.title = std::string(to_string(task)) + " example " + std::to_string(r.index) +
                (r.correct ? " (correct)" : " (incorrect)");
    doc = svg::render(fig);
  }
  write_text(a.out, doc);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pointer-network geometry laboratory"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  const std::vector<std::string> tasks{"hull", "delaunay", "tsp"};

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate a solved dataset");
  g->add_option("--task", gen.task)->required()->check(CLI::IsMember(tasks));
  auto* n_opt = g->add_option("--n", gen.n, "Fixed number of points");
  g->add_option("--n-min", gen.n_min)->excludes(n_opt);
  g->add_option("--n-max", gen.n_max)->excludes(n_opt);
  g->add_option("--count", gen.count)->required();
  g->add_option("--seed", gen.seed);
  g->add_option("--solver", gen.solver, "TSP label solver: optimal, a1, a2, a3");
  g->add_option("-o,--output", gen.out)->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model");
  t->add_option("--arch", tr.arch)->check(CLI::IsMember({"ptrnet", "lstm", "lstm-attn"}));
  t->add_option("--data", tr.data)->required()->check(CLI::ExistingFile);
  t->add_option("--task", tr.task)->required()->check(CLI::IsMember(tasks));
  t->add_option("--hidden", tr.hp.hidden);
  t->add_option("--steps", tr.steps);
  t->add_option("--batch", tr.hp.batch);
  t->add_option("--lr", tr.hp.lr);
  t->add_option("--clip", tr.hp.clip);
  t->add_option("--init-range", tr.hp.init_range);
  t->add_option("--seed", tr.hp.seed);
  t->add_option("--checkpoint", tr.checkpoint)->required();
  t->add_option("--checkpoint-every", tr.checkpoint_every);
  t->add_flag("--resume", tr.resume);
  t->add_flag("--force", tr.force);
  t->add_option("--loss-trace", tr.loss_trace, "Write 'step<TAB>loss' lines");
  t->add_option("--log-every", tr.log_every);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint or a classical solver");
  e->add_option("--data", ev.data)->required()->check(CLI::ExistingFile);
  e->add_option("--task", ev.task)->required()->check(CLI::IsMember(tasks));
  e->add_option("--checkpoint", ev.checkpoint)->check(CLI::ExistingFile);
  e->add_option("--solver", ev.solver, "exact, label, optimal, a1, a2, a3");
  e->add_option("--beam", ev.beam);
  e->add_option("--constraint", ev.constraint)->check(CLI::IsMember({"none", "valid-tour"}));
  e->add_option("--per-example", ev.per_example);
  e->add_option("-o,--output", ev.out);

  PlotArgs pl;
  auto* p = app.add_subcommand("plot", "Render an example as SVG");
  p->add_option("--data", pl.data)->check(CLI::ExistingFile);
  p->add_option("--detail", pl.detail)->check(CLI::ExistingFile);
  p->add_option("--task", pl.task)->required()->check(CLI::IsMember(tasks));
  p->add_option("--index", pl.index);
  p->add_option("-o,--output", pl.out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*g) return run_generate(gen);
    if (*t) return run_train(tr);
    if (*e) return run_eval(ev);
    if (*p) return run_plot(pl);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 1;
}
