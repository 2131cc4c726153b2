// Python bindings. Points cross the boundary as sequences of (x, y) pairs
// (lists of tuples or an (n, 2) numpy array); indices stay 1-based.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "ptrgeo/dataset.hpp"
#include "ptrgeo/decode.hpp"
#include "ptrgeo/error.hpp"
#include "ptrgeo/geometry.hpp"
#include "ptrgeo/metrics.hpp"
#include "ptrgeo/models.hpp"
#include "ptrgeo/train.hpp"
#include "ptrgeo/tsp.hpp"

namespace py = pybind11;
using namespace ptrgeo;

namespace {

using PyPoints = std::vector<std::array<double, 2>>;

std::vector<geom::Point> to_points(const PyPoints& in) {
  std::vector<geom::Point> out;
  out.reserve(in.size());
  for (const auto& p : in) out.push_back({p[0], p[1]});
  return out;
}

PyPoints from_points(const std::vector<geom::Point>& in) {
  PyPoints out;
  out.reserve(in.size());
  for (const auto& p : in) out.push_back({p.x, p.y});
  return out;
}

py::tuple tour_tuple(const tsp::Tour& t) { return py::make_tuple(t.order, t.length); }

py::dict decoded_dict(const decode::Decoded& d) {
  py::dict out;
  out["tokens"] = d.tokens;
  out["log_prob"] = d.log_prob;
  out["terminated"] = d.terminated;
  out["cap_hit"] = d.cap_hit;
  out["failed"] = d.failed;
  return out;
}

py::dict report_dict(const eval::Report& r) {
  py::dict out;
  out["task"] = std::string(to_string(r.task));
  out["count"] = r.records.size();
  out["accuracy_pct"] = r.accuracy_pct;
  out["coverage_pct"] = r.coverage_pct;
  out["coverage_fail"] = r.fail;
  out["not_simple"] = r.not_simple;
  out["validity_pct"] = r.validity_pct;
  out["mean_length"] = r.mean_length;
  out["mean_truth_length"] = r.mean_truth_length;
  out["cap_hits"] = r.cap_hits;
  out["text"] = r.to_text();
  return out;
}

template <typename Fn>
auto with_matrix(Fn fn) {
  return [fn](const PyPoints& pts) {
    return tour_tuple(fn(tsp::DistanceMatrix::euclidean(to_points(pts))));
  };
}

}  // namespace

PYBIND11_MODULE(_ptrgeo, m) {
  m.doc() = "Pointer networks and exact solvers for planar combinatorial problems";

  auto base = py::register_exception<Error>(m, "PtrgeoError", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", base);
  py::register_exception<ContractError>(m, "ContractError", base);
  py::register_exception<TrainingError>(m, "TrainingError", base);
  py::register_exception<DegenerateInputError>(m, "DegenerateInputError", base);
  py::register_exception<CapacityError>(m, "CapacityError", base);
  py::register_exception<SpecError>(m, "SpecError", base);
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<ValidationError>(m, "ValidationError", base);
  py::register_exception<UnsupportedLengthError>(m, "UnsupportedLengthError", base);
  py::register_exception<ArgumentError>(m, "ArgumentError", base);

  // Geometry.
  m.def("convex_hull", [](const PyPoints& p) { return geom::convex_hull(to_points(p)); },
        py::arg("points"), "Counter-clockwise hull indices from the lowest index, closed.");
  m.def("delaunay", [](const PyPoints& p) { return geom::delaunay(to_points(p)); },
        py::arg("points"), "Canonical Delaunay triangles as ascending index triples.");
  m.def("shoelace_area",
        [](const PyPoints& ring) { return geom::shoelace_area(to_points(ring)); },
        py::arg("ring"));

  // TSP.
  m.def("held_karp", with_matrix(tsp::held_karp), py::arg("points"),
        "Optimal tour as (order, length).");
  m.def("a1", with_matrix(tsp::greedy_edge), py::arg("points"), "Greedy edge matching tour.");
  m.def("a2", with_matrix(tsp::greedy_edge_two_opt), py::arg("points"),
        "Greedy edge matching improved by 2-opt.");
  m.def("a3", [](const PyPoints& p) { return tour_tuple(tsp::christofides(to_points(p))); },
        py::arg("points"), "Christofides tour.");
  m.def("nearest_neighbor", with_matrix(tsp::nearest_neighbor), py::arg("points"));
  m.def("tour_length",
        [](const PyPoints& p, const std::vector<int>& tour) {
          return tsp::tour_length(to_points(p), tour);
        },
        py::arg("points"), py::arg("tour"));

  // Data.
  py::class_<data::Example>(m, "Example")
      .def(py::init([](const std::string& task, const PyPoints& points, std::vector<int> output) {
             data::Example ex{parse_task(task), to_points(points), std::move(output)};
             data::validate_example(ex);
             return ex;
           }),
           py::arg("task"), py::arg("points"), py::arg("output"))
      .def_property_readonly("task", [](const data::Example& e) { return std::string(to_string(e.task)); })
      .def_property_readonly("points", [](const data::Example& e) { return from_points(e.points); })
      .def_readonly("output", &data::Example::output)
      .def_property_readonly("n", &data::Example::n)
      .def("__eq__", [](const data::Example& a, const data::Example& b) { return a == b; })
      .def("__repr__", [](const data::Example& e) {
        return "<Example " + std::string(to_string(e.task)) + " n=" + std::to_string(e.n()) + ">";
      });

  m.def("generate",
        [](const std::string& task, std::size_t count, std::size_t n_min, std::size_t n_max,
           std::uint64_t seed, const std::string& solver) {
          data::GenSpec spec{parse_task(task), count, n_min, n_max, seed,
                             data::parse_tsp_solver(solver)};
          py::gil_scoped_release release;
          return data::generate(spec);
        },
        py::arg("task"), py::arg("count"), py::arg("n_min"), py::arg("n_max"), py::arg("seed"),
        py::arg("solver") = "optimal");
  m.def("serialize", &data::serialize, py::arg("example"));
  m.def("parse",
        [](const std::string& line, const std::string& task) {
          return data::parse(line, parse_task(task));
        },
        py::arg("line"), py::arg("task"));
  m.def("write_file",
        [](const std::filesystem::path& path, const std::vector<data::Example>& examples) {
          data::write_file(path, examples);
        },
        py::arg("path"), py::arg("examples"));
  m.def("read_file",
        [](const std::filesystem::path& path, const std::string& task) {
          return data::read_file(path, parse_task(task));
        },
        py::arg("path"), py::arg("task"));

  // Models.
  py::class_<nn::Model>(m, "Model")
      .def_static("create",
                  [](const std::string& arch, const std::string& task, std::size_t hidden,
                     std::uint64_t seed, double init_range, std::optional<std::size_t> fixed_n) {
                    return nn::Model::create(nn::parse_arch(arch), parse_task(task), hidden, seed,
                                             init_range, fixed_n);
                  },
                  py::arg("arch"), py::arg("task"), py::arg("hidden"), py::arg("seed") = 1,
                  py::arg("init_range") = 0.08, py::arg("fixed_n") = py::none())
      .def_static("load", &nn::load_checkpoint, py::arg("path"))
      .def("save", [](const nn::Model& m, const std::filesystem::path& p) { nn::save_checkpoint(m, p); },
           py::arg("path"))
      .def_property_readonly("arch", [](const nn::Model& m) { return std::string(nn::to_string(m.arch())); })
      .def_property_readonly("task", [](const nn::Model& m) { return std::string(to_string(m.task())); })
      .def_property_readonly("hidden", &nn::Model::hidden)
      .def_property_readonly("fixed_n", &nn::Model::fixed_n)
      .def("nll",
           [](const nn::Model& m, const data::Example& ex) {
             ad::Tape tape;
             return m.forward_nll(tape, ex).value().item();
           },
           py::arg("example"), "Teacher-forced negative log-likelihood (summed over steps).")
      .def("decode",
           [](const nn::Model& m, const PyPoints& pts, std::size_t beam, const std::string& constraint) {
             const auto points = to_points(pts);
             py::gil_scoped_release release;
             return decode::beam_search(m, points, {beam, decode::parse_constraint(constraint)});
           },
           py::arg("points"), py::arg("beam") = 1, py::arg("constraint") = "none")
      .def("sequence_log_prob",
           [](const nn::Model& m, const PyPoints& pts, const std::vector<int>& tokens) {
             return decode::sequence_log_prob(m, to_points(pts), tokens);
           },
           py::arg("points"), py::arg("tokens"));

  py::class_<decode::Decoded>(m, "Decoded")
      .def_readonly("tokens", &decode::Decoded::tokens)
      .def_readonly("log_prob", &decode::Decoded::log_prob)
      .def_readonly("terminated", &decode::Decoded::terminated)
      .def_readonly("cap_hit", &decode::Decoded::cap_hit)
      .def_readonly("failed", &decode::Decoded::failed)
      .def("as_dict", &decoded_dict);

  m.def("train",
        [](nn::Model& model, const std::vector<data::Example>& examples, std::size_t steps,
           std::size_t batch, double lr, double clip, std::uint64_t seed,
           std::optional<std::function<void(std::size_t, double)>> on_log) {
          nn::HyperParams hp;
          hp.hidden = model.hidden();
          hp.batch = batch;
          hp.lr = lr;
          hp.clip = clip;
          hp.seed = seed;
          hp.validate();
          nn::TrainOptions opt;
          opt.steps = steps;
          if (on_log) {
            opt.log = [&](const nn::TrainLogRecord& r) {
              py::gil_scoped_acquire hold;
              (*on_log)(r.step, r.mean_nll);
            };
          }
          std::vector<double> losses;
          {
            py::gil_scoped_release release;
            for (const auto& rec : nn::train(model, examples, hp, opt).log) losses.push_back(rec.mean_nll);
          }
          return losses;
        },
        py::arg("model"), py::arg("examples"), py::arg("steps"), py::arg("batch") = 128,
        py::arg("lr") = 1.0, py::arg("clip") = 2.0, py::arg("seed") = 1,
        py::arg("on_log") = py::none(),
        "Trains in place and returns the per-step mean NLL per token.");

  // Metrics.
  m.def("hull_accuracy",
        [](const std::vector<int>& pred, const std::vector<int>& truth) {
          return eval::hull_accuracy(pred, truth);
        },
        py::arg("pred"), py::arg("truth"));
  m.def("area_coverage",
        [](const std::vector<int>& pred, const std::vector<int>& truth, const PyPoints& pts) {
          const auto c = eval::area_coverage(pred, truth, to_points(pts));
          return py::make_tuple(c.simple, c.ratio);
        },
        py::arg("pred"), py::arg("truth"), py::arg("points"),
        "(simple, area(pred ∩ truth) / area(truth)).");
  m.def("coverage_fails", &eval::coverage_fails, py::arg("not_simple"), py::arg("total"));
  m.def("triangulation_metrics",
        [](const std::vector<int>& pred, const std::vector<int>& truth) {
          const auto s = eval::triangulation_metrics(pred, truth);
          return py::make_tuple(s.exact, s.coverage, s.malformed);
        },
        py::arg("pred"), py::arg("truth"));
  m.def("tsp_metrics",
        [](const std::vector<int>& pred, const PyPoints& pts) {
          const auto s = eval::tsp_metrics(pred, to_points(pts));
          return py::make_tuple(s.valid, s.length);
        },
        py::arg("pred"), py::arg("points"));
  m.def("evaluate",
        [](const nn::Model& model, const std::vector<data::Example>& examples, std::size_t beam,
           const std::string& constraint) {
          const decode::Options opt{beam, decode::parse_constraint(constraint)};
          eval::Report report;
          {
            py::gil_scoped_release release;
            report = eval::evaluate(
                examples,
                [&](const data::Example& ex) { return decode::beam_search(model, ex.points, opt); },
                "python");
          }
          return report_dict(report);
        },
        py::arg("model"), py::arg("examples"), py::arg("beam") = 1, py::arg("constraint") = "none");
}
