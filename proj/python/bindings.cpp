#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dppnys/baselines.hpp"
#include "dppnys/bench.hpp"
#include "dppnys/data.hpp"
#include "dppnys/dpp_samplers.hpp"
#include "dppnys/krr.hpp"
#include "dppnys/mixing.hpp"
#include "dppnys/nystrom.hpp"
#include "dppnys/psd_linalg.hpp"

namespace py = pybind11;
using namespace dppnys;

namespace {

std::vector<Index> to_list(const LandmarkSet& s) { return {s.begin(), s.end()}; }

Norm parse_norm(const std::string& name) {
  if (name == "frobenius" || name == "fro") return Norm::frobenius;
  if (name == "spectral" || name == "2") return Norm::spectral;
  throw py::value_error("norm must be 'frobenius' or 'spectral'");
}

ChainInit parse_init(const py::object& init, const Matrix& features) {
  if (init.is_none()) return UniformInit{};
  if (py::isinstance<py::str>(init)) {
    const auto name = init.cast<std::string>();
    if (name == "uniform") return UniformInit{};
    if (name == "kmeanspp") {
      if (features.rows() == 0) throw py::value_error("kmeanspp init needs features");
      return KmeansppInit{std::cref(features)};
    }
    throw py::value_error("init must be 'uniform', 'kmeanspp' or a list of indices");
  }
  return LandmarkSet(init.cast<std::vector<Index>>());
}

py::list rows_to_list(const std::vector<bench::ResultRow>& rows) {
  py::list out;
  for (const auto& r : rows) out.append(py::make_tuple(r.method, r.c, r.seed, r.metric, r.value, r.select_seconds, r.total_seconds));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "DPP landmark selection for the Nystrom method";

  py::class_<PsdMatrix>(m, "PsdMatrix")
      .def(py::init<Matrix>(), py::arg("data"))
      .def_property_readonly("data", &PsdMatrix::data)
      .def_property_readonly("size", &PsdMatrix::size)
      .def("eigenvalues", [](const PsdMatrix& k) { return k.eigenvalues(); });
  py::implicitly_convertible<Matrix, PsdMatrix>();

  // data
  m.def("rbf_kernel", py::overload_cast<const Matrix&, const Matrix&, double>(&rbf_kernel), py::arg("x"), py::arg("x2"),
        py::arg("sigma"));
  m.def("rbf_kernel", py::overload_cast<const Matrix&, double>(&rbf_kernel), py::arg("x"), py::arg("sigma"));
  m.def(
      "synthetic_regression",
      [](Index n, Index d, double noise_sd, std::uint64_t seed) {
        Dataset ds = synthetic_regression(n, d, noise_sd, seed);
        return py::make_tuple(ds.features, ds.targets, *ds.noiseless_targets);
      },
      py::arg("n"), py::arg("d"), py::arg("noise_sd"), py::arg("seed") = 0, "Returns (X, y, z).");

  // linear algebra
  m.def(
      "elementary_symmetric",
      [](const Vector& eigenvalues, Index c) {
        EspTable t = elementary_symmetric(eigenvalues, c);
        std::vector<double> out;
        for (Index j = 0; j <= c; ++j) out.push_back(t.value(j));
        return out;
      },
      py::arg("eigenvalues"), py::arg("c"), "e_0..e_c.");
  m.def(
      "logdet_submatrix", [](const PsdMatrix& k, const std::vector<Index>& c) { return logdet_submatrix(k, LandmarkSet(c)); },
      py::arg("k"), py::arg("landmarks"));
  m.def("pinv_psd", &pinv_psd, py::arg("m"), py::arg("rel_tol") = 1e-12);

  // samplers
  m.def(
      "enumerate_cdpp",
      [](const PsdMatrix& k, Index c) {
        SubsetDistribution d = enumerate_cdpp(k, c);
        std::vector<std::vector<Index>> subsets;
        for (const auto& s : d.subsets) subsets.push_back(to_list(s));
        return py::make_tuple(subsets, d.probabilities);
      },
      py::arg("k"), py::arg("c"), "Returns (subsets, probabilities) in lexicographic order.");
  m.def(
      "sample_cdpp_exact",
      [](const PsdMatrix& k, Index c, std::uint64_t seed) {
        Rng rng(seed);
        return to_list(sample_cdpp_exact(k, c, rng));
      },
      py::arg("k"), py::arg("c"), py::arg("seed") = 0);
  m.def(
      "gibbs_sample",
      [](const PsdMatrix& k, Index c, Index iterations, std::uint64_t seed, const py::object& init, const Matrix& features,
         bool lazy) {
        Rng rng(seed);
        const ChainInit chain_init = parse_init(init, features);
        py::gil_scoped_release release;
        return to_list(gibbs_sample(k, c, iterations, chain_init, rng, GibbsOptions{lazy, 1000}));
      },
      py::arg("k"), py::arg("c"), py::arg("iterations") = kDefaultGibbsIterations, py::arg("seed") = 0,
      py::arg("init") = py::none(), py::arg("features") = Matrix(), py::arg("lazy") = true);

  // baselines
  m.def(
      "uniform_landmarks",
      [](Index n, Index c, std::uint64_t seed) {
        Rng rng(seed);
        return to_list(uniform_landmarks(n, c, rng));
      },
      py::arg("n"), py::arg("c"), py::arg("seed") = 0);
  m.def("leverage_scores", &leverage_scores, py::arg("k"), py::arg("rank"));
  m.def("regularized_leverage_scores", &regularized_leverage_scores, py::arg("k"), py::arg("gamma"));
  m.def(
      "approx_leverage_scores",
      [](const PsdMatrix& k, Index p, double gamma, std::uint64_t seed) {
        Rng rng(seed);
        return approx_leverage_scores(DenseKernel(k), p, gamma, rng);
      },
      py::arg("k"), py::arg("p"), py::arg("gamma") = 0.0, py::arg("seed") = 0);
  m.def(
      "sample_by_scores",
      [](const Vector& scores, Index c, std::uint64_t seed) {
        Rng rng(seed);
        return to_list(sample_by_scores(scores, c, rng));
      },
      py::arg("scores"), py::arg("c"), py::arg("seed") = 0);
  m.def(
      "adaptive_full",
      [](const PsdMatrix& k, Index c, std::uint64_t seed) {
        Rng rng(seed);
        return to_list(adaptive_full(k, c, rng).landmarks);
      },
      py::arg("k"), py::arg("c"), py::arg("seed") = 0);
  m.def(
      "adaptive_partial",
      [](const PsdMatrix& k, Index c, std::uint64_t seed) {
        Rng rng(seed);
        return to_list(adaptive_partial(k, c, rng).landmarks);
      },
      py::arg("k"), py::arg("c"), py::arg("seed") = 0);
  m.def(
      "kmeans_landmarks",
      [](const Matrix& x, Index c, Index max_iters, std::uint64_t seed) {
        Rng rng(seed);
        return kmeans_landmarks(x, c, max_iters, rng).centroids;
      },
      py::arg("x"), py::arg("c"), py::arg("max_iters") = 100, py::arg("seed") = 0, "Returns the c x d centroids.");

  // nystrom
  m.def(
      "nystrom",
      [](const PsdMatrix& k, const std::vector<Index>& landmarks) { return build_nystrom(k, LandmarkSet(landmarks)).materialize(); },
      py::arg("k"), py::arg("landmarks"), "Materialized Nystrom approximation.");
  m.def(
      "nystrom_factor",
      [](const PsdMatrix& k, const std::vector<Index>& landmarks) { return build_nystrom(k, LandmarkSet(landmarks)).factor(); },
      py::arg("k"), py::arg("landmarks"), "F with K~ = F F^T.");
  m.def(
      "relative_error",
      [](const PsdMatrix& k, const std::vector<Index>& landmarks, Index rank, const std::string& norm) {
        return relative_error(k, build_nystrom(k, LandmarkSet(landmarks)), rank, parse_norm(norm));
      },
      py::arg("k"), py::arg("landmarks"), py::arg("rank"), py::arg("norm") = "frobenius");
  m.def(
      "absolute_error",
      [](const PsdMatrix& k, const std::vector<Index>& landmarks, const std::string& norm) {
        return absolute_error(k, build_nystrom(k, LandmarkSet(landmarks)), parse_norm(norm));
      },
      py::arg("k"), py::arg("landmarks"), py::arg("norm") = "frobenius");
  m.def(
      "expected_error_bound",
      [](const Vector& eigenvalues, Index c, Index k, const std::string& norm) {
        return expected_error_bound(eigenvalues, c, k, parse_norm(norm));
      },
      py::arg("eigenvalues"), py::arg("c"), py::arg("k"), py::arg("norm") = "frobenius");
  m.def(
      "hp_error_bound",
      [](const Vector& eigenvalues, Index c, Index k, double delta, const std::string& norm) {
        return hp_error_bound(eigenvalues, c, k, delta, parse_norm(norm));
      },
      py::arg("eigenvalues"), py::arg("c"), py::arg("k"), py::arg("delta"), py::arg("norm") = "frobenius");
  m.def("esp_ratio_bound_check", &esp_ratio_bound_check, py::arg("eigenvalues"), py::arg("c"), py::arg("k"));

  // krr
  m.def(
      "krr_fit_exact", [](const PsdMatrix& k, const Vector& y, double gamma) { return fit_exact(k, y, gamma).alpha; },
      py::arg("k"), py::arg("y"), py::arg("gamma"), "alpha with (K + N gamma I) alpha = y.");
  m.def(
      "krr_fit_nystrom",
      [](const PsdMatrix& k, const std::vector<Index>& landmarks, const Vector& y, double gamma) {
        return fit_nystrom(build_nystrom(k, LandmarkSet(landmarks)), y, gamma).alpha;
      },
      py::arg("k"), py::arg("landmarks"), py::arg("y"), py::arg("gamma"), "alpha with (K~ + N gamma I) alpha = y.");
  m.def(
      "risk_decomposition",
      [](const PsdMatrix& k, const Vector& z, double noise_variance, double gamma) {
        RiskReport r = risk_decomposition(k, z, noise_variance, gamma);
        return py::dict(py::arg("bias") = r.bias, py::arg("variance") = r.variance, py::arg("risk") = r.risk);
      },
      py::arg("k"), py::arg("z"), py::arg("noise_variance"), py::arg("gamma"));
  m.def("krr_risk_ratio_bound", &krr_risk_ratio_bound, py::arg("eigenvalues"), py::arg("c"), py::arg("gamma"), py::arg("n"));
  m.def("krr_bias_hp_bound", &krr_bias_hp_bound, py::arg("eigenvalues"), py::arg("c"), py::arg("gamma"), py::arg("n"),
        py::arg("delta"));
  m.def(
      "nu_C", [](const PsdMatrix& k, const std::vector<Index>& landmarks) { return nu_C(k, LandmarkSet(landmarks)); },
      py::arg("k"), py::arg("landmarks"));

  // mixing
  m.def(
      "coupling_terms",
      [](const PsdMatrix& k, const std::vector<Index>& s, Index r, Index t) {
        CouplingSums c = coupling_terms(k, s, r, t);
        return py::make_tuple(c.p1, c.p2, c.p3);
      },
      py::arg("k"), py::arg("s"), py::arg("r"), py::arg("t"));
  m.def(
      "estimate_alpha",
      [](const PsdMatrix& k, Index c, Index n_samples, std::uint64_t seed) {
        Rng rng(seed);
        ContractionEstimate e;
        {
          py::gil_scoped_release release;
          e = estimate_alpha(k, c, n_samples, rng);
        }
        return py::dict(py::arg("alpha") = e.alpha, py::arg("percentile95") = e.percentile95,
                        py::arg("samples") = e.samples, py::arg("lower_bound") = e.lower_bound);
      },
      py::arg("k"), py::arg("c"), py::arg("n_samples") = kDefaultAlphaSamples, py::arg("seed") = 0);
  m.def(
      "mixing_time_bound",
      [](double alpha, Index c, Index n, double epsilon) -> py::object {
        MixingBound b = mixing_time_bound(alpha, c, n, epsilon);
        if (!b.defined) return py::none();
        return py::float_(b.tau_bound);
      },
      py::arg("alpha"), py::arg("c"), py::arg("n"), py::arg("epsilon") = 0.01, "None when alpha >= 1.");
  m.def(
      "tv_to_stationary",
      [](const PsdMatrix& k, Index c, Index t, Index replicas, std::uint64_t seed, bool lazy) {
        Rng rng(seed);
        py::gil_scoped_release release;
        return tv_to_stationary(k, c, t, replicas, rng, GibbsOptions{lazy, 1000});
      },
      py::arg("k"), py::arg("c"), py::arg("t"), py::arg("replicas"), py::arg("seed") = 0, py::arg("lazy") = true);
  m.def(
      "error_trace",
      [](const PsdMatrix& k, Index c, Index iterations, Index stride, std::uint64_t seed) {
        Rng rng(seed);
        std::vector<std::pair<Index, double>> out;
        for (const TraceRow& r : error_trace(k, c, iterations, stride, rng)) out.emplace_back(r.step, r.values[0]);
        return out;
      },
      py::arg("k"), py::arg("c"), py::arg("iterations"), py::arg("stride") = 1, py::arg("seed") = 0,
      "[(step, relative Frobenius error)] along one chain.");

  // benchmark commands
  py::class_<bench::BenchConfig>(m, "BenchConfig")
      .def(py::init<>())
      .def_readwrite("data", &bench::BenchConfig::data)
      .def_readwrite("preset", &bench::BenchConfig::preset)
      .def_readwrite("methods", &bench::BenchConfig::methods)
      .def_readwrite("landmarks", &bench::BenchConfig::landmarks)
      .def_readwrite("seeds", &bench::BenchConfig::seeds)
      .def_readwrite("sigma", &bench::BenchConfig::sigma)
      .def_readwrite("gamma", &bench::BenchConfig::gamma)
      .def_readwrite("gibbs_iters", &bench::BenchConfig::gibbs_iters)
      .def_readwrite("alpha_samples", &bench::BenchConfig::alpha_samples)
      .def_readwrite("kmeans_iters", &bench::BenchConfig::kmeans_iters)
      .def_readwrite("reference_rank", &bench::BenchConfig::reference_rank)
      .def_readwrite("lazy", &bench::BenchConfig::lazy)
      .def_readwrite("threads", &bench::BenchConfig::threads)
      .def_readwrite("train_fraction", &bench::BenchConfig::train_fraction)
      .def_readwrite("data_seed", &bench::BenchConfig::data_seed)
      .def_readwrite("trace_iters", &bench::BenchConfig::trace_iters)
      .def_readwrite("stride", &bench::BenchConfig::stride)
      .def_readwrite("epsilon", &bench::BenchConfig::epsilon)
      .def_readwrite("tv_steps", &bench::BenchConfig::tv_steps)
      .def_readwrite("tv_replicas", &bench::BenchConfig::tv_replicas)
      .def_readwrite("iters_sweep", &bench::BenchConfig::iters_sweep)
      .def_readwrite("anchors", &bench::BenchConfig::anchors)
      .def_readwrite("cv_sigmas", &bench::BenchConfig::cv_sigmas)
      .def_readwrite("cv_gammas", &bench::BenchConfig::cv_gammas)
      .def_readwrite("cv_folds", &bench::BenchConfig::cv_folds)
      .def("set_synthetic",
           [](bench::BenchConfig& c, Index n, Index d, double noise) { c.synthetic = bench::SyntheticSpec{n, d, noise}; },
           py::arg("n"), py::arg("d"), py::arg("noise_sd"))
      .def("apply_preset", &bench::apply_preset, py::arg("name"));

  auto command = [&m](const char* name, std::vector<bench::ResultRow> (*fn)(const bench::BenchConfig&)) {
    m.def(
        name,
        [fn](const bench::BenchConfig& config) {
          std::vector<bench::ResultRow> rows;
          {
            py::gil_scoped_release release;
            rows = fn(config);
          }
          return rows_to_list(rows);
        },
        py::arg("config"), "[(method, c, seed, metric, value, select_seconds, total_seconds)]");
  };
  command("bench_approx", &bench::cmd_approx);
  command("bench_krr", &bench::cmd_krr);
  command("bench_mixing", &bench::cmd_mixing);
  command("bench_tradeoff", &bench::cmd_tradeoff);
  command("bench_cv", &bench::cmd_cv);
  m.attr("CSV_HEADER") = bench::kCsvHeader;
}
