// Benchmark driver: approx | krr | mixing | tradeoff | cv, CSV out.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dppnys/bench.hpp"
#include "dppnys/parallel.hpp"

namespace {

using dppnys::Index;
using dppnys::bench::BenchConfig;

struct RawOptions {
  std::string data;
  std::string target;
  std::string synthetic;
  std::string preset;
  std::vector<std::string> methods;
  std::vector<Index> landmarks;
  std::vector<std::uint64_t> seeds;
  double sigma = 0.0;
  double gamma = 0.0;
  Index gibbs_iters = 0;
  Index alpha_samples = 0;
  Index kmeans_iters = 0;
  Index reference_rank = 0;
  bool no_lazy = false;
  unsigned threads = 1;
  double train_fraction = 0.0;
  std::uint64_t data_seed = 0;
  Index trace_iters = 0;
  Index stride = 0;
  double epsilon = 0.0;
  std::vector<Index> tv_steps;
  Index tv_replicas = 0;
  std::vector<Index> iters_sweep;
  std::vector<Index> anchors;
  std::vector<double> cv_sigmas;
  std::vector<double> cv_gammas;
  Index cv_folds = 0;
  std::string out;
};

dppnys::ColumnRef parse_target(const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used == text.size()) return Index{v};
  } catch (const std::exception&) {
  }
  return text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nystrom landmark selection benchmarks"};
  app.require_subcommand(1, 1);
  app.set_config("--config", "", "key=value file; command-line flags take precedence");

  RawOptions raw;
  raw.threads = dppnys::default_thread_count();
  auto* o_data = app.add_option("--data", raw.data, "CSV file with a header row");
  auto* o_target = app.add_option("--target", raw.target, "target column name or index (default: last)");
  auto* o_synth = app.add_option("--synthetic", raw.synthetic, "synthetic data n,d,noise");
  auto* o_preset = app.add_option("--preset", raw.preset, "fig2 | fig5 | fig5-large | fig7 | identity");
  auto* o_methods = app.add_option("--methods", raw.methods, "comma-separated method names")->delimiter(',');
  auto* o_landmarks = app.add_option("--landmarks", raw.landmarks, "landmark counts")->delimiter(',');
  auto* o_seeds = app.add_option("--seeds", raw.seeds, "seeds")->delimiter(',');
  auto* o_sigma = app.add_option("--sigma", raw.sigma, "RBF bandwidth");
  auto* o_gamma = app.add_option("--gamma", raw.gamma, "ridge parameter");
  auto* o_gibbs = app.add_option("--gibbs-iters", raw.gibbs_iters, "Gibbs iterations for kdpp");
  auto* o_alpha = app.add_option("--alpha-samples", raw.alpha_samples, "sampled (S, r, t) triples");
  auto* o_kmeans = app.add_option("--kmeans-iters", raw.kmeans_iters, "Lloyd iterations");
  auto* o_rank = app.add_option("--reference-rank", raw.reference_rank, "k for relative errors (default: c)");
  auto* o_nolazy = app.add_flag("--no-lazy", raw.no_lazy, "disable the lazy half-step");
  auto* o_threads = app.add_option("--threads", raw.threads, "worker threads (default: DPPNYS_THREADS or all cores)");
  auto* o_train = app.add_option("--train-fraction", raw.train_fraction, "training share for krr");
  auto* o_dseed = app.add_option("--data-seed", raw.data_seed, "seed for synthetic data");
  auto* o_trace = app.add_option("--trace-iters", raw.trace_iters, "chain length for mixing traces");
  auto* o_stride = app.add_option("--stride", raw.stride, "trace evaluation stride");
  auto* o_eps = app.add_option("--epsilon", raw.epsilon, "TV target of the mixing bound");
  auto* o_tv = app.add_option("--tv-steps", raw.tv_steps, "chain lengths for TV measurements")->delimiter(',');
  auto* o_tvr = app.add_option("--tv-replicas", raw.tv_replicas, "replica chains per TV point");
  auto* o_sweep = app.add_option("--iters-sweep", raw.iters_sweep, "Gibbs iteration counts for tradeoff")->delimiter(',');
  auto* o_anchors = app.add_option("--anchors", raw.anchors, "anchor counts p for applev/appreglev")->delimiter(',');
  auto* o_cvs = app.add_option("--cv-sigmas", raw.cv_sigmas, "sigma grid for cv (default: --sigma)")->delimiter(',');
  auto* o_cvg = app.add_option("--cv-gammas", raw.cv_gammas, "gamma grid for cv")->delimiter(',');
  auto* o_cvf = app.add_option("--cv-folds", raw.cv_folds, "folds for cv");
  auto* o_out = app.add_option("--out", raw.out, "output CSV path")->required();

  auto* approx = app.add_subcommand("approx", "kernel approximation errors")->fallthrough();
  auto* krr = app.add_subcommand("krr", "kernel ridge regression errors")->fallthrough();
  auto* mixing = app.add_subcommand("mixing", "chain traces, contraction and TV")->fallthrough();
  auto* tradeoff = app.add_subcommand("tradeoff", "time versus error sweeps")->fallthrough();
  auto* cv = app.add_subcommand("cv", "cross-validate sigma and gamma for exact KRR")->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    BenchConfig config;
    if (approx->parsed()) config.methods = dppnys::bench::approx_methods();
    if (krr->parsed()) config.methods = {"kdpp", "unif", "reglev"};
    if (mixing->parsed()) config.methods = {"kdpp"};
    if (tradeoff->parsed()) config.methods = {"kdpp", "applev", "appreglev"};
    config.landmarks = {10, 20, 50};
    config.threads = raw.threads;
    if (o_preset->count()) dppnys::bench::apply_preset(config, raw.preset);

    if (o_data->count()) config.data = raw.data;
    if (o_target->count()) config.target = parse_target(raw.target);
    if (o_synth->count()) config.synthetic = dppnys::bench::parse_synthetic(raw.synthetic);
    if (o_methods->count()) config.methods = raw.methods;
    if (o_landmarks->count()) config.landmarks = raw.landmarks;
    if (o_seeds->count()) config.seeds = raw.seeds;
    if (o_sigma->count()) config.sigma = raw.sigma;
    if (o_gamma->count()) config.gamma = raw.gamma;
    if (o_gibbs->count()) config.gibbs_iters = raw.gibbs_iters;
    if (o_alpha->count()) config.alpha_samples = raw.alpha_samples;
    if (o_kmeans->count()) config.kmeans_iters = raw.kmeans_iters;
    if (o_rank->count()) config.reference_rank = raw.reference_rank;
    if (o_nolazy->count()) config.lazy = !raw.no_lazy;
    if (o_threads->count()) config.threads = raw.threads;
    if (o_train->count()) config.train_fraction = raw.train_fraction;
    if (o_dseed->count()) config.data_seed = raw.data_seed;
    if (o_trace->count()) config.trace_iters = raw.trace_iters;
    if (o_stride->count()) config.stride = raw.stride;
    if (o_eps->count()) config.epsilon = raw.epsilon;
    if (o_tv->count()) config.tv_steps = raw.tv_steps;
    if (o_tvr->count()) config.tv_replicas = raw.tv_replicas;
    if (o_sweep->count()) config.iters_sweep = raw.iters_sweep;
    if (o_anchors->count()) config.anchors = raw.anchors;
    if (o_cvs->count()) config.cv_sigmas = raw.cv_sigmas;
    if (o_cvg->count()) config.cv_gammas = raw.cv_gammas;
    if (o_cvf->count()) config.cv_folds = raw.cv_folds;
    config.out = raw.out;
    (void)o_out;

    std::vector<dppnys::bench::ResultRow> rows;
    if (approx->parsed()) rows = dppnys::bench::cmd_approx(config);
    if (krr->parsed()) rows = dppnys::bench::cmd_krr(config);
    if (mixing->parsed()) rows = dppnys::bench::cmd_mixing(config);
    if (tradeoff->parsed()) rows = dppnys::bench::cmd_tradeoff(config);
    if (cv->parsed()) rows = dppnys::bench::cmd_cv(config);
    dppnys::bench::write_csv_atomic(rows, config.out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
