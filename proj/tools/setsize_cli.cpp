// setsize: command-line front end.
//
// Exit codes: 0 success, 1 usage error, 2 data error. Machine-readable output
// goes to --out (or stdout); short human summaries go to stderr.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "setsize/estimators.hpp"
#include "setsize/experiments.hpp"
#include "setsize/fisher.hpp"
#include "setsize/io.hpp"
#include "setsize/sampling.hpp"

using namespace setsize;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ThetaSource {
  std::string dist;
  std::string family;
  double beta = 0.0, a = 0.0, scale = 0.0;
  int w = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--dist", dist, "distribution JSON file");
    cmd->add_option("--family", family, "analytic family")->check(CLI::IsMember({"zipf", "geometric", "gauss-tail"}));
    cmd->add_option("--beta", beta, "zipf exponent");
    cmd->add_option("--a", a, "geometric ratio");
    cmd->add_option("--scale", scale, "gauss-tail scale");
    cmd->add_option("--w", w, "largest set size for --family");
  }

  bool given() const { return !dist.empty() || !family.empty(); }

  SetSizeDistribution load() const {
    if (!dist.empty() && !family.empty()) throw UsageError("give either --dist or --family, not both");
    if (!dist.empty()) return io::distribution_from_json(io::parse_json(io::read_file(dist), dist));
    if (family.empty()) throw UsageError("a distribution is required: --dist FILE or --family NAME");
    if (w < 1) throw UsageError("--family needs --w >= 1");
    if (family == "zipf") {
      if (!(beta > 0.0)) throw UsageError("zipf needs --beta > 0");
      return zipf(beta, w);
    }
    if (family == "geometric") {
      if (!(a > 0.0 && a < 1.0)) throw UsageError("geometric needs 0 < --a < 1");
      return geometric(a, w);
    }
    if (!(scale > 0.0)) throw UsageError("gauss-tail needs --scale > 0");
    return gauss_tail(scale, w);
  }
};

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    std::cout.flush();
  } else {
    io::write_file(out_path, text);
  }
}

ObservedHistogram load_histogram(const std::string& path) {
  std::string text;
  if (path.empty() || path == "-") {
    text.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  } else {
    text = io::read_file(path);
  }
  return io::histogram_from_json(io::parse_json(text, path.empty() ? "stdin" : path));
}

EstimateResult run_estimator(const ObservedHistogram& hist, const std::string& method, std::uint64_t seed, int max_iters,
                             double tol) {
  if (method == "inversion") return inversion_estimate(hist);
  EmConfig config;
  config.init = DirichletUniform{seed};
  config.max_iters = max_iters;
  config.tol = tol;
  config.exec = Exec::Parallel;
  return em_estimate(hist, config);
}

std::string format_p(double p) {
  std::string s = io::format_double(p);
  for (char& c : s)
    if (c == '.') c = '_';
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Set-size distribution estimation under Bernoulli element sampling"};
  app.require_subcommand(1);

  std::string out_path;
  std::uint64_t seed = 0;
  double p = 0.0;
  long long n = 0, m = 0;
  std::string method = "em";
  int max_iters = 10000;
  double tol = 1e-10;
  std::string hist_path;

  auto* ingest = app.add_subcommand("ingest", "edge list (or analytic family) -> distribution JSON");
  std::string edges;
  bool undirected = false, keep_duplicates = false;
  std::optional<int> truncate;
  ThetaSource ingest_source;
  ingest->add_option("--edges", edges, "edge list, one \"src dst\" per line");
  ingest->add_flag("--undirected", undirected, "count both endpoints of every edge");
  ingest->add_flag("--keep-duplicates", keep_duplicates, "count repeated edges each time");
  ingest->add_option("--truncate", truncate, "fold sizes above W into W")->check(CLI::PositiveNumber);
  ingest_source.attach(ingest);
  ingest->add_option("--out", out_path);

  auto* sim = app.add_subcommand("simulate", "distribution -> sampled histogram JSON");
  ThetaSource sim_source;
  sim_source.attach(sim);
  sim->add_option("--p", p, "element sampling probability")->required();
  auto* sim_n = sim->add_option("--n", n, "observed sets to collect");
  auto* sim_m = sim->add_option("--m", m, "sets to draw (observed or not)");
  sim_n->excludes(sim_m);
  sim->add_option("--seed", seed);
  sim->add_option("--out", out_path);

  auto* est = app.add_subcommand("estimate", "histogram JSON -> estimate JSON");
  est->add_option("--hist", hist_path, "histogram JSON (default stdin)");
  est->add_option("--method", method)->check(CLI::IsMember({"em", "inversion"}));
  est->add_option("--seed", seed, "EM starting point seed");
  est->add_option("--max-iters", max_iters)->check(CLI::PositiveNumber);
  est->add_option("--tol", tol)->check(CLI::PositiveNumber);
  est->add_option("--out", out_path);

  auto* crlb = app.add_subcommand("crlb", "distribution -> Cramer-Rao bounds JSON");
  ThetaSource crlb_source;
  crlb_source.attach(crlb);
  crlb->add_option("--p", p)->required();
  crlb->add_option("--n", n, "observed sets")->required();
  bool serial = false;
  crlb->add_flag("--serial", serial, "single-threaded evaluation");
  crlb->add_option("--out", out_path);

  auto* classify = app.add_subcommand("classify", "distribution tail + p -> recoverability verdict JSON");
  ThetaSource classify_source;
  classify_source.attach(classify);
  classify->add_option("--p", p)->required();
  classify->add_option("--out", out_path);

  auto* mean = app.add_subcommand("mean", "histogram JSON -> mean set-size estimates JSON");
  mean->add_option("--hist", hist_path, "histogram JSON (default stdin)");
  mean->add_option("--method", method)->check(CLI::IsMember({"em", "inversion"}));
  mean->add_option("--seed", seed);
  mean->add_option("--out", out_path);

  auto* sweep = app.add_subcommand("sweep", "replicate experiment -> records, summary and grid CSVs");
  ThetaSource sweep_source;
  sweep_source.attach(sweep);
  std::vector<double> p_values;
  std::vector<long long> n_values;
  int replicates = 10, head_cutoff = 10;
  sweep->add_option("--p", p_values, "comma-separated p values")->required()->delimiter(',');
  sweep->add_option("--n", n_values, "comma-separated observed-set counts")->required()->delimiter(',');
  sweep->add_option("--replicates", replicates)->check(CLI::PositiveNumber);
  sweep->add_option("--head-cutoff", head_cutoff)->check(CLI::PositiveNumber);
  sweep->add_option("--method", method)->check(CLI::IsMember({"em", "inversion"}));
  sweep->add_option("--seed", seed);
  sweep->add_option("--max-iters", max_iters)->check(CLI::PositiveNumber);
  sweep->add_option("--tol", tol)->check(CLI::PositiveNumber);
  sweep->add_option("--out", out_path, "output prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (ingest->parsed()) {
      SetSizeDistribution theta = [&] {
        if (!edges.empty()) {
          if (ingest_source.given()) throw UsageError("give either --edges or a distribution, not both");
          return io::ingest_degrees({edges, !undirected, !keep_duplicates}, truncate);
        }
        if (!ingest_source.given()) throw UsageError("ingest needs --edges FILE or --family NAME");
        return ingest_source.load();
      }();
      std::cerr << "ingest: W = " << theta.W() << ", mean size " << moment(theta, 1) << "\n";
      emit(out_path, io::dump(io::to_json(theta)));
    } else if (sim->parsed()) {
      const SetSizeDistribution theta = sim_source.load();
      if (sim_n->count() == 0 && sim_m->count() == 0) throw UsageError("simulate needs --n or --m");
      SamplingConfig config{p, FixedObserved{n}, seed};
      if (sim_m->count() > 0) config.mode = FixedPopulation{m};
      const ObservedHistogram hist = simulate(theta, config);
      std::cerr << "simulate: " << hist.N << " observed of " << hist.m_drawn << " drawn\n";
      emit(out_path, io::dump(io::to_json(hist)));
    } else if (est->parsed()) {
      const ObservedHistogram hist = load_histogram(hist_path);
      const EstimateResult result = run_estimator(hist, method, seed, max_iters, tol);
      std::cerr << "estimate: " << method << ", " << result.iters << " iterations, "
                << (result.converged ? "converged" : "not converged") << (result.floored ? ", floored" : "") << "\n";
      emit(out_path, io::dump(io::to_json(result)));
    } else if (crlb->parsed()) {
      const SetSizeDistribution theta = crlb_source.load();
      const CrlbReport report = crlb_report(theta, p, n, serial ? Exec::Serial : Exec::Parallel);
      std::cerr << "crlb: tail " << report.tail;
      if (report.regime) std::cerr << ", " << verdict_name(report.regime->verdict);
      std::cerr << "\n";
      emit(out_path, io::dump(io::to_json(report)));
    } else if (classify->parsed()) {
      const SetSizeDistribution theta = classify_source.load();
      const TailFit fit = classify_tail(theta);
      const RegimeVerdict verdict = classify_regime(fit.tail, p);
      io::Json j = io::to_json(verdict);
      j["tail"] = tail_name(fit.tail);
      j["tail_heuristic"] = fit.heuristic;
      std::cerr << "classify: " << verdict_name(verdict.verdict) << " (threshold p = " << verdict.threshold_p << ")\n";
      emit(out_path, io::dump(j));
    } else if (mean->parsed()) {
      const ObservedHistogram hist = load_histogram(hist_path);
      const EstimateResult result = run_estimator(hist, method, seed, max_iters, tol);
      io::Json j;
      j["mean_phi_hat"] = efficient_mean_phi(hist);
      j["mean_theta_hat"] = plug_in_mean_theta(result);
      j["method"] = method;
      emit(out_path, io::dump(j));
    } else if (sweep->parsed()) {
      SweepSpec spec{sweep_source.load(), p_values, n_values};
      spec.replicates = replicates;
      spec.head_cutoff = head_cutoff;
      spec.base_seed = seed;
      spec.estimator = method == "inversion" ? EstimatorKind::Inversion : EstimatorKind::EM;
      spec.em_max_iters = max_iters;
      spec.em_tol = tol;
      const ExperimentResult result = run_sweep(spec);

      std::ostringstream records, summary;
      io::write_records_csv(records, result);
      io::write_summary_csv(summary, result);
      io::write_file(out_path + "_records.csv", records.str());
      io::write_file(out_path + "_summary.csv", summary.str());
      for (const auto& cell : result.cells) {
        std::ostringstream grid;
        io::write_grid_csv(grid, cell.grid);
        io::write_file(out_path + "_grid_p" + format_p(cell.p) + "_N" + std::to_string(cell.N) + ".csv", grid.str());
        std::cerr << "sweep: p=" << cell.p << " N=" << cell.N << " head NRMSE " << cell.nrmse_head << ", tail NRMSE "
                  << cell.nrmse_tail << (cell.failed ? ", failed replicates: " + std::to_string(cell.failed) : "")
                  << "\n";
      }
      if (!result.excluded_indices.empty())
        std::cerr << "sweep: " << result.excluded_indices.size() << " sizes with zero probability left out\n";
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << app.help();
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
