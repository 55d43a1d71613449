// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Seeds and tolerances are fixed here and nowhere else.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "oracles.hpp"
#include "setsize/estimators.hpp"
#include "setsize/experiments.hpp"
#include "setsize/fisher.hpp"
#include "setsize/io.hpp"
#include "setsize/kernels.hpp"

using namespace setsize;
namespace fs = std::filesystem;

namespace {

constexpr double kWorkedTol = 1e-9;
constexpr double kIdentityTol = 1e-9;
constexpr double kOracleRelTol = 1e-6;
constexpr int kOracleCases = 200;
constexpr int kOracleMaxW = 15;
constexpr int kIdentityMaxK = 25;

constexpr long long kMeanN = 1000;
constexpr int kMeanReplicates = 10000;
constexpr double kMeanSigmas = 4.0;
constexpr double kMeanMseRelTol = 0.05;

constexpr long long kMleN = 100000;
constexpr int kMleReplicates = 200;
constexpr double kMleRatioLo = 0.8, kMleRatioHi = 1.3;

constexpr double kZipfGrowthMin = 10.0;
constexpr double kZipfFlatMax = 1.05;
constexpr double kCubicFactor = 2.0;

constexpr int kNrmseReplicates = 40;
constexpr double kTailPlateauMin = 0.7;
constexpr double kHeadBand = 0.30;

constexpr std::uint64_t kSeed = 20261016;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome worked_example() {
  const SetSizeDistribution theta({0.5, 0.5});
  const double p = 0.5;
  double worst = 0.0;
  auto track = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };

  const auto d = d_pmf(theta, p);
  track(d[0], 0.8);
  track(d[1], 0.2);
  const auto j = jphi_inverse(theta, p);
  track(j(0, 0), 1.6);
  track(j(0, 1), -1.2);
  track(j(1, 0), -1.2);
  track(j(1, 1), 1.8);
  for (const auto& b : jtheta_diag(theta, p)) track(b.value, 1.5625);
  track(crlb_mean_theta(theta, p).value, 1.5625);
  track(crlb_mean_phi(theta, p), 1.44);
  return {worst <= kWorkedTol, fmt("max abs deviation %.3g (tol %.0e)", worst, kWorkedTol)};
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(kSeed);
  std::uniform_int_distribution<int> pick_w(1, kOracleMaxW);
  std::uniform_real_distribution<double> pick_p(0.05, 0.95);
  double worst_identity = 0.0, worst_jphi = 0.0, worst_jtheta = 0.0;
  int sandwich_failures = 0;

  for (int c = 0; c < kOracleCases; ++c) {
    const int W = pick_w(rng);
    const double p = pick_p(rng);
    const auto t = oracle::random_theta(W, rng);
    const SetSizeDistribution theta(t);
    const WideReal wp(p);

    const auto prod = b_matrix_as<WideReal>(W, wp) * b_inverse_matrix_as<WideReal>(W, wp);
    for (int r = 0; r < W; ++r)
      for (int k = 0; k < W; ++k)
        worst_identity = std::max(worst_identity, std::abs(static_cast<double>(prod(r, k)) - (r == k ? 1.0 : 0.0)));

    const auto jphi = jphi_inverse(theta, p);
    const auto jphi_ref = oracle::jphi_inverse(t, wp);
    for (int r = 0; r < W; ++r)
      for (int k = 0; k < W; ++k)
        worst_jphi = std::max(worst_jphi, oracle::rel_err(jphi(r, k), static_cast<double>(jphi_ref(r, k))));

    const auto diag = jtheta_diag(theta, p);
    const auto jt_ref = oracle::jtheta_inverse(t, wp);
    for (int i = 0; i < W; ++i) {
      const double want = static_cast<double>(jt_ref(i, i));
      // At W = 1 the bound is exactly zero; compare against the size of the terms instead.
      const double err = W == 1 ? std::abs(diag[i].value) : oracle::rel_err(diag[i].value, want);
      worst_jtheta = std::max(worst_jtheta, err);
    }

    const FisherContext ctx(theta, p);
    for (int i = 1; i <= W; ++i) {
      if (theta[i] == 0.0) continue;
      const auto bounds = a1_bounds(theta, p, i);
      const double log_a1 = jtheta_terms(ctx, i).a1.log_abs;
      const double slack = 1e-9;
      if (bounds.log_lower > log_a1 + slack || log_a1 > bounds.log_upper + slack) ++sandwich_failures;
    }
  }

  double worst_ident = 0.0;
  std::uniform_real_distribution<double> pick_p2(0.05, 0.95);
  for (int trial = 0; trial < 20; ++trial) {
    const WideReal p(pick_p2(rng));
    for (int which = 0; which < 5; ++which)
      for (int k = oracle::identity_min_k(which); k <= kIdentityMaxK; ++k) {
        const auto [lhs, rhs] = oracle::identity(which, k, p);
        const WideReal scale = std::max(WideReal(1), abs(rhs));
        worst_ident = std::max(worst_ident, static_cast<double>(abs(lhs - rhs) / scale));
      }
  }

  const bool pass = worst_identity <= kIdentityTol && worst_jphi <= kOracleRelTol && worst_jtheta <= kOracleRelTol &&
                    sandwich_failures == 0 && worst_ident <= kIdentityTol;
  return {pass, fmt("B*Binv-I %.2g, jphi rel %.2g, jtheta rel %.2g, sandwich violations %d, identities %.2g",
                    worst_identity, worst_jphi, worst_jtheta, sandwich_failures, worst_ident)};
}

Outcome efficient_mean() {
  const SetSizeDistribution theta({0.5, 0.5});
  const double p = 0.5, truth = 1.6, variance = 1.44;
  std::vector<double> est(kMeanReplicates);
  kernels::for_each_task(est.size(), Exec::Parallel, [&](std::size_t r) {
    est[r] = efficient_mean_phi(simulate(theta, {p, FixedObserved{kMeanN}, derive_seed(kSeed, r)}));
  });
  CompensatedSum sum, sq;
  for (double e : est) {
    sum.add(e);
    sq.add((e - truth) * (e - truth));
  }
  const double mean = sum.value() / kMeanReplicates;
  const double n_mse = kMeanN * sq.value() / kMeanReplicates;
  const double band = kMeanSigmas * std::sqrt(variance / (static_cast<double>(kMeanN) * kMeanReplicates));
  const bool pass = std::abs(mean - truth) <= band && std::abs(n_mse - variance) <= kMeanMseRelTol * variance;
  return {pass, fmt("mean %.6f (|err| %.2g, band %.2g), N*MSE %.4f vs %.2f", mean, std::abs(mean - truth), band, n_mse,
                    variance)};
}

Outcome mle_efficiency() {
  const SetSizeDistribution theta = geometric(0.5, 5);
  const double p = 0.7;
  const auto bound = jtheta_diag(theta, p);
  std::vector<std::vector<double>> est(kMleReplicates);
  kernels::for_each_task(est.size(), Exec::Parallel, [&](std::size_t r) {
    const std::uint64_t seed = derive_seed(kSeed + 4, r);
    const auto hist = simulate(theta, {p, FixedObserved{kMleN}, seed});
    EmConfig config;
    config.init = DirichletUniform{derive_seed(seed, 1)};
    est[r] = em_estimate(hist, config).theta_hat;
  });
  bool pass = true;
  std::string detail = "ratios";
  for (int i = 1; i <= theta.W(); ++i) {
    CompensatedSum sq;
    for (const auto& e : est) sq.add((e[i - 1] - theta[i]) * (e[i - 1] - theta[i]));
    const double ratio = kMleN * sq.value() / kMleReplicates / bound[i - 1].value;
    pass = pass && ratio >= kMleRatioLo && ratio <= kMleRatioHi;
    detail += fmt(" %.3f", ratio);
  }
  return {pass, detail + fmt(" (band [%.1f, %.1f])", kMleRatioLo, kMleRatioHi)};
}

Outcome growth_shapes() {
  const TailFamily zipf_family{TailFamily::Kind::Zipf, 2.5};
  const auto hard = crlb_growth_curve(zipf_family, 0.25, {100, 400, 1600});
  const auto easy = crlb_growth_curve(zipf_family, 0.9, {100, 400, 1600});
  const auto cubic = crlb_growth_curve({TailFamily::Kind::Geometric, 0.5}, 1.0 / 3.0, {50, 100, 200});

  bool pass = true;
  std::string detail = "zipf p=0.25 log10 steps";
  for (std::size_t k = 1; k < hard.size(); ++k) {
    const double step = hard[k].bound.log10 - hard[k - 1].bound.log10;
    pass = pass && step >= std::log10(kZipfGrowthMin);
    detail += fmt(" %.1f", step);
  }
  double lo = easy[0].bound.value, hi = lo;
  for (const auto& g : easy) {
    lo = std::min(lo, g.bound.value);
    hi = std::max(hi, g.bound.value);
  }
  pass = pass && hi / lo <= kZipfFlatMax;
  detail += fmt("; zipf p=0.9 max/min %.4f", hi / lo);
  detail += "; geometric p=1/3 doubling ratios";
  for (std::size_t k = 1; k < cubic.size(); ++k) {
    const double ratio = cubic[k].bound.value / cubic[k - 1].bound.value;
    const double cube = std::pow(static_cast<double>(cubic[k].W) / cubic[k - 1].W, 3);
    pass = pass && ratio >= cube / kCubicFactor && ratio <= cube * kCubicFactor;
    detail += fmt(" %.2f", ratio);
  }
  return {pass, detail};
}

Outcome nrmse_shapes() {
  SweepSpec low{zipf(2.5, 1000), {0.25}, {5000, 50000}};
  low.replicates = kNrmseReplicates;
  low.base_seed = kSeed + 6;
  SweepSpec high = low;
  high.p_values = {0.9};
  high.n_values = {20000, 100000};
  const auto r_low = run_sweep(low);
  const auto r_high = run_sweep(high);
  const double tail_ratio = r_low.cells[1].nrmse_tail / r_low.cells[0].nrmse_tail;
  const double head_ratio = r_high.cells[1].nrmse_head / r_high.cells[0].nrmse_head;
  const double target = 1.0 / std::sqrt(5.0);
  const bool failures = !r_low.failures.empty() || !r_high.failures.empty();
  const bool pass = !failures && tail_ratio >= kTailPlateauMin && std::abs(head_ratio - target) <= kHeadBand * target;
  return {pass, fmt("tail ratio %.3f (>= %.1f), head ratio %.3f (target %.3f +-%.0f%%), failed replicates %zu",
                    tail_ratio, kTailPlateauMin, head_ratio, target, 100 * kHeadBand,
                    r_low.failures.size() + r_high.failures.size())};
}

int run(const std::string& cmd) { return std::system((cmd + " 2>/dev/null").c_str()); }

Outcome cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / fmt("setsize_acceptance_%d", static_cast<int>(::getpid()));
  fs::create_directories(dir);
  const std::string cli = SETSIZE_CLI;
  io::write_file((dir / "edges.txt").string(), "# toy graph\na b\nc b\na d\ne b\nd c\nb d\na b\n");

  // Each command writes into a run-specific directory; outputs of the two runs are compared byte for byte.
  auto commands = [&](const fs::path& out) {
    const std::string o = out.string() + "/";
    return std::vector<std::string>{
        cli + " ingest --edges " + (dir / "edges.txt").string() + " --out " + o + "ingest.json",
        cli + " ingest --family zipf --beta 2.5 --w 40 --out " + o + "dist.json",
        cli + " simulate --dist " + o + "dist.json --p 0.4 --n 3000 --seed 5 --out " + o + "hist.json",
        cli + " simulate --family geometric --a 0.5 --w 8 --p 0.6 --m 2000 --seed 9 --out " + o + "hist_m.json",
        cli + " estimate --hist " + o + "hist.json --method em --seed 3 --out " + o + "em.json",
        cli + " estimate --hist " + o + "hist.json --method inversion --out " + o + "inv.json",
        cli + " crlb --dist " + o + "dist.json --p 0.4 --n 3000 --out " + o + "crlb.json",
        cli + " classify --dist " + o + "dist.json --p 0.4 --out " + o + "classify.json",
        cli + " mean --hist " + o + "hist.json --seed 3 --out " + o + "mean.json",
        cli + " sweep --family geometric --a 0.5 --w 8 --p 0.5,0.8 --n 500,2000 --replicates 4 --seed 13 --out " + o +
            "sweep",
    };
  };
  int failures = 0;
  for (const char* run_name : {"a", "b"}) {
    fs::create_directories(dir / run_name);
    for (const auto& c : commands(dir / run_name)) failures += run(c) != 0;
  }
  int compared = 0, differing = 0;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const auto other = dir / "b" / entry.path().filename();
    ++compared;
    if (!fs::exists(other) || io::read_file(entry.path().string()) != io::read_file(other.string())) ++differing;
  }
  fs::remove_all(dir);
  const bool pass = failures == 0 && differing == 0 && compared >= 14;
  return {pass, fmt("%d files compared, %d differ, %d failed commands", compared, differing, failures)};
}

}  // namespace

int main(int argc, char** argv) {
  // Optional arguments select criteria by number.
  std::vector<int> only;
  for (int k = 1; k < argc; ++k) only.push_back(std::atoi(argv[k]));
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "worked-example regression", worked_example},
      {2, "oracle equivalence", oracle_equivalence},
      {3, "efficient mean estimator", efficient_mean},
      {4, "MLE asymptotic efficiency", mle_efficiency},
      {5, "bound growth shapes", growth_shapes},
      {6, "NRMSE plateau and decay", nrmse_shapes},
      {7, "pipeline determinism", cli_determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
