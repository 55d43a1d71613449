#include "setsize/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "setsize/kernels.hpp"

namespace setsize {

double nrmse(const std::vector<double>& estimates, double truth) {
  if (!(truth > 0.0)) throw DataError("undefined NRMSE: true value must be > 0");
  if (estimates.empty()) throw DataError("NRMSE needs at least one estimate");
  CompensatedSum s;
  for (double e : estimates) s.add((e - truth) * (e - truth));
  return std::sqrt(s.value() / static_cast<double>(estimates.size())) / truth;
}

int DensityGrid::bin_of(double estimate) {
  if (!(estimate > std::pow(10.0, kLogLo))) return 0;
  if (estimate > 1.0) return kBins + 1;
  const double width = (kLogHi - kLogLo) / kBins;
  int bin = static_cast<int>(std::ceil((std::log10(estimate) - kLogLo) / width));
  return std::clamp(bin, 1, kBins);
}

double DensityGrid::lower_edge(int bin) {
  if (bin <= 0) return -std::numeric_limits<double>::infinity();
  if (bin > kBins) return std::pow(10.0, kLogHi);
  return std::pow(10.0, kLogLo + (kLogHi - kLogLo) * (bin - 1) / kBins);
}

double DensityGrid::upper_edge(int bin) {
  if (bin > kBins) return std::numeric_limits<double>::infinity();
  return std::pow(10.0, kLogLo + (kLogHi - kLogLo) * bin / kBins);
}

void DensityGrid::add(int i, double estimate) {
  auto& row = counts[i];
  if (row.empty()) row.assign(kBins + 2, 0);
  ++row[static_cast<std::size_t>(bin_of(estimate))];
}

long long DensityGrid::total() const {
  long long t = 0;
  for (const auto& [i, row] : counts)
    for (long long c : row) t += c;
  return t;
}

namespace {

void check_spec(const SweepSpec& spec) {
  if (spec.p_values.empty() || spec.n_values.empty()) throw DataError("sweep: p and N lists must be nonempty");
  if (spec.replicates < 1) throw DataError("sweep: replicates must be >= 1");
  if (spec.head_cutoff < 1) throw DataError("sweep: head cutoff must be >= 1");
  for (double p : spec.p_values)
    if (!(p > 0.0 && p <= 1.0)) throw DataError("sweep: p must lie in (0, 1]");
  for (long long n : spec.n_values)
    if (n < 1) throw DataError("sweep: N must be >= 1");
  if (spec.estimator == EstimatorKind::Inversion && spec.theta.W() > kInversionMaxW)
    throw DataError("sweep: inversion needs W <= " + std::to_string(kInversionMaxW));
}

struct Outcome {
  std::vector<double> theta_hat;
  std::string error;
};

}  // namespace

ExperimentResult run_sweep(const SweepSpec& spec) {
  check_spec(spec);
  const int W = spec.theta.W();
  const std::size_t reps = static_cast<std::size_t>(spec.replicates);
  const std::size_t n_cells = spec.p_values.size() * spec.n_values.size();

  ExperimentResult result;
  std::vector<int> active;
  for (int i = 1; i <= W; ++i) (spec.theta[i] > 0.0 ? active : result.excluded_indices).push_back(i);

  std::vector<Outcome> outcomes(n_cells * reps);
  // The farm parallelizes across replicates; each estimate runs serially.
  kernels::for_each_task(outcomes.size(), spec.exec, [&](std::size_t task) {
    const std::size_t cell = task / reps, rep = task % reps;
    const double p = spec.p_values[cell / spec.n_values.size()];
    const long long n = spec.n_values[cell % spec.n_values.size()];
    const std::uint64_t seed = derive_seed(derive_seed(spec.base_seed, cell), rep);
    Outcome& out = outcomes[task];
    try {
      const ObservedHistogram hist = simulate(spec.theta, {p, FixedObserved{n}, seed});
      if (spec.estimator == EstimatorKind::EM) {
        EmConfig config;
        config.max_iters = spec.em_max_iters;
        config.tol = spec.em_tol;
        config.init = DirichletUniform{derive_seed(seed, 1)};
        out.theta_hat = em_estimate(hist, config).theta_hat;
      } else {
        EstimateResult est = inversion_estimate(hist);
        // Raw values keep the estimator unbiased; fall back when they have no theta map.
        out.theta_hat = est.theta_raw ? std::move(*est.theta_raw) : std::move(est.theta_hat);
      }
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  });

  for (std::size_t cell = 0; cell < n_cells; ++cell) {
    CellSummary summary{spec.p_values[cell / spec.n_values.size()], spec.n_values[cell % spec.n_values.size()],
                        std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(), 0, 0, {}};
    std::map<int, std::vector<double>> per_index;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const Outcome& out = outcomes[cell * reps + rep];
      if (!out.error.empty()) {
        ++summary.failed;
        result.failures.push_back({summary.p, summary.N, static_cast<int>(rep), out.error});
        continue;
      }
      ++summary.succeeded;
      for (int i : active) {
        const double est = out.theta_hat[static_cast<std::size_t>(i - 1)];
        result.records.push_back({summary.p, summary.N, static_cast<int>(rep), i, spec.theta[i], est});
        summary.grid.add(i, est);
        per_index[i].push_back(est);
      }
    }
    if (summary.succeeded > 0) {
      double head = 0.0, tail = 0.0;
      int n_head = 0, n_tail = 0;
      for (int i : active) {
        const double e = nrmse(per_index[i], spec.theta[i]);
        if (i <= spec.head_cutoff) {
          head += e;
          ++n_head;
        } else {
          tail += e;
          ++n_tail;
        }
      }
      if (n_head > 0) summary.nrmse_head = head / n_head;
      if (n_tail > 0) summary.nrmse_tail = tail / n_tail;
    }
    result.cells.push_back(std::move(summary));
  }
  return result;
}

std::vector<GrowthPoint> crlb_growth_curve(const TailFamily& family, double p, const std::vector<int>& w_values,
                                           Truncation mode) {
  std::vector<GrowthPoint> curve;
  curve.reserve(w_values.size());
  for (int W : w_values) {
    const FisherContext ctx(family.at(W, mode), p);
    curve.push_back({W, jtheta_entry(ctx, 1)});
  }
  return curve;
}

}  // namespace setsize
