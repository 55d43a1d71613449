#pragma once

// Replicate sweeps over (p, N): simulate, estimate, and summarize per-index
// errors as head/tail NRMSE and log-scale density grids.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "setsize/estimators.hpp"

namespace setsize {

/// sqrt(mean((est - truth)^2)) / truth
double nrmse(const std::vector<double>& estimates, double truth);

enum class EstimatorKind { EM, Inversion };

struct SweepSpec {
  SetSizeDistribution theta;
  std::vector<double> p_values;
  std::vector<long long> n_values;
  int replicates = 1;
  int head_cutoff = 10;
  std::uint64_t base_seed = 0;
  EstimatorKind estimator = EstimatorKind::EM;
  int em_max_iters = 10000;
  double em_tol = 1e-10;
  Exec exec = Exec::Parallel;
};

struct SweepRecord {
  double p;
  long long N;
  int replicate;
  int i;
  double theta_i;
  double theta_hat_i;
};

struct FailedReplicate {
  double p;
  long long N;
  int replicate;
  std::string error;
};

/// Log10 bins over [1e-8, 1]; bin 0 collects estimates <= 1e-8 (including
/// nonpositive ones) and the last bin collects estimates above 1.
struct DensityGrid {
  static constexpr int kBins = 80;
  static constexpr double kLogLo = -8.0;
  static constexpr double kLogHi = 0.0;

  std::map<int, std::vector<long long>> counts;  // index i -> kBins + 2 counts

  static int bin_of(double estimate);
  /// Bin edges; -inf / +inf for the open-ended bins.
  static double lower_edge(int bin);
  static double upper_edge(int bin);
  void add(int i, double estimate);
  long long total() const;
};

struct CellSummary {
  double p;
  long long N;
  double nrmse_head;  // NaN when no index falls in the head
  double nrmse_tail;  // NaN when no index falls in the tail
  int succeeded;
  int failed;
  DensityGrid grid;
};

struct ExperimentResult {
  std::vector<SweepRecord> records;
  std::vector<CellSummary> cells;
  std::vector<FailedReplicate> failures;
  /// Indices left out of NRMSE and the grid because theta_i = 0.
  std::vector<int> excluded_indices;
};

ExperimentResult run_sweep(const SweepSpec& spec);

struct GrowthPoint {
  int W;
  BoundValue bound;  // per-sample bound on theta_1
};

std::vector<GrowthPoint> crlb_growth_curve(const TailFamily& family, double p, const std::vector<int>& w_values,
                                           Truncation mode = Truncation::FoldTail);

}  // namespace setsize
