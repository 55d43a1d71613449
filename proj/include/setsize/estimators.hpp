#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "setsize/fisher.hpp"
#include "setsize/sampling.hpp"

namespace setsize {

struct DirichletUniform {
  std::uint64_t seed = 0;
};
struct UniformInit {};
struct CustomInit {
  std::vector<double> phi;
};

using EmInit = std::variant<DirichletUniform, UniformInit, CustomInit>;

struct EmConfig {
  int max_iters = 10000;
  double tol = 1e-10;  // relative log-likelihood change
  /// When set, convergence also needs max_i |phi_i change| <= param_tol. The
  /// likelihood change is second order in the distance to the optimum and
  /// stalls at rounding level first; use this to run to the fixed point.
  std::optional<double> param_tol;
  EmInit init = DirichletUniform{};
  bool record_trace = false;
  Exec exec = Exec::Serial;
};

struct EstimateResult {
  std::vector<double> theta_hat;
  std::vector<double> phi_hat;
  double log_likelihood = 0.0;
  int iters = 0;
  bool converged = false;
  /// EM: phi was floored at 1e-300 to keep an observed size reachable.
  bool floored = false;
  /// Inversion only: B^-1 d before projection, and theta mapped from it when
  /// that map is defined (its normalizer is positive).
  std::optional<std::vector<double>> phi_raw;
  std::optional<std::vector<double>> theta_raw;
  std::vector<double> trace;  // log-likelihood per iteration when recorded
};

inline constexpr double kPhiFloor = 1e-300;

/// Sum_j n_j log d_j(phi).
double log_likelihood(const ObservedHistogram& hist, const std::vector<double>& phi);

EstimateResult em_estimate(const ObservedHistogram& hist, const EmConfig& config = {});

/// Widest support inversion accepts.
inline constexpr int kInversionMaxW = 50;

EstimateResult inversion_estimate(const ObservedHistogram& hist);

/// Euclidean projection onto the probability simplex.
std::vector<double> project_to_simplex(const std::vector<double>& v);

/// Unbiased, variance-attaining estimate of the mean observed-set size.
double efficient_mean_phi(const ObservedHistogram& hist);

double plug_in_mean_theta(const EstimateResult& est);

}  // namespace setsize
