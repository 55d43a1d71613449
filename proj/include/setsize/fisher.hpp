#pragma once

// Closed-form Cramer-Rao machinery for estimating theta from thinned sets.
//
// B(p) maps the observed-set size distribution phi to the distribution d of
// retained counts: d = B phi, with b_ji = C(i,j) p^j q^(i-j) / (1 - q^i).
// The per-sample bound on theta_i is the i-th diagonal entry of
// grad(H) (J_phi)^-1 grad(H)^T, computed here without forming any matrix:
//
//   [(J_theta)^-1]_ii = (A1(i) + A2(i) - A3(i)) / eta^2
//
// A1 is an all-positive series; A2 and A3 have closed forms. Every quantity
// is accumulated in log space so divergent regimes report +inf (and a finite
// log10) instead of NaN.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "setsize/dense.hpp"
#include "setsize/dist.hpp"
#include "setsize/numeric.hpp"

namespace setsize {

enum class Exec { Serial, Parallel };

/// A nonnegative bound that may exceed double range.
struct BoundValue {
  double value = 0.0;   // +inf when diverged
  double log10 = -std::numeric_limits<double>::infinity();
  bool diverged = false;

  static BoundValue from_log(double natural_log);
  static BoundValue from_signed(const SignedLog& s);
  BoundValue scaled(double factor) const;
};

double b_entry(int j, int i, double p);
double b_inverse_entry(int j, int i, double p);

/// Same entries evaluated directly in an arbitrary scalar type; used with the
/// wide type where the alternating sums need the headroom.
template <class Real>
Real b_entry_as(int j, int i, const Real& p) {
  if (j < 1 || j > i) return Real(0);
  using std::pow;
  Real q = Real(1) - p;
  return binomial_as<Real>(i, j) * pow(p, j) * pow(q, i - j) / (Real(1) - pow(q, i));
}

template <class Real>
Real b_inverse_entry_as(int j, int i, const Real& p) {
  if (j < 1 || i < j) return Real(0);
  using std::pow;
  Real q = Real(1) - p;
  Real sign = ((i - j) % 2 == 0) ? Real(1) : Real(-1);
  return sign * binomial_as<Real>(i, j) * pow(q, i - j) * (Real(1) - pow(q, j)) / pow(p, i);
}

template <class Real>
Matrix<Real> b_matrix_as(int W, const Real& p) {
  Matrix<Real> b(static_cast<std::size_t>(W), static_cast<std::size_t>(W));
  for (int j = 1; j <= W; ++j)
    for (int i = j; i <= W; ++i) b(static_cast<std::size_t>(j - 1), static_cast<std::size_t>(i - 1)) = b_entry_as<Real>(j, i, p);
  return b;
}

template <class Real>
Matrix<Real> b_inverse_matrix_as(int W, const Real& p) {
  Matrix<Real> b(static_cast<std::size_t>(W), static_cast<std::size_t>(W));
  for (int j = 1; j <= W; ++j)
    for (int i = j; i <= W; ++i) b(static_cast<std::size_t>(j - 1), static_cast<std::size_t>(i - 1)) = b_inverse_entry_as<Real>(j, i, p);
  return b;
}

/// d = B(p) phi for an arbitrary phi (need not be normalized).
std::vector<double> d_from_phi(const std::vector<double>& phi, double p);
std::vector<double> d_pmf(const SetSizeDistribution& theta, double p);

struct DenseOptions {
  int w_max_dense = 50;
  /// Subtract phi phi^T, the correction for the sum-to-one constraint.
  bool subtract_constraint = false;
};

/// (J_phi)^-1 = B^-1 diag(d) B^-T, via its positive closed-form series.
Matrix<double> jphi_inverse(const SetSizeDistribution& theta, double p, const DenseOptions& options = {});

/// Quantities shared by every per-index term; computed once per (theta, p).
class FisherContext {
 public:
  FisherContext(const SetSizeDistribution& theta, double p);

  int W() const { return W_; }
  double p() const { return p_; }
  double q() const { return q_; }
  double eta() const { return eta_; }
  double log_eta() const { return log_eta_; }
  double log_p() const { return log_p_; }
  double log_q() const { return log_q_; }
  double log_x() const { return log_x_; }  // log(q/p)
  double theta(int i) const { return theta_[static_cast<std::size_t>(i - 1)]; }
  double log_theta(int i) const { return log_theta_[static_cast<std::size_t>(i - 1)]; }
  /// log(sum_j q^j theta_j)
  double log_s_q() const { return log_s_q_; }
  /// log(sum_j (q/p)^j theta_j)
  double log_s_x() const { return log_s_x_; }
  const LogFactorialTable& lf() const { return *lf_; }

 private:
  int W_;
  double p_, q_;
  double eta_, log_eta_;
  double log_p_, log_q_, log_x_;
  std::vector<double> theta_, log_theta_;
  double log_s_q_, log_s_x_;
  const LogFactorialTable* lf_;
};

/// log A1(i) from the positive series with the closed-form g_ij.
double log_a1(const FisherContext& ctx, int i);
/// log of g_ij = sum_{k=0}^{j} C(i+k, i) C(j, k) (q/p)^(k+i), closed form.
double log_g(const FisherContext& ctx, int i, int j);

struct DiagonalTerms {
  SignedLog a1, a2, a3;
  double eta;
};
DiagonalTerms jtheta_terms(const FisherContext& ctx, int i);

/// Per-sample bound for index i (1-based).
BoundValue jtheta_entry(const FisherContext& ctx, int i);

/// Diagonal of (J_theta)^-1, i = 1..W. p must lie strictly inside (0, 1).
std::vector<BoundValue> jtheta_diag(const SetSizeDistribution& theta, double p, Exec exec = Exec::Parallel);

struct A1Bounds {
  double lower, upper;
  double log_lower, log_upper;
};
A1Bounds a1_bounds(const SetSizeDistribution& theta, double p, int i);

/// sum_j ((1-p)/p)^j theta_j
BoundValue divergence_sum(const SetSizeDistribution& theta, double p);

enum class Verdict { Recoverable, Critical, Unrecoverable };
std::string verdict_name(Verdict v);

struct RegimeVerdict {
  double threshold_p;
  Verdict verdict;
  std::string rationale;
};

RegimeVerdict classify_regime(const TailClass& tail, double p);

/// Per-sample bound on the mean set size sum_i i theta_i.
BoundValue crlb_mean_theta(const SetSizeDistribution& theta, double p);
struct MeanTerms {
  SignedLog u1, u2, u3;
  double eta;
};
MeanTerms crlb_mean_theta_terms(const SetSizeDistribution& theta, double p);

/// Per-sample bound on the mean size of observed sets, sum_i i phi_i.
double crlb_mean_phi(const SetSizeDistribution& theta, double p);

double biased_bound(double crlb_ii, double bias_slope);

/// (J_prior + J_theta)^-1, symmetrized.
Matrix<double> bayesian_bound(const Matrix<double>& jtheta, const Matrix<double>& jprior);

struct CrlbReport {
  int W;
  double p;
  long long n_observed;
  std::vector<BoundValue> theta_bounds;
  BoundValue mean_theta_bound;
  double mean_phi_bound;
  BoundValue divergence_sum;
  /// Empty when the tail could not be classified (see tail_note).
  std::optional<RegimeVerdict> regime;
  std::string tail;
  bool tail_heuristic = true;
  std::string tail_note;
};

CrlbReport crlb_report(const SetSizeDistribution& theta, double p, long long n_observed, Exec exec = Exec::Parallel);

}  // namespace setsize
