#include "setsize/dist.hpp"

#include <cmath>
#include <sstream>

#include "setsize/numeric.hpp"

namespace setsize {

namespace {

void require_p(double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw DataError("sampling probability must lie in (0, 1], got " + std::to_string(p));
  }
}

// sum_{j >= n} j^-beta, beta > 1.
double zipf_tail_sum(double beta, long long n) {
  double direct = 0.0;
  for (int t = 0; t < 16; ++t, ++n) direct += std::pow(static_cast<double>(n), -beta);
  const double x = static_cast<double>(n);
  // Euler-Maclaurin remainder.
  double rest = std::pow(x, 1.0 - beta) / (beta - 1.0) + 0.5 * std::pow(x, -beta) +
                beta / 12.0 * std::pow(x, -beta - 1.0) -
                beta * (beta + 1.0) * (beta + 2.0) / 720.0 * std::pow(x, -beta - 3.0);
  return direct + rest;
}

}  // namespace

std::string tail_name(const TailClass& tail) {
  if (std::holds_alternative<FasterThanExponential>(tail)) return "FasterThanExponential";
  if (std::holds_alternative<SlowerThanExponential>(tail)) return "SlowerThanExponential";
  return "Exponential";
}

SetSizeDistribution::SetSizeDistribution(std::vector<double> theta, std::optional<TailClass> tail)
    : theta_(std::move(theta)), tail_(tail) {
  if (theta_.empty()) throw DataError("invalid W: distribution needs at least one size");
  for (double t : theta_) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw DataError("theta entries must be finite and nonnegative");
  }
  double total = compensated_sum(theta_);
  if (std::abs(total - 1.0) > kSimplexTol) {
    std::ostringstream os;
    os << "theta must sum to 1 (got " << total << ")";
    throw DataError(os.str());
  }
  if (tail_) {
    if (auto* e = std::get_if<Exponential>(&*tail_); e && !(e->rate > 0.0 && e->rate < 1.0)) {
      throw DataError("exponential tail rate must lie in (0, 1)");
    }
  }
}

SetSizeDistribution SetSizeDistribution::from_weights(std::vector<double> weights, std::optional<TailClass> tail) {
  if (weights.empty()) throw DataError("invalid W: distribution needs at least one size");
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DataError("weights must be finite and nonnegative");
  }
  double total = compensated_sum(weights);
  if (!(total > 0.0)) throw DataError("weights sum to zero");
  for (double& w : weights) w /= total;
  // One more pass absorbs the rounding left by the division.
  double residual = compensated_sum(weights);
  if (std::abs(residual - 1.0) > kSimplexTol) {
    for (double& w : weights) w /= residual;
  }
  return SetSizeDistribution(std::move(weights), tail);
}

SetSizeDistribution truncate_at(const std::map<long long, double>& raw_counts, int W) {
  if (W < 1) throw DataError("invalid W");
  if (raw_counts.empty()) throw DataError("no sets");
  std::vector<double> weights(static_cast<std::size_t>(W), 0.0);
  std::vector<CompensatedSum> bins(static_cast<std::size_t>(W));
  for (const auto& [size, count] : raw_counts) {
    if (size < 1) throw DataError("set sizes must be >= 1");
    if (count < 0) throw DataError("counts must be nonnegative");
    long long bin = std::min<long long>(size, W);
    bins[static_cast<std::size_t>(bin - 1)].add(count);
  }
  for (std::size_t k = 0; k < bins.size(); ++k) weights[k] = bins[k].value();
  return SetSizeDistribution::from_weights(std::move(weights));
}

ObservedSetDistribution phi_from_theta(const SetSizeDistribution& theta, double p) {
  require_p(p);
  const double log_q = std::log1p(-p);
  std::vector<double> phi(theta.theta().size());
  for (std::size_t k = 0; k < phi.size(); ++k) {
    // 1 - q^i, exact at p = 1 where log_q = -inf.
    double observe = p == 1.0 ? 1.0 : -std::expm1(static_cast<double>(k + 1) * log_q);
    phi[k] = theta.theta()[k] * observe;
  }
  double total = compensated_sum(phi);
  if (!(total > 0.0)) throw DataError("every set is unobservable");
  for (double& v : phi) v /= total;
  return {std::move(phi), p};
}

SetSizeDistribution theta_from_phi(const ObservedSetDistribution& phi) {
  require_p(phi.p);
  const double log_q = std::log1p(-phi.p);
  std::vector<double> weights(phi.phi.size());
  for (std::size_t k = 0; k < weights.size(); ++k) {
    double observe = phi.p == 1.0 ? 1.0 : -std::expm1(static_cast<double>(k + 1) * log_q);
    weights[k] = phi.phi[k] / observe;
  }
  return SetSizeDistribution::from_weights(std::move(weights));
}

double moment(const std::vector<double>& probs, int r) {
  if (r < 1) throw DataError("moment order must be >= 1");
  CompensatedSum s;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    s.add(std::pow(static_cast<double>(k + 1), r) * probs[k]);
  }
  return s.value();
}

double moment(const SetSizeDistribution& theta, int r) { return moment(theta.theta(), r); }

SetSizeDistribution geometric(double a, int W) { return TailFamily{TailFamily::Kind::Geometric, a}.at(W, Truncation::Renormalize); }
SetSizeDistribution zipf(double beta, int W) { return TailFamily{TailFamily::Kind::Zipf, beta}.at(W, Truncation::Renormalize); }
SetSizeDistribution gauss_tail(double scale, int W) { return TailFamily{TailFamily::Kind::GaussTail, scale}.at(W, Truncation::Renormalize); }

TailClass TailFamily::tail() const {
  switch (kind) {
    case Kind::Geometric: return Exponential{param};
    case Kind::Zipf: return SlowerThanExponential{};
    case Kind::GaussTail: return FasterThanExponential{};
  }
  return SlowerThanExponential{};
}

SetSizeDistribution TailFamily::at(int W, Truncation mode) const {
  if (W < 1) throw DataError("invalid W");
  std::vector<double> w(static_cast<std::size_t>(W));
  double folded = 0.0;
  switch (kind) {
    case Kind::Geometric: {
      if (!(param > 0.0 && param < 1.0)) throw DataError("geometric rate must lie in (0, 1)");
      // Scale by 1/a so the first weight is 1 and nothing underflows early.
      const double la = std::log(param);
      for (int j = 1; j <= W; ++j) w[static_cast<std::size_t>(j - 1)] = std::exp((j - 1) * la);
      folded = std::exp(W * la) / (1.0 - param);
      break;
    }
    case Kind::Zipf: {
      if (!(param > 0.0)) throw DataError("zipf exponent must be positive");
      for (int j = 1; j <= W; ++j) w[static_cast<std::size_t>(j - 1)] = std::pow(static_cast<double>(j), -param);
      if (mode == Truncation::FoldTail) {
        if (!(param > 1.0)) throw DataError("zipf tail mass is infinite for exponent <= 1");
        folded = zipf_tail_sum(param, static_cast<long long>(W) + 1);
      }
      break;
    }
    case Kind::GaussTail: {
      if (!(param > 0.0)) throw DataError("gauss-tail scale must be positive");
      for (int j = 1; j <= W; ++j) {
        double z = j / param;
        w[static_cast<std::size_t>(j - 1)] = std::exp(-z * z);
      }
      for (long long j = W + 1;; ++j) {
        double z = static_cast<double>(j) / param;
        double term = std::exp(-z * z);
        folded += term;
        if (term < 1e-300 || term < folded * 1e-18) break;
      }
      break;
    }
  }
  if (mode == Truncation::FoldTail) w.back() += folded;
  return SetSizeDistribution::from_weights(std::move(w), tail());
}

TailFit classify_tail(const SetSizeDistribution& theta, const TailFitOptions& options) {
  if (theta.known_tail()) return {*theta.known_tail(), false};
  const int W = theta.W();
  int first = options.first.value_or(std::max(1, std::min(W / 2 + 1, W - 2)));
  int last = options.last.value_or(W);
  if (first < 1 || last > W || last - first + 1 < 3) {
    throw DataError("cannot classify: fit window needs at least three sizes");
  }
  // Least squares of log theta on (1, u, u^2) with u centred on the window.
  const double mid = 0.5 * (first + last);
  double s[5] = {0, 0, 0, 0, 0};
  double t[3] = {0, 0, 0};
  for (int i = first; i <= last; ++i) {
    double v = theta[i];
    if (!(v > 0.0)) throw DataError("cannot classify: zero probability at size " + std::to_string(i));
    double y = std::log(v);
    double u = i - mid;
    double pw = 1.0;
    for (int k = 0; k < 5; ++k) {
      s[k] += pw;
      if (k < 3) t[k] += pw * y;
      pw *= u;
    }
  }
  // Symmetric window: odd sums vanish, so the slope decouples.
  const double slope = t[1] / s[2];
  const double det = s[0] * s[4] - s[2] * s[2];
  const double curvature = (s[0] * t[2] - s[2] * t[0]) / det;
  const double length = last - first;

  TailFit fit{SlowerThanExponential{}, true, slope, curvature};
  if (slope >= 0.0) return fit;
  double bend = std::abs(curvature) * length / std::abs(slope);
  if (bend < options.straightness_tol) {
    fit.tail = Exponential{std::exp(slope)};
  } else if (curvature < 0.0) {
    fit.tail = FasterThanExponential{};
  }
  return fit;
}

}  // namespace setsize
