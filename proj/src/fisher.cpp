#include "setsize/fisher.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "setsize/kernels.hpp"

namespace setsize {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_open_p(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DataError("Fisher machinery is undefined at p = " + std::to_string(p) + "; need 0 < p < 1");
  }
}

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

SignedLog negate(SignedLog s) {
  s.sign = -s.sign;
  return s;
}

}  // namespace

BoundValue BoundValue::from_log(double natural_log) {
  BoundValue b;
  b.value = exp_or_inf(natural_log);
  b.log10 = natural_log / std::numbers::ln10;
  b.diverged = std::isinf(b.value);
  return b;
}

BoundValue BoundValue::from_signed(const SignedLog& s) {
  // Mathematically nonnegative; a negative result is rounding noise.
  if (s.sign <= 0) return {};
  return from_log(s.log_abs);
}

BoundValue BoundValue::scaled(double factor) const {
  BoundValue b = *this;
  b.value = value * factor;
  b.log10 = log10 + std::log10(factor);
  return b;
}

double b_entry(int j, int i, double p) {
  if (j < 1 || j > i) return 0.0;
  if (p >= 1.0) return i == j ? 1.0 : 0.0;
  const auto& lf = log_factorials(static_cast<std::size_t>(i) + 1);
  const double log_q = std::log1p(-p);
  double log_b = lf.log_binomial(i, j) + j * std::log(p) + (i - j) * log_q - std::log(-std::expm1(i * log_q));
  return std::exp(log_b);
}

double b_inverse_entry(int j, int i, double p) {
  if (j < 1 || i < j) return 0.0;
  if (p >= 1.0) return i == j ? 1.0 : 0.0;
  const auto& lf = log_factorials(static_cast<std::size_t>(i) + 1);
  const double log_q = std::log1p(-p);
  double log_b = lf.log_binomial(i, j) - i * std::log(p) + (i - j) * log_q + std::log(-std::expm1(j * log_q));
  double value = exp_or_inf(log_b);
  return (i - j) % 2 == 0 ? value : -value;
}

std::vector<double> d_from_phi(const std::vector<double>& phi, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw DataError("sampling probability must lie in (0, 1]");
  const int W = static_cast<int>(phi.size());
  std::vector<double> d(phi.size(), 0.0);
  if (p == 1.0) return phi;
  const auto& lf = log_factorials(static_cast<std::size_t>(W) + 1);
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  std::vector<double> log_observe(phi.size());
  for (int i = 1; i <= W; ++i) log_observe[static_cast<std::size_t>(i - 1)] = std::log(-std::expm1(i * log_q));
  for (int j = 1; j <= W; ++j) {
    CompensatedSum s;
    for (int i = j; i <= W; ++i) {
      double f = phi[static_cast<std::size_t>(i - 1)];
      if (f == 0.0) continue;
      double log_b = lf.log_binomial(i, j) + j * log_p + (i - j) * log_q - log_observe[static_cast<std::size_t>(i - 1)];
      s.add(std::exp(log_b) * f);
    }
    d[static_cast<std::size_t>(j - 1)] = s.value();
  }
  return d;
}

std::vector<double> d_pmf(const SetSizeDistribution& theta, double p) {
  return d_from_phi(phi_from_theta(theta, p).phi, p);
}

Matrix<double> jphi_inverse(const SetSizeDistribution& theta, double p, const DenseOptions& options) {
  require_open_p(p);
  const int W = theta.W();
  if (W > options.w_max_dense) {
    throw DataError("ill-conditioned; use diagonal path (W = " + std::to_string(W) + " exceeds dense limit " +
                    std::to_string(options.w_max_dense) + ")");
  }
  const auto phi = phi_from_theta(theta, p);
  const auto d = d_from_phi(phi.phi, p);
  const auto& lf = log_factorials(static_cast<std::size_t>(W) + 1);
  const double log_q = std::log1p(-p);
  const double log_x = log_q - std::log(p);
  std::vector<double> log_factor(static_cast<std::size_t>(W));
  for (int i = 1; i <= W; ++i) log_factor[static_cast<std::size_t>(i - 1)] = std::log(std::expm1(-i * log_q));

  Matrix<double> out(static_cast<std::size_t>(W), static_cast<std::size_t>(W));
  for (int i = 1; i <= W; ++i) {
    for (int j = i; j <= W; ++j) {
      LogSumExp series;
      for (int k = j; k <= W; ++k) {
        series.add(2.0 * k * log_x + lf.log_binomial(k, j) + lf.log_binomial(k, i) + safe_log(d[static_cast<std::size_t>(k - 1)]));
      }
      double value = exp_or_inf(series.log_value() + log_factor[static_cast<std::size_t>(i - 1)] + log_factor[static_cast<std::size_t>(j - 1)]);
      if ((i + j) % 2 != 0) value = -value;
      out(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1)) = value;
      out(static_cast<std::size_t>(j - 1), static_cast<std::size_t>(i - 1)) = value;
    }
  }
  if (options.subtract_constraint) {
    for (int i = 0; i < W; ++i)
      for (int j = 0; j < W; ++j) out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) -= phi.phi[static_cast<std::size_t>(i)] * phi.phi[static_cast<std::size_t>(j)];
  }
  return out;
}

FisherContext::FisherContext(const SetSizeDistribution& theta, double p)
    : W_(theta.W()), p_(p), q_(1.0 - p), theta_(theta.theta()), lf_(nullptr) {
  require_open_p(p);
  log_p_ = std::log(p);
  log_q_ = std::log1p(-p);
  log_x_ = log_q_ - log_p_;
  CompensatedSum z;
  LogSumExp s_q, s_x;
  log_theta_.resize(theta_.size());
  for (int i = 1; i <= W_; ++i) {
    double t = theta_[static_cast<std::size_t>(i - 1)];
    log_theta_[static_cast<std::size_t>(i - 1)] = safe_log(t);
    z.add(t * -std::expm1(i * log_q_));
    s_q.add(i * log_q_ + safe_log(t));
    s_x.add(i * log_x_ + safe_log(t));
  }
  eta_ = 1.0 / z.value();
  log_eta_ = std::log(eta_);
  log_s_q_ = s_q.log_value();
  log_s_x_ = s_x.log_value();
  lf_ = &log_factorials(2 * static_cast<std::size_t>(W_) + 2);
}

double log_g(const FisherContext& ctx, int i, int j) {
  const auto& lf = ctx.lf();
  LogSumExp acc;
  const int top = std::min(i, j);
  for (int k = 0; k <= top; ++k) {
    acc.add(lf.log_binomial(i, k) - (j - k) * ctx.log_p() + lf.log_falling(j, k) + k * ctx.log_x() - lf.log_factorial(k));
  }
  return i * ctx.log_x() + acc.log_value();
}

double log_a1(const FisherContext& ctx, int i) {
  const auto& lf = ctx.lf();
  LogSumExp acc;
  for (int j = 0; j <= ctx.W() - i; ++j) {
    double lt = ctx.log_theta(i + j);
    if (lt == kNegInf) continue;
    acc.add(lf.log_binomial(i + j, i) + (i + j) * ctx.log_q() + lt + log_g(ctx, i, j));
  }
  return ctx.log_eta() - 2.0 * i * ctx.log_q() + acc.log_value();
}

namespace {

struct RawTerms {
  SignedLog a1, a2, a31, a32;
};

RawTerms raw_terms(const FisherContext& ctx, int i) {
  RawTerms t;
  t.a1 = SignedLog::from_log(log_a1(ctx, i));
  const double lti = ctx.log_theta(i);
  if (lti == kNegInf) return t;

  LogSumExp inner;
  inner.add(0.0);
  inner.add(ctx.log_eta() + ctx.log_s_q());
  inner.add(ctx.log_eta() + ctx.log_s_x());
  t.a2 = SignedLog::from_log(2.0 * lti + inner.log_value());

  t.a31 = SignedLog::from_log(std::numbers::ln2 + ctx.log_eta() + 2.0 * lti);

  const auto& lf = ctx.lf();
  LogSumExp series;
  for (int j = 0; j <= ctx.W() - i; ++j) {
    double lt = ctx.log_theta(i + j);
    if (lt == kNegInf) continue;
    series.add(lf.log_binomial(i + j, i) + (i + j) * ctx.log_q() + lt - j * ctx.log_p());
  }
  double log_a32 = std::numbers::ln2 + lti - i * ctx.log_q() + ctx.log_eta() + i * ctx.log_x() + series.log_value();
  t.a32 = SignedLog::from_log(log_a32, i % 2 == 0 ? 1 : -1);
  return t;
}

}  // namespace

DiagonalTerms jtheta_terms(const FisherContext& ctx, int i) {
  if (i < 1 || i > ctx.W()) throw DataError("index out of range");
  RawTerms r = raw_terms(ctx, i);
  std::array<SignedLog, 2> a3{r.a31, negate(r.a32)};
  return {r.a1, r.a2, signed_log_sum(a3, 0.0), ctx.eta()};
}

BoundValue jtheta_entry(const FisherContext& ctx, int i) {
  if (i < 1 || i > ctx.W()) throw DataError("index out of range");
  RawTerms r = raw_terms(ctx, i);
  std::array<SignedLog, 4> parts{r.a1, r.a2, negate(r.a31), r.a32};
  SignedLog total = signed_log_sum(parts);
  if (total.sign > 0) total.log_abs -= 2.0 * ctx.log_eta();
  return BoundValue::from_signed(total);
}

std::vector<BoundValue> jtheta_diag(const SetSizeDistribution& theta, double p, Exec exec) {
  FisherContext ctx(theta, p);
  std::vector<BoundValue> out(static_cast<std::size_t>(theta.W()));
  if (exec == Exec::Parallel) {
    kernels::parallel::jtheta_diag(ctx, out);
  } else {
    kernels::serial::jtheta_diag(ctx, out);
  }
  return out;
}

A1Bounds a1_bounds(const SetSizeDistribution& theta, double p, int i) {
  FisherContext ctx(theta, p);
  if (i < 1 || i > ctx.W()) throw DataError("index out of range");
  const auto& lf = ctx.lf();
  const int span = ctx.W() - i;
  const double log_c = ctx.log_eta() - i * ctx.log_q() - 2.0 * lf.log_factorial(i);

  // suffix[k] = log sum_{j >= k} (i+j)^(2i) x^(i+j) theta_(i+j)
  std::vector<double> suffix(static_cast<std::size_t>(span) + 2, kNegInf);
  {
    LogSumExp run;
    for (int j = span; j >= 0; --j) {
      run.add(2.0 * i * std::log(static_cast<double>(i + j)) + (i + j) * ctx.log_x() + ctx.log_theta(i + j));
      suffix[static_cast<std::size_t>(j)] = run.log_value();
    }
  }
  LogSumExp upper;
  for (int k = 0; k <= i && k <= span; ++k) {
    double log_cik = lf.log_binomial(i, k) + k * ctx.log_q() + lf.log_factorial(i) - lf.log_factorial(k);
    upper.add(log_cik + suffix[static_cast<std::size_t>(k)]);
  }
  LogSumExp lower;
  for (int j = std::max(i * (i - 1), 1); j <= span; ++j) {
    lower.add(2.0 * i * std::log(static_cast<double>(j)) + (i + j) * ctx.log_x() + ctx.log_theta(i + j));
  }
  const double log_cii = i * ctx.log_q();
  A1Bounds b;
  b.log_upper = log_c + upper.log_value();
  b.log_lower = log_c + log_cii + lower.log_value();
  b.upper = exp_or_inf(b.log_upper);
  b.lower = exp_or_inf(b.log_lower);
  return b;
}

BoundValue divergence_sum(const SetSizeDistribution& theta, double p) {
  require_open_p(p);
  const double log_x = std::log1p(-p) - std::log(p);
  const int W = theta.W();
  if (W * std::abs(log_x) < 600.0) {
    CompensatedSum s;
    for (int j = 1; j <= W; ++j) s.add(std::exp(j * log_x) * theta[j]);
    double v = s.value();
    return BoundValue::from_log(std::log(v));
  }
  LogSumExp s;
  for (int j = 1; j <= W; ++j) s.add(j * log_x + safe_log(theta[j]));
  return BoundValue::from_log(s.log_value());
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Recoverable: return "Recoverable";
    case Verdict::Critical: return "Critical";
    case Verdict::Unrecoverable: return "Unrecoverable";
  }
  return "Unknown";
}

RegimeVerdict classify_regime(const TailClass& tail, double p) {
  require_open_p(p);
  std::ostringstream os;
  if (std::holds_alternative<FasterThanExponential>(tail)) {
    os << "tail lighter than exponential: the bound stays O(1/N) for every p in (0, 1)";
    return {0.0, Verdict::Recoverable, os.str()};
  }
  double threshold;
  if (const auto* e = std::get_if<Exponential>(&tail)) {
    threshold = e->rate / (e->rate + 1.0);
    os << "exponential tail with rate a = " << e->rate << ": threshold a/(a+1) = " << threshold << "; ";
  } else {
    threshold = 0.5;
    os << "tail heavier than exponential: threshold 1/2; ";
  }
  Verdict v;
  if (std::abs(p - threshold) <= 1e-12) {
    v = Verdict::Critical;
    os << "p sits on the threshold, the bound grows polynomially in W";
  } else if (p < threshold) {
    v = Verdict::Unrecoverable;
    os << "p below threshold, log MSE grows linearly in W";
  } else {
    v = Verdict::Recoverable;
    os << "p above threshold, MSE is O(1/N)";
  }
  return {threshold, v, os.str()};
}

MeanTerms crlb_mean_theta_terms(const SetSizeDistribution& theta, double p) {
  FisherContext ctx(theta, p);
  const double m = moment(theta, 1);
  const double m2 = moment(theta, 2);
  const double x = ctx.q() / ctx.p();
  MeanTerms t;
  t.eta = ctx.eta();
  t.u1 = SignedLog::from_value(ctx.eta() * (m2 + x * m));
  LogSumExp inner;
  inner.add(0.0);
  inner.add(ctx.log_eta() + ctx.log_s_q());
  inner.add(ctx.log_eta() + ctx.log_s_x());
  t.u2 = SignedLog::from_log(2.0 * std::log(m) + inner.log_value());
  t.u3 = SignedLog::from_value(2.0 * m * ctx.eta() * (m + x * theta[1]));
  return t;
}

BoundValue crlb_mean_theta(const SetSizeDistribution& theta, double p) {
  MeanTerms t = crlb_mean_theta_terms(theta, p);
  std::array<SignedLog, 3> parts{t.u1, t.u2, negate(t.u3)};
  SignedLog total = signed_log_sum(parts);
  if (total.sign > 0) total.log_abs -= 2.0 * std::log(t.eta);
  return BoundValue::from_signed(total);
}

double crlb_mean_phi(const SetSizeDistribution& theta, double p) {
  const auto phi = phi_from_theta(theta, p);
  const double q = 1.0 - p;
  CompensatedSum second;
  for (int i = 1; i <= phi.W(); ++i) {
    double f = phi.phi[static_cast<std::size_t>(i - 1)];
    if (f == 0.0) continue;
    double qi = std::pow(q, i);
    second.add(i * (p * i + qi * q - 2.0 * qi + q) * f / (p * (1.0 - qi)));
  }
  double m = moment(phi.phi, 1);
  return std::max(0.0, second.value() - m * m);
}

double biased_bound(double crlb_ii, double bias_slope) {
  if (!(crlb_ii >= 0.0)) throw DataError("bound must be nonnegative");
  double f = 1.0 + bias_slope;
  return f * f * crlb_ii;
}

Matrix<double> bayesian_bound(const Matrix<double>& jtheta, const Matrix<double>& jprior) {
  if (jtheta.rows() != jtheta.cols() || jprior.rows() != jprior.cols() || jtheta.rows() != jprior.rows()) {
    throw DataError("bayesian bound: matrices must be square and of equal size");
  }
  Matrix<long double> total = (jtheta + jprior).cast<long double>();
  Matrix<long double> inv;
  try {
    inv = invert(total);
  } catch (const SingularMatrix&) {
    throw DataError("bound undefined: total Fisher information is singular");
  }
  const std::size_t n = inv.rows();
  Matrix<double> out(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) out(r, c) = static_cast<double>(0.5L * (inv(r, c) + inv(c, r)));
  return out;
}

CrlbReport crlb_report(const SetSizeDistribution& theta, double p, long long n_observed, Exec exec) {
  if (n_observed < 1) throw DataError("number of observed sets must be >= 1");
  const double inv_n = 1.0 / static_cast<double>(n_observed);
  CrlbReport r;
  r.W = theta.W();
  r.p = p;
  r.n_observed = n_observed;
  r.theta_bounds = jtheta_diag(theta, p, exec);
  for (auto& b : r.theta_bounds) b = b.scaled(inv_n);
  r.mean_theta_bound = crlb_mean_theta(theta, p).scaled(inv_n);
  r.mean_phi_bound = crlb_mean_phi(theta, p) * inv_n;
  r.divergence_sum = divergence_sum(theta, p);
  try {
    TailFit fit = classify_tail(theta);
    r.tail = tail_name(fit.tail);
    r.tail_heuristic = fit.heuristic;
    r.regime = classify_regime(fit.tail, p);
  } catch (const DataError& e) {
    r.tail = "Unclassified";
    r.tail_heuristic = true;
    r.tail_note = e.what();
  }
  return r;
}

}  // namespace setsize
