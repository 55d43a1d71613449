#include "setsize/estimators.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "setsize/kernels.hpp"
#include "setsize/wide.hpp"

namespace setsize {

namespace {

void require_counts(const ObservedHistogram& hist) {
  hist.validate();
  if (hist.N < 1) throw DataError("histogram has no observed sets (N = 0)");
}

std::vector<double> empirical(const ObservedHistogram& hist) {
  std::vector<double> freq(hist.counts.size());
  const double n = static_cast<double>(hist.N);
  for (std::size_t k = 0; k < freq.size(); ++k) freq[k] = static_cast<double>(hist.counts[k]) / n;
  return freq;
}

double empirical_log_likelihood(const ObservedHistogram& hist) {
  CompensatedSum s;
  const double n = static_cast<double>(hist.N);
  for (long long c : hist.counts)
    if (c > 0) s.add(static_cast<double>(c) * std::log(static_cast<double>(c) / n));
  return s.value();
}

void normalize(std::vector<double>& v) {
  const double total = compensated_sum(v);
  for (double& x : v) x /= total;
}

kernels::EmSystem build_system(const ObservedHistogram& hist) {
  kernels::EmSystem sys;
  sys.W = hist.W;
  const double p = hist.p;
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const auto& lf = log_factorials(static_cast<std::size_t>(hist.W) + 1);
  std::vector<double> log_observe(static_cast<std::size_t>(hist.W));
  for (int i = 1; i <= hist.W; ++i) log_observe[static_cast<std::size_t>(i - 1)] = std::log(-std::expm1(i * log_q));

  const double n = static_cast<double>(hist.N);
  for (int j = 1; j <= hist.W; ++j) {
    const long long c = hist.counts[static_cast<std::size_t>(j - 1)];
    if (c == 0) continue;
    sys.rows.push_back(j);
    sys.weights.push_back(static_cast<double>(c) / n);
    std::vector<double> row(static_cast<std::size_t>(hist.W - j + 1));
    for (int i = j; i <= hist.W; ++i) {
      row[static_cast<std::size_t>(i - j)] =
          std::exp(lf.log_binomial(i, j) + j * log_p + (i - j) * log_q - log_observe[static_cast<std::size_t>(i - 1)]);
    }
    sys.b_row.push_back(std::move(row));
  }
  return sys;
}

std::vector<double> initial_phi(const EmConfig& config, int W) {
  const auto w = static_cast<std::size_t>(W);
  if (const auto* d = std::get_if<DirichletUniform>(&config.init)) {
    Rng rng(d->seed);
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> phi(w);
    for (double& v : phi) v = expo(rng);
    normalize(phi);
    return phi;
  }
  if (std::holds_alternative<UniformInit>(config.init)) return std::vector<double>(w, 1.0 / W);
  const auto& custom = std::get<CustomInit>(config.init).phi;
  if (custom.size() != w) throw DataError("custom EM start has the wrong length");
  SetSizeDistribution check(custom);  // simplex validation
  return custom;
}

}  // namespace

double log_likelihood(const ObservedHistogram& hist, const std::vector<double>& phi) {
  const auto d = d_from_phi(phi, hist.p);
  CompensatedSum s;
  for (std::size_t j = 0; j < d.size(); ++j) {
    const long long c = hist.counts[j];
    if (c == 0) continue;
    if (!(d[j] > 0.0)) return -std::numeric_limits<double>::infinity();
    s.add(static_cast<double>(c) * std::log(d[j]));
  }
  return s.value();
}

EstimateResult em_estimate(const ObservedHistogram& hist, const EmConfig& config) {
  require_counts(hist);
  if (!(config.tol > 0.0)) throw DataError("EM tolerance must be > 0");
  if (config.max_iters < 1) throw DataError("EM max_iters must be >= 1");
  if (config.param_tol && !(*config.param_tol > 0.0)) throw DataError("EM parameter tolerance must be > 0");

  EstimateResult out;
  if (hist.p >= 1.0) {
    out.phi_hat = empirical(hist);
    out.theta_hat = out.phi_hat;
    out.log_likelihood = empirical_log_likelihood(hist);
    out.converged = true;
    return out;
  }

  const kernels::EmSystem sys = build_system(hist);
  const double n = static_cast<double>(hist.N);
  std::vector<double> phi = initial_phi(config, hist.W);
  std::vector<double> next(phi.size());
  bool floored_now = false;
  double previous = -std::numeric_limits<double>::infinity();

  int it = 0;
  for (; it < config.max_iters; ++it) {
    const kernels::EmStep step = kernels::em_step(config.exec, sys, phi, next);
    if (step.degenerate) {
      if (floored_now) throw DataError("EM: an observed size has zero probability under every reachable phi");
      for (double& v : phi) v = std::max(v, kPhiFloor);
      normalize(phi);
      out.floored = floored_now = true;
      previous = -std::numeric_limits<double>::infinity();
      continue;
    }
    floored_now = false;
    const double loglik = n * step.mean_loglik;
    if (config.record_trace) out.trace.push_back(loglik);
    assert(!(loglik < previous - 1e-9 * std::abs(previous)) && "EM log-likelihood decreased");
    bool settled = std::isfinite(previous) && std::abs(loglik - previous) <= config.tol * std::max(std::abs(previous), 1.0);
    if (settled && config.param_tol) {
      double moved = 0.0;
      for (std::size_t k = 0; k < phi.size(); ++k) moved = std::max(moved, std::abs(next[k] - phi[k]));
      settled = moved <= *config.param_tol;
    }
    if (settled) {
      out.converged = true;
      out.log_likelihood = loglik;
      break;
    }
    previous = loglik;
    phi.swap(next);
    normalize(phi);
  }
  out.iters = it;
  if (!out.converged) out.log_likelihood = log_likelihood(hist, phi);

  out.theta_hat = theta_from_phi({phi, hist.p}).theta();
  out.phi_hat = std::move(phi);
  return out;
}

std::vector<double> project_to_simplex(const std::vector<double>& v) {
  if (v.empty()) return {};
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double running = 0.0, shift = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    running += sorted[k];
    const double candidate = (running - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) shift = candidate;
  }
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = std::max(v[k] - shift, 0.0);
  normalize(out);
  return out;
}

EstimateResult inversion_estimate(const ObservedHistogram& hist) {
  require_counts(hist);
  if (hist.W > kInversionMaxW) {
    throw DataError("inversion: W = " + std::to_string(hist.W) + " exceeds the dense limit of " +
                    std::to_string(kInversionMaxW) + "; use EM");
  }
  const int W = hist.W;
  const auto w = static_cast<std::size_t>(W);
  const WideReal p(hist.p);
  const WideReal n(hist.N);

  std::vector<double> raw(w);
  for (int j = 1; j <= W; ++j) {
    WideReal acc = 0;
    for (int i = j; i <= W; ++i) {
      const long long c = hist.counts[static_cast<std::size_t>(i - 1)];
      if (c != 0) acc += b_inverse_entry_as<WideReal>(j, i, p) * WideReal(c);
    }
    raw[static_cast<std::size_t>(j - 1)] = static_cast<double>(acc / n);
  }

  EstimateResult out;
  out.phi_hat = project_to_simplex(raw);
  out.theta_hat = theta_from_phi({out.phi_hat, hist.p}).theta();
  out.log_likelihood = log_likelihood(hist, out.phi_hat);
  out.converged = true;

  const double log_q = std::log1p(-hist.p);
  std::vector<double> weights(w);
  for (std::size_t k = 0; k < w; ++k) {
    const double observe = hist.p >= 1.0 ? 1.0 : -std::expm1(static_cast<double>(k + 1) * log_q);
    weights[k] = raw[k] / observe;
  }
  const double eta = compensated_sum(weights);
  if (eta > 0.0) {
    for (double& v : weights) v /= eta;
    out.theta_raw = std::move(weights);
  }
  out.phi_raw = std::move(raw);
  return out;
}

double efficient_mean_phi(const ObservedHistogram& hist) {
  require_counts(hist);
  CompensatedSum total;
  for (std::size_t k = 0; k < hist.counts.size(); ++k) total.add(static_cast<double>(k + 1) * static_cast<double>(hist.counts[k]));
  const double n = static_cast<double>(hist.N);
  return total.value() / (n * hist.p) + (1.0 - 1.0 / hist.p) * static_cast<double>(hist.counts[0]) / n;
}

double plug_in_mean_theta(const EstimateResult& est) { return moment(est.theta_hat, 1); }

}  // namespace setsize
