#include "setsize/sampling.hpp"

#include <cmath>
#include <numeric>

#include "setsize/numeric.hpp"

namespace setsize {

void ObservedHistogram::validate() const {
  if (W < 1 || counts.size() != static_cast<std::size_t>(W)) throw DataError("histogram: counts must have W entries");
  if (!(p > 0.0 && p <= 1.0)) throw DataError("histogram: p must lie in (0, 1]");
  long long total = 0;
  for (long long c : counts) {
    if (c < 0) throw DataError("histogram: negative count");
    total += c;
  }
  if (total != N) throw DataError("histogram: counts do not sum to N");
  if (N > m_drawn) throw DataError("histogram: N exceeds m_drawn");
}

int thin_size(int i, double p, Rng& rng) {
  if (p >= 1.0) return i;
  std::binomial_distribution<int> binom(i, p);
  return binom(rng);
}

ObservedHistogram simulate(const SetSizeDistribution& theta, const SamplingConfig& config) {
  const double p = config.p;
  if (!(p > 0.0 && p <= 1.0)) throw DataError("sampling probability must lie in (0, 1]");
  if (p * moment(theta, 1) < 1e-12) throw DataError("effectively unobservable: p * E[S] < 1e-12");

  ObservedHistogram hist;
  hist.W = theta.W();
  hist.p = p;
  hist.counts.assign(static_cast<std::size_t>(hist.W), 0);

  Rng rng(config.seed);
  std::discrete_distribution<int> draw_size(theta.theta().begin(), theta.theta().end());
  auto step = [&] {
    int size = draw_size(rng) + 1;
    int kept = thin_size(size, p, rng);
    ++hist.m_drawn;
    if (kept > 0) {
      ++hist.counts[static_cast<std::size_t>(kept - 1)];
      ++hist.N;
    }
  };

  if (const auto* fixed = std::get_if<FixedPopulation>(&config.mode)) {
    if (fixed->m < 1) throw DataError("population size m must be >= 1");
    for (long long k = 0; k < fixed->m; ++k) step();
  } else {
    const auto& observed = std::get<FixedObserved>(config.mode);
    if (observed.n < 1) throw DataError("observed-set count N must be >= 1");
    while (hist.N < observed.n) step();
  }
  return hist;
}

std::vector<int> observed_sizes(const ObservedHistogram& hist) {
  std::vector<int> sizes;
  sizes.reserve(static_cast<std::size_t>(hist.N));
  for (int j = 1; j <= hist.W; ++j) {
    sizes.insert(sizes.end(), static_cast<std::size_t>(hist.counts[static_cast<std::size_t>(j - 1)]), j);
  }
  return sizes;
}

}  // namespace setsize
