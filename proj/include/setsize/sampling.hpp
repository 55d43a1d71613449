#pragma once

// Bernoulli thinning of sets drawn from theta. Only sets that keep at least
// one element are reported; dropped sets are counted in m_drawn and nothing
// else.

#include <cstdint>
#include <random>
#include <variant>
#include <vector>

#include "setsize/dist.hpp"

namespace setsize {

/// Streams are std::mt19937_64; replicate streams are seeded with
/// derive_seed(base_seed, replicate_index).
using Rng = std::mt19937_64;

struct FixedPopulation {
  long long m;  // sets drawn
};
struct FixedObserved {
  long long n;  // observed sets wanted
};

struct SamplingConfig {
  double p;
  std::variant<FixedPopulation, FixedObserved> mode;
  std::uint64_t seed = 0;
};

struct ObservedHistogram {
  int W = 0;
  std::vector<long long> counts;  // counts[j-1] = sets with j sampled elements
  double p = 1.0;
  long long N = 0;
  long long m_drawn = 0;

  void validate() const;
};

/// Binomial(i, p) retained-element count.
int thin_size(int i, double p, Rng& rng);

ObservedHistogram simulate(const SetSizeDistribution& theta, const SamplingConfig& config);

/// Expands a histogram into its list of observed sizes (ascending).
std::vector<int> observed_sizes(const ObservedHistogram& hist);

}  // namespace setsize
