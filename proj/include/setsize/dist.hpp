#pragma once

// Original set-size distribution (theta), the size distribution of observed
// sets (phi), and the maps between them. Sizes are 1-based throughout:
// element k of a vector holds the probability of size k+1.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace setsize {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kSimplexTol = 1e-12;

struct FasterThanExponential {};
struct Exponential {
  double rate;  // a in (0, 1)
};
struct SlowerThanExponential {};

using TailClass = std::variant<FasterThanExponential, Exponential, SlowerThanExponential>;

std::string tail_name(const TailClass& tail);

/// Probability of size i for i = 1..W.
class SetSizeDistribution {
 public:
  /// Validates and stores theta as given (must already be on the simplex).
  explicit SetSizeDistribution(std::vector<double> theta, std::optional<TailClass> tail = std::nullopt);

  /// Normalizes nonnegative weights.
  static SetSizeDistribution from_weights(std::vector<double> weights, std::optional<TailClass> tail = std::nullopt);

  int W() const { return static_cast<int>(theta_.size()); }
  const std::vector<double>& theta() const { return theta_; }
  /// 1-based access.
  double operator[](int size) const { return theta_[static_cast<std::size_t>(size - 1)]; }

  /// Tail class carried by analytic constructors; empty for empirical data.
  const std::optional<TailClass>& known_tail() const { return tail_; }

 private:
  std::vector<double> theta_;
  std::optional<TailClass> tail_;
};

struct ObservedSetDistribution {
  std::vector<double> phi;
  double p;

  int W() const { return static_cast<int>(phi.size()); }
};

SetSizeDistribution truncate_at(const std::map<long long, double>& raw_counts, int W);

ObservedSetDistribution phi_from_theta(const SetSizeDistribution& theta, double p);
SetSizeDistribution theta_from_phi(const ObservedSetDistribution& phi);

/// sum_i i^r theta_i
double moment(const SetSizeDistribution& theta, int r);
double moment(const std::vector<double>& probs, int r);

// Analytic families; each tags its own tail class.
SetSizeDistribution geometric(double a, int W);
SetSizeDistribution zipf(double beta, int W);
/// theta_j proportional to exp(-(j/scale)^2).
SetSizeDistribution gauss_tail(double scale, int W);

enum class Truncation { Renormalize, FoldTail };

/// A family on the infinite support {1, 2, ...} that can be cut at any W,
/// either by renormalizing over 1..W or by folding the mass beyond W into W.
struct TailFamily {
  enum class Kind { Geometric, Zipf, GaussTail };
  Kind kind;
  double param;

  SetSizeDistribution at(int W, Truncation mode = Truncation::FoldTail) const;
  TailClass tail() const;
};

struct TailFit {
  TailClass tail;
  bool heuristic;  // false when taken from an analytic constructor
  double slope = 0.0;
  double curvature = 0.0;
};

struct TailFitOptions {
  /// Fit window [first, last], 1-based. Defaults to the top half of the support.
  std::optional<int> first;
  std::optional<int> last;
  /// |curvature| * L / |slope| below this is treated as exponential.
  double straightness_tol = 0.05;
};

TailFit classify_tail(const SetSizeDistribution& theta, const TailFitOptions& options = {});

}  // namespace setsize
