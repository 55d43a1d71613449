#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace setsize {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_sum(std::span<const double> xs);

/// Streaming log-sum-exp over positive terms given by their natural logs.
/// An empty accumulator represents zero (log = -inf).
class LogSumExp {
 public:
  void add(double log_term) {
    if (log_term == -std::numeric_limits<double>::infinity()) return;
    if (log_term <= max_) {
      acc_ += std::exp(log_term - max_);
    } else {
      acc_ = acc_ * std::exp(max_ - log_term) + 1.0;
      max_ = log_term;
    }
  }
  double log_value() const {
    if (acc_ == 0.0) return -std::numeric_limits<double>::infinity();
    return max_ + std::log(acc_);
  }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double acc_ = 0.0;
};

/// A signed quantity held as (sign, log|x|) so that sums of terms far outside
/// double range can still be combined.
struct SignedLog {
  int sign = 0;  // -1, 0, +1
  double log_abs = -std::numeric_limits<double>::infinity();

  static SignedLog from_log(double log_abs, int sign = 1) { return {log_abs == -std::numeric_limits<double>::infinity() ? 0 : sign, log_abs}; }
  static SignedLog from_value(double x) {
    if (x == 0.0) return {};
    return {x > 0 ? 1 : -1, std::log(std::abs(x))};
  }
};

/// Sum of signed log-domain terms. Returns the result as SignedLog. When the
/// result is tiny relative to the largest term (below `cancel_eps`), it is
/// reported as exact zero.
SignedLog signed_log_sum(std::span<const SignedLog> terms, double cancel_eps = 64 * std::numeric_limits<double>::epsilon());

/// Converts a log-domain value to double, overflowing to +inf.
inline double exp_or_inf(double log_value) {
  if (log_value > std::log(std::numeric_limits<double>::max())) return std::numeric_limits<double>::infinity();
  return std::exp(log_value);
}

/// Table of log(n!) for n in [0, size).
class LogFactorialTable {
 public:
  explicit LogFactorialTable(std::size_t size);
  double log_factorial(std::size_t n) const { return table_[n]; }
  double log_binomial(std::size_t n, std::size_t k) const {
    return table_[n] - table_[k] - table_[n - k];
  }
  /// log of the falling factorial n (n-1) ... (n-k+1).
  double log_falling(std::size_t n, std::size_t k) const { return table_[n] - table_[n - k]; }
  std::size_t size() const { return table_.size(); }

 private:
  std::vector<double> table_;
};

/// Shared table large enough for `n`; grows on demand (thread-safe).
const LogFactorialTable& log_factorials(std::size_t n);

/// Exact binomial coefficient in type T via the multiplicative formula.
template <class T>
T binomial_as(int n, int k) {
  if (k < 0 || k > n) return T(0);
  if (k > n - k) k = n - k;
  T result(1);
  for (int t = 1; t <= k; ++t) {
    result *= T(n - k + t);
    result /= T(t);
  }
  return result;
}

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for replicate stream `index` under base seed `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

}  // namespace setsize
