#include "setsize/numeric.hpp"

#include <algorithm>
#include <memory>
#include <mutex>

namespace setsize {

double compensated_sum(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

SignedLog signed_log_sum(std::span<const SignedLog> terms, double cancel_eps) {
  double max_log = -std::numeric_limits<double>::infinity();
  for (const auto& t : terms) {
    if (t.sign != 0) max_log = std::max(max_log, t.log_abs);
  }
  if (max_log == -std::numeric_limits<double>::infinity()) return {};
  if (max_log == std::numeric_limits<double>::infinity()) {
    int sign = 0;
    for (const auto& t : terms) {
      if (t.sign != 0 && t.log_abs == max_log) sign += t.sign;
    }
    return {sign > 0 ? 1 : (sign < 0 ? -1 : 0), max_log};
  }
  CompensatedSum acc;
  for (const auto& t : terms) {
    if (t.sign != 0) acc.add(t.sign * std::exp(t.log_abs - max_log));
  }
  double scaled = acc.value();
  if (std::abs(scaled) <= cancel_eps) return {};
  return {scaled > 0 ? 1 : -1, max_log + std::log(std::abs(scaled))};
}

LogFactorialTable::LogFactorialTable(std::size_t size) : table_(std::max<std::size_t>(size, 2)) {
  table_[0] = 0.0;
  for (std::size_t n = 1; n < table_.size(); ++n) {
    table_[n] = std::lgamma(static_cast<double>(n) + 1.0);
  }
}

const LogFactorialTable& log_factorials(std::size_t n) {
  static std::mutex mu;
  static std::shared_ptr<const LogFactorialTable> current = std::make_shared<LogFactorialTable>(4096);
  // Tables are never freed so references handed out stay valid.
  static std::vector<std::shared_ptr<const LogFactorialTable>> retired;
  std::lock_guard<std::mutex> lock(mu);
  if (current->size() <= n) {
    retired.push_back(current);
    current = std::make_shared<LogFactorialTable>(std::max(2 * n, current->size() * 2));
  }
  return *current;
}

}  // namespace setsize
