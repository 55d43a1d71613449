#pragma once

// Hot loops, each in a serial reference form and an OpenMP form. Both forms
// run the same per-element inner loop in the same order, so their outputs are
// bitwise identical; tests hold them to that and bench/ compares their speed.

#include <cstddef>
#include <exception>
#include <span>
#include <vector>

#include "setsize/fisher.hpp"

namespace setsize::kernels {

/// Observed rows of B(p) restricted to the sizes that actually occur.
struct EmSystem {
  int W = 0;
  std::vector<int> rows;                   // observed sizes j (1-based)
  std::vector<double> weights;             // n_j / N
  std::vector<std::vector<double>> b_row;  // b_row[r][i - j] = b_{j,i}, i = j..W
};

struct EmStep {
  double mean_loglik;  // sum_r w_r log d_r at the input phi
  bool degenerate;     // some observed d_r was zero
};

namespace serial {
void jtheta_diag(const FisherContext& ctx, std::span<BoundValue> out);
EmStep em_step(const EmSystem& sys, std::span<const double> phi, std::span<double> next);
}  // namespace serial

namespace parallel {
void jtheta_diag(const FisherContext& ctx, std::span<BoundValue> out);
EmStep em_step(const EmSystem& sys, std::span<const double> phi, std::span<double> next);
}  // namespace parallel

inline EmStep em_step(Exec exec, const EmSystem& sys, std::span<const double> phi, std::span<double> next) {
  return exec == Exec::Parallel ? parallel::em_step(sys, phi, next) : serial::em_step(sys, phi, next);
}

/// Runs fn(k) for k in [0, n). Exceptions are collected and the first one
/// (lowest k) rethrown after all tasks finish.
template <class Fn>
void for_each_task(std::size_t n, Exec exec, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  const long long count = static_cast<long long>(n);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long long k = 0; k < count; ++k) {
      try {
        fn(static_cast<std::size_t>(k));
      } catch (...) {
        errors[static_cast<std::size_t>(k)] = std::current_exception();
      }
    }
  } else {
    for (long long k = 0; k < count; ++k) {
      try {
        fn(static_cast<std::size_t>(k));
      } catch (...) {
        errors[static_cast<std::size_t>(k)] = std::current_exception();
      }
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace setsize::kernels
