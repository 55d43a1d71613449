#include "setsize/kernels.hpp"

#include <cmath>
#include <limits>

namespace setsize::kernels {

namespace {

double observed_mass(const EmSystem& sys, std::size_t r, std::span<const double> phi) {
  const auto& row = sys.b_row[r];
  const std::size_t offset = static_cast<std::size_t>(sys.rows[r] - 1);
  double d = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) d += row[k] * phi[offset + k];
  return d;
}

double responsibility(const EmSystem& sys, std::span<const double> ratio, std::size_t i) {
  // sum over observed rows j <= i+1 of ratio_r * b_{j, i+1}
  double acc = 0.0;
  for (std::size_t r = 0; r < sys.rows.size(); ++r) {
    const std::size_t offset = static_cast<std::size_t>(sys.rows[r] - 1);
    if (offset > i) break;  // rows are ascending
    acc += ratio[r] * sys.b_row[r][i - offset];
  }
  return acc;
}

EmStep finish(const EmSystem& sys, std::span<const double> mass, std::span<double> ratio) {
  EmStep step{0.0, false};
  for (std::size_t r = 0; r < mass.size(); ++r) {
    if (!(mass[r] > 0.0)) {
      step.degenerate = true;
      ratio[r] = 0.0;
      step.mean_loglik = -std::numeric_limits<double>::infinity();
      continue;
    }
    ratio[r] = sys.weights[r] / mass[r];
    step.mean_loglik += sys.weights[r] * std::log(mass[r]);
  }
  return step;
}

}  // namespace

namespace serial {

void jtheta_diag(const FisherContext& ctx, std::span<BoundValue> out) {
  for (int i = 1; i <= ctx.W(); ++i) out[static_cast<std::size_t>(i - 1)] = jtheta_entry(ctx, i);
}

EmStep em_step(const EmSystem& sys, std::span<const double> phi, std::span<double> next) {
  std::vector<double> mass(sys.rows.size()), ratio(sys.rows.size());
  for (std::size_t r = 0; r < mass.size(); ++r) mass[r] = observed_mass(sys, r, phi);
  EmStep step = finish(sys, mass, ratio);
  for (std::size_t i = 0; i < phi.size(); ++i) next[i] = phi[i] * responsibility(sys, ratio, i);
  return step;
}

}  // namespace serial

namespace parallel {

void jtheta_diag(const FisherContext& ctx, std::span<BoundValue> out) {
  const int W = ctx.W();
  // Cost of index i grows like i * (W - i); dynamic scheduling evens it out.
#pragma omp parallel for schedule(dynamic, 4)
  for (int i = 1; i <= W; ++i) out[static_cast<std::size_t>(i - 1)] = jtheta_entry(ctx, i);
}

EmStep em_step(const EmSystem& sys, std::span<const double> phi, std::span<double> next) {
  const long long rows = static_cast<long long>(sys.rows.size());
  const long long W = static_cast<long long>(phi.size());
  std::vector<double> mass(sys.rows.size()), ratio(sys.rows.size());
#pragma omp parallel for schedule(static)
  for (long long r = 0; r < rows; ++r) mass[static_cast<std::size_t>(r)] = observed_mass(sys, static_cast<std::size_t>(r), phi);
  EmStep step = finish(sys, mass, ratio);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < W; ++i) {
    next[static_cast<std::size_t>(i)] = phi[static_cast<std::size_t>(i)] * responsibility(sys, ratio, static_cast<std::size_t>(i));
  }
  return step;
}

}  // namespace parallel

}  // namespace setsize::kernels
