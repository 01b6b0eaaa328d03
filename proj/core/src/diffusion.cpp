#include "squall/diffusion.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "squall/error.hpp"

namespace squall {

namespace {

void require_same_size(std::span<const double> a, std::span<const double> b,
                       const char* what) {
  if (a.size() != b.size())
    throw DataError(std::string(what) + ": array sizes differ");
}

}  // namespace

double DiffusionSchedule::alpha_bar_at(int t) const {
  if (t == 0) return 1.0;
  require_step(t);
  return alpha_bar[t - 1];
}

void DiffusionSchedule::require_step(int t) const {
  if (t < 1 || t > steps())
    throw DataError("diffusion step " + std::to_string(t) +
                    " outside 1.." + std::to_string(steps()));
}

DiffusionSchedule schedule_from_betas(std::vector<double> beta) {
  if (beta.empty()) throw DataError("schedule needs at least one step");
  DiffusionSchedule s;
  s.alpha.resize(beta.size());
  s.alpha_bar.resize(beta.size());
  double product = 1.0;
  for (std::size_t t = 0; t < beta.size(); ++t) {
    if (!(beta[t] > 0.0) || !(beta[t] < 1.0) ||
        (t > 0 && beta[t] < beta[t - 1]))
      throw DataError("schedule betas must be non-decreasing in (0, 1)");
    s.alpha[t] = 1.0 - beta[t];
    product *= s.alpha[t];
    s.alpha_bar[t] = product;
  }
  s.beta = std::move(beta);
  return s;
}

DiffusionSchedule linear_schedule(int steps, double beta_start,
                                  double beta_end) {
  if (steps < 1) throw DataError("schedule needs at least one step");
  if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0))
    throw DataError("schedule needs 0 < beta_start <= beta_end < 1");

  std::vector<double> beta(steps);
  for (int t = 0; t < steps; ++t) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(t) / (steps - 1);
    beta[t] = beta_start + (beta_end - beta_start) * frac;
  }
  return schedule_from_betas(std::move(beta));
}

std::vector<double> forward_step(std::span<const double> x_prev, int t,
                                 const DiffusionSchedule& schedule,
                                 std::span<const double> noise) {
  schedule.require_step(t);
  require_same_size(x_prev, noise, "forward step");
  const double keep = std::sqrt(1.0 - schedule.beta[t - 1]);
  const double mix = std::sqrt(schedule.beta[t - 1]);
  std::vector<double> out(x_prev.size());
  for (std::size_t n = 0; n < out.size(); ++n)
    out[n] = keep * x_prev[n] + mix * noise[n];
  return out;
}

std::vector<double> forward_sample(std::span<const double> x0, int t,
                                   const DiffusionSchedule& schedule,
                                   std::span<const double> noise) {
  schedule.require_step(t);
  require_same_size(x0, noise, "forward sample");
  const double abar = schedule.alpha_bar[t - 1];
  const double keep = std::sqrt(abar);
  const double mix = std::sqrt(1.0 - abar);
  std::vector<double> out(x0.size());
  for (std::size_t n = 0; n < out.size(); ++n)
    out[n] = keep * x0[n] + mix * noise[n];
  return out;
}

PosteriorCoefficients posterior_coefficients(
    int t, const DiffusionSchedule& schedule) {
  schedule.require_step(t);
  const double beta = schedule.beta[t - 1];
  const double alpha = schedule.alpha[t - 1];
  const double abar = schedule.alpha_bar[t - 1];
  const double abar_prev = schedule.alpha_bar_at(t - 1);

  PosteriorCoefficients c;
  c.mean_x0 = std::sqrt(abar_prev) * beta / (1.0 - abar);
  c.mean_yt = std::sqrt(alpha) * (1.0 - abar_prev) / (1.0 - abar);
  c.variance = beta * (1.0 - abar_prev) / (1.0 - abar);
  return c;
}

std::vector<double> posterior_step(std::span<const double> y_t,
                                   std::span<const double> x0_hat, int t,
                                   const DiffusionSchedule& schedule,
                                   std::span<const double> noise) {
  require_same_size(y_t, x0_hat, "posterior step");
  require_same_size(y_t, noise, "posterior step");
  const PosteriorCoefficients c = posterior_coefficients(t, schedule);
  const double spread = std::sqrt(c.variance);
  std::vector<double> out(y_t.size());
  for (std::size_t n = 0; n < out.size(); ++n)
    out[n] = c.mean_x0 * x0_hat[n] + c.mean_yt * y_t[n] + spread * noise[n];
  return out;
}

}  // namespace squall
