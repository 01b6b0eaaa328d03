#pragma once

#include <span>
#include <vector>

namespace squall {

/// Variance schedule and its derived products. Index convention: beta[t-1]
/// holds the step-t variance for t in 1..T; alpha_bar_at(0) is 1.
struct DiffusionSchedule {
  std::vector<double> beta;
  std::vector<double> alpha;      // 1 - beta
  std::vector<double> alpha_bar;  // running product of alpha

  int steps() const { return static_cast<int>(beta.size()); }
  double alpha_bar_at(int t) const;  // t in 0..T
  void require_step(int t) const;    // throws unless t in 1..T
};

DiffusionSchedule linear_schedule(int steps, double beta_start = 1e-4,
                                  double beta_end = 0.02);

/// Derives alpha and alpha_bar from an explicit beta sequence, which must
/// be non-decreasing within (0, 1).
DiffusionSchedule schedule_from_betas(std::vector<double> beta);

/// One forward noising step: sqrt(1-beta_t) x_prev + sqrt(beta_t) noise.
std::vector<double> forward_step(std::span<const double> x_prev, int t,
                                 const DiffusionSchedule& schedule,
                                 std::span<const double> noise);

/// Closed-form jump to step t: sqrt(abar_t) x0 + sqrt(1-abar_t) noise.
std::vector<double> forward_sample(std::span<const double> x0, int t,
                                   const DiffusionSchedule& schedule,
                                   std::span<const double> noise);

struct PosteriorCoefficients {
  double mean_x0 = 0.0;   // weight on the denoised estimate
  double mean_yt = 0.0;   // weight on the current state
  double variance = 0.0;
};

PosteriorCoefficients posterior_coefficients(int t,
                                             const DiffusionSchedule& schedule);

/// Reverse-step draw: posterior mean plus sqrt(variance) * noise. At t=1 the
/// variance vanishes and the result is exactly the denoised estimate.
std::vector<double> posterior_step(std::span<const double> y_t,
                                   std::span<const double> x0_hat, int t,
                                   const DiffusionSchedule& schedule,
                                   std::span<const double> noise);

}  // namespace squall
