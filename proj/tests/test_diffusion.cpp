#include <doctest.h>

#include <cmath>
#include <vector>

#include "squall/diffusion.hpp"
#include "squall/error.hpp"
#include "squall/rng.hpp"

using namespace squall;

TEST_CASE("schedules derive alpha products from betas") {
  const DiffusionSchedule one = schedule_from_betas({0.5});
  CHECK(one.steps() == 1);
  CHECK(one.alpha[0] == 0.5);
  CHECK(one.alpha_bar[0] == 0.5);
  CHECK(one.alpha_bar_at(0) == 1.0);
  CHECK(one.alpha_bar_at(1) == 0.5);

  const DiffusionSchedule s = schedule_from_betas({0.1, 0.2, 0.25});
  CHECK(s.alpha_bar[0] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(s.alpha_bar[1] == doctest::Approx(0.9 * 0.8).epsilon(1e-15));
  CHECK(s.alpha_bar[2] == doctest::Approx(0.9 * 0.8 * 0.75).epsilon(1e-15));
  for (int t = 1; t <= 3; ++t)
    CHECK(s.alpha_bar_at(t) ==
          doctest::Approx(s.alpha_bar_at(t - 1) * s.alpha[t - 1])
              .epsilon(1e-15));
}

TEST_CASE("the linear schedule spans the requested beta range") {
  const DiffusionSchedule s = linear_schedule(1000);
  CHECK(s.steps() == 1000);
  CHECK(s.beta.front() == 1e-4);
  CHECK(s.beta.back() == doctest::Approx(0.02).epsilon(1e-15));
  for (int t = 1; t < 1000; ++t) {
    CHECK(s.beta[t] >= s.beta[t - 1]);
    CHECK(s.alpha_bar[t] < s.alpha_bar[t - 1]);
  }
  // The terminal state is almost pure noise.
  CHECK(s.alpha_bar.back() < 1e-4);
  CHECK(s.alpha_bar.back() > 0.0);

  const DiffusionSchedule single = linear_schedule(1, 0.3, 0.7);
  CHECK(single.steps() == 1);
  CHECK(single.beta[0] == 0.3);
}

TEST_CASE("schedule validation rejects malformed betas") {
  CHECK_THROWS_WITH_AS(schedule_from_betas({}),
                       "schedule needs at least one step", DataError);
  CHECK_THROWS_WITH_AS(schedule_from_betas({0.0}),
                       "schedule betas must be non-decreasing in (0, 1)",
                       DataError);
  CHECK_THROWS_WITH_AS(schedule_from_betas({1.0}),
                       "schedule betas must be non-decreasing in (0, 1)",
                       DataError);
  CHECK_THROWS_WITH_AS(schedule_from_betas({0.2, 0.1}),
                       "schedule betas must be non-decreasing in (0, 1)",
                       DataError);
  CHECK_THROWS_WITH_AS(linear_schedule(0),
                       "schedule needs at least one step", DataError);
  CHECK_THROWS_WITH_AS(linear_schedule(10, 0.2, 0.1),
                       "schedule needs 0 < beta_start <= beta_end < 1",
                       DataError);
  CHECK_THROWS_WITH_AS(linear_schedule(10, 0.0, 0.1),
                       "schedule needs 0 < beta_start <= beta_end < 1",
                       DataError);

  const DiffusionSchedule s = linear_schedule(10);
  CHECK_THROWS_WITH_AS(s.require_step(0), "diffusion step 0 outside 1..10",
                       DataError);
  CHECK_THROWS_WITH_AS(s.require_step(11), "diffusion step 11 outside 1..10",
                       DataError);
  CHECK_THROWS_WITH_AS(s.alpha_bar_at(-1), "diffusion step -1 outside 1..10",
                       DataError);
  CHECK_NOTHROW(s.require_step(1));
  CHECK_NOTHROW(s.require_step(10));
}

TEST_CASE("forward formulas match hand arithmetic") {
  const DiffusionSchedule s = schedule_from_betas({0.04, 0.09});
  const std::vector<double> x{2.0, -1.0};
  const std::vector<double> eps{0.5, 1.0};

  const auto stepped = forward_step(x, 2, s, eps);
  CHECK(stepped[0] ==
        doctest::Approx(std::sqrt(0.91) * 2.0 + 0.3 * 0.5).epsilon(1e-15));
  CHECK(stepped[1] ==
        doctest::Approx(std::sqrt(0.91) * -1.0 + 0.3 * 1.0).epsilon(1e-15));

  const double abar2 = 0.96 * 0.91;
  const auto jumped = forward_sample(x, 2, s, eps);
  CHECK(jumped[0] == doctest::Approx(std::sqrt(abar2) * 2.0 +
                                     std::sqrt(1.0 - abar2) * 0.5)
                         .epsilon(1e-15));

  CHECK_THROWS_WITH_AS(forward_step(x, 1, s, std::vector<double>{1.0}),
                       "forward step: array sizes differ", DataError);
  CHECK_THROWS_WITH_AS(forward_sample(x, 3, s, eps),
                       "diffusion step 3 outside 1..2", DataError);
}

TEST_CASE("composing single steps agrees with the closed-form jump") {
  const DiffusionSchedule s = linear_schedule(40, 1e-3, 0.05);
  Rng rng(99);
  const int n = 256;
  std::vector<double> x0(n);
  for (double& v : x0) v = rng.normal();

  // With zero noise the composition is exact: only the sqrt(alpha) factors
  // accumulate.
  const std::vector<double> quiet(n, 0.0);
  std::vector<double> composed = x0;
  for (int t = 1; t <= 40; ++t)
    composed = forward_step(composed, t, s, quiet);
  const auto jumped = forward_sample(x0, 40, s, quiet);
  for (int k = 0; k < n; ++k)
    CHECK(composed[k] == doctest::Approx(jumped[k]).epsilon(1e-12));
}

TEST_CASE("posterior coefficients reproduce their defining ratios") {
  const DiffusionSchedule s = linear_schedule(25, 5e-4, 0.03);
  for (int t = 1; t <= 25; ++t) {
    const auto c = posterior_coefficients(t, s);
    const double beta = s.beta[t - 1];
    const double abar = s.alpha_bar_at(t);
    const double abar_prev = s.alpha_bar_at(t - 1);
    CHECK(c.mean_x0 == doctest::Approx(std::sqrt(abar_prev) * beta /
                                       (1.0 - abar))
                           .epsilon(1e-12));
    CHECK(c.mean_yt == doctest::Approx(std::sqrt(1.0 - beta) *
                                       (1.0 - abar_prev) / (1.0 - abar))
                           .epsilon(1e-12));
    CHECK(c.variance == doctest::Approx(beta * (1.0 - abar_prev) /
                                        (1.0 - abar))
                            .epsilon(1e-12));
    CHECK(c.variance >= 0.0);
    CHECK(c.variance <= beta + 1e-15);
    // The mean weights reconstruct a convex-like identity: applied to
    // y_t = sqrt(abar) x0 they return sqrt(abar_prev) x0.
    CHECK(c.mean_x0 + c.mean_yt * std::sqrt(abar) ==
          doctest::Approx(std::sqrt(abar_prev)).epsilon(1e-12));
  }
}

TEST_CASE("the final reverse step is deterministic") {
  const std::vector<double> y{0.4, -2.0, 7.5};
  const std::vector<double> x0{1.0, 2.0, 3.0};
  const std::vector<double> loud{100.0, -100.0, 100.0};

  // beta = 0.5 keeps every coefficient exact in floating point.
  const DiffusionSchedule s = schedule_from_betas({0.5, 0.6});
  const auto c1 = posterior_coefficients(1, s);
  CHECK(c1.variance == 0.0);
  CHECK(c1.mean_yt == 0.0);
  CHECK(c1.mean_x0 == 1.0);
  const auto out = posterior_step(y, x0, 1, s, loud);
  for (int k = 0; k < 3; ++k) CHECK(out[k] == x0[k]);

  const DiffusionSchedule lin = linear_schedule(12);
  const auto cl = posterior_coefficients(1, lin);
  CHECK(cl.variance == 0.0);
  CHECK(cl.mean_yt == 0.0);
  CHECK(cl.mean_x0 == doctest::Approx(1.0).epsilon(1e-12));
  const auto out_lin = posterior_step(y, x0, 1, lin, loud);
  for (int k = 0; k < 3; ++k)
    CHECK(out_lin[k] == doctest::Approx(x0[k]).epsilon(1e-12));
}

TEST_CASE("posterior steps mix the estimate and the state") {
  const DiffusionSchedule s = schedule_from_betas({0.04, 0.09});
  const std::vector<double> y{1.0, -1.0};
  const std::vector<double> x0{0.5, 0.25};
  const std::vector<double> eps{1.0, 2.0};
  const auto c = posterior_coefficients(2, s);
  const auto out = posterior_step(y, x0, 2, s, eps);
  for (int k = 0; k < 2; ++k)
    CHECK(out[k] == doctest::Approx(c.mean_x0 * x0[k] + c.mean_yt * y[k] +
                                    std::sqrt(c.variance) * eps[k])
                        .epsilon(1e-15));

  CHECK_THROWS_WITH_AS(
      posterior_step(y, std::vector<double>{1.0}, 2, s, eps),
      "posterior step: array sizes differ", DataError);
}
