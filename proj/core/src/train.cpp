#include "squall/train.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "squall/error.hpp"

namespace squall {

namespace {

struct Draw {
  int t = 1;
  std::vector<double> noise;
};

/// One draw per sample, in batch order, identical across loss variants.
std::vector<Draw> make_draws(std::span<const ArraySample> batch,
                             const DiffusionSchedule& schedule, Rng& rng) {
  if (batch.empty()) throw DataError("loss needs a non-empty batch");
  std::vector<Draw> draws(batch.size());
  for (std::size_t s = 0; s < batch.size(); ++s) {
    draws[s].t = static_cast<int>(rng.uniform_int(1, schedule.steps()));
    draws[s].noise.resize(batch[s].target.size());
    rng.fill_normal(draws[s].noise);
  }
  return draws;
}

double mse(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    const double d = a[n] - b[n];
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

double loss_against(const DenoiseFn& f, std::span<const ArraySample> batch,
                    const DiffusionSchedule& schedule, Rng& rng,
                    bool against_noise) {
  const auto draws = make_draws(batch, schedule, rng);
  double total = 0.0;
  std::vector<double> out;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const ArraySample& sample = batch[s];
    const auto y_t =
        forward_sample(sample.target, draws[s].t, schedule, draws[s].noise);
    out.resize(sample.target.size());
    f(y_t, sample.condition, draws[s].t, sample.k, out);
    total += mse(out, against_noise ? std::span<const double>(draws[s].noise)
                                    : std::span<const double>(sample.target));
  }
  return total / static_cast<double>(batch.size());
}

}  // namespace

double x0_loss_fn(const DenoiseFn& f, std::span<const ArraySample> batch,
                  const DiffusionSchedule& schedule, Rng& rng) {
  return loss_against(f, batch, schedule, rng, false);
}

double eps_loss_fn(const DenoiseFn& f, std::span<const ArraySample> batch,
                   const DiffusionSchedule& schedule, Rng& rng) {
  return loss_against(f, batch, schedule, rng, true);
}

double x0_loss(const DenoiserParams& params,
               std::span<const ArraySample> batch,
               const DiffusionSchedule& schedule, Rng& rng) {
  const auto draws = make_draws(batch, schedule, rng);
  double total = 0.0;
  std::vector<double> out;
  DenoiserWorkspace ws;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const ArraySample& sample = batch[s];
    const auto y_t =
        forward_sample(sample.target, draws[s].t, schedule, draws[s].noise);
    out.resize(sample.target.size());
    denoise(params, y_t, sample.condition, draws[s].t, sample.k, sample.nlat,
            sample.nlon, out, &ws);
    total += mse(out, sample.target);
  }
  return total / static_cast<double>(batch.size());
}

double eps_loss(const DenoiserParams& params,
                std::span<const ArraySample> batch,
                const DiffusionSchedule& schedule, Rng& rng) {
  const auto draws = make_draws(batch, schedule, rng);
  double total = 0.0;
  std::vector<double> out;
  DenoiserWorkspace ws;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const ArraySample& sample = batch[s];
    const auto y_t =
        forward_sample(sample.target, draws[s].t, schedule, draws[s].noise);
    out.resize(sample.target.size());
    denoise(params, y_t, sample.condition, draws[s].t, sample.k, sample.nlat,
            sample.nlon, out, &ws);
    total += mse(out, draws[s].noise);
  }
  return total / static_cast<double>(batch.size());
}

double x0_loss_grad(const DenoiserParams& params,
                    std::span<const ArraySample> batch,
                    const DiffusionSchedule& schedule, Rng& rng,
                    std::span<double> grad, int workers) {
  if (grad.size() != params.values.size())
    throw DataError("gradient vector has the wrong length");
  const auto draws = make_draws(batch, schedule, rng);
  const double batch_scale = 1.0 / static_cast<double>(batch.size());

  std::vector<double> losses(batch.size(), 0.0);
  std::vector<std::vector<double>> grads(batch.size());

  auto run_sample = [&](std::size_t s) {
    const ArraySample& sample = batch[s];
    const std::size_t n = sample.target.size();
    const auto y_t =
        forward_sample(sample.target, draws[s].t, schedule, draws[s].noise);
    std::vector<double> out(n);
    DenoiserWorkspace ws;
    denoise(params, y_t, sample.condition, draws[s].t, sample.k, sample.nlat,
            sample.nlon, out, &ws);

    std::vector<double> dout(n);
    double sum = 0.0;
    const double scale = 2.0 * batch_scale / static_cast<double>(n);
    for (std::size_t e = 0; e < n; ++e) {
      const double r = out[e] - sample.target[e];
      sum += r * r;
      dout[e] = scale * r;
    }
    losses[s] = sum / static_cast<double>(n);

    grads[s].assign(params.values.size(), 0.0);
    denoise_backward(params, ws, dout, grads[s]);
  };

  if (workers <= 1 || batch.size() == 1) {
    for (std::size_t s = 0; s < batch.size(); ++s) run_sample(s);
  } else {
    const std::size_t n_threads =
        std::min<std::size_t>(workers, batch.size());
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t w = 0; w < n_threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t s = w; s < batch.size(); s += n_threads)
          run_sample(s);
      });
    }
    for (auto& t : pool) t.join();
  }

  std::fill(grad.begin(), grad.end(), 0.0);
  double total = 0.0;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    total += losses[s];
    for (std::size_t p = 0; p < grad.size(); ++p) grad[p] += grads[s][p];
  }
  return total * batch_scale;
}

GradCheckResult grad_check(const DenoiserParams& params,
                           std::span<const ArraySample> batch,
                           const DiffusionSchedule& schedule,
                           std::uint64_t seed, int count, double step) {
  std::vector<double> analytic(params.values.size());
  {
    Rng rng(seed);
    x0_loss_grad(params, batch, schedule, rng, analytic);
  }

  GradCheckResult result;
  {
    Rng rng(seed);
    result.loss = x0_loss(params, batch, schedule, rng);
  }

  const std::size_t total = params.values.size();
  std::vector<std::size_t> picks;
  if (static_cast<std::size_t>(count) >= total) {
    picks.resize(total);
    for (std::size_t p = 0; p < total; ++p) picks[p] = p;
  } else {
    Rng pick_rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> all(total);
    for (std::size_t p = 0; p < total; ++p) all[p] = p;
    for (int n = 0; n < count; ++n) {
      const std::size_t swap_with =
          n + static_cast<std::size_t>(pick_rng.bounded(total - n));
      std::swap(all[n], all[swap_with]);
      picks.push_back(all[n]);
    }
  }

  DenoiserParams probe = params;
  for (std::size_t index : picks) {
    const double saved = probe.values[index];
    probe.values[index] = saved + step;
    Rng rng_hi(seed);
    const double hi = x0_loss(probe, batch, schedule, rng_hi);
    probe.values[index] = saved - step;
    Rng rng_lo(seed);
    const double lo = x0_loss(probe, batch, schedule, rng_lo);
    probe.values[index] = saved;

    const double numeric = (hi - lo) / (2.0 * step);
    const double a = analytic[index];
    const double rel = std::abs(a - numeric) /
                       std::max({std::abs(a), std::abs(numeric), 1e-8});
    result.max_rel_error = std::max(result.max_rel_error, rel);
    ++result.params_checked;
  }
  return result;
}

void TrainConfig::validate() const {
  if (iterations < 0 || batch_size < 1 || lr < 0.0 || beta1 < 0.0 ||
      beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0 || weight_decay < 0.0 ||
      adam_eps <= 0.0 || workers < 1)
    throw DataError("training config out of range");
}

TrainResult train(std::span<const ArraySample> dataset,
                  const DenoiserConfig& model_config,
                  const DiffusionSchedule& schedule, const TrainConfig& cfg) {
  cfg.validate();
  if (dataset.empty()) throw DataError("training needs a non-empty dataset");
  for (const ArraySample& s : dataset) {
    if (s.nlat < 1 || s.nlon < 1 ||
        s.target.size() != static_cast<std::size_t>(model_config.out_channels) *
                               s.nlat * s.nlon ||
        s.condition.size() !=
            static_cast<std::size_t>(model_config.in_channels) * s.nlat *
                s.nlon)
      throw DataError("training sample shape does not match the model");
  }

  TrainResult result;
  result.params = seeded_params(model_config, cfg.seed);
  Rng rng(cfg.seed ^ 0xd1b54a32d192ed03ULL);

  const std::size_t n_params = result.params.values.size();
  std::vector<double> grad(n_params);
  std::vector<double> m(n_params, 0.0), v(n_params, 0.0);
  std::vector<ArraySample> picked(cfg.batch_size);

  result.loss_history.reserve(cfg.iterations);
  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    for (int b = 0; b < cfg.batch_size; ++b)
      picked[b] = dataset[rng.bounded(dataset.size())];

    const double loss =
        x0_loss_grad(result.params, picked, schedule, rng, grad, cfg.workers);
    result.loss_history.push_back(loss);
    if (!std::isfinite(loss)) {
      result.diverged = true;
      break;
    }

    const double bc1 = 1.0 - std::pow(cfg.beta1, iter);
    const double bc2 = 1.0 - std::pow(cfg.beta2, iter);
    auto& theta = result.params.values;
    for (std::size_t p = 0; p < n_params; ++p) {
      m[p] = cfg.beta1 * m[p] + (1.0 - cfg.beta1) * grad[p];
      v[p] = cfg.beta2 * v[p] + (1.0 - cfg.beta2) * grad[p] * grad[p];
      const double mhat = m[p] / bc1;
      const double vhat = v[p] / bc2;
      theta[p] -= cfg.lr * (mhat / (std::sqrt(vhat) + cfg.adam_eps) +
                            cfg.weight_decay * theta[p]);
    }
  }
  return result;
}

}  // namespace squall
