#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "squall/denoiser.hpp"
#include "squall/diffusion.hpp"
#include "squall/rng.hpp"

namespace squall {

/// One standardized training pair as flat channel-major arrays.
struct ArraySample {
  std::vector<double> condition;  // [in_channels][nlat*nlon]
  std::vector<double> target;     // [out_channels][nlat*nlon]
  int k = 1;                      // lead step
  int nlat = 0;
  int nlon = 0;
};

/// Any denoiser-shaped map, so losses can be exercised against stubs.
using DenoiseFn =
    std::function<void(std::span<const double> y_t,
                       std::span<const double> condition, int t, int k,
                       std::span<double> out)>;

/// Draws t ~ U[1,T] and one noise field per sample (in batch order), noises
/// the target with the closed-form forward law, and returns the per-element
/// mean squared error of f's output against the clean target, averaged over
/// the batch.
double x0_loss_fn(const DenoiseFn& f, std::span<const ArraySample> batch,
                  const DiffusionSchedule& schedule, Rng& rng);

/// Same draws, with f judged against the injected noise instead.
double eps_loss_fn(const DenoiseFn& f, std::span<const ArraySample> batch,
                   const DiffusionSchedule& schedule, Rng& rng);

double x0_loss(const DenoiserParams& params,
               std::span<const ArraySample> batch,
               const DiffusionSchedule& schedule, Rng& rng);
double eps_loss(const DenoiserParams& params,
                std::span<const ArraySample> batch,
                const DiffusionSchedule& schedule, Rng& rng);

/// x0 loss plus its parameter gradient (written, not accumulated). The
/// random draws match x0_loss exactly, so freezing the generator freezes
/// the loss surface. Batch entries may be processed in parallel; the
/// reduction order is fixed by batch position.
double x0_loss_grad(const DenoiserParams& params,
                    std::span<const ArraySample> batch,
                    const DiffusionSchedule& schedule, Rng& rng,
                    std::span<double> grad, int workers = 1);

struct GradCheckResult {
  double max_rel_error = 0.0;
  int params_checked = 0;
  double loss = 0.0;
};

/// Central-difference check of x0_loss_grad on `count` randomly chosen
/// parameters (all of them when the model is smaller), with the noise
/// frozen by `seed`.
GradCheckResult grad_check(const DenoiserParams& params,
                           std::span<const ArraySample> batch,
                           const DiffusionSchedule& schedule,
                           std::uint64_t seed, int count = 100,
                           double step = 1e-5);

struct TrainConfig {
  int iterations = 1000;
  int batch_size = 1;
  double lr = 2.5e-5;
  double beta1 = 0.9;
  double beta2 = 0.95;
  double weight_decay = 0.1;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  int workers = 1;

  void validate() const;
};

struct TrainResult {
  DenoiserParams params;
  std::vector<double> loss_history;  // one entry per iteration run
  bool diverged = false;
};

/// Decoupled-weight-decay adaptive-moment training of the x0 objective.
/// Bitwise deterministic for a fixed config. On a non-finite loss the run
/// aborts and returns the parameters from the last finite iteration.
TrainResult train(std::span<const ArraySample> dataset,
                  const DenoiserConfig& model_config,
                  const DiffusionSchedule& schedule, const TrainConfig& cfg);

}  // namespace squall
