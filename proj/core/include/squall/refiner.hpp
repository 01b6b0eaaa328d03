#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "squall/denoiser.hpp"
#include "squall/diffusion.hpp"
#include "squall/grid.hpp"
#include "squall/rng.hpp"
#include "squall/train.hpp"

namespace squall {

enum class Transform { none, log1p };

struct VariableStats {
  VariableId var;
  Transform transform = Transform::none;
  double mean = 0.0;
  double scale = 1.0;
  std::string units;
};

/// Per-variable affine map to zero mean / unit spread over a training set,
/// with precipitation passed through log1p first. Encoding stacks the
/// surface variables channel-major in registry order; decoding restores
/// physical units and clamps precipitation at zero.
class Standardizer {
 public:
  Standardizer() = default;
  explicit Standardizer(std::vector<VariableStats> stats);

  /// Population mean and standard deviation per surface variable over the
  /// given field sets, after the transform. Zero spread falls back to
  /// scale 1 so constant channels stay representable.
  static Standardizer fit(std::span<const FieldSet> targets);

  const std::vector<VariableStats>& stats() const { return stats_; }
  int channels() const { return static_cast<int>(stats_.size()); }

  std::vector<double> encode(const FieldSet& set) const;
  FieldSet decode(std::span<const double> channels, const GridSpec& grid,
                  std::int64_t valid_time, int lead_hours) const;

 private:
  std::vector<VariableStats> stats_;
};

/// One conditional training pair: the smooth forecast, the matching truth,
/// and the lead step the forecast is for.
struct RefineSample {
  FieldSet condition;
  FieldSet target;
  int k = 1;

  void validate() const;
};

/// Standardizes both field sets into the flat training representation.
ArraySample to_array_sample(const Standardizer& standardizer,
                            const RefineSample& sample);

/// Matches conditions to targets on valid time; the lead step is the
/// condition's lead in 6-hour units. Every condition must find a target.
std::vector<RefineSample> pair_refine_samples(
    std::span<const FieldSet> conditions, std::span<const FieldSet> targets);

struct RefinerModel {
  DenoiserParams params;
  DiffusionSchedule schedule;
  Standardizer standardizer;
  GridSpec grid;
};

/// Reverse diffusion over flat arrays with any denoiser-shaped map: starts
/// from standard normal noise and applies denoise + posterior draw from
/// step T down to 1.
std::vector<double> sample_array(const DenoiseFn& f,
                                 std::span<const double> condition,
                                 int channels, int nlat, int nlon, int k,
                                 const DiffusionSchedule& schedule, Rng& rng);

/// Full refinement of one smooth forecast: standardize, run the reverse
/// process conditioned on (forecast, k), de-standardize. The lead step k
/// is taken from the condition's lead time (6-hour units).
FieldSet sample_refined(const RefinerModel& model, const FieldSet& condition,
                        Rng& rng);

struct RefinerTrainResult {
  RefinerModel model;
  std::vector<double> loss_history;
  bool diverged = false;
};

/// Fits the standardizer on the targets, encodes the dataset, and trains
/// the denoiser on the x0 objective.
RefinerTrainResult train_refiner(std::span<const RefineSample> dataset,
                                 const DenoiserConfig& model_config,
                                 const DiffusionSchedule& schedule,
                                 const TrainConfig& cfg);

/// Writes <stem>.fpk (parameter payload) and <stem>.json (architecture,
/// schedule, grid, standardization statistics). Parameters are stored as
/// paired float32 hi/lo parts, so a reload recovers them to within a few
/// parts in 1e15.
void save_model(const RefinerModel& model, const std::string& stem);
RefinerModel load_model(const std::string& stem);

/// Plain key = value text ('#' comments); keys are the TrainConfig fields.
TrainConfig parse_train_config(const std::string& text);

std::string loss_history_csv(std::span<const double> losses);

}  // namespace squall
