#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace squall {

/// Shape of the conditional denoiser: a residual 3x3 conv net over
/// channel-major [channel][lat*lon] arrays with toroidal padding. The
/// noised target and the condition stack enter as channels; sinusoidal
/// embeddings of the diffusion step t and the lead step k are projected
/// and added per-channel after the first convolution.
struct DenoiserConfig {
  int in_channels = 5;   // condition channels
  int out_channels = 5;  // target channels
  int width = 32;
  int blocks = 6;
  int embed_dim = 32;  // even

  void validate() const;
};

struct TensorSpec {
  std::string name;
  std::vector<int> shape;
  std::size_t offset = 0;
  std::size_t size = 0;
};

struct DenoiserParams {
  DenoiserConfig config;
  std::vector<TensorSpec> layout;
  std::vector<double> values;  // all tensors, in layout order

  std::span<double> tensor(std::string_view name);
  std::span<const double> tensor(std::string_view name) const;
};

std::vector<TensorSpec> denoiser_layout(const DenoiserConfig& config);
std::size_t denoiser_param_count(const DenoiserConfig& config);

/// All-zero parameters (output is then the head bias, constant per channel).
DenoiserParams zero_params(const DenoiserConfig& config);
/// He-initialised conv weights, zero biases, small embedding projections.
DenoiserParams seeded_params(const DenoiserConfig& config, std::uint64_t seed);

/// Activation stash from a forward pass, consumed by the backward pass.
/// Reusable across calls with the same config and grid size.
struct DenoiserWorkspace {
  int nlat = 0, nlon = 0;
  int t = 0, k = 0;
  std::vector<std::int32_t> tap_index;  // [9][nlat*nlon] wrapped gather maps
  std::vector<double> input;            // stacked y_t | condition
  std::vector<double> trunk;            // pre-activation x_b, blocks+1 slabs
  std::vector<double> mid;              // conv1 outputs per block
  std::vector<double> t_embed, k_embed;
  std::vector<double> scratch_a, scratch_b, scratch_c;
};

/// x0_hat = f(y_t, condition, t, k). Requires t >= 1, k >= 1. Pass a
/// workspace to keep activations for denoise_backward.
void denoise(const DenoiserParams& params, std::span<const double> y_t,
             std::span<const double> condition, int t, int k, int nlat,
             int nlon, std::span<double> x0_hat,
             DenoiserWorkspace* ws = nullptr);

/// Accumulates dLoss/dparams into `grad` (not cleared) given dLoss/dx0_hat
/// and the workspace of the matching forward call.
void denoise_backward(const DenoiserParams& params,
                      const DenoiserWorkspace& ws,
                      std::span<const double> dout, std::span<double> grad);

}  // namespace squall
