#include "squall/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "squall/error.hpp"
#include "squall/rng.hpp"

namespace squall {

namespace {

double silu(double v) { return v / (1.0 + std::exp(-v)); }

double silu_grad(double v) {
  const double s = 1.0 / (1.0 + std::exp(-v));
  return s * (1.0 + v * (1.0 - s));
}

/// emb[i] = sin(value * w_i), emb[dim/2 + i] = cos(value * w_i) with
/// geometrically spaced frequencies.
void sinusoidal_embedding(double value, int dim, std::vector<double>& out) {
  out.resize(dim);
  const int half = dim / 2;
  for (int i = 0; i < half; ++i) {
    const double freq =
        std::exp(-std::log(10000.0) * static_cast<double>(i) / half);
    out[i] = std::sin(value * freq);
    out[half + i] = std::cos(value * freq);
  }
}

/// w[((tap)*cin + ci)*cout + co], tap = (dy+1)*3 + (dx+1).
void conv3x3(const double* in, int cin, const double* w, const double* b,
             int cout, std::size_t hw, const std::int32_t* taps, double* out) {
  for (int co = 0; co < cout; ++co)
    std::fill_n(out + co * hw, hw, b ? b[co] : 0.0);
  for (int tap = 0; tap < 9; ++tap) {
    const std::int32_t* idx = taps + tap * hw;
    for (int ci = 0; ci < cin; ++ci) {
      const double* src = in + ci * hw;
      const double* wt = w + (static_cast<std::size_t>(tap) * cin + ci) * cout;
      for (int co = 0; co < cout; ++co) {
        const double wv = wt[co];
        if (wv == 0.0) continue;
        double* dst = out + co * hw;
        for (std::size_t p = 0; p < hw; ++p) dst[p] += wv * src[idx[p]];
      }
    }
  }
}

/// dIn gets the adjoint of conv3x3; uses the mirrored tap (8 - tap).
void conv3x3_input_grad(const double* dout, int cout, const double* w, int cin,
                        std::size_t hw, const std::int32_t* taps, double* din) {
  std::fill_n(din, static_cast<std::size_t>(cin) * hw, 0.0);
  for (int tap = 0; tap < 9; ++tap) {
    const std::int32_t* idx = taps + (8 - tap) * hw;
    for (int ci = 0; ci < cin; ++ci) {
      double* dst = din + ci * hw;
      const double* wt = w + (static_cast<std::size_t>(tap) * cin + ci) * cout;
      for (int co = 0; co < cout; ++co) {
        const double wv = wt[co];
        if (wv == 0.0) continue;
        const double* src = dout + co * hw;
        for (std::size_t p = 0; p < hw; ++p) dst[p] += wv * src[idx[p]];
      }
    }
  }
}

void conv3x3_weight_grad(const double* in, int cin, const double* dout,
                         int cout, std::size_t hw, const std::int32_t* taps,
                         double* gw, double* gb) {
  for (int co = 0; co < cout; ++co) {
    const double* src = dout + co * hw;
    double sum = 0.0;
    for (std::size_t p = 0; p < hw; ++p) sum += src[p];
    gb[co] += sum;
  }
  for (int tap = 0; tap < 9; ++tap) {
    const std::int32_t* idx = taps + tap * hw;
    for (int ci = 0; ci < cin; ++ci) {
      const double* src = in + ci * hw;
      double* gwt = gw + (static_cast<std::size_t>(tap) * cin + ci) * cout;
      for (int co = 0; co < cout; ++co) {
        const double* dst = dout + co * hw;
        double sum = 0.0;
        for (std::size_t p = 0; p < hw; ++p) sum += src[idx[p]] * dst[p];
        gwt[co] += sum;
      }
    }
  }
}

void build_tap_index(int nlat, int nlon, std::vector<std::int32_t>& taps) {
  const std::size_t hw = static_cast<std::size_t>(nlat) * nlon;
  taps.resize(9 * hw);
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      std::int32_t* idx = taps.data() + ((dy + 1) * 3 + (dx + 1)) * hw;
      for (int y = 0; y < nlat; ++y) {
        const int sy = (y + dy + nlat) % nlat;
        for (int x = 0; x < nlon; ++x) {
          const int sx = (x + dx + nlon) % nlon;
          idx[y * nlon + x] = sy * nlon + sx;
        }
      }
    }
  }
}

struct Slices {
  std::span<const double> conv_in_w, conv_in_b;
  std::span<const double> t_proj_w, t_proj_b;
  std::span<const double> k_proj_w, k_proj_b;
  std::vector<std::span<const double>> c1w, c1b, c2w, c2b;
  std::span<const double> head_w, head_b;

  explicit Slices(const DenoiserParams& p) {
    conv_in_w = p.tensor("conv_in.w");
    conv_in_b = p.tensor("conv_in.b");
    t_proj_w = p.tensor("t_proj.w");
    t_proj_b = p.tensor("t_proj.b");
    k_proj_w = p.tensor("k_proj.w");
    k_proj_b = p.tensor("k_proj.b");
    for (int b = 0; b < p.config.blocks; ++b) {
      const std::string stem = "block" + std::to_string(b);
      c1w.push_back(p.tensor(stem + ".conv1.w"));
      c1b.push_back(p.tensor(stem + ".conv1.b"));
      c2w.push_back(p.tensor(stem + ".conv2.w"));
      c2b.push_back(p.tensor(stem + ".conv2.b"));
    }
    head_w = p.tensor("head.w");
    head_b = p.tensor("head.b");
  }
};

/// t_proj.w is [embed_dim][width]: projected[c] = b[c] + sum_e emb[e] w[e][c].
void project_embedding(std::span<const double> emb, std::span<const double> w,
                       std::span<const double> b, int width,
                       std::vector<double>& out) {
  out.assign(b.begin(), b.end());
  for (std::size_t e = 0; e < emb.size(); ++e) {
    const double v = emb[e];
    const double* row = w.data() + e * width;
    for (int c = 0; c < width; ++c) out[c] += v * row[c];
  }
}

}  // namespace

void DenoiserConfig::validate() const {
  if (in_channels < 1 || out_channels < 1 || width < 1 || blocks < 0 ||
      embed_dim < 2 || embed_dim % 2 != 0)
    throw DataError(
        "denoiser config needs positive channel counts, width, an even "
        "embed_dim >= 2 and blocks >= 0");
}

std::vector<TensorSpec> denoiser_layout(const DenoiserConfig& config) {
  config.validate();
  const int c0 = config.in_channels + config.out_channels;
  const int w = config.width;
  std::vector<TensorSpec> layout;
  std::size_t offset = 0;
  auto add = [&layout, &offset](std::string name, std::vector<int> shape) {
    std::size_t size = 1;
    for (int d : shape) size *= static_cast<std::size_t>(d);
    layout.push_back({std::move(name), std::move(shape), offset, size});
    offset += size;
  };
  add("conv_in.w", {3, 3, c0, w});
  add("conv_in.b", {w});
  add("t_proj.w", {config.embed_dim, w});
  add("t_proj.b", {w});
  add("k_proj.w", {config.embed_dim, w});
  add("k_proj.b", {w});
  for (int b = 0; b < config.blocks; ++b) {
    const std::string stem = "block" + std::to_string(b);
    add(stem + ".conv1.w", {3, 3, w, w});
    add(stem + ".conv1.b", {w});
    add(stem + ".conv2.w", {3, 3, w, w});
    add(stem + ".conv2.b", {w});
  }
  add("head.w", {3, 3, w, config.out_channels});
  add("head.b", {config.out_channels});
  return layout;
}

std::size_t denoiser_param_count(const DenoiserConfig& config) {
  const auto layout = denoiser_layout(config);
  return layout.back().offset + layout.back().size;
}

std::span<double> DenoiserParams::tensor(std::string_view name) {
  for (const TensorSpec& t : layout)
    if (t.name == name) return {values.data() + t.offset, t.size};
  throw DataError("denoiser has no tensor named '" + std::string(name) + "'");
}

std::span<const double> DenoiserParams::tensor(std::string_view name) const {
  for (const TensorSpec& t : layout)
    if (t.name == name) return {values.data() + t.offset, t.size};
  throw DataError("denoiser has no tensor named '" + std::string(name) + "'");
}

DenoiserParams zero_params(const DenoiserConfig& config) {
  DenoiserParams p;
  p.config = config;
  p.layout = denoiser_layout(config);
  p.values.assign(denoiser_param_count(config), 0.0);
  return p;
}

DenoiserParams seeded_params(const DenoiserConfig& config, std::uint64_t seed) {
  DenoiserParams p = zero_params(config);
  Rng rng(seed);
  for (const TensorSpec& t : p.layout) {
    const bool is_weight = t.name.ends_with(".w");
    if (!is_weight) continue;  // biases stay zero
    double scale;
    if (t.name.starts_with("t_proj") || t.name.starts_with("k_proj")) {
      scale = 0.02;
    } else {
      // He initialisation: fan_in = kh*kw*cin for convs.
      std::size_t fan_in = 1;
      for (std::size_t d = 0; d + 1 < t.shape.size(); ++d)
        fan_in *= static_cast<std::size_t>(t.shape[d]);
      scale = std::sqrt(2.0 / static_cast<double>(fan_in));
    }
    for (std::size_t n = 0; n < t.size; ++n)
      p.values[t.offset + n] = scale * rng.normal();
  }
  return p;
}

void denoise(const DenoiserParams& params, std::span<const double> y_t,
             std::span<const double> condition, int t, int k, int nlat,
             int nlon, std::span<double> x0_hat, DenoiserWorkspace* ws) {
  const DenoiserConfig& cfg = params.config;
  cfg.validate();
  if (t < 1) throw DataError("denoise needs diffusion step t >= 1");
  if (k < 1) throw DataError("denoise needs lead step k >= 1");
  if (nlat < 1 || nlon < 1) throw DataError("denoise needs a positive grid");
  const std::size_t hw = static_cast<std::size_t>(nlat) * nlon;
  if (y_t.size() != hw * cfg.out_channels ||
      condition.size() != hw * cfg.in_channels ||
      x0_hat.size() != hw * cfg.out_channels)
    throw DataError("denoise array sizes do not match the configuration");
  if (params.values.size() != denoiser_param_count(cfg))
    throw DataError("denoiser parameter vector has the wrong length");

  DenoiserWorkspace local;
  DenoiserWorkspace& w = ws ? *ws : local;
  if (w.nlat != nlat || w.nlon != nlon) {
    w.nlat = nlat;
    w.nlon = nlon;
    build_tap_index(nlat, nlon, w.tap_index);
  }
  w.t = t;
  w.k = k;

  const Slices s(params);
  const int width = cfg.width;
  const int c0 = cfg.in_channels + cfg.out_channels;

  w.input.resize(hw * c0);
  std::memcpy(w.input.data(), y_t.data(), y_t.size() * sizeof(double));
  std::memcpy(w.input.data() + y_t.size(), condition.data(),
              condition.size() * sizeof(double));

  w.trunk.resize(static_cast<std::size_t>(cfg.blocks + 1) * width * hw);
  w.mid.resize(static_cast<std::size_t>(std::max(cfg.blocks, 1)) * width * hw);
  w.scratch_a.resize(width * hw);
  w.scratch_b.resize(width * hw);

  double* x0 = w.trunk.data();
  conv3x3(w.input.data(), c0, s.conv_in_w.data(), s.conv_in_b.data(), width,
          hw, w.tap_index.data(), x0);

  std::vector<double> emb;
  sinusoidal_embedding(static_cast<double>(t), cfg.embed_dim, emb);
  project_embedding(emb, s.t_proj_w, s.t_proj_b, width, w.t_embed);
  sinusoidal_embedding(static_cast<double>(k), cfg.embed_dim, emb);
  project_embedding(emb, s.k_proj_w, s.k_proj_b, width, w.k_embed);
  for (int c = 0; c < width; ++c) {
    const double shift = w.t_embed[c] + w.k_embed[c];
    double* row = x0 + static_cast<std::size_t>(c) * hw;
    for (std::size_t p = 0; p < hw; ++p) row[p] += shift;
  }

  for (int b = 0; b < cfg.blocks; ++b) {
    const double* xb = w.trunk.data() + static_cast<std::size_t>(b) * width * hw;
    double* xn = w.trunk.data() + static_cast<std::size_t>(b + 1) * width * hw;
    double* c1 = w.mid.data() + static_cast<std::size_t>(b) * width * hw;

    double* act = w.scratch_a.data();
    for (std::size_t n = 0; n < hw * width; ++n) act[n] = silu(xb[n]);
    conv3x3(act, width, s.c1w[b].data(), s.c1b[b].data(), width, hw,
            w.tap_index.data(), c1);
    for (std::size_t n = 0; n < hw * width; ++n) act[n] = silu(c1[n]);
    conv3x3(act, width, s.c2w[b].data(), s.c2b[b].data(), width, hw,
            w.tap_index.data(), w.scratch_b.data());
    for (std::size_t n = 0; n < hw * width; ++n)
      xn[n] = xb[n] + w.scratch_b[n];
  }

  const double* xfin =
      w.trunk.data() + static_cast<std::size_t>(cfg.blocks) * width * hw;
  double* act = w.scratch_a.data();
  for (std::size_t n = 0; n < hw * width; ++n) act[n] = silu(xfin[n]);
  conv3x3(act, width, s.head_w.data(), s.head_b.data(), cfg.out_channels, hw,
          w.tap_index.data(), x0_hat.data());
}

void denoise_backward(const DenoiserParams& params,
                      const DenoiserWorkspace& ws,
                      std::span<const double> dout, std::span<double> grad) {
  const DenoiserConfig& cfg = params.config;
  const std::size_t hw = static_cast<std::size_t>(ws.nlat) * ws.nlon;
  if (hw == 0) throw DataError("backward pass needs a forward workspace");
  if (dout.size() != hw * cfg.out_channels)
    throw DataError("backward output gradient has the wrong length");
  if (grad.size() != params.values.size())
    throw DataError("gradient vector has the wrong length");

  const Slices s(params);
  const int width = cfg.width;
  const int c0 = cfg.in_channels + cfg.out_channels;

  auto gspan = [&params, &grad](std::string_view name) {
    for (const TensorSpec& t : params.layout)
      if (t.name == name) return grad.subspan(t.offset, t.size);
    throw DataError("denoiser has no tensor named '" + std::string(name) +
                    "'");
  };

  std::vector<double> act(width * hw);
  std::vector<double> dx(width * hw);
  std::vector<double> branch(width * hw);
  std::vector<double> dmid(width * hw);

  // Head: out = head(silu(x_fin)).
  const double* xfin =
      ws.trunk.data() + static_cast<std::size_t>(cfg.blocks) * width * hw;
  for (std::size_t n = 0; n < hw * width; ++n) act[n] = silu(xfin[n]);
  conv3x3_weight_grad(act.data(), width, dout.data(), cfg.out_channels, hw,
                      ws.tap_index.data(), gspan("head.w").data(),
                      gspan("head.b").data());
  conv3x3_input_grad(dout.data(), cfg.out_channels, s.head_w.data(), width,
                     hw, ws.tap_index.data(), dx.data());
  for (std::size_t n = 0; n < hw * width; ++n) dx[n] *= silu_grad(xfin[n]);

  for (int b = cfg.blocks - 1; b >= 0; --b) {
    const std::string stem = "block" + std::to_string(b);
    const double* xb = ws.trunk.data() + static_cast<std::size_t>(b) * width * hw;
    const double* c1 = ws.mid.data() + static_cast<std::size_t>(b) * width * hw;

    // x_{b+1} = x_b + conv2(silu(conv1(silu(x_b)))); dx arrives at x_{b+1}.
    for (std::size_t n = 0; n < hw * width; ++n) act[n] = silu(c1[n]);
    conv3x3_weight_grad(act.data(), width, dx.data(), width, hw,
                        ws.tap_index.data(), gspan(stem + ".conv2.w").data(),
                        gspan(stem + ".conv2.b").data());
    conv3x3_input_grad(dx.data(), width, s.c2w[b].data(), width, hw,
                       ws.tap_index.data(), branch.data());
    for (std::size_t n = 0; n < hw * width; ++n)
      branch[n] *= silu_grad(c1[n]);

    for (std::size_t n = 0; n < hw * width; ++n) act[n] = silu(xb[n]);
    conv3x3_weight_grad(act.data(), width, branch.data(), width, hw,
                        ws.tap_index.data(), gspan(stem + ".conv1.w").data(),
                        gspan(stem + ".conv1.b").data());
    conv3x3_input_grad(branch.data(), width, s.c1w[b].data(), width, hw,
                       ws.tap_index.data(), dmid.data());
    for (std::size_t n = 0; n < hw * width; ++n)
      dx[n] += dmid[n] * silu_grad(xb[n]);
  }

  // Embedding shifts: each channel's gradient is the spatial sum at x_0.
  std::vector<double> emb;
  auto gtw = gspan("t_proj.w");
  auto gtb = gspan("t_proj.b");
  auto gkw = gspan("k_proj.w");
  auto gkb = gspan("k_proj.b");
  sinusoidal_embedding(static_cast<double>(ws.t), cfg.embed_dim, emb);
  std::vector<double> kemb;
  sinusoidal_embedding(static_cast<double>(ws.k), cfg.embed_dim, kemb);
  for (int c = 0; c < width; ++c) {
    const double* row = dx.data() + static_cast<std::size_t>(c) * hw;
    double sum = 0.0;
    for (std::size_t p = 0; p < hw; ++p) sum += row[p];
    gtb[c] += sum;
    gkb[c] += sum;
    for (int e = 0; e < cfg.embed_dim; ++e) {
      gtw[static_cast<std::size_t>(e) * width + c] += emb[e] * sum;
      gkw[static_cast<std::size_t>(e) * width + c] += kemb[e] * sum;
    }
  }

  conv3x3_weight_grad(ws.input.data(), c0, dx.data(), width, hw,
                      ws.tap_index.data(), gspan("conv_in.w").data(),
                      gspan("conv_in.b").data());
}

}  // namespace squall
