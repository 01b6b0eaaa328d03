#include "squall/refiner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "squall/error.hpp"
#include "squall/field_pack.hpp"
#include "squall/io_util.hpp"
#include "squall/timeutil.hpp"

namespace squall {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

double apply_transform(Transform t, double v) {
  // Negative precipitation (smoothing ringing) clamps to dry before the log.
  return t == Transform::log1p ? std::log1p(std::max(v, 0.0)) : v;
}

double invert_transform(Transform t, double v) {
  return t == Transform::log1p ? std::max(std::expm1(v), 0.0) : v;
}

const char* transform_str(Transform t) {
  return t == Transform::log1p ? "log1p" : "none";
}

Transform transform_parse(const std::string& text) {
  if (text == "none") return Transform::none;
  if (text == "log1p") return Transform::log1p;
  throw DataError("unknown standardization transform: " + text);
}

const Field& checked_field(const FieldSet& set, const VariableId& var) {
  const Field& f = set.at(var);
  if (f.has_mask())
    throw DataError("standardizer needs unmasked fields, " + var.str() +
                    " carries a mask");
  return f;
}

ordered_json grid_json(const GridSpec& g) {
  return ordered_json{{"nlat", g.nlat},
                      {"nlon", g.nlon},
                      {"lat_start", g.lat_start},
                      {"lat_step", g.lat_step},
                      {"lon_start", g.lon_start},
                      {"lon_step", g.lon_step},
                      {"earth_radius_km", g.earth_radius_km}};
}

GridSpec grid_from_json(const json& j) {
  GridSpec g;
  g.nlat = j.at("nlat").get<int>();
  g.nlon = j.at("nlon").get<int>();
  g.lat_start = j.at("lat_start").get<double>();
  g.lat_step = j.at("lat_step").get<double>();
  g.lon_start = j.at("lon_start").get<double>();
  g.lon_step = j.at("lon_step").get<double>();
  g.earth_radius_km = j.at("earth_radius_km").get<double>();
  g.validate();
  return g;
}

int lead_step_of(const FieldSet& set, const char* what) {
  if (set.lead_hours <= 0 || set.lead_hours % 6 != 0)
    throw DataError(std::string(what) +
                    " lead time must be a positive multiple of 6 hours");
  return set.lead_hours / 6;
}

std::string trimmed(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T config_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = first + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last)
    throw DataError("training config value for " + key + " is not a number");
  return out;
}

}  // namespace

Standardizer::Standardizer(std::vector<VariableStats> stats)
    : stats_(std::move(stats)) {
  if (stats_.empty()) throw DataError("standardizer needs variables");
  for (const VariableStats& s : stats_) {
    s.var.validate();
    if (!(s.scale > 0.0) || !std::isfinite(s.scale) || !std::isfinite(s.mean))
      throw DataError("standardizer statistics for " + s.var.str() +
                      " are out of range");
  }
}

Standardizer Standardizer::fit(std::span<const FieldSet> targets) {
  if (targets.empty())
    throw DataError("standardizer needs at least one field set");
  std::vector<VariableStats> stats;
  for (const VariableId& var : surface_variables()) {
    VariableStats s;
    s.var = var;
    s.transform =
        var.name == VarName::TP ? Transform::log1p : Transform::none;

    double sum = 0.0;
    std::size_t count = 0;
    for (const FieldSet& set : targets) {
      const Field& f = checked_field(set, var);
      if (s.units.empty()) s.units = f.units();
      for (double v : f.values()) sum += apply_transform(s.transform, v);
      count += f.values().size();
    }
    s.mean = sum / static_cast<double>(count);

    double ss = 0.0;
    for (const FieldSet& set : targets)
      for (double v : set.at(var).values()) {
        const double d = apply_transform(s.transform, v) - s.mean;
        ss += d * d;
      }
    const double sd = std::sqrt(ss / static_cast<double>(count));
    s.scale = sd > 0.0 ? sd : 1.0;
    stats.push_back(std::move(s));
  }
  return Standardizer(std::move(stats));
}

std::vector<double> Standardizer::encode(const FieldSet& set) const {
  const GridSpec& grid = set.grid();
  const std::size_t hw = grid.size();
  std::vector<double> out(stats_.size() * hw);
  for (std::size_t c = 0; c < stats_.size(); ++c) {
    const VariableStats& s = stats_[c];
    const Field& f = checked_field(set, s.var);
    std::span<const double> v = f.values();
    for (std::size_t i = 0; i < hw; ++i)
      out[c * hw + i] = (apply_transform(s.transform, v[i]) - s.mean) / s.scale;
  }
  return out;
}

FieldSet Standardizer::decode(std::span<const double> channels,
                              const GridSpec& grid, std::int64_t valid_time,
                              int lead_hours) const {
  const std::size_t hw = grid.size();
  if (channels.size() != stats_.size() * hw)
    throw DataError("channel array does not match the grid");
  FieldSet out;
  out.valid_time = valid_time;
  out.lead_hours = lead_hours;
  for (std::size_t c = 0; c < stats_.size(); ++c) {
    const VariableStats& s = stats_[c];
    std::vector<double> values(hw);
    for (std::size_t i = 0; i < hw; ++i)
      values[i] =
          invert_transform(s.transform, channels[c * hw + i] * s.scale + s.mean);
    out.insert(Field(grid, s.var, s.units, std::move(values)));
  }
  return out;
}

void RefineSample::validate() const {
  if (k < 1) throw DataError("refine sample lead step must be at least 1");
  if (!(condition.grid() == target.grid()))
    throw DataError("refine sample condition and target grids differ");
  for (const VariableId& var : surface_variables()) {
    if (!condition.find(var) || !target.find(var))
      throw DataError("refine sample is missing " + var.str());
  }
}

ArraySample to_array_sample(const Standardizer& standardizer,
                            const RefineSample& sample) {
  sample.validate();
  const GridSpec& grid = sample.condition.grid();
  ArraySample out;
  out.condition = standardizer.encode(sample.condition);
  out.target = standardizer.encode(sample.target);
  out.k = sample.k;
  out.nlat = grid.nlat;
  out.nlon = grid.nlon;
  return out;
}

std::vector<RefineSample> pair_refine_samples(
    std::span<const FieldSet> conditions, std::span<const FieldSet> targets) {
  std::map<std::int64_t, const FieldSet*> by_time;
  for (const FieldSet& t : targets)
    if (!by_time.emplace(t.valid_time, &t).second)
      throw DataError("targets repeat valid time " +
                      format_time_utc(t.valid_time));

  std::vector<RefineSample> out;
  out.reserve(conditions.size());
  for (const FieldSet& c : conditions) {
    const auto it = by_time.find(c.valid_time);
    if (it == by_time.end())
      throw DataError("no target for condition valid time " +
                      format_time_utc(c.valid_time));
    RefineSample sample;
    sample.condition = c;
    sample.target = *it->second;
    sample.k = lead_step_of(c, "condition");
    sample.validate();
    out.push_back(std::move(sample));
  }
  return out;
}

std::vector<double> sample_array(const DenoiseFn& f,
                                 std::span<const double> condition,
                                 int channels, int nlat, int nlon, int k,
                                 const DiffusionSchedule& schedule, Rng& rng) {
  if (channels < 1 || nlat < 1 || nlon < 1 || k < 1)
    throw DataError("sampling shape out of range");
  const std::size_t n =
      static_cast<std::size_t>(channels) * nlat * static_cast<std::size_t>(nlon);

  std::vector<double> y(n);
  rng.fill_normal(y);

  std::vector<double> x0_hat(n), noise(n);
  for (int t = schedule.steps(); t >= 1; --t) {
    f(y, condition, t, k, x0_hat);
    if (t > 1)
      rng.fill_normal(noise);
    else
      std::fill(noise.begin(), noise.end(), 0.0);
    y = posterior_step(y, x0_hat, t, schedule, noise);
  }
  return y;
}

FieldSet sample_refined(const RefinerModel& model, const FieldSet& condition,
                        Rng& rng) {
  if (!(condition.grid() == model.grid))
    throw DataError("condition grid does not match the model");
  const int k = lead_step_of(condition, "condition");
  const int channels = model.standardizer.channels();
  const DenoiserConfig& config = model.params.config;
  if (config.in_channels != channels || config.out_channels != channels)
    throw DataError("model channel configuration does not match its variables");

  const std::vector<double> encoded = model.standardizer.encode(condition);
  DenoiserWorkspace ws;
  const DenoiseFn f = [&](std::span<const double> y_t,
                          std::span<const double> cond, int t, int kk,
                          std::span<double> out) {
    denoise(model.params, y_t, cond, t, kk, model.grid.nlat, model.grid.nlon,
            out, &ws);
  };
  const std::vector<double> refined =
      sample_array(f, encoded, channels, model.grid.nlat, model.grid.nlon, k,
                   model.schedule, rng);
  return model.standardizer.decode(refined, model.grid, condition.valid_time,
                                   condition.lead_hours);
}

RefinerTrainResult train_refiner(std::span<const RefineSample> dataset,
                                 const DenoiserConfig& model_config,
                                 const DiffusionSchedule& schedule,
                                 const TrainConfig& cfg) {
  if (dataset.empty()) throw DataError("training needs a non-empty dataset");
  model_config.validate();

  std::vector<FieldSet> targets;
  targets.reserve(dataset.size());
  for (const RefineSample& s : dataset) targets.push_back(s.target);
  Standardizer standardizer = Standardizer::fit(targets);
  if (model_config.in_channels != standardizer.channels() ||
      model_config.out_channels != standardizer.channels())
    throw DataError("denoiser channels do not match the variable set");

  const GridSpec grid = dataset.front().condition.grid();
  std::vector<ArraySample> arrays;
  arrays.reserve(dataset.size());
  for (const RefineSample& s : dataset) {
    if (!(s.condition.grid() == grid))
      throw DataError("training samples must share one grid");
    arrays.push_back(to_array_sample(standardizer, s));
  }

  TrainResult r = train(arrays, model_config, schedule, cfg);
  RefinerTrainResult out;
  out.model = RefinerModel{std::move(r.params), schedule,
                           std::move(standardizer), grid};
  out.loss_history = std::move(r.loss_history);
  out.diverged = r.diverged;
  return out;
}

void save_model(const RefinerModel& model, const std::string& stem) {
  const DenoiserConfig& config = model.params.config;
  const std::size_t count = model.params.values.size();
  if (count != denoiser_param_count(config))
    throw DataError("model parameter count does not match the architecture");

  const std::size_t half = (count + 1) / 2;
  GridSpec storage;
  storage.nlat = 2;
  storage.nlon = static_cast<int>(half);
  storage.lat_start = 0.5;
  storage.lat_step = 1.0;
  storage.lon_start = 0.0;
  storage.lon_step = 0.25;

  std::vector<float> hi(2 * half, 0.0f), lo(2 * half, 0.0f);
  for (std::size_t i = 0; i < count; ++i) {
    hi[i] = static_cast<float>(model.params.values[i]);
    lo[i] = static_cast<float>(model.params.values[i] -
                               static_cast<double>(hi[i]));
  }

  FieldPack pack;
  pack.grid = storage;
  pack.variables = {"theta:hi", "theta:lo"};
  pack.times = {0};
  pack.lead_hours = {0};
  pack.payload = {std::move(hi), std::move(lo)};
  write_field_pack_file(pack, stem + ".fpk");

  ordered_json manifest;
  manifest["kind"] = "refiner";
  manifest["denoiser"] = ordered_json{{"in_channels", config.in_channels},
                                      {"out_channels", config.out_channels},
                                      {"width", config.width},
                                      {"blocks", config.blocks},
                                      {"embed_dim", config.embed_dim}};
  manifest["param_count"] = count;
  manifest["schedule"] = ordered_json{{"steps", model.schedule.steps()},
                                      {"beta", model.schedule.beta}};
  manifest["grid"] = grid_json(model.grid);
  ordered_json stats = ordered_json::array();
  for (const VariableStats& s : model.standardizer.stats())
    stats.push_back(ordered_json{{"variable", s.var.str()},
                                 {"transform", transform_str(s.transform)},
                                 {"mean", s.mean},
                                 {"scale", s.scale},
                                 {"units", s.units}});
  manifest["standardization"] = std::move(stats);
  write_file(stem + ".json", manifest.dump(2) + "\n");
}

RefinerModel load_model(const std::string& stem) {
  json manifest;
  try {
    manifest = json::parse(read_file(stem + ".json"));
  } catch (const json::exception& e) {
    throw DataError(std::string("model manifest is not valid JSON: ") +
                    e.what());
  }

  RefinerModel model;
  std::size_t count = 0;
  try {
    if (manifest.at("kind").get<std::string>() != "refiner")
      throw DataError("not a refiner model manifest");

    const json& d = manifest.at("denoiser");
    DenoiserConfig config;
    config.in_channels = d.at("in_channels").get<int>();
    config.out_channels = d.at("out_channels").get<int>();
    config.width = d.at("width").get<int>();
    config.blocks = d.at("blocks").get<int>();
    config.embed_dim = d.at("embed_dim").get<int>();
    config.validate();

    count = manifest.at("param_count").get<std::size_t>();
    model.schedule = schedule_from_betas(
        manifest.at("schedule").at("beta").get<std::vector<double>>());
    if (model.schedule.steps() !=
        manifest.at("schedule").at("steps").get<int>())
      throw DataError("model schedule length disagrees with its betas");
    model.grid = grid_from_json(manifest.at("grid"));

    std::vector<VariableStats> stats;
    for (const json& s : manifest.at("standardization")) {
      VariableStats vs;
      vs.var = VariableId::parse(s.at("variable").get<std::string>());
      vs.transform = transform_parse(s.at("transform").get<std::string>());
      vs.mean = s.at("mean").get<double>();
      vs.scale = s.at("scale").get<double>();
      vs.units = s.at("units").get<std::string>();
      stats.push_back(std::move(vs));
    }
    model.standardizer = Standardizer(std::move(stats));

    model.params.config = config;
    model.params.layout = denoiser_layout(config);
  } catch (const json::exception& e) {
    throw DataError(std::string("model manifest missing field: ") + e.what());
  }

  if (count != denoiser_param_count(model.params.config))
    throw DataError("model parameter count does not match the architecture");

  const FieldPack pack = read_field_pack_file(stem + ".fpk");
  if (pack.variables != std::vector<std::string>{"theta:hi", "theta:lo"} ||
      pack.times.size() != 1)
    throw DataError("model parameter pack has unexpected layout");
  const std::vector<float>& hi = pack.array(0, 0);
  const std::vector<float>& lo = pack.array(0, 1);
  if (hi.size() < count || hi.size() != lo.size())
    throw DataError("model parameter pack is too small for the architecture");

  model.params.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double v = static_cast<double>(hi[i]) + static_cast<double>(lo[i]);
    if (!std::isfinite(v))
      throw DataError("model parameters contain non-finite values");
    model.params.values[i] = v;
  }
  return model;
}

TrainConfig parse_train_config(const std::string& text) {
  TrainConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trimmed(line);
    if (line.empty()) continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError("training config line " + std::to_string(line_no) +
                      " is not key = value");
    const std::string key = trimmed(line.substr(0, eq));
    const std::string value = trimmed(line.substr(eq + 1));

    if (key == "iterations")
      cfg.iterations = config_number<int>(key, value);
    else if (key == "batch_size")
      cfg.batch_size = config_number<int>(key, value);
    else if (key == "lr")
      cfg.lr = config_number<double>(key, value);
    else if (key == "beta1")
      cfg.beta1 = config_number<double>(key, value);
    else if (key == "beta2")
      cfg.beta2 = config_number<double>(key, value);
    else if (key == "weight_decay")
      cfg.weight_decay = config_number<double>(key, value);
    else if (key == "adam_eps")
      cfg.adam_eps = config_number<double>(key, value);
    else if (key == "seed")
      cfg.seed = config_number<std::uint64_t>(key, value);
    else if (key == "workers")
      cfg.workers = config_number<int>(key, value);
    else
      throw DataError("unknown training config key: " + key);
  }
  cfg.validate();
  return cfg;
}

std::string loss_history_csv(std::span<const double> losses) {
  std::string out = "iteration,loss\n";
  char buf[64];
  for (std::size_t i = 0; i < losses.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i + 1, losses[i]);
    out += buf;
  }
  return out;
}

}  // namespace squall
