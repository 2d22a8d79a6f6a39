#include "lisret/harness/config.hpp"

#include "lisret/errors.hpp"
#include "lisret/text_io.hpp"

#include <json.hpp>

#include <set>

namespace lisret::harness {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Reads keys out of one JSON object and rejects anything it did not consume.
class Section {
public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("config section '" + name_ + "' must be an object");
  }

  // Throws for any key that no getter asked for.
  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ConfigError("unknown key '" + it.key() + "' in section '" + name_ + "'");
      }
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + name_ + "." + key + "' has the wrong type");
    }
  }

  template <typename T>
  void get_optional(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    if (it->is_null()) {
      out.reset();
      return;
    }
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + name_ + "." + key + "' has the wrong type");
    }
  }

  void get_path(const char* key, std::filesystem::path& out, const std::filesystem::path& base) {
    std::string s;
    get(key, s);
    if (!s.empty()) {
      std::filesystem::path p(s);
      out = p.is_absolute() ? p : base / p;
    }
  }

  std::optional<Section> sub(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return std::nullopt;
    return std::optional<Section>(std::in_place, *it, name_ + "." + key);
  }

private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

void read_problem(Section& s, ExperimentConfig& c, const std::filesystem::path& base) {
  SyntheticConfig& p = c.problem;
  long long wavelengths = p.wavelengths;
  long long layers = p.layers;
  s.get("wavelengths", wavelengths);
  s.get("layers", layers);
  p.wavelengths = wavelengths;
  p.layers = layers;
  s.get("top_km", p.top_km);
  s.get("wavelength_min_nm", p.wavelength_min_nm);
  s.get("wavelength_max_nm", p.wavelength_max_nm);
  s.get("lines", p.lines);
  s.get("width_surface_nm", p.width_surface_nm);
  s.get("width_floor_nm", p.width_floor_nm);
  s.get("pressure_scale_height_km", p.pressure_scale_height_km);
  s.get("strength_scale_height_km", p.strength_scale_height_km);
  s.get("peak_optical_depth", p.peak_optical_depth);
  s.get("background_lines", p.background_lines);
  s.get("background_optical_depth", p.background_optical_depth);
  s.get("background_scale_height_km", p.background_scale_height_km);
  s.get("noise_relative_sigma", p.noise_relative_sigma);
  s.get("jitter", p.jitter);
  s.get("seed", p.seed);
  s.get("noise_free", c.noise_free);
  s.get_path("ensemble_file", c.ensemble_file, base);
  s.get_path("data_dir", c.data_dir, base);
  s.get_path("spectrum_file", c.spectrum_file, base);
  if (auto inst = s.sub("instrument")) {
    inst->get("a", p.instrument.a);
    inst->get("b", p.instrument.b);
    inst->get("c", p.instrument.c);
    inst->get("d", p.instrument.offset);
    inst->done();
  }
  if (auto e = s.sub("ensemble")) {
    long long count = p.ensemble.count;
    e->get("count", count);
    p.ensemble.count = count;
    e->get("surface_density", p.ensemble.surface_density);
    e->get("density_scale_height_km", p.ensemble.density_scale_height_km);
    e->get("relative_sd_low", p.ensemble.relative_sd_low);
    e->get("relative_sd_high", p.ensemble.relative_sd_high);
    e->get("transition_km", p.ensemble.transition_km);
    e->get("transition_width_km", p.ensemble.transition_width_km);
    e->get("broad_length_km", p.ensemble.broad_length_km);
    e->get("narrow_length_km", p.ensemble.narrow_length_km);
    e->get("narrow_weight", p.ensemble.narrow_weight);
    e->get("seed", p.ensemble.seed);
    e->done();
  }
}

void validate(const ExperimentConfig& c) {
  const auto& s = c.sampler;
  if (s.chain_length < 2) throw ConfigError("sampler.chain_length must be >= 2");
  const auto burn = s.effective_burn_in();
  if (burn < 0 || burn >= s.chain_length) {
    throw ConfigError("sampler.burn_in must satisfy 0 <= burn_in < chain_length");
  }
  if (s.adapt_start < 1) throw ConfigError("sampler.adapt_start must be >= 1");
  if (s.adapt_interval < 1) throw ConfigError("sampler.adapt_interval must be >= 1");
  if (!(s.regularization_eps > 0.0)) throw ConfigError("sampler.regularization_eps must be > 0");
  if (c.method.rank && *c.method.rank < 1) throw ConfigError("method.rank must be >= 1");
  if (c.method.laplace_samples < 1) throw ConfigError("method.laplace_samples must be >= 1");
  if (c.map.max_iter < 1) throw ConfigError("map.max_iter must be >= 1");
  for (auto r : c.compare.ranks) {
    if (r < 1) throw ConfigError("compare.ranks entries must be >= 1");
  }
  if (c.compare.methods.empty()) throw ConfigError("compare.methods is empty");
  for (auto m : c.compare.methods) {
    if (m == Method::full) throw ConfigError("compare.methods lists reduced methods only");
  }
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::full: return "full";
    case Method::lis: return "lis";
    case Method::prired: return "prired";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "full") return Method::full;
  if (name == "lis") return Method::lis;
  if (name == "prired") return Method::prired;
  throw ConfigError("unknown method '" + name + "' (expected full, lis or prired)");
}

SeedPlan derive_seeds(std::uint64_t seed) {
  return {splitmix64(seed ^ 0x1ULL), splitmix64(seed ^ 0x2ULL), splitmix64(seed ^ 0x3ULL),
          splitmix64(seed ^ 0x4ULL), splitmix64(seed ^ 0x5ULL)};
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  c.source_text = text;
  c.data_dir = base_dir / "sim";
  c.compare.reference_dir = base_dir / "full";
  c.output_dir = base_dir / "out";
  {
    Section top(root, "config");
    top.get("seed", c.seed);
    if (auto s = top.sub("problem")) {
      read_problem(*s, c, base_dir);
      s->done();
    }
    if (auto s = top.sub("method")) {
      std::string name = to_string(c.method.method);
      s->get("name", name);
      c.method.method = parse_method(name);
      std::optional<long long> rank = c.method.rank;
      s->get_optional("rank", rank);
      c.method.rank = rank;
      s->get("threshold", c.method.threshold);
      long long laplace = c.method.laplace_samples;
      s->get("laplace_samples", laplace);
      c.method.laplace_samples = laplace;
      s->done();
    }
    if (auto s = top.sub("sampler")) {
      long long v = c.sampler.chain_length;
      s->get("chain_length", v);
      c.sampler.chain_length = v;
      std::optional<long long> burn;
      s->get_optional("burn_in", burn);
      if (burn) c.sampler.burn_in = *burn;
      v = c.sampler.adapt_start;
      s->get("adapt_start", v);
      c.sampler.adapt_start = v;
      v = c.sampler.adapt_interval;
      s->get("adapt_interval", v);
      c.sampler.adapt_interval = v;
      s->get("regularization_eps", c.sampler.regularization_eps);
      s->done();
    }
    if (auto s = top.sub("map")) {
      s->get("max_iter", c.map.max_iter);
      s->get("step_tol", c.map.step_tol);
      s->get("max_halvings", c.map.max_halvings);
      s->done();
    }
    if (auto s = top.sub("compare")) {
      s->get_path("reference_dir", c.compare.reference_dir, base_dir);
      std::vector<long long> ranks;
      s->get("ranks", ranks);
      if (!ranks.empty()) c.compare.ranks.assign(ranks.begin(), ranks.end());
      std::vector<std::string> methods;
      s->get("methods", methods);
      if (!methods.empty()) {
        c.compare.methods.clear();
        for (const auto& m : methods) c.compare.methods.push_back(parse_method(m));
      }
      s->done();
    }
    if (auto s = top.sub("output")) {
      s->get_path("dir", c.output_dir, base_dir);
      s->done();
    }
    top.done();
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, path.parent_path());
}

std::string config_template() {
  return R"(// Experiment configuration. Comments are allowed; relative paths resolve
// against this file's directory. Every value below is the default.
{
  // Experiment seed; --seed overrides it. Truth, noise, Laplace, sampler and
  // complement streams are derived from it.
  "seed": 1,

  "problem": {
    "wavelengths": 200,
    "layers": 50,
    "top_km": 50.0,
    "wavelength_min_nm": 1642.0,
    "wavelength_max_nm": 1648.0,
    "lines": 10,
    "width_surface_nm": 0.12,
    "width_floor_nm": 0.015,
    "pressure_scale_height_km": 7.0,
    "strength_scale_height_km": 20.0,
    "peak_optical_depth": 1.0,
    "background_lines": 4,
    "background_optical_depth": 0.3,
    "background_scale_height_km": 2.0,
    // sigma = noise_relative_sigma * peak continuum
    "noise_relative_sigma": 0.001,
    // added to the ensemble covariance as jitter * mean(diag) * I
    "jitter": 1e-6,
    // seed of the line list
    "seed": 1,
    // simulate writes y = F(x_true) without noise when true
    "noise_free": false,
    "instrument": { "a": 0.0, "b": 0.0, "c": 1.0, "d": 0.0 },
    // empty: use the generated ensemble (same as the bundled ensemble.txt)
    "ensemble_file": "",
    "ensemble": {
      "count": 100,
      "surface_density": 1.0,
      "density_scale_height_km": 8.0,
      "relative_sd_low": 0.04,
      "relative_sd_high": 0.20,
      "transition_km": 15.0,
      "transition_width_km": 3.0,
      "broad_length_km": 6.0,
      "narrow_length_km": 1.5,
      "narrow_weight": 0.3,
      "seed": 7
    },
    // directory written by `simulate`, read by `retrieve` and `compare`
    "data_dir": "sim",
    // overrides data_dir/spectrum_noisy.csv when set
    "spectrum_file": ""
  },

  "method": {
    // full | lis | prired
    "name": "lis",
    // null selects the rank by "threshold" (LIS only)
    "rank": 4,
    "threshold": 1.0,
    // Laplace draws used to average the whitened Jacobian
    "laplace_samples": 1000
  },

  "sampler": {
    "chain_length": 100000,
    // null: 20% of chain_length
    "burn_in": null,
    "adapt_start": 1000,
    "adapt_interval": 100,
    "regularization_eps": 1e-10
  },

  "map": { "max_iter": 50, "step_tol": 1e-8, "max_halvings": 10 },

  "compare": {
    // output directory of a full-space retrieval
    "reference_dir": "full",
    "ranks": [1, 2, 3, 4, 5, 6, 7, 8],
    "methods": ["lis", "prired"]
  },

  "output": { "dir": "out" }
}
)";
}

std::string config_hash(const ExperimentConfig& config, const std::string& overrides) {
  return fnv1a_hex(config.source_text + "\n--\n" + overrides);
}

}  // namespace lisret::harness
