#pragma once

// Experiment configuration: a JSON document (comments allowed) with
// "problem", "method", "sampler", "map", "compare" and "output" sections.
// Relative paths resolve against the directory of the config file.

#include "lisret/lis.hpp"
#include "lisret/map_laplace.hpp"
#include "lisret/mcmc.hpp"
#include "lisret/synthetic.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lisret::harness {

enum class Method { full, lis, prired };

std::string to_string(Method m);
Method parse_method(const std::string& name);

struct MethodConfig {
  Method method = Method::lis;
  std::optional<Eigen::Index> rank = 4;
  double threshold = 1.0;  // used when rank is unset
  Eigen::Index laplace_samples = 1000;

  RankSelection selection() const {
    return rank ? RankSelection::fixed(*rank) : RankSelection::above(threshold);
  }
};

struct SamplerSection {
  Eigen::Index chain_length = 100000;
  std::optional<Eigen::Index> burn_in;  // default 20% of chain_length
  Eigen::Index adapt_start = 1000;
  Eigen::Index adapt_interval = 100;
  double regularization_eps = 1e-10;

  Eigen::Index effective_burn_in() const {
    return burn_in.value_or(SamplerConfig::default_burn_in(chain_length));
  }
};

struct CompareSection {
  std::filesystem::path reference_dir;  // full-space retrieval output
  std::vector<Eigen::Index> ranks{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<Method> methods{Method::lis, Method::prired};
};

struct ExperimentConfig {
  SyntheticConfig problem;
  std::filesystem::path ensemble_file;  // empty: generated ensemble
  std::filesystem::path data_dir;       // simulate output read by retrieve
  std::filesystem::path spectrum_file;  // overrides data_dir/spectrum_noisy.csv
  bool noise_free = false;

  MethodConfig method;
  SamplerSection sampler;
  GaussNewtonConfig map;
  CompareSection compare;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;

  std::string source_text;  // raw config bytes, for the manifest hash
};

/// Seeds derived from the experiment seed; one stream per consumer.
struct SeedPlan {
  std::uint64_t truth;
  std::uint64_t noise;
  std::uint64_t laplace;
  std::uint64_t sampler;
  std::uint64_t complement;
};
SeedPlan derive_seeds(std::uint64_t seed);

/// Parses and validates; throws ConfigError (unknown keys included).
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Commented template holding every default.
std::string config_template();

/// FNV-1a of the config text plus any command-line overrides.
std::string config_hash(const ExperimentConfig& config, const std::string& overrides);

}  // namespace lisret::harness
