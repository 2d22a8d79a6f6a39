#include "lisret/harness/commands.hpp"

#include "lisret/errors.hpp"
#include "lisret/harness/experiment.hpp"
#include "lisret/text_io.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace lisret::harness {

namespace fs = std::filesystem;

namespace {

fs::path prepare_out_dir(const CommandOptions& options, const ExperimentConfig& config) {
  const fs::path dir = options.out ? *options.out : config.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'");
  }
  return dir;
}

std::ofstream open_text(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

// CSV whose rows mix text and numbers.
class TextTable {
public:
  explicit TextTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  void write(const fs::path& path) const {
    auto out = open_text(path);
    write(out);
  }

  void write(std::ostream& out) const {
    auto line = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
      out << '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
  }

private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string num(double v) { return format_double(v); }
std::string num(Eigen::Index v) { return std::to_string(v); }

Vector load_spectrum(const ExperimentConfig& config) {
  fs::path path = config.spectrum_file;
  if (path.empty()) {
    if (config.data_dir.empty()) {
      throw ConfigError("no observation: set problem.data_dir or problem.spectrum_file");
    }
    path = config.data_dir / "spectrum_noisy.csv";
  }
  if (!fs::exists(path)) throw IoError("observation file '" + path.string() + "' not found");
  return read_column(path, "intensity");
}

void write_spectrum_csv(const fs::path& path, const Vector& wavelengths, const Vector& values) {
  Matrix rows(values.size(), 3);
  rows.col(0) = Vector::LinSpaced(values.size(), 0, static_cast<double>(values.size() - 1));
  rows.col(1) = wavelengths;
  rows.col(2) = values;
  write_csv(path, {"index", "wavelength_nm", "intensity"}, rows);
}

void write_indexed(const fs::path& path, const Vector& values, const std::string& name) {
  Matrix rows(values.size(), 2);
  rows.col(0) = Vector::LinSpaced(values.size(), 0, static_cast<double>(values.size() - 1));
  rows.col(1) = values;
  write_csv(path, {"index", name}, rows);
}

void write_layer_table(const fs::path& path, const Vector& altitudes, const Matrix& columns,
                       const std::vector<std::string>& names) {
  Matrix rows(columns.rows(), columns.cols() + 2);
  rows.col(0) = Vector::LinSpaced(columns.rows(), 0, static_cast<double>(columns.rows() - 1));
  rows.col(1) = altitudes;
  rows.rightCols(columns.cols()) = columns;
  std::vector<std::string> header{"layer", "altitude_km"};
  header.insert(header.end(), names.begin(), names.end());
  write_csv(path, header, rows);
}

void write_basis_file(const fs::path& path, const Matrix& basis) {
  auto out = open_text(path);
  write_basis(out, basis);
}

void record_seeds(KeyValueFile& kv, const ExperimentConfig& config, const SeedPlan& seeds) {
  kv.set("seed", static_cast<unsigned long long>(config.seed));
  kv.set("seed.truth", static_cast<unsigned long long>(seeds.truth));
  kv.set("seed.noise", static_cast<unsigned long long>(seeds.noise));
  kv.set("seed.laplace", static_cast<unsigned long long>(seeds.laplace));
  kv.set("seed.sampler", static_cast<unsigned long long>(seeds.sampler));
  kv.set("seed.complement", static_cast<unsigned long long>(seeds.complement));
  kv.set("seed.problem", static_cast<unsigned long long>(config.problem.seed));
  kv.set("seed.ensemble", static_cast<unsigned long long>(config.problem.ensemble.seed));
}

// Per-rank sampler seeds keep every run of a sweep on its own stream.
std::uint64_t sweep_seed(std::uint64_t base, Method m, Eigen::Index r) {
  return base ^ (static_cast<std::uint64_t>(m) + 1) * 0x9e3779b97f4a7c15ULL ^
         static_cast<std::uint64_t>(r) * 0xbf58476d1ce4e5b9ULL;
}

struct ReferenceChain {
  Matrix samples;
  std::optional<double> sample_speed;
};

ReferenceChain load_reference(const fs::path& dir) {
  if (dir.empty()) throw ConfigError("compare.reference_dir is not set");
  const fs::path chain = dir / "chain_full.csv";
  if (!fs::exists(chain)) {
    throw IoError("missing full-space reference run: '" + chain.string() + "' not found");
  }
  ReferenceChain ref;
  ref.samples = read_chain(chain);
  const fs::path timing = dir / "timing.txt";
  if (fs::exists(timing)) {
    const KeyValueFile kv = KeyValueFile::read(timing);
    if (const std::string* v = kv.find("sample_speed_min")) ref.sample_speed = std::stod(*v);
  }
  return ref;
}

void write_diagnostics(const fs::path& dir, const RetrievalResult& r,
                       const std::optional<HellingerReport>& hellinger) {
  auto out = open_text(dir / "diagnostics.txt");
  KeyValueFile kv;
  kv.set("method", to_string(r.method));
  kv.set("rank", static_cast<long long>(r.rank));
  kv.set("chain_length", static_cast<long long>(r.chain.length()));
  kv.set("burn_in", static_cast<long long>(r.burn_in));
  kv.set("acceptance_rate", r.chain.acceptance_rate(r.burn_in));
  kv.set("nan_rejections", static_cast<long long>(r.chain.nan_rejections));
  kv.set("adaptation_failures", static_cast<long long>(r.chain.adaptation_failures));
  kv.set("n_eff_min", r.ess.min_n_eff);
  if (hellinger) kv.set("hellinger_mean", hellinger->mean);
  kv.write(out);
  out << "\n[n_eff]\n";
  Matrix ess(r.ess.n_eff.size(), 2);
  ess.col(0) = Vector::LinSpaced(ess.rows(), 0, static_cast<double>(ess.rows() - 1));
  ess.col(1) = r.ess.n_eff;
  write_csv(out, {"coordinate", "n_eff"}, ess);
  if (hellinger) {
    out << "\n[hellinger]\n";
    Matrix h(hellinger->per_coordinate.size(), 2);
    h.col(0) = Vector::LinSpaced(h.rows(), 0, static_cast<double>(h.rows() - 1));
    h.col(1) = hellinger->per_coordinate;
    write_csv(out, {"layer", "hellinger"}, h);
  }
}

void write_timing(const fs::path& dir, const EssReport& ess) {
  auto out = open_text(dir / "timing.txt");
  KeyValueFile kv;
  kv.set("t_m_seconds", ess.t_m);
  kv.set("sample_speed_min", ess.min_speed);
  kv.write(out);
  out << "\n[sample_speed]\n";
  Matrix v(ess.speed.size(), 2);
  v.col(0) = Vector::LinSpaced(v.rows(), 0, static_cast<double>(v.rows() - 1));
  v.col(1) = ess.speed;
  write_csv(out, {"coordinate", "sample_speed"}, v);
}

}  // namespace

ExperimentConfig resolve_config(const CommandOptions& options, std::string* overrides) {
  ExperimentConfig config =
      options.config ? load_config(*options.config) : parse_config("{}", fs::current_path());
  std::ostringstream o;
  if (options.seed) {
    config.seed = *options.seed;
    o << "seed=" << *options.seed << ';';
  }
  if (options.method) {
    config.method.method = parse_method(*options.method);
    o << "method=" << *options.method << ';';
  }
  if (options.rank && options.threshold) {
    throw ConfigError("--rank and --threshold are mutually exclusive");
  }
  if (options.rank) {
    if (*options.rank < 1) throw ConfigError("--rank must be >= 1");
    config.method.rank = *options.rank;
    o << "rank=" << *options.rank << ';';
  }
  if (options.threshold) {
    if (!(*options.threshold > 0.0)) throw ConfigError("--threshold must be positive");
    config.method.rank.reset();
    config.method.threshold = *options.threshold;
    o << "threshold=" << format_double(*options.threshold) << ';';
  }
  if (overrides) *overrides = o.str();
  return config;
}

void cmd_init(const CommandOptions& options, std::ostream& log) {
  const fs::path dir = options.out ? *options.out : fs::path("out");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'");
  }
  const fs::path config_path = dir / "config.json";
  if (fs::exists(config_path)) {
    throw IoError("refusing to overwrite existing '" + config_path.string() + "'");
  }
  {
    auto out = open_text(config_path);
    out << config_template();
  }
  const ExperimentConfig defaults = parse_config(config_template(), dir);
  const AtmosphericGrid grid = AtmosphericGrid::uniform(0.0, defaults.problem.top_km,
                                                        defaults.problem.layers);
  {
    auto out = open_text(dir / "ensemble.txt");
    write_ensemble(out, generate_ensemble(grid, defaults.problem.ensemble), grid.midpoints());
  }
  log << "wrote " << config_path.string() << " and " << (dir / "ensemble.txt").string() << '\n';
}

void cmd_simulate(const CommandOptions& options, std::ostream& log) {
  std::string overrides;
  const ExperimentConfig config = resolve_config(options, &overrides);
  const fs::path dir = prepare_out_dir(options, config);
  const ProblemContext ctx = build_context(config);
  const SeedPlan seeds = derive_seeds(config.seed);
  const Measurement m = simulate_measurement(ctx, seeds.truth, seeds.noise, config.noise_free);

  const Vector z = ctx.synthetic.grid.midpoints();
  const Vector& wl = ctx.synthetic.setup.wavelengths;
  write_layer_table(dir / "truth.csv", z, m.truth, {"density"});
  write_spectrum_csv(dir / "spectrum_noiseless.csv", wl, m.noiseless);
  write_spectrum_csv(dir / "spectrum_noisy.csv", wl, m.noisy);

  const Vector sd = ctx.prior.covariance().diagonal().cwiseSqrt();
  Matrix profile(z.size(), 3);
  profile.col(0) = ctx.prior.mean();
  profile.col(1) = ctx.prior.mean() - 1.96 * sd;
  profile.col(2) = ctx.prior.mean() + 1.96 * sd;
  write_layer_table(dir / "prior_profile.csv", z, profile, {"mean", "lower_95", "upper_95"});
  write_csv(dir / "prior_covariance.csv", state_labels(z.size(), "layer_"),
            ctx.prior.covariance());
  write_indexed(dir / "prior_singular_values.csv",
                sorted_symmetric_eigen(ctx.prior.covariance()).values, "singular_value");
  {
    auto out = open_text(dir / "cross_sections.txt");
    write_cross_sections(out, ctx.synthetic.setup, 0);
  }
  {
    auto out = open_text(dir / "ensemble.txt");
    write_ensemble(out, ctx.ensemble, z);
  }

  KeyValueFile kv;
  kv.set("command", std::string("simulate"));
  kv.set("config_hash", config_hash(config, overrides));
  record_seeds(kv, config, seeds);
  kv.set("noise_free", std::string(config.noise_free ? "true" : "false"));
  kv.set("noise_sigma", std::sqrt(ctx.noise.covariance()(0, 0)));
  kv.set("layers", static_cast<long long>(ctx.prior.dim()));
  kv.set("wavelengths", static_cast<long long>(wl.size()));
  kv.set("dof_signal_at_prior_mean", static_cast<long long>(ctx.synthetic.dof));
  kv.set("strength_scale", ctx.synthetic.strength_scale);
  kv.set("strength_adjustments", static_cast<long long>(ctx.synthetic.adjustments));
  kv.write(dir / "manifest.txt");
  log << "simulated " << wl.size() << " wavelengths, " << ctx.prior.dim() << " layers, "
      << ctx.synthetic.dof << " informative directions -> " << dir.string() << '\n';
}

void cmd_retrieve(const CommandOptions& options, std::ostream& log) {
  std::string overrides;
  const ExperimentConfig config = resolve_config(options, &overrides);
  const Vector data = load_spectrum(config);
  const fs::path dir = prepare_out_dir(options, config);
  const ProblemContext ctx = build_context(config);
  const InverseProblem problem = make_problem(ctx, data);
  const SeedPlan seeds = derive_seeds(config.seed);

  KeyValueFile kv;
  kv.set("command", std::string("retrieve"));
  kv.set("config_hash", config_hash(config, overrides));
  record_seeds(kv, config, seeds);
  kv.set("method", to_string(config.method.method));

  RetrievalReference ref = prepare_reference(problem, config.map);
  kv.set("map_converged", std::string(ref.laplace.converged ? "true" : "false"));
  kv.set("map_iterations", static_cast<long long>(ref.laplace.iterations));
  if (!ref.laplace.converged) {
    kv.set("warning", std::string("MAP did not converge; Laplace reference is approximate"));
    log << "warning: Gauss-Newton MAP did not converge\n";
  }
  if (config.method.method == Method::lis) {
    ensure_lis_jacobian(ref, problem, config.method.laplace_samples, seeds.laplace);
    kv.set("laplace_samples", static_cast<long long>(config.method.laplace_samples));
    kv.set("dof_signal", static_cast<long long>(dof_signal(ref.j_hat, 1.0)));
  }

  RunOptions run;
  run.method = config.method.method;
  run.selection = config.method.selection();
  run.sampler = config.sampler;
  run.sampler_seed = seeds.sampler;
  run.complement_seed = seeds.complement;
  const RetrievalResult result = run_retrieval(problem, ref, run);
  kv.set("rank", static_cast<long long>(result.rank));
  kv.set("chain_length", static_cast<long long>(result.chain.length()));
  kv.set("burn_in", static_cast<long long>(result.burn_in));
  kv.set("timing_file", std::string("timing.txt"));

  const Eigen::Index n = problem.state_dim();
  const Vector z = ctx.synthetic.grid.midpoints();
  write_chain(dir / "chain_full.csv", result.full_samples, state_labels(n, "layer_"));
  if (result.method != Method::full) {
    const std::string prefix = result.method == Method::lis ? "x_r" : "alpha";
    write_chain(dir / "chain_reduced.csv", result.reduced_samples,
                state_labels(result.rank, prefix));
    write_basis_file(dir / "basis.csv", result.basis);
    write_indexed(dir / "singular_values.csv", result.spectrum, "singular_value");
  }
  write_layer_table(dir / "envelope.csv", z, posterior_envelope(result.full_samples),
                    {"mean", "q025", "q975"});
  Matrix map_table(n, 2);
  map_table.col(0) = ref.laplace.map_point;
  map_table.col(1) = ref.laplace.post_cov.diagonal().cwiseSqrt();
  write_layer_table(dir / "map.csv", z, map_table, {"map", "laplace_sd"});

  std::optional<HellingerReport> hellinger;
  if (result.method != Method::full && !config.compare.reference_dir.empty() &&
      fs::exists(config.compare.reference_dir / "chain_full.csv")) {
    const ReferenceChain reference = load_reference(config.compare.reference_dir);
    hellinger = posterior_hellinger(reference.samples, result.full_samples);
    kv.set("reference_dir", config.compare.reference_dir.string());
  }
  write_diagnostics(dir, result, hellinger);
  write_timing(dir, result.ess);
  kv.write(dir / "manifest.txt");

  log << to_string(result.method) << " rank " << result.rank << ": acceptance "
      << result.chain.acceptance_rate(result.burn_in) << ", min N_eff " << result.ess.min_n_eff
      << ", t_M " << result.ess.t_m << " s, sample speed " << result.ess.min_speed << " 1/s";
  if (hellinger) log << ", Hellinger to full " << hellinger->mean;
  log << '\n';
}

void cmd_compare(const CommandOptions& options, std::ostream& log) {
  std::string overrides;
  const ExperimentConfig config = resolve_config(options, &overrides);
  const ReferenceChain reference = load_reference(config.compare.reference_dir);
  const Vector data = load_spectrum(config);
  const fs::path dir = prepare_out_dir(options, config);
  const ProblemContext ctx = build_context(config);
  const InverseProblem problem = make_problem(ctx, data);
  const SeedPlan seeds = derive_seeds(config.seed);
  require_dim("layer", problem.state_dim(), reference.samples.cols());

  RetrievalReference ref = prepare_reference(problem, config.map);
  ensure_lis_jacobian(ref, problem, config.method.laplace_samples, seeds.laplace);

  TextTable hellinger_table({"r", "method", "hellinger"});
  std::vector<std::string> per_layer_header{"r", "method"};
  for (const auto& l : state_labels(problem.state_dim(), "layer_")) per_layer_header.push_back(l);
  TextTable per_layer(per_layer_header);
  TextTable timing({"r", "method", "hellinger", "n_eff_min", "t_m_seconds", "sample_speed"});

  const Eigen::Index fig_rank = std::min<Eigen::Index>(4, problem.state_dim());
  for (Method m : config.compare.methods) {
    for (Eigen::Index r : config.compare.ranks) {
      RunOptions run;
      run.method = m;
      run.selection = RankSelection::fixed(r);
      run.sampler = config.sampler;
      run.sampler_seed = sweep_seed(seeds.sampler, m, r);
      run.complement_seed = sweep_seed(seeds.complement, m, r);
      const RetrievalResult result = run_retrieval(problem, ref, run);
      const HellingerReport h = posterior_hellinger(reference.samples, result.full_samples);
      hellinger_table.add({num(r), to_string(m), num(h.mean)});
      std::vector<std::string> row{num(r), to_string(m)};
      for (Eigen::Index i = 0; i < h.per_coordinate.size(); ++i) row.push_back(num(h.per_coordinate(i)));
      per_layer.add(row);
      timing.add({num(r), to_string(m), num(h.mean), num(result.ess.min_n_eff),
                  num(result.ess.t_m), num(result.ess.min_speed)});
      log << std::setw(7) << to_string(m) << " r=" << r << "  Hellinger " << h.mean
          << "  sample speed " << result.ess.min_speed << " 1/s\n";
    }
  }
  hellinger_table.write(dir / "hellinger.csv");
  per_layer.write(dir / "hellinger_per_layer.csv");
  timing.write(dir / "timing_comparison.csv");

  const LisBasis lis = build_lis(ref.j_hat, problem.prior(), RankSelection::fixed(fig_rank));
  const PriorBasis pri = build_prior_basis(problem.prior(), fig_rank);
  write_basis_file(dir / "lis_basis_vectors.csv", lis.phi_r);
  write_basis_file(dir / "prior_basis_vectors.csv", pri.basis);
  write_indexed(dir / "lis_singular_values.csv", lis.singular_values, "singular_value");
  write_indexed(dir / "prior_singular_values.csv", pri.singular_values, "singular_value");

  KeyValueFile kv;
  kv.set("command", std::string("compare"));
  kv.set("config_hash", config_hash(config, overrides));
  record_seeds(kv, config, seeds);
  kv.set("reference_dir", config.compare.reference_dir.string());
  kv.set("reference_samples", static_cast<long long>(reference.samples.rows()));
  kv.set("map_converged", std::string(ref.laplace.converged ? "true" : "false"));
  kv.set("dof_signal", static_cast<long long>(dof_signal(ref.j_hat, 1.0)));
  kv.set("rows", static_cast<long long>(config.compare.methods.size() * config.compare.ranks.size()));
  kv.set("timing_file", std::string("timing_comparison.csv"));
  kv.write(dir / "manifest.txt");
  if (reference.sample_speed) {
    log << "reference full-space sample speed " << *reference.sample_speed << " 1/s\n";
  }
}

void cmd_report(const CommandOptions& options, std::ostream& log) {
  const fs::path dir = options.out ? *options.out : fs::path("out");
  const fs::path manifest_path = dir / "manifest.txt";
  if (!fs::exists(manifest_path)) {
    throw IoError("'" + dir.string() + "' is not a retrieval output directory (no manifest.txt)");
  }
  const KeyValueFile manifest = KeyValueFile::read(manifest_path);
  const std::string* command = manifest.find("command");
  if (!command || *command != "retrieve") {
    throw IoError("'" + dir.string() + "' does not hold a retrieve run");
  }
  const fs::path reduced = dir / "chain_reduced.csv";
  const Matrix sampled = read_chain(fs::exists(reduced) ? reduced : dir / "chain_full.csv");

  double t_m = 0.0;
  if (fs::exists(dir / "timing.txt")) {
    const KeyValueFile timing = KeyValueFile::read(dir / "timing.txt");
    if (const std::string* v = timing.find("t_m_seconds")) t_m = std::stod(*v);
  }
  Vector n_eff(sampled.cols());
  for (Eigen::Index c = 0; c < sampled.cols(); ++c) n_eff(c) = ess(sampled.col(c));

  KeyValueFile report;
  for (const char* key : {"method", "rank", "chain_length", "burn_in", "map_converged"}) {
    if (const std::string* v = manifest.find(key)) report.set(key, *v);
  }
  report.set("samples_after_burn_in", static_cast<long long>(sampled.rows()));
  report.set("n_eff_min", n_eff.minCoeff());
  report.set("n_eff_mean", n_eff.mean());
  if (t_m > 0.0) {
    report.set("t_m_seconds", t_m);
    report.set("sample_speed_min", sample_speed(n_eff.minCoeff(), t_m));
  }
  if (fs::exists(dir / "diagnostics.txt")) {
    std::ifstream in(dir / "diagnostics.txt");
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("hellinger_mean", 0) == 0 || line.rfind("acceptance_rate", 0) == 0) {
        const auto eq = line.find('=');
        report.set(line.substr(0, eq - 1), line.substr(eq + 2));
      }
    }
  }
  report.write(dir / "report.txt");
  report.write(log);
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DimensionError*>(&e)) {
    return config_error;
  }
  if (dynamic_cast<const NumericalError*>(&e)) return numerical_error;
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e)) {
    return io_error;
  }
  if (dynamic_cast<const nlohmann::json::exception*>(&e)) return config_error;
  return numerical_error;
}

}  // namespace lisret::harness
