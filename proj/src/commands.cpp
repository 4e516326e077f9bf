#include "eigenpool/commands.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <thread>

#include "eigenpool/diagnostics.hpp"
#include "eigenpool/errors.hpp"

namespace eigenpool {

namespace {

constexpr std::uint64_t kChainStreamBase = 0xC4A1;
constexpr std::uint64_t kPredictiveStream = 0x7072;

bool parse_bool(const std::string& text, const std::string& key) {
  if (text == "1" || text == "true" || text == "on" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "off" || text == "no") return false;
  throw InvalidInput(key + ": expected a boolean, got '" + text + "'");
}

long parse_count(const std::string& text, const std::string& key) {
  const long v = parse_long(text, key);
  if (v < 0) throw InvalidInput(key + " must be non-negative");
  return v;
}

std::string ess_text(const ScalarTrace& trace) {
  if (trace.size() < 10) return "undefined (fewer than 10 samples)";
  try {
    return format_double(effective_sample_size(trace));
  } catch (const InvalidInput&) {
    return "undefined (zero variance)";
  }
}

void write_matrix(std::ostream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
}

void write_vector(std::ostream& out, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? "," : "") << format_double(v(i));
  out << '\n';
}

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
  return out;
}

struct ChainOutput {
  std::vector<PosteriorSample> samples;
  std::vector<Vector> predictive;
};

}  // namespace

void RunConfig::validate() const {
  if (iterations < 0 || burn_in < 0) throw InvalidInput("counts must be non-negative");
  if (thin < 1) throw InvalidInput("thin must be >= 1");
  if (burn_in >= iterations) throw InvalidInput("burn_in must be smaller than iterations");
  if (chains < 1) throw InvalidInput("chains must be >= 1");
  priors.validate();
  settings.validate();
}

void apply_mh_correction(RunConfig& config, const std::string& value) {
  if (value == "off") {
    config.settings.mh_correction = false;
  } else if (value == "1") {
    config.settings.mh_correction = true;
    config.settings.correction.order = 1;
  } else if (value == "2") {
    throw InvalidInput("mh-correction order 2 is not available; use 1 or off");
  } else {
    throw InvalidInput("mh-correction must be off, 1 or 2");
  }
}

void apply_config(RunConfig& c, const std::map<std::string, std::string>& values) {
  for (const auto& [key, value] : values) {
    if (key == "iterations") c.iterations = parse_count(value, key);
    else if (key == "burn_in") c.burn_in = parse_count(value, key);
    else if (key == "thin") c.thin = parse_count(value, key);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(std::stoull(value));
    else if (key == "variant") c.variant = parse_variant(value);
    else if (key == "eta0") c.priors.eta0 = parse_double(value, key);
    else if (key == "tau0_sq") c.priors.tau0_sq = parse_double(value, key);
    else if (key == "nu0") c.priors.nu0 = parse_double(value, key);
    else if (key == "sigma0_sq") c.priors.sigma0_sq = parse_double(value, key);
    else if (key == "phi_grid") c.settings.phi_grid = static_cast<int>(parse_count(value, key));
    else if (key == "shape_grid") c.settings.shape_grid = static_cast<int>(parse_count(value, key));
    else if (key == "mh_correction") apply_mh_correction(c, value);
    else if (key == "group_pairs") {
      if (value == "single") c.settings.group_pairs = PairSchedule::single_pair;
      else if (value == "sweep") c.settings.group_pairs = PairSchedule::full_sweep;
      else throw InvalidInput("group_pairs must be single or sweep");
    } else if (key == "chains") c.chains = static_cast<int>(parse_count(value, key));
    else if (key == "threaded") c.threaded = parse_bool(value, key);
    else if (key == "predictive") c.predictive = parse_bool(value, key);
    else if (key == "predictive_sweeps") c.settings.predictive_sweeps = static_cast<int>(parse_count(value, key));
    else throw InvalidInput("unknown config key '" + key + "'");
  }
}

std::uint64_t chain_seed(std::uint64_t seed, int chain) {
  return derive_seed(seed, kChainStreamBase + static_cast<std::uint64_t>(chain));
}

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

void write_report(std::ostream& out, const SampleFile& file, const std::vector<std::string>& group_names) {
  const SampleFileHeader& h = file.header;
  const std::vector<PosteriorSample>& samples = file.samples;
  if (samples.empty()) throw InvalidInput("no samples to summarize");
  auto name = [&](int k) { return k < static_cast<int>(group_names.size()) ? group_names[k] : std::to_string(k + 1); };

  out << "samples " << samples.size() << '\n';
  out << "variant " << variant_name(h.variant) << '\n';
  out << "p " << h.p << '\n' << "K " << h.groups << "\n\n";

  const OrthonormalMatrix v_hat = point_estimate_v(samples);
  out << "## posterior point estimate of V (eigenvectors of mean V A V^T)\n";
  write_matrix(out, v_hat.matrix());

  std::vector<OrthonormalMatrix> u_hat;
  for (int k = 0; k < h.groups; ++k) {
    Vector lam = Vector::Zero(h.p);
    for (const PosteriorSample& s : samples) lam += s.lambda[k].values();
    lam /= static_cast<double>(samples.size());
    u_hat.push_back(sym_eig(SymMatrix(posterior_mean_sigma(samples, k), 1e-6)).vectors);
    out << "\n## group " << name(k) << "\nposterior mean lambda\n";
    write_vector(out, lam);
    out << "U (eigenvectors of posterior mean Sigma)\n";
    write_matrix(out, u_hat.back().matrix());
  }

  out << "\n## similarity diag(Vhat^T Uhat_k)^2 averaged over groups\n";
  write_vector(out, similarity_stat(v_hat, u_hat));
  out << "per group\n";
  for (int k = 0; k < h.groups; ++k) {
    out << name(k) << ',' << format_double(estimator_similarity(u_hat[k], v_hat)) << '\n';
  }

  ScalarTrace w_trace;
  for (const PosteriorSample& s : samples) w_trace.push_back(s.w);
  std::optional<LogAbTraces> ab;
  if (h.p >= 2) {
    try {
      ab = trace_log_ab(samples);
    } catch (const InvalidInput&) {
    }
  }

  out << "\n## effective sample size\n";
  out << "w," << ess_text(w_trace) << '\n';
  if (ab) out << "mean_log_ab," << ess_text(ab->mean) << '\n';
  for (int k = 0; k < h.groups; ++k) {
    ScalarTrace lam1;
    for (const PosteriorSample& s : samples) lam1.push_back(s.lambda[k][0]);
    out << "lambda1_" << name(k) << ',' << ess_text(lam1) << '\n';
  }
  if (h.copula && h.p >= 2) {
    for (int k = 0; k < h.groups; ++k) {
      ScalarTrace c12;
      for (const PosteriorSample& s : samples) c12.push_back(s.correlation[k](0, 1));
      out << "corr_1_2_" << name(k) << ',' << ess_text(c12) << '\n';
    }
  }

  if (ab) {
    out << "\n## log A∘B trace (iteration,mean,sd)\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
      out << samples[i].iteration << ',' << format_double(ab->mean[i]) << ',' << format_double(ab->sd[i]) << '\n';
    }
  }

  if (h.copula && h.p >= 2) {
    out << "\n## posterior mean correlations across groups (i,j,min,median,max,sign_consistent)\n";
    int consistent = 0;
    int pairs = 0;
    for (int i = 0; i < h.p; ++i) {
      for (int j = i + 1; j < h.p; ++j) {
        std::vector<double> means;
        for (int k = 0; k < h.groups; ++k) {
          double m = 0.0;
          for (const PosteriorSample& s : samples) m += s.correlation[k](i, j);
          means.push_back(m / static_cast<double>(samples.size()));
        }
        const bool all_pos = std::all_of(means.begin(), means.end(), [](double x) { return x > 0.0; });
        const bool all_neg = std::all_of(means.begin(), means.end(), [](double x) { return x < 0.0; });
        const bool same = all_pos || all_neg;
        consistent += same ? 1 : 0;
        ++pairs;
        out << i + 1 << ',' << j + 1 << ',' << format_double(*std::min_element(means.begin(), means.end())) << ','
            << format_double(empirical_quantile(means, 0.5)) << ','
            << format_double(*std::max_element(means.begin(), means.end())) << ',' << (same ? 1 : 0) << '\n';
      }
    }
    out << "sign-consistent pairs " << consistent << " of " << pairs << '\n';
  }
}

void summarize_command(const std::string& sample_path, std::ostream& out) {
  const SampleFile file = read_samples_file(sample_path);
  write_report(out, file);
}

FitResult fit_command(const RunConfig& config, const std::string& data_path, DataFormat format,
                      const std::string& out_dir, bool copula, std::ostream& log) {
  config.validate();
  FitResult result;
  result.seed = config.seed ? *config.seed : entropy_seed();
  if (!config.seed) log << "seed " << result.seed << '\n';

  SsqData ssq;
  OrdinalTable ordinal;
  std::vector<std::string> names;
  if (copula) {
    if (format != DataFormat::raw) throw InvalidInput("fit-copula needs raw observations (--format raw)");
    const RawTable raw = ingest_raw(data_path, true);
    ordinal = raw_to_ordinal(raw);
    names = raw.groups;
  } else {
    ssq = ingest_groups(data_path, format);
    validate_groups(ssq.data, 2);
    names = ssq.groups;
  }
  const int p = copula ? ordinal.dim() : ssq.data.front().s.dim();
  const int groups = copula ? ordinal.groups() : static_cast<int>(ssq.data.size());
  const SampleFileHeader header{p, groups, config.variant, copula};

  std::filesystem::create_directories(out_dir);
  std::vector<ChainOutput> outputs(config.chains);
  std::vector<std::exception_ptr> errors(config.chains);
  std::optional<Vector> observed;
  if (!copula) observed = data_similarity(ssq.data);

  auto run_one = [&](int c) {
    try {
      const std::uint64_t seed = chain_seed(result.seed, c);
      ChainControls controls;
      controls.iterations = config.iterations;
      controls.burn_in = config.burn_in;
      controls.thin = config.thin;
      controls.seed = seed;
      controls.settings = config.settings;

      const std::filesystem::path path = std::filesystem::path(out_dir) / ("samples.chain" + std::to_string(c) + ".csv");
      std::ofstream out = open_output(path);
      write_sample_header(out, header);
      ChainOutput& mine = outputs[c];
      Rng predictive_rng(derive_seed(seed, kPredictiveStream));
      const SampleSink sink = [&](const PosteriorSample& s) {
        write_sample_row(out, header, s);
        mine.samples.push_back(s);
        if (!copula && config.predictive) {
          const std::vector<GroupData> sim = posterior_predictive_groups(s, ssq.data, predictive_rng, config.settings);
          mine.predictive.push_back(data_similarity(sim));
        }
      };
      if (copula) {
        run_copula_chain(ordinal, config.priors, config.variant, controls, sink);
      } else {
        run_chain(ssq.data, config.priors, config.variant, controls, sink);
      }
      out.flush();
      if (!out) throw InvalidInput("failed writing '" + path.string() + "'");

      const std::filesystem::path summary_path =
          std::filesystem::path(out_dir) / ("summary.chain" + std::to_string(c) + ".txt");
      std::ofstream summary = open_output(summary_path);
      summary << "# eigenpool summary chain " << c << " seed " << seed << '\n';
      if (mine.samples.empty()) {
        summary << "no samples saved\n";
        return;
      }
      write_report(summary, SampleFile{header, mine.samples}, names);
      if (!mine.predictive.empty()) {
        const PredictiveSummary pred = predictive_minmax(mine.predictive, observed);
        summary << "\n## posterior predictive similarity statistic (95% intervals)\n";
        summary << "observed t\n";
        write_vector(summary, *observed);
        summary << "observed min " << format_double(*pred.observed_min) << " interval "
                << format_double(pred.min_interval.lower) << ' ' << format_double(pred.min_interval.upper)
                << " covered " << (pred.covers_min ? 1 : 0) << '\n';
        summary << "observed max " << format_double(*pred.observed_max) << " interval "
                << format_double(pred.max_interval.lower) << ' ' << format_double(pred.max_interval.upper)
                << " covered " << (pred.covers_max ? 1 : 0) << '\n';
        summary << "draws (min,max,logit min,logit max)\n";
        for (std::size_t i = 0; i < pred.min_draws.size(); ++i) {
          const double lo = std::clamp(pred.min_draws[i], 1e-15, 1.0 - 1e-15);
          const double hi = std::clamp(pred.max_draws[i], 1e-15, 1.0 - 1e-15);
          summary << format_double(pred.min_draws[i]) << ',' << format_double(pred.max_draws[i]) << ','
                  << format_double(logit(lo)) << ',' << format_double(logit(hi)) << '\n';
        }
      }
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };

  if (config.threaded) {
    std::vector<std::thread> threads;
    for (int c = 0; c < config.chains; ++c) threads.emplace_back(run_one, c);
    for (std::thread& t : threads) t.join();
  } else {
    for (int c = 0; c < config.chains; ++c) run_one(c);
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (int c = 0; c < config.chains; ++c) {
    result.sample_files.push_back((std::filesystem::path(out_dir) / ("samples.chain" + std::to_string(c) + ".csv")).string());
    result.summary_files.push_back((std::filesystem::path(out_dir) / ("summary.chain" + std::to_string(c) + ".txt")).string());
    log << "chain " << c << ": " << outputs[c].samples.size() << " samples -> " << result.sample_files.back() << '\n';
  }
  return result;
}

SyntheticSpec SimulateConfig::to_spec(std::uint64_t seed) const {
  if (dim < 2) throw InvalidInput("simulate: dim must be >= 2");
  SyntheticSpec spec;
  spec.groups = groups;
  spec.dim = dim;
  spec.n = n;
  spec.w = w;
  Vector equal(dim);
  for (int i = 0; i < dim; ++i) equal(i) = static_cast<double>(dim - 1 - i) / (dim - 1);
  spec.alpha = alpha.empty() ? equal : to_vector(alpha);
  spec.beta = beta.empty() ? equal : to_vector(beta);
  if (spec.alpha.size() != dim || spec.beta.size() != dim) throw InvalidInput("simulate: alpha/beta need p entries");
  Vector lam(dim);
  for (int i = 0; i < dim; ++i) lam(i) = dim - i;
  if (!eigenvalues.empty()) lam = to_vector(eigenvalues);
  if (lam.size() != dim) throw InvalidInput("simulate: eigenvalues need p entries");
  spec.eigenvalues = {SpectrumDiag(lam)};
  spec.seed = seed;
  spec.raw_observations = raw;
  return spec;
}

void apply_simulate_config(SimulateConfig& c, const std::map<std::string, std::string>& values) {
  for (const auto& [key, value] : values) {
    if (key == "groups") c.groups = static_cast<int>(parse_count(value, key));
    else if (key == "dim") c.dim = static_cast<int>(parse_count(value, key));
    else if (key == "n") {
      c.n.clear();
      for (double x : parse_double_list(value, key)) c.n.push_back(static_cast<int>(x));
    } else if (key == "w") c.w = parse_double(value, key);
    else if (key == "alpha") c.alpha = parse_double_list(value, key);
    else if (key == "beta") c.beta = parse_double_list(value, key);
    else if (key == "eigenvalues") c.eigenvalues = parse_double_list(value, key);
    else if (key == "raw") c.raw = parse_bool(value, key);
    else if (key == "seed") continue;
    else throw InvalidInput("unknown simulate key '" + key + "'");
  }
}

std::uint64_t simulate_command(const SimulateConfig& sim, std::optional<std::uint64_t> seed_in, DataFormat format,
                               const std::string& out_dir, std::ostream& log) {
  const std::uint64_t seed = seed_in ? *seed_in : entropy_seed();
  if (!seed_in) log << "seed " << seed << '\n';
  SimulateConfig effective = sim;
  if (format == DataFormat::raw) effective.raw = true;
  const SyntheticData data = generate_synthetic(effective.to_spec(seed));
  std::filesystem::create_directories(out_dir);

  std::vector<std::string> names;
  for (int k = 0; k < sim.groups; ++k) names.push_back("g" + std::to_string(k + 1));
  {
    std::ofstream out = open_output(std::filesystem::path(out_dir) / "data.csv");
    if (format == DataFormat::raw) {
      RawTable table;
      for (int j = 0; j < sim.dim; ++j) table.columns.push_back("y" + std::to_string(j + 1));
      table.groups = names;
      table.values = data.observations;
      for (const Matrix& y : table.values) table.observed.push_back(Mask::Constant(y.rows(), y.cols(), true));
      write_raw(out, table);
    } else {
      write_ssq(out, SsqData{names, data.groups});
    }
  }
  std::ofstream truth = open_output(std::filesystem::path(out_dir) / "truth.txt");
  truth << "# eigenpool synthetic truth seed " << seed << '\n';
  truth << "w " << format_double(data.truth.w) << "\nalpha\n";
  write_vector(truth, data.truth.alpha);
  truth << "beta\n";
  write_vector(truth, data.truth.beta);
  truth << "V\n";
  write_matrix(truth, data.truth.v.matrix());
  for (int k = 0; k < sim.groups; ++k) {
    truth << "group " << names[k] << "\nlambda\n";
    write_vector(truth, data.truth.lambda[k].values());
    truth << "U\n";
    write_matrix(truth, data.truth.u[k].matrix());
  }
  log << "wrote " << (std::filesystem::path(out_dir) / "data.csv").string() << " and truth.txt\n";
  return seed;
}

}  // namespace eigenpool
