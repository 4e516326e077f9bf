#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "eigenpool/commands.hpp"
#include "eigenpool/errors.hpp"

using namespace eigenpool;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("eigenpool_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(EIGENPOOL_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Small simulated data set shared by the fit tests.
fs::path simulated(const std::string& name, bool raw, std::uint64_t seed = 11) {
  const fs::path dir = scratch(name);
  SimulateConfig sim;
  sim.groups = 3;
  sim.dim = 3;
  sim.n = {30};
  sim.raw = raw;
  std::ostringstream log;
  simulate_command(sim, seed, raw ? DataFormat::raw : DataFormat::ssq, dir.string(), log);
  return dir;
}

RunConfig quick_config() {
  RunConfig c;
  c.iterations = 60;
  c.thin = 3;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("apply_config") {
  RunConfig c;
  apply_config(c, {{"iterations", "500"}, {"thin", "5"}, {"variant", "nopool"}, {"eta0", "3"}, {"chains", "2"},
                   {"mh_correction", "1"}, {"seed", "77"}, {"threaded", "false"}});
  CHECK(c.iterations == 500);
  CHECK(c.thin == 5);
  CHECK(c.variant == ModelVariant::no_pooling);
  CHECK(c.priors.eta0 == 3.0);
  CHECK(c.chains == 2);
  CHECK(*c.seed == 77);
  CHECK_FALSE(c.threaded);
  CHECK_THROWS_AS(apply_config(c, {{"iteration", "5"}}), InvalidInput);
  CHECK_THROWS_AS(apply_config(c, {{"mh_correction", "2"}}), InvalidInput);
  CHECK_THROWS_AS(apply_mh_correction(c, "2"), InvalidInput);
  CHECK_THROWS_AS(apply_config(c, {{"thin", "-1"}}), InvalidInput);
  apply_mh_correction(c, "off");
  RunConfig zero_thin;
  zero_thin.thin = 0;
  CHECK_THROWS_AS(zero_thin.validate(), InvalidInput);
}

TEST_CASE("default run saves 1000 samples") {
  const RunConfig c;
  CHECK(c.iterations == 10000);
  CHECK(c.thin == 10);
  ChainControls controls;
  controls.iterations = c.iterations;
  controls.burn_in = c.burn_in;
  controls.thin = c.thin;
  long saved = 0;
  for (long it = 1; it <= controls.iterations; ++it) saved += controls.saves(it) ? 1 : 0;
  CHECK(saved == 1000);
}

TEST_CASE("chain seeds differ per chain and are stable") {
  CHECK(chain_seed(1, 0) == chain_seed(1, 0));
  CHECK(chain_seed(1, 0) != chain_seed(1, 1));
  CHECK(chain_seed(1, 0) != chain_seed(2, 0));
}

TEST_CASE("simulate writes data and truth reproducibly") {
  const fs::path a = simulated("sim_a", false, 3);
  const fs::path b = simulated("sim_b", false, 3);
  const fs::path c = simulated("sim_c", false, 4);
  CHECK(fs::exists(a / "data.csv"));
  CHECK(fs::exists(a / "truth.txt"));
  CHECK(slurp(a / "data.csv") == slurp(b / "data.csv"));
  CHECK(slurp(a / "truth.txt") == slurp(b / "truth.txt"));
  CHECK(slurp(a / "data.csv") != slurp(c / "data.csv"));
  const SsqData d = ingest_groups((a / "data.csv").string(), DataFormat::ssq);
  CHECK(d.data.size() == 3);
  CHECK(d.data[0].n == 30);
  CHECK(d.data[0].s.dim() == 3);

  const fs::path raw = simulated("sim_raw", true, 3);
  const SsqData from_raw = ingest_groups((raw / "data.csv").string(), DataFormat::raw);
  CHECK(from_raw.data.size() == 3);
  CHECK(from_raw.data[2].n == 30);

  std::ostringstream log;
  simulate_command(SimulateConfig{}, std::nullopt, DataFormat::ssq, scratch("sim_seedless").string(), log);
  CHECK(log.str().find("seed ") != std::string::npos);

  SimulateConfig bad;
  CHECK_THROWS_AS(apply_simulate_config(bad, {{"grups", "2"}}), InvalidInput);
  apply_simulate_config(bad, {{"groups", "2"}, {"dim", "3"}, {"alpha", "1,0.5"}});
  CHECK_THROWS_AS(simulate_command(bad, 1, DataFormat::ssq, scratch("sim_bad").string(), log), InvalidInput);
}

TEST_CASE("fit writes sample and summary files deterministically") {
  const fs::path data = simulated("fit_data", false) / "data.csv";
  RunConfig c = quick_config();
  c.chains = 2;
  std::ostringstream log;
  const FitResult first = fit_command(c, data.string(), DataFormat::ssq, scratch("fit_a").string(), false, log);
  REQUIRE(first.sample_files.size() == 2);
  CHECK(first.seed == 5);
  CHECK(log.str().find("seed") == std::string::npos);
  const SampleFile f = read_samples_file(first.sample_files[0]);
  CHECK(f.samples.size() == 20);
  CHECK(f.header.groups == 3);
  CHECK(f.header.p == 3);
  CHECK(slurp(first.summary_files[0]).find("posterior predictive") != std::string::npos);
  CHECK(slurp(first.sample_files[0]) != slurp(first.sample_files[1]));

  const FitResult again = fit_command(c, data.string(), DataFormat::ssq, scratch("fit_b").string(), false, log);
  c.threaded = false;
  const FitResult sequential = fit_command(c, data.string(), DataFormat::ssq, scratch("fit_c").string(), false, log);
  for (int i = 0; i < 2; ++i) {
    CHECK(slurp(first.sample_files[i]) == slurp(again.sample_files[i]));
    CHECK(slurp(first.summary_files[i]) == slurp(again.summary_files[i]));
    CHECK(slurp(first.sample_files[i]) == slurp(sequential.sample_files[i]));
    CHECK(slurp(first.summary_files[i]) == slurp(sequential.summary_files[i]));
  }

  std::ostringstream summary;
  summarize_command(first.sample_files[0], summary);
  CHECK(summary.str().find("effective sample size") != std::string::npos);

  RunConfig seedless = quick_config();
  seedless.seed.reset();
  seedless.iterations = 3;
  seedless.thin = 1;
  std::ostringstream seed_log;
  const FitResult drawn = fit_command(seedless, data.string(), DataFormat::ssq, scratch("fit_d").string(), false, seed_log);
  CHECK(seed_log.str().find("seed " + std::to_string(drawn.seed)) != std::string::npos);
}

TEST_CASE("summaries of degenerate sample sets") {
  SampleFile empty{SampleFileHeader{2, 1, ModelVariant::hierarchical, false}, {}};
  std::ostringstream out;
  CHECK_THROWS_AS(write_report(out, empty), InvalidInput);

  const fs::path data = simulated("single", false) / "data.csv";
  RunConfig c = quick_config();
  c.iterations = 1;
  c.thin = 1;
  const FitResult r = fit_command(c, data.string(), DataFormat::ssq, scratch("single_out").string(), false, out);
  std::ostringstream report;
  summarize_command(r.sample_files[0], report);
  CHECK(report.str().find("samples 1") != std::string::npos);
  CHECK(report.str().find("undefined") != std::string::npos);

  // A chain that never moves has zero variance everywhere.
  const SampleFile one = read_samples_file(r.sample_files[0]);
  SampleFile frozen{one.header, std::vector<PosteriorSample>(12, one.samples[0])};
  std::ostringstream frozen_report;
  write_report(frozen_report, frozen);
  CHECK(frozen_report.str().find("zero variance") != std::string::npos);
}

TEST_CASE("copula fit and sign-consistency count") {
  const fs::path data = simulated("copula_data", true) / "data.csv";
  RunConfig c = quick_config();
  std::ostringstream log;
  CHECK_THROWS_AS(fit_command(c, data.string(), DataFormat::ssq, scratch("copula_bad").string(), true, log),
                  InvalidInput);
  const FitResult r = fit_command(c, data.string(), DataFormat::raw, scratch("copula_out").string(), true, log);
  const SampleFile f = read_samples_file(r.sample_files[0]);
  CHECK(f.header.copula);
  REQUIRE(f.samples.size() == 20);

  int consistent = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      int pos = 0, neg = 0;
      for (int k = 0; k < 3; ++k) {
        double m = 0.0;
        for (const PosteriorSample& s : f.samples) m += s.correlation[k](i, j);
        (m > 0 ? pos : neg) += m != 0.0 ? 1 : 0;
      }
      if (pos == 3 || neg == 3) ++consistent;
    }
  }
  std::ostringstream report;
  write_report(report, f);
  CHECK(report.str().find("sign-consistent pairs " + std::to_string(consistent) + " of 3") != std::string::npos);
  CHECK(slurp(r.summary_files[0]).find("posterior predictive") == std::string::npos);
}

TEST_CASE("command-line exit codes") {
  const fs::path dir = simulated("cli", false);
  const std::string data = (dir / "data.csv").string();
  const std::string out = (dir / "out").string();
  CHECK(run_cli("fit --bogus") == 2);
  CHECK(run_cli("fit --data " + data + " --mh-correction 2") == 2);
  CHECK(run_cli("fit --data /nonexistent/data.csv --format ssq") == 2);
  CHECK(run_cli("summarize /nonexistent/samples.csv") == 2);
  CHECK(run_cli("fit --data " + data + " --format ssq --iterations 20 --thin 2 --seed 1 --out-dir " + out) == 0);
  CHECK(fs::exists(fs::path(out) / "samples.chain0.csv"));
  CHECK(run_cli("summarize " + out + "/samples.chain0.csv") == 0);
  CHECK(run_cli("simulate --seed 2 --out-dir " + (dir / "sim").string()) == 0);
  CHECK(fs::exists(dir / "sim" / "truth.txt"));
}
