//
// Copyright 2026 The dpchi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPCHI_TOOLS_CLI_H_
#define DPCHI_TOOLS_CLI_H_

// Command-line front end. Decisions and experiment CSV go to `out`; help,
// diagnostics and progress go to `err`.
//
// Exit status: 0 on success (whatever the decision), 1 on a usage error, 2 on
// a data or domain error.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpchi/errors.h"
#include "dpchi/gof.h"
#include "dpchi/gwas.h"
#include "dpchi/harness.h"
#include "dpchi/histogram.h"
#include "dpchi/io.h"
#include "dpchi/minchi.h"
#include "dpchi/rng.h"

namespace dpchi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// A flag value that parses but makes no sense; reported as a usage error.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses "0.5,1/6,1/6,1/6". Entries may be decimals or a/b fractions.
inline std::vector<double> ParseRealList(const std::string& text,
                                         const std::string& flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string_view field = internal::Trim(item);
    try {
      const auto slash = field.find('/');
      size_t used = 0;
      double v;
      if (slash == std::string_view::npos) {
        v = std::stod(std::string(field), &used);
        if (used != field.size()) throw std::invalid_argument("trailing");
      } else {
        const std::string num(field.substr(0, slash));
        const std::string den(field.substr(slash + 1));
        size_t used_den = 0;
        const double a = std::stod(num, &used);
        const double b = std::stod(den, &used_den);
        if (used != num.size() || used_den != den.size() || b == 0.0)
          throw std::invalid_argument("fraction");
        v = a / b;
      }
      values.push_back(v);
    } catch (const std::exception&) {
      throw UsageError(flag + ": cannot parse '" + std::string(field) +
                       "' as a number");
    }
  }
  if (values.empty()) throw UsageError(flag + " is empty");
  return values;
}

// Null vectors typed with a few decimals rarely sum to exactly 1. Within
// 1e-3 the vector is rescaled; further away it is rejected.
inline std::vector<double> NormalizeNull(std::vector<double> p) {
  double sum = 0.0;
  for (double v : p) {
    internal::Require(v > 0.0 && std::isfinite(v),
                      "--null entries must be positive");
    sum += v;
  }
  internal::Require(std::fabs(sum - 1.0) <= 1e-3,
                    "--null must sum to 1 (sum = " + std::to_string(sum) + ")");
  for (double& v : p) v /= sum;
  return p;
}

inline std::vector<int64_t> ParseGrid(const std::string& text) {
  std::vector<int64_t> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string_view field = internal::Trim(item);
    int64_t v = 0;
    const auto [ptr, ec] =
        std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() ||
        ptr != field.data() + field.size() || v <= 0)
      throw UsageError("--n-grid: '" + std::string(field) +
                       "' is not a positive integer");
    grid.push_back(v);
  }
  if (grid.empty()) throw UsageError("--n-grid is empty");
  return grid;
}

inline std::string FormatDecision(const TestReport& report, int df_or_m) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%d",
                DecisionName(report.decision), report.statistic.value,
                report.threshold, df_or_m);
  return buf;
}

struct CommonFlags {
  std::optional<double> rho;
  std::optional<double> epsilon;
  double alpha = 0.05;
  std::string stat = "proj";
  int mc_samples = 59;
  uint64_t seed = 0;
  std::optional<double> noise_variance;
  bool frozen_theta = false;
};

namespace internal_cli {

inline const CLI::Validator kOpenUnit(
    [](std::string& s) -> std::string {
      try {
        const double v = std::stod(s);
        if (v > 0.0 && v < 1.0) return {};
      } catch (const std::exception&) {
      }
      return "value must lie in the open interval (0,1), got " + s;
    },
    "(0,1)");

inline const CLI::Validator kPositiveReal(
    [](std::string& s) -> std::string {
      try {
        const double v = std::stod(s);
        if (v > 0.0 && std::isfinite(v)) return {};
      } catch (const std::exception&) {
      }
      return "value must be positive, got " + s;
    },
    "POSITIVE");

inline void AddPrivacyFlags(CLI::App* app, CommonFlags& f) {
  auto* rho = app->add_option("--rho", f.rho,
                              "zCDP budget; selects the Gaussian-noise test")
                  ->check(kPositiveReal);
  auto* eps = app->add_option("--epsilon", f.epsilon,
                              "pure-DP budget; selects the Monte Carlo test")
                  ->check(kPositiveReal);
  rho->excludes(eps);
  app->add_option("--alpha", f.alpha, "significance level")
      ->capture_default_str()
      ->check(kOpenUnit);
  app->add_option("--stat", f.stat, "statistic: proj or unproj")
      ->capture_default_str()
      ->check(CLI::IsMember({"proj", "unproj"}));
  app->add_option("--seed", f.seed, "master seed")->capture_default_str();
  app->add_option("--mc-samples", f.mc_samples,
                  "Monte Carlo replicates (with --epsilon)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--noise-variance", f.noise_variance,
                  "per-cell noise variance assumed by the Monte Carlo "
                  "statistic (default 8/epsilon^2)")
      ->check(kPositiveReal);
}

inline StatisticKind KindOf(const CommonFlags& f) {
  return f.stat == "unproj" ? StatisticKind::kUnprojected
                            : StatisticKind::kProjected;
}

inline McOptions McOptionsOf(const CommonFlags& f) {
  McOptions options;
  options.samples = f.mc_samples;
  options.assumed_noise_variance = f.noise_variance;
  options.freeze_theta = f.frozen_theta;
  return options;
}

inline void RequireBudget(const CommonFlags& f) {
  if (!f.rho && !f.epsilon)
    throw UsageError("one of --rho or --epsilon is required");
}

// df for asymptotic tests, m for Monte Carlo tests.
inline int DfOrM(const TestReport& report) {
  return report.mc_samples_used ? *report.mc_samples_used
                                : report.statistic.df;
}

}  // namespace internal_cli

inline int RunCli(int argc, const char* const* argv, std::ostream& out,
                  std::ostream& err) {
  using internal_cli::KindOf;
  using internal_cli::McOptionsOf;

  CLI::App app{"Differentially private chi-square hypothesis tests", "dpchi"};
  app.require_subcommand(1);

  CommonFlags gof_flags;
  std::string null_text;
  std::string gof_path;
  CLI::App* gof = app.add_subcommand("test-gof", "goodness of fit on a histogram");
  gof->add_option("--null", null_text,
                  "null probabilities, comma separated (fractions allowed)")
      ->required();
  internal_cli::AddPrivacyFlags(gof, gof_flags);
  gof->add_option("histogram", gof_path, "one count per line")->required();

  CommonFlags ind_flags;
  std::string ind_path;
  CLI::App* ind = app.add_subcommand("test-indep",
                                     "independence of rows and columns");
  internal_cli::AddPrivacyFlags(ind, ind_flags);
  ind->add_flag("--mc-frozen-theta", ind_flags.frozen_theta,
                "Monte Carlo replicates reuse the observed estimate");
  ind->add_option("table", ind_path, "comma-separated count grid")->required();

  CommonFlags gwas_flags;
  std::string gwas_path;
  std::string gwas_method = "proj";
  CLI::App* gwas = app.add_subcommand(
      "test-gwas", "case/control association on a 3x2 genotype table");
  internal_cli::AddPrivacyFlags(gwas, gwas_flags);
  gwas->add_option("--method", gwas_method,
                   "proj: noisy-table minimum chi-square; output-pert: "
                   "noisy Pearson statistic (needs --rho)")
      ->capture_default_str()
      ->check(CLI::IsMember({"proj", "output-pert"}));
  gwas->add_flag("--mc-frozen-theta", gwas_flags.frozen_theta,
                 "Monte Carlo replicates reuse the observed estimate");
  gwas->add_option("table", gwas_path, "3x2 count grid, columns case,control")
      ->required();

  std::string preset;
  std::string test_name;
  std::string sim_stat;
  std::string sim_null;
  std::string sim_rows;
  std::string sim_cols;
  std::string sim_offset;
  std::string n_grid;
  std::string out_path;
  std::optional<int> trials;
  std::optional<double> sim_rho;
  std::optional<double> sim_eps;
  std::optional<double> sim_alpha;
  std::optional<int> sim_mc;
  std::optional<double> sim_noise_var;
  uint64_t sim_seed = 0;
  int workers = 1;
  bool sim_frozen = false;
  CLI::App* sim = app.add_subcommand("simulate",
                                     "Type I error / power sweep to CSV");
  std::string preset_names;
  for (const auto& [name, cfg] : Presets()) {
    preset_names += (preset_names.empty() ? "" : ", ") + name;
  }
  sim->add_option("--preset", preset, "experiment setup: " + preset_names);
  sim->add_option("--test", test_name,
                  "zcdp-gof, mc-gof, zcdp-indep, mc-indep, gwas-output-pert "
                  "or gwas-proj (overrides the preset)");
  sim->add_option("--stat", sim_stat,
                  "proj, unproj or classical (default proj)")
      ->check(CLI::IsMember({"proj", "unproj", "classical"}));
  sim->add_option("--null", sim_null, "goodness-of-fit null probabilities");
  sim->add_option("--row-marginal", sim_rows, "independence null rows");
  sim->add_option("--col-marginal", sim_cols, "independence null columns");
  sim->add_option("--offset", sim_offset,
                  "alternative offset added to the null cells");
  sim->add_option("--n-grid", n_grid, "comma-separated sample sizes");
  sim->add_option("--trials", trials, "trials per grid point")
      ->check(CLI::PositiveNumber);
  auto* sim_rho_opt = sim->add_option("--rho", sim_rho, "zCDP budget (0.001)")
                          ->check(internal_cli::kPositiveReal);
  auto* sim_eps_opt =
      sim->add_option("--epsilon", sim_eps, "pure-DP budget (0.0447)")
          ->check(internal_cli::kPositiveReal);
  sim_rho_opt->excludes(sim_eps_opt);
  sim->add_option("--alpha", sim_alpha, "significance level (0.05)")
      ->check(internal_cli::kOpenUnit);
  sim->add_option("--mc-samples", sim_mc, "Monte Carlo replicates (59)")
      ->check(CLI::PositiveNumber);
  sim->add_option("--noise-variance", sim_noise_var,
                  "variance assumed by Monte Carlo statistics")
      ->check(internal_cli::kPositiveReal);
  sim->add_flag("--mc-frozen-theta", sim_frozen,
                "Monte Carlo minimum chi-square replicates reuse theta_hat");
  sim->add_option("--seed", sim_seed, "master seed")->capture_default_str();
  sim->add_option("--workers", workers, "worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sim->add_option("--out", out_path, "CSV destination (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gof->parsed()) {
      internal_cli::RequireBudget(gof_flags);
      std::vector<double> p0 = ParseRealList(null_text, "--null");
      const Histogram h = ReadHistogram(gof_path);
      p0 = NormalizeNull(std::move(p0));
      RngStream rng(gof_flags.seed, 0);
      TestReport report;
      if (gof_flags.rho) {
        report = ZcdpGofTest(h, *gof_flags.rho, gof_flags.alpha, p0,
                             KindOf(gof_flags), rng);
      } else {
        report = DpMcGofTest(h, *gof_flags.epsilon, gof_flags.alpha, p0,
                             KindOf(gof_flags), McOptionsOf(gof_flags), rng);
      }
      out << FormatDecision(report, internal_cli::DfOrM(report)) << "\n";
      return kExitOk;
    }

    if (ind->parsed() || gwas->parsed()) {
      const bool is_gwas = gwas->parsed();
      const CommonFlags& f = is_gwas ? gwas_flags : ind_flags;
      internal_cli::RequireBudget(f);
      if (is_gwas && gwas_method == "output-pert" && !f.rho)
        throw UsageError("--method output-pert needs --rho");
      const ContingencyTable table = ReadTable(is_gwas ? gwas_path : ind_path);
      if (is_gwas) CheckEvenSplit(table);
      RngStream rng(f.seed, 0);
      TestReport report;
      if (is_gwas && gwas_method == "output-pert") {
        report = OutputPerturbationTest(table, *f.rho, f.alpha, rng);
      } else {
        internal::Require(table.rows >= 2 && table.cols >= 2,
                          "independence needs at least a 2x2 table");
        const ParametricModel model = IndependenceModel(table.rows, table.cols);
        if (f.rho) {
          report = ZcdpMinChi2Test(table.Flatten(), *f.rho, f.alpha, model,
                                   KindOf(f), rng);
        } else {
          report = DpMcMinTest(table.Flatten(), *f.epsilon, f.alpha, model,
                               KindOf(f), McOptionsOf(f), rng);
        }
        if (!report.converged)
          err << "warning: minimization did not converge\n";
      }
      out << FormatDecision(report, internal_cli::DfOrM(report)) << "\n";
      return kExitOk;
    }

    // simulate
    ExperimentConfig cfg;
    if (!preset.empty()) {
      const auto presets = Presets();
      const auto it = presets.find(preset);
      if (it == presets.end())
        throw UsageError("unknown preset '" + preset + "'; known: " +
                         preset_names);
      cfg = it->second;
    } else if (test_name.empty()) {
      throw UsageError("simulate needs --preset or --test");
    }
    if (!test_name.empty()) {
      const auto id = ParseTestId(test_name);
      if (!id) throw UsageError("unknown test '" + test_name + "'");
      cfg.test_id = *id;
    }
    if (!sim_stat.empty()) {
      cfg.kind = sim_stat == "classical" ? ArmKind::kNonPrivateClassical
                 : sim_stat == "unproj"  ? ArmKind::kUnprojected
                                         : ArmKind::kProjected;
    }
    if (!sim_null.empty()) cfg.null_p = NormalizeNull(ParseRealList(sim_null, "--null"));
    if (!sim_rows.empty())
      cfg.row_marginal = NormalizeNull(ParseRealList(sim_rows, "--row-marginal"));
    if (!sim_cols.empty())
      cfg.col_marginal = NormalizeNull(ParseRealList(sim_cols, "--col-marginal"));
    if (!sim_offset.empty()) cfg.alternative_offset = ParseRealList(sim_offset, "--offset");
    if (!n_grid.empty()) cfg.n_grid = ParseGrid(n_grid);
    if (trials) cfg.trials = *trials;
    if (sim_rho) cfg.rho = *sim_rho;
    if (sim_eps) cfg.epsilon = *sim_eps;
    if (sim_alpha) cfg.alpha = *sim_alpha;
    if (sim_mc) cfg.mc_samples = *sim_mc;
    if (sim_noise_var) cfg.noise_variance = *sim_noise_var;
    if (sim_frozen) cfg.freeze_theta = true;
    cfg.master_seed = sim_seed;
    cfg.workers = workers;

    const auto rows = RunExperiment(cfg, [&](const ExperimentRow& row) {
      err << TestIdName(cfg.test_id) << " n=" << row.n
          << " rate=" << row.rate << "\n";
    });
    if (out_path.empty()) {
      out << FormatCsv(rows);
    } else {
      EmitCsv(rows, out_path);
    }
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace dpchi::cli

#endif  // DPCHI_TOOLS_CLI_H_
