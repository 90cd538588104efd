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

#ifndef DPCHI_HARNESS_H_
#define DPCHI_HARNESS_H_

// Type I error and power sweeps. Trial t at grid index i draws its data and
// noise from RngStream(master_seed, (i << 32) | t), so results do not depend
// on the number of workers or on the order in which trials run.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dpchi/covariance.h"
#include "dpchi/errors.h"
#include "dpchi/gof.h"
#include "dpchi/gwas.h"
#include "dpchi/histogram.h"
#include "dpchi/mechanisms.h"
#include "dpchi/minchi.h"
#include "dpchi/rng.h"
#include "dpchi/sampling.h"
#include "dpchi/specfun.h"

namespace dpchi {

enum class TestId {
  kZcdpGof,
  kMcGof,
  kZcdpIndep,
  kMcIndep,
  kGwasOutputPert,
  kGwasProj,
};

enum class ArmKind { kProjected, kUnprojected, kNonPrivateClassical };

inline const char* TestIdName(TestId id) {
  switch (id) {
    case TestId::kZcdpGof:
      return "zcdp-gof";
    case TestId::kMcGof:
      return "mc-gof";
    case TestId::kZcdpIndep:
      return "zcdp-indep";
    case TestId::kMcIndep:
      return "mc-indep";
    case TestId::kGwasOutputPert:
      return "gwas-output-pert";
    case TestId::kGwasProj:
      return "gwas-proj";
  }
  return "?";
}

inline std::optional<TestId> ParseTestId(const std::string& name) {
  for (TestId id : {TestId::kZcdpGof, TestId::kMcGof, TestId::kZcdpIndep,
                    TestId::kMcIndep, TestId::kGwasOutputPert,
                    TestId::kGwasProj}) {
    if (name == TestIdName(id)) return id;
  }
  return std::nullopt;
}

struct ExperimentConfig {
  TestId test_id = TestId::kZcdpGof;
  ArmKind kind = ArmKind::kProjected;
  // Goodness of fit: the null vector p0.
  std::vector<double> null_p;
  // Independence and GWAS: row and column marginals of the null; the cell
  // probabilities are their outer product, row-major.
  std::vector<double> row_marginal;
  std::vector<double> col_marginal;
  // Added to the null cell probabilities; empty means the null is true.
  std::vector<double> alternative_offset;
  std::vector<int64_t> n_grid;
  int trials = 1000;
  double alpha = 0.05;
  // zCDP budget for the Gaussian tests, pure-DP budget for the MC tests.
  double rho = 0.001;
  double epsilon = std::sqrt(2.0 * 0.001);
  // MC tests: per-cell variance assumed by the statistic.
  std::optional<double> noise_variance;
  int mc_samples = 59;
  bool freeze_theta = false;
  uint64_t master_seed = 0;
  int workers = 1;
};

struct ExperimentRow {
  int64_t n = 0;
  int trials = 0;
  int rejections = 0;
  int inconclusive = 0;
  int fail_to_reject = 0;
  double rate = 0.0;
  double se = 0.0;
  std::optional<double> analytic_power;
};

namespace internal {

inline bool IsGof(TestId id) {
  return id == TestId::kZcdpGof || id == TestId::kMcGof;
}

inline bool IsGwas(TestId id) {
  return id == TestId::kGwasOutputPert || id == TestId::kGwasProj;
}

inline std::vector<double> OuterProduct(std::span<const double> rows,
                                        std::span<const double> cols) {
  std::vector<double> p;
  p.reserve(rows.size() * cols.size());
  for (double a : rows)
    for (double b : cols) p.push_back(a * b);
  return p;
}

}  // namespace internal

// Null cell probabilities of a config.
inline std::vector<double> NullProbabilities(const ExperimentConfig& cfg) {
  if (internal::IsGof(cfg.test_id)) return cfg.null_p;
  return internal::OuterProduct(cfg.row_marginal, cfg.col_marginal);
}

// Cell probabilities the data are drawn from: null plus offset.
inline std::vector<double> SamplingProbabilities(const ExperimentConfig& cfg) {
  std::vector<double> p = NullProbabilities(cfg);
  if (!cfg.alternative_offset.empty()) {
    for (size_t i = 0; i < p.size(); ++i) p[i] += cfg.alternative_offset[i];
  }
  return p;
}

inline void ValidateConfig(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (cfg.n_grid.empty()) fail("n grid is empty");
  for (int64_t n : cfg.n_grid)
    if (n <= 0) fail("n grid entries must be positive");
  if (cfg.trials <= 0) fail("trials must be positive");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) fail("alpha must lie in (0,1)");
  if (cfg.workers <= 0) fail("workers must be positive");
  if (cfg.n_grid.size() > 0xffffffffu || cfg.trials < 0)
    fail("grid too large for stream ids");

  const bool mc = cfg.test_id == TestId::kMcGof || cfg.test_id == TestId::kMcIndep;
  if (cfg.kind != ArmKind::kNonPrivateClassical) {
    if (mc) {
      if (!(cfg.epsilon > 0.0 && std::isfinite(cfg.epsilon)))
        fail("epsilon must be positive");
      if (cfg.noise_variance && !(*cfg.noise_variance > 0.0))
        fail("noise variance must be positive");
      if (cfg.mc_samples < MinimumMcSamples(cfg.alpha))
        fail("Monte Carlo tests need at least " +
             std::to_string(MinimumMcSamples(cfg.alpha)) + " samples");
    } else if (!(cfg.rho > 0.0 && std::isfinite(cfg.rho))) {
      fail("rho must be positive");
    }
  }

  if (internal::IsGof(cfg.test_id)) {
    if (cfg.null_p.size() < 2) fail("goodness of fit needs a null vector");
    for (double v : cfg.null_p)
      if (!(v > 0.0)) fail("null probabilities must be positive");
  } else {
    if (cfg.row_marginal.size() < 2 || cfg.col_marginal.size() < 2)
      fail("independence needs row and column marginals of length >= 2");
    if (internal::IsGwas(cfg.test_id) &&
        (cfg.row_marginal.size() != 3 || cfg.col_marginal.size() != 2))
      fail("GWAS experiments use 3x2 tables");
  }
  const std::vector<double> null_p = NullProbabilities(cfg);
  double null_sum = 0.0;
  for (double v : null_p) null_sum += v;
  if (std::fabs(null_sum - 1.0) > 1e-12) fail("null probabilities must sum to 1");
  if (!cfg.alternative_offset.empty() &&
      cfg.alternative_offset.size() != null_p.size())
    fail("alternative offset has " +
         std::to_string(cfg.alternative_offset.size()) + " entries, expected " +
         std::to_string(null_p.size()));
  const std::vector<double> p = SamplingProbabilities(cfg);
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) fail("null + offset leaves [0,1]");
    sum += v;
  }
  if (std::fabs(sum - 1.0) > 1e-12) fail("null + offset must sum to 1");
  if (internal::IsGwas(cfg.test_id)) {
    for (int64_t n : cfg.n_grid)
      if (n % 2 != 0) fail("GWAS experiments need even n");
  }
}

// Large-sample power of the zCDP goodness-of-fit test against p1:
// 1 - F_{df, lambda}(chi^2_{df, 1-alpha}) with lambda = D' (Sigma(p0) +
// I / (n rho))^-1 D and D = sqrt(n) (p1 - p0).
inline double AnalyticPower(std::span<const double> p0,
                            std::span<const double> p1, int64_t n, double rho,
                            double alpha, StatisticKind kind) {
  internal::CheckNull(p0);
  internal::CheckAlpha(alpha);
  internal::RequireShape(p0.size() == p1.size(),
                         "p0 and p1 differ in length");
  internal::Require(n > 0, "n must be positive");
  internal::Require(rho > 0.0, "rho must be positive");
  const double root_n = std::sqrt(static_cast<double>(n));
  std::vector<double> delta(p0.size());
  double delta_sum = 0.0;
  for (size_t i = 0; i < p0.size(); ++i) {
    delta[i] = root_n * (p1[i] - p0[i]);
    delta_sum += p1[i] - p0[i];
  }
  internal::Require(std::fabs(delta_sum) <= 1e-9,
                    "alternative must keep total probability 1");
  const double s = 1.0 / (static_cast<double>(n) * rho);
  const double lambda = PrivateCovarianceInverse(p0, s).QuadraticForm(delta);
  const int d = static_cast<int>(p0.size());
  const int df = kind == StatisticKind::kProjected ? d - 1 : d;
  const double threshold = Chi2Quantile(df, 1.0 - alpha);
  return Chi2Survival(ChiSquareSpec(df, std::max(lambda, 0.0)), threshold);
}

namespace internal {

inline bool HasZeroMargin(const ContingencyTable& t) {
  for (int i = 0; i < t.rows; ++i)
    if (t.RowSum(i) == 0) return true;
  for (int j = 0; j < t.cols; ++j)
    if (t.ColSum(j) == 0) return true;
  return false;
}

// n/2 draws from each column's conditional distribution.
inline ContingencyTable SampleCaseControl(int64_t n, std::span<const double> p,
                                          RngStream& rng) {
  constexpr int kRows = 3;
  constexpr int kCols = 2;
  ContingencyTable table(kRows, kCols, std::vector<int64_t>(kRows * kCols, 0));
  for (int j = 0; j < kCols; ++j) {
    std::vector<double> column(kRows);
    double mass = 0.0;
    for (int i = 0; i < kRows; ++i) mass += p[i * kCols + j];
    for (int i = 0; i < kRows; ++i) column[i] = p[i * kCols + j] / mass;
    // Renormalize away the rounding of the division.
    double sum = 0.0;
    for (double v : column) sum += v;
    for (double& v : column) v /= sum;
    const Histogram h = SampleMultinomial(n / 2, column, rng);
    for (int i = 0; i < kRows; ++i) table.counts[i * kCols + j] = h.counts[i];
  }
  return table;
}

inline StatisticKind ToStatisticKind(ArmKind kind) {
  return kind == ArmKind::kUnprojected ? StatisticKind::kUnprojected
                                       : StatisticKind::kProjected;
}

// Per-n state shared by all trials at that n.
struct GridPoint {
  int64_t n = 0;
  double gwas_sigma = 0.0;
  double gwas_threshold = 0.0;
};

class TrialRunner {
 public:
  explicit TrialRunner(const ExperimentConfig& cfg)
      : cfg_(cfg),
        null_p_(NullProbabilities(cfg)),
        sampling_p_(SamplingProbabilities(cfg)) {
    if (!IsGof(cfg.test_id)) {
      model_ = IndependenceModel(static_cast<int>(cfg.row_marginal.size()),
                                 static_cast<int>(cfg.col_marginal.size()));
    }
  }

  Decision Run(const GridPoint& point, RngStream& rng) const {
    const int64_t n = point.n;
    if (IsGwas(cfg_.test_id)) {
      const ContingencyTable table = SampleCaseControl(n, sampling_p_, rng);
      return RunTable(table, point, rng);
    }
    const Histogram h = SampleMultinomial(n, sampling_p_, rng);
    if (IsGof(cfg_.test_id)) return RunGof(h, rng);
    const ContingencyTable table(static_cast<int>(cfg_.row_marginal.size()),
                                 static_cast<int>(cfg_.col_marginal.size()),
                                 h.counts);
    return RunTable(table, point, rng);
  }

 private:
  Decision RunGof(const Histogram& h, RngStream& rng) const {
    const StatisticKind kind = ToStatisticKind(cfg_.kind);
    if (cfg_.kind == ArmKind::kNonPrivateClassical)
      return ClassicalGofTest(h, null_p_, cfg_.alpha).decision;
    if (cfg_.test_id == TestId::kZcdpGof)
      return ZcdpGofTest(h, cfg_.rho, cfg_.alpha, null_p_, kind, rng).decision;
    return DpMcGofTest(h, cfg_.epsilon, cfg_.alpha, null_p_, kind,
                       McOptionsOf(), rng)
        .decision;
  }

  Decision RunTable(const ContingencyTable& table, const GridPoint& point,
                    RngStream& rng) const {
    if (cfg_.kind == ArmKind::kNonPrivateClassical) {
      if (HasZeroMargin(table)) return Decision::kInconclusive;
      const double q = PearsonStatistic(table);
      const int df = (table.rows - 1) * (table.cols - 1);
      return q > Chi2Quantile(df, 1.0 - cfg_.alpha) ? Decision::kReject
                                                    : Decision::kFailToReject;
    }
    const StatisticKind kind = ToStatisticKind(cfg_.kind);
    switch (cfg_.test_id) {
      case TestId::kGwasOutputPert:
        if (HasZeroMargin(table)) return Decision::kInconclusive;
        return OutputPerturbationDecide(table, point.gwas_sigma,
                                        point.gwas_threshold, cfg_.alpha, rng)
            .decision;
      case TestId::kMcIndep:
        return DpMcMinTest(table.Flatten(), cfg_.epsilon, cfg_.alpha, model_,
                           kind, McOptionsOf(), rng)
            .decision;
      default:
        return ZcdpMinChi2Test(table.Flatten(), cfg_.rho, cfg_.alpha, model_,
                               kind, rng)
            .decision;
    }
  }

  McOptions McOptionsOf() const {
    McOptions options;
    options.samples = cfg_.mc_samples;
    options.assumed_noise_variance = cfg_.noise_variance;
    options.freeze_theta = cfg_.freeze_theta;
    return options;
  }

  const ExperimentConfig& cfg_;
  std::vector<double> null_p_;
  std::vector<double> sampling_p_;
  ParametricModel model_;
};

inline uint64_t TrialStreamId(size_t n_index, int trial) {
  return (static_cast<uint64_t>(n_index) << 32) | static_cast<uint32_t>(trial);
}

}  // namespace internal

// Runs every trial at every grid n. `on_row`, if set, is called as each row
// completes (the CLI uses it for progress on standard error).
inline std::vector<ExperimentRow> RunExperiment(
    const ExperimentConfig& cfg,
    const std::function<void(const ExperimentRow&)>& on_row = {}) {
  ValidateConfig(cfg);
  const internal::TrialRunner runner(cfg);
  const bool analytic = cfg.test_id == TestId::kZcdpGof &&
                        cfg.kind != ArmKind::kNonPrivateClassical;

  std::vector<ExperimentRow> rows;
  for (size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    internal::GridPoint point;
    point.n = cfg.n_grid[ni];
    if (cfg.test_id == TestId::kGwasOutputPert &&
        cfg.kind != ArmKind::kNonPrivateClassical) {
      point.gwas_sigma = std::sqrt(OutputPerturbationVariance(point.n, cfg.rho));
      point.gwas_threshold =
          GaussMixtureCriticalValue(2, point.gwas_sigma, cfg.alpha);
    }

    std::vector<Decision> decisions(cfg.trials);
    const int workers = std::min(cfg.workers, cfg.trials);
    std::vector<std::exception_ptr> errors(workers);
    auto work = [&](int w) {
      try {
        for (int t = w; t < cfg.trials; t += workers) {
          RngStream rng(cfg.master_seed, internal::TrialStreamId(ni, t));
          decisions[t] = runner.Run(point, rng);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    };
    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::thread> threads;
      threads.reserve(workers);
      for (int w = 0; w < workers; ++w) threads.emplace_back(work, w);
      for (auto& th : threads) th.join();
    }
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);

    ExperimentRow row;
    row.n = point.n;
    row.trials = cfg.trials;
    for (Decision d : decisions) {
      switch (d) {
        case Decision::kReject:
          ++row.rejections;
          break;
        case Decision::kInconclusive:
          ++row.inconclusive;
          break;
        case Decision::kFailToReject:
          ++row.fail_to_reject;
          break;
      }
    }
    row.rate = static_cast<double>(row.rejections) / row.trials;
    row.se = std::sqrt(row.rate * (1.0 - row.rate) / row.trials);
    if (analytic) {
      row.analytic_power =
          AnalyticPower(cfg.null_p, SamplingProbabilities(cfg), point.n,
                        cfg.rho, cfg.alpha, internal::ToStatisticKind(cfg.kind));
    }
    if (on_row) on_row(row);
    rows.push_back(row);
  }
  return rows;
}

inline constexpr char kCsvHeader[] =
    "n,trials,rejections,inconclusive,rate,se,analytic_power";

inline std::string FormatCsv(const std::vector<ExperimentRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  char buf[64];
  for (const ExperimentRow& row : rows) {
    out += std::to_string(row.n) + "," + std::to_string(row.trials) + "," +
           std::to_string(row.rejections) + "," +
           std::to_string(row.inconclusive) + ",";
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,", row.rate, row.se);
    out += buf;
    if (row.analytic_power) {
      std::snprintf(buf, sizeof(buf), "%.6f", *row.analytic_power);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

inline void EmitCsv(const std::vector<ExperimentRow>& rows,
                    const std::string& path) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot open " + path + " for writing");
  file << FormatCsv(rows);
  file.flush();
  if (!file) throw Error("failed writing " + path);
}

// Reference experiment setups, keyed by preset name. Each preset fixes the
// null, the alternative, the budget and a grid over which the rate moves.
inline std::map<std::string, ExperimentConfig> Presets() {
  const std::vector<double> gof_null = {1.0 / 2, 1.0 / 6, 1.0 / 6, 1.0 / 6};
  const std::vector<double> gof_offset = {0.01, -0.01 / 3, -0.01 / 3,
                                          -0.01 / 3};
  const std::vector<double> ind_rows = {2.0 / 3, 1.0 / 3};
  const std::vector<double> ind_cols = {0.5, 0.5};
  const std::vector<double> ind_offset = {0.01, 0.0, -0.01, 0.0};
  const std::vector<double> gwas_rows = {5.0 / 12, 7.0 / 24, 7.0 / 24};
  const std::vector<double> gwas_cols = {0.5, 0.5};
  // Columns (1/3,1/3,1/3) for cases and (1/2,1/4,1/4) for controls.
  const std::vector<double> gwas_offset = {-1.0 / 24, 1.0 / 24, 1.0 / 48,
                                           -1.0 / 48, 1.0 / 48, -1.0 / 48};

  std::map<std::string, ExperimentConfig> presets;
  ExperimentConfig base;
  base.alpha = 0.05;
  base.rho = 0.001;
  base.epsilon = std::sqrt(2.0 * 0.001);
  base.mc_samples = 59;

  ExperimentConfig gof = base;
  gof.test_id = TestId::kZcdpGof;
  gof.null_p = gof_null;

  ExperimentConfig c = gof;
  c.trials = 10000;
  c.n_grid = {10000, 100000};
  presets["gof-type1-paper"] = c;

  c = gof;
  c.alternative_offset = gof_offset;
  c.trials = 5000;
  c.n_grid = {2000, 5000, 10000, 20000, 40000, 60000, 80000, 100000, 150000};
  presets["gof-power-paper"] = c;

  c = gof;
  c.test_id = TestId::kMcGof;
  c.trials = 10000;
  c.n_grid = {10000, 100000};
  presets["mc-gof-type1-paper"] = c;

  c.alternative_offset = gof_offset;
  c.trials = 5000;
  c.n_grid = {5000, 10000, 20000, 40000, 80000, 150000};
  presets["mc-gof-power-paper"] = c;

  ExperimentConfig ind = base;
  ind.test_id = TestId::kZcdpIndep;
  ind.row_marginal = ind_rows;
  ind.col_marginal = ind_cols;

  c = ind;
  c.trials = 10000;
  c.n_grid = {10000, 100000};
  presets["indep-type1-paper"] = c;

  c = ind;
  c.alternative_offset = ind_offset;
  c.trials = 5000;
  c.n_grid = {5000, 10000, 20000, 40000, 60000, 80000, 120000, 160000};
  presets["indep-power-paper"] = c;

  c = ind;
  c.test_id = TestId::kMcIndep;
  c.trials = 5000;
  c.n_grid = {10000, 100000};
  presets["mc-indep-type1-paper"] = c;

  ExperimentConfig gwas = base;
  gwas.row_marginal = gwas_rows;
  gwas.col_marginal = gwas_cols;
  gwas.trials = 5000;

  c = gwas;
  c.test_id = TestId::kGwasOutputPert;
  c.kind = ArmKind::kUnprojected;
  c.trials = 10000;
  c.n_grid = {10000, 100000};
  presets["gwas-type1-paper"] = c;

  c = gwas;
  c.alternative_offset = gwas_offset;
  c.n_grid = {500, 1000, 1500, 2000, 3000, 4000, 6000, 8000, 12000};
  c.test_id = TestId::kGwasProj;
  presets["gwas-proj-power-paper"] = c;
  c.test_id = TestId::kGwasOutputPert;
  presets["gwas-output-pert-power-paper"] = c;
  return presets;
}

}  // namespace dpchi

#endif  // DPCHI_HARNESS_H_
