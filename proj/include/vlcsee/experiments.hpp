#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "vlcsee/config.hpp"
#include "vlcsee/design_problem.hpp"
#include "vlcsee/dinkelbach.hpp"
#include "vlcsee/records.hpp"

namespace vlcsee {

/// Counter-based stream: the seed of a realization depends only on (seed, id).
std::uint64_t realization_seed(std::uint64_t seed, int realization);

/// Builds the channel realization; throws std::invalid_argument when a user is out of
/// every luminary's field of view.
DesignProblem make_problem(const ScenarioConfig& cfg, std::uint64_t seed);

InnerConfig inner_config(const ScenarioConfig& cfg);
DinkelbachConfig outer_config(const ScenarioConfig& cfg);

/// Runs body(i) for every i in [0, n) on up to `threads` workers. The first
/// exception thrown by a body is rethrown after all workers stop.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

struct Realization {
  int id = 0;
  std::uint64_t seed = 0;
  DesignProblem problem;
  bool feasible = false;
  bool by_zero_forcing = false;
  Matrix w_start;     // threshold-feasible start when feasible
  std::string error;  // set when the scene could not be built
};

Realization prepare_realization(const ScenarioConfig& cfg, int id);

struct AlgorithmRun {
  Algorithm algorithm = Algorithm::cccp;
  bool feasible = false;
  OuterStatus status = OuterStatus::infeasible;
  Matrix w;
  double see = std::numeric_limits<double>::quiet_NaN();
  Vector rates;
  int outer_iterations = 0;
  int inner_iterations = 0;
  std::vector<RunRecord> records;
  /// Efficiency at the start followed by one entry per inner iteration.
  std::vector<double> efficiency_trace;
};

/// Runs one algorithm from w_init. The ZF variants ignore w_init and start from the
/// zero-forcing family; they report infeasible when that family misses the thresholds.
AlgorithmRun run_algorithm(const Realization& r, Algorithm algo, const Matrix& w_init,
                           const ScenarioConfig& cfg);
AlgorithmRun run_algorithm(const Realization& r, Algorithm algo, const ScenarioConfig& cfg);

struct Proportion {
  int successes = 0;
  int trials = 0;
  double estimate = 0.0;
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval; z = 1.96 gives 95% coverage.
Proportion wilson_interval(int successes, int trials, double z = 1.959963984540054);

struct FeasibilityRow {
  std::string label;
  Proportion probability;
  int by_zero_forcing = 0;
};

/// One row per configuration; each uses its own realizations and seed.
std::vector<FeasibilityRow> feasibility_probability(const std::vector<ScenarioConfig>& points,
                                                    const std::vector<std::string>& labels);
Table feasibility_table(const std::vector<FeasibilityRow>& rows);

enum class InitKind { zf, random };

std::string to_string(InitKind init);

/// W_init for convergence runs. Random init blends a random precoder toward the
/// feasible start until the thresholds hold.
Matrix initial_precoder(const Realization& r, InitKind init);

struct ConvergenceResult {
  std::vector<double> mean_trace;               // normalized, length cfg.trace_length + 1
  std::vector<std::vector<double>> traces;      // per used realization
  std::vector<int> realizations;
  std::vector<int> iterations;                  // inner iterations until Dinkelbach stopped
  int skipped = 0;                              // infeasible or failed realizations
  std::vector<RunRecord> records;

  /// First index where the mean trace reaches `level`, or -1.
  int first_reaching(double level) const;
  double mean_iterations() const;
};

/// Per realization, the running SEE of cfg.algorithm divided by the converged
/// cccp SEE from the zero-forcing start.
ConvergenceResult convergence_trace(const ScenarioConfig& cfg, InitKind init);
Table convergence_table(const ConvergenceResult& result);

struct SweepSample {
  int point = 0;
  int realization = 0;
  Algorithm algorithm = Algorithm::cccp;
  bool feasible = false;
  double see = std::numeric_limits<double>::quiet_NaN();
};

struct SweepCell {
  double x = 0.0;
  Algorithm algorithm = Algorithm::cccp;
  int feasible = 0;
  int infeasible = 0;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double q1 = std::numeric_limits<double>::quiet_NaN();
  double median = std::numeric_limits<double>::quiet_NaN();
  double q3 = std::numeric_limits<double>::quiet_NaN();
};

struct SweepResult {
  std::vector<double> grid;
  std::vector<SweepCell> cells;      // grid-major, then algorithm
  std::vector<SweepSample> samples;  // grid-major, then realization, then algorithm
  std::vector<RunRecord> records;

  const SweepCell& cell(int point, Algorithm algo) const;
};

ScenarioConfig at_grid_point(const ScenarioConfig& cfg, double x);

/// Requires a nonempty cfg.sweep_values. Infeasible realizations are excluded from
/// the statistics and counted.
SweepResult see_sweep(const ScenarioConfig& cfg);
Table sweep_table(const SweepResult& result);

}  // namespace vlcsee
