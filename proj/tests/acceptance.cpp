// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any fails.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "vlcsee/experiments.hpp"

using namespace vlcsee;

namespace {

constexpr std::uint64_t kSeed = 20240601;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int worker_count() { return std::max(1, static_cast<int>(std::thread::hardware_concurrency())); }

ScenarioConfig base(int realizations) {
  ScenarioConfig cfg;
  cfg.seed = kSeed;
  cfg.realizations = realizations;
  cfg.threads = worker_count();
  return cfg;
}

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("C%d %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string describe(const Proportion& p) {
  return fmt("%.3f [%.3f, %.3f] (%d/%d)", p.estimate, p.low, p.high, p.successes, p.trials);
}

double mean(const std::vector<double>& v) {
  return v.empty() ? std::nan("") : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Runs every algorithm on the same realizations; runs[id][a] follows `algos`.
std::vector<std::vector<AlgorithmRun>> matched_runs(const ScenarioConfig& cfg,
                                                    const std::vector<Algorithm>& algos) {
  std::vector<std::vector<AlgorithmRun>> runs(static_cast<std::size_t>(cfg.realizations));
  parallel_for(cfg.realizations, cfg.threads, [&](int id) {
    const Realization r = prepare_realization(cfg, id);
    auto& row = runs[static_cast<std::size_t>(id)];
    for (Algorithm a : algos) row.push_back(run_algorithm(r, a, cfg));
  });
  return runs;
}

void feasibility_reproduction() {
  const auto t0 = Clock::now();
  const auto rows = feasibility_probability({base(1000)}, {"4x3"});
  const double elapsed = seconds_since(t0);
  const Proportion& p = rows[0].probability;
  report(1, p.estimate >= 0.88 && elapsed <= 600.0,
         fmt("(4,3) lambda=0.5 30 dBm: feasibility %s, need >= 0.88; %.0f s on %d threads (limit 600 s)",
             describe(p).c_str(), elapsed, worker_count()));
}

void configuration_ladder() {
  ScenarioConfig six = base(200), nine = base(200);
  six.layout = LedLayout::k2x3;
  six.users = 4;
  nine.layout = LedLayout::k3x3;
  nine.users = 6;
  const auto rows = feasibility_probability({six, nine}, {"6x4", "9x6"});
  const Proportion& a = rows[0].probability;
  const Proportion& b = rows[1].probability;
  report(2, a.estimate >= 0.88 && b.estimate >= 0.88,
         fmt("(6,4): %s; (9,6): %s; need >= 0.88 each", describe(a).c_str(), describe(b).c_str()));
}

void convergence() {
  ScenarioConfig cfg = base(24);
  cfg.trace_length = 30;
  cfg.algorithm = Algorithm::cccp_sdr;
  const ConvergenceResult sdr = convergence_trace(cfg, InitKind::zf);
  const ConvergenceResult sdr_random = convergence_trace(cfg, InitKind::random);
  cfg.algorithm = Algorithm::cccp;
  const ConvergenceResult direct = convergence_trace(cfg, InitKind::zf);
  const ConvergenceResult direct_random = convergence_trace(cfg, InitKind::random);

  const int sdr_at = sdr.first_reaching(0.95);
  const int direct_at = direct.first_reaching(0.95);
  const bool ok = !sdr.traces.empty() && !direct.traces.empty() && sdr_at >= 0 && sdr_at <= 12 &&
                  direct_at >= 0 && direct_at <= 20 &&
                  direct_random.mean_iterations() > direct.mean_iterations() &&
                  sdr_random.mean_iterations() > sdr.mean_iterations();
  report(3, ok,
         fmt("95%% reached at iteration %d (sdr, need <= 12) and %d (direct, need <= 20); mean inner "
             "iterations zf/random: direct %.1f/%.1f, sdr %.1f/%.1f (%zu, %zu realizations)",
             sdr_at, direct_at, direct.mean_iterations(), direct_random.mean_iterations(),
             sdr.mean_iterations(), sdr_random.mean_iterations(), direct.traces.size(), sdr.traces.size()));
}

void algorithm_equivalence() {
  const auto runs = matched_runs(base(240), {Algorithm::cccp, Algorithm::cccp_sdr});
  std::vector<double> rel;
  int small_gap = 0, with_gap = 0;
  for (const auto& row : runs) {
    if (!row[0].feasible || !row[1].feasible || !(row[0].see > 0.0)) continue;
    rel.push_back(std::abs(row[0].see - row[1].see) / row[0].see);
    if (!row[1].records.empty()) {
      ++with_gap;
      small_gap += row[1].records.back().relaxation_gap < 0.05;
    }
  }
  const double m = mean(rel);
  report(4, rel.size() >= 200 && m <= 0.05,
         fmt("mean |SEE(direct) - SEE(sdr)| / SEE(direct) = %.2e over %zu matched realizations "
             "(need <= 0.05 over >= 200); final relaxation gap < 0.05 on %d/%d",
             m, rel.size(), small_gap, with_gap));
}

void zero_forcing_gap() {
  struct Point {
    double dbm;
    std::vector<double> gap, random_gap;
    int violations = 0;
    double worst = 0.0;
  };
  std::vector<Point> points{{25.0, {}, {}}, {35.0, {}, {}}};
  for (Point& pt : points) {
    ScenarioConfig cfg = base(60);
    cfg.power_dbm = pt.dbm;
    cfg.random_zf_samples = 1000;
    const auto runs = matched_runs(cfg, {Algorithm::cccp, Algorithm::zf, Algorithm::random_zf});
    for (const auto& row : runs) {
      if (!row[0].feasible || !row[1].feasible || !(row[0].see > 0.0)) continue;
      const double g = (row[0].see - row[1].see) / row[0].see;
      pt.gap.push_back(g);
      pt.worst = std::min(pt.worst, g);
      // both stop at a relative tolerance of 1e-4 on the parameter
      if (g < -1e-4) ++pt.violations;
      if (row[2].feasible) pt.random_gap.push_back((row[0].see - row[2].see) / row[0].see);
    }
  }
  const Point& lo = points[0];
  const Point& hi = points[1];
  const double gap25 = mean(lo.gap), gap35 = mean(hi.gap), random35 = mean(hi.random_gap);
  const bool ok = !lo.gap.empty() && !hi.gap.empty() && lo.violations == 0 && hi.violations == 0 &&
                  gap35 <= 0.10 && gap35 < gap25 && random35 <= 0.10;
  report(5, ok,
         fmt("ZF above CCCP on %d+%d instances (worst %.2e); mean gap 25 dBm %.4f, 35 dBm %.4f (need <= 0.10 "
             "and decreasing); random ZF gap at 35 dBm %.4f (need <= 0.10); %zu/%zu matched",
             lo.violations, hi.violations, std::min(lo.worst, hi.worst), gap25, gap35, random35,
             lo.gap.size(), hi.gap.size()));
}

void interior_optimum() {
  std::vector<double> grid;
  for (int p = 20; p <= 40; ++p) grid.push_back(p);
  std::string detail;
  bool ok = true;
  double previous = -1.0;
  for (double circuitry : {2.0, 4.0, 8.0, 16.0}) {
    ScenarioConfig cfg = base(10);
    cfg.circuitry_power = circuitry;
    cfg.sweep_axis = SweepAxis::power_dbm;
    cfg.sweep_values = grid;
    cfg.sweep_algorithms = {Algorithm::cccp};
    const SweepResult res = see_sweep(cfg);
    int best = -1;
    for (int i = 0; i < static_cast<int>(grid.size()); ++i) {
      const double m = res.cell(i, Algorithm::cccp).mean;
      if (std::isfinite(m) && (best < 0 || m > res.cell(best, Algorithm::cccp).mean)) best = i;
    }
    const double arg = best < 0 ? std::nan("") : grid[static_cast<std::size_t>(best)];
    const bool interior = best > 0 && best + 1 < static_cast<int>(grid.size());
    ok = ok && interior && arg >= previous;
    previous = best < 0 ? previous : arg;
    detail += fmt("%s%g W -> %g dBm", detail.empty() ? "" : ", ", circuitry, arg);
  }
  report(6, ok, "argmax of mean SEE over 20-40 dBm: " + detail + " (need interior and nondecreasing)");
}

void threshold_trend() {
  struct Cell {
    double dbm, lambda, mean = std::nan("");
    int feasible = 0;
  };
  std::vector<Cell> cells{{25, 1}, {25, 3}, {35, 1}, {35, 3}};
  for (Cell& c : cells) {
    ScenarioConfig cfg = base(300);
    cfg.power_dbm = c.dbm;
    cfg.thresholds = {c.lambda};
    const auto runs = matched_runs(cfg, {Algorithm::cccp});
    std::vector<double> see;
    for (const auto& row : runs)
      if (row[0].feasible) see.push_back(row[0].see);
    c.mean = mean(see);
    c.feasible = static_cast<int>(see.size());
  }
  const double inc25 = (cells[1].mean - cells[0].mean) / cells[0].mean;
  const double inc35 = (cells[3].mean - cells[2].mean) / cells[2].mean;
  const bool ok = cells[1].feasible > 0 && cells[1].mean > cells[0].mean && inc25 > inc35;
  report(7, ok,
         fmt("25 dBm: lambda=1 %.4f (%d feasible), lambda=3 %.4f (%d feasible), increase %.3f; "
             "35 dBm: %.4f (%d), %.4f (%d), increase %.3f (need lambda=3 above lambda=1 at 25 dBm, larger "
             "increase at 25 dBm)",
             cells[0].mean, cells[0].feasible, cells[1].mean, cells[1].feasible, inc25, cells[2].mean,
             cells[2].feasible, cells[3].mean, cells[3].feasible, inc35));
}

void property_suites() {
  const char* suites[] = {VLCSEE_PROPERTY_SUITES};
  std::string failed;
  const auto t0 = Clock::now();
  for (const char* path : suites) {
    const std::string cmd = std::string(path) + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      const std::string p(path);
      failed += " " + p.substr(p.find_last_of('/') + 1);
    }
  }
  const double elapsed = seconds_since(t0);
  report(8, failed.empty() && elapsed < 120.0,
         fmt("%zu property suites in %.1f s (limit 120 s)%s%s", std::size(suites), elapsed,
             failed.empty() ? "" : "; failed:", failed.c_str()));
}

}  // namespace

int main() {
  feasibility_reproduction();
  configuration_ladder();
  convergence();
  algorithm_equivalence();
  zero_forcing_gap();
  interior_optimum();
  threshold_trend();
  property_suites();
  return failures == 0 ? 0 : 1;
}
