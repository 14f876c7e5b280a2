#include "vlcsee/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "vlcsee/cccp_direct.hpp"
#include "vlcsee/cccp_sdr.hpp"
#include "vlcsee/zf_design.hpp"

namespace vlcsee {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr double kMarginTol = 1e-6;

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

std::uint64_t realization_seed(std::uint64_t seed, int realization) {
  return splitmix(splitmix(seed) ^ static_cast<std::uint64_t>(realization));
}

DesignProblem make_problem(const ScenarioConfig& cfg, std::uint64_t seed) {
  const auto leds = led_layout(cfg.layout, cfg.room, cfg.led_height);
  const Scene scene =
      make_scene(leds, sample_users(seed, cfg.users, cfg.room, cfg.receiver_height), cfg.room);
  DesignProblem p;
  p.policy = drive_policy_from_dbm(cfg.power_dbm, static_cast<Index>(leds.size()),
                                   scene.luminaries.front().conversion_factor, cfg.i_max);
  p.channel = build_channel(scene, p.policy.dc_bias);
  p.coeffs = link_coefficients(p.channel, uniform_symbols());
  p.power.circuitry_power = cfg.circuitry_power;
  p.power.led_forward_voltage = cfg.led_voltage;
  p.power.equiv_resistance = cfg.equiv_resistance;
  p.thresholds = cfg.threshold_vector();
  return p;
}

InnerConfig inner_config(const ScenarioConfig& cfg) {
  InnerConfig c;
  c.eps = cfg.eps_inner;
  c.max_iter = cfg.max_inner;
  c.solver_tol = cfg.solver_tol;
  return c;
}

DinkelbachConfig outer_config(const ScenarioConfig& cfg) {
  DinkelbachConfig c;
  c.eps1 = cfg.eps_outer;
  c.lmax1 = cfg.max_outer;
  return c;
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  const int workers = std::max(1, std::min(threads, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n && !stop; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          stop = true;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

Realization prepare_realization(const ScenarioConfig& cfg, int id) {
  Realization r;
  r.id = id;
  r.seed = realization_seed(cfg.seed, id);
  try {
    r.problem = make_problem(cfg, r.seed);
  } catch (const std::invalid_argument& e) {
    r.error = e.what();
    return r;
  }
  const FeasibilityVerdict v =
      detect_feasibility(r.problem, r.seed ^ 0x5eedULL, cfg.feasibility_fallback, inner_config(cfg));
  r.feasible = v.feasible;
  r.by_zero_forcing = v.by_zero_forcing;
  r.w_start = v.w;
  return r;
}

AlgorithmRun run_algorithm(const Realization& r, Algorithm algo, const ScenarioConfig& cfg) {
  return run_algorithm(r, algo, r.w_start, cfg);
}

AlgorithmRun run_algorithm(const Realization& r, Algorithm algo, const Matrix& w_init,
                           const ScenarioConfig& cfg) {
  AlgorithmRun run;
  run.algorithm = algo;
  if (!r.feasible) return run;
  const DesignProblem& problem = r.problem;
  const auto start = Clock::now();

  auto finish = [&](const Matrix& w) {
    run.w = w;
    run.see = problem.efficiency(w);
    run.rates = secrecy_rates(w, problem.gains(), problem.coeffs);
    run.feasible = problem.threshold_margin(w) >= -kMarginTol;
  };

  if (algo == Algorithm::random_zf) {
    const RandomZfResult z =
        random_zf_selection(problem, cfg.random_zf_samples, r.seed ^ 0x2fULL);
    if (!z.feasible) return run;
    run.status = OuterStatus::optimal;
    finish(z.w);
    RunRecord rec;
    rec.realization = r.id;
    rec.algorithm = algo;
    rec.mu = run.see;
    rec.objective = 0.0;
    rec.see = run.see;
    rec.rates = run.rates;
    rec.feasible = run.feasible;
    rec.wall_ms = ms_since(start);
    run.records.push_back(rec);
    run.efficiency_trace = {run.see};
    return run;
  }

  Matrix w0 = w_init;
  if (algo == Algorithm::zf) {
    const ZfInitialPoint zf = r.by_zero_forcing ? ZfInitialPoint{true, r.w_start, 0.0, {}}
                                                : zf_initial_point(problem);
    if (!zf.feasible) return run;
    w0 = zf.w;
  }

  const InnerConfig icfg = inner_config(cfg);
  std::function<InnerResult(double, const Matrix&)> inner;
  switch (algo) {
    case Algorithm::cccp:
      inner = [&](double mu, const Matrix& warm) { return solve_parameterized(problem, mu, warm, icfg); };
      break;
    case Algorithm::cccp_sdr:
      inner = [&](double mu, const Matrix& warm) {
        return solve_parameterized_sdr(problem, mu, warm, icfg);
      };
      break;
    default:
      inner = [&](double mu, const Matrix& warm) {
        return solve_parameterized_zf(problem, mu, warm, icfg);
      };
      break;
  }
  std::vector<double> step_ms;
  auto timed = [&](double mu, const Matrix& warm) {
    InnerResult res = inner(mu, warm);
    step_ms.push_back(ms_since(start));
    return res;
  };

  const DinkelbachResult dr = run_dinkelbach(problem, w0, timed, outer_config(cfg));
  run.status = dr.status;
  run.outer_iterations = static_cast<int>(dr.trace.size());
  run.inner_iterations = dr.inner_iterations();
  run.efficiency_trace.push_back(problem.efficiency(w0));
  for (std::size_t s = 0; s < dr.trace.size(); ++s) {
    const DinkelbachStep& step = dr.trace[s];
    for (const InnerIterate& it : step.inner_trace) {
      RunRecord rec;
      rec.realization = r.id;
      rec.algorithm = algo;
      rec.outer_iteration = step.iteration;
      rec.inner_iteration = it.iteration;
      rec.mu = step.mu;
      rec.objective = it.objective;
      rec.see = it.efficiency;
      rec.rates = it.rates;
      rec.feasible = (it.rates - problem.thresholds).minCoeff() >= -kMarginTol;
      rec.relaxation_gap = it.relaxation_gap;
      rec.wall_ms = step_ms[s];
      run.records.push_back(rec);
      run.efficiency_trace.push_back(it.efficiency);
    }
  }
  if (dr.status == OuterStatus::infeasible) return run;
  finish(dr.w);
  return run;
}

Proportion wilson_interval(int successes, int trials, double z) {
  Proportion p;
  p.successes = successes;
  p.trials = trials;
  if (trials <= 0) return p;
  const double n = trials;
  const double phat = successes / n;
  const double z2 = z * z;
  const double centre = (phat + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z / (1 + z2 / n) * std::sqrt(phat * (1 - phat) / n + z2 / (4 * n * n));
  p.estimate = phat;
  p.low = std::max(0.0, centre - half);
  p.high = std::min(1.0, centre + half);
  return p;
}

std::vector<FeasibilityRow> feasibility_probability(const std::vector<ScenarioConfig>& points,
                                                    const std::vector<std::string>& labels) {
  if (labels.size() != points.size()) throw std::invalid_argument("one label per point");
  std::vector<FeasibilityRow> rows;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const ScenarioConfig& cfg = points[i];
    std::vector<char> feasible(static_cast<std::size_t>(cfg.realizations), 0);
    std::vector<char> zf(feasible.size(), 0);
    parallel_for(cfg.realizations, cfg.threads, [&](int id) {
      const Realization r = prepare_realization(cfg, id);
      feasible[static_cast<std::size_t>(id)] = r.feasible;
      zf[static_cast<std::size_t>(id)] = r.by_zero_forcing;
    });
    FeasibilityRow row;
    row.label = labels[i];
    row.probability = wilson_interval(static_cast<int>(std::count(feasible.begin(), feasible.end(), 1)),
                                      cfg.realizations);
    row.by_zero_forcing = static_cast<int>(std::count(zf.begin(), zf.end(), 1));
    rows.push_back(row);
  }
  return rows;
}

Table feasibility_table(const std::vector<FeasibilityRow>& rows) {
  Table t;
  t.header = {"point", "realizations", "feasible", "by_zero_forcing", "probability", "ci_low", "ci_high"};
  for (const auto& r : rows) {
    t.rows.push_back({r.label, std::to_string(r.probability.trials),
                      std::to_string(r.probability.successes), std::to_string(r.by_zero_forcing),
                      format_value(r.probability.estimate), format_value(r.probability.low),
                      format_value(r.probability.high)});
  }
  return t;
}

std::string to_string(InitKind init) { return init == InitKind::zf ? "zf" : "random"; }

Matrix initial_precoder(const Realization& r, InitKind init) {
  if (init == InitKind::zf || !r.feasible) return r.w_start;
  const Matrix rand = random_feasible_precoder(r.problem.policy, r.problem.users(), r.seed ^ 0x7aULL);
  // Row L1 budgets are convex, so every blend stays amplitude-feasible.
  for (int step = 0; step <= 20; ++step) {
    const double t = step / 20.0;
    const Matrix w = (1.0 - t) * rand + t * r.w_start;
    if (r.problem.threshold_margin(w) >= 0.0) return w;
  }
  return r.w_start;
}

int ConvergenceResult::first_reaching(double level) const {
  for (std::size_t i = 0; i < mean_trace.size(); ++i)
    if (mean_trace[i] >= level) return static_cast<int>(i);
  return -1;
}

double ConvergenceResult::mean_iterations() const {
  if (iterations.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (int i : iterations) s += i;
  return s / static_cast<double>(iterations.size());
}

ConvergenceResult convergence_trace(const ScenarioConfig& cfg, InitKind init) {
  struct Slot {
    bool used = false;
    std::vector<double> trace;
    int iterations = 0;
    std::vector<RunRecord> records;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(cfg.realizations));
  const auto length = static_cast<std::size_t>(cfg.trace_length) + 1;
  parallel_for(cfg.realizations, cfg.threads, [&](int id) {
    const Realization r = prepare_realization(cfg, id);
    if (!r.feasible) return;
    const AlgorithmRun ref = run_algorithm(r, Algorithm::cccp, r.w_start, cfg);
    if (!ref.feasible || !(ref.see > 0.0)) return;
    const AlgorithmRun run = run_algorithm(r, cfg.algorithm, initial_precoder(r, init), cfg);
    if (!run.feasible || run.efficiency_trace.empty()) return;
    Slot& slot = slots[static_cast<std::size_t>(id)];
    slot.used = true;
    slot.iterations = run.inner_iterations;
    slot.records = run.records;
    for (std::size_t i = 0; i < length; ++i) {
      const double v = i < run.efficiency_trace.size() ? run.efficiency_trace[i] : run.see;
      slot.trace.push_back(v / ref.see);
    }
  });
  ConvergenceResult out;
  out.mean_trace.assign(length, 0.0);
  for (std::size_t id = 0; id < slots.size(); ++id) {
    Slot& slot = slots[id];
    if (!slot.used) {
      ++out.skipped;
      continue;
    }
    for (std::size_t i = 0; i < length; ++i) out.mean_trace[i] += slot.trace[i];
    out.traces.push_back(std::move(slot.trace));
    out.realizations.push_back(static_cast<int>(id));
    out.iterations.push_back(slot.iterations);
    out.records.insert(out.records.end(), slot.records.begin(), slot.records.end());
  }
  if (!out.traces.empty())
    for (double& v : out.mean_trace) v /= static_cast<double>(out.traces.size());
  return out;
}

Table convergence_table(const ConvergenceResult& result) {
  Table t;
  t.header = {"iteration", "normalized_see", "realizations"};
  for (std::size_t i = 0; i < result.mean_trace.size(); ++i)
    t.rows.push_back({std::to_string(i), format_value(result.mean_trace[i]),
                      std::to_string(result.traces.size())});
  return t;
}

const SweepCell& SweepResult::cell(int point, Algorithm algo) const {
  for (const SweepCell& c : cells)
    if (c.algorithm == algo && c.x == grid.at(static_cast<std::size_t>(point))) return c;
  throw std::out_of_range("no sweep cell for " + to_string(algo));
}

ScenarioConfig at_grid_point(const ScenarioConfig& cfg, double x) {
  ScenarioConfig c = cfg;
  switch (cfg.sweep_axis) {
    case SweepAxis::power_dbm: c.power_dbm = x; break;
    case SweepAxis::threshold: c.thresholds = {x}; break;
    case SweepAxis::circuitry: c.circuitry_power = x; break;
  }
  return c;
}

SweepResult see_sweep(const ScenarioConfig& cfg) {
  if (cfg.sweep_values.empty()) throw std::invalid_argument("sweep grid is empty");
  SweepResult out;
  out.grid = cfg.sweep_values;
  const auto n_points = static_cast<int>(out.grid.size());
  const auto n_algos = cfg.sweep_algorithms.size();
  struct Slot {
    std::vector<AlgorithmRun> runs;
  };
  // Same realization ids at every grid point, so curves share their user drops.
  std::vector<Slot> slots(static_cast<std::size_t>(n_points * cfg.realizations));
  parallel_for(static_cast<int>(slots.size()), cfg.threads, [&](int job) {
    const int point = job / cfg.realizations;
    const int id = job % cfg.realizations;
    const ScenarioConfig pc = at_grid_point(cfg, out.grid[static_cast<std::size_t>(point)]);
    const Realization r = prepare_realization(pc, id);
    Slot& slot = slots[static_cast<std::size_t>(job)];
    for (Algorithm algo : cfg.sweep_algorithms) slot.runs.push_back(run_algorithm(r, algo, pc));
  });
  for (int point = 0; point < n_points; ++point) {
    std::vector<std::vector<double>> values(n_algos);
    std::vector<int> failed(n_algos, 0);
    for (int id = 0; id < cfg.realizations; ++id) {
      Slot& slot = slots[static_cast<std::size_t>(point * cfg.realizations + id)];
      for (std::size_t a = 0; a < n_algos; ++a) {
        AlgorithmRun& run = slot.runs[a];
        SweepSample s;
        s.point = point;
        s.realization = id;
        s.algorithm = run.algorithm;
        s.feasible = run.feasible;
        s.see = run.feasible ? run.see : std::numeric_limits<double>::quiet_NaN();
        out.samples.push_back(s);
        if (run.feasible)
          values[a].push_back(run.see);
        else
          ++failed[a];
        out.records.insert(out.records.end(), run.records.begin(), run.records.end());
      }
    }
    for (std::size_t a = 0; a < n_algos; ++a) {
      SweepCell c;
      c.x = out.grid[static_cast<std::size_t>(point)];
      c.algorithm = cfg.sweep_algorithms[a];
      c.feasible = static_cast<int>(values[a].size());
      c.infeasible = failed[a];
      std::sort(values[a].begin(), values[a].end());
      if (!values[a].empty()) {
        double s = 0.0;
        for (double v : values[a]) s += v;
        c.mean = s / static_cast<double>(values[a].size());
        c.q1 = quantile(values[a], 0.25);
        c.median = quantile(values[a], 0.5);
        c.q3 = quantile(values[a], 0.75);
      }
      out.cells.push_back(c);
    }
  }
  return out;
}

Table sweep_table(const SweepResult& result) {
  Table t;
  t.header = {"x", "algorithm", "feasible", "infeasible", "mean_see", "q1", "median", "q3"};
  for (const SweepCell& c : result.cells)
    t.rows.push_back({format_value(c.x), to_string(c.algorithm), std::to_string(c.feasible),
                      std::to_string(c.infeasible), format_value(c.mean), format_value(c.q1),
                      format_value(c.median), format_value(c.q3)});
  return t;
}

}  // namespace vlcsee
