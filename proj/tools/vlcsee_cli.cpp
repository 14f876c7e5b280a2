#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "vlcsee/config.hpp"
#include "vlcsee/entropy_check.hpp"
#include "vlcsee/experiments.hpp"
#include "vlcsee/records.hpp"
#include "vlcsee/zf_design.hpp"

namespace fs = std::filesystem;
using namespace vlcsee;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kInfeasible = 3;

struct Common {
  std::string config_path;
  std::optional<std::string> algo;
  std::optional<std::uint64_t> seed;
  std::optional<int> realizations;
  std::optional<int> threads;
  std::string out_dir = ".";
  bool timings = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "scenario file (key = value with [sections])");
  cmd->add_option("--algo", c.algo, "cccp, cccp_sdr, zf or random_zf");
  cmd->add_option("--seed", c.seed, "base seed");
  cmd->add_option("--realizations", c.realizations, "number of channel realizations");
  cmd->add_option("--threads", c.threads, "worker threads");
  cmd->add_option("--out-dir", c.out_dir, "directory for records.csv, summary.csv, manifest.json");
  cmd->add_flag("--timings", c.timings, "add a wall-time column to records.csv");
}

ScenarioConfig resolve(const Common& c) {
  ScenarioConfig cfg = c.config_path.empty() ? ScenarioConfig{} : load_config(c.config_path);
  if (c.algo) {
    try {
      cfg.algorithm = parse_algorithm(*c.algo);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(0, "--algo", e.what());
    }
  }
  if (c.seed) cfg.seed = *c.seed;
  if (c.realizations) cfg.realizations = *c.realizations;
  if (c.threads) cfg.threads = *c.threads;
  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    throw ConfigError(0, e.field(), std::string(e.what()).substr(e.field().size() + 2));
  }
  return cfg;
}

class Output {
 public:
  Output(const Common& c, std::string command, const ScenarioConfig& cfg)
      : dir_(c.out_dir), timings_(c.timings), command_(std::move(command)), cfg_(cfg) {
    fs::create_directories(dir_);
  }

  void records(const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) const {
    auto f = open("records.csv");
    Table{header, rows}.write(f);
  }

  void run_records(const std::vector<RunRecord>& recs) const {
    Table t;
    t.header = record_header(timings_);
    for (const RunRecord& r : recs) t.rows.push_back(record_row(r, timings_));
    auto f = open("records.csv");
    t.write(f);
  }

  void summary(const Table& t) const {
    auto f = open("summary.csv");
    t.write(f);
  }

  void manifest(const nlohmann::json& totals) const {
    auto f = open("manifest.json");
    f << make_manifest(command_, cfg_, totals).dump(2) << '\n';
  }

 private:
  std::ofstream open(const std::string& name) const {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    return out;
  }

  fs::path dir_;
  bool timings_;
  std::string command_;
  const ScenarioConfig& cfg_;
};

int cmd_channel(const Common& c) {
  const ScenarioConfig cfg = resolve(c);
  Output out(c, "channel", cfg);
  std::vector<std::vector<std::string>> rows;
  Table summary;
  summary.header = {"realization", "user", "noise_var", "noise_var_effective", "a", "b", "error"};
  int built = 0;
  for (int id = 0; id < cfg.realizations; ++id) {
    DesignProblem p;
    try {
      p = make_problem(cfg, realization_seed(cfg.seed, id));
    } catch (const std::invalid_argument& e) {
      summary.rows.push_back({std::to_string(id), "", "", "", "", "", e.what()});
      continue;
    }
    ++built;
    for (Index k = 0; k < p.users(); ++k) {
      for (Index n = 0; n < p.transmitters(); ++n)
        rows.push_back({std::to_string(id), std::to_string(k), std::to_string(n),
                        format_value(p.gains()(k, n))});
      summary.rows.push_back({std::to_string(id), std::to_string(k),
                              format_value(p.channel.noise_vars(k)),
                              format_value(p.channel.noise_vars_effective(k)),
                              format_value(p.coeffs.a(k)), format_value(p.coeffs.b(k)), ""});
    }
  }
  out.records({"realization", "user", "transmitter", "gain"}, rows);
  out.summary(summary);
  out.manifest({{"realizations", cfg.realizations}, {"built", built}});
  std::cout << built << " of " << cfg.realizations << " channel realizations written\n";
  return kOk;
}

int cmd_feasibility(const Common& c, bool ladder) {
  const ScenarioConfig cfg = resolve(c);
  std::vector<ScenarioConfig> points;
  std::vector<std::string> labels;
  if (ladder) {
    for (auto [layout, users] : {std::pair{LedLayout::k2x2, 3}, {LedLayout::k2x3, 4}, {LedLayout::k3x3, 6}}) {
      ScenarioConfig p = cfg;
      p.layout = layout;
      p.users = users;
      p.thresholds = {p.thresholds.front()};
      points.push_back(p);
      labels.push_back(std::to_string(layout_size(layout)) + "x" + std::to_string(users));
    }
  } else if (!cfg.sweep_values.empty() && cfg.sweep_axis != SweepAxis::circuitry) {
    for (double x : cfg.sweep_values) {
      points.push_back(at_grid_point(cfg, x));
      labels.push_back(to_string(cfg.sweep_axis) + "=" + format_value(x));
    }
  } else {
    points.push_back(cfg);
    labels.push_back("base");
  }
  const auto rows = feasibility_probability(points, labels);
  Output out(c, "feasibility", cfg);
  out.records({}, {});
  const Table t = feasibility_table(rows);
  out.summary(t);
  nlohmann::json totals = nlohmann::json::object();
  for (const auto& r : rows) {
    totals[r.label] = {{"realizations", r.probability.trials}, {"feasible", r.probability.successes}};
    std::cout << r.label << ": " << r.probability.estimate << " [" << r.probability.low << ", "
              << r.probability.high << "]\n";
  }
  out.manifest(totals);
  return kOk;
}

int cmd_convergence(const Common& c, const std::string& init_name) {
  const ScenarioConfig cfg = resolve(c);
  if (init_name != "zf" && init_name != "random") throw ConfigError(0, "--init", "expected zf or random");
  const InitKind init = init_name == "zf" ? InitKind::zf : InitKind::random;
  const ConvergenceResult res = convergence_trace(cfg, init);
  Output out(c, "convergence", cfg);
  out.run_records(res.records);
  out.summary(convergence_table(res));
  out.manifest({{"realizations", cfg.realizations},
                {"used", res.traces.size()},
                {"skipped", res.skipped},
                {"init", to_string(init)},
                {"records", res.records.size()}});
  if (res.traces.empty()) {
    std::cerr << "no feasible realization\n";
    return kInfeasible;
  }
  std::cout << "mean inner iterations " << res.mean_iterations() << ", 95% reached at iteration "
            << res.first_reaching(0.95) << '\n';
  return kOk;
}

int cmd_sweep(const Common& c) {
  ScenarioConfig cfg = resolve(c);
  if (cfg.sweep_values.empty()) throw ConfigError(0, "sweep.values", "sweep grid is empty");
  if (c.algo) cfg.sweep_algorithms = {cfg.algorithm};
  const SweepResult res = see_sweep(cfg);
  Output out(c, "sweep", cfg);
  out.run_records(res.records);
  const Table t = sweep_table(res);
  out.summary(t);
  int infeasible = 0;
  for (const SweepCell& cell : res.cells) infeasible += cell.infeasible;
  out.manifest({{"grid_points", res.grid.size()},
                {"realizations", cfg.realizations},
                {"infeasible_runs", infeasible},
                {"records", res.records.size()}});
  for (const auto& row : t.rows) std::cout << row[0] << ' ' << row[1] << ' ' << row[4] << '\n';
  return kOk;
}

int cmd_optimize(const Common& c) {
  const ScenarioConfig cfg = resolve(c);
  std::vector<AlgorithmRun> runs(static_cast<std::size_t>(cfg.realizations));
  std::vector<Realization> reals(runs.size());
  parallel_for(cfg.realizations, cfg.threads, [&](int id) {
    Realization r = prepare_realization(cfg, id);
    runs[static_cast<std::size_t>(id)] = run_algorithm(r, cfg.algorithm, cfg);
    r.problem = {};
    reals[static_cast<std::size_t>(id)] = std::move(r);
  });
  std::vector<RunRecord> records;
  Table summary;
  summary.header = {"realization", "algorithm", "feasible", "start", "status", "see",
                    "secrecy_rates", "outer_iterations", "inner_iterations"};
  int feasible = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const AlgorithmRun& run = runs[i];
    const Realization& r = reals[i];
    records.insert(records.end(), run.records.begin(), run.records.end());
    std::string rates;
    for (Index k = 0; k < run.rates.size(); ++k) rates += (k ? ";" : "") + format_value(run.rates(k));
    const std::string start = !r.error.empty()          ? "error"
                              : !r.feasible             ? "none"
                              : r.by_zero_forcing       ? "zero_forcing"
                                                        : "margin_search";
    summary.rows.push_back({std::to_string(i), to_string(cfg.algorithm), run.feasible ? "1" : "0",
                            start, to_string(run.status), format_value(run.see), rates,
                            std::to_string(run.outer_iterations), std::to_string(run.inner_iterations)});
    feasible += run.feasible;
  }
  Output out(c, "optimize", cfg);
  out.run_records(records);
  out.summary(summary);
  out.manifest({{"realizations", cfg.realizations}, {"feasible", feasible}, {"records", records.size()}});
  std::cout << feasible << " of " << cfg.realizations << " realizations solved with "
            << to_string(cfg.algorithm) << '\n';
  return feasible > 0 ? kOk : kInfeasible;
}

int cmd_verify(const Common& c, int users, std::size_t samples) {
  ScenarioConfig cfg = resolve(c);
  if (users < 1 || users > 3) throw ConfigError(0, "--users", "expected 1, 2 or 3");
  cfg.users = users;
  cfg.thresholds = {cfg.thresholds.front()};
  validate(cfg);
  const DesignProblem p = make_problem(cfg, realization_seed(cfg.seed, 0));
  const Matrix w = random_feasible_precoder(p.policy, p.users(), cfg.seed);
  EntropyOptions opt;
  opt.samples = samples;
  opt.seed = cfg.seed;
  opt.threads = cfg.threads;
  const auto reports = verify_entropy_chain(p.gains(), p.channel.noise_vars_effective, w,
                                            uniform_symbols(), opt);
  Table t;
  t.header = {"user", "term", "estimate", "std_error", "reference", "holds"};
  bool ok = true;
  for (const EntropyReport& r : reports) {
    const std::pair<const char*, const EntropyTerm*> terms[] = {
        {"output", &r.output},
        {"output_given_own", &r.output_given_own},
        {"others_given_theirs", &r.others_given_theirs},
        {"others_given_all", &r.others_given_all}};
    for (auto [name, term] : terms) {
      t.rows.push_back({std::to_string(r.user), name, format_value(term->estimate),
                        format_value(term->std_error), format_value(term->reference),
                        term->holds ? "1" : "0"});
      std::cout << "user " << r.user << ' ' << name << ": " << term->estimate << " +- "
                << term->std_error << " vs " << term->reference << (term->holds ? "  ok" : "  VIOLATED")
                << '\n';
    }
    ok = ok && r.all_hold();
  }
  Output out(c, "verify-appendix", cfg);
  out.records({}, {});
  out.summary(t);
  out.manifest({{"users", users}, {"samples", samples}, {"all_hold", ok}});
  return ok ? kOk : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secrecy energy efficiency precoding for multi-user VLC"};
  app.require_subcommand(1);
  Common common;
  std::string init = "zf";
  int users = 2;
  std::size_t samples = 1'000'000;
  bool ladder = false;

  auto* channel = app.add_subcommand("channel", "write channel gains and noise per realization");
  auto* feas = app.add_subcommand("feasibility", "feasibility probability with 95% intervals");
  feas->add_flag("--ladder", ladder, "the (4,3), (6,4), (9,6) configurations");
  auto* conv = app.add_subcommand("convergence", "normalized SEE per inner iteration");
  conv->add_option("--init", init, "zf or random")->check(CLI::IsMember({"zf", "random"}));
  auto* sweep = app.add_subcommand("sweep", "mean SEE over the configured grid");
  auto* opt = app.add_subcommand("optimize", "run one algorithm on every realization");
  auto* verify = app.add_subcommand("verify-appendix", "Monte Carlo check of the entropy bounds");
  verify->add_option("--users", users, "number of users (1 to 3)");
  verify->add_option("--samples", samples, "Monte Carlo samples");
  for (auto* cmd : {channel, feas, conv, sweep, opt, verify}) add_common(cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (channel->parsed()) return cmd_channel(common);
    if (feas->parsed()) return cmd_feasibility(common, ladder);
    if (conv->parsed()) return cmd_convergence(common, init);
    if (sweep->parsed()) return cmd_sweep(common);
    if (opt->parsed()) return cmd_optimize(common);
    if (verify->parsed()) return cmd_verify(common, users, samples);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kConfigError;
}
