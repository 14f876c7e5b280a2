#include "vlcsee/zf_design.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "vlcsee/cccp_direct.hpp"
#include "vlcsee/conic/solver.hpp"

namespace vlcsee {

using conic::AffineExpr;

AffineExpr taylor_sqrt(double rho_prev, const AffineExpr& rho) {
  if (!(rho_prev > kRhoFloor)) throw std::domain_error("taylor_sqrt: expansion point at floor");
  const double s = std::sqrt(rho_prev);
  return AffineExpr(s) + (rho - rho_prev) * (0.5 / s);
}

double taylor_sqrt(double rho_prev, double rho) {
  if (!(rho_prev > kRhoFloor)) throw std::domain_error("taylor_sqrt: expansion point at floor");
  const double s = std::sqrt(rho_prev);
  return s + (rho - rho_prev) / (2.0 * s);
}

namespace {

Matrix pseudo_inverse(const Matrix& h) {
  return h.completeOrthogonalDecomposition().pseudoInverse();
}

bool full_row_rank(const Matrix& h) {
  if (h.rows() > h.cols()) return false;
  Eigen::JacobiSVD<Matrix> svd(h);
  const Vector& s = svd.singularValues();
  return s.size() > 0 && s(s.size() - 1) > 1e-9 * s(0);
}

// u_k reaching rate lambda_k + level in the ZF closed form.
Vector levels_to_amplitudes(const DesignProblem& problem, double level) {
  const Index users = problem.users();
  Vector u(users);
  for (Index k = 0; k < users; ++k) {
    const double e = std::max(0.0, level + problem.thresholds(k));
    u(k) = std::sqrt((std::exp2(2.0 * e) - 1.0) / problem.coeffs.a(k));
  }
  return u;
}

double amplitude_usage(const Matrix& abs_pinv, const Vector& u, const Vector& bounds) {
  const Vector use = abs_pinv * u;
  double worst = 0.0;
  for (Index n = 0; n < use.size(); ++n) {
    if (use(n) == 0.0) continue;
    worst = std::max(worst, bounds(n) > 0.0 ? use(n) / bounds(n)
                                            : std::numeric_limits<double>::infinity());
  }
  return worst;
}

struct ZfProgram {
  conic::ConicProgram program;
  conic::VectorVar w_pos, w_neg, rho, rate;
  conic::ScalarVar power;
  Index n_t = 0, users = 0;

  AffineExpr w(Index n, Index k) const {
    const int idx = static_cast<int>(k * n_t + n);
    return w_pos(idx) - w_neg(idx);
  }
  Matrix precoder(const Vector& x) const {
    Matrix out(n_t, users);
    for (Index k = 0; k < users; ++k) {
      for (Index n = 0; n < n_t; ++n) {
        const int idx = static_cast<int>(k * n_t + n);
        out(n, k) = x(w_pos.index(idx)) - x(w_neg.index(idx));
      }
    }
    return out;
  }
};

// rho here is the scaled gain a_k (h_k^T w_k)^2, which keeps the program well scaled.
ZfProgram build_zf_program(const DesignProblem& problem, const Vector& rho_prev, double mu) {
  ZfProgram zp;
  zp.n_t = problem.transmitters();
  zp.users = problem.users();
  const Index nt = zp.n_t, users = zp.users;
  const int cells = static_cast<int>(nt * users);
  auto& prog = zp.program;
  zp.w_pos = prog.add_vector("w_pos", cells);
  zp.w_neg = prog.add_vector("w_neg", cells);
  zp.rho = prog.add_vector("rho", static_cast<int>(users));
  zp.rate = prog.add_vector("rate", static_cast<int>(users));
  zp.power = prog.add_scalar("power");

  for (int i = 0; i < cells; ++i) {
    prog.add_nonnegative(zp.w_pos(i), "w_pos");
    prog.add_nonnegative(zp.w_neg(i), "w_neg");
  }
  const Vector bounds = amplitude_bounds(problem.policy);
  for (Index n = 0; n < nt; ++n) {
    AffineExpr row;
    for (Index k = 0; k < users; ++k) {
      const int idx = static_cast<int>(k * nt + n);
      row += zp.w_pos(idx) + zp.w_neg(idx);
    }
    prog.add_less_equal(row, bounds(n), "amplitude");
  }
  std::vector<AffineExpr> entries;
  for (Index k = 0; k < users; ++k) {
    for (Index n = 0; n < nt; ++n) entries.push_back(zp.w(n, k));
  }
  prog.add_quadratic(zp.power.expr(), entries, "power");

  const Matrix& h = problem.gains();
  AffineExpr total_rate;
  for (Index k = 0; k < users; ++k) {
    const int ki = static_cast<int>(k);
    for (Index j = 0; j < users; ++j) {
      AffineExpr e;
      const double scale = std::sqrt(problem.coeffs.a(j));
      for (Index n = 0; n < nt; ++n) e += (scale * h(j, n)) * zp.w(n, k);
      if (j == k) e -= taylor_sqrt(rho_prev(k), zp.rho(ki));
      prog.add_equality(e, j == k ? "zf_gain" : "zf_null");
    }
    prog.add_nonnegative(zp.rho(ki), "rho");
    add_log_epigraph(prog, zp.rate(ki), zp.rho(ki), 0.5, "rate");
    prog.add_less_equal(AffineExpr(problem.thresholds(k)), zp.rate(ki), "threshold");
    total_rate += zp.rate(ki);
  }
  const double dc = dc_power(problem.policy, problem.power);
  prog.maximize(total_rate - mu * (dc + problem.power.equiv_resistance * zp.power.expr()));
  return zp;
}

Vector scaled_rho(const DesignProblem& problem, const Matrix& w) {
  return zf_rho(problem.gains(), w).cwiseProduct(problem.coeffs.a);
}

Matrix perturb_zf(const DesignProblem& problem, const Matrix& w) {
  const Matrix hp = pseudo_inverse(problem.gains());
  Vector u = (problem.gains() * w).diagonal();
  const Vector bounds = amplitude_bounds(problem.policy);
  for (Index k = 0; k < u.size(); ++k) {
    const double nudge = 1e-3 * bounds.maxCoeff() / std::max(1.0, hp.col(k).cwiseAbs().sum());
    u(k) = std::max(std::abs(u(k)), nudge);
  }
  Matrix out = zf_precoder(problem.gains(), u);
  const double excess = amplitude_usage(hp.cwiseAbs(), u, bounds);
  if (excess > 1.0) out /= excess;
  return out;
}

}  // namespace

Matrix zf_precoder(const Matrix& gains, const Vector& u) {
  return pseudo_inverse(gains) * u.asDiagonal();
}

Vector zf_rho(const Matrix& gains, const Matrix& w) {
  const Matrix g = gains * w;
  return g.diagonal().cwiseAbs2();
}

double zf_residual(const Matrix& gains, const Matrix& w) {
  Matrix g = gains * w;
  g.diagonal().setZero();
  return g.cwiseAbs().maxCoeff();
}

InnerResult solve_parameterized_zf(const DesignProblem& problem, double mu, const Matrix& w_init,
                                   const InnerConfig& cfg) {
  InnerResult out;
  out.w = w_init;
  out.objective = evaluate_iterate(problem, w_init, mu, 0).objective;
  double best = out.objective;
  Matrix w = w_init;
  Vector rho = scaled_rho(problem, w);
  bool restarted = false;
  conic::SolverOptions opt;
  opt.tol = cfg.solver_tol;

  for (int it = 1; it <= cfg.max_iter; ++it) {
    ZfProgram zp;
    try {
      zp = build_zf_program(problem, rho, mu);
    } catch (const std::domain_error&) {
      if (restarted) {
        out.status = InnerStatus::numerical_error;
        return out;
      }
      restarted = true;
      w = perturb_zf(problem, w);
      rho = scaled_rho(problem, w);
      --it;
      continue;
    }
    Vector hint = Vector::Zero(zp.program.num_variables());
    for (Index k = 0; k < zp.users; ++k) {
      for (Index n = 0; n < zp.n_t; ++n) {
        const int idx = static_cast<int>(k * zp.n_t + n);
        hint(zp.w_pos.index(idx)) = std::max(w(n, k), 0.0);
        hint(zp.w_neg.index(idx)) = std::max(-w(n, k), 0.0);
      }
      hint(zp.rho.index(static_cast<int>(k))) = rho(k);
      hint(zp.rate.index(static_cast<int>(k))) = 0.5 * std::log2(1.0 + rho(k));
    }
    hint(zp.power.index) = w.squaredNorm();

    const conic::SolveResult res = solve(zp.program, opt, hint);
    if (res.status != conic::SolveStatus::optimal) {
      if (it == 1) {
        out.status = res.status == conic::SolveStatus::infeasible ? InnerStatus::infeasible
                                                                  : InnerStatus::numerical_error;
      } else {
        out.status = InnerStatus::max_iter;
      }
      return out;
    }
    const Matrix w_next = zp.precoder(res.x);
    const Vector rho_next = scaled_rho(problem, w_next);
    InnerIterate rec = evaluate_iterate(problem, w_next, mu, it);
    out.iterations = it;
    if (rec.objective >= best) {
      best = rec.objective;
      out.w = w_next;
      out.objective = rec.objective;
    }
    out.trace.push_back(rec);
    const bool settled = relative_change(rho_next, rho, cfg.change_floor) <= cfg.eps;
    w = w_next;
    rho = rho_next;
    if (settled) {
      out.status = InnerStatus::converged;
      return out;
    }
  }
  out.status = InnerStatus::max_iter;
  return out;
}

ZfInitialPoint zf_initial_point(const DesignProblem& problem) {
  ZfInitialPoint out;
  const Matrix& h = problem.gains();
  if (!full_row_rank(h)) {
    out.reason = "channel matrix is not full row rank";
    return out;
  }
  const Matrix abs_pinv = pseudo_inverse(h).cwiseAbs();
  const Vector bounds = amplitude_bounds(problem.policy);
  auto fits = [&](double level) {
    return amplitude_usage(abs_pinv, levels_to_amplitudes(problem, level), bounds) <= 1.0;
  };

  double lo = -problem.thresholds.minCoeff();
  if (!fits(lo)) {
    out.level = -std::numeric_limits<double>::infinity();
    out.reason = "amplitude budget exhausted";
    return out;
  }
  double hi = lo + 1.0;
  while (fits(hi) && hi < 1e3) hi = lo + 2.0 * (hi - lo);
  for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    (fits(mid) ? lo : hi) = mid;
  }
  out.level = lo;
  if (lo < 0.0) {
    out.reason = "thresholds unreachable with zero forcing";
    return out;
  }
  out.feasible = true;
  Vector u = levels_to_amplitudes(problem, lo);
  // Step back from the amplitude boundary when the margin allows it.
  const Vector inner_u = levels_to_amplitudes(problem, 0.5 * lo);
  if (lo > 1e-6) u = inner_u;
  out.w = zf_precoder(h, u);
  return out;
}

RandomZfResult random_zf_selection(const DesignProblem& problem, int n_samples,
                                   std::uint64_t seed, ZfSampling mode) {
  RandomZfResult out;
  const Matrix& h = problem.gains();
  if (!full_row_rank(h)) return out;
  const Matrix hp = pseudo_inverse(h);
  const Matrix abs_pinv = hp.cwiseAbs();
  const Vector bounds = amplitude_bounds(problem.policy);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Index users = problem.users();

  for (int s = 0; s < n_samples; ++s) {
    Vector u(users);
    for (Index k = 0; k < users; ++k) u(k) = unit(rng);
    const double scale_draw = unit(rng);
    const double usage = amplitude_usage(abs_pinv, u, bounds);
    if (!(usage > 0.0) || !std::isfinite(usage)) continue;
    double c = 1.0 / usage;
    if (mode == ZfSampling::interior) c *= scale_draw;
    const Matrix w = hp * (c * u).asDiagonal();
    if (!row_l1_feasible(w, problem.policy, 1e-12)) continue;
    if (problem.threshold_margin(w) < 0.0) continue;
    ++out.feasible_candidates;
    const double e = problem.efficiency(w);
    if (!out.feasible || e > out.efficiency) {
      out.feasible = true;
      out.efficiency = e;
      out.w = w;
    }
  }
  return out;
}

Matrix random_feasible_precoder(const DrivePolicy& policy, Index users, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vector bounds = amplitude_bounds(policy);
  Matrix w(bounds.size(), users);
  for (Index n = 0; n < w.rows(); ++n) {
    for (Index k = 0; k < users; ++k) w(n, k) = sym(rng);
    const double l1 = w.row(n).cwiseAbs().sum();
    const double share = unit(rng);
    if (l1 > 0.0) w.row(n) *= share * bounds(n) / l1;
  }
  return w;
}

FeasibilityVerdict detect_feasibility(const DesignProblem& problem, std::uint64_t seed,
                                      bool allow_fallback, const InnerConfig& cfg) {
  FeasibilityVerdict out;
  const ZfInitialPoint zf = zf_initial_point(problem);
  if (zf.feasible) {
    out.feasible = true;
    out.by_zero_forcing = true;
    out.w = zf.w;
    return out;
  }
  if (!allow_fallback) return out;
  // Start the margin search from the balanced ZF point (zero thresholds); a random
  // amplitude-feasible precoder stands in when H has no right inverse.
  DesignProblem balanced = problem;
  balanced.thresholds.setZero();
  const ZfInitialPoint zf0 = zf_initial_point(balanced);
  const Matrix start =
      zf0.feasible ? zf0.w : random_feasible_precoder(problem.policy, problem.users(), seed);
  InnerConfig search = cfg;
  search.max_iter = std::min(cfg.max_iter, 30);
  const FeasibilitySearch found = cccp_feasibility_search(problem, start, search);
  out.feasible = found.feasible;
  out.w = found.w;
  return out;
}

}  // namespace vlcsee
