#include "vlcsee/cccp_direct.hpp"

#include <cmath>

namespace vlcsee {

using conic::AffineExpr;

SlackState evaluate_slacks(const Matrix& w, const Matrix& gains, const LinkCoefficients& coeffs) {
  const Matrix g = gains * w;
  const Index users = g.rows();
  SlackState s;
  s.p1 = Vector::Zero(users);
  s.p2 = Vector::Zero(users);
  s.p3 = Vector::Zero(users);
  for (Index k = 0; k < users; ++k) {
    for (Index i = 0; i < users; ++i) {
      s.p1(k) += g(k, i) * g(k, i);
      if (i != k) {
        s.p2(k) += g(k, i) * g(k, i);
        s.p3(k) += coeffs.b(i) * g(i, k) * g(i, k);
      }
    }
  }
  s.p1 = s.p1.cwiseProduct(coeffs.a);
  s.p2 = s.p2.cwiseProduct(coeffs.b);
  auto half_log = [](const Vector& p) {
    return Vector((0.5 * (1.0 + p.array()).log() / kLn2).matrix());
  };
  s.r1 = half_log(s.p1);
  s.r2 = half_log(s.p2);
  s.r3 = half_log(s.p3);
  return s;
}

AffineExpr taylor_quadratic_lower(const Vector& w_prev, const Vector& h,
                                  const std::vector<AffineExpr>& w) {
  const double g = h.dot(w_prev);
  AffineExpr out(g * g);
  for (Index n = 0; n < h.size(); ++n) {
    const double c = 2.0 * g * h(n);
    if (c == 0.0) continue;
    out += c * (w[static_cast<std::size_t>(n)] - w_prev(n));
  }
  return out;
}

AffineExpr taylor_log_upper(double p_prev, const AffineExpr& p) {
  return AffineExpr(0.5 * std::log2(1.0 + p_prev)) +
         (p - p_prev) * (1.0 / (2.0 * kLn2 * (1.0 + p_prev)));
}

AffineExpr CccpSubproblem::w(Index n, Index k) const {
  const int idx = static_cast<int>(k * n_t + n);
  return w_pos(idx) - w_neg(idx);
}

Matrix CccpSubproblem::precoder(const Vector& x) const {
  Matrix out(n_t, users);
  for (Index k = 0; k < users; ++k) {
    for (Index n = 0; n < n_t; ++n) {
      const int idx = static_cast<int>(k * n_t + n);
      out(n, k) = x(w_pos.index(idx)) - x(w_neg.index(idx));
    }
  }
  return out;
}

Vector CccpSubproblem::point(const Matrix& w, const SlackState& s, double margin_value) const {
  Vector x = Vector::Zero(program.num_variables());
  for (Index k = 0; k < users; ++k) {
    for (Index n = 0; n < n_t; ++n) {
      const int idx = static_cast<int>(k * n_t + n);
      x(w_pos.index(idx)) = std::max(w(n, k), 0.0);
      x(w_neg.index(idx)) = std::max(-w(n, k), 0.0);
    }
  }
  for (Index k = 0; k < users; ++k) {
    const int i = static_cast<int>(k);
    x(r1.index(i)) = s.r1(k);
    x(r2.index(i)) = s.r2(k);
    x(r3.index(i)) = s.r3(k);
    x(p1.index(i)) = s.p1(k);
    x(p2.index(i)) = s.p2(k);
    x(p3.index(i)) = s.p3(k);
  }
  x(power.index) = w.squaredNorm();
  if (feasibility) x(margin.index) = margin_value;
  return x;
}

CccpSubproblem build_subproblem(const DesignProblem& problem, const Matrix& w_prev,
                                const SlackState& prev, double mu, bool feasibility) {
  CccpSubproblem sp;
  sp.n_t = problem.transmitters();
  sp.users = problem.users();
  sp.feasibility = feasibility;
  const Index nt = sp.n_t;
  const Index users = sp.users;
  const int cells = static_cast<int>(nt * users);
  const int k_int = static_cast<int>(users);
  auto& prog = sp.program;

  sp.w_pos = prog.add_vector("w_pos", cells);
  sp.w_neg = prog.add_vector("w_neg", cells);
  sp.r1 = prog.add_vector("r1", k_int);
  sp.r2 = prog.add_vector("r2", k_int);
  sp.r3 = prog.add_vector("r3", k_int);
  sp.p1 = prog.add_vector("p1", k_int);
  sp.p2 = prog.add_vector("p2", k_int);
  sp.p3 = prog.add_vector("p3", k_int);
  sp.power = prog.add_scalar("power");
  if (feasibility) sp.margin = prog.add_scalar("margin");

  for (int i = 0; i < cells; ++i) {
    prog.add_nonnegative(sp.w_pos(i), "w_pos");
    prog.add_nonnegative(sp.w_neg(i), "w_neg");
  }
  const Vector bounds = amplitude_bounds(problem.policy);
  std::vector<AffineExpr> entries;
  for (Index n = 0; n < nt; ++n) {
    AffineExpr row;
    for (Index k = 0; k < users; ++k) {
      const int idx = static_cast<int>(k * nt + n);
      row += sp.w_pos(idx) + sp.w_neg(idx);
    }
    prog.add_less_equal(row, bounds(n), "amplitude");
  }
  for (Index k = 0; k < users; ++k) {
    for (Index n = 0; n < nt; ++n) entries.push_back(sp.w(n, k));
  }
  prog.add_quadratic(sp.power.expr(), entries, "power");
  // Without the power price the epigraph is free upwards; cap it at a value every
  // amplitude-feasible W satisfies.
  if (feasibility || mu * problem.power.equiv_resistance <= 0.0)
    prog.add_less_equal(sp.power.expr(), bounds.squaredNorm(), "power_cap");

  // column expressions of W and the scalar products h_j^T w_i
  std::vector<std::vector<AffineExpr>> cols(static_cast<std::size_t>(users));
  for (Index i = 0; i < users; ++i) {
    for (Index n = 0; n < nt; ++n) cols[static_cast<std::size_t>(i)].push_back(sp.w(n, i));
  }
  const Matrix& h = problem.gains();
  auto inner = [&](Index j, Index i) {
    AffineExpr e;
    for (Index n = 0; n < nt; ++n) e += h(j, n) * cols[static_cast<std::size_t>(i)][static_cast<std::size_t>(n)];
    return e;
  };

  const LinkCoefficients& c = problem.coeffs;
  AffineExpr total_rate;
  for (Index k = 0; k < users; ++k) {
    const int ki = static_cast<int>(k);
    add_log_epigraph(prog, sp.r1(ki), sp.p1(ki), 0.5, "rate_signal");

    AffineExpr lower;
    for (Index i = 0; i < users; ++i) {
      lower += taylor_quadratic_lower(w_prev.col(i), h.row(k).transpose(),
                                      cols[static_cast<std::size_t>(i)]);
    }
    prog.add_less_equal(sp.p1(ki), c.a(k) * lower, "signal_linearized");

    if (users > 1) {
      std::vector<AffineExpr> interference, leakage;
      for (Index i = 0; i < users; ++i) {
        if (i == k) continue;
        interference.push_back(std::sqrt(c.b(k)) * inner(k, i));
        leakage.push_back(std::sqrt(c.b(i)) * inner(i, k));
      }
      prog.add_quadratic(sp.p2(ki), interference, "interference");
      prog.add_quadratic(sp.p3(ki), leakage, "leakage");
    } else {
      prog.add_nonnegative(sp.p2(ki), "interference");
      prog.add_nonnegative(sp.p3(ki), "leakage");
    }
    prog.add_less_equal(taylor_log_upper(prev.p2(k), sp.p2(ki)), sp.r2(ki), "interference_linearized");
    prog.add_less_equal(taylor_log_upper(prev.p3(k), sp.p3(ki)), sp.r3(ki), "leakage_linearized");

    AffineExpr rate = sp.r1(ki) - sp.r2(ki) - sp.r3(ki);
    AffineExpr floor_expr(problem.thresholds(k));
    if (feasibility) floor_expr += sp.margin.expr();
    prog.add_less_equal(floor_expr, rate, "threshold");
    total_rate += rate;
  }

  if (feasibility) {
    prog.maximize(sp.margin.expr());
  } else {
    const double dc = dc_power(problem.policy, problem.power);
    prog.maximize(total_rate - mu * (dc + problem.power.equiv_resistance * sp.power.expr()));
  }
  return sp;
}

namespace {

conic::SolverOptions solver_options(const InnerConfig& cfg) {
  conic::SolverOptions opt;
  opt.tol = cfg.solver_tol;
  return opt;
}

}  // namespace

InnerResult solve_parameterized(const DesignProblem& problem, double mu, const Matrix& w_init,
                                const InnerConfig& cfg) {
  InnerResult out;
  Matrix w = w_init;
  SlackState slack = evaluate_slacks(w, problem.gains(), problem.coeffs);
  out.w = w;
  out.objective = evaluate_iterate(problem, w, mu, 0).objective;
  double best = out.objective;
  const auto opt = solver_options(cfg);

  for (int it = 1; it <= cfg.max_iter; ++it) {
    CccpSubproblem sp = build_subproblem(problem, w, slack, mu);
    const conic::SolveResult res = solve(sp.program, opt, sp.point(w, slack));
    if (res.status != conic::SolveStatus::optimal) {
      if (it == 1) {
        out.status = res.status == conic::SolveStatus::infeasible ? InnerStatus::infeasible
                                                                  : InnerStatus::numerical_error;
      } else {
        out.status = InnerStatus::max_iter;
      }
      return out;
    }
    const Matrix w_next = sp.precoder(res.x);
    const SlackState s_next = evaluate_slacks(w_next, problem.gains(), problem.coeffs);
    InnerIterate rec = evaluate_iterate(problem, w_next, mu, it);
    out.iterations = it;
    if (rec.objective >= best) {
      best = rec.objective;
      out.w = w_next;
      out.objective = rec.objective;
    }
    out.trace.push_back(rec);

    const bool settled =
        relative_change(w_next, w, cfg.change_floor) <= cfg.eps &&
        relative_change(s_next.p2, slack.p2, cfg.slack_floor) <= cfg.eps &&
        relative_change(s_next.p3, slack.p3, cfg.slack_floor) <= cfg.eps;
    w = w_next;
    slack = s_next;
    if (settled) {
      out.status = InnerStatus::converged;
      return out;
    }
  }
  out.status = InnerStatus::max_iter;
  return out;
}

FeasibilitySearch cccp_feasibility_search(const DesignProblem& problem, const Matrix& w_init,
                                          const InnerConfig& cfg) {
  FeasibilitySearch out;
  Matrix w = w_init;
  out.w = w;
  out.margin = problem.threshold_margin(w);
  const auto opt = solver_options(cfg);
  for (int it = 1; it <= cfg.max_iter; ++it) {
    if (out.margin >= 0.0) break;
    const SlackState slack = evaluate_slacks(w, problem.gains(), problem.coeffs);
    CccpSubproblem sp = build_subproblem(problem, w, slack, 0.0, true);
    const conic::SolveResult res = solve(sp.program, opt, sp.point(w, slack, out.margin));
    out.iterations = it;
    if (res.status != conic::SolveStatus::optimal) break;
    const Matrix w_next = sp.precoder(res.x);
    const double margin = problem.threshold_margin(w_next);
    const double gain = margin - out.margin;
    if (margin > out.margin) {
      out.margin = margin;
      out.w = w_next;
    }
    w = w_next;
    if (gain <= cfg.eps * std::max(1.0, std::abs(margin))) break;
  }
  out.feasible = out.margin >= 0.0;
  return out;
}

}  // namespace vlcsee
