#include "vlcsee/cccp_sdr.hpp"

#include <cmath>

#include "vlcsee/conic/solver.hpp"

namespace vlcsee {

using conic::AffineExpr;

std::vector<Matrix> gram_channel(const Matrix& gains) {
  std::vector<Matrix> out;
  for (Index k = 0; k < gains.rows(); ++k) {
    out.push_back(gains.row(k).transpose() * gains.row(k));
  }
  return out;
}

std::vector<Matrix> gram_precoder(const Matrix& w) {
  std::vector<Matrix> out;
  for (Index k = 0; k < w.cols(); ++k) out.push_back(w.col(k) * w.col(k).transpose());
  return out;
}

namespace {

// Tr(P_k Q_i) for symmetric arguments.
double tr(const Matrix& p, const Matrix& q) { return p.cwiseProduct(q).sum(); }

struct GTerms {
  double interference = 0.0;  // b_k sum_{i!=k} Tr(P_k Q_i)
  double leakage = 0.0;       // sum_{i!=k} b_i Tr(P_i Q_k)
};

GTerms g_terms(const std::vector<Matrix>& q, const std::vector<Matrix>& p,
               const LinkCoefficients& coeffs, Index k) {
  GTerms t;
  const auto users = static_cast<Index>(q.size());
  for (Index i = 0; i < users; ++i) {
    if (i == k) continue;
    t.interference += coeffs.b(k) * tr(p[static_cast<std::size_t>(k)], q[static_cast<std::size_t>(i)]);
    t.leakage += coeffs.b(i) * tr(p[static_cast<std::size_t>(i)], q[static_cast<std::size_t>(k)]);
  }
  return t;
}

}  // namespace

std::pair<double, double> fk_gk(const std::vector<Matrix>& q, const std::vector<Matrix>& p,
                                const LinkCoefficients& coeffs, Index k) {
  double own = 0.0;
  for (const Matrix& qi : q) own += tr(p[static_cast<std::size_t>(k)], qi);
  const GTerms t = g_terms(q, p, coeffs, k);
  const double f = 0.5 * std::log2(1.0 + coeffs.a(k) * own);
  const double g = 0.5 * std::log2(1.0 + t.interference) + 0.5 * std::log2(1.0 + t.leakage);
  return {f, g};
}

std::vector<Matrix> grad_g(const std::vector<Matrix>& q_prev, const std::vector<Matrix>& p,
                           const LinkCoefficients& coeffs, Index k) {
  const auto users = static_cast<Index>(q_prev.size());
  const Index nt = p.front().rows();
  const GTerms t = g_terms(q_prev, p, coeffs, k);
  const double z1 = 1.0 / (2.0 * kLn2 * (1.0 + t.interference));
  const double z2 = 1.0 / (2.0 * kLn2 * (1.0 + t.leakage));
  std::vector<Matrix> out(static_cast<std::size_t>(users), Matrix::Zero(nt, nt));
  Matrix leak = Matrix::Zero(nt, nt);
  for (Index j = 0; j < users; ++j) {
    if (j != k) leak += coeffs.b(j) * p[static_cast<std::size_t>(j)].transpose();
  }
  for (Index i = 0; i < users; ++i) {
    out[static_cast<std::size_t>(i)] =
        i == k ? Matrix(z2 * leak)
               : Matrix(z1 * coeffs.b(k) * p[static_cast<std::size_t>(k)].transpose());
  }
  return out;
}

EllipsoidWeights ellipsoid_weights(const std::vector<Matrix>& q_prev, double floor) {
  EllipsoidWeights wts;
  wts.floor = floor;
  const Index nt = q_prev.front().rows();
  wts.delta.resize(nt, static_cast<Index>(q_prev.size()));
  for (std::size_t k = 0; k < q_prev.size(); ++k) {
    for (Index n = 0; n < nt; ++n) {
      wts.delta(n, static_cast<Index>(k)) = std::max(std::sqrt(std::max(q_prev[k](n, n), 0.0)), floor);
    }
  }
  return wts;
}

void ellipsoid_constraint(conic::ConicProgram& program, const std::vector<conic::SymmetricVar>& q,
                          const EllipsoidWeights& weights, const DrivePolicy& policy, Index n) {
  const double bound = amplitude_bound(policy, n);
  const double total = weights.delta.row(n).sum();
  AffineExpr lhs;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const int ni = static_cast<int>(n);
    lhs += q[k](ni, ni, 1.0 / weights.delta(n, static_cast<Index>(k)));
  }
  program.add_less_equal(lhs, bound * bound / total, "amplitude_ellipsoid");
}

SdrSubproblem build_sdr_subproblem(const DesignProblem& problem,
                                   const std::vector<Matrix>& q_prev, double mu) {
  SdrSubproblem sp;
  const Index users = problem.users();
  const Index nt = problem.transmitters();
  auto& prog = sp.program;
  for (Index k = 0; k < users; ++k) {
    sp.q.push_back(prog.add_symmetric("Q" + std::to_string(k + 1), static_cast<int>(nt)));
  }
  sp.f = prog.add_vector("f", static_cast<int>(users));
  for (const auto& qk : sp.q) prog.add_psd(qk, "psd");

  const EllipsoidWeights wts = ellipsoid_weights(q_prev);
  for (Index n = 0; n < nt; ++n) ellipsoid_constraint(prog, sp.q, wts, problem.policy, n);

  const std::vector<Matrix> p = gram_channel(problem.gains());
  const LinkCoefficients& c = problem.coeffs;
  AffineExpr total_rate;
  AffineExpr trace_sum;
  for (const auto& qk : sp.q) trace_sum += qk.trace();

  for (Index k = 0; k < users; ++k) {
    const int ki = static_cast<int>(k);
    AffineExpr snr;
    for (const auto& qi : sp.q) snr += c.a(k) * qi.inner(p[static_cast<std::size_t>(k)]);
    add_log_epigraph(prog, sp.f(ki), snr, 0.5, "rate_signal");

    // g_k linearised at Q_prev
    const std::vector<Matrix> grad = grad_g(q_prev, p, c, k);
    const double g_prev = fk_gk(q_prev, p, c, k).second;
    AffineExpr g_lin(g_prev);
    for (Index i = 0; i < users; ++i) {
      const auto iu = static_cast<std::size_t>(i);
      g_lin += sp.q[iu].inner(grad[iu]);
      g_lin -= grad[iu].cwiseProduct(q_prev[iu]).sum();
    }
    const AffineExpr rate = sp.f(ki) - g_lin;
    prog.add_less_equal(AffineExpr(problem.thresholds(k)), rate, "threshold");
    total_rate += rate;
  }
  const double dc = dc_power(problem.policy, problem.power);
  prog.maximize(total_rate - mu * (dc + problem.power.equiv_resistance * trace_sum));
  return sp;
}

Vector SdrSubproblem::point(const std::vector<Matrix>& q_value, const std::vector<Matrix>& p,
                            const LinkCoefficients& coeffs) const {
  Vector x = Vector::Zero(program.num_variables());
  for (std::size_t k = 0; k < q.size(); ++k) {
    for (int i = 0; i < q[k].dim; ++i) {
      for (int j = i; j < q[k].dim; ++j) x(q[k].index(i, j)) = q_value[k](i, j);
    }
    x(f.index(static_cast<int>(k))) = fk_gk(q_value, p, coeffs, static_cast<Index>(k)).first;
  }
  return x;
}

std::vector<Matrix> SdrSubproblem::gram(const Vector& x) const {
  std::vector<Matrix> out;
  for (const auto& qk : q) {
    Matrix m(qk.dim, qk.dim);
    for (int i = 0; i < qk.dim; ++i) {
      for (int j = i; j < qk.dim; ++j) m(i, j) = m(j, i) = x(qk.index(i, j));
    }
    out.push_back(std::move(m));
  }
  return out;
}

Vector rank_one_retrieval(const Matrix& q) {
  const Index n = q.rows();
  if (n == 0 || q.cwiseAbs().maxCoeff() == 0.0) return Vector::Zero(n);
  const Matrix sym = 0.5 * (q + q.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const Vector& vals = eig.eigenvalues();  // ascending
  const double top = vals(n - 1);
  if (top <= 0.0) return Vector::Zero(n);

  // Top eigenspace up to a relative tie tolerance.
  const double tie = 1e-9 * std::max(1.0, std::abs(top));
  Index first = n - 1;
  while (first > 0 && top - vals(first - 1) <= tie) --first;
  const Matrix basis = eig.eigenvectors().rightCols(n - first);

  Vector v = basis.col(basis.cols() - 1);
  if (basis.cols() > 1) {
    for (Index e = 0; e < n; ++e) {
      const Vector pe = basis * basis.row(e).transpose();
      if (pe.norm() > 1e-8) {
        v = pe.normalized();
        break;
      }
    }
  }
  const double mag = v.cwiseAbs().maxCoeff();
  for (Index i = 0; i < n; ++i) {
    if (std::abs(v(i)) > 1e-9 * mag) {
      if (v(i) < 0.0) v = -v;
      break;
    }
  }
  return std::sqrt(top) * v;
}

double relaxation_gap(const std::vector<Matrix>& q, const Matrix& w) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const Vector wk = w.col(static_cast<Index>(k));
    num += (q[k] - wk * wk.transpose()).squaredNorm();
    den += q[k].squaredNorm();
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

namespace {

// Column-wise change up to the sign of each column.
double signless_change(const Matrix& now, const Matrix& before, double floor) {
  double num = 0.0;
  for (Index k = 0; k < now.cols(); ++k) {
    num += std::min((now.col(k) - before.col(k)).squaredNorm(),
                    (now.col(k) + before.col(k)).squaredNorm());
  }
  return std::sqrt(num) / std::max(before.norm(), floor);
}

}  // namespace

InnerResult solve_parameterized_sdr(const DesignProblem& problem, double mu,
                                    const Matrix& w_init, const InnerConfig& cfg) {
  InnerResult out;
  out.w = w_init;
  out.objective = evaluate_iterate(problem, w_init, mu, 0).objective;
  double best = out.objective;
  Matrix w = w_init;
  const std::vector<Matrix> p = gram_channel(problem.gains());
  conic::SolverOptions opt;
  opt.tol = cfg.solver_tol;

  for (int it = 1; it <= cfg.max_iter; ++it) {
    const std::vector<Matrix> q_prev = gram_precoder(w);
    SdrSubproblem sp = build_sdr_subproblem(problem, q_prev, mu);
    const conic::SolveResult res = solve(sp.program, opt, sp.point(q_prev, p, problem.coeffs));
    if (res.status != conic::SolveStatus::optimal) {
      if (it == 1) {
        out.status = res.status == conic::SolveStatus::infeasible ? InnerStatus::infeasible
                                                                  : InnerStatus::numerical_error;
      } else {
        out.status = InnerStatus::max_iter;
      }
      return out;
    }
    const std::vector<Matrix> q_star = sp.gram(res.x);
    Matrix w_next(w.rows(), w.cols());
    for (std::size_t k = 0; k < q_star.size(); ++k) {
      w_next.col(static_cast<Index>(k)) = rank_one_retrieval(q_star[k]);
    }
    InnerIterate rec = evaluate_iterate(problem, w_next, mu, it);
    rec.relaxation_gap = relaxation_gap(q_star, w_next);
    out.iterations = it;
    const bool meets = (rec.rates - problem.thresholds).minCoeff() >= -1e-4 &&
                       row_l1_feasible(w_next, problem.policy, 1e-9);
    if (!meets) out.threshold_violation = true;
    if (meets && rec.objective >= best) {
      best = rec.objective;
      out.w = w_next;
      out.objective = rec.objective;
    }
    out.trace.push_back(rec);
    const bool settled = signless_change(w_next, w, cfg.change_floor) <= cfg.eps;
    w = w_next;
    if (settled) {
      out.status = InnerStatus::converged;
      return out;
    }
  }
  out.status = InnerStatus::max_iter;
  return out;
}

}  // namespace vlcsee
