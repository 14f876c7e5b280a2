#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "vlcsee/conic/solver.hpp"

namespace vlcsee::conic {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::numerical_error: return "numerical_error";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One cone membership s = G x[cols] + h in the interior of its cone.
struct Block {
  ConeKind kind = ConeKind::nonnegative;
  int dim = 1;
  std::vector<int> cols;
  Matrix g;
  Vector h;
  double nu = 1.0;
};

struct Compiled {
  int n = 0;
  std::vector<Block> blocks;
  Matrix a;  // equality rows: a x = b
  Vector b;
  double nu = 0.0;
};

// Cone-direction used to relax each block by sigma in phase I; it lies inside the cone.
double shift_coefficient(const Block& blk, int row) {
  switch (blk.kind) {
    case ConeKind::nonnegative: return 1.0;
    case ConeKind::quadratic: return row == 0 ? 1.0 : 0.0;
    case ConeKind::exponential: return row == 0 ? -1.0 : 1.0;
    case ConeKind::psd: {
      // row-major upper triangle: diagonal entries sit at offsets i*m - i(i-1)/2
      int idx = 0;
      for (int i = 0; i < blk.dim; ++i) {
        if (idx == row) return 1.0;
        idx += blk.dim - i;
      }
      return 0.0;
    }
    case ConeKind::equality: return 0.0;
  }
  return 0.0;
}

Compiled compile(const ConicProgram& program, bool with_sigma, const Vector* center = nullptr) {
  Compiled out;
  const int n0 = program.num_variables();
  out.n = n0 + (with_sigma ? 1 : 0);
  std::vector<const AffineExpr*> equalities;

  for (const Constraint& c : program.constraints()) {
    if (c.kind == ConeKind::equality) {
      equalities.push_back(&c.exprs[0]);
      continue;
    }
    Block blk;
    blk.kind = c.kind;
    blk.dim = c.dim;
    for (const AffineExpr& e : c.exprs) {
      for (const Term& t : e.terms()) blk.cols.push_back(t.var);
    }
    if (with_sigma) blk.cols.push_back(n0);
    std::sort(blk.cols.begin(), blk.cols.end());
    blk.cols.erase(std::unique(blk.cols.begin(), blk.cols.end()), blk.cols.end());

    const int rows = static_cast<int>(c.exprs.size());
    blk.g = Matrix::Zero(rows, static_cast<Index>(blk.cols.size()));
    blk.h.resize(rows);
    auto local = [&](int var) {
      return static_cast<Index>(std::lower_bound(blk.cols.begin(), blk.cols.end(), var) -
                                blk.cols.begin());
    };
    for (int r = 0; r < rows; ++r) {
      blk.h(r) = c.exprs[static_cast<std::size_t>(r)].constant();
      for (const Term& t : c.exprs[static_cast<std::size_t>(r)].terms()) {
        blk.g(r, local(t.var)) += t.coeff;
      }
      if (with_sigma) blk.g(r, local(n0)) += shift_coefficient(blk, r);
    }
    switch (c.kind) {
      case ConeKind::exponential: blk.nu = 3.0; break;
      case ConeKind::psd: blk.nu = c.dim; break;
      default: blk.nu = 1.0; break;
    }
    out.nu += blk.nu;
    out.blocks.push_back(std::move(blk));
  }

  if (with_sigma) {
    // Phase I only prices sigma, so variables priced solely by the real objective
    // would drift off along recession directions; a wide box around the seed stops that.
    const double radius = 1e4 * (1.0 + (center ? center->cwiseAbs().maxCoeff() : 0.0));
    for (int i = 0; i < n0; ++i) {
      const double c0 = center ? (*center)(i) : 0.0;
      for (const double sign : {1.0, -1.0}) {
        Block blk;
        blk.cols = {i};
        blk.g = Matrix::Constant(1, 1, -sign);
        blk.h = Vector::Constant(1, radius + sign * c0);
        out.nu += 1.0;
        out.blocks.push_back(std::move(blk));
      }
    }
  }

  out.a = Matrix::Zero(static_cast<Index>(equalities.size()), out.n);
  out.b = Vector::Zero(static_cast<Index>(equalities.size()));
  for (std::size_t i = 0; i < equalities.size(); ++i) {
    for (const Term& t : equalities[i]->terms()) out.a(static_cast<Index>(i), t.var) += t.coeff;
    out.b(static_cast<Index>(i)) = -equalities[i]->constant();
  }
  return out;
}

Vector block_point(const Block& blk, const Vector& x) {
  Vector s = blk.h;
  for (Index j = 0; j < static_cast<Index>(blk.cols.size()); ++j) {
    const double xj = x(blk.cols[static_cast<std::size_t>(j)]);
    if (xj != 0.0) s.noalias() += blk.g.col(j) * xj;
  }
  return s;
}

// Barrier value, gradient and Hessian with respect to s. Returns false outside the
// open cone; grad/hess may be null for value-only queries.
bool barrier(const Block& blk, const Vector& s, double& value, Vector* grad, Matrix* hess) {
  switch (blk.kind) {
    case ConeKind::nonnegative: {
      if (!(s(0) > 0.0)) return false;
      value = -std::log(s(0));
      if (grad) *grad = Vector::Constant(1, -1.0 / s(0));
      if (hess) *hess = Matrix::Constant(1, 1, 1.0 / (s(0) * s(0)));
      return true;
    }
    case ConeKind::quadratic: {
      const Index m = s.size() - 1;
      const double q = s(0) - s.tail(m).squaredNorm();
      if (!(q > 0.0)) return false;
      value = -std::log(q);
      if (grad || hess) {
        Vector dq(s.size());
        dq(0) = 1.0;
        dq.tail(m) = -2.0 * s.tail(m);
        if (grad) *grad = -dq / q;
        if (hess) {
          *hess = dq * dq.transpose() / (q * q);
          hess->diagonal().tail(m).array() += 2.0 / q;
        }
      }
      return true;
    }
    case ConeKind::exponential: {
      const double x = s(0), y = s(1), z = s(2);
      if (!(y > 0.0) || !(z > 0.0)) return false;
      const double lzy = std::log(z / y);
      const double psi = y * lzy - x;
      if (!(psi > 0.0)) return false;
      value = -std::log(psi) - std::log(z) - std::log(y);
      if (grad || hess) {
        const Eigen::Vector3d dpsi(-1.0, lzy - 1.0, y / z);
        if (grad) {
          *grad = -dpsi / psi;
          (*grad)(1) -= 1.0 / y;
          (*grad)(2) -= 1.0 / z;
        }
        if (hess) {
          Eigen::Matrix3d d2psi = Eigen::Matrix3d::Zero();
          d2psi(1, 1) = -1.0 / y;
          d2psi(1, 2) = d2psi(2, 1) = 1.0 / z;
          d2psi(2, 2) = -y / (z * z);
          Eigen::Matrix3d hh = dpsi * dpsi.transpose() / (psi * psi) - d2psi / psi;
          hh(1, 1) += 1.0 / (y * y);
          hh(2, 2) += 1.0 / (z * z);
          *hess = hh;
        }
      }
      return true;
    }
    case ConeKind::psd: {
      const int m = blk.dim;
      Matrix sm(m, m);
      int idx = 0;
      for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) sm(i, j) = sm(j, i) = s(idx++);
      }
      Eigen::LLT<Matrix> llt(sm);
      if (llt.info() != Eigen::Success) return false;
      const Matrix& l = llt.matrixLLT();
      double logdet = 0.0;
      for (int i = 0; i < m; ++i) {
        if (!(l(i, i) > 0.0)) return false;
        logdet += std::log(l(i, i));
      }
      value = -2.0 * logdet;
      if (grad || hess) {
        const Matrix inv = llt.solve(Matrix::Identity(m, m));
        const int rows = static_cast<int>(s.size());
        std::vector<std::pair<int, int>> entry;
        entry.reserve(static_cast<std::size_t>(rows));
        for (int i = 0; i < m; ++i) {
          for (int j = i; j < m; ++j) entry.emplace_back(i, j);
        }
        if (grad) {
          grad->resize(rows);
          for (int e = 0; e < rows; ++e) {
            const auto [i, j] = entry[static_cast<std::size_t>(e)];
            (*grad)(e) = (i == j) ? -inv(i, i) : -2.0 * inv(i, j);
          }
        }
        if (hess) {
          hess->resize(rows, rows);
          for (int e1 = 0; e1 < rows; ++e1) {
            const auto [a, b] = entry[static_cast<std::size_t>(e1)];
            for (int e2 = e1; e2 < rows; ++e2) {
              const auto [c, d] = entry[static_cast<std::size_t>(e2)];
              // tr(X E_pq X E_rs) = X_sp X_qr, summed over both orientations of
              // each off-diagonal entry
              double v = inv(d, a) * inv(b, c);
              if (a != b) v += inv(d, b) * inv(a, c);
              if (c != d) v += inv(c, a) * inv(b, d);
              if (a != b && c != d) v += inv(c, b) * inv(a, d);
              (*hess)(e1, e2) = (*hess)(e2, e1) = v;
            }
          }
        }
      }
      return true;
    }
    case ConeKind::equality: return true;
  }
  return false;
}

class BarrierProblem {
 public:
  BarrierProblem(const Compiled& compiled, Vector cost, const SolverOptions& options)
      : p_(compiled), c_(std::move(cost)), opt_(options) {}

  bool interior(const Vector& x) const {
    double v = 0.0;
    for (const Block& blk : p_.blocks) {
      if (!barrier(blk, block_point(blk, x), v, nullptr, nullptr)) return false;
    }
    return true;
  }

  double value(const Vector& x, double t) const {
    double total = t * c_.dot(x);
    double v = 0.0;
    for (const Block& blk : p_.blocks) {
      if (!barrier(blk, block_point(blk, x), v, nullptr, nullptr)) return kInf;
      total += v;
    }
    return total;
  }

  // Assembles gradient and Hessian of t c^T x + phi(x).
  bool derivatives(const Vector& x, double t, Vector& g, Matrix& h) const {
    g = t * c_;
    h = Matrix::Zero(p_.n, p_.n);
    double v = 0.0;
    Vector gs;
    Matrix hs;
    for (const Block& blk : p_.blocks) {
      if (!barrier(blk, block_point(blk, x), v, &gs, &hs)) return false;
      const Vector gl = blk.g.transpose() * gs;
      const Matrix hl = blk.g.transpose() * hs * blk.g;
      const std::size_t nc = blk.cols.size();
      for (std::size_t i = 0; i < nc; ++i) {
        const int ci = blk.cols[i];
        g(ci) += gl(static_cast<Index>(i));
        for (std::size_t j = 0; j < nc; ++j) {
          h(ci, blk.cols[j]) += hl(static_cast<Index>(i), static_cast<Index>(j));
        }
      }
    }
    return true;
  }

  // Newton direction for the equality-constrained step: H dx + A^T nu = -rhs, A dx = 0.
  // Solved on the Jacobi-scaled Hessian so badly scaled variables keep full precision.
  bool newton_direction(const Matrix& h, const Vector& rhs, Vector& dx) const {
    const Index n = h.rows();
    Vector d(n);
    for (Index i = 0; i < n; ++i) d(i) = h(i, i) > 0.0 ? 1.0 / std::sqrt(h(i, i)) : 1.0;
    const Matrix hs = d.asDiagonal() * h * d.asDiagonal();
    const Vector rs = d.cwiseProduct(rhs);
    double ridge = 1e-13;
    for (int attempt = 0; attempt < 8; ++attempt, ridge *= 100.0) {
      Matrix hr = hs;
      hr.diagonal().array() += ridge;
      Eigen::LLT<Matrix> llt(hr);
      if (llt.info() != Eigen::Success) continue;
      Vector y;
      if (p_.a.rows() == 0) {
        y = -llt.solve(rs);
      } else {
        const Matrix as = p_.a * d.asDiagonal();
        const Matrix hinv_at = llt.solve(as.transpose());
        const Vector hinv_r = llt.solve(rs);
        const Matrix schur = as * hinv_at;
        const Vector nu = schur.colPivHouseholderQr().solve(-as * hinv_r);
        y = -hinv_r - hinv_at * nu;
      }
      dx = d.cwiseProduct(y);
      if (dx.allFinite()) return true;
    }
    return false;
  }

  enum class CenterOutcome { centered, stopped, budget, unbounded, failed };

  CenterOutcome center(Vector& x, double t, int& budget,
                       const std::function<bool(const Vector&)>& stop_early) const {
    Vector g, dx;
    Matrix h;
    for (int iter = 0; iter < 200; ++iter) {
      if (budget <= 0) return CenterOutcome::budget;
      if (!derivatives(x, t, g, h)) return CenterOutcome::failed;
      if (!newton_direction(h, g, dx)) return CenterOutcome::failed;
      const double lambda2 = -g.dot(dx);
      if (lambda2 / 2.0 <= opt_.newton_tol) return CenterOutcome::centered;

      double alpha = 1.0;
      int halvings = 0;
      while (!interior(x + alpha * dx) && halvings < 80) {
        alpha *= 0.5;
        ++halvings;
      }
      const double f0 = value(x, t);
      while (value(x + alpha * dx, t) > f0 - 0.01 * alpha * lambda2 && halvings < 80) {
        alpha *= 0.5;
        ++halvings;
      }
      if (halvings >= 80) {
        // no decrease available at working precision; treat as centered
        return lambda2 < 1e-6 ? CenterOutcome::centered : CenterOutcome::failed;
      }
      const double f1 = value(x + alpha * dx, t);
      x += alpha * dx;
      --budget;
      // progress below working precision: the point is as centered as it gets
      if (f0 - f1 <= 1e-14 * (1.0 + std::abs(f0)) && lambda2 < 1e-4) {
        return CenterOutcome::centered;
      }
      if (x.cwiseAbs().maxCoeff() > 1e12) return CenterOutcome::unbounded;
      if (stop_early && stop_early(x)) return CenterOutcome::stopped;
    }
    return CenterOutcome::centered;
  }

  // Starting t balancing the objective against the barrier gradient at x.
  double initial_t(const Vector& x) const {
    Vector g, dc, dg;
    Matrix h;
    if (!derivatives(x, 0.0, g, h)) return 1.0;
    if (!newton_direction(h, c_, dc) || !newton_direction(h, g, dg)) return 1.0;
    const double ccc = -c_.dot(dc);
    const double cg = -c_.dot(dg);
    double t = ccc > 0.0 ? -cg / ccc : 1.0;
    if (!std::isfinite(t) || t <= 0.0) t = 1.0;
    return std::clamp(t, 1e-6, 1e6);
  }

  double nu() const { return p_.nu; }

 private:
  const Compiled& p_;
  Vector c_;
  const SolverOptions& opt_;
};

}  // namespace

SolveResult solve(const ConicProgram& program, const SolverOptions& options,
                  const std::optional<Vector>& hint) {
  program.validate();
  SolveResult result;
  const int n = program.num_variables();
  int budget = options.max_newton_steps;

  Vector cost = Vector::Zero(n);
  for (const Term& t : program.objective().terms()) cost(t.var) -= t.coeff;

  Compiled main = compile(program, false);

  // Equality-feasible seed.
  Vector x = (hint && hint->size() == n) ? *hint : Vector::Zero(n);
  if (main.a.rows() > 0) {
    const Vector resid = main.b - main.a * x;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(main.a);
    x += cod.solve(resid);
    const double miss = (main.a * x - main.b).cwiseAbs().maxCoeff();
    if (miss > 1e-8 * (1.0 + main.b.cwiseAbs().maxCoeff())) {
      result.status = SolveStatus::infeasible;
      return result;
    }
  }

  BarrierProblem phase2(main, cost, options);

  if (main.blocks.empty()) {
    // Only equalities: bounded iff the cost is orthogonal to the null space.
    Eigen::FullPivLU<Matrix> lu(main.a.rows() > 0 ? main.a : Matrix::Zero(1, n));
    const Matrix null = lu.kernel();
    if ((null.transpose() * cost).cwiseAbs().maxCoeff() > 1e-12) {
      result.status = SolveStatus::unbounded;
      return result;
    }
    result.status = SolveStatus::optimal;
    result.x = x;
    result.objective = program.objective().evaluate(x);
    return result;
  }

  if (!phase2.interior(x)) {
    // Phase I: minimise sigma subject to every block shifted by sigma * e.
    Compiled relaxed = compile(program, true, &x);
    Vector cost1 = Vector::Zero(n + 1);
    cost1(n) = 1.0;
    BarrierProblem phase1(relaxed, cost1, options);
    Vector z(n + 1);
    z.head(n) = x;
    double sigma = 1e-6 * (1.0 + x.cwiseAbs().maxCoeff());
    z(n) = sigma;
    while (!phase1.interior(z) && sigma < 1e30) {
      sigma *= 4.0;
      z(n) = sigma;
    }
    if (!phase1.interior(z)) {
      result.status = SolveStatus::numerical_error;
      return result;
    }
    auto found = [&](const Vector& zz) { return zz(n) < 0.0 && phase2.interior(zz.head(n)); };
    double t = phase1.initial_t(z);
    const int start_budget = budget;
    bool success = false;
    while (true) {
      const auto outcome = phase1.center(z, t, budget, found);
      if (outcome == BarrierProblem::CenterOutcome::stopped || found(z)) {
        success = true;
        break;
      }
      if (outcome == BarrierProblem::CenterOutcome::budget) {
        result.status = SolveStatus::max_iter;
        result.phase1_iterations = start_budget - budget;
        result.iterations = result.phase1_iterations;
        return result;
      }
      if (outcome == BarrierProblem::CenterOutcome::failed ||
          outcome == BarrierProblem::CenterOutcome::unbounded) {
        result.status = SolveStatus::numerical_error;
        break;
      }
      const double gap = phase1.nu() / t;
      // sigma - gap lower-bounds the optimal relaxation; positive means no feasible point
      if (z(n) - gap > 0.0 || gap < 1e-13 * (1.0 + std::abs(z(n)))) {
        result.status = SolveStatus::infeasible;
        break;
      }
      t *= options.barrier_growth;
    }
    result.phase1_iterations = start_budget - budget;
    result.iterations = result.phase1_iterations;
    if (!success) return result;
    x = z.head(n);
  }

  double t = phase2.initial_t(x);
  const int start_budget = budget;
  while (true) {
    const auto outcome = phase2.center(x, t, budget, nullptr);
    result.iterations = result.phase1_iterations + (start_budget - budget);
    if (outcome == BarrierProblem::CenterOutcome::unbounded) {
      result.status = SolveStatus::unbounded;
      return result;
    }
    if (outcome == BarrierProblem::CenterOutcome::budget) {
      result.status = SolveStatus::max_iter;
      return result;
    }
    const double gap = phase2.nu() / t;
    if (outcome == BarrierProblem::CenterOutcome::failed) {
      // Precision exhausted; accept if the certificate is already close.
      if (gap <= 100.0 * options.tol) {
        result.status = SolveStatus::optimal;
        result.gap = gap;
        break;
      }
      result.status = SolveStatus::numerical_error;
      return result;
    }
    if (gap <= options.tol) {
      result.status = SolveStatus::optimal;
      result.gap = gap;
      break;
    }
    t *= options.barrier_growth;
  }
  result.x = x;
  result.objective = program.objective().evaluate(x);
  return result;
}

}  // namespace vlcsee::conic
