// Residual evaluation straight from the program description. Shares nothing with
// the barrier solver so it can audit solver output.
#include <cmath>
#include <limits>

#include "vlcsee/conic/program.hpp"

namespace vlcsee::conic {

double constraint_residual(const Constraint& c, const Vector& x) {
  switch (c.kind) {
    case ConeKind::equality:
      return std::abs(c.exprs[0].evaluate(x));
    case ConeKind::nonnegative:
      return std::max(0.0, -c.exprs[0].evaluate(x));
    case ConeKind::exponential: {
      const double a = c.exprs[0].evaluate(x);
      const double y = c.exprs[1].evaluate(x);
      const double z = c.exprs[2].evaluate(x);
      if (y < 0.0) return -y;
      if (y == 0.0) return std::max({0.0, a, -z});
      if (z <= 0.0) return std::max(-z, y * std::exp(a / y));
      // compare in log space to avoid overflow: y exp(a/y) <= z  <=>  a <= y log(z/y)
      const double excess = a - y * std::log(z / y);
      return excess <= 0.0 ? 0.0 : z * std::expm1(excess / y);
    }
    case ConeKind::psd: {
      const int m = c.dim;
      Matrix s(m, m);
      std::size_t idx = 0;
      for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) {
          s(i, j) = s(j, i) = c.exprs[idx++].evaluate(x);
        }
      }
      Eigen::SelfAdjointEigenSolver<Matrix> eig(s, Eigen::EigenvaluesOnly);
      return std::max(0.0, -eig.eigenvalues().minCoeff());
    }
    case ConeKind::quadratic: {
      const double t = c.exprs[0].evaluate(x);
      double sq = 0.0;
      for (std::size_t j = 1; j < c.exprs.size(); ++j) {
        const double u = c.exprs[j].evaluate(x);
        sq += u * u;
      }
      return std::max(0.0, sq - t);
    }
  }
  return std::numeric_limits<double>::infinity();
}

FeasibilityReport check_feasibility(const ConicProgram& program, const Vector& x) {
  FeasibilityReport report;
  for (const Constraint& c : program.constraints()) {
    const double r = constraint_residual(c, x);
    if (r > report.max_residual || std::isnan(r)) {
      report.max_residual = std::isnan(r) ? std::numeric_limits<double>::infinity() : r;
      report.worst_label = c.label;
    }
  }
  return report;
}

}  // namespace vlcsee::conic
