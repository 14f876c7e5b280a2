#pragma once

#include "vlcsee/conic/program.hpp"
#include "vlcsee/conic/solver.hpp"
#include "vlcsee/design_problem.hpp"

namespace vlcsee {

/// Epigraph/hypograph slacks of the secrecy-rate terms, one entry per user.
struct SlackState {
  Vector r1, r2, r3;
  Vector p1, p2, p3;
};

/// Slacks evaluated exactly at W: p1 = a_k sum_i (h_k^T w_i)^2, p2 = b_k sum_{i!=k} (h_k^T w_i)^2,
/// p3 = sum_{i!=k} b_i (h_i^T w_k)^2 and r = log2(1 + p) / 2.
SlackState evaluate_slacks(const Matrix& w, const Matrix& gains, const LinkCoefficients& coeffs);

/// (h^T w_prev)^2 + 2 w_prev^T h h^T (w - w_prev); under-estimates (h^T w)^2.
conic::AffineExpr taylor_quadratic_lower(const Vector& w_prev, const Vector& h,
                                         const std::vector<conic::AffineExpr>& w);

/// log2(1 + p_prev) / 2 + (p - p_prev) / (2 ln2 (1 + p_prev)); over-estimates log2(1 + p) / 2.
conic::AffineExpr taylor_log_upper(double p_prev, const conic::AffineExpr& p);

/// Convex restriction around (W_prev, slacks_prev) with handles into its variables.
struct CccpSubproblem {
  conic::ConicProgram program;
  conic::VectorVar w_pos, w_neg;  // W = W+ - W-, column-major N_T x K
  conic::VectorVar r1, r2, r3, p1, p2, p3;
  conic::ScalarVar power;       // epigraph of ||W||_F^2
  conic::ScalarVar margin;      // feasibility mode only
  Index n_t = 0, users = 0;
  bool feasibility = false;

  conic::AffineExpr w(Index n, Index k) const;
  Matrix precoder(const Vector& x) const;
  /// Interior-leaning point representing (W, slacks) in this program's variables.
  Vector point(const Matrix& w, const SlackState& s, double margin_value = 0.0) const;
};

/// Feasibility mode replaces the objective by the worst threshold margin t,
/// with r1 - r2 - r3 >= lambda + t.
CccpSubproblem build_subproblem(const DesignProblem& problem, const Matrix& w_prev,
                                const SlackState& prev, double mu, bool feasibility = false);

/// Algorithm for a fixed mu: repeated convex restrictions until W, p2, p3 settle.
InnerResult solve_parameterized(const DesignProblem& problem, double mu, const Matrix& w_init,
                                const InnerConfig& cfg = {});

/// Maximises the worst threshold margin from `w_init`. Success means a W with every
/// secrecy rate at or above its threshold was reached.
struct FeasibilitySearch {
  bool feasible = false;
  Matrix w;
  double margin = 0.0;
  int iterations = 0;
};

FeasibilitySearch cccp_feasibility_search(const DesignProblem& problem, const Matrix& w_init,
                                          const InnerConfig& cfg = {});

}  // namespace vlcsee
