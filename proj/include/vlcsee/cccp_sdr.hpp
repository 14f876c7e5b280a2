#pragma once

#include <utility>
#include <vector>

#include "vlcsee/conic/program.hpp"
#include "vlcsee/design_problem.hpp"

namespace vlcsee {

inline constexpr double kEllipsoidFloor = 1e-6;

/// P_k = h_k h_k^T for every user.
std::vector<Matrix> gram_channel(const Matrix& gains);

/// Q_k = w_k w_k^T for every column.
std::vector<Matrix> gram_precoder(const Matrix& w);

/// (f_k, g_k) with f_k - g_k equal to the secrecy rate when every Q_i is rank one.
std::pair<double, double> fk_gk(const std::vector<Matrix>& q, const std::vector<Matrix>& p,
                                const LinkCoefficients& coeffs, Index k);

/// Gradient of g_k with respect to each Q_i.
std::vector<Matrix> grad_g(const std::vector<Matrix>& q_prev, const std::vector<Matrix>& p,
                           const LinkCoefficients& coeffs, Index k);

/// delta(n, k) = max(sqrt(Q_prev,k(n, n)), floor).
struct EllipsoidWeights {
  Matrix delta;
  double floor = kEllipsoidFloor;
};

EllipsoidWeights ellipsoid_weights(const std::vector<Matrix>& q_prev,
                                   double floor = kEllipsoidFloor);

/// sum_k Q_k(n, n) / delta(n, k) <= bound_n^2 / sum_k delta(n, k).
void ellipsoid_constraint(conic::ConicProgram& program, const std::vector<conic::SymmetricVar>& q,
                          const EllipsoidWeights& weights, const DrivePolicy& policy, Index n);

struct SdrSubproblem {
  conic::ConicProgram program;
  std::vector<conic::SymmetricVar> q;
  conic::VectorVar f;  // hypographs of f_k
  Vector point(const std::vector<Matrix>& q_value, const std::vector<Matrix>& p,
               const LinkCoefficients& coeffs) const;
  std::vector<Matrix> gram(const Vector& x) const;
};

SdrSubproblem build_sdr_subproblem(const DesignProblem& problem,
                                   const std::vector<Matrix>& q_prev, double mu);

/// sqrt(lambda_max) q_max with the first clearly nonzero entry made positive.
/// Ties in the top eigenvalue pick the eigenspace vector closest to e_1, then e_2, ...
Vector rank_one_retrieval(const Matrix& q);

/// ||Q - w w^T||_F / ||Q||_F summed over users (0 for an all-zero Q).
double relaxation_gap(const std::vector<Matrix>& q, const Matrix& w);

InnerResult solve_parameterized_sdr(const DesignProblem& problem, double mu,
                                    const Matrix& w_init, const InnerConfig& cfg = {});

}  // namespace vlcsee
