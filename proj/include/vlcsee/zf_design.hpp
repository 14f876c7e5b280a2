#pragma once

#include <cstdint>
#include <string>

#include "vlcsee/conic/program.hpp"
#include "vlcsee/design_problem.hpp"

namespace vlcsee {

inline constexpr double kRhoFloor = 1e-10;

/// sqrt(rho_prev) + (rho - rho_prev) / (2 sqrt(rho_prev)); over-estimates sqrt(rho).
/// Throws std::domain_error when rho_prev <= kRhoFloor.
conic::AffineExpr taylor_sqrt(double rho_prev, const conic::AffineExpr& rho);
double taylor_sqrt(double rho_prev, double rho);

/// Minimum-norm zero-forcing precoder H^+ diag(u).
Matrix zf_precoder(const Matrix& gains, const Vector& u);

/// Effective ZF gains rho_k = (h_k^T w_k)^2.
Vector zf_rho(const Matrix& gains, const Matrix& w);

/// Largest |H W - diag(H W)| entry; zero for an exact ZF precoder.
double zf_residual(const Matrix& gains, const Matrix& w);

/// Problem (38) for fixed mu with the Taylor step on sqrt(rho); w_init must be a
/// ZF precoder meeting the thresholds.
InnerResult solve_parameterized_zf(const DesignProblem& problem, double mu, const Matrix& w_init,
                                   const InnerConfig& cfg = {});

struct ZfInitialPoint {
  bool feasible = false;
  Matrix w;
  double level = 0.0;  // best worst-case margin min_k (R_k - lambda_k) in the ZF family
  std::string reason;
};

/// Max-min margin over W = H^+ diag(u) under the amplitude bounds.
ZfInitialPoint zf_initial_point(const DesignProblem& problem);

enum class ZfSampling {
  boundary,  // every candidate scaled onto the amplitude boundary
  interior,  // candidates also draw a uniform scale below the boundary
};

struct RandomZfResult {
  bool feasible = false;
  Matrix w;
  double efficiency = 0.0;
  int feasible_candidates = 0;
};

RandomZfResult random_zf_selection(const DesignProblem& problem, int n_samples,
                                   std::uint64_t seed, ZfSampling mode = ZfSampling::boundary);

struct FeasibilityVerdict {
  bool feasible = false;
  bool by_zero_forcing = false;
  Matrix w;
};

/// ZF max-min test, falling back to one CCCP margin search from the zero-threshold
/// ZF point (or a random start when H is rank deficient).
FeasibilityVerdict detect_feasibility(const DesignProblem& problem, std::uint64_t seed,
                                      bool allow_fallback = true, const InnerConfig& cfg = {});

/// Random W with entries of both signs whose rows use a random share of the amplitude budget.
Matrix random_feasible_precoder(const DrivePolicy& policy, Index users, std::uint64_t seed);

}  // namespace vlcsee
