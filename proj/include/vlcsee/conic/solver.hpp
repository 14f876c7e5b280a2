#pragma once

#include <optional>
#include <string>

#include "vlcsee/conic/program.hpp"

namespace vlcsee::conic {

enum class SolveStatus { optimal, infeasible, unbounded, max_iter, numerical_error };

std::string to_string(SolveStatus status);

struct SolverOptions {
  double tol = 1e-8;             // duality-gap bound nu / t at exit
  int max_newton_steps = 2000;   // across both phases
  double barrier_growth = 20.0;  // t <- growth * t between centerings
  double newton_tol = 1e-9;      // lambda^2 / 2 stopping level inside a centering
};

struct SolveResult {
  SolveStatus status = SolveStatus::numerical_error;
  Vector x;                 // populated iff status == optimal
  double objective = 0.0;   // value of the maximised objective
  double gap = 0.0;         // certified suboptimality bound
  int iterations = 0;       // Newton steps
  int phase1_iterations = 0;
};

/// Primal log-barrier path following with a phase-I search for a strictly
/// feasible start. `hint` seeds phase I; it need not be feasible.
SolveResult solve(const ConicProgram& program, const SolverOptions& options = {},
                  const std::optional<Vector>& hint = std::nullopt);

}  // namespace vlcsee::conic
