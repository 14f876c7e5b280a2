#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vlcsee/design_problem.hpp"

namespace vlcsee {

struct DinkelbachConfig {
  double mu0 = 0.0;
  double eps1 = 1e-4;
  int lmax1 = 30;
};

/// Ratio N(W) / D(W) together with a solver for max_W N(W) - mu D(W).
/// The inner solver receives mu and the previous iterate as a warm start.
struct FractionalProblem {
  std::function<double(const Matrix&)> numerator;
  std::function<double(const Matrix&)> denominator;
  std::function<InnerResult(double mu, const Matrix& warm)> inner;
};

enum class OuterStatus { optimal, max_iter, infeasible, degraded };

std::string to_string(OuterStatus status);

struct DinkelbachStep {
  int iteration = 0;
  double mu = 0.0;     // parameter the inner problem was solved at
  double f_mu = 0.0;   // N(W_l) - mu D(W_l)
  double ratio = 0.0;  // N(W_l) / D(W_l), the next mu
  InnerStatus inner_status = InnerStatus::converged;
  std::vector<InnerIterate> inner_trace;
};

struct DinkelbachResult {
  OuterStatus status = OuterStatus::infeasible;
  Matrix w;
  double mu = 0.0;
  std::vector<DinkelbachStep> trace;

  int inner_iterations() const;
};

DinkelbachResult run_dinkelbach(const FractionalProblem& problem, const Matrix& w_init,
                                const DinkelbachConfig& cfg);

/// Dinkelbach over a design problem with mu0 = Phi(w_init).
DinkelbachResult run_dinkelbach(const DesignProblem& problem, const Matrix& w_init,
                                const std::function<InnerResult(double, const Matrix&)>& inner,
                                DinkelbachConfig cfg = {});

}  // namespace vlcsee
