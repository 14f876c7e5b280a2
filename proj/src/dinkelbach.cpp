#include "vlcsee/dinkelbach.hpp"

namespace vlcsee {

std::string to_string(InnerStatus status) {
  switch (status) {
    case InnerStatus::converged: return "converged";
    case InnerStatus::max_iter: return "max_iter";
    case InnerStatus::infeasible: return "infeasible";
    case InnerStatus::numerical_error: return "numerical_error";
  }
  return "unknown";
}

std::string to_string(OuterStatus status) {
  switch (status) {
    case OuterStatus::optimal: return "optimal";
    case OuterStatus::max_iter: return "max_iter";
    case OuterStatus::infeasible: return "infeasible";
    case OuterStatus::degraded: return "degraded";
  }
  return "unknown";
}

InnerIterate evaluate_iterate(const DesignProblem& problem, const Matrix& w, double mu,
                              int iteration) {
  InnerIterate it;
  it.iteration = iteration;
  it.rates = secrecy_rates(w, problem.gains(), problem.coeffs);
  const double n = it.rates.sum();
  const double d = problem.denominator(w);
  it.objective = n - mu * d;
  it.efficiency = n / d;
  return it;
}

int DinkelbachResult::inner_iterations() const {
  int total = 0;
  for (const DinkelbachStep& s : trace) total += static_cast<int>(s.inner_trace.size());
  return total;
}

DinkelbachResult run_dinkelbach(const FractionalProblem& problem, const Matrix& w_init,
                                const DinkelbachConfig& cfg) {
  DinkelbachResult out;
  out.w = w_init;
  out.mu = cfg.mu0;
  double mu = cfg.mu0;
  Matrix warm = w_init;
  bool any_success = false;

  for (int l = 1; l <= cfg.lmax1; ++l) {
    InnerResult inner = problem.inner(mu, warm);
    DinkelbachStep step;
    step.iteration = l;
    step.mu = mu;
    step.inner_status = inner.status;
    step.inner_trace = std::move(inner.trace);

    const bool usable = inner.status == InnerStatus::converged ||
                        inner.status == InnerStatus::max_iter;
    if (!usable) {
      out.trace.push_back(std::move(step));
      out.status = any_success ? OuterStatus::degraded : OuterStatus::infeasible;
      return out;
    }

    const double n = problem.numerator(inner.w);
    const double d = problem.denominator(inner.w);
    step.f_mu = n - mu * d;
    step.ratio = n / d;
    out.trace.push_back(std::move(step));

    if (!any_success || n / d >= out.mu) {
      out.w = inner.w;
      out.mu = n / d;
    }
    any_success = true;

    if (out.trace.back().f_mu <= cfg.eps1) {
      out.status = OuterStatus::optimal;
      return out;
    }
    mu = n / d;
    warm = inner.w;
  }
  out.status = OuterStatus::max_iter;
  return out;
}

DinkelbachResult run_dinkelbach(const DesignProblem& problem, const Matrix& w_init,
                                const std::function<InnerResult(double, const Matrix&)>& inner,
                                DinkelbachConfig cfg) {
  FractionalProblem fp;
  fp.numerator = [&problem](const Matrix& w) { return problem.numerator(w); };
  fp.denominator = [&problem](const Matrix& w) { return problem.denominator(w); };
  fp.inner = inner;
  cfg.mu0 = problem.efficiency(w_init);
  return run_dinkelbach(fp, w_init, cfg);
}

}  // namespace vlcsee
