#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "vlcsee/dinkelbach.hpp"

using namespace vlcsee;

namespace {

Matrix scalar(double x) { return Matrix::Constant(1, 1, x); }

// max (-x^2 + 4x) / (x + 1) on [0, 3]; the parametric problem has a closed form.
FractionalProblem toy() {
  FractionalProblem p;
  p.numerator = [](const Matrix& w) { return -w(0, 0) * w(0, 0) + 4.0 * w(0, 0); };
  p.denominator = [](const Matrix& w) { return w(0, 0) + 1.0; };
  p.inner = [num = p.numerator, den = p.denominator](double mu, const Matrix&) {
    InnerResult r;
    r.status = InnerStatus::converged;
    r.w = scalar(std::clamp((4.0 - mu) / 2.0, 0.0, 3.0));
    r.objective = num(r.w) - mu * den(r.w);
    r.iterations = 1;
    return r;
  };
  return p;
}

}  // namespace

TEST_CASE("scalar ratio toy") {
  DinkelbachConfig cfg;
  cfg.mu0 = 0.0;
  const DinkelbachResult r = run_dinkelbach(toy(), scalar(0.0), cfg);
  CHECK(r.status == OuterStatus::optimal);
  CHECK(std::abs(r.w(0, 0) - (std::sqrt(5.0) - 1.0)) <= 1e-6);
  CHECK(std::abs(r.mu - (6.0 - 2.0 * std::sqrt(5.0))) <= 1e-6);
  REQUIRE(r.trace.size() >= 2);
  for (std::size_t l = 1; l < r.trace.size(); ++l) {
    CHECK(r.trace[l].mu >= r.trace[l - 1].mu);
    CHECK(r.trace[l].f_mu <= r.trace[l - 1].f_mu + 1e-12);
  }
  CHECK(r.trace.back().f_mu <= cfg.eps1);
  CHECK(r.trace.back().f_mu >= -1e-12);
}

TEST_CASE("constant denominator stops after at most two steps") {
  FractionalProblem p;
  p.numerator = [](const Matrix& w) { return 2.0 - (w(0, 0) - 1.0) * (w(0, 0) - 1.0); };
  p.denominator = [](const Matrix&) { return 4.0; };
  p.inner = [](double, const Matrix&) {
    InnerResult r;
    r.status = InnerStatus::converged;
    r.w = scalar(1.0);
    return r;
  };
  DinkelbachConfig cfg;
  const DinkelbachResult r = run_dinkelbach(p, scalar(0.0), cfg);
  CHECK(r.status == OuterStatus::optimal);
  CHECK(r.trace.size() <= 2);
  CHECK(r.mu == doctest::Approx(0.5));
}

TEST_CASE("stationary start terminates immediately") {
  FractionalProblem p = toy();
  const double x = std::sqrt(5.0) - 1.0;
  DinkelbachConfig cfg;
  cfg.mu0 = p.numerator(scalar(x)) / p.denominator(scalar(x));
  const DinkelbachResult r = run_dinkelbach(p, scalar(x), cfg);
  CHECK(r.status == OuterStatus::optimal);
  CHECK(r.trace.size() == 1);
  CHECK(r.mu == doctest::Approx(cfg.mu0).epsilon(1e-12));
}

TEST_CASE("inner failures") {
  FractionalProblem p = toy();
  p.inner = [](double, const Matrix&) {
    InnerResult r;
    r.status = InnerStatus::infeasible;
    return r;
  };
  CHECK(run_dinkelbach(p, scalar(0.0), {}).status == OuterStatus::infeasible);

  int calls = 0;
  FractionalProblem q = toy();
  auto good = q.inner;
  q.inner = [&calls, good](double mu, const Matrix& w) {
    if (++calls == 2) {
      InnerResult r;
      r.status = InnerStatus::numerical_error;
      return r;
    }
    return good(mu, w);
  };
  const DinkelbachResult r = run_dinkelbach(q, scalar(0.0), {});
  CHECK(r.status == OuterStatus::degraded);
  CHECK(r.w(0, 0) == doctest::Approx(2.0));  // the one successful step
  CHECK(r.mu == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("iteration cap is reported") {
  DinkelbachConfig cfg;
  cfg.lmax1 = 1;
  cfg.mu0 = 0.0;
  const DinkelbachResult r = run_dinkelbach(toy(), scalar(0.0), cfg);
  CHECK(r.status == OuterStatus::max_iter);
  CHECK(r.trace.size() == 1);
}
