#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "vlcsee/cccp_direct.hpp"
#include "vlcsee/conic/solver.hpp"
#include "vlcsee/dinkelbach.hpp"
#include "vlcsee/zf_design.hpp"

using namespace vlcsee;
using conic::AffineExpr;

namespace {

std::vector<AffineExpr> unit_vars(Index n) {
  std::vector<AffineExpr> w;
  for (Index i = 0; i < n; ++i) w.push_back(AffineExpr::variable(static_cast<int>(i)));
  return w;
}

double half_log2(double p) { return 0.5 * std::log2(1.0 + p); }

}  // namespace

TEST_CASE("taylor operator examples") {
  const auto w = unit_vars(1);
  const Vector one = Vector::Ones(1);
  const AffineExpr q = taylor_quadratic_lower(one, one, w);
  CHECK(q.evaluate(Vector::Constant(1, 2.0)) == doctest::Approx(3.0));
  CHECK(q.evaluate(Vector::Constant(1, 0.0)) == doctest::Approx(-1.0));
  CHECK(q.evaluate(one) == doctest::Approx(1.0));

  const AffineExpr p = AffineExpr::variable(0);
  CHECK(taylor_log_upper(0.0, p).evaluate(Vector::Ones(1)) == doctest::Approx(1.0 / (2.0 * kLn2)));
  CHECK(taylor_log_upper(0.0, p).evaluate(Vector::Ones(1)) == doctest::Approx(0.72135).epsilon(1e-5));
  CHECK(taylor_log_upper(1.0, p).evaluate(Vector::Zero(1)) == doctest::Approx(0.5 - 1.0 / (4.0 * kLn2)));
  CHECK(taylor_log_upper(1.0, p).evaluate(Vector::Zero(1)) == doctest::Approx(0.13929).epsilon(1e-4));
}

TEST_CASE("taylor operators: exact at the expansion point, correct side at 10^4 probes") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> pos(0.0, 50.0);
  const auto w = unit_vars(4);
  double worst_exact = 0.0;
  for (int probe = 0; probe < 10000; ++probe) {
    const Vector w_prev = testing::random_matrix(rng, 4, 1);
    const Vector h = testing::random_matrix(rng, 4, 1);
    const Vector x = testing::random_matrix(rng, 4, 1, 2.0);
    const AffineExpr lin = taylor_quadratic_lower(w_prev, h, w);
    const double exact_at_prev = std::pow(h.dot(w_prev), 2);
    worst_exact = std::max(worst_exact, std::abs(lin.evaluate(w_prev) - exact_at_prev) /
                                            std::max(1.0, exact_at_prev));
    REQUIRE(lin.evaluate(x) <= std::pow(h.dot(x), 2) + 1e-12 * (1.0 + std::pow(h.dot(x), 2)));

    const double p_prev = pos(rng), p = pos(rng);
    const AffineExpr up = taylor_log_upper(p_prev, AffineExpr::variable(0));
    worst_exact = std::max(worst_exact, std::abs(up.evaluate(Vector::Constant(1, p_prev)) - half_log2(p_prev)));
    REQUIRE(up.evaluate(Vector::Constant(1, p)) >= half_log2(p) - 1e-14);
  }
  CHECK(worst_exact <= 1e-12);
}

TEST_CASE("slacks and the subproblem at the expansion point") {
  const DesignProblem prob = testing::scenario(3);
  const ZfInitialPoint z = zf_initial_point(prob);
  REQUIRE(z.feasible);
  const SlackState s = evaluate_slacks(z.w, prob.gains(), prob.coeffs);
  const Vector rates = secrecy_rates(z.w, prob.gains(), prob.coeffs);
  for (Index k = 0; k < 3; ++k) {
    CHECK(s.r1(k) - s.r2(k) - s.r3(k) == doctest::Approx(rates(k)).epsilon(1e-12));
    CHECK(s.r1(k) == doctest::Approx(half_log2(s.p1(k))));
  }
  for (double mu : {0.0, prob.efficiency(z.w)}) {
    const CccpSubproblem sp = build_subproblem(prob, z.w, s, mu);
    const Vector x = sp.point(z.w, s);
    const auto rep = conic::check_feasibility(sp.program, x);
    CHECK_MESSAGE(rep.max_residual <= 1e-9, rep.worst_label << ' ' << rep.max_residual);
    CHECK((sp.precoder(x) - z.w).norm() <= 1e-15);
  }
}

TEST_CASE("zero state is feasible when thresholds vanish") {
  DesignProblem prob = testing::scenario(3);
  prob.thresholds.setZero();
  const Matrix w0 = Matrix::Zero(4, 3);
  const SlackState s = evaluate_slacks(w0, prob.gains(), prob.coeffs);
  const CccpSubproblem sp = build_subproblem(prob, w0, s, 0.0);
  CHECK(conic::check_feasibility(sp.program, sp.point(w0, s)).max_residual <= 1e-12);
}

TEST_CASE("single user reduces to a scalar power trade-off") {
  // K = 1, N_T = 1: maximise log2(1 + a h^2 w^2) / 2 - mu (P_DC + xi w^2) over |w| <= bound.
  DesignProblem prob;
  prob.channel.gains = Matrix::Constant(1, 1, 1.0);
  prob.channel.noise_vars_effective = Vector::Constant(1, 0.5);
  prob.channel.noise_vars = prob.channel.noise_vars_effective;
  prob.coeffs = link_coefficients(prob.channel, uniform_symbols());
  prob.policy.dc_bias = Vector::Constant(1, 2.0);
  prob.policy.i_max = 4.0;
  prob.power.circuitry_power = 1.0;
  prob.power.led_forward_voltage = 1.0;
  prob.power.equiv_resistance = 0.5;
  prob.thresholds = Vector::Zero(1);
  const double a = prob.coeffs.a(0);
  const double mu = 0.3;
  const double xi = 0.5;
  double w2 = (a / (2.0 * kLn2 * mu * xi) - 1.0) / a;  // stationary point in w^2
  w2 = std::clamp(w2, 0.0, 4.0);
  const double expected = half_log2(a * w2) - mu * (3.0 + xi * w2);

  const CccpSubproblem sp = build_subproblem(prob, Matrix::Constant(1, 1, 0.3),
                                             evaluate_slacks(Matrix::Constant(1, 1, 0.3), prob.gains(), prob.coeffs), mu);
  CHECK(conic::check_feasibility(sp.program, sp.point(Matrix::Constant(1, 1, 0.3),
                                                    evaluate_slacks(Matrix::Constant(1, 1, 0.3), prob.gains(), prob.coeffs)))
            .max_residual <= 1e-12);
  const InnerResult r = solve_parameterized(prob, mu, Matrix::Constant(1, 1, 0.3));
  REQUIRE(r.status == InnerStatus::converged);
  CHECK(r.objective == doctest::Approx(expected).epsilon(1e-6));
  CHECK(r.w(0, 0) * r.w(0, 0) == doctest::Approx(w2).epsilon(1e-4));
}

TEST_CASE("inner CCCP from the ZF start: ascent, feasibility, iteration count") {
  std::vector<int> counts;
  for (std::uint64_t seed = 1; seed <= 7; ++seed) {
    const DesignProblem prob = testing::scenario(seed);
    const ZfInitialPoint z = zf_initial_point(prob);
    if (!z.feasible) continue;
    const double mu = prob.efficiency(z.w);
    const InnerResult r = solve_parameterized(prob, mu, z.w);
    CHECK(r.status == InnerStatus::converged);
    counts.push_back(r.iterations);
    double prev = evaluate_iterate(prob, z.w, mu, 0).objective;
    for (const InnerIterate& it : r.trace) {
      CHECK(it.objective >= prev - 1e-6);
      prev = it.objective;
    }
    CHECK(row_l1_feasible(r.w, prob.policy, 1e-9));
    CHECK(prob.threshold_margin(r.w) >= -1e-5);

    // restarting at the returned point settles at once
    const InnerResult again = solve_parameterized(prob, mu, r.w);
    CHECK(again.iterations <= 2);
    CHECK(again.objective == doctest::Approx(r.objective).epsilon(1e-5));
  }
  // the typical drop stops within 20 iterations; slow drops are allowed a longer tail
  REQUIRE(counts.size() >= 4);
  std::sort(counts.begin(), counts.end());
  CHECK(counts[counts.size() / 2] <= 20);
}

TEST_CASE("random start, mu = 0: sum rate does not drop") {
  std::mt19937_64 rng(8);
  const Vector3 room(5.0, 5.0, 3.0);
  const std::vector<Vector3> leds{Vector3(-1.2, -1.2, 3.0), Vector3(1.2, 1.2, 3.0)};
  for (std::uint64_t seed : {11, 12, 13}) {
    const Scene scene = make_scene(leds, sample_users(seed, 2, room), room);
    DesignProblem prob;
    prob.policy = drive_policy_from_dbm(30.0, 2, 2.0);
    prob.channel = build_channel(scene, prob.policy.dc_bias);
    prob.coeffs = link_coefficients(prob.channel, uniform_symbols());
    prob.thresholds = Vector::Constant(2, -1e3);  // inactive
    const Matrix w0 = random_feasible_precoder(prob.policy, 2, seed);
    const InnerResult r = solve_parameterized(prob, 0.0, w0);
    REQUIRE((r.status == InnerStatus::converged || r.status == InnerStatus::max_iter));
    CHECK(prob.numerator(r.w) >= prob.numerator(w0) - 1e-6);
    CHECK(row_l1_feasible(r.w, prob.policy, 1e-9));
  }
}

TEST_CASE("margin search reaches the thresholds from a random start") {
  int found = 0, tried = 0;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const DesignProblem prob = testing::scenario(seed);
    if (!zf_initial_point(prob).feasible) continue;
    ++tried;
    const FeasibilitySearch s = cccp_feasibility_search(prob, random_feasible_precoder(prob.policy, 3, seed));
    CHECK(row_l1_feasible(s.w, prob.policy, 1e-9));
    CHECK(s.margin == doctest::Approx(prob.threshold_margin(s.w)));
    if (s.feasible) {
      ++found;
      CHECK(s.margin >= 0.0);
    }
  }
  CHECK(found >= tried - 1);
}
