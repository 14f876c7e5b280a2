#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "vlcsee/cccp_direct.hpp"
#include "vlcsee/cccp_sdr.hpp"
#include "vlcsee/conic/solver.hpp"
#include "vlcsee/zf_design.hpp"

using namespace vlcsee;

namespace {

// g_k written out from its definition, for finite differences.
double g_oracle(const std::vector<Matrix>& q, const std::vector<Matrix>& p, const LinkCoefficients& c,
                Index k) {
  double interf = 0.0, leak = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (static_cast<Index>(i) == k) continue;
    interf += c.b(k) * (p[static_cast<std::size_t>(k)] * q[i]).trace();
    leak += c.b(static_cast<Index>(i)) * (p[i] * q[static_cast<std::size_t>(k)]).trace();
  }
  return 0.5 * std::log2(1.0 + interf) + 0.5 * std::log2(1.0 + leak);
}

LinkCoefficients random_coeffs(std::mt19937_64& rng, Index users) {
  std::uniform_real_distribution<double> u(0.2, 2.0);
  LinkCoefficients c{Vector(users), Vector(users)};
  for (Index k = 0; k < users; ++k) {
    c.a(k) = u(rng);
    c.b(k) = u(rng);
  }
  return c;
}

}  // namespace

TEST_CASE("lifted quantities agree with the precoder form") {
  std::mt19937_64 rng(31);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const Matrix h = testing::random_matrix(rng, 3, 4);
    const Matrix w = testing::random_matrix(rng, 4, 3);
    const auto p = gram_channel(h);
    const auto q = gram_precoder(w);
    for (Index k = 0; k < 3; ++k)
      for (Index i = 0; i < 3; ++i) {
        const double lifted = (p[static_cast<std::size_t>(k)] * q[static_cast<std::size_t>(i)]).trace();
        const double direct = std::pow(h.row(k).dot(w.col(i)), 2);
        worst = std::max(worst, std::abs(lifted - direct) / std::max(1.0, direct));
      }
    const LinkCoefficients c = random_coeffs(rng, 3);
    for (Index k = 0; k < 3; ++k) {
      const auto [f, g] = fk_gk(q, p, c, k);
      CHECK(f - g == doctest::Approx(secrecy_rate(w, h, c, k)).epsilon(1e-10));
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("f and g examples") {
  const Matrix h = Matrix::Identity(2, 2);
  const LinkCoefficients c{Vector::Ones(2), Vector::Ones(2)};
  const auto p = gram_channel(h);
  const auto zero = gram_precoder(Matrix::Zero(2, 2));
  CHECK(fk_gk(zero, p, c, 0) == std::pair{0.0, 0.0});
  const auto [f, g] = fk_gk(gram_precoder(Matrix::Identity(2, 2)), p, c, 0);
  CHECK(f - g == doctest::Approx(0.5));

  const Matrix h1 = (Matrix(1, 3) << 0.4, 0.1, 0.9).finished();
  const LinkCoefficients c1{Vector::Constant(1, 2.0), Vector::Constant(1, 3.0)};
  const auto q1 = gram_precoder((Matrix(3, 1) << 1.0, -2.0, 0.5).finished());
  CHECK(fk_gk(q1, gram_channel(h1), c1, 0).second == 0.0);
  for (const Matrix& m : grad_g(q1, gram_channel(h1), c1, 0)) CHECK(m.isZero(0.0));
}

TEST_CASE("gradient of g") {
  std::mt19937_64 rng(41);
  const Matrix h = testing::random_matrix(rng, 3, 3);
  const auto p = gram_channel(h);
  const LinkCoefficients c = random_coeffs(rng, 3);

  SUBCASE("at Q = 0 both weights are 1 / (2 ln 2)") {
    const std::vector<Matrix> zero(3, Matrix::Zero(3, 3));
    const auto grad = grad_g(zero, p, c, 1);
    const double z = 1.0 / (2.0 * kLn2);
    CHECK(z == doctest::Approx(0.72135).epsilon(1e-5));
    CHECK(grad[0].isApprox(z * c.b(1) * p[1]));
    CHECK(grad[2].isApprox(z * c.b(1) * p[1]));
    CHECK(grad[1].isApprox(z * (c.b(0) * p[0] + c.b(2) * p[2])));
  }

  SUBCASE("central differences") {
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<Matrix> q;
      std::vector<Matrix> dq;
      for (int i = 0; i < 3; ++i) {
        q.push_back(testing::random_psd(rng, 3, 2, 0.5));
        const Matrix d = testing::random_matrix(rng, 3, 3);
        dq.push_back(0.5 * (d + d.transpose()));
      }
      const Index k = trial % 3;
      const auto grad = grad_g(q, p, c, k);
      double analytic = 0.0;
      for (int i = 0; i < 3; ++i) analytic += grad[static_cast<std::size_t>(i)].cwiseProduct(dq[static_cast<std::size_t>(i)]).sum();
      const double step = 1e-6;
      std::vector<Matrix> plus = q, minus = q;
      for (int i = 0; i < 3; ++i) {
        plus[static_cast<std::size_t>(i)] += step * dq[static_cast<std::size_t>(i)];
        minus[static_cast<std::size_t>(i)] -= step * dq[static_cast<std::size_t>(i)];
      }
      const double numeric = (g_oracle(plus, p, c, k) - g_oracle(minus, p, c, k)) / (2.0 * step);
      worst = std::max(worst, std::abs(numeric - analytic));
    }
    CHECK(worst <= 1e-5);
  }

  SUBCASE("linearisation over-estimates g at 10^4 PSD probes") {
    for (int probe = 0; probe < 10000; ++probe) {
      std::vector<Matrix> q_prev, q;
      for (int i = 0; i < 3; ++i) {
        q_prev.push_back(testing::random_psd(rng, 3, 1 + probe % 3, 0.7));
        q.push_back(testing::random_psd(rng, 3, 1 + (probe / 3) % 3, 0.7));
      }
      const Index k = probe % 3;
      const auto grad = grad_g(q_prev, p, c, k);
      double lin = fk_gk(q_prev, p, c, k).second;
      for (std::size_t i = 0; i < 3; ++i) lin += grad[i].cwiseProduct(q[i] - q_prev[i]).sum();
      REQUIRE(lin >= fk_gk(q, p, c, k).second - 1e-12);
      REQUIRE(fk_gk(q_prev, p, c, k).second == doctest::Approx(g_oracle(q_prev, p, c, k)).epsilon(1e-12));
    }
  }
}

TEST_CASE("rank-one retrieval hand cases") {
  const Vector a = rank_one_retrieval((Matrix(2, 2) << 4, 0, 0, 0).finished());
  CHECK(a.isApprox((Vector(2) << 2, 0).finished(), 1e-14));
  const Vector b = rank_one_retrieval((Matrix(2, 2) << 2, 1, 1, 2).finished());
  CHECK(b.isApprox(std::sqrt(1.5) * Vector::Ones(2), 1e-12));
  const Vector c = rank_one_retrieval(Matrix::Identity(2, 2));
  CHECK(c.norm() == doctest::Approx(1.0));
  CHECK(c.isApprox((Vector(2) << 1, 0).finished(), 1e-12));
  CHECK(rank_one_retrieval(Matrix::Identity(3, 3)) == rank_one_retrieval(Matrix::Identity(3, 3)));
  CHECK(rank_one_retrieval(Matrix::Zero(3, 3)).isZero(0.0));
  // sign convention: first clearly nonzero entry positive
  const Vector w = (Vector(3) << 0.0, -1.0, 2.0).finished();
  const Vector r = rank_one_retrieval(w * w.transpose());
  CHECK(r.isApprox(-w, 1e-12));
  // tiny negative eigenvalues are tolerated
  Matrix near = w * w.transpose();
  near(0, 0) = -1e-12;
  CHECK(rank_one_retrieval(near).isApprox(-w, 1e-9));
  // relaxation gap is zero for a rank-one Q and positive otherwise
  CHECK(relaxation_gap({w * w.transpose()}, r) <= 1e-12);
  CHECK(relaxation_gap({Matrix::Identity(3, 3)}, rank_one_retrieval(Matrix::Identity(3, 3))) > 0.5);
}

TEST_CASE("ellipsoid constraint") {
  DrivePolicy policy = drive_policy_from_dbm(30.0, 2, 2.0);  // bounds 0.5
  auto build = [&](const std::vector<Matrix>& q_prev) {
    conic::ConicProgram prog;
    std::vector<conic::SymmetricVar> q;
    for (std::size_t k = 0; k < q_prev.size(); ++k) q.push_back(prog.add_symmetric("Q", 2));
    ellipsoid_constraint(prog, q, ellipsoid_weights(q_prev), policy, 0);
    return std::pair{prog, q};
  };
  auto pack = [](const conic::ConicProgram& prog, const std::vector<conic::SymmetricVar>& vars,
                 const std::vector<Matrix>& q) {
    Vector x = Vector::Zero(prog.num_variables());
    for (std::size_t k = 0; k < vars.size(); ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = i; j < 2; ++j) x(vars[k].index(i, j)) = q[k](i, j);
    return x;
  };
  SUBCASE("single user: |w_n| <= bound") {
    const auto [prog, q] = build({Matrix::Identity(2, 2) * 0.1});
    Matrix at = Matrix::Zero(2, 2);
    at(0, 0) = 0.25;
    CHECK(conic::check_feasibility(prog, pack(prog, q, {at})).max_residual <= 1e-15);
    at(0, 0) = 0.2501;
    CHECK(conic::check_feasibility(prog, pack(prog, q, {at})).max_residual > 0.0);
  }
  SUBCASE("equal weights: sum_k w_nk^2 <= bound^2 / K") {
    const auto [prog, q] = build({Matrix::Identity(2, 2) * 0.04, Matrix::Identity(2, 2) * 0.04});
    Matrix a = Matrix::Zero(2, 2), b = Matrix::Zero(2, 2);
    a(0, 0) = 0.1;
    b(0, 0) = 0.125 - 0.1;
    CHECK(conic::check_feasibility(prog, pack(prog, q, {a, b})).max_residual <= 1e-15);
    b(0, 0) += 1e-4;
    CHECK(conic::check_feasibility(prog, pack(prog, q, {a, b})).max_residual > 0.0);
  }
  SUBCASE("Cauchy-Schwarz chain: retrieved precoders respect the L1 budget") {
    std::mt19937_64 rng(51);
    policy = drive_policy_from_dbm(30.0, 4, 2.0);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<Matrix> q_prev, q;
      for (int k = 0; k < 3; ++k) {
        q_prev.push_back(testing::random_psd(rng, 4, 1, 0.3));
        q.push_back(testing::random_psd(rng, 4, 1 + trial % 3, 0.3));
      }
      const EllipsoidWeights wts = ellipsoid_weights(q_prev);
      // shrink Q until every LED's weighted sum meets its ellipsoid bound
      for (Index n = 0; n < 4; ++n) {
        double lhs = 0.0;
        for (int k = 0; k < 3; ++k) lhs += q[static_cast<std::size_t>(k)](n, n) / wts.delta(n, k);
        const double rhs = std::pow(amplitude_bound(policy, n), 2) / wts.delta.row(n).sum();
        if (lhs > rhs)
          for (auto& m : q) m *= rhs / lhs;
      }
      Matrix w(4, 3);
      for (int k = 0; k < 3; ++k) w.col(k) = rank_one_retrieval(q[static_cast<std::size_t>(k)]);
      REQUIRE(row_l1_feasible(w, policy, 1e-12));
    }
  }
}

TEST_CASE("SDR subproblem around a feasible point") {
  const DesignProblem prob = testing::scenario(2);
  const ZfInitialPoint z = zf_initial_point(prob);
  REQUIRE(z.feasible);
  const auto q_prev = gram_precoder(z.w);
  const auto p = gram_channel(prob.gains());
  const SdrSubproblem sp = build_sdr_subproblem(prob, q_prev, prob.efficiency(z.w));
  const auto rep = conic::check_feasibility(sp.program, sp.point(q_prev, p, prob.coeffs));
  CHECK_MESSAGE(rep.max_residual <= 1e-9, rep.worst_label << ' ' << rep.max_residual);

  DesignProblem free = prob;
  free.thresholds.setZero();
  const SdrSubproblem pricey = build_sdr_subproblem(free, q_prev, 1e6);
  const auto res = conic::solve(pricey.program, {.tol = 1e-9});
  REQUIRE(res.status == conic::SolveStatus::optimal);
  for (const Matrix& qk : pricey.gram(res.x)) CHECK(qk.norm() <= 1e-6);
}

TEST_CASE("SDR optimum dominates every feasible rank-one ZF grid point (N_T = K = 2)") {
  const Vector3 room(5.0, 5.0, 3.0);
  const std::vector<Vector3> leds{Vector3(-1.2, -1.2, 3.0), Vector3(1.2, 1.2, 3.0)};
  const Scene scene = make_scene(leds, {Vector3(-1.0, -1.3, 0.5), Vector3(1.4, 0.9, 0.5)}, room);
  DesignProblem prob;
  prob.policy = drive_policy_from_dbm(30.0, 2, 2.0);
  prob.channel = build_channel(scene, prob.policy.dc_bias);
  prob.coeffs = link_coefficients(prob.channel, uniform_symbols());
  prob.thresholds = Vector::Constant(2, 0.5);
  const ZfInitialPoint z = zf_initial_point(prob);
  REQUIRE(z.feasible);
  const double mu = prob.efficiency(z.w);
  const auto p = gram_channel(prob.gains());
  const SdrSubproblem sp = build_sdr_subproblem(prob, gram_precoder(z.w), mu);
  const auto res = conic::solve(sp.program, {.tol = 1e-9});
  REQUIRE(res.status == conic::SolveStatus::optimal);

  const Matrix hinv = prob.gains().inverse();
  const Vector bounds = amplitude_bounds(prob.policy);
  const double rho_max = std::pow(bounds.minCoeff() / hinv.cwiseAbs().maxCoeff(), 2) * 4.0;
  double best = -1e300;
  int feasible = 0;
  const int n = 120;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) {
      const Vector u = (Vector(2) << std::sqrt(rho_max * i / n), std::sqrt(rho_max * j / n)).finished();
      const Matrix w = hinv * u.asDiagonal();
      const Vector x = sp.point(gram_precoder(w), p, prob.coeffs);
      if (conic::check_feasibility(sp.program, x).max_residual > 0.0) continue;
      ++feasible;
      best = std::max(best, sp.program.objective().evaluate(x));
    }
  REQUIRE(feasible > 10);
  CHECK(res.objective >= best - 1e-7);
}

TEST_CASE("inner SDR iterations from the ZF start") {
  std::vector<int> settled;
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const DesignProblem prob = testing::scenario(seed);
    const ZfInitialPoint z = zf_initial_point(prob);
    if (!z.feasible) continue;
    const double mu = prob.efficiency(z.w);
    const InnerResult r = solve_parameterized_sdr(prob, mu, z.w);
    CHECK((r.status == InnerStatus::converged || r.status == InnerStatus::max_iter));
    // first iteration whose objective is within 1e-4 (relative) of the final one
    const double last = r.trace.back().objective;
    for (const InnerIterate& it : r.trace) {
      if (std::abs(it.objective - last) <= 1e-4 * std::abs(last)) {
        settled.push_back(it.iteration);
        break;
      }
    }
    CHECK(row_l1_feasible(r.w, prob.policy, 1e-9));
    for (const InnerIterate& it : r.trace) CHECK(std::isfinite(it.relaxation_gap));
    if (!r.threshold_violation) CHECK(prob.threshold_margin(r.w) >= -1e-4);

    // replay the loop by hand: every retrieved precoder meets the L1 budget
    auto q = gram_precoder(z.w);
    for (int it = 0; it < 4; ++it) {
      const SdrSubproblem sp = build_sdr_subproblem(prob, q, mu);
      const auto res = conic::solve(sp.program, {.tol = 1e-6});
      REQUIRE(res.status == conic::SolveStatus::optimal);
      const auto q_star = sp.gram(res.x);
      Matrix w(prob.transmitters(), prob.users());
      for (std::size_t k = 0; k < q_star.size(); ++k) w.col(static_cast<Index>(k)) = rank_one_retrieval(q_star[k]);
      CHECK(row_l1_feasible(w, prob.policy, 1e-9));
      q = gram_precoder(w);
    }
  }
  REQUIRE(settled.size() >= 4);
  std::sort(settled.begin(), settled.end());
  CHECK(settled[settled.size() / 2] <= 12);
}
