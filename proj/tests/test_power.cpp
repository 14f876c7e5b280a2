#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "vlcsee/power.hpp"

using namespace vlcsee;

TEST_CASE("amplitude bound") {
  DrivePolicy p;
  p.dc_bias = Vector::Constant(1, 0.5);
  p.i_max = 1.0;
  CHECK(amplitude_bound(p, 0) == 0.5);
  p.dc_bias(0) = 0.0;
  CHECK(amplitude_bound(p, 0) == 0.0);
  p.dc_bias(0) = 1.0;
  CHECK(amplitude_bound(p, 0) == 0.0);
  p.dc_bias(0) = 0.8;
  CHECK(amplitude_bound(p, 0) == doctest::Approx(0.2));
}

TEST_CASE("30 dBm at 2 W/A gives half an ampere of bias and headroom") {
  const DrivePolicy p = drive_policy_from_dbm(30.0, 4, 2.0);
  CHECK(p.dc_bias.size() == 4);
  CHECK(p.dc_bias(0) == doctest::Approx(0.5));
  CHECK(p.i_max == doctest::Approx(1.0));
  CHECK(amplitude_bounds(p).isApprox(Vector::Constant(4, 0.5)));
  CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0));
  CHECK(watts_to_dbm(0.001) == doctest::Approx(0.0));
  CHECK_THROWS(drive_policy_from_dbm(30.0, 4, 2.0, 0.2));
}

TEST_CASE("row L1 feasibility") {
  DrivePolicy p;
  p.dc_bias = Vector::Constant(1, 0.5);
  p.i_max = 1.0;
  Matrix w = Matrix::Zero(1, 2);
  CHECK(row_l1_feasible(w, p));
  w << 0.3, 0.3;
  CHECK_FALSE(row_l1_feasible(w, p));
  w << 0.25, -0.25;
  CHECK(row_l1_feasible(w, p, 0.0));
  CHECK(row_l1_excess(w, p) == doctest::Approx(0.0));
}

TEST_CASE("row L1 feasibility keeps the drive current in range") {
  std::mt19937_64 rng(5);
  const DrivePolicy p = drive_policy_from_dbm(30.0, 4, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    Matrix w = testing::random_matrix(rng, 4, 3);
    for (Index n = 0; n < 4; ++n) w.row(n) *= amplitude_bound(p, n) / w.row(n).cwiseAbs().sum() *
                                              std::uniform_real_distribution<double>(0.1, 1.0)(rng);
    REQUIRE(row_l1_feasible(w, p, 1e-15));
    for (int corner = 0; corner < 8; ++corner) {
      Vector d(3);
      for (int i = 0; i < 3; ++i) d(i) = (corner >> i & 1) ? 1.0 : -1.0;
      const Vector current = w * d + p.dc_bias;
      CHECK((current.array() >= -1e-15).all());
      CHECK((current.array() <= p.i_max + 1e-15).all());
    }
  }
}

TEST_CASE("total power") {
  const DrivePolicy p = drive_policy_from_dbm(30.0, 4, 2.0);
  PowerModel m;
  CHECK(dc_power(p, m) == doctest::Approx(14.0));
  CHECK(total_power(Matrix::Zero(4, 3), p, m) == doctest::Approx(14.0));
  Matrix w = Matrix::Zero(4, 3);
  w(0, 0) = 1.0;
  w(1, 2) = 1.0;  // Tr(W W^T) = 2
  CHECK(total_power(w, p, m) == doctest::Approx(20.0));
  CHECK(total_power(-w, p, m) == total_power(w, p, m));
  m.equiv_resistance = 0.0;
  CHECK(total_power(w, p, m) == doctest::Approx(14.0));

  std::mt19937_64 rng(9);
  const Matrix r = testing::random_matrix(rng, 4, 3);
  double by_column = 0.0;
  for (Index k = 0; k < 3; ++k) by_column += r.col(k).squaredNorm();
  CHECK((r * r.transpose()).trace() == doctest::Approx(by_column).epsilon(1e-14));
  PowerModel unit;
  Matrix grow = r;
  grow(2, 1) *= 1.5;
  CHECK(total_power(grow, p, unit) >= total_power(r, p, unit));
}
