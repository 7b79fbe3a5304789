#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ppse/numerics.hpp"
#include "support.hpp"

using namespace ppse;

TEST_CASE("cholesky reconstructs positive definite input") {
  Eigen::MatrixXd m(2, 2);
  m << 4.0, 2.0, 2.0, 3.0;
  const Eigen::MatrixXd L = cholesky(m);
  CHECK(L(0, 0) == doctest::Approx(2.0));
  CHECK(L(0, 1) == 0.0);
  CHECK(test::max_abs_diff(L * L.transpose(), m) < 1e-14);
}

TEST_CASE("cholesky handles semidefinite directions") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 1.0, 1.0, 1.0;
  const Eigen::MatrixXd L = cholesky(m);
  CHECK(test::max_abs_diff(L * L.transpose(), m) < 1e-10);
  CHECK(L(1, 1) == 0.0);

  const Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(3, 3);
  CHECK(test::max_abs_diff(cholesky(Z), Z) == 0.0);
}

TEST_CASE("cholesky scales its pivot tolerance with the matrix") {
  // Entries of order 1e-10 are a valid covariance, not noise around zero: the
  // factor must be sqrt(1e-10)*I exactly, not a column zeroed by an absolute
  // tolerance. Compare exactly so a zero factor cannot slip through an Approx.
  const Eigen::MatrixXd Q = 1e-10 * Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd L = cholesky(Q);
  CHECK(L(0, 0) == std::sqrt(1e-10));
  CHECK(L(1, 1) == std::sqrt(1e-10));
  CHECK(L(1, 0) == 0.0);
  CHECK(L(0, 1) == 0.0);
  CHECK(test::max_abs_diff(L * L.transpose(), Q) < 1e-24);
}

TEST_CASE("cholesky is scale invariant") {
  Eigen::MatrixXd m(2, 2);
  m << 4.0, 1.0, 1.0, 3.0;
  const Eigen::MatrixXd L = cholesky(m);
  const Eigen::MatrixXd Ls = cholesky((1e-12 * m).eval());
  CHECK(test::max_abs_diff(Ls, 1e-6 * L) < 1e-18);
}

TEST_CASE("cholesky rejects indefinite input") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(cholesky(m), NotPsd);
}

TEST_CASE("mat_inverse inverts and guards") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0, 3.0, 4.0;
  const Eigen::MatrixXd inv = mat_inverse(m);
  CHECK(test::max_abs_diff(m * inv, Eigen::MatrixXd::Identity(2, 2)) < 1e-12);

  CHECK_THROWS_AS(mat_inverse(Eigen::MatrixXd::Zero(2, 2)), SingularMatrix);

  Eigen::MatrixXd ill = Eigen::MatrixXd::Identity(2, 2);
  ill(1, 1) = 1e13;  // condition estimate 1e13 > 1e12 cap
  CHECK_THROWS_AS(mat_inverse(ill), SingularMatrix);
}

TEST_CASE("spectral norm and radius") {
  Eigen::MatrixXd d(2, 2);
  d << 3.0, 0.0, 0.0, -5.0;
  CHECK(spectral_norm(d) == doctest::Approx(5.0));
  CHECK(spectral_radius(d) == doctest::Approx(5.0));

  const Eigen::MatrixXd A = test::tank_A();
  CHECK(spectral_radius(A) == doctest::Approx(0.997759473832868).epsilon(1e-10));
  const double n = spectral_norm(A);
  CHECK(n * n == doctest::Approx(0.9955239676232416).epsilon(1e-10));
}

TEST_CASE("solve_dlyap scalar fixed point") {
  Eigen::MatrixXd a(1, 1), w(1, 1);
  a << 0.5;
  w << 1.0;
  const Eigen::MatrixXd x = solve_dlyap(a, w);
  CHECK(x(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("solve_dlyap rejects marginally stable dynamics") {
  Eigen::MatrixXd a(1, 1), w(1, 1);
  a << 1.0;
  w << 1.0;
  CHECK_THROWS_AS(solve_dlyap(a, w), Unstable);
}

TEST_CASE("solve_dlyap satisfies its residual contract on the three-tank noise") {
  const SystemModel m = test::three_tank();
  const Eigen::MatrixXd W = m.process_noise_cov();
  CHECK(W.trace() == doctest::Approx(8.298023131110001e-07).epsilon(1e-12));

  const Eigen::MatrixXd X = solve_dlyap(m.A, W);
  const double residual = (m.A * X * m.A.transpose() + W - X).norm();
  CHECK(residual <= 1e-12 * (1.0 + X.norm()));

  Eigen::MatrixXd expected(3, 3);
  expected << 0.423777618299, 0.122640367537, 0.236126756768, 0.122640367537, 0.153590303138,
      0.11564356518, 0.236126756768, 0.11564356518, 0.173071608403;
  expected *= 1e-4;
  // residual tolerance amplified by 1/(1 - rho(A)^2) ~ 223 bounds the solution error
  CHECK(test::max_abs_diff(X, expected) < 1e-10);
}

TEST_CASE("solve_mare scalar fixed point and plug-back") {
  Eigen::MatrixXd A(1, 1), C(1, 1), Q(1, 1), R(1, 1);
  A << 2.0;
  C << 1.0;
  Q << 1.0;
  R << 1.0;
  const MareResult r = solve_mare(1.0, A, C, Q, R);
  REQUIRE(r.converged());
  CHECK(r.fixed_point(0, 0) == doctest::Approx(4.23606797749979).epsilon(1e-10));
  const Eigen::MatrixXd back = mare_step(1.0, A, C, Q, R, r.fixed_point);
  CHECK(test::max_abs_diff(back, r.fixed_point) < 1e-9);
}

TEST_CASE("solve_mare diverges below the critical rate") {
  Eigen::MatrixXd A(1, 1), C(1, 1), Q(1, 1), R(1, 1);
  A << 2.0;
  C << 1.0;
  Q << 1.0;
  R << 1.0;
  const MareResult r = solve_mare(0.5, A, C, Q, R);
  CHECK_FALSE(r.converged());
}

TEST_CASE("solve_mare feasibility is monotone in the arrival rate") {
  Eigen::MatrixXd A(1, 1), C(1, 1), Q(1, 1), R(1, 1);
  A << 2.0;
  C << 1.0;
  Q << 1.0;
  R << 1.0;
  bool prev = false;
  for (double lam : {0.2, 0.5, 0.7, 0.8, 0.9, 1.0}) {
    const bool feasible = solve_mare(lam, A, C, Q, R).converged();
    CHECK((!prev || feasible));  // once feasible, stays feasible
    prev = prev || feasible;
  }
  CHECK(prev);
}

TEST_CASE("solve_mare converges for stable dynamics at any rate") {
  const SystemModel m = test::three_tank();
  const MareResult r = solve_mare(0.0, m.A, m.C, m.process_noise_cov(), m.R);
  REQUIRE(r.converged());
  // lambda = 0 reduces to the open-loop equation; the step-based stop leaves
  // truncation of order mare_tol / (1 - rho(A)^2).
  const Eigen::MatrixXd lyap = solve_dlyap(m.A, m.process_noise_cov());
  CHECK(test::max_abs_diff(r.fixed_point, lyap) < 1e-7);
}

TEST_CASE("is_ergodic separates mixing from reducible and periodic chains") {
  Eigen::MatrixXd good(2, 2), reducible(2, 2), periodic(2, 2);
  good << 0.1, 0.9, 0.5, 0.5;
  reducible << 1.0, 0.0, 0.0, 1.0;
  periodic << 0.0, 1.0, 1.0, 0.0;
  CHECK(is_ergodic(good));
  CHECK_FALSE(is_ergodic(reducible));
  CHECK_FALSE(is_ergodic(periodic));
}

TEST_CASE("steady_state matches the closed form and plugs back") {
  Eigen::MatrixXd P(2, 2);
  P << 0.1, 0.9, 0.5, 0.5;
  const Eigen::VectorXd pi = steady_state(P);
  CHECK(pi(0) == doctest::Approx(5.0 / 14.0).epsilon(1e-12));
  CHECK(pi(1) == doctest::Approx(9.0 / 14.0).epsilon(1e-12));
  CHECK((P.transpose() * pi - pi).norm() < 1e-12);
  CHECK(pi.sum() == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(steady_state(Eigen::MatrixXd::Identity(2, 2)), NotErgodic);
}
