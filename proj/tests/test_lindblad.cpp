#include <doctest.h>

#include <cmath>

#include "qsd/lindblad.hpp"
#include "support.hpp"

using namespace qsd;

namespace {

QsdModel measurement_qubit() {
  return QsdModel(HermitianOperator::zero(2),
                  HermitianOperator::diagonal(Eigen::Vector2d(1, -1)));
}

Matrix plus_projector() {
  Matrix rho(2, 2);
  rho << Complex(0.5, 0), Complex(0.5, 0), Complex(0.5, 0), Complex(0.5, 0);
  return rho;
}

}  // namespace

TEST_CASE("dissipator kills coherences at rate 2 and leaves populations") {
  const Matrix rate = lindblad_rhs(measurement_qubit(), plus_projector());
  CHECK(rate(0, 0) == Complex(0, 0));
  CHECK(rate(1, 1) == Complex(0, 0));
  CHECK(rate(0, 1).real() == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(rate(1, 0).real() == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("pure Hamiltonian part reproduces the commutator") {
  std::mt19937_64 rng(505);
  for (int trial = 0; trial < 20; ++trial) {
    const HermitianOperator h = testing::random_hermitian(rng, 3);
    const QsdModel model(h, HermitianOperator::zero(3));
    const Matrix rho =
        DensityMatrix::pure(testing::random_state(rng, 3)).entries();
    const Matrix expected = Complex(0, -1) * (h.entries() * rho - rho * h.entries());
    CHECK((lindblad_rhs(model, rho) - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("coherence decay matches the closed form over time") {
  const DensitySeries series = evolve_rho(
      measurement_qubit(), DensityMatrix(plus_projector()), 1e-3, 1.0, 100);
  REQUIRE(series.times.size() == 11);
  for (std::size_t r = 0; r < series.times.size(); ++r) {
    const double expected = 0.5 * std::exp(-2.0 * series.times[r]);
    CHECK(series.states[r](0, 1).real() ==
          doctest::Approx(expected).epsilon(1e-9));
    CHECK(series.states[r](0, 0).real() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(series.states[r].trace().real() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(series.states.back()(0, 1).real() ==
        doctest::Approx(0.5 * std::exp(-2.0)).epsilon(1e-8));
}

TEST_CASE("unitary rotation of the coherence phase") {
  const double omega = M_PI;
  const QsdModel model(
      HermitianOperator::diagonal(Eigen::Vector2d(omega, 0.0)),
      HermitianOperator::zero(2));
  const DensitySeries series =
      evolve_rho(model, DensityMatrix(plus_projector()), 1e-4, 1.0, 10000);
  // At omega t = pi the off-diagonal has rotated to -1/2.
  CHECK(series.states.back()(0, 1).real() == doctest::Approx(-0.5).epsilon(1e-8));
  CHECK(std::abs(series.states.back()(0, 1).imag()) < 1e-8);
}

TEST_CASE("commuting diagonal input is stationary") {
  Matrix rho = Matrix::Zero(2, 2);
  rho(0, 0) = 0.3;
  rho(1, 1) = 0.7;
  const DensitySeries series =
      evolve_rho(measurement_qubit(), DensityMatrix(rho), 1e-3, 2.0, 500);
  for (const Matrix& state : series.states) {
    CHECK((state - rho).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("integration preserves the density-matrix envelope") {
  std::mt19937_64 rng(606);
  const HermitianOperator h = testing::random_hermitian(rng, 4);
  const HermitianOperator g = testing::random_hermitian(rng, 4);
  const QsdModel model(h, g);
  const DensitySeries series = evolve_rho(
      model, DensityMatrix::pure(testing::random_state(rng, 4)), 1e-3, 1.0, 200);
  for (const Matrix& state : series.states) {
    CHECK(std::abs(state.trace().real() - 1.0) < 1e-9);
    CHECK((state - state.adjoint()).cwiseAbs().maxCoeff() < 1e-9);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(state, Eigen::EigenvaluesOnly);
    CHECK(solver.eigenvalues().minCoeff() > -1e-8);
  }
}

TEST_CASE("a step size far over the decay rate trips the instability guard") {
  const QsdModel stiff(HermitianOperator::zero(2),
                       HermitianOperator::diagonal(Eigen::Vector2d(40, -40)));
  bool caught = false;
  try {
    evolve_rho(stiff, DensityMatrix(plus_projector()), 0.1, 1.0, 1);
  } catch (const Error& error) {
    caught = true;
    CHECK(error.kind() == ErrorKind::oracle_instability);
  }
  CHECK(caught);
}

TEST_CASE("trace distance hand values and properties") {
  Matrix diag_a = Matrix::Zero(2, 2);
  diag_a(0, 0) = 0.75;
  diag_a(1, 1) = 0.25;
  const Matrix mixed = 0.5 * Matrix::Identity(2, 2);
  CHECK(trace_distance(diag_a, mixed) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(trace_distance(mixed, diag_a) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(trace_distance(diag_a, diag_a) == 0.0);

  // Orthogonal pure states sit at distance 1.
  Matrix up = Matrix::Zero(2, 2), down = Matrix::Zero(2, 2);
  up(0, 0) = 1.0;
  down(1, 1) = 1.0;
  CHECK(trace_distance(up, down) == doctest::Approx(1.0).epsilon(1e-14));

  // Non-Hermitian difference is rejected.
  Matrix skew = Matrix::Zero(2, 2);
  skew(0, 1) = 1.0;
  CHECK_THROWS_AS(trace_distance(skew, Matrix::Zero(2, 2)), Error);
}
