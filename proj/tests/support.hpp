#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "qsd/hilbert.hpp"
#include "qsd/lagrangian.hpp"
#include "qsd/propagator.hpp"

namespace qsd::testing {

/// Deterministic generic complex vector; entries are standard complex
/// Gaussians so no direction is preferred.
inline Vector random_vector(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  for (int j = 0; j < dim; ++j) {
    v(j) = Complex(normal(rng), normal(rng));
  }
  return v;
}

inline StateVector random_state(std::mt19937_64& rng, int dim) {
  Vector v = random_vector(rng, dim);
  return StateVector(v / v.norm());
}

inline HermitianOperator random_hermitian(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(dim, dim);
  for (int j = 0; j < dim; ++j) {
    for (int k = 0; k < dim; ++k) {
      a(j, k) = Complex(normal(rng), normal(rng));
    }
  }
  return HermitianOperator(0.5 * (a + a.adjoint().eval()));
}

/// Nodes and weights such that E[f(Z)] = sum w_i f(nodes_i) for Z ~ N(0,1),
/// built from the Hermite three-term recurrence (Golub-Welsch).
struct NormalQuadrature {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit NormalQuadrature(int order) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
      const double beta = std::sqrt(k / 2.0);
      jacobi(k, k - 1) = beta;
      jacobi(k - 1, k) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    nodes.resize(order);
    weights.resize(order);
    for (int i = 0; i < order; ++i) {
      nodes[i] = std::sqrt(2.0) * solver.eigenvalues()(i);
      weights[i] = solver.eigenvectors()(0, i) * solver.eigenvectors()(0, i);
    }
  }
};

/// Action density of the doubled field system at frozen noise rate nu,
///
///   L = Re[ -2i psi'^T (psi_dot - W(psi)) ],
///   W  = -i H psi + (-(1/2) Gd^2 + nu Gd) psi,
///   Gd = G - Re(psi^dagger G psi).
///
/// The three slots are independent; the Euler-Lagrange equations of this
/// scalar are what the implemented velocity field must satisfy.
inline double action_density(const QsdModel& model, const Vector& psi,
                             const Vector& psi_prime, const Vector& psi_dot,
                             Complex nu) {
  const Matrix& h = model.hamiltonian.entries();
  const Matrix& g = model.coupling.entries();
  const double mean = psi.dot(g * psi).real();
  const Vector deviation = g * psi - mean * psi;
  const Vector w = Complex(0.0, -1.0) * (h * psi) -
                   0.5 * (g * deviation - mean * deviation) + nu * deviation;
  const Complex paired = psi_prime.transpose() * (psi_dot - w);
  return (Complex(0.0, -2.0) * paired).real();
}

/// Largest Euler-Lagrange residual of the implemented velocity field at one
/// phase-space point, by central finite differences of the action density.
/// Checks both variations:
///   d/d psi' of L = 0          (recovers the psi equation), and
///   d/dt (dL/d psi_dot) = dL/d psi   with dL/d psi_dot = -i psi'
///                              (recovers the psi' equation).
inline double euler_lagrange_residual(const QsdModel& model,
                                      const ExtendedFieldState& state,
                                      Complex nu, double fd_step = 1e-5) {
  const int dim = model.dim();
  const ExtendedFieldRhs rhs = qsd_field_rhs(model, state, nu);
  double worst = 0.0;

  for (int m = 0; m < dim; ++m) {
    for (const Complex bump : {Complex(1.0, 0.0), Complex(0.0, 1.0)}) {
      // Variation in psi': the action is stationary at the implemented
      // psi_dot, so the finite-difference slope itself is the residual.
      {
        Vector plus = state.psi_prime, minus = state.psi_prime;
        plus(m) += bump * fd_step;
        minus(m) -= bump * fd_step;
        const double slope =
            (action_density(model, state.psi, plus, rhs.psi_dot, nu) -
             action_density(model, state.psi, minus, rhs.psi_dot, nu)) /
            (2.0 * fd_step);
        worst = std::max(worst, std::abs(slope));
      }
      // Variation in psi: dL/d psi must equal the time derivative of the
      // conjugate momentum -i psi', which the implemented psi'-velocity
      // supplies.  In the real coordinate pair (Re psi_m, Im psi_m) the
      // momentum derivative reads (2 Im psi'_m, 2 Re psi'_m).
      {
        Vector plus = state.psi, minus = state.psi;
        plus(m) += bump * fd_step;
        minus(m) -= bump * fd_step;
        const double slope =
            (action_density(model, plus, state.psi_prime, rhs.psi_dot, nu) -
             action_density(model, minus, state.psi_prime, rhs.psi_dot, nu)) /
            (2.0 * fd_step);
        const double momentum_rate = bump.real() != 0.0
                                         ? 2.0 * rhs.psi_prime_dot(m).imag()
                                         : 2.0 * rhs.psi_prime_dot(m).real();
        worst = std::max(worst, std::abs(momentum_rate - slope));
      }
    }
  }
  return worst;
}

}  // namespace qsd::testing
