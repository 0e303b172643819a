#include "qsd/hilbert.hpp"

#include <cmath>
#include <cstdio>

namespace qsd {

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw Error(ErrorKind::invalid_argument,
                std::string(what) + " must be a square matrix of dimension >= 1");
  }
}

}  // namespace

StateVector::StateVector(Vector amplitudes, std::string basis_label)
    : amplitudes_(std::move(amplitudes)), basis_label_(std::move(basis_label)) {
  if (amplitudes_.size() < 1) {
    throw Error(ErrorKind::invalid_argument,
                "state vector needs at least one amplitude");
  }
  if (!amplitudes_.allFinite()) {
    throw Error(ErrorKind::invalid_argument,
                "state vector amplitudes must be finite");
  }
}

bool StateVector::is_normalized(double tolerance) const {
  return std::abs(norm() - 1.0) <= tolerance;
}

HermitianOperator::HermitianOperator(const Matrix& entries) {
  require_square(entries, "operator");
  if (!entries.allFinite()) {
    throw Error(ErrorKind::invalid_argument, "operator entries must be finite");
  }
  entries_ = 0.5 * (entries + entries.adjoint());
  correction_ = (entries_ - entries).cwiseAbs().maxCoeff();
  if (correction_ > kWarnThreshold) {
    std::fprintf(stderr,
                 "warning: operator symmetrized, largest adjustment %.3e\n",
                 correction_);
  }
}

HermitianOperator HermitianOperator::zero(int dim) {
  HermitianOperator op;
  op.entries_ = Matrix::Zero(dim, dim);
  return op;
}

HermitianOperator HermitianOperator::identity(int dim) {
  HermitianOperator op;
  op.entries_ = Matrix::Identity(dim, dim);
  return op;
}

HermitianOperator HermitianOperator::diagonal(const RealVector& values) {
  HermitianOperator op;
  op.entries_ = values.cast<Complex>().asDiagonal();
  return op;
}

DensityMatrix::DensityMatrix(const Matrix& entries) {
  require_square(entries, "density matrix");
  const double asym = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) {
    throw Error(ErrorKind::invalid_argument,
                "density matrix is not Hermitian; largest asymmetry " +
                    std::to_string(asym));
  }
  entries_ = 0.5 * (entries + entries.adjoint());
  const double trace = entries_.trace().real();
  if (std::abs(trace - 1.0) > kTraceTolerance) {
    throw Error(ErrorKind::invalid_argument,
                "density matrix trace deviates from 1 by " +
                    std::to_string(std::abs(trace - 1.0)));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(entries_,
                                               Eigen::EigenvaluesOnly);
  min_eigenvalue_ = solver.eigenvalues().minCoeff();
  if (min_eigenvalue_ < -kPositivityTolerance) {
    throw Error(ErrorKind::invalid_argument,
                "density matrix has negative eigenvalue " +
                    std::to_string(min_eigenvalue_));
  }
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  const StateVector unit = normalize(psi);
  return DensityMatrix(unit.amplitudes() * unit.amplitudes().adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

double expectation(const StateVector& psi, const HermitianOperator& g) {
  if (psi.dim() != g.dim()) {
    throw Error(ErrorKind::invalid_argument,
                "state dimension " + std::to_string(psi.dim()) +
                    " does not match operator dimension " +
                    std::to_string(g.dim()));
  }
  const double norm_sq = psi.amplitudes().squaredNorm();
  if (norm_sq < StateVector::kNormFloor * StateVector::kNormFloor) {
    throw Error(ErrorKind::degenerate_state,
                "expectation undefined for a state of norm " +
                    std::to_string(std::sqrt(norm_sq)));
  }
  const Complex quad = psi.amplitudes().dot(g.entries() * psi.amplitudes());
  const double scale = std::max(1.0, std::abs(quad));
  if (std::abs(quad.imag()) > 1e-10 * scale) {
    throw Error(ErrorKind::contract_violation,
                "quadratic form of a Hermitian operator has imaginary residue " +
                    std::to_string(quad.imag()));
  }
  return quad.real() / norm_sq;
}

HermitianOperator shifted_operator(const HermitianOperator& g,
                                   const StateVector& psi) {
  const double mean = expectation(psi, g);
  Matrix shifted = g.entries();
  shifted.diagonal().array() -= mean;
  return HermitianOperator(shifted);
}

double variance(const StateVector& psi, const HermitianOperator& g) {
  const StateVector unit = normalize(psi);
  const double mean = expectation(unit, g);
  const Vector deviation =
      g.entries() * unit.amplitudes() - mean * unit.amplitudes();
  return deviation.squaredNorm();
}

StateVector normalize(const StateVector& psi) {
  const double n = psi.norm();
  if (n < StateVector::kNormFloor) {
    throw Error(ErrorKind::degenerate_state,
                "cannot normalize a state of norm " + std::to_string(n));
  }
  return StateVector(psi.amplitudes() / n, psi.basis_label());
}

}  // namespace qsd
