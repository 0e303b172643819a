#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qsd/hilbert.hpp"
#include "qsd/noise.hpp"
#include "qsd/propagator.hpp"

namespace qsd {

/// First-order action toy system: coordinate q with velocity field f(q) and
/// a conjugate coordinate q' obeying q'dot = -q' f'(q).  The canonical
/// momenta are p = -q' and p' = q.  f is holomorphic in q, so divergences
/// can be read off from the complex derivative.
struct ToyForce {
  std::string name;
  std::function<Complex(Complex)> f;
  std::function<Complex(Complex)> df;
};

/// f(q) = a q.  Conserves the product q q' exactly.
ToyForce make_linear_force(Complex a);

/// f(q) = a q - b q^3.
ToyForce make_cubic_force(Complex a, Complex b);

/// Holomorphic divergence of the (q, q') flow, split by coordinate.  The
/// q-part is f'(q), the q'-part is -f'(q); their sum vanishes identically,
/// which is the toy version of phase-space volume conservation.  Divergence
/// over the underlying real coordinates is twice the real part.
struct ToyDivergence {
  Complex q_part;
  Complex q_prime_part;

  Complex total() const { return q_part + q_prime_part; }
};

ToyDivergence toy_divergence(const ToyForce& force, Complex q, Complex q_prime);

struct ToyMomenta {
  Complex p;        // conjugate to q:  -q'
  Complex p_prime;  // conjugate to q':  q
};

ToyMomenta toy_momenta(Complex q, Complex q_prime);

struct ToySeries {
  std::vector<double> times;
  std::vector<Complex> q;
  std::vector<Complex> q_prime;
  std::vector<Complex> product;  // q * q'
};

/// Fixed-step RK4 on the coupled (q, q') system.
ToySeries evolve_toy(const ToyForce& force, Complex q0, Complex q0_prime,
                     double dt, double t_final, long record_every);

/// For f(q) = i omega q the toy system is one linear field mode: q rotates
/// one way, q' the other, and |q' - conj(q)| is constant along the flow.
/// Started from q0' = conj(q0) the pair stays conjugate.
struct ConjugacyReport {
  std::vector<double> times;
  std::vector<double> deviation;   // |q'(t) - conj(q(t))|
  double max_deviation = 0.0;
  double deviation_spread = 0.0;   // max - min, zero for an exact rotation
  bool conjugate_preserved = false;  // max below 1e-8
};

ConjugacyReport linear_field_consistency(double omega, Complex q0,
                                         std::optional<Complex> q0_prime,
                                         double dt, double t_final,
                                         long record_every);

/// Doubled state of the diffusive field system: the physical state psi and
/// its action partner psi'.  The velocity of psi reproduces the stochastic
/// propagator's field with the noise rate frozen to nu = d_xi/dt; the
/// velocity of psi' follows from the same action by varying psi.
struct ExtendedFieldState {
  Vector psi;
  Vector psi_prime;
};

struct ExtendedFieldRhs {
  Vector psi_dot;
  Vector psi_prime_dot;
};

/// Velocity of the doubled system at frozen noise rate nu.  With
/// g = psi^T* G psi (raw bilinear mean), Gd = G - g and
/// Q = -(1/2) Gd^2 + nu Gd:
///
///   psi-dot   = -i H psi + Q psi
///   psi'-dot  =  i H^T psi' - Q^T psi'
///               - 2i Im(psi'^T (Gd - nu) psi) G^T conj(psi)
///
/// The last term carries the dependence of Q on the state through g; it is
/// what makes the pair (psi, psi') volume-preserving as a whole even though
/// the psi flow alone contracts.
ExtendedFieldRhs qsd_field_rhs(const QsdModel& model,
                               const ExtendedFieldState& state, Complex nu);

/// Central finite-difference divergence of the full 4N-real-coordinate flow
/// field at frozen nu.  Analytically zero for every (psi, psi', nu).
double extended_divergence(const QsdModel& model,
                           const ExtendedFieldState& state, Complex nu,
                           double fd_step = 1e-5);

/// Same finite-difference divergence restricted to the 2N coordinates of
/// psi with psi' held fixed: the contraction rate of the physical flow
/// alone.  Nonzero away from coupling eigenstates.
double state_only_divergence(const QsdModel& model,
                             const ExtendedFieldState& state, Complex nu,
                             double fd_step = 1e-5);

/// Integrates the doubled system along one noise path, freezing
/// nu_k = d_xi_k / dt over each step and taking explicit Euler steps, so the
/// psi component reproduces the stochastic propagator's update exactly.
/// Reports how far psi' drifts from conj(psi): zero drift without coupling,
/// rapid drift with it.
struct MomentumDriftSeries {
  std::vector<double> times;
  std::vector<double> deviation;   // ||psi' - conj(psi)||
  std::vector<double> state_norm;  // ||psi||
  std::vector<ExtendedFieldState> states;  // doubled state at each record
  std::vector<Complex> rates;      // nu applied in the step ending here (0 at t=0)
  double max_deviation = 0.0;
  double final_deviation = 0.0;
};

MomentumDriftSeries momentum_drift_experiment(const QsdModel& model,
                                              const StateVector& psi0,
                                              NoiseStream& stream,
                                              double t_final,
                                              long record_every);

}  // namespace qsd
