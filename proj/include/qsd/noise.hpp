#pragma once

#include <complex>
#include <cstdint>
#include <random>

#include "qsd/errors.hpp"

namespace qsd {

/// One complex Ito increment d_xi over a step dt.  Real and imaginary parts
/// are independent N(0, dt/2) draws, so E[d_xi] = 0, E[d_xi^2] = 0 and
/// E[|d_xi|^2] = dt.
struct ComplexIncrement {
  double re = 0.0;
  double im = 0.0;

  std::complex<double> value() const { return {re, im}; }
};

/// Deterministic per-trajectory noise source.  Two streams with the same
/// (seed, stream_id, dt) produce bit-identical sequences; distinct stream
/// ids decorrelate by construction, so one master seed can fan out to any
/// number of trajectories without draw-order coupling between them.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t stream_id, double dt);

  ComplexIncrement next();

  /// A single standard normal draw from the same underlying generator.
  /// Used for isotropic state sampling so that a trajectory's entire
  /// randomness comes from its own stream.
  double next_normal();

  double dt() const { return dt_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  double dt_;
  double sigma_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> unit_normal_;
};

/// Sample-moment summary over a block of streams, with standard errors, used
/// to check the increment statistics against their defining values.
struct MomentReport {
  std::uint64_t seed = 0;
  int stream_count = 0;
  long draws_per_stream = 0;
  double dt = 0.0;

  double mean_re = 0.0, mean_im = 0.0;          // E[d_xi] components
  double se_mean = 0.0;                         // shared per-component se
  double mean_sq_re = 0.0, mean_sq_im = 0.0;    // E[d_xi^2] components
  double se_sq = 0.0;
  double mean_abs_sq = 0.0;                     // E[|d_xi|^2]
  double se_abs_sq = 0.0;
  double cross_corr_re = 0.0, cross_corr_im = 0.0;  // stream 0 vs stream 1
  double se_cross = 0.0;

  /// Largest |deviation| / se across all checked moments.
  double max_sigma_deviation() const;
  bool within(double sigmas) const { return max_sigma_deviation() < sigmas; }
};

/// Draws `draws_per_stream` increments from each of `stream_count` streams
/// and reports sample moments.  Needs at least two streams for the
/// cross-stream correlation entry.
MomentReport moment_report(std::uint64_t seed, int stream_count,
                           long draws_per_stream, double dt);

}  // namespace qsd
