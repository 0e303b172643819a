#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "qsd/hilbert.hpp"
#include "qsd/propagator.hpp"

namespace qsd {

enum class ExperimentKind {
  trajectory,
  ensemble,
  lindblad,
  compare,
  oscillator,
  liouville,
  lagrangian_toy,
  lagrangian_field,
  noise_selftest,
};

const char* to_string(ExperimentKind kind) noexcept;
std::optional<ExperimentKind> experiment_from_string(std::string_view name);

struct ToyConfig {
  std::string force = "linear";
  Complex a{1.0, 0.0};
  Complex b{0.0, 0.0};
  Complex q0{1.0, 0.0};
  std::optional<Complex> q0_prime;
};

/// One fully validated run description.  Everything an experiment needs
/// lives here; the only knobs outside the file are --seed-override and the
/// worker count, neither of which may change results (the seed override is
/// recorded, the worker count is contractually invisible).
struct RunConfig {
  ExperimentKind experiment = ExperimentKind::trajectory;
  int dimension = 0;
  Matrix hamiltonian;  // zero when absent from the file
  Matrix coupling;     // zero when absent from the file
  bool uniform_random_start = false;
  Vector initial_amplitudes;  // empty when uniform_random_start
  double dt = 0.0;
  double t_final = 0.0;
  long trajectories = 1;
  std::uint64_t master_seed = 0;
  SchemeKind scheme = SchemeKind::euler_renormalized;
  long record_every = 1;
  std::filesystem::path output_dir;

  // Experiment-specific extras, all defaulted.
  int cloud_size = 16;        // liouville
  double cloud_spread = 1e-2;  // liouville
  bool with_noise = true;      // liouville: diffusive vs unitary cloud
  ToyConfig toy;               // lagrangian-toy
  int noise_streams = 100;     // noise-selftest
  long noise_draws = 10000;    // noise-selftest

  /// FNV-1a over the canonical JSON rendering of the file content.
  std::uint64_t config_hash = 0;

  QsdModel model() const;
  /// Fixed initial state, or nullopt for uniform-random.
  std::optional<StateVector> initial_state() const;
};

std::uint64_t fnv1a_64(std::string_view text);
std::string hash_hex(std::uint64_t hash);

/// Parses and validates; throws Error(validation) whose message lists every
/// problem found, one per line, each prefixed with the offending field.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_json(const nlohmann::json& document);

}  // namespace qsd
