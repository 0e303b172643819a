#include "qsd/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <vector>

namespace qsd {

namespace {

using Json = nlohmann::json;

constexpr double kMirrorTolerance = 1e-8;

struct Problems {
  std::vector<std::string> entries;

  void add(const std::string& field, const std::string& what) {
    entries.push_back(field + ": " + what);
  }
  bool any() const { return !entries.empty(); }
  [[noreturn]] void raise() const {
    std::string joined;
    for (const std::string& e : entries) {
      joined += (joined.empty() ? "" : "\n") + e;
    }
    throw Error(ErrorKind::validation, joined);
  }
};

bool is_integer(const Json& v) {
  return v.is_number_integer() || v.is_number_unsigned();
}

/// Entry-list operator loader: entries are [row, col, re, im].  Cells given
/// on one side of the diagonal are mirrored; cells given on both sides must
/// agree with the mirror to kMirrorTolerance.
Matrix load_operator(const Json& list, int dim, const std::string& field,
                     Problems& problems) {
  Matrix out = Matrix::Zero(dim, dim);
  Eigen::MatrixX<bool> given = Eigen::MatrixX<bool>::Constant(dim, dim, false);
  if (!list.is_array()) {
    problems.add(field, "must be an array of [row, col, re, im] entries");
    return out;
  }
  for (std::size_t e = 0; e < list.size(); ++e) {
    const std::string where = field + "[" + std::to_string(e) + "]";
    const Json& entry = list[e];
    if (!entry.is_array() || entry.size() != 4 || !is_integer(entry[0]) ||
        !is_integer(entry[1]) || !entry[2].is_number() ||
        !entry[3].is_number()) {
      problems.add(where, "must be [row, col, re, im]");
      continue;
    }
    const long row = entry[0].get<long>();
    const long col = entry[1].get<long>();
    if (row < 0 || row >= dim || col < 0 || col >= dim) {
      problems.add(where, "indices out of range for dimension " +
                              std::to_string(dim));
      continue;
    }
    if (given(row, col)) {
      problems.add(where, "duplicate entry for cell [" + std::to_string(row) +
                              "," + std::to_string(col) + "]");
      continue;
    }
    out(row, col) = Complex(entry[2].get<double>(), entry[3].get<double>());
    given(row, col) = true;
  }
  for (int j = 0; j < dim; ++j) {
    for (int k = 0; k < dim; ++k) {
      if (!given(j, k)) {
        continue;
      }
      if (!given(k, j)) {
        out(k, j) = std::conj(out(j, k));
        given(k, j) = true;
      } else if (std::abs(out(j, k) - std::conj(out(k, j))) >
                 kMirrorTolerance) {
        if (j <= k) {
          problems.add(field + "[" + std::to_string(j) + "," +
                           std::to_string(k) + "]",
                       "not Hermitian: conflicts with the conjugate of [" +
                           std::to_string(k) + "," + std::to_string(j) + "]");
        }
      }
    }
  }
  return out;
}

Complex load_complex_pair(const Json& v, const std::string& field,
                          Problems& problems) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
      !v[1].is_number()) {
    problems.add(field, "must be [re, im]");
    return {0.0, 0.0};
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

const char* to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::trajectory:
      return "trajectory";
    case ExperimentKind::ensemble:
      return "ensemble";
    case ExperimentKind::lindblad:
      return "lindblad";
    case ExperimentKind::compare:
      return "compare";
    case ExperimentKind::oscillator:
      return "oscillator";
    case ExperimentKind::liouville:
      return "liouville";
    case ExperimentKind::lagrangian_toy:
      return "lagrangian-toy";
    case ExperimentKind::lagrangian_field:
      return "lagrangian-field";
    case ExperimentKind::noise_selftest:
      return "noise-selftest";
  }
  return "unknown";
}

std::optional<ExperimentKind> experiment_from_string(std::string_view name) {
  for (ExperimentKind kind :
       {ExperimentKind::trajectory, ExperimentKind::ensemble,
        ExperimentKind::lindblad, ExperimentKind::compare,
        ExperimentKind::oscillator, ExperimentKind::liouville,
        ExperimentKind::lagrangian_toy, ExperimentKind::lagrangian_field,
        ExperimentKind::noise_selftest}) {
    if (name == to_string(kind)) {
      return kind;
    }
  }
  return std::nullopt;
}

QsdModel RunConfig::model() const {
  return QsdModel(HermitianOperator(hamiltonian), HermitianOperator(coupling));
}

std::optional<StateVector> RunConfig::initial_state() const {
  if (uniform_random_start) {
    return std::nullopt;
  }
  return StateVector(initial_amplitudes);
}

std::uint64_t fnv1a_64(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::string hash_hex(std::uint64_t hash) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[hash & 0xf];
    hash >>= 4;
  }
  return out;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::io, "cannot read config file " + path.string());
  }
  Json document;
  try {
    in >> document;
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::validation,
                "config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config_json(document);
}

RunConfig parse_config_json(const Json& document) {
  Problems problems;
  RunConfig config;

  if (!document.is_object()) {
    problems.add("config", "top level must be a JSON object");
    problems.raise();
  }

  static const std::set<std::string> known_keys{
      "experiment",   "dimension",   "H",          "G",
      "psi0",         "dt",          "t_final",    "trajectories",
      "master_seed",  "scheme",      "record_every", "output_dir",
      "cloud_size",   "cloud_spread", "with_noise", "toy",
      "noise_streams", "noise_draws"};
  for (const auto& [key, value] : document.items()) {
    if (!known_keys.contains(key)) {
      problems.add(key, "unknown field");
    }
  }

  // experiment
  bool experiment_known = false;
  if (!document.contains("experiment") ||
      !document["experiment"].is_string()) {
    problems.add("experiment", "required string field");
  } else {
    const auto kind =
        experiment_from_string(document["experiment"].get<std::string>());
    if (!kind) {
      problems.add("experiment",
                   "unknown experiment '" +
                       document["experiment"].get<std::string>() + "'");
    } else {
      config.experiment = *kind;
      experiment_known = true;
    }
  }

  const bool wants_matrices =
      !experiment_known || (config.experiment != ExperimentKind::lagrangian_toy &&
                            config.experiment != ExperimentKind::noise_selftest);
  const bool wants_grid =
      !experiment_known || config.experiment != ExperimentKind::noise_selftest;

  // dimension
  if (wants_matrices) {
    if (!document.contains("dimension") || !is_integer(document["dimension"])) {
      problems.add("dimension", "required integer field");
    } else {
      const long n = document["dimension"].get<long>();
      if (n < 1 || n > 4096) {
        problems.add("dimension", "must be in [1, 4096], got " +
                                      std::to_string(n));
      } else {
        config.dimension = static_cast<int>(n);
      }
    }
  } else {
    config.dimension = 1;
  }

  if (config.dimension > 0) {
    config.hamiltonian = Matrix::Zero(config.dimension, config.dimension);
    config.coupling = Matrix::Zero(config.dimension, config.dimension);
    if (document.contains("H")) {
      config.hamiltonian =
          load_operator(document["H"], config.dimension, "H", problems);
    }
    if (document.contains("G")) {
      config.coupling =
          load_operator(document["G"], config.dimension, "G", problems);
    }
  }

  // psi0
  const bool wants_state = wants_matrices;
  if (wants_state && config.dimension > 0) {
    if (!document.contains("psi0")) {
      problems.add("psi0", "required field: entry list or \"uniform-random\"");
    } else if (document["psi0"].is_string()) {
      if (document["psi0"].get<std::string>() == "uniform-random") {
        config.uniform_random_start = true;
        const bool random_ok =
            !experiment_known ||
            config.experiment == ExperimentKind::trajectory ||
            config.experiment == ExperimentKind::ensemble ||
            config.experiment == ExperimentKind::lindblad ||
            config.experiment == ExperimentKind::compare;
        if (!random_ok) {
          problems.add("psi0", "uniform-random is not meaningful for the " +
                                   std::string(to_string(config.experiment)) +
                                   " experiment; give explicit amplitudes");
        }
      } else {
        problems.add("psi0", "string value must be \"uniform-random\"");
      }
    } else if (document["psi0"].is_array()) {
      Vector amplitudes = Vector::Zero(config.dimension);
      std::vector<bool> seen(static_cast<std::size_t>(config.dimension), false);
      for (std::size_t e = 0; e < document["psi0"].size(); ++e) {
        const std::string where = "psi0[" + std::to_string(e) + "]";
        const Json& entry = document["psi0"][e];
        if (!entry.is_array() || entry.size() != 3 || !is_integer(entry[0]) ||
            !entry[1].is_number() || !entry[2].is_number()) {
          problems.add(where, "must be [index, re, im]");
          continue;
        }
        const long index = entry[0].get<long>();
        if (index < 0 || index >= config.dimension) {
          problems.add(where, "index out of range for dimension " +
                                  std::to_string(config.dimension));
          continue;
        }
        if (seen[static_cast<std::size_t>(index)]) {
          problems.add(where, "duplicate amplitude for index " +
                                  std::to_string(index));
          continue;
        }
        seen[static_cast<std::size_t>(index)] = true;
        amplitudes(index) =
            Complex(entry[1].get<double>(), entry[2].get<double>());
      }
      if (amplitudes.norm() < StateVector::kNormFloor) {
        problems.add("psi0", "state norm is below 1e-14");
      } else {
        config.initial_amplitudes = std::move(amplitudes);
      }
    } else {
      problems.add("psi0", "must be an entry list or \"uniform-random\"");
    }
  }

  // dt / t_final
  if (!document.contains("dt") || !document["dt"].is_number()) {
    problems.add("dt", "required numeric field");
  } else {
    config.dt = document["dt"].get<double>();
    if (!(config.dt > 0.0) || !std::isfinite(config.dt)) {
      problems.add("dt", "must be finite and > 0");
    }
  }
  if (wants_grid) {
    if (!document.contains("t_final") || !document["t_final"].is_number()) {
      problems.add("t_final", "required numeric field");
    } else {
      config.t_final = document["t_final"].get<double>();
      if (!(config.t_final > 0.0) || !std::isfinite(config.t_final)) {
        problems.add("t_final", "must be finite and > 0");
      } else if (config.dt > 0.0) {
        const double steps = config.t_final / config.dt;
        if (std::abs(steps - std::llround(steps)) >
            1e-9 * std::max(1.0, steps)) {
          problems.add("t_final", "must be an integer multiple of dt");
        }
      }
    }
  }

  // trajectories
  if (document.contains("trajectories")) {
    if (!is_integer(document["trajectories"]) ||
        document["trajectories"].get<long>() < 1) {
      problems.add("trajectories", "must be an integer >= 1");
    } else {
      config.trajectories = document["trajectories"].get<long>();
    }
  }

  // master_seed
  if (!document.contains("master_seed") ||
      !is_integer(document["master_seed"]) ||
      document["master_seed"].get<long long>() < 0) {
    problems.add("master_seed", "required non-negative integer field");
  } else {
    config.master_seed = document["master_seed"].get<std::uint64_t>();
  }

  // scheme
  if (document.contains("scheme")) {
    const std::string name = document["scheme"].is_string()
                                 ? document["scheme"].get<std::string>()
                                 : std::string();
    if (name == "euler-maruyama") {
      config.scheme = SchemeKind::euler_maruyama;
    } else if (name == "euler-renormalized") {
      config.scheme = SchemeKind::euler_renormalized;
    } else {
      problems.add("scheme",
                   "must be \"euler-maruyama\" or \"euler-renormalized\"");
    }
  }

  // record_every
  if (document.contains("record_every")) {
    if (!is_integer(document["record_every"]) ||
        document["record_every"].get<long>() < 1) {
      problems.add("record_every", "must be an integer >= 1");
    } else {
      config.record_every = document["record_every"].get<long>();
    }
  }

  // output_dir
  if (!document.contains("output_dir") || !document["output_dir"].is_string() ||
      document["output_dir"].get<std::string>().empty()) {
    problems.add("output_dir", "required non-empty string field");
  } else {
    config.output_dir = document["output_dir"].get<std::string>();
  }

  // liouville extras
  if (document.contains("cloud_size")) {
    if (!is_integer(document["cloud_size"]) ||
        document["cloud_size"].get<long>() < 2) {
      problems.add("cloud_size", "must be an integer >= 2");
    } else {
      config.cloud_size = static_cast<int>(document["cloud_size"].get<long>());
    }
  }
  if (experiment_known && config.experiment == ExperimentKind::liouville &&
      config.dimension > 0 && config.cloud_size < 2 * config.dimension + 2) {
    problems.add("cloud_size", "must be >= 2*dimension + 2 = " +
                                   std::to_string(2 * config.dimension + 2));
  }
  if (document.contains("cloud_spread")) {
    if (!document["cloud_spread"].is_number() ||
        !(document["cloud_spread"].get<double>() > 0.0)) {
      problems.add("cloud_spread", "must be a number > 0");
    } else {
      config.cloud_spread = document["cloud_spread"].get<double>();
    }
  }
  if (document.contains("with_noise")) {
    if (!document["with_noise"].is_boolean()) {
      problems.add("with_noise", "must be a boolean");
    } else {
      config.with_noise = document["with_noise"].get<bool>();
    }
  }

  // lagrangian-toy extras
  if (document.contains("toy")) {
    const Json& toy = document["toy"];
    if (!toy.is_object()) {
      problems.add("toy", "must be an object");
    } else {
      static const std::set<std::string> toy_keys{"force", "a", "b", "q0",
                                                  "q0_prime"};
      for (const auto& [key, value] : toy.items()) {
        if (!toy_keys.contains(key)) {
          problems.add("toy." + key, "unknown field");
        }
      }
      if (toy.contains("force")) {
        if (!toy["force"].is_string() ||
            (toy["force"].get<std::string>() != "linear" &&
             toy["force"].get<std::string>() != "cubic")) {
          problems.add("toy.force", "must be \"linear\" or \"cubic\"");
        } else {
          config.toy.force = toy["force"].get<std::string>();
        }
      }
      if (toy.contains("a")) {
        config.toy.a = load_complex_pair(toy["a"], "toy.a", problems);
      }
      if (toy.contains("b")) {
        config.toy.b = load_complex_pair(toy["b"], "toy.b", problems);
      }
      if (toy.contains("q0")) {
        config.toy.q0 = load_complex_pair(toy["q0"], "toy.q0", problems);
      }
      if (toy.contains("q0_prime")) {
        config.toy.q0_prime =
            load_complex_pair(toy["q0_prime"], "toy.q0_prime", problems);
      }
    }
  }

  // noise-selftest extras
  if (document.contains("noise_streams")) {
    if (!is_integer(document["noise_streams"]) ||
        document["noise_streams"].get<long>() < 2) {
      problems.add("noise_streams", "must be an integer >= 2");
    } else {
      config.noise_streams =
          static_cast<int>(document["noise_streams"].get<long>());
    }
  }
  if (document.contains("noise_draws")) {
    if (!is_integer(document["noise_draws"]) ||
        document["noise_draws"].get<long>() < 2) {
      problems.add("noise_draws", "must be an integer >= 2");
    } else {
      config.noise_draws = document["noise_draws"].get<long>();
    }
  }

  if (problems.any()) {
    problems.raise();
  }

  config.config_hash = fnv1a_64(document.dump());
  return config;
}

}  // namespace qsd
