#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wplab/validation.hpp"

namespace wplab {

/// Malformed or out-of-range configuration document.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kConfigSchema = 1;

struct SurfaceSpec {
  SurfaceKind kind = SurfaceKind::PuncturedTorus;
  int resolution = 64;
  SurfaceParams params{};
};

/// Family swept by the scaling experiment: collar lengths (norm ratio) or torus heights (curvature).
struct ScalingSpec {
  std::string family = "collar";
  std::vector<double> values{0.5, 0.25, 0.125, 0.0625, 0.03125};
  int resolution = 128;
};

struct RunConfig {
  int schema = kConfigSchema;
  std::uint64_t seed = 7;
  int threads = 0;  // 0 defers to WPLAB_THREADS, then 1
  std::string out = "wplab-out";
  SurfaceSpec surface{};
  double frame_tol = 1e-9;
  double curvature_tol = 1e-9;
  double fd_step = 0.02;
  std::vector<cplx> point;  // chart point for frame, wp, curvature and solve-metric; empty means 0
  std::vector<int> checks{1, 2, 3, 4, 5, 6, 7, 8, 9};
  ValidationSettings validation{};
  ScalingSpec scaling{};

  /// Settings for the validation suite with the top-level seed, threads and step folded in.
  ValidationSettings validation_settings() const;
};

/// Parses a TOML document. Unknown keys, wrong types and out-of-range values raise ConfigError.
RunConfig parse_config(std::string_view text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Command-line overrides, applied after parsing and re-validated.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads, resolution;
  std::optional<std::string> out;
};
void apply_overrides(RunConfig& c, const Overrides& o);

/// Range checks shared by parsing and overrides.
void validate_config(const RunConfig& c);

/// Deterministic key = value listing of every field, the input of config_hash.
std::string canonical_form(const RunConfig& c);
/// 64-bit FNV-1a of the canonical form, as 16 hex digits.
std::string config_hash(const RunConfig& c);

}  // namespace wplab
