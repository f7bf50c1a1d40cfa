/// @file io.hpp
/// @brief Configuration parsing, text artifact emission (meshes, diagnostic
/// CSVs, run manifests), all byte-deterministic given the same inputs.
///
/// Text formats only: Wavefront-style quad meshes, CSV diagnostics with
/// %.17g reals, and a JSON run manifest written atomically (tmp + rename)
/// even when a run fails.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wrinkle/geometry.hpp"
#include "wrinkle/nash_kuiper.hpp"

namespace wrinkle {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class ParamType { integer, real, text, boolean };

/// Declared shape of one config key: its type, whether the key must appear,
/// and an optional textual default applied when it does not.
struct ParamSpec {
  ParamType type = ParamType::real;
  bool required = false;
  std::optional<std::string> fallback;
};

using ConfigSchema = std::map<std::string, ParamSpec>;

/// Typed key-value configuration. Values live in per-type maps; the schema
/// fixes which map a key belongs to.
struct RunConfig {
  std::map<std::string, std::int64_t> ints;
  std::map<std::string, double> reals;
  std::map<std::string, std::string> strings;
  std::map<std::string, bool> bools;

  std::int64_t get_int(const std::string& key) const;
  double get_real(const std::string& key) const;
  const std::string& get_string(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  bool has(const std::string& key) const;
};

/// Parse `key = value` lines (one per line, `#` starts a comment, blank
/// lines skipped) against a schema. Errors carry 1-based line numbers.
/// Throws UnknownKey, TypeMismatch; MissingRequired after the scan if a
/// required key never appeared. Defaults fill absent optional keys.
RunConfig parse_config(const std::string& text, const ConfigSchema& schema);

/// parse_config over a file's contents. Throws IoError if unreadable.
RunConfig parse_config_file(const std::string& path,
                            const ConfigSchema& schema);

// ---------------------------------------------------------------------------
// Artifact emission
// ---------------------------------------------------------------------------

/// Wavefront-style text mesh: one `v x y z` line per node (17 significant
/// digits) in storage order, then 1-based quad faces `f i j k l`, LF line
/// endings, trailing newline. Throws DegenerateSurface when either grid
/// dimension is < 2 and IoError on write failure.
void write_mesh(const Immersion& y, const std::string& path);

/// CSV with header `q,deficit_sup,c0_step,c1_step,c2_norm,lambda_max`, one
/// row per stage, `%.17g` reals, LF endings. Throws IoError.
void write_diagnostics(const std::vector<StageDiagnostics>& rows,
                       const std::string& path);

/// Generic two-column CSV `name,value` with `%.17g` reals. Throws IoError.
void write_report(const std::vector<std::pair<std::string, double>>& rows,
                  const std::string& path);

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

/// Everything a rerun needs plus coarse result scalars. The wall-clock field
/// is informational and deliberately excluded from determinism comparisons;
/// all other fields are functions of (config, seed).
struct RunManifest {
  std::string subcommand;
  std::string version;
  RunConfig config;
  std::uint64_t seed = 0;
  int grid_nx = 0, grid_ny = 0;
  int order = 2;
  std::vector<std::pair<std::string, double>> diagnostics;
  std::vector<std::string> outputs;   ///< artifact paths written by the run
  std::string error;                  ///< empty on success
  double wall_seconds = 0.0;
};

/// Serialize the manifest to pretty JSON (stable key order).
std::string manifest_to_json(const RunManifest& m);

/// Write atomically: serialize to `path + ".tmp"`, then rename over `path`.
/// Throws IoError.
void write_manifest(const RunManifest& m, const std::string& path);

}  // namespace wrinkle
