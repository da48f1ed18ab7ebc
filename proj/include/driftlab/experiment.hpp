#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace driftlab {

enum class ExperimentKind { Ensemble, VerifyAssumption, Switching, Ergodicity, Control, ExponentTable };

std::string_view to_string(ExperimentKind kind);

/// A parsed experiment document. The document is JSON; `body` keeps it whole
/// so kind-specific sections can be read when the plan is built.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Ensemble;
  std::string name;
  std::uint64_t seed = 0;
  std::string output_dir;
  std::filesystem::path base_dir;  // relative CSV references resolve here
  nlohmann::json body;
};

/// Parses and fully validates a document: every kind-specific field is
/// checked before anything runs. Throws Error(ConfigInvalid) naming the field
/// path, e.g. "model.noise.rate".
ExperimentConfig parse_config(const nlohmann::json& doc, std::filesystem::path base_dir = {});

/// Reads and parses a config file. Syntax errors are ConfigInvalid.
ExperimentConfig load_config(const std::filesystem::path& path);

struct CriterionResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunManifest {
  std::string name;
  std::string kind;
  std::string config_hash;  // FNV-1a 64 of the canonical document
  std::string version;
  std::uint64_t seed = 0;
  double wall_time_seconds = 0.0;
  std::string output_dir;
  std::vector<std::string> outputs;  // file names relative to output_dir
  std::vector<CriterionResult> criteria;
  std::string error;  // empty on success

  bool all_pass() const;
  /// 0 when every criterion passes, 2 when one fails, 1 on error.
  int exit_code() const;
};

struct RunOptions {
  unsigned workers = 0;
  std::string output_dir;  // overrides the config's when not empty
};

/// Runs a parsed config and writes its CSVs plus manifest.txt into the
/// output directory. Module errors are caught and recorded in the manifest.
RunManifest run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Parses then runs a raw document. A manifest is written even when parsing
/// fails, provided an output directory can be determined.
RunManifest run_document(const nlohmann::json& doc, const RunOptions& options = {},
                         std::filesystem::path base_dir = {});

void write_manifest(const RunManifest& manifest, std::ostream& out);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

std::string version();

struct DemoEntry {
  std::string name;
  std::string description;
  nlohmann::json config;
};

/// Shipped experiment configs.
const std::vector<DemoEntry>& list_demos();

/// Throws Error(ConfigInvalid) for an unknown name.
const DemoEntry& find_demo(const std::string& name);

}  // namespace driftlab
