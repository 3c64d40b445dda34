#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dhym/hermitian.hpp"
#include "dhym/report.hpp"

namespace dhym::cli {

/// Bad flags, malformed config or invalid parameter combinations (exit 1).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class KeyKind { Int, Real, Text, Bool, RealList, Matrix };

struct KeySpec {
  std::string name;
  KeyKind kind = KeyKind::Real;
  bool required = false;
  nlohmann::json fallback;  // null: optional without default
  std::string help;
};

/// Merged configuration for one command: config-file values overridden by flags.
class Settings {
 public:
  Settings(std::vector<KeySpec> keys, nlohmann::json values);

  bool has(const std::string& key) const;
  long long get_int(const std::string& key) const;
  double get_real(const std::string& key) const;
  std::string get_text(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_list(const std::string& key) const;
  /// Comma list -> diagonal; nested list -> full matrix (entries real or [re, im]).
  HermitianMatrix get_matrix(const std::string& key, int n) const;
  std::optional<double> get_optional_real(const std::string& key) const;

  const nlohmann::json& values() const { return values_; }

 private:
  const nlohmann::json& raw(const std::string& key) const;
  std::vector<KeySpec> keys_;
  nlohmann::json values_;
};

/// Converts a flag string to the JSON form of `kind`; throws UsageError.
nlohmann::json parse_flag_value(const KeySpec& key, const std::string& text);

/// Config values, then flag overrides, then defaults.  Unknown config keys and
/// missing required keys are reported together in one UsageError.
Settings resolve_settings(const std::vector<KeySpec>& keys, const nlohmann::json& config,
                          const std::vector<std::pair<std::string, std::string>>& flags);

nlohmann::json load_config(const std::string& path);

struct Context {
  std::ostream& out;
  RunManifest& run;
};

/// Runs the experiment for a resolved command; returns 0 (verdict pass) or 2.
using CommandFn = std::function<int(const Settings&, Context&)>;

struct CommandSpec {
  std::string name;
  std::string help;
  std::vector<KeySpec> keys;
  CommandFn run;
};

const std::vector<CommandSpec>& commands();

/// Full entry point; returns the process exit code (0 pass, 2 verdict failure, 1 usage error).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dhym::cli
