#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace dhym {

/// Round-trip decimal form ("%.17g"); identical inputs give identical text.
std::string format_double(double v);

/// CSV with a header row and RFC 4180 quoting.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(std::vector<std::string> row);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

  static std::string quote(const std::string& field);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string code_version();

/// Output root: explicit flag, else $DHYM_OUT_DIR, else ./runs.
std::filesystem::path resolve_output_root(const std::optional<std::string>& flag);

/// One run = one fresh directory holding exactly one manifest.json plus the
/// artifacts it lists.  The manifest is written once and never overwritten.
class RunManifest {
 public:
  RunManifest(const std::filesystem::path& root, std::string command, nlohmann::json config, std::uint64_t seed);

  const std::filesystem::path& dir() const { return dir_; }

  /// Writes `content` to dir/name and records it.
  std::filesystem::path write_artifact(const std::string& name, const std::string& content);
  /// Records a file already written into dir() by another writer.
  void record_artifact(const std::string& name);
  void set_verdict(const std::string& key, nlohmann::json value);
  void set_summary(const std::string& key, nlohmann::json value);
  /// Finalizes timestamps and writes manifest.json; throws if it already exists.
  std::filesystem::path finish();

  const nlohmann::json& json() const { return doc_; }

 private:
  std::filesystem::path dir_;
  nlohmann::json doc_;
  bool finished_ = false;
};

}  // namespace dhym
