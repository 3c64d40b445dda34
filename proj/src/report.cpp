#include "dhym/report.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <system_error>

#ifndef DHYM_VERSION
#define DHYM_VERSION "0.0.0"
#endif

namespace dhym {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw std::invalid_argument("CsvTable: row width differs from header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string CsvTable::str() const {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << quote(r[i]);
    os << "\r\n";
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return os.str();
}

std::string code_version() { return DHYM_VERSION; }

std::filesystem::path resolve_output_root(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("DHYM_OUT_DIR"); env && *env) return env;
  return "runs";
}

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string stamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%S", &tm);
  return buf;
}

}  // namespace

RunManifest::RunManifest(const std::filesystem::path& root, std::string command, nlohmann::json config,
                         std::uint64_t seed) {
  std::filesystem::create_directories(root);
  const std::string base = command + "-" + stamp();
  // create_directory is atomic: the first process to claim a name owns it.
  for (int k = 0;; ++k) {
    const auto cand = root / (k == 0 ? base : base + "-" + std::to_string(k));
    std::error_code ec;
    if (std::filesystem::create_directory(cand, ec)) {
      dir_ = cand;
      break;
    }
    if (ec) throw std::filesystem::filesystem_error("cannot create run directory", cand, ec);
    if (k > 10000) throw std::runtime_error("RunManifest: could not allocate a run directory");
  }
  doc_["command"] = std::move(command);
  doc_["config"] = std::move(config);
  doc_["code_version"] = code_version();
  doc_["seed"] = seed;
  doc_["started"] = utc_now();
  doc_["artifacts"] = nlohmann::json::array();
  doc_["verdicts"] = nlohmann::json::object();
  doc_["summary"] = nlohmann::json::object();
}

std::filesystem::path RunManifest::write_artifact(const std::string& name, const std::string& content) {
  if (finished_) throw std::logic_error("RunManifest: already finished");
  const auto path = dir_ / name;
  if (std::filesystem::exists(path)) throw std::runtime_error("artifact already exists: " + path.string());
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
  doc_["artifacts"].push_back(name);
  return path;
}

void RunManifest::record_artifact(const std::string& name) {
  if (finished_) throw std::logic_error("RunManifest: already finished");
  if (!std::filesystem::exists(dir_ / name)) throw std::runtime_error("artifact missing: " + (dir_ / name).string());
  doc_["artifacts"].push_back(name);
}

void RunManifest::set_verdict(const std::string& key, nlohmann::json value) { doc_["verdicts"][key] = std::move(value); }
void RunManifest::set_summary(const std::string& key, nlohmann::json value) { doc_["summary"][key] = std::move(value); }

std::filesystem::path RunManifest::finish() {
  if (finished_) throw std::logic_error("RunManifest: already finished");
  doc_["finished"] = utc_now();
  const auto path = dir_ / "manifest.json";
  if (std::filesystem::exists(path)) throw std::runtime_error("manifest already exists: " + path.string());
  std::ofstream out(path, std::ios::binary);
  out << doc_.dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write " + path.string());
  finished_ = true;
  return path;
}

}  // namespace dhym
