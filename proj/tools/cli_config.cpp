#include <charconv>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace dhym::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw UsageError("--" + key + ": expected a number, got '" + text + "'");
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw UsageError("--" + key + ": expected an integer, got '" + text + "'");
  return v;
}

nlohmann::json parse_list(const std::string& key, const std::string& text) {
  nlohmann::json arr = nlohmann::json::array();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) arr.push_back(parse_real(key, item));
  if (arr.empty()) throw UsageError("--" + key + ": empty list");
  return arr;
}

const char* kind_name(KeyKind k) {
  switch (k) {
    case KeyKind::Int: return "integer";
    case KeyKind::Real: return "number";
    case KeyKind::Text: return "string";
    case KeyKind::Bool: return "boolean";
    case KeyKind::RealList: return "list of numbers";
    case KeyKind::Matrix: return "matrix";
  }
  return "value";
}

bool matches_kind(const nlohmann::json& v, KeyKind k) {
  switch (k) {
    case KeyKind::Int: return v.is_number_integer();
    case KeyKind::Real: return v.is_number();
    case KeyKind::Text: return v.is_string();
    case KeyKind::Bool: return v.is_boolean();
    case KeyKind::RealList:
      if (!v.is_array() || v.empty()) return false;
      for (const auto& e : v)
        if (!e.is_number()) return false;
      return true;
    case KeyKind::Matrix: return v.is_array() && !v.empty();
  }
  return false;
}

}  // namespace

nlohmann::json parse_flag_value(const KeySpec& key, const std::string& text) {
  switch (key.kind) {
    case KeyKind::Int: return parse_int(key.name, text);
    case KeyKind::Real: return parse_real(key.name, text);
    case KeyKind::Text: return text;
    case KeyKind::Bool: {
      const std::string t = trim(text);
      if (t == "true" || t == "1" || t == "yes") return true;
      if (t == "false" || t == "0" || t == "no") return false;
      throw UsageError("--" + key.name + ": expected true or false, got '" + text + "'");
    }
    case KeyKind::RealList:
    case KeyKind::Matrix: return parse_list(key.name, text);
  }
  return nullptr;
}

Settings resolve_settings(const std::vector<KeySpec>& keys, const nlohmann::json& config,
                          const std::vector<std::pair<std::string, std::string>>& flags) {
  if (!config.is_object()) throw UsageError("config must be a JSON object");
  std::vector<std::string> problems;
  nlohmann::json values = nlohmann::json::object();
  auto find = [&](const std::string& name) -> const KeySpec* {
    for (const auto& k : keys)
      if (k.name == name) return &k;
    return nullptr;
  };
  for (const auto& [name, v] : config.items()) {
    const KeySpec* k = find(name);
    if (!k) {
      problems.push_back("unknown config key '" + name + "'");
      continue;
    }
    if (!matches_kind(v, k->kind)) {
      problems.push_back("config key '" + name + "' must be a " + kind_name(k->kind));
      continue;
    }
    values[name] = v;
  }
  for (const auto& [name, text] : flags) {
    const KeySpec* k = find(name);
    if (!k) throw UsageError("unknown flag --" + name);
    values[name] = parse_flag_value(*k, text);
  }
  std::vector<std::string> missing;
  for (const auto& k : keys) {
    if (values.contains(k.name)) continue;
    if (k.required)
      missing.push_back(k.name);
    else if (!k.fallback.is_null())
      values[k.name] = k.fallback;
  }
  if (!missing.empty()) {
    std::string m = "missing required keys:";
    for (const auto& s : missing) m += " " + s;
    problems.push_back(m);
  }
  if (!problems.empty()) {
    std::string msg;
    for (std::size_t i = 0; i < problems.size(); ++i) msg += (i ? "; " : "") + problems[i];
    throw UsageError(msg);
  }
  return Settings(keys, std::move(values));
}

nlohmann::json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("malformed config " + path + ": " + e.what());
  }
}

Settings::Settings(std::vector<KeySpec> keys, nlohmann::json values)
    : keys_(std::move(keys)), values_(std::move(values)) {}

bool Settings::has(const std::string& key) const { return values_.contains(key) && !values_[key].is_null(); }

const nlohmann::json& Settings::raw(const std::string& key) const {
  if (!has(key)) throw UsageError("missing value for " + key);
  return values_[key];
}

long long Settings::get_int(const std::string& key) const {
  const auto& v = raw(key);
  if (!v.is_number_integer()) throw UsageError(key + " must be an integer");
  return v.get<long long>();
}

double Settings::get_real(const std::string& key) const {
  const auto& v = raw(key);
  if (!v.is_number()) throw UsageError(key + " must be a number");
  return v.get<double>();
}

std::optional<double> Settings::get_optional_real(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return get_real(key);
}

std::string Settings::get_text(const std::string& key) const {
  const auto& v = raw(key);
  if (!v.is_string()) throw UsageError(key + " must be a string");
  return v.get<std::string>();
}

bool Settings::get_bool(const std::string& key) const {
  const auto& v = raw(key);
  if (!v.is_boolean()) throw UsageError(key + " must be true or false");
  return v.get<bool>();
}

std::vector<double> Settings::get_list(const std::string& key) const {
  const auto& v = raw(key);
  if (!matches_kind(v, KeyKind::RealList)) throw UsageError(key + " must be a list of numbers");
  return v.get<std::vector<double>>();
}

HermitianMatrix Settings::get_matrix(const std::string& key, int n) const {
  const auto& v = raw(key);
  if (!v.is_array() || v.empty()) throw UsageError(key + " must be a list or a nested matrix");
  if (v[0].is_number()) {
    const auto d = get_list(key);
    if (static_cast<int>(d.size()) != n)
      throw UsageError(key + ": expected " + std::to_string(n) + " diagonal entries, got " + std::to_string(d.size()));
    return HermitianMatrix::diagonal(d);
  }
  if (static_cast<int>(v.size()) != n) throw UsageError(key + ": expected " + std::to_string(n) + " rows");
  HermitianMatrix m(n);
  for (int i = 0; i < n; ++i) {
    if (!v[i].is_array() || static_cast<int>(v[i].size()) != n) throw UsageError(key + ": row " + std::to_string(i) + " has the wrong length");
    for (int j = 0; j < n; ++j) {
      const auto& e = v[i][j];
      if (e.is_number())
        m(i, j) = e.get<double>();
      else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
        m(i, j) = cplx(e[0].get<double>(), e[1].get<double>());
      else
        throw UsageError(key + ": entries must be numbers or [re, im] pairs");
    }
  }
  if (m.hermitian_defect() > 1e-12 * std::max(1.0, m.max_abs())) throw UsageError(key + " is not Hermitian");
  m.symmetrize();
  return m;
}

}  // namespace dhym::cli
