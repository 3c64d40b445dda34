#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dhym/report.hpp"
#include "doctest.h"

using namespace dhym;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("CSV quoting") {
  CsvTable t({"a", "b"});
  t.add_row({"1", "x,y"});
  t.add_row({"say \"hi\"", "line\nbreak"});
  CHECK(t.rows() == 2);
  CHECK(t.str() == "a,b\r\n1,\"x,y\"\r\n\"say \"\"hi\"\"\",\"line\nbreak\"\r\n");
  CHECK_THROWS_AS(t.add_row({"only one"}), std::invalid_argument);
}

TEST_CASE("output root precedence") {
  ::unsetenv("DHYM_OUT_DIR");
  CHECK(resolve_output_root(std::nullopt) == fs::path("runs"));
  ::setenv("DHYM_OUT_DIR", "/tmp/from_env", 1);
  CHECK(resolve_output_root(std::nullopt) == fs::path("/tmp/from_env"));
  CHECK(resolve_output_root(std::string("flag")) == fs::path("flag"));
  ::unsetenv("DHYM_OUT_DIR");
}

TEST_CASE("run manifests get unique directories and are written once") {
  const fs::path root = fresh_dir("dhym_report_test");
  std::set<fs::path> dirs;
  for (int k = 0; k < 3; ++k) {
    RunManifest m(root, "probe", {{"k", k}}, 7);
    CHECK(dirs.insert(m.dir()).second);
    m.write_artifact("table.csv", "a\r\n1\r\n");
    CHECK_THROWS(m.write_artifact("table.csv", "again"));
    m.set_verdict("probe", "PASS");
    m.set_summary("value", 1.5);
    const fs::path mp = m.finish();
    CHECK_THROWS(m.finish());
    const auto doc = nlohmann::json::parse(slurp(mp));
    CHECK(doc["command"] == "probe");
    CHECK(doc["config"]["k"] == k);
    CHECK(doc["seed"] == 7);
    CHECK(doc["artifacts"][0] == "table.csv");
    CHECK(doc["verdicts"]["probe"] == "PASS");
    CHECK(doc["code_version"] == code_version());
    CHECK(doc.contains("started"));
    CHECK(doc.contains("finished"));
  }
  fs::remove_all(root);
}
