#include "cli.hpp"

#include <map>
#include <ostream>

#include "CLI11.hpp"

namespace dhym::cli {

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical laboratory for the deformed Hermitian-Yang-Mills and J equations", "dhymlab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", code_version());

  std::string config_path;
  std::string out_dir;
  struct Bound {
    const CommandSpec* spec;
    CLI::App* sub;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
  };
  std::vector<Bound> bound;
  bound.reserve(commands().size());
  for (const CommandSpec& c : commands()) {
    Bound b{&c, app.add_subcommand(c.name, c.help), {}, {}};
    bound.push_back(std::move(b));
  }
  for (Bound& b : bound) {
    b.sub->add_option("--config", config_path, "JSON file of key/value settings; flags override it");
    b.sub->add_option("--out", out_dir, "output root (default: $DHYM_OUT_DIR, else ./runs)");
    for (const KeySpec& k : b.spec->keys) {
      std::string help = k.help;
      if (k.required) help += " [required]";
      else if (!k.fallback.is_null()) help += " [default " + k.fallback.dump() + "]";
      b.options[k.name] = b.sub->add_option("--" + k.name, b.values[k.name], help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 1;
  }

  const Bound* chosen = nullptr;
  for (const Bound& b : bound)
    if (b.sub->parsed()) chosen = &b;
  if (!chosen) {
    err << "no subcommand given\n";
    return 1;
  }

  std::optional<Settings> settings;
  try {
    nlohmann::json config = nlohmann::json::object();
    if (!config_path.empty()) config = load_config(config_path);
    std::vector<std::pair<std::string, std::string>> flags;
    for (const auto& [name, opt] : chosen->options)
      if (opt->count() > 0) flags.emplace_back(name, chosen->values.at(name));
    settings.emplace(resolve_settings(chosen->spec->keys, config, flags));
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  const std::uint64_t seed = settings->has("seed") ? static_cast<std::uint64_t>(settings->get_int("seed")) : 0;
  std::optional<std::string> root_flag;
  if (!out_dir.empty()) root_flag = out_dir;
  std::optional<RunManifest> run;
  try {
    run.emplace(resolve_output_root(root_flag), chosen->spec->name, settings->values(), seed);
  } catch (const std::exception& e) {
    err << "error: cannot create run directory: " << e.what() << "\n";
    return 1;
  }

  int code = 1;
  try {
    Context ctx{out, *run};
    code = chosen->spec->run(*settings, ctx);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    run->set_verdict("overall", "USAGE_ERROR");
    run->set_summary("error", e.what());
    code = 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    run->set_verdict("overall", "ERROR");
    run->set_summary("error", e.what());
    code = 1;
  }
  run->set_summary("exit_code", code);
  run->finish();
  out << "run: " << run->dir().string() << "\n";
  return code;
}

}  // namespace dhym::cli
