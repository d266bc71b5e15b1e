#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "otstab/experiments.hpp"

namespace {

struct Flags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> samples;
  std::optional<std::string> out;
  std::optional<std::string> family;
};

otstab::ExperimentConfig load(const Flags& f) {
  nlohmann::json j = nlohmann::json::object();
  if (f.config) {
    std::ifstream in(*f.config);
    if (!in) throw otstab::Error(otstab::ErrorKind::config, "cannot open config '" + *f.config + "'");
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw otstab::Error(otstab::ErrorKind::config, "config is not valid JSON: " + std::string(e.what()));
    }
  }
  if (f.family) j["family"] = *f.family;
  otstab::ExperimentConfig c = otstab::config_from_json(j);
  if (f.seed) c.seed = *f.seed;
  if (f.samples) c.samples = *f.samples;
  if (f.out) c.out = *f.out;
  return c;
}

int run(const Flags& f, otstab::CommandResult (*cmd)(const otstab::ExperimentConfig&)) {
  try {
    const otstab::ExperimentConfig c = load(f);
    const otstab::CommandResult r = cmd(c);
    otstab::write_outputs(c.out, r.files);
    (r.exit_code == 0 ? std::cout : std::cerr) << r.message << "\n";
    for (const auto& file : r.files) std::cout << "wrote " << c.out << "/" << file.name << "\n";
    return r.exit_code;
  } catch (const otstab::Error& e) {
    std::cerr << "error [" << otstab::to_string(e.kind()) << "]: " << e.what() << "\n";
    return otstab::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transport-map stability experiments"};
  app.require_subcommand(1);
  Flags flags;

  auto add_flags = [&flags](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON experiment config");
    sub->add_option("--seed", flags.seed, "random seed");
    sub->add_option("--samples", flags.samples, "Monte Carlo sample budget");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--family", flags.family, "experiment family")
        ->check(CLI::IsMember({"rotating", "cell", "polyblowup", "control"}));
  };

  struct Entry {
    const char* name;
    const char* help;
    otstab::CommandResult (*fn)(const otstab::ExperimentConfig&);
  };
  const Entry entries[] = {
      {"verify-maps", "certify the oracle maps and compare with semi-discrete solves", otstab::cmd_verify_maps},
      {"sweep", "sweep the stability ratio over a parameter grid", otstab::cmd_sweep},
      {"solve-sdot", "solve the semi-discrete problems and report agreement", otstab::cmd_solve_sdot},
      {"witness", "search for a parameter violating a Holder bound", otstab::cmd_witness},
      {"validate-instance", "check a cell instance against its constraints", otstab::cmd_validate_instance},
  };
  std::optional<otstab::CommandResult (*)(const otstab::ExperimentConfig&)> chosen;
  for (const Entry& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    add_flags(sub);
    sub->callback([&chosen, fn = e.fn] { chosen = fn; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return run(flags, *chosen);
}
