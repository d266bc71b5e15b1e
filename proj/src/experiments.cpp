#include "otstab/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "otstab/constructions.hpp"
#include "otstab/sdot.hpp"
#include "otstab/transport_maps.hpp"

namespace otstab {
namespace {

constexpr double kMaxTheta = 0.1;
constexpr int kMaxCells = 1000;
constexpr double kAgreementFloor = 0.995;

// stream counters of the independent random inputs of a command
enum Stream : std::uint64_t { certificate = 1, pushforward = 2, training = 3, validation = 4, witness = 5 };

SamplerState stream_state(const ExperimentConfig& c, Stream s, std::uint64_t k) {
  return {c.seed, derive_counter(s, k)};
}

std::vector<double> decades(double hi_exp, double lo_exp, int per_decade) {
  std::vector<double> g;
  for (int k = 0;; ++k) {
    const double e = hi_exp - static_cast<double>(k) / per_decade;
    if (e < lo_exp - 1e-9) break;
    g.push_back(std::pow(10.0, e));
  }
  return g;
}

void fail(const std::string& msg) { throw Error(ErrorKind::config, msg); }

template <class T>
T read_field(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(std::string("config field '") + key + "' has the wrong type");
  }
  return T{};
}

template <class T>
void read_optional(const nlohmann::json& j, const char* key, T& target) {
  if (j.contains(key)) target = read_field<T>(j, key);
}

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) fail(std::string(where) + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || item.key() == k;
    if (!known) fail(std::string("unknown config key '") + item.key() + "' in " + where);
  }
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

nlohmann::json header(const ExperimentConfig& c, const char* command) {
  return nlohmann::json{{"format_version", kFormatVersion},
                        {"command", command},
                        {"config_hash", config_hash(c)},
                        {"seed", c.seed},
                        {"config", to_json(c)}};
}

bool uses_blowup(Family f) { return f != Family::cell; }

BlowupInstance blowup_for(const ExperimentConfig& c) {
  switch (c.family) {
    case Family::rotating: return build_blowup(c.d, c.R, DensityKind::log_blowup);
    case Family::polyblowup: return build_blowup(c.d, c.R, DensityKind::poly_blowup, c.delta);
    case Family::control: return build_blowup(c.d, c.R, DensityKind::uniform_ball);
    case Family::cell: break;
  }
  throw Error(ErrorKind::config, "cell family has no blow-up instance");
}

// Loads or builds the cell instance and rejects it on any violated constraint.
CellInstance cell_instance_for(const ExperimentConfig& c) {
  CellInstance inst;
  if (c.instance_file) {
    std::ifstream in(*c.instance_file);
    if (!in) fail("cannot open instance file '" + *c.instance_file + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      fail("instance file is not valid JSON: " + std::string(e.what()));
    }
    inst = cell_instance_from_json(j);
  } else {
    inst = choose_sequences(c.N, c.p);
  }
  const auto bad = violations(inst);
  if (!bad.empty()) {
    std::ostringstream os;
    os << "instance violates constraint " << bad.front().name;
    if (bad.front().index > 0) os << " at cell " << bad.front().index;
    os << " (margin " << bad.front().margin << ")";
    if (bad.size() > 1) os << " and " << bad.size() - 1 << " more";
    fail(os.str());
  }
  for (int i : c.indices) {
    if (i > inst.N) fail("cell index " + std::to_string(i) + " exceeds the instance size");
  }
  for (int i : c.sdot_cells) {
    if (i > inst.N) fail("sdot cell " + std::to_string(i) + " exceeds the instance size");
  }
  return inst;
}

void check_theta_contract(const std::vector<double>& grid) {
  for (double t : grid) {
    if (!(t > 0.0 && t <= kMaxTheta)) {
      std::ostringstream os;
      os << "theta = " << t << " is outside the validated range: the theta <= 0.1 contract requires 0 < theta <= 0.1";
      fail(os.str());
    }
  }
}

struct CheckLog {
  nlohmann::json entries = nlohmann::json::array();
  bool pass = true;

  void add(nlohmann::json e, bool ok) {
    e["pass"] = ok;
    entries.push_back(std::move(e));
    pass = pass && ok;
  }
};

// Certificate and pushforward checks of one oracle map.
void certify(const ExperimentConfig& c, const TransportMap& map, const SourceDensity& rho,
             const std::string& label, std::uint64_t k, CheckLog& log) {
  const CertificateReport cert =
      closest_point_certificate(map, rho, c.samples, stream_state(c, certificate, k), false);
  log.add({{"map", label}, {"check", "closest_point"}, {"report", to_json(cert)}}, cert.violations == 0);
  try {
    const PushforwardReport push = pushforward_check(map, rho, c.samples, stream_state(c, pushforward, k));
    log.add({{"map", label}, {"check", "pushforward"}, {"report", to_json(push)}}, true);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::pushforward_failure) throw;
    log.add({{"map", label}, {"check", "pushforward"}, {"error", e.what()}}, false);
  }
}

struct SdotRun {
  std::string label;
  SdotSolution solution;
  AgreementReport agreement;
  bool pass = false;
};

SdotRun run_sdot(const ExperimentConfig& c, const SourceDensity& rho, const TransportMap& oracle,
                 const std::string& label, std::uint64_t k) {
  SdotRun run;
  run.label = label;
  run.solution = solve_sdot(rho, oracle.target, c.train_samples, stream_state(c, training, k));
  run.agreement = compare_to_oracle(run.solution.map, oracle, rho, c.validation_samples,
                                    stream_state(c, validation, k));
  run.pass = run.agreement.rate >= kAgreementFloor && run.agreement.interior_disagreements == 0;
  return run;
}

nlohmann::json sdot_json(const SdotRun& r, bool with_weights) {
  nlohmann::json j{{"target", r.label},
                   {"training_points", r.solution.training_points},
                   {"transport_cost", r.solution.transport_cost},
                   {"centered", r.solution.centered},
                   {"agreement", to_json(r.agreement)},
                   {"pass", r.pass}};
  if (with_weights) j["weights"] = to_json(r.solution.weights);
  return j;
}

std::vector<SdotRun> sdot_runs(const ExperimentConfig& c) {
  std::vector<SdotRun> runs;
  if (uses_blowup(c.family)) {
    const BlowupInstance inst = blowup_for(c);
    for (std::size_t k = 0; k < c.sdot_thetas.size(); ++k) {
      const double t = c.sdot_thetas[k];
      std::ostringstream label;
      label << "rotating theta=" << t;
      runs.push_back(run_sdot(c, inst.density, rotating_map(inst, t), label.str(), k));
    }
    return runs;
  }
  const CellInstance inst = cell_instance_for(c);
  const SourceDensity rho = inst.density();
  for (std::size_t k = 0; k < c.sdot_cells.size(); ++k) {
    const int i = c.sdot_cells[k];
    const TransportMap oracle = i == 0 ? cell_map(inst) : perturbed_map(inst, i);
    const std::string label = i == 0 ? "cell" : "perturbed i=" + std::to_string(i);
    runs.push_back(run_sdot(c, rho, oracle, label, k));
  }
  return runs;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

ExperimentConfig default_config(Family f) {
  ExperimentConfig c;
  c.family = f;
  switch (f) {
    case Family::rotating:
    case Family::polyblowup:
      c.theta_grid = decades(-2.0, -8.0, 1);
      c.alphas = {0.5, 0.25};
      c.sdot_thetas = {0.1, 0.3};
      c.witness_C = 1.0;
      c.witness_alpha = 0.5;
      c.witness_p = 1.0;
      break;
    case Family::control:
      c.theta_grid = decades(-1.0, -4.0, 2);
      c.alphas = {0.5, 0.75};
      c.sdot_thetas = {0.1, 0.3};
      c.witness_C = 1.0;
      c.witness_alpha = 0.75;
      c.witness_p = 1.0;
      break;
    case Family::cell:
      for (int i = 1; i <= c.N; ++i) c.indices.push_back(i);
      c.alphas = {0.5, 0.4};
      c.sdot_cells = {0, 1, 3};
      break;
  }
  return c;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  check_keys(j,
             {"family", "d", "R", "delta", "N", "theta_grid", "indices", "p", "alphas", "samples",
              "small_theta_samples", "small_theta", "cell_monte_carlo", "seed", "out",
              "instance_file", "sdot", "witness"},
             "config");
  Family family = Family::rotating;
  if (j.contains("family")) family = family_from_string(read_field<std::string>(j, "family"));
  ExperimentConfig c = default_config(family);
  read_optional(j, "d", c.d);
  read_optional(j, "R", c.R);
  read_optional(j, "delta", c.delta);
  if (j.contains("N")) {
    c.N = read_field<int>(j, "N");
    if (family == Family::cell && !j.contains("indices")) {
      c.indices.clear();
      for (int i = 1; i <= c.N; ++i) c.indices.push_back(i);
    }
  }
  read_optional(j, "theta_grid", c.theta_grid);
  read_optional(j, "indices", c.indices);
  read_optional(j, "p", c.p);
  read_optional(j, "alphas", c.alphas);
  read_optional(j, "samples", c.samples);
  read_optional(j, "small_theta_samples", c.small_theta_samples);
  read_optional(j, "small_theta", c.small_theta);
  read_optional(j, "cell_monte_carlo", c.cell_monte_carlo);
  read_optional(j, "seed", c.seed);
  read_optional(j, "out", c.out);
  if (j.contains("instance_file")) c.instance_file = read_field<std::string>(j, "instance_file");
  if (j.contains("sdot")) {
    const auto& s = j.at("sdot");
    check_keys(s, {"train_samples", "validation_samples", "thetas", "cells"}, "sdot");
    read_optional(s, "train_samples", c.train_samples);
    read_optional(s, "validation_samples", c.validation_samples);
    read_optional(s, "thetas", c.sdot_thetas);
    read_optional(s, "cells", c.sdot_cells);
  }
  if (j.contains("witness")) {
    const auto& w = j.at("witness");
    check_keys(w, {"C", "alpha", "p", "max_index", "samples"}, "witness");
    read_optional(w, "C", c.witness_C);
    read_optional(w, "alpha", c.witness_alpha);
    read_optional(w, "p", c.witness_p);
    read_optional(w, "max_index", c.max_index);
    read_optional(w, "samples", c.witness_samples);
  }
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j{{"family", std::string(to_string(c.family))},
                   {"d", c.d},
                   {"R", c.R},
                   {"delta", c.delta},
                   {"N", c.N},
                   {"theta_grid", c.theta_grid},
                   {"indices", c.indices},
                   {"p", c.p},
                   {"alphas", c.alphas},
                   {"samples", c.samples},
                   {"small_theta_samples", c.small_theta_samples},
                   {"small_theta", c.small_theta},
                   {"cell_monte_carlo", c.cell_monte_carlo},
                   {"seed", c.seed},
                   {"sdot",
                    {{"train_samples", c.train_samples},
                     {"validation_samples", c.validation_samples},
                     {"thetas", c.sdot_thetas},
                     {"cells", c.sdot_cells}}},
                   {"witness",
                    {{"C", c.witness_C},
                     {"alpha", c.witness_alpha},
                     {"p", c.witness_p},
                     {"max_index", c.max_index},
                     {"samples", c.witness_samples}}}};
  if (c.instance_file) j["instance_file"] = *c.instance_file;
  return j;
}

std::string config_hash(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_json(c).dump())));
  return buf;
}

void validate_config(const ExperimentConfig& c) {
  if (c.d < 2 || c.d > kMaxDim) fail("d must lie in [2, 8]");
  if (c.family == Family::cell && c.d != 2) fail("the cell family is built in d = 2");
  if (!(c.R > 0.0) || !std::isfinite(c.R)) fail("R must be positive");
  if (c.family == Family::polyblowup && !(c.delta > 0.0 && c.delta < c.d)) fail("delta must lie in (0, d)");
  if (c.N < 2 || c.N > kMaxCells) fail("N must lie in [2, 1000]");
  if (!(c.p >= 1.0) || !std::isfinite(c.p)) fail("p must be >= 1");
  for (double a : c.alphas) {
    if (!(a > 0.0) || !std::isfinite(a)) fail("alpha values must be positive");
  }
  if (uses_blowup(c.family)) {
    if (c.theta_grid.empty()) fail("theta_grid is empty");
    check_theta_contract(c.theta_grid);
  } else {
    if (c.indices.empty()) fail("indices is empty");
    for (int i : c.indices) {
      if (i < 1 || i > c.N) fail("cell indices must lie in [1, N]");
    }
  }
  if (c.samples < 10'000) fail("samples must be at least 1e4");
  if (c.small_theta_samples < 10'000) fail("small_theta_samples must be at least 1e4");
  if (!(c.small_theta >= 0.0)) fail("small_theta must be nonnegative");
  if (c.train_samples < 10'000) fail("sdot train_samples must be at least 1e4");
  if (c.validation_samples < 1) fail("sdot validation_samples must be positive");
  for (double t : c.sdot_thetas) {
    if (!(t > 0.0 && t < 0.25 * std::numbers::pi)) fail("sdot thetas must lie in (0, pi/4)");
  }
  for (int i : c.sdot_cells) {
    if (i < 0 || i > c.N) fail("sdot cells must lie in [0, N]");
  }
  if (!(c.witness_C > 0.0) || !std::isfinite(c.witness_C)) fail("witness C must be positive");
  if (!(c.witness_alpha > 0.0) || !std::isfinite(c.witness_alpha)) fail("witness alpha must be positive");
  if (!(c.witness_p >= 1.0) || !std::isfinite(c.witness_p)) fail("witness p must be >= 1");
  if (c.max_index < 1) fail("witness max_index must be positive");
}

CommandResult cmd_verify_maps(const ExperimentConfig& c) {
  validate_config(c);
  CheckLog log;
  if (uses_blowup(c.family)) {
    const BlowupInstance inst = blowup_for(c);
    for (std::size_t k = 0; k < c.theta_grid.size(); ++k) {
      std::ostringstream label;
      label << "rotating theta=" << c.theta_grid[k];
      certify(c, rotating_map(inst, c.theta_grid[k]), inst.density, label.str(), k, log);
    }
  } else {
    const CellInstance inst = cell_instance_for(c);
    const SourceDensity rho = inst.density();
    certify(c, cell_map(inst), rho, "cell", 0, log);
    for (std::size_t k = 0; k < c.indices.size(); ++k) {
      const int i = c.indices[k];
      certify(c, perturbed_map(inst, i), rho, "perturbed i=" + std::to_string(i), k + 1, log);
    }
  }
  nlohmann::json sdot = nlohmann::json::array();
  for (const SdotRun& r : sdot_runs(c)) {
    sdot.push_back(sdot_json(r, false));
    log.pass = log.pass && r.pass;
  }
  nlohmann::json j = header(c, "verify-maps");
  j["certificates"] = log.entries;
  j["sdot"] = sdot;
  j["pass"] = log.pass;
  CommandResult out;
  out.exit_code = log.pass ? 0 : 2;
  out.files.push_back({"verify_maps.json", dump(j)});
  out.message = log.pass ? "all map certificates pass" : "certificate failure (see verify_maps.json)";
  return out;
}

CommandResult cmd_sweep(const ExperimentConfig& c) {
  validate_config(c);
  SweepConfig s;
  s.family = c.family;
  s.d = c.d;
  s.R = c.R;
  s.delta = c.delta;
  s.p = c.p;
  s.alphas = c.alphas;
  s.samples = c.samples;
  s.small_theta_samples = c.small_theta_samples;
  s.small_theta = c.small_theta;
  s.cell_monte_carlo = c.cell_monte_carlo;
  s.state = {c.seed, 0};
  if (c.family == Family::cell) {
    const CellInstance inst = cell_instance_for(c);
    s.N = inst.N;
    for (int i : c.indices) s.grid.push_back(i);
  } else {
    s.grid = c.theta_grid;
  }
  const auto records = sweep(s);

  nlohmann::json j = header(c, "sweep");
  j["fit"] = records.size() >= 5 ? to_json(fit_holder(records)) : nlohmann::json();
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& r : records) {
    if (!r.bound_ok) failures.push_back(r.parameter);
  }
  j["bound_checks"] = {{"all_ok", failures.empty()}, {"failed_parameters", failures}};
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : records) rows.push_back(to_json(r));
  j["records"] = rows;

  std::ostringstream csv;
  csv << "# otstab sweep csv v" << kFormatVersion << " config_hash=" << config_hash(c)
      << " seed=" << c.seed << " family=" << to_string(c.family) << "\n";
  write_sweep_csv(csv, records, c.alphas);

  CommandResult out;
  out.files.push_back({"sweep.csv", csv.str()});
  out.files.push_back({"sweep.json", dump(j)});
  out.message = std::to_string(records.size()) + " sweep records written";
  return out;
}

CommandResult cmd_solve_sdot(const ExperimentConfig& c) {
  validate_config(c);
  const auto runs = sdot_runs(c);
  nlohmann::json j = header(c, "solve-sdot");
  nlohmann::json arr = nlohmann::json::array();
  bool pass = true;
  std::ostringstream csv;
  csv << "# otstab disagreements csv v" << kFormatVersion << " config_hash=" << config_hash(c)
      << " seed=" << c.seed << "\n";
  for (const auto& r : runs) {
    arr.push_back(sdot_json(r, true));
    pass = pass && r.pass;
    csv << "# target " << r.label << "\n";
    write_disagreement_csv(csv, r.agreement);
  }
  j["solutions"] = arr;
  j["pass"] = pass;
  CommandResult out;
  out.exit_code = pass ? 0 : 2;
  out.files.push_back({"sdot.json", dump(j)});
  out.files.push_back({"sdot_disagreements.csv", csv.str()});
  out.message = pass ? "semi-discrete maps agree with the oracles" : "semi-discrete agreement below threshold";
  return out;
}

CommandResult cmd_witness(const ExperimentConfig& c) {
  validate_config(c);
  if (c.family == Family::cell) {
    const double threshold = c.witness_p / (2.0 * (c.witness_p + 1.0));
    if (c.witness_alpha <= threshold) {
      throw Error(ErrorKind::config, "witness alpha must exceed p / (2(p+1)) on the cell family (no witness guarantee below it)");
    }
  }
  WitnessOptions o;
  o.N = c.N;
  o.max_index = c.max_index;
  o.samples = c.witness_samples;
  o.state = {c.seed, witness};
  if (uses_blowup(c.family)) o.blowup = blowup_for(c);
  const Witness w = find_witness(c.witness_C, c.witness_alpha, c.witness_p, c.family, o);
  nlohmann::json j = header(c, "witness");
  j["witness"] = to_json(w);
  CommandResult out;
  out.exit_code = w.verified ? 0 : 2;
  out.files.push_back({"witness.json", dump(j)});
  std::ostringstream msg;
  msg << "witness at parameter " << w.parameter << (w.verified ? "" : " (not verified)");
  out.message = msg.str();
  return out;
}

CommandResult cmd_validate_instance(const ExperimentConfig& c) {
  validate_config(c);
  const CellInstance inst = cell_instance_for(c);
  nlohmann::json j = header(c, "validate-instance");
  j["instance"] = to_json(inst);
  j["constraints"] = to_json(validate(inst));
  CommandResult out;
  out.files.push_back({"instance.json", dump(j)});
  out.message = "instance with N = " + std::to_string(inst.N) + " satisfies all constraints";
  return out;
}

void write_outputs(const std::string& dir, const std::vector<OutputFile>& files) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::config, "cannot create output directory '" + dir + "'");
  for (const auto& f : files) {
    const fs::path target = fs::path(dir) / f.name;
    const fs::path tmp = fs::path(dir) / (f.name + ".tmp");
    {
      std::ofstream os(tmp, std::ios::binary);
      os << f.contents;
      if (!os) throw Error(ErrorKind::config, "cannot write '" + tmp.string() + "'");
    }
    fs::rename(tmp, target, ec);
    if (ec) throw Error(ErrorKind::config, "cannot move output into '" + target.string() + "'");
  }
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::invalid_dimension:
    case ErrorKind::domain:
    case ErrorKind::unsupported_kind:
    case ErrorKind::unsupported_method:
    case ErrorKind::index_out_of_range:
      return 1;
    default:
      return 2;
  }
}

}  // namespace otstab
