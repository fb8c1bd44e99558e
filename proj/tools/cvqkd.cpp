// cvqkd: command-line front end.
//
// Exit codes: 0 success, 1 I/O or replay mismatch, 2 usage, 3 insecure
// configuration, 4 numeric/domain error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cvqkd/attacks.hpp"
#include "cvqkd/config.hpp"
#include "cvqkd/errors.hpp"
#include "cvqkd/figures.hpp"
#include "cvqkd/infotheory.hpp"
#include "cvqkd/keyrate.hpp"
#include "cvqkd/protocol_sim.hpp"
#include "cvqkd/version.hpp"

#ifndef CVQKD_CONFIG_DIR
#define CVQKD_CONFIG_DIR "configs"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cvqkd;

namespace {

enum ExitCode { kOk = 0, kIoError = 1, kUsage = 2, kInsecure = 3, kDomain = 4 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Files a command produces, kept in memory so replay can compare them.
struct Artifacts {
  std::vector<std::pair<std::string, std::string>> files;
  std::string stdout_text;
};

std::string fmt(double x) { return figures::format_number(x); }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string absolute(const std::string& p) {
  return fs::absolute(fs::path(p)).lexically_normal().string();
}

std::string default_out_dir() {
  if (const char* env = std::getenv("CVQKD_OUT_DIR"); env && *env) return env;
  return ".";
}

// Accepts a path, or the bare name of a bundled config.
std::string resolve_config_path(const std::string& p) {
  if (fs::exists(p)) return p;
  for (const auto& candidate :
       {fs::path(CVQKD_CONFIG_DIR) / p,
        fs::path(CVQKD_CONFIG_DIR) / (p + ".json")}) {
    if (fs::exists(candidate)) return candidate.string();
  }
  throw IoError("config file '" + p + "' not found");
}

json manifest(const std::string& command, const json& options,
              const std::vector<std::string>& artifacts) {
  json m;
  m["tool"] = "cvqkd";
  m["version"] = kVersion;
  m["command"] = command;
  m["options"] = options;
  m["artifacts"] = artifacts;
  return m;
}

void add_with_manifest(Artifacts& out, const std::string& command,
                       const json& options,
                       std::vector<std::pair<std::string, std::string>> files,
                       const std::string& manifest_path) {
  std::vector<std::string> names;
  for (auto& f : files) {
    names.push_back(f.first);
    out.files.push_back(std::move(f));
  }
  out.files.emplace_back(manifest_path,
                         dump(manifest(command, options, names)));
}

void write_files(const Artifacts& a) {
  for (const auto& [path, content] : a.files) {
    const auto parent = fs::path(path).parent_path();
    std::error_code ec;
    if (!parent.empty()) fs::create_directories(parent, ec);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write '" + path + "'");
    f << content;
    f.close();
    if (!f) throw IoError("failed writing '" + path + "'");
  }
}

// ---------------------------------------------------------------------------
// ber

struct BerOptions {
  std::optional<double> snr_db;
  std::optional<double> snr;
  std::optional<double> base_ber;
  double loss = 0.0;
  bool simultaneous = false;
  bool as_json = false;
};

Artifacts run_ber(const BerOptions& o) {
  double snr_in = 0.0;
  if (o.base_ber) {
    snr_in = keyrate::calibrated_snr(*o.base_ber);
  } else if (o.snr_db) {
    snr_in = std::pow(10.0, *o.snr_db / 10.0);
  } else {
    snr_in = *o.snr;
  }
  detail::require(snr_in > 0.0 && std::isfinite(snr_in),
                  "ber: snr must be positive and finite");
  const double t_line =
      keyrate::line_transfer(keyrate::Scheme::coherent(), o.loss,
                             keyrate::SqueezedLossModel::exact_tap);
  // Measuring both quadratures at once halves each one's SNR.
  const double snr_eff = snr_in * t_line * (o.simultaneous ? 0.5 : 1.0);
  const double ber = info::ber_from_snr(snr_eff).value();

  Artifacts a;
  if (o.as_json) {
    json j{{"snr_in", snr_in},
           {"snr_in_db", 10.0 * std::log10(snr_in)},
           {"loss", o.loss},
           {"simultaneous", o.simultaneous},
           {"snr_effective", snr_eff},
           {"ber", ber}};
    a.stdout_text = dump(j);
  } else {
    std::ostringstream os;
    os << "snr_in         " << fmt(snr_in) << "  ("
       << fmt(10.0 * std::log10(snr_in)) << " dB)\n"
       << "loss           " << fmt(o.loss) << "\n"
       << "simultaneous   " << (o.simultaneous ? "yes" : "no") << "\n"
       << "snr_effective  " << fmt(snr_eff) << "\n"
       << "ber            " << fmt(ber) << "\n";
    a.stdout_text = os.str();
  }
  return a;
}

// ---------------------------------------------------------------------------
// curves

struct CurvesOptions {
  std::string figure;
  std::size_t grid = 0;  // 0: per-figure default
  std::vector<double> vn{1.0, 0.5, 0.25, 0.1};
  std::vector<double> base_ber;
  std::vector<double> eve_ber{0.05, 0.07, 0.1, 0.2};
  std::string out_dir;
};

json to_json(const CurvesOptions& o) {
  json j{{"figure", o.figure}, {"grid", o.grid}, {"out_dir", o.out_dir}};
  if (o.figure == "fig4") {
    j["eve_ber"] = o.eve_ber;
  } else {
    j["base_ber"] = o.base_ber;
  }
  if (o.figure == "fig6") j["vn"] = o.vn;
  return j;
}

CurvesOptions curves_from_json(const json& j) {
  CurvesOptions o;
  o.figure = j.at("figure").get<std::string>();
  o.grid = j.at("grid").get<std::size_t>();
  o.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("eve_ber")) o.eve_ber = j["eve_ber"].get<std::vector<double>>();
  if (j.contains("base_ber")) {
    o.base_ber = j["base_ber"].get<std::vector<double>>();
  }
  if (j.contains("vn")) o.vn = j["vn"].get<std::vector<double>>();
  return o;
}

// Fills in defaults so the manifest records what was actually run.
CurvesOptions resolve(CurvesOptions o) {
  if (o.out_dir.empty()) o.out_dir = default_out_dir();
  o.out_dir = absolute(o.out_dir);
  if (o.figure == "fig4") {
    if (o.grid == 0) o.grid = 60;
  } else {
    if (o.grid == 0) o.grid = 200;
    if (o.base_ber.empty()) {
      o.base_ber = o.figure == "fig3" ? std::vector<double>{0.01, 0.05}
                                      : std::vector<double>{0.01};
    }
  }
  return o;
}

Artifacts run_curves(const CurvesOptions& o) {
  figures::Table t;
  if (o.figure == "fig3") {
    t = figures::bob_vs_eve_coherent(o.base_ber, o.grid);
  } else if (o.figure == "fig4") {
    t = figures::eve_mi_decay(o.eve_ber, o.grid);
  } else if (o.figure == "fig6") {
    t = figures::bob_vs_eve_squeezed(o.vn, o.base_ber, o.grid);
  } else {
    throw DomainError("curves: unknown figure '" + o.figure + "'");
  }
  t.comments.insert(t.comments.begin(),
                    std::string("cvqkd ") + kVersion + " curves " + o.figure +
                        " grid=" + std::to_string(o.grid));

  const auto csv = (fs::path(o.out_dir) / (o.figure + ".csv")).string();
  const auto man = (fs::path(o.out_dir) / (o.figure + ".manifest.json")).string();
  Artifacts a;
  add_with_manifest(a, "curves", to_json(o), {{csv, figures::to_csv(t)}}, man);
  a.stdout_text = "wrote " + csv + " (" + std::to_string(t.rows.size()) +
                  " rows)\nwrote " + man + "\n";
  return a;
}

// ---------------------------------------------------------------------------
// keyrate

struct KeyrateOptions {
  json config;  // resolved
  std::string out;
};

json report_json(const keyrate::KeyRateReport& r) {
  return json{{"sift_factor", r.sift_factor},
              {"disclosure_factor", r.disclosure_factor},
              {"recon_factor", r.recon_factor},
              {"eve_ber_bound", r.eve_ber_bound.value()},
              {"eve_ber_post_recon", r.eve_ber_post_recon.value()},
              {"pa_block_n", r.pa_block_n},
              {"efficiency", r.efficiency},
              {"eve_mi_final", r.eve_mi_final.bits()}};
}

Artifacts run_keyrate(const KeyrateOptions& o) {
  const auto cfg = config::from_json(o.config);
  const auto report = keyrate::key_efficiency(cfg);
  Artifacts a;
  const std::string body = dump(report_json(report));
  if (o.out.empty()) {
    a.stdout_text = body;
  } else {
    add_with_manifest(a, "keyrate", {{"config", o.config}, {"out", o.out}},
                      {{o.out, body}}, o.out + ".manifest.json");
    a.stdout_text = body;
  }
  return a;
}

// ---------------------------------------------------------------------------
// simulate

struct AttackOptions {
  std::string name = "none";
  std::optional<double> te, fraction, gain, lambda;
};

json to_json(const AttackOptions& a) {
  json j{{"name", a.name}};
  if (a.te) j["te"] = *a.te;
  if (a.fraction) j["fraction"] = *a.fraction;
  if (a.gain) j["gain"] = *a.gain;
  if (a.lambda) j["lambda"] = *a.lambda;
  return j;
}

AttackOptions attack_from_json(const json& j) {
  AttackOptions a;
  a.name = j.at("name").get<std::string>();
  if (j.contains("te")) a.te = j["te"].get<double>();
  if (j.contains("fraction")) a.fraction = j["fraction"].get<double>();
  if (j.contains("gain")) a.gain = j["gain"].get<double>();
  if (j.contains("lambda")) a.lambda = j["lambda"].get<double>();
  return a;
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Checks flag combinations and fills the teleporter's default gain.
AttackOptions resolve(AttackOptions a) {
  auto need = [&](const std::optional<double>& v, const char* flag) {
    if (!v) throw UsageError("--attack " + a.name + " requires " + flag);
  };
  auto forbid = [&](const std::optional<double>& v, const char* flag) {
    if (v) throw UsageError(std::string(flag) + " does not apply to --attack " +
                            a.name);
  };
  if (a.name == "mid_quadrature") a.name = "mid";
  if (a.name == "optimal_symmetric") a.name = "optimal";
  if (a.name == "none" || a.name == "guess" || a.name == "mid") {
    forbid(a.te, "--te");
    forbid(a.fraction, "--fraction");
    forbid(a.gain, "--gain");
    forbid(a.lambda, "--lambda");
  } else if (a.name == "beamsplit") {
    need(a.fraction, "--fraction");
    forbid(a.te, "--te");
    forbid(a.gain, "--gain");
    forbid(a.lambda, "--lambda");
  } else if (a.name == "optimal") {
    need(a.te, "--te");
    forbid(a.fraction, "--fraction");
    forbid(a.gain, "--gain");
    forbid(a.lambda, "--lambda");
  } else if (a.name == "teleport") {
    need(a.gain, "--gain");
    forbid(a.te, "--te");
    forbid(a.fraction, "--fraction");
    if (!a.lambda) a.lambda = attacks::lambda_opt(*a.gain);
  } else {
    throw UsageError("unknown attack '" + a.name + "'");
  }
  return a;
}

std::optional<attacks::AttackModel> make_attack(const AttackOptions& a) {
  using attacks::AttackModel;
  if (a.name == "none") return std::nullopt;
  if (a.name == "guess") return AttackModel::guess();
  if (a.name == "mid") return AttackModel::mid_quadrature();
  if (a.name == "beamsplit") return AttackModel::beamsplit(*a.fraction);
  if (a.name == "optimal") return AttackModel::optimal_symmetric(*a.te);
  return AttackModel::teleport(*a.gain, *a.lambda);
}

struct SimulateOptions {
  json config;  // resolved
  AttackOptions attack;
  std::uint64_t slots = 1000000;
  std::uint64_t seed = 1;
  std::size_t recon_rounds = 0;
  std::size_t pa_n = 1;
  unsigned threads = 0;  // does not affect outputs, so not in the manifest
  std::string out;
  std::string slots_csv;
};

json to_json(const SimulateOptions& o) {
  return json{{"config", o.config},     {"attack", to_json(o.attack)},
              {"slots", o.slots},       {"seed", o.seed},
              {"recon_rounds", o.recon_rounds}, {"pa_n", o.pa_n},
              {"out", o.out},           {"slots_csv", o.slots_csv}};
}

SimulateOptions simulate_from_json(const json& j) {
  SimulateOptions o;
  o.config = j.at("config");
  o.attack = attack_from_json(j.at("attack"));
  o.slots = j.at("slots").get<std::uint64_t>();
  o.seed = j.at("seed").get<std::uint64_t>();
  o.recon_rounds = j.at("recon_rounds").get<std::size_t>();
  o.pa_n = j.at("pa_n").get<std::size_t>();
  o.out = j.at("out").get<std::string>();
  o.slots_csv = j.at("slots_csv").get<std::string>();
  return o;
}

json estimate_json(const sim::Estimate& e) {
  return json{{"value", e.value}, {"se", e.se}, {"n", e.trials}};
}

json stats_json(const sim::RunStats& s) {
  json j;
  j["n_slots"] = s.n_slots;
  j["sifted"] = s.sifted;
  j["sifted_fraction"] = estimate_json(s.sifted_fraction);
  j["amplitude_slots"] = s.amplitude_slots;
  j["phase_slots"] = s.phase_slots;
  j["empirical_ber_bob"] = estimate_json(s.empirical_ber_bob);
  j["empirical_ber_eve"] = estimate_json(s.empirical_ber_eve);
  j["predicted_ber_bob"] = s.predicted_ber_bob;
  j["predicted_ber_eve"] = s.predicted_ber_eve;
  j["disclosed"] = s.disclosed;
  j["disclosed_ber_bob"] = estimate_json(s.disclosed_ber_bob);
  j["key_length"] = s.key_length;
  j["post_recon_lengths"] = s.post_recon_lengths;
  j["post_recon_length"] = s.post_recon_length;
  j["recon_rounds_used"] = s.recon_rounds_used;
  j["recon_audit_clean"] = s.recon_audit_clean;
  j["post_recon_ber_bob"] = estimate_json(s.post_recon_ber_bob);
  j["post_recon_ber_eve"] = estimate_json(s.post_recon_ber_eve);
  j["pa_block_n"] = s.pa_block_n;
  j["post_pa_lengths"] = json::array({s.post_pa_length});
  j["post_pa_ber_bob"] = estimate_json(s.post_pa_ber_bob);
  j["post_pa_ber_eve"] = estimate_json(s.post_pa_ber_eve);
  j["predicted_pa_ber_eve"] = s.predicted_pa_ber_eve;
  j["eve_pa_independence_z"] = s.eve_pa_independence_z;
  j["empirical_eve_mi"] = s.empirical_eve_mi;
  j["penalty_product"] =
      s.penalty_product ? json(*s.penalty_product) : json(nullptr);
  return j;
}

std::string slots_csv(const std::vector<sim::SlotRecord>& records) {
  auto q = [](optics::Quadrature x) {
    return x == optics::Quadrature::amplitude ? "amplitude" : "phase";
  };
  auto num = [](double x) { return std::isnan(x) ? std::string() : fmt(x); };
  std::string out =
      "# per-slot record; empty eve_soft fields mean Eve held no analog "
      "value\n"
      "slot,alice_bit_amplitude,alice_bit_phase,alice_choice,bob_choice,"
      "bob_soft,bob_bit,eve_soft_amplitude,eve_soft_phase,eve_bit_amplitude,"
      "eve_bit_phase,sifted,disclosed\n";
  for (const auto& r : records) {
    out += std::to_string(r.slot) + ',' + std::to_string(r.alice_bits[0]) +
           ',' + std::to_string(r.alice_bits[1]) + ',' + q(r.alice_choice) +
           ',' + q(r.bob_choice) + ',' + num(r.bob_soft) + ',' +
           std::to_string(r.bob_bit) + ',' + num(r.eve_soft[0]) + ',' +
           num(r.eve_soft[1]) + ',' + std::to_string(r.eve_bits[0]) + ',' +
           std::to_string(r.eve_bits[1]) + ',' + (r.sifted ? "1" : "0") +
           ',' + (r.disclosed ? "1" : "0") + '\n';
  }
  return out;
}

std::string stats_table(const sim::RunStats& s, bool squeezed) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-22s %12s %12s %12s %8s\n", "quantity",
                "empirical", "se", "analytic", "z");
  os << line;
  auto row = [&](const char* name, const sim::Estimate& e, double analytic) {
    std::snprintf(line, sizeof line, "%-22s %12.6g %12.3g %12.6g %8.2f\n",
                  name, e.value, e.se, analytic, e.z(analytic));
    os << line;
  };
  row("sifted_fraction", s.sifted_fraction, squeezed ? 0.5 : 1.0);
  row("ber_bob", s.empirical_ber_bob, s.predicted_ber_bob);
  row("ber_eve", s.empirical_ber_eve, s.predicted_ber_eve);
  row("disclosed_ber_bob", s.disclosed_ber_bob, s.predicted_ber_bob);
  if (s.pa_block_n > 1) {
    row("post_pa_ber_eve", s.post_pa_ber_eve, s.predicted_pa_ber_eve);
  }
  os << "key bits: sifted " << s.sifted << ", after disclosure "
     << s.key_length << ", after reconciliation " << s.post_recon_length
     << " (" << s.recon_rounds_used << " rounds), after amplification "
     << s.post_pa_length << "\n";
  if (s.penalty_product) {
    os << "penalty product V_E*V_B " << fmt(*s.penalty_product) << "\n";
  }
  return os.str();
}

Artifacts run_simulate(const SimulateOptions& o) {
  const auto cfg = config::from_json(o.config);
  sim::RunOptions ro;
  ro.threads = o.threads;
  ro.recon_rounds = o.recon_rounds;
  ro.pa_block_n = o.pa_n;
  ro.keep_records = !o.slots_csv.empty();
  const auto result =
      sim::run_protocol(cfg, make_attack(o.attack), o.slots, o.seed, ro);

  json j;
  j["config"] = o.config;
  j["attack"] = to_json(o.attack);
  j["slots"] = o.slots;
  j["seed"] = o.seed;
  j["stats"] = stats_json(result.stats);

  Artifacts a;
  a.stdout_text = stats_table(result.stats, cfg.scheme.is_squeezed());
  std::vector<std::pair<std::string, std::string>> files;
  if (!o.out.empty()) files.emplace_back(o.out, dump(j));
  if (!o.slots_csv.empty()) {
    files.emplace_back(o.slots_csv, slots_csv(result.records));
  }
  if (!files.empty()) {
    const std::string anchor = o.out.empty() ? o.slots_csv : o.out;
    add_with_manifest(a, "simulate", to_json(o), std::move(files),
                      anchor + ".manifest.json");
  } else {
    a.stdout_text += dump(j);
  }
  return a;
}

// ---------------------------------------------------------------------------
// replay

Artifacts replay(const json& m) {
  const auto command = m.at("command").get<std::string>();
  const auto& options = m.at("options");
  if (command == "curves") return run_curves(curves_from_json(options));
  if (command == "keyrate") {
    return run_keyrate({options.at("config"),
                        options.at("out").get<std::string>()});
  }
  if (command == "simulate") {
    auto o = simulate_from_json(options);
    o.threads = 0;
    return run_simulate(o);
  }
  throw DomainError("replay: unknown command '" + command + "'");
}

int check_against_disk(const Artifacts& a) {
  int mismatches = 0;
  for (const auto& [path, content] : a.files) {
    std::ifstream f(path, std::ios::binary);
    bool same = false;
    if (f) {
      std::stringstream buf;
      buf << f.rdbuf();
      same = buf.str() == content;
    }
    std::cout << (same ? "identical " : "DIFFERS   ") << path << "\n";
    mismatches += !same;
  }
  return mismatches == 0 ? kOk : kIoError;
}

json load_config_json(const std::string& path) {
  return config::resolved_json(
      config::from_json(config::read_json_file(resolve_config_path(path))));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-variable QKD analysis and simulation"};
  app.set_version_flag("--version", std::string("cvqkd ") + kVersion);
  app.require_subcommand(1);

  // ber
  BerOptions ber;
  auto* ber_cmd = app.add_subcommand("ber", "Bit error rate of the line");
  auto* snr_group = ber_cmd->add_option_group("snr", "Signal level");
  snr_group->add_option("--snr-db", ber.snr_db, "Input SNR in dB");
  snr_group->add_option("--snr", ber.snr, "Input SNR, linear");
  snr_group->add_option("--base-ber", ber.base_ber,
                        "Calibrate the SNR so the lossless line has this BER");
  snr_group->require_option(1);
  ber_cmd->add_option("--loss", ber.loss, "Line loss in [0, 1)")
      ->check(CLI::Range(0.0, 1.0));
  ber_cmd->add_flag("--simultaneous", ber.simultaneous,
                    "Measure both quadratures at once");
  ber_cmd->add_flag("--json", ber.as_json, "Print JSON");

  // curves
  CurvesOptions curves;
  auto* curves_cmd =
      app.add_subcommand("curves", "Write curve data as CSV plus manifest");
  curves_cmd->add_option("figure", curves.figure, "fig3 | fig4 | fig6")
      ->required()
      ->check(CLI::IsMember({"fig3", "fig4", "fig6"}));
  curves_cmd->add_option("--grid", curves.grid,
                         "Points per trace (fig3/fig6) or max block length "
                         "(fig4)");
  curves_cmd->add_option("--vn", curves.vn, "Squeezed noise floors (fig6)")
      ->delimiter(',');
  curves_cmd->add_option("--base-ber", curves.base_ber,
                         "Calibration base BERs (fig3/fig6)")
      ->delimiter(',');
  curves_cmd->add_option("--eve-ber", curves.eve_ber,
                         "Eve error rates before amplification (fig4)")
      ->delimiter(',');
  curves_cmd->add_option("--out", curves.out_dir,
                         "Output directory (default $CVQKD_OUT_DIR or .)");

  // keyrate
  std::string keyrate_config, keyrate_out;
  auto* keyrate_cmd =
      app.add_subcommand("keyrate", "Analytic key efficiency as JSON");
  keyrate_cmd->add_option("--config", keyrate_config,
                          "Config file or bundled config name")
      ->required();
  keyrate_cmd->add_option("--out", keyrate_out, "Output JSON path");

  // simulate
  SimulateOptions simulate;
  std::string simulate_config;
  auto* simulate_cmd =
      app.add_subcommand("simulate", "Monte-Carlo run of the protocol");
  simulate_cmd->add_option("--config", simulate_config,
                           "Config file or bundled config name (default: "
                           "coherent, base BER 1%)");
  simulate_cmd
      ->add_option("--attack", simulate.attack.name,
                   "none | guess | mid | beamsplit | optimal | teleport")
      ->capture_default_str();
  simulate_cmd->add_option("--te", simulate.attack.te,
                           "Eve transfer (optimal)");
  simulate_cmd->add_option("--fraction", simulate.attack.fraction,
                           "Tapped fraction (beamsplit)");
  simulate_cmd->add_option("--gain", simulate.attack.gain,
                           "Teleporter gain G (teleport)");
  simulate_cmd->add_option("--lambda", simulate.attack.lambda,
                           "Output gain (teleport; default optimal)");
  simulate_cmd->add_option("--slots", simulate.slots)
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--seed", simulate.seed)->capture_default_str();
  simulate_cmd->add_option("--recon-rounds", simulate.recon_rounds,
                           "Maximum reconciliation rounds (0: skip)")
      ->capture_default_str();
  simulate_cmd->add_option("--pa-n", simulate.pa_n,
                           "Privacy-amplification block length")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--threads", simulate.threads,
                           "Worker threads (0: all cores)");
  simulate_cmd->add_option("--out", simulate.out, "RunStats JSON path");
  simulate_cmd->add_option("--slots-csv", simulate.slots_csv,
                           "Per-slot CSV path");

  // replay
  std::string manifest_path;
  bool replay_check = false;
  auto* replay_cmd =
      app.add_subcommand("replay", "Re-run a manifest, rewriting its outputs");
  replay_cmd->add_option("manifest", manifest_path)->required();
  replay_cmd->add_flag("--check", replay_check,
                       "Compare with the files on disk instead of writing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    Artifacts a;
    if (*ber_cmd) {
      a = run_ber(ber);
    } else if (*curves_cmd) {
      a = run_curves(resolve(curves));
    } else if (*keyrate_cmd) {
      KeyrateOptions o{load_config_json(keyrate_config),
                       keyrate_out.empty() ? "" : absolute(keyrate_out)};
      a = run_keyrate(o);
    } else if (*simulate_cmd) {
      simulate.attack = resolve(simulate.attack);
      simulate.config =
          simulate_config.empty()
              ? config::resolved_json(config::from_json({{"base_ber", 0.01}}))
              : load_config_json(simulate_config);
      if (!simulate.out.empty()) simulate.out = absolute(simulate.out);
      if (!simulate.slots_csv.empty()) {
        simulate.slots_csv = absolute(simulate.slots_csv);
      }
      a = run_simulate(simulate);
    } else if (*replay_cmd) {
      const auto m = config::read_json_file(manifest_path);
      a = replay(m);
      if (replay_check) return check_against_disk(a);
    }
    write_files(a);
    std::cout << a.stdout_text;
    return kOk;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const InsecureError& e) {
    std::cout << json{{"status", "insecure"}, {"reason", e.what()}}.dump()
              << "\n";
    std::cerr << e.what() << "\n";
    return kInsecure;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::domain_error& e) {
    std::cout << json{{"status", "domain_error"}, {"reason", e.what()}}.dump()
              << "\n";
    std::cerr << e.what() << "\n";
    return kDomain;
  } catch (const json::exception& e) {
    std::cerr << "bad JSON input: " << e.what() << "\n";
    return kDomain;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  }
}
