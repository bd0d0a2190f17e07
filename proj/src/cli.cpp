#include "ionlink/cli.hpp"

#include "ionlink/errors.hpp"
#include "ionlink/io.hpp"

#include "CLI11.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#ifndef IONLINK_VERSION
#define IONLINK_VERSION "dev"
#endif

namespace ionlink::cli {

namespace {

using io::json;
namespace fs = std::filesystem;

constexpr double kDeg = std::numbers::pi / 180.0;

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  unsigned threads = 1;
};

struct Output {
  std::string file;
  std::string content;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in '" + path + "': " + e.what());
  }
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned i = 0; i < len; ++i) {
    hex += kHex[md[i] >> 4];
    hex += kHex[md[i] & 0xf];
  }
  return hex;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Without --out the outputs go to `out`; with it they are written to files
// next to a manifest.json.
void emit(const CommonOptions& common, const std::string& subcommand, const json& config,
          std::optional<std::uint64_t> seed, const std::vector<Output>& outputs,
          std::ostream& out) {
  if (common.out_dir.empty()) {
    for (const auto& o : outputs) out << o.content;
    return;
  }
  fs::create_directories(common.out_dir);
  json digests = json::array();
  for (const auto& o : outputs) {
    std::ofstream file(fs::path(common.out_dir) / o.file, std::ios::binary);
    file << o.content;
    if (!file) throw ValidationError("cannot write '" + o.file + "' in " + common.out_dir);
    digests.push_back({{"file", o.file}, {"sha256", sha256_hex(o.content)}});
  }
  json manifest{{"subcommand", subcommand},
                {"config", config},
                {"tool_version", IONLINK_VERSION},
                {"rng_seed", seed ? json(*seed) : json(nullptr)},
                {"timestamp", utc_timestamp()},
                {"outputs", digests}};
  std::ofstream file(fs::path(common.out_dir) / "manifest.json", std::ios::binary);
  file << manifest.dump(2) << '\n';
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

MeasurementSetting parse_setting(const std::string& text) {
  std::istringstream in(text);
  double theta = 0.0, phi = 0.0;
  char comma = 0;
  if (!(in >> theta)) throw ValidationError("bad setting '" + text + "', expected theta[,phi] in degrees");
  if (in >> comma) {
    if (comma != ',' || !(in >> phi)) throw ValidationError("bad setting '" + text + "'");
  }
  return {theta * kDeg, phi * kDeg};
}

unsigned default_threads() {
  if (const char* env = std::getenv("IONLINK_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return 1;
}

AttemptConfig herald_preset(const std::string& name) {
  AttemptConfig cfg;
  if (name.empty() || name == "ideal") return cfg;
  // Both named presets use the 10 km link: 5 km fiber per arm, eta = 0.7.
  cfg.channel_a.length_km = cfg.channel_b.length_km = 5.0;
  for (auto& d : cfg.detectors) d.efficiency = 0.7;
  return cfg;
}

budget::BudgetConfig rate_preset(const std::string& name) {
  budget::BudgetConfig cfg;
  cfg.p_cav = name == "paper-1mm" ? 0.06 : 0.01;
  return cfg;
}

spacetime::Scenario timing_preset() {
  spacetime::Scenario s;
  s.excitation_to_choice = 10e-6;
  s.rotation_duration = 10e-6;
  s.readout_duration = 23e-6;
  return s;
}

double& scenario_field(spacetime::Scenario& s, const std::string& name) {
  if (name == "x_a") return s.x_a;
  if (name == "x_b") return s.x_b;
  if (name == "x_i") return s.x_i;
  if (name == "fiber_speed") return s.fiber_speed;
  if (name == "excitation_to_choice") return s.excitation_to_choice;
  if (name == "rotation_duration") return s.rotation_duration;
  if (name == "readout_duration") return s.readout_duration;
  if (name == "emission_delay") return s.emission_delay;
  throw ValidationError("unknown scenario parameter '" + name + "'");
}

std::vector<double> linspace(double from, double to, int points) {
  if (points < 1) throw ValidationError("need at least one sweep point");
  std::vector<double> out;
  for (int i = 0; i < points; ++i) {
    out.push_back(points == 1 ? from : from + (to - from) * i / (points - 1));
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulator for two-photon heralded entanglement of remote ions", "ionlink"};
  app.require_subcommand(1);
  app.set_version_flag("--version", IONLINK_VERSION);

  CommonOptions common;
  common.threads = default_threads();
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON config file; flags override it")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", common.out_dir, "Write outputs and manifest.json to this directory");
    sub->add_option("--threads", common.threads, "Worker threads (env IONLINK_THREADS)")
        ->check(CLI::PositiveNumber);
  };

  // herald
  auto* herald = app.add_subcommand("herald", "Exact herald statistics of one attempt");
  add_common(herald);
  std::string herald_preset_name;
  std::string circuit_path;
  bool ideal = false;
  std::optional<double> eta, dark, length_a, length_b, overlap_a, overlap_b, asymmetry, phase_a,
      phase_b;
  std::optional<int> offset_a, offset_b;
  bool number_resolving = false, compensate = false;
  herald->add_flag("--ideal", ideal, "Lossless channels and ideal detectors");
  herald->add_option("--preset", herald_preset_name, "Parameter preset")
      ->check(CLI::IsMember({"ideal", "paper-10km", "paper-3mm", "paper-1mm"}));
  herald->add_option("--circuit", circuit_path, "Analyzer circuit JSON")->check(CLI::ExistingFile);
  herald->add_option("--eta", eta, "Detector efficiency");
  herald->add_option("--dark", dark, "Dark-count probability per window");
  herald->add_flag("--number-resolving", number_resolving, "Photon-number-resolving detectors");
  herald->add_option("--length-a", length_a, "Fiber length A->I in km");
  herald->add_option("--length-b", length_b, "Fiber length B->I in km");
  herald->add_option("--phase-a", phase_a, "Channel phase of arm A in rad");
  herald->add_option("--phase-b", phase_b, "Channel phase of arm B in rad");
  herald->add_option("--offset-a", offset_a, "Temporal bin of photon A");
  herald->add_option("--offset-b", offset_b, "Temporal bin of photon B");
  herald->add_option("--overlap-a", overlap_a, "Shared-bin amplitude of photon A");
  herald->add_option("--overlap-b", overlap_b, "Shared-bin amplitude of photon B");
  herald->add_option("--asymmetry", asymmetry, "s1:s2 emission amplitude ratio");
  herald->add_flag("--compensate", compensate, "Attenuate the stronger polarization");

  // chsh
  auto* chsh = app.add_subcommand("chsh", "CHSH value, analytic and Monte Carlo");
  add_common(chsh);
  std::string state_source = "ideal";
  std::string herald_class = "PsiMinus";
  std::string set_a = "0", set_ap = "90", set_b = "45", set_bp = "135";
  std::uint64_t trials = 1'000'000, seed = 0;
  double depolarizing = 0.0;
  chsh->add_option("--state", state_source, "'ideal' (psi-) or a herald report JSON file");
  chsh->add_option("--herald-class", herald_class, "Herald class to read from a report")
      ->check(CLI::IsMember({"PsiMinus", "PsiPlus"}));
  chsh->add_option("--a", set_a, "Setting a as theta[,phi] in degrees");
  chsh->add_option("--a-prime", set_ap, "Setting a'");
  chsh->add_option("--b", set_b, "Setting b");
  chsh->add_option("--b-prime", set_bp, "Setting b'");
  chsh->add_option("--trials", trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  chsh->add_option("--seed", seed, "RNG seed");
  chsh->add_option("--depolarizing", depolarizing, "Per-ion depolarizing probability");

  // cavity-scan
  auto* scan = app.add_subcommand("cavity-scan", "Optimal cavity operating point versus length");
  add_common(scan);
  double l_min = 0.5e-3, l_max = 2e-2;
  int scan_points = 41;
  scan->add_option("--l-min", l_min, "Shortest cavity length in m");
  scan->add_option("--l-max", l_max, "Longest cavity length in m");
  scan->add_option("--points", scan_points, "Log-spaced lengths")->check(CLI::PositiveNumber);

  // rate
  auto* rate = app.add_subcommand("rate", "Entangled-pair rate budget");
  add_common(rate);
  std::string rate_preset_name;
  std::optional<double> p_cav, cavity_length, distance, rate_eta, rep_rate;
  double n_pairs = 1000.0;
  std::string rate_sweep;
  rate->add_option("--preset", rate_preset_name, "Parameter preset")
      ->check(CLI::IsMember({"paper-3mm", "paper-1mm"}));
  rate->add_option("--p-cav", p_cav, "Cavity emission probability");
  rate->add_option("--cavity-length", cavity_length, "Derive p_cav for a confocal cavity (m)");
  rate->add_option("--distance-km", distance, "A-B distance in km");
  rate->add_option("--eta", rate_eta, "Detector efficiency");
  rate->add_option("--rep-rate", rep_rate, "Attempts per second");
  rate->add_option("--pairs", n_pairs, "Target pair count for the duration estimate");
  rate->add_option("--sweep", rate_sweep, "Emit CSV of rate versus the given variable")
      ->check(CLI::IsMember({"L"}));
  rate->add_option("--l-min", l_min, "Sweep start in m");
  rate->add_option("--l-max", l_max, "Sweep end in m");
  rate->add_option("--points", scan_points, "Sweep points")->check(CLI::PositiveNumber);

  // timing
  auto* timing = app.add_subcommand("timing", "Lightcone constraints of a Bell-test run");
  add_common(timing);
  std::string timing_preset_name;
  std::optional<double> t_distance, t_speed, t_delay, t_rotation, t_readout;
  std::string sweep_param;
  double sweep_from = 0.0, sweep_to = 0.0;
  int sweep_points = 11;
  timing->add_option("--preset", timing_preset_name, "Parameter preset")
      ->check(CLI::IsMember({"paper-10km"}));
  timing->add_option("--distance", t_distance, "Symmetric A-B distance in m");
  timing->add_option("--fiber-speed", t_speed, "Photon speed in fiber, m/s");
  timing->add_option("--choice-delay", t_delay, "Excitation to basis choice, s");
  timing->add_option("--rotation", t_rotation, "Basis rotation duration, s");
  timing->add_option("--readout", t_readout, "Readout duration, s");
  timing->add_option("--sweep", sweep_param, "Scenario parameter to sweep (CSV output)");
  timing->add_option("--from", sweep_from, "Sweep start");
  timing->add_option("--to", sweep_to, "Sweep end");
  timing->add_option("--points", sweep_points, "Sweep points")->check(CLI::PositiveNumber);

  // hom
  auto* hom = app.add_subcommand("hom", "Two-photon coincidence versus wavepacket overlap");
  add_common(hom);
  int hom_points = 11;
  hom->add_option("--points", hom_points, "Overlap grid points in [0, 1]")
      ->check(CLI::PositiveNumber);

  // phase-sweep
  auto* sweep = app.add_subcommand("phase-sweep", "Heralded fidelity over channel phases");
  add_common(sweep);
  int phase_points = 11;
  sweep->add_option("--points", phase_points, "Grid points per phase")->check(CLI::PositiveNumber);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  auto config_json = [&]() -> std::optional<json> {
    if (common.config_path.empty()) return std::nullopt;
    return read_json_file(common.config_path);
  };

  try {
    if (herald->parsed()) {
      AttemptConfig cfg = herald_preset(ideal ? "ideal" : herald_preset_name);
      if (auto j = config_json()) cfg = io::attempt_config_from_json(*j, cfg);
      if (!circuit_path.empty()) cfg.circuit = io::circuit_from_json(read_json_file(circuit_path));
      for (auto& d : cfg.detectors) {
        if (eta) d.efficiency = *eta;
        if (dark) d.dark_count_prob = *dark;
        if (number_resolving) d.number_resolving = true;
      }
      if (length_a) cfg.channel_a.length_km = *length_a;
      if (length_b) cfg.channel_b.length_km = *length_b;
      for (auto [phase, ch] : {std::pair{phase_a, &cfg.channel_a}, {phase_b, &cfg.channel_b}}) {
        if (!phase) continue;
        ch->wavenumber = 1.0;
        ch->path_length_m = *phase;
      }
      if (offset_a) cfg.channel_a.temporal_offset = *offset_a;
      if (offset_b) cfg.channel_b.temporal_offset = *offset_b;
      if (overlap_a) cfg.channel_a.overlap = *overlap_a;
      if (overlap_b) cfg.channel_b.overlap = *overlap_b;
      if (asymmetry) cfg.emission.amplitude_asymmetry = *asymmetry;
      if (compensate) cfg.emission.compensate = true;
      const json report = io::herald_report(cfg, run_attempt(cfg));
      emit(common, "herald", report["config"], std::nullopt, {{"herald.json", dump(report)}}, out);
      return 0;
    }

    if (chsh->parsed()) {
      CHSHConfig cfg;
      if (auto j = config_json()) {
        const json& c = *j;
        for (const auto& [key, value] : c.items()) {
          if (key == "a") set_a = value.get<std::string>();
          else if (key == "a_prime") set_ap = value.get<std::string>();
          else if (key == "b") set_b = value.get<std::string>();
          else if (key == "b_prime") set_bp = value.get<std::string>();
          else if (key == "trials" && chsh->count("--trials") == 0) trials = value.get<std::uint64_t>();
          else if (key == "seed" && chsh->count("--seed") == 0) seed = value.get<std::uint64_t>();
          else if (key == "state" && chsh->count("--state") == 0) state_source = value.get<std::string>();
          else if (key == "depolarizing" && chsh->count("--depolarizing") == 0) depolarizing = value.get<double>();
          else if (key != "trials" && key != "seed" && key != "state" && key != "depolarizing")
            throw ValidationError("unknown key '" + key + "' in chsh config");
        }
      }
      cfg.settings = {parse_setting(set_a), parse_setting(set_ap), parse_setting(set_b),
                      parse_setting(set_bp)};
      cfg.trials = trials;
      cfg.rng_seed = seed;
      cfg.threads = common.threads;
      cfg.depolarizing = depolarizing;

      DensityMatrix rho = DensityMatrix::from_ion_vector(ion_bell_state(BellState::PsiMinus));
      if (state_source != "ideal") {
        const json report = read_json_file(state_source);
        bool found = false;
        for (const auto& r : report.at("results")) {
          if (r.at("herald_class") != herald_class) continue;
          if (r.at("ion_state").is_null()) throw ValidationError("herald class has no ion state");
          rho = io::ion_state_from_json(r.at("ion_state"));
          found = true;
        }
        if (!found) throw ValidationError("report has no " + herald_class + " result");
      }
      const double analytic = chsh_value(rho, cfg);
      const auto mc = monte_carlo_chsh(rho, cfg);
      const json report = io::chsh_report(cfg, state_source, analytic, mc);
      emit(common, "chsh", report["config"], seed, {{"chsh.json", dump(report)}}, out);
      return 0;
    }

    if (scan->parsed()) {
      if (auto j = config_json()) {
        l_min = j->value("l_min", l_min);
        l_max = j->value("l_max", l_max);
        scan_points = j->value("points", scan_points);
      }
      const auto points = cavity::scan(l_min, l_max, scan_points);
      const json echo{{"l_min", l_min}, {"l_max", l_max}, {"points", scan_points}};
      emit(common, "cavity-scan", echo, std::nullopt,
           {{"cavity_scan.csv", io::cavity_scan_csv(points)}}, out);
      return 0;
    }

    if (rate->parsed()) {
      budget::BudgetConfig cfg = rate_preset(rate_preset_name);
      if (auto j = config_json()) cfg = io::budget_from_json(*j, cfg);
      if (p_cav) cfg.p_cav = *p_cav;
      if (cavity_length) cfg.p_cav = cavity::optimal_point(*cavity_length).p_cav;
      if (distance) cfg.distance_km = *distance;
      if (rate_eta) cfg.detector_eta = *rate_eta;
      if (rep_rate) cfg.repetition_rate = *rep_rate;
      budget::validate(cfg);
      if (!rate_sweep.empty()) {
        std::ostringstream csv;
        csv << "L,p_cav,pairs_per_second,pairs_per_minute\n";
        for (const auto& p : cavity::scan(l_min, l_max, scan_points)) {
          budget::BudgetConfig c = cfg;
          c.p_cav = p.p_cav;
          const double r = budget::pair_rate(c);
          csv << io::format_number(p.length) << ',' << io::format_number(p.p_cav) << ','
              << io::format_number(r) << ',' << io::format_number(r * 60.0) << '\n';
        }
        emit(common, "rate", io::to_json(cfg), std::nullopt, {{"rate_sweep.csv", csv.str()}}, out);
        return 0;
      }
      const json report = io::rate_report(cfg, n_pairs);
      emit(common, "rate", report["config"], std::nullopt, {{"rate.json", dump(report)}}, out);
      return 0;
    }

    if (timing->parsed()) {
      spacetime::Scenario s =
          timing_preset_name.empty() ? spacetime::Scenario{} : timing_preset();
      if (auto j = config_json()) s = io::scenario_from_json(*j, s);
      if (t_distance) {
        s.x_a = 0.0;
        s.x_b = *t_distance;
        s.x_i = *t_distance / 2.0;
      }
      if (t_speed) s.fiber_speed = *t_speed;
      if (t_delay) s.excitation_to_choice = *t_delay;
      if (t_rotation) s.rotation_duration = *t_rotation;
      if (t_readout) s.readout_duration = *t_readout;
      spacetime::validate(s);
      if (!sweep_param.empty()) {
        std::ostringstream csv;
        csv << sweep_param << ",margin_i,margin_ii,margin_iii,pass_i,pass_ii,pass_iii\n";
        for (double v : linspace(sweep_from, sweep_to, sweep_points)) {
          spacetime::Scenario point = s;
          scenario_field(point, sweep_param) = v;
          const auto r = spacetime::validate(spacetime::build_schedule(point));
          csv << io::format_number(v);
          for (const auto& c : r.checks) csv << ',' << io::format_number(c.margin);
          for (const auto& c : r.checks) csv << ',' << (c.pass ? 1 : 0);
          csv << '\n';
        }
        emit(common, "timing", io::to_json(s), std::nullopt, {{"timing_sweep.csv", csv.str()}}, out);
        return 0;
      }
      const json report = io::timing_report(s);
      emit(common, "timing", report["scenario"], std::nullopt, {{"timing.json", dump(report)}}, out);
      return 0;
    }

    if (hom->parsed()) {
      std::ostringstream csv;
      csv << "overlap,coincidence_probability\n";
      for (double mu : linspace(0.0, 1.0, hom_points)) {
        csv << io::format_number(mu) << ',' << io::format_number(hom_coincidence_probability(mu))
            << '\n';
      }
      emit(common, "hom", json{{"points", hom_points}}, std::nullopt, {{"hom.csv", csv.str()}}, out);
      return 0;
    }

    if (sweep->parsed()) {
      AttemptConfig cfg;
      if (auto j = config_json()) cfg = io::attempt_config_from_json(*j, cfg);
      const auto grid = phase_grid(phase_points);
      const auto rows = phase_insensitivity_report(grid, grid, cfg, common.threads);
      json echo = io::to_json(cfg);
      echo["points"] = phase_points;
      emit(common, "phase-sweep", echo, std::nullopt,
           {{"phase_sweep.csv", io::phase_report_csv(rows)}}, out);
      return 0;
    }
  } catch (const ValidationError& e) {
    err << json{{"error", {{"type", "validation"}, {"message", e.what()}}}}.dump() << '\n';
    return 1;
  } catch (const CapacityError& e) {
    err << json{{"error", {{"type", "capacity"}, {"message", e.what()}}}}.dump() << '\n';
    return 1;
  } catch (const InsufficientDataError& e) {
    err << json{{"error", {{"type", "insufficient_data"}, {"message", e.what()}}}}.dump() << '\n';
    return 1;
  } catch (const json::exception& e) {
    err << json{{"error", {{"type", "config"}, {"message", e.what()}}}}.dump() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace ionlink::cli
