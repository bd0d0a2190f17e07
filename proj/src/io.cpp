#include "ionlink/io.hpp"

#include "ionlink/errors.hpp"

#include <charconv>
#include <initializer_list>
#include <sstream>

namespace ionlink::io {

namespace {

void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                std::string_view where) {
  if (!j.is_object()) throw ValidationError(std::string(where) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || a == key;
    if (!known) throw ValidationError("unknown key '" + key + "' in " + std::string(where));
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Polarization polarization_from_json(const json& j) {
  const int p = j.get<int>();
  if (p != 1 && p != 2) throw ValidationError("polarization must be 1 or 2");
  return static_cast<Polarization>(p);
}

Site site(const json& j) { return site_from_string(j.get<std::string>()); }
std::string name(Site s) { return std::string(to_string(s)); }

json element_to_json(const OpticalElement& element) {
  json j{{"kind", std::string(element_kind(element))}};
  if (const auto* bs = std::get_if<BeamSplitter>(&element)) {
    j["inputs"] = {name(bs->inputs[0]), name(bs->inputs[1])};
    j["outputs"] = {name(bs->outputs[0]), name(bs->outputs[1])};
    j["transmissivity"] = bs->transmissivity;
    j["phase"] = bs->phase;
  } else if (const auto* pbs = std::get_if<PolarizingBS>(&element)) {
    j["input"] = name(pbs->input);
    j["transmitted"] = name(pbs->transmitted);
    j["reflected"] = name(pbs->reflected);
  } else if (const auto* ps = std::get_if<PhaseShifter>(&element)) {
    j["site"] = name(ps->site);
    if (ps->pol) j["pol"] = static_cast<int>(*ps->pol);
    j["phase"] = ps->phase;
  } else if (const auto* rot = std::get_if<PolarizationRotator>(&element)) {
    j["site"] = name(rot->site);
    j["angle"] = rot->angle;
  } else if (const auto* loss = std::get_if<Loss>(&element)) {
    j["site"] = name(loss->site);
    if (loss->pol) j["pol"] = static_cast<int>(*loss->pol);
    j["survival"] = loss->survival;
  }
  return j;
}

OpticalElement element_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) throw ValidationError("circuit element needs a kind");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "BeamSplitter") {
    check_keys(j, {"kind", "inputs", "outputs", "transmissivity", "phase"}, "BeamSplitter");
    BeamSplitter bs;
    if (j.contains("inputs")) bs.inputs = {site(j["inputs"].at(0)), site(j["inputs"].at(1))};
    if (j.contains("outputs")) bs.outputs = {site(j["outputs"].at(0)), site(j["outputs"].at(1))};
    read(j, "transmissivity", bs.transmissivity);
    read(j, "phase", bs.phase);
    return bs;
  }
  if (kind == "PolarizingBS") {
    check_keys(j, {"kind", "input", "transmitted", "reflected"}, "PolarizingBS");
    return PolarizingBS{site(j.at("input")), site(j.at("transmitted")), site(j.at("reflected"))};
  }
  if (kind == "PhaseShifter") {
    check_keys(j, {"kind", "site", "pol", "phase"}, "PhaseShifter");
    PhaseShifter ps{site(j.at("site")), std::nullopt, j.value("phase", 0.0)};
    if (j.contains("pol")) ps.pol = polarization_from_json(j["pol"]);
    return ps;
  }
  if (kind == "PolarizationRotator") {
    check_keys(j, {"kind", "site", "angle"}, "PolarizationRotator");
    return PolarizationRotator{site(j.at("site")), j.value("angle", 0.0)};
  }
  if (kind == "Loss") {
    check_keys(j, {"kind", "site", "pol", "survival"}, "Loss");
    Loss loss{site(j.at("site")), std::nullopt, j.value("survival", 1.0)};
    if (j.contains("pol")) loss.pol = polarization_from_json(j["pol"]);
    return loss;
  }
  throw ValidationError("unknown circuit element kind '" + kind + "'");
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string format_number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

json to_json(const OpticalCircuit& circuit) {
  json elements = json::array();
  for (const auto& e : circuit.elements()) elements.push_back(element_to_json(e));
  return {{"elements", elements}};
}

OpticalCircuit circuit_from_json(const json& j) {
  check_keys(j, {"elements"}, "circuit");
  OpticalCircuit circuit;
  for (const auto& e : j.at("elements")) circuit.add(element_from_json(e));
  return circuit;
}

json to_json(const DensityMatrix& ions) {
  json re = json::array(), im = json::array();
  for (Eigen::Index r = 0; r < ions.dim(); ++r) {
    json rr = json::array(), ii = json::array();
    for (Eigen::Index c = 0; c < ions.dim(); ++c) {
      rr.push_back(ions.matrix()(r, c).real());
      ii.push_back(ions.matrix()(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return {{"re", re}, {"im", im}};
}

DensityMatrix ion_state_from_json(const json& j) {
  check_keys(j, {"re", "im"}, "ion_state");
  Eigen::Matrix4cd m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      const double im = j.contains("im") ? j["im"].at(r).at(c).get<double>() : 0.0;
      m(r, c) = {j.at("re").at(r).at(c).get<double>(), im};
    }
  DensityMatrix rho(m, Subsystem::Ions);
  if (!rho.is_hermitian(1e-9) || std::abs(rho.trace() - 1.0) > 1e-9) {
    throw ValidationError("ion_state is not a unit-trace Hermitian matrix");
  }
  return rho;
}

json to_json(const Detector& d) {
  return {{"efficiency", d.efficiency},
          {"dark_count_prob", d.dark_count_prob},
          {"number_resolving", d.number_resolving}};
}

json to_json(const EmissionModel& m) {
  return {{"amplitude_asymmetry", m.amplitude_asymmetry}, {"compensate", m.compensate}};
}

json to_json(const ChannelModel& ch) {
  return {{"length_km", ch.length_km},
          {"attenuation_db_per_km", ch.attenuation_db_per_km},
          {"wavenumber", ch.wavenumber},
          {"path_length_m", ch.path_length_m},
          {"temporal_offset", ch.temporal_offset},
          {"overlap", ch.overlap}};
}

json to_json(const AttemptConfig& cfg) {
  json detectors = json::array();
  for (const auto& d : cfg.detectors) detectors.push_back(to_json(d));
  json j{{"emission", to_json(cfg.emission)},
         {"channel_a", to_json(cfg.channel_a)},
         {"channel_b", to_json(cfg.channel_b)},
         {"detectors", detectors}};
  if (cfg.circuit) j["circuit"] = to_json(*cfg.circuit);
  return j;
}

AttemptConfig attempt_config_from_json(const json& j, AttemptConfig cfg) {
  check_keys(j, {"emission", "channel_a", "channel_b", "detectors", "circuit"}, "attempt config");
  if (j.contains("emission")) {
    const auto& e = j["emission"];
    check_keys(e, {"amplitude_asymmetry", "compensate"}, "emission");
    read(e, "amplitude_asymmetry", cfg.emission.amplitude_asymmetry);
    read(e, "compensate", cfg.emission.compensate);
  }
  for (auto [key, ch] : {std::pair{"channel_a", &cfg.channel_a}, {"channel_b", &cfg.channel_b}}) {
    if (!j.contains(key)) continue;
    const auto& c = j[key];
    check_keys(c, {"length_km", "attenuation_db_per_km", "wavenumber", "path_length_m",
                   "temporal_offset", "overlap"},
               key);
    read(c, "length_km", ch->length_km);
    read(c, "attenuation_db_per_km", ch->attenuation_db_per_km);
    read(c, "wavenumber", ch->wavenumber);
    read(c, "path_length_m", ch->path_length_m);
    read(c, "temporal_offset", ch->temporal_offset);
    read(c, "overlap", ch->overlap);
  }
  if (j.contains("detectors")) {
    // Either one object for all four detectors or an array of four.
    const auto& d = j["detectors"];
    auto parse = [](const json& o, Detector det) {
      check_keys(o, {"efficiency", "dark_count_prob", "number_resolving"}, "detector");
      read(o, "efficiency", det.efficiency);
      read(o, "dark_count_prob", det.dark_count_prob);
      read(o, "number_resolving", det.number_resolving);
      return det;
    };
    if (d.is_array()) {
      if (d.size() != 4) throw ValidationError("detectors array needs four entries");
      for (std::size_t k = 0; k < 4; ++k) cfg.detectors[k] = parse(d[k], cfg.detectors[k]);
    } else {
      for (auto& det : cfg.detectors) det = parse(d, det);
    }
  }
  if (j.contains("circuit")) cfg.circuit = circuit_from_json(j["circuit"]);
  validate(cfg.emission);
  validate(cfg.channel_a);
  validate(cfg.channel_b);
  for (const auto& det : cfg.detectors) validate(det);
  return cfg;
}

json to_json(const HeraldedResult& r) {
  json j{{"herald_class", std::string(to_string(r.herald))},
         {"probability", r.probability},
         {"fidelity", optional_number(r.fidelity)}};
  j["ion_state"] = r.ion_state ? to_json(*r.ion_state) : json(nullptr);
  return j;
}

json herald_report(const AttemptConfig& cfg, const std::vector<HeraldedResult>& results) {
  json list = json::array();
  double heralded = 0.0;
  for (const auto& r : results) {
    list.push_back(to_json(r));
    if (r.herald == HeraldClass::PsiMinus || r.herald == HeraldClass::PsiPlus) {
      heralded += r.probability;
    }
  }
  return {{"config", to_json(cfg)}, {"results", list}, {"heralded_probability", heralded}};
}

json to_json(const MeasurementSetting& s) { return {{"theta", s.theta}, {"phi", s.phi}}; }

json chsh_report(const CHSHConfig& cfg, const std::string& state_source, double analytic_s,
                 const MonteCarloResult& mc) {
  static constexpr std::array<const char*, 4> kPairs{"a,b", "a,b'", "a',b", "a',b'"};
  json counts = json::array();
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& c = mc.counts[k];
    counts.push_back({{"settings", kPairs[k]},
                      {"pp", c.outcomes[0]},
                      {"pm", c.outcomes[1]},
                      {"mp", c.outcomes[2]},
                      {"mm", c.outcomes[3]},
                      {"correlator", c.correlator()}});
  }
  json config{{"state", state_source},
              {"a", to_json(cfg.settings.a)},
              {"a_prime", to_json(cfg.settings.a_prime)},
              {"b", to_json(cfg.settings.b)},
              {"b_prime", to_json(cfg.settings.b_prime)},
              {"trials", cfg.trials},
              {"seed", cfg.rng_seed},
              {"depolarizing", cfg.depolarizing}};
  return {{"S", mc.s},
          {"stderr", mc.standard_error},
          {"S_analytic", analytic_s},
          {"counts", counts},
          {"config", config}};
}

json to_json(const budget::BudgetConfig& c) {
  return {{"repetition_rate", c.repetition_rate},
          {"p_cav", c.p_cav},
          {"fiber_coupling", c.fiber_coupling},
          {"distance_km", c.distance_km},
          {"attenuation_db_per_km", c.attenuation_db_per_km},
          {"detector_eta", c.detector_eta},
          {"herald_fraction", c.herald_fraction}};
}

budget::BudgetConfig budget_from_json(const json& j, budget::BudgetConfig c) {
  check_keys(j, {"repetition_rate", "p_cav", "fiber_coupling", "distance_km",
                 "attenuation_db_per_km", "detector_eta", "herald_fraction"},
             "rate config");
  read(j, "repetition_rate", c.repetition_rate);
  read(j, "p_cav", c.p_cav);
  read(j, "fiber_coupling", c.fiber_coupling);
  read(j, "distance_km", c.distance_km);
  read(j, "attenuation_db_per_km", c.attenuation_db_per_km);
  read(j, "detector_eta", c.detector_eta);
  read(j, "herald_fraction", c.herald_fraction);
  budget::validate(c);
  return c;
}

json rate_report(const budget::BudgetConfig& cfg, double n_pairs) {
  const double rate = budget::pair_rate(cfg);
  const double survival = budget::fiber_survival(cfg.distance_km / 2.0, cfg.attenuation_db_per_km);
  return {{"config", to_json(cfg)},
          {"per_photon_survival", survival},
          {"both_photons_survive", survival * survival},
          {"pairs_per_second", rate},
          {"pairs_per_minute", rate * 60.0},
          {"target_pairs", n_pairs},
          {"time_to_pairs_s", optional_number(budget::time_to_pairs(cfg, n_pairs))}};
}

json to_json(const spacetime::Scenario& s) {
  return {{"x_a", s.x_a},
          {"x_b", s.x_b},
          {"x_i", s.x_i},
          {"fiber_speed", s.fiber_speed},
          {"excitation_to_choice", s.excitation_to_choice},
          {"rotation_duration", s.rotation_duration},
          {"readout_duration", s.readout_duration},
          {"emission_delay", s.emission_delay}};
}

spacetime::Scenario scenario_from_json(const json& j, spacetime::Scenario s) {
  check_keys(j, {"x_a", "x_b", "x_i", "fiber_speed", "excitation_to_choice", "rotation_duration",
                 "readout_duration", "emission_delay"},
             "timing scenario");
  read(j, "x_a", s.x_a);
  read(j, "x_b", s.x_b);
  read(j, "x_i", s.x_i);
  read(j, "fiber_speed", s.fiber_speed);
  read(j, "excitation_to_choice", s.excitation_to_choice);
  read(j, "rotation_duration", s.rotation_duration);
  read(j, "readout_duration", s.readout_duration);
  read(j, "emission_delay", s.emission_delay);
  spacetime::validate(s);
  return s;
}

json timing_report(const spacetime::Scenario& s) {
  const auto schedule = spacetime::build_schedule(s);
  const auto report = spacetime::validate(schedule);
  json events = json::array();
  for (const auto& e : schedule) {
    events.push_back({{"label", std::string(spacetime::to_string(e.label))}, {"x", e.x}, {"t", e.t}});
  }
  json checks = json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"margin_s", c.margin}});
  }
  return {{"scenario", to_json(s)},
          {"events", events},
          {"checks", checks},
          {"all_pass", report.all_pass},
          {"choice_to_detection_s", s.choice_to_detection()},
          {"max_choice_to_detection_s", report.max_choice_to_detection},
          {"min_choice_delay_s", spacetime::min_choice_delay(s)}};
}

std::string phase_report_csv(const std::vector<PhaseReportRow>& rows) {
  std::ostringstream out;
  out << "phi_A,phi_B,herald_class,probability,fidelity\n";
  for (const auto& r : rows) {
    out << format_number(r.phi_a) << ',' << format_number(r.phi_b) << ',' << r.herald_class << ','
        << (r.probability ? format_number(*r.probability) : std::string()) << ','
        << format_number(r.fidelity) << '\n';
  }
  return out.str();
}

std::string cavity_scan_csv(const std::vector<cavity::CavityPoint<double>>& points) {
  std::ostringstream out;
  out << "L,Omega,gamma_opt,F_opt_pi,F_opt_4pi,p_cav\n";
  for (const auto& p : points) {
    out << format_number(p.length) << ',' << format_number(p.omega) << ','
        << format_number(p.gamma_opt) << ',' << format_number(p.finesse_pi) << ','
        << format_number(p.finesse_4pi) << ',' << format_number(p.p_cav) << '\n';
  }
  return out.str();
}

}  // namespace ionlink::io
