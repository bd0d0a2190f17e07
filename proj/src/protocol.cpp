#include "ionlink/protocol.hpp"

#include "ionlink/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

namespace ionlink {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

ModeLabel with_bin(const ModeLabel& l, int bin) { return {l.site, l.pol, bin}; }

// Splits every photon of `site` between its shared bin (amplitude mu) and a
// private bin (amplitude sqrt(1 - mu^2)).
JointState split_overlap(const JointState& state, Site site, int shared, int private_bin,
                         double mu) {
  const double rest = std::sqrt(std::max(0.0, 1.0 - mu * mu));
  Eigen::Matrix2cd block;
  block << mu, rest, rest, -mu;
  JointState out = state;
  for (Polarization pol : {Polarization::H, Polarization::V}) {
    const std::array<ModeLabel, 2> modes{ModeLabel{site, pol, shared},
                                         ModeLabel{site, pol, private_bin}};
    out = apply_mode_unitary(out, modes, block);
  }
  return out;
}

}  // namespace

double EmissionModel::compensation_attenuation() const {
  if (!compensate) return 1.0;
  return std::min(amplitude_asymmetry, 1.0 / amplitude_asymmetry);
}

double EmissionModel::retained_probability() const {
  if (!compensate) return 1.0;
  const double eps = amplitude_asymmetry;
  const double weak = std::min(eps, 1.0);
  const double per_ion = 2.0 * weak * weak / (1.0 + eps * eps);
  return per_ion * per_ion;
}

double ChannelModel::survival() const {
  return std::pow(10.0, -attenuation_db_per_km * length_km / 10.0);
}

double ChannelModel::phase() const {
  double p = std::fmod(wavenumber * path_length_m, kTwoPi);
  if (p < 0.0) p += kTwoPi;
  return p;
}

void validate(const EmissionModel& model) {
  if (!(model.amplitude_asymmetry > 0.0) || !std::isfinite(model.amplitude_asymmetry)) {
    throw ValidationError("amplitude asymmetry must be positive");
  }
}

void validate(const ChannelModel& ch) {
  if (!(ch.length_km >= 0.0)) throw ValidationError("channel length must be non-negative");
  if (!(ch.attenuation_db_per_km >= 0.0)) throw ValidationError("attenuation must be non-negative");
  if (ch.temporal_offset < 0) throw ValidationError("temporal offset must be non-negative");
  if (!(ch.overlap >= 0.0 && ch.overlap <= 1.0)) throw ValidationError("overlap must lie in [0, 1]");
  if (!std::isfinite(ch.wavenumber) || !std::isfinite(ch.path_length_m)) {
    throw ValidationError("channel phase inputs must be finite");
  }
}

JointState emit_pair(const EmissionModel& model) {
  validate(model);
  const double eps = model.amplitude_asymmetry;
  double s1 = eps / std::sqrt(1.0 + eps * eps);
  double s2 = 1.0 / std::sqrt(1.0 + eps * eps);
  if (model.compensate) s1 = s2 = 1.0 / std::sqrt(2.0);

  const ModeRegister reg = source_register();
  JointState out(reg);
  const std::array<std::pair<IonLevel, Polarization>, 2> branches{
      std::pair{IonLevel::S1, Polarization::H}, std::pair{IonLevel::S2, Polarization::V}};
  for (const auto& [ion_a, pol_a] : branches) {
    for (const auto& [ion_b, pol_b] : branches) {
      FockState fock = vacuum(reg.size());
      fock.occupations[reg.index_of({Site::A, pol_a, 0})] = 1;
      fock.occupations[reg.index_of({Site::B, pol_b, 0})] = 1;
      const double amp = (ion_a == IonLevel::S1 ? s1 : s2) * (ion_b == IonLevel::S1 ? s1 : s2);
      out.add(JointKey{IonPair{ion_a, ion_b}, std::move(fock)}, amp);
    }
  }
  return out;
}

DensityMatrix apply_channels(const JointState& state, const ChannelModel& side_a,
                             const ChannelModel& side_b) {
  validate(side_a);
  validate(side_b);
  const int base_a = side_a.temporal_offset;
  const int base_b = side_b.temporal_offset;
  const int top = std::max(base_a, base_b);
  const int private_a = top + 1;
  const int private_b = top + 2;

  std::set<int> bins{base_a, base_b};
  if (side_a.overlap < 1.0) bins.insert(private_a);
  if (side_b.overlap < 1.0) bins.insert(private_b);
  const std::vector<int> bin_list(bins.begin(), bins.end());
  const ModeRegister reg = source_register(bin_list);

  JointState placed = relabel(state, [&](const ModeLabel& l) {
    if (l.site == Site::A) return with_bin(l, l.bin + base_a);
    if (l.site == Site::B) return with_bin(l, l.bin + base_b);
    return l;
  });
  placed = embed(placed, reg);
  if (side_a.overlap < 1.0) placed = split_overlap(placed, Site::A, base_a, private_a, side_a.overlap);
  if (side_b.overlap < 1.0) placed = split_overlap(placed, Site::B, base_b, private_b, side_b.overlap);

  const OpticalCircuit phases({PhaseShifter{Site::A, std::nullopt, side_a.phase()},
                               PhaseShifter{Site::B, std::nullopt, side_b.phase()}});
  placed = phases.apply(placed);

  DensityMatrix rho = DensityMatrix::from_pure(placed);
  const OpticalCircuit fibers({Loss{Site::A, std::nullopt, side_a.survival()},
                               Loss{Site::B, std::nullopt, side_b.survival()}});
  return fibers.apply(rho);
}

std::vector<HeraldedResult> run_attempt(const AttemptConfig& config) {
  const JointState emitted = emit_pair(config.emission);
  DensityMatrix rho = apply_channels(emitted, config.channel_a, config.channel_b);
  rho = (config.circuit ? *config.circuit : build_bell_analyzer()).apply(rho);
  const auto outcomes = measure(rho, config.detectors);

  const double retained = config.emission.retained_probability();
  std::vector<HeraldedResult> results;
  for (HeraldClass herald : kHeraldClasses) {
    HeraldedResult r;
    r.herald = herald;
    Eigen::Matrix4cd ions = Eigen::Matrix4cd::Zero();
    for (const auto& o : outcomes) {
      if (classify_pattern(o.pattern) != herald) continue;
      r.probability += o.probability;
      ions += o.probability * o.ion_state->matrix();
    }
    if (r.probability > 0.0) {
      r.ion_state = DensityMatrix(ions / r.probability, Subsystem::Ions);
      if (herald == HeraldClass::PsiMinus || herald == HeraldClass::PsiPlus) {
        const BellState target =
            herald == HeraldClass::PsiMinus ? BellState::PsiMinus : BellState::PsiPlus;
        r.fidelity = fidelity(*r.ion_state, ion_bell_state(target));
      }
    }
    r.probability *= retained;
    results.push_back(std::move(r));
  }
  // Pairs removed by the compensating attenuation never produce a herald.
  results.back().probability += 1.0 - retained;
  if (!results.back().ion_state && results.back().probability > 0.0) {
    results.back().ion_state = DensityMatrix::maximally_mixed_ions();
  }
  return results;
}

std::vector<HeraldedResult> run_attempt(const EmissionModel& emission, const ChannelModel& side_a,
                                        const ChannelModel& side_b,
                                        const DetectorBank& detectors) {
  return run_attempt(AttemptConfig{emission, side_a, side_b, detectors, std::nullopt});
}

const HeraldedResult& result_for(const std::vector<HeraldedResult>& results, HeraldClass herald) {
  for (const auto& r : results) {
    if (r.herald == herald) return r;
  }
  throw ValidationError("herald class missing from results");
}

DensityMatrix single_photon_scheme_state(double phi_a, double phi_b) {
  Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
  v(1) = std::polar(1.0 / std::sqrt(2.0), phi_a);
  v(2) = std::polar(1.0 / std::sqrt(2.0), phi_b);
  return DensityMatrix::from_ion_vector(v);
}

Eigen::Vector4cd single_photon_target() {
  Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
  v(1) = v(2) = 1.0 / std::sqrt(2.0);
  return v;
}

DensityMatrix single_photon_scheme_averaged(double mean_relative_phase, const PhaseNoise& noise) {
  if (!(noise.spread >= 0.0)) throw ValidationError("phase noise spread must be non-negative");
  // Characteristic function of the relative-phase distribution at 1.
  double damping = 1.0;
  if (noise.kind == PhaseNoise::Kind::Gaussian) {
    damping = std::exp(-0.5 * noise.spread * noise.spread);
  } else if (noise.spread > 0.0) {
    damping = std::sin(noise.spread) / noise.spread;
  }
  Eigen::Matrix4cd rho = single_photon_scheme_state(0.0, mean_relative_phase).matrix();
  rho(1, 2) *= damping;
  rho(2, 1) *= damping;
  return DensityMatrix(rho, Subsystem::Ions);
}

std::vector<double> phase_grid(int n) {
  if (n <= 0) throw ValidationError("phase grid needs at least one point");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = kTwoPi * i / n;
  return out;
}

std::vector<PhaseReportRow> phase_insensitivity_report(std::span<const double> phis_a,
                                                       std::span<const double> phis_b,
                                                       const AttemptConfig& base,
                                                       unsigned threads) {
  validate(base.emission);
  validate(base.channel_a);
  validate(base.channel_b);
  for (const auto& d : base.detectors) validate(d);
  const std::size_t cells = phis_a.size() * phis_b.size();
  constexpr std::size_t kRowsPerCell = 3;
  std::vector<PhaseReportRow> rows(cells * kRowsPerCell);

  auto evaluate = [&](std::size_t cell) {
    const double pa = phis_a[cell / phis_b.size()];
    const double pb = phis_b[cell % phis_b.size()];
    AttemptConfig cfg = base;
    cfg.channel_a.wavenumber = 1.0;
    cfg.channel_a.path_length_m = pa;
    cfg.channel_b.wavenumber = 1.0;
    cfg.channel_b.path_length_m = pb;
    const auto results = run_attempt(cfg);
    std::size_t slot = cell * kRowsPerCell;
    for (HeraldClass h : {HeraldClass::PsiMinus, HeraldClass::PsiPlus}) {
      const auto& r = result_for(results, h);
      rows[slot++] = {pa, pb, std::string(to_string(h)), r.probability, r.fidelity.value_or(0.0)};
    }
    rows[slot] = {pa, pb, "SinglePhoton", std::nullopt,
                  fidelity(single_photon_scheme_state(pa, pb), single_photon_target())};
  };

  threads = std::max(1u, threads);
  if (threads == 1 || cells < 2) {
    for (std::size_t c = 0; c < cells; ++c) evaluate(c);
    return rows;
  }
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t c = t; c < cells; c += threads) evaluate(c);
    });
  }
  pool.clear();
  return rows;
}

}  // namespace ionlink
