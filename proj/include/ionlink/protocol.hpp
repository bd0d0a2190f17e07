#pragma once

// One attempt of two-photon heralded entanglement between ions A and B:
// emission, fiber channels, the partial Bell analyzer and detection, all by
// exact enumeration. Also the single-photon heralding scheme used as a
// phase-sensitivity contrast.

#include "ionlink/density.hpp"
#include "ionlink/optics.hpp"

#include <numbers>
#include <optional>
#include <vector>

namespace ionlink {

struct EmissionModel {
  // Amplitude ratio of the s1 and s2 decay branches.
  double amplitude_asymmetry = 1.0;
  // Attenuate the stronger polarization until both branches are equal.
  bool compensate = false;

  // Amplitude factor applied to the stronger polarization (1 when balanced).
  double compensation_attenuation() const;
  // Probability that a pair survives the compensating attenuation.
  double retained_probability() const;
};

inline constexpr double kDefaultWavelength = 854e-9;

struct ChannelModel {
  double length_km = 0.0;
  double attenuation_db_per_km = 1.0;
  double wavenumber = 2.0 * std::numbers::pi / kDefaultWavelength;  // rad/m
  double path_length_m = 0.0;
  int temporal_offset = 0;  // bins; photons in different bins never interfere
  double overlap = 1.0;     // amplitude left in the shared bin

  double survival() const;
  double phase() const;  // k * L reduced to [0, 2 pi)
};

void validate(const EmissionModel& model);
void validate(const ChannelModel& channel);

// (1/2)[|s1>a1 + |s2>a2][|s1>b1 + |s2>b2]|0> for balanced emission.
JointState emit_pair(const EmissionModel& model = {});

// Applies per-side phase (both polarizations), temporal placement, overlap
// splitting and fiber loss. Output register: sites A, B, both polarizations,
// every bin used by either side.
DensityMatrix apply_channels(const JointState& state, const ChannelModel& side_a,
                             const ChannelModel& side_b);

struct AttemptConfig {
  EmissionModel emission;
  ChannelModel channel_a;
  ChannelModel channel_b;
  DetectorBank detectors{};
  std::optional<OpticalCircuit> circuit;  // defaults to build_bell_analyzer()
};

struct HeraldedResult {
  HeraldClass herald = HeraldClass::NoHerald;
  double probability = 0.0;
  std::optional<DensityMatrix> ion_state;
  // Against psi- / psi+ for the two heralding classes, unset otherwise.
  std::optional<double> fidelity;
};

// One entry per herald class, in kHeraldClasses order.
std::vector<HeraldedResult> run_attempt(const AttemptConfig& config);
std::vector<HeraldedResult> run_attempt(const EmissionModel& emission, const ChannelModel& side_a,
                                        const ChannelModel& side_b,
                                        const DetectorBank& detectors = {});

const HeraldedResult& result_for(const std::vector<HeraldedResult>& results, HeraldClass herald);

// Ion pair (ordered |gg>, |ge>, |eg>, |ee>) after detecting one photon that
// came from either emitter: (e^{i phi_A}|g>|e> + e^{i phi_B}|e>|g>)/sqrt(2).
DensityMatrix single_photon_scheme_state(double phi_a, double phi_b);

// (|ge> + |eg>)/sqrt(2).
Eigen::Vector4cd single_photon_target();

struct PhaseNoise {
  enum class Kind { Gaussian, Uniform };
  Kind kind = Kind::Gaussian;
  double spread = 0.0;  // standard deviation, or half-width for Uniform
};

// Single-photon scheme state averaged over relative-phase noise around `mean`.
DensityMatrix single_photon_scheme_averaged(double mean_relative_phase, const PhaseNoise& noise);

struct PhaseReportRow {
  double phi_a = 0.0;
  double phi_b = 0.0;
  std::string herald_class;
  std::optional<double> probability;  // unset for the single-photon scheme
  double fidelity = 0.0;
};

// For every (phi_A, phi_B): PsiMinus and PsiPlus rows of the two-photon
// scheme, then a SinglePhoton row. Rows follow input order for any thread count.
std::vector<PhaseReportRow> phase_insensitivity_report(std::span<const double> phis_a,
                                                       std::span<const double> phis_b,
                                                       const AttemptConfig& base = {},
                                                       unsigned threads = 1);

// n evenly spaced phases in [0, 2 pi).
std::vector<double> phase_grid(int n);

}  // namespace ionlink
