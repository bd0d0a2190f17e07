#pragma once

#include "ionlink/density.hpp"
#include "ionlink/fock.hpp"

#include <array>
#include <optional>
#include <variant>
#include <vector>

namespace ionlink {

// Mixes every (polarization, bin) pair of modes at the two input sites and
// renames them to the output sites. Matrix on (in0, in1):
//   [[ sqrt(t),             e^{i phase} sqrt(1-t) ],
//    [ e^{-i phase} sqrt(1-t), -sqrt(t)           ]]
// which at t = 1/2, phase = 0 is the symmetric convention [[1, 1], [1, -1]]/sqrt(2).
struct BeamSplitter {
  std::array<Site, 2> inputs{Site::A, Site::B};
  std::array<Site, 2> outputs{Site::C, Site::D};
  double transmissivity = 0.5;
  double phase = 0.0;
};

// Polarization 1 is transmitted, polarization 2 reflected.
struct PolarizingBS {
  Site input = Site::C;
  Site transmitted = Site::D1;
  Site reflected = Site::D2;
};

// Phase e^{i phase} on one polarization of a site, or on both when unset.
struct PhaseShifter {
  Site site = Site::A;
  std::optional<Polarization> pol;
  double phase = 0.0;
};

// a1 -> cos a1 + sin a2, a2 -> -sin a1 + cos a2, in every bin of the site.
struct PolarizationRotator {
  Site site = Site::A;
  double angle = 0.0;
};

// Amplitude-damping coupling to an environment mode, then traced out.
struct Loss {
  Site site = Site::A;
  std::optional<Polarization> pol;
  double survival = 1.0;
};

using OpticalElement =
    std::variant<BeamSplitter, PolarizingBS, PhaseShifter, PolarizationRotator, Loss>;

std::string_view element_kind(const OpticalElement& element);

class OpticalCircuit {
 public:
  OpticalCircuit() = default;
  explicit OpticalCircuit(std::vector<OpticalElement> elements);

  OpticalCircuit& add(OpticalElement element);
  const std::vector<OpticalElement>& elements() const { return elements_; }

  // Pure-state propagation; throws ValidationError on a Loss element.
  PhotonicState apply(const PhotonicState& state) const;
  JointState apply(const JointState& state) const;

  DensityMatrix apply(const DensityMatrix& rho) const;

 private:
  std::vector<OpticalElement> elements_;
};

// 50/50 BS (A, B -> C, D); PBS on C: pol 1 -> D1, pol 2 -> D2; PBS on D:
// pol 1 -> D4, pol 2 -> D3. With this routing psi- gives D1&D3 / D2&D4,
// psi+ gives D1&D2 / D3&D4 and D1&D4, D2&D3 never fire together.
OpticalCircuit build_bell_analyzer();

// Loss on one mode with survival probability `survival` in [0, 1].
DensityMatrix apply_loss(const DensityMatrix& rho, const ModeLabel& mode, double survival);

struct Detector {
  double efficiency = 1.0;
  double dark_count_prob = 0.0;  // per detection window
  bool number_resolving = false;
};

void validate(const Detector& detector);

inline constexpr std::array<Site, 4> kDetectorSites = {Site::D1, Site::D2, Site::D3, Site::D4};

using DetectorBank = std::array<Detector, 4>;

// Reported count per detector D1..D4. Threshold detectors report 0 or 1;
// number-resolving ones report 0, 1, or 2 for two or more.
struct ClickPattern {
  std::array<int, 4> counts{};

  int firing() const;
  friend auto operator<=>(const ClickPattern&, const ClickPattern&) = default;
};

enum class HeraldClass { PsiMinus, PsiPlus, PhiOrUnusable, NoHerald };

inline constexpr std::array<HeraldClass, 4> kHeraldClasses = {
    HeraldClass::PsiMinus, HeraldClass::PsiPlus, HeraldClass::PhiOrUnusable,
    HeraldClass::NoHerald};

std::string_view to_string(HeraldClass herald);

// Classification table:
//   nothing fires                          -> NoHerald
//   one detector, count 1                  -> NoHerald (a lost partner photon)
//   one detector, count >= 2               -> PhiOrUnusable
//   exactly D1&D3 or D2&D4                 -> PsiMinus
//   exactly D1&D2 or D3&D4                 -> PsiPlus
//   any other multi-detector pattern       -> PhiOrUnusable
HeraldClass classify_pattern(const ClickPattern& pattern);

struct MeasurementOutcome {
  ClickPattern pattern;
  double probability = 0.0;
  std::optional<DensityMatrix> ion_state;  // renormalized; joint input only
};

// Photon-number measurement of every mode at D1..D4, dressed with binomial
// efficiency thinning and independent Bernoulli dark counts. Outcomes are
// sorted by pattern; zero-probability patterns are omitted.
std::vector<MeasurementOutcome> measure(const DensityMatrix& rho, const DetectorBank& detectors);

// Probability of one photon in each output of a 50/50 splitter for photons
// whose temporal wavepackets have amplitude overlap `overlap` in [0, 1].
double hom_coincidence_probability(double overlap);

}  // namespace ionlink
