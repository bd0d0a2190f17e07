#include "ionlink/optics.hpp"

#include "ionlink/errors.hpp"

#include <cmath>
#include <map>
#include <set>

namespace ionlink {

namespace {

// Mode map of a unitary element on a given register.
struct Step {
  std::vector<ModeLabel> modes;
  Eigen::MatrixXcd unitary;
  std::function<ModeLabel(const ModeLabel&)> relabel;
};

void check_unit_interval(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw ValidationError(std::string(what) + " must lie in [0, 1]");
  }
}

void validate_element(const OpticalElement& element) {
  if (const auto* bs = std::get_if<BeamSplitter>(&element)) {
    check_unit_interval(bs->transmissivity, "beam splitter transmissivity");
    if (bs->inputs[0] == bs->inputs[1] || bs->outputs[0] == bs->outputs[1]) {
      throw ValidationError("beam splitter ports must be distinct sites");
    }
  } else if (const auto* loss = std::get_if<Loss>(&element)) {
    check_unit_interval(loss->survival, "loss survival");
  }
}

Eigen::MatrixXcd block_diagonal(const std::vector<Eigen::Matrix2cd>& blocks) {
  const auto n = static_cast<Eigen::Index>(2 * blocks.size());
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    u.block<2, 2>(static_cast<Eigen::Index>(2 * b), static_cast<Eigen::Index>(2 * b)) = blocks[b];
  }
  return u;
}

Step plan(const BeamSplitter& bs, const ModeRegister& reg) {
  std::set<std::pair<Polarization, int>> channels;
  for (const auto& l : reg.labels()) {
    if (l.site == bs.inputs[0] || l.site == bs.inputs[1]) channels.emplace(l.pol, l.bin);
  }
  const double t = bs.transmissivity;
  const Complex e = std::polar(1.0, bs.phase);
  Eigen::Matrix2cd block;
  block << std::sqrt(t), e * std::sqrt(1.0 - t), std::conj(e) * std::sqrt(1.0 - t), -std::sqrt(t);

  Step step;
  std::vector<Eigen::Matrix2cd> blocks;
  for (const auto& [pol, bin] : channels) {
    const ModeLabel first{bs.inputs[0], pol, bin}, second{bs.inputs[1], pol, bin};
    if (!reg.find(first) || !reg.find(second)) {
      throw ValidationError("beam splitter input " + to_string(reg.find(first) ? second : first) +
                            " missing; both ports need matching modes");
    }
    step.modes.push_back(first);
    step.modes.push_back(second);
    blocks.push_back(block);
  }
  step.unitary = block_diagonal(blocks);
  step.relabel = [bs](const ModeLabel& l) {
    if (l.site == bs.inputs[0]) return ModeLabel{bs.outputs[0], l.pol, l.bin};
    if (l.site == bs.inputs[1]) return ModeLabel{bs.outputs[1], l.pol, l.bin};
    return l;
  };
  return step;
}

Step plan(const PolarizingBS& pbs, const ModeRegister&) {
  Step step;
  step.unitary = Eigen::MatrixXcd(0, 0);
  step.relabel = [pbs](const ModeLabel& l) {
    if (l.site != pbs.input) return l;
    return ModeLabel{l.pol == Polarization::H ? pbs.transmitted : pbs.reflected, l.pol, l.bin};
  };
  return step;
}

Step plan(const PhaseShifter& ps, const ModeRegister& reg) {
  Step step;
  for (const auto& l : reg.labels()) {
    if (l.site == ps.site && (!ps.pol || *ps.pol == l.pol)) step.modes.push_back(l);
  }
  const auto n = static_cast<Eigen::Index>(step.modes.size());
  step.unitary = Eigen::MatrixXcd::Identity(n, n) * std::polar(1.0, ps.phase);
  return step;
}

Step plan(const PolarizationRotator& rot, const ModeRegister& reg) {
  std::set<int> bins;
  for (const auto& l : reg.labels()) {
    if (l.site == rot.site) bins.insert(l.bin);
  }
  Eigen::Matrix2cd block;
  block << std::cos(rot.angle), std::sin(rot.angle), -std::sin(rot.angle), std::cos(rot.angle);
  Step step;
  std::vector<Eigen::Matrix2cd> blocks;
  for (int bin : bins) {
    const ModeLabel h{rot.site, Polarization::H, bin}, v{rot.site, Polarization::V, bin};
    if (!reg.find(h) || !reg.find(v)) {
      throw ValidationError("polarization rotator needs both polarizations at " +
                            std::string(to_string(rot.site)));
    }
    step.modes.push_back(h);
    step.modes.push_back(v);
    blocks.push_back(block);
  }
  step.unitary = block_diagonal(blocks);
  return step;
}

Step plan(const Loss&, const ModeRegister&) {
  throw ValidationError("loss elements need density-matrix propagation");
}

Step plan_step(const OpticalElement& element, const ModeRegister& reg) {
  return std::visit([&](const auto& e) { return plan(e, reg); }, element);
}

template <typename State>
State apply_pure(const std::vector<OpticalElement>& elements, State state) {
  for (const auto& element : elements) {
    Step step = plan_step(element, state.modes());
    if (!step.modes.empty()) state = apply_mode_unitary(state, step.modes, step.unitary);
    if (step.relabel) state = relabel(state, step.relabel);
  }
  return state;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

std::string_view element_kind(const OpticalElement& element) {
  struct Visitor {
    std::string_view operator()(const BeamSplitter&) const { return "BeamSplitter"; }
    std::string_view operator()(const PolarizingBS&) const { return "PolarizingBS"; }
    std::string_view operator()(const PhaseShifter&) const { return "PhaseShifter"; }
    std::string_view operator()(const PolarizationRotator&) const { return "PolarizationRotator"; }
    std::string_view operator()(const Loss&) const { return "Loss"; }
  };
  return std::visit(Visitor{}, element);
}

OpticalCircuit::OpticalCircuit(std::vector<OpticalElement> elements) {
  for (auto& e : elements) add(std::move(e));
}

OpticalCircuit& OpticalCircuit::add(OpticalElement element) {
  validate_element(element);
  elements_.push_back(std::move(element));
  return *this;
}

PhotonicState OpticalCircuit::apply(const PhotonicState& state) const {
  return apply_pure(elements_, state);
}

JointState OpticalCircuit::apply(const JointState& state) const {
  return apply_pure(elements_, state);
}

DensityMatrix OpticalCircuit::apply(const DensityMatrix& rho) const {
  DensityMatrix out = rho;
  for (const auto& element : elements_) {
    if (const auto* loss = std::get_if<Loss>(&element)) {
      const auto labels = out.photon_basis()->modes().labels();
      for (const auto& l : labels) {
        if (l.site == loss->site && (!loss->pol || *loss->pol == l.pol)) {
          out = apply_loss(out, l, loss->survival);
        }
      }
      continue;
    }
    if (!out.photon_basis()) throw ValidationError("optical circuit needs a photon factor");
    Step step = plan_step(element, out.photon_basis()->modes());
    if (!step.modes.empty()) out = apply_mode_unitary(out, step.modes, step.unitary);
    if (step.relabel) out = relabel(out, step.relabel);
  }
  return out;
}

OpticalCircuit build_bell_analyzer() {
  OpticalCircuit circuit;
  circuit.add(BeamSplitter{{Site::A, Site::B}, {Site::C, Site::D}, 0.5, 0.0});
  circuit.add(PolarizingBS{Site::C, Site::D1, Site::D2});
  circuit.add(PolarizingBS{Site::D, Site::D4, Site::D3});
  return circuit;
}

DensityMatrix apply_loss(const DensityMatrix& rho, const ModeLabel& mode, double survival) {
  check_unit_interval(survival, "loss survival");
  if (!rho.photon_basis()) throw ValidationError("loss needs a photon factor");
  if (survival == 1.0) return rho;
  const FockBasis& basis = *rho.photon_basis();
  const std::size_t m = basis.modes().index_of(mode);
  const std::size_t nf = basis.size();

  // Kraus branch k (k photons lost): |n> -> sqrt(C(n,k) p^(n-k) (1-p)^k) |n-k>.
  std::vector<std::vector<std::pair<std::size_t, double>>> branches(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    const int n = basis[f].occupations[m];
    for (int k = 0; k <= n; ++k) {
      FockState g = basis[f];
      g.occupations[m] -= k;
      const double c = std::sqrt(binomial(n, k) * std::pow(survival, n - k) *
                                 std::pow(1.0 - survival, k));
      branches[f].emplace_back(basis.index_of(g), c);
    }
  }

  const int ni = rho.ion_dim();
  const auto& in = rho.matrix();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(in.rows(), in.cols());
  for (std::size_t f = 0; f < nf; ++f) {
    for (std::size_t g = 0; g < nf; ++g) {
      const std::size_t kmax = std::min(branches[f].size(), branches[g].size());
      for (std::size_t k = 0; k < kmax; ++k) {
        const auto [tf, cf] = branches[f][k];
        const auto [tg, cg] = branches[g][k];
        const double c = cf * cg;
        if (c == 0.0) continue;
        for (int i = 0; i < ni; ++i)
          for (int j = 0; j < ni; ++j)
            out(rho.index(i, tf), rho.index(j, tg)) += c * in(rho.index(i, f), rho.index(j, g));
      }
    }
  }
  return DensityMatrix(std::move(out), rho.kind(), rho.photon_basis());
}

void validate(const Detector& d) {
  check_unit_interval(d.efficiency, "detector efficiency");
  if (!(d.dark_count_prob >= 0.0 && d.dark_count_prob < 1.0)) {
    throw ValidationError("dark count probability must lie in [0, 1)");
  }
}

int ClickPattern::firing() const {
  int n = 0;
  for (int c : counts) n += c > 0 ? 1 : 0;
  return n;
}

std::string_view to_string(HeraldClass herald) {
  switch (herald) {
    case HeraldClass::PsiMinus: return "PsiMinus";
    case HeraldClass::PsiPlus: return "PsiPlus";
    case HeraldClass::PhiOrUnusable: return "PhiOrUnusable";
    case HeraldClass::NoHerald: return "NoHerald";
  }
  return "?";
}

HeraldClass classify_pattern(const ClickPattern& pattern) {
  const auto& c = pattern.counts;
  const int firing = pattern.firing();
  if (firing == 0) return HeraldClass::NoHerald;
  if (firing == 1) {
    for (int n : c) {
      if (n >= 2) return HeraldClass::PhiOrUnusable;
    }
    return HeraldClass::NoHerald;
  }
  if (firing == 2) {
    const bool d1 = c[0] > 0, d2 = c[1] > 0, d3 = c[2] > 0, d4 = c[3] > 0;
    if ((d1 && d3) || (d2 && d4)) return HeraldClass::PsiMinus;
    if ((d1 && d2) || (d3 && d4)) return HeraldClass::PsiPlus;
  }
  return HeraldClass::PhiOrUnusable;
}

std::vector<MeasurementOutcome> measure(const DensityMatrix& rho, const DetectorBank& detectors) {
  for (const auto& d : detectors) validate(d);
  if (!rho.photon_basis()) throw ValidationError("measurement needs a photon factor");
  const FockBasis& basis = *rho.photon_basis();
  const ModeRegister& reg = basis.modes();

  std::vector<int> detector_of(reg.size(), -1);
  for (std::size_t i = 0; i < reg.size(); ++i) {
    for (std::size_t k = 0; k < kDetectorSites.size(); ++k) {
      if (reg[i].site == kDetectorSites[k]) detector_of[i] = static_cast<int>(k);
    }
    if (detector_of[i] < 0) {
      throw ValidationError("mode " + to_string(reg[i]) + " is not attached to a detector");
    }
  }

  struct Accumulator {
    double probability = 0.0;
    Eigen::MatrixXcd ions;
  };
  const int ni = rho.ion_dim();
  std::map<ClickPattern, Accumulator> acc;

  for (std::size_t f = 0; f < basis.size(); ++f) {
    Eigen::MatrixXcd block(ni, ni);
    for (int i = 0; i < ni; ++i)
      for (int j = 0; j < ni; ++j) block(i, j) = rho.matrix()(rho.index(i, f), rho.index(j, f));
    const double weight = block.trace().real();
    if (weight == 0.0) continue;

    std::array<int, 4> photons{};
    for (std::size_t i = 0; i < reg.size(); ++i) photons[detector_of[i]] += basis[f].occupations[i];

    // Reported-count distribution per detector.
    std::array<std::map<int, double>, 4> reported;
    for (std::size_t k = 0; k < 4; ++k) {
      const Detector& d = detectors[k];
      const int n = photons[k];
      for (int detected = 0; detected <= n; ++detected) {
        const double p_det = binomial(n, detected) * std::pow(d.efficiency, detected) *
                             std::pow(1.0 - d.efficiency, n - detected);
        for (int dark = 0; dark <= 1; ++dark) {
          const double p = p_det * (dark ? d.dark_count_prob : 1.0 - d.dark_count_prob);
          if (p == 0.0) continue;
          const int total = detected + dark;
          const int shown = d.number_resolving ? std::min(total, 2) : std::min(total, 1);
          reported[k][shown] += p;
        }
      }
    }

    for (const auto& [c0, p0] : reported[0])
      for (const auto& [c1, p1] : reported[1])
        for (const auto& [c2, p2] : reported[2])
          for (const auto& [c3, p3] : reported[3]) {
            const double p = p0 * p1 * p2 * p3;
            auto& slot = acc[ClickPattern{{c0, c1, c2, c3}}];
            if (slot.ions.size() == 0) slot.ions = Eigen::MatrixXcd::Zero(ni, ni);
            slot.probability += p * weight;
            slot.ions += p * block;
          }
  }

  std::vector<MeasurementOutcome> out;
  for (auto& [pattern, a] : acc) {
    if (!(a.probability > 0.0)) continue;
    MeasurementOutcome o{pattern, a.probability, std::nullopt};
    if (rho.kind() == Subsystem::Joint) {
      o.ion_state = DensityMatrix(a.ions / a.ions.trace().real(), Subsystem::Ions);
    }
    out.push_back(std::move(o));
  }
  return out;
}

double hom_coincidence_probability(double overlap) {
  check_unit_interval(overlap, "wavepacket overlap");
  const std::array<int, 2> bins{0, 1};
  const ModeRegister reg = source_register(bins);
  PhotonicState state = vacuum_state(reg);
  state = apply_creation(state, ModeLabel{Site::B, Polarization::H, 0});
  PhotonicState shared = apply_creation(state, ModeLabel{Site::A, Polarization::H, 0});
  PhotonicState separate = apply_creation(state, ModeLabel{Site::A, Polarization::H, 1});
  PhotonicState input(reg);
  const double rest = std::sqrt(std::max(0.0, 1.0 - overlap * overlap));
  for (const auto& [k, a] : shared.terms()) input.add(k, overlap * a);
  for (const auto& [k, a] : separate.terms()) input.add(k, rest * a);

  const OpticalCircuit splitter({BeamSplitter{}});
  const PhotonicState output = splitter.apply(input);
  const auto c_modes = output.modes().indices_at(Site::C);
  const auto d_modes = output.modes().indices_at(Site::D);
  double coincidence = 0.0;
  for (const auto& [fock, amp] : output.terms()) {
    int nc = 0, nd = 0;
    for (auto i : c_modes) nc += fock.occupations[i];
    for (auto i : d_modes) nd += fock.occupations[i];
    if (nc == 1 && nd == 1) coincidence += std::norm(amp);
  }
  return coincidence;
}

}  // namespace ionlink
