#include "ionlink/density.hpp"

#include "ionlink/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace ionlink {

namespace {

void enumerate(std::size_t mode, int remaining, std::vector<int>& occ,
               std::vector<FockState>& out) {
  if (mode == occ.size()) {
    out.push_back(FockState{occ});
    return;
  }
  for (int n = remaining; n >= 0; --n) {
    occ[mode] = n;
    enumerate(mode + 1, remaining - n, occ, out);
  }
  occ[mode] = 0;
}

void require_photons(const DensityMatrix& rho, const char* what) {
  if (rho.kind() == Subsystem::Ions || !rho.photon_basis()) {
    throw ValidationError(std::string(what) + " needs a density matrix with a photon factor");
  }
}

}  // namespace

FockBasis::FockBasis(ModeRegister modes, int max_photons)
    : modes_(std::move(modes)), max_photons_(max_photons) {
  if (max_photons < 0) throw ValidationError("negative photon cap");
  for (int total = 0; total <= max_photons; ++total) {
    std::vector<FockState> sector;
    std::vector<int> occ(modes_.size(), 0);
    if (modes_.size() == 0) {
      if (total == 0) sector.push_back(FockState{});
    } else {
      enumerate(0, total, occ, sector);
      std::erase_if(sector, [total](const FockState& f) { return f.total() != total; });
    }
    for (auto& f : sector) states_.push_back(std::move(f));
  }
  for (std::size_t i = 0; i < states_.size(); ++i) index_.emplace(states_[i], i);
}

std::optional<std::size_t> FockBasis::find(const FockState& state) const {
  auto it = index_.find(state);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t FockBasis::index_of(const FockState& state) const {
  if (auto i = find(state)) return *i;
  throw CapacityError("Fock state outside the truncated basis");
}

DensityMatrix::DensityMatrix(Eigen::MatrixXcd rho, Subsystem kind, FockBasisPtr photons)
    : rho_(std::move(rho)), kind_(kind), photons_(std::move(photons)) {
  if (kind_ != Subsystem::Ions && !photons_) {
    throw ValidationError("photon or joint density matrix needs a Fock basis");
  }
  if (kind_ == Subsystem::Ions) photons_.reset();
  const auto expected = static_cast<Eigen::Index>(ion_dim() * fock_dim());
  if (rho_.rows() != expected || rho_.cols() != expected) {
    throw ValidationError("density matrix shape does not match its basis");
  }
}

DensityMatrix DensityMatrix::from_ion_vector(const Eigen::Vector4cd& psi) {
  return DensityMatrix(psi * psi.adjoint(), Subsystem::Ions);
}

DensityMatrix DensityMatrix::from_pure(const PhotonicState& state) {
  auto basis = std::make_shared<const FockBasis>(state.modes(), state.max_photons());
  const Eigen::VectorXcd v = to_vector(state, *basis);
  return DensityMatrix(v * v.adjoint(), Subsystem::Photons, std::move(basis));
}

DensityMatrix DensityMatrix::from_pure(const JointState& state) {
  auto basis = std::make_shared<const FockBasis>(state.modes(), state.max_photons());
  const Eigen::VectorXcd v = to_vector(state, *basis);
  return DensityMatrix(v * v.adjoint(), Subsystem::Joint, std::move(basis));
}

DensityMatrix DensityMatrix::maximally_mixed_ions() {
  return DensityMatrix(Eigen::Matrix4cd::Identity() / 4.0, Subsystem::Ions);
}

bool DensityMatrix::is_hermitian(double tol) const {
  return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() < tol;
}

DensityMatrix DensityMatrix::normalized() const {
  const double t = trace();
  if (!(t > 0.0)) throw ValidationError("cannot renormalize a density matrix with zero trace");
  return scaled(1.0 / t);
}

DensityMatrix DensityMatrix::scaled(double weight) const {
  return DensityMatrix(rho_ * weight, kind_, photons_);
}

Eigen::VectorXcd to_vector(const PhotonicState& state, const FockBasis& basis) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
  for (const auto& [fock, amp] : state.terms()) v(basis.index_of(fock)) = amp;
  return v;
}

Eigen::VectorXcd to_vector(const JointState& state, const FockBasis& basis) {
  const auto nf = static_cast<Eigen::Index>(basis.size());
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(kIonDim * nf);
  for (const auto& [key, amp] : state.terms()) {
    v(key.ions.index() * nf + basis.index_of(key.fock)) = amp;
  }
  return v;
}

DensityMatrix partial_trace(const DensityMatrix& rho, const TraceSelector& keep) {
  using Kind = TraceSelector::Kind;
  const auto& m = rho.matrix();
  switch (keep.kind) {
    case Kind::All:
      return rho;
    case Kind::Ions: {
      if (rho.kind() == Subsystem::Ions) return rho;
      if (rho.kind() != Subsystem::Joint) throw ValidationError("no ion factor to keep");
      Eigen::Matrix4cd out = Eigen::Matrix4cd::Zero();
      const auto nf = rho.fock_dim();
      for (int i = 0; i < kIonDim; ++i)
        for (int j = 0; j < kIonDim; ++j)
          for (std::size_t f = 0; f < nf; ++f) out(i, j) += m(rho.index(i, f), rho.index(j, f));
      return DensityMatrix(out, Subsystem::Ions);
    }
    case Kind::Photons: {
      if (rho.kind() == Subsystem::Photons) return rho;
      if (rho.kind() != Subsystem::Joint) throw ValidationError("no photon factor to keep");
      const auto nf = static_cast<Eigen::Index>(rho.fock_dim());
      Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(nf, nf);
      for (int i = 0; i < kIonDim; ++i) out += m.block(i * nf, i * nf, nf, nf);
      return DensityMatrix(out, Subsystem::Photons, rho.photon_basis());
    }
    case Kind::Modes:
      break;
  }

  require_photons(rho, "mode partial trace");
  const FockBasis& basis = *rho.photon_basis();
  const ModeRegister& reg = basis.modes();
  std::vector<bool> kept(reg.size(), false);
  for (const auto& label : keep.modes) kept[reg.index_of(label)] = true;
  std::vector<ModeLabel> kept_labels;
  for (std::size_t i = 0; i < reg.size(); ++i) {
    if (kept[i]) kept_labels.push_back(reg[i]);
  }
  auto out_basis = std::make_shared<const FockBasis>(ModeRegister(kept_labels),
                                                     basis.max_photons());

  // Group basis states by their traced-mode occupations.
  std::map<std::vector<int>, std::vector<std::pair<std::size_t, std::size_t>>> groups;
  for (std::size_t f = 0; f < basis.size(); ++f) {
    std::vector<int> k_occ, t_occ;
    for (std::size_t i = 0; i < reg.size(); ++i) {
      (kept[i] ? k_occ : t_occ).push_back(basis[f].occupations[i]);
    }
    groups[t_occ].emplace_back(f, out_basis->index_of(FockState{k_occ}));
  }

  const int ni = rho.ion_dim();
  const auto nk = out_basis->size();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(ni * nk, ni * nk);
  for (const auto& [traced, members] : groups) {
    for (const auto& [f, kf] : members)
      for (const auto& [g, kg] : members)
        for (int i = 0; i < ni; ++i)
          for (int j = 0; j < ni; ++j)
            out(i * nk + kf, j * nk + kg) += m(rho.index(i, f), rho.index(j, g));
  }
  return DensityMatrix(std::move(out), rho.kind(), std::move(out_basis));
}

DensityMatrix partial_trace(const JointState& state, const TraceSelector& keep) {
  return partial_trace(DensityMatrix::from_pure(state), keep);
}

double fidelity(const DensityMatrix& rho, const Eigen::VectorXcd& target) {
  if (target.size() != rho.dim()) throw ValidationError("fidelity target dimension mismatch");
  return target.dot(rho.matrix() * target).real();
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw ValidationError("trace distance dimension mismatch");
  const Eigen::MatrixXcd diff = a.matrix() - b.matrix();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (diff + diff.adjoint()),
                                                     Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

SparseMatrixXcd lift_unitary(const FockBasis& basis, std::span<const ModeLabel> modes,
                             const Eigen::MatrixXcd& u) {
  std::vector<Eigen::Triplet<Complex>> triplets;
  for (std::size_t f = 0; f < basis.size(); ++f) {
    PhotonicState column(basis.modes(), basis.max_photons());
    column.add(basis[f], 1.0);
    const PhotonicState image = apply_mode_unitary(column, modes, u);
    for (const auto& [fock, amp] : image.terms()) {
      triplets.emplace_back(static_cast<int>(basis.index_of(fock)), static_cast<int>(f), amp);
    }
  }
  const auto n = static_cast<Eigen::Index>(basis.size());
  SparseMatrixXcd w(n, n);
  w.setFromTriplets(triplets.begin(), triplets.end());
  return w;
}

DensityMatrix apply_mode_unitary(const DensityMatrix& rho, std::span<const ModeLabel> modes,
                                 const Eigen::MatrixXcd& u) {
  require_photons(rho, "mode unitary");
  const SparseMatrixXcd w = lift_unitary(*rho.photon_basis(), modes, u);
  SparseMatrixXcd full = w;
  if (rho.kind() == Subsystem::Joint) {
    const auto nf = w.rows();
    std::vector<Eigen::Triplet<Complex>> triplets;
    for (int i = 0; i < kIonDim; ++i)
      for (Eigen::Index c = 0; c < w.outerSize(); ++c)
        for (SparseMatrixXcd::InnerIterator it(w, c); it; ++it)
          triplets.emplace_back(static_cast<int>(i * nf + it.row()),
                                static_cast<int>(i * nf + it.col()), it.value());
    full = SparseMatrixXcd(kIonDim * nf, kIonDim * nf);
    full.setFromTriplets(triplets.begin(), triplets.end());
  }
  Eigen::MatrixXcd left = full * rho.matrix();
  Eigen::MatrixXcd out = (full * left.adjoint()).adjoint();
  return DensityMatrix(std::move(out), rho.kind(), rho.photon_basis());
}

DensityMatrix embed(const DensityMatrix& rho, const ModeRegister& target) {
  require_photons(rho, "embedding");
  const FockBasis& from = *rho.photon_basis();
  auto to = std::make_shared<const FockBasis>(target, from.max_photons());
  std::vector<std::size_t> map(from.size());
  for (std::size_t f = 0; f < from.size(); ++f) {
    FockState g = vacuum(target.size());
    for (std::size_t i = 0; i < from.modes().size(); ++i) {
      const int n = from[f].occupations[i];
      if (n == 0) continue;
      auto t = target.find(from.modes()[i]);
      if (!t) throw ValidationError("mode " + to_string(from.modes()[i]) + " missing from target");
      g.occupations[*t] = n;
    }
    map[f] = to->index_of(g);
  }
  const int ni = rho.ion_dim();
  const auto nt = to->size();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(ni * nt, ni * nt);
  for (int i = 0; i < ni; ++i)
    for (int j = 0; j < ni; ++j)
      for (std::size_t f = 0; f < from.size(); ++f)
        for (std::size_t g = 0; g < from.size(); ++g)
          out(i * nt + map[f], j * nt + map[g]) = rho.matrix()(rho.index(i, f), rho.index(j, g));
  return DensityMatrix(std::move(out), rho.kind(), std::move(to));
}

DensityMatrix relabel(const DensityMatrix& rho,
                      const std::function<ModeLabel(const ModeLabel&)>& fn) {
  require_photons(rho, "relabeling");
  const FockBasis& from = *rho.photon_basis();
  auto to = std::make_shared<const FockBasis>(from.modes().relabeled(fn), from.max_photons());
  return DensityMatrix(rho.matrix(), rho.kind(), std::move(to));
}

std::string_view to_string(BellState state) {
  switch (state) {
    case BellState::PsiMinus: return "psi-";
    case BellState::PsiPlus: return "psi+";
    case BellState::PhiPlus: return "phi+";
    case BellState::PhiMinus: return "phi-";
  }
  return "?";
}

Eigen::Vector4cd ion_bell_state(BellState state) {
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
  const int s11 = IonPair{IonLevel::S1, IonLevel::S1}.index();
  const int s12 = IonPair{IonLevel::S1, IonLevel::S2}.index();
  const int s21 = IonPair{IonLevel::S2, IonLevel::S1}.index();
  const int s22 = IonPair{IonLevel::S2, IonLevel::S2}.index();
  switch (state) {
    case BellState::PsiMinus: v(s12) = r; v(s21) = -r; break;
    case BellState::PsiPlus: v(s12) = r; v(s21) = r; break;
    case BellState::PhiPlus: v(s11) = r; v(s22) = r; break;
    case BellState::PhiMinus: v(s11) = r; v(s22) = -r; break;
  }
  return v;
}

PhotonicState photon_bell_state(BellState state, const ModeRegister& modes, int bin) {
  const ModeLabel a1{Site::A, Polarization::H, bin}, a2{Site::A, Polarization::V, bin};
  const ModeLabel b1{Site::B, Polarization::H, bin}, b2{Site::B, Polarization::V, bin};
  const PhotonicState vac = vacuum_state(modes);
  auto pair = [&](const ModeLabel& x, const ModeLabel& y) {
    return apply_creation(apply_creation(vac, x), y);
  };
  const bool psi = state == BellState::PsiMinus || state == BellState::PsiPlus;
  const double sign = (state == BellState::PsiMinus || state == BellState::PhiMinus) ? -1.0 : 1.0;
  const PhotonicState first = psi ? pair(a1, b2) : pair(a1, b1);
  const PhotonicState second = psi ? pair(a2, b1) : pair(a2, b2);
  PhotonicState out(modes);
  const double r = 1.0 / std::sqrt(2.0);
  for (const auto& [k, amp] : first.terms()) out.add(k, r * amp);
  for (const auto& [k, amp] : second.terms()) out.add(k, sign * r * amp);
  return out;
}

}  // namespace ionlink
