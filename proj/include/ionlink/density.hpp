#pragma once

#include "ionlink/fock.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <memory>
#include <span>
#include <vector>

namespace ionlink {

// All Fock states of a register with at most max_photons photons, ordered by
// total photon number, then lexicographically descending in the occupations.
class FockBasis {
 public:
  FockBasis(ModeRegister modes, int max_photons = kDefaultMaxPhotons);

  const ModeRegister& modes() const { return modes_; }
  int max_photons() const { return max_photons_; }
  std::size_t size() const { return states_.size(); }
  const FockState& operator[](std::size_t i) const { return states_[i]; }
  const std::vector<FockState>& states() const { return states_; }

  std::optional<std::size_t> find(const FockState& state) const;
  std::size_t index_of(const FockState& state) const;

 private:
  ModeRegister modes_;
  int max_photons_;
  std::vector<FockState> states_;
  std::map<FockState, std::size_t> index_;
};

using FockBasisPtr = std::shared_ptr<const FockBasis>;

enum class Subsystem { Ions, Photons, Joint };

using SparseMatrixXcd = Eigen::SparseMatrix<Complex>;

// Density operator over the ion register, a photon Fock basis, or their
// tensor product (ion index major: row = ion * nfock + fock).
class DensityMatrix {
 public:
  DensityMatrix(Eigen::MatrixXcd rho, Subsystem kind, FockBasisPtr photons = nullptr);

  static DensityMatrix from_ion_vector(const Eigen::Vector4cd& psi);
  static DensityMatrix from_pure(const PhotonicState& state);
  static DensityMatrix from_pure(const JointState& state);
  static DensityMatrix maximally_mixed_ions();

  const Eigen::MatrixXcd& matrix() const { return rho_; }
  Subsystem kind() const { return kind_; }
  const FockBasisPtr& photon_basis() const { return photons_; }

  Eigen::Index dim() const { return rho_.rows(); }
  int ion_dim() const { return kind_ == Subsystem::Photons ? 1 : kIonDim; }
  std::size_t fock_dim() const { return photons_ ? photons_->size() : 1; }
  Eigen::Index index(int ion, std::size_t fock) const {
    return static_cast<Eigen::Index>(ion * fock_dim() + fock);
  }

  double trace() const { return rho_.trace().real(); }
  bool is_hermitian(double tol = 1e-12) const;
  DensityMatrix normalized() const;
  DensityMatrix scaled(double weight) const;

 private:
  Eigen::MatrixXcd rho_;
  Subsystem kind_;
  FockBasisPtr photons_;
};

Eigen::VectorXcd to_vector(const PhotonicState& state, const FockBasis& basis);
Eigen::VectorXcd to_vector(const JointState& state, const FockBasis& basis);

// Which factor to keep. `Modes` keeps the ions (for joint states) and the
// listed photon modes, tracing all other modes.
struct TraceSelector {
  enum class Kind { Ions, Photons, All, Modes };
  Kind kind = Kind::All;
  std::vector<ModeLabel> modes;

  static TraceSelector ions() { return {Kind::Ions, {}}; }
  static TraceSelector photons() { return {Kind::Photons, {}}; }
  static TraceSelector all() { return {Kind::All, {}}; }
  static TraceSelector keep_modes(std::vector<ModeLabel> modes) {
    return {Kind::Modes, std::move(modes)};
  }
};

DensityMatrix partial_trace(const DensityMatrix& rho, const TraceSelector& keep);
DensityMatrix partial_trace(const JointState& state, const TraceSelector& keep);

// <target| rho |target>.
double fidelity(const DensityMatrix& rho, const Eigen::VectorXcd& target);

// (1/2) || a - b ||_1 for density matrices of equal shape.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

// Sparse Fock-space operator of a mode unitary over the full truncated basis.
SparseMatrixXcd lift_unitary(const FockBasis& basis, std::span<const ModeLabel> modes,
                             const Eigen::MatrixXcd& u);

DensityMatrix apply_mode_unitary(const DensityMatrix& rho, std::span<const ModeLabel> modes,
                                 const Eigen::MatrixXcd& u);

// Re-expresses rho over a larger register (extra modes in vacuum).
DensityMatrix embed(const DensityMatrix& rho, const ModeRegister& target);

DensityMatrix relabel(const DensityMatrix& rho,
                      const std::function<ModeLabel(const ModeLabel&)>& fn);

enum class BellState { PsiMinus, PsiPlus, PhiPlus, PhiMinus };

std::string_view to_string(BellState state);

// Ion Bell state, psi = (|s1 s2> +- |s2 s1>)/sqrt(2), phi = (|s1 s1> +- |s2 s2>)/sqrt(2).
Eigen::Vector4cd ion_bell_state(BellState state);

// Photon Bell state over source modes (A|B, H|V, `bin`) in `modes`:
// psi = (a1 b2 +- a2 b1)|0>/sqrt(2), phi = (a1 b1 +- a2 b2)|0>/sqrt(2).
PhotonicState photon_bell_state(BellState state, const ModeRegister& modes, int bin = 0);

}  // namespace ionlink
