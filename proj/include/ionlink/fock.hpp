#pragma once

// Sparse Fock-space states for a handful of optical modes, optionally
// tensored with the two-ion register |s1>,|s2> x |s1>,|s2>.
//
// Linear-optics convention: a mode unitary U acting on modes (m_0..m_{k-1})
// substitutes a_i^dag -> sum_j U(i, j) a_j^dag in every monomial. A single
// photon in m_i therefore ends up with amplitudes U.row(i).

#include <Eigen/Core>

#include <complex>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ionlink {

using Complex = std::complex<double>;

inline constexpr std::size_t kMaxModes = 16;
inline constexpr int kDefaultMaxPhotons = 2;
// Amplitudes below this magnitude are dropped from sparse maps.
inline constexpr double kDropTolerance = 1e-15;

enum class Site : std::uint8_t { A, B, C, D, D1, D2, D3, D4, ENV };

// Polarization index 1 and 2 of the emitted photon (a_1 / a_2).
enum class Polarization : std::uint8_t { H = 1, V = 2 };

std::string_view to_string(Site site);
Site site_from_string(std::string_view name);

struct ModeLabel {
  Site site = Site::A;
  Polarization pol = Polarization::H;
  int bin = 0;

  friend auto operator<=>(const ModeLabel&, const ModeLabel&) = default;
};

std::string to_string(const ModeLabel& mode);

// Ordered set of uniquely labeled modes; at most kMaxModes.
class ModeRegister {
 public:
  ModeRegister() = default;
  explicit ModeRegister(std::vector<ModeLabel> labels);

  std::size_t size() const { return labels_.size(); }
  const ModeLabel& operator[](std::size_t i) const { return labels_[i]; }
  const std::vector<ModeLabel>& labels() const { return labels_; }

  std::optional<std::size_t> find(const ModeLabel& mode) const;
  std::size_t index_of(const ModeLabel& mode) const;
  std::vector<std::size_t> indices_at(Site site) const;

  // Same mode ordering, new labels.
  ModeRegister relabeled(const std::function<ModeLabel(const ModeLabel&)>& fn) const;

  friend bool operator==(const ModeRegister&, const ModeRegister&) = default;

 private:
  std::vector<ModeLabel> labels_;
};

// Sites A and B with both polarizations in the given temporal bins.
ModeRegister source_register(std::span<const int> bins = {});

struct FockState {
  std::vector<int> occupations;

  int total() const;
  friend auto operator<=>(const FockState&, const FockState&) = default;
};

FockState vacuum(std::size_t modes);

enum class IonLevel : std::uint8_t { S1 = 0, S2 = 1 };

struct IonPair {
  IonLevel a = IonLevel::S1;
  IonLevel b = IonLevel::S1;

  // Row/column index in the 4-dimensional ion register: 2*a + b.
  int index() const { return 2 * static_cast<int>(a) + static_cast<int>(b); }
  static IonPair from_index(int index);

  friend auto operator<=>(const IonPair&, const IonPair&) = default;
};

inline constexpr int kIonDim = 4;

struct JointKey {
  IonPair ions;
  FockState fock;

  friend auto operator<=>(const JointKey&, const JointKey&) = default;
};

inline const FockState& fock_of(const FockState& key) { return key; }
inline const FockState& fock_of(const JointKey& key) { return key.fock; }
inline FockState with_fock(const FockState&, FockState fock) { return fock; }
inline JointKey with_fock(const JointKey& key, FockState fock) {
  return {key.ions, std::move(fock)};
}

// Sparse amplitude expansion over Key (a FockState, or ions + FockState).
template <typename Key>
class SparseState {
 public:
  using key_type = Key;
  using map_type = std::map<Key, Complex>;

  SparseState() = default;
  explicit SparseState(ModeRegister modes, int max_photons = kDefaultMaxPhotons)
      : modes_(std::move(modes)), max_photons_(max_photons) {}

  const ModeRegister& modes() const { return modes_; }
  int max_photons() const { return max_photons_; }
  const map_type& terms() const { return terms_; }
  std::size_t term_count() const { return terms_.size(); }

  Complex amplitude(const Key& key) const {
    auto it = terms_.find(key);
    return it == terms_.end() ? Complex{} : it->second;
  }

  // Accumulates into an entry; entries that cancel below kDropTolerance vanish.
  // Throws CapacityError or ValidationError for keys outside the truncated space.
  void add(const Key& key, Complex value);

  double norm_squared() const {
    double sum = 0.0;
    for (const auto& [key, amp] : terms_) sum += std::norm(amp);
    return sum;
  }

  SparseState normalized() const;
  SparseState scaled(Complex factor) const;

 private:
  ModeRegister modes_;
  int max_photons_ = kDefaultMaxPhotons;
  map_type terms_;
};

using PhotonicState = SparseState<FockState>;
using JointState = SparseState<JointKey>;

PhotonicState vacuum_state(const ModeRegister& modes, int max_photons = kDefaultMaxPhotons);

// a^dag on `mode`, bosonic factor sqrt(n+1); result is unnormalized.
template <typename Key>
SparseState<Key> apply_creation(const SparseState<Key>& state, const ModeLabel& mode);

bool is_unitary(const Eigen::MatrixXcd& u, double tol = 1e-10);

// Lifts the single-particle unitary on `modes` to the Fock space. Throws
// ValidationError when `u` is not unitary or its size does not match.
template <typename Key>
SparseState<Key> apply_mode_unitary(const SparseState<Key>& state,
                                    std::span<const ModeLabel> modes,
                                    const Eigen::MatrixXcd& u);

// Re-expresses the state over `target`, matching modes by label. Modes absent
// from `target` must be empty.
template <typename Key>
SparseState<Key> embed(const SparseState<Key>& state, const ModeRegister& target);

template <typename Key>
SparseState<Key> relabel(const SparseState<Key>& state,
                         const std::function<ModeLabel(const ModeLabel&)>& fn);

template <typename Key>
Complex inner_product(const SparseState<Key>& bra, const SparseState<Key>& ket);

// 50/50 beam splitter in the symmetric convention [[1, 1], [1, -1]] / sqrt(2).
Eigen::Matrix2cd balanced_beam_splitter();

}  // namespace ionlink
