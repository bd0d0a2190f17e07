#include "ionlink/fock.hpp"

#include "ionlink/errors.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numeric>
#include <set>

namespace ionlink {

namespace {

constexpr std::array<std::string_view, 9> kSiteNames = {"A",  "B",  "C",  "D",  "D1",
                                                        "D2", "D3", "D4", "ENV"};

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

}  // namespace

std::string_view to_string(Site site) { return kSiteNames.at(static_cast<std::size_t>(site)); }

Site site_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kSiteNames.size(); ++i) {
    if (kSiteNames[i] == name) return static_cast<Site>(i);
  }
  throw ValidationError("unknown site '" + std::string(name) + "'");
}

std::string to_string(const ModeLabel& mode) {
  return std::string(to_string(mode.site)) + (mode.pol == Polarization::H ? "1" : "2") + "@" +
         std::to_string(mode.bin);
}

ModeRegister::ModeRegister(std::vector<ModeLabel> labels) : labels_(std::move(labels)) {
  if (labels_.size() > kMaxModes) {
    throw ValidationError("mode register holds " + std::to_string(labels_.size()) +
                          " modes, limit is " + std::to_string(kMaxModes));
  }
  std::set<ModeLabel> seen(labels_.begin(), labels_.end());
  if (seen.size() != labels_.size()) throw ValidationError("duplicate mode label in register");
}

std::optional<std::size_t> ModeRegister::find(const ModeLabel& mode) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == mode) return i;
  }
  return std::nullopt;
}

std::size_t ModeRegister::index_of(const ModeLabel& mode) const {
  if (auto i = find(mode)) return *i;
  throw ValidationError("mode " + to_string(mode) + " not in register");
}

std::vector<std::size_t> ModeRegister::indices_at(Site site) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].site == site) out.push_back(i);
  }
  return out;
}

ModeRegister ModeRegister::relabeled(
    const std::function<ModeLabel(const ModeLabel&)>& fn) const {
  std::vector<ModeLabel> out;
  out.reserve(labels_.size());
  for (const auto& l : labels_) out.push_back(fn(l));
  return ModeRegister(std::move(out));
}

ModeRegister source_register(std::span<const int> bins) {
  std::vector<int> use(bins.begin(), bins.end());
  if (use.empty()) use.push_back(0);
  std::vector<ModeLabel> labels;
  for (Site site : {Site::A, Site::B}) {
    for (int bin : use) {
      labels.push_back({site, Polarization::H, bin});
      labels.push_back({site, Polarization::V, bin});
    }
  }
  return ModeRegister(std::move(labels));
}

int FockState::total() const { return std::accumulate(occupations.begin(), occupations.end(), 0); }

FockState vacuum(std::size_t modes) { return FockState{std::vector<int>(modes, 0)}; }

IonPair IonPair::from_index(int index) {
  if (index < 0 || index >= kIonDim) throw ValidationError("ion index out of range");
  return {static_cast<IonLevel>(index / 2), static_cast<IonLevel>(index % 2)};
}

template <typename Key>
void SparseState<Key>::add(const Key& key, Complex value) {
  const FockState& fock = fock_of(key);
  if (fock.occupations.size() != modes_.size()) {
    throw ValidationError("Fock state length does not match the mode register");
  }
  for (int n : fock.occupations) {
    if (n < 0) throw ValidationError("negative occupation");
  }
  if (fock.total() > max_photons_) {
    throw CapacityError("photon number " + std::to_string(fock.total()) + " exceeds cap " +
                        std::to_string(max_photons_));
  }
  auto [it, inserted] = terms_.try_emplace(key, Complex{});
  it->second += value;
  if (std::abs(it->second) < kDropTolerance) terms_.erase(it);
}

template <typename Key>
SparseState<Key> SparseState<Key>::normalized() const {
  const double n = std::sqrt(norm_squared());
  if (n == 0.0) throw ValidationError("cannot normalize a zero state");
  return scaled(1.0 / n);
}

template <typename Key>
SparseState<Key> SparseState<Key>::scaled(Complex factor) const {
  SparseState out(modes_, max_photons_);
  for (const auto& [key, amp] : terms_) out.add(key, amp * factor);
  return out;
}

template class SparseState<FockState>;
template class SparseState<JointKey>;

PhotonicState vacuum_state(const ModeRegister& modes, int max_photons) {
  PhotonicState out(modes, max_photons);
  out.add(vacuum(modes.size()), 1.0);
  return out;
}

template <typename Key>
SparseState<Key> apply_creation(const SparseState<Key>& state, const ModeLabel& mode) {
  const std::size_t m = state.modes().index_of(mode);
  SparseState<Key> out(state.modes(), state.max_photons());
  for (const auto& [key, amp] : state.terms()) {
    FockState fock = fock_of(key);
    const int n = fock.occupations[m];
    fock.occupations[m] = n + 1;
    out.add(with_fock(key, std::move(fock)), amp * std::sqrt(static_cast<double>(n + 1)));
  }
  return out;
}

bool is_unitary(const Eigen::MatrixXcd& u, double tol) {
  if (u.rows() != u.cols()) return false;
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(u.rows(), u.cols());
  return (u.adjoint() * u - id).cwiseAbs().maxCoeff() < tol;
}

template <typename Key>
SparseState<Key> apply_mode_unitary(const SparseState<Key>& state,
                                    std::span<const ModeLabel> modes,
                                    const Eigen::MatrixXcd& u) {
  const auto k = static_cast<Eigen::Index>(modes.size());
  if (u.rows() != k || u.cols() != k) {
    throw ValidationError("unitary size does not match the number of modes");
  }
  if (k > 0 && !is_unitary(u)) throw ValidationError("mode transformation is not unitary");

  std::vector<std::size_t> idx;
  for (const auto& label : modes) idx.push_back(state.modes().index_of(label));
  if (std::set<std::size_t>(idx.begin(), idx.end()).size() != idx.size()) {
    throw ValidationError("unitary acts on a repeated mode");
  }

  SparseState<Key> out(state.modes(), state.max_photons());
  for (const auto& [key, amp] : state.terms()) {
    const FockState& in = fock_of(key);
    FockState rest = in;
    std::vector<Eigen::Index> creators;  // local mode position per creation operator
    double norm = 1.0;
    for (Eigen::Index p = 0; p < k; ++p) {
      const int n = in.occupations[idx[p]];
      for (int c = 0; c < n; ++c) creators.push_back(p);
      norm *= factorial(n);
      rest.occupations[idx[p]] = 0;
    }
    const Complex prefactor = amp / std::sqrt(norm);

    // Enumerate every assignment of creation operators to output modes.
    const std::size_t m = creators.size();
    std::vector<Eigen::Index> choice(m, 0);
    while (true) {
      Complex coeff = prefactor;
      FockState target = rest;
      for (std::size_t t = 0; t < m; ++t) {
        coeff *= u(creators[t], choice[t]);
        target.occupations[idx[choice[t]]] += 1;
      }
      if (coeff != Complex{}) {
        double out_norm = 1.0;
        for (Eigen::Index p = 0; p < k; ++p) out_norm *= factorial(target.occupations[idx[p]]);
        out.add(with_fock(key, std::move(target)), coeff * std::sqrt(out_norm));
      }
      std::size_t t = 0;
      while (t < m && ++choice[t] == k) choice[t++] = 0;
      if (t == m) break;
    }
  }
  return out;
}

template <typename Key>
SparseState<Key> embed(const SparseState<Key>& state, const ModeRegister& target) {
  std::vector<std::optional<std::size_t>> map;
  for (const auto& label : state.modes().labels()) map.push_back(target.find(label));
  SparseState<Key> out(target, state.max_photons());
  for (const auto& [key, amp] : state.terms()) {
    FockState fock = vacuum(target.size());
    const auto& occ = fock_of(key).occupations;
    for (std::size_t i = 0; i < occ.size(); ++i) {
      if (occ[i] == 0) continue;
      if (!map[i]) {
        throw ValidationError("occupied mode " + to_string(state.modes()[i]) +
                              " missing from target register");
      }
      fock.occupations[*map[i]] = occ[i];
    }
    out.add(with_fock(key, std::move(fock)), amp);
  }
  return out;
}

template <typename Key>
SparseState<Key> relabel(const SparseState<Key>& state,
                         const std::function<ModeLabel(const ModeLabel&)>& fn) {
  SparseState<Key> out(state.modes().relabeled(fn), state.max_photons());
  for (const auto& [key, amp] : state.terms()) out.add(key, amp);
  return out;
}

template <typename Key>
Complex inner_product(const SparseState<Key>& bra, const SparseState<Key>& ket) {
  if (!(bra.modes() == ket.modes())) throw ValidationError("states live on different registers");
  Complex sum{};
  for (const auto& [key, amp] : ket.terms()) sum += std::conj(bra.amplitude(key)) * amp;
  return sum;
}

#define IONLINK_INSTANTIATE(Key)                                                              \
  template SparseState<Key> apply_creation(const SparseState<Key>&, const ModeLabel&);       \
  template SparseState<Key> apply_mode_unitary(const SparseState<Key>&,                      \
                                               std::span<const ModeLabel>,                   \
                                               const Eigen::MatrixXcd&);                     \
  template SparseState<Key> embed(const SparseState<Key>&, const ModeRegister&);             \
  template SparseState<Key> relabel(const SparseState<Key>&,                                 \
                                    const std::function<ModeLabel(const ModeLabel&)>&);      \
  template Complex inner_product(const SparseState<Key>&, const SparseState<Key>&);

IONLINK_INSTANTIATE(FockState)
IONLINK_INSTANTIATE(JointKey)

#undef IONLINK_INSTANTIATE

Eigen::Matrix2cd balanced_beam_splitter() {
  Eigen::Matrix2cd u;
  u << 1.0, 1.0, 1.0, -1.0;
  return u / std::sqrt(2.0);
}

}  // namespace ionlink
