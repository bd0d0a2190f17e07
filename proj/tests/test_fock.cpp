#include "doctest.h"

#include "ionlink/errors.hpp"
#include "ionlink/fock.hpp"

#include "support.hpp"

#include <map>

using namespace ionlink;

namespace {

const ModeLabel a1{Site::A, Polarization::H, 0};
const ModeLabel a2{Site::A, Polarization::V, 0};
const ModeLabel b1{Site::B, Polarization::H, 0};
const ModeLabel b2{Site::B, Polarization::V, 0};

FockState fock(std::vector<int> occ) { return FockState{std::move(occ)}; }

// Polynomials in two creation operators: exponents (i, j) -> coefficient.
using Poly = std::map<std::pair<int, int>, Complex>;

Poly multiply(const Poly& x, const Poly& y) {
  Poly out;
  for (const auto& [ex, cx] : x)
    for (const auto& [ey, cy] : y) out[{ex.first + ey.first, ex.second + ey.second}] += cx * cy;
  return out;
}

// c^i d^j |0> = sqrt(i! j!) |i, j>.
double monomial_norm(int i, int j) { return std::sqrt(std::tgamma(i + 1.0) * std::tgamma(j + 1.0)); }

}  // namespace

TEST_CASE("creation operators follow bosonic normalization") {
  const ModeRegister reg({a1, a2});
  const PhotonicState vac = vacuum_state(reg);
  const PhotonicState one = apply_creation(vac, a1);
  CHECK(one.amplitude(fock({1, 0})) == Complex(1.0));
  const PhotonicState two = apply_creation(one, a1);
  CHECK(std::abs(two.amplitude(fock({2, 0})) - std::sqrt(2.0)) < 1e-15);
}

TEST_CASE("a1 b2 creation on vacuum gives a normalized product") {
  const ModeRegister reg({a1, a2, b1, b2});
  const PhotonicState s = apply_creation(apply_creation(vacuum_state(reg), a1), b2);
  CHECK(s.term_count() == 1);
  CHECK(s.amplitude(fock({1, 0, 0, 1})) == Complex(1.0));
  CHECK(s.norm_squared() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("creation on distinct modes commutes exactly") {
  const ModeRegister reg({a1, a2, b1, b2});
  PhotonicState base(reg, 3);
  base.add(fock({1, 0, 0, 0}), Complex(0.6, 0.1));
  base.add(fock({0, 0, 1, 0}), Complex(-0.3, 0.7));
  for (const auto& x : reg.labels()) {
    for (const auto& y : reg.labels()) {
      const auto xy = apply_creation(apply_creation(base, x), y);
      const auto yx = apply_creation(apply_creation(base, y), x);
      CHECK(xy.terms() == yx.terms());
    }
  }
}

TEST_CASE("photon cap and register size are enforced") {
  const ModeRegister reg({a1});
  const PhotonicState two = apply_creation(apply_creation(vacuum_state(reg), a1), a1);
  CHECK_THROWS_AS(apply_creation(two, a1), CapacityError);

  std::vector<ModeLabel> many;
  for (int bin = 0; bin < 9; ++bin) {
    many.push_back({Site::A, Polarization::H, bin});
    many.push_back({Site::A, Polarization::V, bin});
  }
  CHECK_THROWS_AS(ModeRegister{many}, ValidationError);
  CHECK_THROWS_AS(ModeRegister({a1, a1}), ValidationError);
  CHECK_THROWS_AS(apply_creation(vacuum_state(reg), b1), ValidationError);
}

TEST_CASE("identity unitary leaves a state unchanged") {
  const ModeRegister reg({a1, a2, b1, b2});
  PhotonicState s(reg);
  s.add(fock({1, 0, 0, 1}), 0.8);
  s.add(fock({0, 2, 0, 0}), Complex(0, 0.6));
  const std::array<ModeLabel, 4> modes{a1, a2, b1, b2};
  const auto out = apply_mode_unitary(s, modes, Eigen::MatrixXcd::Identity(4, 4));
  CHECK(out.terms() == s.terms());
}

TEST_CASE("balanced beam splitter on |1,1> matches the symbolic expansion") {
  const ModeRegister reg({a1, b1});
  const PhotonicState in = apply_creation(apply_creation(vacuum_state(reg), a1), b1);
  const std::array<ModeLabel, 2> modes{a1, b1};
  const auto out = apply_mode_unitary(in, modes, balanced_beam_splitter());

  // a -> (c + d)/sqrt2, b -> (c - d)/sqrt2, multiplied out by hand.
  const double r = 1.0 / std::sqrt(2.0);
  const Poly pa{{{1, 0}, r}, {{0, 1}, r}};
  const Poly pb{{{1, 0}, r}, {{0, 1}, -r}};
  const Poly product = multiply(pa, pb);
  for (int i = 0; i <= 2; ++i) {
    const int j = 2 - i;
    auto it = product.find({i, j});
    const Complex expected = it == product.end() ? Complex{} : it->second * monomial_norm(i, j);
    CHECK(std::abs(out.amplitude(fock({i, j})) - expected) < 1e-14);
  }
  CHECK(out.amplitude(fock({1, 1})) == Complex{});
  CHECK(std::abs(out.amplitude(fock({2, 0})) - r) < 1e-14);
  CHECK(std::abs(out.amplitude(fock({0, 2})) + r) < 1e-14);
}

TEST_CASE("beam splitter applied twice matches the matrix square") {
  const ModeRegister reg({a1, b1});
  const PhotonicState in = apply_creation(vacuum_state(reg), a1);
  const std::array<ModeLabel, 2> modes{a1, b1};
  const Complex i(0, 1);
  Eigen::Matrix2cd standard;
  standard << 1.0, i, i, 1.0;
  standard /= std::sqrt(2.0);

  for (const Eigen::Matrix2cd& u : {standard, balanced_beam_splitter()}) {
    const auto twice = apply_mode_unitary(apply_mode_unitary(in, modes, u), modes, u);
    const Eigen::Matrix2cd square = u * u;
    // One photon: amplitude in output mode j is (U^2)(0, j).
    CHECK(std::abs(twice.amplitude(fock({1, 0})) - square(0, 0)) < 1e-14);
    CHECK(std::abs(twice.amplitude(fock({0, 1})) - square(0, 1)) < 1e-14);
  }
  const auto swapped =
      apply_mode_unitary(apply_mode_unitary(in, modes, standard), modes, standard);
  CHECK(std::abs(std::abs(swapped.amplitude(fock({0, 1}))) - 1.0) < 1e-14);
}

TEST_CASE("unitary lifts preserve the norm of random states") {
  std::mt19937_64 rng(7);
  const ModeRegister reg({a1, a2, b1, b2});
  const std::array<ModeLabel, 4> modes{a1, a2, b1, b2};
  std::vector<FockState> basis;
  for (int i = 0; i < 4; ++i) {
    FockState f = vacuum(4);
    f.occupations[i] = 1;
    basis.push_back(f);
    for (int j = i; j < 4; ++j) {
      FockState g = f;
      g.occupations[j] += 1;
      basis.push_back(g);
    }
  }
  basis.push_back(vacuum(4));
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    PhotonicState s(reg);
    for (const auto& f : basis) s.add(f, Complex(g(rng), g(rng)));
    s = s.normalized();
    const auto out = apply_mode_unitary(s, modes, test_support::random_unitary(4, rng));
    worst = std::max(worst, std::abs(std::sqrt(out.norm_squared()) - 1.0));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("non-unitary and mis-sized transformations are rejected") {
  const ModeRegister reg({a1, b1});
  const PhotonicState in = apply_creation(vacuum_state(reg), a1);
  const std::array<ModeLabel, 2> modes{a1, b1};
  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Identity(2, 2) * 2.0;
  CHECK_THROWS_AS(apply_mode_unitary(in, modes, bad), ValidationError);
  CHECK_THROWS_AS(apply_mode_unitary(in, modes, Eigen::MatrixXcd::Identity(3, 3)),
                  ValidationError);
  const std::array<ModeLabel, 2> repeated{a1, a1};
  CHECK_THROWS_AS(apply_mode_unitary(in, repeated, balanced_beam_splitter()), ValidationError);
}

TEST_CASE("embed and relabel move amplitudes between registers") {
  const ModeRegister small({a1});
  const ModeRegister big({b1, a1, a2});
  const PhotonicState s = apply_creation(vacuum_state(small), a1);
  const auto e = embed(s, big);
  CHECK(e.amplitude(fock({0, 1, 0})) == Complex(1.0));
  const auto r = relabel(s, [](const ModeLabel& l) { return ModeLabel{Site::C, l.pol, l.bin}; });
  CHECK(r.modes()[0].site == Site::C);
  CHECK(r.amplitude(fock({1})) == Complex(1.0));
}

TEST_CASE("amplitudes below the drop tolerance are discarded") {
  const ModeRegister reg({a1});
  PhotonicState s(reg);
  s.add(fock({1}), 1e-17);
  CHECK(s.term_count() == 0);
}
