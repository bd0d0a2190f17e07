#include "doctest.h"

#include "ionlink/bell_test.hpp"
#include "ionlink/errors.hpp"

#include "support.hpp"

#include <numbers>

using namespace ionlink;

namespace {

constexpr double kPi = std::numbers::pi;
const double kTsirelson = 2 * std::sqrt(2.0);

DensityMatrix singlet() { return DensityMatrix::from_ion_vector(ion_bell_state(BellState::PsiMinus)); }

MeasurementSetting random_setting(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {std::acos(1 - 2 * u(rng)), 2 * kPi * u(rng)};
}

// Bloch-vector oracle for a pure single-qubit state with angles (theta, phi).
Eigen::Vector2cd qubit(double theta, double phi) {
  return {std::cos(theta / 2), std::polar(std::sin(theta / 2), phi)};
}

}  // namespace

TEST_CASE("spin operators have eigenvalues +-1") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 50; ++i) {
    const auto s = random_setting(rng);
    const auto m = spin_operator(s);
    CHECK((m * m - Matrix2c<double>::Identity()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(std::abs(m.trace()) < 1e-14);
    // The +1 eigenvector is the Bloch state along the same direction.
    const Eigen::Vector2cd v = qubit(s.theta, s.phi);
    CHECK((m * v - v).norm() < 1e-14);
  }
  CHECK(spin_operator<float>({0.3, 0.2})(0, 0).real() == doctest::Approx(std::cos(0.3)).epsilon(1e-6));
}

TEST_CASE("singlet correlators") {
  const DensityMatrix rho = singlet();
  std::mt19937_64 rng(43);
  for (int i = 0; i < 20; ++i) {
    const auto s = random_setting(rng);
    CHECK(correlator(rho, s, s) == doctest::Approx(-1.0).epsilon(1e-12));
  }
  for (double chi : {0.1, 0.7, 1.9, 3.0}) {
    CHECK(correlator(rho, {0.0, 0.0}, {chi, 0.0}) == doctest::Approx(-std::cos(chi)).epsilon(1e-12));
    CHECK(correlator(rho, {kPi / 2, 0.3}, {kPi / 2, 0.3 + chi}) ==
          doctest::Approx(-std::cos(chi)).epsilon(1e-12));
  }
  for (int i = 0; i < 20; ++i) {
    CHECK(correlator(DensityMatrix::maximally_mixed_ions(), random_setting(rng),
                     random_setting(rng)) == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("CHSH on the singlet reaches the Tsirelson value") {
  CHECK(std::abs(chsh_value(singlet(), canonical_chsh_settings())) ==
        doctest::Approx(kTsirelson).epsilon(1e-12));
  CHECK(chsh_value(DensityMatrix::maximally_mixed_ions(), canonical_chsh_settings()) ==
        doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("CHSH is linear in the state") {
  // w psi- + (1 - w) white noise; |S| = 2 sqrt2 w crosses 2 at w = 1/sqrt2.
  const Eigen::Matrix4cd classical = Eigen::Matrix4cd::Identity() / 4.0;
  auto mixture = [&](double w) {
    return DensityMatrix(w * singlet().matrix() + (1 - w) * classical, Subsystem::Ions);
  };
  const double s_classical = chsh_value(DensityMatrix(classical, Subsystem::Ions),
                                        canonical_chsh_settings());
  for (double w : {0.0, 0.3, 0.71, 1.0}) {
    CHECK(chsh_value(mixture(w), canonical_chsh_settings()) ==
          doctest::Approx(-kTsirelson * w + (1 - w) * s_classical).epsilon(1e-12));
  }
  CHECK(std::abs(chsh_value(mixture(0.70), canonical_chsh_settings())) < 2.0);
  CHECK(std::abs(chsh_value(mixture(0.71), canonical_chsh_settings())) > 2.0);
}

TEST_CASE("correlator and CHSH bounds on random states") {
  std::mt19937_64 rng(47);
  for (int i = 0; i < 1000; ++i) {
    const DensityMatrix rho = test_support::random_ion_state(rng, 1 + i % 4);
    CHECK(std::abs(correlator(rho, random_setting(rng), random_setting(rng))) <= 1.0 + 1e-12);
    const CHSHSettings s{random_setting(rng), random_setting(rng), random_setting(rng),
                         random_setting(rng)};
    CHECK(std::abs(chsh_value(rho, s)) <= kTsirelson + 1e-9);
  }
  // Product states rho_A (x) rho_B.
  for (int i = 0; i < 500; ++i) {
    const Eigen::Vector2cd x = test_support::random_vector(2, rng);
    const Eigen::Vector2cd y = test_support::random_vector(2, rng);
    Eigen::Vector4cd v;
    v << x(0) * y(0), x(0) * y(1), x(1) * y(0), x(1) * y(1);
    const CHSHSettings s{random_setting(rng), random_setting(rng), random_setting(rng),
                         random_setting(rng)};
    CHECK(std::abs(chsh_value(DensityMatrix::from_ion_vector(v), s)) <= 2.0 + 1e-9);
  }
}

TEST_CASE("depolarizing each ion shrinks S by (1-p)^2") {
  for (double p : {0.0, 0.1, 0.5, 1.0}) {
    const DensityMatrix noisy = depolarize_each_ion(singlet(), p);
    CHECK(noisy.trace() == doctest::Approx(1.0));
    CHECK(chsh_value(noisy, canonical_chsh_settings()) ==
          doctest::Approx(-kTsirelson * (1 - p) * (1 - p)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(depolarize_each_ion(singlet(), 1.5), ValidationError);
}

TEST_CASE("Monte Carlo CHSH is seeded, thread-independent and close to the analytic value") {
  CHSHConfig cfg;
  cfg.trials = 200'000;
  cfg.rng_seed = 99;
  const auto a = monte_carlo_chsh(singlet(), cfg);
  const auto b = monte_carlo_chsh(singlet(), cfg);
  cfg.threads = 5;
  const auto c = monte_carlo_chsh(singlet(), cfg);
  CHECK(a.s == b.s);
  CHECK(a.s == c.s);
  CHECK(a.standard_error == c.standard_error);
  std::uint64_t total = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(a.counts[k].outcomes == c.counts[k].outcomes);
    total += a.counts[k].total();
  }
  CHECK(total == cfg.trials);
  CHECK(std::abs(a.s - chsh_value(singlet(), cfg)) < 4 * a.standard_error);
  cfg.rng_seed = 100;
  CHECK(monte_carlo_chsh(singlet(), cfg).s != a.s);
}

TEST_CASE("Monte Carlo estimator is unbiased over independent seeds") {
  CHSHConfig cfg;
  cfg.trials = 100'000;
  cfg.threads = 4;
  const int seeds = 100;
  const double analytic = chsh_value(singlet(), cfg);
  double sum = 0.0, se2 = 0.0;
  for (int seed = 0; seed < seeds; ++seed) {
    cfg.rng_seed = 1000 + static_cast<std::uint64_t>(seed);
    const auto r = monte_carlo_chsh(singlet(), cfg);
    sum += r.s;
    se2 += r.standard_error * r.standard_error;
  }
  const double mean = sum / seeds;
  const double combined_se = std::sqrt(se2) / seeds;
  CHECK(std::abs(mean - analytic) < 5 * combined_se);
}

TEST_CASE("a single trial leaves setting pairs without data") {
  CHSHConfig cfg;
  cfg.trials = 1;
  CHECK_THROWS_AS(monte_carlo_chsh(singlet(), cfg), InsufficientDataError);
  cfg.trials = 0;
  CHECK_THROWS_AS(monte_carlo_chsh(singlet(), cfg), ValidationError);
}

TEST_CASE("readout photon counting") {
  const ReadoutResult r = readout_counts({});
  CHECK(r.expected_counts == doctest::Approx(29.9).epsilon(1e-12));
  CHECK(r.discrimination_error == doctest::Approx(std::exp(-29.9)).epsilon(1e-9));
  CHECK(r.discrimination_error < 1e-10);

  // Poisson tails summed term by term.
  ReadoutModel m;
  m.threshold = 5;
  m.dark_rate = 2e4;
  const double mu = 29.9, nu = 2e4 * 23e-6;
  double miss = 0.0, dark_below = 0.0, term_mu = std::exp(-mu), term_nu = std::exp(-nu);
  for (int k = 0; k < 5; ++k) {
    miss += term_mu;
    dark_below += term_nu;
    term_mu *= mu / (k + 1);
    term_nu *= nu / (k + 1);
  }
  CHECK(readout_counts(m).discrimination_error ==
        doctest::Approx(miss + (1 - dark_below)).epsilon(1e-9));

  m = {};
  m.window = 0.0;
  for (int t : {1, 2, 10}) {
    m.threshold = t;
    CHECK(readout_counts(m).expected_counts == 0.0);
    CHECK(readout_counts(m).discrimination_error == 1.0);
  }
  m.threshold = 0;
  CHECK_THROWS_AS(readout_counts(m), ValidationError);
}
