#include "ionlink/bell_test.hpp"

#include "ionlink/errors.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <numbers>
#include <thread>
#include <vector>

namespace ionlink {

namespace {

Eigen::Matrix4cd kron(const Matrix2c<double>& a, const Matrix2c<double>& b) {
  Eigen::Matrix4cd out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) out(2 * i + j, 2 * k + l) = a(i, k) * b(j, l);
  return out;
}

void require_ions(const DensityMatrix& rho) {
  if (rho.kind() != Subsystem::Ions) throw ValidationError("expected a two-ion density matrix");
}

// SplitMix64 finalizer, used as a counter-based generator.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::array<std::pair<MeasurementSetting, MeasurementSetting>, 4> setting_pairs(
    const CHSHSettings& s) {
  return {{{s.a, s.b}, {s.a, s.b_prime}, {s.a_prime, s.b}, {s.a_prime, s.b_prime}}};
}

// Joint outcome probabilities for (+,+), (+,-), (-,+), (-,-).
std::array<double, 4> outcome_distribution(const Eigen::Matrix4cd& rho,
                                           const MeasurementSetting& a,
                                           const MeasurementSetting& b) {
  const Matrix2c<double> id = Matrix2c<double>::Identity();
  const Matrix2c<double> sa = spin_operator(a), sb = spin_operator(b);
  std::array<double, 4> p{};
  int k = 0;
  for (int x : {1, -1}) {
    for (int y : {1, -1}) {
      const Eigen::Matrix4cd proj =
          kron(0.5 * (id + double(x) * sa), 0.5 * (id + double(y) * sb));
      p[k++] = std::max(0.0, (rho * proj).trace().real());
    }
  }
  const double total = p[0] + p[1] + p[2] + p[3];
  for (double& v : p) v /= total;
  return p;
}

}  // namespace

double correlator(const DensityMatrix& rho, const MeasurementSetting& a,
                  const MeasurementSetting& b) {
  require_ions(rho);
  const Eigen::Matrix4cd op = kron(spin_operator(a), spin_operator(b));
  return (rho.matrix() * op).trace().real();
}

CHSHSettings canonical_chsh_settings() {
  constexpr double pi = std::numbers::pi;
  return {{0.0, 0.0}, {pi / 2, 0.0}, {pi / 4, 0.0}, {3 * pi / 4, 0.0}};
}

DensityMatrix depolarize_each_ion(const DensityMatrix& rho, double p) {
  require_ions(rho);
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("depolarizing probability must lie in [0, 1]");
  if (p == 0.0) return rho;
  Matrix2c<double> x, y, z;
  const std::complex<double> i{0.0, 1.0};
  x << 0, 1, 1, 0;
  y << 0, -i, i, 0;
  z << 1, 0, 0, -1;
  const Matrix2c<double> id = Matrix2c<double>::Identity();
  Eigen::Matrix4cd out = rho.matrix();
  // Pauli twirl: (1 - 3p/4) rho + (p/4) sum_k sigma_k rho sigma_k, per ion.
  for (int ion = 0; ion < 2; ++ion) {
    Eigen::Matrix4cd next = (1.0 - 0.75 * p) * out;
    for (const auto& s : {x, y, z}) {
      const Eigen::Matrix4cd k = ion == 0 ? kron(s, id) : kron(id, s);
      next += 0.25 * p * k * out * k;
    }
    out = next;
  }
  return DensityMatrix(out, Subsystem::Ions);
}

double chsh_value(const DensityMatrix& rho, const CHSHSettings& s) {
  return correlator(rho, s.a, s.b) - correlator(rho, s.a, s.b_prime) +
         correlator(rho, s.a_prime, s.b) + correlator(rho, s.a_prime, s.b_prime);
}

double chsh_value(const DensityMatrix& rho, const CHSHConfig& config) {
  return chsh_value(depolarize_each_ion(rho, config.depolarizing), config.settings);
}

std::uint64_t SettingCounts::total() const {
  return outcomes[0] + outcomes[1] + outcomes[2] + outcomes[3];
}

double SettingCounts::correlator() const {
  const auto n = total();
  if (n == 0) throw InsufficientDataError("no trials for a setting pair");
  const auto same = static_cast<double>(outcomes[0] + outcomes[3]);
  const auto diff = static_cast<double>(outcomes[1] + outcomes[2]);
  return (same - diff) / static_cast<double>(n);
}

MonteCarloResult monte_carlo_chsh(const DensityMatrix& rho_in, const CHSHConfig& config) {
  require_ions(rho_in);
  if (config.trials == 0) throw ValidationError("trials must be positive");
  const DensityMatrix rho = depolarize_each_ion(rho_in, config.depolarizing);

  const auto pairs = setting_pairs(config.settings);
  std::array<std::array<double, 4>, 4> cumulative{};
  for (std::size_t k = 0; k < 4; ++k) {
    const auto p = outcome_distribution(rho.matrix(), pairs[k].first, pairs[k].second);
    double acc = 0.0;
    for (std::size_t o = 0; o < 4; ++o) cumulative[k][o] = (acc += p[o]);
  }

  auto run_range = [&](std::uint64_t begin, std::uint64_t end) {
    std::array<SettingCounts, 4> counts{};
    for (std::uint64_t t = begin; t < end; ++t) {
      const std::uint64_t h = mix64(config.rng_seed ^ mix64(t));
      const auto setting = static_cast<std::size_t>(h >> 62);
      const double u = static_cast<double>(mix64(h) >> 11) * 0x1.0p-53;
      std::size_t o = 0;
      while (o < 3 && u >= cumulative[setting][o]) ++o;
      ++counts[setting].outcomes[o];
    }
    return counts;
  };

  const unsigned threads =
      static_cast<unsigned>(std::clamp<std::uint64_t>(config.threads, 1, config.trials));
  std::vector<std::array<SettingCounts, 4>> partial(threads);
  if (threads == 1) {
    partial[0] = run_range(0, config.trials);
  } else {
    std::vector<std::jthread> pool;
    const std::uint64_t chunk = config.trials / threads;
    for (unsigned w = 0; w < threads; ++w) {
      const std::uint64_t begin = w * chunk;
      const std::uint64_t end = w + 1 == threads ? config.trials : begin + chunk;
      pool.emplace_back([&, w, begin, end] { partial[w] = run_range(begin, end); });
    }
  }

  MonteCarloResult result;
  for (const auto& part : partial)
    for (std::size_t k = 0; k < 4; ++k)
      for (std::size_t o = 0; o < 4; ++o) result.counts[k].outcomes[o] += part[k].outcomes[o];

  constexpr std::array<double, 4> sign{1.0, -1.0, 1.0, 1.0};
  double variance = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const double e = result.counts[k].correlator();
    result.s += sign[k] * e;
    variance += (1.0 - e * e) / static_cast<double>(result.counts[k].total());
  }
  result.standard_error = std::sqrt(variance);
  return result;
}

ReadoutResult readout_counts(const ReadoutModel& m) {
  if (!(m.cycling_rate >= 0.0 && m.collection_efficiency >= 0.0 && m.window >= 0.0 &&
        m.dark_rate >= 0.0)) {
    throw ValidationError("readout parameters must be non-negative");
  }
  if (m.threshold < 1) throw ValidationError("readout threshold must be at least 1");
  ReadoutResult r;
  r.expected_counts = m.cycling_rate * m.collection_efficiency * m.window;
  const double dark_mean = m.dark_rate * m.window;
  const double t = m.threshold;
  // Q(t, mu) = P(Poisson(mu) <= t - 1); P(t, mu) = P(Poisson(mu) >= t).
  const double bright_miss =
      r.expected_counts == 0.0 ? 1.0 : boost::math::gamma_q(t, r.expected_counts);
  const double dark_false = dark_mean == 0.0 ? 0.0 : boost::math::gamma_p(t, dark_mean);
  r.discrimination_error = bright_miss + dark_false;
  return r;
}

}  // namespace ionlink
