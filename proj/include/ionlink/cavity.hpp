#pragma once

// Probability that an excited ion emits into a cavity mode when the excited
// level also decays to other levels at rate Gamma:
//
//   p_cav = 4 gamma Omega^2 / ((gamma + Gamma)(gamma Gamma + 4 Omega^2))
//
// gamma is the cavity decay rate and Omega the ion-cavity coupling. All
// quantities are SI; rates are in 1/s.

#include "ionlink/errors.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace ionlink::cavity {

// CODATA 2018 exact / recommended values.
template <typename Real = double>
struct PhysicalConstants {
  static constexpr Real c = Real(299792458.0);            // m/s, exact
  static constexpr Real h = Real(6.62607015e-34);         // J s, exact
  static constexpr Real hbar = h / (2 * std::numbers::pi_v<Real>);
  static constexpr Real epsilon0 = Real(8.8541878128e-12);  // F/m
};

// 40Ca+ P3/2 -> D5/2 at 854 nm.
template <typename Real = double>
struct IonConstants {
  Real loss_rate = Real(1.47e8);         // Gamma, decay not into the cavity
  Real transition_rate = Real(0.5e7);    // free-space rate of the coupled transition
  Real wavelength = Real(854e-9);
};

template <typename Real = double>
struct CavityGeometry {
  Real length = Real(3e-3);
  Real finesse = Real(19000);
  Real mode_volume = Real(0);  // 0 selects the confocal volume L^2 lambda / 4
};

enum class FinesseConvention { StandardPrefactorPi, PaperPrefactor4Pi };

template <typename Real>
void validate(const IonConstants<Real>& ion) {
  if (!(ion.loss_rate > 0 && ion.transition_rate > 0 && ion.wavelength > 0)) {
    throw ValidationError("ion constants must be positive");
  }
  if (!(ion.loss_rate > ion.transition_rate)) {
    throw ValidationError("the cavity-coupled transition must be the weak branch");
  }
}

template <typename Real>
Real confocal_mode_volume(Real length, Real wavelength) {
  return length * length * wavelength / 4;
}

// Inverts A = omega^3 D^2 / (3 pi eps0 hbar c^3) with omega = 2 pi c / lambda.
template <typename Real>
Real dipole_from_decay(Real rate, Real wavelength) {
  if (!(rate > 0 && wavelength > 0)) throw ValidationError("decay rate and wavelength must be positive");
  using K = PhysicalConstants<Real>;
  const Real omega = 2 * std::numbers::pi_v<Real> * K::c / wavelength;
  return std::sqrt(3 * std::numbers::pi_v<Real> * K::epsilon0 * K::hbar * K::c * K::c * K::c *
                   rate / (omega * omega * omega));
}

// Omega = (D / hbar) sqrt(h c / (2 eps0 lambda V)).
template <typename Real>
Real coupling_constant(Real dipole, Real wavelength, Real mode_volume) {
  if (!(dipole > 0 && wavelength > 0 && mode_volume > 0)) {
    throw ValidationError("coupling inputs must be positive");
  }
  using K = PhysicalConstants<Real>;
  return dipole / K::hbar * std::sqrt(K::h * K::c / (2 * K::epsilon0 * wavelength * mode_volume));
}

template <typename Real>
Real p_cav(Real gamma, Real loss_rate, Real omega) {
  if (!(gamma > 0 && loss_rate > 0 && omega > 0)) throw ValidationError("rates must be positive");
  const Real omega2 = omega * omega;
  return 4 * gamma * omega2 / ((gamma + loss_rate) * (gamma * loss_rate + 4 * omega2));
}

template <typename Real>
Real optimal_gamma(Real omega) {
  if (!(omega > 0)) throw ValidationError("coupling must be positive");
  return 2 * omega;
}

// Value of p_cav at gamma = 2 Omega.
template <typename Real>
Real p_cav_max(Real loss_rate, Real omega) {
  const Real r = 2 * omega / (2 * omega + loss_rate);
  return r * r;
}

template <typename Real>
Real finesse_prefactor(FinesseConvention convention) {
  return convention == FinesseConvention::PaperPrefactor4Pi ? 4 * std::numbers::pi_v<Real>
                                                            : std::numbers::pi_v<Real>;
}

// gamma = prefactor c / (F L), solved for F.
template <typename Real>
Real finesse_from_gamma(Real gamma, Real length,
                        FinesseConvention convention = FinesseConvention::StandardPrefactorPi) {
  if (!(gamma > 0 && length > 0)) throw ValidationError("gamma and length must be positive");
  return finesse_prefactor<Real>(convention) * PhysicalConstants<Real>::c / (gamma * length);
}

template <typename Real>
Real gamma_from_finesse(Real finesse, Real length,
                        FinesseConvention convention = FinesseConvention::StandardPrefactorPi) {
  if (!(finesse > 1 && length > 0)) throw ValidationError("need finesse > 1 and length > 0");
  return finesse_prefactor<Real>(convention) * PhysicalConstants<Real>::c / (finesse * length);
}

template <typename Real>
Real wavepacket_duration(Real gamma) {
  if (!(gamma > 0)) throw ValidationError("gamma must be positive");
  return 1 / gamma;
}

template <typename Real = double>
struct CavityPoint {
  Real length;
  Real dipole;
  Real omega;
  Real gamma_opt;
  Real finesse_pi;
  Real finesse_4pi;
  Real p_cav;
  Real wavepacket_duration;
};

// Optimal operating point for a confocal cavity of the given length.
template <typename Real>
CavityPoint<Real> optimal_point(Real length, const IonConstants<Real>& ion = {}) {
  validate(ion);
  if (!(length > 0)) throw ValidationError("cavity length must be positive");
  const Real dipole = dipole_from_decay(ion.transition_rate, ion.wavelength);
  const Real omega =
      coupling_constant(dipole, ion.wavelength, confocal_mode_volume(length, ion.wavelength));
  const Real gamma = optimal_gamma(omega);
  return {length,
          dipole,
          omega,
          gamma,
          finesse_from_gamma(gamma, length, FinesseConvention::StandardPrefactorPi),
          finesse_from_gamma(gamma, length, FinesseConvention::PaperPrefactor4Pi),
          p_cav(gamma, ion.loss_rate, omega),
          wavepacket_duration(gamma)};
}

// `points` log-spaced lengths in [min_length, max_length].
template <typename Real>
std::vector<CavityPoint<Real>> scan(Real min_length, Real max_length, int points,
                                    const IonConstants<Real>& ion = {}) {
  if (!(min_length > 0 && max_length >= min_length) || points < 1) {
    throw ValidationError("scan needs 0 < min <= max and at least one point");
  }
  std::vector<CavityPoint<Real>> out;
  const Real lo = std::log(min_length), hi = std::log(max_length);
  for (int i = 0; i < points; ++i) {
    const Real t = points == 1 ? Real(0) : Real(i) / Real(points - 1);
    out.push_back(optimal_point(std::exp(lo + t * (hi - lo)), ion));
  }
  return out;
}

}  // namespace ionlink::cavity
