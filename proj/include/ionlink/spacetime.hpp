#pragma once

// Causal-timing checks for a Bell test with heralded ion pairs, in the lab
// frame on a line: ions at x_A and x_B, photon detection station at x_I.
//
// Each run: both ions excited at t = 0 (E_A, E_B); photons travel through
// fiber at speed v to I where the coincidence is registered (D_I). Each side
// picks its basis (C_A, C_B) after a fixed delay, rotates, and reads out
// (D_A, D_B). A loophole-free run needs
//   (i)   C_B outside the backward lightcone of D_A,
//   (ii)  C_A outside the backward lightcone of D_B,
//   (iii) C_A and C_B outside the backward lightcone of D_I.
// Events exactly on a lightcone count as outside.

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace ionlink::spacetime {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s, exact
inline constexpr double kDefaultFiberSpeed = kSpeedOfLight / 1.5;

enum class EventLabel { E_A, E_B, C_A, C_B, D_A, D_B, D_I };

std::string_view to_string(EventLabel label);

struct SpacetimeEvent {
  EventLabel label = EventLabel::E_A;
  double x = 0.0;  // m
  double t = 0.0;  // s
};

struct Scenario {
  double x_a = 0.0;
  double x_b = 10'000.0;
  double x_i = 5'000.0;
  double fiber_speed = kDefaultFiberSpeed;
  double excitation_to_choice = 0.0;  // s
  double rotation_duration = 0.0;     // s, choice -> rotation complete
  double readout_duration = 0.0;      // s, rotation complete -> result fixed
  double emission_delay = 0.0;        // s, excitation -> photon emission

  double choice_to_detection() const { return rotation_duration + readout_duration; }
};

// Requires x_a <= x_i <= x_b, 0 < v <= c and non-negative durations.
void validate(const Scenario& s);

using Schedule = std::vector<SpacetimeEvent>;

Schedule build_schedule(const Scenario& s);

// True iff t1 >= t2 or |x1 - x2| >= c (t2 - t1).
bool outside_backward_lightcone(const SpacetimeEvent& e1, const SpacetimeEvent& e2);

// Seconds of slack before e1 enters the backward lightcone of e2:
// |x1 - x2| / c - (t2 - t1). Non-negative iff e1 is outside.
double lightcone_margin(const SpacetimeEvent& e1, const SpacetimeEvent& e2);

struct ConstraintCheck {
  std::string name;
  bool pass = false;
  double margin = 0.0;  // s
};

struct TimingReport {
  std::array<ConstraintCheck, 3> checks;
  bool all_pass = false;
  // Longest choice -> detection interval compatible with (i) and (ii).
  double max_choice_to_detection = 0.0;
};

// Throws ValidationError when an event label is missing.
TimingReport validate(const Schedule& schedule);

// |x_b - x_a| / c.
double max_choice_to_detection_window(const Scenario& s);

// Smallest excitation -> choice delay for which (iii) holds.
double min_choice_delay(const Scenario& s);

}  // namespace ionlink::spacetime
