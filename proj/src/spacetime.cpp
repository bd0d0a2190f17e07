#include "ionlink/spacetime.hpp"

#include "ionlink/errors.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace ionlink::spacetime {

std::string_view to_string(EventLabel label) {
  switch (label) {
    case EventLabel::E_A: return "E_A";
    case EventLabel::E_B: return "E_B";
    case EventLabel::C_A: return "C_A";
    case EventLabel::C_B: return "C_B";
    case EventLabel::D_A: return "D_A";
    case EventLabel::D_B: return "D_B";
    case EventLabel::D_I: return "D_I";
  }
  return "?";
}

void validate(const Scenario& s) {
  for (double v : {s.x_a, s.x_b, s.x_i, s.fiber_speed, s.excitation_to_choice,
                   s.rotation_duration, s.readout_duration, s.emission_delay}) {
    if (!std::isfinite(v)) throw ValidationError("scenario values must be finite");
  }
  if (!(s.x_a <= s.x_i && s.x_i <= s.x_b)) {
    throw ValidationError("scenario needs x_a <= x_i <= x_b");
  }
  if (!(s.fiber_speed > 0.0 && s.fiber_speed <= kSpeedOfLight)) {
    throw ValidationError("fiber speed must lie in (0, c]");
  }
  if (s.excitation_to_choice < 0.0 || s.rotation_duration < 0.0 || s.readout_duration < 0.0 ||
      s.emission_delay < 0.0) {
    throw ValidationError("scenario durations must be non-negative");
  }
}

namespace {

double heralding_time(const Scenario& s) {
  const double arm = std::max(s.x_i - s.x_a, s.x_b - s.x_i);
  return s.emission_delay + arm / s.fiber_speed;
}

}  // namespace

Schedule build_schedule(const Scenario& s) {
  validate(s);
  const double choice = s.excitation_to_choice;
  const double done = choice + s.choice_to_detection();
  return {{EventLabel::E_A, s.x_a, 0.0},    {EventLabel::E_B, s.x_b, 0.0},
          {EventLabel::C_A, s.x_a, choice}, {EventLabel::C_B, s.x_b, choice},
          {EventLabel::D_A, s.x_a, done},   {EventLabel::D_B, s.x_b, done},
          {EventLabel::D_I, s.x_i, heralding_time(s)}};
}

double lightcone_margin(const SpacetimeEvent& e1, const SpacetimeEvent& e2) {
  return std::abs(e1.x - e2.x) / kSpeedOfLight - (e2.t - e1.t);
}

bool outside_backward_lightcone(const SpacetimeEvent& e1, const SpacetimeEvent& e2) {
  return e1.t >= e2.t || std::abs(e1.x - e2.x) >= kSpeedOfLight * (e2.t - e1.t);
}

TimingReport validate(const Schedule& schedule) {
  auto find = [&](EventLabel label) {
    std::optional<SpacetimeEvent> hit;
    for (const auto& e : schedule) {
      if (e.label != label) continue;
      if (hit) throw ValidationError("duplicate event " + std::string(to_string(label)));
      hit = e;
    }
    if (!hit) throw ValidationError("schedule lacks event " + std::string(to_string(label)));
    return *hit;
  };
  const auto c_a = find(EventLabel::C_A), c_b = find(EventLabel::C_B);
  const auto d_a = find(EventLabel::D_A), d_b = find(EventLabel::D_B);
  const auto d_i = find(EventLabel::D_I);
  find(EventLabel::E_A);
  find(EventLabel::E_B);

  TimingReport r;
  r.checks[0] = {"C_B outside backward lightcone of D_A", outside_backward_lightcone(c_b, d_a),
                 lightcone_margin(c_b, d_a)};
  r.checks[1] = {"C_A outside backward lightcone of D_B", outside_backward_lightcone(c_a, d_b),
                 lightcone_margin(c_a, d_b)};
  r.checks[2] = {"C_A, C_B outside backward lightcone of D_I",
                 outside_backward_lightcone(c_a, d_i) && outside_backward_lightcone(c_b, d_i),
                 std::min(lightcone_margin(c_a, d_i), lightcone_margin(c_b, d_i))};
  r.all_pass = std::all_of(r.checks.begin(), r.checks.end(), [](const auto& c) { return c.pass; });
  r.max_choice_to_detection = std::abs(d_b.x - d_a.x) / kSpeedOfLight;
  return r;
}

double max_choice_to_detection_window(const Scenario& s) {
  validate(s);
  return (s.x_b - s.x_a) / kSpeedOfLight;
}

double min_choice_delay(const Scenario& s) {
  validate(s);
  const double t_herald = heralding_time(s);
  const double need_a = t_herald - (s.x_i - s.x_a) / kSpeedOfLight;
  const double need_b = t_herald - (s.x_b - s.x_i) / kSpeedOfLight;
  return std::max({0.0, need_a, need_b});
}

}  // namespace ionlink::spacetime
