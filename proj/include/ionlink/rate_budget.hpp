#pragma once

#include <optional>

namespace ionlink::budget {

// Factor chain for the heralded pair rate. Distances are the full A-B
// separation; each photon travels half of it.
struct BudgetConfig {
  double repetition_rate = 1.0 / 30e-6;  // attempts per second
  double p_cav = 0.01;
  double fiber_coupling = 1.0;
  double distance_km = 10.0;
  double attenuation_db_per_km = 1.0;
  double detector_eta = 0.7;
  double herald_fraction = 0.5;
};

void validate(const BudgetConfig& cfg);

// 10^(-db_per_km * distance_km / 10).
double fiber_survival(double distance_km, double db_per_km);

// repetition_rate * (p_cav * coupling * survival * eta)^2 * herald_fraction.
double pair_rate(const BudgetConfig& cfg);

// Seconds to accumulate n_pairs; nullopt when the rate is zero.
std::optional<double> time_to_pairs(const BudgetConfig& cfg, double n_pairs);

}  // namespace ionlink::budget
