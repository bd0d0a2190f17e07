#include "ionlink/rate_budget.hpp"

#include "ionlink/errors.hpp"

#include <cmath>

namespace ionlink::budget {

namespace {

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(std::string(what) + " must lie in [0, 1]");
}

}  // namespace

void validate(const BudgetConfig& cfg) {
  if (!(cfg.repetition_rate > 0.0) || !std::isfinite(cfg.repetition_rate)) {
    throw ValidationError("repetition rate must be positive");
  }
  check_probability(cfg.p_cav, "p_cav");
  check_probability(cfg.fiber_coupling, "fiber coupling");
  check_probability(cfg.detector_eta, "detector efficiency");
  check_probability(cfg.herald_fraction, "herald fraction");
  if (!(cfg.distance_km >= 0.0)) throw ValidationError("distance must be non-negative");
  if (!(cfg.attenuation_db_per_km >= 0.0)) throw ValidationError("attenuation must be non-negative");
}

double fiber_survival(double distance_km, double db_per_km) {
  if (!(distance_km >= 0.0 && db_per_km >= 0.0)) {
    throw ValidationError("distance and attenuation must be non-negative");
  }
  return std::pow(10.0, -db_per_km * distance_km / 10.0);
}

double pair_rate(const BudgetConfig& cfg) {
  validate(cfg);
  const double per_photon = cfg.p_cav * cfg.fiber_coupling *
                            fiber_survival(cfg.distance_km / 2.0, cfg.attenuation_db_per_km) *
                            cfg.detector_eta;
  return cfg.repetition_rate * per_photon * per_photon * cfg.herald_fraction;
}

std::optional<double> time_to_pairs(const BudgetConfig& cfg, double n_pairs) {
  if (!(n_pairs >= 0.0)) throw ValidationError("pair count must be non-negative");
  const double rate = pair_rate(cfg);
  if (n_pairs == 0.0) return 0.0;
  if (rate == 0.0) return std::nullopt;
  return n_pairs / rate;
}

}  // namespace ionlink::budget
