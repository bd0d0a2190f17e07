#pragma once

// JSON and CSV encodings for configs and reports. Parsers reject unknown keys.

#include "ionlink/bell_test.hpp"
#include "ionlink/cavity.hpp"
#include "ionlink/optics.hpp"
#include "ionlink/protocol.hpp"
#include "ionlink/rate_budget.hpp"
#include "ionlink/spacetime.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace ionlink::io {

using json = nlohmann::json;

// Shortest round-trip decimal form, used for every CSV number.
std::string format_number(double value);

// {"elements": [{"kind": "BeamSplitter", "inputs": ["A","B"], "outputs": ["C","D"],
//   "transmissivity": 0.5, "phase": 0}, {"kind": "PolarizingBS", "input": "C",
//   "transmitted": "D1", "reflected": "D2"}, ...]}
json to_json(const OpticalCircuit& circuit);
OpticalCircuit circuit_from_json(const json& j);

// {"re": [[...]], "im": [[...]]}, row-major.
json to_json(const DensityMatrix& ions);
DensityMatrix ion_state_from_json(const json& j);

json to_json(const Detector& d);
json to_json(const EmissionModel& m);
json to_json(const ChannelModel& ch);
json to_json(const AttemptConfig& cfg);
// Merges keys from `j` over `base`.
AttemptConfig attempt_config_from_json(const json& j, AttemptConfig base = {});

json to_json(const HeraldedResult& r);
json herald_report(const AttemptConfig& cfg, const std::vector<HeraldedResult>& results);

json to_json(const MeasurementSetting& s);
json chsh_report(const CHSHConfig& cfg, const std::string& state_source, double analytic_s,
                 const MonteCarloResult& mc);

json to_json(const budget::BudgetConfig& cfg);
budget::BudgetConfig budget_from_json(const json& j, budget::BudgetConfig base = {});
json rate_report(const budget::BudgetConfig& cfg, double n_pairs);

json to_json(const spacetime::Scenario& s);
spacetime::Scenario scenario_from_json(const json& j, spacetime::Scenario base = {});
json timing_report(const spacetime::Scenario& s);

std::string phase_report_csv(const std::vector<PhaseReportRow>& rows);
std::string cavity_scan_csv(const std::vector<cavity::CavityPoint<double>>& points);

}  // namespace ionlink::io
