#pragma once

#include <string>

#include "json.hpp"

#include "avglearn/certify.hpp"
#include "avglearn/dynamics.hpp"
#include "avglearn/graph.hpp"
#include "avglearn/stochastic.hpp"

namespace avglearn {

// Parses the scenario document. Rational strings "p/q" are parsed exactly
// before the single float division; unknown keys are rejected.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::string& path);

nlohmann::json to_json(const CertificateReport& report);
nlohmann::json to_json(const AnchorReport& report);
nlohmann::json to_json(const SmallGainReport& report);

// Header: t, x_1..x_n, err_inf, bound (bound blank where none attached).
std::string trajectory_csv(const Trajectory& traj, int n);
// Header: t, mean_err, max_err, w1_vs_prev_checkpoint.
std::string ensemble_csv(const Ensemble& ens, const std::vector<double>& w1_profile);

// Shortest repeatable decimal form (round-trips to the same double).
std::string format_double(double v);

}  // namespace avglearn
