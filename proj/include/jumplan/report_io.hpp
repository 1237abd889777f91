#pragma once

// Serialization shared by the CLI and the tests: lossless number formatting
// for CSV and JSON renderings of every report type. JSON documents carry a
// top-level "schema_version".

#include "jumplan/bounds.hpp"
#include "jumplan/decomposition.hpp"
#include "jumplan/density.hpp"
#include "jumplan/lan_experiment.hpp"
#include "jumplan/limit_checks.hpp"
#include "jumplan/mle.hpp"
#include "jumplan/model.hpp"

#include <json.hpp>

#include <ostream>
#include <string>

namespace jumplan {

inline constexpr int kSchemaVersion = 1;

/// Shortest form with 17 significant digits, '.' decimal point, "nan"/"inf" spelled out.
std::string format_double(double value);

nlohmann::json to_json(const ModelParams& p);
nlohmann::json to_json(const Perturbation& z);
nlohmann::json to_json(const Eigen::Matrix3d& m);
nlohmann::json to_json(const ScoreVector& s);
nlohmann::json to_json(const LanReport& report);
nlohmann::json to_json(const LimitCheckReport& report);
nlohmann::json to_json(const BoundsCheckReport& report);
nlohmann::json to_json(const MEstimate& estimate);
nlohmann::json to_json(const DecayFit& fit);
nlohmann::json to_json(const EstimateResult& result);
nlohmann::json to_json(const RateStudy& study);
nlohmann::json to_json(const IncrementTerms& terms);

/// {"schema_version": 1, "command": ..., "result": ...}.
nlohmann::json envelope(const std::string& command, nlohmann::json result);

/// Columns n,replicate,lr; failed replicates print "nan".
void write_lr_csv(std::ostream& os, const LanReport& report);

}  // namespace jumplan
