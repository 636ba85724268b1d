#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace pathattr {

double mean(const std::vector<double>& v);
double median(std::vector<double> v);

/// {"mean": ..., "median": ...} for an aggregate column.
nlohmann::json summary_stats(const std::vector<double>& v);

std::string iso8601_utc_now();

/// Pretty-printed JSON with sorted keys (nlohmann objects are ordered maps),
/// so identical reports serialize to identical bytes.
void write_report(const nlohmann::json& report, const std::string& path);
nlohmann::json read_report(const std::string& path);

/// Renders the per-method curves embedded in a report as CSV files under dir:
/// <method>_insertion.csv and <method>_aic_sic_<measure>.csv.
void write_curves_csv(const nlohmann::json& report, const std::string& dir);

}  // namespace pathattr
