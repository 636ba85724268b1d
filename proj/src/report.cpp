#include "pathattr/report.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "pathattr/errors.hpp"

namespace pathattr {

double mean(const std::vector<double>& v) {
    if (v.empty()) throw invalid_parameter_error("mean of an empty vector");
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
    if (v.empty()) throw invalid_parameter_error("median of an empty vector");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

nlohmann::json summary_stats(const std::vector<double>& v) {
    return {{"mean", mean(v)}, {"median", median(v)}};
}

std::string iso8601_utc_now() {
    const std::time_t now =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_report(const nlohmann::json& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open report for writing: " + path);
    out << report.dump(2) << '\n';
    if (!out) throw io_error("failed writing report: " + path);
}

nlohmann::json read_report(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open report: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw format_error("report is not valid JSON (" + path + "): " + e.what());
    }
    if (!j.is_object() || j.value("format", "") != "pathattr-eval-report")
        throw format_error("not an eval report: " + path);
    return j;
}

namespace {

// Shortest round-trip decimal form, same renderer the JSON report uses.
std::string num(const nlohmann::json& v) { return v.dump(); }

void write_csv(const std::string& path, const std::string& header,
               const std::vector<const nlohmann::json*>& columns) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open CSV for writing: " + path);
    out << header << '\n';
    const std::size_t rows = columns.front()->size();
    for (const nlohmann::json* col : columns)
        if (col->size() != rows)
            throw format_error("curve columns have mismatched lengths in report");
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) out << ',';
            out << num((*columns[c])[r]);
        }
        out << '\n';
    }
    if (!out) throw io_error("failed writing CSV: " + path);
}

}  // namespace

void write_curves_csv(const nlohmann::json& report, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw io_error("cannot create directory " + dir + ": " + ec.message());

    const auto methods_it = report.find("methods");
    if (methods_it == report.end() || !methods_it->is_object())
        throw format_error("report has no methods section");

    for (const auto& [id, entry] : methods_it->items()) {
        const nlohmann::json& curves = entry.at("curves");
        {
            const nlohmann::json& ins = curves.at("insertion");
            write_csv(dir + "/" + id + "_insertion.csv",
                      "fraction,probability_mean,ratio_mean",
                      {&ins.at("fractions"), &ins.at("probability_mean"),
                       &ins.at("ratio_mean")});
        }
        for (const auto& [measure, curve] : curves.at("aic_sic").items()) {
            write_csv(dir + "/" + id + "_aic_sic_" + measure + ".csv",
                      "bin_center,accuracy,prob_ratio",
                      {&curve.at("bin_centers"), &curve.at("accuracy"),
                       &curve.at("prob_ratio")});
        }
    }
}

}  // namespace pathattr
