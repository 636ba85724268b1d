#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathattr/integrators.hpp"
#include "pathattr/metrics.hpp"
#include "pathattr/models.hpp"

namespace pathattr {

/// Method id syntax: "ig", "gig", "blur_ig", optionally "+idgi" for the
/// important-direction integrator, e.g. "ig+idgi".
struct MethodSpec {
    Method method = Method::IG;
    IntegratorKind integrator = IntegratorKind::Riemann;
    std::string id;
};

MethodSpec parse_method_spec(const std::string& s);

struct EvalConfig {
    MaskQuadrantSpec data;
    std::uint64_t seed = 7;
    /// Sample stream index where evaluation begins; keep it past the training
    /// range so eval images are unseen.
    std::uint64_t start_index = 1000000;
    int images = 50;
    bool only_correct = true;
    /// Cap on how many stream indices may be scanned while collecting
    /// correctly-predicted images; 0 means 20 * images.
    std::uint64_t max_scan = 0;
    std::vector<std::string> methods = {"ig", "ig+idgi"};
    AttributeOptions attr;  // method/integrator fields are overridden per spec
    double insertion_step = 0.05;
    std::vector<std::string> info_measures = {"entropy", "msssim"};
    AicSicOptions aic;  // info_measure field is overridden per measure
    int jobs = 1;
    std::string model_source = "in-memory";  // echoed into the report
};

/// Runs the full benchmark and returns the report JSON (schema v1). The
/// result is a pure function of the model, the config, and the kernel
/// backend: worker count only distributes per-image work over threads, and
/// all aggregation happens in image order. No timestamp is added here.
nlohmann::json run_eval(const Model& m, const EvalConfig& cfg);

}  // namespace pathattr
