#include "pathattr/evalrun.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include "pathattr/errors.hpp"
#include "pathattr/kernels.hpp"
#include "pathattr/report.hpp"

namespace pathattr {

MethodSpec parse_method_spec(const std::string& s) {
    MethodSpec spec;
    std::string base = s;
    const auto plus = s.find('+');
    if (plus != std::string::npos) {
        base = s.substr(0, plus);
        if (s.substr(plus + 1) != "idgi")
            throw invalid_parameter_error("unknown method spec: " + s);
        spec.integrator = IntegratorKind::Idgi;
    }
    spec.method = method_from_string(base);
    spec.id = method_to_string(spec.method);
    if (spec.integrator == IntegratorKind::Idgi) spec.id += "+idgi";
    return spec;
}

namespace {

// Runs fn(0..n-1) on `jobs` threads pulling from a shared counter. Results
// must be written to per-index slots; callers aggregate afterwards in index
// order, which keeps the output independent of the thread schedule.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
    jobs = std::min(jobs, n);
    if (jobs <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr err;
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(err_mutex);
                if (!err) err = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
    if (err) std::rethrow_exception(err);
}

struct PerImage {
    InsertionCurves insertion;
    LocalizationResult loc;
    ImageTensor importance;
    double completeness_gap = 0.0;
    int degenerate_steps = 0;
};

}  // namespace

nlohmann::json run_eval(const Model& m, const EvalConfig& cfg) {
    if (cfg.images < 1) throw invalid_parameter_error("eval: images must be >= 1");
    if (cfg.jobs < 1) throw invalid_parameter_error("eval: jobs must be >= 1");
    if (cfg.methods.empty()) throw invalid_parameter_error("eval: no methods given");
    if (cfg.info_measures.empty())
        throw invalid_parameter_error("eval: no info measures given");

    std::vector<MethodSpec> specs;
    for (const std::string& s : cfg.methods) {
        MethodSpec ms = parse_method_spec(s);
        for (const MethodSpec& prev : specs)
            if (prev.id == ms.id)
                throw invalid_parameter_error("duplicate method: " + ms.id);
        specs.push_back(std::move(ms));
    }
    for (std::size_t i = 0; i < cfg.info_measures.size(); ++i) {
        const std::string& im = cfg.info_measures[i];
        if (im != "entropy" && im != "msssim")
            throw invalid_parameter_error("unknown info measure: " + im);
        for (std::size_t j = 0; j < i; ++j)
            if (cfg.info_measures[j] == im)
                throw invalid_parameter_error("duplicate info measure: " + im);
    }

    // Collect the evaluation set from the sample stream.
    const std::uint64_t budget =
        cfg.max_scan ? cfg.max_scan : 20ull * static_cast<std::uint64_t>(cfg.images);
    std::vector<ImageTensor> xs;
    std::vector<ImageTensor> masks;
    std::vector<int> targets;
    std::vector<std::uint64_t> indices;
    std::uint64_t scanned = 0;
    for (std::uint64_t idx = cfg.start_index;
         xs.size() < static_cast<std::size_t>(cfg.images) && scanned < budget;
         ++idx, ++scanned) {
        Sample s = make_sample(cfg.data, cfg.seed, idx);
        const int pred = m.predict(s.x);
        if (cfg.only_correct && pred != s.label) continue;
        xs.push_back(std::move(s.x));
        masks.push_back(std::move(s.mask));
        targets.push_back(pred);
        indices.push_back(idx);
    }
    if (xs.size() < static_cast<std::size_t>(cfg.images))
        throw training_failure("eval: model produced only " + std::to_string(xs.size()) +
                               " of " + std::to_string(cfg.images) +
                               " correctly predicted images within the scan budget of " +
                               std::to_string(budget));

    const int n = static_cast<int>(xs.size());
    nlohmann::json methods_json = nlohmann::json::object();

    for (const MethodSpec& spec : specs) {
        AttributeOptions opts = cfg.attr;
        opts.method = spec.method;
        opts.integrator = spec.integrator;

        std::vector<PerImage> slots(static_cast<std::size_t>(n));
        parallel_for(n, cfg.jobs, [&](int i) {
            const AttributionMap a = attribute(m, xs[i], targets[i], opts);
            PerImage& p = slots[i];
            p.importance = pixel_importance(a.attributions);
            p.insertion =
                insertion_curve(m, xs[i], targets[i], p.importance, cfg.insertion_step);
            p.loc = localization(p.importance, masks[i]);
            p.completeness_gap = std::abs(a.sum - (a.input_value - a.base_value));
            p.degenerate_steps = a.degenerate_steps;
        });

        std::vector<double> auc_p, auc_r, f1, roc, mae, thr, gaps;
        auc_p.reserve(n); auc_r.reserve(n); f1.reserve(n); roc.reserve(n);
        mae.reserve(n); thr.reserve(n); gaps.reserve(n);
        long long degenerate_total = 0;
        const std::vector<double>& fractions = slots[0].insertion.fractions;
        std::vector<double> prob_mean(fractions.size(), 0.0);
        std::vector<double> ratio_mean(fractions.size(), 0.0);
        for (const PerImage& p : slots) {
            auc_p.push_back(p.insertion.auc_probability);
            auc_r.push_back(p.insertion.auc_ratio);
            f1.push_back(p.loc.best_f1);
            roc.push_back(p.loc.roc_auc);
            mae.push_back(p.loc.mae);
            thr.push_back(p.loc.best_threshold);
            gaps.push_back(p.completeness_gap);
            degenerate_total += p.degenerate_steps;
            for (std::size_t j = 0; j < fractions.size(); ++j) {
                prob_mean[j] += p.insertion.probability[j];
                ratio_mean[j] += p.insertion.ratio[j];
            }
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        for (double& v : prob_mean) v *= inv_n;
        for (double& v : ratio_mean) v *= inv_n;

        std::vector<ImageTensor> importances;
        importances.reserve(static_cast<std::size_t>(n));
        for (PerImage& p : slots) importances.push_back(std::move(p.importance));

        nlohmann::json aic_stats = nlohmann::json::object();
        nlohmann::json aic_curves = nlohmann::json::object();
        for (const std::string& measure : cfg.info_measures) {
            AicSicOptions ao = cfg.aic;
            ao.info_measure = measure;
            const AicSicResult r = aic_sic(m, xs, importances, ao);
            std::size_t occupied = 0;
            for (std::size_t c : r.bin_counts) occupied += c > 0 ? 1 : 0;
            aic_stats[measure] = {
                {"aic", r.aic}, {"sic", r.sic}, {"occupied_bins", occupied}};
            aic_curves[measure] = {{"bin_centers", r.bin_centers},
                                   {"accuracy", r.accuracy},
                                   {"prob_ratio", r.prob_ratio}};
        }

        methods_json[spec.id] = {
            {"insertion",
             {{"auc_probability", summary_stats(auc_p)},
              {"auc_ratio", summary_stats(auc_r)}}},
            {"localization",
             {{"best_f1", summary_stats(f1)},
              {"roc_auc", summary_stats(roc)},
              {"mae", summary_stats(mae)},
              {"best_threshold", summary_stats(thr)}}},
            {"aic_sic", aic_stats},
            {"completeness",
             {{"mean_abs_gap", mean(gaps)},
              {"max_abs_gap", *std::max_element(gaps.begin(), gaps.end())}}},
            {"degenerate_steps_total", degenerate_total},
            {"curves",
             {{"insertion",
               {{"fractions", fractions},
                {"probability_mean", prob_mean},
                {"ratio_mean", ratio_mean}}},
              {"aic_sic", aic_curves}}},
        };
    }

    nlohmann::json report;
    report["format"] = "pathattr-eval-report";
    report["version"] = 1;
    report["kernels"] = kernels::active_name();

    nlohmann::json config;
    config["seed"] = cfg.seed;
    config["start_index"] = cfg.start_index;
    config["images"] = cfg.images;
    config["only_correct"] = cfg.only_correct;
    config["insertion_step"] = cfg.insertion_step;
    config["info_measures"] = cfg.info_measures;
    nlohmann::json method_ids = nlohmann::json::array();
    for (const MethodSpec& spec : specs) method_ids.push_back(spec.id);
    config["methods"] = method_ids;
    config["data"] = {{"height", cfg.data.height},
                      {"width", cfg.data.width},
                      {"channels", cfg.data.channels},
                      {"square", cfg.data.square},
                      {"noise_max", cfg.data.noise_max},
                      {"bright_min", cfg.data.bright_min},
                      {"bright_max", cfg.data.bright_max},
                      {"distractors", cfg.data.distractors},
                      {"distractor_min", cfg.data.distractor_min},
                      {"distractor_max", cfg.data.distractor_max}};
    config["attr"] = {{"steps", cfg.attr.steps},
                      {"baseline", cfg.attr.baseline},
                      {"max_sigma", cfg.attr.max_sigma},
                      {"gig_fraction", cfg.attr.gig_fraction},
                      {"use_logits", cfg.attr.use_logits}};
    config["aic_sic"] = {{"thresholds", cfg.aic.thresholds},
                         {"bins", cfg.aic.bins},
                         {"blur_sigma", cfg.aic.blur_sigma},
                         {"blur_radius", cfg.aic.blur_radius}};
    report["config"] = config;

    nlohmann::json model_json;
    model_json["source"] = cfg.model_source;
    model_json["num_classes"] = m.num_classes();
    if (const auto* tm = dynamic_cast<const ToyModel*>(&m)) {
        model_json["arch"] = arch_to_string(tm->config().arch);
        model_json["parameters"] = tm->params().size();
    }
    report["model"] = model_json;

    report["dataset"] = {{"scanned", scanned}, {"indices", indices}};
    report["methods"] = methods_json;
    return report;
}

}  // namespace pathattr
