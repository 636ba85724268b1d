#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pathattr/errors.hpp"
#include "pathattr/evalrun.hpp"
#include "pathattr/models.hpp"
#include "testutil.hpp"

#include <json.hpp>

using namespace pathattr;

namespace {

ToyModel trained_model() {
    TrainConfig cfg;
    cfg.model.arch = Arch::SoftmaxRegression;
    cfg.data.height = 16;
    cfg.data.width = 16;
    cfg.data.square = 5;
    cfg.train_samples = 256;
    cfg.epochs = 4;
    cfg.seed = 7;
    return train_toy(cfg);
}

EvalConfig small_config() {
    EvalConfig cfg;
    cfg.data.height = 16;
    cfg.data.width = 16;
    cfg.data.square = 5;
    cfg.images = 4;
    cfg.attr.steps = 16;
    cfg.insertion_step = 0.25;
    cfg.info_measures = {"entropy"};
    cfg.aic.thresholds = 5;
    return cfg;
}

}  // namespace

TEST_CASE("method spec ids parse into method and integrator") {
    const MethodSpec ig = parse_method_spec("ig");
    CHECK(ig.method == Method::IG);
    CHECK(ig.integrator == IntegratorKind::Riemann);
    CHECK(ig.id == "ig");
    const MethodSpec bi = parse_method_spec("blur_ig+idgi");
    CHECK(bi.method == Method::BlurIG);
    CHECK(bi.integrator == IntegratorKind::Idgi);
    const MethodSpec gg = parse_method_spec("gig+idgi");
    CHECK(gg.method == Method::GIG);
    CHECK(gg.integrator == IntegratorKind::Idgi);
    CHECK_THROWS_AS(parse_method_spec("ig+simpson"), invalid_parameter_error);
    CHECK_THROWS_AS(parse_method_spec("shap"), invalid_parameter_error);
    CHECK_THROWS_AS(parse_method_spec("ig+idgi+more"), invalid_parameter_error);
    CHECK_THROWS_AS(parse_method_spec(""), invalid_parameter_error);
}

TEST_CASE("run_eval produces the full report schema") {
    const ToyModel m = trained_model();
    const EvalConfig cfg = small_config();
    const nlohmann::json report = run_eval(m, cfg);

    CHECK(report["format"] == "pathattr-eval-report");
    CHECK(report["version"] == 1);
    CHECK(report["kernels"].is_string());
    CHECK(report["model"]["arch"] == "softmax_regression");
    CHECK(report["model"]["num_classes"] == 4);
    CHECK(report["model"]["parameters"].get<std::size_t>() == m.params().size());
    CHECK_FALSE(report.contains("generated_at"));  // timestamps happen at the CLI

    const auto& ds = report["dataset"];
    REQUIRE(ds["indices"].size() == 4);
    CHECK(ds["scanned"].get<std::uint64_t>() >= 4);
    for (const auto& idx : ds["indices"])
        CHECK(idx.get<std::uint64_t>() >= cfg.start_index);

    REQUIRE(report["methods"].size() == 2);
    for (const std::string id : {"ig", "ig+idgi"}) {
        CAPTURE(id);
        const auto& mj = report["methods"][id];
        CHECK(mj["insertion"]["auc_probability"].contains("mean"));
        CHECK(mj["insertion"]["auc_ratio"].contains("median"));
        CHECK(mj["localization"]["best_f1"].contains("mean"));
        CHECK(mj["localization"]["roc_auc"].contains("mean"));
        CHECK(mj["aic_sic"]["entropy"].contains("aic"));
        CHECK(mj["aic_sic"]["entropy"].contains("sic"));
        CHECK(mj["aic_sic"]["entropy"]["occupied_bins"].get<int>() >= 1);
        CHECK(mj["completeness"].contains("mean_abs_gap"));
        REQUIRE(mj["curves"]["insertion"]["fractions"].size() == 5);
        CHECK(mj["curves"]["aic_sic"]["entropy"]["bin_centers"].size() == 100);
    }
    // the important-direction integrator telescopes exactly
    CHECK(report["methods"]["ig+idgi"]["completeness"]["max_abs_gap"].get<double>() <=
          1e-12);

    const auto& config = report["config"];
    CHECK(config["seed"] == 7);
    CHECK(config["images"] == 4);
    CHECK(config["insertion_step"] == 0.25);
    CHECK_FALSE(config.contains("jobs"));  // worker count must not change the bytes
}

TEST_CASE("run_eval is deterministic and independent of the worker count") {
    const ToyModel m = trained_model();
    EvalConfig cfg = small_config();
    const std::string once = run_eval(m, cfg).dump();
    CHECK(run_eval(m, cfg).dump() == once);
    cfg.jobs = 4;
    CHECK(run_eval(m, cfg).dump() == once);
}

TEST_CASE("run_eval scans consecutively when wrong predictions are kept") {
    const ToyModel m = trained_model();
    EvalConfig cfg = small_config();
    cfg.only_correct = false;
    cfg.methods = {"ig"};
    const nlohmann::json report = run_eval(m, cfg);
    const auto& indices = report["dataset"]["indices"];
    REQUIRE(indices.size() == 4);
    for (int i = 0; i < 4; ++i)
        CHECK(indices[i].get<std::uint64_t>() == cfg.start_index + i);
    CHECK(report["dataset"]["scanned"] == 4);
}

TEST_CASE("run_eval fails honestly when the scan budget runs out") {
    // zero weights predict class 0 everywhere; only every 4th sample matches
    ToyModelConfig mc;
    mc.arch = Arch::SoftmaxRegression;
    mc.height = 16;
    mc.width = 16;
    mc.channels = 1;
    const ToyModel m(mc);
    EvalConfig cfg = small_config();
    cfg.images = 10;
    cfg.max_scan = 8;
    CHECK_THROWS_AS(run_eval(m, cfg), training_failure);
}

TEST_CASE("run_eval rejects duplicate methods and measures") {
    const ToyModel m = trained_model();
    EvalConfig cfg = small_config();
    cfg.methods = {"ig", "ig"};
    CHECK_THROWS_AS(run_eval(m, cfg), invalid_parameter_error);
    cfg = small_config();
    cfg.info_measures = {"entropy", "entropy"};
    CHECK_THROWS_AS(run_eval(m, cfg), invalid_parameter_error);
    cfg = small_config();
    cfg.methods = {};
    CHECK_THROWS_AS(run_eval(m, cfg), invalid_parameter_error);
    cfg = small_config();
    cfg.images = 0;
    CHECK_THROWS_AS(run_eval(m, cfg), invalid_parameter_error);
    cfg = small_config();
    cfg.jobs = 0;
    CHECK_THROWS_AS(run_eval(m, cfg), invalid_parameter_error);
}
