#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathattr/integrators.hpp"
#include "pathattr/metrics.hpp"
#include "pathattr/models.hpp"
#include "pathattr/paths.hpp"
#include "pathattr/png_io.hpp"
#include "pathattr/rng.hpp"
#include "testutil.hpp"

using namespace pathattr;
using nlohmann::json;

namespace {

std::string fixture(const std::string& name) {
    return std::string(PATHATTR_FIXTURE_DIR) + "/" + name;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    json j;
    in >> j;
    return j;
}

}  // namespace

// The oracle freezes the committed model's logits on one eval-stream sample.
// Regenerated weights that drift past 1e-9 fail here before anything else.
TEST_CASE("committed cnn matches its frozen forward oracle") {
    const ToyModel m = load_model(fixture("maskquad_cnn32_s7.json"));
    const json oracle = load_json(fixture("cnn32_forward_oracle.json"));
    const MaskQuadrantSpec spec;
    const Sample s = make_sample(spec, oracle.at("seed").get<std::uint64_t>(),
                                 oracle.at("index").get<std::uint64_t>());
    REQUIRE(s.label == oracle.at("label").get<int>());
    const std::vector<double> scores = m.scores(s.x);
    const std::vector<double> want = oracle.at("scores").get<std::vector<double>>();
    REQUIRE(scores.size() == want.size());
    for (std::size_t i = 0; i < scores.size(); ++i)
        CHECK(std::abs(scores[i] - want[i]) <= 1e-9);
    CHECK(m.predict(s.x) == s.label);
}

TEST_CASE("committed cnn generalizes to held-out samples") {
    const ToyModel m = load_model(fixture("maskquad_cnn32_s7.json"));
    const MaskQuadrantSpec spec;
    int correct = 0;
    const int n = 200;
    for (int i = 0; i < n; ++i) {
        const Sample s = make_sample(spec, 7, 1000000 + static_cast<std::uint64_t>(i));
        correct += m.predict(s.x) == s.label ? 1 : 0;
    }
    CHECK(static_cast<double>(correct) / n >= 0.9);
}

TEST_CASE("committed witness triple breaks idgi additivity") {
    const ToyModel f1 = load_model(fixture("linwit_f1.json"));
    const ToyModel f2 = load_model(fixture("linwit_f2.json"));
    const ToyModel f3 = load_model(fixture("linwit_f3.json"));
    ImageTensor base(1, 2, 1, 0.0), x(1, 2, 1, 1.0);
    const auto path = straight_path(base, x, 5);
    const AttributionMap a1 = idgi_integrate(f1, 0, path);
    const AttributionMap a2 = idgi_integrate(f2, 0, path);
    const AttributionMap a3 = idgi_integrate(f3, 0, path);
    double gap = 0.0;
    for (int i = 0; i < 2; ++i)
        gap = std::max(gap, std::abs(a3.attributions.data[i] -
                                     (a1.attributions.data[i] + a2.attributions.data[i])));
    CHECK(gap > 0.01);
    // The sum of the parts still satisfies completeness individually.
    CHECK(std::abs(a1.sum - (f1.value(x, 0) - f1.value(base, 0))) <= 1e-10);
    CHECK(std::abs(a3.sum - (f3.value(x, 0) - f3.value(base, 0))) <= 1e-10);
}

TEST_CASE("committed pathology image keeps black evidence pixels") {
    const ImageTensor x = read_png(fixture("black_pixels_image.png"));
    const ImageTensor mask = read_png(fixture("black_pixels_mask.png"));
    REQUIRE(x.same_shape(ImageTensor(32, 32, 1)));
    REQUIRE(mask.same_shape(x));
    int black_in_mask = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        CHECK((mask.data[i] == 0.0 || mask.data[i] == 1.0));
        if (mask.data[i] == 1.0 && x.data[i] == 0.0) ++black_in_mask;
    }
    CHECK(black_in_mask == 9);

    const ToyModel m = load_model(fixture("maskquad_cnn32_s7.json"));
    const int target = m.predict(x);
    AttributeOptions opts;
    opts.steps = 50;
    const AttributionMap ig = attribute(m, x, target, opts);
    opts.integrator = IntegratorKind::Idgi;
    const AttributionMap idgi = attribute(m, x, target, opts);
    double idgi_max = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask.data[i] != 1.0 || x.data[i] != 0.0) continue;
        CHECK(ig.attributions.data[i] == 0.0);
        idgi_max = std::max(idgi_max, std::abs(idgi.attributions.data[i]));
    }
    CHECK(idgi_max > 0.0);
}

TEST_CASE("committed study config pins the published comparison") {
    const json j = load_json(fixture("directional_study_config.json"));
    CHECK(j.at("seed").get<int>() == 7);
    CHECK(j.at("images").get<int>() == 200);
    CHECK(j.at("methods") == json({"ig", "ig+idgi"}));
    CHECK(j.at("info_measures") == json({"msssim"}));
    CHECK(j.at("attr").at("steps").get<int>() == 50);
    CHECK(j.at("attr").at("baseline").get<std::string>() == "white");
    CHECK(j.at("data").at("height").get<int>() == 32);
    CHECK(j.at("data").at("distractors").get<int>() == 0);
}

TEST_CASE("msssim falls monotonically along a blur ladder") {
    const MaskQuadrantSpec spec;
    const Sample s = make_sample(spec, 7, 5);
    double prev = msssim(s.x, s.x);
    CHECK(prev == doctest::Approx(1.0).epsilon(1e-9));
    for (double sigma : {1.0, 2.0, 4.0, 8.0, 16.0}) {
        const double cur = msssim(s.x, blur(s.x, sigma));
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("msssim separates an image from its negative") {
    const MaskQuadrantSpec spec;
    const Sample s = make_sample(spec, 7, 5);
    ImageTensor inv = s.x;
    for (double& v : inv.data) v = 1.0 - v;
    CHECK(msssim(s.x, inv) < 0.5);
}

TEST_CASE("heavy blur lowers normalized entropy below 1") {
    const MaskQuadrantSpec spec;
    const Sample s = make_sample(spec, 7, 5);
    CHECK(normalized_entropy(blur(s.x, 8.0), s.x) < 1.0);
}

TEST_CASE("ground-truth importance beats random importance") {
    const ToyModel m = load_model(fixture("maskquad_cnn32_s7.json"));
    const MaskQuadrantSpec spec;
    std::mt19937_64 g(424242);
    std::vector<ImageTensor> xs, truth, random_maps;
    for (int i = 0; i < 8; ++i) {
        const Sample s = make_sample(spec, 7, 1000000 + static_cast<std::uint64_t>(i));
        xs.push_back(s.x);
        truth.push_back(s.mask);
        ImageTensor r(s.x.height, s.x.width, 1);
        for (double& v : r.data) v = rng::uniform(g);
        random_maps.push_back(r);
    }
    const AicSicResult sic_truth = aic_sic(m, xs, truth);
    const AicSicResult sic_random = aic_sic(m, xs, random_maps);
    CHECK(sic_truth.sic > sic_random.sic);

    const LocalizationResult loc_truth = localization(truth[0], truth[0]);
    const LocalizationResult loc_random = localization(random_maps[0], truth[0]);
    CHECK(loc_truth.roc_auc > loc_random.roc_auc);
}
