#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "pathattr/attribution_io.hpp"
#include "pathattr/models.hpp"
#include "pathattr/png_io.hpp"
#include "testutil.hpp"

#include <json.hpp>

using namespace pathattr;

namespace {

int run_cli(const std::string& args, const std::string& env = "") {
    std::string cmd;
    if (!env.empty()) cmd += env + " ";
    cmd += "\"" PATHATTR_CLI_PATH "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

int run_cli_capture(const std::string& args, const std::string& out_file) {
    const std::string cmd =
        "\"" PATHATTR_CLI_PATH "\" " + args + " >\"" + out_file + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// One trained model shared by every case in this binary.
struct Workspace {
    testutil::TempDir dir;
    std::string model = dir.file("model.json");

    Workspace() {
        const int rc = run_cli("train-toy --out \"" + model +
                               "\" --arch softmax_regression --height 16 --width 16"
                               " --square 5 --train-samples 256 --epochs 4 --seed 7");
        if (rc != 0) throw std::runtime_error("workspace training failed");
    }

    std::string data_flags() const { return "--height 16 --width 16 --square 5"; }
};

Workspace& ws() {
    static Workspace w;
    return w;
}

}  // namespace

TEST_CASE("version flag prints the tool version") {
    testutil::TempDir dir;
    const std::string out = dir.file("version.txt");
    CHECK(run_cli_capture("--version", out) == 0);
    CHECK(slurp(out) == "pathattr 1.0.0\n");
}

TEST_CASE("train-toy writes a loadable weights file") {
    const ToyModel m = load_model(ws().model);
    CHECK(m.config().arch == Arch::SoftmaxRegression);
    CHECK(m.config().height == 16);
    CHECK(m.num_classes() == 4);
}

TEST_CASE("train-toy exits 4 when the accuracy gate fails") {
    testutil::TempDir dir;
    CHECK(run_cli("train-toy --out \"" + dir.file("m.json") +
                  "\" --arch linear --height 16 --width 16 --square 5"
                  " --train-samples 64 --epochs 1 --learning-rate 1e-12") == 4);
}

TEST_CASE("train-toy exits 2 on an invalid data spec") {
    testutil::TempDir dir;
    CHECK(run_cli("train-toy --out \"" + dir.file("m.json") +
                  "\" --height 16 --width 16 --square 5 --noise-max 0.9") == 2);
    CHECK(run_cli("train-toy --height 16") == 2);  // --out is required
}

TEST_CASE("attribute emits every requested artifact") {
    testutil::TempDir dir;
    const std::string base = dir.file("attr");
    const std::string heatmap = dir.file("heat.png");
    const std::string csv = dir.file("steps.csv");
    const std::string input = dir.file("input.png");
    CHECK(run_cli("attribute --model \"" + ws().model + "\" --sample 1000001 " +
                  ws().data_flags() + " --steps 8 --out \"" + base + "\" --heatmap \"" +
                  heatmap + "\" --dump-steps \"" + csv + "\" --save-input \"" + input +
                  "\"") == 0);

    const AttributionMap a = load_attribution(base);
    CHECK(a.method == "ig");
    CHECK(a.integrator == "riemann");
    CHECK(a.steps == 8);
    CHECK(a.attributions.height == 16);
    CHECK(a.attributions.width == 16);

    const ImageTensor h = read_png(heatmap);
    CHECK(h.height == 16);
    CHECK(h.channels == 1);
    CHECK(read_png(input).same_shape(h));

    const std::string dump = slurp(csv);
    CHECK(dump.rfind("index,alpha,value,delta,grad_norm,degenerate\n", 0) == 0);
    int lines = 0;
    for (char c : dump) lines += c == '\n';
    CHECK(lines == 9);  // header + one row per step
}

TEST_CASE("attribute reads PNG inputs and honors method flags") {
    testutil::TempDir dir;
    const std::string input = dir.file("input.png");
    write_png(make_sample(MaskQuadrantSpec{16, 16, 1, 5, 0.3, 0.7, 1.0}, 7, 1000002).x,
              input);
    const std::string base = dir.file("blur");
    CHECK(run_cli("attribute --model \"" + ws().model + "\" --image \"" + input +
                  "\" --method blur_ig --integrator idgi --max-sigma 3 --steps 6"
                  " --out \"" + base + "\"") == 0);
    const AttributionMap a = load_attribution(base);
    CHECK(a.method == "blur_ig");
    CHECK(a.integrator == "idgi");
    CHECK(std::abs(a.sum - (a.input_value - a.base_value)) <= 1e-12);
}

TEST_CASE("attribute rejects conflicting or missing inputs") {
    testutil::TempDir dir;
    const std::string input = dir.file("x.png");
    write_png(ImageTensor(16, 16, 1, 0.5), input);
    const std::string model_arg = "attribute --model \"" + ws().model + "\" ";
    CHECK(run_cli(model_arg + "--image \"" + input + "\" --sample 3") == 2);
    CHECK(run_cli(model_arg) == 2);  // neither --image nor --sample
    CHECK(run_cli(model_arg + "--sample 3 --method fancy") == 2);
    CHECK(run_cli(model_arg + "--image \"" + dir.file("absent.png") + "\"") == 3);
    CHECK(run_cli("attribute --model \"" + dir.file("absent.json") +
                  "\" --sample 3") == 3);
    CHECK(run_cli(model_arg + "--sample 3 --target 7") == 2);
}

TEST_CASE("seed precedence runs flag over environment over default") {
    testutil::TempDir dir;
    const std::string args = "attribute --model \"" + ws().model + "\" --sample 5 " +
                             ws().data_flags() + " --steps 4 --out \"";
    CHECK(run_cli(args + dir.file("d") + "\"") == 0);
    CHECK(run_cli(args + dir.file("e") + "\"", "PATHATTR_SEED=9") == 0);
    CHECK(run_cli(args + dir.file("f") + "\" --seed 7", "PATHATTR_SEED=9") == 0);
    const std::string d = slurp(dir.file("d.bin"));
    const std::string e = slurp(dir.file("e.bin"));
    const std::string f = slurp(dir.file("f.bin"));
    CHECK(d != e);  // env switches the sample stream
    CHECK(d == f);  // explicit flag restores the default stream
    CHECK(run_cli(args + dir.file("g") + "\"", "PATHATTR_SEED=banana") == 2);
}

TEST_CASE("eval writes a timestamped report with curves") {
    testutil::TempDir dir;
    const std::string config = dir.file("eval.json");
    std::ofstream(config) << R"({
        "data": {"height": 16, "width": 16, "square": 5},
        "images": 3,
        "attr": {"steps": 8},
        "insertion_step": 0.25,
        "info_measures": ["entropy"],
        "aic_sic": {"thresholds": 5},
        "methods": ["ig", "ig+idgi"]
    })";
    const std::string r1 = dir.file("r1.json");
    const std::string curves = dir.file("curves");
    CHECK(run_cli("eval --model \"" + ws().model + "\" --config \"" + config +
                  "\" --out \"" + r1 + "\" --curves-dir \"" + curves + "\"") == 0);

    nlohmann::json report;
    std::ifstream(r1) >> report;
    CHECK(report["format"] == "pathattr-eval-report");
    CHECK(report.contains("generated_at"));
    CHECK(report["dataset"]["indices"].size() == 3);
    CHECK(report["methods"].contains("ig+idgi"));
    CHECK(slurp(curves + "/ig_insertion.csv").rfind("fraction,", 0) == 0);
    CHECK(slurp(curves + "/ig+idgi_aic_sic_entropy.csv").rfind("bin_center,", 0) == 0);

    // a second run with a different worker count differs only in the timestamp
    const std::string r2 = dir.file("r2.json");
    CHECK(run_cli("eval --model \"" + ws().model + "\" --config \"" + config +
                  "\" --out \"" + r2 + "\" --jobs 3") == 0);
    nlohmann::json second;
    std::ifstream(r2) >> second;
    report.erase("generated_at");
    second.erase("generated_at");
    CHECK(report.dump() == second.dump());
}

TEST_CASE("eval flags override the config file") {
    testutil::TempDir dir;
    const std::string config = dir.file("eval.json");
    std::ofstream(config) << R"({
        "data": {"height": 16, "width": 16, "square": 5},
        "images": 3,
        "attr": {"steps": 6},
        "insertion_step": 0.5,
        "info_measures": ["entropy"],
        "aic_sic": {"thresholds": 3},
        "methods": ["ig", "ig+idgi"]
    })";
    const std::string out = dir.file("r.json");
    CHECK(run_cli("eval --model \"" + ws().model + "\" --config \"" + config +
                  "\" --out \"" + out + "\" --images 2 --methods ig") == 0);
    nlohmann::json report;
    std::ifstream(out) >> report;
    CHECK(report["dataset"]["indices"].size() == 2);
    CHECK(report["methods"].size() == 1);
    CHECK(report["config"]["images"] == 2);

    // data flags beat the config file too: height 8 would reject square 5
    const std::string shrunk = dir.file("shrunk.json");
    std::ofstream(shrunk) << R"({
        "data": {"height": 8, "width": 16, "square": 5},
        "images": 2, "methods": ["ig"], "insertion_step": 0.5,
        "info_measures": ["entropy"], "aic_sic": {"thresholds": 3},
        "attr": {"steps": 6}
    })";
    CHECK(run_cli("eval --model \"" + ws().model + "\" --config \"" + shrunk +
                  "\" --out \"" + out + "\"") == 2);
    CHECK(run_cli("eval --model \"" + ws().model + "\" --config \"" + shrunk +
                  "\" --height 16 --out \"" + out + "\"") == 0);
}

TEST_CASE("eval rejects unknown config keys with exit 3") {
    testutil::TempDir dir;
    const std::string config = dir.file("eval.json");
    std::ofstream(config) << R"({"imagez": 3})";
    CHECK(run_cli("eval --model \"" + ws().model + "\" --config \"" + config +
                  "\" --out \"" + dir.file("r.json") + "\"") == 3);
}

TEST_CASE("report summarizes an existing report file") {
    testutil::TempDir dir;
    const std::string out = dir.file("r.json");
    // config-free run: the data spec comes straight from the flags
    CHECK(run_cli("eval --model \"" + ws().model + "\" " + ws().data_flags() +
                  " --images 2 --steps 6 --methods ig --insertion-step 0.5 --out \"" +
                  out + "\"") == 0);
    const std::string text = dir.file("summary.txt");
    CHECK(run_cli_capture("report --in \"" + out + "\"", text) == 0);
    const std::string summary = slurp(text);
    CHECK(summary.find("ig") != std::string::npos);
    CHECK(summary.find("insertion") != std::string::npos);
    CHECK(run_cli("report --in \"" + dir.file("absent.json") + "\"") == 3);
}
