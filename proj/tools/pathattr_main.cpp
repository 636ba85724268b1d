#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pathattr/attribution_io.hpp"
#include "pathattr/errors.hpp"
#include "pathattr/evalrun.hpp"
#include "pathattr/integrators.hpp"
#include "pathattr/metrics.hpp"
#include "pathattr/models.hpp"
#include "pathattr/png_io.hpp"
#include "pathattr/report.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitTraining = 4;

using nlohmann::json;
using namespace pathattr;

// Returns true and fills `out` when PATHATTR_SEED is set. Precedence is
// --seed flag > PATHATTR_SEED > config file > built-in default.
bool env_seed(std::uint64_t& out) {
    const char* v = std::getenv("PATHATTR_SEED");
    if (!v || !*v) return false;
    char* end = nullptr;
    errno = 0;
    const unsigned long long parsed = std::strtoull(v, &end, 10);
    if (errno != 0 || end == v || *end != '\0')
        throw invalid_parameter_error(std::string("PATHATTR_SEED is not a valid "
                                                  "unsigned integer: ") +
                                      v);
    out = parsed;
    return true;
}

struct DataOptions {
    CLI::Option* height = nullptr;
    CLI::Option* width = nullptr;
    CLI::Option* channels = nullptr;
    CLI::Option* square = nullptr;
    CLI::Option* noise_max = nullptr;
    CLI::Option* bright_min = nullptr;
    CLI::Option* bright_max = nullptr;
    CLI::Option* distractors = nullptr;
    CLI::Option* distractor_min = nullptr;
    CLI::Option* distractor_max = nullptr;
};

DataOptions add_data_options(CLI::App* cmd, MaskQuadrantSpec& data) {
    DataOptions o;
    o.height = cmd->add_option("--height", data.height, "Sample image height");
    o.width = cmd->add_option("--width", data.width, "Sample image width");
    o.channels = cmd->add_option("--channels", data.channels, "Sample image channels");
    o.square = cmd->add_option("--square", data.square, "Bright square side length");
    o.noise_max =
        cmd->add_option("--noise-max", data.noise_max, "Background noise upper bound");
    o.bright_min =
        cmd->add_option("--bright-min", data.bright_min, "Square intensity lower bound");
    o.bright_max =
        cmd->add_option("--bright-max", data.bright_max, "Square intensity upper bound");
    o.distractors = cmd->add_option("--distractors", data.distractors,
                                    "Dimmer squares placed in rival quadrants");
    o.distractor_min = cmd->add_option("--distractor-min", data.distractor_min,
                                       "Distractor intensity lower bound");
    o.distractor_max = cmd->add_option("--distractor-max", data.distractor_max,
                                       "Distractor intensity upper bound");
    return o;
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) {
                ok = true;
                break;
            }
        if (!ok) throw format_error("unknown key '" + key + "' in " + where);
    }
}

void load_eval_config(const std::string& path, EvalConfig& cfg) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open eval config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw format_error("eval config is not valid JSON (" + path + "): " + e.what());
    }
    try {
        check_keys(j,
                   {"seed", "start_index", "images", "only_correct", "max_scan",
                    "methods", "insertion_step", "info_measures", "jobs", "data", "attr",
                    "aic_sic"},
                   "eval config");
        cfg.seed = j.value("seed", cfg.seed);
        cfg.start_index = j.value("start_index", cfg.start_index);
        cfg.images = j.value("images", cfg.images);
        cfg.only_correct = j.value("only_correct", cfg.only_correct);
        cfg.max_scan = j.value("max_scan", cfg.max_scan);
        cfg.methods = j.value("methods", cfg.methods);
        cfg.insertion_step = j.value("insertion_step", cfg.insertion_step);
        cfg.info_measures = j.value("info_measures", cfg.info_measures);
        cfg.jobs = j.value("jobs", cfg.jobs);
        if (j.contains("data")) {
            const json& d = j["data"];
            check_keys(d,
                       {"height", "width", "channels", "square", "noise_max",
                        "bright_min", "bright_max", "distractors", "distractor_min",
                        "distractor_max"},
                       "eval config data");
            cfg.data.height = d.value("height", cfg.data.height);
            cfg.data.width = d.value("width", cfg.data.width);
            cfg.data.channels = d.value("channels", cfg.data.channels);
            cfg.data.square = d.value("square", cfg.data.square);
            cfg.data.noise_max = d.value("noise_max", cfg.data.noise_max);
            cfg.data.bright_min = d.value("bright_min", cfg.data.bright_min);
            cfg.data.bright_max = d.value("bright_max", cfg.data.bright_max);
            cfg.data.distractors = d.value("distractors", cfg.data.distractors);
            cfg.data.distractor_min =
                d.value("distractor_min", cfg.data.distractor_min);
            cfg.data.distractor_max =
                d.value("distractor_max", cfg.data.distractor_max);
        }
        if (j.contains("attr")) {
            const json& a = j["attr"];
            check_keys(a, {"steps", "baseline", "max_sigma", "gig_fraction", "use_logits"},
                       "eval config attr");
            cfg.attr.steps = a.value("steps", cfg.attr.steps);
            cfg.attr.baseline = a.value("baseline", cfg.attr.baseline);
            cfg.attr.max_sigma = a.value("max_sigma", cfg.attr.max_sigma);
            cfg.attr.gig_fraction = a.value("gig_fraction", cfg.attr.gig_fraction);
            cfg.attr.use_logits = a.value("use_logits", cfg.attr.use_logits);
        }
        if (j.contains("aic_sic")) {
            const json& a = j["aic_sic"];
            check_keys(a, {"thresholds", "bins", "blur_sigma", "blur_radius"},
                       "eval config aic_sic");
            cfg.aic.thresholds = a.value("thresholds", cfg.aic.thresholds);
            cfg.aic.bins = a.value("bins", cfg.aic.bins);
            cfg.aic.blur_sigma = a.value("blur_sigma", cfg.aic.blur_sigma);
            cfg.aic.blur_radius = a.value("blur_radius", cfg.aic.blur_radius);
        }
    } catch (const json::exception& e) {
        throw format_error("malformed eval config (" + path + "): " + e.what());
    }
}

void write_steps_csv(const std::vector<StepRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open step dump for writing: " + path);
    out << "index,alpha,value,delta,grad_norm,degenerate\n";
    char buf[256];
    for (const StepRecord& r : records) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%d\n", r.index,
                      r.alpha, r.value, r.delta, r.grad_norm, r.degenerate ? 1 : 0);
        out << buf;
    }
    if (!out) throw io_error("failed writing step dump: " + path);
}

struct TrainArgs {
    TrainConfig cfg;
    std::string arch = "tiny_cnn";
    std::string out;
    bool seed_given = false;
};

int cmd_train(TrainArgs& a) {
    if (!a.seed_given) env_seed(a.cfg.seed);
    a.cfg.model.arch = arch_from_string(a.arch);
    TrainStats stats;
    const ToyModel model = train_toy(a.cfg, &stats);
    save_model(model, a.out);
    std::cout << "trained " << a.arch << ": accuracy=" << stats.train_accuracy
              << " parameters=" << model.params().size() << " epochs=" << a.cfg.epochs
              << "\nweights written to " << a.out << "\n";
    return 0;
}

struct AttributeArgs {
    std::string model_path;
    std::string image_path;
    std::int64_t sample_index = -1;
    MaskQuadrantSpec data;
    std::uint64_t seed = 7;
    bool seed_given = false;
    int target = -1;
    std::string method = "ig";
    std::string integrator = "riemann";
    AttributeOptions opts;
    std::string baseline_image;
    std::string out_base;
    std::string heatmap_path;
    std::string steps_csv;
    std::string save_input;
};

int cmd_attribute(AttributeArgs& a) {
    if (!a.seed_given) env_seed(a.seed);
    a.opts.method = method_from_string(a.method);
    a.opts.integrator = integrator_from_string(a.integrator);
    if (!a.baseline_image.empty()) {
        a.opts.custom_baseline = read_png(a.baseline_image);
        a.opts.baseline = "custom";
    }

    const ToyModel model = load_model(a.model_path);

    ImageTensor x;
    if (!a.image_path.empty()) {
        x = read_png(a.image_path);
    } else if (a.sample_index >= 0) {
        x = make_sample(a.data, a.seed, static_cast<std::uint64_t>(a.sample_index)).x;
    } else {
        throw invalid_parameter_error("attribute: give --image or --sample");
    }
    if (!a.save_input.empty()) write_png(x, a.save_input);

    const int target = a.target >= 0 ? a.target : model.predict(x);

    std::vector<StepRecord> records;
    const AttributionMap map =
        attribute(model, x, target, a.opts, a.steps_csv.empty() ? nullptr : &records);

    std::cout << "method=" << map.method << " integrator=" << map.integrator
              << " target=" << map.target_class << " steps=" << map.steps << "\n"
              << "base_value=" << map.base_value << " input_value=" << map.input_value
              << " sum=" << map.sum
              << " completeness_gap=" << std::abs(map.sum - (map.input_value - map.base_value))
              << " degenerate_steps=" << map.degenerate_steps << "\n";

    if (!a.out_base.empty()) {
        save_attribution(map, a.out_base);
        std::cout << "attribution written to " << a.out_base << ".bin/.json\n";
    }
    if (!a.heatmap_path.empty()) {
        write_png(render_heatmap(map.attributions), a.heatmap_path);
        std::cout << "heatmap written to " << a.heatmap_path << "\n";
    }
    if (!a.steps_csv.empty()) {
        write_steps_csv(records, a.steps_csv);
        std::cout << "step records written to " << a.steps_csv << "\n";
    }
    return 0;
}

struct EvalArgs {
    std::string model_path;
    std::string config_path;
    std::string out_path;
    std::string curves_dir;
    EvalConfig cfg;
    MaskQuadrantSpec data_flags;
    DataOptions data_opts;
    std::uint64_t seed_flag = 0;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* images_opt = nullptr;
    CLI::Option* start_opt = nullptr;
    CLI::Option* steps_opt = nullptr;
    CLI::Option* methods_opt = nullptr;
    CLI::Option* jobs_opt = nullptr;
    CLI::Option* step_frac_opt = nullptr;
    CLI::Option* include_wrong_opt = nullptr;
    int images_flag = 0;
    std::uint64_t start_flag = 0;
    int steps_flag = 0;
    std::vector<std::string> methods_flag;
    int jobs_flag = 0;
    double step_frac_flag = 0.0;
};

int cmd_eval(EvalArgs& a) {
    if (!a.config_path.empty()) load_eval_config(a.config_path, a.cfg);
    if (a.data_opts.height->count() > 0) a.cfg.data.height = a.data_flags.height;
    if (a.data_opts.width->count() > 0) a.cfg.data.width = a.data_flags.width;
    if (a.data_opts.channels->count() > 0) a.cfg.data.channels = a.data_flags.channels;
    if (a.data_opts.square->count() > 0) a.cfg.data.square = a.data_flags.square;
    if (a.data_opts.noise_max->count() > 0) a.cfg.data.noise_max = a.data_flags.noise_max;
    if (a.data_opts.bright_min->count() > 0)
        a.cfg.data.bright_min = a.data_flags.bright_min;
    if (a.data_opts.bright_max->count() > 0)
        a.cfg.data.bright_max = a.data_flags.bright_max;
    if (a.data_opts.distractors->count() > 0)
        a.cfg.data.distractors = a.data_flags.distractors;
    if (a.data_opts.distractor_min->count() > 0)
        a.cfg.data.distractor_min = a.data_flags.distractor_min;
    if (a.data_opts.distractor_max->count() > 0)
        a.cfg.data.distractor_max = a.data_flags.distractor_max;
    env_seed(a.cfg.seed);
    if (a.seed_opt->count() > 0) a.cfg.seed = a.seed_flag;
    if (a.images_opt->count() > 0) a.cfg.images = a.images_flag;
    if (a.start_opt->count() > 0) a.cfg.start_index = a.start_flag;
    if (a.steps_opt->count() > 0) a.cfg.attr.steps = a.steps_flag;
    if (a.methods_opt->count() > 0) a.cfg.methods = a.methods_flag;
    if (a.jobs_opt->count() > 0) a.cfg.jobs = a.jobs_flag;
    if (a.step_frac_opt->count() > 0) a.cfg.insertion_step = a.step_frac_flag;
    if (a.include_wrong_opt->count() > 0) a.cfg.only_correct = false;

    const ToyModel model = load_model(a.model_path);
    a.cfg.model_source = a.model_path;

    json report = run_eval(model, a.cfg);
    report["generated_at"] = iso8601_utc_now();
    write_report(report, a.out_path);
    if (!a.curves_dir.empty()) write_curves_csv(report, a.curves_dir);

    std::cout << "report written to " << a.out_path << "\n";
    for (const auto& [id, entry] : report["methods"].items()) {
        std::cout << id << ": insertion_auc="
                  << entry["insertion"]["auc_probability"]["mean"].get<double>()
                  << " roc_auc="
                  << entry["localization"]["roc_auc"]["mean"].get<double>();
        for (const auto& [measure, stats] : entry["aic_sic"].items())
            std::cout << " sic_" << measure << "=" << stats["sic"].get<double>();
        std::cout << "\n";
    }
    return 0;
}

struct ReportArgs {
    std::string in_path;
    std::string curves_dir;
};

int cmd_report(ReportArgs& a) {
    const json report = read_report(a.in_path);
    if (!a.curves_dir.empty()) {
        write_curves_csv(report, a.curves_dir);
        std::cout << "curves written to " << a.curves_dir << "\n";
    }
    std::cout << "report " << a.in_path << " (generated_at="
              << report.value("generated_at", "unknown") << ")\n";
    for (const auto& [id, entry] : report["methods"].items()) {
        std::cout << id << ":\n"
                  << "  insertion auc_probability mean="
                  << entry["insertion"]["auc_probability"]["mean"].get<double>()
                  << " median="
                  << entry["insertion"]["auc_probability"]["median"].get<double>() << "\n"
                  << "  localization f1=" << entry["localization"]["best_f1"]["mean"].get<double>()
                  << " roc_auc=" << entry["localization"]["roc_auc"]["mean"].get<double>()
                  << " mae=" << entry["localization"]["mae"]["mean"].get<double>() << "\n";
        for (const auto& [measure, stats] : entry["aic_sic"].items())
            std::cout << "  " << measure << " aic=" << stats["aic"].get<double>()
                      << " sic=" << stats["sic"].get<double>() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Path-method attribution toolkit (IG, GIG, BlurIG, IDGI)"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "pathattr 1.0.0");

    TrainArgs train_args;
    CLI::App* train = app.add_subcommand("train-toy", "Train a built-in toy classifier");
    train->add_option("--out", train_args.out, "Weights JSON output path")->required();
    train->add_option("--arch", train_args.arch, "Architecture")
        ->check(CLI::IsMember({"linear", "softmax_regression", "mlp", "tiny_cnn"}));
    CLI::Option* train_seed =
        train->add_option("--seed", train_args.cfg.seed, "Training and data seed");
    train->add_option("--epochs", train_args.cfg.epochs, "Training epochs");
    train->add_option("--batch-size", train_args.cfg.batch_size, "SGD batch size");
    train->add_option("--learning-rate", train_args.cfg.learning_rate, "SGD step size");
    train->add_option("--train-samples", train_args.cfg.train_samples,
                      "Training set size");
    train->add_option("--min-accuracy", train_args.cfg.min_accuracy,
                      "Required final training accuracy (negative disables)");
    train->add_option("--hidden", train_args.cfg.model.hidden, "MLP hidden units");
    train->add_option("--filters", train_args.cfg.model.filters, "CNN filters");
    train->add_option("--pool-grid", train_args.cfg.model.pool_grid, "CNN pool grid");
    add_data_options(train, train_args.cfg.data);

    AttributeArgs attr_args;
    CLI::App* attr = app.add_subcommand("attribute", "Attribute one image");
    attr->add_option("--model", attr_args.model_path, "Weights JSON path")->required();
    CLI::Option* attr_image =
        attr->add_option("--image", attr_args.image_path, "Input PNG path");
    CLI::Option* attr_sample = attr->add_option(
        "--sample", attr_args.sample_index, "Built-in sample stream index");
    attr_image->excludes(attr_sample);
    attr_sample->excludes(attr_image);
    CLI::Option* attr_seed =
        attr->add_option("--seed", attr_args.seed, "Sample stream seed");
    attr->add_option("--target", attr_args.target,
                     "Target class (default: predicted class)");
    attr->add_option("--method", attr_args.method, "Attribution method")
        ->check(CLI::IsMember({"ig", "gig", "blur_ig"}));
    attr->add_option("--integrator", attr_args.integrator, "Integrator")
        ->check(CLI::IsMember({"riemann", "idgi"}));
    attr->add_option("--steps", attr_args.opts.steps, "Path steps");
    attr->add_option("--baseline", attr_args.opts.baseline, "Baseline kind")
        ->check(CLI::IsMember({"black", "white", "custom"}));
    attr->add_option("--baseline-image", attr_args.baseline_image,
                     "Custom baseline PNG (implies --baseline custom)");
    attr->add_option("--max-sigma", attr_args.opts.max_sigma, "blur_ig maximum sigma");
    attr->add_option("--gig-fraction", attr_args.opts.gig_fraction,
                     "gig per-step fraction of remaining L1 (0 = auto)");
    attr->add_flag("--logits", attr_args.opts.use_logits,
                   "Attribute raw scores instead of the model head");
    attr->add_option("--out", attr_args.out_base,
                     "Output base path (writes <base>.bin and <base>.json)");
    attr->add_option("--heatmap", attr_args.heatmap_path, "Heatmap PNG output path");
    attr->add_option("--dump-steps", attr_args.steps_csv, "Per-step CSV output path");
    attr->add_option("--save-input", attr_args.save_input,
                     "Write the attributed image as PNG (useful with --sample)");
    add_data_options(attr, attr_args.data);

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "Run the attribution benchmark");
    eval->add_option("--model", eval_args.model_path, "Weights JSON path")->required();
    eval->add_option("--config", eval_args.config_path, "Eval config JSON path");
    eval->add_option("--out", eval_args.out_path, "Report JSON output path")->required();
    eval->add_option("--curves-dir", eval_args.curves_dir, "Write curve CSVs here");
    eval_args.seed_opt = eval->add_option("--seed", eval_args.seed_flag, "Data seed");
    eval_args.images_opt =
        eval->add_option("--images", eval_args.images_flag, "Evaluation image count");
    eval_args.start_opt = eval->add_option("--start-index", eval_args.start_flag,
                                           "First sample stream index");
    eval_args.steps_opt =
        eval->add_option("--steps", eval_args.steps_flag, "Attribution path steps");
    eval_args.methods_opt =
        eval->add_option("--methods", eval_args.methods_flag,
                         "Comma-separated method ids, e.g. ig,ig+idgi")
            ->delimiter(',');
    eval_args.jobs_opt = eval->add_option("--jobs", eval_args.jobs_flag,
                                          "Worker threads for per-image work");
    eval_args.step_frac_opt = eval->add_option(
        "--insertion-step", eval_args.step_frac_flag, "Insertion reveal fraction");
    eval_args.include_wrong_opt = eval->add_flag(
        "--include-wrong", "Also evaluate on misclassified images");
    eval_args.data_opts = add_data_options(eval, eval_args.data_flags);

    ReportArgs report_args;
    CLI::App* report = app.add_subcommand("report", "Summarize an eval report");
    report->add_option("--in", report_args.in_path, "Report JSON path")->required();
    report->add_option("--curves-dir", report_args.curves_dir, "Write curve CSVs here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        train_args.seed_given = train_seed->count() > 0;
        attr_args.seed_given = attr_seed->count() > 0;
        if (train->parsed()) return cmd_train(train_args);
        if (attr->parsed()) return cmd_attribute(attr_args);
        if (eval->parsed()) return cmd_eval(eval_args);
        if (report->parsed()) return cmd_report(report_args);
        return kExitUsage;
    } catch (const invalid_parameter_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const degenerate_step_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const degenerate_input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const training_failure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitTraining;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const format_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
