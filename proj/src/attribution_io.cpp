#include "pathattr/attribution_io.hpp"

#include <algorithm>
#include <bit>
#include <fstream>

#include <json.hpp>

#include "pathattr/errors.hpp"
#include "pathattr/metrics.hpp"

static_assert(std::endian::native == std::endian::little,
              "attribution binary format assumes a little-endian host");

namespace pathattr {

void save_attribution(const AttributionMap& a, const std::string& base_path) {
    validate(a.attributions, "attribution tensor");

    const std::string bin_path = base_path + ".bin";
    std::ofstream bin(bin_path, std::ios::binary);
    if (!bin) throw io_error("cannot open for writing: " + bin_path);
    bin.write(reinterpret_cast<const char*>(a.attributions.data.data()),
              static_cast<std::streamsize>(a.attributions.size() * sizeof(double)));
    if (!bin) throw io_error("failed writing " + bin_path);
    bin.close();

    nlohmann::json j;
    j["format"] = "pathattr-attribution";
    j["version"] = 1;
    j["height"] = a.attributions.height;
    j["width"] = a.attributions.width;
    j["channels"] = a.attributions.channels;
    j["method"] = a.method;
    j["integrator"] = a.integrator;
    j["target_class"] = a.target_class;
    j["steps"] = a.steps;
    j["base_value"] = a.base_value;
    j["input_value"] = a.input_value;
    j["sum"] = a.sum;
    j["degenerate_steps"] = a.degenerate_steps;

    const std::string json_path = base_path + ".json";
    std::ofstream side(json_path, std::ios::binary);
    if (!side) throw io_error("cannot open for writing: " + json_path);
    side << j.dump(2) << '\n';
    if (!side) throw io_error("failed writing " + json_path);
}

AttributionMap load_attribution(const std::string& base_path) {
    const std::string json_path = base_path + ".json";
    std::ifstream side(json_path, std::ios::binary);
    if (!side) throw io_error("cannot open attribution sidecar: " + json_path);
    nlohmann::json j;
    try {
        side >> j;
    } catch (const nlohmann::json::exception& e) {
        throw format_error("attribution sidecar is not valid JSON (" + json_path +
                           "): " + e.what());
    }

    AttributionMap a;
    int h = 0, w = 0, c = 0;
    try {
        if (j.at("format").get<std::string>() != "pathattr-attribution")
            throw format_error("not an attribution sidecar: " + json_path);
        if (j.at("version").get<int>() != 1)
            throw format_error("unsupported attribution version in " + json_path);
        h = j.at("height").get<int>();
        w = j.at("width").get<int>();
        c = j.at("channels").get<int>();
        a.method = j.at("method").get<std::string>();
        a.integrator = j.at("integrator").get<std::string>();
        a.target_class = j.at("target_class").get<int>();
        a.steps = j.at("steps").get<int>();
        a.base_value = j.at("base_value").get<double>();
        a.input_value = j.at("input_value").get<double>();
        a.sum = j.at("sum").get<double>();
        a.degenerate_steps = j.at("degenerate_steps").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw format_error("malformed attribution sidecar (" + json_path +
                           "): " + e.what());
    }
    if (h <= 0 || w <= 0 || c <= 0)
        throw format_error("attribution sidecar has invalid shape: " + json_path);

    const std::string bin_path = base_path + ".bin";
    std::ifstream bin(bin_path, std::ios::binary | std::ios::ate);
    if (!bin) throw io_error("cannot open attribution data: " + bin_path);
    const std::streamsize bytes = bin.tellg();
    const std::size_t expected =
        static_cast<std::size_t>(h) * w * c * sizeof(double);
    if (bytes < 0 || static_cast<std::size_t>(bytes) != expected)
        throw format_error("attribution data size mismatch in " + bin_path + ": got " +
                           std::to_string(bytes) + " bytes, expected " +
                           std::to_string(expected));
    bin.seekg(0);
    a.attributions = ImageTensor(h, w, c);
    bin.read(reinterpret_cast<char*>(a.attributions.data.data()),
             static_cast<std::streamsize>(expected));
    if (!bin) throw io_error("failed reading " + bin_path);
    return a;
}

ImageTensor render_heatmap(const ImageTensor& attributions) {
    ImageTensor imp = pixel_importance(attributions);
    const auto [lo_it, hi_it] = std::minmax_element(imp.data.begin(), imp.data.end());
    const double lo = *lo_it, hi = *hi_it;
    if (hi == lo) return constant_like(imp, 0.5);
    const double inv = 1.0 / (hi - lo);
    for (double& v : imp.data) v = (v - lo) * inv;
    return imp;
}

}  // namespace pathattr
