#include "pathattr/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "pathattr/errors.hpp"
#include "pathattr/kernels.hpp"
#include "pathattr/rng.hpp"

namespace pathattr {

namespace {

inline double softplus(double z) {
    return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double log_sum_exp(const std::vector<double>& v) {
    const double m = *std::max_element(v.begin(), v.end());
    double acc = 0.0;
    for (double x : v) acc += std::exp(x - m);
    return m + std::log(acc);
}

}  // namespace

std::vector<double> softmax(const std::vector<double>& scores) {
    if (scores.empty()) throw invalid_parameter_error("softmax: empty score vector");
    const double m = *std::max_element(scores.begin(), scores.end());
    std::vector<double> p(scores.size());
    double z = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        p[i] = std::exp(scores[i] - m);
        z += p[i];
    }
    for (double& v : p) v /= z;
    return p;
}

void Model::check_class(int c) const {
    if (c < 0 || c >= num_classes())
        throw invalid_parameter_error("class index " + std::to_string(c) +
                                      " out of range [0, " + std::to_string(num_classes()) +
                                      ")");
}

std::vector<double> Model::probabilities(const ImageTensor& x) const {
    return softmax(scores(x));
}

double Model::value(const ImageTensor& x, int c) const {
    check_class(c);
    const std::vector<double> s = scores(x);
    if (!softmax_head()) return s[c];
    return softmax(s)[c];
}

ImageTensor Model::gradient(const ImageTensor& x, int c) const {
    check_class(c);
    std::vector<double> seed(num_classes(), 0.0);
    if (!softmax_head()) {
        seed[c] = 1.0;
    } else {
        // d p_c / d s_k = p_c * (delta_kc - p_k)
        const std::vector<double> p = probabilities(x);
        for (int k = 0; k < num_classes(); ++k)
            seed[k] = p[c] * ((k == c ? 1.0 : 0.0) - p[k]);
    }
    return score_vjp(x, seed);
}

int Model::predict(const ImageTensor& x) const {
    const std::vector<double> s = scores(x);
    return static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
}

std::string arch_to_string(Arch a) {
    switch (a) {
        case Arch::Linear: return "linear";
        case Arch::SoftmaxRegression: return "softmax_regression";
        case Arch::Mlp: return "mlp";
        case Arch::TinyCnn: return "tiny_cnn";
    }
    throw invalid_parameter_error("unknown arch enum value");
}

Arch arch_from_string(const std::string& s) {
    if (s == "linear") return Arch::Linear;
    if (s == "softmax_regression") return Arch::SoftmaxRegression;
    if (s == "mlp") return Arch::Mlp;
    if (s == "tiny_cnn") return Arch::TinyCnn;
    throw invalid_parameter_error("unknown arch: " + s);
}

struct ToyModel::Forward {
    std::vector<double> z0;      // mlp: hidden pre-activation; cnn: conv output
    std::vector<double> a0;      // softplus(z0)
    std::vector<double> pool;    // cnn only
    std::vector<double> scores;  // length K
};

ToyModel::ToyModel(const ToyModelConfig& cfg) : cfg_(cfg) {
    if (cfg.height <= 0 || cfg.width <= 0 || cfg.channels <= 0)
        throw invalid_parameter_error("ToyModel: input dimensions must be positive");
    if (cfg.num_classes < 2)
        throw invalid_parameter_error("ToyModel: need at least 2 classes");
    const std::size_t d =
        static_cast<std::size_t>(cfg.height) * cfg.width * cfg.channels;
    const std::size_t k = static_cast<std::size_t>(cfg.num_classes);
    std::size_t total = 0;
    switch (cfg.arch) {
        case Arch::Linear:
        case Arch::SoftmaxRegression:
            off_w0_ = 0;
            off_b0_ = k * d;
            total = k * d + k;
            break;
        case Arch::Mlp: {
            if (cfg.hidden < 1)
                throw invalid_parameter_error("ToyModel: mlp hidden size must be positive");
            const std::size_t h = static_cast<std::size_t>(cfg.hidden);
            off_w0_ = 0;
            off_b0_ = h * d;
            off_w1_ = off_b0_ + h;
            off_b1_ = off_w1_ + k * h;
            total = off_b1_ + k;
            break;
        }
        case Arch::TinyCnn: {
            if (cfg.filters < 1)
                throw invalid_parameter_error("ToyModel: filter count must be positive");
            if (cfg.pool_grid < 1 || cfg.height % cfg.pool_grid != 0 ||
                cfg.width % cfg.pool_grid != 0)
                throw invalid_parameter_error(
                    "ToyModel: pool_grid must divide height and width");
            const std::size_t f = static_cast<std::size_t>(cfg.filters);
            const std::size_t p =
                static_cast<std::size_t>(cfg.pool_grid) * cfg.pool_grid * f;
            off_w0_ = 0;
            off_b0_ = f * 9 * cfg.channels;
            off_w1_ = off_b0_ + f;
            off_b1_ = off_w1_ + k * p;
            total = off_b1_ + k;
            break;
        }
    }
    params_.assign(total, 0.0);
}

void ToyModel::init_params(std::uint64_t seed) {
    std::mt19937_64 g(rng::mix_seed(seed, 0x1417u));
    const std::size_t d =
        static_cast<std::size_t>(cfg_.height) * cfg_.width * cfg_.channels;
    auto fill = [&](std::size_t off, std::size_t n, double stddev) {
        for (std::size_t i = 0; i < n; ++i) params_[off + i] = stddev * rng::gaussian(g);
    };
    const std::size_t k = static_cast<std::size_t>(cfg_.num_classes);
    switch (cfg_.arch) {
        case Arch::Linear:
        case Arch::SoftmaxRegression:
            fill(off_w0_, k * d, 1.0 / std::sqrt(static_cast<double>(d)));
            break;
        case Arch::Mlp: {
            const std::size_t h = static_cast<std::size_t>(cfg_.hidden);
            fill(off_w0_, h * d, std::sqrt(2.0 / static_cast<double>(d)));
            fill(off_w1_, k * h, 1.0 / std::sqrt(static_cast<double>(h)));
            break;
        }
        case Arch::TinyCnn: {
            const std::size_t f = static_cast<std::size_t>(cfg_.filters);
            const std::size_t p =
                static_cast<std::size_t>(cfg_.pool_grid) * cfg_.pool_grid * f;
            fill(off_w0_, f * 9 * cfg_.channels,
                 std::sqrt(2.0 / (9.0 * cfg_.channels)));
            fill(off_w1_, k * p, 1.0 / std::sqrt(static_cast<double>(p)));
            break;
        }
    }
    // biases stay zero
}

void ToyModel::check_input(const ImageTensor& x) const {
    validate(x, "model input");
    if (x.height != cfg_.height || x.width != cfg_.width || x.channels != cfg_.channels)
        throw invalid_parameter_error(
            "model input shape mismatch: got " + std::to_string(x.height) + "x" +
            std::to_string(x.width) + "x" + std::to_string(x.channels) + ", expected " +
            std::to_string(cfg_.height) + "x" + std::to_string(cfg_.width) + "x" +
            std::to_string(cfg_.channels));
}

void ToyModel::run_forward(const ImageTensor& x, Forward& f) const {
    const std::size_t d = x.size();
    const int k = cfg_.num_classes;
    const double* w0 = params_.data() + off_w0_;
    const double* b0 = params_.data() + off_b0_;
    f.scores.assign(static_cast<std::size_t>(k), 0.0);

    switch (cfg_.arch) {
        case Arch::Linear:
        case Arch::SoftmaxRegression: {
            for (int c = 0; c < k; ++c)
                f.scores[c] = b0[c] + kernels::dot(w0 + static_cast<std::size_t>(c) * d,
                                                   x.data.data(), d);
            break;
        }
        case Arch::Mlp: {
            const int h = cfg_.hidden;
            const double* w1 = params_.data() + off_w1_;
            const double* b1 = params_.data() + off_b1_;
            f.z0.resize(static_cast<std::size_t>(h));
            f.a0.resize(static_cast<std::size_t>(h));
            for (int j = 0; j < h; ++j) {
                f.z0[j] = b0[j] + kernels::dot(w0 + static_cast<std::size_t>(j) * d,
                                               x.data.data(), d);
                f.a0[j] = softplus(f.z0[j]);
            }
            for (int c = 0; c < k; ++c)
                f.scores[c] =
                    b1[c] + kernels::dot(w1 + static_cast<std::size_t>(c) * h,
                                         f.a0.data(), static_cast<std::size_t>(h));
            break;
        }
        case Arch::TinyCnn: {
            const int H = cfg_.height, W = cfg_.width, C = cfg_.channels;
            const int F = cfg_.filters, G = cfg_.pool_grid;
            const double* w1 = params_.data() + off_w1_;
            const double* b1 = params_.data() + off_b1_;
            const std::size_t hw = static_cast<std::size_t>(H) * W;
            f.z0.assign(hw * F, 0.0);
            f.a0.resize(hw * F);
            // 3x3 same convolution, zero padding
            for (int y = 0; y < H; ++y) {
                for (int xx = 0; xx < W; ++xx) {
                    double* zp = f.z0.data() + (static_cast<std::size_t>(y) * W + xx) * F;
                    for (int fl = 0; fl < F; ++fl) zp[fl] = b0[fl];
                    for (int ky = 0; ky < 3; ++ky) {
                        const int uy = y + ky - 1;
                        if (uy < 0 || uy >= H) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int ux = xx + kx - 1;
                            if (ux < 0 || ux >= W) continue;
                            const double* px =
                                x.data.data() +
                                (static_cast<std::size_t>(uy) * W + ux) * C;
                            for (int fl = 0; fl < F; ++fl) {
                                const double* wf =
                                    w0 + ((static_cast<std::size_t>(fl) * 3 + ky) * 3 +
                                          kx) *
                                             C;
                                zp[fl] += kernels::dot(wf, px, static_cast<std::size_t>(C));
                            }
                        }
                    }
                }
            }
            for (std::size_t i = 0; i < f.z0.size(); ++i) f.a0[i] = softplus(f.z0[i]);
            // average pool to G x G
            const int ph = H / G, pw = W / G;
            const double inv_win = 1.0 / (static_cast<double>(ph) * pw);
            const std::size_t p = static_cast<std::size_t>(G) * G * F;
            f.pool.assign(p, 0.0);
            for (int y = 0; y < H; ++y) {
                const int gy = y / ph;
                for (int xx = 0; xx < W; ++xx) {
                    const int gx = xx / pw;
                    const double* ap =
                        f.a0.data() + (static_cast<std::size_t>(y) * W + xx) * F;
                    double* pp =
                        f.pool.data() + (static_cast<std::size_t>(gy) * G + gx) * F;
                    for (int fl = 0; fl < F; ++fl) pp[fl] += ap[fl];
                }
            }
            kernels::scale(inv_win, f.pool.data(), p);
            for (int c = 0; c < k; ++c)
                f.scores[c] = b1[c] + kernels::dot(w1 + static_cast<std::size_t>(c) * p,
                                                   f.pool.data(), p);
            break;
        }
    }
}

std::vector<double> ToyModel::scores(const ImageTensor& x) const {
    check_input(x);
    Forward f;
    run_forward(x, f);
    return f.scores;
}

ImageTensor ToyModel::score_vjp(const ImageTensor& x,
                                const std::vector<double>& seed) const {
    check_input(x);
    if (seed.size() != static_cast<std::size_t>(cfg_.num_classes))
        throw invalid_parameter_error("score_vjp: seed length != num_classes");

    const std::size_t d = x.size();
    const int k = cfg_.num_classes;
    const double* w0 = params_.data() + off_w0_;
    ImageTensor dx = zeros_like(x);

    switch (cfg_.arch) {
        case Arch::Linear:
        case Arch::SoftmaxRegression: {
            for (int c = 0; c < k; ++c)
                kernels::axpy(seed[c], w0 + static_cast<std::size_t>(c) * d,
                              dx.data.data(), d);
            return dx;
        }
        case Arch::Mlp: {
            Forward f;
            run_forward(x, f);
            const int h = cfg_.hidden;
            const double* w1 = params_.data() + off_w1_;
            std::vector<double> dz0(static_cast<std::size_t>(h), 0.0);
            for (int c = 0; c < k; ++c)
                kernels::axpy(seed[c], w1 + static_cast<std::size_t>(c) * h, dz0.data(),
                              static_cast<std::size_t>(h));
            for (int j = 0; j < h; ++j) dz0[j] *= sigmoid(f.z0[j]);
            for (int j = 0; j < h; ++j)
                kernels::axpy(dz0[j], w0 + static_cast<std::size_t>(j) * d,
                              dx.data.data(), d);
            return dx;
        }
        case Arch::TinyCnn: {
            Forward f;
            run_forward(x, f);
            const int H = cfg_.height, W = cfg_.width, C = cfg_.channels;
            const int F = cfg_.filters, G = cfg_.pool_grid;
            const int ph = H / G, pw = W / G;
            const double inv_win = 1.0 / (static_cast<double>(ph) * pw);
            const std::size_t p = static_cast<std::size_t>(G) * G * F;
            const double* w1 = params_.data() + off_w1_;

            std::vector<double> dpool(p, 0.0);
            for (int c = 0; c < k; ++c)
                kernels::axpy(seed[c], w1 + static_cast<std::size_t>(c) * p, dpool.data(),
                              p);
            for (int y = 0; y < H; ++y) {
                const int gy = y / ph;
                for (int xx = 0; xx < W; ++xx) {
                    const int gx = xx / pw;
                    const std::size_t zi = (static_cast<std::size_t>(y) * W + xx) * F;
                    const double* dp =
                        dpool.data() + (static_cast<std::size_t>(gy) * G + gx) * F;
                    for (int ky = 0; ky < 3; ++ky) {
                        const int uy = y + ky - 1;
                        if (uy < 0 || uy >= H) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int ux = xx + kx - 1;
                            if (ux < 0 || ux >= W) continue;
                            double* dst =
                                dx.data.data() +
                                (static_cast<std::size_t>(uy) * W + ux) * C;
                            for (int fl = 0; fl < F; ++fl) {
                                const double dz =
                                    dp[fl] * inv_win * sigmoid(f.z0[zi + fl]);
                                const double* wf =
                                    w0 + ((static_cast<std::size_t>(fl) * 3 + ky) * 3 +
                                          kx) *
                                             C;
                                kernels::axpy(dz, wf, dst, static_cast<std::size_t>(C));
                            }
                        }
                    }
                }
            }
            return dx;
        }
    }
    throw invalid_parameter_error("unknown arch enum value");
}

double ToyModel::loss_param_grad(const ImageTensor& x, int label,
                                 std::vector<double>& grad) const {
    check_input(x);
    check_class(label);
    if (grad.size() != params_.size())
        throw invalid_parameter_error("loss_param_grad: grad length != params length");

    Forward f;
    run_forward(x, f);
    const double loss = log_sum_exp(f.scores) - f.scores[label];

    const int k = cfg_.num_classes;
    std::vector<double> ds = softmax(f.scores);
    ds[label] -= 1.0;

    const std::size_t d = x.size();
    double* gw0 = grad.data() + off_w0_;
    double* gb0 = grad.data() + off_b0_;

    switch (cfg_.arch) {
        case Arch::Linear:
        case Arch::SoftmaxRegression: {
            for (int c = 0; c < k; ++c) {
                kernels::axpy(ds[c], x.data.data(), gw0 + static_cast<std::size_t>(c) * d,
                              d);
                gb0[c] += ds[c];
            }
            return loss;
        }
        case Arch::Mlp: {
            const int h = cfg_.hidden;
            const double* w1 = params_.data() + off_w1_;
            double* gw1 = grad.data() + off_w1_;
            double* gb1 = grad.data() + off_b1_;
            std::vector<double> dz0(static_cast<std::size_t>(h), 0.0);
            for (int c = 0; c < k; ++c) {
                kernels::axpy(ds[c], f.a0.data(), gw1 + static_cast<std::size_t>(c) * h,
                              static_cast<std::size_t>(h));
                gb1[c] += ds[c];
                kernels::axpy(ds[c], w1 + static_cast<std::size_t>(c) * h, dz0.data(),
                              static_cast<std::size_t>(h));
            }
            for (int j = 0; j < h; ++j) dz0[j] *= sigmoid(f.z0[j]);
            for (int j = 0; j < h; ++j) {
                kernels::axpy(dz0[j], x.data.data(), gw0 + static_cast<std::size_t>(j) * d,
                              d);
                gb0[j] += dz0[j];
            }
            return loss;
        }
        case Arch::TinyCnn: {
            const int H = cfg_.height, W = cfg_.width, C = cfg_.channels;
            const int F = cfg_.filters, G = cfg_.pool_grid;
            const int ph = H / G, pw = W / G;
            const double inv_win = 1.0 / (static_cast<double>(ph) * pw);
            const std::size_t p = static_cast<std::size_t>(G) * G * F;
            const double* w1 = params_.data() + off_w1_;
            double* gw1 = grad.data() + off_w1_;
            double* gb1 = grad.data() + off_b1_;

            std::vector<double> dpool(p, 0.0);
            for (int c = 0; c < k; ++c) {
                kernels::axpy(ds[c], f.pool.data(), gw1 + static_cast<std::size_t>(c) * p,
                              p);
                gb1[c] += ds[c];
                kernels::axpy(ds[c], w1 + static_cast<std::size_t>(c) * p, dpool.data(),
                              p);
            }
            for (int y = 0; y < H; ++y) {
                const int gy = y / ph;
                for (int xx = 0; xx < W; ++xx) {
                    const int gx = xx / pw;
                    const std::size_t zi = (static_cast<std::size_t>(y) * W + xx) * F;
                    const double* dp =
                        dpool.data() + (static_cast<std::size_t>(gy) * G + gx) * F;
                    for (int ky = 0; ky < 3; ++ky) {
                        const int uy = y + ky - 1;
                        if (uy < 0 || uy >= H) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int ux = xx + kx - 1;
                            if (ux < 0 || ux >= W) continue;
                            const double* px =
                                x.data.data() +
                                (static_cast<std::size_t>(uy) * W + ux) * C;
                            for (int fl = 0; fl < F; ++fl) {
                                const double dz =
                                    dp[fl] * inv_win * sigmoid(f.z0[zi + fl]);
                                double* gwf =
                                    gw0 + ((static_cast<std::size_t>(fl) * 3 + ky) * 3 +
                                           kx) *
                                              C;
                                kernels::axpy(dz, px, gwf, static_cast<std::size_t>(C));
                            }
                        }
                    }
                }
            }
            for (int y = 0; y < H; ++y)
                for (int xx = 0; xx < W; ++xx) {
                    const std::size_t zi = (static_cast<std::size_t>(y) * W + xx) * F;
                    const int gy = y / ph, gx = xx / pw;
                    const double* dp =
                        dpool.data() + (static_cast<std::size_t>(gy) * G + gx) * F;
                    for (int fl = 0; fl < F; ++fl)
                        gb0[fl] += dp[fl] * inv_win * sigmoid(f.z0[zi + fl]);
                }
            return loss;
        }
    }
    throw invalid_parameter_error("unknown arch enum value");
}

std::vector<ToyModel::ParamSlice> ToyModel::param_layout() const {
    const std::size_t d =
        static_cast<std::size_t>(cfg_.height) * cfg_.width * cfg_.channels;
    const std::size_t k = static_cast<std::size_t>(cfg_.num_classes);
    switch (cfg_.arch) {
        case Arch::Linear:
        case Arch::SoftmaxRegression:
            return {{"w", off_w0_, k * d}, {"b", off_b0_, k}};
        case Arch::Mlp: {
            const std::size_t h = static_cast<std::size_t>(cfg_.hidden);
            return {{"w1", off_w0_, h * d},
                    {"b1", off_b0_, h},
                    {"w2", off_w1_, k * h},
                    {"b2", off_b1_, k}};
        }
        case Arch::TinyCnn: {
            const std::size_t f = static_cast<std::size_t>(cfg_.filters);
            const std::size_t p =
                static_cast<std::size_t>(cfg_.pool_grid) * cfg_.pool_grid * f;
            return {{"conv_w", off_w0_, f * 9 * cfg_.channels},
                    {"conv_b", off_b0_, f},
                    {"fc_w", off_w1_, k * p},
                    {"fc_b", off_b1_, k}};
        }
    }
    throw invalid_parameter_error("unknown arch enum value");
}

void save_model(const ToyModel& m, const std::string& path) {
    const ToyModelConfig& c = m.config();
    nlohmann::json j;
    j["format"] = "pathattr-toy-model";
    j["version"] = 1;
    j["arch"] = arch_to_string(c.arch);
    j["height"] = c.height;
    j["width"] = c.width;
    j["channels"] = c.channels;
    j["num_classes"] = c.num_classes;
    j["hidden"] = c.hidden;
    j["filters"] = c.filters;
    j["pool_grid"] = c.pool_grid;
    nlohmann::json params = nlohmann::json::object();
    for (const auto& slice : m.param_layout()) {
        const double* p = m.params().data() + slice.offset;
        params[slice.name] = std::vector<double>(p, p + slice.size);
    }
    j["params"] = std::move(params);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open model file for writing: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw io_error("failed writing model file: " + path);
}

ToyModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw format_error("model file is not valid JSON (" + path + "): " + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "pathattr-toy-model")
            throw format_error("not a toy-model weights file: " + path);
        if (j.at("version").get<int>() != 1)
            throw format_error("unsupported weights version in " + path);
        ToyModelConfig c;
        c.arch = arch_from_string(j.at("arch").get<std::string>());
        c.height = j.at("height").get<int>();
        c.width = j.at("width").get<int>();
        c.channels = j.at("channels").get<int>();
        c.num_classes = j.at("num_classes").get<int>();
        c.hidden = j.value("hidden", c.hidden);
        c.filters = j.value("filters", c.filters);
        c.pool_grid = j.value("pool_grid", c.pool_grid);
        ToyModel m(c);
        const nlohmann::json& params = j.at("params");
        for (const auto& slice : m.param_layout()) {
            const auto vals = params.at(slice.name).get<std::vector<double>>();
            if (vals.size() != slice.size)
                throw format_error("parameter '" + slice.name + "' in " + path + " has " +
                                   std::to_string(vals.size()) + " values, expected " +
                                   std::to_string(slice.size));
            std::copy(vals.begin(), vals.end(), m.params().begin() + slice.offset);
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw format_error("malformed model file (" + path + "): " + e.what());
    }
}

ImageTensor finite_diff_gradient(const Model& m, const ImageTensor& x, int c,
                                 double eps) {
    if (eps <= 0.0) throw invalid_parameter_error("finite_diff_gradient: eps must be > 0");
    ImageTensor g = zeros_like(x);
    ImageTensor probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = probe.data[i];
        probe.data[i] = orig + eps;
        const double hi = m.value(probe, c);
        probe.data[i] = orig - eps;
        const double lo = m.value(probe, c);
        probe.data[i] = orig;
        g.data[i] = (hi - lo) / (2.0 * eps);
    }
    return g;
}

Sample make_sample(const MaskQuadrantSpec& spec, std::uint64_t seed,
                   std::uint64_t index) {
    if (spec.height < 4 || spec.width < 4 || spec.channels < 1)
        throw invalid_parameter_error("make_sample: image must be at least 4x4x1");
    if (spec.square < 1 || spec.square > spec.height / 2 || spec.square > spec.width / 2)
        throw invalid_parameter_error("make_sample: square must fit inside a quadrant");
    if (!(spec.noise_max >= 0.0 && spec.noise_max <= spec.bright_min &&
          spec.bright_min <= spec.bright_max && spec.bright_max <= 1.0))
        throw invalid_parameter_error(
            "make_sample: need 0 <= noise_max <= bright_min <= bright_max <= 1");
    if (spec.distractors < 0 || spec.distractors > 3)
        throw invalid_parameter_error("make_sample: distractors must be in [0, 3]");
    if (spec.distractors > 0 &&
        !(spec.noise_max <= spec.distractor_min &&
          spec.distractor_min <= spec.distractor_max &&
          spec.distractor_max <= spec.bright_min))
        throw invalid_parameter_error(
            "make_sample: need noise_max <= distractor_min <= distractor_max <= "
            "bright_min");

    std::mt19937_64 g(rng::mix_seed(seed, index));
    Sample s;
    s.label = static_cast<int>(index % 4);

    const int qr0 = (s.label / 2 == 0) ? 0 : spec.height / 2;
    const int qr1 = (s.label / 2 == 0) ? spec.height / 2 : spec.height;
    const int qc0 = (s.label % 2 == 0) ? 0 : spec.width / 2;
    const int qc1 = (s.label % 2 == 0) ? spec.width / 2 : spec.width;

    const int top =
        static_cast<int>(rng::uniform_int(g, qr0, qr1 - spec.square));
    const int left =
        static_cast<int>(rng::uniform_int(g, qc0, qc1 - spec.square));

    s.x = ImageTensor(spec.height, spec.width, spec.channels);
    for (double& v : s.x.data) v = rng::uniform(g, 0.0, spec.noise_max);
    for (int y = top; y < top + spec.square; ++y)
        for (int xx = left; xx < left + spec.square; ++xx)
            for (int c = 0; c < spec.channels; ++c)
                s.x.at(y, xx, c) = rng::uniform(g, spec.bright_min, spec.bright_max);

    s.mask = ImageTensor(spec.height, spec.width, 1);
    for (int y = top; y < top + spec.square; ++y)
        for (int xx = left; xx < left + spec.square; ++xx) s.mask.at(y, xx, 0) = 1.0;

    if (spec.distractors > 0) {
        int rivals[3];
        int nr = 0;
        for (int q = 0; q < 4; ++q)
            if (q != s.label) rivals[nr++] = q;
        for (int i = 2; i > 0; --i) {
            const int j = static_cast<int>(rng::uniform_int(g, 0, i));
            std::swap(rivals[i], rivals[j]);
        }
        for (int k = 0; k < spec.distractors; ++k) {
            const int q = rivals[k];
            const int dr0 = (q / 2 == 0) ? 0 : spec.height / 2;
            const int dr1 = (q / 2 == 0) ? spec.height / 2 : spec.height;
            const int dc0 = (q % 2 == 0) ? 0 : spec.width / 2;
            const int dc1 = (q % 2 == 0) ? spec.width / 2 : spec.width;
            const int dtop =
                static_cast<int>(rng::uniform_int(g, dr0, dr1 - spec.square));
            const int dleft =
                static_cast<int>(rng::uniform_int(g, dc0, dc1 - spec.square));
            for (int y = dtop; y < dtop + spec.square; ++y)
                for (int xx = dleft; xx < dleft + spec.square; ++xx)
                    for (int c = 0; c < spec.channels; ++c)
                        s.x.at(y, xx, c) =
                            rng::uniform(g, spec.distractor_min, spec.distractor_max);
        }
    }
    return s;
}

ToyModel train_toy(const TrainConfig& cfg, TrainStats* stats) {
    if (cfg.train_samples < 1) throw invalid_parameter_error("train_toy: no samples");
    if (cfg.epochs < 1) throw invalid_parameter_error("train_toy: epochs must be >= 1");
    if (cfg.batch_size < 1)
        throw invalid_parameter_error("train_toy: batch_size must be >= 1");
    if (!(cfg.learning_rate > 0.0))
        throw invalid_parameter_error("train_toy: learning_rate must be > 0");

    ToyModelConfig mc = cfg.model;
    mc.height = cfg.data.height;
    mc.width = cfg.data.width;
    mc.channels = cfg.data.channels;
    mc.num_classes = 4;  // the quadrant task is 4-way by construction
    ToyModel model(mc);
    model.init_params(rng::mix_seed(cfg.seed, 0x1A17u));

    std::vector<Sample> samples;
    samples.reserve(static_cast<std::size_t>(cfg.train_samples));
    for (int i = 0; i < cfg.train_samples; ++i)
        samples.push_back(make_sample(cfg.data, cfg.seed, static_cast<std::uint64_t>(i)));

    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 shuffle_rng(rng::mix_seed(cfg.seed, 0x5487u));

    std::vector<double> grad(model.params().size(), 0.0);
    if (stats) {
        stats->epoch_loss.clear();
        stats->epoch_loss.reserve(static_cast<std::size_t>(cfg.epochs));
    }

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(
                rng::uniform_int(shuffle_rng, 0, static_cast<std::int64_t>(i)));
            std::swap(order[i], order[j]);
        }
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t i = start; i < end; ++i) {
                const Sample& s = samples[order[i]];
                epoch_loss += model.loss_param_grad(s.x, s.label, grad);
            }
            const double inv_batch = 1.0 / static_cast<double>(end - start);
            kernels::axpy(-cfg.learning_rate * inv_batch, grad.data(),
                          model.params().data(), grad.size());
        }
        if (stats) stats->epoch_loss.push_back(epoch_loss / samples.size());
    }

    std::size_t correct = 0;
    for (const Sample& s : samples)
        if (model.predict(s.x) == s.label) ++correct;
    const double accuracy = static_cast<double>(correct) / samples.size();
    if (stats) stats->train_accuracy = accuracy;

    if (cfg.min_accuracy >= 0.0 && accuracy < cfg.min_accuracy) {
        std::ostringstream msg;
        msg << "train_toy: final training accuracy " << accuracy << " is below required "
            << cfg.min_accuracy;
        throw training_failure(msg.str());
    }
    return model;
}

}  // namespace pathattr
