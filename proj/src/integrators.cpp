#include "pathattr/integrators.hpp"

#include <cmath>

#include "pathattr/errors.hpp"
#include "pathattr/kernels.hpp"
#include "pathattr/paths.hpp"

namespace pathattr {

std::string method_to_string(Method m) {
    switch (m) {
        case Method::IG: return "ig";
        case Method::GIG: return "gig";
        case Method::BlurIG: return "blur_ig";
    }
    throw invalid_parameter_error("unknown method enum value");
}

Method method_from_string(const std::string& s) {
    if (s == "ig") return Method::IG;
    if (s == "gig") return Method::GIG;
    if (s == "blur_ig") return Method::BlurIG;
    throw invalid_parameter_error("unknown method: " + s);
}

std::string integrator_to_string(IntegratorKind k) {
    switch (k) {
        case IntegratorKind::Riemann: return "riemann";
        case IntegratorKind::Idgi: return "idgi";
    }
    throw invalid_parameter_error("unknown integrator enum value");
}

IntegratorKind integrator_from_string(const std::string& s) {
    if (s == "riemann") return IntegratorKind::Riemann;
    if (s == "idgi") return IntegratorKind::Idgi;
    throw invalid_parameter_error("unknown integrator: " + s);
}

namespace {

void check_path(const std::vector<ImageTensor>& path) {
    if (path.size() < 2)
        throw invalid_parameter_error("integration path needs at least 2 points");
    for (std::size_t j = 1; j < path.size(); ++j)
        if (!path[j].same_shape(path[0]))
            throw invalid_parameter_error("integration path points differ in shape");
}

AttributionMap integrate(const Model& m, int target_class,
                         const std::vector<ImageTensor>& path, IntegratorKind kind,
                         const std::vector<double>* alphas,
                         std::vector<StepRecord>* records) {
    check_path(path);
    const int steps = static_cast<int>(path.size()) - 1;
    const std::size_t n = path[0].size();

    AttributionMap out;
    out.attributions = zeros_like(path[0]);
    out.integrator = integrator_to_string(kind);
    out.target_class = target_class;
    out.steps = steps;

    if (records) {
        records->clear();
        records->reserve(static_cast<std::size_t>(steps));
    }

    double value = m.value(path[0], target_class);
    out.base_value = value;

    for (int j = 0; j < steps; ++j) {
        const ImageTensor g = m.gradient(path[j], target_class);
        const double next_value = m.value(path[j + 1], target_class);
        const double delta = next_value - value;
        const double gg = kernels::dot(g.data.data(), g.data.data(), n);
        bool degenerate = false;

        if (kind == IntegratorKind::Riemann) {
            kernels::mul_diff_acc(g.data.data(), path[j + 1].data.data(),
                                  path[j].data.data(), out.attributions.data.data(), n);
        } else {
            if (gg == 0.0) {
                degenerate = true;
                ++out.degenerate_steps;
            } else {
                kernels::sq_scale_acc(g.data.data(), delta / gg,
                                      out.attributions.data.data(), n);
            }
        }

        if (records) {
            StepRecord r;
            r.index = j;
            r.alpha = alphas ? (*alphas)[j] : static_cast<double>(j) / steps;
            r.value = value;
            r.delta = delta;
            r.grad_norm = std::sqrt(gg);
            r.degenerate = degenerate;
            records->push_back(r);
        }
        value = next_value;
    }

    out.input_value = value;
    out.sum = kernels::sum(out.attributions.data.data(), n);
    return out;
}

}  // namespace

AttributionMap riemann_integrate(const Model& m, int target_class,
                                 const std::vector<ImageTensor>& path,
                                 std::vector<StepRecord>* records) {
    return integrate(m, target_class, path, IntegratorKind::Riemann, nullptr, records);
}

AttributionMap idgi_integrate(const Model& m, int target_class,
                              const std::vector<ImageTensor>& path,
                              std::vector<StepRecord>* records) {
    return integrate(m, target_class, path, IntegratorKind::Idgi, nullptr, records);
}

ImageTensor project_to_hyperplane(const ImageTensor& x, const ImageTensor& g,
                                  double delta) {
    validate(x, "projection point");
    validate(g, "projection gradient");
    if (!x.same_shape(g))
        throw invalid_parameter_error("projection point and gradient differ in shape");
    const double gg = kernels::dot(g.data.data(), g.data.data(), g.size());
    if (gg == 0.0)
        throw degenerate_step_error("zero gradient: score hyperplane is undefined");
    ImageTensor out = x;
    kernels::axpy(delta / gg, g.data.data(), out.data.data(), out.size());
    return out;
}

ImageTensor vanilla_gradient(const Model& m, const ImageTensor& x, int target_class) {
    return m.gradient(x, target_class);
}

ImageTensor make_baseline(const ImageTensor& x, const std::string& kind,
                          const ImageTensor* custom) {
    if (kind == "black") return zeros_like(x);
    if (kind == "white") return constant_like(x, 1.0);
    if (kind == "custom") {
        if (!custom || custom->size() == 0)
            throw invalid_parameter_error("baseline 'custom' requires a baseline image");
        validate(*custom, "custom baseline");
        if (!custom->same_shape(x))
            throw invalid_parameter_error("custom baseline shape differs from input");
        return *custom;
    }
    throw invalid_parameter_error("unknown baseline kind: " + kind);
}

AttributionMap attribute(const Model& m, const ImageTensor& x, int target_class,
                         const AttributeOptions& opts,
                         std::vector<StepRecord>* records) {
    validate(x, "attribute input");
    if (opts.steps < 1) throw invalid_parameter_error("attribute: steps must be >= 1");

    const LogitView logits(m);
    const Model& target = opts.use_logits ? static_cast<const Model&>(logits) : m;

    std::vector<ImageTensor> path;
    std::vector<double> alphas;
    switch (opts.method) {
        case Method::IG: {
            const ImageTensor baseline =
                make_baseline(x, opts.baseline, &opts.custom_baseline);
            path = straight_path(baseline, x, opts.steps);
            break;
        }
        case Method::GIG: {
            const ImageTensor baseline =
                make_baseline(x, opts.baseline, &opts.custom_baseline);
            path = guided_path(target, target_class, baseline, x, opts.steps,
                               opts.gig_fraction);
            break;
        }
        case Method::BlurIG: {
            const BlurSchedule schedule = make_blur_schedule(opts.max_sigma, opts.steps);
            path = blur_path(x, schedule);
            alphas = schedule.sigmas;
            break;
        }
    }

    const std::vector<double>* alpha_ptr = alphas.empty() ? nullptr : &alphas;
    AttributionMap out =
        integrate(target, target_class, path, opts.integrator, alpha_ptr, records);
    out.method = method_to_string(opts.method);
    return out;
}

}  // namespace pathattr
