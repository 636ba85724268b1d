#pragma once

#include <string>
#include <vector>

#include "pathattr/models.hpp"
#include "pathattr/tensor.hpp"

namespace pathattr {

enum class Method { IG, GIG, BlurIG };

std::string method_to_string(Method m);
Method method_from_string(const std::string& s);

enum class IntegratorKind { Riemann, Idgi };

std::string integrator_to_string(IntegratorKind k);
IntegratorKind integrator_from_string(const std::string& s);

struct AttributionMap {
    ImageTensor attributions;
    std::string method;      // "ig" | "gig" | "blur_ig"
    std::string integrator;  // "riemann" | "idgi"
    int target_class = 0;
    int steps = 0;
    double base_value = 0.0;   // f at the path start
    double input_value = 0.0;  // f at the path end
    double sum = 0.0;          // total attribution mass
    int degenerate_steps = 0;  // idgi: segments skipped for an exactly zero gradient
};

/// Per-segment diagnostics, one record per integration step.
struct StepRecord {
    int index = 0;
    double alpha = 0.0;      // path parameter at the segment start
    double value = 0.0;      // f at the segment start
    double delta = 0.0;      // f at the segment end minus value
    double grad_norm = 0.0;  // L2 norm of the gradient at the segment start
    bool degenerate = false;
};

/// Left Riemann sum of gradient . dx over the path segments.
AttributionMap riemann_integrate(const Model& m, int target_class,
                                 const std::vector<ImageTensor>& path,
                                 std::vector<StepRecord>* records = nullptr);

/// Important-direction integrator: each segment's score change d is spread
/// over features as g*g*d/(g.g), which keeps only the component of the move
/// along the gradient. Segments with an exactly zero gradient are skipped and
/// counted in degenerate_steps.
AttributionMap idgi_integrate(const Model& m, int target_class,
                              const std::vector<ImageTensor>& path,
                              std::vector<StepRecord>* records = nullptr);

/// Projection of the segment onto the local score hyperplane:
/// x_p = x + g * delta / (g.g). Throws degenerate_step_error when g is zero.
ImageTensor project_to_hyperplane(const ImageTensor& x, const ImageTensor& g,
                                  double delta);

ImageTensor vanilla_gradient(const Model& m, const ImageTensor& x, int target_class);

struct AttributeOptions {
    Method method = Method::IG;
    IntegratorKind integrator = IntegratorKind::Riemann;
    int steps = 200;
    std::string baseline = "black";  // "black" | "white" | "custom"; ignored by blur_ig
    ImageTensor custom_baseline;
    double max_sigma = 50.0;    // blur_ig
    double gig_fraction = 0.0;  // gig; 0 selects 1/(remaining steps)
    bool use_logits = false;    // attribute raw scores instead of the model head
};

ImageTensor make_baseline(const ImageTensor& x, const std::string& kind,
                          const ImageTensor* custom);

/// Builds the path for opts.method and runs the selected integrator.
AttributionMap attribute(const Model& m, const ImageTensor& x, int target_class,
                         const AttributeOptions& opts,
                         std::vector<StepRecord>* records = nullptr);

}  // namespace pathattr
