#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathattr/tensor.hpp"

namespace pathattr {

/// Classifier with analytic gradients. The contract is one reverse pass per
/// gradient: `scores` is the pre-head forward, `score_vjp` pulls a seed vector
/// back through it. Heads (identity vs softmax) are layered on top so each
/// `gradient` call costs exactly one forward plus one VJP.
class Model {
  public:
    virtual ~Model() = default;

    virtual int num_classes() const = 0;
    /// True when value() is the softmax probability, false when it is the raw score.
    virtual bool softmax_head() const = 0;
    /// Pre-head scores (logits), length num_classes().
    virtual std::vector<double> scores(const ImageTensor& x) const = 0;
    /// Gradient of seed . scores(x) with respect to x.
    virtual ImageTensor score_vjp(const ImageTensor& x,
                                  const std::vector<double>& seed) const = 0;

    std::vector<double> probabilities(const ImageTensor& x) const;
    /// Score function used for attribution: probability or raw score per head.
    double value(const ImageTensor& x, int c) const;
    /// d value(x, c) / dx. One VJP regardless of head.
    ImageTensor gradient(const ImageTensor& x, int c) const;
    int predict(const ImageTensor& x) const;

  protected:
    void check_class(int c) const;
};

/// Adapter exposing another model's raw scores as the attribution target,
/// regardless of the wrapped model's head. Non-owning.
class LogitView : public Model {
  public:
    explicit LogitView(const Model& inner) : inner_(inner) {}

    int num_classes() const override { return inner_.num_classes(); }
    bool softmax_head() const override { return false; }
    std::vector<double> scores(const ImageTensor& x) const override {
        return inner_.scores(x);
    }
    ImageTensor score_vjp(const ImageTensor& x,
                          const std::vector<double>& seed) const override {
        return inner_.score_vjp(x, seed);
    }

  private:
    const Model& inner_;
};

enum class Arch { Linear, SoftmaxRegression, Mlp, TinyCnn };

std::string arch_to_string(Arch a);
Arch arch_from_string(const std::string& s);

struct ToyModelConfig {
    Arch arch = Arch::Linear;
    int height = 32;
    int width = 32;
    int channels = 1;
    int num_classes = 4;
    int hidden = 32;    // mlp
    int filters = 8;    // tiny_cnn
    int pool_grid = 4;  // tiny_cnn: avgpool output is pool_grid x pool_grid
};

/// Built-in differentiable classifiers. Parameters live in one flat vector so
/// an SGD step is a single axpy; named slices map the vector to the weights
/// file format.
class ToyModel : public Model {
  public:
    explicit ToyModel(const ToyModelConfig& cfg);

    void init_params(std::uint64_t seed);

    int num_classes() const override { return cfg_.num_classes; }
    bool softmax_head() const override { return cfg_.arch != Arch::Linear; }
    std::vector<double> scores(const ImageTensor& x) const override;
    ImageTensor score_vjp(const ImageTensor& x,
                          const std::vector<double>& seed) const override;

    /// Softmax cross-entropy loss for one sample; accumulates d loss / d params
    /// into grad (same length as params). Returns the loss.
    double loss_param_grad(const ImageTensor& x, int label,
                           std::vector<double>& grad) const;

    const ToyModelConfig& config() const { return cfg_; }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    struct ParamSlice {
        std::string name;
        std::size_t offset;
        std::size_t size;
    };
    std::vector<ParamSlice> param_layout() const;

  private:
    struct Forward;  // per-arch intermediate activations
    void run_forward(const ImageTensor& x, Forward& f) const;
    void check_input(const ImageTensor& x) const;

    ToyModelConfig cfg_;
    std::vector<double> params_;
    // Offsets into params_; which slice each one names depends on arch.
    std::size_t off_w0_ = 0, off_b0_ = 0, off_w1_ = 0, off_b1_ = 0;
};

void save_model(const ToyModel& m, const std::string& path);
ToyModel load_model(const std::string& path);

std::vector<double> softmax(const std::vector<double>& scores);

/// Central finite difference of value(x, c); test oracle for score_vjp.
ImageTensor finite_diff_gradient(const Model& m, const ImageTensor& x, int c,
                                 double eps = 1e-5);

/// Synthetic task: a bright square on a noisy background, class = the quadrant
/// holding the square. The ground-truth mask is the square.
struct MaskQuadrantSpec {
    int height = 32;
    int width = 32;
    int channels = 1;
    int square = 10;
    double noise_max = 0.3;
    double bright_min = 0.7;
    double bright_max = 1.0;
    // Structured background noise: dimmer squares in quadrants other than the
    // label's. They never enter the mask; intensities must sit between
    // noise_max and bright_min so the label stays unambiguous.
    int distractors = 0;
    double distractor_min = 0.0;
    double distractor_max = 0.0;
};

struct Sample {
    ImageTensor x;
    int label = 0;
    ImageTensor mask;  // 1 channel, values 0 or 1
};

/// Deterministic in (spec, seed, index); labels cycle through the 4 classes.
Sample make_sample(const MaskQuadrantSpec& spec, std::uint64_t seed,
                   std::uint64_t index);

struct TrainConfig {
    ToyModelConfig model;  // height/width/channels/num_classes come from `data`
    MaskQuadrantSpec data;
    int train_samples = 2048;
    int epochs = 8;
    int batch_size = 32;
    double learning_rate = 0.05;
    std::uint64_t seed = 7;
    /// Final accuracy on the training set below this throws training_failure.
    /// Negative disables the check.
    double min_accuracy = 0.9;
};

struct TrainStats {
    std::vector<double> epoch_loss;
    double train_accuracy = 0.0;
};

ToyModel train_toy(const TrainConfig& cfg, TrainStats* stats = nullptr);

}  // namespace pathattr
