#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cyclab/field.hpp"
#include "cyclab/tensor.hpp"

namespace cyclab {

// 3x3 convolution, stride 1, longitude-wrapping padding, zero padding in
// latitude. Weights laid out [out][in][ky][kx].
struct ConvLayer {
    int in_ch = 0, out_ch = 0, k = 3;
    std::vector<double> w;
    std::vector<double> b;

    double& wt(int o, int ci, int ky, int kx) {
        return w[((static_cast<size_t>(o) * in_ch + ci) * k + ky) * k + kx];
    }
    double wt(int o, int ci, int ky, int kx) const {
        return w[((static_cast<size_t>(o) * in_ch + ci) * k + ky) * k + kx];
    }
};

// Small convolutional scorer: conv(4->H) tanh, conv(H->H) tanh, conv(H->1),
// logistic head. Probabilities are clamped to [1e-7, 1-1e-7] inside the loss.
struct SurrogateModel {
    std::vector<ConvLayer> layers;
    StandardizationStats channel_stats;  // msl, wind10, thickness, elevation
    StandardizationStats var_stats;      // raw forecast variables (attack space)

    size_t param_count() const;
    std::vector<double> flatten_params() const;
    void load_params(const std::vector<double>& p);
};

inline constexpr double kProbClamp = 1e-7;
inline const std::vector<std::string> kSurrogateChannels = {"msl", "wind10", "thickness",
                                                            "elevation"};

SurrogateModel make_surrogate(int hidden = 16, uint64_t seed = 0);

// Standardized 4-channel tensor (T x 4 x r x c) from detector inputs.
Tensor4 standardized_inputs(const DetectorInputs& inp, const StandardizationStats& s);

// Per-timestep forward pass; x is (T x C x r x c), output (T x r x c) in (0,1).
Tensor3 forward(const SurrogateModel& m, const Tensor4& x);

// Skewness-aware focal loss, mean over timesteps of the cellwise sum. The
// per-cell exponent defaults to 2 everywhere; gamma_map overrides it.
double focal_loss(const Tensor3& prob, const Tensor3& label,
                  const Tensor3* gamma_map = nullptr);

struct InputGrad {
    double loss = 0.0;
    Tensor4 grad;  // dL/dx, same shape as x
};

// Exact analytic gradient of the (possibly gamma-modulated) focal loss with
// respect to the input, via explicit backward pass.
InputGrad grad_input(const SurrogateModel& m, const Tensor4& x, const Tensor3& target,
                     const Tensor3* gamma_map = nullptr);

struct Snapshot {
    Tensor3 x;      // (C x r x c), standardized
    Tensor3 label;  // (1 x r x c), soft label
};

struct TrainConfig {
    double learning_rate = 5.92e-4;
    double adam_beta1 = 0.9101;
    double adam_beta2 = 0.9119;
    double weight_decay = 6.48e-6;
    int epochs = 60;
    int batch_size = 8;
    double gamma = 2.0;  // 0 = plain cross-entropy
    uint64_t seed = 0;

    static TrainConfig from_json_file(const std::string& path);
};

struct TrainReportRow {
    int epoch = 0;
    double train_loss = 0.0, val_loss = 0.0;
};

// Adam training; returns the parameters with the best validation loss.
// Deterministic given cfg.seed. Throws on NaN loss.
SurrogateModel train_surrogate(const std::vector<Snapshot>& train_set,
                               const std::vector<Snapshot>& val_set, const TrainConfig& cfg,
                               int hidden = 16,
                               std::vector<TrainReportRow>* report = nullptr);

// Checkpoint: one JSON header line + raw f64le parameter payload.
void save_model(const SurrogateModel& m, const std::string& path);
SurrogateModel load_model(const std::string& path);

}  // namespace cyclab
