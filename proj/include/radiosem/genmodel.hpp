#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "radiosem/gridmap.hpp"
#include "radiosem/ldpl.hpp"

namespace radiosem {

/// Dense row-major tensor, shape {channels, height, width} except where noted.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> values;

    static Tensor zeros(std::vector<int> shape);
    std::size_t size() const { return values.size(); }
};

/// Conditioning features per scene: aligned building map M_U, BS map M_T,
/// radio depth map M_D, plus optional side information broadcast as extra
/// constant channels.
struct FeatureStack {
    GridMap buildings;  // binary
    GridMap bs_map;     // binary, 1 at BS pixels
    GridMap depth;      // [0, 1]
    std::vector<double> side_info;

    FeatureStack(GridMap buildings, GridMap bs_map, GridMap depth,
                 std::vector<double> side_info = {});
    int width() const { return buildings.width(); }
    int height() const { return buildings.height(); }
    int channels() const { return 3 + static_cast<int>(side_info.size()); }
};

enum class LayerKind : std::uint8_t {
    Conv = 0,             // 3x3, pad 1, stride 1 or 2
    TConv = 1,            // 3x3 transposed, stride 2, doubles the resolution
    LeakyRelu = 2,        // slope 0.2
    Sigmoid = 3,
    GlobalMeanAffine = 4  // per-channel spatial mean -> affine -> scalar
};

struct LayerSpec {
    LayerKind kind;
    int in_ch = 0;
    int out_ch = 0;
    int kernel = 0;
    int stride = 1;
    bool operator==(const LayerSpec&) const = default;
};

/// Versioned architecture descriptor; federated aggregation rejects
/// mismatched layouts.
struct NetLayout {
    std::uint8_t version = 1;
    std::vector<LayerSpec> layers;

    std::size_t param_count() const;
    bool operator==(const NetLayout&) const = default;
};

/// Encoder-decoder generator: in -> 16 -> 32 -> 32 -> 16 -> 1 channels,
/// stride-2 down/up twice, final sigmoid.
NetLayout generator_layout(int in_channels = 3);

/// Conditioned discriminator: (y + features) -> 16 -> 32, global mean,
/// affine, sigmoid.
NetLayout discriminator_layout(int in_channels = 4);

struct ModelParams {
    NetLayout layout;
    std::vector<double> values;
};

/// Seeded He-style initialization; biases zero.
ModelParams init_params(const NetLayout& layout, std::uint64_t seed);

/// Forward activations cached for the backward pass.
struct NetTape {
    std::vector<Tensor> activations;  // [0] = input, [i] = output of layer i
};

struct NetGradients {
    std::vector<double> param_grads;
    Tensor input_grad;
};

Tensor net_forward(const ModelParams& net, const Tensor& input, NetTape* tape = nullptr);
NetGradients net_backward(const ModelParams& net, const NetTape& tape,
                          const Tensor& output_grad);

/// Feature stack as a {C, H, W} input tensor.
Tensor feature_tensor(const FeatureStack& f);
/// Radiomap y concatenated ahead of the feature channels.
Tensor conditioned_tensor(const GridMap& y, const FeatureStack& f);

GridMap generator_forward(const ModelParams& gen, const FeatureStack& f);
double discriminator_forward(const ModelParams& disc, const GridMap& y,
                             const FeatureStack& f);

/// alpha * log(1 - d_fake) + mse(y_hat, y_true); log arguments clamped
/// at 1e-12.
double generator_loss(double d_fake, const GridMap& y_hat, const GridMap& y_true,
                      double alpha);

/// -(log d_real + log(1 - d_fake)), clamped as above.
double discriminator_loss(double d_real, double d_fake);

struct TrainSample {
    FeatureStack features;
    GridMap target;
};

/// Losses and parameter gradients for one sample at the current (G, D).
struct GanSampleGrads {
    double d_fake = 0.0;
    double d_real = 0.0;
    double loss_d = 0.0;
    double loss_g_adv = 0.0;  // log(1 - d_fake)
    double loss_mse = 0.0;
    std::vector<double> gen_grads;
    std::vector<double> disc_grads;
};

GanSampleGrads gan_sample_grads(const ModelParams& gen, const ModelParams& disc,
                                const TrainSample& sample, double alpha,
                                bool want_gen = true, bool want_disc = true);

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Standard bias-corrected Adam update, in place.
void adam_step(std::vector<double>& params, std::span<const double> grads,
               AdamState& state, double lr);

struct TrainConfig {
    double alpha = 0.01;
    double lr = 1e-4;
    int batch = 32;
    int epochs = 0;
    std::uint64_t seed = 0;
    int work_resolution = 64;
    bool train_discriminator = true;
    int threads = 1;  // per-sample parallelism; results independent of the value
};

struct EpochStats {
    double loss_d = 0.0;
    double loss_g = 0.0;    // adversarial term log(1 - d_fake)
    double loss_mse = 0.0;
};

struct TrainResult {
    ModelParams generator;
    ModelParams discriminator;
    std::vector<EpochStats> history;
};

/// Iterative cGAN training: per batch a discriminator step then a generator
/// step. Seeded and bitwise deterministic.
TrainResult train(const std::vector<TrainSample>& dataset, const TrainConfig& cfg);

/// Same loop but continuing from the given parameters (federated local update).
TrainResult train_from(ModelParams gen, ModelParams disc,
                       const std::vector<TrainSample>& dataset, const TrainConfig& cfg);

/// No-learning reference: normalized strongest-transmitter inversion
/// n(max_t (P_ref - PL_t) * B_t) from transmitted LDPL parameters only.
GridMap physics_baseline(const GridMap& buildings,
                         const std::vector<PixelCoord>& bs_list,
                         const std::vector<LdplParams>& params_list,
                         double d_min = 1.0);

/// Params file: "RSMP", u8 version, layout descriptor, u64 count,
/// f64 little-endian values.
std::vector<std::uint8_t> model_params_to_bytes(const ModelParams& params);
ModelParams model_params_from_bytes(std::span<const std::uint8_t> bytes);
void save_model_params(const std::filesystem::path& path, const ModelParams& params);
ModelParams load_model_params(const std::filesystem::path& path);

/// CSV: epoch, L_D, L_G, L_MSE.
void write_loss_history_csv(const std::filesystem::path& path,
                            const std::vector<EpochStats>& history);

}  // namespace radiosem
