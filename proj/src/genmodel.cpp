#include "radiosem/genmodel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <string>
#include <thread>
#include <utility>

#include "radiosem/depthmap.hpp"
#include "radiosem/metrics.hpp"
#include "radiosem/rng.hpp"
#include "wire_util.hpp"

namespace radiosem {

namespace {

constexpr double kLeakySlope = 0.2;
constexpr double kLogClamp = 1e-12;

double clamped_log(double x) { return std::log(std::max(x, kLogClamp)); }

// Derivative of clamped_log; zero inside the clamped region so analytic and
// finite-difference gradients agree everywhere.
double clamped_log_grad(double x) { return x > kLogClamp ? 1.0 / x : 0.0; }

std::size_t layer_param_count(const LayerSpec& l) {
    switch (l.kind) {
        case LayerKind::Conv:
        case LayerKind::TConv:
            return static_cast<std::size_t>(l.in_ch) * l.out_ch * l.kernel * l.kernel +
                   l.out_ch;
        case LayerKind::GlobalMeanAffine:
            return static_cast<std::size_t>(l.in_ch) + 1;
        case LayerKind::LeakyRelu:
        case LayerKind::Sigmoid:
            return 0;
    }
    return 0;
}

}  // namespace

Tensor Tensor::zeros(std::vector<int> shape) {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return Tensor{std::move(shape), std::vector<double>(n, 0.0)};
}

FeatureStack::FeatureStack(GridMap buildings_in, GridMap bs_map_in, GridMap depth_in,
                           std::vector<double> side_info_in)
    : buildings(std::move(buildings_in)), bs_map(std::move(bs_map_in)),
      depth(std::move(depth_in)), side_info(std::move(side_info_in)) {
    if (buildings.width() != bs_map.width() || buildings.height() != bs_map.height() ||
        buildings.width() != depth.width() || buildings.height() != depth.height()) {
        throw DimensionMismatch("feature channels differ in dims");
    }
    if (buildings.kind() != MapKind::Binary || bs_map.kind() != MapKind::Binary) {
        throw InvalidGrid("building and BS maps must be binary");
    }
    for (double v : side_info) {
        if (!std::isfinite(v)) throw InvalidGrid("side information must be finite");
    }
}

std::size_t NetLayout::param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += layer_param_count(l);
    return n;
}

NetLayout generator_layout(int in_channels) {
    NetLayout net;
    net.layers = {
        {LayerKind::Conv, in_channels, 16, 3, 2},
        {LayerKind::LeakyRelu, 16, 16, 0, 1},
        {LayerKind::Conv, 16, 32, 3, 2},
        {LayerKind::LeakyRelu, 32, 32, 0, 1},
        {LayerKind::TConv, 32, 32, 3, 2},
        {LayerKind::LeakyRelu, 32, 32, 0, 1},
        {LayerKind::TConv, 32, 16, 3, 2},
        {LayerKind::LeakyRelu, 16, 16, 0, 1},
        {LayerKind::Conv, 16, 1, 3, 1},
        {LayerKind::Sigmoid, 1, 1, 0, 1},
    };
    return net;
}

NetLayout discriminator_layout(int in_channels) {
    NetLayout net;
    net.layers = {
        {LayerKind::Conv, in_channels, 16, 3, 2},
        {LayerKind::LeakyRelu, 16, 16, 0, 1},
        {LayerKind::Conv, 16, 32, 3, 2},
        {LayerKind::LeakyRelu, 32, 32, 0, 1},
        {LayerKind::GlobalMeanAffine, 32, 1, 0, 1},
        {LayerKind::Sigmoid, 1, 1, 0, 1},
    };
    return net;
}

ModelParams init_params(const NetLayout& layout, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ModelParams params{layout, {}};
    params.values.reserve(layout.param_count());
    for (const auto& l : layout.layers) {
        const std::size_t count = layer_param_count(l);
        if (count == 0) continue;
        std::size_t weights = count;
        double scale = 0.0;
        switch (l.kind) {
            case LayerKind::Conv:
            case LayerKind::TConv:
                weights = count - static_cast<std::size_t>(l.out_ch);
                scale = std::sqrt(2.0 / (static_cast<double>(l.in_ch) * l.kernel * l.kernel));
                break;
            case LayerKind::GlobalMeanAffine:
                weights = count - 1;
                scale = std::sqrt(1.0 / l.in_ch);
                break;
            default:
                break;
        }
        for (std::size_t i = 0; i < weights; ++i) {
            params.values.push_back(scale * gaussian(rng));
        }
        for (std::size_t i = weights; i < count; ++i) params.values.push_back(0.0);
    }
    return params;
}

// ---- layer kernels -------------------------------------------------------------

namespace {

struct Dims {
    int c, h, w;
};

Dims dims_of(const Tensor& t) {
    if (t.shape.size() == 1) return {t.shape[0], 1, 1};
    if (t.shape.size() != 3) throw ShapeMismatch("expected a {C,H,W} tensor");
    return {t.shape[0], t.shape[1], t.shape[2]};
}

Tensor conv_forward(const LayerSpec& l, std::span<const double> p, const Tensor& in) {
    const Dims d = dims_of(in);
    if (d.c != l.in_ch) throw ShapeMismatch("conv input channel mismatch");
    if (d.h % l.stride != 0 || d.w % l.stride != 0) {
        throw ShapeMismatch("conv input dims not divisible by the stride");
    }
    const int oh = d.h / l.stride;
    const int ow = d.w / l.stride;
    Tensor out = Tensor::zeros({l.out_ch, oh, ow});
    const double* bias = p.data() + static_cast<std::size_t>(l.in_ch) * l.out_ch * 9;
    for (int co = 0; co < l.out_ch; ++co) {
        double* out_c = out.values.data() + static_cast<std::size_t>(co) * oh * ow;
        for (int i = 0; i < oh * ow; ++i) out_c[i] = bias[co];
        for (int ci = 0; ci < d.c; ++ci) {
            const double* w = p.data() + (static_cast<std::size_t>(co) * d.c + ci) * 9;
            const double* in_c = in.values.data() + static_cast<std::size_t>(ci) * d.h * d.w;
            for (int oy = 0; oy < oh; ++oy) {
                for (int ky = 0; ky < 3; ++ky) {
                    const int iy = oy * l.stride + ky - 1;
                    if (iy < 0 || iy >= d.h) continue;
                    const double* in_row = in_c + static_cast<std::size_t>(iy) * d.w;
                    double* out_row = out_c + static_cast<std::size_t>(oy) * ow;
                    for (int kx = 0; kx < 3; ++kx) {
                        const double wv = w[ky * 3 + kx];
                        if (wv == 0.0) continue;
                        for (int ox = 0; ox < ow; ++ox) {
                            const int ix = ox * l.stride + kx - 1;
                            if (ix < 0 || ix >= d.w) continue;
                            out_row[ox] += wv * in_row[ix];
                        }
                    }
                }
            }
        }
    }
    return out;
}

void conv_backward(const LayerSpec& l, std::span<const double> p, const Tensor& in,
                   const Tensor& dout, std::span<double> dp, Tensor& din) {
    const Dims d = dims_of(in);
    const int oh = d.h / l.stride;
    const int ow = d.w / l.stride;
    double* dbias = dp.data() + static_cast<std::size_t>(l.in_ch) * l.out_ch * 9;
    for (int co = 0; co < l.out_ch; ++co) {
        const double* dout_c = dout.values.data() + static_cast<std::size_t>(co) * oh * ow;
        for (int i = 0; i < oh * ow; ++i) dbias[co] += dout_c[i];
        for (int ci = 0; ci < d.c; ++ci) {
            const double* w = p.data() + (static_cast<std::size_t>(co) * d.c + ci) * 9;
            double* dw = dp.data() + (static_cast<std::size_t>(co) * d.c + ci) * 9;
            const double* in_c = in.values.data() + static_cast<std::size_t>(ci) * d.h * d.w;
            double* din_c = din.values.data() + static_cast<std::size_t>(ci) * d.h * d.w;
            for (int oy = 0; oy < oh; ++oy) {
                for (int ky = 0; ky < 3; ++ky) {
                    const int iy = oy * l.stride + ky - 1;
                    if (iy < 0 || iy >= d.h) continue;
                    const double* in_row = in_c + static_cast<std::size_t>(iy) * d.w;
                    double* din_row = din_c + static_cast<std::size_t>(iy) * d.w;
                    const double* dout_row = dout_c + static_cast<std::size_t>(oy) * ow;
                    for (int kx = 0; kx < 3; ++kx) {
                        const double wv = w[ky * 3 + kx];
                        double dw_acc = 0.0;
                        for (int ox = 0; ox < ow; ++ox) {
                            const int ix = ox * l.stride + kx - 1;
                            if (ix < 0 || ix >= d.w) continue;
                            dw_acc += dout_row[ox] * in_row[ix];
                            din_row[ix] += wv * dout_row[ox];
                        }
                        dw[ky * 3 + kx] += dw_acc;
                    }
                }
            }
        }
    }
}

Tensor tconv_forward(const LayerSpec& l, std::span<const double> p, const Tensor& in) {
    const Dims d = dims_of(in);
    if (d.c != l.in_ch) throw ShapeMismatch("tconv input channel mismatch");
    const int oh = d.h * 2;
    const int ow = d.w * 2;
    Tensor out = Tensor::zeros({l.out_ch, oh, ow});
    const double* bias = p.data() + static_cast<std::size_t>(l.in_ch) * l.out_ch * 9;
    for (int co = 0; co < l.out_ch; ++co) {
        double* out_c = out.values.data() + static_cast<std::size_t>(co) * oh * ow;
        for (int i = 0; i < oh * ow; ++i) out_c[i] = bias[co];
    }
    for (int ci = 0; ci < d.c; ++ci) {
        const double* in_c = in.values.data() + static_cast<std::size_t>(ci) * d.h * d.w;
        for (int co = 0; co < l.out_ch; ++co) {
            const double* w = p.data() + (static_cast<std::size_t>(ci) * l.out_ch + co) * 9;
            double* out_c = out.values.data() + static_cast<std::size_t>(co) * oh * ow;
            for (int iy = 0; iy < d.h; ++iy) {
                for (int ky = 0; ky < 3; ++ky) {
                    const int oy = 2 * iy + ky - 1;
                    if (oy < 0 || oy >= oh) continue;
                    const double* in_row = in_c + static_cast<std::size_t>(iy) * d.w;
                    double* out_row = out_c + static_cast<std::size_t>(oy) * ow;
                    for (int kx = 0; kx < 3; ++kx) {
                        const double wv = w[ky * 3 + kx];
                        if (wv == 0.0) continue;
                        for (int ix = 0; ix < d.w; ++ix) {
                            const int ox = 2 * ix + kx - 1;
                            if (ox < 0 || ox >= ow) continue;
                            out_row[ox] += wv * in_row[ix];
                        }
                    }
                }
            }
        }
    }
    return out;
}

void tconv_backward(const LayerSpec& l, std::span<const double> p, const Tensor& in,
                    const Tensor& dout, std::span<double> dp, Tensor& din) {
    const Dims d = dims_of(in);
    const int oh = d.h * 2;
    const int ow = d.w * 2;
    double* dbias = dp.data() + static_cast<std::size_t>(l.in_ch) * l.out_ch * 9;
    for (int co = 0; co < l.out_ch; ++co) {
        const double* dout_c = dout.values.data() + static_cast<std::size_t>(co) * oh * ow;
        for (int i = 0; i < oh * ow; ++i) dbias[co] += dout_c[i];
    }
    for (int ci = 0; ci < d.c; ++ci) {
        const double* in_c = in.values.data() + static_cast<std::size_t>(ci) * d.h * d.w;
        double* din_c = din.values.data() + static_cast<std::size_t>(ci) * d.h * d.w;
        for (int co = 0; co < l.out_ch; ++co) {
            const double* w = p.data() + (static_cast<std::size_t>(ci) * l.out_ch + co) * 9;
            double* dw = dp.data() + (static_cast<std::size_t>(ci) * l.out_ch + co) * 9;
            const double* dout_c = dout.values.data() + static_cast<std::size_t>(co) * oh * ow;
            for (int iy = 0; iy < d.h; ++iy) {
                for (int ky = 0; ky < 3; ++ky) {
                    const int oy = 2 * iy + ky - 1;
                    if (oy < 0 || oy >= oh) continue;
                    const double* in_row = in_c + static_cast<std::size_t>(iy) * d.w;
                    double* din_row = din_c + static_cast<std::size_t>(iy) * d.w;
                    const double* dout_row = dout_c + static_cast<std::size_t>(oy) * ow;
                    for (int kx = 0; kx < 3; ++kx) {
                        const double wv = w[ky * 3 + kx];
                        double dw_acc = 0.0;
                        for (int ix = 0; ix < d.w; ++ix) {
                            const int ox = 2 * ix + kx - 1;
                            if (ox < 0 || ox >= ow) continue;
                            dw_acc += in_row[ix] * dout_row[ox];
                            din_row[ix] += wv * dout_row[ox];
                        }
                        dw[ky * 3 + kx] += dw_acc;
                    }
                }
            }
        }
    }
}

}  // namespace

Tensor net_forward(const ModelParams& net, const Tensor& input, NetTape* tape) {
    if (net.values.size() != net.layout.param_count()) {
        throw ShapeMismatch("parameter vector does not match the layout");
    }
    if (tape) {
        tape->activations.clear();
        tape->activations.push_back(input);
    }
    Tensor cur = input;
    std::size_t offset = 0;
    for (const auto& l : net.layout.layers) {
        const std::size_t count = layer_param_count(l);
        std::span<const double> p{net.values.data() + offset, count};
        offset += count;
        Tensor next;
        switch (l.kind) {
            case LayerKind::Conv:
                next = conv_forward(l, p, cur);
                break;
            case LayerKind::TConv:
                next = tconv_forward(l, p, cur);
                break;
            case LayerKind::LeakyRelu: {
                next = cur;
                for (double& v : next.values) {
                    if (v < 0.0) v *= kLeakySlope;
                }
                break;
            }
            case LayerKind::Sigmoid: {
                next = cur;
                for (double& v : next.values) v = 1.0 / (1.0 + std::exp(-v));
                break;
            }
            case LayerKind::GlobalMeanAffine: {
                const Dims d = dims_of(cur);
                if (d.c != l.in_ch) throw ShapeMismatch("affine head channel mismatch");
                const double inv = 1.0 / (static_cast<double>(d.h) * d.w);
                double s = p[static_cast<std::size_t>(l.in_ch)];  // bias
                for (int c = 0; c < d.c; ++c) {
                    double mean = 0.0;
                    const double* in_c =
                        cur.values.data() + static_cast<std::size_t>(c) * d.h * d.w;
                    for (int i = 0; i < d.h * d.w; ++i) mean += in_c[i];
                    s += p[c] * mean * inv;
                }
                next = Tensor{{1}, {s}};
                break;
            }
        }
        cur = std::move(next);
        if (tape) tape->activations.push_back(cur);
    }
    for (double v : cur.values) {
        if (!std::isfinite(v)) throw NumericOverflow("non-finite network output");
    }
    return cur;
}

NetGradients net_backward(const ModelParams& net, const NetTape& tape,
                          const Tensor& output_grad) {
    if (tape.activations.size() != net.layout.layers.size() + 1) {
        throw ShapeMismatch("tape does not match the layout");
    }
    NetGradients g;
    g.param_grads.assign(net.values.size(), 0.0);
    Tensor dout = output_grad;

    // Walk the layers in reverse, reusing the cached activations.
    std::size_t offset = net.values.size();
    for (std::size_t li = net.layout.layers.size(); li-- > 0;) {
        const LayerSpec& l = net.layout.layers[li];
        const std::size_t count = layer_param_count(l);
        offset -= count;
        std::span<const double> p{net.values.data() + offset, count};
        std::span<double> dp{g.param_grads.data() + offset, count};
        const Tensor& in = tape.activations[li];
        const Tensor& out = tape.activations[li + 1];
        if (dout.values.size() != out.values.size()) {
            throw ShapeMismatch("output gradient does not match the forward pass");
        }
        Tensor din;
        switch (l.kind) {
            case LayerKind::Conv:
                din = Tensor::zeros(in.shape);
                conv_backward(l, p, in, dout, dp, din);
                break;
            case LayerKind::TConv:
                din = Tensor::zeros(in.shape);
                tconv_backward(l, p, in, dout, dp, din);
                break;
            case LayerKind::LeakyRelu: {
                din = dout;
                for (std::size_t i = 0; i < din.values.size(); ++i) {
                    if (in.values[i] < 0.0) din.values[i] *= kLeakySlope;
                }
                break;
            }
            case LayerKind::Sigmoid: {
                din = dout;
                for (std::size_t i = 0; i < din.values.size(); ++i) {
                    din.values[i] *= out.values[i] * (1.0 - out.values[i]);
                }
                break;
            }
            case LayerKind::GlobalMeanAffine: {
                const Dims d = dims_of(in);
                const double inv = 1.0 / (static_cast<double>(d.h) * d.w);
                const double go = dout.values[0];
                din = Tensor::zeros(in.shape);
                dp[static_cast<std::size_t>(l.in_ch)] += go;
                for (int c = 0; c < d.c; ++c) {
                    const double* in_c =
                        in.values.data() + static_cast<std::size_t>(c) * d.h * d.w;
                    double* din_c =
                        din.values.data() + static_cast<std::size_t>(c) * d.h * d.w;
                    double mean = 0.0;
                    for (int i = 0; i < d.h * d.w; ++i) mean += in_c[i];
                    dp[c] += go * mean * inv;
                    const double gi = go * p[c] * inv;
                    for (int i = 0; i < d.h * d.w; ++i) din_c[i] = gi;
                }
                break;
            }
        }
        dout = std::move(din);
    }
    g.input_grad = std::move(dout);
    return g;
}

// ---- feature plumbing ------------------------------------------------------------

namespace {

void append_channel(Tensor& t, const GridMap& g) {
    t.values.insert(t.values.end(), g.values().begin(), g.values().end());
}

}  // namespace

Tensor feature_tensor(const FeatureStack& f) {
    Tensor t;
    t.shape = {f.channels(), f.height(), f.width()};
    t.values.reserve(static_cast<std::size_t>(f.channels()) * f.height() * f.width());
    append_channel(t, f.buildings);
    append_channel(t, f.bs_map);
    append_channel(t, f.depth);
    for (double v : f.side_info) {
        t.values.insert(t.values.end(),
                        static_cast<std::size_t>(f.height()) * f.width(), v);
    }
    return t;
}

Tensor conditioned_tensor(const GridMap& y, const FeatureStack& f) {
    if (y.width() != f.width() || y.height() != f.height()) {
        throw DimensionMismatch("radiomap dims differ from the feature dims");
    }
    Tensor feats = feature_tensor(f);
    Tensor t;
    t.shape = {1 + feats.shape[0], f.height(), f.width()};
    t.values.reserve(feats.values.size() +
                     static_cast<std::size_t>(f.height()) * f.width());
    t.values.insert(t.values.end(), y.values().begin(), y.values().end());
    t.values.insert(t.values.end(), feats.values.begin(), feats.values.end());
    return t;
}

GridMap generator_forward(const ModelParams& gen, const FeatureStack& f) {
    const Tensor out = net_forward(gen, feature_tensor(f));
    std::vector<double> v = out.values;
    return GridMap(f.width(), f.height(), MapKind::NormalizedPower, std::move(v));
}

double discriminator_forward(const ModelParams& disc, const GridMap& y,
                             const FeatureStack& f) {
    return net_forward(disc, conditioned_tensor(y, f)).values[0];
}

double generator_loss(double d_fake, const GridMap& y_hat, const GridMap& y_true,
                      double alpha) {
    return alpha * clamped_log(1.0 - d_fake) + mse(y_hat, y_true);
}

double discriminator_loss(double d_real, double d_fake) {
    return -(clamped_log(d_real) + clamped_log(1.0 - d_fake));
}

GanSampleGrads gan_sample_grads(const ModelParams& gen, const ModelParams& disc,
                                const TrainSample& sample, double alpha,
                                bool want_gen, bool want_disc) {
    const FeatureStack& f = sample.features;
    const Tensor x = feature_tensor(f);

    NetTape gen_tape;
    const Tensor y_hat = net_forward(gen, x, want_gen ? &gen_tape : nullptr);

    NetTape fake_tape;
    const Tensor fake_in = [&] {
        Tensor t;
        t.shape = {1 + x.shape[0], x.shape[1], x.shape[2]};
        t.values.reserve(y_hat.values.size() + x.values.size());
        t.values.insert(t.values.end(), y_hat.values.begin(), y_hat.values.end());
        t.values.insert(t.values.end(), x.values.begin(), x.values.end());
        return t;
    }();
    const bool need_fake_tape = want_disc || (want_gen && alpha != 0.0);
    const Tensor d_fake_t = net_forward(disc, fake_in, need_fake_tape ? &fake_tape : nullptr);

    NetTape real_tape;
    const Tensor real_in = conditioned_tensor(sample.target, f);
    const Tensor d_real_t = net_forward(disc, real_in, want_disc ? &real_tape : nullptr);

    GanSampleGrads out;
    out.d_fake = d_fake_t.values[0];
    out.d_real = d_real_t.values[0];
    out.loss_g_adv = clamped_log(1.0 - out.d_fake);
    out.loss_d = -(clamped_log(out.d_real) + clamped_log(1.0 - out.d_fake));

    const std::size_t npix = sample.target.size();
    double mse_acc = 0.0;
    for (std::size_t i = 0; i < npix; ++i) {
        const double d = y_hat.values[i] - sample.target.values()[i];
        mse_acc += d * d;
    }
    out.loss_mse = mse_acc / static_cast<double>(npix);

    if (want_disc) {
        // L_D = -(log d_real + log(1 - d_fake))
        Tensor gr{{1}, {-clamped_log_grad(out.d_real)}};
        Tensor gf{{1}, {clamped_log_grad(1.0 - out.d_fake)}};
        NetGradients br = net_backward(disc, real_tape, gr);
        NetGradients bf = net_backward(disc, fake_tape, gf);
        out.disc_grads.resize(disc.values.size());
        for (std::size_t i = 0; i < out.disc_grads.size(); ++i) {
            out.disc_grads[i] = br.param_grads[i] + bf.param_grads[i];
        }
    }

    if (want_gen) {
        Tensor dy = Tensor::zeros(y_hat.shape);
        const double inv = 2.0 / static_cast<double>(npix);
        for (std::size_t i = 0; i < npix; ++i) {
            dy.values[i] = inv * (y_hat.values[i] - sample.target.values()[i]);
        }
        if (alpha != 0.0) {
            // alpha * log(1 - D(G(F))) routed through the discriminator input.
            Tensor gf{{1}, {-alpha * clamped_log_grad(1.0 - out.d_fake)}};
            NetGradients bi = net_backward(disc, fake_tape, gf);
            for (std::size_t i = 0; i < npix; ++i) {
                dy.values[i] += bi.input_grad.values[i];  // channel 0 is y_hat
            }
        }
        out.gen_grads = net_backward(gen, gen_tape, dy).param_grads;
    }
    return out;
}

void adam_step(std::vector<double>& params, std::span<const double> grads,
               AdamState& state, double lr) {
    if (grads.size() != params.size()) {
        throw ShapeMismatch("gradient size does not match the parameters");
    }
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    if (state.m.size() != params.size()) {
        throw ShapeMismatch("optimizer state does not match the parameters");
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
}

// ---- training loop -----------------------------------------------------------------

namespace {

std::vector<GanSampleGrads> batch_grads(const ModelParams& gen, const ModelParams& disc,
                                        const std::vector<TrainSample>& dataset,
                                        std::span<const std::size_t> batch, double alpha,
                                        bool want_gen, bool want_disc, int threads) {
    std::vector<GanSampleGrads> out(batch.size());
    const int workers = std::max(1, threads);
    if (workers == 1 || batch.size() <= 1) {
        for (std::size_t i = 0; i < batch.size(); ++i) {
            out[i] = gan_sample_grads(gen, disc, dataset[batch[i]], alpha, want_gen,
                                      want_disc);
        }
        return out;
    }
    // Per-sample results are independent; the caller reduces them in batch
    // order, so the partitioning cannot affect the result.
    std::vector<std::future<void>> fs;
    const std::size_t chunk = (batch.size() + workers - 1) / workers;
    for (int t = 0; t < workers; ++t) {
        const std::size_t lo = t * chunk;
        if (lo >= batch.size()) break;
        const std::size_t hi = std::min(batch.size(), lo + chunk);
        fs.push_back(std::async(std::launch::async, [&, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i) {
                out[i] = gan_sample_grads(gen, disc, dataset[batch[i]], alpha, want_gen,
                                          want_disc);
            }
        }));
    }
    for (auto& fut : fs) fut.get();
    return out;
}

void check_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw NumericOverflow(std::string("non-finite ") + what);
    }
}

}  // namespace

TrainResult train_from(ModelParams gen, ModelParams disc,
                       const std::vector<TrainSample>& dataset, const TrainConfig& cfg) {
    if (dataset.empty()) throw EmptyDataset("training dataset is empty");
    if (cfg.batch < 1) throw EmptyDataset("batch size must be at least 1");
    const int w = dataset[0].features.width();
    const int h = dataset[0].features.height();
    for (const auto& s : dataset) {
        if (s.features.width() != w || s.features.height() != h ||
            s.target.width() != w || s.target.height() != h) {
            throw DimensionMismatch("dataset samples differ in dims");
        }
    }

    TrainResult result{std::move(gen), std::move(disc), {}};
    AdamState g_state, d_state;
    std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, 0xDA7A));
    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_vec(order, shuffle_rng);
        EpochStats stats{};
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
            std::span<const std::size_t> batch{order.data() + start, stop - start};
            const double inv = 1.0 / static_cast<double>(batch.size());

            if (cfg.train_discriminator) {
                auto grads = batch_grads(result.generator, result.discriminator, dataset,
                                         batch, cfg.alpha, false, true, cfg.threads);
                std::vector<double> avg(result.discriminator.values.size(), 0.0);
                for (const auto& g : grads) {
                    for (std::size_t i = 0; i < avg.size(); ++i) {
                        avg[i] += g.disc_grads[i] * inv;
                    }
                    stats.loss_d += g.loss_d;
                }
                check_finite(avg, "discriminator gradient");
                adam_step(result.discriminator.values, avg, d_state, cfg.lr);
            }

            auto grads = batch_grads(result.generator, result.discriminator, dataset,
                                     batch, cfg.alpha, true, false, cfg.threads);
            std::vector<double> avg(result.generator.values.size(), 0.0);
            for (const auto& g : grads) {
                for (std::size_t i = 0; i < avg.size(); ++i) {
                    avg[i] += g.gen_grads[i] * inv;
                }
                stats.loss_g += g.loss_g_adv;
                stats.loss_mse += g.loss_mse;
                if (!cfg.train_discriminator) stats.loss_d += g.loss_d;
            }
            check_finite(avg, "generator gradient");
            adam_step(result.generator.values, avg, g_state, cfg.lr);
            seen += batch.size();
        }
        const double inv_n = 1.0 / static_cast<double>(seen);
        result.history.push_back(
            {stats.loss_d * inv_n, stats.loss_g * inv_n, stats.loss_mse * inv_n});
    }
    return result;
}

TrainResult train(const std::vector<TrainSample>& dataset, const TrainConfig& cfg) {
    if (dataset.empty()) throw EmptyDataset("training dataset is empty");
    const int in_ch = dataset[0].features.channels();
    ModelParams gen = init_params(generator_layout(in_ch), mix_seed(cfg.seed, 1));
    ModelParams disc = init_params(discriminator_layout(in_ch + 1), mix_seed(cfg.seed, 2));
    return train_from(std::move(gen), std::move(disc), dataset, cfg);
}

GridMap physics_baseline(const GridMap& buildings,
                         const std::vector<PixelCoord>& bs_list,
                         const std::vector<LdplParams>& params_list, double d_min) {
    if (bs_list.empty() || bs_list.size() != params_list.size()) {
        throw DimensionMismatch("need one LDPL parameter set per base station");
    }
    const int w = buildings.width();
    const int h = buildings.height();
    std::vector<GridMap> pl_maps;
    pl_maps.reserve(bs_list.size());
    double pl_ref = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < bs_list.size(); ++t) {
        pl_maps.push_back(predict_freespace_map(params_list[t], bs_list[t], w, h, d_min));
        for (double v : pl_maps.back().values()) pl_ref = std::max(pl_ref, v);
    }
    std::vector<double> field(static_cast<std::size_t>(w) * h, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double best = 0.0;
            for (std::size_t t = 0; t < bs_list.size(); ++t) {
                const double b = los_ratio(buildings, {x, y}, bs_list[t]);
                best = std::max(best, (pl_ref - pl_maps[t].at(x, y)) * b);
            }
            field[static_cast<std::size_t>(y) * w + x] = best;
        }
    }
    double max_v = 0.0;
    for (double v : field) max_v = std::max(max_v, v);
    if (max_v <= 0.0) {
        return GridMap::filled(w, h, MapKind::NormalizedPower, 1.0);
    }
    return max_normalize(GridMap(w, h, MapKind::PowerDbm, std::move(field)),
                         MapKind::NormalizedPower);
}

// ---- params I/O ----------------------------------------------------------------------

std::vector<std::uint8_t> model_params_to_bytes(const ModelParams& params) {
    if (params.values.size() != params.layout.param_count()) {
        throw LayoutMismatch("parameter vector does not match the layout");
    }
    std::vector<std::uint8_t> out;
    out.insert(out.end(), {'R', 'S', 'M', 'P'});
    wire::put_u8(out, params.layout.version);
    wire::put_u8(out, static_cast<std::uint8_t>(params.layout.layers.size()));
    for (const auto& l : params.layout.layers) {
        wire::put_u8(out, static_cast<std::uint8_t>(l.kind));
        wire::put_u16(out, static_cast<std::uint16_t>(l.in_ch));
        wire::put_u16(out, static_cast<std::uint16_t>(l.out_ch));
        wire::put_u8(out, static_cast<std::uint8_t>(l.kernel));
        wire::put_u8(out, static_cast<std::uint8_t>(l.stride));
    }
    wire::put_u64(out, params.values.size());
    for (double v : params.values) wire::put_f64(out, v);
    return out;
}

ModelParams model_params_from_bytes(std::span<const std::uint8_t> bytes) {
    wire::Reader rd(bytes);
    rd.expect_magic("RSMP");
    ModelParams params;
    params.layout.version = rd.u8();
    if (params.layout.version != 1) {
        throw UnsupportedVersion("model layout version " +
                                 std::to_string(params.layout.version));
    }
    const int n_layers = rd.u8();
    for (int i = 0; i < n_layers; ++i) {
        LayerSpec l;
        const std::uint8_t kind = rd.u8();
        if (kind > static_cast<std::uint8_t>(LayerKind::GlobalMeanAffine)) {
            throw LayoutMismatch("unknown layer kind " + std::to_string(kind));
        }
        l.kind = static_cast<LayerKind>(kind);
        l.in_ch = rd.u16();
        l.out_ch = rd.u16();
        l.kernel = rd.u8();
        l.stride = rd.u8();
        params.layout.layers.push_back(l);
    }
    const std::uint64_t count = rd.u64();
    if (count != params.layout.param_count()) {
        throw LayoutMismatch("value count disagrees with the layout");
    }
    params.values.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) params.values.push_back(rd.f64());
    if (!rd.done()) throw LengthMismatch("trailing bytes after the parameters");
    return params;
}

void save_model_params(const std::filesystem::path& path, const ModelParams& params) {
    const auto bytes = model_params_to_bytes(params);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path.string());
}

ModelParams load_model_params(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return model_params_from_bytes(bytes);
}

void write_loss_history_csv(const std::filesystem::path& path,
                            const std::vector<EpochStats>& history) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "epoch,loss_d,loss_g,loss_mse\n";
    out << std::setprecision(12);
    for (std::size_t i = 0; i < history.size(); ++i) {
        out << i << ',' << history[i].loss_d << ',' << history[i].loss_g << ','
            << history[i].loss_mse << '\n';
    }
    if (!out) throw IoError("short write to " + path.string());
}

}  // namespace radiosem
