#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mitoeval/errors.hpp"

namespace mitoeval {

// Dense C×H×W tensor, row-major over (c, y, x).
struct FeatureMap {
    std::size_t c = 0, h = 0, w = 0;
    std::vector<double> data;

    FeatureMap() = default;
    FeatureMap(std::size_t c_, std::size_t h_, std::size_t w_)
        : c(c_), h(h_), w(w_), data(c_ * h_ * w_, 0.0) {}

    double& at(std::size_t ci, std::size_t yi, std::size_t xi) {
        return data[(ci * h + yi) * w + xi];
    }
    double at(std::size_t ci, std::size_t yi, std::size_t xi) const {
        return data[(ci * h + yi) * w + xi];
    }

    bool same_shape(const FeatureMap& o) const { return c == o.c && h == o.h && w == o.w; }
};

struct FusionWeights {
    std::size_t c = 0;                           // output channels; input to conv is 2c
    double epsilon = 1e-5;
    std::vector<double> ln_gamma;                // 2c
    std::vector<double> ln_beta;                 // 2c
    std::vector<std::vector<double>> conv_weight; // c rows of 2c
    std::vector<double> conv_bias;               // c

    void validate() const {
        if (c == 0) throw ShapeMismatchError("fusion weights need c >= 1");
        if (epsilon <= 0.0) throw ConfigError("epsilon must be positive");
        if (ln_gamma.size() != 2 * c || ln_beta.size() != 2 * c)
            throw ShapeMismatchError("layer-norm affine vectors must have length 2c");
        if (conv_weight.size() != c) throw ShapeMismatchError("conv_weight must have c rows");
        for (const auto& row : conv_weight)
            if (row.size() != 2 * c) throw ShapeMismatchError("conv_weight rows must have length 2c");
        if (conv_bias.size() != c) throw ShapeMismatchError("conv_bias must have length c");
    }
};

inline FeatureMap concat_channels(const FeatureMap& h, const FeatureMap& p) {
    if (!h.same_shape(p)) throw ShapeMismatchError("concat operands must share C, H, W");
    FeatureMap out(2 * h.c, h.h, h.w);
    std::copy(h.data.begin(), h.data.end(), out.data.begin());
    std::copy(p.data.begin(), p.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(h.data.size()));
    return out;
}

// Per spatial location, normalize across all channels, then apply the
// per-channel affine.
inline FeatureMap layer_norm(const FeatureMap& x, const std::vector<double>& gamma,
                             const std::vector<double>& beta, double epsilon) {
    if (gamma.size() != x.c || beta.size() != x.c)
        throw ShapeMismatchError("layer-norm affine length must equal channel count");
    FeatureMap out(x.c, x.h, x.w);
    const double m = static_cast<double>(x.c);
    for (std::size_t yi = 0; yi < x.h; ++yi) {
        for (std::size_t xi = 0; xi < x.w; ++xi) {
            double mean = 0.0;
            for (std::size_t ci = 0; ci < x.c; ++ci) mean += x.at(ci, yi, xi);
            mean /= m;
            double var = 0.0;
            for (std::size_t ci = 0; ci < x.c; ++ci) {
                const double d = x.at(ci, yi, xi) - mean;
                var += d * d;
            }
            var /= m;
            const double inv = 1.0 / std::sqrt(var + epsilon);
            for (std::size_t ci = 0; ci < x.c; ++ci)
                out.at(ci, yi, xi) = gamma[ci] * (x.at(ci, yi, xi) - mean) * inv + beta[ci];
        }
    }
    return out;
}

inline FeatureMap conv1x1(const FeatureMap& x, const std::vector<std::vector<double>>& weight,
                          const std::vector<double>& bias) {
    if (weight.size() != bias.size()) throw ShapeMismatchError("conv weight/bias row mismatch");
    for (const auto& row : weight)
        if (row.size() != x.c) throw ShapeMismatchError("conv weight columns must equal input channels");
    FeatureMap out(weight.size(), x.h, x.w);
    for (std::size_t co = 0; co < weight.size(); ++co) {
        for (std::size_t yi = 0; yi < x.h; ++yi) {
            for (std::size_t xi = 0; xi < x.w; ++xi) {
                double acc = bias[co];
                for (std::size_t ci = 0; ci < x.c; ++ci) acc += weight[co][ci] * x.at(ci, yi, xi);
                out.at(co, yi, xi) = acc;
            }
        }
    }
    return out;
}

// F = ReLU(Conv(LayerNorm(Cat(H, P))))
inline FeatureMap fuse_forward(const FeatureMap& h, const FeatureMap& p, const FusionWeights& w) {
    w.validate();
    if (h.c != w.c) throw ShapeMismatchError("input channel count must equal weights' c");
    FeatureMap out = conv1x1(layer_norm(concat_channels(h, p), w.ln_gamma, w.ln_beta, w.epsilon),
                             w.conv_weight, w.conv_bias);
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    return out;
}

struct FusionGradients {
    FeatureMap d_h;
    FeatureMap d_p;
    std::vector<double> d_gamma;
    std::vector<double> d_beta;
    std::vector<std::vector<double>> d_conv_weight;
    std::vector<double> d_conv_bias;
};

// Exact reverse-mode gradients of fuse_forward under `upstream`. The ReLU
// subgradient at exactly 0 is taken as 0.
inline FusionGradients fuse_backward(const FeatureMap& h, const FeatureMap& p,
                                     const FusionWeights& w, const FeatureMap& upstream) {
    w.validate();
    if (h.c != w.c) throw ShapeMismatchError("input channel count must equal weights' c");
    if (!h.same_shape(p)) throw ShapeMismatchError("fusion operands must share C, H, W");
    if (upstream.c != w.c || upstream.h != h.h || upstream.w != h.w)
        throw ShapeMismatchError("upstream gradient shape must match the output");

    const std::size_t C = w.c;
    const std::size_t M = 2 * C; // normalized channel count
    const FeatureMap x = concat_channels(h, p);
    const FeatureMap y = layer_norm(x, w.ln_gamma, w.ln_beta, w.epsilon);
    const FeatureMap z = conv1x1(y, w.conv_weight, w.conv_bias);

    FusionGradients g;
    g.d_h = FeatureMap(C, h.h, h.w);
    g.d_p = FeatureMap(C, h.h, h.w);
    g.d_gamma.assign(M, 0.0);
    g.d_beta.assign(M, 0.0);
    g.d_conv_weight.assign(C, std::vector<double>(M, 0.0));
    g.d_conv_bias.assign(C, 0.0);

    std::vector<double> dz(C), dy(M), dxhat(M), xhat(M);
    for (std::size_t yi = 0; yi < h.h; ++yi) {
        for (std::size_t xi = 0; xi < h.w; ++xi) {
            for (std::size_t co = 0; co < C; ++co)
                dz[co] = z.at(co, yi, xi) > 0.0 ? upstream.at(co, yi, xi) : 0.0;

            // conv backward: d_bias, d_weight, dy
            for (std::size_t j = 0; j < M; ++j) dy[j] = 0.0;
            for (std::size_t co = 0; co < C; ++co) {
                g.d_conv_bias[co] += dz[co];
                for (std::size_t j = 0; j < M; ++j) {
                    g.d_conv_weight[co][j] += dz[co] * y.at(j, yi, xi);
                    dy[j] += w.conv_weight[co][j] * dz[co];
                }
            }

            // layer-norm backward at this location
            double mean = 0.0;
            for (std::size_t j = 0; j < M; ++j) mean += x.at(j, yi, xi);
            mean /= static_cast<double>(M);
            double var = 0.0;
            for (std::size_t j = 0; j < M; ++j) {
                const double d = x.at(j, yi, xi) - mean;
                var += d * d;
            }
            var /= static_cast<double>(M);
            const double inv = 1.0 / std::sqrt(var + w.epsilon);

            for (std::size_t j = 0; j < M; ++j) {
                xhat[j] = (x.at(j, yi, xi) - mean) * inv;
                g.d_gamma[j] += dy[j] * xhat[j];
                g.d_beta[j] += dy[j];
                dxhat[j] = dy[j] * w.ln_gamma[j];
            }

            double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
            for (std::size_t j = 0; j < M; ++j) {
                sum_dxhat += dxhat[j];
                sum_dxhat_xhat += dxhat[j] * xhat[j];
            }
            for (std::size_t j = 0; j < M; ++j) {
                const double dx = inv * (dxhat[j] - sum_dxhat / static_cast<double>(M) -
                                         xhat[j] * sum_dxhat_xhat / static_cast<double>(M));
                if (j < C)
                    g.d_h.at(j, yi, xi) = dx;
                else
                    g.d_p.at(j - C, yi, xi) = dx;
            }
        }
    }
    return g;
}

struct GradientCheckReport {
    double max_rel_error = 0.0;
    std::size_t n_components = 0;
};

namespace detail {

inline double fd_rel_error(double analytic, double numeric) {
    return std::fabs(analytic - numeric) /
           std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
}

template <typename Loss>
double central_difference(double& slot, double step, Loss&& loss) {
    const double orig = slot;
    slot = orig + step;
    const double up = loss();
    slot = orig - step;
    const double down = loss();
    slot = orig;
    return (up - down) / (2.0 * step);
}

} // namespace detail

// Compares fuse_backward against central finite differences of the scalar
// loss L = sum(fuse_forward .* upstream). Every parameter and input component
// is perturbed.
inline GradientCheckReport gradient_check(FeatureMap h, FeatureMap p, FusionWeights w,
                                          const FeatureMap& upstream, double step = 1e-6) {
    const FusionGradients g = fuse_backward(h, p, w, upstream);
    const auto loss = [&]() {
        const FeatureMap f = fuse_forward(h, p, w);
        double acc = 0.0;
        for (std::size_t i = 0; i < f.data.size(); ++i) acc += f.data[i] * upstream.data[i];
        return acc;
    };

    GradientCheckReport report;
    const auto check = [&](double analytic, double& slot) {
        const double numeric = detail::central_difference(slot, step, loss);
        report.max_rel_error = std::max(report.max_rel_error, detail::fd_rel_error(analytic, numeric));
        ++report.n_components;
    };

    for (std::size_t i = 0; i < h.data.size(); ++i) check(g.d_h.data[i], h.data[i]);
    for (std::size_t i = 0; i < p.data.size(); ++i) check(g.d_p.data[i], p.data[i]);
    for (std::size_t j = 0; j < w.ln_gamma.size(); ++j) check(g.d_gamma[j], w.ln_gamma[j]);
    for (std::size_t j = 0; j < w.ln_beta.size(); ++j) check(g.d_beta[j], w.ln_beta[j]);
    for (std::size_t co = 0; co < w.conv_weight.size(); ++co)
        for (std::size_t j = 0; j < w.conv_weight[co].size(); ++j)
            check(g.d_conv_weight[co][j], w.conv_weight[co][j]);
    for (std::size_t co = 0; co < w.conv_bias.size(); ++co)
        check(g.d_conv_bias[co], w.conv_bias[co]);
    return report;
}

} // namespace mitoeval
