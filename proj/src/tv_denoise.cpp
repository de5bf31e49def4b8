// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the intrinsic project.

#include "intrinsic/tv_denoise.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "intrinsic/errors.hpp"

namespace intrinsic {

namespace {

void validate(const TvParams& p) {
    if (!(p.sigma > 0.0)) {
        throw ParamError("tv_denoise: sigma must be positive, got " + std::to_string(p.sigma));
    }
    if (!(p.alpha >= 0.0)) {
        throw ParamError("tv_denoise: alpha must be nonnegative, got " +
                         std::to_string(p.alpha));
    }
    if (p.inner_iters < 1) {
        throw ParamError("tv_denoise: inner_iters must be >= 1, got " +
                         std::to_string(p.inner_iters));
    }
}

// Negative adjoint of the Neumann forward difference:
//   div(p)[0] = p[0], div(p)[j] = p[j]-p[j-1], div(p)[last] = -p[last-1].
// Telescopes to zero along each axis, which is what preserves the mean
// of the denoised field.
void divergence(const std::vector<double>& px, const std::vector<double>& py, int h, int w,
                std::vector<double>& out) {
    for (int i = 0; i < h; ++i) {
        const std::size_t row = static_cast<std::size_t>(i) * w;
        for (int j = 0; j < w; ++j) {
            double d = 0.0;
            if (j < w - 1) d += px[row + j];
            if (j > 0) d -= px[row + j - 1];
            if (i < h - 1) d += py[row + j];
            if (i > 0) d -= py[row - w + j];
            out[row + j] = d;
        }
    }
}

}  // namespace

double tv_isotropic(const ImageTensor& t) {
    const GradientPair g = forward_diff(t, Boundary::neumann);
    const std::size_t px = t.pixel_count();
    double total = 0.0;
    for (std::size_t i = 0; i < px; ++i) {
        double mag2 = 0.0;
        for (int c = 0; c < t.channels(); ++c) {
            const double dx = g.gx.channel(c)[i];
            const double dy = g.gy.channel(c)[i];
            mag2 += dx * dx + dy * dy;
        }
        total += std::sqrt(mag2);
    }
    return total;
}

double tv_objective(const ImageTensor& h, const ImageTensor& s, const ImageTensor& s_prior,
                    const TvParams& p) {
    double quad = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double d = h.data()[i] - s.data()[i];
        quad += d * d;
    }
    return p.alpha * tv_isotropic(subtract(h, s_prior)) + p.sigma * quad;
}

ImageTensor tv_denoise(const ImageTensor& s, const ImageTensor& s_prior, const TvParams& p) {
    validate(p);
    if (!s.same_shape(s_prior)) {
        throw ShapeError("tv_denoise: shape mismatch " + s.shape_string() + " vs " +
                         s_prior.shape_string());
    }
    if (p.alpha == 0.0) return s;

    const int h = s.height(), w = s.width(), nch = s.channels();
    const std::size_t px = s.pixel_count();
    const double lambda = p.alpha / (2.0 * p.sigma);
    const double tau = 0.225;

    const ImageTensor residual = subtract(s, s_prior);

    std::vector<std::vector<double>> dual_x(nch, std::vector<double>(px, 0.0));
    std::vector<std::vector<double>> dual_y(nch, std::vector<double>(px, 0.0));
    std::vector<std::vector<double>> qx(nch, std::vector<double>(px));
    std::vector<std::vector<double>> qy(nch, std::vector<double>(px));
    std::vector<double> div(px);
    std::vector<double> u(px);

    for (int iter = 0; iter < p.inner_iters; ++iter) {
        // q = grad(div p - residual/lambda) per channel.
        for (int c = 0; c < nch; ++c) {
            divergence(dual_x[c], dual_y[c], h, w, div);
            const double* b = residual.channel(c);
            for (std::size_t k = 0; k < px; ++k) u[k] = div[k] - b[k] / lambda;
            for (int i = 0; i < h; ++i) {
                const std::size_t row = static_cast<std::size_t>(i) * w;
                for (int j = 0; j < w; ++j) {
                    qx[c][row + j] = j < w - 1 ? u[row + j + 1] - u[row + j] : 0.0;
                    qy[c][row + j] = i < h - 1 ? u[row + w + j] - u[row + j] : 0.0;
                }
            }
        }

        // Projected ascent; the denominator pools all channels of a
        // pixel so the dual constraint is the channel-coupled ball.
        double max_update = 0.0;
        for (std::size_t k = 0; k < px; ++k) {
            double mag2 = 0.0;
            for (int c = 0; c < nch; ++c) {
                mag2 += qx[c][k] * qx[c][k] + qy[c][k] * qy[c][k];
            }
            const double denom = 1.0 + tau * std::sqrt(mag2);
            for (int c = 0; c < nch; ++c) {
                const double nx = (dual_x[c][k] + tau * qx[c][k]) / denom;
                const double ny = (dual_y[c][k] + tau * qy[c][k]) / denom;
                max_update = std::max(max_update, std::abs(nx - dual_x[c][k]));
                max_update = std::max(max_update, std::abs(ny - dual_y[c][k]));
                dual_x[c][k] = nx;
                dual_y[c][k] = ny;
            }
        }
        if (max_update <= p.dual_tol) break;
    }

    // H = (residual - lambda * div p) + s_prior.
    ImageTensor out(h, w, nch);
    for (int c = 0; c < nch; ++c) {
        divergence(dual_x[c], dual_y[c], h, w, div);
        const double* b = residual.channel(c);
        const double* sp = s_prior.channel(c);
        double* o = out.channel(c);
        for (std::size_t k = 0; k < px; ++k) o[k] = b[k] - lambda * div[k] + sp[k];
    }
    return out;
}

}  // namespace intrinsic
