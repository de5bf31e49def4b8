// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the intrinsic project.

#include "intrinsic/l0_smoothing.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "intrinsic/errors.hpp"

namespace intrinsic {

namespace {

// FFTW plan creation/destruction is not thread-safe; executions on
// distinct plans are.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

void validate(const L0Params& p) {
    if (!(p.mu > 0.0)) throw ParamError("l0: mu must be positive, got " + std::to_string(p.mu));
    if (!(p.beta >= 0.0)) {
        throw ParamError("l0: beta must be nonnegative, got " + std::to_string(p.beta));
    }
    if (!std::isfinite(p.beta / p.mu)) throw ParamError("l0: threshold beta/mu is not finite");
}

}  // namespace

GradientPair threshold_gradients(const ImageTensor& r, const L0Params& p,
                                 ThresholdCoupling coupling) {
    validate(p);
    GradientPair g = forward_diff(r, Boundary::periodic);
    const double threshold = p.beta / p.mu;
    const std::size_t px = r.pixel_count();

    if (coupling == ThresholdCoupling::pooled) {
        for (std::size_t i = 0; i < px; ++i) {
            double mag2 = 0.0;
            for (int c = 0; c < r.channels(); ++c) {
                const double dx = g.gx.channel(c)[i];
                const double dy = g.gy.channel(c)[i];
                mag2 += dx * dx + dy * dy;
            }
            if (mag2 <= threshold) {
                for (int c = 0; c < r.channels(); ++c) {
                    g.gx.channel(c)[i] = 0.0;
                    g.gy.channel(c)[i] = 0.0;
                }
            }
        }
    } else {
        for (int c = 0; c < r.channels(); ++c) {
            double* dx = g.gx.channel(c);
            double* dy = g.gy.channel(c);
            for (std::size_t i = 0; i < px; ++i) {
                if (dx[i] * dx[i] + dy[i] * dy[i] <= threshold) {
                    dx[i] = 0.0;
                    dy[i] = 0.0;
                }
            }
        }
    }
    return g;
}

struct FftGradientSolver::Impl {
    int height = 0;
    int width = 0;
    double mu = 0.0;
    double* real_buf = nullptr;       // height x width
    fftw_complex* freq_buf = nullptr; // height x (width/2 + 1)
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
    std::vector<double> denom;        // cached denominator spectrum

    Impl(int h, int w, double mu_) : height(h), width(w), mu(mu_) {
        const std::size_t n_real = static_cast<std::size_t>(h) * w;
        const std::size_t n_freq = static_cast<std::size_t>(h) * (w / 2 + 1);
        real_buf = fftw_alloc_real(n_real);
        freq_buf = fftw_alloc_complex(n_freq);
        {
            std::lock_guard<std::mutex> lock(plan_mutex());
            forward = fftw_plan_dft_r2c_2d(h, w, real_buf, freq_buf, FFTW_ESTIMATE);
            inverse = fftw_plan_dft_c2r_2d(h, w, freq_buf, real_buf, FFTW_ESTIMATE);
        }

        // F(1) is the all-ones spectrum of the identity; the squared
        // magnitude of the periodic forward-difference transfer
        // function along a length-n axis is 4 sin^2(pi k / n).
        denom.resize(n_freq);
        for (int fy = 0; fy < h; ++fy) {
            const double sy = std::sin(std::numbers::pi * fy / h);
            for (int fx = 0; fx < w / 2 + 1; ++fx) {
                const double sx = std::sin(std::numbers::pi * fx / w);
                denom[static_cast<std::size_t>(fy) * (w / 2 + 1) + fx] =
                    1.0 + mu * 4.0 * (sx * sx + sy * sy);
            }
        }
    }

    ~Impl() {
        std::lock_guard<std::mutex> lock(plan_mutex());
        if (forward) fftw_destroy_plan(forward);
        if (inverse) fftw_destroy_plan(inverse);
        fftw_free(real_buf);
        fftw_free(freq_buf);
    }
};

FftGradientSolver::FftGradientSolver(int height, int width, double mu) {
    if (!(mu > 0.0)) {
        throw ParamError("FftGradientSolver: mu must be positive, got " + std::to_string(mu));
    }
    impl_ = std::make_unique<Impl>(height, width, mu);
}

FftGradientSolver::~FftGradientSolver() = default;
FftGradientSolver::FftGradientSolver(FftGradientSolver&&) noexcept = default;
FftGradientSolver& FftGradientSolver::operator=(FftGradientSolver&&) noexcept = default;

int FftGradientSolver::height() const { return impl_->height; }
int FftGradientSolver::width() const { return impl_->width; }
double FftGradientSolver::mu() const { return impl_->mu; }

ImageTensor FftGradientSolver::solve(const ImageTensor& target, const GradientPair& g) {
    if (target.height() != impl_->height || target.width() != impl_->width) {
        throw ShapeError("fft_solve: target " + target.shape_string() +
                         " does not match solver size " + std::to_string(impl_->height) + "x" +
                         std::to_string(impl_->width));
    }
    if (!g.gx.same_shape(target) || !g.gy.same_shape(target)) {
        throw ShapeError("fft_solve: gradient shapes " + g.gx.shape_string() + "/" +
                         g.gy.shape_string() + " do not match target " + target.shape_string());
    }

    const int h = impl_->height, w = impl_->width;
    const double mu = impl_->mu;
    const std::size_t n_real = static_cast<std::size_t>(h) * w;
    const std::size_t n_freq = static_cast<std::size_t>(h) * (w / 2 + 1);

    ImageTensor out(h, w, target.channels());
    for (int c = 0; c < target.channels(); ++c) {
        const double* t = target.channel(c);
        const double* gx = g.gx.channel(c);
        const double* gy = g.gy.channel(c);

        // Right-hand side target + mu * D^T g assembled spatially; by
        // linearity its transform equals the numerator of the closed
        // form. D^T applied to (gx, gy) is gx[i,j-1]-gx[i,j] +
        // gy[i-1,j]-gy[i,j] with periodic wrap.
        for (int i = 0; i < h; ++i) {
            const int up = i == 0 ? h - 1 : i - 1;
            for (int j = 0; j < w; ++j) {
                const int left = j == 0 ? w - 1 : j - 1;
                const std::size_t k = static_cast<std::size_t>(i) * w + j;
                const double div_adj = gx[static_cast<std::size_t>(i) * w + left] - gx[k] +
                                       gy[static_cast<std::size_t>(up) * w + j] - gy[k];
                impl_->real_buf[k] = t[k] + mu * div_adj;
            }
        }

        fftw_execute(impl_->forward);
        for (std::size_t k = 0; k < n_freq; ++k) {
            impl_->freq_buf[k][0] /= impl_->denom[k];
            impl_->freq_buf[k][1] /= impl_->denom[k];
        }
        fftw_execute(impl_->inverse);

        double* o = out.channel(c);
        const double inv_n = 1.0 / static_cast<double>(n_real);
        for (std::size_t k = 0; k < n_real; ++k) o[k] = impl_->real_buf[k] * inv_n;
    }
    return out;
}

ImageTensor fft_solve(const ImageTensor& target, const GradientPair& g, const L0Params& p) {
    validate(p);
    FftGradientSolver solver(target.height(), target.width(), p.mu);
    return solver.solve(target, g);
}

ImageTensor l0_smooth(const ImageTensor& target, const L0Params& p, int passes,
                      ThresholdCoupling coupling) {
    validate(p);
    if (passes < 1) {
        throw ParamError("l0_smooth: passes must be >= 1, got " + std::to_string(passes));
    }
    FftGradientSolver solver(target.height(), target.width(), p.mu);
    ImageTensor r = target;
    for (int pass = 0; pass < passes; ++pass) {
        const GradientPair g = threshold_gradients(r, p, coupling);
        r = solver.solve(target, g);
    }
    return r;
}

}  // namespace intrinsic
