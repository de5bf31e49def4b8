// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the intrinsic project.

#pragma once

#include <memory>

#include "intrinsic/tensor.hpp"

namespace intrinsic {

/// Weights of the half-quadratic split: beta penalizes the count of
/// nonzero gradient sites, mu couples the auxiliary gradient field to
/// the true gradients. The hard threshold is beta/mu.
struct L0Params {
    double beta = 0.01;
    double mu = 1.0;
};

/// How the threshold test pools gradients across color channels.
/// pooled sums squared magnitudes over channels so all channels of a
/// pixel are zeroed together; per_channel applies the test separately.
enum class ThresholdCoupling { pooled, per_channel };

/// Gradient hard-thresholding: the auxiliary field G equals the
/// periodic forward differences of r where the (pooled) squared
/// magnitude exceeds beta/mu and is exactly (0,0) elsewhere.
GradientPair threshold_gradients(const ImageTensor& r, const L0Params& p,
                                 ThresholdCoupling coupling = ThresholdCoupling::pooled);

/// Closed-form minimizer of ||R - target||^2 + mu ||G - grad R||^2
/// under periodic boundaries, computed per channel by dividing in the
/// Fourier domain. The denominator spectrum depends only on the image
/// size and mu, so a solver instance caches it together with the FFT
/// plans and can be reused across passes and outer iterations.
class FftGradientSolver {
public:
    FftGradientSolver(int height, int width, double mu);
    ~FftGradientSolver();
    FftGradientSolver(FftGradientSolver&&) noexcept;
    FftGradientSolver& operator=(FftGradientSolver&&) noexcept;
    FftGradientSolver(const FftGradientSolver&) = delete;
    FftGradientSolver& operator=(const FftGradientSolver&) = delete;

    ImageTensor solve(const ImageTensor& target, const GradientPair& g);

    int height() const;
    int width() const;
    double mu() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper around FftGradientSolver.
ImageTensor fft_solve(const ImageTensor& target, const GradientPair& g, const L0Params& p);

/// Alternates threshold_gradients and fft_solve `passes` times starting
/// from R = target and returns the final R.
ImageTensor l0_smooth(const ImageTensor& target, const L0Params& p, int passes,
                      ThresholdCoupling coupling = ThresholdCoupling::pooled);

}  // namespace intrinsic
