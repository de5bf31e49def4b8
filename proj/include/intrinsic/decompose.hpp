// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the intrinsic project.

#pragma once

#include <vector>

#include "intrinsic/tensor.hpp"
#include "intrinsic/tv_denoise.hpp"

namespace intrinsic {

/// All scalar knobs of the alternating solver. The defaults are the
/// experimentally chosen operating point: mu=1, beta=0.01, sigma=1,
/// gamma=1, alpha=2, s0=0.5, eps=1e-5.
///
/// tv.inner_iters and tv.dual_tol control the inner denoiser; its
/// alpha/sigma are taken from the fields here since they are the same
/// weights.
struct SolverParams {
    double alpha = 2.0;   // TV weight on the shading prior residual
    double beta = 0.01;   // l0 weight on reflectance gradients
    double gamma = 1.0;   // absolute-scale weight
    double mu = 1.0;      // half-quadratic splitting weight
    double sigma = 1.0;   // shading/denoiser coupling weight
    double s0 = 0.5;      // absolute scale anchor
    double eps = 1e-5;    // convergence tolerance on relative change
    int max_iters = 20;
    bool multichannel_shading = true;
    // Initialize shading from the channel sum of I/R instead of the
    // channel mean (kept selectable; the mean is the default reading).
    bool sum_shading_init = false;
    TvParams tv{};
    double division_floor = kDefaultDivisionFloor;

    void validate() const;
};

/// Precomputed learning-based priors: the lighting-free reflectance
/// R' (ingested from an image file) and the shading prior S' derived
/// from it as the HSV Value channel of I/R'.
struct PriorBundle {
    ImageTensor r_prior;
    ImageTensor s_prior;
};

struct IterationResidual {
    double eps_r = 0.0;
    double eps_s = 0.0;
};

struct DecompositionResult {
    ImageTensor reflectance;
    ImageTensor shading;
    int iterations = 0;
    std::vector<IterationResidual> residual_trace;
    std::vector<double> energy_trace;
    double wall_time_s = 0.0;
};

/// Clamp the reflectance prior to [0,1] and derive the shading prior
/// as hsv_value(i / r_prior); replicated to 3 channels if multichannel.
PriorBundle build_priors(const ImageTensor& i, const ImageTensor& r_prior_file,
                         bool multichannel, double division_floor = kDefaultDivisionFloor);

/// Closed-form shading update S = (I/R + sigma*H + gamma*S0) /
/// (sigma + gamma + 1). When h is 1-channel the data term I/R is
/// channel-averaged first.
ImageTensor update_shading(const ImageTensor& i, const ImageTensor& r, const ImageTensor& h,
                           const SolverParams& p);

/// Enforce I <= S: element-wise max against i for 3-channel shading,
/// max against the channel max of i for gray shading.
ImageTensor project_constraint(const ImageTensor& s, const ImageTensor& i);

/// Alternating decomposition: per iteration a gradient hard-threshold
/// and FFT solve update R against the fixed prior R', the closed-form
/// update and constraint projection update S, and the TV denoiser
/// refreshes H. Stops once the relative change of both R and S falls
/// to p.eps, or at p.max_iters.
DecompositionResult run(const ImageTensor& i, const PriorBundle& priors,
                        const SolverParams& p);

}  // namespace intrinsic
