// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the intrinsic project.

#pragma once

#include "intrinsic/tensor.hpp"

namespace intrinsic {

/// Weights and stopping rule of the TV-L2 shading denoiser:
/// minimize alpha * ||TV(H - s_prior)||_1 + sigma * ||H - s||_2^2.
struct TvParams {
    double alpha = 2.0;
    double sigma = 1.0;
    int inner_iters = 40;
    double dual_tol = 1e-4;
};

/// Channel-coupled isotropic discrete total variation with Neumann
/// boundaries: sum over pixels of sqrt(sum over channels of dx^2+dy^2).
/// This is the discretization used by both tv_denoise and the energy
/// evaluator.
double tv_isotropic(const ImageTensor& t);

/// TV-L2 denoiser behind the shading update. The change of variables
/// D = H - s_prior turns the problem into a plain ROF denoise of
/// s - s_prior, solved by a dual projection iteration with fixed step
/// 0.225 that runs inner_iters sweeps or stops early once the maximum
/// dual update falls to dual_tol.
ImageTensor tv_denoise(const ImageTensor& s, const ImageTensor& s_prior, const TvParams& p);

/// Objective value alpha*||TV(h - s_prior)||_1 + sigma*||h - s||_2^2.
double tv_objective(const ImageTensor& h, const ImageTensor& s, const ImageTensor& s_prior,
                    const TvParams& p);

}  // namespace intrinsic
