// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the intrinsic project.

#include "intrinsic/decompose.hpp"

#include <chrono>
#include <string>
#include <utility>

#include "intrinsic/errors.hpp"
#include "intrinsic/image_io.hpp"
#include "intrinsic/l0_smoothing.hpp"
#include "intrinsic/metrics.hpp"

namespace intrinsic {

void SolverParams::validate() const {
    if (!(alpha >= 0.0 && beta >= 0.0 && gamma >= 0.0)) {
        throw ParamError("SolverParams: weights must be nonnegative");
    }
    if (!(mu > 0.0) || !(sigma > 0.0)) {
        throw ParamError("SolverParams: mu and sigma must be positive");
    }
    if (!(s0 > 0.0 && s0 <= 1.0)) {
        throw ParamError("SolverParams: s0 must lie in (0,1], got " + std::to_string(s0));
    }
    if (!(eps > 0.0)) throw ParamError("SolverParams: eps must be positive");
    if (max_iters < 1) throw ParamError("SolverParams: max_iters must be >= 1");
    if (!(division_floor > 0.0)) {
        throw ParamError("SolverParams: division_floor must be positive");
    }
}

PriorBundle build_priors(const ImageTensor& i, const ImageTensor& r_prior_file,
                         bool multichannel, double division_floor) {
    if (r_prior_file.height() != i.height() || r_prior_file.width() != i.width()) {
        throw ShapeError("build_priors: prior dimensions " + r_prior_file.shape_string() +
                         " do not match input " + i.shape_string());
    }
    if (r_prior_file.channels() != 3) {
        throw ShapeError("build_priors: reflectance prior must have 3 channels, got " +
                         r_prior_file.shape_string());
    }
    PriorBundle bundle;
    bundle.r_prior = clamp_unit(r_prior_file);
    ImageTensor s_prior = hsv_value(safe_divide(i, bundle.r_prior, division_floor));
    bundle.s_prior = multichannel ? replicate_channels(s_prior, 3) : std::move(s_prior);
    return bundle;
}

ImageTensor update_shading(const ImageTensor& i, const ImageTensor& r, const ImageTensor& h,
                           const SolverParams& p) {
    ImageTensor data = safe_divide(i, r, p.division_floor);
    if (h.channels() == 1) data = channel_mean(data);
    if (!data.same_shape(h)) {
        throw ShapeError("update_shading: H shape " + h.shape_string() +
                         " incompatible with data term " + data.shape_string());
    }
    const double denom = p.sigma + p.gamma + 1.0;
    ImageTensor out(data.height(), data.width(), data.channels());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out.data()[k] = (data.data()[k] + p.sigma * h.data()[k] + p.gamma * p.s0) / denom;
    }
    return out;
}

ImageTensor project_constraint(const ImageTensor& s, const ImageTensor& i) {
    if (s.channels() == 3) return max_elements(s, i);
    return max_elements(s, channel_max(i));
}

DecompositionResult run(const ImageTensor& i, const PriorBundle& priors,
                        const SolverParams& p) {
    p.validate();
    if (i.channels() != 3) {
        throw ShapeError("run: input image must have 3 channels, got " + i.shape_string());
    }
    if (!priors.r_prior.same_shape(i)) {
        throw ShapeError("run: reflectance prior " + priors.r_prior.shape_string() +
                         " does not match input " + i.shape_string());
    }
    const int want_s_channels = p.multichannel_shading ? 3 : 1;
    if (priors.s_prior.height() != i.height() || priors.s_prior.width() != i.width() ||
        priors.s_prior.channels() != want_s_channels) {
        throw ShapeError("run: shading prior " + priors.s_prior.shape_string() +
                         " does not match expected " + std::to_string(i.height()) + "x" +
                         std::to_string(i.width()) + "x" + std::to_string(want_s_channels));
    }

    const auto start = std::chrono::steady_clock::now();

    ImageTensor reflectance = i;
    const ImageTensor initial_ratio = safe_divide(i, reflectance, p.division_floor);
    ImageTensor shading =
        p.sum_shading_init ? channel_sum(initial_ratio) : channel_mean(initial_ratio);
    if (p.multichannel_shading) shading = replicate_channels(shading, 3);
    ImageTensor smooth_shading =
        p.multichannel_shading ? initial_ratio : channel_mean(initial_ratio);

    TvParams tv = p.tv;
    tv.alpha = p.alpha;
    tv.sigma = p.sigma;
    const L0Params l0{p.beta, p.mu};
    FftGradientSolver solver(i.height(), i.width(), p.mu);

    DecompositionResult result;
    auto check_finite = [](const ImageTensor& t, const char* name, int iteration) {
        if (!all_finite(t)) {
            throw NumericalError(std::string("run: non-finite ") + name + " at iteration " +
                                 std::to_string(iteration));
        }
    };

    for (int iter = 1; iter <= p.max_iters; ++iter) {
        const GradientPair g = threshold_gradients(reflectance, l0);
        ImageTensor r_next = clamp_unit(solver.solve(priors.r_prior, g));

        ImageTensor s_next = update_shading(i, r_next, smooth_shading, p);
        s_next = project_constraint(s_next, i);
        smooth_shading = tv_denoise(s_next, priors.s_prior, tv);

        check_finite(r_next, "reflectance", iter);
        check_finite(s_next, "shading", iter);
        check_finite(smooth_shading, "smoothed shading", iter);

        const double eps_r = relative_change(r_next, reflectance);
        const double eps_s = relative_change(s_next, shading);
        reflectance = std::move(r_next);
        shading = std::move(s_next);

        result.residual_trace.push_back({eps_r, eps_s});
        result.energy_trace.push_back(energy(i, reflectance, shading, priors.s_prior, p));

        if (eps_r <= p.eps && eps_s <= p.eps) break;
    }

    result.iterations = static_cast<int>(result.residual_trace.size());
    result.reflectance = std::move(reflectance);
    result.shading = std::move(shading);
    result.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace intrinsic
