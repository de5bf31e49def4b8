// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the intrinsic project.

#pragma once

#include <cstddef>
#include <vector>

namespace intrinsic {

/// Floor applied to denominators in element-wise divisions so that
/// near-zero pixels amplify boundedly instead of producing Inf/NaN.
inline constexpr double kDefaultDivisionFloor = 1e-4;

/// Boundary handling for finite differences. Periodic wraps indices
/// (required by the FFT-diagonalized solver); Neumann replicates the
/// edge so the last difference along each axis is zero (used by the
/// TV denoiser).
enum class Boundary { periodic, neumann };

/// Planar (channel-major) image tensor of doubles. Values are nominally
/// in [0,1] but may leave that range during optimization. Each channel
/// occupies a contiguous height*width block, which is what the FFT and
/// TV inner loops iterate over.
///
/// Treated as an immutable value by every public operation: all
/// operations allocate and return a new tensor.
class ImageTensor {
public:
    ImageTensor() = default;
    ImageTensor(int height, int width, int channels, double fill = 0.0);
    ImageTensor(int height, int width, int channels, std::vector<double> values);

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(height_) * width_; }
    std::size_t size() const { return data_.size(); }

    double& at(int c, int row, int col) {
        return data_[(static_cast<std::size_t>(c) * height_ + row) * width_ + col];
    }
    double at(int c, int row, int col) const {
        return data_[(static_cast<std::size_t>(c) * height_ + row) * width_ + col];
    }

    double* channel(int c) { return data_.data() + static_cast<std::size_t>(c) * pixel_count(); }
    const double* channel(int c) const {
        return data_.data() + static_cast<std::size_t>(c) * pixel_count();
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const ImageTensor& other) const {
        return height_ == other.height_ && width_ == other.width_ &&
               channels_ == other.channels_;
    }

    /// "HxWxC" string used in error messages.
    std::string shape_string() const;

private:
    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::vector<double> data_;
};

/// Per-pixel horizontal/vertical finite-difference fields.
struct GradientPair {
    ImageTensor gx;
    ImageTensor gy;
};

/// Element-wise product a*b. b may have one channel while a has three,
/// in which case b is broadcast across a's channels.
ImageTensor hadamard(const ImageTensor& a, const ImageTensor& b);

/// Element-wise a / max(b, floor). Same broadcast rule as hadamard.
ImageTensor safe_divide(const ImageTensor& a, const ImageTensor& b,
                        double floor = kDefaultDivisionFloor);

/// Forward differences gx[i,j] = src[i,j+1] - src[i,j] (gy vertically).
GradientPair forward_diff(const ImageTensor& src, Boundary boundary);

/// Mean across channels; a copy for 1-channel input.
ImageTensor channel_mean(const ImageTensor& src);

/// Sum across channels; a copy for 1-channel input.
ImageTensor channel_sum(const ImageTensor& src);

/// Pointwise maximum across channels; a copy for 1-channel input.
ImageTensor channel_max(const ImageTensor& src);

/// Clamp every element into [0,1].
ImageTensor clamp_unit(const ImageTensor& src);

// Element-wise helpers shared by the solver modules. subtract follows
// hadamard's broadcast rule; the rest require identical shapes.
ImageTensor add(const ImageTensor& a, const ImageTensor& b);
ImageTensor subtract(const ImageTensor& a, const ImageTensor& b);
ImageTensor max_elements(const ImageTensor& a, const ImageTensor& b);
ImageTensor scale(const ImageTensor& t, double factor);
ImageTensor add_scalar(const ImageTensor& t, double value);
ImageTensor pow_elements(const ImageTensor& t, double exponent);
ImageTensor replicate_channels(const ImageTensor& src, int channels);

double frobenius_norm(const ImageTensor& t);
double min_value(const ImageTensor& t);
double max_value(const ImageTensor& t);
double mean_value(const ImageTensor& t);
bool all_finite(const ImageTensor& t);

/// ||current - previous||_F / ||previous||_F with a tiny denominator
/// floor so the result stays finite for all-zero fields.
double relative_change(const ImageTensor& current, const ImageTensor& previous);

}  // namespace intrinsic
