// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the intrinsic project.

#include "intrinsic/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "intrinsic/errors.hpp"

namespace intrinsic {

namespace {

void check_dims(int height, int width, int channels) {
    if (height < 1 || width < 1) {
        throw ShapeError("tensor dimensions must be at least 1x1, got " +
                         std::to_string(height) + "x" + std::to_string(width));
    }
    if (channels != 1 && channels != 3) {
        throw ShapeError("channel count must be 1 or 3, got " + std::to_string(channels));
    }
}

// Shapes must match exactly, or b may be 1-channel against a's 3.
void check_broadcast(const ImageTensor& a, const ImageTensor& b, const char* op) {
    const bool same = a.same_shape(b);
    const bool bcast = a.height() == b.height() && a.width() == b.width() &&
                       b.channels() == 1 && a.channels() == 3;
    if (!same && !bcast) {
        throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_string() +
                         " vs " + b.shape_string());
    }
}

void check_same_shape(const ImageTensor& a, const ImageTensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
    }
}

template <typename Fn>
ImageTensor broadcast_binary(const ImageTensor& a, const ImageTensor& b, Fn&& fn) {
    ImageTensor out(a.height(), a.width(), a.channels());
    const std::size_t px = a.pixel_count();
    for (int c = 0; c < a.channels(); ++c) {
        const double* pa = a.channel(c);
        const double* pb = b.channel(b.channels() == 1 ? 0 : c);
        double* po = out.channel(c);
        for (std::size_t i = 0; i < px; ++i) po[i] = fn(pa[i], pb[i]);
    }
    return out;
}

template <typename Fn>
ImageTensor map_elements(const ImageTensor& t, Fn&& fn) {
    ImageTensor out(t.height(), t.width(), t.channels());
    const std::size_t n = t.size();
    for (std::size_t i = 0; i < n; ++i) out.data()[i] = fn(t.data()[i]);
    return out;
}

}  // namespace

ImageTensor::ImageTensor(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
    check_dims(height, width, channels);
    data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

ImageTensor::ImageTensor(int height, int width, int channels, std::vector<double> values)
    : height_(height), width_(width), channels_(channels), data_(std::move(values)) {
    check_dims(height, width, channels);
    const std::size_t expected = static_cast<std::size_t>(height) * width * channels;
    if (data_.size() != expected) {
        throw ShapeError("data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string());
    }
}

std::string ImageTensor::shape_string() const {
    return std::to_string(height_) + "x" + std::to_string(width_) + "x" +
           std::to_string(channels_);
}

ImageTensor hadamard(const ImageTensor& a, const ImageTensor& b) {
    check_broadcast(a, b, "hadamard");
    return broadcast_binary(a, b, [](double x, double y) { return x * y; });
}

ImageTensor safe_divide(const ImageTensor& a, const ImageTensor& b, double floor) {
    if (!(floor > 0.0)) {
        throw ParamError("safe_divide: floor must be positive, got " + std::to_string(floor));
    }
    check_broadcast(a, b, "safe_divide");
    return broadcast_binary(a, b,
                            [floor](double x, double y) { return x / std::max(y, floor); });
}

GradientPair forward_diff(const ImageTensor& src, Boundary boundary) {
    const int h = src.height(), w = src.width();
    ImageTensor gx(h, w, src.channels());
    ImageTensor gy(h, w, src.channels());
    for (int c = 0; c < src.channels(); ++c) {
        const double* s = src.channel(c);
        double* px = gx.channel(c);
        double* py = gy.channel(c);
        for (int i = 0; i < h; ++i) {
            const double* row = s + static_cast<std::size_t>(i) * w;
            double* rx = px + static_cast<std::size_t>(i) * w;
            for (int j = 0; j + 1 < w; ++j) rx[j] = row[j + 1] - row[j];
            rx[w - 1] = boundary == Boundary::periodic ? row[0] - row[w - 1] : 0.0;
        }
        for (int i = 0; i + 1 < h; ++i) {
            const double* row = s + static_cast<std::size_t>(i) * w;
            const double* next = row + w;
            double* ry = py + static_cast<std::size_t>(i) * w;
            for (int j = 0; j < w; ++j) ry[j] = next[j] - row[j];
        }
        const double* last = s + static_cast<std::size_t>(h - 1) * w;
        double* ry = py + static_cast<std::size_t>(h - 1) * w;
        if (boundary == Boundary::periodic) {
            for (int j = 0; j < w; ++j) ry[j] = s[j] - last[j];
        } else {
            for (int j = 0; j < w; ++j) ry[j] = 0.0;
        }
    }
    return {std::move(gx), std::move(gy)};
}

ImageTensor channel_mean(const ImageTensor& src) {
    if (src.channels() == 1) return src;
    ImageTensor out(src.height(), src.width(), 1);
    const std::size_t px = src.pixel_count();
    const double* c0 = src.channel(0);
    const double* c1 = src.channel(1);
    const double* c2 = src.channel(2);
    double* po = out.channel(0);
    for (std::size_t i = 0; i < px; ++i) po[i] = (c0[i] + c1[i] + c2[i]) / 3.0;
    return out;
}

ImageTensor channel_sum(const ImageTensor& src) {
    if (src.channels() == 1) return src;
    ImageTensor out(src.height(), src.width(), 1);
    const std::size_t px = src.pixel_count();
    const double* c0 = src.channel(0);
    const double* c1 = src.channel(1);
    const double* c2 = src.channel(2);
    double* po = out.channel(0);
    for (std::size_t i = 0; i < px; ++i) po[i] = c0[i] + c1[i] + c2[i];
    return out;
}

ImageTensor channel_max(const ImageTensor& src) {
    if (src.channels() == 1) return src;
    ImageTensor out(src.height(), src.width(), 1);
    const std::size_t px = src.pixel_count();
    const double* c0 = src.channel(0);
    const double* c1 = src.channel(1);
    const double* c2 = src.channel(2);
    double* po = out.channel(0);
    for (std::size_t i = 0; i < px; ++i) po[i] = std::max(c0[i], std::max(c1[i], c2[i]));
    return out;
}

ImageTensor clamp_unit(const ImageTensor& src) {
    return map_elements(src, [](double v) { return std::clamp(v, 0.0, 1.0); });
}

ImageTensor add(const ImageTensor& a, const ImageTensor& b) {
    check_same_shape(a, b, "add");
    return broadcast_binary(a, b, [](double x, double y) { return x + y; });
}

ImageTensor subtract(const ImageTensor& a, const ImageTensor& b) {
    check_broadcast(a, b, "subtract");
    return broadcast_binary(a, b, [](double x, double y) { return x - y; });
}

ImageTensor max_elements(const ImageTensor& a, const ImageTensor& b) {
    check_same_shape(a, b, "max_elements");
    return broadcast_binary(a, b, [](double x, double y) { return std::max(x, y); });
}

ImageTensor scale(const ImageTensor& t, double factor) {
    return map_elements(t, [factor](double v) { return v * factor; });
}

ImageTensor add_scalar(const ImageTensor& t, double value) {
    return map_elements(t, [value](double v) { return v + value; });
}

ImageTensor pow_elements(const ImageTensor& t, double exponent) {
    return map_elements(t, [exponent](double v) { return std::pow(v, exponent); });
}

ImageTensor replicate_channels(const ImageTensor& src, int channels) {
    if (src.channels() == channels) return src;
    if (src.channels() != 1) {
        throw ShapeError("replicate_channels: source must be 1-channel, got " +
                         src.shape_string());
    }
    ImageTensor out(src.height(), src.width(), channels);
    const std::size_t px = src.pixel_count();
    for (int c = 0; c < channels; ++c) {
        std::copy_n(src.channel(0), px, out.channel(c));
    }
    return out;
}

double frobenius_norm(const ImageTensor& t) {
    double acc = 0.0;
    for (double v : t.data()) acc += v * v;
    return std::sqrt(acc);
}

double min_value(const ImageTensor& t) {
    return *std::min_element(t.data().begin(), t.data().end());
}

double max_value(const ImageTensor& t) {
    return *std::max_element(t.data().begin(), t.data().end());
}

double mean_value(const ImageTensor& t) {
    double acc = 0.0;
    for (double v : t.data()) acc += v;
    return acc / static_cast<double>(t.size());
}

bool all_finite(const ImageTensor& t) {
    for (double v : t.data()) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double relative_change(const ImageTensor& current, const ImageTensor& previous) {
    check_same_shape(current, previous, "relative_change");
    double num = 0.0, den = 0.0;
    const std::size_t n = current.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = current.data()[i] - previous.data()[i];
        num += d * d;
        den += previous.data()[i] * previous.data()[i];
    }
    // 1e-150 keeps the ratio finite for an all-zero previous iterate.
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-150);
}

}  // namespace intrinsic
