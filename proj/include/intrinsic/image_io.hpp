// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the intrinsic project.

#pragma once

#include <string>
#include <vector>

#include "intrinsic/tensor.hpp"

namespace intrinsic {

/// How save_image maps solver values to 8-bit codes. clip clamps to
/// [0,1]; minmax affinely maps [min,max] onto [0,1] first (a constant
/// tensor maps to mid-gray 0.5).
enum class Rescale { clip, minmax };

/// Decode an 8- or 16-bit PNG (gray or RGB) or binary PPM (P6) and
/// normalize integer codes to [0,1] by dividing by the maximum code.
ImageTensor load_image(const std::string& path);

/// Encode as 8-bit PNG, gray for 1-channel tensors and RGB for
/// 3-channel ones. Writes to a temporary file in the same directory
/// and renames, so a failed write never leaves a partial output.
void save_image(const ImageTensor& t, const std::string& path,
                Rescale rescale = Rescale::clip);

/// Value channel of HSV: pointwise max over the three RGB channels.
ImageTensor hsv_value(const ImageTensor& rgb);

/// One pairwise human reflectance judgment, bound to pixel coordinates.
/// darker is '1' (point1 darker), '2' (point2 darker) or 'E' (equal).
struct Comparison {
    int row1 = 0, col1 = 0;
    int row2 = 0, col2 = 0;
    char darker = 'E';
    double weight = 0.0;
};

struct JudgmentSet {
    std::vector<Comparison> comparisons;
};

/// Parse an IIW-style judgment file (see docs/formats.md) and convert
/// its normalized point coordinates to pixel indices for an image of
/// the given size: round(coord * (dim - 1)), clamped in bounds.
/// Comparisons with zero weight are retained.
JudgmentSet load_judgments(const std::string& path, int image_height, int image_width);

}  // namespace intrinsic
