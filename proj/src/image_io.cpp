// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the intrinsic project.

#include "intrinsic/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>

#include <nlohmann/json.hpp>

#include "intrinsic/errors.hpp"

namespace intrinsic {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

bool has_png_signature(std::FILE* f) {
    unsigned char sig[8];
    const bool ok = std::fread(sig, 1, 8, f) == 8 && png_sig_cmp(sig, 0, 8) == 0;
    std::rewind(f);
    return ok;
}

ImageTensor load_png(std::FILE* f, const std::string& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("load_image: libpng initialization failed for " + path);
    }
    std::vector<std::vector<png_byte>> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("load_image: corrupt PNG " + path);
    }
    png_init_io(png, f);
    png_read_info(png, info);

    const int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    depth = png_get_bit_depth(png, info);
    const int h = static_cast<int>(png_get_image_height(png, info));
    const int w = static_cast<int>(png_get_image_width(png, info));
    const int nch = png_get_channels(png, info);
    if ((depth != 8 && depth != 16) || (nch != 1 && nch != 3)) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("load_image: unsupported PNG layout in " + path + " (depth " +
                          std::to_string(depth) + ", channels " + std::to_string(nch) + ")");
    }

    rows.assign(h, std::vector<png_byte>(png_get_rowbytes(png, info)));
    std::vector<png_bytep> row_ptrs(h);
    for (int i = 0; i < h; ++i) row_ptrs[i] = rows[i].data();
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    ImageTensor out(h, w, nch);
    const double max_code = depth == 8 ? 255.0 : 65535.0;
    for (int i = 0; i < h; ++i) {
        const png_byte* row = rows[i].data();
        for (int j = 0; j < w; ++j) {
            for (int c = 0; c < nch; ++c) {
                std::uint32_t code;
                if (depth == 8) {
                    code = row[j * nch + c];
                } else {
                    // PNG stores 16-bit samples big-endian.
                    const int k = (j * nch + c) * 2;
                    code = static_cast<std::uint32_t>(row[k]) << 8 | row[k + 1];
                }
                out.at(c, i, j) = code / max_code;
            }
        }
    }
    return out;
}

// Binary PPM (P6). Header tokens may be separated by whitespace and
// '#' comments; maxval <= 255 means one byte per sample, otherwise two
// (big-endian).
ImageTensor load_ppm(std::FILE* f, const std::string& path) {
    auto next_token = [&]() -> std::string {
        std::string tok;
        int ch;
        while ((ch = std::fgetc(f)) != EOF) {
            if (ch == '#') {
                while ((ch = std::fgetc(f)) != EOF && ch != '\n') {
                }
                continue;
            }
            if (std::isspace(ch)) {
                if (!tok.empty()) break;
                continue;
            }
            tok.push_back(static_cast<char>(ch));
        }
        return tok;
    };

    if (next_token() != "P6") throw FormatError("load_image: not a binary PPM: " + path);
    int w = 0, h = 0, maxval = 0;
    try {
        w = std::stoi(next_token());
        h = std::stoi(next_token());
        maxval = std::stoi(next_token());
    } catch (const std::exception&) {
        throw FormatError("load_image: malformed PPM header in " + path);
    }
    if (w < 1 || h < 1 || maxval < 1 || maxval > 65535) {
        throw FormatError("load_image: unsupported PPM header in " + path);
    }

    const int bytes_per_sample = maxval <= 255 ? 1 : 2;
    const std::size_t need = static_cast<std::size_t>(w) * h * 3 * bytes_per_sample;
    std::vector<unsigned char> raw(need);
    if (std::fread(raw.data(), 1, need, f) != need) {
        throw FormatError("load_image: truncated PPM payload in " + path);
    }

    ImageTensor out(h, w, 3);
    const double max_code = maxval;
    std::size_t k = 0;
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            for (int c = 0; c < 3; ++c) {
                std::uint32_t code;
                if (bytes_per_sample == 1) {
                    code = raw[k++];
                } else {
                    code = static_cast<std::uint32_t>(raw[k]) << 8 | raw[k + 1];
                    k += 2;
                }
                out.at(c, i, j) = code / max_code;
            }
        }
    }
    return out;
}

int quantize8(double v) { return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

}  // namespace

ImageTensor load_image(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw IoError("load_image: cannot open " + path);
    if (has_png_signature(f.get())) return load_png(f.get(), path);

    // Fall back to PPM; anything else is rejected by its header.
    return load_ppm(f.get(), path);
}

void save_image(const ImageTensor& t, const std::string& path, Rescale rescale) {
    if (!all_finite(t)) throw ParamError("save_image: tensor contains non-finite values");

    ImageTensor display = t;
    if (rescale == Rescale::minmax) {
        const double lo = min_value(t), hi = max_value(t);
        if (hi > lo) {
            display = scale(add_scalar(t, -lo), 1.0 / (hi - lo));
        } else {
            display = ImageTensor(t.height(), t.width(), t.channels(), 0.5);
        }
    }

    const std::string tmp = path + ".tmp";
    {
        FilePtr f(std::fopen(tmp.c_str(), "wb"));
        if (!f) throw IoError("save_image: cannot open " + tmp + " for writing");

        png_structp png =
            png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        png_infop info = png ? png_create_info_struct(png) : nullptr;
        if (!png || !info) {
            png_destroy_write_struct(&png, &info);
            throw IoError("save_image: libpng initialization failed for " + path);
        }
        if (setjmp(png_jmpbuf(png))) {
            png_destroy_write_struct(&png, &info);
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw IoError("save_image: write failed for " + path);
        }
        png_init_io(png, f.get());
        // Fixed encoder settings keep repeated runs byte-identical.
        png_set_compression_level(png, 6);
        png_set_IHDR(png, info, display.width(), display.height(), 8,
                     display.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                     PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                     PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);

        std::vector<png_byte> row(static_cast<std::size_t>(display.width()) *
                                  display.channels());
        for (int i = 0; i < display.height(); ++i) {
            std::size_t k = 0;
            for (int j = 0; j < display.width(); ++j) {
                for (int c = 0; c < display.channels(); ++c) {
                    row[k++] = static_cast<png_byte>(quantize8(display.at(c, i, j)));
                }
            }
            png_write_row(png, row.data());
        }
        png_write_end(png, nullptr);
        png_destroy_write_struct(&png, &info);
    }

    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("save_image: cannot rename temporary file onto " + path);
    }
}

ImageTensor hsv_value(const ImageTensor& rgb) {
    if (rgb.channels() != 3) {
        throw ShapeError("hsv_value: expected a 3-channel tensor, got " + rgb.shape_string());
    }
    return channel_max(rgb);
}

JudgmentSet load_judgments(const std::string& path, int image_height, int image_width) {
    std::ifstream in(path);
    if (!in) throw IoError("load_judgments: cannot open " + path);

    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("load_judgments: malformed JSON in " + path + ": " + e.what());
    }

    auto to_pixel = [](double coord, int dim) {
        const long p = std::lround(coord * (dim - 1));
        return static_cast<int>(std::clamp(p, 0L, static_cast<long>(dim - 1)));
    };

    struct Point {
        int row, col;
    };
    std::map<long long, Point> points;
    JudgmentSet set;
    try {
        for (const auto& p : doc.at("intrinsic_points")) {
            const long long id = p.at("id").get<long long>();
            points[id] = {to_pixel(p.at("y").get<double>(), image_height),
                          to_pixel(p.at("x").get<double>(), image_width)};
        }
        for (const auto& c : doc.at("intrinsic_comparisons")) {
            const long long id1 = c.at("point1").get<long long>();
            const long long id2 = c.at("point2").get<long long>();
            const auto it1 = points.find(id1);
            const auto it2 = points.find(id2);
            if (it1 == points.end() || it2 == points.end()) {
                throw IntegrityError("load_judgments: comparison references unknown point in " +
                                     path);
            }
            const std::string darker = c.at("darker").get<std::string>();
            if (darker != "1" && darker != "2" && darker != "E") {
                throw IntegrityError("load_judgments: darker label '" + darker +
                                     "' is not one of 1/2/E in " + path);
            }
            const double weight = c.at("darker_score").get<double>();
            if (!(weight >= 0.0)) {
                throw IntegrityError("load_judgments: negative darker_score in " + path);
            }
            set.comparisons.push_back({it1->second.row, it1->second.col, it2->second.row,
                                       it2->second.col, darker[0], weight});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("load_judgments: unexpected document structure in " + path + ": " +
                         e.what());
    }
    return set;
}

}  // namespace intrinsic
