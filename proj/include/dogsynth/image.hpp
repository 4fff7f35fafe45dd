/*
 * Copyright 2026 The dogsynth Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace dogsynth {

/// Single-channel row-major image.
template <class T>
struct Plane {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Plane() = default;
    Plane(int w, int h, T fill = T{}) : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    T& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    const T& at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
    bool operator==(const Plane&) const = default;
};

/// Interleaved RGB image, values nominally in [0,1].
struct ImageRGB {
    int width = 0;
    int height = 0;
    std::vector<float> data;

    ImageRGB() = default;
    ImageRGB(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0.0f) {}

    float& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
    float at(int x, int y, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
    bool operator==(const ImageRGB&) const = default;
};

/// Half-open pixel rectangle [x0,x1) x [y0,y1).
struct PixelRect {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    bool empty() const { return x1 <= x0 || y1 <= y0; }
    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    long long area() const { return empty() ? 0 : static_cast<long long>(width()) * height(); }
    double center_x() const { return 0.5 * (x0 + x1); }
    double center_y() const { return 0.5 * (y0 + y1); }
    bool operator==(const PixelRect&) const = default;
};

PixelRect mask_bbox(const Plane<std::uint8_t>& mask);

// PNG I/O (8-bit). Writers are deterministic: identical pixels give
// identical bytes.
void write_png_rgb(const std::filesystem::path& path, const ImageRGB& img);
void write_png_gray(const std::filesystem::path& path, const Plane<std::uint8_t>& img);

struct RawImage {
    int width = 0;
    int height = 0;
    int channels = 0; // 1 or 3 after decoding (alpha dropped, palette expanded)
    std::vector<std::uint8_t> pixels;
};
RawImage read_png(const std::filesystem::path& path);

/// Quantize a [0,1] value the way the PNG writer does: round(v*255).
std::uint8_t quantize_unit(float v);

// Float plane dump: magic "SCFP", u32 width, u32 height, then width*height
// little-endian f32 values, row-major. Used for depth buffers and heatmaps.
void write_float_plane(const std::filesystem::path& path, const Plane<float>& plane);
Plane<float> read_float_plane(const std::filesystem::path& path);

/// Center-crop to the target aspect ratio, then bilinear-resample.
ImageRGB fit_to_size(const RawImage& src, int width, int height);

} // namespace dogsynth
