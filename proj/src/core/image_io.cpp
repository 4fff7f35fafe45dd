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
#include "dogsynth/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <png.h>

#include "binio.hpp"
#include "dogsynth/common.hpp"

namespace dogsynth {

namespace {

void write_png(const std::filesystem::path& path, int width, int height, std::uint32_t format,
               const std::vector<std::uint8_t>& pixels, int channels)
{
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = format;
    if (!png_image_write_to_file(&image, path.c_str(), 0, pixels.data(), width * channels, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw IoError("failed to write " + path.string() + ": " + msg);
    }
}

} // namespace

std::uint8_t quantize_unit(float v)
{
    const float c = std::clamp(v, 0.0f, 1.0f);
    return static_cast<std::uint8_t>(std::lround(c * 255.0f));
}

PixelRect mask_bbox(const Plane<std::uint8_t>& mask)
{
    PixelRect r{mask.width, mask.height, 0, 0};
    bool any = false;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.at(x, y))
                continue;
            any = true;
            r.x0 = std::min(r.x0, x);
            r.y0 = std::min(r.y0, y);
            r.x1 = std::max(r.x1, x + 1);
            r.y1 = std::max(r.y1, y + 1);
        }
    }
    return any ? r : PixelRect{};
}

void write_png_rgb(const std::filesystem::path& path, const ImageRGB& img)
{
    std::vector<std::uint8_t> px(img.data.size());
    std::transform(img.data.begin(), img.data.end(), px.begin(), quantize_unit);
    write_png(path, img.width, img.height, PNG_FORMAT_RGB, px, 3);
}

void write_png_gray(const std::filesystem::path& path, const Plane<std::uint8_t>& img)
{
    write_png(path, img.width, img.height, PNG_FORMAT_GRAY, img.data, 1);
}

RawImage read_png(const std::filesystem::path& path)
{
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
        throw IoError("failed to read " + path.string() + ": " + image.message);

    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    const bool alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
    image.format = color ? (alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB) : (alpha ? PNG_FORMAT_GA : PNG_FORMAT_GRAY);
    const int in_channels = (color ? 3 : 1) + (alpha ? 1 : 0);
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw FormatError("failed to decode " + path.string() + ": " + msg);
    }

    RawImage out;
    out.width = static_cast<int>(image.width);
    out.height = static_cast<int>(image.height);
    out.channels = color ? 3 : 1;
    if (!alpha) {
        out.pixels = std::move(buf);
        return out;
    }
    const std::size_t n = static_cast<std::size_t>(out.width) * out.height;
    out.pixels.resize(n * out.channels);
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < out.channels; ++c)
            out.pixels[i * out.channels + c] = buf[i * in_channels + c];
    return out;
}

ImageRGB fit_to_size(const RawImage& src, int width, int height)
{
    require(src.width > 0 && src.height > 0, "source image is empty");
    require(width > 0 && height > 0, "target size must be positive");
    // Center crop to the target aspect ratio.
    const double target_aspect = static_cast<double>(width) / height;
    double crop_w = src.width, crop_h = src.height;
    if (crop_w / crop_h > target_aspect)
        crop_w = crop_h * target_aspect;
    else
        crop_h = crop_w / target_aspect;
    const double off_x = 0.5 * (src.width - crop_w);
    const double off_y = 0.5 * (src.height - crop_h);

    auto sample = [&](int x, int y, int c) {
        x = std::clamp(x, 0, src.width - 1);
        y = std::clamp(y, 0, src.height - 1);
        const int ch = src.channels == 3 ? c : 0;
        return src.pixels[(static_cast<std::size_t>(y) * src.width + x) * src.channels + ch] / 255.0;
    };

    ImageRGB out(width, height);
    for (int y = 0; y < height; ++y) {
        const double sy = off_y + (y + 0.5) * crop_h / height - 0.5;
        const int y0 = static_cast<int>(std::floor(sy));
        const double fy = sy - y0;
        for (int x = 0; x < width; ++x) {
            const double sx = off_x + (x + 0.5) * crop_w / width - 0.5;
            const int x0 = static_cast<int>(std::floor(sx));
            const double fx = sx - x0;
            for (int c = 0; c < 3; ++c) {
                const double top = (1 - fx) * sample(x0, y0, c) + fx * sample(x0 + 1, y0, c);
                const double bottom = (1 - fx) * sample(x0, y0 + 1, c) + fx * sample(x0 + 1, y0 + 1, c);
                out.at(x, y, c) = static_cast<float>((1 - fy) * top + fy * bottom);
            }
        }
    }
    return out;
}

void write_float_plane(const std::filesystem::path& path, const Plane<float>& plane)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw IoError("cannot open " + path.string() + " for writing");
    os.write("SCFP", 4);
    detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(plane.width));
    detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(plane.height));
    for (float v : plane.data)
        detail::write_le<float>(os, v);
    if (!os)
        throw IoError("write failed for " + path.string());
}

Plane<float> read_float_plane(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw IoError("cannot open " + path.string());
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "SCFP", 4) != 0)
        throw FormatError(path.string() + ": not a float plane dump (bad magic)");
    const auto w = detail::read_le<std::uint32_t>(is, "width");
    const auto h = detail::read_le<std::uint32_t>(is, "height");
    if (w == 0 || h == 0 || w > (1u << 16) || h > (1u << 16))
        throw FormatError(path.string() + ": implausible plane size");
    Plane<float> plane(static_cast<int>(w), static_cast<int>(h));
    for (float& v : plane.data)
        v = detail::read_le<float>(is, "plane data");
    return plane;
}

} // namespace dogsynth
