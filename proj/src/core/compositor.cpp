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
#include <cmath>
#include <limits>

#include "dogsynth/dataset.hpp"

namespace dogsynth {

ImageRGB composite(const RenderOutput& rendered, const ImageRGB& background)
{
    const int w = rendered.rgb.width;
    const int h = rendered.rgb.height;
    if (background.width != w || background.height != h)
        throw InvalidArgument("background is " + std::to_string(background.width) + "x" +
                              std::to_string(background.height) + ", render is " + std::to_string(w) + "x" +
                              std::to_string(h));
    require(rendered.mask.width == w && rendered.mask.height == h, "mask size does not match the rendered image");

    ImageRGB out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const float m = rendered.mask.at(x, y) ? 1.0f : 0.0f;
            for (int c = 0; c < 3; ++c)
                out.at(x, y, c) = background.at(x, y, c) * (1.0f - m) + rendered.rgb.at(x, y, c);
        }
    }
    return out;
}

RenderOutput apply_g(const RenderOutput& in, int dx, int dy)
{
    const int w = in.mask.width;
    const int h = in.mask.height;
    RenderOutput out;
    out.rgb = ImageRGB(w, h);
    out.mask = Plane<std::uint8_t>(w, h, 0);
    out.part_map = Plane<std::int16_t>(w, h, kBackgroundPart);
    out.depth = Plane<float>(w, h, std::numeric_limits<float>::infinity());

    for (int y = 0; y < h; ++y) {
        const int ty = y + dy;
        if (ty < 0 || ty >= h)
            continue;
        for (int x = 0; x < w; ++x) {
            const int tx = x + dx;
            if (tx < 0 || tx >= w)
                continue;
            out.mask.at(tx, ty) = in.mask.at(x, y);
            out.part_map.at(tx, ty) = in.part_map.at(x, y);
            out.depth.at(tx, ty) = in.depth.at(x, y);
            for (int c = 0; c < 3; ++c)
                out.rgb.at(tx, ty, c) = in.rgb.at(x, y, c);
        }
    }

    out.joints_2d = in.joints_2d;
    for (auto& j : out.joints_2d) {
        if (!std::isfinite(j.x) || !std::isfinite(j.y))
            continue;
        j.x += dx;
        j.y += dy;
        j.visible = j.x >= 0.0 && j.y >= 0.0 && j.x < w && j.y < h;
    }
    out.bbox = mask_bbox(out.mask);
    return out;
}

} // namespace dogsynth
