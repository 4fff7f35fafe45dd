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

#include <optional>
#include <span>
#include <vector>

#include "dogsynth/common.hpp"
#include "dogsynth/image.hpp"
#include "dogsynth/pca.hpp"
#include "dogsynth/skeleton.hpp"

namespace dogsynth {

/**
 * Pinhole camera. The extrinsic maps world points into camera space, where
 * the camera looks down -z with +y up; image rows grow downward.
 */
struct Camera {
    double focal = 500.0;
    double cx = 227.5;
    double cy = 128.0;
    int width = 455;
    int height = 256;
    Transform extrinsic = Transform::Identity();

    static Camera centered(int width, int height, double focal = 500.0);
    void validate() const;

    /// Pixel coordinates of a world point, or nullopt when it is not in front
    /// of the near plane.
    std::optional<Vec2> project(const Vec3& world) const;
};

struct Lighting {
    Vec3 ambient = Vec3::Constant(0.5);
    Vec3 direction = Vec3::UnitZ(); // unit vector pointing toward the light
    Vec3 directional = Vec3::Constant(0.5);

    void validate() const;
};

struct LightingRanges {
    double ambient_lo = 0.3;
    double ambient_hi = 0.7;
    double directional_lo = 0.2;
    double directional_hi = 0.8;

    void validate() const;
};

/// Ambient and directional intensities uniform per channel; direction
/// uniform over the hemisphere facing the camera (z >= 0).
Lighting sample_lighting(Rng& rng, const LightingRanges& ranges = {});

inline constexpr std::int16_t kBackgroundPart = -1;

struct Joint2D {
    double x = 0.0;
    double y = 0.0;
    bool visible = false;
};

struct RenderOutput {
    ImageRGB rgb;                      // black outside the silhouette
    Plane<std::uint8_t> mask;          // 1 inside the silhouette
    Plane<std::int16_t> part_map;      // joint index or kBackgroundPart
    Plane<float> depth;                // distance along the view axis, +inf when empty
    std::vector<Joint2D> joints_2d;
    PixelRect bbox;
};

struct RenderScene {
    std::span<const Vec3> vertices;
    std::span<const Face> faces;
    std::span<const int> face_parts; // per-face joint label; empty means 0
    std::span<const Vec3> joints;    // projected into joints_2d
};

RenderOutput render(const RenderScene& scene, const TextureTensor& texture, const Camera& camera,
                    const Lighting& lighting);

/// Texel of `face` selected by rounding each barycentric coordinate onto the
/// d-point grid: index_k = floor(b_k * (d - 1) + 0.5).
Vec3 texel_lookup(const TextureTensor& texture, std::size_t face, const Vec3& bary);

} // namespace dogsynth
