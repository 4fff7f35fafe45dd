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
#include "dogsynth/renderer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace dogsynth {

namespace {

// Geometry closer than this (along the view axis) is clipped.
constexpr double kNearPlane = 1e-3;

struct ClipVertex {
    Vec3 cam;  // camera-space position
    Vec3 bary; // barycentric coordinates w.r.t. the original face
};

double view_depth(const Vec3& cam) { return -cam.z(); }

// Sutherland-Hodgman against depth >= kNearPlane. At most 4 vertices out.
int clip_near(const std::array<ClipVertex, 3>& in, std::array<ClipVertex, 4>& out)
{
    int n = 0;
    for (int i = 0; i < 3; ++i) {
        const ClipVertex& p = in[i];
        const ClipVertex& q = in[(i + 1) % 3];
        const double dp = view_depth(p.cam) - kNearPlane;
        const double dq = view_depth(q.cam) - kNearPlane;
        if (dp >= 0.0)
            out[n++] = p;
        if ((dp >= 0.0) != (dq >= 0.0)) {
            const double t = dp / (dp - dq);
            out[n++] = {p.cam + t * (q.cam - p.cam), p.bary + t * (q.bary - p.bary)};
        }
    }
    return n;
}

struct ScreenVertex {
    double x, y;   // pixel coordinates
    double inv_z;  // 1 / view depth
    Vec3 bary;
};

// Evaluated from a canonical endpoint order so that two triangles sharing an
// edge get exactly opposite values, bit for bit.
double edge(const ScreenVertex& a, const ScreenVertex& b, double px, double py)
{
    const bool swap = b.x < a.x || (b.x == a.x && b.y < a.y);
    const ScreenVertex& p = swap ? b : a;
    const ScreenVertex& q = swap ? a : b;
    const double e = (q.x - p.x) * (py - p.y) - (q.y - p.y) * (px - p.x);
    return swap ? -e : e;
}

// Top-left fill rule: a pixel center exactly on an edge belongs to the
// triangle only if the edge is a left edge or a horizontal top edge.
bool owns_edge(const ScreenVertex& a, const ScreenVertex& b)
{
    const double gx = -(b.y - a.y);
    const double gy = b.x - a.x;
    return gx > 0.0 || (gx == 0.0 && gy > 0.0);
}

bool covers(double e, bool owned) { return e > 0.0 || (e == 0.0 && owned); }

struct Target {
    RenderOutput& out;
    const TextureTensor& texture;
    std::size_t face;
    Vec3 shade;
    std::int16_t part;
};

void raster_triangle(Target& t, ScreenVertex v0, ScreenVertex v1, ScreenVertex v2)
{
    double area = edge(v0, v1, v2.x, v2.y);
    if (area == 0.0 || !std::isfinite(area))
        return;
    if (area < 0.0) {
        std::swap(v1, v2);
        area = -area;
    }
    const int w = t.out.mask.width;
    const int h = t.out.mask.height;
    const double min_x = std::min({v0.x, v1.x, v2.x});
    const double max_x = std::max({v0.x, v1.x, v2.x});
    const double min_y = std::min({v0.y, v1.y, v2.y});
    const double max_y = std::max({v0.y, v1.y, v2.y});
    const int x_begin = std::max(0, static_cast<int>(std::ceil(min_x - 0.5)));
    const int x_end = std::min(w - 1, static_cast<int>(std::floor(max_x - 0.5)));
    const int y_begin = std::max(0, static_cast<int>(std::ceil(min_y - 0.5)));
    const int y_end = std::min(h - 1, static_cast<int>(std::floor(max_y - 0.5)));
    if (x_begin > x_end || y_begin > y_end)
        return;

    const bool own12 = owns_edge(v1, v2);
    const bool own20 = owns_edge(v2, v0);
    const bool own01 = owns_edge(v0, v1);

    for (int y = y_begin; y <= y_end; ++y) {
        const double py = y + 0.5;
        for (int x = x_begin; x <= x_end; ++x) {
            const double px = x + 0.5;
            const double e0 = edge(v1, v2, px, py);
            const double e1 = edge(v2, v0, px, py);
            const double e2 = edge(v0, v1, px, py);
            if (!covers(e0, own12) || !covers(e1, own20) || !covers(e2, own01))
                continue;
            const double l0 = e0 / area, l1 = e1 / area, l2 = e2 / area;
            const double inv_z = l0 * v0.inv_z + l1 * v1.inv_z + l2 * v2.inv_z;
            const double depth = 1.0 / inv_z;
            float& zbuf = t.out.depth.at(x, y);
            if (!(depth < zbuf))
                continue;
            Vec3 bary = (l0 * v0.inv_z * v0.bary + l1 * v1.inv_z * v1.bary + l2 * v2.inv_z * v2.bary) / inv_z;
            bary = bary.cwiseMax(0.0);
            bary /= bary.sum();
            const Vec3 color = texel_lookup(t.texture, t.face, bary).cwiseProduct(t.shade).cwiseMax(0.0).cwiseMin(1.0);
            zbuf = static_cast<float>(depth);
            t.out.mask.at(x, y) = 1;
            t.out.part_map.at(x, y) = t.part;
            for (int c = 0; c < 3; ++c)
                t.out.rgb.at(x, y, c) = static_cast<float>(color[c]);
        }
    }
}

} // namespace

Camera Camera::centered(int width, int height, double focal)
{
    Camera c;
    c.width = width;
    c.height = height;
    c.focal = focal;
    c.cx = 0.5 * width;
    c.cy = 0.5 * height;
    return c;
}

void Camera::validate() const
{
    require(width > 0 && height > 0, "camera image size must be positive");
    require(focal > 0.0 && std::isfinite(focal), "camera focal length must be positive");
    require(cx >= 0.0 && cx <= width && cy >= 0.0 && cy <= height, "principal point must lie inside the image");
}

std::optional<Vec2> Camera::project(const Vec3& world) const
{
    const Vec3 c = extrinsic * world;
    const double depth = view_depth(c);
    if (!(depth >= kNearPlane))
        return std::nullopt;
    return Vec2(cx + focal * c.x() / depth, cy - focal * c.y() / depth);
}

void Lighting::validate() const
{
    require(std::abs(direction.norm() - 1.0) <= 1e-6, "light direction must be a unit vector");
    for (int c = 0; c < 3; ++c) {
        require(ambient[c] >= 0.0 && ambient[c] <= 1.0, "ambient intensity must lie in [0,1]");
        require(directional[c] >= 0.0 && directional[c] <= 1.0, "directional intensity must lie in [0,1]");
    }
}

void LightingRanges::validate() const
{
    require(0.0 <= ambient_lo && ambient_lo <= ambient_hi && ambient_hi <= 1.0, "ambient range must be a subset of [0,1]");
    require(0.0 <= directional_lo && directional_lo <= directional_hi && directional_hi <= 1.0,
            "directional range must be a subset of [0,1]");
}

Lighting sample_lighting(Rng& rng, const LightingRanges& r)
{
    r.validate();
    Lighting l;
    for (int c = 0; c < 3; ++c)
        l.ambient[c] = uniform(rng, r.ambient_lo, r.ambient_hi);
    for (int c = 0; c < 3; ++c)
        l.directional[c] = uniform(rng, r.directional_lo, r.directional_hi);
    // Uniform on the hemisphere: z uniform in [0,1] (Archimedes).
    const double z = uniform(rng, 0.0, 1.0);
    const double phi = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    l.direction = Vec3(rho * std::cos(phi), rho * std::sin(phi), z).normalized();
    return l;
}

Vec3 texel_lookup(const TextureTensor& texture, std::size_t face, const Vec3& bary)
{
    if (face >= texture.faces)
        throw InvalidArgument("face index " + std::to_string(face) + " out of range for texture with " +
                              std::to_string(texture.faces) + " faces");
    const std::uint32_t d = texture.d;
    std::array<std::uint32_t, 3> idx{};
    for (int k = 0; k < 3; ++k) {
        const double g = std::floor(bary[k] * (d - 1) + 0.5);
        idx[k] = static_cast<std::uint32_t>(std::clamp(g, 0.0, static_cast<double>(d - 1)));
    }
    return texture.texel(face, idx[0], idx[1], idx[2]);
}

RenderOutput render(const RenderScene& scene, const TextureTensor& texture, const Camera& camera,
                    const Lighting& lighting)
{
    camera.validate();
    lighting.validate();
    if (texture.faces != scene.faces.size())
        throw InvalidArgument("texture has " + std::to_string(texture.faces) + " faces, mesh has " +
                              std::to_string(scene.faces.size()));
    require(scene.face_parts.empty() || scene.face_parts.size() == scene.faces.size(),
            "face part labels must match the face count");

    const int w = camera.width;
    const int h = camera.height;
    RenderOutput out;
    out.rgb = ImageRGB(w, h);
    out.mask = Plane<std::uint8_t>(w, h, 0);
    out.part_map = Plane<std::int16_t>(w, h, kBackgroundPart);
    out.depth = Plane<float>(w, h, std::numeric_limits<float>::infinity());

    std::vector<Vec3> cam(scene.vertices.size());
    for (std::size_t i = 0; i < cam.size(); ++i)
        cam[i] = camera.extrinsic * scene.vertices[i];
    const Vec3 eye = camera.extrinsic.inverse().translation();

    for (std::size_t f = 0; f < scene.faces.size(); ++f) {
        const auto& face = scene.faces[f];
        for (auto i : face)
            require(i < scene.vertices.size(), "face references a vertex out of range");
        const Vec3& a = scene.vertices[face[0]];
        Vec3 n = (scene.vertices[face[1]] - a).cross(scene.vertices[face[2]] - a);
        if (!(n.norm() > 0.0))
            continue;
        n.normalize();
        if (n.dot(eye - a) < 0.0)
            n = -n; // two-sided: shade the side facing the camera
        const double lambert = std::max(0.0, n.dot(lighting.direction));

        Target target{out, texture, f, lighting.ambient + lambert * lighting.directional,
                      static_cast<std::int16_t>(scene.face_parts.empty() ? 0 : scene.face_parts[f])};

        const std::array<ClipVertex, 3> tri{{{cam[face[0]], Vec3::UnitX()},
                                             {cam[face[1]], Vec3::UnitY()},
                                             {cam[face[2]], Vec3::UnitZ()}}};
        std::array<ClipVertex, 4> poly;
        const int n_poly = clip_near(tri, poly);
        if (n_poly < 3)
            continue;
        std::array<ScreenVertex, 4> sv;
        for (int i = 0; i < n_poly; ++i) {
            const double depth = view_depth(poly[i].cam);
            sv[i] = {camera.cx + camera.focal * poly[i].cam.x() / depth,
                     camera.cy - camera.focal * poly[i].cam.y() / depth, 1.0 / depth, poly[i].bary};
        }
        for (int i = 1; i + 1 < n_poly; ++i)
            raster_triangle(target, sv[0], sv[i], sv[i + 1]);
    }

    out.joints_2d.reserve(scene.joints.size());
    for (const auto& j : scene.joints) {
        Joint2D p;
        if (const auto uv = camera.project(j)) {
            p.x = uv->x();
            p.y = uv->y();
            p.visible = p.x >= 0.0 && p.y >= 0.0 && p.x < w && p.y < h;
        } else {
            p.x = p.y = std::numeric_limits<double>::quiet_NaN();
        }
        out.joints_2d.push_back(p);
    }
    out.bbox = mask_bbox(out.mask);
    return out;
}

} // namespace dogsynth
