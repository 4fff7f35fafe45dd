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
#include "dogsynth/asset_pack.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace dogsynth {

namespace fs = std::filesystem;

namespace {

const std::array<Vec3, 8> kCoatPalette{{
    {0.76, 0.60, 0.42}, // tan
    {0.35, 0.22, 0.12}, // dark brown
    {0.08, 0.07, 0.07}, // black
    {0.92, 0.90, 0.86}, // white
    {0.85, 0.65, 0.30}, // golden
    {0.50, 0.50, 0.52}, // grey
    {0.60, 0.30, 0.15}, // red
    {0.95, 0.88, 0.70}, // cream
}};

double smoothstep(double e0, double e1, double x)
{
    const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

Vec3 jitter_color(const Vec3& c, Rng& rng, double amount)
{
    Vec3 out;
    for (int k = 0; k < 3; ++k)
        out[k] = std::clamp(c[k] + uniform(rng, -amount, amount), 0.0, 1.0);
    return out;
}

// Smooth pseudo-noise in roughly [-1,1] built from a few fixed sinusoids.
struct SineNoise {
    std::array<Vec3, 4> freq;
    std::array<double, 4> phase;

    explicit SineNoise(Rng& rng, double scale)
    {
        for (int i = 0; i < 4; ++i) {
            freq[i] = Vec3(standard_normal(rng), standard_normal(rng), standard_normal(rng)) * scale;
            phase[i] = uniform(rng, 0.0, 6.283185307179586);
        }
    }
    double operator()(const Vec3& p) const
    {
        double s = 0.0;
        for (int i = 0; i < 4; ++i)
            s += std::sin(freq[i].dot(p) + phase[i]);
        return 0.25 * s;
    }
};

enum class Pattern { Solid, Saddle, Spots, Bicolor };

struct Coat {
    Vec3 base, second;
    Pattern pattern;
    std::vector<Vec3> spots;
    double spot_radius;
    bool light_paws;
    SineNoise noise;
};

Coat make_coat(const RiggedMesh& mesh, Rng& rng)
{
    const std::size_t a = uniform_index(rng, kCoatPalette.size());
    std::size_t b = uniform_index(rng, kCoatPalette.size() - 1);
    if (b >= a)
        ++b;
    Coat c{jitter_color(kCoatPalette[a], rng, 0.06),
           jitter_color(kCoatPalette[b], rng, 0.06),
           static_cast<Pattern>(uniform_index(rng, 4)),
           {},
           uniform(rng, 0.04, 0.09),
           uniform(rng, 0.0, 1.0) < 0.4,
           SineNoise(rng, 12.0)};
    if (c.pattern == Pattern::Spots) {
        const std::size_t k = 6 + uniform_index(rng, 9);
        for (std::size_t i = 0; i < k; ++i)
            c.spots.push_back(mesh.vertices[uniform_index(rng, mesh.vertices.size())]);
    }
    return c;
}

Vec3 coat_color(const Coat& c, const Vec3& p, const std::string& part)
{
    double m = 0.0;
    switch (c.pattern) {
    case Pattern::Solid:
        break;
    case Pattern::Saddle:
        m = smoothstep(0.03, 0.12, p.y()) * smoothstep(-0.45, -0.25, p.x()) * smoothstep(0.5, 0.3, p.x());
        break;
    case Pattern::Spots:
        for (const Vec3& s : c.spots)
            m = std::max(m, smoothstep(c.spot_radius, 0.6 * c.spot_radius, (p - s).norm()));
        break;
    case Pattern::Bicolor:
        m = smoothstep(-0.04, -0.14, p.y());
        break;
    }
    if (c.light_paws && part.find("paw") != std::string::npos)
        m = 1.0;
    Vec3 col = (1.0 - m) * c.base + m * c.second;
    col *= 1.0 + 0.12 * c.noise(p);
    return col.cwiseMax(0.0).cwiseMin(1.0);
}

void fill_rect(ImageRGB& img, double x0, double y0, double x1, double y1, const Vec3& color, double alpha)
{
    const int ix0 = std::max(0, static_cast<int>(std::floor(x0)));
    const int iy0 = std::max(0, static_cast<int>(std::floor(y0)));
    const int ix1 = std::min(img.width, static_cast<int>(std::ceil(x1)));
    const int iy1 = std::min(img.height, static_cast<int>(std::ceil(y1)));
    for (int y = iy0; y < iy1; ++y)
        for (int x = ix0; x < ix1; ++x)
            for (int c = 0; c < 3; ++c)
                img.at(x, y, c) = static_cast<float>((1.0 - alpha) * img.at(x, y, c) + alpha * color[c]);
}

void fill_disc(ImageRGB& img, double cx, double cy, double r, const Vec3& color)
{
    for (int y = std::max(0, static_cast<int>(cy - r)); y < std::min(img.height, static_cast<int>(cy + r) + 1); ++y)
        for (int x = std::max(0, static_cast<int>(cx - r)); x < std::min(img.width, static_cast<int>(cx + r) + 1); ++x) {
            const double d = std::hypot(x + 0.5 - cx, y + 0.5 - cy);
            const double a = std::clamp(r - d, 0.0, 1.0);
            for (int c = 0; c < 3; ++c)
                img.at(x, y, c) = static_cast<float>((1.0 - a) * img.at(x, y, c) + a * color[c]);
        }
}

} // namespace

SampleMatrix procedural_textures(const RiggedMesh& mesh, const PartLabels& parts, int count, std::uint32_t d,
                                 std::uint64_t seed)
{
    require(count >= 2, "at least two coats are needed");
    require(d >= 1, "texel resolution must be positive");
    require(parts.face.size() == mesh.faces.size(), "part labels do not match the mesh");

    const std::size_t faces = mesh.faces.size();
    SampleMatrix m;
    m.layout = LayoutInfo::texture(static_cast<std::uint32_t>(faces), d);
    m.data.resize(static_cast<Eigen::Index>(m.layout.feature_count()), count);

    for (int s = 0; s < count; ++s) {
        Rng rng = make_sample_rng(seed, static_cast<std::uint64_t>(s));
        const Coat coat = make_coat(mesh, rng);
        TextureTensor t{static_cast<std::uint32_t>(faces), d, {}};
        auto col = m.data.col(s);
        for (std::size_t f = 0; f < faces; ++f) {
            const auto& face = mesh.faces[f];
            const Vec3& a = mesh.vertices[face[0]];
            const Vec3& b = mesh.vertices[face[1]];
            const Vec3& c = mesh.vertices[face[2]];
            const std::string& part = mesh.skeleton.joints[static_cast<std::size_t>(parts.face[f])].name;
            for (std::uint32_t i = 0; i < d; ++i)
                for (std::uint32_t j = 0; j < d; ++j)
                    for (std::uint32_t k = 0; k < d; ++k) {
                        Vec3 w(i, j, k);
                        w = w.sum() > 0.0 ? Vec3(w / w.sum()) : Vec3::Constant(1.0 / 3.0);
                        const Vec3 p = w[0] * a + w[1] * b + w[2] * c;
                        const Vec3 color = coat_color(coat, p, part);
                        const std::size_t o = t.offset(f, i, j, k);
                        for (int ch = 0; ch < 3; ++ch)
                            col[static_cast<Eigen::Index>(o) + ch] = color[ch];
                    }
        }
    }
    return m;
}

ImageRGB procedural_background(int width, int height, std::uint64_t seed)
{
    require(width > 0 && height > 0, "background size must be positive");
    Rng rng = make_sample_rng(seed, 0x6267);
    const Vec3 sky_top = jitter_color({0.45, 0.62, 0.85}, rng, 0.15);
    const Vec3 sky_low = jitter_color({0.80, 0.85, 0.90}, rng, 0.10);
    static const std::array<Vec3, 4> grounds{{{0.35, 0.50, 0.25}, {0.55, 0.45, 0.32}, {0.50, 0.50, 0.50},
                                              {0.72, 0.66, 0.52}}};
    const Vec3 ground = jitter_color(grounds[uniform_index(rng, grounds.size())], rng, 0.08);
    const double horizon = uniform(rng, 0.35, 0.65) * height;
    SineNoise noise(rng, 0.03);

    ImageRGB img(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            Vec3 c;
            if (y < horizon) {
                const double t = y / std::max(horizon, 1.0);
                c = (1.0 - t) * sky_top + t * sky_low;
            } else {
                const double t = (y - horizon) / std::max(height - horizon, 1.0);
                c = ground * (0.8 + 0.3 * t);
                c *= 1.0 + 0.15 * noise(Vec3(x, y * 3.0, 0.0));
            }
            for (int k = 0; k < 3; ++k)
                img.at(x, y, k) = static_cast<float>(std::clamp(c[k], 0.0, 1.0));
        }
    }

    // Buildings or hedges along the horizon, then a few trees or bushes.
    const std::size_t blocks = 2 + uniform_index(rng, 5);
    for (std::size_t i = 0; i < blocks; ++i) {
        const double bw = uniform(rng, 0.05, 0.25) * width;
        const double bh = uniform(rng, 0.05, 0.3) * height;
        const double x0 = uniform(rng, -0.1, 1.0) * width;
        const Vec3 col = jitter_color({0.45, 0.42, 0.40}, rng, 0.2);
        fill_rect(img, x0, horizon - bh, x0 + bw, horizon + 1, col, 0.9);
    }
    const std::size_t trees = uniform_index(rng, 5);
    for (std::size_t i = 0; i < trees; ++i) {
        const double cx = uniform(rng, 0.0, 1.0) * width;
        const double r = uniform(rng, 0.04, 0.12) * height;
        const Vec3 leaf = jitter_color({0.20, 0.38, 0.18}, rng, 0.08);
        fill_rect(img, cx - 0.15 * r, horizon - 1.2 * r, cx + 0.15 * r, horizon + 0.1 * r, {0.3, 0.22, 0.15}, 1.0);
        fill_disc(img, cx, horizon - 1.6 * r, r, leaf);
    }
    return img;
}

AssetPackSummary synthesize_asset_pack(const fs::path& out_dir, const AssetPackOptions& o)
{
    require(o.shape_variants >= 2, "at least two shape variants are needed");
    require(o.shape_jitter >= 0.0 && o.shape_jitter < 0.5, "shape jitter must lie in [0, 0.5)");
    require(o.backgrounds >= 1, "at least one background is needed");

    fs::create_directories(out_dir / "backgrounds");
    AssetPackSummary s;
    s.paths = AssetPaths::in_pack(out_dir);
    s.config = out_dir / "config.json";

    DogConfig dc;
    dc.face_budget = o.face_budget;
    const GeneratedDog dog = generate_canonical_dog(dc);
    save_obj(s.paths.mesh_obj, dog.mesh.vertices, dog.mesh.faces);
    save_rig_json(s.paths.rig_json, dog.mesh);
    s.faces = static_cast<int>(dog.mesh.faces.size());
    s.vertices = static_cast<int>(dog.mesh.vertices.size());

    std::vector<RiggedMesh> variants{dog.mesh};
    for (int i = 1; i < o.shape_variants; ++i) {
        DogConfig v = dc;
        v.seed = o.seed * 1000003u + static_cast<std::uint64_t>(i);
        v.jitter = o.shape_jitter;
        variants.push_back(generate_canonical_dog(v).mesh);
    }
    const PcaModel shape = synthesize_shape_pca(variants);
    save_pca(shape, s.paths.shape_pca);
    s.shape_components = shape.n_components();

    const PartLabels parts = part_labels(dog.mesh.weights, dog.mesh.faces);
    const PcaModel texture = fit_pca(procedural_textures(dog.mesh, parts, o.texture_samples, o.texture_d, o.seed));
    save_pca(texture, s.paths.texture_pca);
    s.texture_components = texture.n_components();

    const PoseLibrary poses = procedural_pose_library(dog.mesh.skeleton, o.walk_phases);
    save_pose_library(s.paths.pose_library, poses, dog.mesh.skeleton);
    s.poses = poses.poses.size();

    save_bbox_stats_csv(synthetic_bbox_stats(o.stats_entries, o.seed), s.paths.bbox_stats);

    for (int i = 0; i < o.backgrounds; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "bg_%03d.png", i);
        write_png_rgb(s.paths.background_dir / name,
                      procedural_background(o.background_width, o.background_height,
                                            o.seed * 7919u + static_cast<std::uint64_t>(i)));
    }

    const nlohmann::json config = {{"asset_pack", "."}, {"count", 100}, {"seed", 0}};
    std::ofstream os(s.config);
    if (!os)
        throw IoError("cannot write " + s.config.string());
    os << config.dump(2) << "\n";
    return s;
}

} // namespace dogsynth
