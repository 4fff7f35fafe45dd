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

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dogsynth/placement.hpp"
#include "dogsynth/pose_library.hpp"
#include "dogsynth/renderer.hpp"

namespace dogsynth {

// --- compositing ---------------------------------------------------------

/// out = bg * (1 - mask) + rgb, per pixel and channel.
ImageRGB composite(const RenderOutput& rendered, const ImageRGB& background);

/// Shift every image-plane channel by (dx, dy). Vacated pixels become
/// background; content shifted off-frame is dropped. Joints move with the
/// image and the bbox is recomputed from the shifted mask.
RenderOutput apply_g(const RenderOutput& rendered, int dx, int dy);

// --- generation ----------------------------------------------------------

struct AssetPaths {
    std::filesystem::path shape_pca;
    std::filesystem::path texture_pca;
    std::filesystem::path mesh_obj;
    std::filesystem::path rig_json;
    std::filesystem::path pose_library;
    std::filesystem::path bbox_stats;
    std::filesystem::path background_dir;

    /// Standard file names inside an asset pack directory.
    static AssetPaths in_pack(const std::filesystem::path& dir);
};

struct GenerationConfig {
    std::size_t count = 1;
    std::uint64_t seed = 0;
    AssetPaths assets;
    DepthBounds depth;
    LightingRanges lighting;
    UprightBounds upright;
    int width = 455;
    int height = 256;
    double focal = 500.0;
    double shape_scale = 1.0;
    double texture_scale = 1.0;
    bool write_depth = false; // depth/<id>.bin float dumps

    void validate() const;
    Camera camera() const { return Camera::centered(width, height, focal); }

    nlohmann::json to_json() const;
    /// Relative asset paths are resolved against `base_dir`.
    static GenerationConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    static GenerationConfig load(const std::filesystem::path& path);
};

struct Background {
    std::string id;
    ImageRGB image;
};

/// Everything generation reads. Loaded once, then shared read-only between
/// workers.
struct Assets {
    PcaModel shape;
    PcaModel texture;
    RiggedMesh mesh;
    PartLabels parts;
    PoseLibrary poses;
    BBoxStats stats;
    std::vector<Background> backgrounds;

    static Assets load(const GenerationConfig& config);
    void validate() const;
};

struct DataSample {
    std::size_t index = 0;
    std::string id;
    ImageRGB image;           // composited, pre-quantization
    RenderOutput layer;       // rendered dog after G (rgb is black outside the mask)
    std::vector<Vec3> joints_3d; // camera space
    std::string pose_name;
    PoseParams pose;
    RootAngles root_angles;
    Eigen::VectorXd shape_coeffs;
    Eigen::VectorXd texture_coeffs;
    Lighting lighting;
    std::size_t background = 0;
    std::string background_id;
    Vec2 cp = Vec2::Zero();
    std::array<int, 2> translation{0, 0};
    PixelRect rendered_bbox; // before G
    int attempts = 1;

    nlohmann::json annotation() const;
};

inline constexpr int kMaxRenderAttempts = 10;

/// Deterministic in (config.seed, index).
DataSample generate_sample(const GenerationConfig& config, const Assets& assets, std::size_t index);

/// The same pipeline driven by a caller-owned RNG stream.
DataSample generate_sample(const GenerationConfig& config, const Assets& assets, Rng& rng, std::size_t index);

std::string sample_id(std::size_t index);

struct DatasetSummary {
    std::size_t generated = 0;
    std::size_t skipped = 0;
    std::filesystem::path manifest;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Writes rgb/, mask/, part/, ann/ (and depth/ when enabled) plus manifest.json under `out_dir`. Samples
/// whose files already exist are kept. Output bytes do not depend on
/// `workers`.
DatasetSummary generate_dataset(const GenerationConfig& config, const std::filesystem::path& out_dir, int workers = 1,
                                const ProgressFn& progress = {});

inline constexpr int kManifestSchemaVersion = 1;

} // namespace dogsynth
