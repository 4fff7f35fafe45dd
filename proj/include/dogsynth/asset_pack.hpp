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

#include "dogsynth/dataset.hpp"
#include "dogsynth/dog.hpp"

namespace dogsynth {

// Self-contained asset pack built from procedural sources: the canonical dog,
// jittered body variants for the shape model, procedural coats for the
// texture model, a pose library, synthetic box statistics and backgrounds.

struct AssetPackOptions {
    std::uint64_t seed = 7;
    int face_budget = 4848;
    std::uint32_t texture_d = 4;
    int shape_variants = 8;
    double shape_jitter = 0.12;
    int texture_samples = 12;
    int backgrounds = 8;
    int background_width = 640;
    int background_height = 360;
    int walk_phases = 16;
    std::size_t stats_entries = 2000;
};

struct AssetPackSummary {
    AssetPaths paths;
    std::filesystem::path config;
    int faces = 0;
    int vertices = 0;
    Eigen::Index shape_components = 0;
    Eigen::Index texture_components = 0;
    std::size_t poses = 0;
};

AssetPackSummary synthesize_asset_pack(const std::filesystem::path& out_dir, const AssetPackOptions& options = {});

/// One column per coat. Texels are evaluated at rest-pose surface points.
SampleMatrix procedural_textures(const RiggedMesh& mesh, const PartLabels& parts, int count, std::uint32_t d,
                                 std::uint64_t seed);

/// Sky gradient over ground with a few blurred shapes; deterministic in seed.
ImageRGB procedural_background(int width, int height, std::uint64_t seed);

} // namespace dogsynth
