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

#include <array>
#include <filesystem>
#include <vector>

#include "dogsynth/common.hpp"
#include "dogsynth/image.hpp"

namespace dogsynth {

// Placement prior built from real-image bounding boxes: the box-area fraction
// drives camera distance, the box centers drive the 2D position.

struct BBoxEntry {
    double size_fraction = 0.0; // box area / image area, in (0,1]
    double cx = 0.0;            // normalized box center, [0,1]
    double cy = 0.0;
};

struct BBoxStats {
    std::vector<BBoxEntry> entries;

    void validate() const;
    double min_size() const;
    double max_size() const;
};

struct DepthBounds {
    double near = 1.5;
    double far = 8.0;

    void validate() const;
};

/// Linear, decreasing map from box size to depth: largest box -> near,
/// smallest -> far. When all sizes coincide the midpoint is returned.
double depth_for_size(double size_fraction, double s_min, double s_max, const DepthBounds& bounds);

double sample_root_depth(const BBoxStats& stats, const DepthBounds& bounds, Rng& rng);

/// Entries whose size lies in [s(1-w), s(1+w)], with w starting at 0.1 and
/// growing x1.5 until at least two match or the window spans every entry.
struct WindowSelection {
    std::vector<std::size_t> indices;
    double half_width = 0.1;
    bool used_all = false;
};
WindowSelection select_window(const BBoxStats& stats, double rendered_box_size);

struct CenterGaussian {
    Vec2 mean = Vec2::Zero();
    Vec2 stddev = Vec2::Zero(); // diagonal
};
CenterGaussian fit_center_gaussian(const BBoxStats& stats, const WindowSelection& selection);

/// Draws a target center cp (normalized image coordinates).
Vec2 sample_center(const BBoxStats& stats, double rendered_box_size, Rng& rng);

/// Integer pixel shift moving the box center toward cp*(W,H). Each axis is
/// limited independently so the shift never pushes the box further out of
/// the image; an axis where the box is larger than the image does not move.
std::array<int, 2> clamp_translation(const PixelRect& box, const Vec2& cp, int width, int height);

struct DeriveResult {
    BBoxStats stats;
    std::size_t records = 0;
    std::size_t skipped = 0;
};

/// Builds stats from JSON-lines records `{image_w, image_h, joints: [[x,y],...]}`.
/// Records with fewer than 2 in-image joints (or a zero-area box) are skipped.
DeriveResult derive_bbox_stats(const std::filesystem::path& jsonl);

// CSV with header `size_fraction,cx,cy`.
BBoxStats load_bbox_stats_csv(const std::filesystem::path& path);
void save_bbox_stats_csv(const BBoxStats& stats, const std::filesystem::path& path);

/// Synthetic stand-in for real statistics: log-normal sizes, centers biased
/// toward the middle of the frame.
BBoxStats synthetic_bbox_stats(std::size_t count = 2000, std::uint64_t seed = 2021);

} // namespace dogsynth
