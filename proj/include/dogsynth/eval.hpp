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
#include <string>
#include <vector>

#include <json.hpp>

#include "dogsynth/image.hpp"

namespace dogsynth {

// Heatmaps hold values in [0,1]; masks hold 0 or 1.
using Heatmap = Plane<float>;
using BinaryMask = Plane<std::uint8_t>;

struct ThresholdResult {
    double threshold = 0.0;
    int iterations = 0;
    bool converged = false;
    BinaryMask mask; // hm >= threshold
};

/**
 * Isodata (intermeans) iteration on the raw pixel values: split at t into
 * values < t and values >= t, move t to the midpoint of the two means, and
 * repeat until t moves less than `tol` and the split no longer changes.
 * An empty side contributes the mean of the other side, so a constant
 * heatmap settles on its own value.
 */
ThresholdResult iterative_threshold(const Heatmap& hm, double t0 = 0.7, double tol = 1e-4, int max_iter = 100);

/// Pixels >= t.
BinaryMask binarize(const Heatmap& hm, double t);

struct Confusion {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
    long long tn = 0;
};
Confusion confusion(const BinaryMask& pred, const BinaryMask& gt);

// Both-empty masks count as perfect agreement (1.0) for the overlap scores.
double iou(const BinaryMask& a, const BinaryMask& b);
double dice_f2(const BinaryMask& a, const BinaryMask& b);
double f_beta(const BinaryMask& pred, const BinaryMask& gt, double beta);
double pixel_accuracy(const BinaryMask& a, const BinaryMask& gt);

double iou(const Confusion& c);
double dice(const Confusion& c);
double f_beta(const Confusion& c, double beta);
double pixel_accuracy(const Confusion& c);

/// A prediction read from disk. Masks whose values are all 0 or 1 (or 0 and
/// 255 in 8-bit files) are treated as already binary.
struct LoadedPrediction {
    Heatmap heatmap;
    bool binary = false;
    std::size_t clamped = 0; // values moved into [0,1]
};

/// 8-bit PNG (v/255, colour averaged) or an SCFP float dump.
LoadedPrediction load_prediction(const std::filesystem::path& path);

/// Ground truth: 0/1 or 0/255 masks; other 8-bit data is split at 0.5.
BinaryMask load_ground_truth(const std::filesystem::path& path);

struct ImageMetrics {
    std::string name;
    int width = 0;
    int height = 0;
    bool binary_input = false;
    double threshold = 0.0; // NaN for binary inputs
    int iterations = 0;
    Confusion counts;
    double iou = 0.0;
    double dice = 0.0;
    double f2 = 0.0;          // F-beta with beta = 2
    double accuracy_pct = 0.0;
};

struct MetricReport {
    double t0 = 0.7;
    std::vector<ImageMetrics> images; // sorted by name
    double mean_iou = 0.0;
    double mean_dice = 0.0;
    double mean_f2 = 0.0;
    double mean_accuracy_pct = 0.0;
    Confusion pooled; // counts summed over every image
    std::vector<std::string> unmatched_pred;
    std::vector<std::string> unmatched_gt;
    std::vector<std::string> warnings;
    std::vector<std::string> failures; // pairs that could not be scored

    nlohmann::json to_json() const;
    void write_json(const std::filesystem::path& path) const;
    void write_csv(const std::filesystem::path& path) const;
};

/// Pairs files by stem (.png or .bin) and scores each pair.
MetricReport evaluate_dirs(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir,
                           double t0 = 0.7, int workers = 1);

/// Means are arithmetic over images; `pooled` sums their counts.
void finalize_means(MetricReport& report);

} // namespace dogsynth
