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

#include <Eigen/Core>
#include <json.hpp>

#include "dogsynth/common.hpp"

namespace dogsynth {

enum class FeatureLayout : std::uint32_t {
    Texture = 1, // faces x d x d x d x 3, every value in [0,1]
    Shape = 2,   // 3 x n_vertices, unconstrained
};

/**
 * Describes how a flat feature vector is laid out.
 *
 * Texture: dim0 = face count, dim1 = per-face texel resolution d.
 * Shape:   dim0 = vertex count, dim1 unused (0).
 */
struct LayoutInfo {
    FeatureLayout kind = FeatureLayout::Shape;
    std::uint32_t dim0 = 0;
    std::uint32_t dim1 = 0;

    static LayoutInfo texture(std::uint32_t faces, std::uint32_t d) { return {FeatureLayout::Texture, faces, d}; }
    static LayoutInfo shape(std::uint32_t vertices) { return {FeatureLayout::Shape, vertices, 0}; }

    std::size_t feature_count() const;
    bool operator==(const LayoutInfo&) const = default;
};

/// Training samples, one per column.
struct SampleMatrix {
    Eigen::MatrixXd data;
    LayoutInfo layout;

    void validate() const;
};

/**
 * Linear model x = mean + basis * coeffs.
 *
 * Basis columns are orthonormal and ordered by decreasing variance. Each
 * column is sign-normalized so that its largest-magnitude entry is positive.
 */
struct PcaModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd basis;
    Eigen::VectorXd variances;
    LayoutInfo layout;

    Eigen::Index n_components() const { return basis.cols(); }
    Eigen::Index n_features() const { return mean.size(); }
    void validate() const;
};

PcaModel fit_pca(const SampleMatrix& samples);

/// mean + basis * coeffs, no clamping. Missing trailing coefficients are zero.
Eigen::VectorXd synthesize_raw(const PcaModel& model, const Eigen::VectorXd& coeffs);

/// As synthesize_raw, then clamped to [0,1] when the layout is Texture.
Eigen::VectorXd synthesize(const PcaModel& model, const Eigen::VectorXd& coeffs);

Eigen::VectorXd project(const PcaModel& model, const Eigen::VectorXd& sample);

/// Draws each coefficient from N(0, (scale*sigma_i)^2) truncated at +-2 of
/// that standard deviation.
Eigen::VectorXd sample_coefficients(const PcaModel& model, Rng& rng, double scale = 1.0);

void clamp_unit(Eigen::VectorXd& v);

/// max |E^T E - I|
double orthonormality_error(const Eigen::MatrixXd& basis);

// Binary asset: little-endian, magic "SCPC", f32 payload.
void save_pca(const PcaModel& model, const std::filesystem::path& path);
PcaModel load_pca(const std::filesystem::path& path);
nlohmann::json pca_to_json(const PcaModel& model);

/// Per-face d x d x d RGB texel grids, flattened face-major.
struct TextureTensor {
    std::uint32_t faces = 0;
    std::uint32_t d = 0;
    Eigen::VectorXd texels;

    static TextureTensor from_features(Eigen::VectorXd features, std::uint32_t faces, std::uint32_t d);

    std::size_t offset(std::size_t face, std::uint32_t i, std::uint32_t j, std::uint32_t k) const
    {
        return (((face * d + i) * d + j) * d + k) * 3;
    }
    Vec3 texel(std::size_t face, std::uint32_t i, std::uint32_t j, std::uint32_t k) const
    {
        const std::size_t o = offset(face, i, j, k);
        return {texels[o], texels[o + 1], texels[o + 2]};
    }
};

} // namespace dogsynth
