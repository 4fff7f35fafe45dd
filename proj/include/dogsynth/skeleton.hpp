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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dogsynth/common.hpp"
#include "dogsynth/pca.hpp"

namespace dogsynth {

struct Joint {
    std::string name;
    int parent = -1;
    Transform rest_local = Transform::Identity();
};

/// Joints in topological order: parent index < child index, root at 0.
struct Skeleton {
    std::vector<Joint> joints;

    std::size_t size() const { return joints.size(); }
    int find(const std::string& name) const;
    std::vector<Transform> rest_globals() const;
    void validate() const;
};

/// Dense n_vertices x n_joints, row-stochastic, at most 4 nonzeros per row.
struct SkinningWeights {
    using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Matrix w;

    static constexpr int kMaxInfluences = 4;
    void validate() const;
};

using Face = std::array<std::uint32_t, 3>;

struct RiggedMesh {
    std::vector<Vec3> vertices; // rest pose
    std::vector<Face> faces;
    Skeleton skeleton;
    SkinningWeights weights;
    std::vector<Transform> inverse_bind; // inverse rest globals, one per joint

    /// Recompute inverse_bind from the skeleton's rest pose.
    void refresh_bind();
    void validate() const;
};

/// Joint rotations, root orientation and root distance from the camera.
struct PoseParams {
    std::vector<Quat> joint_rotations;
    Quat root_rotation = Quat::Identity();
    double root_depth = 0.0;

    static PoseParams identity(std::size_t joints);
};

struct FkResult {
    std::vector<Transform> globals;
    std::vector<Vec3> positions;
};

/// Placement of the skeleton root in camera space: translate to (0,0,-depth)
/// after applying the root rotation.
Transform root_placement(const PoseParams& pose);

FkResult forward_kinematics(const Skeleton& skeleton, const PoseParams& pose);

/// v' = sum_j W[v][j] * (G_j * inverse_bind_j) * v
std::vector<Vec3> apply_lbs(const RiggedMesh& mesh, std::span<const Transform> globals);

struct PartLabels {
    std::vector<int> vertex;
    std::vector<int> face;
};

/// Vertex label = argmax of its weight row; face label = majority of its
/// three vertex labels. Ties go to the lowest joint index.
PartLabels part_labels(const SkinningWeights& weights, std::span<const Face> faces);

/// Rebuild a rigged mesh around new rest vertices (same topology). Joint rest
/// positions follow the skin: each joint moves by the weight-averaged
/// displacement of the vertices it influences.
RiggedMesh with_shape(const RiggedMesh& base, std::span<const Vec3> vertices);

/// Shape PCA over flattened vertex coordinates of same-topology meshes.
PcaModel synthesize_shape_pca(std::span<const RiggedMesh> meshes);

Eigen::VectorXd flatten_vertices(std::span<const Vec3> vertices);
std::vector<Vec3> unflatten_vertices(const Eigen::VectorXd& flat);

// Root orientation sampling. Yaw is unrestricted; pitch and roll are bounded
// so the animal stays mostly upright.
struct UprightBounds {
    double max_pitch_deg = 15.0;
    double max_roll_deg = 15.0;
};

struct RootAngles {
    double yaw_deg = 0.0;
    double pitch_deg = 0.0;
    double roll_deg = 0.0;
};

/// R = Rz(roll) * Rx(pitch) * Ry(yaw); y is up, x is the animal's forward axis
/// at zero yaw.
Quat root_rotation_from(const RootAngles& angles);
RootAngles sample_root_angles(Rng& rng, const UprightBounds& bounds);

/// Intrinsic XYZ Euler angles in degrees: R = Rx * Ry * Rz.
Quat euler_xyz_deg(double rx, double ry, double rz);
Vec3 to_euler_xyz_deg(const Quat& q);

} // namespace dogsynth
