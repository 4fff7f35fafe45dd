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

#include "dogsynth/skeleton.hpp"

namespace dogsynth {

// Procedural quadruped used in place of scanned, artist-refined assets.
//
// Body frame: +x forward, +y up, +z to the animal's left; the root joint sits
// at the torso center. Lengths are in meters.
struct DogConfig {
    double body_length = 0.80;
    double torso_radius = 0.15;
    double leg_length = 0.50;
    double leg_radius = 0.040;
    double neck_length = 0.24;
    double head_length = 0.24;
    double head_radius = 0.075;
    double tail_length = 0.36;
    double tail_radius = 0.025;
    double ear_length = 0.08;

    int face_budget = 4848;
    std::uint64_t seed = 0;
    // Relative per-proportion jitter drawn from the seed; 0 gives the nominal
    // dog. Topology never depends on it.
    double jitter = 0.0;
};

inline constexpr std::size_t kDogJointCount = 25;

struct GeneratedDog {
    RiggedMesh mesh;
    int requested_faces = 0;
    int achieved_faces = 0;
    int ring_sides = 0;
};

GeneratedDog generate_canonical_dog(const DogConfig& config);

/// Joint names of the procedural skeleton, in index order.
const std::vector<std::string>& dog_joint_names();

// Wavefront OBJ (v/f records) plus sidecar JSON for skeleton and weights.
void save_obj(const std::filesystem::path& path, std::span<const Vec3> vertices, std::span<const Face> faces);
void load_obj(const std::filesystem::path& path, std::vector<Vec3>& vertices, std::vector<Face>& faces);
void save_rig_json(const std::filesystem::path& path, const RiggedMesh& mesh);
RiggedMesh load_rigged_mesh(const std::filesystem::path& obj_path, const std::filesystem::path& rig_path);

} // namespace dogsynth
