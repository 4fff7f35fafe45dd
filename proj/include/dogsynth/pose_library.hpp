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

#include "dogsynth/skeleton.hpp"

namespace dogsynth {

struct NamedPose {
    std::string name;
    std::vector<Quat> rotations; // one per skeleton joint
};

struct PoseLibrary {
    std::vector<NamedPose> poses;

    void validate(const Skeleton& skeleton) const;
};

// JSON format:
//   {"poses": [{"name": "stand", "rotations_deg": {"<joint>": [rx, ry, rz], ...}}]}
// Angles are intrinsic XYZ Euler degrees; joints not listed keep identity.
PoseLibrary load_pose_library(const std::filesystem::path& path, const Skeleton& skeleton);
void save_pose_library(const std::filesystem::path& path, const PoseLibrary& library, const Skeleton& skeleton);

/// A standing pose plus a walk cycle of `walk_phases` frames with head and
/// tail variation. Requires the procedural dog's joint names.
PoseLibrary procedural_pose_library(const Skeleton& skeleton, int walk_phases = 16);

} // namespace dogsynth
