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
#include "dogsynth/pose_library.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

namespace dogsynth {

using nlohmann::json;

void PoseLibrary::validate(const Skeleton& skeleton) const
{
    require(!poses.empty(), "pose library is empty");
    for (const auto& p : poses) {
        require(p.rotations.size() == skeleton.size(), "pose '" + p.name + "' does not match the skeleton joint count");
        for (const auto& q : p.rotations)
            require(std::abs(q.norm() - 1.0) <= 1e-6, "pose '" + p.name + "' contains a non-unit rotation");
    }
}

PoseLibrary load_pose_library(const std::filesystem::path& path, const Skeleton& skeleton)
{
    std::ifstream is(path);
    if (!is)
        throw IoError("cannot open " + path.string());
    PoseLibrary lib;
    try {
        const json doc = json::parse(is);
        for (const auto& entry : doc.at("poses")) {
            NamedPose pose;
            pose.name = entry.at("name").get<std::string>();
            pose.rotations.assign(skeleton.size(), Quat::Identity());
            for (const auto& [joint, angles] : entry.at("rotations_deg").items()) {
                const int j = skeleton.find(joint);
                if (j < 0)
                    throw FormatError("pose '" + pose.name + "' references unknown joint '" + joint + "'");
                const auto e = angles.get<std::vector<double>>();
                if (e.size() != 3)
                    throw FormatError("pose '" + pose.name + "': joint '" + joint + "' needs 3 Euler angles");
                pose.rotations[j] = euler_xyz_deg(e[0], e[1], e[2]);
            }
            lib.poses.push_back(std::move(pose));
        }
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    lib.validate(skeleton);
    return lib;
}

void save_pose_library(const std::filesystem::path& path, const PoseLibrary& library, const Skeleton& skeleton)
{
    library.validate(skeleton);
    json poses = json::array();
    for (const auto& p : library.poses) {
        json rot = json::object();
        for (std::size_t j = 0; j < skeleton.size(); ++j) {
            if (p.rotations[j].angularDistance(Quat::Identity()) < 1e-12)
                continue;
            const Vec3 e = to_euler_xyz_deg(p.rotations[j]);
            rot[skeleton.joints[j].name] = {e.x(), e.y(), e.z()};
        }
        poses.push_back({{"name", p.name}, {"rotations_deg", std::move(rot)}});
    }
    std::ofstream os(path, std::ios::trunc);
    if (!os)
        throw IoError("cannot open " + path.string() + " for writing");
    os << json{{"format", "dogsynth-poses"}, {"version", 1}, {"poses", std::move(poses)}}.dump(1) << '\n';
}

PoseLibrary procedural_pose_library(const Skeleton& skeleton, int walk_phases)
{
    require(walk_phases >= 1, "walk cycle needs at least one phase");
    auto idx = [&](const char* name) {
        const int j = skeleton.find(name);
        if (j < 0)
            throw InvalidArgument(std::string("procedural poses need joint '") + name + "'");
        return static_cast<std::size_t>(j);
    };
    auto blank = [&](std::string name) {
        NamedPose p;
        p.name = std::move(name);
        p.rotations.assign(skeleton.size(), Quat::Identity());
        return p;
    };

    PoseLibrary lib;
    lib.poses.push_back(blank("stand"));

    {
        auto p = blank("stand_head_down");
        p.rotations[idx("neck")] = euler_xyz_deg(0, 0, -30);
        p.rotations[idx("head")] = euler_xyz_deg(0, 0, -10);
        lib.poses.push_back(std::move(p));
    }
    {
        auto p = blank("stand_look_left");
        p.rotations[idx("neck")] = euler_xyz_deg(0, 25, 0);
        p.rotations[idx("head")] = euler_xyz_deg(0, 15, 5);
        p.rotations[idx("tail1")] = euler_xyz_deg(0, 0, 20);
        lib.poses.push_back(std::move(p));
    }
    {
        auto p = blank("stand_alert");
        p.rotations[idx("neck")] = euler_xyz_deg(0, 0, 12);
        p.rotations[idx("jaw")] = euler_xyz_deg(0, 0, -12);
        p.rotations[idx("tail1")] = euler_xyz_deg(0, 0, 35);
        p.rotations[idx("tail2")] = euler_xyz_deg(0, 0, 10);
        lib.poses.push_back(std::move(p));
    }

    // Trot: diagonal leg pairs in phase.
    const char* uppers[4] = {"front_left_upper", "front_right_upper", "back_left_upper", "back_right_upper"};
    const char* lowers[4] = {"front_left_lower", "front_right_lower", "back_left_lower", "back_right_lower"};
    const char* paws[4] = {"front_left_paw", "front_right_paw", "back_left_paw", "back_right_paw"};
    const double offsets[4] = {0.0, std::numbers::pi, std::numbers::pi, 0.0};
    const double knee_sign[4] = {-1.0, -1.0, 1.0, 1.0};
    for (int k = 0; k < walk_phases; ++k) {
        const double phase = 2.0 * std::numbers::pi * k / walk_phases;
        auto p = blank("walk_" + std::to_string(k));
        for (int leg = 0; leg < 4; ++leg) {
            const double s = std::sin(phase + offsets[leg]);
            const double lift = std::max(0.0, std::sin(phase + offsets[leg] + std::numbers::pi / 2));
            p.rotations[idx(uppers[leg])] = euler_xyz_deg(0, 0, 22.0 * s);
            p.rotations[idx(lowers[leg])] = euler_xyz_deg(0, 0, knee_sign[leg] * 25.0 * lift);
            p.rotations[idx(paws[leg])] = euler_xyz_deg(0, 0, -knee_sign[leg] * 10.0 * lift);
        }
        p.rotations[idx("neck")] = euler_xyz_deg(0, 0, 4.0 * std::sin(2.0 * phase));
        p.rotations[idx("spine2")] = euler_xyz_deg(0, 3.0 * std::sin(phase), 0);
        for (const char* t : {"tail1", "tail2", "tail3", "tail4"})
            p.rotations[idx(t)] = euler_xyz_deg(0, 12.0 * std::sin(phase), 0);
        lib.poses.push_back(std::move(p));
    }
    lib.validate(skeleton);
    return lib;
}

} // namespace dogsynth
