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
#include "dogsynth/dog.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace dogsynth {

namespace {

// Joint indices of the procedural skeleton.
enum J : int {
    kRoot = 0,
    kSpine1,
    kSpine2,
    kSpine3,
    kNeck,
    kHead,
    kJaw,
    kEarL,
    kEarR,
    kFrontLeftUpper,
    kFrontLeftLower,
    kFrontLeftPaw,
    kFrontRightUpper,
    kFrontRightLower,
    kFrontRightPaw,
    kBackLeftUpper,
    kBackLeftLower,
    kBackLeftPaw,
    kBackRightUpper,
    kBackRightLower,
    kBackRightPaw,
    kTail1,
    kTail2,
    kTail3,
    kTail4,
};

constexpr int kMinFaceBudget = 200;
constexpr int kMaxFaceBudget = 2'000'000;
constexpr int kMinRingsPerTube = 2;

struct Bone {
    int joint;
    Vec3 a;
    Vec3 b;
};

// Radius at arc-length fraction t, piecewise linear through control points.
struct Profile {
    std::vector<std::pair<double, double>> points;

    double at(double t) const
    {
        if (t <= points.front().first)
            return points.front().second;
        for (std::size_t i = 1; i < points.size(); ++i) {
            if (t <= points[i].first) {
                const auto [t0, r0] = points[i - 1];
                const auto [t1, r1] = points[i];
                return r0 + (r1 - r0) * (t - t0) / (t1 - t0);
            }
        }
        return points.back().second;
    }
};

// A generalized cylinder swept along a polyline, capped at both ends.
struct Tube {
    std::vector<Vec3> path;
    Profile radius;
    std::vector<Bone> bones;
    double share = 0.0; // fraction of the ring budget
    int rings = 0;
};

struct Polyline {
    std::vector<Vec3> pts;
    std::vector<double> cum;

    explicit Polyline(std::vector<Vec3> p) : pts(std::move(p))
    {
        cum.assign(pts.size(), 0.0);
        for (std::size_t i = 1; i < pts.size(); ++i)
            cum[i] = cum[i - 1] + (pts[i] - pts[i - 1]).norm();
    }
    double length() const { return cum.back(); }

    Vec3 point(double t) const
    {
        const double s = std::clamp(t, 0.0, 1.0) * length();
        for (std::size_t i = 1; i < pts.size(); ++i) {
            if (s <= cum[i] || i + 1 == pts.size()) {
                const double seg = cum[i] - cum[i - 1];
                const double u = seg > 0.0 ? (s - cum[i - 1]) / seg : 0.0;
                return pts[i - 1] + u * (pts[i] - pts[i - 1]);
            }
        }
        return pts.back();
    }

    // Central difference over a short window smooths the corners.
    Vec3 tangent(double t) const
    {
        constexpr double h = 0.03;
        const double t0 = std::max(0.0, t - h);
        const double t1 = std::min(1.0, t + h);
        return (point(t1) - point(t0)).normalized();
    }
};

double segment_distance(const Vec3& p, const Vec3& a, const Vec3& b)
{
    const Vec3 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double u = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (p - (a + u * ab)).norm();
}

void validate_config(const DogConfig& c)
{
    const std::pair<const char*, double> lengths[] = {
        {"body_length", c.body_length}, {"torso_radius", c.torso_radius}, {"leg_length", c.leg_length},
        {"leg_radius", c.leg_radius},   {"neck_length", c.neck_length},   {"head_length", c.head_length},
        {"head_radius", c.head_radius}, {"tail_length", c.tail_length},   {"tail_radius", c.tail_radius},
        {"ear_length", c.ear_length},
    };
    for (const auto& [name, v] : lengths)
        if (!(std::isfinite(v) && v > 0.0))
            throw InvalidArgument(std::string("dog proportion '") + name + "' must be a positive length");
    if (c.face_budget < kMinFaceBudget || c.face_budget > kMaxFaceBudget)
        throw InvalidArgument("face budget " + std::to_string(c.face_budget) + " is outside the achievable range [" +
                              std::to_string(kMinFaceBudget) + ", " + std::to_string(kMaxFaceBudget) + "]");
    if (!(c.jitter >= 0.0 && c.jitter < 0.5))
        throw InvalidArgument("jitter must lie in [0, 0.5)");
}

DogConfig jittered(const DogConfig& c)
{
    DogConfig out = c;
    if (c.jitter == 0.0)
        return out;
    Rng rng(c.seed);
    for (double* v : {&out.body_length, &out.torso_radius, &out.leg_length, &out.leg_radius, &out.neck_length,
                      &out.head_length, &out.head_radius, &out.tail_length, &out.tail_radius, &out.ear_length})
        *v *= 1.0 + c.jitter * uniform(rng, -1.0, 1.0);
    return out;
}

// Sides per ring and total ring count; faces = 2 * sides * rings.
std::pair<int, int> choose_resolution(int budget, int tube_count)
{
    const double target_sides = std::sqrt(budget / 34.0);
    int best_sides = 0;
    int best_rings = 0;
    long best_err = 0;
    double best_dev = 0.0;
    for (int sides = 4; sides <= 64; sides += 2) {
        const int rings = static_cast<int>(std::lround(budget / (2.0 * sides)));
        if (rings < kMinRingsPerTube * tube_count)
            continue;
        const long err = std::labs(static_cast<long>(budget) - 2L * sides * rings);
        const double dev = std::abs(sides - target_sides);
        if (best_sides == 0 || err < best_err || (err == best_err && dev < best_dev)) {
            best_sides = sides;
            best_rings = rings;
            best_err = err;
            best_dev = dev;
        }
    }
    if (best_sides == 0)
        throw InvalidArgument("face budget " + std::to_string(budget) + " cannot be met by the procedural dog");
    return {best_sides, best_rings};
}

void allocate_rings(std::vector<Tube>& tubes, int total)
{
    const int extra = total - kMinRingsPerTube * static_cast<int>(tubes.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    int assigned = 0;
    for (std::size_t i = 0; i < tubes.size(); ++i) {
        const double exact = tubes[i].share * extra;
        const int whole = static_cast<int>(std::floor(exact));
        tubes[i].rings = kMinRingsPerTube + whole;
        assigned += whole;
        remainders.emplace_back(exact - whole, i);
    }
    // Largest remainder; stable on index for ties.
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int k = 0; k < extra - assigned; ++k)
        tubes[remainders[static_cast<std::size_t>(k) % remainders.size()].second].rings += 1;
}

struct Layout {
    std::vector<Vec3> joint_pos;
    std::vector<Tube> tubes;
};

Layout build_layout(const DogConfig& c)
{
    const double L = c.body_length;
    const double rt = c.torso_radius;
    const double ll = c.leg_length;
    const double lr = c.leg_radius;
    const double hl = c.head_length;
    const double hr = c.head_radius;

    std::vector<Vec3> p(kDogJointCount);
    p[kRoot] = Vec3::Zero();
    p[kSpine1] = Vec3(0.14 * L, 0.0, 0.0);
    p[kSpine2] = Vec3(0.27 * L, 0.0, 0.0);
    p[kSpine3] = Vec3(0.38 * L, 0.0, 0.0);
    const Vec3 neck_dir = Vec3(0.6, 0.8, 0.0).normalized();
    p[kNeck] = Vec3(0.42 * L, 0.35 * rt, 0.0);
    p[kHead] = p[kNeck] + c.neck_length * neck_dir;
    const Vec3 snout_dir = Vec3(1.0, -0.25, 0.0).normalized();
    p[kJaw] = p[kHead] + Vec3(0.35 * hl, -0.45 * hr, 0.0);
    p[kEarL] = p[kHead] + Vec3(-0.1 * hl, 0.8 * hr, 0.5 * hr);
    p[kEarR] = p[kHead] + Vec3(-0.1 * hl, 0.8 * hr, -0.5 * hr);

    const double shoulder_y = -0.35 * rt;
    const double ground_y = shoulder_y - ll;
    struct LegSpec {
        int upper;
        double x;
        double z;
        bool front;
    };
    const LegSpec legs[] = {
        {kFrontLeftUpper, 0.33 * L, 0.55 * rt, true},
        {kFrontRightUpper, 0.33 * L, -0.55 * rt, true},
        {kBackLeftUpper, -0.33 * L, 0.55 * rt, false},
        {kBackRightUpper, -0.33 * L, -0.55 * rt, false},
    };
    for (const auto& leg : legs) {
        const Vec3 upper(leg.x, shoulder_y, leg.z);
        p[leg.upper] = upper;
        if (leg.front) {
            p[leg.upper + 1] = upper + Vec3(-0.02, -0.45 * ll, 0.0);
            p[leg.upper + 2] = upper + Vec3(0.0, -0.85 * ll, 0.0);
        } else {
            p[leg.upper + 1] = upper + Vec3(0.05, -0.5 * ll, 0.0);
            p[leg.upper + 2] = upper + Vec3(-0.02, -0.85 * ll, 0.0);
        }
    }

    const Vec3 tail_dir = Vec3(-0.75, 0.45, 0.0).normalized();
    p[kTail1] = Vec3(-0.47 * L, 0.35 * rt, 0.0);
    for (int k = 1; k < 4; ++k)
        p[kTail1 + k] = p[kTail1] + (k * 0.25 * c.tail_length) * tail_dir + Vec3(0.0, -0.02 * k * k * c.tail_length, 0.0);
    const Vec3 tail_tip = p[kTail1] + c.tail_length * tail_dir + Vec3(0.0, -0.25 * c.tail_length, 0.0);

    const Vec3 torso_back(-0.52 * L, 0.0, 0.0);
    const Vec3 torso_front(0.52 * L, 0.0, 0.0);
    const Bone root_bone{kRoot, torso_back, p[kSpine1]};
    const Bone spine3_bone{kSpine3, p[kSpine3], torso_front};
    const Bone head_bone{kHead, p[kHead], p[kHead] + 0.6 * hl * Vec3::UnitX()};
    const Vec3 nose = p[kHead] + hl * snout_dir;

    Layout out;
    out.joint_pos = p;
    auto& tubes = out.tubes;

    // Torso: ellipsoid-like radius profile along the body axis.
    {
        Tube t;
        t.path = {torso_back, torso_front};
        for (int i = 0; i <= 10; ++i) {
            const double u = i / 10.0;
            t.radius.points.emplace_back(u, rt * std::sqrt(1.0 - 0.85 * (2 * u - 1) * (2 * u - 1)));
        }
        t.bones = {root_bone, {kSpine1, p[kSpine1], p[kSpine2]}, {kSpine2, p[kSpine2], p[kSpine3]}, spine3_bone};
        t.share = 0.20;
        tubes.push_back(std::move(t));
    }
    // Neck.
    {
        Tube t;
        t.path = {p[kNeck] - 0.35 * c.neck_length * neck_dir, p[kNeck], p[kHead]};
        t.radius.points = {{0.0, 0.55 * rt}, {1.0, 0.8 * hr}};
        t.bones = {spine3_bone, {kNeck, p[kNeck], p[kHead]}, head_bone};
        t.share = 0.07;
        tubes.push_back(std::move(t));
    }
    // Head with snout.
    {
        Tube t;
        t.path = {p[kHead] - 0.3 * hl * snout_dir, p[kHead], nose};
        t.radius.points = {{0.0, 0.7 * hr}, {0.3, hr}, {0.55, 0.75 * hr}, {1.0, 0.4 * hr}};
        t.bones = {{kNeck, p[kNeck], p[kHead]}, head_bone, {kJaw, p[kJaw], nose + Vec3(0.0, -0.3 * hr, 0.0)}};
        t.share = 0.13;
        tubes.push_back(std::move(t));
    }
    // Legs, three segments each.
    for (const auto& leg : legs) {
        const int u = leg.upper;
        const Vec3 toe(leg.x + (leg.front ? 0.06 : 0.05), ground_y, leg.z);
        Tube t;
        t.path = {p[u] + Vec3(0.0, 0.3 * rt, 0.0), p[u], p[u + 1], p[u + 2], toe};
        t.radius.points = {{0.0, 1.35 * lr}, {0.2, 1.2 * lr}, {0.55, lr}, {0.85, 0.75 * lr}, {1.0, 0.85 * lr}};
        t.bones = {leg.front ? spine3_bone : root_bone,
                   {u, p[u], p[u + 1]},
                   {u + 1, p[u + 1], p[u + 2]},
                   {u + 2, p[u + 2], toe}};
        t.share = 0.11;
        tubes.push_back(std::move(t));
    }
    // Tail.
    {
        Tube t;
        t.path = {p[kTail1] + 0.1 * c.tail_length * Vec3::UnitX(), p[kTail1], p[kTail2], p[kTail3], p[kTail4], tail_tip};
        t.radius.points = {{0.0, 1.2 * c.tail_radius}, {0.15, c.tail_radius}, {1.0, 0.35 * c.tail_radius}};
        t.bones = {root_bone,
                   {kTail1, p[kTail1], p[kTail2]},
                   {kTail2, p[kTail2], p[kTail3]},
                   {kTail3, p[kTail3], p[kTail4]},
                   {kTail4, p[kTail4], tail_tip}};
        t.share = 0.10;
        tubes.push_back(std::move(t));
    }
    // Ear stubs.
    for (int ear : {kEarL, kEarR}) {
        const double side = ear == kEarL ? 1.0 : -1.0;
        const Vec3 tip = p[ear] + c.ear_length * Vec3(-0.3, 1.0, 0.25 * side).normalized();
        Tube t;
        t.path = {p[ear] - 0.3 * c.ear_length * Vec3::UnitY(), p[ear], tip};
        t.radius.points = {{0.0, 0.35 * hr}, {1.0, 0.08 * hr}};
        t.bones = {head_bone, {ear, p[ear], tip}};
        t.share = 0.03;
        tubes.push_back(std::move(t));
    }
    return out;
}

} // namespace

const std::vector<std::string>& dog_joint_names()
{
    static const std::vector<std::string> names = {
        "root",
        "spine1",
        "spine2",
        "spine3",
        "neck",
        "head",
        "jaw",
        "ear_l",
        "ear_r",
        "front_left_upper",
        "front_left_lower",
        "front_left_paw",
        "front_right_upper",
        "front_right_lower",
        "front_right_paw",
        "back_left_upper",
        "back_left_lower",
        "back_left_paw",
        "back_right_upper",
        "back_right_lower",
        "back_right_paw",
        "tail1",
        "tail2",
        "tail3",
        "tail4",
    };
    return names;
}

GeneratedDog generate_canonical_dog(const DogConfig& config)
{
    validate_config(config);
    const DogConfig c = jittered(config);
    Layout layout = build_layout(c);

    static const int kParents[kDogJointCount] = {
        -1, kRoot, kSpine1, kSpine2, kSpine3, kNeck, kHead, kHead, kHead,
        kSpine3, kFrontLeftUpper, kFrontLeftLower,
        kSpine3, kFrontRightUpper, kFrontRightLower,
        kRoot, kBackLeftUpper, kBackLeftLower,
        kRoot, kBackRightUpper, kBackRightLower,
        kRoot, kTail1, kTail2, kTail3,
    };

    GeneratedDog out;
    RiggedMesh& mesh = out.mesh;
    const auto& names = dog_joint_names();
    for (std::size_t j = 0; j < kDogJointCount; ++j) {
        Joint joint;
        joint.name = names[j];
        joint.parent = kParents[j];
        const Vec3 parent_pos = joint.parent < 0 ? Vec3::Zero() : layout.joint_pos[joint.parent];
        joint.rest_local = Transform::Identity();
        joint.rest_local.translate(layout.joint_pos[j] - parent_pos);
        mesh.skeleton.joints.push_back(std::move(joint));
    }

    const auto [sides, total_rings] = choose_resolution(config.face_budget, static_cast<int>(layout.tubes.size()));
    allocate_rings(layout.tubes, total_rings);

    std::vector<std::vector<std::pair<int, double>>> influences;
    for (const Tube& tube : layout.tubes) {
        const Polyline line(tube.path);
        const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
        for (int r = 0; r < tube.rings; ++r) {
            const double t = static_cast<double>(r) / (tube.rings - 1);
            const Vec3 center = line.point(t);
            const Vec3 tangent = line.tangent(t);
            Vec3 n1 = Vec3::UnitZ().cross(tangent);
            if (n1.norm() < 0.2)
                n1 = Vec3::UnitX().cross(tangent);
            n1.normalize();
            const Vec3 n2 = tangent.cross(n1);
            const double radius = tube.radius.at(t);
            for (int k = 0; k < sides; ++k) {
                const double theta = 2.0 * std::numbers::pi * k / sides;
                mesh.vertices.push_back(center + radius * (std::cos(theta) * n1 + std::sin(theta) * n2));
            }
        }
        const auto start_cap = static_cast<std::uint32_t>(mesh.vertices.size());
        mesh.vertices.push_back(line.point(0.0));
        mesh.vertices.push_back(line.point(1.0));
        const std::uint32_t end_cap = start_cap + 1;

        auto ring_vertex = [&](int r, int k) {
            return base + static_cast<std::uint32_t>(r * sides + (k % sides));
        };
        for (int r = 0; r + 1 < tube.rings; ++r) {
            for (int k = 0; k < sides; ++k) {
                const auto a = ring_vertex(r, k), b = ring_vertex(r, k + 1);
                const auto cc = ring_vertex(r + 1, k), d = ring_vertex(r + 1, k + 1);
                mesh.faces.push_back({a, b, d});
                mesh.faces.push_back({a, d, cc});
            }
        }
        for (int k = 0; k < sides; ++k) {
            mesh.faces.push_back({start_cap, ring_vertex(0, k + 1), ring_vertex(0, k)});
            mesh.faces.push_back({end_cap, ring_vertex(tube.rings - 1, k), ring_vertex(tube.rings - 1, k + 1)});
        }

        // Inverse-distance falloff to the tube's bones, top 4 kept.
        for (std::size_t v = base; v < mesh.vertices.size(); ++v) {
            std::vector<std::pair<int, double>> cand;
            for (const Bone& bone : tube.bones) {
                const double d = segment_distance(mesh.vertices[v], bone.a, bone.b);
                cand.emplace_back(bone.joint, 1.0 / std::pow(d + 0.005, 4));
            }
            std::stable_sort(cand.begin(), cand.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
            if (cand.size() > SkinningWeights::kMaxInfluences)
                cand.resize(SkinningWeights::kMaxInfluences);
            influences.push_back(std::move(cand));
        }
    }

    mesh.weights.w = SkinningWeights::Matrix::Zero(static_cast<Eigen::Index>(mesh.vertices.size()), kDogJointCount);
    for (std::size_t v = 0; v < influences.size(); ++v) {
        double sum = 0.0;
        for (const auto& [j, w] : influences[v])
            sum += w;
        for (const auto& [j, w] : influences[v])
            mesh.weights.w(static_cast<Eigen::Index>(v), j) += w / sum;
    }

    mesh.refresh_bind();
    mesh.validate();
    out.requested_faces = config.face_budget;
    out.achieved_faces = static_cast<int>(mesh.faces.size());
    out.ring_sides = sides;
    return out;
}

} // namespace dogsynth
