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
#include "dogsynth/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dogsynth {

namespace {

constexpr double kUnitTolerance = 1e-6;

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

void require_unit(const Quat& q, const char* what)
{
    if (std::abs(q.norm() - 1.0) > kUnitTolerance)
        throw InvalidArgument(std::string(what) + " is not a unit quaternion");
}

} // namespace

int Skeleton::find(const std::string& name) const
{
    for (std::size_t i = 0; i < joints.size(); ++i)
        if (joints[i].name == name)
            return static_cast<int>(i);
    return -1;
}

std::vector<Transform> Skeleton::rest_globals() const
{
    std::vector<Transform> g(joints.size());
    for (std::size_t j = 0; j < joints.size(); ++j)
        g[j] = joints[j].parent < 0 ? joints[j].rest_local : g[joints[j].parent] * joints[j].rest_local;
    return g;
}

void Skeleton::validate() const
{
    require(!joints.empty(), "skeleton has no joints");
    require(joints[0].parent == -1, "joint 0 must be the root (parent -1)");
    for (std::size_t j = 1; j < joints.size(); ++j) {
        require(joints[j].parent >= 0, "skeleton must have exactly one root; joint '" + joints[j].name + "' has no parent");
        require(static_cast<std::size_t>(joints[j].parent) < j,
                "joint '" + joints[j].name + "' is not in topological order (parent index >= own index)");
    }
}

void SkinningWeights::validate() const
{
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
        int nonzero = 0;
        double sum = 0.0;
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
            const double v = w(r, c);
            if (!std::isfinite(v) || v < 0.0)
                throw InvalidArgument("skinning weight row " + std::to_string(r) + " has a negative or non-finite entry");
            if (v > 0.0)
                ++nonzero;
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-6)
            throw InvalidArgument("skinning weight row " + std::to_string(r) + " sums to " + std::to_string(sum));
        if (nonzero > kMaxInfluences)
            throw InvalidArgument("skinning weight row " + std::to_string(r) + " has more than 4 influences");
    }
}

void RiggedMesh::refresh_bind()
{
    const auto rest = skeleton.rest_globals();
    inverse_bind.resize(rest.size());
    for (std::size_t j = 0; j < rest.size(); ++j)
        inverse_bind[j] = rest[j].inverse();
}

void RiggedMesh::validate() const
{
    skeleton.validate();
    weights.validate();
    require(static_cast<std::size_t>(weights.w.rows()) == vertices.size(), "weight rows do not match vertex count");
    require(static_cast<std::size_t>(weights.w.cols()) == skeleton.size(), "weight columns do not match joint count");
    require(inverse_bind.size() == skeleton.size(), "inverse bind matrices missing; call refresh_bind()");
    for (const auto& f : faces) {
        for (auto idx : f)
            require(idx < vertices.size(), "face references vertex index out of range");
        const Vec3 n = (vertices[f[1]] - vertices[f[0]]).cross(vertices[f[2]] - vertices[f[0]]);
        require(n.norm() > 0.0, "mesh contains a zero-area face");
    }
}

PoseParams PoseParams::identity(std::size_t joints)
{
    PoseParams p;
    p.joint_rotations.assign(joints, Quat::Identity());
    return p;
}

Transform root_placement(const PoseParams& pose)
{
    Transform t = Transform::Identity();
    t.translate(Vec3(0.0, 0.0, -pose.root_depth));
    t.rotate(pose.root_rotation);
    return t;
}

FkResult forward_kinematics(const Skeleton& skeleton, const PoseParams& pose)
{
    if (pose.joint_rotations.size() != skeleton.size())
        throw InvalidArgument("pose has " + std::to_string(pose.joint_rotations.size()) + " rotations, skeleton has " +
                              std::to_string(skeleton.size()) + " joints");
    require_unit(pose.root_rotation, "root rotation");
    for (const auto& q : pose.joint_rotations)
        require_unit(q, "joint rotation");

    FkResult out;
    out.globals.resize(skeleton.size());
    out.positions.resize(skeleton.size());
    const Transform placement = root_placement(pose);
    for (std::size_t j = 0; j < skeleton.size(); ++j) {
        const Joint& joint = skeleton.joints[j];
        const Transform parent = joint.parent < 0 ? placement : out.globals[joint.parent];
        Transform local = joint.rest_local;
        local.rotate(pose.joint_rotations[j]);
        out.globals[j] = parent * local;
        out.positions[j] = out.globals[j].translation();
    }
    return out;
}

std::vector<Vec3> apply_lbs(const RiggedMesh& mesh, std::span<const Transform> globals)
{
    if (globals.size() != mesh.skeleton.size() || mesh.inverse_bind.size() != globals.size())
        throw InvalidArgument("transform count does not match joint count");
    std::vector<Eigen::Matrix<double, 3, 4>> skin(globals.size());
    for (std::size_t j = 0; j < globals.size(); ++j)
        skin[j] = (globals[j] * mesh.inverse_bind[j]).matrix().topRows<3>();

    std::vector<Vec3> out(mesh.vertices.size());
    const auto& w = mesh.weights.w;
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        const Eigen::Vector4d p = mesh.vertices[v].homogeneous();
        Vec3 acc = Vec3::Zero();
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            const double wj = w(static_cast<Eigen::Index>(v), j);
            if (wj != 0.0)
                acc += wj * (skin[j] * p);
        }
        out[v] = acc;
    }
    return out;
}

PartLabels part_labels(const SkinningWeights& weights, std::span<const Face> faces)
{
    PartLabels labels;
    const auto& w = weights.w;
    labels.vertex.resize(static_cast<std::size_t>(w.rows()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
        int best = 0;
        for (Eigen::Index c = 1; c < w.cols(); ++c)
            if (w(r, c) > w(r, best))
                best = static_cast<int>(c);
        labels.vertex[r] = best;
    }
    labels.face.resize(faces.size());
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const int a = labels.vertex.at(faces[f][0]);
        const int b = labels.vertex.at(faces[f][1]);
        const int c = labels.vertex.at(faces[f][2]);
        if (a == b || a == c)
            labels.face[f] = a;
        else if (b == c)
            labels.face[f] = b;
        else
            labels.face[f] = std::min({a, b, c});
    }
    return labels;
}

RiggedMesh with_shape(const RiggedMesh& base, std::span<const Vec3> vertices)
{
    require(vertices.size() == base.vertices.size(), "new vertex count does not match the rigged mesh");
    const std::size_t nj = base.skeleton.size();
    const auto& w = base.weights.w;

    std::vector<Vec3> offset(nj, Vec3::Zero());
    std::vector<double> mass(nj, 0.0);
    for (std::size_t v = 0; v < vertices.size(); ++v) {
        const Vec3 delta = vertices[v] - base.vertices[v];
        for (std::size_t j = 0; j < nj; ++j) {
            const double wj = w(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(j));
            if (wj > 0.0) {
                offset[j] += wj * delta;
                mass[j] += wj;
            }
        }
    }
    for (std::size_t j = 0; j < nj; ++j) {
        if (mass[j] > 0.0)
            offset[j] /= mass[j];
        else if (base.skeleton.joints[j].parent >= 0)
            offset[j] = offset[base.skeleton.joints[j].parent];
    }

    RiggedMesh out = base;
    out.vertices.assign(vertices.begin(), vertices.end());
    const auto rest = base.skeleton.rest_globals();
    std::vector<Transform> moved(nj);
    for (std::size_t j = 0; j < nj; ++j) {
        moved[j] = rest[j];
        moved[j].pretranslate(offset[j]);
        const int p = base.skeleton.joints[j].parent;
        out.skeleton.joints[j].rest_local = p < 0 ? moved[j] : moved[p].inverse() * moved[j];
    }
    out.refresh_bind();
    return out;
}

Eigen::VectorXd flatten_vertices(std::span<const Vec3> vertices)
{
    Eigen::VectorXd flat(static_cast<Eigen::Index>(vertices.size() * 3));
    for (std::size_t v = 0; v < vertices.size(); ++v)
        flat.segment<3>(static_cast<Eigen::Index>(3 * v)) = vertices[v];
    return flat;
}

std::vector<Vec3> unflatten_vertices(const Eigen::VectorXd& flat)
{
    require(flat.size() % 3 == 0, "flattened vertex vector length must be a multiple of 3");
    std::vector<Vec3> out(static_cast<std::size_t>(flat.size() / 3));
    for (std::size_t v = 0; v < out.size(); ++v)
        out[v] = flat.segment<3>(static_cast<Eigen::Index>(3 * v));
    return out;
}

PcaModel synthesize_shape_pca(std::span<const RiggedMesh> meshes)
{
    require(meshes.size() >= 2, "shape PCA needs at least 2 meshes");
    const auto& ref = meshes.front();
    SampleMatrix samples;
    samples.layout = LayoutInfo::shape(static_cast<std::uint32_t>(ref.vertices.size()));
    samples.data.resize(static_cast<Eigen::Index>(ref.vertices.size() * 3), static_cast<Eigen::Index>(meshes.size()));
    for (std::size_t m = 0; m < meshes.size(); ++m) {
        if (meshes[m].vertices.size() != ref.vertices.size() || meshes[m].faces != ref.faces)
            throw InvalidArgument("mesh " + std::to_string(m) + " does not share the reference topology");
        samples.data.col(static_cast<Eigen::Index>(m)) = flatten_vertices(meshes[m].vertices);
    }
    return fit_pca(samples);
}

Quat root_rotation_from(const RootAngles& a)
{
    const Quat yaw(Eigen::AngleAxisd(deg2rad(a.yaw_deg), Vec3::UnitY()));
    const Quat pitch(Eigen::AngleAxisd(deg2rad(a.pitch_deg), Vec3::UnitX()));
    const Quat roll(Eigen::AngleAxisd(deg2rad(a.roll_deg), Vec3::UnitZ()));
    return (roll * pitch * yaw).normalized();
}

RootAngles sample_root_angles(Rng& rng, const UprightBounds& bounds)
{
    require(bounds.max_pitch_deg >= 0.0 && bounds.max_roll_deg >= 0.0, "upright bounds must be non-negative");
    RootAngles a;
    a.yaw_deg = uniform(rng, 0.0, 360.0);
    a.pitch_deg = uniform(rng, -bounds.max_pitch_deg, bounds.max_pitch_deg);
    a.roll_deg = uniform(rng, -bounds.max_roll_deg, bounds.max_roll_deg);
    return a;
}

Quat euler_xyz_deg(double rx, double ry, double rz)
{
    const Quat qx(Eigen::AngleAxisd(deg2rad(rx), Vec3::UnitX()));
    const Quat qy(Eigen::AngleAxisd(deg2rad(ry), Vec3::UnitY()));
    const Quat qz(Eigen::AngleAxisd(deg2rad(rz), Vec3::UnitZ()));
    return (qx * qy * qz).normalized();
}

Vec3 to_euler_xyz_deg(const Quat& q)
{
    const Vec3 e = q.toRotationMatrix().eulerAngles(0, 1, 2);
    return e * 180.0 / std::numbers::pi;
}

} // namespace dogsynth
