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
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dogsynth/dog.hpp"

namespace dogsynth {

namespace {

using nlohmann::json;

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void save_obj(const std::filesystem::path& path, std::span<const Vec3> vertices, std::span<const Face> faces)
{
    std::ofstream os(path, std::ios::trunc);
    if (!os)
        throw IoError("cannot open " + path.string() + " for writing");
    os << "# dogsynth mesh: " << vertices.size() << " vertices, " << faces.size() << " faces\n";
    for (const auto& v : vertices)
        os << "v " << format_double(v.x()) << ' ' << format_double(v.y()) << ' ' << format_double(v.z()) << '\n';
    for (const auto& f : faces)
        os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    if (!os)
        throw IoError("write failed for " + path.string());
}

void load_obj(const std::filesystem::path& path, std::vector<Vec3>& vertices, std::vector<Face>& faces)
{
    std::ifstream is(path);
    if (!is)
        throw IoError("cannot open " + path.string());
    vertices.clear();
    faces.clear();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag))
            continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z))
                throw FormatError(path.string() + ":" + std::to_string(lineno) + ": malformed vertex");
            vertices.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<std::uint32_t> idx;
            std::string tok;
            while (ls >> tok) {
                // Keep only the position index of "v/vt/vn" tokens.
                const long i = std::stol(tok.substr(0, tok.find('/')));
                const long resolved = i < 0 ? static_cast<long>(vertices.size()) + i : i - 1;
                if (resolved < 0)
                    throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad face index");
                idx.push_back(static_cast<std::uint32_t>(resolved));
            }
            if (idx.size() < 3)
                throw FormatError(path.string() + ":" + std::to_string(lineno) + ": face with fewer than 3 vertices");
            for (std::size_t k = 1; k + 1 < idx.size(); ++k)
                faces.push_back({idx[0], idx[k], idx[k + 1]});
        }
    }
    for (const auto& f : faces)
        for (auto i : f)
            if (i >= vertices.size())
                throw FormatError(path.string() + ": face index out of range");
}

void save_rig_json(const std::filesystem::path& path, const RiggedMesh& mesh)
{
    json joints = json::array();
    for (const auto& j : mesh.skeleton.joints) {
        const Vec3 t = j.rest_local.translation();
        const Quat q(j.rest_local.rotation());
        joints.push_back({{"name", j.name},
                          {"parent", j.parent},
                          {"translation", {t.x(), t.y(), t.z()}},
                          {"rotation", {q.w(), q.x(), q.y(), q.z()}}});
    }
    json weights = json::array();
    for (Eigen::Index r = 0; r < mesh.weights.w.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < mesh.weights.w.cols(); ++c)
            if (mesh.weights.w(r, c) != 0.0)
                row.push_back({c, mesh.weights.w(r, c)});
        weights.push_back(std::move(row));
    }
    std::ofstream os(path, std::ios::trunc);
    if (!os)
        throw IoError("cannot open " + path.string() + " for writing");
    os << json{{"format", "dogsynth-rig"}, {"version", 1}, {"joints", joints}, {"weights", weights}}.dump() << '\n';
}

RiggedMesh load_rigged_mesh(const std::filesystem::path& obj_path, const std::filesystem::path& rig_path)
{
    RiggedMesh mesh;
    load_obj(obj_path, mesh.vertices, mesh.faces);

    std::ifstream is(rig_path);
    if (!is)
        throw IoError("cannot open " + rig_path.string());
    json doc;
    try {
        doc = json::parse(is);
        for (const auto& j : doc.at("joints")) {
            Joint joint;
            joint.name = j.at("name").get<std::string>();
            joint.parent = j.at("parent").get<int>();
            const auto t = j.at("translation").get<std::vector<double>>();
            const auto r = j.value("rotation", std::vector<double>{1.0, 0.0, 0.0, 0.0});
            if (t.size() != 3 || r.size() != 4)
                throw FormatError("joint '" + joint.name + "' needs a 3-vector translation and a [w,x,y,z] rotation");
            joint.rest_local = Transform::Identity();
            joint.rest_local.translate(Vec3(t[0], t[1], t[2]));
            joint.rest_local.rotate(Quat(r[0], r[1], r[2], r[3]).normalized());
            mesh.skeleton.joints.push_back(std::move(joint));
        }
        const auto& rows = doc.at("weights");
        if (rows.size() != mesh.vertices.size())
            throw FormatError("weight rows (" + std::to_string(rows.size()) + ") do not match OBJ vertex count (" +
                              std::to_string(mesh.vertices.size()) + ")");
        mesh.weights.w = SkinningWeights::Matrix::Zero(static_cast<Eigen::Index>(mesh.vertices.size()),
                                                       static_cast<Eigen::Index>(mesh.skeleton.size()));
        for (std::size_t v = 0; v < rows.size(); ++v) {
            for (const auto& entry : rows[v]) {
                const auto j = entry.at(0).get<std::size_t>();
                if (j >= mesh.skeleton.size())
                    throw FormatError("weight references joint " + std::to_string(j) + " which does not exist");
                mesh.weights.w(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(j)) = entry.at(1).get<double>();
            }
        }
    } catch (const json::exception& e) {
        throw FormatError(rig_path.string() + ": " + e.what());
    } catch (const FormatError& e) {
        throw FormatError(rig_path.string() + ": " + e.what());
    }
    mesh.refresh_bind();
    try {
        mesh.validate();
    } catch (const InvalidArgument& e) {
        throw FormatError(rig_path.string() + ": " + e.what());
    }
    return mesh;
}

} // namespace dogsynth
