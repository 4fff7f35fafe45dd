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
#include "dogsynth/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "dogsynth/dog.hpp"

namespace dogsynth {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json coeffs_json(const Eigen::VectorXd& v)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        a.push_back(v[i]);
    return a;
}

fs::path resolve(const fs::path& base, const fs::path& p)
{
    if (p.empty() || p.is_absolute() || base.empty())
        return p;
    return base / p;
}

template <class T>
void read_opt(const json& j, const char* key, T& out)
{
    if (j.contains(key))
        out = j.at(key).get<T>();
}

void read_range(const json& j, const char* key, double& lo, double& hi)
{
    if (!j.contains(key))
        return;
    const json& r = j.at(key);
    if (!r.is_array() || r.size() != 2)
        throw FormatError(std::string("config: '") + key + "' must be a [lo, hi] pair");
    lo = r[0].get<double>();
    hi = r[1].get<double>();
}

void write_text_atomic(const fs::path& path, const std::string& text)
{
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os)
            throw IoError("cannot open " + tmp.string() + " for writing");
        os << text;
        if (!os)
            throw IoError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

json read_json_file(const fs::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw IoError("cannot open " + path.string());
    try {
        return json::parse(is);
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

struct SamplePaths {
    fs::path rgb, mask, part, depth, ann;
};

SamplePaths sample_paths(const fs::path& out, const std::string& id)
{
    return {out / "rgb" / (id + ".png"), out / "mask" / (id + ".png"), out / "part" / (id + ".png"),
            out / "depth" / (id + ".bin"), out / "ann" / (id + ".json")};
}

bool sample_complete(const SamplePaths& p, bool depth)
{
    return fs::exists(p.rgb) && fs::exists(p.mask) && fs::exists(p.part) && fs::exists(p.ann) &&
           (!depth || fs::exists(p.depth));
}

void write_sample(const DataSample& s, const SamplePaths& p, bool depth)
{
    write_png_rgb(p.rgb, s.image);

    const RenderOutput& l = s.layer;
    Plane<std::uint8_t> mask(l.mask.width, l.mask.height);
    for (std::size_t i = 0; i < mask.data.size(); ++i)
        mask.data[i] = l.mask.data[i] ? 255 : 0;
    write_png_gray(p.mask, mask);

    Plane<std::uint8_t> part(l.part_map.width, l.part_map.height);
    for (std::size_t i = 0; i < part.data.size(); ++i)
        part.data[i] = static_cast<std::uint8_t>(l.part_map.data[i] + 1);
    write_png_gray(p.part, part);

    if (depth)
        write_float_plane(p.depth, l.depth);
    // The annotation goes last; its presence marks the sample complete.
    write_text_atomic(p.ann, s.annotation().dump(1) + "\n");
}

} // namespace

// --- configuration -------------------------------------------------------

AssetPaths AssetPaths::in_pack(const fs::path& dir)
{
    AssetPaths p;
    p.shape_pca = dir / "shape.scpc";
    p.texture_pca = dir / "texture.scpc";
    p.mesh_obj = dir / "dog.obj";
    p.rig_json = dir / "dog_rig.json";
    p.pose_library = dir / "poses.json";
    p.bbox_stats = dir / "bbox_stats.csv";
    p.background_dir = dir / "backgrounds";
    return p;
}

void GenerationConfig::validate() const
{
    require(count >= 1, "sample count must be at least 1");
    require(width > 0 && height > 0, "image size must be positive");
    require(width <= 8192 && height <= 8192, "image size is limited to 8192 pixels per side");
    require(focal > 0.0 && std::isfinite(focal), "focal length must be positive");
    require(shape_scale >= 0.0 && std::isfinite(shape_scale), "shape_scale must be non-negative");
    require(texture_scale >= 0.0 && std::isfinite(texture_scale), "texture_scale must be non-negative");
    require(upright.max_pitch_deg >= 0.0 && upright.max_pitch_deg <= 90.0, "max_pitch_deg must lie in [0,90]");
    require(upright.max_roll_deg >= 0.0 && upright.max_roll_deg <= 90.0, "max_roll_deg must lie in [0,90]");
    depth.validate();
    lighting.validate();
    const std::pair<const char*, const fs::path*> paths[] = {
        {"shape_pca", &assets.shape_pca},       {"texture_pca", &assets.texture_pca},
        {"mesh_obj", &assets.mesh_obj},         {"rig_json", &assets.rig_json},
        {"pose_library", &assets.pose_library}, {"bbox_stats", &assets.bbox_stats},
        {"background_dir", &assets.background_dir}};
    for (const auto& [name, path] : paths)
        require(!path->empty(), std::string("config: asset path '") + name + "' is not set");
}

json GenerationConfig::to_json() const
{
    return {
        {"count", count},
        {"seed", seed},
        {"assets",
         {{"shape_pca", assets.shape_pca.string()},
          {"texture_pca", assets.texture_pca.string()},
          {"mesh_obj", assets.mesh_obj.string()},
          {"rig_json", assets.rig_json.string()},
          {"pose_library", assets.pose_library.string()},
          {"bbox_stats", assets.bbox_stats.string()},
          {"background_dir", assets.background_dir.string()}}},
        {"depth", {{"near", depth.near}, {"far", depth.far}}},
        {"lighting",
         {{"ambient", {lighting.ambient_lo, lighting.ambient_hi}},
          {"directional", {lighting.directional_lo, lighting.directional_hi}}}},
        {"upright", {{"max_pitch_deg", upright.max_pitch_deg}, {"max_roll_deg", upright.max_roll_deg}}},
        {"image", {{"width", width}, {"height", height}, {"focal", focal}}},
        {"coefficient_scale", {{"shape", shape_scale}, {"texture", texture_scale}}},
        {"write_depth", write_depth},
    };
}

GenerationConfig GenerationConfig::from_json(const json& j, const fs::path& base_dir)
{
    if (!j.is_object())
        throw FormatError("config must be a JSON object");
    static const char* const known[] = {"count",    "seed",    "asset_pack", "assets",           "depth",
                                        "lighting", "upright", "image",      "coefficient_scale", "write_depth"};
    for (const auto& item : j.items())
        if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return item.key() == k; }) ==
            std::end(known))
            throw FormatError("config: unknown key '" + item.key() + "'");

    GenerationConfig c;
    try {
        if (j.contains("count")) {
            const long long n = j.at("count").get<long long>();
            require(n >= 0, "config: count must be non-negative");
            c.count = static_cast<std::size_t>(n);
        }
        read_opt(j, "seed", c.seed);
        if (j.contains("asset_pack"))
            c.assets = AssetPaths::in_pack(j.at("asset_pack").get<std::string>());
        if (j.contains("assets")) {
            const json& a = j.at("assets");
            auto path = [&](const char* key, fs::path& out) {
                if (a.contains(key))
                    out = a.at(key).get<std::string>();
            };
            path("shape_pca", c.assets.shape_pca);
            path("texture_pca", c.assets.texture_pca);
            path("mesh_obj", c.assets.mesh_obj);
            path("rig_json", c.assets.rig_json);
            path("pose_library", c.assets.pose_library);
            path("bbox_stats", c.assets.bbox_stats);
            path("background_dir", c.assets.background_dir);
        }
        if (j.contains("depth")) {
            read_opt(j.at("depth"), "near", c.depth.near);
            read_opt(j.at("depth"), "far", c.depth.far);
        }
        if (j.contains("lighting")) {
            read_range(j.at("lighting"), "ambient", c.lighting.ambient_lo, c.lighting.ambient_hi);
            read_range(j.at("lighting"), "directional", c.lighting.directional_lo, c.lighting.directional_hi);
        }
        if (j.contains("upright")) {
            read_opt(j.at("upright"), "max_pitch_deg", c.upright.max_pitch_deg);
            read_opt(j.at("upright"), "max_roll_deg", c.upright.max_roll_deg);
        }
        if (j.contains("image")) {
            read_opt(j.at("image"), "width", c.width);
            read_opt(j.at("image"), "height", c.height);
            read_opt(j.at("image"), "focal", c.focal);
        }
        if (j.contains("coefficient_scale")) {
            read_opt(j.at("coefficient_scale"), "shape", c.shape_scale);
            read_opt(j.at("coefficient_scale"), "texture", c.texture_scale);
        }
        read_opt(j, "write_depth", c.write_depth);
    } catch (const json::exception& e) {
        throw FormatError(std::string("config: ") + e.what());
    }

    for (fs::path* p : {&c.assets.shape_pca, &c.assets.texture_pca, &c.assets.mesh_obj, &c.assets.rig_json,
                        &c.assets.pose_library, &c.assets.bbox_stats, &c.assets.background_dir})
        *p = resolve(base_dir, *p);
    return c;
}

GenerationConfig GenerationConfig::load(const fs::path& path)
{
    return from_json(read_json_file(path), path.parent_path());
}

// --- assets --------------------------------------------------------------

Assets Assets::load(const GenerationConfig& config)
{
    config.validate();
    const AssetPaths& p = config.assets;
    Assets a;
    a.shape = load_pca(p.shape_pca);
    a.texture = load_pca(p.texture_pca);
    a.mesh = load_rigged_mesh(p.mesh_obj, p.rig_json);
    a.parts = part_labels(a.mesh.weights, a.mesh.faces);
    a.poses = load_pose_library(p.pose_library, a.mesh.skeleton);
    a.stats = load_bbox_stats_csv(p.bbox_stats);

    if (!fs::is_directory(p.background_dir))
        throw IoError("background directory " + p.background_dir.string() + " does not exist");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(p.background_dir)) {
        std::string ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
        if (e.is_regular_file() && ext == ".png")
            files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files)
        a.backgrounds.push_back({f.stem().string(), fit_to_size(read_png(f), config.width, config.height)});

    a.validate();
    return a;
}

void Assets::validate() const
{
    shape.validate();
    texture.validate();
    mesh.validate();
    if (shape.layout.kind != FeatureLayout::Shape)
        throw InvalidArgument("shape model does not have a shape layout");
    if (texture.layout.kind != FeatureLayout::Texture)
        throw InvalidArgument("texture model does not have a texture layout");
    if (shape.layout.dim0 != mesh.vertices.size())
        throw InvalidArgument("shape model has " + std::to_string(shape.layout.dim0) + " vertices, mesh has " +
                              std::to_string(mesh.vertices.size()));
    if (texture.layout.dim0 != mesh.faces.size())
        throw InvalidArgument("texture model has " + std::to_string(texture.layout.dim0) + " faces, mesh has " +
                              std::to_string(mesh.faces.size()));
    require(mesh.skeleton.size() <= 254, "part maps support at most 254 joints");
    require(parts.face.size() == mesh.faces.size(), "part labels do not match the mesh");
    poses.validate(mesh.skeleton);
    require(!poses.poses.empty(), "pose library is empty");
    stats.validate();
    require(!backgrounds.empty(), "no background images found");
}

// --- sampling ------------------------------------------------------------

std::string sample_id(std::size_t index)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06zu", index);
    return buf;
}

DataSample generate_sample(const GenerationConfig& config, const Assets& assets, std::size_t index)
{
    Rng rng = make_sample_rng(config.seed, index);
    return generate_sample(config, assets, rng, index);
}

DataSample generate_sample(const GenerationConfig& config, const Assets& assets, Rng& rng, std::size_t index)
{
    const Camera camera = config.camera();
    const int w = config.width;
    const int h = config.height;

    for (int attempt = 1; attempt <= kMaxRenderAttempts; ++attempt) {
        DataSample s;
        s.index = index;
        s.id = sample_id(index);
        s.attempts = attempt;

        s.shape_coeffs = sample_coefficients(assets.shape, rng, config.shape_scale);
        s.texture_coeffs = sample_coefficients(assets.texture, rng, config.texture_scale);
        const RiggedMesh shaped = with_shape(assets.mesh, unflatten_vertices(synthesize(assets.shape, s.shape_coeffs)));
        const TextureTensor texture = TextureTensor::from_features(
            synthesize(assets.texture, s.texture_coeffs), assets.texture.layout.dim0, assets.texture.layout.dim1);

        const NamedPose& named = assets.poses.poses[uniform_index(rng, assets.poses.poses.size())];
        s.pose_name = named.name;
        s.pose.joint_rotations = named.rotations;
        s.root_angles = sample_root_angles(rng, config.upright);
        s.pose.root_rotation = root_rotation_from(s.root_angles);
        s.pose.root_depth = sample_root_depth(assets.stats, config.depth, rng);

        const FkResult fk = forward_kinematics(shaped.skeleton, s.pose);
        const std::vector<Vec3> posed = apply_lbs(shaped, fk.globals);
        s.lighting = sample_lighting(rng, config.lighting);

        const RenderScene scene{posed, shaped.faces, assets.parts.face, fk.positions};
        const RenderOutput rendered = render(scene, texture, camera, s.lighting);
        if (rendered.bbox.empty())
            continue;

        s.rendered_bbox = rendered.bbox;
        const double size = static_cast<double>(rendered.bbox.area()) / (static_cast<double>(w) * h);
        s.cp = sample_center(assets.stats, size, rng);
        s.translation = clamp_translation(rendered.bbox, s.cp, w, h);
        s.layer = apply_g(rendered, s.translation[0], s.translation[1]);

        s.background = uniform_index(rng, assets.backgrounds.size());
        s.background_id = assets.backgrounds[s.background].id;
        s.image = composite(s.layer, assets.backgrounds[s.background].image);

        s.joints_3d.reserve(fk.positions.size());
        for (const Vec3& p : fk.positions)
            s.joints_3d.push_back(camera.extrinsic * p);
        return s;
    }
    throw NumericError("sample " + std::to_string(index) + ": the dog was not visible after " +
                       std::to_string(kMaxRenderAttempts) + " attempts");
}

json DataSample::annotation() const
{
    json joints = json::array();
    for (std::size_t j = 0; j < layer.joints_2d.size(); ++j) {
        const Joint2D& p = layer.joints_2d[j];
        json e = {{"x", number_or_null(p.x)}, {"y", number_or_null(p.y)}, {"visible", p.visible}};
        if (j < joints_3d.size())
            e["xyz"] = vec_json(joints_3d[j]);
        joints.push_back(std::move(e));
    }
    json rotations = json::array();
    for (const Quat& q : pose.joint_rotations)
        rotations.push_back({q.w(), q.x(), q.y(), q.z()});
    const PixelRect& b = layer.bbox;
    return {
        {"id", id},
        {"index", index},
        {"image_size", {layer.mask.width, layer.mask.height}},
        {"bbox", {b.x0, b.y0, b.x1, b.y1}},
        {"rendered_bbox", {rendered_bbox.x0, rendered_bbox.y0, rendered_bbox.x1, rendered_bbox.y1}},
        {"joints", std::move(joints)},
        {"pose", {{"name", pose_name}, {"rotations", std::move(rotations)}}},
        {"root",
         {{"yaw_deg", root_angles.yaw_deg},
          {"pitch_deg", root_angles.pitch_deg},
          {"roll_deg", root_angles.roll_deg},
          {"depth", pose.root_depth}}},
        {"shape_coeffs", coeffs_json(shape_coeffs)},
        {"texture_coeffs", coeffs_json(texture_coeffs)},
        {"lighting",
         {{"ambient", vec_json(lighting.ambient)},
          {"directional", vec_json(lighting.directional)},
          {"direction", vec_json(lighting.direction)}}},
        {"background", background_id},
        {"cp", {cp.x(), cp.y()}},
        {"translation", {translation[0], translation[1]}},
        {"attempts", attempts},
    };
}

// --- dataset -------------------------------------------------------------

DatasetSummary generate_dataset(const GenerationConfig& config, const fs::path& out_dir, int workers,
                                const ProgressFn& progress)
{
    require(workers >= 1, "worker count must be at least 1");
    const Assets assets = Assets::load(config);

    for (const char* sub : {"rgb", "mask", "part", "ann"})
        fs::create_directories(out_dir / sub);
    if (config.write_depth)
        fs::create_directories(out_dir / "depth");

    const std::size_t n = config.count;
    DatasetSummary summary;
    summary.manifest = out_dir / "manifest.json";

    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < n; ++i) {
        if (sample_complete(sample_paths(out_dir, sample_id(i)), config.write_depth))
            ++summary.skipped;
        else
            todo.push_back(i);
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex mu;
    std::size_t done = summary.skipped;
    if (progress)
        progress(done, n);

    auto work = [&] {
        while (!failed.load()) {
            const std::size_t k = next.fetch_add(1);
            if (k >= todo.size())
                return;
            const std::size_t index = todo[k];
            try {
                const DataSample s = generate_sample(config, assets, index);
                write_sample(s, sample_paths(out_dir, s.id), config.write_depth);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!error)
                    error = std::current_exception();
                failed = true;
                return;
            }
            std::lock_guard lock(mu);
            ++summary.generated;
            ++done;
            if (progress)
                progress(done, n);
        }
    };

    const int n_threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers),
                                                                 std::max<std::size_t>(todo.size(), 1)));
    if (n_threads == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t)
            pool.emplace_back(work);
        for (auto& t : pool)
            t.join();
    }

    // The manifest lists every finished sample in index order, also after a
    // failure so completed work stays discoverable.
    json samples = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        const SamplePaths p = sample_paths(out_dir, sample_id(i));
        if (!sample_complete(p, config.write_depth))
            continue;
        json entry = read_json_file(p.ann);
        entry["files"] = {{"rgb", fs::relative(p.rgb, out_dir).generic_string()},
                          {"mask", fs::relative(p.mask, out_dir).generic_string()},
                          {"part", fs::relative(p.part, out_dir).generic_string()},
                          {"annotation", fs::relative(p.ann, out_dir).generic_string()}};
        if (config.write_depth)
            entry["files"]["depth"] = fs::relative(p.depth, out_dir).generic_string();
        samples.push_back(std::move(entry));
    }
    const bool complete = !error && samples.size() == n;
    json joint_names = json::array();
    for (const auto& jt : assets.mesh.skeleton.joints)
        joint_names.push_back(jt.name);
    const json manifest = {
        {"schema_version", kManifestSchemaVersion},
        {"generator", "dogsynth"},
        {"complete", complete},
        {"count", n},
        {"seed", config.seed},
        {"config", config.to_json()},
        {"joints", std::move(joint_names)},
        {"part_encoding", "pixel value = joint index + 1, 0 = background"},
        {"samples", std::move(samples)},
    };
    write_text_atomic(summary.manifest, manifest.dump(1) + "\n");

    if (error)
        std::rethrow_exception(error);
    return summary;
}

} // namespace dogsynth
