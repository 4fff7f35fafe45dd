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
#include "dogsynth/dogsynth.h"

#include <new>
#include <string>

#include "dogsynth/asset_pack.hpp"
#include "dogsynth/dataset.hpp"
#include "dogsynth/dog.hpp"
#include "dogsynth/eval.hpp"
#include "dogsynth/placement.hpp"

struct ds_pca {
    dogsynth::PcaModel model;
};

struct ds_mesh {
    dogsynth::RiggedMesh mesh;
};

struct ds_stats {
    dogsynth::BBoxStats stats;
};

struct ds_report {
    dogsynth::MetricReport report;
};

namespace {

thread_local std::string g_last_error;

ds_status fail(ds_status s, const std::string& msg)
{
    g_last_error = msg;
    return s;
}

// Runs `fn`, translating exceptions into status codes.
template <class F>
ds_status guarded(F&& fn) noexcept
{
    try {
        fn();
        g_last_error.clear();
        return DS_OK;
    } catch (const dogsynth::InvalidArgument& e) {
        return fail(DS_ERR_INVALID_ARGUMENT, e.what());
    } catch (const dogsynth::IoError& e) {
        return fail(DS_ERR_IO, e.what());
    } catch (const dogsynth::FormatError& e) {
        return fail(DS_ERR_FORMAT, e.what());
    } catch (const dogsynth::NumericError& e) {
        return fail(DS_ERR_NUMERIC, e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(DS_ERR_IO, e.what());
    } catch (const std::bad_alloc&) {
        return fail(DS_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(DS_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(DS_ERR_INTERNAL, "unknown error");
    }
}

void need(const void* p, const char* what)
{
    if (!p)
        throw dogsynth::InvalidArgument(std::string(what) + " must not be NULL");
}

dogsynth::Quat quat_from(const double* q)
{
    return dogsynth::Quat(q[0], q[1], q[2], q[3]);
}

} // namespace

extern "C" {

const char* ds_last_error(void) { return g_last_error.c_str(); }

const char* ds_status_name(ds_status status)
{
    switch (status) {
    case DS_OK:
        return "ok";
    case DS_ERR_INVALID_ARGUMENT:
        return "invalid argument";
    case DS_ERR_IO:
        return "i/o error";
    case DS_ERR_FORMAT:
        return "format error";
    case DS_ERR_NUMERIC:
        return "numeric error";
    case DS_ERR_INTERNAL:
        return "internal error";
    }
    return "unknown status";
}

const char* ds_version(void) { return "0.1.0"; }

// --- PCA -----------------------------------------------------------------

ds_status ds_pca_fit(const double* data, size_t n_features, size_t n_samples, uint32_t layout, uint32_t dim0,
                     uint32_t dim1, ds_pca** out)
{
    return guarded([&] {
        need(data, "data");
        need(out, "out");
        *out = nullptr;
        if (layout != DS_LAYOUT_TEXTURE && layout != DS_LAYOUT_SHAPE)
            throw dogsynth::InvalidArgument("unknown layout " + std::to_string(layout));
        dogsynth::SampleMatrix m;
        m.layout = {static_cast<dogsynth::FeatureLayout>(layout), dim0, dim1};
        m.data = Eigen::Map<const Eigen::MatrixXd>(data, static_cast<Eigen::Index>(n_features),
                                                   static_cast<Eigen::Index>(n_samples));
        *out = new ds_pca{dogsynth::fit_pca(m)};
    });
}

ds_status ds_pca_load(const char* path, ds_pca** out)
{
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = nullptr;
        *out = new ds_pca{dogsynth::load_pca(path)};
    });
}

ds_status ds_pca_save(const ds_pca* model, const char* path)
{
    return guarded([&] {
        need(model, "model");
        need(path, "path");
        dogsynth::save_pca(model->model, path);
    });
}

ds_status ds_pca_info(const ds_pca* model, size_t* n_features, size_t* n_components)
{
    return guarded([&] {
        need(model, "model");
        if (n_features)
            *n_features = static_cast<size_t>(model->model.n_features());
        if (n_components)
            *n_components = static_cast<size_t>(model->model.n_components());
    });
}

ds_status ds_pca_variances(const ds_pca* model, double* out, size_t n)
{
    return guarded([&] {
        need(model, "model");
        need(out, "out");
        const auto& v = model->model.variances;
        dogsynth::require(n == static_cast<size_t>(v.size()), "output length must equal the component count");
        for (size_t i = 0; i < n; ++i)
            out[i] = v[static_cast<Eigen::Index>(i)];
    });
}

ds_status ds_pca_synthesize(const ds_pca* model, const double* coeffs, size_t n_coeffs, double* out, size_t n_out)
{
    return guarded([&] {
        need(model, "model");
        need(out, "out");
        if (n_coeffs)
            need(coeffs, "coeffs");
        dogsynth::require(n_out == static_cast<size_t>(model->model.n_features()),
                          "output length must equal the feature count");
        Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(coeffs, static_cast<Eigen::Index>(n_coeffs));
        const Eigen::VectorXd x = dogsynth::synthesize(model->model, c);
        Eigen::Map<Eigen::VectorXd>(out, static_cast<Eigen::Index>(n_out)) = x;
    });
}

ds_status ds_pca_project(const ds_pca* model, const double* sample, size_t n_sample, double* coeffs, size_t n_coeffs)
{
    return guarded([&] {
        need(model, "model");
        need(sample, "sample");
        need(coeffs, "coeffs");
        dogsynth::require(n_coeffs == static_cast<size_t>(model->model.n_components()),
                          "coefficient length must equal the component count");
        const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(sample, static_cast<Eigen::Index>(n_sample));
        Eigen::Map<Eigen::VectorXd>(coeffs, static_cast<Eigen::Index>(n_coeffs)) = dogsynth::project(model->model, x);
    });
}

void ds_pca_free(ds_pca* model) { delete model; }

// --- meshes --------------------------------------------------------------

ds_status ds_mesh_generate_dog(int face_budget, uint64_t seed, double jitter, ds_mesh** out)
{
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        dogsynth::DogConfig c;
        c.face_budget = face_budget;
        c.seed = seed;
        c.jitter = jitter;
        *out = new ds_mesh{dogsynth::generate_canonical_dog(c).mesh};
    });
}

ds_status ds_mesh_load(const char* obj_path, const char* rig_path, ds_mesh** out)
{
    return guarded([&] {
        need(obj_path, "obj_path");
        need(rig_path, "rig_path");
        need(out, "out");
        *out = nullptr;
        *out = new ds_mesh{dogsynth::load_rigged_mesh(obj_path, rig_path)};
    });
}

ds_status ds_mesh_save(const ds_mesh* mesh, const char* obj_path, const char* rig_path)
{
    return guarded([&] {
        need(mesh, "mesh");
        need(obj_path, "obj_path");
        need(rig_path, "rig_path");
        dogsynth::save_obj(obj_path, mesh->mesh.vertices, mesh->mesh.faces);
        dogsynth::save_rig_json(rig_path, mesh->mesh);
    });
}

ds_status ds_mesh_info(const ds_mesh* mesh, size_t* vertices, size_t* faces, size_t* joints)
{
    return guarded([&] {
        need(mesh, "mesh");
        if (vertices)
            *vertices = mesh->mesh.vertices.size();
        if (faces)
            *faces = mesh->mesh.faces.size();
        if (joints)
            *joints = mesh->mesh.skeleton.size();
    });
}

ds_status ds_mesh_pose(const ds_mesh* mesh, const double* joint_rotations, const double root_rotation[4],
                       double root_depth, double* vertices_out, double* joints_out)
{
    return guarded([&] {
        need(mesh, "mesh");
        need(joint_rotations, "joint_rotations");
        need(root_rotation, "root_rotation");
        const auto& m = mesh->mesh;
        dogsynth::PoseParams pose;
        for (size_t j = 0; j < m.skeleton.size(); ++j)
            pose.joint_rotations.push_back(quat_from(joint_rotations + 4 * j));
        pose.root_rotation = quat_from(root_rotation);
        pose.root_depth = root_depth;
        const dogsynth::FkResult fk = dogsynth::forward_kinematics(m.skeleton, pose);
        if (vertices_out) {
            const auto v = dogsynth::apply_lbs(m, fk.globals);
            for (size_t i = 0; i < v.size(); ++i)
                for (int k = 0; k < 3; ++k)
                    vertices_out[3 * i + k] = v[i][k];
        }
        if (joints_out)
            for (size_t i = 0; i < fk.positions.size(); ++i)
                for (int k = 0; k < 3; ++k)
                    joints_out[3 * i + k] = fk.positions[i][k];
    });
}

void ds_mesh_free(ds_mesh* mesh) { delete mesh; }

// --- placement -----------------------------------------------------------

ds_status ds_stats_load_csv(const char* path, ds_stats** out)
{
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = nullptr;
        *out = new ds_stats{dogsynth::load_bbox_stats_csv(path)};
    });
}

ds_status ds_stats_size(const ds_stats* stats, size_t* entries)
{
    return guarded([&] {
        need(stats, "stats");
        need(entries, "entries");
        *entries = stats->stats.entries.size();
    });
}

ds_status ds_stats_depth(const ds_stats* stats, double size_fraction, double near_depth, double far_depth,
                         double* depth)
{
    return guarded([&] {
        need(stats, "stats");
        need(depth, "depth");
        const dogsynth::DepthBounds b{near_depth, far_depth};
        *depth = dogsynth::depth_for_size(size_fraction, stats->stats.min_size(), stats->stats.max_size(), b);
    });
}

void ds_stats_free(ds_stats* stats) { delete stats; }

ds_status ds_stats_derive(const char* jsonl_path, const char* csv_path, size_t* records, size_t* skipped)
{
    return guarded([&] {
        need(jsonl_path, "jsonl_path");
        need(csv_path, "csv_path");
        const dogsynth::DeriveResult r = dogsynth::derive_bbox_stats(jsonl_path);
        dogsynth::save_bbox_stats_csv(r.stats, csv_path);
        if (records)
            *records = r.records;
        if (skipped)
            *skipped = r.skipped;
    });
}

ds_status ds_clamp_translation(const int box[4], double cp_x, double cp_y, int width, int height, int shift[2])
{
    return guarded([&] {
        need(box, "box");
        need(shift, "shift");
        const auto s = dogsynth::clamp_translation({box[0], box[1], box[2], box[3]}, dogsynth::Vec2(cp_x, cp_y),
                                                   width, height);
        shift[0] = s[0];
        shift[1] = s[1];
    });
}

// --- generation ----------------------------------------------------------

void ds_generate_options_init(ds_generate_options* options)
{
    if (options)
        *options = ds_generate_options{0, 0, 0, 0, 1, nullptr, nullptr};
}

ds_status ds_generate(const char* config_path, const char* out_dir, const ds_generate_options* options,
                      ds_generate_result* result)
{
    return guarded([&] {
        need(config_path, "config_path");
        need(out_dir, "out_dir");
        ds_generate_options o;
        ds_generate_options_init(&o);
        if (options)
            o = *options;
        dogsynth::GenerationConfig config = dogsynth::GenerationConfig::load(config_path);
        if (o.override_count)
            config.count = o.count;
        if (o.override_seed)
            config.seed = o.seed;
        dogsynth::ProgressFn progress;
        if (o.progress)
            progress = [&](std::size_t done, std::size_t total) { o.progress(done, total, o.user); };
        const auto s = dogsynth::generate_dataset(config, out_dir, o.workers, progress);
        if (result)
            *result = ds_generate_result{s.generated, s.skipped};
    });
}

ds_status ds_assets_synth(const char* out_dir, uint64_t seed)
{
    return guarded([&] {
        need(out_dir, "out_dir");
        dogsynth::AssetPackOptions o;
        o.seed = seed;
        dogsynth::synthesize_asset_pack(out_dir, o);
    });
}

// --- evaluation ----------------------------------------------------------

ds_status ds_threshold(const float* heatmap, int width, int height, double t0, double* threshold, int* iterations,
                       uint8_t* mask_out)
{
    return guarded([&] {
        need(heatmap, "heatmap");
        need(threshold, "threshold");
        dogsynth::require(width > 0 && height > 0, "heatmap size must be positive");
        dogsynth::Heatmap hm(width, height);
        std::copy(heatmap, heatmap + hm.data.size(), hm.data.begin());
        const auto r = dogsynth::iterative_threshold(hm, t0);
        *threshold = r.threshold;
        if (iterations)
            *iterations = r.iterations;
        if (mask_out)
            std::copy(r.mask.data.begin(), r.mask.data.end(), mask_out);
    });
}

ds_status ds_mask_metrics(const uint8_t* pred, const uint8_t* gt, int width, int height, ds_metrics* out)
{
    return guarded([&] {
        need(pred, "pred");
        need(gt, "gt");
        need(out, "out");
        dogsynth::require(width > 0 && height > 0, "mask size must be positive");
        dogsynth::BinaryMask a(width, height), b(width, height);
        std::copy(pred, pred + a.data.size(), a.data.begin());
        std::copy(gt, gt + b.data.size(), b.data.begin());
        const auto c = dogsynth::confusion(a, b);
        *out = ds_metrics{dogsynth::iou(c), dogsynth::dice(c), dogsynth::f_beta(c, 2.0), dogsynth::pixel_accuracy(c)};
    });
}

ds_status ds_eval_dirs(const char* pred_dir, const char* gt_dir, double t0, int workers, ds_report** out)
{
    return guarded([&] {
        need(pred_dir, "pred_dir");
        need(gt_dir, "gt_dir");
        need(out, "out");
        *out = nullptr;
        *out = new ds_report{dogsynth::evaluate_dirs(pred_dir, gt_dir, t0, workers)};
    });
}

ds_status ds_report_summary(const ds_report* report, ds_eval_summary* out)
{
    return guarded([&] {
        need(report, "report");
        need(out, "out");
        const auto& r = report->report;
        *out = ds_eval_summary{r.images.size(), r.unmatched_pred.size(), r.unmatched_gt.size(), r.warnings.size(),
                               r.failures.size(), r.mean_iou, r.mean_dice, r.mean_f2, r.mean_accuracy_pct};
    });
}

const char* ds_report_message(const ds_report* report, int kind, size_t index)
{
    if (!report)
        return nullptr;
    const auto& r = report->report;
    const std::vector<std::string>* list = nullptr;
    switch (kind) {
    case DS_MSG_UNMATCHED_PRED:
        list = &r.unmatched_pred;
        break;
    case DS_MSG_UNMATCHED_GT:
        list = &r.unmatched_gt;
        break;
    case DS_MSG_WARNING:
        list = &r.warnings;
        break;
    case DS_MSG_FAILURE:
        list = &r.failures;
        break;
    default:
        return nullptr;
    }
    return index < list->size() ? (*list)[index].c_str() : nullptr;
}

ds_status ds_report_write(const ds_report* report, const char* json_path, const char* csv_path)
{
    return guarded([&] {
        need(report, "report");
        if (json_path)
            report->report.write_json(json_path);
        if (csv_path)
            report->report.write_csv(csv_path);
    });
}

void ds_report_free(ds_report* report) { delete report; }

} // extern "C"
