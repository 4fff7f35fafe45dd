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
#ifndef DOGSYNTH_H
#define DOGSYNTH_H

#include <stddef.h>
#include <stdint.h>

#if defined(DOGSYNTH_BUILDING_LIBRARY)
#define DS_API __attribute__((visibility("default")))
#else
#define DS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ds_status {
    DS_OK = 0,
    DS_ERR_INVALID_ARGUMENT = 1,
    DS_ERR_IO = 2,
    DS_ERR_FORMAT = 3,
    DS_ERR_NUMERIC = 4,
    DS_ERR_INTERNAL = 5
} ds_status;

/* Message for the most recent failure on the calling thread. Never NULL. */
DS_API const char* ds_last_error(void);
DS_API const char* ds_status_name(ds_status status);
DS_API const char* ds_version(void);

/* ---- PCA models ------------------------------------------------------ */

typedef struct ds_pca ds_pca;

enum { DS_LAYOUT_TEXTURE = 1, DS_LAYOUT_SHAPE = 2 };

/* `data` is column-major, one sample per column. */
DS_API ds_status ds_pca_fit(const double* data, size_t n_features, size_t n_samples, uint32_t layout, uint32_t dim0,
                            uint32_t dim1, ds_pca** out);
DS_API ds_status ds_pca_load(const char* path, ds_pca** out);
DS_API ds_status ds_pca_save(const ds_pca* model, const char* path);
DS_API ds_status ds_pca_info(const ds_pca* model, size_t* n_features, size_t* n_components);
DS_API ds_status ds_pca_variances(const ds_pca* model, double* out, size_t n);
/* Texture models clamp to [0,1]; `n_coeffs` may be shorter than the model. */
DS_API ds_status ds_pca_synthesize(const ds_pca* model, const double* coeffs, size_t n_coeffs, double* out,
                                   size_t n_out);
DS_API ds_status ds_pca_project(const ds_pca* model, const double* sample, size_t n_sample, double* coeffs,
                                size_t n_coeffs);
DS_API void ds_pca_free(ds_pca* model);

/* ---- rigged meshes --------------------------------------------------- */

typedef struct ds_mesh ds_mesh;

DS_API ds_status ds_mesh_generate_dog(int face_budget, uint64_t seed, double jitter, ds_mesh** out);
DS_API ds_status ds_mesh_load(const char* obj_path, const char* rig_path, ds_mesh** out);
DS_API ds_status ds_mesh_save(const ds_mesh* mesh, const char* obj_path, const char* rig_path);
DS_API ds_status ds_mesh_info(const ds_mesh* mesh, size_t* vertices, size_t* faces, size_t* joints);
/* Quaternions are (w, x, y, z); `joint_rotations` holds 4 * joints values.
 * Outputs are xyz triples in camera space; either may be NULL. */
DS_API ds_status ds_mesh_pose(const ds_mesh* mesh, const double* joint_rotations, const double root_rotation[4],
                              double root_depth, double* vertices_out, double* joints_out);
DS_API void ds_mesh_free(ds_mesh* mesh);

/* ---- placement statistics -------------------------------------------- */

typedef struct ds_stats ds_stats;

DS_API ds_status ds_stats_load_csv(const char* path, ds_stats** out);
DS_API ds_status ds_stats_size(const ds_stats* stats, size_t* entries);
DS_API ds_status ds_stats_depth(const ds_stats* stats, double size_fraction, double near_depth, double far_depth,
                                double* depth);
DS_API void ds_stats_free(ds_stats* stats);
/* JSON-lines annotations -> CSV statistics. */
DS_API ds_status ds_stats_derive(const char* jsonl_path, const char* csv_path, size_t* records, size_t* skipped);
/* Box is half-open [x0,x1) x [y0,y1); cp is in normalized coordinates. */
DS_API ds_status ds_clamp_translation(const int box[4], double cp_x, double cp_y, int width, int height,
                                      int shift[2]);

/* ---- dataset generation ---------------------------------------------- */

typedef void (*ds_progress_fn)(size_t done, size_t total, void* user);

typedef struct ds_generate_options {
    int override_count;
    size_t count;
    int override_seed;
    uint64_t seed;
    int workers;
    ds_progress_fn progress;
    void* user;
} ds_generate_options;

typedef struct ds_generate_result {
    size_t generated;
    size_t skipped;
} ds_generate_result;

DS_API void ds_generate_options_init(ds_generate_options* options);
DS_API ds_status ds_generate(const char* config_path, const char* out_dir, const ds_generate_options* options,
                             ds_generate_result* result);
/* Builds a complete procedural asset pack including config.json. */
DS_API ds_status ds_assets_synth(const char* out_dir, uint64_t seed);

/* ---- evaluation ------------------------------------------------------ */

typedef struct ds_metrics {
    double iou;
    double dice;
    double f2;
    double accuracy; /* fraction in [0,1] */
} ds_metrics;

/* `mask_out` may be NULL; otherwise it receives width * height 0/1 bytes. */
DS_API ds_status ds_threshold(const float* heatmap, int width, int height, double t0, double* threshold,
                              int* iterations, uint8_t* mask_out);
DS_API ds_status ds_mask_metrics(const uint8_t* pred, const uint8_t* gt, int width, int height, ds_metrics* out);

typedef struct ds_report ds_report;

typedef struct ds_eval_summary {
    size_t count;
    size_t unmatched_pred;
    size_t unmatched_gt;
    size_t warnings;
    size_t failures;
    double mean_iou;
    double mean_dice;
    double mean_f2;
    double mean_accuracy_pct;
} ds_eval_summary;

enum { DS_MSG_UNMATCHED_PRED = 0, DS_MSG_UNMATCHED_GT = 1, DS_MSG_WARNING = 2, DS_MSG_FAILURE = 3 };

DS_API ds_status ds_eval_dirs(const char* pred_dir, const char* gt_dir, double t0, int workers, ds_report** out);
DS_API ds_status ds_report_summary(const ds_report* report, ds_eval_summary* out);
/* NULL when `index` is out of range. Valid until the report is freed. */
DS_API const char* ds_report_message(const ds_report* report, int kind, size_t index);
/* Either path may be NULL. */
DS_API ds_status ds_report_write(const ds_report* report, const char* json_path, const char* csv_path);
DS_API void ds_report_free(ds_report* report);

#ifdef __cplusplus
}
#endif

#endif /* DOGSYNTH_H */
