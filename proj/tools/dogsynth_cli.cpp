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
// Command-line front end. Everything goes through the C API.
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "dogsynth/dogsynth.h"

namespace {

int report_failure(ds_status s)
{
    std::fprintf(stderr, "error (%s): %s\n", ds_status_name(s), ds_last_error());
    return 1;
}

void print_progress(size_t done, size_t total, void*)
{
    if (done == total || done % 10 == 0)
        std::fprintf(stderr, "\r%zu/%zu", done, total);
    if (done == total)
        std::fprintf(stderr, "\n");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Synthetic dog dataset generator and segmentation evaluator"};
    app.set_version_flag("--version", ds_version());
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Render a dataset from a JSON config");
    std::string config, out;
    size_t count = 0;
    uint64_t seed = 0;
    int workers = 1;
    bool quiet = false;
    gen->add_option("--config", config, "Generation config (JSON)")->required()->check(CLI::ExistingFile);
    gen->add_option("--out", out, "Output directory")->required();
    auto* count_opt = gen->add_option("--count", count, "Number of samples (overrides the config)");
    auto* seed_opt = gen->add_option("--seed", seed, "Base seed (overrides the config)");
    gen->add_option("--workers", workers, "Worker threads")->check(CLI::Range(1, 256));
    gen->add_flag("--quiet", quiet, "No progress output");

    // assets synth
    auto* assets = app.add_subcommand("assets", "Asset pack tools");
    assets->require_subcommand(1);
    auto* synth = assets->add_subcommand("synth", "Build the procedural asset pack");
    std::string assets_out;
    uint64_t assets_seed = 7;
    synth->add_option("--out", assets_out, "Output directory")->required();
    synth->add_option("--seed", assets_seed, "Seed for procedural variation");

    // stats derive
    auto* stats = app.add_subcommand("stats", "Placement statistics");
    stats->require_subcommand(1);
    auto* derive = stats->add_subcommand("derive", "Bounding-box statistics from JSON-lines annotations");
    std::string annotations, stats_out;
    derive->add_option("--annotations", annotations, "JSON-lines file")->required()->check(CLI::ExistingFile);
    derive->add_option("--out", stats_out, "Output CSV")->required();

    // eval
    auto* ev = app.add_subcommand("eval", "Score heatmaps or masks against ground truth");
    std::string pred_dir, gt_dir, report_path, csv_path;
    double t0 = 0.7;
    int eval_workers = 1;
    ev->add_option("--pred", pred_dir, "Prediction directory (.png or .bin)")->required()->check(CLI::ExistingDirectory);
    ev->add_option("--gt", gt_dir, "Ground-truth directory")->required()->check(CLI::ExistingDirectory);
    ev->add_option("--t0", t0, "Initial threshold estimate")->check(CLI::Range(0.0, 1.0));
    ev->add_option("--report", report_path, "JSON report path");
    ev->add_option("--csv", csv_path, "CSV report path");
    ev->add_option("--workers", eval_workers, "Worker threads")->check(CLI::Range(1, 256));

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        ds_generate_options o;
        ds_generate_options_init(&o);
        o.override_count = count_opt->count() > 0;
        o.count = count;
        o.override_seed = seed_opt->count() > 0;
        o.seed = seed;
        o.workers = workers;
        if (!quiet)
            o.progress = print_progress;
        ds_generate_result r{};
        if (ds_status s = ds_generate(config.c_str(), out.c_str(), &o, &r); s != DS_OK)
            return report_failure(s);
        std::printf("generated %zu, kept %zu existing, manifest %s/manifest.json\n", r.generated, r.skipped,
                    out.c_str());
        return 0;
    }
    if (synth->parsed()) {
        if (ds_status s = ds_assets_synth(assets_out.c_str(), assets_seed); s != DS_OK)
            return report_failure(s);
        std::printf("asset pack written to %s (config: %s/config.json)\n", assets_out.c_str(), assets_out.c_str());
        return 0;
    }
    if (derive->parsed()) {
        size_t records = 0, skipped = 0;
        if (ds_status s = ds_stats_derive(annotations.c_str(), stats_out.c_str(), &records, &skipped); s != DS_OK)
            return report_failure(s);
        std::printf("%zu records, %zu skipped, %zu entries written to %s\n", records, skipped, records - skipped,
                    stats_out.c_str());
        return 0;
    }
    if (ev->parsed()) {
        ds_report* rep = nullptr;
        if (ds_status s = ds_eval_dirs(pred_dir.c_str(), gt_dir.c_str(), t0, eval_workers, &rep); s != DS_OK)
            return report_failure(s);
        ds_eval_summary sum{};
        ds_report_summary(rep, &sum);
        const struct {
            int kind;
            const char* label;
        } lists[] = {{DS_MSG_UNMATCHED_PRED, "unmatched prediction"},
                     {DS_MSG_UNMATCHED_GT, "unmatched ground truth"},
                     {DS_MSG_WARNING, "warning"},
                     {DS_MSG_FAILURE, "failed"}};
        for (const auto& l : lists)
            for (size_t i = 0; const char* msg = ds_report_message(rep, l.kind, i); ++i)
                std::fprintf(stderr, "%s: %s\n", l.label, msg);
        std::printf("images %zu  IoU %.4f  Dice/F2 %.4f  F-beta2 %.4f  Acc %.2f%%\n", sum.count, sum.mean_iou,
                    sum.mean_dice, sum.mean_f2, sum.mean_accuracy_pct);
        ds_status s = ds_report_write(rep, report_path.empty() ? nullptr : report_path.c_str(),
                                      csv_path.empty() ? nullptr : csv_path.c_str());
        ds_report_free(rep);
        return s == DS_OK ? 0 : report_failure(s);
    }
    return 0;
}
