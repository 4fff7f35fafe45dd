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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dogsynth/asset_pack.hpp"
#include "dogsynth/dataset.hpp"
#include "dogsynth/dog.hpp"
#include "dogsynth/eval.hpp"
#include "support.hpp"

#ifndef DOGSYNTH_CLI_PATH
#error "DOGSYNTH_CLI_PATH must point at the command-line tool"
#endif

using namespace dogsynth;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(const char* name, const std::function<Outcome()>& body)
{
    Outcome o;
    const auto t0 = Clock::now();
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %-26s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

Quat random_unit_quat(Rng& rng)
{
    return Quat(standard_normal(rng), standard_normal(rng), standard_normal(rng), standard_normal(rng)).normalized();
}

// ---------------------------------------------------------------------------

Outcome pca_round_trip()
{
    DogConfig cfg; // f = 4848
    const GeneratedDog dog = generate_canonical_dog(cfg);
    const PartLabels parts = part_labels(dog.mesh.weights, dog.mesh.faces);
    const SampleMatrix tex = procedural_textures(dog.mesh, parts, 12, 4, 7);

    const auto t0 = Clock::now();
    const PcaModel m = fit_pca(tex);
    const double fit_s = seconds_since(t0);

    double worst_rel = 0.0;
    for (Eigen::Index i = 0; i < tex.data.cols(); ++i) {
        const Eigen::VectorXd x = tex.data.col(i);
        const Eigen::VectorXd back = synthesize_raw(m, project(m, x));
        worst_rel = std::max(worst_rel, (back - x).norm() / x.norm());
    }
    const double ortho = orthonormality_error(m.basis);
    const bool ok = dog.achieved_faces == 4848 && m.n_features() == 4848 * 64 * 3 && worst_rel <= 1e-6 &&
                    ortho <= 1e-8 && fit_s < 30.0;
    return {ok, fmt("faces=%.0f rel_err=%.2e ortho=%.2e fit=%.2fs", dog.achieved_faces, worst_rel, ortho, fit_s)};
}

Outcome lbs_identity_equivariance()
{
    const GeneratedDog dog = generate_canonical_dog(DogConfig{});
    const RiggedMesh& m = dog.mesh;
    const auto t0 = Clock::now();

    const auto rest = apply_lbs(m, m.skeleton.rest_globals());
    double id_err = 0.0;
    for (std::size_t i = 0; i < rest.size(); ++i)
        id_err = std::max(id_err, (rest[i] - m.vertices[i]).norm());

    Rng rng(2024);
    double eq_err = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        PoseParams p = PoseParams::identity(m.skeleton.size());
        for (auto& q : p.joint_rotations)
            q = euler_xyz_deg(uniform(rng, -45, 45), uniform(rng, -45, 45), uniform(rng, -45, 45));
        const FkResult fk = forward_kinematics(m.skeleton, p);
        Transform r = Transform::Identity();
        r.rotate(random_unit_quat(rng));
        r.pretranslate(Vec3(uniform(rng, -5, 5), uniform(rng, -5, 5), uniform(rng, -5, 5)));
        std::vector<Transform> moved(fk.globals.size());
        for (std::size_t j = 0; j < moved.size(); ++j)
            moved[j] = r * fk.globals[j];
        const auto a = apply_lbs(m, moved);
        const auto b = apply_lbs(m, fk.globals);
        for (std::size_t i = 0; i < a.size(); ++i)
            eq_err = std::max(eq_err, (a[i] - r * b[i]).norm());
    }
    const double s = seconds_since(t0);
    return {id_err <= 1e-10 && eq_err <= 1e-8 && s < 5.0,
            fmt("identity=%.2e equivariance=%.2e poses=100 time=%.2fs", id_err, eq_err, s)};
}

// Shared by the compositing and reprojection criteria.
struct SampleSweep {
    std::size_t samples = 0;
    double worst_composite = 0.0;
    std::size_t inconsistent = 0;
    std::size_t empty = 0;
    double worst_reproj = 0.0;
    std::size_t joints = 0;
};

SampleSweep sweep_samples(const fs::path& pack, std::size_t count)
{
    GenerationConfig cfg = GenerationConfig::load(pack / "config.json");
    cfg.count = count;
    cfg.seed = 11;
    const Assets assets = Assets::load(cfg);
    const Camera cam = cfg.camera();
    SampleSweep r;
    for (std::size_t i = 0; i < count; ++i) {
        const DataSample s = generate_sample(cfg, assets, i);
        const ImageRGB& bg = assets.backgrounds.at(s.background).image;
        std::size_t on = 0;
        for (int y = 0; y < cfg.height; ++y)
            for (int x = 0; x < cfg.width; ++x) {
                const std::uint8_t mk = s.layer.mask.at(x, y);
                on += mk;
                const bool finite = std::isfinite(s.layer.depth.at(x, y));
                const bool labelled = s.layer.part_map.at(x, y) != kBackgroundPart;
                if (mk > 1 || (mk == 1) != finite || (mk == 1) != labelled)
                    ++r.inconsistent;
                for (int c = 0; c < 3; ++c) {
                    const double want = bg.at(x, y, c) * (1.0 - mk) + s.layer.rgb.at(x, y, c);
                    r.worst_composite = std::max(r.worst_composite, std::abs(s.image.at(x, y, c) - want));
                }
            }
        if (on == 0)
            ++r.empty;
        // Recorded joints as written to the annotation file.
        const nlohmann::json ann = nlohmann::json::parse(s.annotation().dump());
        const auto& shift = ann["translation"];
        for (const auto& j : ann["joints"]) {
            const auto& xyz = j["xyz"];
            const auto p = cam.project(Vec3(xyz[0].get<double>(), xyz[1].get<double>(), xyz[2].get<double>()));
            if (!p || j["x"].is_null()) {
                r.worst_reproj = std::numeric_limits<double>::infinity();
                continue;
            }
            const double e = std::hypot(p->x() + shift[0].get<double>() - j["x"].get<double>(),
                                        p->y() + shift[1].get<double>() - j["y"].get<double>());
            r.worst_reproj = std::max(r.worst_reproj, e);
            ++r.joints;
        }
        ++r.samples;
    }
    return r;
}

Outcome compositing(const SampleSweep& s)
{
    const bool ok = s.samples >= 100 && s.worst_composite <= 1e-7 && s.inconsistent == 0 && s.empty == 0;
    return {ok, fmt("samples=%.0f max_err=%.2e inconsistent_px=%.0f empty=%.0f", s.samples, s.worst_composite,
                    s.inconsistent, s.empty)};
}

Outcome reprojection(const SampleSweep& s)
{
    const bool ok = s.samples >= 1000 && s.worst_reproj < 0.5;
    return {ok, fmt("samples=%.0f joints=%.0f max_err=%.2e px", s.samples, s.joints, s.worst_reproj)};
}

std::vector<std::size_t> brute_window(const BBoxStats& st, double s)
{
    for (double w = 0.1;; w *= 1.5) {
        std::vector<std::size_t> hit;
        for (std::size_t i = 0; i < st.entries.size(); ++i) {
            const double v = st.entries[i].size_fraction;
            if (v >= s * (1.0 - w) && v <= s * (1.0 + w))
                hit.push_back(i);
        }
        if (hit.size() >= 2 || hit.size() == st.entries.size())
            return hit;
    }
}

Outcome placement()
{
    Rng rng(77);
    const BBoxStats stats = synthetic_bbox_stats(2000, 5);
    const DepthBounds bounds{1.5, 8.0};
    const int w = 455, h = 256;
    std::size_t non_monotone = 0, out_of_frame = 0, missed = 0, unclamped = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto& a = stats.entries[uniform_index(rng, stats.entries.size())];
        const auto& b = stats.entries[uniform_index(rng, stats.entries.size())];
        const double da = depth_for_size(a.size_fraction, stats.min_size(), stats.max_size(), bounds);
        const double db = depth_for_size(b.size_fraction, stats.min_size(), stats.max_size(), bounds);
        if ((a.size_fraction > b.size_fraction && da > db) || da < bounds.near || da > bounds.far)
            ++non_monotone;

        const int bw = 1 + static_cast<int>(uniform_index(rng, w));
        const int bh = 1 + static_cast<int>(uniform_index(rng, h));
        const int x0 = static_cast<int>(uniform_index(rng, w - bw + 1));
        const int y0 = static_cast<int>(uniform_index(rng, h - bh + 1));
        const PixelRect box{x0, y0, x0 + bw, y0 + bh};
        const Vec2 cp = sample_center(stats, static_cast<double>(box.area()) / (w * h), rng);
        const auto s = clamp_translation(box, cp, w, h);
        const PixelRect moved{box.x0 + s[0], box.y0 + s[1], box.x1 + s[0], box.y1 + s[1]};
        if (moved.x0 < 0 || moved.y0 < 0 || moved.x1 > w || moved.y1 > h)
            ++out_of_frame;
        const double tx = cp.x() * w, ty = cp.y() * h;
        if (tx - 0.5 * bw >= 0 && tx + 0.5 * bw <= w && ty - 0.5 * bh >= 0 && ty + 0.5 * bh <= h) {
            ++unclamped;
            if (std::hypot(moved.center_x() - tx, moved.center_y() - ty) > 1.0)
                ++missed;
        }
    }

    std::size_t window_mismatch = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        BBoxStats st;
        const std::size_t n = 1 + uniform_index(rng, 60);
        for (std::size_t i = 0; i < n; ++i)
            st.entries.push_back({uniform(rng, 0.001, 1.0), uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0)});
        const double s = uniform(rng, 0.001, 1.0);
        if (select_window(st, s).indices != brute_window(st, s))
            ++window_mismatch;
    }
    const bool ok = non_monotone == 0 && out_of_frame == 0 && missed == 0 && window_mismatch == 0 && unclamped > 0;
    return {ok, fmt("non_monotone=%.0f out_of_frame=%.0f missed_cp=%.0f/%.0f", non_monotone, out_of_frame, missed,
                    unclamped) +
                    fmt(" window_mismatch=%.0f/1000", window_mismatch)};
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string("\"") + DOGSYNTH_CLI_PATH + "\" " + args + " > /dev/null";
    return std::system(cmd.c_str());
}

std::map<std::string, std::string> snapshot(const fs::path& root)
{
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file())
            files[fs::relative(e.path(), root).generic_string()] = test::read_bytes(e.path());
    return files;
}

Outcome determinism(const fs::path& pack, const fs::path& work)
{
    const std::string cfg = (pack / "config.json").string();
    double worst = 0.0;
    std::vector<std::map<std::string, std::string>> runs;
    for (const auto& [name, workers] : std::vector<std::pair<std::string, int>>{{"a", 1}, {"b", 1}, {"c", 8}}) {
        const auto t0 = Clock::now();
        const int rc = run_cli("generate --config \"" + cfg + "\" --out \"" + (work / name).string() +
                               "\" --count 100 --seed 7 --quiet --workers " + std::to_string(workers));
        worst = std::max(worst, seconds_since(t0));
        if (rc != 0)
            return {false, "generate exited with status " + std::to_string(rc)};
        runs.push_back(snapshot(work / name));
    }
    const bool same_runs = runs[0] == runs[1];
    const bool same_workers = runs[0] == runs[2];
    const bool ok = same_runs && same_workers && runs[0].size() == 100 * 4 + 1 && worst < 120.0;
    return {ok, fmt("files=%.0f rerun_identical=%.0f workers_1_vs_8_identical=%.0f slowest_run=%.1fs",
                    runs[0].size(), same_runs, same_workers, worst)};
}

Outcome metric_oracles()
{
    Rng rng(5150);
    std::size_t wrong = 0, identity_off = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int w = 1 + static_cast<int>(uniform_index(rng, 16));
        const int h = 1 + static_cast<int>(uniform_index(rng, 16));
        BinaryMask a(w, h), b(w, h);
        const double pa = uniform(rng, 0.0, 1.0), pb = uniform(rng, 0.0, 1.0);
        for (auto& v : a.data)
            v = uniform(rng, 0.0, 1.0) < pa;
        for (auto& v : b.data)
            v = uniform(rng, 0.0, 1.0) < pb;
        long long inter = 0, uni = 0, na = 0, nb = 0, agree = 0;
        for (std::size_t i = 0; i < a.data.size(); ++i) {
            inter += a.data[i] && b.data[i];
            uni += a.data[i] || b.data[i];
            na += a.data[i];
            nb += b.data[i];
            agree += a.data[i] == b.data[i];
        }
        const double want_iou = uni ? static_cast<double>(inter) / uni : 1.0;
        const double want_dice = na + nb ? 2.0 * inter / (na + nb) : 1.0;
        const double want_acc = static_cast<double>(agree) / a.data.size();
        const double got_iou = iou(a, b), got_dice = dice_f2(a, b);
        if (got_iou != want_iou || got_dice != want_dice || pixel_accuracy(a, b) != want_acc)
            ++wrong;
        if (std::abs(got_dice - 2 * got_iou / (1 + got_iou)) > 1e-12)
            ++identity_off;
    }
    BinaryMask x(4, 4, 0), y(4, 4, 0);
    for (int i = 0; i < 8; ++i) {
        x.data[i] = 1;
        y.data[i + 8] = 1;
    }
    const bool cases = iou(x, x) == 1.0 && dice_f2(x, x) == 1.0 && pixel_accuracy(x, x) == 1.0 && iou(x, y) == 0.0 &&
                       dice_f2(x, y) == 0.0;
    return {wrong == 0 && identity_off == 0 && cases,
            fmt("pairs=1000 mismatches=%.0f dice_iou_identity_violations=%.0f hand_cases=%.0f", wrong, identity_off,
                cases)};
}

// Heatmap with a small confident-background cluster at 0.2 and two foreground
// modes at `lo`/`hi`. The low mode holds 60% of the remaining pixels.
Heatmap three_cluster(double lo, double hi, double sd, std::uint64_t seed)
{
    Rng rng(seed);
    Heatmap hm(256, 256);
    for (auto& v : hm.data) {
        const double u = uniform(rng, 0.0, 1.0);
        const double mu = u < 0.1 ? 0.2 : (u < 0.1 + 0.9 * 0.6 ? lo : hi);
        v = static_cast<float>(std::clamp(mu + sd * standard_normal(rng), 0.0, 1.0));
    }
    return hm;
}

// Two equal modes, no background cluster.
Heatmap two_modes(double lo, double hi, double sd, std::uint64_t seed)
{
    Rng rng(seed);
    Heatmap hm(256, 256);
    for (auto& v : hm.data)
        v = static_cast<float>(std::clamp((uniform(rng, 0.0, 1.0) < 0.5 ? lo : hi) + sd * standard_normal(rng), 0.0, 1.0));
    return hm;
}

Outcome threshold_sensitivity()
{
    double worst_sensitive = 0.0, worst_control = 1.0;
    double t_lo = 0.0, t_hi = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Heatmap hm = three_cluster(0.525, 0.725, 0.03, seed);
        const ThresholdResult a = iterative_threshold(hm, 0.5), b = iterative_threshold(hm, 0.7);
        worst_sensitive = std::max(worst_sensitive, iou(a.mask, b.mask));
        t_lo = a.threshold;
        t_hi = b.threshold;

        for (const Heatmap& c : {two_modes(0.1, 0.9, 0.05, seed), three_cluster(0.1, 0.9, 0.03, seed)}) {
            const ThresholdResult ca = iterative_threshold(c, 0.5), cb = iterative_threshold(c, 0.7);
            worst_control = std::min(worst_control, iou(ca.mask, cb.mask));
        }
    }
    return {worst_sensitive < 0.5 && worst_control > 0.99,
            fmt("0.525/0.725: t(0.5)=%.3f t(0.7)=%.3f max_iou=%.3f; 0.1/0.9: min_iou=%.4f", t_lo, t_hi,
                worst_sensitive, worst_control)};
}

} // namespace

int main()
{
    test::TempDir work("acceptance");
    const fs::path pack = work / "pack";
    std::printf("building default asset pack...\n");
    std::fflush(stdout);
    synthesize_asset_pack(pack, AssetPackOptions{});

    SampleSweep sweep;
    bool swept = false;
    auto ensure_sweep = [&] {
        if (!swept) {
            sweep = sweep_samples(pack, 1000);
            swept = true;
        }
    };

    report("pca_round_trip", pca_round_trip);
    report("lbs_identity_equivariance", lbs_identity_equivariance);
    report("compositing_identity", [&] {
        ensure_sweep();
        return compositing(sweep);
    });
    report("placement_soundness", placement);
    report("determinism", [&] { return determinism(pack, work.path()); });
    report("metric_oracles", metric_oracles);
    report("threshold_sensitivity", threshold_sensitivity);
    report("annotation_reprojection", [&] {
        ensure_sweep();
        return reprojection(sweep);
    });

    std::printf("%s: %d of 8 criteria failed\n", failures ? "FAILED" : "OK", failures);
    return failures ? 1 : 0;
}
