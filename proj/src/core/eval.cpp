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
#include "dogsynth/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "dogsynth/common.hpp"

namespace dogsynth {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void require_same_shape(int aw, int ah, int bw, int bh)
{
    if (aw != bw || ah != bh)
        throw InvalidArgument("mask shapes differ: " + std::to_string(aw) + "x" + std::to_string(ah) + " vs " +
                              std::to_string(bw) + "x" + std::to_string(bh));
}

std::string lower_ext(const fs::path& p)
{
    std::string e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
    return e;
}

// Stem -> path for every .png / .bin file in `dir`.
std::map<std::string, fs::path> list_inputs(const fs::path& dir)
{
    if (!fs::is_directory(dir))
        throw IoError(dir.string() + " is not a directory");
    std::map<std::string, fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file())
            continue;
        const std::string ext = lower_ext(e.path());
        if (ext != ".png" && ext != ".bin")
            continue;
        const std::string stem = e.path().stem().string();
        auto [it, inserted] = out.emplace(stem, e.path());
        if (!inserted)
            throw InvalidArgument("ambiguous inputs for '" + stem + "' in " + dir.string());
    }
    return out;
}

Plane<float> gray_from_png(const RawImage& raw, bool& binary)
{
    Plane<float> hm(raw.width, raw.height);
    bool only_0_255 = true, only_0_1 = true;
    for (std::size_t i = 0; i < hm.data.size(); ++i) {
        double v = 0.0;
        for (int c = 0; c < raw.channels; ++c)
            v += raw.pixels[i * raw.channels + c];
        v /= raw.channels;
        only_0_255 = only_0_255 && (v == 0.0 || v == 255.0);
        only_0_1 = only_0_1 && (v == 0.0 || v == 1.0);
        hm.data[i] = static_cast<float>(v);
    }
    binary = only_0_255 || only_0_1;
    const float scale = (binary && !only_0_255) ? 1.0f : 1.0f / 255.0f;
    for (float& v : hm.data)
        v *= scale;
    return hm;
}

double safe_ratio(double num, double den) { return den == 0.0 ? 1.0 : num / den; }

} // namespace

// --- thresholding --------------------------------------------------------

ThresholdResult iterative_threshold(const Heatmap& hm, double t0, double tol, int max_iter)
{
    require(t0 > 0.0 && t0 < 1.0, "initial threshold must lie in (0,1)");
    require(tol > 0.0, "tolerance must be positive");
    require(max_iter >= 1, "iteration limit must be at least 1");
    require(!hm.data.empty(), "heatmap is empty");

    std::vector<double> v(hm.data.begin(), hm.data.end());
    for (double x : v)
        if (!std::isfinite(x))
            throw InvalidArgument("heatmap contains non-finite values");
    std::sort(v.begin(), v.end());
    std::vector<double> prefix(v.size() + 1, 0.0);
    for (std::size_t i = 0; i < v.size(); ++i)
        prefix[i + 1] = prefix[i] + v[i];
    const std::size_t n = v.size();

    // Number of values strictly below t.
    auto split = [&](double t) { return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), t) - v.begin()); };

    ThresholdResult r;
    double t = t0;
    std::size_t k = split(t);
    for (int it = 1; it <= max_iter; ++it) {
        const bool lo_empty = k == 0;
        const bool hi_empty = k == n;
        double mu_lo = lo_empty ? 0.0 : prefix[k] / static_cast<double>(k);
        double mu_hi = hi_empty ? 0.0 : (prefix[n] - prefix[k]) / static_cast<double>(n - k);
        if (lo_empty)
            mu_lo = mu_hi;
        if (hi_empty)
            mu_hi = mu_lo;
        const double next = 0.5 * (mu_lo + mu_hi);
        const std::size_t next_k = split(next);
        const bool settled = std::abs(next - t) < tol && next_k == k;
        t = next;
        k = next_k;
        r.iterations = it;
        if (settled) {
            r.converged = true;
            break;
        }
    }
    r.threshold = t;
    r.mask = binarize(hm, t);
    return r;
}

BinaryMask binarize(const Heatmap& hm, double t)
{
    BinaryMask m(hm.width, hm.height);
    for (std::size_t i = 0; i < hm.data.size(); ++i)
        m.data[i] = static_cast<double>(hm.data[i]) >= t ? 1 : 0;
    return m;
}

// --- metrics -------------------------------------------------------------

Confusion confusion(const BinaryMask& pred, const BinaryMask& gt)
{
    require_same_shape(pred.width, pred.height, gt.width, gt.height);
    Confusion c;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const bool p = pred.data[i] != 0;
        const bool g = gt.data[i] != 0;
        if (p && g)
            ++c.tp;
        else if (p)
            ++c.fp;
        else if (g)
            ++c.fn;
        else
            ++c.tn;
    }
    return c;
}

double iou(const Confusion& c) { return safe_ratio(c.tp, c.tp + c.fp + c.fn); }
double dice(const Confusion& c) { return safe_ratio(2.0 * c.tp, 2.0 * c.tp + c.fp + c.fn); }

double f_beta(const Confusion& c, double beta)
{
    require(beta > 0.0, "beta must be positive");
    const double b2 = beta * beta;
    return safe_ratio((1.0 + b2) * c.tp, (1.0 + b2) * c.tp + b2 * c.fn + c.fp);
}

double pixel_accuracy(const Confusion& c)
{
    const long long total = c.tp + c.fp + c.fn + c.tn;
    return safe_ratio(static_cast<double>(c.tp + c.tn), static_cast<double>(total));
}

double iou(const BinaryMask& a, const BinaryMask& b) { return iou(confusion(a, b)); }
double dice_f2(const BinaryMask& a, const BinaryMask& b) { return dice(confusion(a, b)); }
double f_beta(const BinaryMask& pred, const BinaryMask& gt, double beta) { return f_beta(confusion(pred, gt), beta); }
double pixel_accuracy(const BinaryMask& a, const BinaryMask& gt) { return pixel_accuracy(confusion(a, gt)); }

// --- loading -------------------------------------------------------------

LoadedPrediction load_prediction(const fs::path& path)
{
    LoadedPrediction p;
    if (lower_ext(path) == ".bin") {
        p.heatmap = read_float_plane(path);
        bool binary = true;
        for (float& v : p.heatmap.data) {
            if (std::isnan(v))
                throw FormatError(path.string() + ": heatmap contains NaN");
            if (v < 0.0f || v > 1.0f) {
                v = std::clamp(v, 0.0f, 1.0f);
                ++p.clamped;
            }
            binary = binary && (v == 0.0f || v == 1.0f);
        }
        p.binary = binary;
        return p;
    }
    p.heatmap = gray_from_png(read_png(path), p.binary);
    return p;
}

BinaryMask load_ground_truth(const fs::path& path)
{
    Heatmap hm;
    if (lower_ext(path) == ".bin") {
        hm = read_float_plane(path);
    } else {
        bool binary = false;
        hm = gray_from_png(read_png(path), binary);
    }
    return binarize(hm, 0.5);
}

// --- batch evaluation ----------------------------------------------------

void finalize_means(MetricReport& r)
{
    r.mean_iou = r.mean_dice = r.mean_f2 = r.mean_accuracy_pct = 0.0;
    r.pooled = {};
    if (r.images.empty())
        return;
    for (const auto& m : r.images) {
        r.pooled.tp += m.counts.tp;
        r.pooled.fp += m.counts.fp;
        r.pooled.fn += m.counts.fn;
        r.pooled.tn += m.counts.tn;
        r.mean_iou += m.iou;
        r.mean_dice += m.dice;
        r.mean_f2 += m.f2;
        r.mean_accuracy_pct += m.accuracy_pct;
    }
    const double n = static_cast<double>(r.images.size());
    r.mean_iou /= n;
    r.mean_dice /= n;
    r.mean_f2 /= n;
    r.mean_accuracy_pct /= n;
}

MetricReport evaluate_dirs(const fs::path& pred_dir, const fs::path& gt_dir, double t0, int workers)
{
    require(t0 > 0.0 && t0 < 1.0, "initial threshold must lie in (0,1)");
    require(workers >= 1, "worker count must be at least 1");
    const auto preds = list_inputs(pred_dir);
    const auto gts = list_inputs(gt_dir);

    MetricReport report;
    report.t0 = t0;
    std::vector<std::string> names;
    for (const auto& [stem, path] : preds) {
        if (gts.count(stem))
            names.push_back(stem);
        else
            report.unmatched_pred.push_back(path.filename().string());
    }
    for (const auto& [stem, path] : gts)
        if (!preds.count(stem))
            report.unmatched_gt.push_back(path.filename().string());
    if (names.empty())
        throw InvalidArgument("no prediction/ground-truth pairs share a file name (" + std::to_string(preds.size()) +
                              " predictions, " + std::to_string(gts.size()) + " ground-truth files)");

    struct Slot {
        bool ok = false;
        ImageMetrics metrics;
        std::string warning;
        std::string failure;
    };
    std::vector<Slot> slots(names.size());
    std::atomic<std::size_t> next{0};

    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < names.size();) {
            Slot& s = slots[i];
            const std::string& name = names[i];
            try {
                const LoadedPrediction pred = load_prediction(preds.at(name));
                const BinaryMask gt = load_ground_truth(gts.at(name));
                ImageMetrics m;
                m.name = name;
                m.width = gt.width;
                m.height = gt.height;
                m.binary_input = pred.binary;
                BinaryMask mask;
                if (pred.binary) {
                    mask = binarize(pred.heatmap, 0.5);
                    m.threshold = std::numeric_limits<double>::quiet_NaN();
                } else {
                    ThresholdResult t = iterative_threshold(pred.heatmap, t0);
                    m.threshold = t.threshold;
                    m.iterations = t.iterations;
                    mask = std::move(t.mask);
                }
                m.counts = confusion(mask, gt);
                m.iou = iou(m.counts);
                m.dice = dice(m.counts);
                m.f2 = f_beta(m.counts, 2.0);
                m.accuracy_pct = 100.0 * pixel_accuracy(m.counts);
                s.metrics = std::move(m);
                s.ok = true;
                if (pred.clamped)
                    s.warning = name + ": " + std::to_string(pred.clamped) + " heatmap values clamped into [0,1]";
            } catch (const std::exception& e) {
                s.failure = name + ": " + e.what();
            }
        }
    };

    const int n_threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), names.size()));
    if (n_threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t)
            pool.emplace_back(work);
        for (auto& t : pool)
            t.join();
    }

    for (auto& s : slots) {
        if (!s.warning.empty())
            report.warnings.push_back(s.warning);
        if (s.ok)
            report.images.push_back(std::move(s.metrics));
        else
            report.failures.push_back(s.failure);
    }
    if (report.images.empty())
        throw InvalidArgument("no pair could be evaluated; first failure: " + report.failures.front());
    finalize_means(report);
    return report;
}

json MetricReport::to_json() const
{
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json per_image = json::array();
    json labels = json::array(), bars_iou = json::array(), bars_dice = json::array(), bars_f2 = json::array(),
         bars_acc = json::array();
    for (const auto& m : images) {
        per_image.push_back({{"name", m.name},
                             {"width", m.width},
                             {"height", m.height},
                             {"binary_input", m.binary_input},
                             {"threshold", num(m.threshold)},
                             {"iterations", m.iterations},
                             {"tp", m.counts.tp},
                             {"fp", m.counts.fp},
                             {"fn", m.counts.fn},
                             {"tn", m.counts.tn},
                             {"iou", m.iou},
                             {"dice_f2", m.dice},
                             {"f_beta2", m.f2},
                             {"accuracy_pct", m.accuracy_pct}});
        labels.push_back(m.name);
        bars_iou.push_back(m.iou);
        bars_dice.push_back(m.dice);
        bars_f2.push_back(m.f2);
        bars_acc.push_back(m.accuracy_pct);
    }
    return {
        {"t0", t0},
        {"count", images.size()},
        {"mean", {{"iou", mean_iou}, {"dice_f2", mean_dice}, {"f_beta2", mean_f2}, {"accuracy_pct", mean_accuracy_pct}}},
        {"pooled",
         {{"iou", iou(pooled)},
          {"dice_f2", dice(pooled)},
          {"f_beta2", f_beta(pooled, 2.0)},
          {"accuracy_pct", 100.0 * pixel_accuracy(pooled)},
          {"tp", pooled.tp},
          {"fp", pooled.fp},
          {"fn", pooled.fn},
          {"tn", pooled.tn}}},
        {"images", std::move(per_image)},
        {"unmatched_pred", unmatched_pred},
        {"unmatched_gt", unmatched_gt},
        {"warnings", warnings},
        {"failures", failures},
        {"bar_chart",
         {{"labels", std::move(labels)},
          {"iou", std::move(bars_iou)},
          {"dice_f2", std::move(bars_dice)},
          {"f_beta2", std::move(bars_f2)},
          {"accuracy_pct", std::move(bars_acc)}}},
    };
}

void MetricReport::write_json(const fs::path& path) const
{
    std::ofstream os(path);
    if (!os)
        throw IoError("cannot open " + path.string() + " for writing");
    os << to_json().dump(2) << "\n";
    if (!os)
        throw IoError("write failed for " + path.string());
}

void MetricReport::write_csv(const fs::path& path) const
{
    std::ofstream os(path);
    if (!os)
        throw IoError("cannot open " + path.string() + " for writing");
    char buf[256];
    os << "name,threshold,iou,dice_f2,f_beta2,accuracy_pct,tp,fp,fn,tn\n";
    for (const auto& m : images) {
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%.10g,%lld,%lld,%lld,%lld", m.threshold, m.iou,
                      m.dice, m.f2, m.accuracy_pct, m.counts.tp, m.counts.fp, m.counts.fn, m.counts.tn);
        os << m.name << "," << buf << "\n";
    }
    std::snprintf(buf, sizeof buf, "mean,,%.10g,%.10g,%.10g,%.10g,,,,", mean_iou, mean_dice, mean_f2,
                  mean_accuracy_pct);
    os << buf << "\n";
    std::snprintf(buf, sizeof buf, "pooled,,%.10g,%.10g,%.10g,%.10g,%lld,%lld,%lld,%lld", iou(pooled), dice(pooled),
                  f_beta(pooled, 2.0), 100.0 * pixel_accuracy(pooled), pooled.tp, pooled.fp, pooled.fn, pooled.tn);
    os << buf << "\n";
    if (!os)
        throw IoError("write failed for " + path.string());
}

} // namespace dogsynth
