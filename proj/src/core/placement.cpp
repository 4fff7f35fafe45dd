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
#include "dogsynth/placement.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dogsynth {

namespace {

constexpr double kInitialHalfWidth = 0.1;
constexpr double kWidenFactor = 1.5;

} // namespace

void BBoxStats::validate() const
{
    require(!entries.empty(), "bounding-box statistics are empty");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (!(e.size_fraction > 0.0 && e.size_fraction <= 1.0))
            throw InvalidArgument("bbox entry " + std::to_string(i) + ": size_fraction must be in (0,1]");
        if (!(e.cx >= 0.0 && e.cx <= 1.0 && e.cy >= 0.0 && e.cy <= 1.0))
            throw InvalidArgument("bbox entry " + std::to_string(i) + ": center must be in [0,1]^2");
    }
}

double BBoxStats::min_size() const
{
    return std::min_element(entries.begin(), entries.end(),
                            [](const auto& a, const auto& b) { return a.size_fraction < b.size_fraction; })
        ->size_fraction;
}

double BBoxStats::max_size() const
{
    return std::max_element(entries.begin(), entries.end(),
                            [](const auto& a, const auto& b) { return a.size_fraction < b.size_fraction; })
        ->size_fraction;
}

void DepthBounds::validate() const
{
    if (!(near > 0.0 && near < far && std::isfinite(far)))
        throw InvalidArgument("depth bounds must satisfy 0 < near < far");
}

double depth_for_size(double s, double s_min, double s_max, const DepthBounds& b)
{
    b.validate();
    if (s_max <= s_min)
        return 0.5 * (b.near + b.far);
    return b.far - (b.far - b.near) * (s - s_min) / (s_max - s_min);
}

double sample_root_depth(const BBoxStats& stats, const DepthBounds& bounds, Rng& rng)
{
    stats.validate();
    bounds.validate();
    const auto& e = stats.entries[uniform_index(rng, stats.entries.size())];
    return depth_for_size(e.size_fraction, stats.min_size(), stats.max_size(), bounds);
}

WindowSelection select_window(const BBoxStats& stats, double s)
{
    require(!stats.entries.empty(), "bounding-box statistics are empty");
    require(s > 0.0 && s <= 1.0, "rendered box size must be in (0,1]");
    const double lo_all = stats.min_size();
    const double hi_all = stats.max_size();

    WindowSelection sel;
    sel.half_width = kInitialHalfWidth;
    for (;;) {
        const double lo = s * (1.0 - sel.half_width);
        const double hi = s * (1.0 + sel.half_width);
        sel.indices.clear();
        for (std::size_t i = 0; i < stats.entries.size(); ++i) {
            const double v = stats.entries[i].size_fraction;
            if (v >= lo && v <= hi)
                sel.indices.push_back(i);
        }
        if (sel.indices.size() >= 2)
            return sel;
        if (lo <= lo_all && hi >= hi_all) {
            sel.used_all = true;
            return sel; // window spans everything; indices already hold all entries
        }
        sel.half_width *= kWidenFactor;
    }
}

CenterGaussian fit_center_gaussian(const BBoxStats& stats, const WindowSelection& sel)
{
    require(!sel.indices.empty(), "no entries selected for the center distribution");
    CenterGaussian g;
    for (auto i : sel.indices)
        g.mean += Vec2(stats.entries[i].cx, stats.entries[i].cy);
    g.mean /= static_cast<double>(sel.indices.size());
    if (sel.indices.size() >= 2) {
        Vec2 var = Vec2::Zero();
        for (auto i : sel.indices) {
            const Vec2 d = Vec2(stats.entries[i].cx, stats.entries[i].cy) - g.mean;
            var += d.cwiseProduct(d);
        }
        var /= static_cast<double>(sel.indices.size() - 1);
        g.stddev = var.cwiseSqrt();
    }
    return g;
}

Vec2 sample_center(const BBoxStats& stats, double rendered_box_size, Rng& rng)
{
    const auto sel = select_window(stats, rendered_box_size);
    const auto g = fit_center_gaussian(stats, sel);
    const double zx = standard_normal(rng);
    const double zy = standard_normal(rng);
    return {g.mean.x() + g.stddev.x() * zx, g.mean.y() + g.stddev.y() * zy};
}

namespace {

int clamp_axis(int lo_edge, int hi_edge, int extent, double target)
{
    if (hi_edge - lo_edge > extent)
        return 0;
    const long ideal = std::lround(target - 0.5 * (lo_edge + hi_edge));
    // Shifts in [-lo_edge, extent - hi_edge] keep the box inside. Zero is
    // always allowed so a box that starts partly outside is never pushed
    // further out.
    const long lo = std::min<long>(-lo_edge, 0);
    const long hi = std::max<long>(extent - hi_edge, 0);
    return static_cast<int>(std::clamp(ideal, lo, hi));
}

} // namespace

std::array<int, 2> clamp_translation(const PixelRect& box, const Vec2& cp, int width, int height)
{
    require(!box.empty(), "cannot place a zero-size box");
    require(width > 0 && height > 0, "image size must be positive");
    require(box.x1 > 0 && box.y1 > 0 && box.x0 < width && box.y0 < height, "box does not intersect the image");
    return {clamp_axis(box.x0, box.x1, width, cp.x() * width), clamp_axis(box.y0, box.y1, height, cp.y() * height)};
}

DeriveResult derive_bbox_stats(const std::filesystem::path& jsonl)
{
    std::ifstream is(jsonl);
    if (!is)
        throw IoError("cannot open " + jsonl.string());
    DeriveResult out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        ++out.records;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(jsonl.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        double w = 0.0, h = 0.0;
        try {
            w = rec.at("image_w").get<double>();
            h = rec.at("image_h").get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(jsonl.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!(w > 0.0 && h > 0.0))
            throw FormatError(jsonl.string() + ":" + std::to_string(lineno) + ": image size must be positive");

        double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
        int valid = 0;
        for (const auto& j : rec.value("joints", nlohmann::json::array())) {
            if (!j.is_array() || j.size() < 2 || !j[0].is_number() || !j[1].is_number())
                continue;
            const double x = j[0].get<double>();
            const double y = j[1].get<double>();
            if (!std::isfinite(x) || !std::isfinite(y) || x < 0.0 || y < 0.0 || x > w || y > h)
                continue;
            ++valid;
            x0 = std::min(x0, x);
            y0 = std::min(y0, y);
            x1 = std::max(x1, x);
            y1 = std::max(y1, y);
        }
        const double area = valid >= 2 ? (x1 - x0) * (y1 - y0) : 0.0;
        if (valid < 2 || !(area > 0.0)) {
            ++out.skipped;
            continue;
        }
        out.stats.entries.push_back({area / (w * h), 0.5 * (x0 + x1) / w, 0.5 * (y0 + y1) / h});
    }
    if (out.records == 0)
        throw FormatError(jsonl.string() + ": no annotation records");
    if (out.stats.entries.empty())
        throw FormatError(jsonl.string() + ": every record was skipped (need >= 2 in-image joints)");
    return out;
}

BBoxStats load_bbox_stats_csv(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line))
        throw FormatError(path.string() + ": empty stats file");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "size_fraction,cx,cy")
        throw FormatError(path.string() + ": expected header 'size_fraction,cx,cy'");
    BBoxStats stats;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        BBoxEntry e;
        if (!(ls >> e.size_fraction >> e.cx >> e.cy))
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected three numbers");
        stats.entries.push_back(e);
    }
    try {
        stats.validate();
    } catch (const InvalidArgument& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return stats;
}

void save_bbox_stats_csv(const BBoxStats& stats, const std::filesystem::path& path)
{
    std::ofstream os(path, std::ios::trunc);
    if (!os)
        throw IoError("cannot open " + path.string() + " for writing");
    os << "size_fraction,cx,cy\n";
    char buf[96];
    for (const auto& e : stats.entries) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", e.size_fraction, e.cx, e.cy);
        os << buf;
    }
    if (!os)
        throw IoError("write failed for " + path.string());
}

BBoxStats synthetic_bbox_stats(std::size_t count, std::uint64_t seed)
{
    Rng rng(seed);
    BBoxStats stats;
    stats.entries.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        BBoxEntry e;
        e.size_fraction = std::clamp(std::exp(std::log(0.12) + 0.6 * standard_normal(rng)), 0.01, 0.9);
        // Large boxes cannot stray far from the middle of the frame.
        const double spread = 0.16 * (1.0 - std::sqrt(e.size_fraction));
        e.cx = std::clamp(0.5 + spread * standard_normal(rng), 0.05, 0.95);
        e.cy = std::clamp(0.55 + 0.8 * spread * standard_normal(rng), 0.05, 0.95);
        stats.entries.push_back(e);
    }
    return stats;
}

} // namespace dogsynth
