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
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dogsynth/placement.hpp"
#include "support.hpp"

using namespace dogsynth;

namespace {

BBoxStats stats_of(std::initializer_list<BBoxEntry> e) { return BBoxStats{std::vector<BBoxEntry>(e)}; }

// Filter with widening, written straight from the selection rule.
std::vector<std::size_t> brute_window(const BBoxStats& st, double s)
{
    double w = 0.1;
    for (;;) {
        std::vector<std::size_t> hit;
        for (std::size_t i = 0; i < st.entries.size(); ++i) {
            const double v = st.entries[i].size_fraction;
            if (v >= s * (1.0 - w) && v <= s * (1.0 + w))
                hit.push_back(i);
        }
        if (hit.size() >= 2)
            return hit;
        bool covers_all = true;
        for (const auto& e : st.entries)
            covers_all = covers_all && e.size_fraction >= s * (1.0 - w) && e.size_fraction <= s * (1.0 + w);
        if (covers_all || hit.size() == st.entries.size()) {
            std::vector<std::size_t> all(st.entries.size());
            for (std::size_t i = 0; i < all.size(); ++i)
                all[i] = i;
            return all;
        }
        w *= 1.5;
    }
}

// Kolmogorov-Smirnov distance of samples against U[lo,hi].
double ks_uniform(std::vector<double> x, double lo, double hi)
{
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = (x[i] - lo) / (hi - lo);
        d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
    }
    return d;
}

} // namespace

TEST_CASE("depth mapping endpoints and degenerate case")
{
    const DepthBounds b{2.0, 10.0};
    CHECK(depth_for_size(0.5, 0.1, 0.5, b) == doctest::Approx(2.0));
    CHECK(depth_for_size(0.1, 0.1, 0.5, b) == doctest::Approx(10.0));
    CHECK(depth_for_size(0.3, 0.1, 0.5, b) == doctest::Approx(6.0));
    CHECK(depth_for_size(0.3, 0.3, 0.3, b) == doctest::Approx(6.0));

    Rng rng(1);
    const BBoxStats one = stats_of({{0.2, 0.5, 0.5}});
    CHECK(sample_root_depth(one, b, rng) == doctest::Approx(6.0));
    CHECK_THROWS_AS((DepthBounds{3.0, 3.0}.validate()), InvalidArgument);
    CHECK_THROWS_AS((DepthBounds{-1.0, 3.0}.validate()), InvalidArgument);
}

TEST_CASE("depth is monotone decreasing in box size")
{
    const DepthBounds b{1.5, 8.0};
    Rng rng(3);
    for (int i = 0; i < 10000; ++i) {
        const double s1 = uniform(rng, 0.01, 1.0), s2 = uniform(rng, 0.01, 1.0);
        const double d1 = depth_for_size(s1, 0.01, 1.0, b), d2 = depth_for_size(s2, 0.01, 1.0, b);
        if (s1 > s2)
            CHECK(d1 <= d2);
        CHECK(d1 >= b.near);
        CHECK(d1 <= b.far);
    }
}

TEST_CASE("uniform sizes give uniformly distributed depths")
{
    BBoxStats st;
    for (int i = 0; i < 1000; ++i)
        st.entries.push_back({0.01 + 0.98 * i / 999.0, 0.5, 0.5});
    const DepthBounds b{1.5, 8.0};
    Rng rng(12);
    std::vector<double> d;
    for (int i = 0; i < 10000; ++i)
        d.push_back(sample_root_depth(st, b, rng));
    CHECK(ks_uniform(d, b.near, b.far) < 0.02);
}

TEST_CASE("window selection matches a brute-force filter")
{
    Rng rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        BBoxStats st;
        const std::size_t n = 1 + uniform_index(rng, 40);
        for (std::size_t i = 0; i < n; ++i)
            st.entries.push_back({uniform(rng, 0.001, 1.0), uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0)});
        const double s = uniform(rng, 0.001, 1.0);
        const WindowSelection sel = select_window(st, s);
        CHECK(sel.indices == brute_window(st, s));
        if (!sel.used_all)
            for (auto i : sel.indices) {
                CHECK(st.entries[i].size_fraction >= s * (1.0 - sel.half_width));
                CHECK(st.entries[i].size_fraction <= s * (1.0 + sel.half_width));
            }
    }
}

TEST_CASE("window widening covers stats that miss the initial window")
{
    const BBoxStats st = stats_of({{0.9, 0.2, 0.2}, {0.8, 0.3, 0.3}, {0.01, 0.5, 0.5}});
    const WindowSelection sel = select_window(st, 0.3);
    CHECK(sel.indices.size() >= 2);
    CHECK(sel.half_width > 0.1);
    Rng rng(4);
    CHECK_NOTHROW(sample_center(st, 0.3, rng));
}

TEST_CASE("center gaussian: single entry and two-entry mean")
{
    Rng rng(6);
    const BBoxStats one = stats_of({{0.2, 0.5, 0.5}});
    const Vec2 cp = sample_center(one, 0.2, rng);
    CHECK(cp == Vec2(0.5, 0.5));

    const BBoxStats two = stats_of({{0.2, 0.4, 0.5}, {0.2, 0.6, 0.5}});
    const CenterGaussian g = fit_center_gaussian(two, select_window(two, 0.2));
    CHECK(g.mean.x() == doctest::Approx(0.5));
    CHECK(g.mean.y() == doctest::Approx(0.5));
    // Sample standard deviation with the n-1 denominator.
    CHECK(g.stddev.x() == doctest::Approx(std::sqrt(0.02)));
    CHECK(g.stddev.y() == doctest::Approx(0.0));
    Vec2 sum = Vec2::Zero();
    for (int i = 0; i < 10000; ++i)
        sum += sample_center(two, 0.2, rng);
    CHECK(std::abs(sum.x() / 10000 - 0.5) < 0.01);
    CHECK(std::abs(sum.y() / 10000 - 0.5) < 0.01);
}

TEST_CASE("clamp_translation hand cases")
{
    SUBCASE("already centered")
    {
        const PixelRect box{100, 50, 200, 150};
        CHECK(clamp_translation(box, Vec2(150.0 / 400, 100.0 / 200), 400, 200) == std::array<int, 2>{0, 0});
    }
    SUBCASE("box touching the top cannot move further up; x still moves")
    {
        const PixelRect box{100, 0, 200, 80};
        const auto s = clamp_translation(box, Vec2(0.25, 0.05), 400, 200);
        CHECK(s[1] == 0);
        CHECK(s[0] == -50);
    }
    SUBCASE("box taller than the image never moves vertically")
    {
        const PixelRect box{10, -20, 60, 280};
        const auto s = clamp_translation(box, Vec2(0.5, 0.1), 455, 256);
        CHECK(s[1] == 0);
        CHECK(s[0] == 228 - 35);
    }
    SUBCASE("partial move toward an edge stops at the edge")
    {
        const PixelRect box{300, 20, 380, 60};
        const auto s = clamp_translation(box, Vec2(0.99, 0.2), 400, 200);
        CHECK(s[0] == 20);
        CHECK(s[1] == 0);
    }
    SUBCASE("degenerate box")
    {
        CHECK_THROWS_AS(clamp_translation(PixelRect{5, 5, 5, 9}, Vec2(0.5, 0.5), 100, 100), InvalidArgument);
    }
}

TEST_CASE("clamped boxes stay in frame and unclamped ones hit the target")
{
    Rng rng(17);
    const int w = 455, h = 256;
    int unclamped = 0;
    for (int i = 0; i < 10000; ++i) {
        const int bw = 1 + static_cast<int>(uniform_index(rng, w));
        const int bh = 1 + static_cast<int>(uniform_index(rng, h));
        const int x0 = static_cast<int>(uniform_index(rng, w - bw + 1));
        const int y0 = static_cast<int>(uniform_index(rng, h - bh + 1));
        const PixelRect box{x0, y0, x0 + bw, y0 + bh};
        const Vec2 cp(uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0));
        const auto s = clamp_translation(box, cp, w, h);
        const PixelRect moved{box.x0 + s[0], box.y0 + s[1], box.x1 + s[0], box.y1 + s[1]};
        CHECK(moved.x0 >= 0);
        CHECK(moved.y0 >= 0);
        CHECK(moved.x1 <= w);
        CHECK(moved.y1 <= h);
        const double tx = cp.x() * w, ty = cp.y() * h;
        const bool fits_x = tx - 0.5 * bw >= 0 && tx + 0.5 * bw <= w;
        const bool fits_y = ty - 0.5 * bh >= 0 && ty + 0.5 * bh <= h;
        if (fits_x && fits_y) {
            ++unclamped;
            CHECK(std::abs(moved.center_x() - tx) <= 1.0);
            CHECK(std::abs(moved.center_y() - ty) <= 1.0);
        }
    }
    CHECK(unclamped > 100);
}

TEST_CASE("clamping one axis never changes the other")
{
    Rng rng(23);
    for (int i = 0; i < 2000; ++i) {
        const PixelRect box{static_cast<int>(uniform_index(rng, 300)), static_cast<int>(uniform_index(rng, 150)), 0, 0};
        PixelRect b = box;
        b.x1 = b.x0 + 1 + static_cast<int>(uniform_index(rng, 150));
        b.y1 = b.y0 + 1 + static_cast<int>(uniform_index(rng, 100));
        const Vec2 cp(uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0));
        const Vec2 cp_other_y(cp.x(), uniform(rng, 0.0, 1.0));
        CHECK(clamp_translation(b, cp, 455, 256)[0] == clamp_translation(b, cp_other_y, 455, 256)[0]);
    }
}

TEST_CASE("statistics from joint annotations")
{
    test::TempDir dir("stats");
    test::write_text(dir / "a.jsonl",
                     "{\"image_w\":455,\"image_h\":256,\"joints\":[[10,10],[110,210]]}\n"
                     "{\"image_w\":455,\"image_h\":256,\"joints\":[[10,10]]}\n"
                     "\n"
                     "{\"image_w\":455,\"image_h\":256,\"joints\":[[10,10],[-5,-5],[500,20],[50,60]]}\n");
    const DeriveResult r = derive_bbox_stats(dir / "a.jsonl");
    CHECK(r.records == 3);
    CHECK(r.skipped == 1);
    REQUIRE(r.stats.entries.size() == 2);
    CHECK(r.stats.entries[0].size_fraction == doctest::Approx(20000.0 / 116480.0));
    CHECK(r.stats.entries[0].cx == doctest::Approx(60.0 / 455.0));
    CHECK(r.stats.entries[0].cy == doctest::Approx(110.0 / 256.0));
    CHECK(r.stats.entries[1].size_fraction == doctest::Approx(40.0 * 50.0 / 116480.0));

    save_bbox_stats_csv(r.stats, dir / "s.csv");
    const BBoxStats back = load_bbox_stats_csv(dir / "s.csv");
    REQUIRE(back.entries.size() == 2);
    CHECK(back.entries[0].size_fraction == r.stats.entries[0].size_fraction);
    CHECK(back.entries[1].cy == r.stats.entries[1].cy);

    test::write_text(dir / "empty.jsonl", "");
    CHECK_THROWS_AS(derive_bbox_stats(dir / "empty.jsonl"), FormatError);
    test::write_text(dir / "bad.csv", "a,b\n1,2\n");
    CHECK_THROWS_AS(load_bbox_stats_csv(dir / "bad.csv"), FormatError);
    test::write_text(dir / "range.csv", "size_fraction,cx,cy\n1.5,0.5,0.5\n");
    CHECK_THROWS(load_bbox_stats_csv(dir / "range.csv"));
}

TEST_CASE("synthetic statistics are valid and deterministic")
{
    const BBoxStats a = synthetic_bbox_stats(500, 4);
    const BBoxStats b = synthetic_bbox_stats(500, 4);
    CHECK_NOTHROW(a.validate());
    REQUIRE(a.entries.size() == 500);
    for (std::size_t i = 0; i < 500; ++i)
        CHECK(a.entries[i].size_fraction == b.entries[i].size_fraction);
}
