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
#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "dogsynth/asset_pack.hpp"

namespace test {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("dogsynth-" + tag + "-" + std::to_string(rd()));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& s) const { return path_ / s; }

private:
    fs::path path_;
};

inline std::string read_bytes(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

inline void write_text(const fs::path& p, const std::string& text)
{
    std::ofstream os(p, std::ios::binary);
    os << text;
}

/// A reduced asset pack so dataset tests stay fast.
inline dogsynth::AssetPackOptions small_pack_options()
{
    dogsynth::AssetPackOptions o;
    o.face_budget = 816;
    o.texture_d = 2;
    o.texture_samples = 5;
    o.shape_variants = 4;
    o.backgrounds = 3;
    o.background_width = 200;
    o.background_height = 120;
    o.walk_phases = 4;
    o.stats_entries = 300;
    return o;
}

/// Built once per process; lives until exit.
inline const fs::path& small_pack_dir()
{
    static TempDir dir("pack");
    static bool built = false;
    if (!built) {
        dogsynth::synthesize_asset_pack(dir.path(), small_pack_options());
        built = true;
    }
    return dir.path();
}

inline dogsynth::GenerationConfig small_config(std::size_t count = 4, std::uint64_t seed = 3)
{
    dogsynth::GenerationConfig c;
    c.count = count;
    c.seed = seed;
    c.assets = dogsynth::AssetPaths::in_pack(small_pack_dir());
    c.width = 160;
    c.height = 96;
    c.focal = 180.0;
    return c;
}

} // namespace test
