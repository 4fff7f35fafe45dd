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
#include "dogsynth/pca.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "binio.hpp"

namespace dogsynth {

namespace {

constexpr char kMagic[4] = {'S', 'C', 'P', 'C'};
constexpr std::uint32_t kFormatVersion = 1;

// Components whose variance falls below this fraction of the largest one are
// treated as numerical noise.
constexpr double kRelativeVarianceCutoff = 1e-10;

// f32 storage costs precision; the loader checks against this and then
// re-orthonormalizes in double.
constexpr double kLoadOrthoTolerance = 1e-4;

// Modified Gram-Schmidt, run twice ("twice is enough") for full double
// precision orthonormality without reordering columns.
void orthonormalize_columns(Eigen::MatrixXd& m)
{
    for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index i = 0; i < m.cols(); ++i) {
            for (Eigen::Index j = 0; j < i; ++j)
                m.col(i) -= m.col(j).dot(m.col(i)) * m.col(j);
            const double n = m.col(i).norm();
            if (!(n > 0.0))
                throw NumericError("basis column collapsed during orthonormalization");
            m.col(i) /= n;
        }
    }
}

void normalize_signs(Eigen::MatrixXd& basis)
{
    for (Eigen::Index c = 0; c < basis.cols(); ++c) {
        Eigen::Index arg = 0;
        basis.col(c).cwiseAbs().maxCoeff(&arg);
        if (basis(arg, c) < 0.0)
            basis.col(c) *= -1.0;
    }
}

} // namespace

std::size_t LayoutInfo::feature_count() const
{
    switch (kind) {
    case FeatureLayout::Texture:
        return static_cast<std::size_t>(dim0) * dim1 * dim1 * dim1 * 3;
    case FeatureLayout::Shape:
        return static_cast<std::size_t>(dim0) * 3;
    }
    throw InvalidArgument("unknown feature layout");
}

void SampleMatrix::validate() const
{
    require(data.cols() >= 2, "PCA needs at least 2 samples, got " + std::to_string(data.cols()));
    require(static_cast<std::size_t>(data.rows()) == layout.feature_count(),
            "sample row count does not match the declared layout");
    if (!data.allFinite())
        throw InvalidArgument("sample matrix contains non-finite values");
    if (layout.kind == FeatureLayout::Texture && (data.minCoeff() < 0.0 || data.maxCoeff() > 1.0))
        throw InvalidArgument("texture samples must lie in [0,1]");
}

void PcaModel::validate() const
{
    require(static_cast<std::size_t>(mean.size()) == layout.feature_count(), "PCA mean length does not match layout");
    require(basis.rows() == mean.size(), "PCA basis row count does not match mean");
    require(variances.size() == basis.cols(), "PCA variance count does not match basis");
    for (Eigen::Index i = 0; i < variances.size(); ++i) {
        require(variances[i] >= 0.0, "PCA variances must be non-negative");
        if (i > 0)
            require(variances[i] <= variances[i - 1], "PCA variances must be sorted descending");
    }
}

PcaModel fit_pca(const SampleMatrix& samples)
{
    samples.validate();
    const Eigen::Index n = samples.data.cols();

    PcaModel model;
    model.layout = samples.layout;
    model.mean = samples.data.rowwise().mean();

    const Eigen::MatrixXd centered = samples.data.colwise() - model.mean;
    // n x n Gram matrix instead of the (huge) feature covariance.
    const Eigen::MatrixXd gram = centered.transpose() * centered;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success)
        throw NumericError("eigendecomposition of the Gram matrix failed");

    // Eigen returns ascending order.
    const Eigen::VectorXd evals = solver.eigenvalues().reverse();
    const Eigen::MatrixXd evecs = solver.eigenvectors().rowwise().reverse();
    const double largest = evals.size() > 0 ? evals[0] : 0.0;

    Eigen::Index kept = 0;
    if (largest > 0.0) {
        while (kept < n - 1 && evals[kept] >= kRelativeVarianceCutoff * largest && evals[kept] > 0.0)
            ++kept;
    }

    model.basis.resize(samples.data.rows(), kept);
    model.variances.resize(kept);
    for (Eigen::Index c = 0; c < kept; ++c) {
        model.basis.col(c) = centered * evecs.col(c) / std::sqrt(evals[c]);
        model.variances[c] = evals[c] / static_cast<double>(n - 1);
    }
    if (kept > 0)
        orthonormalize_columns(model.basis);
    normalize_signs(model.basis);
    return model;
}

Eigen::VectorXd synthesize_raw(const PcaModel& model, const Eigen::VectorXd& coeffs)
{
    if (coeffs.size() > model.n_components())
        throw InvalidArgument("coefficient count " + std::to_string(coeffs.size()) + " exceeds component count " +
                              std::to_string(model.n_components()));
    if (!coeffs.allFinite())
        throw InvalidArgument("coefficients must be finite");
    Eigen::VectorXd out = model.mean;
    if (coeffs.size() > 0)
        out.noalias() += model.basis.leftCols(coeffs.size()) * coeffs;
    return out;
}

Eigen::VectorXd synthesize(const PcaModel& model, const Eigen::VectorXd& coeffs)
{
    Eigen::VectorXd out = synthesize_raw(model, coeffs);
    if (model.layout.kind == FeatureLayout::Texture)
        clamp_unit(out);
    return out;
}

Eigen::VectorXd project(const PcaModel& model, const Eigen::VectorXd& sample)
{
    if (sample.size() != model.n_features())
        throw InvalidArgument("sample length " + std::to_string(sample.size()) + " does not match model feature count " +
                              std::to_string(model.n_features()));
    return model.basis.transpose() * (sample - model.mean);
}

Eigen::VectorXd sample_coefficients(const PcaModel& model, Rng& rng, double scale)
{
    require(scale >= 0.0 && std::isfinite(scale), "coefficient scale must be non-negative");
    Eigen::VectorXd out(model.n_components());
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        double z = 0.0;
        do {
            z = standard_normal(rng);
        } while (std::abs(z) > 2.0);
        out[i] = z * scale * std::sqrt(model.variances[i]);
    }
    return out;
}

void clamp_unit(Eigen::VectorXd& v)
{
    v = v.cwiseMax(0.0).cwiseMin(1.0);
}

double orthonormality_error(const Eigen::MatrixXd& basis)
{
    if (basis.cols() == 0)
        return 0.0;
    const Eigen::MatrixXd gram = basis.transpose() * basis;
    return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

void save_pca(const PcaModel& model, const std::filesystem::path& path)
{
    model.validate();
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw IoError("cannot open " + path.string() + " for writing");
    os.write(kMagic, 4);
    detail::write_le<std::uint32_t>(os, kFormatVersion);
    detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(model.layout.kind));
    detail::write_le<std::uint32_t>(os, model.layout.dim0);
    detail::write_le<std::uint32_t>(os, model.layout.dim1);
    detail::write_le<std::uint64_t>(os, static_cast<std::uint64_t>(model.n_features()));
    detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(model.n_components()));
    for (Eigen::Index i = 0; i < model.mean.size(); ++i)
        detail::write_le<float>(os, static_cast<float>(model.mean[i]));
    for (Eigen::Index c = 0; c < model.basis.cols(); ++c)
        for (Eigen::Index r = 0; r < model.basis.rows(); ++r)
            detail::write_le<float>(os, static_cast<float>(model.basis(r, c)));
    for (Eigen::Index i = 0; i < model.variances.size(); ++i)
        detail::write_le<float>(os, static_cast<float>(model.variances[i]));
    if (!os)
        throw IoError("write failed for " + path.string());
}

PcaModel load_pca(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw IoError("cannot open " + path.string());
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError(path.string() + ": not a PCA model file (bad magic)");
    const auto version = detail::read_le<std::uint32_t>(is, "version");
    if (version != kFormatVersion)
        throw FormatError(path.string() + ": unsupported PCA format version " + std::to_string(version));

    PcaModel model;
    const auto kind = detail::read_le<std::uint32_t>(is, "layout");
    if (kind != static_cast<std::uint32_t>(FeatureLayout::Texture) && kind != static_cast<std::uint32_t>(FeatureLayout::Shape))
        throw FormatError(path.string() + ": unknown layout tag " + std::to_string(kind));
    model.layout.kind = static_cast<FeatureLayout>(kind);
    model.layout.dim0 = detail::read_le<std::uint32_t>(is, "dim0");
    model.layout.dim1 = detail::read_le<std::uint32_t>(is, "dim1");
    const auto n_features = detail::read_le<std::uint64_t>(is, "feature count");
    const auto n_components = detail::read_le<std::uint32_t>(is, "component count");
    if (n_features != model.layout.feature_count())
        throw FormatError(path.string() + ": feature count does not match layout");
    if (n_components > n_features)
        throw FormatError(path.string() + ": more components than features");
    // Header is 32 bytes; reject size claims the file cannot back before allocating.
    const std::uintmax_t expected = 32 + 4 * (n_features * (std::uintmax_t{n_components} + 1) + n_components);
    std::error_code ec;
    const std::uintmax_t actual = std::filesystem::file_size(path, ec);
    if (!ec && actual != expected)
        throw FormatError(path.string() + ": file is " + std::to_string(actual) + " bytes, header implies " +
                          std::to_string(expected));

    model.mean.resize(static_cast<Eigen::Index>(n_features));
    model.basis.resize(static_cast<Eigen::Index>(n_features), n_components);
    model.variances.resize(n_components);
    std::vector<float> buf(n_features);
    auto read_block = [&](const char* what) {
        if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float))))
            throw FormatError(path.string() + ": truncated " + what);
        if constexpr (std::endian::native == std::endian::big) {
            for (float& f : buf) {
                auto* b = reinterpret_cast<char*>(&f);
                std::reverse(b, b + sizeof(float));
            }
        }
    };
    read_block("mean");
    for (std::size_t i = 0; i < n_features; ++i)
        model.mean[static_cast<Eigen::Index>(i)] = buf[i];
    for (std::uint32_t c = 0; c < n_components; ++c) {
        read_block("basis");
        for (std::size_t i = 0; i < n_features; ++i)
            model.basis(static_cast<Eigen::Index>(i), c) = buf[i];
    }
    for (std::uint32_t c = 0; c < n_components; ++c)
        model.variances[c] = detail::read_le<float>(is, "variances");

    if (!model.mean.allFinite() || !model.basis.allFinite() || !model.variances.allFinite())
        throw FormatError(path.string() + ": non-finite values in PCA model");
    const double ortho = orthonormality_error(model.basis);
    if (ortho > kLoadOrthoTolerance)
        throw FormatError(path.string() + ": basis is not orthonormal (error " + std::to_string(ortho) + ")");
    if (n_components > 0)
        orthonormalize_columns(model.basis);
    try {
        model.validate();
    } catch (const InvalidArgument& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return model;
}

nlohmann::json pca_to_json(const PcaModel& model)
{
    auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    nlohmann::json basis = nlohmann::json::array();
    for (Eigen::Index c = 0; c < model.basis.cols(); ++c)
        basis.push_back(vec(model.basis.col(c)));
    return {
        {"layout", model.layout.kind == FeatureLayout::Texture ? "texture" : "shape"},
        {"dims", {model.layout.dim0, model.layout.dim1}},
        {"n_features", model.n_features()},
        {"n_components", model.n_components()},
        {"mean", vec(model.mean)},
        {"variances", vec(model.variances)},
        {"basis", std::move(basis)},
    };
}

TextureTensor TextureTensor::from_features(Eigen::VectorXd features, std::uint32_t faces, std::uint32_t d)
{
    require(d >= 1, "texel resolution must be at least 1");
    require(static_cast<std::size_t>(features.size()) == LayoutInfo::texture(faces, d).feature_count(),
            "feature vector length does not match faces x d^3 x 3");
    TextureTensor t;
    t.faces = faces;
    t.d = d;
    t.texels = std::move(features);
    return t;
}

} // namespace dogsynth
