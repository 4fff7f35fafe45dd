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
#include <cstring>
#include <numbers>

#include "dogsynth/pca.hpp"
#include "support.hpp"

using namespace dogsynth;

namespace {

// Cyclic Jacobi rotations on a symmetric matrix. Returns eigenvalues
// (descending) and eigenvectors as columns.
void jacobi_eigen(std::vector<std::vector<double>> a, std::vector<double>& vals, std::vector<std::vector<double>>& vecs)
{
    const std::size_t n = a.size();
    std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        v[i][i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                off += a[p][q] * a[p][q];
        if (off < 1e-30)
            break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300)
                    continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a[x][x] > a[y][y]; });
    vals.clear();
    vecs.assign(n, std::vector<double>(n));
    for (std::size_t c = 0; c < n; ++c) {
        vals.push_back(a[order[c]][order[c]]);
        for (std::size_t r = 0; r < n; ++r)
            vecs[c][r] = v[r][order[c]];
    }
}

SampleMatrix shape_samples(const Eigen::MatrixXd& data)
{
    SampleMatrix m;
    m.data = data;
    m.layout = LayoutInfo::shape(static_cast<std::uint32_t>(data.rows() / 3));
    return m;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed)
{
    Rng rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r)
            m(r, c) = standard_normal(rng);
    return m;
}

PcaModel axis_model(const std::vector<double>& variances)
{
    const auto k = static_cast<Eigen::Index>(variances.size());
    PcaModel m;
    m.layout = LayoutInfo::shape(static_cast<std::uint32_t>(k));
    m.mean = Eigen::VectorXd::Zero(3 * k);
    m.basis = Eigen::MatrixXd::Identity(3 * k, k);
    m.variances = Eigen::Map<const Eigen::VectorXd>(variances.data(), k);
    return m;
}

} // namespace

TEST_CASE("pca agrees with a Jacobi eigen oracle on a 6x4 sample matrix")
{
    Eigen::MatrixXd x(6, 4);
    x << 1.0, 2.0, 0.5, -1.0,   //
        0.0, 1.0, 3.0, 2.0,     //
        -2.0, 0.5, 1.0, 0.0,    //
        4.0, -1.0, 0.0, 1.5,    //
        0.3, 0.3, -0.7, 2.2,    //
        1.1, -2.4, 0.9, 0.0;
    const PcaModel m = fit_pca(shape_samples(x));

    // Oracle: covariance eigenvectors with the n-1 denominator.
    const int n = 4;
    std::vector<double> mean(6, 0.0);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < n; ++c)
            mean[r] += x(r, c) / n;
    std::vector<std::vector<double>> cov(6, std::vector<double>(6, 0.0));
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            for (int c = 0; c < n; ++c)
                cov[i][j] += (x(i, c) - mean[i]) * (x(j, c) - mean[j]) / (n - 1);
    std::vector<double> vals;
    std::vector<std::vector<double>> vecs;
    jacobi_eigen(cov, vals, vecs);

    REQUIRE(m.n_components() == 3);
    for (int r = 0; r < 6; ++r)
        CHECK(m.mean[r] == doctest::Approx(mean[r]).epsilon(1e-14));
    for (int c = 0; c < 3; ++c) {
        CHECK(m.variances[c] == doctest::Approx(vals[c]).epsilon(1e-10));
        double dot = 0.0;
        for (int r = 0; r < 6; ++r)
            dot += m.basis(r, c) * vecs[c][r];
        CHECK(std::abs(dot) == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(vals[3] == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
}

TEST_CASE("pca basis is orthonormal, sign-normalized and sorted")
{
    const PcaModel m = fit_pca(shape_samples(random_matrix(60, 9, 11)));
    REQUIRE(m.n_components() == 8);
    CHECK(orthonormality_error(m.basis) < 1e-12);
    for (Eigen::Index c = 0; c < m.n_components(); ++c) {
        Eigen::Index arg = 0;
        m.basis.col(c).cwiseAbs().maxCoeff(&arg);
        CHECK(m.basis(arg, c) > 0.0);
        if (c > 0)
            CHECK(m.variances[c] <= m.variances[c - 1]);
    }
}

TEST_CASE("pca reconstructs every training sample from its projection")
{
    const Eigen::MatrixXd x = random_matrix(90, 12, 5);
    const PcaModel m = fit_pca(shape_samples(x));
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const Eigen::VectorXd rec = synthesize_raw(m, project(m, x.col(c)));
        CHECK((rec - x.col(c)).norm() / x.col(c).norm() < 1e-10);
    }
}

TEST_CASE("projection matches the normal-equation least-squares solution")
{
    const PcaModel m = fit_pca(shape_samples(random_matrix(30, 6, 9)));
    const Eigen::VectorXd y = random_matrix(30, 1, 10).col(0);
    const Eigen::MatrixXd& b = m.basis;
    const Eigen::VectorXd normal = (b.transpose() * b).inverse() * b.transpose() * (y - m.mean);
    CHECK((project(m, y) - normal).norm() < 1e-10);
}

TEST_CASE("pca rank is bounded by the sample count")
{
    Eigen::MatrixXd x = random_matrix(30, 5, 1);
    CHECK(fit_pca(shape_samples(x)).n_components() == 4);

    x.col(3) = x.col(0);
    x.col(4) = x.col(1);
    CHECK(fit_pca(shape_samples(x)).n_components() == 2);

    Eigen::MatrixXd constant = Eigen::MatrixXd::Ones(30, 4);
    const PcaModel flat = fit_pca(shape_samples(constant));
    CHECK(flat.n_components() == 0);
    CHECK(synthesize(flat, Eigen::VectorXd()) == constant.col(0));
}

TEST_CASE("zero coefficients synthesize the mean; fewer coefficients pad with zeros")
{
    const PcaModel m = fit_pca(shape_samples(random_matrix(15, 6, 2)));
    CHECK(synthesize(m, Eigen::VectorXd::Zero(m.n_components())) == m.mean);
    Eigen::VectorXd two(2);
    two << 0.5, -1.0;
    Eigen::VectorXd full = Eigen::VectorXd::Zero(m.n_components());
    full.head(2) = two;
    CHECK((synthesize(m, two) - synthesize(m, full)).norm() < 1e-15);
    CHECK_THROWS_AS(synthesize(m, Eigen::VectorXd::Ones(m.n_components() + 1)), InvalidArgument);
}

TEST_CASE("texture synthesis clamps to the unit interval while the raw form does not")
{
    Rng rng(4);
    SampleMatrix s;
    s.layout = LayoutInfo::texture(3, 2);
    s.data.resize(static_cast<Eigen::Index>(s.layout.feature_count()), 4);
    for (Eigen::Index i = 0; i < s.data.size(); ++i)
        s.data.data()[i] = uniform(rng, 0.0, 1.0);
    const PcaModel m = fit_pca(s);
    const Eigen::VectorXd big = Eigen::VectorXd::Constant(m.n_components(), 50.0);
    const Eigen::VectorXd raw = synthesize_raw(m, big);
    const Eigen::VectorXd clamped = synthesize(m, big);
    CHECK((raw.array() < 0.0 || raw.array() > 1.0).any());
    CHECK(clamped.minCoeff() >= 0.0);
    CHECK(clamped.maxCoeff() <= 1.0);
    for (Eigen::Index i = 0; i < raw.size(); ++i)
        CHECK(clamped[i] == std::clamp(raw[i], 0.0, 1.0));
}

TEST_CASE("fit_pca rejects bad input")
{
    CHECK_THROWS_AS(fit_pca(shape_samples(random_matrix(6, 1, 1))), InvalidArgument);
    SampleMatrix wrong = shape_samples(random_matrix(6, 3, 1));
    wrong.layout = LayoutInfo::shape(5);
    CHECK_THROWS_AS(fit_pca(wrong), InvalidArgument);
    Eigen::MatrixXd nan = random_matrix(6, 3, 1);
    nan(2, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(fit_pca(shape_samples(nan)), InvalidArgument);
    SampleMatrix tex;
    tex.layout = LayoutInfo::texture(1, 1);
    tex.data = Eigen::MatrixXd::Constant(3, 2, 1.5);
    CHECK_THROWS_AS(fit_pca(tex), InvalidArgument);
}

TEST_CASE("truncated coefficient sampling stays within two standard deviations")
{
    const double sigma = 2.0;
    const PcaModel m = axis_model({sigma * sigma});
    Rng rng(77);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0, max_abs = 0.0;
    for (int i = 0; i < n; ++i) {
        const double c = sample_coefficients(m, rng)[0];
        sum += c;
        sum2 += c * c;
        max_abs = std::max(max_abs, std::abs(c));
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum2 / n - mean * mean);
    // Standard deviation of N(0,1) truncated to [-2,2].
    const double phi2 = std::exp(-2.0) / std::sqrt(2.0 * std::numbers::pi);
    const double mass = std::erf(2.0 / std::sqrt(2.0));
    const double truncated_sd = std::sqrt(1.0 - 2.0 * 2.0 * phi2 / mass);
    CHECK(max_abs <= 2.0 * sigma);
    CHECK(max_abs > 1.9 * sigma);
    CHECK(std::abs(mean) < 0.01 * sigma);
    CHECK(sd == doctest::Approx(truncated_sd * sigma).epsilon(0.01));
}

TEST_CASE("coefficient sampling honours the scale and the seed")
{
    const PcaModel m = axis_model({4.0, 1.0, 0.25});
    Rng a(5), b(5), c(5);
    const Eigen::VectorXd x = sample_coefficients(m, a, 1.0);
    CHECK(x == sample_coefficients(m, b, 1.0));
    CHECK((sample_coefficients(m, c, 0.5) - 0.5 * x).norm() < 1e-15);
    Rng z(1);
    CHECK(sample_coefficients(m, z, 0.0).isZero());
    CHECK_THROWS_AS(sample_coefficients(m, z, -1.0), InvalidArgument);
}

TEST_CASE("texture tensor layout is face-major with interleaved channels")
{
    const std::uint32_t faces = 3, d = 2;
    Eigen::VectorXd f(faces * d * d * d * 3);
    for (Eigen::Index i = 0; i < f.size(); ++i)
        f[i] = static_cast<double>(i);
    const TextureTensor t = TextureTensor::from_features(f, faces, d);
    for (std::uint32_t face = 0; face < faces; ++face)
        for (std::uint32_t i = 0; i < d; ++i)
            for (std::uint32_t j = 0; j < d; ++j)
                for (std::uint32_t k = 0; k < d; ++k) {
                    const double base = ((((face * d + i) * d + j) * d + k) * 3);
                    CHECK(t.texel(face, i, j, k) == Vec3(base, base + 1, base + 2));
                }
    CHECK_THROWS_AS(TextureTensor::from_features(f, faces + 1, d), InvalidArgument);
}

TEST_CASE("binary model files round-trip and reject corruption")
{
    test::TempDir dir("pca");
    const PcaModel m = fit_pca(shape_samples(random_matrix(24, 5, 8)));
    const auto path = dir / "m.scpc";
    save_pca(m, path);
    const PcaModel back = load_pca(path);
    CHECK(back.layout == m.layout);
    CHECK(back.n_components() == m.n_components());
    CHECK((back.mean - m.mean).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((back.basis - m.basis).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((back.variances - m.variances).cwiseAbs().maxCoeff() < 1e-6 * m.variances[0]);
    CHECK(orthonormality_error(back.basis) < 1e-12);

    const std::string bytes = test::read_bytes(path);
    CHECK(bytes.substr(0, 4) == "SCPC");
    CHECK(bytes.size() == 32 + 4 * (24 * (4 + 1) + 4));

    auto write_variant = [&](const std::string& b) {
        const auto p = dir / "bad.scpc";
        test::write_text(p, b);
        return p;
    };
    std::string bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(load_pca(write_variant(bad)), FormatError);
    CHECK_THROWS_AS(load_pca(write_variant(bytes.substr(0, bytes.size() - 7))), FormatError);
    bad = bytes;
    bad[4] = 9; // version
    CHECK_THROWS_AS(load_pca(write_variant(bad)), FormatError);
    bad = bytes;
    const std::uint32_t huge = 0x7fffffff;
    std::memcpy(&bad[28], &huge, 4); // component count
    CHECK_THROWS_AS(load_pca(write_variant(bad)), FormatError);

    // Scale the first basis column so it is no longer unit length.
    bad = bytes;
    for (std::size_t i = 0; i < 24; ++i) {
        float v;
        std::memcpy(&v, &bad[32 + 4 * (24 + i)], 4);
        v *= 1.5f;
        std::memcpy(&bad[32 + 4 * (24 + i)], &v, 4);
    }
    CHECK_THROWS_AS(load_pca(write_variant(bad)), FormatError);
    CHECK_THROWS_AS(load_pca(dir / "missing.scpc"), IoError);
}

TEST_CASE("json export carries the model")
{
    const PcaModel m = fit_pca(shape_samples(random_matrix(6, 3, 8)));
    const auto j = pca_to_json(m);
    CHECK(j.at("layout") == "shape");
    CHECK(j.at("n_components") == 2);
    CHECK(j.at("basis").size() == 2);
    CHECK(j.at("mean").size() == 6);
}
