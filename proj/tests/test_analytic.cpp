// SPDX-License-Identifier: Apache-2.0
//
// iasim - interference alignment link-level simulator and analytic SINR toolkit
// Copyright (C) 2026 The iasim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "test_support.hpp"

#include "iasim/analytic.hpp"
#include "iasim/experiments.hpp"

#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

using namespace iasim;
using Catch::Approx;

namespace
{
ComplexMatrix diag_matrix(double a, double b)
{
    ComplexMatrix R = ComplexMatrix::Zero(2, 2);
    R(0, 0) = a;
    R(1, 1) = b;
    return R;
}

CorrelationMatrix diag2(double a, double b) { return CorrelationMatrix(diag_matrix(a, b)); }
} // namespace

TEST_CASE("ExpDist is a normalized density", "[analytic]")
{
    for (double m : {0.01, 1.0, 24.75, 1e4})
    {
        const ExpDist e(m);
        const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [&](double x) { return e.pdf(x); }, 0.0, std::numeric_limits<double>::infinity());
        CHECK(mass == Approx(1.0).epsilon(1e-9));
        CHECK(e.cdf(e.quantile(0.3)) == Approx(0.3).epsilon(1e-12));
    }
    CHECK_THROWS_AS(ExpDist(0.0), std::invalid_argument);
    CHECK(pdf_perfect(100.0, 2).mean() == 50.0);
    CHECK_THROWS_AS(pdf_perfect(-1.0, 1), std::invalid_argument);
}

TEST_CASE("sigma2 bounds", "[analytic]")
{
    SECTION("d = 1 uses the reciprocal extreme eigenvalues")
    {
        const auto b = sigma2_bounds(diag2(1.5, 0.5), 1);
        REQUIRE(b.lower);
        CHECK(*b.lower == Approx(1.0 / 1.5));
        CHECK(b.upper == Approx(2.0));
    }
    SECTION("identity collapses to 1")
    {
        const auto R = CorrelationMatrix::identity(3);
        for (int d = 1; d <= 3; ++d)
        {
            const auto b = sigma2_bounds(R, d);
            REQUIRE(b.lower);
            CHECK(*b.lower == Approx(1.0));
            CHECK(b.upper == Approx(1.0));
        }
    }
    SECTION("d > 1 upper bound closed form")
    {
        const auto R = exp_correlation_matrix(cd(0.3, 0.0), 3);
        const auto &ev = R.eigenvalues();
        const double l1 = ev(0), lN = ev(2);
        const auto b = sigma2_bounds(R, 2);
        CHECK(b.upper == Approx((l1 / lN + lN / l1 + 2.0) / (4.0 * l1)));
        if (b.lower)
            CHECK(*b.lower <= b.upper);
    }
    SECTION("rank-deficient and out-of-range inputs")
    {
        CHECK_THROWS_AS(sigma2_bounds(diag2(2.0, 0.0), 1), std::invalid_argument);
        CHECK_THROWS_AS(sigma2_bounds(CorrelationMatrix::identity(2), 3), std::invalid_argument);
    }
}

TEST_CASE("sigma2 bounds sandwich the exact single-stream value", "[analytic][property]")
{
    // For any unit vector f, 1 / (f^H R f) lies in [1/lN, 1/l1].
    Rng rng(33);
    for (int t = 0; t < 20; ++t)
    {
        const int n = 2 + t % 4;
        const CorrelationMatrix R(test::random_psd(rng, n, 0.1, 1.0));
        const auto b = sigma2_bounds(R, 1);
        for (int k = 0; k < 20; ++k)
        {
            const ComplexVector f = rng.haar_frame(n, 1);
            const double s = 1.0 / f.dot(R.matrix() * f).real();
            CHECK(b.contains(s, 1e-10));
        }
    }
}

TEST_CASE("Wishart eigenvector moments", "[analytic]")
{
    SECTION("closed-form variance for diag(2, 1), D = 50")
    {
        const WishartEigvecMoments mom(diag_matrix(2.0, 1.0), 50.0);
        CHECK(mom.eigenvalues()(0) == 2.0);
        // (l_p / D) l_r / (l_r - l_p)^2 = (2/50) * 1 / 1
        CHECK(mom.cov(0, 0)(1, 1).real() == Approx(0.04).epsilon(1e-12));
        CHECK(std::abs(mom.cov(0, 0)(0, 0)) < 1e-15);
        CHECK(mom.cov(0, 1)(0, 1).real() == Approx(-2.0 / 50.0).epsilon(1e-12));
    }
    SECTION("covariance scales as 1/D")
    {
        const auto R = exp_correlation_matrix(cd(0.4, 0.2), 3);
        const WishartEigvecMoments a(R.matrix(), 10.0), b(R.matrix(), 40.0);
        for (int p = 0; p < 3; ++p)
            for (int q = 0; q < 3; ++q)
                CHECK((a.cov(p, q) - 4.0 * b.cov(p, q)).norm() < 1e-12);
    }
    SECTION("eigenvalue gap guard")
    {
        CHECK_THROWS_AS(WishartEigvecMoments(ComplexMatrix::Identity(2, 2), 5.0), std::invalid_argument);
        CHECK_THROWS_AS(WishartEigvecMoments(diag2(1.5, 0.5).matrix(), 0.0), std::invalid_argument);
    }
}

TEST_CASE("Wishart eigenvector variance matches Monte-Carlo at large D", "[analytic]")
{
    const ComplexMatrix R = diag_matrix(2.0, 1.0);
    const WishartEigvecMoments mom(R, 50.0);
    const ComplexMatrix S = psd_sqrt(R);
    Rng rng(19);
    const int n = 40000;
    double second = 0.0;
    cd first = 0.0;
    for (int t = 0; t < n; ++t)
    {
        const ComplexMatrix G = S * rng.complex_gaussian(2, 50);
        const auto e = linalg::eigh(G * G.adjoint() / 50.0);
        ComplexVector u = e.vectors.col(1);
        linalg::fix_phase_largest(u);
        second += std::norm(u(1));
        first += u(1);
    }
    const double var = second / n - std::norm(first / static_cast<double>(n));
    CHECK(var == Approx(mom.cov(0, 0)(1, 1).real()).epsilon(0.1));
}

TEST_CASE("Wishart eigenvector second moments are Hermitian PSD", "[analytic][property]")
{
    Rng rng(23);
    for (int t = 0; t < 30; ++t)
    {
        const int n = 2 + t % 3;
        const CorrelationMatrix R(test::random_psd(rng, n, 0.1, 1.0));
        const WishartEigvecMoments mom(R.matrix(), 2.0 + t);
        for (int p = 0; p < n; ++p)
        {
            const ComplexMatrix M = mom.second_moment(p, p);
            CHECK(linalg::hermitian_defect(M) <= 1e-13 * M.norm());
            CHECK(linalg::eigvalsh(M)(0) >= -1e-12 * M.norm());
            CHECK(M.trace().real() >= 1.0 - 1e-12);
        }
    }
}

TEST_CASE("approximate Rtilde", "[analytic]")
{
    const std::vector<int> d3{1, 1, 1};
    SECTION("identity is exact")
    {
        const auto a = approx_Rtilde(CorrelationMatrix::identity(2), 3, d3, 0);
        CHECK(a.exact);
        CHECK(a.matrix.isApprox(ComplexMatrix::Identity(1, 1)));
        CHECK(a.sigma2(0) == 1.0);
        CHECK(a.dof == 2.0);
    }
    SECTION("inconsistent input")
    {
        const auto R = exp_correlation_matrix(cd(0.3, 0.0), 2);
        CHECK_THROWS_AS(approx_Rtilde(R, 3, std::vector<int>{1, 1}, 0), std::invalid_argument);
        CHECK_THROWS_AS(approx_Rtilde(R, 3, d3, 3), std::invalid_argument);
        CHECK_THROWS_AS(approx_Rtilde(R, 3, std::vector<int>{3, 1, 1}, 0), std::invalid_argument);
    }
}

TEST_CASE("approximate sigma2 stays inside its bounds", "[analytic][property]")
{
    for (int t = 0; t < 40; ++t)
    {
        const double mag = 0.02 + 0.95 * (t / 40.0);
        const cd alpha = std::polar(mag, 0.3 * t);
        for (auto [K, N] : {std::pair{3, 2}, std::pair{5, 3}, std::pair{4, 3}})
        {
            const auto R = exp_correlation_matrix(alpha, N);
            const std::vector<int> d(K, 1);
            const auto a = approx_Rtilde(R, K, d, 0);
            INFO("alpha=" << alpha << " K=" << K << " N=" << N);
            CHECK(a.bounds[0].contains(a.sigma2(0), 1e-10));
        }
        // two streams per user: each diagonal entry is a normalized Rayleigh quotient
        const auto R4 = exp_correlation_matrix(alpha, 4);
        const auto a = approx_Rtilde(R4, 3, std::vector<int>{2, 2, 1}, 0);
        const auto &ev = R4.eigenvalues();
        for (int n = 0; n < 2; ++n)
        {
            CHECK(a.matrix(n, n).real() >= ev(0) - 1e-10);
            CHECK(a.matrix(n, n).real() <= ev(3) + 1e-10);
        }
        CHECK(linalg::hermitian_defect(a.matrix) < 1e-12);
    }
}

TEST_CASE("Wishart sum approximation", "[analytic]")
{
    using Part = std::pair<double, ComplexMatrix>;
    SECTION("single Wishart maps to itself")
    {
        const auto R = exp_correlation_matrix(cd(0.5, 0.0), 2).matrix();
        const std::vector<Part> parts{{3.0, R}};
        const auto [dbar, Rbar] = wishart_sum_approx(parts);
        CHECK(dbar == Approx(3.0).epsilon(1e-12));
        CHECK((Rbar - R).norm() < 1e-12);
    }
    SECTION("identical covariances add degrees of freedom")
    {
        const auto R = exp_correlation_matrix(cd(0.2, 0.1), 3).matrix();
        const std::vector<Part> parts{{1.0, R}, {2.0, R}};
        const auto [dbar, Rbar] = wishart_sum_approx(parts);
        CHECK(dbar == Approx(3.0).epsilon(1e-12));
        CHECK((Rbar - R).norm() < 1e-12);
    }
    SECTION("mixed covariances, hand-computed")
    {
        const std::vector<Part> parts{{1.0, ComplexMatrix::Identity(2, 2)}, {1.0, diag2(1.5, 0.5).matrix()}};
        const auto [dbar, Rbar] = wishart_sum_approx(parts);
        CHECK(dbar == Approx(1.96).epsilon(1e-12));
        CHECK(Rbar(0, 0).real() == Approx(2.5 / 1.96).epsilon(1e-12));
        CHECK(Rbar(1, 1).real() == Approx(1.5 / 1.96).epsilon(1e-12));
    }
    SECTION("bad input")
    {
        CHECK_THROWS_AS(wishart_sum_approx(std::vector<Part>{}), std::invalid_argument);
        const std::vector<Part> mismatch{{1.0, ComplexMatrix::Identity(2, 2)}, {1.0, ComplexMatrix::Identity(3, 3)}};
        CHECK_THROWS_AS(wishart_sum_approx(mismatch), std::invalid_argument);
    }
}

TEST_CASE("Wishart sum approximation matches Monte-Carlo moments", "[analytic]")
{
    using Part = std::pair<double, ComplexMatrix>;
    const ComplexMatrix B = diag2(1.5, 0.5).matrix();
    const std::vector<Part> parts{{1.0, ComplexMatrix::Identity(2, 2)}, {1.0, B}};
    const auto [dbar, Rbar] = wishart_sum_approx(parts);
    const ComplexMatrix Bs = psd_sqrt(B);
    Rng rng(41);
    const int n = 100000;
    ComplexMatrix mean = ComplexMatrix::Zero(2, 2);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(2, 2);
    for (int t = 0; t < n; ++t)
    {
        const ComplexVector a = rng.complex_gaussian(2, 1);
        const ComplexVector b = Bs * rng.complex_gaussian(2, 1);
        const ComplexMatrix T = a * a.adjoint() + b * b.adjoint();
        mean += T;
        second += T.cwiseAbs2();
    }
    mean /= n;
    second /= n;
    // first moment matches exactly in expectation
    CHECK((mean - dbar * Rbar).norm() / (dbar * Rbar).norm() < 0.02);
    // E|W_ij|^2 = n^2 |S_ij|^2 + n S_ii S_jj for W ~ CW(n, S)
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
        {
            const double approx = dbar * dbar * std::norm(Rbar(i, j)) + dbar * Rbar(i, i).real() * Rbar(j, j).real();
            CHECK(approx == Approx(second(i, j)).epsilon(0.1));
        }
}

TEST_CASE("precoder correlation sum", "[analytic]")
{
    const std::vector<int> d3{1, 1, 1};
    CHECK(calI(CorrelationMatrix::identity(2), 3, d3, {}) == 3.0);
    for (double a : {0.1, 0.5, 0.9})
    {
        const auto R = exp_correlation_matrix(cd(a, 0.0), 2);
        const auto per = approx_Rtilde_all(R, 3, d3);
        const double I = calI(R, 3, d3, per);
        CHECK(I >= 3.0 * R.eigenvalues()(0) - 1e-12);
        CHECK(I <= 3.0 * R.eigenvalues()(1) + 1e-12);
    }
    CHECK_THROWS_AS(calI(exp_correlation_matrix(cd(0.5, 0.0), 2), 3, d3, {}), std::invalid_argument);
}

TEST_CASE("imperfect-CSI exponential law", "[analytic]")
{
    CHECK(pdf_ci(100.0, 1, 0.1, 1.0, 3.0).mean() == Approx(24.75).epsilon(1e-12));
    CHECK(pdf_ci(100.0, 1, 0.0, 1.0, 3.0).mean() == Approx(pdf_perfect(100.0, 1).mean()).epsilon(1e-12));
    CHECK(pdf_ci(100.0, 1, 1e-9, 1.0, 3.0).mean() == Approx(100.0).epsilon(1e-9));
    double prev = std::numeric_limits<double>::infinity();
    for (double b = 0.0; b < 0.99; b += 0.01)
    {
        const double m = pdf_ci(1000.0, 2, b, 1.3, 3.4).mean();
        CHECK(m < prev);
        CHECK((m <= mean_ci_limit(2, b, 1.3, 3.4) || b == 0.0));
        prev = m;
    }
    CHECK(mean_ci_limit(1, 0.1, 1.0, 3.0) == Approx(33.0));
    CHECK_THROWS_AS(pdf_ci(100.0, 1, 1.0, 1.0, 3.0), std::invalid_argument);
    CHECK_THROWS_AS(pdf_ci(100.0, 0, 0.1, 1.0, 3.0), std::invalid_argument);
}

TEST_CASE("spatial multiplexing law", "[analytic]")
{
    const auto sm = pdf_sm(100.0, 2, 0.0, CorrelationMatrix::identity(2));
    REQUIRE(sm.size() == 2);
    CHECK(sm[0].mean() == Approx(50.0));
    const auto sm5 = pdf_sm(100.0, 2, 0.0, exp_correlation_matrix(cd(0.5, 0.0), 2));
    CHECK(sm5[0].mean() == Approx(37.5));
    CHECK(sm5[1].mean() == Approx(37.5));
    const auto smb = pdf_sm(100.0, 2, 0.1, CorrelationMatrix::identity(2));
    CHECK(smb[0].mean() == Approx(0.99 / (0.02 + 0.02)));
    CHECK_THROWS_AS(pdf_sm(100.0, 3, 0.0, CorrelationMatrix::identity(2)), std::invalid_argument);
}

TEST_CASE("beamforming correlation factor", "[analytic]")
{
    CHECK(bf_mean_nu(CorrelationMatrix::identity(2), 2) == 1.0);
    const auto R = exp_correlation_matrix(cd(0.5, 0.0), 2);
    const double nu = bf_mean_nu(R, 2);
    CHECK(nu >= R.eigenvalues()(0));
    CHECK(nu <= R.eigenvalues()(1));

    const ComplexMatrix S = psd_sqrt(R);
    Rng rng(29);
    const int n = 50000;
    double acc = 0.0;
    for (int t = 0; t < n; ++t)
    {
        const ComplexMatrix H = rng.complex_gaussian(2, 2) * S;
        Eigen::JacobiSVD<ComplexMatrix> svd(H, Eigen::ComputeFullV);
        const ComplexVector v = svd.matrixV().col(0);
        acc += v.dot(R.matrix() * v).real();
    }
    CHECK(nu == Approx(acc / n).epsilon(0.1));
}

TEST_CASE("largest eigenvalue samples", "[analytic]")
{
    Rng rng(2);
    const auto x = largest_eigenvalue_samples(CorrelationMatrix::identity(2), 2, 40000, rng);
    double m = 0.0;
    for (double v : x)
        m += v;
    CHECK(m / x.size() == Approx(3.5).epsilon(0.02));
}

TEST_CASE("sigma2 approximation error grows with correlation", "[analytic][paper-claim]")
{
    std::vector<double> err;
    for (double a : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6})
    {
        const auto p = sigma2_point(3, 2, a, 3000, 5, 0);
        err.push_back(std::abs(p.rel_error()));
        INFO("alpha=" << a << " mc=" << p.mc << " approx=" << p.approx);
        CHECK(p.bounds.contains(p.mc, 1e-6));
    }
    for (std::size_t k = 1; k < err.size(); ++k)
    {
        INFO("step " << k << ": " << err[k - 1] << " -> " << err[k]);
        CHECK(err[k] >= err[k - 1] - 1e-3);
    }
}

TEST_CASE("sigma2 approximation within 10% for weak correlation", "[analytic][paper-claim]")
{
    for (double a : {0.1, 0.2, 0.3})
    {
        const auto p = sigma2_point(3, 2, a, 3000, 6, 0);
        INFO("alpha=" << a << " mc=" << p.mc << " approx=" << p.approx);
        CHECK(std::abs(p.rel_error()) <= 0.10);
    }
}

TEST_CASE("precoder correlation sum approximation within 10%", "[analytic][paper-claim]")
{
    const auto p = sigma2_point(3, 2, 0.2, 3000, 7, 0);
    INFO("mc=" << p.calI_mc << " approx=" << p.calI_approx);
    CHECK(test::rel_err(p.calI_approx, p.calI_mc) <= 0.10);
}
