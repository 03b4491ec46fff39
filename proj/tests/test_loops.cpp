#include <hslag/loops.hpp>

#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace hslag;
using Catch::Matchers::WithinAbs;

namespace {
Mat m3(std::initializer_list<cxd> v) {
    Mat m(3, 3);
    int i = 0;
    for (cxd x : v) m(i / 3, i % 3) = x, ++i;
    return m;
}
}  // namespace

TEST_CASE("loop spec invariants") {
    LoopSpec ok;
    REQUIRE_NOTHROW(validate(ok));
    LoopSpec bad = ok;
    bad.N = 62;
    REQUIRE_THROWS_AS(validate(bad), std::invalid_argument);
    bad = ok;
    bad.N = 32;
    bad.K = 8;  // 32 < 4*(8+1)
    REQUIRE_THROWS_AS(validate(bad), std::invalid_argument);
    bad = ok;
    bad.tol_flat = 0.0;
    REQUIRE_THROWS_AS(validate(bad), std::invalid_argument);
    REQUIRE_THROWS_AS(make_group_loop(case_cp2(), std::vector<Mat>(30, Mat::Identity(3, 3))),
                      std::invalid_argument);
}

TEST_CASE("sample grid and constant loops") {
    auto lam = lambda_samples(8);
    REQUIRE_THAT(std::abs(lam[2] - cxd(0, 1)), WithinAbs(0.0, 1e-15));
    REQUIRE_THAT(std::abs(lam[4] + 1.0), WithinAbs(0.0, 1e-15));
    auto cs = case_cp2();
    auto id = identity_loop(cs, 16);
    REQUIRE(id.N() == 16);
    auto co = fourier_coeffs(id, -3, 3);
    REQUIRE_THAT(frob((co[0] - Mat::Identity(3, 3)).eval()), WithinAbs(0.0, 1e-14));
    for (int k : {-3, -2, -1, 1, 2, 3}) REQUIRE_THAT(frob(co[k]), WithinAbs(0.0, 1e-14));
}

TEST_CASE("multiply and inverse are samplewise") {
    auto cs = case_cp2();
    MatRng rng(7);
    auto a = testsupport::rand_unitary_loop(cs, rng, 16, 3, 0.4, 0.5);
    auto b = testsupport::rand_unitary_loop(cs, rng, 16, 3, 0.4, 0.5);
    auto ab = loop_multiply(a, b);
    for (int j = 0; j < 16; ++j)
        REQUIRE_THAT(frob((ab.samples[j] - a.samples[j] * b.samples[j]).eval()),
                     WithinAbs(0.0, 1e-14));
    auto e = loop_multiply(a, loop_inverse(a));
    for (int j = 0; j < 16; ++j)
        REQUIRE_THAT(frob((e.samples[j] - Mat::Identity(3, 3)).eval()), WithinAbs(0.0, 1e-13));
    auto c = testsupport::rand_unitary_loop(case_cp1xcp1(), rng, 16, 3, 0.4, 0.5);
    REQUIRE_THROWS_AS(loop_multiply(a, c), std::invalid_argument);
}

TEST_CASE("evaluation of coefficient loops") {
    auto cs = case_cp2();
    MatRng rng(11);
    Mat M = rng.mat(3);
    TwistedAlgebraLoop xi{cs, {{-2, M}}};
    // i^{-2} = -1, so the single mode at k = -2 flips sign at lambda = i.
    REQUIRE_THAT(frob((eval_loop(xi, cxd(0, 1)) + M).eval()), WithinAbs(0.0, 1e-15));
    TwistedAlgebraLoop two{cs, {{-1, M}, {3, M}}};
    REQUIRE_THAT(frob((eval_loop(two, cxd(1, 0)) - 2.0 * M).eval()), WithinAbs(0.0, 1e-15));
    // A real-form loop evaluates to the real form on the unit circle.
    auto re = testsupport::rand_real_alg_loop(cs, rng, 4, 0.6, 0.5);
    for (cxd l : {cxd(1, 0), std::polar(1.0, 0.77), std::polar(1.0, 4.0)}) {
        Mat v = eval_loop(re, l);
        REQUIRE_THAT(frob((v + v.adjoint()).eval()), WithinAbs(0.0, 1e-13));
        REQUIRE_THAT(std::abs(v.trace()), WithinAbs(0.0, 1e-13));
    }
}

TEST_CASE("fourier analysis recovers band-limited synthesis exactly") {
    auto cs = case_cp2();
    MatRng rng(3);
    std::map<int, Mat> co;
    for (int k = -6; k <= 6; ++k) co[k] = testsupport::rand_graded(cs, rng, k, 1.0);
    auto phi = sample_coeffs(cs, co, 64);
    auto rec = fourier_coeffs(phi, -8, 8);
    for (int k = -6; k <= 6; ++k)
        REQUIRE_THAT(frob((rec[k] - co[k]).eval()), WithinAbs(0.0, 1e-12));
    for (int k : {-8, -7, 7, 8}) REQUIRE_THAT(frob(rec[k]), WithinAbs(0.0, 1e-12));
    REQUIRE_THROWS_AS(fourier_coeffs(phi, -32, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(fourier_coeffs(phi, 0, 32), std::invalid_argument);
}

TEST_CASE("exponential of a single negative mode keeps its linear coefficient") {
    auto cs = case_cp2();
    double t = 0.3;
    auto lam = lambda_samples(64);
    std::vector<Mat> samples(64);
    for (int j = 0; j < 64; ++j)
        samples[j] = testsupport::expm((t * cp2_epsilon() / lam[j]).eval());
    auto phi = make_group_loop(cs, samples);
    auto co = fourier_coeffs(phi, -3, 0);
    // exp(t eps / lambda) has mode -n equal to t^n eps^n / n!, so mode -1 is exactly t eps.
    REQUIRE_THAT(frob((co[-1] - t * cp2_epsilon()).eval()), WithinAbs(0.0, 1e-13));
    Mat eps2 = cp2_epsilon() * cp2_epsilon();
    REQUIRE_THAT(frob((co[-2] - 0.5 * t * t * eps2).eval()), WithinAbs(0.0, 1e-13));
}

TEST_CASE("sobolev-type norm on coefficients") {
    auto cs = case_cp2();
    Mat Y = cp2_Y();
    TwistedAlgebraLoop at0{cs, {{0, Y}}};
    REQUIRE_THAT(hs_norm(at0, 1.0), WithinAbs(0.0, 1e-15));
    Mat U = Mat::Zero(3, 3);
    U(0, 1) = 1.0;  // unit Frobenius norm
    TwistedAlgebraLoop at2{cs, {{2, U}}};
    REQUIRE_THAT(hs_norm(at2, 1.0), WithinAbs(2.0, 1e-14));
    TwistedAlgebraLoop pm1{cs, {{1, U}, {-1, U}}};
    REQUIRE_THAT(hs_norm(pm1, 1.0), WithinAbs(std::sqrt(2.0), 1e-14));
    REQUIRE_THAT(hs_norm(at2, 0.0), WithinAbs(1.0, 1e-14));
    TwistedAlgebraLoop scaled{cs, {{2, 3.0 * U}}};
    REQUIRE_THAT(hs_norm(scaled, 1.0), WithinAbs(6.0, 1e-13));
    REQUIRE_THROWS_AS(hs_norm(at2, -0.5), std::invalid_argument);
}

TEST_CASE("twisting of samples is equivalent to grading of coefficients") {
    for (auto cs : {case_cp2(), case_s5(), case_cp1xcp1()}) {
        MatRng rng(13 + cs.n);
        std::map<int, Mat> co;
        for (int k = -5; k <= 5; ++k) co[k] = testsupport::rand_graded(cs, rng, k, 0.8);
        auto phi = sample_coeffs(cs, co, 48);
        REQUIRE(twist_residual_algebra(phi) < 1e-12);
        TwistedAlgebraLoop xi{cs, co};
        REQUIRE(twist_residual(xi) < 1e-13);
        // Break the grading at one mode and both residuals light up.
        co[2] += testsupport::rand_graded(cs, rng, 1, 0.5);
        auto bad = sample_coeffs(cs, co, 48);
        REQUIRE(twist_residual_algebra(bad) > 1e-3);
        REQUIRE(twist_residual(TwistedAlgebraLoop{cs, co}) > 1e-3);
    }
}

TEST_CASE("group loops built from exponentials are twisted and unitary") {
    for (auto cs : {case_cp2(), case_s5(), case_cp1xcp1()}) {
        MatRng rng(29 + cs.n);
        auto U = testsupport::rand_unitary_loop(cs, rng, 32, 4, 0.5, 0.5);
        REQUIRE(unitarity_residual(U) < 1e-13);
        REQUIRE(twist_residual(U) < 1e-12);
        REQUIRE(min_abs_det(U) > 0.99);
    }
}

TEST_CASE("reality of coefficient loops") {
    auto cs = case_cp2();
    MatRng rng(31);
    auto xi = testsupport::rand_real_alg_loop(cs, rng, 5, 0.7, 0.5);
    REQUIRE(reality_residual(xi) < 1e-14);
    REQUIRE(twist_residual(xi) < 1e-14);
    xi.coeffs[3] += m3({0.3, 0, 0, 0, 0, 0, 0, 0, -0.3});
    REQUIRE(reality_residual(xi) > 1e-3);
}
