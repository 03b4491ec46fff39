#include <hslag/dpw.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <hslag/fixtures.hpp>

#include "support.hpp"

using namespace hslag;
using Catch::Matchers::WithinAbs;

namespace {

double third_column_mismatch(const Mat& F, const Mat& G) {
    // Distance between the projected points: 1 - |<F e3, G e3>|.
    cxd ip = (F.col(2).adjoint() * G.col(2))(0, 0);
    return std::abs(1.0 - std::abs(ip));
}

}  // namespace

TEST_CASE("potential evaluation and validation") {
    auto cs = case_cp2();
    MatRng rng(1);
    Mat C0 = testsupport::rand_graded(cs, rng, 2, 1.0);
    Mat C1 = testsupport::rand_graded(cs, rng, 2, 1.0);
    HoloPotential pot{cs, {{-2, {C0, C1}}}};
    REQUIRE_NOTHROW(validate_potential(pot));
    // mode at k = -2 scales by lambda^{-2} = -1 at lambda = i.
    Mat v = eval_potential(pot, cxd(2.0, 0.0), cxd(0, 1));
    REQUIRE_THAT(frob((v + (C0 + 2.0 * C1)).eval()), WithinAbs(0.0, 1e-13));

    HoloPotential bad{cs, {{-3, {C0}}}};
    REQUIRE_THROWS_AS(validate_potential(bad), std::invalid_argument);
    HoloPotential off{cs, {{-1, {C0}}}};  // band-2 matrix declared at mode -1
    REQUIRE_THROWS_AS(validate_potential(off), std::invalid_argument);
    auto good = testsupport::rand_potential(cs, rng, 2, 0.5);
    REQUIRE_NOTHROW(validate_potential(good));
    REQUIRE(potential_grading_defect(good) < 1e-14);
}

TEST_CASE("path integration reproduces the closed-form vacuum solution") {
    VacuumParams p{cxd(0.4, 0.25), ii * cxd(0.4, 0.25) + 0.3};
    auto pot = testsupport::vacuum_potential(vacuum_coeffs(p));
    int N = 16;
    cxd base(-0.2, -0.2), target(0.15, 0.1);
    auto H = integrate_path(pot, N, {base, cxd(target.real(), base.imag()), target}, 0.01);
    auto lam = lambda_samples(N);
    double worst = 0;
    for (int j = 0; j < N; ++j) {
        Mat He = vacuum_holomorphic_frame(p, target - base, lam[j]);
        worst = std::max(worst, frob((H.samples[j] - He).eval()));
    }
    REQUIRE(worst < 1e-10);
    // Grid integration agrees with the closed form at every node.
    GridSpec g{-0.2, -0.2, 0.2, 0.2, 5, 5};
    auto Hs = integrate_potential(pot, g, N, 8);
    worst = 0;
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix)
            for (int j = 0; j < N; ++j) {
                Mat He = vacuum_holomorphic_frame(p, g.z(ix, iy) - g.z(0, 0), lam[j]);
                worst = std::max(worst, frob((Hs[g.index(ix, iy)].samples[j] - He).eval()));
            }
    REQUIRE(worst < 1e-9);
}

TEST_CASE("extended frame field on the vacuum matches the closed-form family") {
    VacuumParams p{cxd(0.4, 0.25), ii * cxd(0.4, 0.25) + 0.3};
    auto pot = testsupport::vacuum_potential(vacuum_coeffs(p));
    GridSpec g{-0.25, -0.25, 0.25, 0.25, 9, 9};
    LoopSpec spec;
    spec.K = 14;  // the plus factor of an integrated field is analytic, not band-limited
    auto field = build_extended_frame(pot, g, spec);
    CAPTURE(field.worst_product, field.worst_unitarity, field.worst_twist, field.worst_resolution,
            field.worst_normal_form);
    REQUIRE(field.worst_product < 1e-10);
    REQUIRE(field.worst_unitarity < 1e-9);
    REQUIRE(field.worst_twist < 1e-9);
    REQUIRE(field.resolution_ok);
    REQUIRE(field.worst_normal_form < 1e-9);
    // Projected points agree with the closed-form frames up to the residual
    // band-0 gauge, which only rotates the fiber phase.
    auto lam = lambda_samples(spec.N);
    double worst = 0;
    for (int iy = 0; iy < g.ny; iy += 2)
        for (int ix = 0; ix < g.nx; ix += 2) {
            Mat Fe = vacuum_frame(p, g.z(ix, iy) - g.z(0, 0), lam[0]);
            worst = std::max(worst,
                             third_column_mismatch(field.frame_at(ix, iy).samples[0], Fe));
        }
    REQUIRE(worst < 1e-10);
}

TEST_CASE("algebraic connection equals high-accuracy differencing") {
    VacuumParams p{cxd(0.4, 0.25), ii * cxd(0.4, 0.25) + 0.3};
    auto pot = testsupport::vacuum_potential(vacuum_coeffs(p));
    LoopSpec spec;
    spec.K = 14;
    cxd base(-0.25, -0.25), z(0.11, -0.13);
    auto H = integrate_path(pot, spec.N, {base, cxd(z.real(), base.imag()), z}, 0.02);
    auto iw = loop_iwasawa(H, spec);
    auto cm = algebraic_connection(pot, iw.plus, z);
    // Pipeline conformal factor against the closed form.
    REQUIRE_THAT(frob(cm.m1), WithinAbs(vacuum_conformal_factor(p), 1e-10));
    REQUIRE(connection_out_of_band(pot, iw.plus, z) < 1e-10);
    auto fd = probe_maurer_cartan(pot, spec, base, z);
    auto fz = fourier_coeffs(fd.a_z, -3, 1);
    CAPTURE(frob((fz[-2] - cm.m2).eval()), frob((fz[-1] - cm.m1).eval()),
            frob((fz[0] - cm.m0).eval()), frob(fz[1]), frob(fz[-3]));
    REQUIRE(frob((fz[-2] - cm.m2).eval()) < 1e-8);
    REQUIRE(frob((fz[-1] - cm.m1).eval()) < 1e-8);
    REQUIRE(frob((fz[0] - cm.m0).eval()) < 1e-8);
    REQUIRE(frob(fz[1]) < 1e-8);
    REQUIRE(frob(fz[-3]) < 1e-8);
    // Conformality: the dzbar part carries no mode -1.
    auto fzb = fourier_coeffs(fd.a_zbar, -1, -1);
    REQUIRE(frob(fzb[-1]) < 1e-8);
}

TEST_CASE("algebraic connection on a random potential") {
    auto cs = case_cp2();
    MatRng rng(77);
    auto pot = testsupport::rand_potential(cs, rng, 2, 0.2);
    LoopSpec spec;
    spec.K = 14;
    cxd base(-0.25, -0.25), z(0.07, 0.12);
    auto H = integrate_path(pot, spec.N, {base, cxd(z.real(), base.imag()), z}, 0.02);
    auto iw = loop_iwasawa(H, spec);
    REQUIRE(iw.resolution_ok);
    auto cm = algebraic_connection(pot, iw.plus, z);
    REQUIRE(connection_out_of_band(pot, iw.plus, z) < 1e-8);
    auto fd = probe_maurer_cartan(pot, spec, base, z);
    auto fz = fourier_coeffs(fd.a_z, -3, 1);
    CAPTURE(frob((fz[-2] - cm.m2).eval()), frob((fz[-1] - cm.m1).eval()),
            frob((fz[0] - cm.m0).eval()), frob(fz[1]), frob(fz[-3]));
    REQUIRE(frob((fz[-2] - cm.m2).eval()) < 1e-8);
    REQUIRE(frob((fz[-1] - cm.m1).eval()) < 1e-8);
    REQUIRE(frob((fz[0] - cm.m0).eval()) < 1e-8);
    REQUIRE(frob(fz[1]) < 1e-8);
    REQUIRE(frob(fz[-3]) < 1e-8);
    auto fzb = fourier_coeffs(fd.a_zbar, -1, -1);
    REQUIRE(frob(fzb[-1]) < 1e-8);
}

TEST_CASE("meromorphic data of the vacuum family") {
    VacuumParams p{cxd(0.4, 0.25), ii * cxd(0.4, 0.25) + 0.3};
    auto pot = testsupport::vacuum_potential(vacuum_coeffs(p));
    GridSpec g{-0.25, -0.25, 0.25, 0.25, 9, 9};
    LoopSpec spec;
    auto field = build_extended_frame(pot, g, spec);
    auto mero = meromorphic_extract(field, pot, 14, 2);
    CAPTURE(mero.out_of_band);
    REQUIRE(mero.missed.empty());
    REQUIRE(mero.out_of_band < 1e-8);
    REQUIRE(mero.node_modes.size() == mero.nodes.size());
    // At the basepoint the frame is trivial, so the pole data is the
    // potential's own negative part.
    auto& m0 = mero.node_modes.front();
    REQUIRE_THAT(frob((m0.at(-2) - pot.modes.at(-2)[0]).eval()), WithinAbs(0.0, 1e-9));
    REQUIRE_THAT(frob((m0.at(-1) - pot.modes.at(-1)[0]).eval()), WithinAbs(0.0, 1e-9));
}

TEST_CASE("index-loop field is reported off the big cell") {
    auto cs = case_cp2();
    int N = 64;
    auto lam = lambda_samples(N);
    std::vector<Mat> w(N);
    for (int j = 0; j < N; ++j) {
        w[j] = Mat::Zero(3, 3);
        w[j](0, 0) = std::pow(lam[j], 4);
        w[j](1, 1) = std::pow(lam[j], -4);
        w[j](2, 2) = 1.0;
    }
    auto wloop = make_group_loop(cs, w);
    GridSpec g{0, 0, 1, 1, 2, 2};
    LoopSpec spec;
    ExtendedFrameField field{cs, g, spec,
                             std::vector<TwistedGroupLoop>(4, wloop),
                             std::vector<TwistedGroupLoop>(4, identity_loop(cs, N))};
    VacuumParams p;
    auto pot = testsupport::vacuum_potential(vacuum_coeffs(p));
    auto mero = meromorphic_extract(field, pot, 14, 1);
    REQUIRE(mero.missed.size() == mero.nodes.size());
    REQUIRE(mero.node_modes.empty());
}

TEST_CASE("row lift reproduces the surface of a random potential") {
    auto cs = case_cp2();
    MatRng rng(555);
    auto pot = testsupport::rand_potential(cs, rng, 1, 0.15);
    GridSpec g{-0.5, -0.5, 0.5, 0.5, 20, 20};
    LoopSpec spec;
    auto field = build_extended_frame(pot, g, spec);
    auto lift = lift_to_potential(field, 10);
    CAPTURE(lift.fit_residual, lift.plus_residual);
    REQUIRE(lift.fit_residual < 1e-5);
    REQUIRE(lift.plus_residual < 1e-5);
    REQUIRE_NOTHROW(validate_potential(lift.potential));
    auto field2 = build_extended_frame(lift.potential, g, spec);
    double worst = 0;
    for (int iy = 0; iy < g.ny; iy += 3)
        for (int ix = 0; ix < g.nx; ix += 3)
            worst = std::max(worst, third_column_mismatch(field.frame_at(ix, iy).samples[0],
                                                          field2.frame_at(ix, iy).samples[0]));
    CAPTURE(worst);
    REQUIRE(worst < 1e-6);
}
