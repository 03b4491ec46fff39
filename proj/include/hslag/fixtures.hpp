#pragma once

#include "loops.hpp"

namespace hslag {

// Closed-form reference surfaces. Frames are functions of conformal
// coordinates (x, y) on the domain, with z = x + iy.

// Totally geodesic real projective plane: a real orthogonal frame of the
// round metric in the standard affine chart.
inline Mat rp2_frame(double x, double y) {
    double r2 = x * x + y * y;
    Mat F(3, 3);
    F << cxd(1 - x * x + y * y), cxd(-2 * x * y), cxd(2 * x),
         cxd(-2 * x * y), cxd(1 + x * x - y * y), cxd(2 * y),
         cxd(-2 * x), cxd(-2 * y), cxd(1 - r2);
    return F / (1 + r2);
}

namespace detail {
inline Mat fixture_A0() {
    Mat A(3, 3);
    A << cxd(0), -ii, cxd(0), ii, cxd(0), cxd(0), cxd(0), cxd(0), cxd(0);
    return A;
}
inline Mat fixture_Em() {
    Mat E(3, 3);
    E << cxd(0), cxd(0), cxd(1), cxd(0), cxd(0), -ii, cxd(-1), ii, cxd(0);
    return E;
}
inline Mat fixture_Emt() {
    Mat E(3, 3);
    E << cxd(0), cxd(0), cxd(1), cxd(0), cxd(0), ii, cxd(-1), -ii, cxd(0);
    return E;
}
}  // namespace detail

// Maurer-Cartan form of rp2_frame evaluated on the tangent vector (dx, dy).
inline Mat rp2_alpha(double x, double y, double dx, double dy) {
    cxd z(x, y), dz(dx, dy), dzb(dx, -dy);
    Mat v = detail::fixture_A0() * (std::conj(z) * dz - z * dzb) + detail::fixture_Em() * dz +
            detail::fixture_Emt() * dzb;
    return v / (1.0 + std::norm(z));
}

// Clifford torus frame as displayed; its determinant is -1.
inline Mat clifford_frame_display(double x, double y) {
    cxd e1 = std::polar(1.0, 2 * x);
    cxd e2 = std::polar(1.0, y * std::sqrt(3.0) - x);
    cxd e3 = std::polar(1.0, -(x + y * std::sqrt(3.0)));
    double s2 = std::sqrt(2.0);
    Mat F(3, 3);
    F << 2.0 * ii * e1, cxd(0), s2 * e1,
         -ii * e2, ii * std::sqrt(3.0) * e2, s2 * e2,
         -ii * e3, -ii * std::sqrt(3.0) * e3, s2 * e3;
    return F / std::sqrt(6.0);
}

// The same frame pushed into the determinant-one group by a global sign.
inline Mat clifford_frame(double x, double y) { return -clifford_frame_display(x, y); }

inline double clifford_period_x() { return 2.0 * M_PI; }
inline double clifford_period_y() { return 2.0 * M_PI / std::sqrt(3.0); }

// Maurer-Cartan form of the Clifford frame on (dx, dy); constant in (x, y).
inline Mat clifford_alpha(double dx, double dy) {
    cxd dz(dx, dy), dzb(dx, -dy);
    Mat a0z(3, 3), a0zb(3, 3);
    a0z << ii, cxd(-1), cxd(0), cxd(-1), -ii, cxd(0), cxd(0), cxd(0), cxd(0);
    a0zb << ii, cxd(1), cxd(0), cxd(1), -ii, cxd(0), cxd(0), cxd(0), cxd(0);
    double s2 = std::sqrt(2.0);
    return 0.5 * a0z * dz + 0.5 * a0zb * dzb + detail::fixture_Em() * (dz / s2) +
           detail::fixture_Emt() * (dzb / s2);
}

// Extended (spectral-parameter) Maurer-Cartan form of the Clifford family.
inline Mat clifford_alpha_lambda(cxd lambda, double dx, double dy) {
    cxd dz(dx, dy), dzb(dx, -dy);
    Mat a0z(3, 3), a0zb(3, 3);
    a0z << ii, cxd(-1), cxd(0), cxd(-1), -ii, cxd(0), cxd(0), cxd(0), cxd(0);
    a0zb << ii, cxd(1), cxd(0), cxd(1), -ii, cxd(0), cxd(0), cxd(0), cxd(0);
    double s2 = std::sqrt(2.0);
    return 0.5 * a0z * dz + 0.5 * a0zb * dzb + detail::fixture_Em() * (dz / (s2 * lambda)) +
           detail::fixture_Emt() * (lambda * dzb / s2);
}

// Translation-invariant (vacuum) solutions: a two-parameter family of
// commuting extended frames. Requires Im(conj(b) c) > 0.
struct VacuumParams {
    cxd b{0, 0.5};
    cxd c{-0.5, 0};  // i*b for the default b
};

inline double vacuum_density(const VacuumParams& p) {
    return 8.0 * std::imag(std::conj(p.b) * p.c);
}

inline void validate(const VacuumParams& p) {
    if (!(vacuum_density(p) > 0))
        throw std::invalid_argument("vacuum: need Im(conj(b) c) > 0");
}

inline double vacuum_conformal_factor(const VacuumParams& p) {
    validate(p);
    return std::sqrt(vacuum_density(p));
}

// Fourier modes (-2, -1, 0) of the vacuum connection coefficient.
inline TwistedAlgebraLoop vacuum_coeffs(const VacuumParams& p) {
    validate(p);
    cxd a = -(std::conj(p.c) + ii * std::conj(p.b)) / 3.0;
    double erho = vacuum_conformal_factor(p);
    Mat m2 = Mat::Zero(3, 3);
    m2(0, 0) = -ii * a;
    m2(1, 1) = -ii * a;
    m2(2, 2) = 2.0 * ii * a;
    Mat m1 = (erho / 2.0) * detail::fixture_Em();
    Mat m0 = Mat::Zero(3, 3);
    m0(0, 0) = p.b;
    m0(1, 1) = -p.b;
    m0(0, 1) = p.c;
    m0(1, 0) = p.c;
    return {case_cp2(), {{-2, m2}, {-1, m1}, {0, m0}}};
}

inline Mat vacuum_matrix(const VacuumParams& p, cxd lambda) {
    return eval_loop(vacuum_coeffs(p), lambda);
}

// Extended frame exp(z M + conj(z) tilde(M)); unitary for |lambda| = 1.
inline Mat vacuum_frame(const VacuumParams& p, cxd z, cxd lambda) {
    Mat M = vacuum_matrix(p, lambda);
    Mat Mt = tilde_conj(case_cp2(), M);
    return matrix_exp((z * M + std::conj(z) * Mt).eval());
}

// Holomorphic half exp(z M): the frame before normalization.
inline Mat vacuum_holomorphic_frame(const VacuumParams& p, cxd z, cxd lambda) {
    return matrix_exp((z * vacuum_matrix(p, lambda)).eval());
}

}  // namespace hslag
