#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"

namespace hslag {

// Case data for the order-4 automorphism setup on each target space.
// cp2:  SU(3)/S(U(2)xU(1)), tau(g) = P g^{-T} P^{-1}
// s5:   U(3)/H reductive picture for Lagrangian cones; same tau, g2 is 2-dim
// ch2:  SU(2,1) noncompact dual of cp2; same tau, audit only
// cp1xcp1 (+dual): SU(2)xSU(2) as block-diagonal 4x4, tau(g) = T g T^{-1}

enum class CaseName { cp2, s5, ch2, cp1xcp1, cp1xcp1_dual };

enum class AlgebraTag { su3, sl3C, u3, gl3C, su21, su2su2, sl2sl2C };

struct CaseData {
    CaseName name;
    int n;                     // matrix size (3 or 4)
    bool tau_inverse_transpose;  // true: tau(g) = C g^{-T} C^{-1}; false: tau(g) = C g C^{-1}
    Mat conj_mat;              // C above (P for the 3x3 cases, T for 4x4)
    Mat conj_mat_inv;
    Mat sigma_mat;             // independent formula for sigma = tau^2 (conjugation)
    Mat Y;                     // complex structure generator spanning (part of) g2
    Mat Z;                     // second g2 generator (s5), zero otherwise
    Mat form_B;                // reality form: tilde(X) = -B X^H B (identity when compact)
    int dim_g2;
    bool j_on_contact;         // s5: J^2 = -1 holds on the contact subspace only
};

inline std::string case_label(CaseName c) {
    switch (c) {
        case CaseName::cp2: return "CP2";
        case CaseName::s5: return "S5";
        case CaseName::ch2: return "CH2";
        case CaseName::cp1xcp1: return "CP1xCP1";
        default: return "CP1xCP1_dual";
    }
}

inline Mat cp2_conj_P() {
    Mat P = Mat::Zero(3, 3);
    P(0, 1) = 1;
    P(1, 0) = -1;
    P(2, 2) = 1;
    return P;
}

inline Mat cp2_Y() {
    Mat Y = Mat::Zero(3, 3);
    Y(0, 0) = ii / 3.0;
    Y(1, 1) = ii / 3.0;
    Y(2, 2) = -2.0 * ii / 3.0;
    return Y;
}

// Real basis of the tangent directions at the base point, u-chart embedding
// u in C^2 |-> [[0, u], [-u^H, 0]].
inline Mat cp2_epsilon1() {
    Mat E = Mat::Zero(3, 3);
    E(0, 2) = 1;
    E(2, 0) = -1;
    return E;
}

inline Mat cp2_epsilon2() {
    Mat E = Mat::Zero(3, 3);
    E(1, 2) = 1;
    E(2, 1) = -1;
    return E;
}

// (1,-i)/2 combination; spans the i^{-1} eigenspace together with its column twin.
inline Mat cp2_epsilon() { return 0.5 * (cp2_epsilon1() - ii * cp2_epsilon2()); }

inline Mat s5_Ycheck() {
    Mat Y = Mat::Zero(3, 3);
    Y(0, 0) = ii;
    Y(1, 1) = ii;
    return Y;
}

inline Mat s5_Zcheck() {
    Mat Z = Mat::Zero(3, 3);
    Z(2, 2) = ii;
    return Z;
}

inline Mat cp1xcp1_conj_T() {
    Mat T = Mat::Zero(4, 4);
    T(0, 3) = -1;
    T(1, 2) = 1;
    T(2, 1) = 1;
    T(3, 0) = 1;
    return T;
}

inline Mat cp1xcp1_Y() {
    Mat Y = Mat::Zero(4, 4);
    Y(0, 0) = -ii / 2.0;
    Y(1, 1) = ii / 2.0;
    Y(2, 2) = -ii / 2.0;
    Y(3, 3) = ii / 2.0;
    return Y;
}

inline Mat cp1xcp1_X0() {
    Mat X = Mat::Zero(4, 4);
    X(0, 0) = -ii / 2.0;
    X(1, 1) = ii / 2.0;
    X(2, 2) = ii / 2.0;
    X(3, 3) = -ii / 2.0;
    return X;
}

inline CaseData case_cp2() {
    Mat P = cp2_conj_P();
    Mat S = Mat::Zero(3, 3);
    S.diagonal() << 1, 1, -1;
    return {CaseName::cp2, 3, true, P, P.inverse(), S, cp2_Y(), Mat::Zero(3, 3), Mat::Identity(3, 3), 1, false};
}

inline CaseData case_s5() {
    CaseData cs = case_cp2();
    cs.name = CaseName::s5;
    cs.Y = s5_Ycheck();
    cs.Z = s5_Zcheck();
    cs.dim_g2 = 2;
    cs.j_on_contact = true;
    return cs;
}

inline CaseData case_ch2() {
    CaseData cs = case_cp2();
    cs.name = CaseName::ch2;
    cs.form_B = Mat::Zero(3, 3);
    cs.form_B.diagonal() << 1, 1, -1;
    return cs;
}

inline CaseData case_cp1xcp1() {
    Mat T = cp1xcp1_conj_T();
    Mat S = (T * T).eval();
    return {CaseName::cp1xcp1, 4, false, T, T.inverse(), S, cp1xcp1_Y(), Mat::Zero(4, 4), Mat::Identity(4, 4), 1, false};
}

inline CaseData case_cp1xcp1_dual() {
    CaseData cs = case_cp1xcp1();
    cs.name = CaseName::cp1xcp1_dual;
    cs.form_B = Mat::Zero(4, 4);
    cs.form_B.diagonal() << 1, -1, 1, -1;
    return cs;
}

inline CaseData case_by_label(const std::string& label) {
    if (label == "CP2") return case_cp2();
    if (label == "S5") return case_s5();
    if (label == "CH2") return case_ch2();
    if (label == "CP1xCP1") return case_cp1xcp1();
    if (label == "CP1xCP1_dual") return case_cp1xcp1_dual();
    throw std::invalid_argument("unknown case label: " + label);
}

inline void check_shape(const CaseData& cs, const Mat& X) {
    if (X.rows() != cs.n || X.cols() != cs.n)
        throw std::invalid_argument("matrix size does not match case " + case_label(cs.name));
}

inline Mat apply_tau(const CaseData& cs, const Mat& X) {
    check_shape(cs, X);
    if (cs.tau_inverse_transpose) return -(cs.conj_mat * X.transpose() * cs.conj_mat_inv).eval();
    return (cs.conj_mat * X * cs.conj_mat_inv).eval();
}

inline Mat apply_tau_group(const CaseData& cs, const Mat& g) {
    check_shape(cs, g);
    if (cs.tau_inverse_transpose) return (cs.conj_mat * g.inverse().transpose() * cs.conj_mat_inv).eval();
    return (cs.conj_mat * g * cs.conj_mat_inv).eval();
}

inline Mat apply_sigma(const CaseData& cs, const Mat& X) {
    check_shape(cs, X);
    return (cs.sigma_mat * X * cs.sigma_mat.inverse()).eval();
}

// P_k = (1/4) sum_a i^{-ak} tau^a; exact projector onto the i^k eigenspace.
inline Mat project_eigenspace(const CaseData& cs, const Mat& X, int k) {
    check_shape(cs, X);
    Mat acc = Mat::Zero(cs.n, cs.n);
    Mat T = X;
    for (int a = 0; a < 4; ++a) {
        acc += ipow(-long(a) * k) * T;
        T = apply_tau(cs, T);
    }
    return (acc / 4.0).eval();
}

// Conjugation fixing the real form; antilinear involution.
inline Mat tilde_conj(const CaseData& cs, const Mat& X) {
    check_shape(cs, X);
    return -(cs.form_B * X.adjoint() * cs.form_B).eval();
}

inline Mat tilde_conj(const Mat& X) { return -X.adjoint().eval(); }

inline Mat bracket(const Mat& A, const Mat& B) { return (A * B - B * A).eval(); }

// Projection of gl(n,C) onto the case's complexified algebra: sl(3) for
// cp2/ch2, gl(3) for s5, block-diagonal sl(2)+sl(2) for the 4x4 cases.
inline Mat project_algebra(const CaseData& cs, const Mat& X) {
    check_shape(cs, X);
    if (cs.n == 3) {
        if (cs.name == CaseName::s5) return X;
        return (X - (X.trace() / 3.0) * Mat::Identity(3, 3)).eval();
    }
    Mat R = Mat::Zero(4, 4);
    R.block<2, 2>(0, 0) = X.block<2, 2>(0, 0);
    R.block<2, 2>(2, 2) = X.block<2, 2>(2, 2);
    cxd t1 = R.block<2, 2>(0, 0).trace() / 2.0, t2 = R.block<2, 2>(2, 2).trace() / 2.0;
    R(0, 0) -= t1;
    R(1, 1) -= t1;
    R(2, 2) -= t2;
    R(3, 3) -= t2;
    return R;
}

// Real tangent-space element from an arbitrary seed: the +/-1 bands, made
// tilde-fixed. For s5 this is the contact subspace (no Z-direction).
inline Mat project_tangent_real(const CaseData& cs, const Mat& X) {
    Mat vc = project_eigenspace(cs, project_algebra(cs, X), -1);
    return (vc + tilde_conj(cs, vc)).eval();
}

// J = exp(pi/2 ad Y), evaluated by a plainly convergent series.
inline Mat complex_structure(const CaseData& cs, const Mat& v, double tol = 1e-9) {
    check_shape(cs, v);
    Mat va = project_algebra(cs, v);
    Mat p = (project_eigenspace(cs, va, -1) + project_eigenspace(cs, va, 1)).eval();
    double off = frob((v - p).eval());
    if (!cs.j_on_contact) {
        // membership in m: sigma(v) = -v, inside the case algebra
        off = std::max(frob((v - va).eval()), frob((apply_sigma(cs, v) + v).eval()));
    }
    if (off > tol * (1.0 + frob(v))) throw std::invalid_argument("complex_structure: input not tangent");
    Mat term = v, acc = v;
    double t = M_PI / 2.0;
    for (int k = 1; k < 80; ++k) {
        term = (bracket(cs.Y, term) * (t / k)).eval();
        acc += term;
        if (frob(term) < 1e-18) break;
    }
    return acc;
}

struct AuditLine {
    std::string relation;
    double violation;
};

struct AuditReport {
    std::vector<AuditLine> lines;
    double max_violation() const {
        double m = 0;
        for (auto& l : lines) m = std::max(m, l.violation);
        return m;
    }
};

// Exhaustive numeric check of the case's structure relations on seeded
// random elements. All violations should sit at rounding level.
inline AuditReport structure_audit(const CaseData& cs, int draws = 20) {
    AuditReport rep;
    MatRng rng(0x5eedULL + static_cast<unsigned long>(cs.name));
    auto add = [&rep](const std::string& name, double v) { rep.lines.push_back({name, v}); };

    double tau4 = 0, tau2sigma = 0, resolution = 0, membership = 0, grading = 0;
    double taubracket = 0, tilde2 = 0, tildeband = 0, realfixed = 0, jsq = 0;
    for (int d = 0; d < draws; ++d) {
        Mat X = project_algebra(cs, rng.mat(cs.n));
        Mat T1 = apply_tau(cs, X);
        Mat T2 = apply_tau(cs, T1);
        Mat T4 = apply_tau(cs, apply_tau(cs, T2));
        tau4 = std::max(tau4, frob((T4 - X).eval()));
        tau2sigma = std::max(tau2sigma, frob((T2 - apply_sigma(cs, X)).eval()));

        Mat sum = Mat::Zero(cs.n, cs.n);
        for (int k = 0; k < 4; ++k) {
            Mat Pk = project_eigenspace(cs, X, k);
            sum += Pk;
            membership = std::max(membership, frob((apply_tau(cs, Pk) - ipow(k) * Pk).eval()));
        }
        resolution = std::max(resolution, frob((sum - X).eval()));

        Mat Z2 = project_algebra(cs, rng.mat(cs.n));
        taubracket = std::max(taubracket,
                              frob((apply_tau(cs, bracket(X, Z2)) - bracket(apply_tau(cs, X), apply_tau(cs, Z2))).eval()));
        int a = int(rng.gen() % 4), b = int(rng.gen() % 4);
        Mat Ba = project_eigenspace(cs, X, a), Bb = project_eigenspace(cs, Z2, b);
        Mat br = bracket(Ba, Bb);
        grading = std::max(grading, frob((br - project_eigenspace(cs, br, (a + b) % 4)).eval()));

        tilde2 = std::max(tilde2, frob((tilde_conj(cs, tilde_conj(cs, X)) - X).eval()));
        Mat vm1 = project_eigenspace(cs, X, -1);
        Mat tv = tilde_conj(cs, vm1);
        tildeband = std::max(tildeband, frob((tv - project_eigenspace(cs, tv, 1)).eval()));
        Mat fixed = 0.5 * (X + tilde_conj(cs, X));
        realfixed = std::max(realfixed, frob((tilde_conj(cs, fixed) - fixed).eval()));

        Mat v = project_tangent_real(cs, rng.mat(cs.n));
        Mat Jv = complex_structure(cs, v);
        jsq = std::max(jsq, frob((complex_structure(cs, Jv) + v).eval()));
    }
    add("tau_order_four", tau4);
    add("tau_squared_is_sigma", tau2sigma);
    add("eigenprojection_resolution", resolution);
    add("eigenprojection_membership", membership);
    add("bracket_grading", grading);
    add("tau_preserves_bracket", taubracket);
    add("tilde_involution", tilde2);
    add("tilde_swaps_bands", tildeband);
    add("real_form_fixed_by_tilde", realfixed);
    add("complex_structure_squares_to_minus_one", jsq);

    add("Y_in_g2", frob((apply_tau(cs, cs.Y) + cs.Y).eval()));
    add("g2_bracket_g2", cs.dim_g2 > 1 ? frob(bracket(cs.Y, cs.Z)) : 0.0);
    Mat g0 = project_eigenspace(cs, project_algebra(cs, rng.mat(cs.n)), 0);
    add("g2_bracket_g0", frob(bracket(cs.Y, g0)));
    return rep;
}

inline bool satisfies_tag(const Mat& X, AlgebraTag tag, double tol = 1e-12) {
    double sz = 1.0 + frob(X);
    switch (tag) {
        case AlgebraTag::su3:
        case AlgebraTag::su2su2:
            return frob((X + X.adjoint().eval()).eval()) < tol * sz && std::abs(X.trace()) < tol * sz;
        case AlgebraTag::u3:
            return frob((X + X.adjoint().eval()).eval()) < tol * sz;
        case AlgebraTag::sl3C:
        case AlgebraTag::sl2sl2C:
            return std::abs(X.trace()) < tol * sz;
        case AlgebraTag::su21: {
            Mat B = Mat::Zero(3, 3);
            B.diagonal() << 1, 1, -1;
            return frob((X * B + B * X.adjoint()).eval()) < tol * sz && std::abs(X.trace()) < tol * sz;
        }
        default: return true;  // gl3C: unconstrained
    }
}

}  // namespace hslag
