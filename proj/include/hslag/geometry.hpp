#pragma once

#include <hslag/dpw.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hslag {

using Vec = Eigen::VectorXcd;

// Unit representative of the projected point: third frame column with the
// first entry above tol rotated real positive. The convention only
// stabilizes meshes; geometry is phase invariant and comparisons go through
// |<p, q>| = 1.
inline Vec project_cp2(const Mat& F, double tol = 1e-12) {
    if (F.rows() != 3 || F.cols() != 3)
        throw std::invalid_argument("project_cp2: frame must be 3x3");
    Vec v = F.col(2);
    v /= v.norm();
    for (int i = 0; i < v.size(); ++i) {
        double m = std::abs(v(i));
        if (m > tol) {
            v *= std::conj(v(i)) / m;
            break;
        }
    }
    return v;
}

// The band-2 line is spanned by Y; the angle form is d(beta) = 2c dz + 2
// conj(c) dzbar where c is the Y-coefficient of the lambda^{-2} dz-mode.
inline cxd angle_coefficient(const Mat& m2) {
    Mat Y = cp2_Y();
    return (Y.adjoint() * m2).trace() / (Y.adjoint() * Y).trace().real();
}

inline double angle_direction_defect(const Mat& m2) {
    return frob((m2 - angle_coefficient(m2) * cp2_Y()).eval());
}

// Conformal factor from the lambda^{-1} dz-mode; the Frobenius norm is
// calibrated so the mode equals e^rho k epsilon with unitary k.
inline double conformal_factor(const Mat& m1) { return frob(m1); }

// Same, from differenced Maurer-Cartan data: rejects non-Lagrangian input,
// whose dzbar part grows a lambda^{-1} mode.
inline double conformal_factor(const MCSample& mc, double tol = 1e-6) {
    auto bad = fourier_coeffs(mc.a_zbar, -1, -1);
    if (frob(bad[-1]) > tol)
        throw std::invalid_argument("conformal_factor: dzbar part carries a mode -1 component");
    auto good = fourier_coeffs(mc.a_z, -1, -1);
    return frob(good[-1]);
}

// Angle integration: d(beta) = 4 Re(c) dx - 4 Im(c) dy, trapezoid from the
// bottom-left node along the bottom row, then up each column. The plaquette
// circulation is the discrete exterior derivative of the angle form and
// vanishes at O(h^2) exactly when the form closes.
struct AngleField {
    std::vector<double> beta;
    double closure_defect = 0;
};

inline AngleField integrate_angle(const GridSpec& g, const std::vector<cxd>& c,
                                  double beta0 = 0) {
    if (int(c.size()) != g.count())
        throw std::invalid_argument("integrate_angle: node count mismatch");
    auto bx = [&](int ix, int iy) { return 4.0 * c[g.index(ix, iy)].real(); };
    auto by = [&](int ix, int iy) { return -4.0 * c[g.index(ix, iy)].imag(); };
    AngleField out;
    out.beta.assign(g.count(), 0.0);
    double hx = g.hx(), hy = g.hy();
    out.beta[g.index(0, 0)] = beta0;
    for (int ix = 1; ix < g.nx; ++ix)
        out.beta[g.index(ix, 0)] =
            out.beta[g.index(ix - 1, 0)] + hx * (bx(ix - 1, 0) + bx(ix, 0)) / 2;
    for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 1; iy < g.ny; ++iy)
            out.beta[g.index(ix, iy)] =
                out.beta[g.index(ix, iy - 1)] + hy * (by(ix, iy - 1) + by(ix, iy)) / 2;
    for (int ix = 0; ix + 1 < g.nx; ++ix)
        for (int iy = 0; iy + 1 < g.ny; ++iy) {
            double circ = hx * (bx(ix, iy) + bx(ix + 1, iy)) / 2 +
                          hy * (by(ix + 1, iy) + by(ix + 1, iy + 1)) / 2 -
                          hx * (bx(ix, iy + 1) + bx(ix + 1, iy + 1)) / 2 -
                          hy * (by(ix, iy) + by(ix, iy + 1)) / 2;
            out.closure_defect = std::max(out.closure_defect, std::abs(circ));
        }
    return out;
}

// Discrete codifferential of the angle part: with the flat star (valid for
// 1-forms in conformal coordinates) the residual is d(2 Re c)/dx + d(-2 Im
// c)/dy, central differences on interior nodes.
inline double stationarity_residual(const GridSpec& g, const std::vector<cxd>& c) {
    if (int(c.size()) != g.count())
        throw std::invalid_argument("stationarity_residual: node count mismatch");
    double worst = 0;
    for (int iy = 1; iy + 1 < g.ny; ++iy)
        for (int ix = 1; ix + 1 < g.nx; ++ix) {
            double ux = (2.0 * c[g.index(ix + 1, iy)].real() -
                         2.0 * c[g.index(ix - 1, iy)].real()) /
                        (2 * g.hx());
            double vy = (-2.0 * c[g.index(ix, iy + 1)].imag() +
                         2.0 * c[g.index(ix, iy - 1)].imag()) /
                        (2 * g.hy());
            worst = std::max(worst, std::abs(ux + vy));
        }
    return worst;
}

// Per-node geometric sample of the projected surface.
struct SurfaceSample {
    Vec point;
    double rho = 0;
    double beta = 0;
    cxd maslov_z;  // dz-coefficient of d(beta)/pi
    std::map<std::string, double> residuals;
};

// Geometry of a frame family: connection modes, points, conformal factor,
// angle field with closure control, angle-direction and support residuals.
struct GeometryField {
    GridSpec grid;
    std::vector<ConnectionModes> modes;
    std::vector<Vec> points;
    std::vector<double> conformal;
    std::vector<cxd> c;
    std::vector<double> beta;
    double closure_defect = 0;
    double angle_defect = 0;
    double out_of_band = 0;
};

inline GeometryField surface_geometry(const ExtendedFrameField& f, const HoloPotential& pot,
                                      double closure_tol = 1e-3) {
    const GridSpec& g = f.grid;
    GeometryField out;
    out.grid = g;
    out.modes.reserve(g.count());
    out.points.reserve(g.count());
    out.conformal.reserve(g.count());
    out.c.reserve(g.count());
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            int idx = g.index(ix, iy);
            cxd z = g.z(ix, iy);
            auto cm = algebraic_connection(pot, f.plus[idx], z);
            out.out_of_band =
                std::max(out.out_of_band, connection_out_of_band(pot, f.plus[idx], z));
            out.c.push_back(angle_coefficient(cm.m2));
            out.angle_defect = std::max(out.angle_defect, angle_direction_defect(cm.m2));
            out.conformal.push_back(conformal_factor(cm.m1));
            out.points.push_back(project_cp2(f.frame[idx].samples[0]));
            out.modes.push_back(std::move(cm));
        }
    auto af = integrate_angle(g, out.c);
    if (af.closure_defect > closure_tol)
        throw std::runtime_error("surface_geometry: angle form fails closure, defect " +
                                 std::to_string(af.closure_defect));
    out.beta = std::move(af.beta);
    out.closure_defect = af.closure_defect;
    return out;
}

inline std::vector<SurfaceSample> surface_samples(const GeometryField& gf) {
    std::vector<SurfaceSample> out;
    out.reserve(gf.points.size());
    for (size_t i = 0; i < gf.points.size(); ++i) {
        SurfaceSample s;
        s.point = gf.points[i];
        bool branch = gf.conformal[i] < 1e-14;
        s.rho = branch ? -std::numeric_limits<double>::infinity() : std::log(gf.conformal[i]);
        s.beta = gf.beta[i];
        s.maslov_z = 2.0 * gf.c[i] / M_PI;
        s.residuals["angle_direction"] = angle_direction_defect(gf.modes[i].m2);
        s.residuals["branch_point"] = branch ? 1.0 : 0.0;
        out.push_back(std::move(s));
    }
    return out;
}

// One member of the associated family: the frame field frozen at a single
// spectral sample.
struct FrozenMember {
    GridSpec grid;
    cxd lambda0;
    std::vector<Mat> frames;
    std::vector<Vec> points;
};

inline FrozenMember associated_member(const ExtendedFrameField& f, int sample) {
    if (sample < 0 || sample >= f.spec.N)
        throw std::invalid_argument("associated_member: sample index out of range");
    FrozenMember out;
    out.grid = f.grid;
    out.lambda0 = lambda_samples(f.spec.N)[sample];
    out.frames.reserve(f.grid.count());
    out.points.reserve(f.grid.count());
    for (int idx = 0; idx < f.grid.count(); ++idx) {
        out.frames.push_back(f.frame[idx].samples[sample]);
        out.points.push_back(project_cp2(out.frames.back()));
    }
    return out;
}

// Central-difference connection of a frozen frame field at an interior node.
inline std::pair<Mat, Mat> frozen_connection(const GridSpec& g, const std::vector<Mat>& F,
                                             int ix, int iy) {
    if (ix < 1 || ix >= g.nx - 1 || iy < 1 || iy >= g.ny - 1)
        throw std::invalid_argument("frozen_connection: interior nodes only");
    Mat Fi = F[g.index(ix, iy)].inverse();
    Mat ax = Fi * ((F[g.index(ix + 1, iy)] - F[g.index(ix - 1, iy)]) / (2 * g.hx()));
    Mat ay = Fi * ((F[g.index(ix, iy + 1)] - F[g.index(ix, iy - 1)]) / (2 * g.hy()));
    return {ax, ay};
}

// Conformal factor of a frozen member: band-3 projection of the frozen dz
// connection; invariant across the family because |lambda0| = 1.
inline double frozen_conformal(const CaseData& cs, const Mat& ax, const Mat& ay) {
    Mat az = (ax - ii * ay) / 2.0;
    return frob(project_eigenspace(cs, az, 3));
}

// Zero-curvature residual d a_y/dx - d a_x/dy + [a_x, a_y] of a frozen frame
// field; O(h^2) on genuine families. Needs a two-node interior margin.
inline double frozen_flatness(const GridSpec& g, const std::vector<Mat>& F, int ix, int iy) {
    if (ix < 2 || ix >= g.nx - 2 || iy < 2 || iy >= g.ny - 2)
        throw std::invalid_argument("frozen_flatness: two-node interior margin required");
    auto [ax, ay] = frozen_connection(g, F, ix, iy);
    auto [ax_n, ay_n] = frozen_connection(g, F, ix, iy + 1);
    auto [ax_s, ay_s] = frozen_connection(g, F, ix, iy - 1);
    auto [ax_e, ay_e] = frozen_connection(g, F, ix + 1, iy);
    auto [ax_w, ay_w] = frozen_connection(g, F, ix - 1, iy);
    Mat curv = (ay_e - ay_w) / (2 * g.hx()) - (ax_n - ax_s) / (2 * g.hy()) + bracket(ax, ay);
    return frob(curv);
}

}  // namespace hslag
