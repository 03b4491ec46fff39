#pragma once

#include <hslag/geometry.hpp>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace hslag {

// Lagrangian cones in C^3 over Legendrian lifts of the projected surfaces.

// One discrete parallel step of the Hopf connection: the representative at
// the target, phased for minimal rotation from the current value. A step to
// a near-orthogonal representative has no parallel continuation.
inline Vec flat_step(const Vec& s, const Vec& q, double tol = 1e-9) {
    cxd ip = (q.adjoint() * s)(0, 0);
    double m = std::abs(ip);
    if (m < tol)
        throw std::invalid_argument("flat_step: step lands on a near-orthogonal point");
    return q * (ip / m);
}

// Parallel transport along the segment [za, zb] against the unit
// representatives of the point map, refined with nsub substeps per edge.
// The result does not depend on the phases of the representatives.
template <class PointMap>
Vec flat_transport(Vec s, cxd za, cxd zb, const PointMap& point, int nsub = 1) {
    if (nsub < 1) throw std::invalid_argument("flat_transport: need nsub >= 1");
    for (int k = 1; k <= nsub; ++k)
        s = flat_step(s, point(za + (zb - za) * (double(k) / nsub)));
    return s;
}

struct FlatSection {
    std::vector<Vec> section;
    double holonomy_defect = 0;  // worst plaquette transport phase
};

// Flat unit section over the grid, seeded at the bottom-left node and spread
// along the bottom row, then up each column. The plaquette holonomy phase is
// the discrete curvature of the connection, which is the symplectic area
// element of the mapped surface: a defect above tol flags non-Lagrangian
// data.
template <class PointMap>
FlatSection flat_section(const GridSpec& g, const Vec& s0, const PointMap& point,
                         int nsub = 1, double tol = 1e-3) {
    FlatSection out;
    out.section.assign(g.count(), Vec());
    out.section[g.index(0, 0)] = flat_step(s0, point(g.z(0, 0)));
    for (int ix = 1; ix < g.nx; ++ix)
        out.section[g.index(ix, 0)] = flat_transport(out.section[g.index(ix - 1, 0)],
                                                     g.z(ix - 1, 0), g.z(ix, 0), point, nsub);
    for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 1; iy < g.ny; ++iy)
            out.section[g.index(ix, iy)] =
                flat_transport(out.section[g.index(ix, iy - 1)], g.z(ix, iy - 1), g.z(ix, iy),
                               point, nsub);
    for (int ix = 0; ix + 1 < g.nx; ++ix)
        for (int iy = 0; iy + 1 < g.ny; ++iy) {
            Vec s = out.section[g.index(ix, iy)];
            s = flat_transport(s, g.z(ix, iy), g.z(ix + 1, iy), point, nsub);
            s = flat_transport(s, g.z(ix + 1, iy), g.z(ix + 1, iy + 1), point, nsub);
            s = flat_transport(s, g.z(ix + 1, iy + 1), g.z(ix, iy + 1), point, nsub);
            s = flat_transport(s, g.z(ix, iy + 1), g.z(ix, iy), point, nsub);
            cxd ip = (out.section[g.index(ix, iy)].adjoint() * s)(0, 0);
            out.holonomy_defect = std::max(out.holonomy_defect, std::abs(std::arg(ip)));
        }
    if (out.holonomy_defect > tol)
        throw std::runtime_error("flat_section: holonomy defect " +
                                 std::to_string(out.holonomy_defect) +
                                 " exceeds tol; the point field is not Lagrangian");
    return out;
}

// Legendrian lift data over a grid: phase-twisted frames and the link
// section at lambda = 1.
struct LegendrianField {
    GridSpec grid;
    std::vector<Mat> frames;   // e^{i beta / 3} F, in U(3)
    std::vector<Vec> section;  // third columns, the link points
    std::vector<double> beta;
    double det_defect = 0;  // worst |det frame - e^{i beta}|
};

// The phase twist e^{i beta / 3} moves a determinant-one frame into U(3)
// with det = e^{i beta}; its third column is the horizontal lift of the
// projected point. The sign of the twist is fixed by horizontality: the
// (3,3) entry of the angle part of the Maurer-Cartan form is -i d(beta)/3,
// and only the positive twist cancels it.
inline LegendrianField legendrian_lift(const GridSpec& g, const std::vector<Mat>& frames,
                                       const std::vector<double>& beta) {
    if (int(frames.size()) != g.count() || int(beta.size()) != g.count())
        throw std::invalid_argument("legendrian_lift: node count mismatch");
    LegendrianField out;
    out.grid = g;
    out.beta = beta;
    out.frames.reserve(g.count());
    out.section.reserve(g.count());
    for (int i = 0; i < g.count(); ++i) {
        Mat Fc = std::exp(ii * beta[i] / 3.0) * frames[i];
        out.section.push_back(Fc.col(2));
        out.det_defect = std::max(out.det_defect,
                                  std::abs(Fc.determinant() - std::exp(ii * beta[i])));
        out.frames.push_back(std::move(Fc));
    }
    return out;
}

inline LegendrianField legendrian_lift(const ExtendedFrameField& f, const GeometryField& geo) {
    auto m = associated_member(f, 0);  // sample 0 is lambda = 1
    return legendrian_lift(f.grid, m.frames, geo.beta);
}

// The cone's Lagrangian angle: determinant phase of the lifted frames,
// unwrapped with the stored surface angle as guide (the phase is only
// defined modulo 2 pi).
inline std::vector<double> cone_angle(const LegendrianField& lf) {
    std::vector<double> out(lf.frames.size());
    for (size_t i = 0; i < lf.frames.size(); ++i) {
        double raw = std::arg(lf.frames[i].determinant());
        out[i] = raw + 2.0 * M_PI * std::round((lf.beta[i] - raw) / (2.0 * M_PI));
    }
    return out;
}

// Worst |<s, ds>| of a unit section by central differences on interior
// nodes; covers both the norm defect and the contact-horizontality defect,
// and sits at O(h^2) on genuine Legendrian data.
inline double horizontality_residual(const GridSpec& g, const std::vector<Vec>& s) {
    if (int(s.size()) != g.count())
        throw std::invalid_argument("horizontality_residual: node count mismatch");
    double worst = 0;
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 1; ix + 1 < g.nx; ++ix) {
            Vec d = (s[g.index(ix + 1, iy)] - s[g.index(ix - 1, iy)]) / (2 * g.hx());
            worst = std::max(worst, std::abs((s[g.index(ix, iy)].adjoint() * d)(0, 0)));
        }
    for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 1; iy + 1 < g.ny; ++iy) {
            Vec d = (s[g.index(ix, iy + 1)] - s[g.index(ix, iy - 1)]) / (2 * g.hy());
            worst = std::max(worst, std::abs((s[g.index(ix, iy)].adjoint() * d)(0, 0)));
        }
    return worst;
}

// Cone over the link: points r * s(z), radius-major ordering.
inline std::vector<Vec> cone_mesh(const std::vector<Vec>& section,
                                  const std::vector<double>& radii) {
    std::vector<Vec> out;
    out.reserve(section.size() * radii.size());
    for (double r : radii) {
        if (!(r >= 0)) throw std::invalid_argument("cone_mesh: radii must be nonnegative");
        for (const Vec& s : section) out.push_back((r * s).eval());
    }
    return out;
}

struct ConeSample {
    Vec link_point;  // unit length, horizontal
    double radius = 1;
    Vec point;  // radius * link_point
};

inline std::vector<ConeSample> cone_samples(const LegendrianField& lf,
                                            const std::vector<double>& radii) {
    std::vector<ConeSample> out;
    out.reserve(lf.section.size() * radii.size());
    for (double r : radii) {
        if (!(r >= 0)) throw std::invalid_argument("cone_samples: radii must be nonnegative");
        for (const Vec& s : lf.section)
            out.push_back({s, r, (r * s).eval()});
    }
    return out;
}

// Correspondence between the two gradings on the abelian band: a u(3)
// element diag(a, b, 0) with imaginary entries maps to its traceless part,
// which sends Ycheck to Y. Inputs off the displayed diagonal shape, with a
// corner (Zcheck) component, or off the imaginary line are rejected.
inline Mat g2_reindex(const Mat& X, double tol = 1e-12) {
    if (X.rows() != 3 || X.cols() != 3)
        throw std::invalid_argument("g2_reindex: 3x3 input required");
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            if (r != c && std::abs(X(r, c)) > tol)
                throw std::invalid_argument("g2_reindex: input must be diagonal");
    if (std::abs(X(2, 2)) > tol)
        throw std::invalid_argument("g2_reindex: corner entry must vanish");
    if (std::abs(X(0, 0).real()) > tol || std::abs(X(1, 1).real()) > tol)
        throw std::invalid_argument("g2_reindex: diagonal entries must be imaginary");
    return X - (X.trace() / 3.0) * Mat::Identity(3, 3);
}

// Coefficientwise on twisted loops: only the band-2 coefficients move.
inline TwistedAlgebraLoop g2_reindex(const TwistedAlgebraLoop& xi, double tol = 1e-12) {
    TwistedAlgebraLoop out{case_cp2(), {}};
    for (const auto& [k, C] : xi.coeffs)
        out.coeffs[k] = (((k % 4) + 4) % 4 == 2) ? g2_reindex(C, tol) : C;
    return out;
}

}  // namespace hslag
