#pragma once

#include <functional>

#include "factorization.hpp"

namespace hslag {

struct GridSpec {
    double x0 = -0.5, y0 = -0.5, x1 = 0.5, y1 = 0.5;
    int nx = 32, ny = 32;
    double hx() const { return (x1 - x0) / (nx - 1); }
    double hy() const { return (y1 - y0) / (ny - 1); }
    double x(int ix) const { return x0 + ix * hx(); }
    double y(int iy) const { return y0 + iy * hy(); }
    cxd z(int ix, int iy) const { return {x(ix), y(iy)}; }
    int index(int ix, int iy) const { return iy * nx + ix; }
    int count() const { return nx * ny; }
};

inline void validate(const GridSpec& g) {
    if (g.nx < 2 || g.ny < 2) throw std::invalid_argument("grid: need nx, ny >= 2");
    if (!(g.x1 > g.x0) || !(g.y1 > g.y0)) throw std::invalid_argument("grid: empty domain");
}

// Holomorphic potential: sum over modes k >= -2 of xi_k(z) lambda^k dz, with
// xi_k a matrix polynomial in z valued in the (k mod 4) eigenspace.
struct HoloPotential {
    CaseData cs;
    std::map<int, std::vector<Mat>> modes;  // mode -> coefficients by z power
};

inline Mat eval_potential_mode(const HoloPotential& pot, int k, cxd z) {
    auto it = pot.modes.find(k);
    Mat acc = Mat::Zero(pot.cs.n, pot.cs.n);
    if (it == pot.modes.end()) return acc;
    cxd zp = 1.0;
    for (const Mat& C : it->second) {
        acc += C * zp;
        zp *= z;
    }
    return acc;
}

inline Mat eval_potential(const HoloPotential& pot, cxd z, cxd lambda) {
    Mat acc = Mat::Zero(pot.cs.n, pot.cs.n);
    for (auto& [k, cs] : pot.modes) acc += eval_potential_mode(pot, k, z) * std::pow(lambda, k);
    return acc;
}

inline std::vector<Mat> eval_potential_samples(const HoloPotential& pot,
                                               const std::vector<cxd>& lam, cxd z) {
    std::vector<Mat> out(lam.size(), Mat::Zero(pot.cs.n, pot.cs.n));
    for (auto& [k, cs] : pot.modes) {
        Mat mk = eval_potential_mode(pot, k, z);
        for (size_t j = 0; j < lam.size(); ++j) out[j] += mk * std::pow(lam[j], k);
    }
    return out;
}

inline double potential_grading_defect(const HoloPotential& pot) {
    double worst = 0;
    for (auto& [k, cs] : pot.modes) {
        int band = ((k % 4) + 4) % 4;
        for (const Mat& C : cs)
            worst = std::max(worst, frob((C - project_eigenspace(pot.cs, C, band)).eval()));
    }
    return worst;
}

inline void validate_potential(const HoloPotential& pot, double tol = 1e-10) {
    for (auto& [k, cs] : pot.modes) {
        if (k < -2)
            throw std::invalid_argument("potential: modes below -2 are not allowed");
        for (const Mat& C : cs) check_shape(pot.cs, C);
    }
    if (potential_grading_defect(pot) > tol)
        throw std::invalid_argument("potential: coefficient grading defect exceeds tolerance");
}

// Transport H along the straight segment z0 -> z1 with nsub RK4 steps of
// dH = H mu(z(t)) z'(t) dt for every spectral sample.
inline void transport(const HoloPotential& pot, const std::vector<cxd>& lam, std::vector<Mat>& H,
                      cxd z0, cxd z1, int nsub) {
    cxd dz = z1 - z0;
    double h = 1.0 / nsub;
    for (int s = 0; s < nsub; ++s) {
        double t0 = s * h;
        auto A0 = eval_potential_samples(pot, lam, z0 + t0 * dz);
        auto Ah = eval_potential_samples(pot, lam, z0 + (t0 + h / 2) * dz);
        auto A1 = eval_potential_samples(pot, lam, z0 + (t0 + h) * dz);
        for (size_t j = 0; j < H.size(); ++j) {
            Mat S0 = A0[j] * dz, Sh = Ah[j] * dz, S1 = A1[j] * dz;
            Mat k1 = H[j] * S0;
            Mat k2 = (H[j] + (h / 2) * k1) * Sh;
            Mat k3 = (H[j] + (h / 2) * k2) * Sh;
            Mat k4 = (H[j] + h * k3) * S1;
            H[j] += (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
}

// Integrate dH = H mu from H = 1 at the first waypoint through the polyline.
inline TwistedGroupLoop integrate_path(const HoloPotential& pot, int N,
                                       const std::vector<cxd>& waypoints, double max_step) {
    if (waypoints.size() < 1) throw std::invalid_argument("integrate_path: empty path");
    auto lam = lambda_samples(N);
    std::vector<Mat> H(N, Mat::Identity(pot.cs.n, pot.cs.n));
    for (size_t i = 0; i + 1 < waypoints.size(); ++i) {
        double len = std::abs(waypoints[i + 1] - waypoints[i]);
        int nsub = std::max(1, int(std::ceil(len / max_step)));
        transport(pot, lam, H, waypoints[i], waypoints[i + 1], nsub);
    }
    return {pot.cs, std::move(H)};
}

// Holomorphic frames on every grid node: along the bottom row first, then up
// each column. Basepoint is the bottom-left corner, H = 1 there.
inline std::vector<TwistedGroupLoop> integrate_potential(const HoloPotential& pot,
                                                         const GridSpec& grid, int N,
                                                         int nsub = 4) {
    validate(grid);
    auto lam = lambda_samples(N);
    std::vector<std::vector<Mat>> H(grid.count());
    H[0] = std::vector<Mat>(N, Mat::Identity(pot.cs.n, pot.cs.n));
    for (int ix = 1; ix < grid.nx; ++ix) {
        H[grid.index(ix, 0)] = H[grid.index(ix - 1, 0)];
        transport(pot, lam, H[grid.index(ix, 0)], grid.z(ix - 1, 0), grid.z(ix, 0), nsub);
    }
    for (int ix = 0; ix < grid.nx; ++ix)
        for (int iy = 1; iy < grid.ny; ++iy) {
            H[grid.index(ix, iy)] = H[grid.index(ix, iy - 1)];
            transport(pot, lam, H[grid.index(ix, iy)], grid.z(ix, iy - 1), grid.z(ix, iy), nsub);
        }
    std::vector<TwistedGroupLoop> out;
    out.reserve(grid.count());
    for (auto& h : H) out.push_back({pot.cs, std::move(h)});
    return out;
}

struct ExtendedFrameField {
    CaseData cs;
    GridSpec grid;
    LoopSpec spec;
    std::vector<TwistedGroupLoop> frame;  // unitary part F per node
    std::vector<TwistedGroupLoop> plus;   // positive part B per node
    double worst_product = 0;
    double worst_unitarity = 0;
    double worst_twist = 0;
    double worst_resolution = 0;
    double worst_normal_form = 0;  // defect of the constant term of B
    bool resolution_ok = true;
    const TwistedGroupLoop& frame_at(int ix, int iy) const { return frame[grid.index(ix, iy)]; }
    const TwistedGroupLoop& plus_at(int ix, int iy) const { return plus[grid.index(ix, iy)]; }
};

namespace detail {
inline double borel_normal_form_defect(const TwistedGroupLoop& B) {
    // Mode 0 is the sample mean; it must be upper triangular with positive
    // real diagonal and unit last entry, vanishing above the block.
    Mat B0 = Mat::Zero(B.cs.n, B.cs.n);
    for (auto& s : B.samples) B0 += s;
    B0 /= double(B.N());
    double d = 0;
    int n = B.cs.n;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < i; ++j) d = std::max(d, std::abs(B0(i, j)));
        d = std::max(d, std::abs(B0(i, i).imag()));
        if (B0(i, i).real() <= 0) d = std::max(d, 1.0);
    }
    d = std::max(d, std::abs(B0(n - 1, n - 1) - 1.0));
    if (n == 3) d = std::max({d, std::abs(B0(0, 2)), std::abs(B0(1, 2))});
    return d;
}
}  // namespace detail

// Forward construction: integrate the potential, then split every node.
inline ExtendedFrameField build_extended_frame(const HoloPotential& pot, const GridSpec& grid,
                                               const LoopSpec& spec, int nsub = 4) {
    validate(spec);
    validate_potential(pot);
    auto H = integrate_potential(pot, grid, spec.N, nsub);
    ExtendedFrameField out{pot.cs, grid, spec, {}, {}};
    out.frame.reserve(grid.count());
    out.plus.reserve(grid.count());
    for (auto& h : H) {
        auto iw = loop_iwasawa(h, spec);
        out.worst_product = std::max(out.worst_product, iw.residual_product);
        out.worst_unitarity = std::max(out.worst_unitarity, iw.residual_unitary);
        out.worst_twist = std::max(out.worst_twist, iw.residual_twist);
        out.worst_resolution = std::max(out.worst_resolution, iw.resolution_disagreement);
        out.resolution_ok = out.resolution_ok && iw.resolution_ok;
        out.worst_normal_form =
            std::max(out.worst_normal_form, detail::borel_normal_form_defect(iw.plus));
        out.frame.push_back(std::move(iw.unitary));
        out.plus.push_back(std::move(iw.plus));
    }
    return out;
}

// Modes of the gauged connection a_z = F^{-1} (d/dz) F, computed without any
// finite differencing: with C = B xi B^{-1}, the modes -2 and -1 of a_z equal
// those of C, and the mode 0 block completes from C's mode 0, whose diagonal
// carries twice the connection entry and whose upper entry is gauge junk.
struct ConnectionModes {
    Mat m2, m1, m0;
};

inline ConnectionModes algebraic_connection(const HoloPotential& pot, const TwistedGroupLoop& B,
                                            cxd z) {
    if (B.cs.n != 3)
        throw std::invalid_argument("algebraic_connection: 3x3 cases only");
    int N = B.N();
    auto lam = lambda_samples(N);
    auto xi = eval_potential_samples(pot, lam, z);
    std::vector<Mat> C(N);
    for (int j = 0; j < N; ++j) C[j] = B.samples[j] * xi[j] * B.samples[j].inverse();
    auto Ch = fourier_coeffs({B.cs, C}, -2, 0);
    ConnectionModes out;
    out.m2 = Ch[-2];
    out.m1 = Ch[-1];
    const Mat& W0 = Ch[0];
    cxd tb = (W0(0, 0) + W0(1, 1)) / 2.0;
    cxd p = (W0(0, 0) - tb) / 2.0;
    out.m0 = Mat::Zero(3, 3);
    out.m0(0, 0) = p;
    out.m0(1, 1) = -p;
    out.m0(1, 0) = W0(1, 0);
    return out;
}

// Mass of C = B xi B^{-1} in modes below -2; vanishes for a genuine extended
// frame because the gauge step cannot produce new negative modes.
inline double connection_out_of_band(const HoloPotential& pot, const TwistedGroupLoop& B, cxd z) {
    int N = B.N();
    int M = N / 2 - 1;
    auto lam = lambda_samples(N);
    auto xi = eval_potential_samples(pot, lam, z);
    std::vector<Mat> C(N);
    for (int j = 0; j < N; ++j) C[j] = B.samples[j] * xi[j] * B.samples[j].inverse();
    auto tail = fourier_coeffs({B.cs, C}, -M, -3);
    double worst = 0;
    for (auto& [k, v] : tail) worst = std::max(worst, frob(v));
    return worst;
}

// Circle samples of the dz part sum_{k=-2}^{0} m_k lambda^k.
inline TwistedGroupLoop connection_dz_loop(const CaseData& cs, const ConnectionModes& m, int N) {
    return sample_coeffs(cs, {{-2, m.m2}, {-1, m.m1}, {0, m.m0}}, N);
}

// The dzbar part mirrors the dz part through the antilinear involution,
// mode k -> mode -k.
inline TwistedGroupLoop connection_dzbar_loop(const CaseData& cs, const ConnectionModes& m,
                                              int N) {
    return sample_coeffs(
        cs, {{2, tilde_conj(cs, m.m2)}, {1, tilde_conj(cs, m.m1)}, {0, tilde_conj(cs, m.m0)}}, N);
}

// Finite-difference Maurer-Cartan samples from four neighbor frames.
struct MCSample {
    TwistedGroupLoop a_z;
    TwistedGroupLoop a_zbar;
};

inline MCSample fd_maurer_cartan(const TwistedGroupLoop& center, const TwistedGroupLoop& xp,
                                 const TwistedGroupLoop& xm, const TwistedGroupLoop& yp,
                                 const TwistedGroupLoop& ym, double hx, double hy) {
    int N = center.N();
    std::vector<Mat> az(N), azb(N);
    for (int j = 0; j < N; ++j) {
        Mat Fi = center.samples[j].inverse();
        Mat ax = Fi * ((xp.samples[j] - xm.samples[j]) / (2 * hx));
        Mat ay = Fi * ((yp.samples[j] - ym.samples[j]) / (2 * hy));
        az[j] = (ax - ii * ay) / 2.0;
        azb[j] = (ax + ii * ay) / 2.0;
    }
    return {{center.cs, std::move(az)}, {center.cs, std::move(azb)}};
}

// Grid-step extraction at an interior node.
inline MCSample extract_maurer_cartan(const ExtendedFrameField& f, int ix, int iy) {
    if (ix < 1 || ix >= f.grid.nx - 1 || iy < 1 || iy >= f.grid.ny - 1)
        throw std::invalid_argument("extract_maurer_cartan: interior nodes only");
    return fd_maurer_cartan(f.frame_at(ix, iy), f.frame_at(ix + 1, iy), f.frame_at(ix - 1, iy),
                            f.frame_at(ix, iy + 1), f.frame_at(ix, iy - 1), f.grid.hx(),
                            f.grid.hy());
}

// High-accuracy probe: integrate fresh frames on a fourth-order cross of
// width h around z and difference them. Bypasses the grid spacing entirely;
// h trades the h^4 truncation against the 1/h amplification of the
// factorization roundoff, with a broad optimum near 5e-3.
inline MCSample probe_maurer_cartan(const HoloPotential& pot, const LoopSpec& spec, cxd base,
                                    cxd z, double h = 5e-3, double max_step = 0.02) {
    auto frame_of = [&](cxd target) {
        std::vector<cxd> path{base, cxd(target.real(), base.imag()), target};
        auto H = integrate_path(pot, spec.N, path, max_step);
        return loop_iwasawa(H, spec).unitary;
    };
    auto c = frame_of(z);
    auto xp1 = frame_of(z + h), xp2 = frame_of(z + 2.0 * h);
    auto xm1 = frame_of(z - h), xm2 = frame_of(z - 2.0 * h);
    auto yp1 = frame_of(z + ii * h), yp2 = frame_of(z + 2.0 * ii * h);
    auto ym1 = frame_of(z - ii * h), ym2 = frame_of(z - 2.0 * ii * h);
    int N = c.N();
    std::vector<Mat> az(N), azb(N);
    for (int j = 0; j < N; ++j) {
        Mat Fi = c.samples[j].inverse();
        Mat ax = Fi * ((-xp2.samples[j] + 8.0 * xp1.samples[j] - 8.0 * xm1.samples[j] +
                        xm2.samples[j]) /
                       (12.0 * h));
        Mat ay = Fi * ((-yp2.samples[j] + 8.0 * yp1.samples[j] - 8.0 * ym1.samples[j] +
                        ym2.samples[j]) /
                       (12.0 * h));
        az[j] = (ax - ii * ay) / 2.0;
        azb[j] = (ax + ii * ay) / 2.0;
    }
    return {{c.cs, std::move(az)}, {c.cs, std::move(azb)}};
}

// Pole data of the frame family: Birkhoff-split each node's frame and push
// the connection through the plus factor; only modes -2 and -1 survive.
struct MeromorphicResult {
    std::vector<int> nodes;                      // sampled node indices
    std::vector<int> missed;                     // nodes off the big cell
    std::vector<std::map<int, Mat>> node_modes;  // negative modes where split succeeded
    double out_of_band = 0;                      // mass in modes <= -3
};

inline MeromorphicResult meromorphic_extract(const ExtendedFrameField& f,
                                             const HoloPotential& pot, int m = 14,
                                             int stride = 4) {
    MeromorphicResult out;
    int M = f.spec.N / 2 - 1;
    for (int iy = 0; iy < f.grid.ny; iy += stride)
        for (int ix = 0; ix < f.grid.nx; ix += stride) {
            int idx = f.grid.index(ix, iy);
            out.nodes.push_back(idx);
            auto bk = birkhoff_split(f.frame[idx], m);
            if (!bk.big_cell) {
                out.missed.push_back(idx);
                continue;
            }
            auto cm = algebraic_connection(pot, f.plus[idx], f.grid.z(ix, iy));
            auto az = connection_dz_loop(f.cs, cm, f.spec.N);
            std::vector<Mat> C(f.spec.N);
            for (int j = 0; j < f.spec.N; ++j)
                C[j] = bk.plus.samples[j] * az.samples[j] * bk.plus.samples[j].inverse();
            auto neg = fourier_coeffs({f.cs, C}, -M, -1);
            std::map<int, Mat> keep;
            for (auto& [k, v] : neg) {
                if (k >= -2)
                    keep[k] = v;
                else
                    out.out_of_band = std::max(out.out_of_band, frob(v));
            }
            out.node_modes.push_back(std::move(keep));
        }
    return out;
}

// Inverse construction: read the connection along the bottom row, fit each
// spectral mode as a polynomial in z, and integrate the fitted potential from
// that row. Starting on the bottom row keeps the rebuilt frames in the same
// based gauge as the input field. The returned residuals measure the row fit
// and how far F^H H' is from a plus loop; both are small exactly when the
// field is a genuine frame family.
struct LiftResult {
    HoloPotential potential;
    double fit_residual = 0;
    double plus_residual = 0;
};

inline LiftResult lift_to_potential(const ExtendedFrameField& f, int fit_degree = 14,
                                    int nsub = 4) {
    const GridSpec& g = f.grid;
    if (g.nx < fit_degree + 5)
        throw std::invalid_argument("lift_to_potential: too few row nodes for the fit degree");
    int N = f.spec.N;
    int M = N / 2 - 1;
    int row = 0;
    // Fourth-order row derivative of F at interior row nodes.
    std::vector<int> xs;
    for (int ix = 2; ix < g.nx - 2; ++ix) xs.push_back(ix);
    int S = int(xs.size());
    double hx = g.hx();
    // Modes -2..2 of a_x at every sample abscissa.
    std::vector<std::map<int, Mat>> row_modes(S);
    double junk = 0;
    for (int s = 0; s < S; ++s) {
        int ix = xs[s];
        std::vector<Mat> ax(N);
        for (int j = 0; j < N; ++j) {
            const Mat& f2p = f.frame_at(ix + 2, row).samples[j];
            const Mat& f1p = f.frame_at(ix + 1, row).samples[j];
            const Mat& f1m = f.frame_at(ix - 1, row).samples[j];
            const Mat& f2m = f.frame_at(ix - 2, row).samples[j];
            Mat d = (-f2p + 8.0 * f1p - 8.0 * f1m + f2m) / (12.0 * hx);
            ax[j] = f.frame_at(ix, row).samples[j].inverse() * d;
        }
        auto co = fourier_coeffs({f.cs, ax}, -M, M);
        for (auto& [k, v] : co) {
            if (k >= -2 && k <= 2)
                row_modes[s][k] = v;
            else
                junk = std::max(junk, frob(v));
        }
    }
    // Least squares polynomial fit per mode and entry, in the scaled variable
    // t = (2z - (x0 + x1)) / (x1 - x0); monomials in t are re-expanded in z.
    int D = fit_degree + 1;
    Eigen::MatrixXd V(S, D);
    for (int s = 0; s < S; ++s) {
        double t = (2.0 * g.x(xs[s]) - (g.x0 + g.x1)) / (g.x1 - g.x0);
        double tp = 1.0;
        for (int d = 0; d < D; ++d) {
            V(s, d) = tp;
            tp *= t;
        }
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
    LiftResult out;
    out.fit_residual = junk;
    out.potential.cs = f.cs;
    int n = f.cs.n;
    // Affine substitution t = a z + b; b carries the row ordinate so that t is
    // real exactly on the fit row z = x + i y_row.
    double a = 2.0 / (g.x1 - g.x0);
    cxd b = -cxd(g.x0 + g.x1, 2.0 * g.y(row)) / (g.x1 - g.x0);
    std::vector<double> apow(D, 1.0);
    std::vector<cxd> bpow(D, 1.0);
    for (int d = 1; d < D; ++d) {
        apow[d] = apow[d - 1] * a;
        bpow[d] = bpow[d - 1] * b;
    }
    std::vector<std::vector<double>> binom(D, std::vector<double>(D, 0.0));
    for (int d = 0; d < D; ++d) {
        binom[d][0] = 1.0;
        for (int j = 1; j <= d; ++j)
            binom[d][j] = binom[d - 1][j - 1] + (j < d ? binom[d - 1][j] : 0.0);
    }
    for (int k = -2; k <= 2; ++k) {
        std::vector<Mat> zco(D, Mat::Zero(n, n));
        double resid = 0;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                Eigen::VectorXcd rhs(S);
                for (int s = 0; s < S; ++s) rhs(s) = row_modes[s][k](r, c);
                Eigen::VectorXcd coef = svd.solve(rhs.real().eval()).cast<cxd>() +
                                        ii * svd.solve(rhs.imag().eval()).cast<cxd>();
                resid = std::max(resid, (V.cast<cxd>() * coef - rhs).norm());
                // t^d = (a z + b)^d expanded into z powers.
                for (int d = 0; d < D; ++d)
                    for (int j = 0; j <= d; ++j)
                        zco[j](r, c) += coef(d) * binom[d][j] * apow[j] * bpow[d - j];
            }
        // Grading projection keeps the fitted mode exactly in its band.
        int band = ((k % 4) + 4) % 4;
        bool any = false;
        for (auto& C : zco) {
            C = project_eigenspace(f.cs, C, band);
            if (frob(C) > 1e-13) any = true;
        }
        if (any) out.potential.modes[k] = std::move(zco);
        out.fit_residual = std::max(out.fit_residual, resid);
    }
    // Integrate the fitted potential seeded with F at the row start; H' then
    // tracks F along the fit row, and the defect of B' = F^H H' from a plus
    // loop is the lift residual.
    auto lam = lambda_samples(N);
    std::vector<std::vector<Mat>> Hf(g.count());
    {
        std::vector<Mat> H = f.frame_at(0, row).samples;
        Hf[g.index(0, row)] = H;
        for (int ix = 1; ix < g.nx; ++ix) {
            transport(out.potential, lam, H, g.z(ix - 1, row), g.z(ix, row), nsub);
            Hf[g.index(ix, row)] = H;
        }
    }
    for (int ix = 0; ix < g.nx; ++ix) {
        std::vector<Mat> H = Hf[g.index(ix, row)];
        for (int iy = row + 1; iy < g.ny; ++iy) {
            transport(out.potential, lam, H, g.z(ix, iy - 1), g.z(ix, iy), nsub);
            Hf[g.index(ix, iy)] = H;
        }
        H = Hf[g.index(ix, row)];
        for (int iy = row - 1; iy >= 0; --iy) {
            transport(out.potential, lam, H, g.z(ix, iy + 1), g.z(ix, iy), nsub);
            Hf[g.index(ix, iy)] = H;
        }
    }
    for (int idx = 0; idx < g.count(); ++idx) {
        std::vector<Mat> Bp(N);
        for (int j = 0; j < N; ++j)
            Bp[j] = f.frame[idx].samples[j].adjoint() * Hf[idx][j];
        auto neg = fourier_coeffs({f.cs, Bp}, -M, -1);
        for (auto& [kk, v] : neg) out.plus_residual = std::max(out.plus_residual, frob(v));
    }
    return out;
}

}  // namespace hslag
