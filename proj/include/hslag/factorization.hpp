#pragma once

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "loops.hpp"

namespace hslag {

struct PointwiseIwasawa {
    Mat unitary;
    Mat triangular;  // upper triangular, positive diagonal
};

// QR split g = F b with F unitary and b upper triangular with positive diagonal.
inline PointwiseIwasawa pointwise_iwasawa(const Mat& g) {
    Eigen::MatrixXcd G = g;
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(G);
    Eigen::MatrixXcd Q = qr.householderQ();
    Eigen::MatrixXcd R = qr.matrixQR().triangularView<Eigen::Upper>();
    int n = int(G.rows());
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Identity(n, n);
    for (int i = 0; i < n; ++i) {
        cxd r = R(i, i);
        if (std::abs(r) < 1e-300) throw std::runtime_error("pointwise_iwasawa: singular input");
        D(i, i) = r / std::abs(r);
    }
    PointwiseIwasawa out;
    out.unitary = Q * D;
    out.triangular = D.inverse() * R;
    return out;
}

struct LoopIwasawaResult {
    TwistedGroupLoop unitary;        // F, samples on the circle
    TwistedGroupLoop plus;           // B evaluated on the circle
    std::map<int, Mat> plus_coeffs;  // B modes, k = 0..cap
    double residual_product = 0;     // max_j |F_j B_j - phi_j|
    double residual_unitary = 0;
    double residual_twist = 0;
    bool resolution_ok = true;          // factorization at twice the cap agrees
    double resolution_disagreement = 0; // max_j |F_j(cap) - F_j(2 cap)|
};

namespace detail {

// Spectral factorization of P = phi^H phi via Cholesky of the block Toeplitz
// matrix T_{ij} = Phat_{j-i}. The last block row of the lower factor carries
// the coefficients of B: Bhat_k = (L[last, last-k])^H. Modes of P outside the
// alias-free band are treated as zero.
inline std::map<int, Mat> bauer_plus_coeffs(const TwistedGroupLoop& phi, int cap, int nsec) {
    int N = phi.N();
    int n = phi.cs.n;
    int M = N / 2 - 1;
    std::vector<Mat> P(N);
    for (int j = 0; j < N; ++j) P[j] = phi.samples[j].adjoint() * phi.samples[j];
    auto Ph = fourier_coeffs({phi.cs, P}, -M, M);
    int nb = nsec + 1;
    Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(n * nb, n * nb);
    for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j) {
            int l = j - i;
            if (-M <= l && l <= M) T.block(n * i, n * j, n, n) = Ph[l];
        }
    Eigen::LLT<Eigen::MatrixXcd> llt(T);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("loop_iwasawa: Toeplitz symbol not positive definite");
    Eigen::MatrixXcd L = llt.matrixL();
    std::map<int, Mat> B;
    for (int k = 0; k <= cap; ++k)
        B[k] = Mat(L.block(n * nsec, n * (nsec - k), n, n).adjoint());
    return B;
}

inline LoopIwasawaResult iwasawa_at_cap(const TwistedGroupLoop& phi, int cap) {
    int N = phi.N();
    auto Bco = bauer_plus_coeffs(phi, cap, 3 * cap + 1);
    auto Bs = sample_coeffs(phi.cs, Bco, N);
    std::vector<Mat> F(N);
    for (int j = 0; j < N; ++j) F[j] = phi.samples[j] * Bs.samples[j].inverse();
    LoopIwasawaResult out{{phi.cs, std::move(F)}, std::move(Bs), std::move(Bco)};
    for (int j = 0; j < N; ++j) {
        Mat prod = out.unitary.samples[j] * out.plus.samples[j];
        out.residual_product = std::max(out.residual_product, frob((prod - phi.samples[j]).eval()));
    }
    out.residual_unitary = unitarity_residual(out.unitary);
    out.residual_twist = twist_residual(out.unitary);
    return out;
}

}  // namespace detail

// Loop Iwasawa split phi = F B: F unitary twisted, B holomorphic in the disc
// with constant term upper triangular, positive diagonal. The plus factor is
// truncated at spec.K modes; a second pass at 2K guards against a cap that is
// too small for the actual coefficient decay.
inline LoopIwasawaResult loop_iwasawa(const TwistedGroupLoop& phi, const LoopSpec& spec) {
    validate(spec);
    if (phi.N() != spec.N) throw std::invalid_argument("loop_iwasawa: sample count != spec.N");
    LoopIwasawaResult out = detail::iwasawa_at_cap(phi, spec.K);
    int cap2 = std::min(2 * spec.K, spec.N / 2 - 1);
    if (spec.check_resolution && cap2 > spec.K) {
        LoopIwasawaResult fine = detail::iwasawa_at_cap(phi, cap2);
        double d = 0;
        for (int j = 0; j < phi.N(); ++j)
            d = std::max(d, frob((out.unitary.samples[j] - fine.unitary.samples[j]).eval()));
        out.resolution_disagreement = d;
        out.resolution_ok = d <= 10.0 * spec.tol_unitary;
    }
    return out;
}

struct BirkhoffResult {
    bool big_cell = true;
    double cond = 0;            // spectral condition number of the mode system
    double plus_residual = 0;   // negative-mode mass of psi * phi
    TwistedGroupLoop minus;     // phi_minus, equal to 1 at lambda = infinity
    TwistedGroupLoop plus;      // phi_plus = psi * phi
    std::map<int, Mat> psi_coeffs;  // psi = phi_minus^{-1} = 1 + sum_{k>=1} C_k lambda^{-k}
};

// Birkhoff split phi = phi_minus phi_plus on the big cell. Solves the mode
// equations sum_{k=1..m} C_k phihat_{k-l} = -phihat_{-l}, l = 1..m, for the
// expansion of psi = phi_minus^{-1}. Failure of the big-cell condition shows
// up as a blown-up condition number or as mass left in the negative modes of
// psi * phi; both are reported and gate the big_cell flag.
inline BirkhoffResult birkhoff_split(const TwistedGroupLoop& phi, int m = 16,
                                     double cond_max = 1e12, double tol_plus = 1e-6) {
    int N = phi.N();
    int n = phi.cs.n;
    int M = N / 2 - 1;
    if (m < 1 || m > M) throw std::invalid_argument("birkhoff_split: need 1 <= m <= N/2 - 1");
    auto ph = fourier_coeffs(phi, -M, M);
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n * m, n * m);
    Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(n * m, n);
    for (int l = 1; l <= m; ++l) {
        for (int k = 1; k <= m; ++k) {
            int d = k - l;
            if (-M <= d && d <= M) A.block(n * (l - 1), n * (k - 1), n, n) = ph[d].transpose();
        }
        rhs.block(n * (l - 1), 0, n, n) = -ph[-l].transpose();
    }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double smax = svd.singularValues()(0);
    double smin = svd.singularValues()(n * m - 1);
    Eigen::MatrixXcd X = svd.solve(rhs);  // stacked C_k^T

    BirkhoffResult out;
    out.cond = smin > 0 ? smax / smin : std::numeric_limits<double>::infinity();
    out.psi_coeffs[0] = Mat::Identity(n, n);
    for (int k = 1; k <= m; ++k)
        out.psi_coeffs[-k] = Mat(X.block(n * (k - 1), 0, n, n).transpose());
    auto psi = sample_coeffs(phi.cs, out.psi_coeffs, N);
    std::vector<Mat> minus(N), plus(N);
    for (int j = 0; j < N; ++j) {
        minus[j] = psi.samples[j].inverse();
        plus[j] = psi.samples[j] * phi.samples[j];
    }
    out.minus = {phi.cs, std::move(minus)};
    out.plus = {phi.cs, std::move(plus)};
    auto tail = fourier_coeffs(out.plus, -M, -1);
    for (auto& [k, C] : tail) out.plus_residual = std::max(out.plus_residual, frob(C));
    out.big_cell = out.cond <= cond_max && out.plus_residual <= tol_plus;
    return out;
}

}  // namespace hslag
