#pragma once

#include <map>
#include <vector>

#include "algebra.hpp"

namespace hslag {

// Algebra loops live in Fourier space (coefficient per integer mode),
// group loops as samples on the unit circle. The DFT bridges the two.

struct TwistedAlgebraLoop {
    CaseData cs;
    std::map<int, Mat> coeffs;
};

struct TwistedGroupLoop {
    CaseData cs;
    std::vector<Mat> samples;
    int N() const { return int(samples.size()); }
};

struct LoopSpec {
    int N = 64;
    int K = 8;
    double tol_twist = 1e-10;
    double tol_unitary = 1e-10;
    double tol_flat = 1e-8;
    bool check_resolution = true;  // factorizations re-run at 2K and compared
};

inline void validate(const LoopSpec& spec) {
    if (spec.N % 4 != 0 || spec.N < 4) throw std::invalid_argument("LoopSpec: N must be a positive multiple of 4");
    if (spec.N < 4 * (spec.K + 1)) throw std::invalid_argument("LoopSpec: need N >= 4(K+1)");
    if (spec.tol_twist <= 0 || spec.tol_unitary <= 0 || spec.tol_flat <= 0)
        throw std::invalid_argument("LoopSpec: tolerances must be positive");
}

inline std::vector<cxd> lambda_samples(int N) {
    std::vector<cxd> l(N);
    for (int j = 0; j < N; ++j) l[j] = std::polar(1.0, 2.0 * M_PI * j / N);
    return l;
}

inline TwistedGroupLoop make_group_loop(const CaseData& cs, std::vector<Mat> samples) {
    if (samples.size() % 4 != 0 || samples.empty())
        throw std::invalid_argument("group loop: sample count must be a positive multiple of 4");
    for (auto& s : samples) check_shape(cs, s);
    return {cs, std::move(samples)};
}

inline TwistedGroupLoop constant_loop(const CaseData& cs, const Mat& g, int N) {
    return make_group_loop(cs, std::vector<Mat>(N, g));
}

inline TwistedGroupLoop identity_loop(const CaseData& cs, int N) {
    return constant_loop(cs, Mat::Identity(cs.n, cs.n), N);
}

inline TwistedGroupLoop loop_multiply(const TwistedGroupLoop& a, const TwistedGroupLoop& b) {
    if (a.N() != b.N() || a.cs.n != b.cs.n) throw std::invalid_argument("loop_multiply: shape mismatch");
    std::vector<Mat> out(a.samples.size());
    for (size_t j = 0; j < out.size(); ++j) out[j] = a.samples[j] * b.samples[j];
    return {a.cs, std::move(out)};
}

inline TwistedGroupLoop loop_inverse(const TwistedGroupLoop& a) {
    std::vector<Mat> out(a.samples.size());
    for (size_t j = 0; j < out.size(); ++j) out[j] = a.samples[j].inverse();
    return {a.cs, std::move(out)};
}

inline Mat eval_loop(const TwistedAlgebraLoop& xi, cxd lambda) {
    Mat acc = Mat::Zero(xi.cs.n, xi.cs.n);
    for (auto& [k, C] : xi.coeffs) acc += C * std::pow(lambda, k);
    return acc;
}

// Samples of sum_k C_k lambda^k on the N-point grid.
inline TwistedGroupLoop sample_coeffs(const CaseData& cs, const std::map<int, Mat>& coeffs, int N) {
    std::vector<Mat> out(N, Mat::Zero(cs.n, cs.n));
    auto lam = lambda_samples(N);
    for (auto& [k, C] : coeffs)
        for (int j = 0; j < N; ++j) out[j] += C * std::pow(lam[j], k);
    return make_group_loop(cs, std::move(out));
}

// Discrete Fourier coefficients of the samples. Exact for trigonometric
// polynomials within the alias-free band |k| <= N/2 - 1.
inline std::map<int, Mat> fourier_coeffs(const TwistedGroupLoop& phi, int k_min, int k_max) {
    int N = phi.N();
    if (k_min < -(N / 2 - 1) || k_max > N / 2 - 1)
        throw std::invalid_argument("fourier_coeffs: coefficient extraction beyond N/2 is refused");
    std::map<int, Mat> out;
    for (int k = k_min; k <= k_max; ++k) {
        Mat acc = Mat::Zero(phi.cs.n, phi.cs.n);
        for (int j = 0; j < N; ++j) acc += phi.samples[j] * std::polar(1.0, -2.0 * M_PI * j * k / N);
        out[k] = acc / double(N);
    }
    return out;
}

inline TwistedAlgebraLoop algebra_coeffs(const TwistedGroupLoop& phi, int k_min, int k_max) {
    return {phi.cs, fourier_coeffs(phi, k_min, k_max)};
}

inline double hs_norm(const TwistedAlgebraLoop& xi, double s) {
    if (s < 0) throw std::invalid_argument("hs_norm: s must be nonnegative");
    double acc = 0;
    for (auto& [k, C] : xi.coeffs) {
        double w = std::pow(double(std::abs(k)), 2.0 * s);
        double f = frob(C);
        acc += w * f * f;
    }
    return std::sqrt(acc);
}

// Quarter-rotation twist test for sampled loops: samples[j + N/4] = tau(samples[j]).
inline double twist_residual(const TwistedGroupLoop& phi) {
    int N = phi.N();
    double worst = 0;
    for (int j = 0; j < N; ++j) {
        Mat t = apply_tau_group(phi.cs, phi.samples[j]);
        worst = std::max(worst, frob((phi.samples[(j + N / 4) % N] - t).eval()));
    }
    return worst;
}

// Same quarter-rotation test for algebra-valued sample data (connection forms,
// coefficient synthesis), where the automorphism acts linearly.
inline double twist_residual_algebra(const TwistedGroupLoop& phi) {
    int N = phi.N();
    double worst = 0;
    for (int j = 0; j < N; ++j) {
        Mat t = apply_tau(phi.cs, phi.samples[j]);
        worst = std::max(worst, frob((phi.samples[(j + N / 4) % N] - t).eval()));
    }
    return worst;
}

// Grading test for coefficient data: mode k lies in the (k mod 4) eigenspace.
inline double twist_residual(const TwistedAlgebraLoop& xi) {
    double worst = 0;
    for (auto& [k, C] : xi.coeffs)
        worst = std::max(worst, frob((C - project_eigenspace(xi.cs, C, ((k % 4) + 4) % 4)).eval()));
    return worst;
}

// Membership in the real-form loop algebra: coeffs[-k] = tilde(coeffs[k]).
inline double reality_residual(const TwistedAlgebraLoop& xi) {
    double worst = 0;
    for (auto& [k, C] : xi.coeffs) {
        Mat t = tilde_conj(xi.cs, C);
        auto it = xi.coeffs.find(-k);
        Mat other = it == xi.coeffs.end() ? Mat::Zero(xi.cs.n, xi.cs.n) : it->second;
        worst = std::max(worst, frob((other - t).eval()));
    }
    return worst;
}

inline double unitarity_residual(const TwistedGroupLoop& phi) {
    double worst = 0;
    for (auto& s : phi.samples)
        worst = std::max(worst, frob((s.adjoint() * s - Mat::Identity(phi.cs.n, phi.cs.n)).eval()));
    return worst;
}

inline double min_abs_det(const TwistedGroupLoop& phi) {
    double m = std::numeric_limits<double>::infinity();
    for (auto& s : phi.samples) m = std::min(m, std::abs(s.determinant()));
    return m;
}

}  // namespace hslag
