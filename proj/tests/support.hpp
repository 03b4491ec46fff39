#pragma once

#include <hslag/dpw.hpp>
#include <hslag/loops.hpp>

namespace hslag::testsupport {

inline Mat expm(const Mat& X) { return matrix_exp(X); }

inline Mat rand_graded(const CaseData& cs, MatRng& rng, int band, double scale) {
    Mat M = project_eigenspace(cs, project_algebra(cs, rng.mat(cs.n)), ((band % 4) + 4) % 4);
    return scale * M;
}

// Random loop in the real-form twisted algebra: mode k graded, mode -k = tilde(mode k).
inline TwistedAlgebraLoop rand_real_alg_loop(const CaseData& cs, MatRng& rng, int K, double scale,
                                             double decay) {
    TwistedAlgebraLoop xi{cs, {}};
    for (int k = 0; k <= K; ++k) {
        Mat M = rand_graded(cs, rng, k, scale * std::pow(decay, k));
        if (k == 0) {
            M = ((M + tilde_conj(cs, M)) / 2.0).eval();
            xi.coeffs[0] = M;
        } else {
            xi.coeffs[k] = M;
            xi.coeffs[-k] = tilde_conj(cs, M);
        }
    }
    return xi;
}

// Samplewise exponential of a real twisted algebra loop: unitary twisted group loop.
inline TwistedGroupLoop rand_unitary_loop(const CaseData& cs, MatRng& rng, int N, int K,
                                          double scale, double decay) {
    TwistedAlgebraLoop xi = rand_real_alg_loop(cs, rng, K, scale, decay);
    auto lam = lambda_samples(N);
    std::vector<Mat> out(N);
    for (int j = 0; j < N; ++j) out[j] = expm(eval_loop(xi, lam[j]));
    return make_group_loop(cs, std::move(out));
}

// Random twisted plus loop, band-limited to modes 0..K, with constant term in
// the Borel normal form: upper triangular, positive diagonal, trivial last
// slot. The polynomial part is kept small enough to stay invertible on the
// closed disc.
inline TwistedGroupLoop rand_plus_loop(const CaseData& cs, MatRng& rng, int N, int K, double scale,
                                       double decay) {
    if (cs.n != 3) throw std::invalid_argument("rand_plus_loop: 3x3 cases only");
    std::map<int, Mat> co;
    co[0] = Mat::Identity(3, 3);
    for (int k = 1; k <= K; ++k) co[k] = rand_graded(cs, rng, k, scale * std::pow(decay, k));
    double x = 0.3 * rng.real();
    cxd q = 0.3 * rng.scalar();
    Mat b_alg = Mat::Zero(3, 3);
    b_alg(0, 0) = x;
    b_alg(1, 1) = -x;
    b_alg(0, 1) = q;
    Mat b0 = expm(b_alg);
    auto poly = sample_coeffs(cs, co, N);
    std::vector<Mat> out(N);
    for (int j = 0; j < N; ++j) out[j] = b0 * poly.samples[j];
    return make_group_loop(cs, std::move(out));
}

// Random holomorphic potential: modes -2..2, small polynomial coefficients
// decaying with both degree and mode so the forward problem stays tame.
inline HoloPotential rand_potential(const CaseData& cs, MatRng& rng, int max_degree,
                                    double scale) {
    HoloPotential pot{cs, {}};
    for (int k = -2; k <= 2; ++k) {
        std::vector<Mat> co;
        for (int d = 0; d <= max_degree; ++d)
            co.push_back(rand_graded(cs, rng, k, scale * std::pow(0.5, d + std::abs(k))));
        pot.modes[k] = std::move(co);
    }
    return pot;
}

// The vacuum connection coefficient as a constant-in-z potential.
inline HoloPotential vacuum_potential(const TwistedAlgebraLoop& co) {
    HoloPotential pot{co.cs, {}};
    for (auto& [k, C] : co.coeffs) pot.modes[k] = {C};
    return pot;
}

}  // namespace hslag::testsupport
