#pragma once

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

namespace hslag {

using cxd = std::complex<double>;

// Case matrices are 3x3 or 4x4; fixed capacity keeps them off the heap.
using Mat = Eigen::Matrix<cxd, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;
using Mat3 = Eigen::Matrix3cd;
using Vec3 = Eigen::Vector3cd;

constexpr cxd ii{0.0, 1.0};

inline double frob(const Mat& X) { return X.norm(); }

// i^k for any integer k.
inline cxd ipow(long k) {
    switch (((k % 4) + 4) % 4) {
        case 0: return {1, 0};
        case 1: return {0, 1};
        case 2: return {-1, 0};
        default: return {0, -1};
    }
}

inline Mat zero_like(const Mat& X) { return Mat::Zero(X.rows(), X.cols()); }

inline Mat matrix_exp(const Mat& X) {
    Eigen::MatrixXcd Y = X;
    Eigen::MatrixXcd E = Y.exp();
    return Mat(E);
}

// Deterministic Gaussian complex matrices for property tests.
struct MatRng {
    std::mt19937_64 gen;
    std::normal_distribution<double> nd{0.0, 1.0};
    explicit MatRng(unsigned long seed) : gen(seed) {}
    double real() { return nd(gen); }
    cxd scalar() {
        double re = nd(gen), im = nd(gen);
        return {re, im};
    }
    Mat mat(int n) {
        Mat X(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) X(r, c) = scalar();
        return X;
    }
    Mat traceless(int n) {
        Mat X = mat(n);
        X -= (X.trace() / double(n)) * Mat::Identity(n, n);
        return X;
    }
    Mat anti_hermitian(int n) {
        Mat X = mat(n);
        return 0.5 * (X - X.adjoint().eval());
    }
};

}  // namespace hslag
