#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "mcpsel/frames.hpp"
#include "mcpsel/linalg.hpp"

namespace mcpsel {

// Instance generators. The normal draws come from Box-Muller on raw 64-bit
// output so that a seed gives the same instance with any standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : g_(seed) {}

    double uniform() { return (g_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    int integer(int lo, int hi) { return lo + static_cast<int>(g_() % std::uint64_t(hi - lo + 1)); }
    double normal() {
        if (have_) {
            have_ = false;
            return spare_;
        }
        double u = 0;
        while (u <= 0) u = uniform();
        double v = uniform();
        double rad = std::sqrt(-2 * std::log(u));
        spare_ = rad * std::sin(2 * M_PI * v);
        have_ = true;
        return rad * std::cos(2 * M_PI * v);
    }
    cplx cnormal() { return {normal(), normal()}; }
    std::uint64_t raw() { return g_(); }

private:
    std::mt19937_64 g_;
    bool have_ = false;
    double spare_ = 0;
};

inline Mat random_gaussian(Rng& g, int rows, int cols) {
    Mat a(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) a(i, j) = g.cnormal();
    return a;
}

inline Mat random_hermitian(Rng& g, int d) {
    Mat a = random_gaussian(g, d, d);
    return (a + a.adjoint()) / 2.0;
}

// PSD of the given rank, scaled to trace 1
inline Mat random_psd(Rng& g, int d, int rank = -1) {
    if (rank < 0) rank = d;
    Mat a = random_gaussian(g, d, rank);
    Mat p = a * a.adjoint();
    if (rank == 0) return p;
    return p / trace(p);
}

inline Mat random_unitary(Rng& g, int d) {
    Mat a = random_gaussian(g, d, d);
    Eigen::HouseholderQR<Mat> qr(a);
    Mat q = qr.householderQ();
    // fix column phases so the distribution does not depend on QR sign choices
    Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int k = 0; k < d; ++k) {
        cplx z = r(k, k);
        if (std::abs(z) > 0) q.col(k) *= z / std::abs(z);
    }
    return q;
}

// n x d with orthonormal columns
inline Mat random_isometry(Rng& g, int n, int d) {
    Mat a = random_gaussian(g, n, d);
    Eigen::HouseholderQR<Mat> qr(a);
    return qr.householderQ() * Mat::Identity(n, d);
}

// n vectors in C^d with sum u u* = I
inline VectorSystem random_parseval(Rng& g, int d, int n) {
    Mat q = random_isometry(g, n, d);
    VectorSystem s{d, {}};
    for (int i = 0; i < n; ++i) s.vectors.push_back(q.row(i).adjoint());
    return s;
}

inline VectorSystem columns_of(const Mat& m) {
    VectorSystem s{int(m.rows()), {}};
    for (int i = 0; i < m.cols(); ++i) s.vectors.push_back(m.col(i));
    return s;
}

// k orthonormal bases of C^d side by side, every vector scaled by `scale`
inline VectorSystem union_of_bases(Rng& g, int d, int k, double scale) {
    Mat m(d, d * k);
    for (int j = 0; j < k; ++j) m.middleCols(j * d, d) = random_unitary(g, d);
    return columns_of(Mat(m * scale));
}

// I + t E, rescaled to Bessel bound 1
inline VectorSystem near_orthonormal(Rng& g, int d, double t) {
    Mat m = Mat::Identity(d, d) + t * random_gaussian(g, d, d) / std::sqrt(double(d));
    m /= std::sqrt(lambda_max(Mat(m.adjoint() * m)));
    return columns_of(m);
}

inline std::vector<std::vector<int>> consecutive_blocks(int n, int size) {
    std::vector<std::vector<int>> out;
    for (int k = 0; k + size <= n; k += size) {
        std::vector<int> b;
        for (int i = k; i < k + size; ++i) b.push_back(i);
        out.push_back(b);
    }
    return out;
}

inline std::vector<Mat> rank_one_operators(const VectorSystem& s) {
    std::vector<Mat> ops;
    for (auto& v : s.vectors) ops.push_back(v * v.adjoint());
    return ops;
}

}  // namespace mcpsel
