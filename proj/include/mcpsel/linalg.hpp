#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcpsel/config.hpp"

namespace mcpsel {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

struct Error : std::runtime_error {
    std::string reason;
    Error(std::string why, const std::string& msg) : std::runtime_error(msg), reason(std::move(why)) {}
};

class HermitianMatrix {
public:
    HermitianMatrix() = default;
    explicit HermitianMatrix(Mat m) {
        if (m.rows() != m.cols()) throw Error("not_square", "matrix is not square");
        double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
        if (m.size() && (m - m.adjoint()).cwiseAbs().maxCoeff() > tol().herm * scale)
            throw Error("not_hermitian", "matrix is not Hermitian");
        m_ = (m + m.adjoint()) / 2.0;
    }
    static HermitianMatrix zero(int d) { return HermitianMatrix(Mat::Zero(d, d)); }
    static HermitianMatrix identity(int d) { return HermitianMatrix(Mat::Identity(d, d)); }
    static HermitianMatrix outer(const Vec& u) { return HermitianMatrix(u * u.adjoint()); }

    int dim() const { return static_cast<int>(m_.rows()); }
    const Mat& mat() const { return m_; }

    HermitianMatrix operator+(const HermitianMatrix& o) const { return HermitianMatrix(m_ + o.m_, 0); }
    HermitianMatrix operator-(const HermitianMatrix& o) const { return HermitianMatrix(m_ - o.m_, 0); }
    HermitianMatrix operator*(double s) const { return HermitianMatrix(m_ * s, 0); }

private:
    HermitianMatrix(Mat m, int) : m_(std::move(m)) {}
    Mat m_;
};

inline HermitianMatrix operator*(double s, const HermitianMatrix& h) { return h * s; }

inline RVec eigenvalues(const Mat& h) {
    if (h.rows() == 0) return RVec();
    Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

inline std::vector<double> eigenvalues(const HermitianMatrix& h) {
    RVec e = eigenvalues(h.mat());
    return {e.data(), e.data() + e.size()};
}

inline double lambda_max(const Mat& h) { return h.rows() ? eigenvalues(h).maxCoeff() : 0.0; }
inline double lambda_min(const Mat& h) { return h.rows() ? eigenvalues(h).minCoeff() : 0.0; }

inline double operator_norm(const Mat& h) {
    if (h.rows() == 0) return 0.0;
    RVec e = eigenvalues(h);
    return std::max(std::abs(e.minCoeff()), std::abs(e.maxCoeff()));
}
inline double operator_norm(const HermitianMatrix& h) { return operator_norm(h.mat()); }

inline double trace(const Mat& h) { return h.trace().real(); }
inline double trace(const HermitianMatrix& h) { return trace(h.mat()); }

inline bool is_psd(const Mat& h, double t) { return h.rows() == 0 || lambda_min(h) >= -t; }
inline bool is_psd(const HermitianMatrix& h, double t = tol().psd) { return is_psd(h.mat(), t); }

// B - A >= -t I
inline bool psd_order_leq(const Mat& a, const Mat& b, double t) { return is_psd(Mat(b - a), t); }
inline bool psd_order_leq(const HermitianMatrix& a, const HermitianMatrix& b, double t = tol().psd) {
    return psd_order_leq(a.mat(), b.mat(), t);
}

class PsdMatrix {
public:
    PsdMatrix() = default;
    explicit PsdMatrix(HermitianMatrix h) : h_(std::move(h)) {
        if (h_.dim() == 0) return;
        Eigen::SelfAdjointEigenSolver<Mat> es(h_.mat());
        double lo = es.eigenvalues().minCoeff();
        if (lo < -tol().psd) throw Error("not_psd", "matrix has eigenvalue " + std::to_string(lo));
        if (lo < 0) {
            RVec ev = es.eigenvalues().cwiseMax(0.0);
            h_ = HermitianMatrix(Mat(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint()));
        }
    }
    explicit PsdMatrix(const Mat& m) : PsdMatrix(HermitianMatrix(m)) {}
    static PsdMatrix zero(int d) { return PsdMatrix(HermitianMatrix::zero(d)); }

    int dim() const { return h_.dim(); }
    const Mat& mat() const { return h_.mat(); }
    const HermitianMatrix& herm() const { return h_; }

private:
    HermitianMatrix h_;
};

struct BlockDiagonalPsd {
    std::vector<PsdMatrix> blocks;

    std::vector<int> block_dims() const {
        std::vector<int> d;
        for (auto& b : blocks) d.push_back(b.dim());
        return d;
    }
    int dim() const {
        int s = 0;
        for (auto& b : blocks) s += b.dim();
        return s;
    }
    Mat assemble() const {
        int n = dim(), off = 0;
        Mat m = Mat::Zero(n, n);
        for (auto& b : blocks) {
            m.block(off, off, b.dim(), b.dim()) = b.mat();
            off += b.dim();
        }
        return m;
    }
};

inline Mat direct_sum(const std::vector<Mat>& parts) {
    Eigen::Index n = 0, off = 0;
    for (auto& p : parts) n += p.rows();
    Mat m = Mat::Zero(n, n);
    for (auto& p : parts) {
        m.block(off, off, p.rows(), p.cols()) = p;
        off += p.rows();
    }
    return m;
}

// Principal square root of a PSD matrix; tiny negative eigenvalues are clamped.
inline Mat psd_sqrt(const Mat& h) {
    if (h.rows() == 0) return h;
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    RVec s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

inline Mat principal(const Mat& g, const std::vector<int>& idx) {
    Mat s(idx.size(), idx.size());
    for (size_t a = 0; a < idx.size(); ++a)
        for (size_t b = 0; b < idx.size(); ++b) s(a, b) = g(idx[a], idx[b]);
    return s;
}

}  // namespace mcpsel
