#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "mcpsel/linalg.hpp"

namespace mcpsel {

// Coefficients in ascending degree.
struct RealPolynomial {
    std::vector<double> coeffs;

    int degree() const {
        for (int k = static_cast<int>(coeffs.size()) - 1; k >= 0; --k)
            if (coeffs[k] != 0.0) return k;
        return -1;
    }
    double operator()(double x) const {
        double v = 0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * x + *it;
        return v;
    }
    double leading() const { return degree() < 0 ? 0.0 : coeffs[degree()]; }

    // p(z - s)
    RealPolynomial shifted(double s) const {
        std::vector<double> c(coeffs);
        int n = static_cast<int>(c.size());
        for (int i = 0; i < n; ++i)
            for (int k = n - 2; k >= i; --k) c[k] -= s * c[k + 1];
        return {c};
    }
    RealPolynomial derivative() const {
        std::vector<double> c;
        for (size_t k = 1; k < coeffs.size(); ++k) c.push_back(k * coeffs[k]);
        return {c};
    }
    friend RealPolynomial operator*(const RealPolynomial& a, const RealPolynomial& b) {
        if (a.coeffs.empty() || b.coeffs.empty()) return {};
        std::vector<double> c(a.coeffs.size() + b.coeffs.size() - 1, 0.0);
        for (size_t i = 0; i < a.coeffs.size(); ++i)
            for (size_t j = 0; j < b.coeffs.size(); ++j) c[i + j] += a.coeffs[i] * b.coeffs[j];
        return {c};
    }
    friend RealPolynomial operator+(const RealPolynomial& a, const RealPolynomial& b) {
        std::vector<double> c(std::max(a.coeffs.size(), b.coeffs.size()), 0.0);
        for (size_t i = 0; i < a.coeffs.size(); ++i) c[i] += a.coeffs[i];
        for (size_t i = 0; i < b.coeffs.size(); ++i) c[i] += b.coeffs[i];
        return {c};
    }
    RealPolynomial operator*(double s) const {
        RealPolynomial r = *this;
        for (auto& c : r.coeffs) c *= s;
        return r;
    }
};

inline double max_coeff_diff(const RealPolynomial& a, const RealPolynomial& b) {
    size_t n = std::max(a.coeffs.size(), b.coeffs.size());
    double m = 0;
    for (size_t i = 0; i < n; ++i) {
        double x = i < a.coeffs.size() ? a.coeffs[i] : 0.0;
        double y = i < b.coeffs.size() ? b.coeffs[i] : 0.0;
        m = std::max(m, std::abs(x - y));
    }
    return m;
}

struct MaxrootResult {
    double value = 0;
    bool all_real = true;
    double max_imag_residual = 0;
};

inline std::vector<std::complex<double>> roots(const RealPolynomial& p) {
    int n = p.degree();
    if (n < 0) throw Error("zero_polynomial", "roots of the zero polynomial");
    double scale = 0;
    for (int k = 0; k <= n; ++k) scale = std::max(scale, std::abs(p.coeffs[k]));
    // Trailing coefficients at rounding level are roots at zero; keeping them
    // would split a multiple zero root into a spurious complex cluster.
    int lo = 0;
    while (lo < n && std::abs(p.coeffs[lo]) <= 1e-14 * scale) ++lo;
    std::vector<std::complex<double>> r(lo, 0.0);
    int m = n - lo;
    if (m == 0) return r;
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(m, m);
    double lead = p.coeffs[n];
    for (int i = 0; i < m; ++i) comp(0, i) = -p.coeffs[n - 1 - i] / lead;
    for (int i = 1; i < m; ++i) comp(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    for (int i = 0; i < m; ++i) r.push_back(es.eigenvalues()(i));
    return r;
}

inline MaxrootResult maxroot(const RealPolynomial& p) {
    if (p.degree() < 1) throw Error("degree", "maxroot needs degree >= 1");
    auto rs = roots(p);
    MaxrootResult out;
    out.value = -INFINITY;
    for (auto& z : rs) {
        out.value = std::max(out.value, z.real());
        out.max_imag_residual = std::max(out.max_imag_residual, std::abs(z.imag()));
    }
    out.all_real = out.max_imag_residual <= tol().root;
    if (out.all_real) {
        // Newton polish of the top root; companion eigenvalues lose a few digits.
        RealPolynomial dp = p.derivative();
        double x = out.value;
        for (int it = 0; it < 8; ++it) {
            double f = p(x), g = dp(x);
            if (g == 0.0) break;
            double nx = x - f / g;
            if (!(std::abs(p(nx)) < std::abs(f))) break;
            x = nx;
        }
        if (std::abs(x - out.value) <= 1e-6 * std::max(1.0, std::abs(x))) out.value = x;
    }
    return out;
}

}  // namespace mcpsel
