#pragma once

#include <openssl/evp.h>

#include <cstdio>
#include <json.hpp>
#include <string>
#include <vector>

#include "mcpsel/linalg.hpp"
#include "mcpsel/polynomial.hpp"

namespace mcpsel {

using json = nlohmann::json;

inline json to_json(const Mat& m) {
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            re.push_back(m(i, j).real());
            im.push_back(m(i, j).imag());
        }
    return {{"dim", m.rows()}, {"re", re}, {"im", im}};
}

inline Mat mat_from_json(const json& j) {
    int d = j.at("dim").get<int>();
    auto re = j.at("re").get<std::vector<double>>();
    std::vector<double> im = j.contains("im") ? j.at("im").get<std::vector<double>>() : std::vector<double>(re.size(), 0.0);
    if (re.size() != size_t(d) * d || im.size() != re.size()) throw Error("bad_matrix", "matrix entry count does not match dim");
    Mat m(d, d);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) m(i, k) = cplx(re[i * d + k], im[i * d + k]);
    return m;
}

inline json to_json(const Vec& v) {
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        re.push_back(v(i).real());
        im.push_back(v(i).imag());
    }
    return {{"re", re}, {"im", im}};
}

inline Vec vec_from_json(const json& j) {
    auto re = j.at("re").get<std::vector<double>>();
    std::vector<double> im = j.contains("im") ? j.at("im").get<std::vector<double>>() : std::vector<double>(re.size(), 0.0);
    Vec v(re.size());
    for (size_t i = 0; i < re.size(); ++i) v(i) = cplx(re[i], im.at(i));
    return v;
}

inline json to_json(const RealPolynomial& p) { return {{"coeffs", p.coeffs}}; }
inline RealPolynomial poly_from_json(const json& j) { return {j.at("coeffs").get<std::vector<double>>()}; }

inline std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    EVP_DigestUpdate(ctx, data.data(), data.size());
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::string out;
    char buf[3];
    for (unsigned i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        out += buf;
    }
    return out;
}

// Hash of the canonical (sorted-key, compact) serialization.
inline std::string instance_hash(const json& instance) { return sha256_hex(instance.dump()); }

}  // namespace mcpsel
