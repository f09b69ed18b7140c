#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mcpsel/binary.hpp"
#include "mcpsel/discretization.hpp"
#include "mcpsel/exponentials.hpp"
#include "mcpsel/frames.hpp"
#include "mcpsel/identities.hpp"
#include "mcpsel/json_io.hpp"
#include "mcpsel/mcp.hpp"
#include "mcpsel/random.hpp"
#include "mcpsel/selector.hpp"

namespace mcpsel::cli {

inline constexpr int kCertificateFormat = 1;
inline constexpr const char* kToolVersion = "1.0.0";

using Params = std::map<std::string, std::string>;

// Exit 2: unreadable files, malformed configs or certificates.
struct InputError : std::runtime_error {
    std::string reason;
    InputError(std::string r, const std::string& what) : std::runtime_error(what), reason(std::move(r)) {}
};

struct Config {
    std::string command;
    Params params;
};

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n"), b = s.find_last_not_of(" \t\r\n");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

// key = value lines under a single [command] header; # and ; start comments
inline Config parse_config(std::istream& in) {
    Config c;
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
        ++no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        auto where = " (line " + std::to_string(no) + ")";
        if (t.front() == '[') {
            if (t.back() != ']') throw InputError("config:section", "unterminated section header" + where);
            if (!c.command.empty()) throw InputError("config:section", "one [command] section per config" + where);
            c.command = trim(t.substr(1, t.size() - 2));
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos) throw InputError("config:syntax", "expected key = value" + where);
        if (c.command.empty()) throw InputError("config:section", "key before the [command] header" + where);
        std::string k = trim(t.substr(0, eq)), v = trim(t.substr(eq + 1));
        if (k.empty()) throw InputError("config:syntax", "empty key" + where);
        if (c.params.count(k)) throw InputError("config:duplicate_key", "duplicate key " + k + where);
        c.params[k] = v;
    }
    if (c.command.empty()) throw InputError("config:section", "no [command] section");
    return c;
}

inline Config load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InputError("io:read", "cannot read " + path);
    return parse_config(f);
}

inline json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InputError("io:read", "cannot read " + path);
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        throw InputError("io:parse", path + ": " + e.what());
    }
}

inline void write_text_file(const std::filesystem::path& p, const std::string& text) {
    std::error_code ec;
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
    std::ofstream f(p, std::ios::binary);
    if (!f || !(f << text)) throw InputError("io:write", "cannot write " + p.string());
}

// ---------------------------------------------------------------------------
// Typed parameter access

class ParamReader {
public:
    explicit ParamReader(const Params& p) : p_(p) {}

    double num(const std::string& k, double def) const {
        auto it = p_.find(k);
        if (it == p_.end()) return def;
        try {
            size_t used = 0;
            double v = std::stod(it->second, &used);
            if (trim(it->second.substr(used)).empty()) return v;
        } catch (...) {
        }
        throw InputError("config:value", "key " + k + " expects a number, got '" + it->second + "'");
    }
    int integer(const std::string& k, int def) const {
        double v = num(k, def);
        if (v != std::floor(v)) throw InputError("config:value", "key " + k + " expects an integer");
        return static_cast<int>(v);
    }
    std::string text(const std::string& k, const std::string& def) const {
        auto it = p_.find(k);
        return it == p_.end() ? def : it->second;
    }
    json parsed(const std::string& k, const json& def) const {
        auto it = p_.find(k);
        if (it == p_.end()) return def;
        try {
            return json::parse(it->second);
        } catch (const json::exception&) {
            throw InputError("config:value", "key " + k + " expects JSON, got '" + it->second + "'");
        }
    }
    bool has(const std::string& k) const { return p_.count(k) > 0; }

private:
    const Params& p_;
};

// ---------------------------------------------------------------------------
// Instance serialization

inline json mats_json(const std::vector<Mat>& ms) {
    json a = json::array();
    for (auto& m : ms) a.push_back(to_json(m));
    return a;
}

inline std::vector<Mat> mats_from(const json& j) {
    std::vector<Mat> out;
    for (auto& x : j) out.push_back(mat_from_json(x));
    return out;
}

inline json system_json(const VectorSystem& s) {
    json v = json::array();
    for (auto& x : s.vectors) v.push_back(to_json(x));
    return {{"dim", s.dim}, {"vectors", v}};
}

inline VectorSystem system_from(const json& j) {
    VectorSystem s{j.at("dim").get<int>(), {}};
    for (auto& x : j.at("vectors")) {
        s.vectors.push_back(vec_from_json(x));
        if (s.vectors.back().size() != s.dim) throw Error("bad_system", "vector length differs from dim");
    }
    return s;
}

inline json systems_json(const std::vector<VectorSystem>& ss) {
    json a = json::array();
    for (auto& s : ss) a.push_back(system_json(s));
    return a;
}

inline std::vector<VectorSystem> systems_from(const json& j) {
    std::vector<VectorSystem> out;
    for (auto& x : j) out.push_back(system_from(x));
    return out;
}

inline std::vector<std::vector<int>> blocks_from(const json& j) { return j.get<std::vector<std::vector<int>>>(); }

inline IntervalUnion set_from(const json& j) {
    std::vector<std::pair<double, double>> iv;
    for (auto& p : j) {
        if (!p.is_array() || p.size() != 2) throw Error("bad_interval", "S must be a list of [a,b) pairs");
        iv.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    return IntervalUnion(iv);
}

inline json set_json(const IntervalUnion& s) {
    json a = json::array();
    for (auto [x, y] : s.intervals) a.push_back({x, y});
    return a;
}

// inf and nan have no JSON spelling; absent values are null
inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline SelectorInstance selector_instance_from(const json& inst) {
    SelectorInstance in;
    in.operators = mats_from(inst.at("operators"));
    in.blocks = blocks_from(inst.at("blocks"));
    in.epsilon = inst.value("epsilon", 0.0);
    if (inst.contains("block_dims")) in.block_dims = inst.at("block_dims").get<std::vector<int>>();
    if (inst.contains("block_eps")) in.block_eps = inst.at("block_eps").get<std::vector<double>>();
    return in;
}

inline std::string fmt(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    std::string s = buf;
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
}

inline std::string fmt_list(const std::vector<double>& v) {
    std::string s = "[";
    for (size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + fmt(v[k]);
    return s + "]";
}

// ---------------------------------------------------------------------------
// Commands

struct Command {
    std::vector<std::string> keys;                                  // beyond the common ones
    std::function<json(const ParamReader&)> settle;                 // effective parameters
    std::function<json(const json& params, Rng& rng)> generate;     // random instance
    std::function<json(const json& params, const json& instance)> solve;
    // recomputes every certified number of `result` from the instance and the
    // stored selection; must set "holds"
    std::function<json(const json& params, const json& instance, const json& result)> recompute;
    std::function<std::string(const json& result)> summary;
    std::function<void(const json& result, const json& params, const std::filesystem::path& dir, const std::string& name)> tables;
};

inline const std::vector<std::string>& common_keys() {
    static const std::vector<std::string> k{"seed", "instance", "name", "timestamp", "output"};
    return k;
}

namespace detail {

inline double slack(double v) { return tol().eq * std::max(1.0, std::abs(v)); }

inline json mcp_settle(const ParamReader& p) {
    return {{"generator", p.text("generator", "random_psd")}, {"dim", p.integer("dim", 3)}, {"count", p.integer("count", 3)}};
}

inline json mcp_generate(const json& pr, Rng& g) {
    int d = pr.at("dim"), m = pr.at("count");
    std::string gen = pr.at("generator");
    if (d < 1 || m < 1) throw InputError("config:value", "dim and count must be positive");
    std::vector<Mat> ms;
    for (int i = 0; i < m; ++i) {
        if (gen == "identity") ms.push_back(Mat::Identity(d, d));
        else if (gen == "random_psd") ms.push_back(random_psd(g, d, g.integer(1, d)));
        else if (gen == "random_hermitian") ms.push_back(random_hermitian(g, d));
        else if (gen == "rank_one") ms.push_back(random_psd(g, d, 1));
        else throw InputError("config:value", "unknown generator " + gen);
    }
    return {{"matrices", mats_json(ms)}};
}

inline json selector_settle(const ParamReader& p, int r_def) {
    return {{"dim", p.integer("dim", 4)}, {"n", p.integer("n", 12)}, {"r", p.integer("r", r_def)}, {"epsilon", p.num("epsilon", -1)}};
}

// Parseval frame; eps defaults to the largest trace
inline json frame_instance(const json& pr, Rng& g, int block) {
    int d = pr.at("dim"), n = pr.at("n");
    if (d < 1 || n < d) throw InputError("config:value", "need n >= dim >= 1");
    if (block < 1 || n % block) throw InputError("config:value", "n must be a multiple of the block size");
    auto ops = rank_one_operators(random_parseval(g, d, n));
    double eps = pr.at("epsilon");
    if (eps <= 0)
        for (auto& op : ops) eps = std::max(eps, trace(op));
    return {{"operators", mats_json(ops)}, {"blocks", consecutive_blocks(n, block)}, {"epsilon", eps}};
}

inline json selector_recompute(const std::string& kind, const json& pr, const json& inst, const json& res) {
    auto in = selector_instance_from(inst);
    auto sel = res.at("selected").get<std::vector<int>>();
    int n = static_cast<int>(in.operators.size());
    for (int i : sel)
        if (i < 0 || i >= n) throw Error("bad_certificate", "selected index out of range");
    json out;
    auto ach = selector_achieved(kind, in, sel);
    std::vector<double> prom;
    int r = pr.value("r", 0);
    if (kind == "weaver") prom = {std::pow(1 / std::sqrt(double(r)) + std::sqrt(in.epsilon), 2)};
    if (kind == "ks2") prom.assign(2, 2 * std::sqrt(in.epsilon) + in.epsilon);
    if (kind == "block") prom = block_weaver_bounds(in.block_eps, r);
    out["achieved"] = ach;
    out["promised"] = prom;
    bool ok = selector_valid(in, sel);
    for (size_t k = 0; k < ach.size(); ++k) ok = ok && ach[k] <= prom[k] + slack(prom[k]);
    out["holds"] = ok;
    return out;
}

inline json selector_result(const SelectorCertificate& c) {
    return {{"selected", c.selected}, {"achieved", c.achieved}, {"promised", c.promised}, {"bound", c.bound_formula}, {"mode", c.mode},
            {"witness_sum_norm", c.witness_sum_norm}};
}

inline std::string selector_summary(const json& r) {
    return "achieved " + fmt_list(r.at("achieved").get<std::vector<double>>()) + " vs promised " +
           fmt_list(r.at("promised").get<std::vector<double>>()) + " (" + r.at("mode").get<std::string>() + ")";
}

inline std::vector<double> gram_extremes(const std::vector<VectorSystem>& sys, const std::vector<int>& sel, bool lower) {
    std::vector<double> out;
    for (auto& s : sys) {
        Mat g = principal(gram(s), sel);
        out.push_back(sel.empty() ? (lower ? 1.0 : 0.0) : (lower ? lambda_min(g) : lambda_max(g)));
    }
    return out;
}

inline json systems_result(const SystemsCertificate& c) {
    return {{"selected", c.selected}, {"redundant_size", c.redundant.size()}, {"lower", c.lower}, {"upper", c.upper},
            {"promised_lower", c.promised_lower}, {"promised_upper", c.promised_upper}, {"c", c.c}, {"constant_C", c.constant_C},
            {"rule", c.rule}, {"r", c.r}, {"modes", c.modes}};
}

inline json tree_levels_json(const BinarySelectorTree& t, bool with_dev) {
    json lv = json::array();
    for (auto& level : t.levels) {
        json nodes = json::array();
        for (auto& nd : level) {
            json o = {{"b", nd.b}, {"members", t.real_members(nd)}};
            if (with_dev) {
                o["deviation"] = nd.deviation;
                o["bound"] = nd.bound;
            }
            nodes.push_back(o);
        }
        lv.push_back(nodes);
    }
    return lv;
}

inline double min_pair_dist(const DoublingPointSet& sp, const std::vector<int>& m) {
    double md = std::numeric_limits<double>::infinity();
    for (size_t a = 0; a < m.size(); ++a)
        for (size_t b = a + 1; b < m.size(); ++b) md = std::min(md, sp.dist(m[a], m[b]));
    return md;
}

inline DoublingPointSet points_from(const json& inst) {
    DoublingPointSet sp;
    sp.points = inst.at("points").get<std::vector<std::vector<double>>>();
    if (sp.points.empty()) throw Error("hypothesis:points", "no points");
    return sp;
}

inline std::vector<int> frequencies_from_indices(const std::vector<int>& idx, int window) {
    std::vector<int> f;
    for (int i : idx) f.push_back(i - window);
    return f;
}

inline json gap_or_null(const std::vector<int>& v, bool minimum) {
    if (v.size() < 2) return nullptr;
    return minimum ? min_consecutive_gap(v) : max_consecutive_gap(v);
}

inline std::vector<int> window_minus(int window, const std::vector<int>& removed) {
    std::set<int> rm(removed.begin(), removed.end());
    std::vector<int> kept;
    for (int k = -window; k <= window; ++k)
        if (!rm.count(k)) kept.push_back(k);
    return kept;
}

}  // namespace detail

inline const std::map<std::string, Command>& commands() {
    static const std::map<std::string, Command> table = [] {
        std::map<std::string, Command> t;
        using namespace detail;

        t["mcp-eval"] = {
            {"generator", "dim", "count"},
            mcp_settle,
            mcp_generate,
            [](const json&, const json& inst) {
                auto p = mcp(mats_from(inst.at("matrices")));
                return json{{"coeffs", p.coeffs}, {"degree", p.degree()}};
            },
            [](const json&, const json& inst, const json&) {
                auto ms = mats_from(inst.at("matrices"));
                auto p = mcp(ms);
                json o{{"coeffs", p.coeffs}, {"degree", p.degree()}};
                bool ok = true;
                if (p.degree() <= 4 && ms.size() <= 4) {
                    double res = max_coeff_diff(p, mcp_oracle(ms));
                    o["oracle_residual"] = res;
                    ok = res <= 1e-8;
                }
                o["holds"] = ok;
                return o;
            },
            [](const json& r) { return "coefficients " + fmt_list(r.at("coeffs").get<std::vector<double>>()) + " (ascending)"; },
            nullptr};

        t["mcp-maxroot"] = {
            {"generator", "dim", "count"},
            mcp_settle,
            mcp_generate,
            [](const json&, const json& inst) { return json::object(); },
            [](const json&, const json& inst, const json&) {
                auto ms = mats_from(inst.at("matrices"));
                auto mr = maxroot(mcp(ms));
                Mat s = Mat::Zero(ms[0].rows(), ms[0].rows());
                double tr = 0;
                for (auto& a : ms) {
                    s += a;
                    tr += trace(a);
                }
                double nrm = operator_norm(s);
                return json{{"maxroot", mr.value}, {"all_real", mr.all_real}, {"norm_of_sum", nrm}, {"trace_of_sum", tr},
                            {"holds", mr.all_real && nrm <= mr.value + 1e-7 * std::max(1.0, mr.value)}};
            },
            [](const json& r) { return "maxroot " + fmt(r.at("maxroot")) + (r.at("all_real").get<bool>() ? " (real-rooted)" : " (complex roots)"); },
            nullptr};

        t["verify-identities"] = {
            {"count", "max_dim", "max_m"},
            [](const ParamReader& p) { return json{{"count", p.integer("count", 100)}, {"max_dim", p.integer("max_dim", 4)}, {"max_m", p.integer("max_m", 4)}}; },
            [](const json& pr, Rng& g) {
                return json{{"seed", g.raw()}, {"count", pr.at("count")}, {"max_dim", pr.at("max_dim")}, {"max_m", pr.at("max_m")}};
            },
            [](const json&, const json&) { return json::object(); },
            [](const json&, const json& inst, const json&) {
                std::uint64_t seed = inst.at("seed");
                int c = inst.at("count"), d = inst.at("max_dim"), m = inst.at("max_m");
                auto a = identity_suite(seed, c, d, m);
                auto b = inequality_suite(seed ^ 0x9e3779b97f4a7c15ULL, c, d, m);
                a.insert(a.end(), b.begin(), b.end());
                json checks = json::array();
                int viol = 0;
                bool real = true;
                for (auto& s : a) {
                    checks.push_back({{"name", s.name}, {"kind", s.kind}, {"instances", s.instances}, {"worst", s.worst},
                                      {"violations", s.violations}, {"real_rooted", s.real_rooted}});
                    viol += s.violations;
                    real = real && s.real_rooted;
                }
                return json{{"checks", checks}, {"violations", viol}, {"holds", viol == 0 && real}};
            },
            [](const json& r) {
                return std::to_string(r.at("checks").size()) + " checks, " + std::to_string(r.at("violations").get<int>()) + " violations";
            },
            nullptr};

        t["select-weaver"] = {
            {"dim", "n", "r", "epsilon"},
            [](const ParamReader& p) { return selector_settle(p, 2); },
            [](const json& pr, Rng& g) { return frame_instance(pr, g, pr.at("r")); },
            [](const json& pr, const json& inst) { return selector_result(weaver_ksr_select(selector_instance_from(inst), pr.at("r"))); },
            [](const json& pr, const json& inst, const json& res) { return selector_recompute("weaver", pr, inst, res); },
            selector_summary,
            nullptr};

        t["select-ks2"] = {
            {"dim", "n", "epsilon"},
            [](const ParamReader& p) {
                json j = selector_settle(p, 2);
                j.erase("r");
                return j;
            },
            [](const json& pr, Rng& g) { return frame_instance(pr, g, 2); },
            [](const json&, const json& inst) { return selector_result(ks2_select(selector_instance_from(inst))); },
            [](const json& pr, const json& inst, const json& res) { return selector_recompute("ks2", pr, inst, res); },
            selector_summary,
            nullptr};

        t["select-block"] = {
            {"dims", "n", "r"},
            [](const ParamReader& p) { return json{{"dims", p.parsed("dims", json::array({2, 2}))}, {"n", p.integer("n", 12)}, {"r", p.integer("r", 2)}}; },
            [](const json& pr, Rng& g) {
                auto dims = pr.at("dims").get<std::vector<int>>();
                int n = pr.at("n"), r = pr.at("r");
                if (r < 1 || n % r) throw InputError("config:value", "n must be a multiple of r");
                std::vector<std::vector<Mat>> per(n);
                std::vector<double> be;
                for (int d : dims) {
                    if (d < 1 || d > n) throw InputError("config:value", "block dims must lie in [1, n]");
                    auto ops = rank_one_operators(random_parseval(g, d, n));
                    double e = 0;
                    for (int i = 0; i < n; ++i) {
                        per[i].push_back(ops[i]);
                        e = std::max(e, trace(ops[i]));
                    }
                    be.push_back(e);
                }
                std::vector<Mat> ops;
                for (auto& p : per) ops.push_back(direct_sum(p));
                double eps = 0;
                for (auto& op : ops) eps = std::max(eps, trace(op));
                return json{{"operators", mats_json(ops)}, {"blocks", consecutive_blocks(n, r)}, {"epsilon", eps}, {"block_dims", dims}, {"block_eps", be}};
            },
            [](const json& pr, const json& inst) { return selector_result(block_weaver_select(selector_instance_from(inst), pr.at("r"))); },
            [](const json& pr, const json& inst, const json& res) { return selector_recompute("block", pr, inst, res); },
            selector_summary,
            nullptr};

        t["feichtinger"] = {
            {"generator", "dim", "systems", "t", "block", "C"},
            [](const ParamReader& p) {
                return json{{"generator", p.text("generator", "near_orthonormal")}, {"dim", p.integer("dim", 12)}, {"systems", p.integer("systems", 2)},
                            {"t", p.num("t", 0.005)}, {"block", p.integer("block", 2)}, {"C", p.num("C", FeichtingerOptions{}.C)}};
            },
            [](const json& pr, Rng& g) {
                int d = pr.at("dim"), k = pr.at("systems"), b = pr.at("block");
                std::string gen = pr.at("generator");
                std::vector<VectorSystem> sys;
                std::vector<double> eps;
                for (int j = 0; j < k; ++j) {
                    if (gen == "near_orthonormal") {
                        sys.push_back(near_orthonormal(g, d, pr.at("t")));
                        double e = 1;
                        for (auto& v : sys.back().vectors) e = std::min(e, v.squaredNorm());
                        eps.push_back(std::min(e, 0.999));
                    } else if (gen == "two_bases") {
                        sys.push_back(union_of_bases(g, d, 2, std::sqrt(0.5)));
                        eps.push_back(0.5);
                    } else {
                        throw InputError("config:value", "unknown generator " + gen);
                    }
                }
                int n = sys[0].size();
                if (b < 1 || n % b) throw InputError("config:value", "block must divide the index count");
                return json{{"systems", systems_json(sys)}, {"eps", eps}, {"blocks", consecutive_blocks(n, b)}};
            },
            [](const json& pr, const json& inst) {
                FeichtingerOptions o;
                o.C = pr.at("C");
                return systems_result(feichtinger_select(systems_from(inst.at("systems")), inst.at("eps").get<std::vector<double>>(), blocks_from(inst.at("blocks")), o));
            },
            [](const json&, const json& inst, const json& res) {
                auto sys = systems_from(inst.at("systems"));
                auto eps = inst.at("eps").get<std::vector<double>>();
                auto sel = res.at("selected").get<std::vector<int>>();
                json o{{"lower", gram_extremes(sys, sel, true)}, {"upper", gram_extremes(sys, sel, false)}};
                double d0 = 0, emin = 1;
                for (double e : eps) {
                    d0 += 1 - e;
                    emin = std::min(emin, e);
                }
                bool ok = true;
                if (res.at("rule") == "one-stage") {
                    o["r"] = bl2_block_size(d0, emin);
                    o["c"] = bl2_constant(d0);
                }
                double c = o.contains("c") ? o["c"].get<double>() : res.at("c").get<double>();
                auto lo = o["lower"].get<std::vector<double>>();
                auto pl = res.at("promised_lower").get<std::vector<double>>();
                for (size_t j = 0; j < eps.size(); ++j) ok = ok && lo[j] >= c * eps[j] - slack(c) && lo[j] >= pl[j] - slack(pl[j]);
                o["holds"] = ok;
                return o;
            },
            [](const json& r) {
                return r.at("rule").get<std::string>() + " r=" + std::to_string(r.at("r").get<int>()) + " lower " + fmt_list(r.at("lower").get<std::vector<double>>()) +
                       " vs c*eps with c=" + fmt(r.at("c"));
            },
            nullptr};

        t["r-eps"] = {
            {"dim", "bases", "eps", "block", "C"},
            [](const ParamReader& p) {
                int d = p.integer("dim", 103);
                return json{{"dim", d}, {"bases", p.integer("bases", 2)}, {"eps", p.num("eps", 0.9)}, {"block", p.integer("block", d)}, {"C", p.num("C", RepsOptions{}.C)}};
            },
            [](const json& pr, Rng& g) {
                int d = pr.at("dim"), k = pr.at("bases"), b = pr.at("block");
                auto s = union_of_bases(g, d, k, 1.0);
                if (b < 1 || s.size() % b) throw InputError("config:value", "block must divide the index count");
                return json{{"systems", systems_json({s})}, {"blocks", consecutive_blocks(s.size(), b)}};
            },
            [](const json& pr, const json& inst) {
                RepsOptions o;
                o.C = pr.at("C");
                return systems_result(r_eps_select(systems_from(inst.at("systems")), blocks_from(inst.at("blocks")), pr.at("eps"), o));
            },
            [](const json& pr, const json& inst, const json& res) {
                auto sys = systems_from(inst.at("systems"));
                auto sel = res.at("selected").get<std::vector<int>>();
                double e = pr.at("eps");
                auto lo = gram_extremes(sys, sel, true), hi = gram_extremes(sys, sel, false);
                bool ok = true;
                for (size_t j = 0; j < lo.size(); ++j) ok = ok && lo[j] >= 1 - e - tol().eq && hi[j] <= 1 + e + tol().eq;
                return json{{"lower", lo}, {"upper", hi}, {"holds", ok}};
            },
            [](const json& r) {
                return r.at("rule").get<std::string>() + " r=" + std::to_string(r.at("r").get<int>()) + " |J|=" + std::to_string(r.at("selected").size()) +
                       " bounds " + fmt_list(r.at("lower").get<std::vector<double>>()) + ".." + fmt_list(r.at("upper").get<std::vector<double>>());
            },
            nullptr};

        t["binary-tree"] = {
            {"dim", "n", "depth"},
            [](const ParamReader& p) { return json{{"dim", p.integer("dim", 4)}, {"n", p.integer("n", 128)}, {"depth", p.integer("depth", 3)}}; },
            [](const json& pr, Rng& g) {
                int d = pr.at("dim"), n = pr.at("n");
                if (d < 1 || n < d) throw InputError("config:value", "need n >= dim >= 1");
                return json{{"operators", mats_json(rank_one_operators(random_parseval(g, d, n)))}};
            },
            [](const json& pr, const json& inst) {
                auto res = iterate_ks2(mats_from(inst.at("operators")), pr.at("depth"));
                std::vector<std::string> modes;
                for (size_t j = 0; j + 1 < res.tree.levels.size(); ++j) modes.push_back(res.tree.levels[j][0].mode);
                return json{{"levels", tree_levels_json(res.tree, true)}, {"phantom_count", res.tree.phantom_count}, {"modes", modes}};
            },
            [](const json& pr, const json& inst, const json& res) {
                auto ops = mats_from(inst.at("operators"));
                int N = pr.at("depth"), n = static_cast<int>(ops.size());
                double delta = 0;
                for (auto& op : ops) delta = std::max(delta, trace(op));
                auto bj = bj_sequence(delta, N);
                json lv = res.at("levels");
                bool ok = bj.certified && int(lv.size()) == N + 1;
                double worst = 0;
                std::vector<int> cover(n, 0);
                for (int j = 0; j < int(lv.size()); ++j)
                    for (auto& nd : lv[j]) {
                        auto m = nd.at("members").get<std::vector<int>>();
                        for (int i : m) {
                            if (i < 0 || i >= n) throw Error("bad_certificate", "member index out of range");
                            if (j == N) ++cover[i];
                        }
                        nd["deviation"] = leaf_deviation(ops, m, j);
                        nd["bound"] = bj.B[j] - 1;
                        ok = ok && nd["deviation"].get<double>() <= bj.B[j] - 1 + tol().eq;
                        if (j == N) worst = std::max(worst, nd["deviation"].get<double>());
                    }
                for (int c : cover) ok = ok && c == 1;
                ok = ok && worst <= bj.partial_sum + tol().eq && worst <= bj.rhs + tol().eq;
                return json{{"levels", lv},
                            {"bj", {{"B", bj.B}, {"leaf_bound", bj.leaf_bound}, {"partial_sum", bj.partial_sum}, {"C", bj.C}, {"rhs", bj.rhs}}},
                            {"delta", delta},
                            {"leaf_max_deviation", worst},
                            {"holds", ok}};
            },
            [](const json& r) {
                return "depth " + std::to_string(r.at("levels").size() - 1) + " max leaf deviation " + fmt(r.at("leaf_max_deviation")) + " vs sum(B_j-1) " +
                       fmt(r.at("bj").at("partial_sum")) + ", C*sqrt(2^N delta) " + fmt(r.at("bj").at("rhs"));
            },
            nullptr};

        t["metric-separate"] = {
            {"lo", "hi", "r", "depth", "eta", "choice"},
            [](const ParamReader& p) {
                return json{{"lo", p.integer("lo", 0)}, {"hi", p.integer("hi", 256)}, {"r", p.num("r", 2)}, {"depth", p.integer("depth", -1)},
                            {"eta", p.integer("eta", 2)}, {"choice", p.text("choice", "hashed")}};
            },
            [](const json& pr, Rng& g) {
                int lo = pr.at("lo"), hi = pr.at("hi");
                if (hi <= lo) throw InputError("config:value", "need hi > lo");
                return json{{"points", DoublingPointSet::integers(lo, hi).points}, {"choice_seed", g.raw()}};
            },
            [](const json& pr, const json& inst) {
                auto sp = points_from(inst);
                double r = pr.at("r");
                int eta = pr.at("eta"), N = pr.at("depth");
                if (N < 0) {
                    // shallowest depth the ball-count hypothesis allows
                    N = 0;
                    while (sp.sup_ball(r) > std::ldexp(1.0, N - eta)) ++N;
                }
                std::uint64_t cs = inst.value("choice_seed", std::uint64_t(0));
                std::string rule = pr.at("choice");
                std::function<int(const Pair&)> choice = nullptr;
                if (rule == "hashed") {
                    choice = [cs](const Pair& p) {
                        std::uint64_t z = cs ^ (std::uint64_t(p[0]) * 0x9e3779b97f4a7c15ULL) ^ (std::uint64_t(p[1]) << 32);
                        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
                        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
                        return int((z ^ (z >> 31)) & 1) ? p[1] : p[0];
                    };
                } else if (rule != "first") {
                    throw InputError("config:value", "choice must be hashed or first");
                }
                auto res = separated_pair_partitions(sp, r, N, eta, choice);
                json leaves = json::array();
                for (auto& leaf : res.tree.leaves()) leaves.push_back({{"b", leaf.b}, {"members", res.tree.real_members(leaf)}});
                return json{{"depth", N}, {"leaves", leaves}, {"phantom_count", res.tree.phantom_count}, {"stage_one_levels", res.stage_one_levels}};
            },
            [](const json& pr, const json& inst, const json& res) {
                auto sp = points_from(inst);
                double r = pr.at("r");
                std::vector<int> cover(sp.size(), 0);
                json rows = json::array();
                bool sep = true, part = true;
                for (auto& leaf : res.at("leaves")) {
                    auto m = leaf.at("members").get<std::vector<int>>();
                    for (int i : m) {
                        if (i < 0 || i >= sp.size()) part = false;
                        else ++cover[i];
                    }
                    if (!part) break;
                    double md = min_pair_dist(sp, m);
                    rows.push_back({{"leaf", leaf.at("b")}, {"min_dist", finite_or_null(md)}});
                    if (md < r) sep = false;
                }
                for (int c : cover) part = part && c == 1;
                return json{{"rows", rows}, {"separated", sep}, {"partition", part}, {"holds", sep && part}};
            },
            [](const json& r) {
                double worst = std::numeric_limits<double>::infinity();
                for (auto& row : r.at("rows"))
                    if (!row.at("min_dist").is_null()) worst = std::min(worst, row.at("min_dist").get<double>());
                return std::to_string(r.at("leaves").size()) + " leaves, smallest in-leaf distance " + fmt(worst) + ", " +
                       (r.at("separated").get<bool>() ? "separated" : "NOT separated");
            },
            [](const json& res, const json& pr, const std::filesystem::path& dir, const std::string& name) {
                std::ostringstream csv;
                csv << "leaf,min_dist,r\n";
                for (auto& row : res.at("rows"))
                    csv << row.at("leaf").get<std::string>() << ',' << (row.at("min_dist").is_null() ? std::string("inf") : fmt(row.at("min_dist"))) << ','
                        << fmt(pr.at("r")) << '\n';
                write_text_file(dir / (name + "_separation.csv"), csv.str());
            }};

        t["scal-sample"] = {
            {"dim", "n", "eps", "bits", "norm"},
            [](const ParamReader& p) {
                return json{{"dim", p.integer("dim", 3)}, {"n", p.integer("n", 8)}, {"eps", p.num("eps", 0.3)}, {"bits", p.integer("bits", 24)}, {"norm", p.num("norm", 1)}};
            },
            [](const json& pr, Rng& g) {
                int d = pr.at("dim"), n = pr.at("n");
                if (d < 1 || n < 1) throw InputError("config:value", "dim and n must be positive");
                std::vector<Mat> ops;
                std::vector<double> w;
                Mat t = Mat::Zero(d, d);
                for (int i = 0; i < n; ++i) {
                    Vec v = random_gaussian(g, d, 1).col(0);
                    v /= v.norm();
                    ops.push_back(v * v.adjoint() * g.uniform(0.2, 1));
                    w.push_back(g.uniform(0.5, 1.5));
                    t += w.back() * ops.back();
                }
                double s = double(pr.at("norm")) / operator_norm(t);
                for (auto& x : w) x *= s;
                return json{{"operators", mats_json(ops)}, {"weights", w}};
            },
            [](const json& pr, const json& inst) {
                SamplingOptions o;
                o.bits = pr.at("bits");
                auto res = scal_sample(mats_from(inst.at("operators")), inst.at("weights").get<std::vector<double>>(), pr.at("eps"), o);
                json s = json::array();
                for (auto& x : res.samples) s.push_back({{"index", x.index}, {"multiplicity", x.multiplicity}});
                return json{{"samples", s}, {"a", res.a}, {"r", res.r}, {"N", res.N}, {"leaf", res.leaf}, {"truncation", res.truncation}, {"modes", res.modes}};
            },
            [](const json& pr, const json& inst, const json& res) {
                auto ops = mats_from(inst.at("operators"));
                auto w = inst.at("weights").get<std::vector<double>>();
                double eps = pr.at("eps"), a = res.at("a");
                int d = static_cast<int>(ops[0].rows());
                Mat t = Mat::Zero(d, d), s = Mat::Zero(d, d);
                double delta = 0;
                for (size_t i = 0; i < ops.size(); ++i) {
                    t += w[i] * ops[i];
                    delta = std::max(delta, trace(ops[i]));
                }
                double ratio = 0;
                for (auto& x : res.at("samples")) {
                    int i = x.at("index");
                    std::int64_t m = x.at("multiplicity");
                    if (i < 0 || i >= int(ops.size()) || m <= 0) throw Error("bad_certificate", "bad sample entry");
                    s += double(m) * ops[i];
                    ratio = std::max(ratio, double(m) * operator_norm(ops[i]) / (a * (1 + eps)));
                }
                double nt = operator_norm(t);
                double c0 = std::pow(c_derived(), 2);
                double lo = c0 * delta / (eps * eps) * std::max(1.0, nt);
                double dev = operator_norm(Mat(s / a - t));
                bool ok = dev < eps && a >= lo * (1 - 1e-12) && a <= 2 * lo * (1 + 1e-12) && ratio <= 1 + tol().eq;
                return json{{"deviation", dev}, {"norm_T", nt}, {"delta", delta}, {"c0", c0}, {"bracket_lo", lo}, {"bracket_hi", 2 * lo},
                            {"max_multiplicity_ratio", ratio}, {"holds", ok}};
            },
            [](const json& r) {
                return "deviation " + fmt(r.at("deviation")) + " < eps, a " + fmt(r.at("a")) + " in [" + fmt(r.at("bracket_lo")) + ", " + fmt(r.at("bracket_hi")) +
                       "], " + std::to_string(r.at("samples").size()) + " distinct samples";
            },
            nullptr};

        auto exp_window = [](const ParamReader& p) { return p.integer("window", 128); };

        t["exp-syndetic"] = {
            {"S", "eps", "window", "C"},
            [exp_window](const ParamReader& p) {
                return json{{"S", p.parsed("S", json::array({json::array({0.0, 0.5})}))}, {"eps", p.num("eps", 0.5)}, {"window", exp_window(p)}, {"C", p.num("C", 0.5)}};
            },
            [](const json& pr, Rng&) { return json{{"S", pr.at("S")}, {"window", pr.at("window")}}; },
            [](const json& pr, const json& inst) {
                auto c = syndetic_riesz_select(set_from(inst.at("S")), pr.at("eps"), inst.at("window"), pr.at("C"));
                return json{{"lambda", c.lambda.selected}, {"r", c.r}, {"mode", c.mode}};
            },
            [](const json& pr, const json& inst, const json& res) {
                auto s = set_from(inst.at("S"));
                auto lam = res.at("lambda").get<std::vector<int>>();
                double eps = pr.at("eps"), m = s.measure();
                int r = res.at("r");
                int w = inst.at("window");
                for (int k : lam)
                    if (k < -w || k > w) throw Error("bad_certificate", "frequency outside the window");
                RVec ev = eigenvalues(exp_gram(s, lam));
                json o{{"lambda_min", ev.minCoeff()}, {"lambda_max", ev.maxCoeff()}, {"target_lo", (1 - eps) * m}, {"target_hi", (1 + eps) * m},
                       {"min_gap", gap_or_null(lam, true)}, {"max_gap", gap_or_null(lam, false)}};
                o["holds"] = ev.minCoeff() >= (1 - eps) * m - 1e-8 && ev.maxCoeff() <= (1 + eps) * m + 1e-8 && lam.size() > 1 &&
                             max_consecutive_gap(lam) <= 2 * r - 1;
                return o;
            },
            [](const json& r) {
                return "|Lambda|=" + std::to_string(r.at("lambda").size()) + " eigenvalues [" + fmt(r.at("lambda_min")) + ", " + fmt(r.at("lambda_max")) + "] within [" +
                       fmt(r.at("target_lo")) + ", " + fmt(r.at("target_hi")) + "], max gap " + std::to_string(r.at("max_gap").get<int>()) + " (r=" +
                       std::to_string(r.at("r").get<int>()) + ")";
            },
            nullptr};

        t["exp-removal"] = {
            {"S", "window", "r", "depth", "eta", "C"},
            [exp_window](const ParamReader& p) {
                return json{{"S", p.parsed("S", json::array({json::array({json::array({0.0, 0.95})})}))}, {"window", exp_window(p)}, {"r", p.num("r", 2)},
                            {"depth", p.integer("depth", -1)}, {"eta", p.integer("eta", 2)}, {"C", p.num("C", -1)}};
            },
            [](const json& pr, Rng&) {
                // a single set may be given as a bare list of pairs
                json s = pr.at("S");
                if (!s.empty() && s[0].is_array() && !s[0].empty() && s[0][0].is_number()) s = json::array({s});
                return json{{"sets", s}, {"window", pr.at("window")}};
            },
            [](const json& pr, const json& inst) {
                std::vector<IntervalUnion> sets;
                for (auto& s : inst.at("sets")) sets.push_back(set_from(s));
                RemovalOptions o;
                o.r = pr.at("r");
                o.sparse.depth = pr.at("depth");
                o.sparse.eta = pr.at("eta");
                o.sparse.C = pr.at("C");
                auto out = unit_norm_removal(sets, inst.at("window"), o);
                return json{{"removed", out.removed}, {"r", out.cert.r}, {"promised_lower", out.removal.promised_lower}, {"N", out.removal.sparse.N},
                            {"leaf_deviation", out.removal.leaf_deviation}, {"mode", out.cert.mode}};
            },
            [](const json&, const json& inst, const json& res) {
                auto rem = res.at("removed").get<std::vector<int>>();
                int w = inst.at("window");
                auto kept = window_minus(w, rem);
                std::vector<double> lo, hi;
                for (auto& sj : inst.at("sets")) {
                    auto s = set_from(sj);
                    RVec ev = kept.empty() ? RVec::Ones(1) : eigenvalues(exp_gram(s, kept));
                    lo.push_back(ev.minCoeff());
                    hi.push_back(ev.maxCoeff());
                }
                double pl = res.at("promised_lower");
                int r = res.at("r");
                json g = gap_or_null(rem, true);
                bool ok = g.is_null() || g.get<int>() >= r;
                for (double l : lo) ok = ok && l > 0 && l >= pl - tol().eq;
                return json{{"kept_count", kept.size()}, {"lambda_min", lo}, {"lambda_max", hi}, {"min_gap", g}, {"holds", ok}};
            },
            [](const json& r) {
                return std::to_string(r.at("removed").size()) + " removed, min gap " + (r.at("min_gap").is_null() ? std::string("none") : std::to_string(r.at("min_gap").get<int>())) +
                       " (r=" + std::to_string(r.at("r").get<int>()) + "), lambda_min " + fmt_list(r.at("lambda_min").get<std::vector<double>>()) + " vs promised " +
                       fmt(r.at("promised_lower"));
            },
            nullptr};

        t["exp-frame"] = {
            {"S", "eps", "window", "r", "depth", "eta", "C"},
            [exp_window](const ParamReader& p) {
                return json{{"S", p.parsed("S", json::array({json::array({0.0, 1.0 / 32})}))}, {"eps", p.num("eps", 0.9)}, {"window", exp_window(p)},
                            {"r", p.num("r", 2)}, {"depth", p.integer("depth", -1)}, {"eta", p.integer("eta", 2)}, {"C", p.num("C", -1)}};
            },
            [](const json& pr, Rng&) { return json{{"S", pr.at("S")}, {"window", pr.at("window")}}; },
            [](const json& pr, const json& inst) {
                SparseOptions o;
                o.depth = pr.at("depth");
                o.eta = pr.at("eta");
                o.C = pr.at("C");
                auto out = bounded_frame_sample(set_from(inst.at("S")), pr.at("eps"), inst.at("window"), pr.at("r"), o);
                return json{{"lambda", out.cert.lambda.selected}, {"leaf", out.leaf}, {"N", out.sparse.N}, {"a", out.a}, {"r", out.cert.r},
                            {"depth_rule", out.sparse.depth_rule}};
            },
            [](const json& pr, const json& inst, const json& res) {
                auto s = set_from(inst.at("S"));
                int w = inst.at("window");
                auto lam = res.at("lambda").get<std::vector<int>>();
                double a = res.at("a"), eps = pr.at("eps");
                FrequencySet f;
                f.window = w;
                auto freqs = f.all();
                VectorSystem u = gram_coordinates(exp_gram(s, freqs));
                Mat t = Mat::Zero(u.dim, u.dim), sl = Mat::Zero(u.dim, u.dim);
                std::set<int> in(lam.begin(), lam.end());
                for (int k = 0; k < int(freqs.size()); ++k) {
                    Mat op = u.vectors[k] * u.vectors[k].adjoint();
                    t += op;
                    if (in.count(freqs[k])) sl += op;
                }
                RVec ev = eigenvalues(Mat(a * sl - t));
                RVec fe = lam.empty() ? RVec::Zero(1) : eigenvalues(Mat(a * exp_gram(s, lam)));
                json g = gap_or_null(lam, true);
                int r = res.at("r");
                bool ok = ev.minCoeff() >= -eps - tol().eq && ev.maxCoeff() <= eps + tol().eq && (g.is_null() || g.get<int>() >= r);
                return json{{"deviation_min", ev.minCoeff()}, {"deviation_max", ev.maxCoeff()}, {"frame_lower", fe.minCoeff()}, {"frame_upper", fe.maxCoeff()},
                            {"min_gap", g}, {"holds", ok}};
            },
            [](const json& r) {
                return "|Lambda|=" + std::to_string(r.at("lambda").size()) + " a=" + fmt(r.at("a")) + " spectrum of a*S_leaf - T in [" + fmt(r.at("deviation_min")) + ", " +
                       fmt(r.at("deviation_max")) + "], min gap " + (r.at("min_gap").is_null() ? std::string("none") : std::to_string(r.at("min_gap").get<int>()));
            },
            nullptr};

        return t;
    }();
    return table;
}

inline const Command& command(const std::string& name) {
    auto& t = commands();
    auto it = t.find(name);
    if (it == t.end()) throw InputError("config:command", "unknown command " + name);
    return it->second;
}

inline void check_keys(const std::string& name, const Params& p) {
    auto& c = command(name);
    for (auto& [k, v] : p) {
        bool known = std::count(common_keys().begin(), common_keys().end(), k) || std::count(c.keys.begin(), c.keys.end(), k);
        if (!known) throw InputError("config:unknown_key", "unknown key '" + k + "' for " + name);
    }
}

// Solves, then recomputes the certified numbers so the stored result is exactly
// what reverification will reproduce.
inline json certify(const std::string& name, const json& params, const json& instance) {
    auto& c = command(name);
    json result = c.solve(params, instance);
    json rec = c.recompute(params, instance, result);
    for (auto& [k, v] : rec.items()) result[k] = v;
    json cert;
    cert["certificate_format"] = kCertificateFormat;
    cert["tool_version"] = kToolVersion;
    cert["command"] = name;
    cert["params"] = params;
    cert["instance"] = instance;
    cert["instance_hash"] = instance_hash(instance);
    cert["result"] = result;
    return cert;
}

inline json make_instance(const std::string& name, const json& params, const Params& raw, std::uint64_t seed) {
    ParamReader p(raw);
    if (p.has("instance")) return read_json_file(p.text("instance", ""));
    Rng g(seed);
    // round trip through text so the solver sees exactly what is stored
    return json::parse(command(name).generate(params, g).dump());
}

struct Run {
    json certificate;
    std::string summary;
    bool holds = false;
    std::vector<std::string> files;
};

inline std::string iso_now() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

inline Run run_experiment(const Config& cfg, std::uint64_t seed, const std::string& outdir) {
    if (cfg.command == "reverify") throw InputError("config:command", "reverify is handled separately");
    check_keys(cfg.command, cfg.params);
    auto& c = command(cfg.command);
    ParamReader p(cfg.params);
    json params = c.settle(p);
    json inst = make_instance(cfg.command, params, cfg.params, seed);
    Run run;
    run.certificate = certify(cfg.command, params, inst);
    if (p.text("timestamp", "false") == "true") run.certificate["timestamp"] = iso_now();
    const json& res = run.certificate["result"];
    run.holds = res.at("holds").get<bool>();
    run.summary = cfg.command + ": " + c.summary(res) + (run.holds ? " [certified]" : " [NOT certified]");
    std::string name = p.text("name", cfg.command);
    std::filesystem::path dir(outdir);
    auto path = dir / (name + ".json");
    write_text_file(path, run.certificate.dump(2) + "\n");
    run.files.push_back(path.string());
    if (c.tables) {
        c.tables(res, params, dir, name);
        run.files.push_back((dir / (name + "_separation.csv")).string());
    }
    return run;
}

// ---------------------------------------------------------------------------
// Reverification

struct Verdict {
    bool ok = false;
    std::string reason;  // machine-readable
    std::string field;
    std::string warning;
    int fields_checked = 0;
};

// First path where `fresh` disagrees with `stored`; numbers compare within tol.
inline bool find_drift(const json& stored, const json& fresh, const std::string& path, double t, std::string& where, int& checked) {
    if (fresh.is_object()) {
        if (!stored.is_object()) {
            where = path;
            return true;
        }
        for (auto& [k, v] : fresh.items()) {
            if (!stored.contains(k)) {
                where = path + "." + k;
                return true;
            }
            if (find_drift(stored.at(k), v, path + "." + k, t, where, checked)) return true;
        }
        return false;
    }
    if (fresh.is_array()) {
        if (!stored.is_array() || stored.size() != fresh.size()) {
            where = path;
            return true;
        }
        for (size_t i = 0; i < fresh.size(); ++i)
            if (find_drift(stored[i], fresh[i], path + "[" + std::to_string(i) + "]", t, where, checked)) return true;
        return false;
    }
    ++checked;
    if (fresh.is_number() && stored.is_number()) {
        double a = stored.get<double>(), b = fresh.get<double>();
        if (std::abs(a - b) <= t * std::max(1.0, std::abs(b))) return false;
        where = path;
        return true;
    }
    if (fresh == stored) return false;
    where = path;
    return true;
}

inline Verdict reverify(const json& cert, double t) {
    Verdict v;
    for (auto k : {"command", "params", "instance", "instance_hash", "result"})
        if (!cert.contains(k)) {
            v.reason = "malformed";
            v.field = k;
            return v;
        }
    if (cert.value("certificate_format", 0) != kCertificateFormat) {
        v.reason = "format";
        v.field = "certificate_format";
        return v;
    }
    if (cert.at("instance_hash") != instance_hash(cert.at("instance"))) {
        v.reason = "drift";
        v.field = "instance_hash";
        return v;
    }
    if (cert.value("tool_version", std::string()) != kToolVersion)
        v.warning = "certificate written by version " + cert.value("tool_version", std::string("?")) + ", checking with " + kToolVersion;
    auto& c = command(cert.at("command").get<std::string>());
    json fresh;
    try {
        fresh = c.recompute(cert.at("params"), cert.at("instance"), cert.at("result"));
    } catch (const json::exception& e) {
        v.reason = "malformed";
        v.field = e.what();
        return v;
    }
    std::string where;
    if (find_drift(cert.at("result"), fresh, "result", t, where, v.fields_checked)) {
        v.reason = "drift";
        v.field = where;
        return v;
    }
    if (!fresh.at("holds").get<bool>()) {
        v.reason = "bound_violated";
        v.field = "result.holds";
        return v;
    }
    v.ok = true;
    return v;
}

}  // namespace mcpsel::cli
