#include <CLI11.hpp>
#include <iostream>

#include "mcpsel/commands.hpp"

using namespace mcpsel;
using namespace mcpsel::cli;

namespace {

int fail(int code, const std::string& reason, const std::string& msg) {
    std::cerr << "error reason=" << reason << ": " << msg << "\n";
    return code;
}

int do_reverify(const Config& cfg, double t) {
    for (auto& [k, v] : cfg.params)
        if (k != "certificate") throw InputError("config:unknown_key", "unknown key '" + k + "' for reverify");
    auto it = cfg.params.find("certificate");
    if (it == cfg.params.end()) throw InputError("config:missing_key", "reverify needs certificate = <path>");
    json cert = read_json_file(it->second);
    Verdict v = reverify(cert, t);
    if (!v.warning.empty()) std::cerr << "warning: " << v.warning << "\n";
    if (!v.ok) {
        std::cout << "reverify: FAIL reason=" << v.reason << " field=" << v.field << "\n";
        return 1;
    }
    std::cout << "reverify: pass " << cert.at("command").get<std::string>() << " instance " << cert.at("instance_hash").get<std::string>().substr(0, 12)
              << " (" << v.fields_checked << " values within " << fmt(t) << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mcpsel: selector experiments with re-verifiable certificates"};
    std::string config_path, output = ".";
    std::uint64_t seed = 1;
    double t = -1;
    app.add_option("--config", config_path, "experiment config (key = value under one [command] section)")->required();
    auto* out_opt = app.add_option("--output", output, "directory for certificates and tables");
    auto* seed_opt = app.add_option("--seed", seed, "seed for random instance generation");
    app.add_option("--tol", t, "equality tolerance for certificate checks");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    try {
        if (t > 0) tol().eq = t;
        Config cfg = load_config(config_path);
        if (cfg.command == "reverify") return do_reverify(cfg, tol().eq);
        if (!seed_opt->count() && cfg.params.count("seed")) {
            try {
                seed = std::stoull(cfg.params.at("seed"));
            } catch (...) {
                throw InputError("config:value", "seed must be a non-negative integer");
            }
        }
        if (!out_opt->count() && cfg.params.count("output")) output = cfg.params.at("output");
        Run run = run_experiment(cfg, seed, output);
        std::cout << run.summary << "\n";
        for (auto& f : run.files) std::cerr << "wrote " << f << "\n";
        return run.holds ? 0 : fail(1, "bound_violated", "the certified bound does not hold on this instance");
    } catch (const InputError& e) {
        return fail(2, e.reason, e.what());
    } catch (const Error& e) {
        return fail(1, e.reason, e.what());
    } catch (const json::exception& e) {
        return fail(2, "io:instance", e.what());
    } catch (const std::exception& e) {
        return fail(1, "internal", e.what());
    }
}
