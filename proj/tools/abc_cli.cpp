// abc: run, verify, render, params.
// Exit codes: 0 all checks pass, 1 some check fails, 2 configuration error.

#include "abc/config.hpp"
#include "abc/report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace abc;

namespace {

struct Flags {
    std::string config, mode, out;
    int stages = 0;
    long long seed = -1;
};

RunConfig resolve(const Flags& f) {
    RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
    if (!f.mode.empty()) c.mode = mode_from_string(f.mode);
    if (!f.out.empty()) c.out = f.out;
    if (f.seed >= 0) c.seed = std::uint64_t(f.seed);
    if (f.stages > 0) {
        if (std::size_t(f.stages) > c.kl.size())
            throw ConfigError("--stages " + std::to_string(f.stages) + " exceeds the " + std::to_string(c.kl.size()) +
                              " configured (k, l) pairs");
        c.kl.resize(f.stages);
    }
    validate(c);
    return c;
}

void print_verdicts(const RunReport& r, bool failures_only) {
    for (const auto& v : r.verdicts) {
        if (failures_only && v.pass) continue;
        std::cout << (v.pass ? "PASS" : "FAIL") << "  [" << v.stage << "] " << v.check << ": " << v.lhs << " " << v.op
                  << " " << v.rhs;
        if (!v.note.empty()) std::cout << "  (" << v.note << ")";
        std::cout << "\n";
    }
    std::size_t failed = 0;
    for (const auto& v : r.verdicts) failed += !v.pass;
    std::cout << r.verdicts.size() << " checks, " << failed << " failed\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"approximation-by-conjugation stage simulator"};
    app.require_subcommand(1);
    Flags f;
    auto add_common = [&](CLI::App* s) {
        s->add_option("--config", f.config, "key = value config file");
        s->add_option("--stages", f.stages, "use only the first N stages");
        s->add_option("--mode", f.mode, "exact | analytic | both");
        s->add_option("--out", f.out, "output directory");
        s->add_option("--seed", f.seed, "sampling seed");
    };
    auto* run_cmd = app.add_subcommand("run", "execute stages and write report, tables and figures");
    auto* verify_cmd = app.add_subcommand("verify", "execute stages and print checks only");
    auto* render_cmd = app.add_subcommand("render", "figures from <out>/report.json");
    auto* params_cmd = app.add_subcommand("params", "print the stage chain");
    for (auto* s : {run_cmd, verify_cmd, render_cmd, params_cmd}) add_common(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*render_cmd) {
            std::string dir = f.out;
            if (dir.empty()) dir = f.config.empty() ? std::string("out") : load_config(f.config).out;
            std::ifstream in(std::filesystem::path(dir) / "report.json");
            if (!in) throw ConfigError("no report.json under " + dir);
            std::stringstream ss;
            ss << in.rdbuf();
            const std::string body = ss.str();
            nlohmann::json doc = body.find_first_not_of(" \t\r\n") == std::string::npos ? nlohmann::json::object()
                                                                                          : nlohmann::json::parse(body);
            RunReport r;
            r.files = render_figures(doc);
            write_outputs(r, dir);
            for (const auto& [k, v] : r.files) std::cout << "wrote " << (std::filesystem::path(dir) / k).string() << "\n";
            return 0;
        }
        RunConfig c = resolve(f);
        if (*params_cmd) {
            std::cout << dump_deterministic(to_json(c.schedule()));
            return 0;
        }
        if (*verify_cmd) {
            RunReport r = run(c, false);
            print_verdicts(r, false);
            return r.all_pass() ? 0 : 1;
        }
        RunReport r = run(c, true);
        write_outputs(r, c.out);
        print_verdicts(r, true);
        std::cout << "report: " << (std::filesystem::path(c.out) / "report.json").string() << "\n";
        return r.all_pass() ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ParameterError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
