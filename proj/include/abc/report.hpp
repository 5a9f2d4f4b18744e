#pragma once
// Run orchestration: stages in order, verdicts, JSON/CSV/SVG output.

#include "abc/config.hpp"
#include "abc/spectral.hpp"
#include "abc/towers.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace abc {

// One checked inequality or identity with both sides.
struct Verdict {
    int stage = 0;  // 0 for chain-wide checks
    std::string check, anchor, op;
    std::string lhs, rhs;  // exact where available
    double lhs_value = 0, rhs_value = 0;
    bool pass = false;
    std::string note;
};

nlohmann::json to_json(const Verdict& v);

struct RunReport {
    nlohmann::json doc;
    std::vector<Verdict> verdicts;
    std::map<std::string, std::string> files;  // relative path -> contents
    bool all_pass() const;
};

// Executes the configured chain.  With figures off, or for `verify`, no SVGs.
RunReport run(const RunConfig& c, bool with_files = true);

// Writes report.json and every table and figure under dir.
void write_outputs(const RunReport& r, const std::string& dir);

// SVGs from an existing report document; an empty report yields none.
std::map<std::string, std::string> render_figures(const nlohmann::json& report);

std::string dump_deterministic(const nlohmann::json& j);

}  // namespace abc
