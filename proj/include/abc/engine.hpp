#pragma once
// Stage assembly: h_n, H_n = h_n o H_{n-1} and T_n = H_n^{-1} o phi^{alpha_{n+1}} o H_n.

#include "abc/analytic.hpp"
#include "abc/hmap.hpp"
#include "abc/stage.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace abc {

enum class Mode { Exact, Analytic, Both };
std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);
inline bool has_exact(Mode m) { return m != Mode::Analytic; }
inline bool has_analytic(Mode m) { return m != Mode::Exact; }

struct EngineOptions {
    std::uint64_t cell_budget = 100000000;
    // Refine the stage grid by n q_n so the delta-insets of towers and good
    // domains are unions of cells.
    bool tower_grid = false;
    AnalyticOptions analytic;
    std::uint64_t samples = 1000;  // sampled analytic checks
    std::uint64_t seed = 1;
};

// The conjugator h_n of one stage.
struct StageConjugator {
    StageParams params;
    bool identity = false;        // l = 1
    std::optional<HLayout> layout;
    BlockSlideMap word;           // g_d .. g_3 then the h word
    bool has_word = false;
    std::string note;
    std::shared_ptr<const AnalyticBuild> analytic;
};

StageConjugator make_conjugator(const StageParams& s, Mode mode, const EngineOptions& opt);

// H_n as the list h_1, .., h_n; nothing is composed into a single function.
struct ConjugationStack {
    Mode mode = Mode::Exact;
    int d = 2;
    std::vector<StageConjugator> stages;

    AnalyticTorusMap analytic_H() const;  // elementary maps of h_1 first
};

struct StageChecks {
    bool commutes = false;            // h_n o phi^{alpha_n} = phi^{alpha_n} o h_n
    double commute_residual = 0;      // analytic, sampled
    bool period_identity = false;     // T_n^{q_{n+1}} = id (exact)
    bool cycles_divide = false;       // every cycle length divides q_{n+1}
    bool base_orbit_full = false;     // some cell has cycle length q_{n+1}
    bool atoms_permuted = false;     // T_n permutes H_n^{-1} T_{q_{n+1}}
    std::optional<ClosenessReport> closeness;
};

struct StageMap {
    int n = 1;
    StageParams params;
    Mode mode = Mode::Exact;
    GridSpec grid;
    std::optional<CellPermutation> H, Hinv, T;  // exact mode, on grid
    AnalyticTorusMap H_an, T_an;               // analytic mode; T_an is a stack
    StageChecks checks;
};

// Grid for stage s: x1 = lcm(2 l^d q^2, q_{n+1}), x2 = 2l, x_i = l, refined by
// all earlier conjugators and optionally by n q_n for insets.
GridSpec stage_grid(const StageParams& s, const ConjugationStack& prev, const EngineOptions& opt);

// Appends h_n to stack and returns T_n.
StageMap build_stage(const StageParams& s, ConjugationStack& stack, const EngineOptions& opt = {});

// Exact image of a point under a grid permutation that translates cells.
std::vector<Rational> apply_cells(const CellPermutation& P, const std::vector<Rational>& x);

struct Orbit {
    std::vector<std::vector<Rational>> exact;
    std::vector<VecD> analytic;
};
Orbit evaluate(const StageMap& T, const std::vector<Rational>& x, std::uint64_t iterates,
               std::uint64_t max_iterates = 1000000);

struct CrossModeReport {
    std::uint64_t starts = 0, bad = 0;
    double max_error_outside = 0;  // torus distance, starts off the bad stripes
    double eps = 0;
    bool pass() const { return max_error_outside < eps; }
};
// T_n in both modes from random exact starts (one step).
CrossModeReport compare_modes(const StageMap& T, std::uint64_t starts, std::uint64_t seed);

// Sampled d_rho(T_n, T_{n-1}) where the two differ only by the rotation gap
// alpha_{n+1} - alpha_n inside h_n.  Differences are carried along the stack
// (value, increment) so nothing cancels catastrophically.
double stage_gap_d_rho(const AnalyticTorusMap& Hprev, const AnalyticTorusMap& h, double alpha_n, double gap,
                       double rho, std::uint64_t samples);

struct ChooseKCertificate {
    std::uint64_t k = 0;
    double d_rho = 0;
    double rotation_gap = 0;  // 1 / q_{n+1}
};

struct ChooseKResult {
    std::uint64_t k = 1;
    bool failed = false;
    std::string reason;
    std::vector<ChooseKCertificate> certificates;
};

struct ChooseKOptions {
    std::uint64_t k_start = 1, k_ceiling = std::uint64_t(1) << 24;
    std::uint64_t samples = 64;
};

// Doubling search for the smallest k with d_rho(T_n, T_{n-1}) < budget;
// draft.k is ignored.
ChooseKResult choose_kn(const StageParams& draft, const ConjugationStack& prev, double rho, double budget,
                        const EngineOptions& eopt = {}, const ChooseKOptions& kopt = {});

}  // namespace abc
