#pragma once
#include "abc/grid.hpp"
#include "abc/step_function.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace abc {

// x[target] += s(x[source]) modulo 1.
struct Slide {
    int target = 0;
    int source = 1;
    StepFunction s;

    Slide inverse() const { return Slide{target, source, -s}; }
};

struct BlockSlideMap {
    int d = 2;
    std::vector<Slide> slides;  // applied first to last

    static BlockSlideMap identity(int d) { return BlockSlideMap{d, {}}; }
    BlockSlideMap inverse() const;
    // this, then other
    BlockSlideMap then(const BlockSlideMap& other) const;
    // Merge neighbouring slides with the same (target, source) and drop zero slides.
    BlockSlideMap simplified() const;

    std::vector<Rational> apply(std::vector<Rational> x) const;
    BoxUnion apply(const BoxUnion& u) const;
};

class CellPermutation {
public:
    CellPermutation() = default;
    explicit CellPermutation(GridSpec g);  // identity
    CellPermutation(GridSpec g, std::vector<std::uint32_t> img);

    const GridSpec& grid() const { return grid_; }
    std::uint32_t operator()(std::uint32_t c) const { return img_[c]; }
    const std::vector<std::uint32_t>& images() const { return img_; }
    std::uint64_t size() const { return img_.size(); }

    bool is_bijection() const;
    bool is_identity() const;
    CellPermutation inverse() const;
    // (this then other)(c) = other(this(c))
    CellPermutation then(const CellPermutation& other) const;
    CellPermutation power(std::uint64_t k) const;
    std::vector<std::uint64_t> cycle_lengths() const;  // per cell
    CellSet apply(const CellSet& s) const;
    bool operator==(const CellPermutation& o) const { return grid_ == o.grid_ && img_ == o.img_; }

    void apply_slide_inplace(const Slide& s);
    void apply_rotation_inplace(int axis, const Rational& t);

    void write_csv(std::ostream& os) const;
    void write_cycles_binary(std::ostream& os) const;

private:
    GridSpec grid_;
    std::vector<std::uint32_t> img_;
};

CellPermutation to_permutation(const BlockSlideMap& m, const GridSpec& g);
CellPermutation rotation_permutation(const GridSpec& g, const Rational& t);

// kind 1, 2, 3 for the displayed psi functions; modified selects the
// finer-grid form of psi^(2) (3 <= i <= d).
StepFunction build_psi(int kind, int i, std::uint64_t l, std::uint64_t q, int d, bool modified = false);

BlockSlideMap build_g(int i, std::uint64_t l, std::uint64_t q, int d, bool modified = false);
// g_2 o g_3 o ... o g_d: g_d acts first.
BlockSlideMap compose_g(std::uint64_t l, std::uint64_t q, int d, bool modified = false);

bool commutes_with_phi(const CellPermutation& m, std::uint64_t q);

struct PartitionMapReport {
    bool ok = false;
    std::uint64_t atoms = 0, matched = 0;
};

// Checks that every atom of `from` is mapped onto exactly one atom of `to`,
// bijectively, on a grid refining both.
struct PartitionFamily;
PartitionMapReport maps_partition(const BlockSlideMap& m, const PartitionFamily& from, const PartitionFamily& to,
                                  const GridSpec& g);

}  // namespace abc
