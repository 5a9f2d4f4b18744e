#pragma once
#include "abc/grid.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace abc {

enum class PartitionKind { T_q, G_lq, G_jlq, R_akq, S_kql };

struct PartitionFamily {
    PartitionKind kind = PartitionKind::T_q;
    int d = 2;
    std::uint64_t q = 1, l = 1, k = 1;
    int j = 0;
    std::vector<std::uint64_t> a;  // R_akq only, a(i) in [0, q) for i < k

    static PartitionFamily T(int d, std::uint64_t q);
    static PartitionFamily G(int d, std::uint64_t l, std::uint64_t q);
    static PartitionFamily Gj(int d, int j, std::uint64_t l, std::uint64_t q);
    static PartitionFamily R(int d, std::vector<std::uint64_t> a, std::uint64_t k, std::uint64_t q);
    static PartitionFamily S(int d, std::uint64_t kq, std::uint64_t l);

    std::string name() const;
    std::uint64_t atom_count() const;
    // Coarsest grid on which every atom is a union of cells.
    GridSpec natural_grid() const;
};

// One atom: a single box, or k boxes for R_akq.
using Atom = BoxUnion;

std::vector<Atom> atoms(const PartitionFamily& f);
std::uint64_t locate(const std::vector<Rational>& x, const PartitionFamily& f);
// Permutation of atom indices induced by x1 -> x1 + alpha; throws if alpha
// does not map atoms onto atoms.
std::vector<std::uint64_t> phi_action(const PartitionFamily& f, const Rational& alpha);

// True if every atom of fine lies inside one atom of coarse.
bool refines(const PartitionFamily& fine, const PartitionFamily& coarse);

std::string atoms_csv(const PartitionFamily& f);

}  // namespace abc
