#pragma once
// Deterministic SVG figures.  Coordinates are printed with fixed precision so
// identical inputs give identical bytes.

#include "abc/hmap.hpp"
#include "abc/spectral.hpp"
#include "abc/towers.hpp"

#include <string>
#include <vector>

namespace abc {

// Tower-base schematic: the i1-stripes of both bases on the unit square,
// labelled A0.. and B0.., x2 cross-section drawn as it is.
std::string svg_tower_bases(const StageParams& s);

struct HPatternBlock {
    ABlockIndex index;
    Box from, to;
};
// Every A-block with its image under the block formula.
std::vector<HPatternBlock> h_pattern(const HLayout& L);
// Domain on the left, image on the right; hue follows e, shade follows f.
std::string svg_h_pattern(const HLayout& L);

std::string svg_speed(const std::vector<SpeedReport>& rows);
std::string svg_density(const SpectralDensity& s);

}  // namespace abc
