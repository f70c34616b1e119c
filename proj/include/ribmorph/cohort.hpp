#pragma once

#include <cstdint>
#include <vector>

#include "ribmorph/features.hpp"

namespace ribmorph {

/**
 * Feature records drawn from published class-conditional summaries: 2-PPR
 * components, PDRC and volume/length ratio are normal per class. The later
 * path directions and the remaining DRC components are made-up
 * continuations. Two ribs (left and right, same class) per subject.
 */
std::vector<RibFeatureRecord> reported_cohort(std::size_t ribs_per_class, std::uint64_t seed);

/**
 * Lengths from two normal modes (25 mm and 180 mm); every feature is a smooth
 * function of length plus noise, so any length threshold can be learned to
 * the extent the noise allows. One rib per subject.
 */
std::vector<RibFeatureRecord> bimodal_length_cohort(std::size_t ribs, std::uint64_t seed);

}  // namespace ribmorph
