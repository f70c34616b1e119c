#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "ribmorph/volume.hpp"

namespace ribmorph {

enum class Plane { Coronal, Sagittal };

/// Throws InvalidArgument for anything but "coronal" or "sagittal".
Plane plane_from_string(std::string_view text);

using Rgb = std::array<std::uint8_t, 3>;

/// Black for 0, otherwise a fixed 16-entry palette indexed by (label - 1) % 16.
Rgb label_color(Label label);

struct Image {
    int width = 0;
    int height = 0;
    /// Row-major RGB, row 0 at the top.
    std::vector<std::uint8_t> rgb;

    Rgb pixel(int x, int y) const;
};

/**
 * Maximum-label projection. Coronal collapses voxel axis j (image is i by k),
 * sagittal collapses i (image is j by k). Columns follow increasing index,
 * superior (largest k) is the top row. `markers` are world points drawn
 * white; points outside the grid are skipped.
 */
Image project(const LabelVolume& vol, Plane plane, const std::vector<WorldPoint>& markers = {});

/// Binary PPM (P6) bytes.
std::vector<std::uint8_t> encode_ppm(const Image& image);

}  // namespace ribmorph
