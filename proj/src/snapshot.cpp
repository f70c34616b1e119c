#include "ribmorph/snapshot.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ribmorph/error.hpp"

namespace ribmorph {

namespace {

constexpr std::array<Rgb, 16> kPalette{{
    {230, 25, 75},   {60, 180, 75},   {255, 225, 25}, {0, 130, 200},  {245, 130, 48},  {145, 30, 180},
    {70, 240, 240},  {240, 50, 230},  {210, 245, 60}, {250, 190, 212}, {0, 128, 128},  {220, 190, 255},
    {170, 110, 40},  {255, 250, 200}, {128, 0, 0},    {170, 255, 195},
}};

}  // namespace

Plane plane_from_string(std::string_view text)
{
    if (text == "coronal") {
        return Plane::Coronal;
    }
    if (text == "sagittal") {
        return Plane::Sagittal;
    }
    throw Error(ErrorCode::InvalidArgument, "plane must be coronal or sagittal, got '" + std::string(text) + "'");
}

Rgb label_color(Label label)
{
    if (label == 0) {
        return {0, 0, 0};
    }
    return kPalette[(label - 1) % kPalette.size()];
}

Rgb Image::pixel(int x, int y) const
{
    const std::size_t at = 3 * (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x));
    return {rgb[at], rgb[at + 1], rgb[at + 2]};
}

Image project(const LabelVolume& vol, Plane plane, const std::vector<WorldPoint>& markers)
{
    const Dims& d = vol.dims();
    const int column_axis = plane == Plane::Coronal ? 0 : 1;
    const int depth_axis = plane == Plane::Coronal ? 1 : 0;
    Image img;
    img.width = d[static_cast<std::size_t>(column_axis)];
    img.height = d[2];
    std::vector<Label> best(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height), 0);

    for (int k = 0; k < d[2]; ++k) {
        for (int c = 0; c < img.width; ++c) {
            Label m = 0;
            for (int t = 0; t < d[static_cast<std::size_t>(depth_axis)]; ++t) {
                VoxelCoord v{};
                v.k = k;
                (column_axis == 0 ? v.i : v.j) = c;
                (depth_axis == 0 ? v.i : v.j) = t;
                m = std::max(m, vol[vol.linear_index(v)]);
            }
            best[static_cast<std::size_t>(d[2] - 1 - k) * static_cast<std::size_t>(img.width) + static_cast<std::size_t>(c)] = m;
        }
    }
    img.rgb.reserve(3 * best.size());
    for (Label l : best) {
        const Rgb c = label_color(l);
        img.rgb.insert(img.rgb.end(), c.begin(), c.end());
    }
    for (const WorldPoint& p : markers) {
        const Vec3 idx = (vol.world_to_index(p).array() + 0.5).floor();
        const int col = static_cast<int>(idx[column_axis]);
        const int k = static_cast<int>(idx[2]);
        if (col < 0 || col >= img.width || k < 0 || k >= img.height) {
            continue;
        }
        const std::size_t at = 3 * (static_cast<std::size_t>(d[2] - 1 - k) * static_cast<std::size_t>(img.width) + static_cast<std::size_t>(col));
        img.rgb[at] = img.rgb[at + 1] = img.rgb[at + 2] = 255;
    }
    return img;
}

std::vector<std::uint8_t> encode_ppm(const Image& image)
{
    const std::string header = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), image.rgb.begin(), image.rgb.end());
    return out;
}

}  // namespace ribmorph
