#include "ribmorph/morphology.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "ribmorph/error.hpp"

namespace ribmorph {

namespace {

std::vector<std::array<int, 3>> neighbour_offsets(Connectivity connectivity)
{
    std::vector<std::array<int, 3>> offsets;
    for (int dz = -1; dz <= 1; ++dz) {
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
                if (manhattan == 0) {
                    continue;
                }
                if (connectivity == Connectivity::Six && manhattan != 1) {
                    continue;
                }
                offsets.push_back({dx, dy, dz});
            }
        }
    }
    return offsets;
}

std::size_t count_foreground(const LabelVolume& vol)
{
    const auto data = vol.data();
    return static_cast<std::size_t>(std::count_if(data.begin(), data.end(), [](Label l) { return l != 0; }));
}

}  // namespace

BinaryMask::BinaryMask(LabelVolume vol) : vol_(std::move(vol))
{
    for (Label l : vol_.data()) {
        if (l > 1) {
            throw Error(ErrorCode::InvalidArgument, "binary mask contains label " + std::to_string(l));
        }
    }
    count_ = count_foreground(vol_);
}

BinaryMask BinaryMask::nonzero(const LabelVolume& vol)
{
    std::vector<Label> data(vol.size());
    std::transform(vol.data().begin(), vol.data().end(), data.begin(),
                   [](Label l) { return l != 0 ? 1U : 0U; });
    return BinaryMask(vol.with_data(std::move(data)));
}

BinaryMask BinaryMask::of_label(const LabelVolume& vol, Label label)
{
    std::vector<Label> data(vol.size());
    std::transform(vol.data().begin(), vol.data().end(), data.begin(),
                   [label](Label l) { return l == label ? 1U : 0U; });
    return BinaryMask(vol.with_data(std::move(data)));
}

BinaryMask BinaryMask::of_labels(const LabelVolume& vol, const std::set<Label>& labels)
{
    std::vector<Label> data(vol.size());
    std::transform(vol.data().begin(), vol.data().end(), data.begin(),
                   [&labels](Label l) { return labels.count(l) != 0 ? 1U : 0U; });
    return BinaryMask(vol.with_data(std::move(data)));
}

LabelVolume resample_nearest(const LabelVolume& vol, double target_spacing_mm)
{
    if (!(target_spacing_mm > 0.0) || !std::isfinite(target_spacing_mm)) {
        throw Error(ErrorCode::InvalidArgument, "target spacing must be positive");
    }
    const Dims& in = vol.dims();
    Dims out{};
    Vec3 ratio;
    std::array<std::vector<int>, 3> lookup;
    for (int a = 0; a < 3; ++a) {
        ratio[a] = target_spacing_mm / vol.spacing()[a];
        const double extent = in[a] / ratio[a];
        out[a] = std::max(1, static_cast<int>(std::ceil(extent - 1e-9)));
        lookup[a].resize(static_cast<std::size_t>(out[a]));
        for (int o = 0; o < out[a]; ++o) {
            const double src = (o + 0.5) * ratio[a] - 0.5;
            lookup[a][o] = std::clamp(static_cast<int>(std::floor(src + 0.5)), 0, in[a] - 1);
        }
    }

    const Mat3 linear = vol.affine().topLeftCorner<3, 3>();
    Mat4 affine = Mat4::Identity();
    affine.topLeftCorner<3, 3>() = linear * ratio.asDiagonal();
    affine.topRightCorner<3, 1>() =
        linear * (0.5 * ratio - Vec3::Constant(0.5)) + vol.affine().topRightCorner<3, 1>();

    std::vector<Label> data(static_cast<std::size_t>(out[0]) * out[1] * out[2]);
    std::size_t n = 0;
    for (int z = 0; z < out[2]; ++z) {
        for (int y = 0; y < out[1]; ++y) {
            for (int x = 0; x < out[0]; ++x, ++n) {
                data[n] = vol[vol.linear_index({lookup[0][x], lookup[1][y], lookup[2][z]})];
            }
        }
    }
    return LabelVolume(out, affine, std::move(data));
}

BinaryMask fill_holes(const BinaryMask& mask)
{
    const LabelVolume& vol = mask.volume();
    const Dims& d = vol.dims();
    std::vector<std::uint8_t> outside(vol.size(), 0);
    std::vector<std::size_t> queue;

    auto seed = [&](int x, int y, int z) {
        const std::size_t idx = vol.linear_index({x, y, z});
        if (!mask[idx] && !outside[idx]) {
            outside[idx] = 1;
            queue.push_back(idx);
        }
    };
    for (int z = 0; z < d[2]; ++z) {
        for (int y = 0; y < d[1]; ++y) {
            for (int x = 0; x < d[0]; ++x) {
                if (x == 0 || y == 0 || z == 0 || x == d[0] - 1 || y == d[1] - 1 || z == d[2] - 1) {
                    seed(x, y, z);
                }
            }
        }
    }
    const auto offsets = neighbour_offsets(Connectivity::Six);
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const VoxelCoord c = vol.coord(queue[head]);
        for (const auto& o : offsets) {
            const VoxelCoord n{c.i + o[0], c.j + o[1], c.k + o[2]};
            if (vol.contains(n)) {
                seed(n.i, n.j, n.k);
            }
        }
    }

    std::vector<Label> data(vol.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = (mask[i] || !outside[i]) ? 1U : 0U;
    }
    return BinaryMask(vol.with_data(std::move(data)));
}

ComponentSet connected_components(const BinaryMask& mask, Connectivity connectivity)
{
    const LabelVolume& vol = mask.volume();
    const auto offsets = neighbour_offsets(connectivity);

    struct Raw {
        std::size_t first = 0;
        std::size_t size = 0;
        BoundingBox box;
    };
    std::vector<Label> provisional(vol.size(), 0);
    std::vector<Raw> raws;
    std::vector<std::size_t> queue;

    for (std::size_t start = 0; start < vol.size(); ++start) {
        if (!mask[start] || provisional[start] != 0) {
            continue;
        }
        const auto id = static_cast<Label>(raws.size() + 1);
        Raw raw;
        raw.first = start;
        raw.box = {vol.coord(start), vol.coord(start)};
        queue.clear();
        queue.push_back(start);
        provisional[start] = id;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const VoxelCoord c = vol.coord(queue[head]);
            raw.box.lo = {std::min(raw.box.lo.i, c.i), std::min(raw.box.lo.j, c.j), std::min(raw.box.lo.k, c.k)};
            raw.box.hi = {std::max(raw.box.hi.i, c.i), std::max(raw.box.hi.j, c.j), std::max(raw.box.hi.k, c.k)};
            for (const auto& o : offsets) {
                const VoxelCoord n{c.i + o[0], c.j + o[1], c.k + o[2]};
                if (!vol.contains(n)) {
                    continue;
                }
                const std::size_t ni = vol.linear_index(n);
                if (mask[ni] && provisional[ni] == 0) {
                    provisional[ni] = id;
                    queue.push_back(ni);
                }
            }
        }
        raw.size = queue.size();
        raws.push_back(raw);
    }

    std::vector<std::size_t> order(raws.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (raws[a].size != raws[b].size) {
            return raws[a].size > raws[b].size;
        }
        return raws[a].first < raws[b].first;
    });
    std::vector<Label> remap(raws.size() + 1, 0);
    ComponentSet out{vol, static_cast<int>(raws.size()), {}, {}};
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        remap[order[rank] + 1] = static_cast<Label>(rank + 1);
        out.voxel_counts.push_back(raws[order[rank]].size);
        out.boxes.push_back(raws[order[rank]].box);
    }
    for (Label& l : provisional) {
        l = remap[l];
    }
    out.labels = vol.with_data(std::move(provisional));
    return out;
}

WorldPoint centroid(const BinaryMask& mask)
{
    if (mask.empty()) {
        throw Error(ErrorCode::EmptyMask, "centroid of an empty mask");
    }
    const LabelVolume& vol = mask.volume();
    Vec3 sum = Vec3::Zero();
    for (std::size_t i = 0; i < vol.size(); ++i) {
        if (mask[i]) {
            const VoxelCoord c = vol.coord(i);
            sum += Vec3(c.i, c.j, c.k);
        }
    }
    return vol.index_to_world(sum / static_cast<double>(mask.count()));
}

std::vector<VoxelCoord> surface_voxels(const BinaryMask& mask)
{
    const LabelVolume& vol = mask.volume();
    const auto offsets = neighbour_offsets(Connectivity::Six);
    std::vector<VoxelCoord> out;
    for (std::size_t i = 0; i < vol.size(); ++i) {
        if (!mask[i]) {
            continue;
        }
        const VoxelCoord c = vol.coord(i);
        for (const auto& o : offsets) {
            const VoxelCoord n{c.i + o[0], c.j + o[1], c.k + o[2]};
            if (!vol.contains(n) || !mask[vol.linear_index(n)]) {
                out.push_back(c);
                break;
            }
        }
    }
    return out;
}

std::vector<Vec3> surface_points(const BinaryMask& mask)
{
    const auto voxels = surface_voxels(mask);
    std::vector<Vec3> out;
    out.reserve(voxels.size());
    for (const auto& v : voxels) {
        out.push_back(mask.volume().index_to_world(Vec3(v.i, v.j, v.k)));
    }
    return out;
}

std::vector<Vec3> foreground_points(const BinaryMask& mask)
{
    const LabelVolume& vol = mask.volume();
    std::vector<Vec3> out;
    out.reserve(mask.count());
    for (std::size_t i = 0; i < vol.size(); ++i) {
        if (mask[i]) {
            const VoxelCoord c = vol.coord(i);
            out.push_back(vol.index_to_world(Vec3(c.i, c.j, c.k)));
        }
    }
    return out;
}

BoundingBox bounding_box(const LabelVolume& vol, const std::set<Label>& labels)
{
    bool found = false;
    BoundingBox box;
    for (std::size_t i = 0; i < vol.size(); ++i) {
        if (labels.count(vol[i]) == 0) {
            continue;
        }
        const VoxelCoord c = vol.coord(i);
        if (!found) {
            box = {c, c};
            found = true;
            continue;
        }
        box.lo = {std::min(box.lo.i, c.i), std::min(box.lo.j, c.j), std::min(box.lo.k, c.k)};
        box.hi = {std::max(box.hi.i, c.i), std::max(box.hi.j, c.j), std::max(box.hi.k, c.k)};
    }
    if (!found) {
        throw Error(ErrorCode::EmptyMask, "none of the requested labels are present");
    }
    return box;
}

LabelVolume extract_box(const LabelVolume& vol, const BoundingBox& box)
{
    if (!vol.contains(box.lo) || !vol.contains(box.hi) || box.lo.i > box.hi.i ||
        box.lo.j > box.hi.j || box.lo.k > box.hi.k) {
        throw Error(ErrorCode::OutOfBounds, "crop box outside the volume");
    }
    const Dims out{box.hi.i - box.lo.i + 1, box.hi.j - box.lo.j + 1, box.hi.k - box.lo.k + 1};
    Mat4 affine = vol.affine();
    affine.topRightCorner<3, 1>() = vol.index_to_world(Vec3(box.lo.i, box.lo.j, box.lo.k));
    std::vector<Label> data(static_cast<std::size_t>(out[0]) * out[1] * out[2]);
    std::size_t n = 0;
    for (int z = 0; z < out[2]; ++z) {
        for (int y = 0; y < out[1]; ++y) {
            for (int x = 0; x < out[0]; ++x, ++n) {
                data[n] = vol[vol.linear_index({box.lo.i + x, box.lo.j + y, box.lo.k + z})];
            }
        }
    }
    return LabelVolume(out, affine, std::move(data));
}

LabelVolume crop_with_margin(const LabelVolume& vol, const std::set<Label>& labels, double margin_mm)
{
    if (margin_mm < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "crop margin must be non-negative");
    }
    BoundingBox box = bounding_box(vol, labels);
    std::array<int, 3> grow{};
    for (int a = 0; a < 3; ++a) {
        grow[a] = static_cast<int>(std::ceil(margin_mm / vol.spacing()[a] - 1e-9));
    }
    const Dims& d = vol.dims();
    box.lo = {std::max(0, box.lo.i - grow[0]), std::max(0, box.lo.j - grow[1]), std::max(0, box.lo.k - grow[2])};
    box.hi = {std::min(d[0] - 1, box.hi.i + grow[0]), std::min(d[1] - 1, box.hi.j + grow[1]),
              std::min(d[2] - 1, box.hi.k + grow[2])};
    return extract_box(vol, box);
}

}  // namespace ribmorph
