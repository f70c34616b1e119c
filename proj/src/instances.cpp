#include "ribmorph/instances.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <tuple>

#include "ribmorph/error.hpp"

namespace ribmorph {

std::string_view to_string(Side side)
{
    return side == Side::Left ? "left" : "right";
}

Side side_from_string(std::string_view text)
{
    if (text == "left" || text == "L") {
        return Side::Left;
    }
    if (text == "right" || text == "R") {
        return Side::Right;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown side '" + std::string(text) + "'");
}

Label anatomic_rib_label(Label vertebra_label, Side side)
{
    if (vertebra_label == 0 || vertebra_label >= kRightRibOffset) {
        throw Error(ErrorCode::InvalidArgument, "vertebra labels must lie in [1, 99]");
    }
    return side == Side::Right ? vertebra_label + kRightRibOffset : vertebra_label;
}

WorldPoint corpus_center(const BinaryMask& vertebra, const std::optional<BinaryMask>& corpus)
{
    if (vertebra.empty()) {
        throw Error(ErrorCode::EmptyMask, "vertebra mask is empty");
    }
    if (corpus) {
        if (corpus->empty()) {
            throw Error(ErrorCode::EmptyMask, "corpus mask is empty");
        }
        return centroid(*corpus);
    }
    const auto points = foreground_points(vertebra);
    std::vector<double> ys;
    ys.reserve(points.size());
    for (const Vec3& p : points) {
        ys.push_back(p.y());
    }
    std::sort(ys.begin(), ys.end());
    const std::size_t n = ys.size();
    const double median = n % 2 == 1 ? ys[n / 2] : 0.5 * (ys[n / 2 - 1] + ys[n / 2]);
    Vec3 sum = Vec3::Zero();
    std::size_t count = 0;
    for (const Vec3& p : points) {
        if (p.y() >= median) {
            sum += p;
            ++count;
        }
    }
    return sum / static_cast<double>(count);
}

VertebraFrame vertebra_frame(const BinaryMask& vertebra, const WorldPoint& corpus_center,
                             const std::optional<Vec3>& superior_hint)
{
    Vec3 superior = Vec3::UnitZ();
    if (superior_hint) {
        if (!(superior_hint->norm() > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "superior hint must be non-zero");
        }
        superior = superior_hint->normalized();
    }
    const Vec3 offset = corpus_center - centroid(vertebra);
    const Vec3 anterior = offset - offset.dot(superior) * superior;
    if (anterior.norm() < 1e-6) {
        return VertebraFrame{Mat3::Identity(), true};
    }
    VertebraFrame frame;
    const Vec3 a = anterior.normalized();
    const Vec3 r = a.cross(superior).normalized();
    frame.rotation.col(0) = r;
    frame.rotation.col(1) = superior.cross(r).normalized();
    frame.rotation.col(2) = superior;
    return frame;
}

VertebraInstance make_vertebra(Label label, const BinaryMask& vertebra,
                               const std::optional<BinaryMask>& corpus,
                               const std::optional<Vec3>& superior_hint)
{
    VertebraInstance v;
    v.label = label;
    v.centroid = centroid(vertebra);
    v.corpus_centroid = corpus_center(vertebra, corpus);
    v.frame = vertebra_frame(vertebra, v.corpus_centroid, superior_hint);
    v.surface = std::make_shared<const PointIndex>(surface_points(vertebra));
    return v;
}

std::vector<VertebraInstance> extract_vertebrae(const LabelVolume& vertebrae, const LabelVolume* corpora,
                                                const std::optional<Vec3>& superior_hint)
{
    std::set<Label> labels(vertebrae.data().begin(), vertebrae.data().end());
    labels.erase(0);

    bool binary_corpus = false;
    if (corpora != nullptr) {
        if (!corpora->same_grid(vertebrae)) {
            throw Error(ErrorCode::GridMismatch, "corpus mask grid differs from the vertebra mask");
        }
        binary_corpus = std::all_of(corpora->data().begin(), corpora->data().end(),
                                    [](Label l) { return l <= 1; });
    }

    std::vector<VertebraInstance> out;
    for (Label label : labels) {
        const BinaryMask mask = BinaryMask::of_label(vertebrae, label);
        std::optional<BinaryMask> corpus;
        if (corpora != nullptr) {
            std::vector<Label> data(vertebrae.size(), 0);
            std::size_t count = 0;
            for (std::size_t i = 0; i < data.size(); ++i) {
                const bool in = binary_corpus ? ((*corpora)[i] == 1 && vertebrae[i] == label)
                                              : (*corpora)[i] == label;
                data[i] = in ? 1U : 0U;
                count += in ? 1 : 0;
            }
            if (count > 0) {
                corpus = BinaryMask(vertebrae.with_data(std::move(data)));
            }
        }
        out.push_back(make_vertebra(label, mask, corpus, superior_hint));
    }
    return out;
}

std::vector<RibInstance> make_rib_instances(const ComponentSet& components)
{
    const LabelVolume& vol = components.labels;
    const auto n = static_cast<std::size_t>(components.count);
    std::vector<Vec3> sums(n, Vec3::Zero());
    std::vector<std::vector<Vec3>> surfaces(n);
    constexpr std::array<std::array<int, 3>, 6> kFaces{{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};

    for (std::size_t i = 0; i < vol.size(); ++i) {
        const Label l = vol[i];
        if (l == 0) {
            continue;
        }
        const VoxelCoord c = vol.coord(i);
        const Vec3 index(c.i, c.j, c.k);
        sums[l - 1] += index;
        for (const auto& f : kFaces) {
            const VoxelCoord nb{c.i + f[0], c.j + f[1], c.k + f[2]};
            if (!vol.contains(nb) || vol[vol.linear_index(nb)] != l) {
                surfaces[l - 1].push_back(vol.index_to_world(index));
                break;
            }
        }
    }

    std::vector<RibInstance> ribs;
    ribs.reserve(n);
    for (std::size_t c = 0; c < n; ++c) {
        RibInstance rib;
        rib.component_label = static_cast<Label>(c + 1);
        rib.voxel_count = components.voxel_counts[c];
        rib.volume_mm3 = static_cast<double>(rib.voxel_count) * vol.voxel_volume();
        rib.centroid = vol.index_to_world(sums[c] / static_cast<double>(rib.voxel_count));
        rib.surface = std::make_shared<const PointIndex>(std::move(surfaces[c]));
        ribs.push_back(std::move(rib));
    }
    return ribs;
}

Side determine_side(const RibInstance& rib, const VertebraInstance& vertebra)
{
    const double right = (rib.centroid - vertebra.centroid).dot(vertebra.frame.rotation.col(0));
    if (std::abs(right) < 1e-6) {
        throw Error(ErrorCode::DegenerateGeometry,
                    "rib centroid lies on the vertebra's mid-sagittal plane");
    }
    return right > 0.0 ? Side::Right : Side::Left;
}

AssignmentTable assign_ribs(const ComponentSet& components, const std::vector<VertebraInstance>& vertebrae)
{
    if (components.count == 0) {
        throw Error(ErrorCode::EmptyMask, "no rib components to assign");
    }
    AssignmentTable table;
    table.ribs = make_rib_instances(components);

    struct Candidate {
        double distance;
        std::size_t rib;
        std::size_t vertebra;
        Side side;
    };
    std::vector<Candidate> candidates;
    for (std::size_t r = 0; r < table.ribs.size(); ++r) {
        for (std::size_t v = 0; v < vertebrae.size(); ++v) {
            Side side{};
            try {
                side = determine_side(table.ribs[r], vertebrae[v]);
            } catch (const Error&) {
                continue;
            }
            candidates.push_back({min_set_distance(*table.ribs[r].surface, *vertebrae[v].surface), r, v, side});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
        return std::tie(a.distance, table.ribs[a.rib].component_label, vertebrae[a.vertebra].label) <
               std::tie(b.distance, table.ribs[b.rib].component_label, vertebrae[b.vertebra].label);
    });

    std::map<std::pair<Label, Side>, bool> occupied;
    for (const Candidate& c : candidates) {
        RibInstance& rib = table.ribs[c.rib];
        const Label vlabel = vertebrae[c.vertebra].label;
        if (rib.vertebra || occupied[{vlabel, c.side}]) {
            continue;
        }
        occupied[{vlabel, c.side}] = true;
        rib.vertebra = vlabel;
        rib.side = c.side;
        rib.output_label = anatomic_rib_label(vlabel, c.side);
    }

    Label next = kOrphanLabelBase;
    for (RibInstance& rib : table.ribs) {
        if (rib.orphan()) {
            rib.output_label = next;
            table.orphan_labels.push_back(next);
            ++next;
        }
    }
    return table;
}

LabelVolume instance_volume(const ComponentSet& components, const AssignmentTable& table)
{
    std::vector<Label> remap(static_cast<std::size_t>(components.count) + 1, 0);
    for (const RibInstance& rib : table.ribs) {
        remap[rib.component_label] = rib.output_label;
    }
    std::vector<Label> data(components.labels.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = remap[components.labels[i]];
    }
    return components.labels.with_data(std::move(data));
}

nlohmann::json assignment_to_json(const AssignmentTable& table)
{
    nlohmann::json ribs = nlohmann::json::array();
    for (const RibInstance& rib : table.ribs) {
        nlohmann::json j;
        j["component_label"] = rib.component_label;
        j["rib_label"] = rib.output_label;
        j["vertebra_label"] = rib.vertebra ? nlohmann::json(*rib.vertebra) : nlohmann::json(nullptr);
        j["side"] = rib.side ? nlohmann::json(std::string(to_string(*rib.side))) : nlohmann::json(nullptr);
        j["voxel_count"] = rib.voxel_count;
        j["volume_mm3"] = rib.volume_mm3;
        j["orphan"] = rib.orphan();
        ribs.push_back(std::move(j));
    }
    return nlohmann::json{{"ribs", ribs}, {"orphan_labels", table.orphan_labels}};
}

}  // namespace ribmorph
