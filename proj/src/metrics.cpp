#include "ribmorph/metrics.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "ribmorph/error.hpp"

namespace ribmorph {

namespace {

void require_same_grid(const LabelVolume& a, const LabelVolume& b)
{
    if (!a.same_grid(b)) {
        throw Error(ErrorCode::GridMismatch, "volumes do not share a voxel grid");
    }
}

}  // namespace

double dice(const BinaryMask& x, const BinaryMask& y)
{
    require_same_grid(x.volume(), y.volume());
    if (x.empty() && y.empty()) {
        return 1.0;
    }
    std::size_t both = 0;
    for (std::size_t i = 0; i < x.volume().size(); ++i) {
        both += (x[i] && y[i]) ? 1 : 0;
    }
    return 2.0 * static_cast<double>(both) / static_cast<double>(x.count() + y.count());
}

double assd(const BinaryMask& x, const BinaryMask& y)
{
    require_same_grid(x.volume(), y.volume());
    if (x.empty() || y.empty()) {
        throw Error(ErrorCode::EmptyMask, "ASSD needs two non-empty masks");
    }
    auto a = surface_points(x);
    auto b = surface_points(y);
    const double a_count = static_cast<double>(a.size());
    const double b_count = static_cast<double>(b.size());
    const PointIndex a_index(a);
    const PointIndex b_index(b);
    const double ab = sum_nearest_distances(a, b_index);
    const double ba = sum_nearest_distances(b, a_index);
    return (ab + ba) / (a_count + b_count);
}

std::vector<MatchedPair> pairwise_dice(const LabelVolume& prediction, const LabelVolume& reference)
{
    require_same_grid(prediction, reference);
    std::map<Label, std::size_t> pred_size;
    std::map<Label, std::size_t> ref_size;
    std::map<std::pair<Label, Label>, std::size_t> overlap;
    for (std::size_t i = 0; i < prediction.size(); ++i) {
        const Label p = prediction[i];
        const Label r = reference[i];
        if (p != 0) {
            ++pred_size[p];
        }
        if (r != 0) {
            ++ref_size[r];
        }
        if (p != 0 && r != 0) {
            ++overlap[{r, p}];
        }
    }
    std::vector<MatchedPair> pairs;
    for (const auto& [key, count] : overlap) {
        const double d = 2.0 * static_cast<double>(count) /
                         static_cast<double>(ref_size[key.first] + pred_size[key.second]);
        pairs.push_back({key.first, key.second, d});
    }
    return pairs;
}

InstanceMatching match_instances(const LabelVolume& prediction, const LabelVolume& reference)
{
    auto pairs = pairwise_dice(prediction, reference);
    std::sort(pairs.begin(), pairs.end(), [](const MatchedPair& a, const MatchedPair& b) {
        if (a.dsc != b.dsc) {
            return a.dsc > b.dsc;
        }
        return std::tie(a.reference, a.prediction) < std::tie(b.reference, b.prediction);
    });

    std::set<Label> pred_labels(prediction.data().begin(), prediction.data().end());
    std::set<Label> ref_labels(reference.data().begin(), reference.data().end());
    pred_labels.erase(0);
    ref_labels.erase(0);

    InstanceMatching m;
    std::set<Label> used_pred;
    std::set<Label> used_ref;
    for (const MatchedPair& p : pairs) {
        if (p.dsc < kMatchThreshold) {
            break;
        }
        if (used_pred.count(p.prediction) != 0 || used_ref.count(p.reference) != 0) {
            continue;
        }
        used_pred.insert(p.prediction);
        used_ref.insert(p.reference);
        m.matches.push_back(p);
    }
    for (Label l : pred_labels) {
        if (used_pred.count(l) == 0) {
            m.unmatched_predictions.push_back(l);
        }
    }
    for (Label l : ref_labels) {
        if (used_ref.count(l) == 0) {
            m.unmatched_references.push_back(l);
        }
    }
    return m;
}

PanopticScores panoptic(std::size_t fp, std::size_t fn, const std::vector<double>& pair_values)
{
    const auto tp = static_cast<double>(pair_values.size());
    const double denom = tp + 0.5 * static_cast<double>(fp + fn);
    PanopticScores s;
    s.rq = denom == 0.0 ? 1.0 : tp / denom;
    if (!pair_values.empty()) {
        s.sq = std::accumulate(pair_values.begin(), pair_values.end(), 0.0) / tp;
        s.pq = *s.sq * s.rq;
    }
    return s;
}

PanopticReport evaluate_segmentation(const LabelVolume& prediction, const LabelVolume& reference)
{
    require_same_grid(prediction, reference);
    PanopticReport r;
    r.binary_dsc = dice(BinaryMask::nonzero(prediction), BinaryMask::nonzero(reference));
    r.matching = match_instances(prediction, reference);

    std::vector<double> dscs;
    std::vector<double> assds;
    for (const MatchedPair& p : r.matching.matches) {
        dscs.push_back(p.dsc);
        assds.push_back(assd(BinaryMask::of_label(prediction, p.prediction), BinaryMask::of_label(reference, p.reference)));
    }
    const PanopticScores by_dsc = panoptic(r.matching.fp(), r.matching.fn(), dscs);
    const PanopticScores by_assd = panoptic(r.matching.fp(), r.matching.fn(), assds);
    r.rq = by_dsc.rq;
    r.sq_dsc = by_dsc.sq.value_or(0.0);
    r.pq_dsc = by_dsc.pq.value_or(0.0);
    r.sq_assd = by_assd.sq;
    r.pq_assd = by_assd.pq;
    return r;
}

nlohmann::json report_to_json(const PanopticReport& report)
{
    nlohmann::json matches = nlohmann::json::array();
    for (const MatchedPair& p : report.matching.matches) {
        matches.push_back({{"reference", p.reference}, {"prediction", p.prediction}, {"dsc", p.dsc}});
    }
    auto optional = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return nlohmann::json{
        {"binary_dsc", report.binary_dsc},
        {"rq", report.rq},
        {"sq_dsc", report.sq_dsc},
        {"pq_dsc", report.pq_dsc},
        {"sq_assd", optional(report.sq_assd)},
        {"pq_assd", optional(report.pq_assd)},
        {"tp", report.matching.tp()},
        {"fp", report.matching.fp()},
        {"fn", report.matching.fn()},
        {"matches", matches},
        {"unmatched_predictions", report.matching.unmatched_predictions},
        {"unmatched_references", report.matching.unmatched_references},
    };
}

}  // namespace ribmorph
