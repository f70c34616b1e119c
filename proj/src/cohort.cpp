#include "ribmorph/cohort.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>

namespace ribmorph {

namespace {

std::string subject_name(std::size_t index)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "sub-%04zu", index);
    return buf;
}

}  // namespace

std::vector<RibFeatureRecord> reported_cohort(std::size_t ribs_per_class, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    auto normal = [&](double mean, double sd) { return std::normal_distribution<double>(mean, sd)(rng); };

    struct ClassModel {
        std::array<double, 6> first;  // right, posterior, inferior: mean, sd each
        Vec3 second;
        Vec3 third;
        Vec3 fourth;
        double pdrc_mean, pdrc_sd;
        double ratio_mean, ratio_sd;
        double length_lo, length_hi;
    };
    const ClassModel stump{{0.81, 0.11, 0.39, 0.17, 0.32, 0.23},
                           Vec3(0.85, -0.25, -0.40),
                           Vec3(0.80, -0.10, -0.50),
                           Vec3(0.75, 0.05, -0.55),
                           -19.2, 3.8, 260.6, 103.4, 12.0, 38.0};
    const ClassModel regular{{0.68, 0.11, 0.64, 0.13, 0.15, 0.30},
                             Vec3(0.70, -0.65, -0.15),
                             Vec3(0.70, -0.65, -0.05),
                             Vec3(0.70, -0.60, 0.05),
                             -13.8, 2.5, 563.6, 127.1, 90.0, 250.0};

    std::vector<RibFeatureRecord> out;
    std::size_t subject = 0;
    for (const ClassModel* model : {&stump, &regular}) {
        const bool is_stump = model == &stump;
        for (std::size_t n = 0; n < ribs_per_class; ++n) {
            if (n % 2 == 0) {
                ++subject;
            }
            RibFeatureRecord r;
            r.subject_id = subject_name(subject);
            r.side = n % 2 == 0 ? Side::Right : Side::Left;
            r.rib_label = anatomic_rib_label(19, r.side);
            r.is_stump = is_stump;
            r.length_mm = std::uniform_real_distribution<double>(model->length_lo, model->length_hi)(rng);
            const auto& f = model->first;
            Vec3 d0(normal(f[0], f[1]), -normal(f[2], f[3]), -normal(f[4], f[5]));
            r.ppr.push_back(d0.normalized());
            for (const Vec3& mean : {model->second, model->third, model->fourth}) {
                const Vec3 d(normal(mean.x(), 0.15), normal(mean.y(), 0.15), normal(mean.z(), 0.15));
                r.ppr.push_back(d.normalized());
            }
            r.path_points = r.ppr.size() + 1;
            r.pdrc = normal(model->pdrc_mean, model->pdrc_sd);
            r.drc = Vec3(normal(28.0, 3.0), r.pdrc, normal(0.0, 3.0));
            r.volume_length_ratio = std::max(1.0, normal(model->ratio_mean, model->ratio_sd));
            out.push_back(r);
        }
    }
    return out;
}

std::vector<RibFeatureRecord> bimodal_length_cohort(std::size_t ribs, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    auto normal = [&](double mean, double sd) { return std::normal_distribution<double>(mean, sd)(rng); };

    const std::array<Vec3, 4> short_dir{Vec3(0.85, -0.25, -0.40), Vec3(0.80, -0.10, -0.55), Vec3(0.75, 0.05, -0.60),
                                        Vec3(0.70, 0.20, -0.65)};
    const std::array<Vec3, 4> long_dir{Vec3(0.65, -0.70, -0.15), Vec3(0.65, -0.65, -0.05), Vec3(0.65, -0.55, 0.05),
                                       Vec3(0.60, -0.45, 0.15)};

    std::vector<RibFeatureRecord> out;
    for (std::size_t n = 0; n < ribs; ++n) {
        RibFeatureRecord r;
        r.subject_id = subject_name(n + 1);
        r.side = n % 2 == 0 ? Side::Right : Side::Left;
        r.rib_label = anatomic_rib_label(19, r.side);
        const bool low_mode = n % 5 < 2;
        r.length_mm = low_mode ? std::max(8.0, normal(25.0, 5.0)) : normal(180.0, 15.0);
        r.is_stump = r.length_mm <= 38.0;
        // 0 at the short mode, 1 at the long mode.
        const double u = std::clamp(std::log(r.length_mm / 25.0) / std::log(180.0 / 25.0), -0.5, 1.5);
        for (std::size_t k = 0; k < short_dir.size(); ++k) {
            const Vec3 mean = short_dir[k] + u * (long_dir[k] - short_dir[k]);
            const Vec3 d(normal(mean.x(), 0.12), normal(mean.y(), 0.12), normal(mean.z(), 0.12));
            r.ppr.push_back(d.normalized());
        }
        r.path_points = r.ppr.size() + 1;
        r.pdrc = normal(-19.2 + 5.4 * u, 2.5);
        r.drc = Vec3(normal(28.0 - 4.0 * u, 2.5), r.pdrc, normal(-3.0 + 3.0 * u, 2.5));
        r.volume_length_ratio = std::max(1.0, normal(260.6 + 303.0 * u, 100.0));
        out.push_back(r);
    }
    return out;
}

}  // namespace ribmorph
