#pragma once

#include <cstdint>
#include <cstring>
#include <functional>
#include <random>
#include <vector>

#include "ribmorph/morphology.hpp"

namespace testsupport {

using namespace ribmorph;

inline LabelVolume make_volume(Dims dims, const std::function<Label(int, int, int)>& f, double spacing = 1.0,
                               Vec3 origin = Vec3::Zero())
{
    std::vector<Label> data;
    data.reserve(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
    for (int k = 0; k < dims[2]; ++k) {
        for (int j = 0; j < dims[1]; ++j) {
            for (int i = 0; i < dims[0]; ++i) {
                data.push_back(f(i, j, k));
            }
        }
    }
    return LabelVolume(dims, LabelVolume::make_affine(Vec3::Constant(spacing), origin), std::move(data));
}

inline BinaryMask random_mask(std::mt19937_64& rng, Dims dims, double density, double spacing = 1.0)
{
    std::bernoulli_distribution on(density);
    return BinaryMask(make_volume(dims, [&](int, int, int) { return on(rng) ? 1u : 0u; }, spacing));
}

/// Little-endian NIfTI-1 single-file image written field by field.
struct RawNifti {
    std::vector<std::uint8_t> bytes = std::vector<std::uint8_t>(352, 0);

    template <typename T>
    void put(std::size_t offset, T value)
    {
        if (bytes.size() < offset + sizeof(T)) {
            bytes.resize(offset + sizeof(T), 0);
        }
        std::memcpy(bytes.data() + offset, &value, sizeof(T));
    }

    RawNifti(std::array<std::int16_t, 3> dims, std::int16_t datatype, std::int16_t bitpix)
    {
        put<std::int32_t>(0, 348);
        put<std::int16_t>(40, 3);
        for (int a = 0; a < 3; ++a) {
            put<std::int16_t>(42 + 2 * a, dims[static_cast<std::size_t>(a)]);
        }
        for (int a = 3; a < 8; ++a) {
            put<std::int16_t>(42 + 2 * a, 1);
        }
        put<std::int16_t>(70, datatype);
        put<std::int16_t>(72, bitpix);
        put<float>(76, 1.0f);
        for (int a = 1; a < 4; ++a) {
            put<float>(76 + 4 * a, 1.0f);
        }
        put<float>(108, 352.0f);
        std::memcpy(bytes.data() + 344, "n+1\0", 4);
    }

    void sform(const std::array<std::array<float, 4>, 3>& rows)
    {
        put<std::int16_t>(254, 1);
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 4; ++c) {
                put<float>(280 + 16 * static_cast<std::size_t>(r) + 4 * static_cast<std::size_t>(c),
                           rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
            }
        }
    }

    template <typename T>
    void data(const std::vector<T>& values)
    {
        bytes.resize(352);
        for (const T& v : values) {
            put<T>(bytes.size(), v);
        }
    }
};

}  // namespace testsupport
