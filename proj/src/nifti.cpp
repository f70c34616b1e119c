#include "ribmorph/nifti.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include <zlib.h>

#include "ribmorph/error.hpp"

namespace ribmorph {

namespace {

constexpr std::size_t kHeaderSize = 348;
constexpr std::size_t kDefaultVoxOffset = 352;

// NIfTI-1 header field offsets.
constexpr std::size_t kOffDim = 40;
constexpr std::size_t kOffDatatype = 70;
constexpr std::size_t kOffBitpix = 72;
constexpr std::size_t kOffPixdim = 76;
constexpr std::size_t kOffVoxOffset = 108;
constexpr std::size_t kOffSclSlope = 112;
constexpr std::size_t kOffSclInter = 116;
constexpr std::size_t kOffXyztUnits = 123;
constexpr std::size_t kOffQformCode = 252;
constexpr std::size_t kOffSformCode = 254;
constexpr std::size_t kOffQuatern = 256;
constexpr std::size_t kOffQoffset = 268;
constexpr std::size_t kOffSrow = 280;
constexpr std::size_t kOffMagic = 344;

class HeaderReader {
public:
    HeaderReader(std::span<const std::uint8_t> bytes, bool swap) : bytes_(bytes), swap_(swap) {}

    template <typename T>
    T get(std::size_t offset) const
    {
        std::array<std::uint8_t, sizeof(T)> raw{};
        std::memcpy(raw.data(), bytes_.data() + offset, sizeof(T));
        if (swap_) {
            std::reverse(raw.begin(), raw.end());
        }
        T value;
        std::memcpy(&value, raw.data(), sizeof(T));
        return value;
    }

private:
    std::span<const std::uint8_t> bytes_;
    bool swap_;
};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, std::size_t offset, T value)
{
    static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
    std::array<std::uint8_t, sizeof(T)> raw{};
    std::memcpy(raw.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(raw.begin(), raw.end());
    }
    std::copy(raw.begin(), raw.end(), out.begin() + static_cast<std::ptrdiff_t>(offset));
}

std::size_t bytes_per_voxel(std::int16_t datatype)
{
    switch (static_cast<NiftiDatatype>(datatype)) {
    case NiftiDatatype::Uint8: return 1;
    case NiftiDatatype::Int16: return 2;
    case NiftiDatatype::Uint16: return 2;
    case NiftiDatatype::Int32: return 4;
    case NiftiDatatype::Float32: return 4;
    }
    throw Error(ErrorCode::UnsupportedDatatype,
                "datatype code " + std::to_string(datatype) + " is not supported");
}

Mat4 qform_affine(const HeaderReader& h, const std::array<float, 8>& pixdim)
{
    const double b = h.get<float>(kOffQuatern);
    const double c = h.get<float>(kOffQuatern + 4);
    const double d = h.get<float>(kOffQuatern + 8);
    const double a = std::sqrt(std::max(0.0, 1.0 - (b * b + c * c + d * d)));
    Mat3 r;
    r << a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c),
        2 * (b * c + a * d), a * a + c * c - b * b - d * d, 2 * (c * d - a * b),
        2 * (b * d - a * c), 2 * (c * d + a * b), a * a + d * d - c * c - b * b;
    const double qfac = pixdim[0] < 0.0F ? -1.0 : 1.0;
    for (int i = 1; i <= 3; ++i) {
        if (!(pixdim[i] > 0.0F)) {
            throw Error(ErrorCode::MalformedHeader, "qform needs positive pixdim[1..3]");
        }
    }
    Mat4 affine = Mat4::Identity();
    affine.col(0).head<3>() = r.col(0) * pixdim[1];
    affine.col(1).head<3>() = r.col(1) * pixdim[2];
    affine.col(2).head<3>() = r.col(2) * pixdim[3] * qfac;
    affine(0, 3) = h.get<float>(kOffQoffset);
    affine(1, 3) = h.get<float>(kOffQoffset + 4);
    affine(2, 3) = h.get<float>(kOffQoffset + 8);
    return affine;
}

Label to_label(double value)
{
    if (!std::isfinite(value) || std::floor(value) != value) {
        throw Error(ErrorCode::NonIntegralLabel, "voxel value " + std::to_string(value) +
                                                     " is not an integer label");
    }
    if (value < 0.0) {
        throw Error(ErrorCode::NegativeLabel, "voxel value " + std::to_string(value) +
                                                  " is negative");
    }
    if (value > static_cast<double>(std::numeric_limits<Label>::max())) {
        throw Error(ErrorCode::LabelOverflow, "voxel value exceeds label range");
    }
    return static_cast<Label>(value);
}

}  // namespace

bool is_gzip(std::span<const std::uint8_t> bytes)
{
    return bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b;
}

std::vector<std::uint8_t> gunzip(std::span<const std::uint8_t> bytes)
{
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 32) != Z_OK) {
        throw Error(ErrorCode::GzipError, "inflateInit2 failed");
    }
    std::vector<std::uint8_t> out;
    std::array<std::uint8_t, 1 << 16> chunk{};
    zs.next_in = const_cast<Bytef*>(bytes.data());
    zs.avail_in = static_cast<uInt>(bytes.size());
    int rc = Z_OK;
    do {
        zs.next_out = chunk.data();
        zs.avail_out = static_cast<uInt>(chunk.size());
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw Error(ErrorCode::GzipError, "corrupt gzip stream");
        }
        out.insert(out.end(), chunk.data(), chunk.data() + (chunk.size() - zs.avail_out));
    } while (rc != Z_STREAM_END && (zs.avail_in > 0 || zs.avail_out == 0));
    inflateEnd(&zs);
    if (rc != Z_STREAM_END) {
        throw Error(ErrorCode::GzipError, "gzip stream ended prematurely");
    }
    return out;
}

std::vector<std::uint8_t> gzip_compress(std::span<const std::uint8_t> bytes)
{
    z_stream zs{};
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) !=
        Z_OK) {
        throw Error(ErrorCode::GzipError, "deflateInit2 failed");
    }
    std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(bytes.size())) + 32);
    zs.next_in = const_cast<Bytef*>(bytes.data());
    zs.avail_in = static_cast<uInt>(bytes.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) {
        throw Error(ErrorCode::GzipError, "deflate failed");
    }
    out.resize(zs.total_out);
    return out;
}

LabelVolume parse_nifti(std::span<const std::uint8_t> input)
{
    std::vector<std::uint8_t> inflated;
    std::span<const std::uint8_t> bytes = input;
    if (is_gzip(input)) {
        inflated = gunzip(input);
        bytes = inflated;
    }
    if (bytes.size() < kHeaderSize) {
        throw Error(ErrorCode::MalformedHeader, "buffer shorter than the 348-byte header");
    }

    std::int32_t sizeof_hdr = 0;
    std::memcpy(&sizeof_hdr, bytes.data(), 4);
    bool swap = false;
    if (sizeof_hdr != static_cast<std::int32_t>(kHeaderSize)) {
        swap = true;
        sizeof_hdr = HeaderReader(bytes, swap).get<std::int32_t>(0);
        if (sizeof_hdr != static_cast<std::int32_t>(kHeaderSize)) {
            throw Error(ErrorCode::MalformedHeader, "sizeof_hdr is not 348");
        }
    }
    if (std::memcmp(bytes.data() + kOffMagic, "n+1\0", 4) != 0) {
        throw Error(ErrorCode::MalformedHeader,
                    "magic is not \"n+1\" (detached header/image pairs are not supported)");
    }
    const HeaderReader h(bytes, swap);

    std::array<std::int16_t, 8> dim{};
    for (int i = 0; i < 8; ++i) {
        dim[i] = h.get<std::int16_t>(kOffDim + 2 * i);
    }
    if (dim[0] != 3) {
        throw Error(ErrorCode::BadDimensionality,
                    "dim[0] is " + std::to_string(dim[0]) + ", expected 3");
    }
    const Dims dims{dim[1], dim[2], dim[3]};
    for (int d : dims) {
        if (d <= 0) {
            throw Error(ErrorCode::MalformedHeader, "non-positive dim entry");
        }
    }

    const auto datatype = h.get<std::int16_t>(kOffDatatype);
    const std::size_t bpv = bytes_per_voxel(datatype);

    std::array<float, 8> pixdim{};
    for (int i = 0; i < 8; ++i) {
        pixdim[i] = h.get<float>(kOffPixdim + 4 * i);
    }

    const float vox_offset_f = h.get<float>(kOffVoxOffset);
    if (!std::isfinite(vox_offset_f) || vox_offset_f < static_cast<float>(kHeaderSize)) {
        throw Error(ErrorCode::MalformedHeader, "vox_offset points inside the header");
    }
    const auto vox_offset = static_cast<std::size_t>(vox_offset_f);

    Mat4 affine = Mat4::Identity();
    const auto sform_code = h.get<std::int16_t>(kOffSformCode);
    const auto qform_code = h.get<std::int16_t>(kOffQformCode);
    if (sform_code > 0) {
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 4; ++c) {
                affine(r, c) = h.get<float>(kOffSrow + 16 * r + 4 * c);
            }
        }
    } else if (qform_code > 0) {
        affine = qform_affine(h, pixdim);
    } else {
        for (int i = 1; i <= 3; ++i) {
            if (!(pixdim[i] > 0.0F)) {
                throw Error(ErrorCode::MalformedHeader, "pixdim[1..3] must be positive");
            }
            affine(i - 1, i - 1) = pixdim[i];
        }
    }

    const std::size_t count = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    if (bytes.size() < vox_offset || bytes.size() - vox_offset < count * bpv) {
        throw Error(ErrorCode::TruncatedData,
                    "data section holds fewer bytes than dims * bitpix require");
    }

    const float slope = h.get<float>(kOffSclSlope);
    const float inter = h.get<float>(kOffSclInter);
    const bool scaled = std::isfinite(slope) && slope != 0.0F && (slope != 1.0F || inter != 0.0F);

    const HeaderReader data(bytes.subspan(vox_offset), swap);
    std::vector<Label> labels(count);
    for (std::size_t n = 0; n < count; ++n) {
        const std::size_t off = n * bpv;
        double raw = 0.0;
        switch (static_cast<NiftiDatatype>(datatype)) {
        case NiftiDatatype::Uint8: raw = data.get<std::uint8_t>(off); break;
        case NiftiDatatype::Int16: raw = data.get<std::int16_t>(off); break;
        case NiftiDatatype::Uint16: raw = data.get<std::uint16_t>(off); break;
        case NiftiDatatype::Int32: raw = data.get<std::int32_t>(off); break;
        case NiftiDatatype::Float32: raw = data.get<float>(off); break;
        }
        if (scaled) {
            raw = static_cast<double>(slope) * raw + static_cast<double>(inter);
        }
        labels[n] = to_label(raw);
    }

    LabelVolume vol(dims, affine, std::move(labels));
    return reorient_to_ras(vol);
}

std::vector<std::uint8_t> write_nifti(const LabelVolume& vol, bool gzip)
{
    const auto data = vol.data();
    for (Label l : data) {
        if (l > std::numeric_limits<std::uint16_t>::max()) {
            throw Error(ErrorCode::LabelOverflow,
                        "label " + std::to_string(l) + " does not fit in uint16");
        }
    }
    for (int d : vol.dims()) {
        if (d > std::numeric_limits<std::int16_t>::max()) {
            throw Error(ErrorCode::InvalidArgument, "dimension exceeds NIfTI-1 int16 range");
        }
    }

    std::vector<std::uint8_t> out(kDefaultVoxOffset + 2 * data.size(), 0);
    put_le<std::int32_t>(out, 0, static_cast<std::int32_t>(kHeaderSize));
    const std::array<std::int16_t, 8> dim{3,
                                          static_cast<std::int16_t>(vol.dims()[0]),
                                          static_cast<std::int16_t>(vol.dims()[1]),
                                          static_cast<std::int16_t>(vol.dims()[2]),
                                          1, 1, 1, 1};
    for (int i = 0; i < 8; ++i) {
        put_le(out, kOffDim + 2 * i, dim[i]);
    }
    put_le<std::int16_t>(out, kOffDatatype, static_cast<std::int16_t>(NiftiDatatype::Uint16));
    put_le<std::int16_t>(out, kOffBitpix, 16);
    put_le<float>(out, kOffPixdim, 1.0F);
    for (int i = 0; i < 3; ++i) {
        put_le<float>(out, kOffPixdim + 4 * (i + 1), static_cast<float>(vol.spacing()[i]));
    }
    put_le<float>(out, kOffVoxOffset, static_cast<float>(kDefaultVoxOffset));
    put_le<float>(out, kOffSclSlope, 1.0F);
    put_le<float>(out, kOffSclInter, 0.0F);
    out[kOffXyztUnits] = 2;  // mm
    put_le<std::int16_t>(out, kOffQformCode, 0);
    put_le<std::int16_t>(out, kOffSformCode, 1);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 4; ++c) {
            put_le<float>(out, kOffSrow + 16 * r + 4 * c, static_cast<float>(vol.affine()(r, c)));
        }
    }
    std::memcpy(out.data() + kOffMagic, "n+1\0", 4);
    // Bytes 348..351 stay zero: the empty extension flag.
    for (std::size_t n = 0; n < data.size(); ++n) {
        put_le<std::uint16_t>(out, kDefaultVoxOffset + 2 * n, static_cast<std::uint16_t>(data[n]));
    }
    return gzip ? gzip_compress(out) : out;
}

LabelVolume read_nifti_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    }
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                          std::istreambuf_iterator<char>());
    return parse_nifti(bytes);
}

void write_nifti_file(const std::filesystem::path& path, const LabelVolume& vol)
{
    const bool gz = path.extension() == ".gz";
    const auto bytes = write_nifti(vol, gz);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorCode::Io, "write failed for " + path.string());
    }
}

}  // namespace ribmorph
