#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ribmorph/volume.hpp"

namespace ribmorph {

/// NIfTI-1 datatype codes accepted by the reader.
enum class NiftiDatatype : std::int16_t {
    Uint8 = 2,
    Int16 = 4,
    Int32 = 8,
    Float32 = 16,
    Uint16 = 512,
};

/**
 * Parse a single-file NIfTI-1 image (".nii"), optionally wrapped in a gzip
 * stream, into a label volume.
 *
 * The affine comes from the sform when sform_code > 0, else from the qform
 * when qform_code > 0, else diag(pixdim). The grid is then reoriented so the
 * affine is RAS-dominant; every voxel keeps its world position. Both byte
 * orders are accepted.
 */
LabelVolume parse_nifti(std::span<const std::uint8_t> bytes);

/// Serialise as uncompressed (or gzip-wrapped) NIfTI-1, datatype uint16,
/// sform_code 1. Throws LabelOverflow for labels above 65535.
std::vector<std::uint8_t> write_nifti(const LabelVolume& vol, bool gzip = false);

/// File helpers; gzip is chosen by a ".gz" suffix when writing.
LabelVolume read_nifti_file(const std::filesystem::path& path);
void write_nifti_file(const std::filesystem::path& path, const LabelVolume& vol);

/// gzip stream helpers (zlib).
bool is_gzip(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> gunzip(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> gzip_compress(std::span<const std::uint8_t> bytes);

}  // namespace ribmorph
