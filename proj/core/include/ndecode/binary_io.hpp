#pragma once

// Little-endian record formats:
//
//   NDVOL  "NDVL" u32 version=1 u32 subject_id u32 x u32 y u32 z u32 n_trs f32 tr_seconds
//          then n_trs*x*y*z f32 values (row-major, z fastest)
//   NDPK   "NDPK" u32 version=1 u32 embed_dim u32 voxel_dim u32 n_records u8 standardize_flag
//          then per record: u32 stimulus_id u32 subject_id embed_dim*f32 voxel_dim*f32
//   NDWT   "NDWT" u32 version=1 u32 n_layers
//          then per layer: u32 rows u32 cols rows*cols f32 weights (row-major) rows f32 biases
//
// Values are held as double in memory and rounded to f32 on write.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ndecode/encoder.hpp"
#include "ndecode/volume_pipeline.hpp"

namespace ndecode {

inline constexpr std::uint32_t kFormatVersion = 1;

std::vector<std::uint8_t> encode_ndvol(const VolumeSeries& series);
VolumeSeries decode_ndvol(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> encode_ndpk(const PairSet& pairs);
PairSet decode_ndpk(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> encode_ndwt(const EncoderParams& params);
EncoderParams decode_ndwt(const std::vector<std::uint8_t>& bytes);

/// Exact encoded sizes, from header arithmetic.
std::uint64_t ndvol_size(GridDims dims, std::uint64_t n_trs);
std::uint64_t ndpk_size(std::uint64_t embed_dim, std::uint64_t voxel_dim, std::uint64_t n_records);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

VolumeSeries read_ndvol(const std::filesystem::path& path);
void write_ndvol(const std::filesystem::path& path, const VolumeSeries& series);
PairSet read_ndpk(const std::filesystem::path& path);
void write_ndpk(const std::filesystem::path& path, const PairSet& pairs);
EncoderParams read_ndwt(const std::filesystem::path& path);
void write_ndwt(const std::filesystem::path& path, const EncoderParams& params);

}  // namespace ndecode
