#include "ndecode/binary_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "ndecode/error.hpp"

namespace ndecode {

namespace {

class ByteWriter {
 public:
  explicit ByteWriter(std::uint64_t reserve) { bytes_.reserve(reserve); }

  void magic(const char (&tag)[5]) { bytes_.insert(bytes_.end(), tag, tag + 4); }
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(double v) { u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& bytes, const char* format) : bytes_(bytes), format_(format) {}

  std::uint64_t offset() const noexcept { return pos_; }
  std::uint64_t remaining() const noexcept { return bytes_.size() - pos_; }

  void magic(const char (&tag)[5]) {
    need(4, "magic");
    if (std::memcmp(bytes_.data() + pos_, tag, 4) != 0)
      throw ParseError(std::string(format_) + ": bad magic, expected \"" + tag + "\"", pos_);
    pos_ += 4;
  }
  std::uint8_t u8(const char* field) {
    need(1, field);
    return bytes_[pos_++];
  }
  std::uint32_t u32(const char* field) {
    need(4, field);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + static_cast<std::uint64_t>(i)]) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f32(const char* field) { return static_cast<double>(std::bit_cast<float>(u32(field))); }

  /// Fails before allocating when the payload cannot fit in the remaining bytes.
  void expect_payload(std::uint64_t bytes, const char* what) {
    if (bytes > remaining())
      throw ParseError(std::string(format_) + ": truncated " + what + " (need " + std::to_string(bytes) +
                           " bytes, have " + std::to_string(remaining()) + ")",
                       bytes_.size());
  }

  void version() {
    const std::uint64_t at = pos_;
    const std::uint32_t v = u32("version");
    if (v != kFormatVersion)
      throw ParseError(std::string(format_) + ": unsupported version " + std::to_string(v), at);
  }

  void finish() {
    if (pos_ != bytes_.size())
      throw ParseError(std::string(format_) + ": " + std::to_string(remaining()) + " trailing bytes", pos_);
  }

 private:
  void need(std::uint64_t n, const char* field) {
    if (n > remaining())
      throw ParseError(std::string(format_) + ": truncated while reading " + field, pos_);
  }

  const std::vector<std::uint8_t>& bytes_;
  const char* format_;
  std::uint64_t pos_ = 0;
};

std::uint32_t checked_u32(std::uint64_t v, const char* what) {
  require(v <= 0xffffffffULL, ErrorKind::data, std::string(what) + " does not fit in u32");
  return static_cast<std::uint32_t>(v);
}

template <typename Decoder>
auto decode_file(const std::filesystem::path& path, Decoder decode) {
  const auto bytes = read_file(path);
  try {
    return decode(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.detail(), e.offset());
  }
}

}  // namespace

std::uint64_t ndvol_size(GridDims dims, std::uint64_t n_trs) { return 4 + 4 * 7 + 4 * n_trs * dims.count(); }

std::uint64_t ndpk_size(std::uint64_t embed_dim, std::uint64_t voxel_dim, std::uint64_t n_records) {
  return 4 + 4 * 4 + 1 + n_records * (8 + 4 * (embed_dim + voxel_dim));
}

std::vector<std::uint8_t> encode_ndvol(const VolumeSeries& series) {
  series.validate();
  const GridDims d = series.grids.front().dims;
  ByteWriter w(ndvol_size(d, series.n_trs()));
  w.magic("NDVL");
  w.u32(kFormatVersion);
  w.u32(series.subject_id);
  w.u32(d.x);
  w.u32(d.y);
  w.u32(d.z);
  w.u32(checked_u32(series.n_trs(), "n_trs"));
  w.f32(series.tr_seconds);
  for (const auto& g : series.grids)
    for (double v : g.values) w.f32(v);
  return w.take();
}

VolumeSeries decode_ndvol(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes, "NDVOL");
  r.magic("NDVL");
  r.version();
  VolumeSeries s;
  s.subject_id = r.u32("subject_id");
  GridDims d;
  const std::uint64_t dims_at = r.offset();
  d.x = r.u32("x");
  d.y = r.u32("y");
  d.z = r.u32("z");
  const std::uint32_t n_trs = r.u32("n_trs");
  if (d.count() == 0 || n_trs == 0) throw ParseError("NDVOL: zero dimension or TR count", dims_at);
  s.tr_seconds = r.f32("tr_seconds");
  r.expect_payload(4ULL * n_trs * d.count(), "volume payload");
  s.grids.reserve(n_trs);
  for (std::uint32_t t = 0; t < n_trs; ++t) {
    VoxelGrid g(d, 0.0);
    for (double& v : g.values) v = r.f32("voxel");
    s.grids.push_back(std::move(g));
  }
  r.finish();
  return s;
}

std::vector<std::uint8_t> encode_ndpk(const PairSet& pairs) {
  pairs.validate();
  ByteWriter w(ndpk_size(pairs.embed_dim, pairs.voxel_dim, pairs.records.size()));
  w.magic("NDPK");
  w.u32(kFormatVersion);
  w.u32(checked_u32(pairs.embed_dim, "embed_dim"));
  w.u32(checked_u32(pairs.voxel_dim, "voxel_dim"));
  w.u32(checked_u32(pairs.records.size(), "n_records"));
  w.u8(pairs.standardized ? 1 : 0);
  for (const auto& rec : pairs.records) {
    w.u32(rec.stimulus_id);
    w.u32(rec.subject_id);
    for (double v : rec.embedding) w.f32(v);
    for (double v : rec.voxels) w.f32(v);
  }
  return w.take();
}

PairSet decode_ndpk(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes, "NDPK");
  r.magic("NDPK");
  r.version();
  PairSet p;
  p.embed_dim = r.u32("embed_dim");
  p.voxel_dim = r.u32("voxel_dim");
  const std::uint32_t n = r.u32("n_records");
  const std::uint64_t flag_at = r.offset();
  const std::uint8_t flag = r.u8("standardize_flag");
  if (flag > 1) throw ParseError("NDPK: standardize_flag must be 0 or 1", flag_at);
  p.standardized = flag == 1;
  r.expect_payload(std::uint64_t{n} * (8 + 4 * (p.embed_dim + p.voxel_dim)), "record payload");
  p.records.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    PairRecord rec;
    rec.stimulus_id = r.u32("stimulus_id");
    rec.subject_id = r.u32("subject_id");
    rec.embedding.resize(p.embed_dim);
    rec.voxels.resize(p.voxel_dim);
    for (double& v : rec.embedding) v = r.f32("embedding");
    for (double& v : rec.voxels) v = r.f32("voxels");
    p.records.push_back(std::move(rec));
  }
  r.finish();
  p.validate();
  return p;
}

std::vector<std::uint8_t> encode_ndwt(const EncoderParams& params) {
  params.validate();
  ByteWriter w(16 + 4 * params.parameter_count() + 8 * params.n_layers());
  w.magic("NDWT");
  w.u32(kFormatVersion);
  w.u32(checked_u32(params.n_layers(), "n_layers"));
  for (std::size_t l = 0; l < params.n_layers(); ++l) {
    const auto& W = params.weights[l];
    w.u32(checked_u32(static_cast<std::uint64_t>(W.rows()), "rows"));
    w.u32(checked_u32(static_cast<std::uint64_t>(W.cols()), "cols"));
    for (Eigen::Index i = 0; i < W.size(); ++i) w.f32(W.data()[i]);
    for (Eigen::Index i = 0; i < params.biases[l].size(); ++i) w.f32(params.biases[l][i]);
  }
  return w.take();
}

EncoderParams decode_ndwt(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes, "NDWT");
  r.magic("NDWT");
  r.version();
  const std::uint64_t layers_at = r.offset();
  const std::uint32_t n_layers = r.u32("n_layers");
  if (n_layers == 0) throw ParseError("NDWT: no layers", layers_at);

  EncoderParams p;
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    const std::uint64_t at = r.offset();
    const std::uint32_t rows = r.u32("rows");
    const std::uint32_t cols = r.u32("cols");
    if (rows == 0 || cols == 0) throw ParseError("NDWT: layer " + std::to_string(l) + " has a zero dimension", at);
    if (l == 0) {
      p.layer_dims.push_back(cols);
    } else if (cols != p.layer_dims.back()) {
      throw ParseError("NDWT: layer " + std::to_string(l) + " input width " + std::to_string(cols) +
                           " does not match the previous output " + std::to_string(p.layer_dims.back()),
                       at);
    }
    p.layer_dims.push_back(rows);
    r.expect_payload(4ULL * (std::uint64_t{rows} * cols + rows), "layer payload");
    RowMatrix W(rows, cols);
    for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = r.f32("weight");
    Vector b(rows);
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = r.f32("bias");
    p.weights.push_back(std::move(W));
    p.biases.push_back(std::move(b));
  }
  r.finish();
  return p;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(!in.bad(), ErrorKind::io, "failed reading " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorKind::io, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorKind::io, "failed writing " + path.string());
}

VolumeSeries read_ndvol(const std::filesystem::path& path) { return decode_file(path, decode_ndvol); }
void write_ndvol(const std::filesystem::path& path, const VolumeSeries& series) {
  write_file(path, encode_ndvol(series));
}

PairSet read_ndpk(const std::filesystem::path& path) { return decode_file(path, decode_ndpk); }
void write_ndpk(const std::filesystem::path& path, const PairSet& pairs) { write_file(path, encode_ndpk(pairs)); }

EncoderParams read_ndwt(const std::filesystem::path& path) { return decode_file(path, decode_ndwt); }
void write_ndwt(const std::filesystem::path& path, const EncoderParams& params) {
  write_file(path, encode_ndwt(params));
}

}  // namespace ndecode
