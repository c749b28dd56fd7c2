#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace ndecode {

/// Dense row-major matrix; batches keep one sample per row.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// A batch of embeddings (F_I, F_V, mixed predictions, targets), one row per sample.
using EmbeddingBatch = RowMatrix;

using StimulusId = std::uint32_t;
using SubjectId = std::uint32_t;

/// Deterministic 64-bit mixer used to derive independent RNG streams from (seed, ids).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a) noexcept {
  return splitmix64(seed ^ splitmix64(a + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
  return derive_seed(derive_seed(seed, a), b);
}

}  // namespace ndecode
