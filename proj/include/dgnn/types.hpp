#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace dgnn {

using Rng = std::mt19937_64;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Binary feature storage; one row per node (or per neighbor in a sliced view).
using BitMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using BitVector = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>;

enum class Label : std::int8_t { negative = -1, positive = 1 };

inline double sign_of(Label c) { return c == Label::positive ? 1.0 : -1.0; }

// sgn(y - 0.5) with the tie y == 0.5 (margin == 0) mapped to +1.
inline Label label_from_margin(double margin) {
  return margin >= 0.0 ? Label::positive : Label::negative;
}

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for a named substream. Streams are keyed by identity (master seed plus
// a tuple of tags such as graph index, node, neighbor, round), never by the
// order in which work is scheduled.
template <class... Tags>
std::uint64_t stream_seed(std::uint64_t master, Tags... tags) {
  std::uint64_t h = mix64(master);
  ((h = mix64(h ^ static_cast<std::uint64_t>(tags))), ...);
  return h;
}

template <class... Tags>
Rng substream(std::uint64_t master, Tags... tags) {
  return Rng(stream_seed(master, tags...));
}

}  // namespace dgnn
