#include "edasketch/random.hpp"

namespace edasketch {

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, Stream stream, std::uint64_t index) {
  const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), static_cast<std::uint32_t>(stream), lo(index), hi(index)};
  return std::mt19937_64(seq);
}

}  // namespace

Substream::Substream(std::uint64_t seed, Stream stream, std::uint64_t index)
    : engine_(make_engine(seed, stream, index)) {}

Vector Substream::normal_vector(Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal();
  return v;
}

// Column-major fill, so column j is identical whatever the column count.
Matrix Substream::normal_matrix(Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal();
  return m;
}

}  // namespace edasketch
