#pragma once

#include "edasketch/core.hpp"

#include <cstdint>
#include <random>

namespace edasketch {

// Named random substreams. Every random quantity in an experiment is drawn
// from a generator keyed on (seed, stream, index), so members and sketch
// columns can be produced in any order or in parallel with identical output.
enum class Stream : std::uint32_t {
  TruthPerturbation = 1,
  ControlObsNoise = 2,
  ControlBackgroundNoise = 3,
  MemberObsNoise = 4,
  MemberBackgroundNoise = 5,
  Sketch = 6,
  Lanczos = 7,
  Probe = 8,
};

class Substream {
 public:
  Substream(std::uint64_t seed, Stream stream, std::uint64_t index = 0);

  double normal() { return normal_(engine_); }
  Vector normal_vector(Index n);
  Matrix normal_matrix(Index rows, Index cols);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace edasketch
