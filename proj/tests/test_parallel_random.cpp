#include "edasketch/parallel.hpp"
#include "edasketch/random.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <stdexcept>
#include <vector>

using namespace edasketch;

TEST(Substream, DeterministicPerKey) {
  Substream a(5, Stream::Sketch, 3), b(5, Stream::Sketch, 3);
  EXPECT_EQ(a.normal_vector(100), b.normal_vector(100));
  EXPECT_EQ(a.normal_matrix(4, 3), b.normal_matrix(4, 3));
}

TEST(Substream, KeysGiveDistinctStreams) {
  const Vector base = Substream(5, Stream::Sketch, 3).normal_vector(50);
  EXPECT_NE(base, Substream(6, Stream::Sketch, 3).normal_vector(50));
  EXPECT_NE(base, Substream(5, Stream::Lanczos, 3).normal_vector(50));
  EXPECT_NE(base, Substream(5, Stream::Sketch, 4).normal_vector(50));
}

TEST(Substream, StandardNormalMoments) {
  Substream s(1, Stream::Probe);
  const Vector v = s.normal_vector(100000);
  EXPECT_NEAR(v.mean(), 0.0, 0.02);
  EXPECT_NEAR(v.squaredNorm() / 100000.0, 1.0, 0.02);
}

TEST(ParallelFor, EachIndexExactlyOnce) {
  const std::size_t saved = worker_count();
  for (std::size_t threads : {std::size_t{1}, std::size_t{3}, std::size_t{8}}) {
    set_worker_count(threads);
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i].fetch_add(1); });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
  set_worker_count(saved);
  parallel_for(0, [](std::size_t) { FAIL(); });
}

TEST(ParallelFor, RethrowsFirstException) {
  const std::size_t saved = worker_count();
  set_worker_count(4);
  std::atomic<int> ran{0};
  EXPECT_THROW(parallel_for(100,
                            [&](std::size_t i) {
                              ++ran;
                              if (i == 17) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
  EXPECT_GE(ran.load(), 1);
  set_worker_count(saved);
}

TEST(ParallelFor, NestedCallsRunSerially) {
  const std::size_t saved = worker_count();
  set_worker_count(4);
  std::vector<int> inner_total(8, 0);
  parallel_for(8, [&](std::size_t i) {
    int local = 0;
    parallel_for(50, [&](std::size_t) { ++local; });
    inner_total[i] = local;
  });
  for (int v : inner_total) EXPECT_EQ(v, 50);
  set_worker_count(saved);
}

TEST(ParallelFor, WorkerCountIsPositive) {
  EXPECT_GE(worker_count(), 1u);
}
