#include <gtest/gtest.h>

#include <atomic>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "steklov/parallel.hpp"

using namespace steklov;

class ParallelFor : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override { set_thread_count(GetParam()); }
  void TearDown() override { set_thread_count(1); }
};

TEST_P(ParallelFor, CoversRangeOnceInContiguousChunks) {
  for (std::size_t n : {0u, 1u, 7u, 1000u}) {
    std::vector<int> hits(n, 0);
    std::mutex mu;
    std::vector<std::pair<std::size_t, std::size_t>> chunks;
    parallel_for(n, [&](std::size_t b, std::size_t e, int) {
      for (std::size_t i = b; i < e; ++i) ++hits[i];
      std::lock_guard lock(mu);
      chunks.emplace_back(b, e);
    });
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_LE(static_cast<int>(chunks.size()), std::max(1, thread_count()));
    EXPECT_EQ(static_cast<int>(chunks.size()), n == 0 ? 0 : chunk_count(n));
  }
}

TEST_P(ParallelFor, WorkerIdsFollowChunkOrder) {
  std::vector<std::size_t> begin_of(static_cast<std::size_t>(thread_count()), 0);
  parallel_for(100, [&](std::size_t b, std::size_t, int w) { begin_of[static_cast<std::size_t>(w)] = b; });
  for (int w = 1; w < chunk_count(100); ++w) EXPECT_GT(begin_of[static_cast<std::size_t>(w)], begin_of[static_cast<std::size_t>(w - 1)]);
}

TEST_P(ParallelFor, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(50, [](std::size_t b, std::size_t e, int) {
                 for (std::size_t i = b; i < e; ++i) {
                   if (i == 37) throw std::runtime_error("boom");
                 }
               }),
               std::runtime_error);
}

INSTANTIATE_TEST_SUITE_P(Threads, ParallelFor, ::testing::Values(1, 2, 4));

TEST(ThreadCount, Clamped) {
  set_thread_count(0);
  EXPECT_EQ(thread_count(), 1);
  set_thread_count(3);
  EXPECT_EQ(thread_count(), 3);
  set_thread_count(1);
}
