// Copyright 2026 The kmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <set>
#include <stdexcept>
#include <vector>

#include "kmpc/parallel.hpp"
#include "kmpc/rng.hpp"
#include "kmpc/types.hpp"

namespace kmpc {
namespace {

TEST(Box, ContainsAndVolume) {
  const Box b(Vector{{-1.0, 0.0}}, Vector{{1.0, 2.0}});
  EXPECT_TRUE(b.contains(Vector{{0.0, 1.0}}));
  EXPECT_TRUE(b.contains(Vector{{1.0, 2.0}}));
  EXPECT_FALSE(b.contains(Vector{{1.0 + 1e-9, 2.0}}));
  EXPECT_TRUE(b.contains(Vector{{1.0 + 1e-9, 2.0}}, 1e-8));
  EXPECT_FALSE(b.contains(Vector{{0.0}}));
  EXPECT_DOUBLE_EQ(b.volume(), 4.0);
  EXPECT_EQ(b.center(), (Vector{{0.0, 1.0}}));
  EXPECT_TRUE(b.contains(Box(Vector{{-0.5, 0.5}}, Vector{{0.5, 1.5}})));
  EXPECT_FALSE(b.contains(Box(Vector{{-1.5, 0.5}}, Vector{{0.5, 1.5}})));
}

TEST(Box, MinkowskiDifferenceShrinksBySymmetricMargin) {
  const Box u(Vector{{-5.0}}, Vector{{5.0}});
  const Box tightened = u.minkowski_difference(Box(Vector{{-0.5}}, Vector{{0.5}}));
  EXPECT_EQ(tightened, Box(Vector{{-4.5}}, Vector{{4.5}}));
  const Box gone = u.minkowski_difference(Box(Vector{{-6.0}}, Vector{{6.0}}));
  EXPECT_TRUE(gone.empty());
  EXPECT_EQ(gone.volume(), 0.0);
  EXPECT_THROW(u.minkowski_difference(Box::point(Vector::Zero(2))), Error);
}

TEST(Box, MismatchedBoundsRejected) {
  EXPECT_THROW(Box(Vector::Zero(2), Vector::Zero(3)), Error);
}

TEST(HullBuilder, SmallestEnclosingBox) {
  HullBuilder h(2);
  EXPECT_FALSE(h.has_points());
  EXPECT_THROW(h.hull(), Error);
  h.add(Vector{{1.0, -1.0}});
  h.add(Vector{{-2.0, 3.0}});
  HullBuilder g(2);
  g.add(Vector{{0.5, 4.0}});
  h.merge(g);
  EXPECT_EQ(h.count(), 3u);
  EXPECT_EQ(h.hull(), Box(Vector{{-2.0, -1.0}}, Vector{{1.0, 4.0}}));
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  Rng a = Rng::stream(7, 1, 2);
  Rng b = Rng::stream(7, 1, 2);
  Rng c = Rng::stream(7, 1, 3);
  Rng d = Rng::stream(8, 1, 2);
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    EXPECT_EQ(va, b.next_u64());
    EXPECT_NE(va, c.next_u64());
    EXPECT_NE(va, d.next_u64());
  }
}

TEST(Rng, UniformMomentsAndRange) {
  Rng r(42);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform(-1.0, 3.0);
    ASSERT_GE(u, -1.0);
    ASSERT_LT(u, 3.0);
    sum += u;
    sq += u * u;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  // Uniform on [-1, 3]: mean 1, variance 16/12.
  EXPECT_NEAR(mean, 1.0, 3.0 * std::sqrt(16.0 / 12.0 / n) * 1.5);
  EXPECT_NEAR(var, 16.0 / 12.0, 0.02);
}

TEST(Rng, IndexCoversRange) {
  Rng r(3);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto k = r.index(7);
    ASSERT_LT(k, 7u);
    seen.insert(k);
  }
  EXPECT_EQ(seen.size(), 7u);
}

TEST(Parallel, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 4, [&](std::size_t i, std::size_t w) {
    ASSERT_LT(w, 4u);
    hits[i]++;
  });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Parallel, RethrowsLowestFailingIndex) {
  try {
    parallel_for(100, 3, [](std::size_t i, std::size_t) {
      if (i == 17 || i == 60) throw std::runtime_error("index " + std::to_string(i));
    });
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "index 17");
  }
}

TEST(Parallel, WorkerCountHonoursEnvironment) {
  setenv("KMPC_THREADS", "3", 1);
  EXPECT_EQ(worker_count(), 3u);
  setenv("KMPC_THREADS", "0", 1);
  EXPECT_GE(worker_count(), 1u);
  unsetenv("KMPC_THREADS");
  EXPECT_GE(worker_count(), 1u);
}

}  // namespace
}  // namespace kmpc
