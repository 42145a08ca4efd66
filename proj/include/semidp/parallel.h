// Copyright 2026 The semidp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SEMIDP_PARALLEL_H_
#define SEMIDP_PARALLEL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace semidp {
namespace parallel {

// Block layout for deterministic reductions. The partition depends only on
// (count, dim), never on the thread count, so accumulation order is fixed.
struct BlockPlan {
  std::size_t blocks;
  std::size_t block_len;
};

inline BlockPlan PlanBlocks(std::size_t count, std::size_t dim) {
  // Cap the scratch at ~4M doubles so wide outputs do not blow up memory.
  std::size_t max_blocks = 64;
  if (dim > 0) {
    const std::size_t cap = (std::size_t{1} << 22) / dim;
    if (cap < max_blocks) max_blocks = cap < 1 ? 1 : cap;
  }
  std::size_t blocks = (count + 1023) / 1024;
  if (blocks > max_blocks) blocks = max_blocks;
  if (blocks < 1) blocks = 1;
  const std::size_t block_len = (count + blocks - 1) / blocks;
  return {blocks, block_len};
}

// out = sum over blocks of fn(begin, end, block_acc), with block results
// added in block order. fn must add its contributions into block_acc.
template <typename Fn>
void DeterministicVectorSum(std::size_t count, std::size_t dim,
                            std::span<double> out, Fn&& fn) {
  const BlockPlan plan = PlanBlocks(count, dim);
  std::vector<double> scratch(plan.blocks * dim, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(plan.blocks); ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * plan.block_len;
    const std::size_t end =
        begin + plan.block_len < count ? begin + plan.block_len : count;
    if (begin >= end) continue;
    fn(begin, end,
       std::span<double>(scratch.data() + static_cast<std::size_t>(b) * dim,
                         dim));
  }
  for (std::size_t j = 0; j < dim; ++j) out[j] = 0.0;
  for (std::size_t b = 0; b < plan.blocks; ++b) {
    const double* block = scratch.data() + b * dim;
    for (std::size_t j = 0; j < dim; ++j) out[j] += block[j];
  }
}

// Scalar variant of the deterministic blocked sum.
template <typename Fn>
double DeterministicScalarSum(std::size_t count, Fn&& fn) {
  const BlockPlan plan = PlanBlocks(count, 1);
  std::vector<double> partial(plan.blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(plan.blocks); ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * plan.block_len;
    const std::size_t end =
        begin + plan.block_len < count ? begin + plan.block_len : count;
    if (begin >= end) continue;
    partial[static_cast<std::size_t>(b)] = fn(begin, end);
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

// Plain parallel loop over [0, count) in fixed blocks; rows must be
// independent so the result does not depend on scheduling.
template <typename Fn>
void ParallelForBlocks(std::size_t count, Fn&& fn) {
  const BlockPlan plan = PlanBlocks(count, 1);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(plan.blocks); ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * plan.block_len;
    const std::size_t end =
        begin + plan.block_len < count ? begin + plan.block_len : count;
    if (begin >= end) continue;
    fn(begin, end);
  }
}

}  // namespace parallel
}  // namespace semidp

#endif  // SEMIDP_PARALLEL_H_
