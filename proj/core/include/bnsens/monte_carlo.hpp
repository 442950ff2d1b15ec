#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

#include "bnsens/random.hpp"

namespace bnsens {

inline constexpr std::size_t kMonteCarloBlock = 4096;

/// Splits n draws into fixed-size blocks, each with its own stream seeded
/// from (seed, block index), and evaluates fn(rng, count) -> Result per block.
/// Blocks are spread over `workers` threads; results come back in block
/// order, so a caller that folds them front to back gets the same bits for
/// any worker count.
template <class Result, class Fn>
std::vector<Result> run_blocks(std::size_t n, std::uint64_t seed, unsigned workers, Fn&& fn) {
  const std::size_t blocks = (n + kMonteCarloBlock - 1) / kMonteCarloBlock;
  std::vector<Result> out(blocks);
  auto work = [&](std::size_t first_block, std::size_t stride) {
    for (std::size_t b = first_block; b < blocks; b += stride) {
      Rng rng(derive_seed(seed, b));
      std::size_t count = std::min(kMonteCarloBlock, n - b * kMonteCarloBlock);
      out[b] = fn(rng, count);
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(blocks, 1))));
  if (workers == 1) {
    work(0, 1);
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace bnsens
