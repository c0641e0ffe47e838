#pragma once

#include <functional>

namespace negpr {

// Worker count: NEGPR_THREADS when set (>= 1), else hardware concurrency.
int thread_count();

int num_blocks(int n, int block_size);

// Runs fn(block_index, begin, end) for every fixed-size block of [0, n).
// The block structure depends only on n and block_size — never on the worker
// count — so callers that write per-block results and reduce them in block
// order get bit-identical sums for any NEGPR_THREADS value. fn must only
// touch state owned by its block.
void parallel_blocks(int n, int block_size, const std::function<void(int, int, int)>& fn);

}  // namespace negpr
