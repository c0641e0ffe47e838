#include "negpr/threads.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace negpr {

int thread_count() {
    if (const char* env = std::getenv("NEGPR_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

int num_blocks(int n, int block_size) { return (n + block_size - 1) / block_size; }

void parallel_blocks(int n, int block_size, const std::function<void(int, int, int)>& fn) {
    const int nb = num_blocks(n, block_size);
    if (nb == 0) return;
    const int workers = std::min(thread_count(), nb);
    if (workers <= 1) {
        for (int b = 0; b < nb; ++b) fn(b, b * block_size, std::min(n, (b + 1) * block_size));
        return;
    }
    std::atomic<int> next{0};
    auto work = [&] {
        for (int b = next.fetch_add(1); b < nb; b = next.fetch_add(1))
            fn(b, b * block_size, std::min(n, (b + 1) * block_size));
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (int t = 1; t < workers; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
}

}  // namespace negpr
