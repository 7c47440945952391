#pragma once

// Private helpers shared by the counting and sampling kernels.

#include "autocensus/bigint.hpp"

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>
#include <vector>

namespace autocensus::detail {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    // The smaller root wins, so roots are the least member of each class.
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a < b) parent_[b] = a;
        else parent_[a] = b;
    }

private:
    std::vector<std::size_t> parent_;
};

// Runs fn(i) for i in [0, count) on `jobs` threads and sums the results.
// Addition is exact, so the total does not depend on scheduling.
template <class F>
BigInt parallel_sum(std::size_t count, unsigned jobs, F fn) {
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (jobs == 1) {
        BigInt total = 0;
        for (std::size_t i = 0; i < count; ++i) total += fn(i);
        return total;
    }
    std::atomic<std::size_t> next{0};
    std::vector<BigInt> partial(jobs);
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i; (i = next.fetch_add(1)) < count;) partial[w] += fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next = count;
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    BigInt total = 0;
    for (auto& v : partial) total += v;
    return total;
}

// All k-subsets of {0..n-1} in lexicographic order.
inline std::vector<std::vector<int>> combinations(int n, int k) {
    std::vector<std::vector<int>> out;
    if (k < 0 || k > n) return out;
    std::vector<int> c(k);
    std::iota(c.begin(), c.end(), 0);
    while (true) {
        out.push_back(c);
        int i = k - 1;
        while (i >= 0 && c[i] == n - k + i) --i;
        if (i < 0) break;
        ++c[i];
        for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
    }
    return out;
}

}  // namespace autocensus::detail
