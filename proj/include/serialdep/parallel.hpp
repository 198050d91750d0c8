#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <initializer_list>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace serialdep {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of an independent stream identified by a path of indices below a root seed.
/// The same (seed, path) always yields the same stream, whichever thread asks for it.
inline std::uint64_t stream_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = splitmix64(seed);
    for (std::uint64_t p : path) s = splitmix64(s ^ splitmix64(p + 0x632be59bd9b4e019ULL));
    return s;
}

inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    return Rng(stream_seed(seed, path));
}

/// Worker count: SERIALDEP_THREADS when set to a positive integer, otherwise the
/// hardware concurrency. Never changes results, only wall time.
inline unsigned worker_count() {
    if (const char* env = std::getenv("SERIALDEP_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

inline bool& inside_parallel_region() {
    thread_local bool flag = false;
    return flag;
}

struct RegionGuard {
    bool previous;
    RegionGuard() : previous(inside_parallel_region()) { inside_parallel_region() = true; }
    ~RegionGuard() { inside_parallel_region() = previous; }
};

}  // namespace detail

/// Calls fn(i) for every i in [0, count). Tasks must write only to slots owned by i;
/// the first exception (lowest index) is rethrown after all workers finish.
/// Nested calls from inside a task run serially on the calling worker.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const unsigned workers = detail::inside_parallel_region()
                                 ? 1u
                                 : static_cast<unsigned>(std::min<std::size_t>(worker_count(), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    std::size_t error_index = count;
    auto work = [&] {
        detail::RegionGuard guard;
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace serialdep
