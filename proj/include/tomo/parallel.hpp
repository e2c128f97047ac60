// Copyright 2026 tomodesign contributors.
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

#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tomo {

/// Runs fn(i) for i in [0, count). Each index must write only into its own
/// output slot; callers then reduce in index order, so results do not depend
/// on the thread count. The first exception thrown by any worker is
/// rethrown on the calling thread after the pool drains.
template <typename Fn>
void parallel_for(long count, int threads, Fn &&fn) {
    if (threads <= 1 || count <= 1) {
        for (long i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const long i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::scoped_lock lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count, std::memory_order_relaxed);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int spawned = static_cast<int>(std::min<long>(threads, count));
    pool.reserve(static_cast<std::size_t>(spawned));
    for (int t = 0; t < spawned; ++t) pool.emplace_back(worker);
    for (auto &th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace tomo
