// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

namespace skillalign::detail {

/// Runs job(i) for i in [0, count) across `workers` threads and passes each
/// result to commit(i, result) strictly in index order. Out-of-order results
/// are buffered, so at any interruption point the committed output is a
/// prefix of the single-threaded output. The first exception thrown by a job
/// or commit stops task issuance and is rethrown on the calling thread.
template <typename Result, typename Job, typename Commit>
void ordered_parallel_run(std::size_t count, unsigned workers, Job&& job, Commit&& commit) {
    std::mutex mutex;
    std::map<std::size_t, Result> pending;
    std::size_t next_commit = 0;
    std::atomic<std::size_t> next_task{0};
    std::atomic<bool> stop{false};
    std::exception_ptr first_error;

    auto loop = [&] {
        for (;;) {
            if (stop.load(std::memory_order_relaxed)) return;
            std::size_t index = next_task.fetch_add(1);
            if (index >= count) return;
            try {
                Result result = job(index);
                std::lock_guard lock(mutex);
                pending.emplace(index, std::move(result));
                while (!pending.empty() && pending.begin()->first == next_commit) {
                    commit(pending.begin()->first, pending.begin()->second);
                    pending.erase(pending.begin());
                    ++next_commit;
                }
            } catch (...) {
                std::lock_guard lock(mutex);
                if (!first_error) first_error = std::current_exception();
                stop.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };
    if (workers <= 1) {
        loop();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned i = 0; i < workers; ++i) pool.emplace_back(loop);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace skillalign::detail
