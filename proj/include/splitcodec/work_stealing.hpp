#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <vector>

namespace splitcodec {

/// Mutex-guarded deque: the owner works from the back, thieves take from the front.
class WorkStealingQueue {
public:
    void push(std::size_t task);
    [[nodiscard]] std::optional<std::size_t> pop();
    [[nodiscard]] std::optional<std::size_t> steal();

private:
    std::mutex mutex_;
    std::deque<std::size_t> tasks_;
};

/**
 * Runs `task_count` independent tasks on `workers` threads. Tasks are dealt
 * round-robin to per-worker queues; idle workers steal. The first exception
 * stops further scheduling and is rethrown once every worker has joined.
 * Returns, per task, the lane that ran it.
 */
std::vector<std::size_t> run_work_stealing(std::size_t task_count, std::size_t workers,
                                           const std::function<void(std::size_t task)>& body);

} // namespace splitcodec
