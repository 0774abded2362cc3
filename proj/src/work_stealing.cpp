#include "splitcodec/work_stealing.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <memory>
#include <thread>

namespace splitcodec {

void WorkStealingQueue::push(std::size_t task)
{
    std::lock_guard lock(mutex_);
    tasks_.push_back(task);
}

std::optional<std::size_t> WorkStealingQueue::pop()
{
    std::lock_guard lock(mutex_);
    if (tasks_.empty()) {
        return std::nullopt;
    }
    auto task = tasks_.back();
    tasks_.pop_back();
    return task;
}

std::optional<std::size_t> WorkStealingQueue::steal()
{
    std::lock_guard lock(mutex_);
    if (tasks_.empty()) {
        return std::nullopt;
    }
    auto task = tasks_.front();
    tasks_.pop_front();
    return task;
}

std::vector<std::size_t> run_work_stealing(std::size_t task_count, std::size_t workers,
                                           const std::function<void(std::size_t task)>& body)
{
    workers = std::max<std::size_t>(1, std::min(workers, std::max<std::size_t>(1, task_count)));
    std::vector<std::unique_ptr<WorkStealingQueue>> queues;
    for (std::size_t w = 0; w < workers; ++w) {
        queues.push_back(std::make_unique<WorkStealingQueue>());
    }
    // Dealt in reverse so each owner pops its lowest task first.
    for (std::size_t task = task_count; task-- > 0;) {
        queues[task % workers]->push(task);
    }

    std::vector<std::size_t> lane_of(task_count, 0);
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto lane = [&](std::size_t self) {
        while (!failed.load(std::memory_order_relaxed)) {
            auto task = queues[self]->pop();
            for (std::size_t k = 1; !task && k < workers; ++k) {
                task = queues[(self + k) % workers]->steal();
            }
            if (!task) {
                return;
            }
            try {
                body(*task);
                lane_of[*task] = self;
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
                failed.store(true, std::memory_order_relaxed);
            }
        }
    };

    if (workers == 1) {
        lane(0);
    } else {
        std::vector<std::jthread> threads;
        threads.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            threads.emplace_back(lane, w);
        }
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
    return lane_of;
}

} // namespace splitcodec
