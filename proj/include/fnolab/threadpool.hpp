#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

namespace fnolab {

// Minimal fork-join pool. Work items write to disjoint output slots, so results
// never depend on scheduling; reductions over those slots are done serially by
// the caller in index order to keep them bitwise reproducible.
class ThreadPool {
public:
    explicit ThreadPool(std::size_t n_threads = 0) {
        if (n_threads == 0) {
            n_threads = std::thread::hardware_concurrency();
            if (n_threads == 0) n_threads = 1;
        }
        n_threads_ = n_threads;
        for (std::size_t t = 1; t < n_threads; ++t)
            workers_.emplace_back([this] { worker_loop(); });
    }

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    ~ThreadPool() {
        {
            std::lock_guard<std::mutex> lk(mu_);
            stop_ = true;
        }
        cv_.notify_all();
        for (auto& w : workers_) w.join();
    }

    std::size_t size() const { return n_threads_; }

    // Runs fn(i) for i in [0, n). The calling thread participates and the call
    // blocks until every item finished. The first exception (if any) is rethrown.
    void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
        if (n == 0) return;
        std::size_t helpers = workers_.empty() ? 0 : std::min(workers_.size(), n - 1);
        if (helpers == 0) {
            for (std::size_t i = 0; i < n; ++i) fn(i);
            return;
        }
        auto st = std::make_shared<ForState>();
        st->fn = &fn;
        st->n = n;
        {
            std::lock_guard<std::mutex> lk(mu_);
            for (std::size_t t = 0; t < helpers; ++t)
                jobs_.push([st] { drive(*st); });
        }
        cv_.notify_all();
        drive(*st);
        {
            std::unique_lock<std::mutex> lk(st->mu);
            st->done_cv.wait(lk, [&] { return st->done == st->n; });
        }
        if (st->error) std::rethrow_exception(st->error);
    }

private:
    struct ForState {
        const std::function<void(std::size_t)>* fn = nullptr;
        std::size_t n = 0;
        std::atomic<std::size_t> next{0};
        std::size_t done = 0;  // guarded by mu
        std::exception_ptr error;
        std::mutex mu;
        std::condition_variable done_cv;
    };

    // Pulls indices until exhausted. Stale queued jobs (state already complete)
    // see next >= n immediately and fall through without touching fn.
    static void drive(ForState& st) {
        for (;;) {
            std::size_t i = st.next.fetch_add(1);
            if (i >= st.n) return;
            try {
                (*st.fn)(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(st.mu);
                if (!st.error) st.error = std::current_exception();
            }
            std::lock_guard<std::mutex> lk(st.mu);
            if (++st.done == st.n) st.done_cv.notify_all();
        }
    }

    void worker_loop() {
        for (;;) {
            std::function<void()> job;
            {
                std::unique_lock<std::mutex> lk(mu_);
                cv_.wait(lk, [&] { return stop_ || !jobs_.empty(); });
                if (stop_ && jobs_.empty()) return;
                job = std::move(jobs_.front());
                jobs_.pop();
            }
            job();
        }
    }

    std::size_t n_threads_ = 1;
    std::vector<std::thread> workers_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::queue<std::function<void()>> jobs_;
    bool stop_ = false;
};

}  // namespace fnolab
