#pragma once

#include <condition_variable>
#include <functional>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

namespace scimpc {

// Fixed-size worker pool. parallel_for partitions [0, count) one index per
// task and blocks until all complete; results must be written to
// caller-provided slots so the outcome is independent of scheduling. A pool
// of size <= 1 runs everything inline.
class ThreadPool {
 public:
  explicit ThreadPool(int threads) {
    const int n = std::max(0, threads - 1);
    for (int i = 0; i < n; ++i) {
      workers_.emplace_back([this] { worker_loop(); });
    }
  }

  ~ThreadPool() {
    {
      std::unique_lock<std::mutex> lock(mutex_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& w : workers_) w.join();
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int size() const { return static_cast<int>(workers_.size()) + 1; }

  void parallel_for(int count, const std::function<void(int)>& fn) {
    if (count <= 0) return;
    if (workers_.empty() || count == 1) {
      for (int i = 0; i < count; ++i) fn(i);
      return;
    }
    std::atomic<int> next{0};
    std::atomic<int> done{0};
    std::mutex done_mutex;
    std::condition_variable done_cv;
    auto task = [&]() {
      int i;
      while ((i = next.fetch_add(1)) < count) {
        fn(i);
        if (done.fetch_add(1) + 1 == count) {
          std::unique_lock<std::mutex> lock(done_mutex);
          done_cv.notify_all();
        }
      }
    };
    {
      std::unique_lock<std::mutex> lock(mutex_);
      for (size_t i = 0; i < workers_.size(); ++i) queue_.push(task);
    }
    cv_.notify_all();
    task();  // the calling thread participates
    std::unique_lock<std::mutex> lock(done_mutex);
    done_cv.wait(lock, [&] { return done.load() >= count; });
  }

 private:
  void worker_loop() {
    for (;;) {
      std::function<void()> task;
      {
        std::unique_lock<std::mutex> lock(mutex_);
        cv_.wait(lock, [this] { return stop_ || !queue_.empty(); });
        if (stop_ && queue_.empty()) return;
        task = std::move(queue_.front());
        queue_.pop();
      }
      task();
    }
  }

  std::vector<std::thread> workers_;
  std::queue<std::function<void()>> queue_;
  std::mutex mutex_;
  std::condition_variable cv_;
  bool stop_ = false;
};

}  // namespace scimpc
