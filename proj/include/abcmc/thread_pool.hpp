#pragma once

// Minimal persistent pool for statically-partitioned index loops. Work items
// are independent by construction (each index owns its substream), so any
// schedule gives identical results; static chunking keeps dispatch cheap
// enough to call once per MCMC iteration.

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace abcmc {

class ThreadPool {
 public:
  explicit ThreadPool(int threads)
      : size_(threads < 1 ? 1 : threads) {
    for (int w = 1; w < size_; ++w) {
      workers_.emplace_back([this, w] { worker_loop(w); });
    }
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  ~ThreadPool() {
    {
      std::lock_guard<std::mutex> lk(mu_);
      stop_ = true;
      ++generation_;
    }
    cv_.notify_all();
    for (auto& t : workers_) t.join();
  }

  int size() const { return size_; }

  // Runs fn(i) for i in [0, count); blocks until done. The calling thread
  // takes the first chunk.
  void for_range(std::int64_t count, const std::function<void(std::int64_t)>& fn) {
    if (count <= 0) return;
    if (size_ == 1 || count == 1) {
      for (std::int64_t i = 0; i < count; ++i) fn(i);
      return;
    }
    {
      std::lock_guard<std::mutex> lk(mu_);
      count_ = count;
      fn_ = &fn;
      pending_ = size_ - 1;
      ++generation_;
    }
    cv_.notify_all();
    run_chunk(0);
    std::unique_lock<std::mutex> lk(mu_);
    done_cv_.wait(lk, [this] { return pending_ == 0; });
    fn_ = nullptr;
  }

 private:
  void run_chunk(int w) {
    const std::int64_t lo = count_ * w / size_;
    const std::int64_t hi = count_ * (w + 1) / size_;
    for (std::int64_t i = lo; i < hi; ++i) (*fn_)(i);
  }

  void worker_loop(int w) {
    std::uint64_t seen = 0;
    for (;;) {
      {
        std::unique_lock<std::mutex> lk(mu_);
        cv_.wait(lk, [this, seen] { return generation_ != seen; });
        seen = generation_;
        if (stop_) return;
      }
      run_chunk(w);
      {
        std::lock_guard<std::mutex> lk(mu_);
        if (--pending_ == 0) done_cv_.notify_all();
      }
    }
  }

  const int size_;
  std::vector<std::thread> workers_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  std::uint64_t generation_ = 0;
  int pending_ = 0;
  bool stop_ = false;
  std::int64_t count_ = 0;
  const std::function<void(std::int64_t)>* fn_ = nullptr;
};

}  // namespace abcmc
