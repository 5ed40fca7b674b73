#include "xct/core/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <thread>
#include <vector>

namespace xct {
namespace {

thread_local bool t_in_worker = false;

class Pool {
 public:
  explicit Pool(int n) : n_(n) {
    for (int i = 0; i < n_ - 1; ++i) workers_.emplace_back([this] { worker(); });
  }

  ~Pool() {
    {
      std::lock_guard<std::mutex> lk(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& w : workers_) w.join();
  }

  int size() const { return n_; }

  void run(std::int64_t begin, std::int64_t end,
           const std::function<void(std::int64_t, std::int64_t)>& fn) {
    const std::int64_t n = end - begin;
    if (n <= 0) return;
    if (n_ == 1 || t_in_worker || n == 1) {
      fn(begin, end);
      return;
    }
    // Static partition into n_ chunks; chunk c = [begin + c*q + min(c,r), ...).
    const std::int64_t q = n / n_;
    const std::int64_t r = n % n_;
    std::atomic<int> remaining(n_);
    std::mutex done_mu;
    std::condition_variable done_cv;

    {
      std::lock_guard<std::mutex> lk(mu_);
      jobs_.clear();
      for (int c = 1; c < n_; ++c) {
        std::int64_t b = begin + c * q + std::min<std::int64_t>(c, r);
        std::int64_t e = b + q + (c < r ? 1 : 0);
        jobs_.push_back([&, b, e] {
          if (b < e) fn(b, e);
          if (remaining.fetch_sub(1) == 2) {
            std::lock_guard<std::mutex> g(done_mu);
            done_cv.notify_one();
          }
        });
      }
      next_job_ = 0;
    }
    cv_.notify_all();

    // Chunk 0 runs on the caller.
    {
      std::int64_t b = begin;
      std::int64_t e = b + q + (0 < r ? 1 : 0);
      if (b < e) fn(b, e);
    }
    // Help drain the queue, then wait for stragglers.
    for (;;) {
      std::function<void()> job;
      {
        std::lock_guard<std::mutex> lk(mu_);
        if (next_job_ < jobs_.size()) job = jobs_[next_job_++];
      }
      if (!job) break;
      t_in_worker = true;
      job();
      t_in_worker = false;
    }
    std::unique_lock<std::mutex> lk(done_mu);
    done_cv.wait(lk, [&] { return remaining.load() == 1; });
  }

 private:
  void worker() {
    t_in_worker = true;
    for (;;) {
      std::function<void()> job;
      {
        std::unique_lock<std::mutex> lk(mu_);
        cv_.wait(lk, [this] { return stop_ || next_job_ < jobs_.size(); });
        if (stop_) return;
        job = jobs_[next_job_++];
      }
      job();
    }
  }

  int n_;
  std::vector<std::thread> workers_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::vector<std::function<void()>> jobs_;
  std::size_t next_job_ = 0;
  bool stop_ = false;
};

int g_requested = 0;
Pool* pool() {
  static Pool p(g_requested > 0 ? g_requested
                                : std::max(1u, std::thread::hardware_concurrency()));
  return &p;
}

}  // namespace

int num_threads() { return pool()->size(); }

void set_num_threads(int n) { g_requested = n; }

void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t, std::int64_t)>& fn) {
  pool()->run(begin, end, fn);
}

}  // namespace xct
