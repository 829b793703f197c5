#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace reebldp {

/// Fixed-size worker pool. parallel_for hands out indices dynamically; callers
/// write results by index, so output never depends on the worker count.
class WorkerPool {
 public:
  explicit WorkerPool(unsigned threads = 1);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  unsigned size() const noexcept { return static_cast<unsigned>(workers_.size()) + 1; }

  /// Runs fn(i) for i in [0, n). The calling thread participates. The first
  /// exception thrown by any task is rethrown here after all tasks stop.
  void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

  /// Threads from REEB_LDP_THREADS, else 1.
  static unsigned threads_from_env();

 private:
  void worker_loop();
  void run_tasks();

  std::vector<std::thread> workers_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  const std::function<void(std::size_t)>* job_ = nullptr;
  std::size_t n_ = 0;
  std::size_t next_ = 0;
  std::size_t active_ = 0;
  std::size_t generation_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

/// Runs fn(i) on the pool if given, serially otherwise.
void parallel_for(WorkerPool* pool, std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace reebldp
