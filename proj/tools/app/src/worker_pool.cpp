#include "oatk/app/worker_pool.hpp"

#include <algorithm>

namespace oatk::app {

WorkerPool::WorkerPool(std::size_t workers, std::size_t queue_depth) : depth_(queue_depth) {
  workers = std::max<std::size_t>(workers, 1);
  for (std::size_t i = 0; i < workers; ++i)
    threads_.emplace_back([this](std::stop_token st) { run(st); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    for (auto& t : queue_) t.stop.request_stop();
    for (auto& t : threads_) t.request_stop();
  }
  cv_.notify_all();
  threads_.clear();
  // Jobs never started still own promises; run them cancelled.
  for (auto& t : queue_) t.job(t.stop.get_token());
}

bool WorkerPool::submit(const std::string& session, Job job) {
  {
    std::lock_guard lock(mutex_);
    if (queue_.size() >= depth_) return false;
    Task task{std::move(job), {}};
    if (!session.empty()) {
      if (auto it = sessions_.find(session); it != sessions_.end()) it->second.request_stop();
      sessions_[session] = task.stop;
    }
    queue_.push_back(std::move(task));
  }
  cv_.notify_one();
  return true;
}

void WorkerPool::run(std::stop_token pool_stop) {
  for (;;) {
    Task task;
    {
      std::unique_lock lock(mutex_);
      cv_.wait(lock, pool_stop, [this] { return !queue_.empty(); });
      if (queue_.empty()) return;
      task = std::move(queue_.front());
      queue_.pop_front();
    }
    task.job(task.stop.get_token());
  }
}

} // namespace oatk::app
