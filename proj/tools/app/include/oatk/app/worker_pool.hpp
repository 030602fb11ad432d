#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

namespace oatk::app {

/// Bounded pool for long solves. At most `queue_depth` jobs wait; a job
/// submitted under a session id requests a stop on that session's
/// previous job, queued or running.
class WorkerPool {
public:
  using Job = std::function<void(std::stop_token)>;

  WorkerPool(std::size_t workers, std::size_t queue_depth);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  /// False when the queue is full; the job is then dropped.
  bool submit(const std::string& session, Job job);

  std::size_t workers() const noexcept { return threads_.size(); }
  std::size_t queue_depth() const noexcept { return depth_; }

private:
  struct Task {
    Job job;
    std::stop_source stop;
  };

  void run(std::stop_token pool_stop);

  std::size_t depth_;
  std::mutex mutex_;
  std::condition_variable_any cv_;
  std::deque<Task> queue_;
  std::map<std::string, std::stop_source> sessions_;
  std::vector<std::jthread> threads_;
};

} // namespace oatk::app
