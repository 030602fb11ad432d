#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "oatk/app/config.hpp"
#include "oatk/app/dataset.hpp"
#include "oatk/app/worker_pool.hpp"
#include "oatk/shearlet.hpp"

namespace httplib {
class Server;
}

namespace oatk::app {

struct HttpReply {
  int status = 200;
  std::string body; ///< JSON
};

struct ServiceOptions {
  /// 0 selects std::thread::hardware_concurrency().
  std::size_t mb_workers = 0;
  std::size_t mb_queue_depth = 4;
  std::optional<std::filesystem::path> static_dir;
};

/// Reconstruction service over immutable, preloaded datasets. Handlers are
/// plain functions of the request so they can be exercised without a
/// socket; `bind` wires them into an HTTP server.
///
///   GET  /healthz
///   GET  /api/datasets
///   GET  /api/datasets/{id}/frames/{k}/meta
///   GET  /api/sos-grid
///   POST /api/recon
class ReconService {
public:
  ReconService(EngineConfig config, DatasetIndex datasets, ServiceOptions options = {});
  ~ReconService();

  HttpReply health() const;
  HttpReply list_datasets() const;
  HttpReply frame_meta(const std::string& id, const std::string& frame) const;
  HttpReply sos_grid() const;
  /// 400 malformed body, unknown method or off-grid SoS; 404 unknown
  /// dataset or frame; 409 MB queue full or request superseded.
  HttpReply recon(const std::string& body);

  /// Registers routes (and the static mount) on `server`.
  void bind(httplib::Server& server);

  const EngineConfig& config() const noexcept { return config_; }

private:
  const ShearletSystem& shearlets();

  EngineConfig config_;
  DatasetIndex datasets_;
  ServiceOptions options_;
  std::unique_ptr<WorkerPool> pool_;
  std::once_flag shearlet_once_;
  std::unique_ptr<ShearletSystem> shearlets_;
};

/// Blocks serving on host:port until the server is stopped.
void serve(ReconService& service, const std::string& host, int port);

} // namespace oatk::app
