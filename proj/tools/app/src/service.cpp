#include "oatk/app/service.hpp"

#include <charconv>
#include <future>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "oatk/app/recon.hpp"
#include "oatk/error.hpp"
#include "oatk/io.hpp"

namespace oatk::app {

namespace {

using json = nlohmann::json;

HttpReply error_reply(int status, std::string_view code, const std::string& message) {
  return {status, json{{"error", {{"code", code}, {"message", message}}}}.dump()};
}

int status_for(ErrorCode code) {
  switch (code) {
  case ErrorCode::cancelled: return 409;
  case ErrorCode::numerical:
  case ErrorCode::io: return 500;
  default: return 400;
  }
}

std::optional<std::size_t> parse_index(const std::string& s) {
  std::size_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

json outcome_json(const ReconOutcome& out) {
  json j{{"image_oaim_b64", base64_encode(io::encode_image(out.image))},
         {"preview_png_b64", base64_encode(preview_png(out.image))},
         {"width", out.image.nx()},
         {"height", out.image.ny()},
         {"residual_norm", out.residual_norm ? json(*out.residual_norm) : json(nullptr)},
         {"elapsed_ms", out.elapsed_ms},
         {"sos_used", out.sos_used}};
  if (out.report) {
    j["lambda"] = out.report->lambda;
    j["iterations"] = out.report->iterations_run;
    j["stop_reason"] = out.report->stop_reason;
  }
  return j;
}

} // namespace

ReconService::ReconService(EngineConfig config, DatasetIndex datasets, ServiceOptions options)
    : config_(std::move(config)), datasets_(std::move(datasets)), options_(std::move(options)) {
  config_.validate();
  const std::size_t workers = options_.mb_workers ? options_.mb_workers
                                                  : std::max(1u, std::thread::hardware_concurrency());
  pool_ = std::make_unique<WorkerPool>(workers, options_.mb_queue_depth);
}

ReconService::~ReconService() = default;

const ShearletSystem& ReconService::shearlets() {
  std::call_once(shearlet_once_, [this] {
    shearlets_ = std::make_unique<ShearletSystem>(config_.image.ny, config_.image.nx,
                                                  config_.mb.shearlet_scales);
  });
  return *shearlets_;
}

HttpReply ReconService::health() const {
  return {200, json{{"status", "ok"}, {"datasets", datasets_.datasets().size()}}.dump()};
}

HttpReply ReconService::list_datasets() const {
  json arr = json::array();
  for (const auto& [id, ds] : datasets_.datasets())
    arr.push_back({{"id", id}, {"n_frames", ds.frames.size()}, {"wavelengths", ds.wavelengths()}});
  return {200, arr.dump()};
}

HttpReply ReconService::frame_meta(const std::string& id, const std::string& frame) const {
  const auto k = parse_index(frame);
  const Frame* f = k ? datasets_.frame(id, *k) : nullptr;
  if (!f) return error_reply(404, "not_found", "no frame " + frame + " in dataset '" + id + "'");
  const auto& g = f->sinogram.geometry();
  json j{{"dataset_id", id},
         {"frame_index", *k},
         {"file", f->file.filename().string()},
         {"n_time", g.n_time_samples},
         {"n_detectors", g.n_detectors},
         {"sampling_rate_hz", g.sampling_rate_hz},
         {"t0_offset_samples", g.t0_offset_samples},
         {"wavelength_nm", nullptr}};
  if (auto w = f->sinogram.wavelength_nm()) j["wavelength_nm"] = *w;
  return {200, j.dump()};
}

HttpReply ReconService::sos_grid() const {
  const auto& g = config_.sos_grid;
  return {200, json{{"min_mps", g.min_mps}, {"max_mps", g.max_mps}, {"step_mps", g.step_mps},
                    {"values", g.values()}}
                   .dump()};
}

HttpReply ReconService::recon(const std::string& body) {
  json req;
  try {
    req = json::parse(body);
  } catch (const json::exception& e) {
    return error_reply(400, "parse", std::string("request is not valid JSON: ") + e.what());
  }
  std::string dataset_id, method_name, session;
  std::size_t frame_index = 0;
  double sos = 0.0;
  ReconRequest request;
  try {
    dataset_id = req.at("dataset_id").get<std::string>();
    frame_index = req.at("frame_index").get<std::size_t>();
    method_name = req.at("method").get<std::string>();
    sos = req.at("sos_mps").get<double>();
    if (req.contains("lambda") && !req["lambda"].is_null()) {
      if (req["lambda"].is_string() && req["lambda"] == "auto") request.lambda_auto = true;
      else request.lambda = req["lambda"].get<double>();
    }
    if (req.contains("session_id")) session = req["session_id"].get<std::string>();
  } catch (const json::exception& e) {
    return error_reply(400, "invalid_argument", std::string("bad request field: ") + e.what());
  }

  try {
    request.method = parse_method(method_name);
  } catch (const Error& e) {
    return error_reply(400, "invalid_argument", e.what());
  }
  const auto on_grid = config_.sos_grid.index_of(sos);
  if (!on_grid)
    return error_reply(400, "invalid_argument",
                       "sos_mps " + std::to_string(sos) + " is not on the service grid");
  request.sos_mps = config_.sos_grid.value(*on_grid);

  const Frame* frame = datasets_.frame(dataset_id, frame_index);
  if (!frame)
    return error_reply(404, "not_found", "no frame " + std::to_string(frame_index) +
                                             " in dataset '" + dataset_id + "'");
  const Sinogram& s = frame->sinogram;

  try {
    if (request.method != ReconMethod::mb) return {200, outcome_json(run_recon(config_, s, request)).dump()};

    const ShearletSystem& sh = shearlets();
    auto promise = std::make_shared<std::promise<ReconOutcome>>();
    auto future = promise->get_future();
    const bool queued = pool_->submit(session, [this, &s, request, &sh, promise](std::stop_token st) {
      try {
        if (st.stop_requested()) fail(ErrorCode::cancelled, "request superseded");
        promise->set_value(run_recon(config_, s, request, st, &sh));
      } catch (...) {
        promise->set_exception(std::current_exception());
      }
    });
    if (!queued) return error_reply(409, "busy", "model-based queue is full");
    return {200, outcome_json(future.get()).dump()};
  } catch (const Error& e) {
    const int status = status_for(e.code());
    return error_reply(status, e.code() == ErrorCode::cancelled ? "superseded" : to_string(e.code()),
                       e.what());
  }
}

void ReconService::bind(httplib::Server& server) {
  const auto send = [](httplib::Response& res, const HttpReply& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server.Get("/healthz", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, health());
  });
  server.Get("/api/datasets", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, list_datasets());
  });
  server.Get(R"(/api/datasets/([^/]+)/frames/([^/]+)/meta)",
             [this, send](const httplib::Request& req, httplib::Response& res) {
               send(res, frame_meta(req.matches[1], req.matches[2]));
             });
  server.Get("/api/sos-grid", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, sos_grid());
  });
  server.Post("/api/recon", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, recon(req.body));
  });
  if (options_.static_dir) {
    require(server.set_mount_point("/", options_.static_dir->string()), ErrorCode::io,
            "static directory '" + options_.static_dir->string() + "' not found");
  }
}

void serve(ReconService& service, const std::string& host, int port) {
  httplib::Server server;
  service.bind(server);
  require(server.listen(host, port), ErrorCode::io,
          "cannot listen on " + host + ":" + std::to_string(port));
}

} // namespace oatk::app
