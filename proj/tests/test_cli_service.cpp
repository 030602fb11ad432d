#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <future>
#include <latch>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "check.hpp"
#include "oatk/app/bench.hpp"
#include "oatk/app/cli.hpp"
#include "oatk/app/config.hpp"
#include "oatk/app/dataset.hpp"
#include "oatk/app/recon.hpp"
#include "oatk/app/service.hpp"
#include "oatk/app/worker_pool.hpp"
#include "oatk/forward_model.hpp"
#include "oatk/io.hpp"
#include "oatk/phantom.hpp"
#include "oatk/rng.hpp"
#include "oracles.hpp"

using namespace oatk;
using namespace oatk::app;
using nlohmann::json;

namespace {

constexpr const char* kConfig = R"(# reduced arc for tests
geometry.n_detectors = 32
geometry.n_time_samples = 2030
image.nx = 32
image.ny = 32
image.fov_x_m = 0.0064
image.fov_y_m = 0.0064
mb.lambda = 0.5
mb.max_iters = 15
)";

struct Run {
  int code = 0;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = cli_main(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path.string();
}

// Config, one sinogram of a disk phantom and a dataset root holding it.
struct Workspace {
  oracle::TempDir dir{"cli"};
  std::string config;
  std::string sino;
  EngineConfig engine;
  Workspace() {
    config = write_text(dir.path / "engine.cfg", kConfig);
    engine = parse_config(kConfig);
    Rng rng(3);
    const Image p = make_phantom(PhantomKind::disks, engine.image, rng);
    const ForwardOperator op(engine.geometry, engine.image, 1500.0, engine.eir);
    std::filesystem::create_directories(dir.path / "data" / "phantom");
    sino = (dir.path / "data" / "phantom" / "frame0.oasg").string();
    io::write_sinogram(make_sinogram(engine.geometry, op.apply(to_double(p.pixels()))), sino);
    io::write_sinogram(Sinogram(engine.geometry), dir.path / "data" / "phantom" / "frame1.oasg");
    engine.dataset_root = dir.path / "data";
  }
  std::string path(const std::string& name) const { return (dir.path / name).string(); }
};

json recon_body(const std::string& method, double sos, std::size_t frame = 0) {
  return {{"dataset_id", "phantom"}, {"frame_index", frame}, {"method", method}, {"sos_mps", sos}};
}

} // namespace

TEST_CASE("config parsing") {
  const auto c = parse_config(kConfig);
  CHECK(c.geometry.n_detectors == 32);
  CHECK(c.image.nx == 32);
  CHECK(c.mb.lambda == 0.5);
  CHECK(c.mb.max_iters == 15);
  CHECK(c.sos_grid.size() == 11);
  CHECK_FALSE(parse_config("mb.lambda = auto\n").mb.lambda.has_value());
  CHECK(parse_config("  # only a comment\n\n").geometry.n_detectors == 256);
  CHECK(parse_config("eir.enabled = off\n").eir.enabled == false);
  CHECK(parse_config("\xEF\xBB\xBFimage.nx = 64\n").image.nx == 64);

  CHECK_ERROR(parse_config("geometry.colour = red\n"), ErrorCode::parse);
  CHECK_ERROR(parse_config("image.nx = 8\nimage.nx = 9\n"), ErrorCode::parse);
  CHECK_ERROR(parse_config("image.nx = eight\n"), ErrorCode::parse);
  CHECK_ERROR(parse_config("image.nx\n"), ErrorCode::parse);
  CHECK_ERROR(parse_config("image.nx =\n"), ErrorCode::parse);
  CHECK_ERROR(parse_config("geometry.n_detectors = 1\n"), ErrorCode::parse);
  CHECK_ERROR(parse_config("eir.enabled = maybe\n"), ErrorCode::parse);
}

TEST_CASE("config formatting round-trips") {
  auto c = parse_config(kConfig);
  c.geometry.center_of_curvature = {0.001, -0.0005};
  c.eir.fractional_bandwidth = 1.1;
  c.dataset_root = "/srv/sinograms";
  const auto back = parse_config(format_config(c));
  CHECK(format_config(back) == format_config(c));
  CHECK(back.geometry == c.geometry);
  CHECK(back.image == c.image);
  CHECK(back.dataset_root == c.dataset_root);
  CHECK(back.mb.lambda == c.mb.lambda);
}

TEST_CASE("config path resolution prefers the explicit path over the environment") {
  const oracle::TempDir dir("env");
  const auto env_file = write_text(dir.path / "env.cfg", "image.nx = 48\n");
  const auto flag_file = write_text(dir.path / "flag.cfg", "image.nx = 40\n");
  ::unsetenv("OATK_CONFIG");
  CHECK_FALSE(resolve_config_path(std::nullopt).has_value());
  CHECK(load_engine_config(std::nullopt).image.nx == 416);
  ::setenv("OATK_CONFIG", env_file.c_str(), 1);
  CHECK(load_engine_config(std::nullopt).image.nx == 48);
  CHECK(load_engine_config(std::filesystem::path(flag_file)).image.nx == 40);
  ::unsetenv("OATK_CONFIG");
  CHECK_ERROR(load_config(dir.path / "missing.cfg"), ErrorCode::io);
}

TEST_CASE("cli recon writes an image and prints the residual") {
  const Workspace ws;
  const auto out = ws.path("bp.oaim");
  const auto r = cli({"--config", ws.config, "recon", "--method", "bp", "--sos", "1500", "--in", ws.sino,
                      "--out", out});
  CHECK(r.code == 0);
  CHECK(r.out.find("R=") != std::string::npos);
  CHECK(r.out.find("elapsed_ms=") != std::string::npos);
  const Image img = io::read_image(out);
  CHECK(img.nx() == 32);

  const auto direct = run_recon(ws.engine, io::read_sinogram(ws.sino, ws.engine.geometry),
                                {ReconMethod::bp, 1500.0});
  CHECK(io::read_file(out) == io::encode_image(direct.image));
}

TEST_CASE("cli accepts off-grid sound speeds unless grid enforcement is on") {
  const Workspace ws;
  const auto base = std::vector<std::string>{"--config", ws.config, "recon", "--method", "dmas",
                                             "--sos", "1503", "--in", ws.sino, "--out", ws.path("o.oaim")};
  CHECK(cli(base).code == 0);
  auto enforced = base;
  enforced.push_back("--enforce-grid");
  const auto r = cli(enforced);
  CHECK(r.code == kExitInvalid);
  CHECK(r.err.rfind("error: code=invalid_argument", 0) == 0);
}

TEST_CASE("cli mb writes a report sidecar and delay runs") {
  const Workspace ws;
  const auto out = ws.path("mb.oaim");
  const auto r = cli({"--config", ws.config, "recon", "--method", "mb", "--sos", "1500", "--in", ws.sino,
                      "--out", out, "--preview", ws.path("mb.png")});
  CHECK(r.code == 0);
  CHECK(r.out.find("lambda=0.5") != std::string::npos);
  CHECK(std::filesystem::exists(out + ".report.txt"));
  CHECK(std::filesystem::file_size(ws.path("mb.png")) > 8);
  CHECK(cli({"--config", ws.config, "recon", "--method", "delay", "--sos", "1500", "--in", ws.sino,
             "--out", ws.path("d.oaim")})
            .code == 0);
}

TEST_CASE("cli failures map to distinct exit codes") {
  const Workspace ws;
  const auto recon = [&](std::vector<std::string> extra) {
    std::vector<std::string> a = {"--config", ws.config, "recon", "--sos", "1500", "--out", ws.path("x.oaim")};
    a.insert(a.end(), extra.begin(), extra.end());
    return cli(a);
  };
  CHECK(recon({"--in", ws.sino, "--bogus"}).code == kExitUsage);
  CHECK(cli({"recon", "--in", ws.sino}).code == kExitUsage);
  CHECK(cli({}).code == kExitUsage);
  CHECK(recon({"--in", ws.path("missing.oasg")}).code == kExitIo);
  write_text(ws.dir.path / "bad.oasg", "NOPE0000000000000000000000000000");
  CHECK(recon({"--in", ws.path("bad.oasg")}).code == kExitFormat);
  CHECK(recon({"--in", ws.sino, "--method", "fbp"}).code == kExitInvalid);
  const auto bad_cfg = write_text(ws.dir.path / "bad.cfg", "image.nx = -3\n");
  const auto r = cli({"--config", bad_cfg, "recon", "--sos", "1500", "--in", ws.sino, "--out", ws.path("x.oaim")});
  CHECK(r.code == kExitParse);
  CHECK(r.err.find("code=parse") != std::string::npos);
  CHECK(exit_code_for(ErrorCode::numerical) == kExitNumerical);
  CHECK(exit_code_for(ErrorCode::cancelled) == kExitCancelled);
  CHECK(exit_code_for(ErrorCode::truncated) == kExitFormat);
}

TEST_CASE("cli simulate, metrics and unmix") {
  const Workspace ws;
  const auto sim = [&](const std::string& out) {
    return cli({"--config", ws.config, "simulate", "--input", "phantom:points:2", "--items", "2", "--seed",
                "9", "--out", ws.path(out)});
  };
  const auto a = sim("sim_a"), b = sim("sim_b");
  REQUIRE(a.code == 0);
  CHECK(a.out.find("items=2") != std::string::npos);
  const auto hash_line = [](const std::string& s) { return s.substr(s.find("hash=")); };
  CHECK(hash_line(a.out) == hash_line(b.out));

  const auto rec = ws.path("bp.oaim");
  REQUIRE(cli({"--config", ws.config, "recon", "--sos", "1500", "--in", ws.sino, "--out", rec}).code == 0);
  const auto m = cli({"--config", ws.config, "metrics", "--rec", rec, "--ref", rec, "--sino", ws.sino, "--sos",
                      "1500", "--window", "7"});
  CHECK(m.code == 0);
  CHECK(m.out.find("MAE=0") != std::string::npos);
  CHECK(m.out.find("SSIM=1") != std::string::npos);
  CHECK(m.out.find("R=") != std::string::npos);

  // Two chromophores over three wavelengths.
  const auto stack = ws.dir.path / "stack";
  std::filesystem::create_directories(stack);
  ImageGrid g;
  g.nx = g.ny = 4;
  const double h[2][3] = {{1.0, 0.5, 0.2}, {0.1, 0.4, 0.9}};
  const char* names[3] = {"700", "710", "720"};
  for (int l = 0; l < 3; ++l)
    io::write_image(make_image(g, std::vector<double>(16, 2.0 * h[0][l] + 3.0 * h[1][l])),
                    stack / (std::string(names[l]) + ".oaim"));
  const auto spectra = write_text(ws.dir.path / "h.csv",
                                  "wavelength_nm,hb,hbo2\n700,1,0.1\n710,0.5,0.4\n720,0.2,0.9\n");
  const auto u = cli({"unmix", "--stack", stack.string(), "--spectra", spectra, "--out", ws.path("unmixed")});
  REQUIRE(u.code == 0);
  const Image hbo2 = io::read_image(ws.dir.path / "unmixed" / "hbo2.oaim");
  CHECK(hbo2.at(1, 1) == doctest::Approx(3.0).epsilon(1e-5));
}

TEST_CASE("cli bench reports latency statistics") {
  const Workspace ws;
  const auto r = cli({"--config", ws.config, "bench", "--frames", "5", "--method", "bp,dmas", "--sos",
                      "1500", "--no-pace"});
  REQUIRE(r.code == 0);
  for (const char* key : {"method=bp", "method=dmas", "frames=5", "mean_ms=", "p50_ms=", "p95_ms=", "fps=", "budget_40ms="})
    CHECK(r.out.find(key) != std::string::npos);
}

TEST_CASE("bench statistics") {
  CHECK(percentile({5, 1, 4, 2, 3}, 0.5) == 3);
  CHECK(percentile({5, 1, 4, 2, 3}, 1.0) == 5);
  std::vector<double> lat(20);
  for (int i = 0; i < 20; ++i) lat[static_cast<std::size_t>(i)] = i + 1.0;
  CHECK(percentile(lat, 0.95) == 19);
  auto rep = summarize("bp", lat, 1000.0);
  CHECK(rep.p95_ms == 19);
  CHECK(rep.budget_met);
  CHECK(rep.frames_per_second == doctest::Approx(20.0));
  CHECK(rep.mean_ms == doctest::Approx(10.5));
  lat.back() = 41;
  lat[18] = 41;
  CHECK_FALSE(summarize("bp", lat, 1000.0).budget_met);
  lat[18] = 40;
  CHECK(summarize("bp", lat, 1000.0).budget_met);

  const Workspace ws;
  const std::vector<Sinogram> zero = {Sinogram(ws.engine.geometry)};
  const auto z = bench_stream(ws.engine, zero, {ReconMethod::bp, 1500.0}, 3, false);
  CHECK(z.n_frames == 3);
  CHECK(z.latencies_ms.size() == 3);
  for (double v : z.latencies_ms) CHECK(v >= 0.0);
  CHECK(format_bench(z).find("frames=3") != std::string::npos);
}

TEST_CASE("base64 and preview helpers") {
  for (std::size_t n = 0; n < 10; ++n) {
    std::vector<std::uint8_t> bytes(n);
    for (std::size_t i = 0; i < n; ++i) bytes[i] = static_cast<std::uint8_t>(37 * i + 250);
    CHECK(base64_decode(base64_encode(bytes)) == bytes);
  }
  const std::string hello = "hello";
  CHECK(base64_encode(std::vector<std::uint8_t>(hello.begin(), hello.end())) == "aGVsbG8=");
  CHECK_ERROR(base64_decode("a*=="), ErrorCode::parse);
  ImageGrid g;
  g.nx = g.ny = 8;
  const auto png = preview_png(Image(g));
  REQUIRE(png.size() > 8);
  CHECK(png[1] == 'P');
}

TEST_CASE("service handlers") {
  const Workspace ws;
  ReconService svc(ws.engine, DatasetIndex::load(ws.engine.dataset_root, ws.engine.geometry), {1, 4, {}});
  CHECK(svc.health().status == 200);
  const auto list = json::parse(svc.list_datasets().body);
  REQUIRE(list.size() == 1);
  CHECK(list[0]["id"] == "phantom");
  CHECK(list[0]["n_frames"] == 2);
  CHECK(list[0]["wavelengths"].empty());
  const auto meta = svc.frame_meta("phantom", "0");
  CHECK(meta.status == 200);
  CHECK(json::parse(meta.body)["n_detectors"] == 32);
  CHECK(svc.frame_meta("phantom", "7").status == 404);
  CHECK(svc.frame_meta("nope", "0").status == 404);
  CHECK(json::parse(svc.sos_grid().body)["values"].size() == 11);

  const auto ok = svc.recon(recon_body("bp", 1500).dump());
  REQUIRE(ok.status == 200);
  const auto j = json::parse(ok.body);
  CHECK(j["width"] == 32);
  CHECK(j["sos_used"] == 1500.0);
  CHECK(j["elapsed_ms"].get<double>() >= 0.0);
  CHECK(j["residual_norm"].is_number());
  const auto cli_image = run_recon(ws.engine, io::read_sinogram(ws.sino, ws.engine.geometry),
                                   {ReconMethod::bp, 1500.0});
  CHECK(base64_decode(j["image_oaim_b64"].get<std::string>()) == io::encode_image(cli_image.image));

  CHECK(svc.recon(recon_body("bp", 1503).dump()).status == 400);
  CHECK(svc.recon(recon_body("fbp", 1500).dump()).status == 400);
  CHECK(svc.recon(recon_body("bp", 1500, 9).dump()).status == 404);
  CHECK(svc.recon("{not json").status == 400);
  CHECK(svc.recon(R"({"method":"bp"})").status == 400);

  const auto zero = json::parse(svc.recon(recon_body("dmas", 1500, 1).dump()).body);
  CHECK(zero["residual_norm"].is_null());

  auto mb = recon_body("mb", 1500);
  const auto m1 = svc.recon(mb.dump()), m2 = svc.recon(mb.dump());
  REQUIRE(m1.status == 200);
  const auto jm = json::parse(m1.body);
  CHECK(jm["lambda"] == 0.5);
  CHECK(jm["iterations"].get<int>() >= 1);
  CHECK(jm["image_oaim_b64"] == json::parse(m2.body)["image_oaim_b64"]);
}

TEST_CASE("concurrent identical requests return identical payloads") {
  const Workspace ws;
  ReconService svc(ws.engine, DatasetIndex::load(ws.engine.dataset_root, ws.engine.geometry), {2, 4, {}});
  for (const char* method : {"bp", "dmas", "delay"}) {
    const auto body = recon_body(method, 1490).dump();
    std::vector<std::future<HttpReply>> replies;
    for (int i = 0; i < 4; ++i) replies.push_back(std::async(std::launch::async, [&] { return svc.recon(body); }));
    std::string first;
    for (auto& f : replies) {
      const auto r = f.get();
      REQUIRE(r.status == 200);
      const auto payload = json::parse(r.body)["image_oaim_b64"].get<std::string>();
      if (first.empty()) first = payload;
      CHECK(payload == first);
    }
  }
}

TEST_CASE("HTTP server routes and static assets") {
  const Workspace ws;
  const auto assets = ws.dir.path / "ui";
  std::filesystem::create_directories(assets);
  write_text(assets / "index.html", "<!doctype html><title>tuner</title>");
  ReconService svc(ws.engine, DatasetIndex::load(ws.engine.dataset_root, ws.engine.geometry),
                   {1, 4, assets});
  httplib::Server server;
  svc.bind(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  const auto health = client.Get("/healthz");
  REQUIRE(health);
  CHECK(health->status == 200);
  const auto list = client.Get("/api/datasets");
  REQUIRE(list);
  CHECK(json::parse(list->body)[0]["id"] == "phantom");
  const auto meta = client.Get("/api/datasets/phantom/frames/1/meta");
  REQUIRE(meta);
  CHECK(json::parse(meta->body)["frame_index"] == 1);
  CHECK(client.Get("/api/datasets/phantom/frames/5/meta")->status == 404);
  CHECK(client.Get("/api/sos-grid")->status == 200);

  const auto ok = client.Post("/api/recon", recon_body("bp", 1500).dump(), "application/json");
  REQUIRE(ok);
  CHECK(ok->status == 200);
  CHECK(json::parse(ok->body)["height"] == 32);
  const auto off = client.Post("/api/recon", recon_body("bp", 1503).dump(), "application/json");
  CHECK(off->status == 400);

  const auto page = client.Get("/index.html");
  REQUIRE(page);
  CHECK(page->status == 200);
  CHECK(page->body.find("tuner") != std::string::npos);

  server.stop();
  t.join();
}

TEST_CASE("worker pool bounds its queue and supersedes per session") {
  WorkerPool pool(1, 1);
  std::latch started(1), release(1);
  std::atomic<bool> first_stopped = false;
  REQUIRE(pool.submit("ui", [&](std::stop_token st) {
    started.count_down();
    while (!st.stop_requested()) std::this_thread::sleep_for(std::chrono::milliseconds(1));
    first_stopped = true;
    release.wait();
  }));
  started.wait();
  std::atomic<bool> second_ran = false;
  CHECK(pool.submit("ui", [&](std::stop_token) { second_ran = true; }));
  // Queue holds one job: a third is refused.
  CHECK_FALSE(pool.submit("other", [](std::stop_token) {}));
  for (int i = 0; i < 2000 && !first_stopped; ++i) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  CHECK(first_stopped);
  release.count_down();
  for (int i = 0; i < 2000 && !second_ran; ++i) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  CHECK(second_ran);
}

TEST_CASE("dataset index reads wavelengths from a manifest") {
  const oracle::TempDir dir("idx");
  ArrayGeometry g;
  g.n_detectors = 4;
  g.n_time_samples = 8;
  std::filesystem::create_directories(dir.path / "msot");
  io::write_sinogram(Sinogram(g), dir.path / "msot" / "a.oasg");
  io::write_sinogram(Sinogram(g), dir.path / "msot" / "b.oasg");
  write_text(dir.path / "msot" / "manifest.csv", "files,wavelength_nm\na.oasg,800\nb.oasg,700\n");
  const auto idx = DatasetIndex::load(dir.path, g);
  const auto* ds = idx.find("msot");
  REQUIRE(ds);
  CHECK(ds->wavelengths() == std::vector<double>{700.0, 800.0});
  CHECK(idx.frame("msot", 0)->sinogram.wavelength_nm() == 800.0);
  CHECK(idx.frame("msot", 2) == nullptr);
  CHECK(parse_method("delay") == ReconMethod::delay);
  CHECK_ERROR(parse_method("fbp"), ErrorCode::invalid_argument);
}
