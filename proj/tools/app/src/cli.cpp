#include "oatk/app/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "oatk/app/bench.hpp"
#include "oatk/app/config.hpp"
#include "oatk/app/dataset.hpp"
#include "oatk/app/recon.hpp"
#include "oatk/app/service.hpp"
#include "oatk/forward_model.hpp"
#include "oatk/io.hpp"
#include "oatk/metrics.hpp"
#include "oatk/phantom.hpp"
#include "oatk/synthesis.hpp"
#include "oatk/unmix.hpp"

namespace oatk::app {

namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
  case ErrorCode::io: return kExitIo;
  case ErrorCode::parse: return kExitParse;
  case ErrorCode::bad_magic:
  case ErrorCode::truncated:
  case ErrorCode::unsupported_version: return kExitFormat;
  case ErrorCode::numerical: return kExitNumerical;
  case ErrorCode::cancelled: return kExitCancelled;
  default: return kExitInvalid;
  }
}

namespace {

void print_error(std::ostream& err, std::string_view code, std::string_view message) {
  std::string escaped;
  for (char c : message) {
    if (c == '"' || c == '\\') escaped += '\\';
    escaped += c == '\n' ? ' ' : c;
  }
  err << "error: code=" << code << " message=\"" << escaped << "\"\n";
}

std::optional<double> parse_lambda(const std::string& text, bool& is_auto) {
  is_auto = text == "auto";
  if (text.empty() || is_auto) return std::nullopt;
  double v = 0.0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  require(ec == std::errc{} && p == text.data() + text.size() && v >= 0.0,
          ErrorCode::invalid_argument, "--lambda must be a non-negative number or 'auto'");
  return v;
}

bool is_raster(const fs::path& p) {
  static const std::vector<std::string> ext = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".pgm", ".ppm"};
  auto e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return std::find(ext.begin(), ext.end(), e) != ext.end();
}

struct Options {
  std::optional<fs::path> config_path;

  // simulate
  std::string sim_input;
  std::size_t sim_items = 1;
  std::uint64_t seed = 0;
  fs::path out;
  std::optional<double> noise_std;
  bool no_filters = false;

  // recon / bench
  std::string method = "bp";
  std::vector<std::string> methods{"bp"};
  double sos = 1500.0;
  fs::path in;
  std::string lambda;
  bool enforce_grid = false;
  std::optional<fs::path> report;
  std::optional<fs::path> preview;
  std::size_t frames = 50;
  bool no_pace = false;

  // metrics
  fs::path rec, ref;
  std::optional<fs::path> sino;
  bool scale_per_metric = false;
  bool clamp = false;
  std::size_t window = 21;

  // unmix
  fs::path stack_dir, spectra;

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<fs::path> static_dir;
  std::size_t mb_workers = 0;
  std::size_t queue_depth = 4;
};

int do_simulate(const Options& o, std::ostream& out) {
  const EngineConfig cfg = load_engine_config(o.config_path);
  require(cfg.image.nx == cfg.image.ny, ErrorCode::invalid_argument,
          "simulate: the configured image must be square");
  SynthesisConfig sc;
  sc.geometry = cfg.geometry;
  sc.eir = cfg.eir;
  sc.sos_grid = cfg.sos_grid;
  sc.image_size = cfg.image.nx;
  sc.fov_m = cfg.image.fov_x_m;
  sc.seed = o.seed;
  sc.noise_std = o.noise_std;
  sc.apply_acquisition_filters = !o.no_filters;

  std::vector<Image> sources;
  if (o.sim_input.starts_with("phantom:")) {
    std::string spec = o.sim_input.substr(8);
    std::size_t count = 0;
    if (const auto colon = spec.find(':'); colon != std::string::npos) {
      const auto c = spec.substr(colon + 1);
      const auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), count);
      require(ec == std::errc{} && p == c.data() + c.size(), ErrorCode::invalid_argument,
              "simulate: bad phantom shape count '" + c + "'");
      spec = spec.substr(0, colon);
    }
    const PhantomKind kind = parse_phantom_kind(spec);
    for (std::size_t i = 0; i < o.sim_items; ++i) {
      Rng rng(o.seed, (std::uint64_t{1} << 32) + i);
      sources.push_back(make_phantom(kind, cfg.image, rng, count));
    }
  } else if (fs::is_directory(o.sim_input)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(o.sim_input))
      if (e.is_regular_file() && is_raster(e.path())) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    require(!files.empty(), ErrorCode::io, "simulate: no rasters in '" + o.sim_input + "'");
    for (const auto& f : files) sources.push_back(image_to_initial_pressure(f, sc));
  } else {
    sources.push_back(image_to_initial_pressure(o.sim_input, sc));
  }

  const auto summary = write_dataset(sources, sc, o.out);
  out << "items=" << summary.n_items << '\n'
      << "manifest=" << summary.manifest.string() << '\n'
      << "hash=" << hex64(summary.hash) << '\n';
  return kExitOk;
}

int do_recon(const Options& o, std::ostream& out) {
  const EngineConfig cfg = load_engine_config(o.config_path);
  ReconRequest req;
  req.method = parse_method(o.method);
  req.sos_mps = o.sos;
  req.lambda = parse_lambda(o.lambda, req.lambda_auto);
  if (o.enforce_grid)
    require(cfg.sos_grid.contains(o.sos), ErrorCode::invalid_argument,
            "recon: sos is not on the configured grid");
  const Sinogram s = io::read_sinogram(o.in, cfg.geometry);
  const auto result = run_recon(cfg, s, req);
  io::write_image(result.image, o.out);
  if (o.preview) {
    const auto png = preview_png(result.image);
    io::write_file(*o.preview, png);
  }
  if (result.report) {
    const fs::path report = o.report ? *o.report : fs::path(o.out.string() + ".report.txt");
    const std::string text = format_report(*result.report);
    io::write_file(report, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }
  out << std::setprecision(9);
  if (result.residual_norm) out << "R=" << *result.residual_norm << '\n';
  else out << "R=undefined\n";
  out << "elapsed_ms=" << result.elapsed_ms << '\n';
  if (result.report) out << "lambda=" << result.report->lambda << '\n';
  return kExitOk;
}

int do_metrics(const Options& o, std::ostream& out) {
  const EngineConfig cfg = load_engine_config(o.config_path);
  const Image rec = io::read_image(o.rec);
  const Image ref = io::read_image(o.ref);
  MetricOptions mo;
  mo.scale_per_metric = o.scale_per_metric;
  mo.clamp_negatives = o.clamp;
  mo.ssim_window = o.window;
  MetricReport report = image_metrics(rec, ref, mo);
  if (o.sino) {
    const Sinogram s = io::read_sinogram(*o.sino, cfg.geometry);
    const ForwardOperator op(s.geometry(), rec.grid(), o.sos, cfg.eir);
    report.residual_norm = residual_norm(op, rec, s);
  }
  out << std::setprecision(9);
  if (report.residual_norm) out << "R=" << *report.residual_norm << '\n';
  out << "MAE=" << report.mae << '\n'
      << "MAE_rel=" << report.mae_rel << '\n'
      << "MSE=" << report.mse << '\n'
      << "MSE_rel=" << report.mse_rel << '\n'
      << "SSIM=" << report.ssim << '\n';
  if (o.scale_per_metric)
    out << "MAE_scale=" << report.mae_scale << '\n' << "MSE_scale=" << report.mse_scale << '\n';
  return kExitOk;
}

int do_unmix(const Options& o, std::ostream& out) {
  const SpectraMatrix h = io::read_spectra(o.spectra);
  std::vector<std::pair<double, fs::path>> files;
  require(fs::is_directory(o.stack_dir), ErrorCode::io,
          "unmix: '" + o.stack_dir.string() + "' is not a directory");
  for (const auto& e : fs::directory_iterator(o.stack_dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".oaim") continue;
    const auto stem = e.path().stem().string();
    double wl = 0.0;
    const auto [p, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), wl);
    require(ec == std::errc{} && p == stem.data() + stem.size(), ErrorCode::invalid_argument,
            "unmix: stack file '" + e.path().filename().string() + "' is not named <wavelength_nm>.oaim");
    files.emplace_back(wl, e.path());
  }
  std::sort(files.begin(), files.end());
  MultispectralStack stack;
  for (const auto& [wl, path] : files) {
    stack.wavelengths_nm.push_back(wl);
    stack.images.push_back(io::read_image(path));
  }
  const auto result = unmix_nnls(stack, h, o.clamp);
  fs::create_directories(o.out);
  for (std::size_t c = 0; c < result.n_chromophores(); ++c) {
    const auto path = o.out / (result.chromophores[c] + ".oaim");
    io::write_image(result.component_image(c), path);
    out << result.chromophores[c] << '=' << path.string() << '\n';
  }
  return kExitOk;
}

int do_bench(const Options& o, std::ostream& out) {
  const EngineConfig cfg = load_engine_config(o.config_path);
  std::vector<Sinogram> frames;
  if (!o.in.empty()) frames.push_back(io::read_sinogram(o.in, cfg.geometry));
  else frames.emplace_back(cfg.geometry);
  ReconRequest req;
  req.sos_mps = o.sos;
  req.lambda = parse_lambda(o.lambda, req.lambda_auto);
  for (const auto& m : o.methods) {
    req.method = parse_method(m);
    out << format_bench(bench_stream(cfg, frames, req, o.frames, !o.no_pace));
  }
  return kExitOk;
}

int do_serve(const Options& o, std::ostream& out) {
  const EngineConfig cfg = load_engine_config(o.config_path);
  DatasetIndex index = DatasetIndex::load(cfg.dataset_root, cfg.geometry);
  ServiceOptions so;
  so.mb_workers = o.mb_workers;
  so.mb_queue_depth = o.queue_depth;
  so.static_dir = o.static_dir;
  ReconService service(cfg, std::move(index), so);
  out << "listening on http://" << o.host << ':' << o.port << std::endl;
  serve(service, o.host, o.port);
  return kExitOk;
}

} // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Optoacoustic tomography reconstruction toolkit", "oatk"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", o.config_path, "Engine config file (default: $OATK_CONFIG)");

  auto* sim = app.add_subcommand("simulate", "Synthesize a sinogram dataset");
  sim->add_option("--input", o.sim_input, "Raster file, raster directory or phantom:<kind>[:shapes]")->required();
  sim->add_option("--items", o.sim_items, "Number of phantom items")->check(CLI::PositiveNumber);
  sim->add_option("--seed", o.seed, "Random seed");
  sim->add_option("--out", o.out, "Output directory")->required();
  sim->add_option("--noise-std", o.noise_std, "Additive Gaussian noise level")->check(CLI::NonNegativeNumber);
  sim->add_flag("--no-acquisition-filters", o.no_filters, "Skip band-pass and crop");

  auto* rec = app.add_subcommand("recon", "Reconstruct one sinogram");
  rec->add_option("--method", o.method, "bp | dmas | mb | delay");
  rec->add_option("--sos", o.sos, "Speed of sound [m/s]")->required();
  rec->add_option("--in", o.in, "Input sinogram (.oasg)")->required();
  rec->add_option("--out", o.out, "Output image (.oaim)")->required();
  rec->add_option("--lambda", o.lambda, "MB regularization weight or 'auto'");
  rec->add_flag("--enforce-grid", o.enforce_grid, "Reject SoS values off the configured grid");
  rec->add_option("--report", o.report, "MB solve report path (default <out>.report.txt)");
  rec->add_option("--preview", o.preview, "Also write an 8-bit PNG preview");
  rec->add_option("--seed", o.seed, "Accepted for uniformity; reconstruction is deterministic");

  auto* met = app.add_subcommand("metrics", "Image metrics and data residual");
  met->add_option("--rec", o.rec, "Reconstruction (.oaim)")->required();
  met->add_option("--ref", o.ref, "Reference (.oaim)")->required();
  met->add_option("--sino", o.sino, "Sinogram for the residual norm");
  met->add_option("--sos", o.sos, "Speed of sound for the residual norm [m/s]");
  met->add_option("--op-config", o.config_path, "Engine config (alias of --config)");
  met->add_flag("--scale-per-metric", o.scale_per_metric, "Optimally rescale per metric");
  met->add_flag("--clamp", o.clamp, "Clamp negatives of the reconstruction");
  met->add_option("--window", o.window, "SSIM window size")->check(CLI::PositiveNumber);

  auto* unm = app.add_subcommand("unmix", "Non-negative spectral unmixing");
  unm->add_option("--stack", o.stack_dir, "Directory of <wavelength_nm>.oaim images")->required();
  unm->add_option("--spectra", o.spectra, "Spectra CSV")->required();
  unm->add_option("--out", o.out, "Output directory")->required();
  unm->add_flag("--clamp", o.clamp, "Clamp negative stack pixels first");

  auto* ben = app.add_subcommand("bench", "Streaming latency benchmark");
  ben->add_option("--frames", o.frames, "Frames to reconstruct")->check(CLI::PositiveNumber);
  ben->add_option("--method", o.methods, "Methods (comma separated)")->delimiter(',');
  ben->add_option("--sos", o.sos, "Speed of sound [m/s]");
  ben->add_option("--in", o.in, "Sinogram to replay (default: zero frames)");
  ben->add_option("--lambda", o.lambda, "MB regularization weight or 'auto'");
  ben->add_flag("--no-pace", o.no_pace, "Do not pace frames at 25 Hz");
  ben->add_option("--seed", o.seed, "Accepted for uniformity");

  auto* srv = app.add_subcommand("serve", "HTTP reconstruction service");
  srv->add_option("--host", o.host, "Bind address");
  srv->add_option("--port", o.port, "Port")->check(CLI::Range(1, 65535));
  srv->add_option("--static-dir", o.static_dir, "Directory of UI assets served at /");
  srv->add_option("--mb-workers", o.mb_workers, "MB worker threads (0: CPU count)");
  srv->add_option("--queue-depth", o.queue_depth, "Pending MB requests before 409");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage", e.what());
    return kExitUsage;
  }

  try {
    if (sim->parsed()) return do_simulate(o, out);
    if (rec->parsed()) return do_recon(o, out);
    if (met->parsed()) return do_metrics(o, out);
    if (unm->parsed()) return do_unmix(o, out);
    if (ben->parsed()) return do_bench(o, out);
    if (srv->parsed()) return do_serve(o, out);
  } catch (const Error& e) {
    print_error(err, to_string(e.code()), e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    print_error(err, "internal", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

} // namespace oatk::app
