#include "oatk/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "oatk/error.hpp"
#include "oatk/forward_model.hpp"
#include "oatk/io.hpp"

namespace oatk {

void SynthesisConfig::validate() const {
  geometry.validate();
  eir.validate();
  sos_grid.validate();
  require(image_size >= 8 && fov_m > 0.0, ErrorCode::invalid_argument,
          "synthesis: invalid image size or field of view");
  require(scale_min >= 0.0 && scale_max >= scale_min, ErrorCode::invalid_argument,
          "synthesis: scale range must be non-negative and ordered");
  require(!noise_std || *noise_std >= 0.0, ErrorCode::invalid_argument,
          "synthesis: noise std must be >= 0");
  require(crop_samples < geometry.n_time_samples, ErrorCode::invalid_argument,
          "synthesis: crop removes the whole record");
}

ImageGrid SynthesisConfig::grid() const {
  ImageGrid g;
  g.nx = g.ny = image_size;
  g.fov_x_m = g.fov_y_m = fov_m;
  return g;
}

std::vector<double> raster_luminance(const std::filesystem::path& path, std::size_t size) {
  require(size > 0, ErrorCode::invalid_argument, "raster: output size must be > 0");
  const cv::Mat raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  require(!raw.empty(), ErrorCode::io, "raster: cannot decode '" + path.string() + "'");

  const double full = raw.depth() == CV_16U ? 65535.0 : raw.depth() == CV_8U ? 255.0 : 1.0;
  cv::Mat f;
  raw.convertTo(f, CV_64F, 1.0 / full);
  cv::Mat gray;
  switch (f.channels()) {
  case 1: gray = f; break;
  case 3:
  case 4: {
    // OpenCV channel order is B, G, R(, A).
    std::vector<cv::Mat> ch;
    cv::split(f, ch);
    gray = 0.2126 * ch[2] + 0.7152 * ch[1] + 0.0722 * ch[0];
    break;
  }
  default: fail(ErrorCode::invalid_argument, "raster: unsupported channel count");
  }
  cv::Mat resized;
  const int n = static_cast<int>(size);
  if (gray.rows == n && gray.cols == n) resized = gray;
  else cv::resize(gray, resized, cv::Size(n, n), 0.0, 0.0, cv::INTER_LINEAR);

  std::vector<double> out(size * size);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) out[static_cast<std::size_t>(r) * size + c] = resized.at<double>(r, c);
  return out;
}

Image image_to_initial_pressure(const std::filesystem::path& path, const SynthesisConfig& config) {
  auto v = raster_luminance(path, config.image_size);
  const double peak = *std::max_element(v.begin(), v.end());
  if (peak > 0.0)
    for (auto& x : v) x /= peak;
  return make_image(config.grid(), v);
}

SynthesizedSinogram synthesize_sinogram(const Image& p, const SynthesisConfig& config, Rng& rng) {
  config.validate();
  const double sos = config.sos_grid.value(rng.index(config.sos_grid.size()));
  const double scale = rng.uniform(config.scale_min, config.scale_max);

  const ForwardOperator op(config.geometry, p.grid(), sos, config.eir);
  auto samples = op.apply(to_double(p.pixels()));
  for (auto& v : samples) v *= scale;
  if (config.noise_std && *config.noise_std > 0.0)
    for (auto& v : samples) v += *config.noise_std * rng.normal();

  Sinogram s = make_sinogram(config.geometry, samples);
  if (config.apply_acquisition_filters) {
    s = bandpass_filter(s, config.bandpass_lo_hz, config.bandpass_hi_hz);
    s = crop_leading_samples(s, config.crop_samples);
  }
  return {std::move(s), sos, scale};
}

SynthesizedSinogram synthesize_item(const Image& p, const SynthesisConfig& config,
                                    std::size_t index) {
  Rng rng(config.seed, index);
  return synthesize_sinogram(p, config, rng);
}

TrainingPair preprocess_pair(const Sinogram& s, const Image& target) {
  std::vector<double> in = to_double(s.samples());
  for (auto& v : in) v *= kPreprocessScale;
  std::vector<double> out = to_double(target.pixels());
  for (auto& v : out) {
    require(v >= 0.0, ErrorCode::invalid_argument, "preprocess: target has negative pixels");
    v = std::sqrt(kPreprocessScale * v);
  }
  return {Sinogram(s.geometry(), to_float(in), s.wavelength_nm()), make_image(target.grid(), out)};
}

Image postprocess_image(const Image& x) {
  std::vector<double> v = to_double(x.pixels());
  for (auto& e : v) e = e * e / kPreprocessScale;
  return make_image(x.grid(), v);
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t hash) noexcept {
  for (std::uint8_t b : bytes) {
    hash ^= b;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

std::string item_stem(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "item_%05zu", i);
  return buf;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

} // namespace

DatasetSummary write_dataset(std::span<const Image> sources, const SynthesisConfig& config,
                             const std::filesystem::path& out_dir) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  require(!ec, ErrorCode::io, "dataset: cannot create '" + out_dir.string() + "'");

  std::string manifest = "item,sos,scale,files\n";
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const auto item = synthesize_item(sources[i], config, i);
    const std::string stem = item_stem(i);
    io::write_sinogram(item.sinogram, out_dir / (stem + ".oasg"));
    io::write_image(sources[i], out_dir / (stem + "_p0.oaim"));
    manifest += std::to_string(i) + "," + format_number(item.sos_used) + "," +
                format_number(item.scale_used) + "," + stem + ".oasg;" + stem + "_p0.oaim\n";
  }
  const auto path = out_dir / "manifest.csv";
  const std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(manifest.data()),
                                            manifest.size());
  io::write_file(path, bytes);
  return {path, sources.size(), dataset_hash(out_dir)};
}

std::uint64_t dataset_hash(const std::filesystem::path& dir) {
  const auto manifest = io::read_file(dir / "manifest.csv");
  std::uint64_t h = fnv1a64(manifest);
  const std::string text(manifest.begin(), manifest.end());
  const auto lines = split(text, '\n');
  require(!lines.empty(), ErrorCode::parse, "dataset: empty manifest");
  const auto header = split(lines.front(), ',');
  const auto files_col = std::find(header.begin(), header.end(), "files");
  require(files_col != header.end(), ErrorCode::parse, "dataset: manifest has no files column");
  const auto col = static_cast<std::size_t>(files_col - header.begin());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split(lines[i], ',');
    require(fields.size() > col, ErrorCode::parse, "dataset: short manifest row");
    for (const auto& f : split(fields[col], ';')) h = fnv1a64(io::read_file(dir / f), h);
  }
  return h;
}

} // namespace oatk
