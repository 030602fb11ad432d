#include "oatk/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "oatk/error.hpp"

namespace oatk::io {

namespace {

constexpr std::uint32_t kFormatVersion = 1;
constexpr std::size_t kHeaderBytes = 24;

class Writer {
public:
  explicit Writer(std::size_t reserve) { bytes_.reserve(reserve); }

  void magic(const char (&m)[5]) { bytes_.insert(bytes_.end(), m, m + 4); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

  std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void expect_magic(const char (&m)[5]) {
    need(4);
    if (std::memcmp(bytes_.data() + pos_, m, 4) != 0)
      fail(ErrorCode::bad_magic, std::string("expected magic '") + m + "'");
    pos_ += 4;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }

  std::vector<float> payload(std::size_t count) {
    const std::size_t remaining = bytes_.size() - pos_;
    if (remaining < count * 4)
      fail(ErrorCode::truncated, "payload truncated: expected " +
                                     std::to_string(count * 4) + " bytes, found " +
                                     std::to_string(remaining));
    if (remaining > count * 4)
      fail(ErrorCode::dimension_mismatch,
           "payload larger than the header dimensions declare");
    std::vector<float> out(count);
    for (auto& v : out) v = f32();
    return out;
  }

private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) fail(ErrorCode::truncated, "header truncated");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void check_version(std::uint32_t version) {
  if (version != kFormatVersion)
    fail(ErrorCode::unsupported_version,
         "unsupported format version " + std::to_string(version));
}

std::uint32_t narrow_u32(std::size_t v, const char* what) {
  require(v <= 0xffffffffu, ErrorCode::invalid_argument, what);
  return static_cast<std::uint32_t>(v);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view text, std::size_t line_no) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    fail(ErrorCode::parse, "spectra: line " + std::to_string(line_no) +
                               ": not a number: '" + std::string(text) + "'");
  return v;
}

} // namespace

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::io, "write failed for '" + path.string() + "'");
}

std::vector<std::uint8_t> encode_sinogram(const Sinogram& sinogram) {
  const auto& g = sinogram.geometry();
  Writer w(kHeaderBytes + sinogram.samples().size() * 4);
  w.magic("OASG");
  w.u32(kFormatVersion);
  w.u32(narrow_u32(g.n_time_samples, "sinogram too large"));
  w.u32(narrow_u32(g.n_detectors, "sinogram too large"));
  w.f32(static_cast<float>(static_cast<double>(g.t0_offset_samples) / g.sampling_rate_hz));
  w.f32(static_cast<float>(g.sampling_rate_hz));
  for (float v : sinogram.samples()) w.f32(v);
  return w.take();
}

Sinogram decode_sinogram(std::span<const std::uint8_t> bytes, const ArrayGeometry& arc) {
  Reader r(bytes);
  r.expect_magic("OASG");
  check_version(r.u32());
  const std::uint32_t n_time = r.u32();
  const std::uint32_t n_det = r.u32();
  const float t0_s = r.f32();
  const float fs = r.f32();
  if (n_time == 0 || n_det < 2)
    fail(ErrorCode::dimension_mismatch, "sinogram header declares empty dimensions");
  require(std::isfinite(fs) && fs > 0.0f && std::isfinite(t0_s) && t0_s >= 0.0f,
          ErrorCode::parse, "sinogram header has invalid timing fields");
  ArrayGeometry g = arc;
  g.n_time_samples = n_time;
  g.n_detectors = n_det;
  g.sampling_rate_hz = static_cast<double>(fs);
  g.t0_offset_samples = static_cast<std::size_t>(
      std::llround(static_cast<double>(t0_s) * static_cast<double>(fs)));
  auto samples = r.payload(static_cast<std::size_t>(n_time) * n_det);
  return Sinogram(g, std::move(samples));
}

void write_sinogram(const Sinogram& sinogram, const std::filesystem::path& path) {
  write_file(path, encode_sinogram(sinogram));
}

Sinogram read_sinogram(const std::filesystem::path& path, const ArrayGeometry& arc) {
  return decode_sinogram(read_file(path), arc);
}

std::vector<std::uint8_t> encode_image(const Image& image) {
  const auto& g = image.grid();
  Writer w(kHeaderBytes + image.size() * 4);
  w.magic("OAIM");
  w.u32(kFormatVersion);
  w.u32(narrow_u32(g.nx, "image too large"));
  w.u32(narrow_u32(g.ny, "image too large"));
  w.f32(static_cast<float>(g.fov_x_m));
  w.f32(static_cast<float>(g.fov_y_m));
  for (float v : image.pixels()) w.f32(v);
  return w.take();
}

Image decode_image(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.expect_magic("OAIM");
  check_version(r.u32());
  ImageGrid g;
  g.nx = r.u32();
  g.ny = r.u32();
  g.fov_x_m = static_cast<double>(r.f32());
  g.fov_y_m = static_cast<double>(r.f32());
  if (g.nx == 0 || g.ny == 0)
    fail(ErrorCode::dimension_mismatch, "image header declares empty dimensions");
  require(g.fov_x_m > 0.0 && g.fov_y_m > 0.0, ErrorCode::parse,
          "image header has invalid field of view");
  auto px = r.payload(g.size());
  return Image(g, std::move(px));
}

void write_image(const Image& image, const std::filesystem::path& path) {
  write_file(path, encode_image(image));
}

Image read_image(const std::filesystem::path& path) { return decode_image(read_file(path)); }

SpectraMatrix parse_spectra(std::string_view csv) {
  std::vector<std::string_view> lines;
  for (auto line : split(csv, '\n')) {
    line = trim(line);
    if (!line.empty()) lines.push_back(line);
  }
  require(!lines.empty(), ErrorCode::parse, "spectra: empty file");
  // Tolerate a UTF-8 byte-order mark.
  if (lines[0].starts_with("\xEF\xBB\xBF")) lines[0].remove_prefix(3);

  const auto header = split(lines[0], ',');
  require(header.size() >= 2 && trim(header[0]) == "wavelength_nm", ErrorCode::parse,
          "spectra: header must be 'wavelength_nm,<chromophore names>'");
  SpectraMatrix out;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const auto name = trim(header[c]);
    require(!name.empty(), ErrorCode::parse, "spectra: empty chromophore name");
    out.chromophores.emplace_back(name);
  }
  const std::size_t n_chrom = out.chromophores.size();
  std::vector<std::vector<double>> columns(n_chrom);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split(lines[i], ',');
    if (fields.size() != n_chrom + 1)
      fail(ErrorCode::parse, "spectra: line " + std::to_string(i + 1) + " has " +
                                 std::to_string(fields.size()) + " fields, expected " +
                                 std::to_string(n_chrom + 1));
    out.wavelengths_nm.push_back(parse_double(fields[0], i + 1));
    for (std::size_t c = 0; c < n_chrom; ++c)
      columns[c].push_back(parse_double(fields[c + 1], i + 1));
  }
  for (const auto& col : columns)
    out.absorption.insert(out.absorption.end(), col.begin(), col.end());
  out.validate();
  return out;
}

SpectraMatrix read_spectra(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_spectra(std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                        bytes.size()));
}

void write_spectra(const SpectraMatrix& spectra, const std::filesystem::path& path) {
  spectra.validate();
  std::ostringstream os;
  os.precision(17);
  os << "wavelength_nm";
  for (const auto& name : spectra.chromophores) os << ',' << name;
  os << '\n';
  for (std::size_t w = 0; w < spectra.n_wavelengths(); ++w) {
    os << spectra.wavelengths_nm[w];
    for (std::size_t c = 0; c < spectra.n_chromophores(); ++c) os << ',' << spectra.at(c, w);
    os << '\n';
  }
  const auto text = os.str();
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

} // namespace oatk::io
