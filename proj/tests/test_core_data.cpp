#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "oatk/data.hpp"
#include "oatk/error.hpp"
#include "oatk/io.hpp"
#include "check.hpp"
#include "oracles.hpp"

using namespace oatk;

namespace {

Sinogram random_sinogram(const ArrayGeometry& g, std::uint64_t seed) {
  const auto v = oracle::random_vector(g.n_time_samples * g.n_detectors, seed, -450, 450);
  return make_sinogram(g, v);
}

std::vector<std::uint8_t> le32(std::uint32_t v) {
  return {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
          static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 24)};
}

} // namespace

TEST_CASE("detector positions follow the closed form at both ends and the middle") {
  ArrayGeometry g;
  g.center_of_curvature = {0.001, -0.002};
  for (std::size_t k : {std::size_t{0}, g.n_detectors / 2, g.n_detectors - 1}) {
    const auto p = g.detector_position(k);
    const auto q = oracle::detector(g, k);
    CHECK(p.x == doctest::Approx(q.x).epsilon(1e-14));
    CHECK(p.y == doctest::Approx(q.y).epsilon(1e-14));
    CHECK(distance(p, g.center_of_curvature) == doctest::Approx(0.04).epsilon(1e-13));
  }
  // Symmetric about the upward vertical through the center.
  const auto first = g.detector_position(0), last = g.detector_position(g.n_detectors - 1);
  CHECK(first.x - 0.001 == doctest::Approx(-(last.x - 0.001)));
  CHECK(first.y == doctest::Approx(last.y));
  CHECK(g.detector_angle_rad(0) == doctest::Approx(-62.5 * oracle::kPi / 180.0));
}

TEST_CASE("geometry invariants are enforced") {
  ArrayGeometry g;
  g.n_detectors = 1;
  CHECK_ERROR(g.validate(), ErrorCode::invalid_argument);
  g = {};
  g.angular_coverage_deg = 361;
  CHECK_ERROR(g.validate(), ErrorCode::invalid_argument);
  g = {};
  g.concavity_radius_m = 0.0;
  CHECK_ERROR(g.validate(), ErrorCode::invalid_argument);
  g = {};
  g.sampling_rate_hz = -1;
  CHECK_ERROR(g.validate(), ErrorCode::invalid_argument);
  ImageGrid grid;
  grid.nx = 0;
  CHECK_ERROR(grid.validate(), ErrorCode::invalid_argument);
}

TEST_CASE("default sos grid has eleven values from 1475 to 1525") {
  const SosGrid grid;
  REQUIRE(grid.size() == 11);
  CHECK(grid.value(0) == 1475.0);
  CHECK(grid.value(10) == 1525.0);
  CHECK(grid.index_of(1500.0) == 5u);
  CHECK_FALSE(grid.index_of(1503.0).has_value());
  CHECK_FALSE(grid.contains(1530.0));
  SosGrid bad{1475, 1526, 5};
  CHECK_ERROR(bad.validate(), ErrorCode::invalid_argument);
}

TEST_CASE("sinogram construction validates size and finiteness") {
  ArrayGeometry g;
  g.n_detectors = 4;
  g.n_time_samples = 8;
  CHECK_ERROR(Sinogram(g, std::vector<float>(31)), ErrorCode::dimension_mismatch);
  std::vector<float> v(32, 0.0f);
  v[3] = std::numeric_limits<float>::quiet_NaN();
  CHECK_ERROR(Sinogram(g, v), ErrorCode::non_finite);
  v[3] = 2.0f;
  const Sinogram s(g, v);
  CHECK(s.at(0, 3) == 2.0f);
  CHECK(s.channel(3)[0] == 2.0);
}

TEST_CASE("sinogram files round-trip bit-exactly") {
  const oracle::TempDir dir("io");
  ArrayGeometry g; // 2030 x 256
  const Sinogram s = random_sinogram(g, 1);
  const auto path = dir.path / "s.oasg";
  io::write_sinogram(s, path);
  const Sinogram back = io::read_sinogram(path);
  REQUIRE(back.samples().size() == s.samples().size());
  CHECK(std::memcmp(back.samples().data(), s.samples().data(), s.samples().size() * 4) == 0);
  CHECK(back.geometry() == s.geometry());
  CHECK(io::encode_sinogram(back) == io::read_file(path));

  // Header layout: magic, version, n_time, n_det, t0 seconds, fs.
  const auto bytes = io::read_file(path);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "OASG");
  CHECK(std::vector<std::uint8_t>(bytes.begin() + 4, bytes.begin() + 8) == le32(1));
  CHECK(std::vector<std::uint8_t>(bytes.begin() + 8, bytes.begin() + 12) == le32(2030));
  CHECK(std::vector<std::uint8_t>(bytes.begin() + 12, bytes.begin() + 16) == le32(256));
  CHECK(std::vector<std::uint8_t>(bytes.begin() + 20, bytes.begin() + 24) ==
        le32(std::bit_cast<std::uint32_t>(40e6f)));
  CHECK(bytes.size() == 24 + 2030 * 256 * 4);
}

TEST_CASE("cropped sinograms keep their time offset through a file") {
  ArrayGeometry g;
  g.n_detectors = 3;
  g.n_time_samples = 20;
  g.t0_offset_samples = 110;
  const Sinogram s = random_sinogram(g, 2);
  const Sinogram back = io::decode_sinogram(io::encode_sinogram(s), g);
  CHECK(back.geometry().t0_offset_samples == 110);
}

TEST_CASE("malformed sinogram files give distinct errors") {
  ArrayGeometry g;
  g.n_detectors = 4;
  g.n_time_samples = 16;
  const auto good = io::encode_sinogram(random_sinogram(g, 3));

  auto bad_magic = good;
  bad_magic[0] = 'X';
  CHECK_ERROR(io::decode_sinogram(bad_magic), ErrorCode::bad_magic);

  auto short_payload = good;
  short_payload.resize(good.size() - 5);
  CHECK_ERROR(io::decode_sinogram(short_payload), ErrorCode::truncated);

  const std::vector<std::uint8_t> short_header(good.begin(), good.begin() + 10);
  CHECK_ERROR(io::decode_sinogram(short_header), ErrorCode::truncated);

  auto version = good;
  version[4] = 2;
  CHECK_ERROR(io::decode_sinogram(version), ErrorCode::unsupported_version);

  auto extra = good;
  extra.push_back(0);
  CHECK_ERROR(io::decode_sinogram(extra), ErrorCode::dimension_mismatch);

  auto zero_dim = good;
  std::memset(zero_dim.data() + 8, 0, 4);
  CHECK_ERROR(io::decode_sinogram(zero_dim), ErrorCode::dimension_mismatch);

  CHECK_ERROR(io::read_sinogram("/nonexistent/x.oasg"), ErrorCode::io);
}

TEST_CASE("image files round-trip bit-exactly and reject bad headers") {
  ImageGrid grid;
  grid.nx = 37;
  grid.ny = 23;
  grid.fov_x_m = 0.0037;
  grid.fov_y_m = 0.0023;
  const Image img = make_image(grid, oracle::random_vector(grid.size(), 4));
  const auto bytes = io::encode_image(img);
  const Image back = io::decode_image(bytes);
  CHECK(back.grid().nx == 37);
  CHECK(back.grid().ny == 23);
  CHECK(std::memcmp(back.pixels().data(), img.pixels().data(), img.size() * 4) == 0);
  CHECK(io::encode_image(back) == bytes);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "OAIM");

  auto bad = bytes;
  bad[1] = 'X';
  CHECK_ERROR(io::decode_image(bad), ErrorCode::bad_magic);
  bad = bytes;
  bad.pop_back();
  CHECK_ERROR(io::decode_image(bad), ErrorCode::truncated);
}

TEST_CASE("spectra CSV parses into a chromophore by wavelength matrix") {
  std::string csv = "wavelength_nm,water,fat,oxyhemoglobin,deoxyhemoglobin\n";
  const auto wl = default_wavelengths_nm();
  REQUIRE(wl.size() == 29);
  for (std::size_t w = 0; w < wl.size(); ++w)
    csv += std::to_string(static_cast<int>(wl[w])) + "," + std::to_string(0.1 + w) + "," +
           std::to_string(1.0 + w) + "," + std::to_string(2.0 + w) + "," +
           std::to_string(3.0 + w) + "\n";
  const SpectraMatrix h = io::parse_spectra(csv);
  CHECK(h.n_chromophores() == 4);
  CHECK(h.n_wavelengths() == 29);
  CHECK(h.chromophores[2] == "oxyhemoglobin");
  CHECK(h.at(1, 3) == doctest::Approx(4.0));
  CHECK(h.wavelengths_nm.back() == 980.0);

  const oracle::TempDir dir("spectra");
  io::write_spectra(h, dir.path / "h.csv");
  const SpectraMatrix back = io::read_spectra(dir.path / "h.csv");
  CHECK(back.absorption == h.absorption);
  CHECK(back.chromophores == h.chromophores);
}

TEST_CASE("spectra validation rejects negative entries and bad layouts") {
  CHECK_ERROR(io::parse_spectra("wavelength_nm,a,b\n700,1,-0.5\n710,1,1\n"), ErrorCode::invalid_argument);
  CHECK_ERROR(io::parse_spectra("wavelength_nm,a,b\n700,0,1\n710,0,1\n"), ErrorCode::invalid_argument);
  CHECK_ERROR(io::parse_spectra("wavelength_nm,a\n700,1,2\n"), ErrorCode::parse);
  CHECK_ERROR(io::parse_spectra("nm,a\n700,1\n"), ErrorCode::parse);
  CHECK_ERROR(io::parse_spectra("wavelength_nm,a\n710,1\n700,1\n"), ErrorCode::invalid_argument);
}

TEST_CASE("multispectral stack requires matching images and increasing wavelengths") {
  ImageGrid a, b;
  a.nx = a.ny = b.nx = 8;
  b.ny = 9;
  MultispectralStack stack{{Image(a), Image(b)}, {700, 710}};
  CHECK_ERROR(stack.validate(), ErrorCode::dimension_mismatch);
  stack.images[1] = Image(a);
  stack.wavelengths_nm = {710, 700};
  CHECK_ERROR(stack.validate(), ErrorCode::invalid_argument);
  stack.wavelengths_nm = {700};
  CHECK_ERROR(stack.validate(), ErrorCode::dimension_mismatch);
  stack.wavelengths_nm = {700, 710};
  CHECK_NOTHROW(stack.validate());
}

TEST_CASE("clamp_negatives zeroes only negative pixels") {
  ImageGrid g;
  g.nx = 2;
  g.ny = 1;
  const Image c = clamp_negatives(Image(g, {-1.5f, 2.5f}));
  CHECK(c.at(0, 0) == 0.0f);
  CHECK(c.at(0, 1) == 2.5f);
}
