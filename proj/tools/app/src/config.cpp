#include "oatk/app/config.hpp"

#include <charconv>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "oatk/error.hpp"
#include "oatk/io.hpp"

namespace oatk::app {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::size_t line) {
  fail(ErrorCode::parse, "config line " + std::to_string(line) + ": bad value '" +
                             std::string(value) + "' for " + std::string(key));
}

double to_double(std::string_view key, std::string_view v, std::size_t line) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) bad_value(key, v, line);
  return out;
}

std::size_t to_count(std::string_view key, std::string_view v, std::size_t line) {
  std::size_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) bad_value(key, v, line);
  return out;
}

bool to_bool(std::string_view key, std::string_view v, std::size_t line) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  bad_value(key, v, line);
}

using Setter = std::function<void(EngineConfig&, std::string_view, std::string_view, std::size_t)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"geometry.n_detectors", [](EngineConfig& c, auto k, auto v, auto l) { c.geometry.n_detectors = to_count(k, v, l); }},
      {"geometry.concavity_radius_m", [](EngineConfig& c, auto k, auto v, auto l) { c.geometry.concavity_radius_m = to_double(k, v, l); }},
      {"geometry.angular_coverage_deg", [](EngineConfig& c, auto k, auto v, auto l) { c.geometry.angular_coverage_deg = to_double(k, v, l); }},
      {"geometry.center_x_m", [](EngineConfig& c, auto k, auto v, auto l) { c.geometry.center_of_curvature.x = to_double(k, v, l); }},
      {"geometry.center_y_m", [](EngineConfig& c, auto k, auto v, auto l) { c.geometry.center_of_curvature.y = to_double(k, v, l); }},
      {"geometry.sampling_rate_hz", [](EngineConfig& c, auto k, auto v, auto l) { c.geometry.sampling_rate_hz = to_double(k, v, l); }},
      {"geometry.n_time_samples", [](EngineConfig& c, auto k, auto v, auto l) { c.geometry.n_time_samples = to_count(k, v, l); }},
      {"geometry.t0_offset_samples", [](EngineConfig& c, auto k, auto v, auto l) { c.geometry.t0_offset_samples = to_count(k, v, l); }},
      {"image.nx", [](EngineConfig& c, auto k, auto v, auto l) { c.image.nx = to_count(k, v, l); }},
      {"image.ny", [](EngineConfig& c, auto k, auto v, auto l) { c.image.ny = to_count(k, v, l); }},
      {"image.fov_x_m", [](EngineConfig& c, auto k, auto v, auto l) { c.image.fov_x_m = to_double(k, v, l); }},
      {"image.fov_y_m", [](EngineConfig& c, auto k, auto v, auto l) { c.image.fov_y_m = to_double(k, v, l); }},
      {"sos.min_mps", [](EngineConfig& c, auto k, auto v, auto l) { c.sos_grid.min_mps = to_double(k, v, l); }},
      {"sos.max_mps", [](EngineConfig& c, auto k, auto v, auto l) { c.sos_grid.max_mps = to_double(k, v, l); }},
      {"sos.step_mps", [](EngineConfig& c, auto k, auto v, auto l) { c.sos_grid.step_mps = to_double(k, v, l); }},
      {"eir.enabled", [](EngineConfig& c, auto k, auto v, auto l) { c.eir.enabled = to_bool(k, v, l); }},
      {"eir.center_frequency_hz", [](EngineConfig& c, auto k, auto v, auto l) { c.eir.center_frequency_hz = to_double(k, v, l); }},
      {"eir.fractional_bandwidth", [](EngineConfig& c, auto k, auto v, auto l) { c.eir.fractional_bandwidth = to_double(k, v, l); }},
      {"eir.filter_length_samples", [](EngineConfig& c, auto k, auto v, auto l) { c.eir.filter_length_samples = to_count(k, v, l); }},
      {"mb.lambda", [](EngineConfig& c, auto k, auto v, auto l) {
         if (v == "auto") c.mb.lambda.reset();
         else c.mb.lambda = to_double(k, v, l);
       }},
      {"mb.max_iters", [](EngineConfig& c, auto k, auto v, auto l) { c.mb.max_iters = to_count(k, v, l); }},
      {"mb.rel_obj_tol", [](EngineConfig& c, auto k, auto v, auto l) { c.mb.rel_obj_tol = to_double(k, v, l); }},
      {"mb.monotone", [](EngineConfig& c, auto k, auto v, auto l) { c.mb.monotone = to_bool(k, v, l); }},
      {"mb.shearlet_scales", [](EngineConfig& c, auto k, auto v, auto l) { c.mb.shearlet_scales = to_count(k, v, l); }},
      {"dataset_root", [](EngineConfig& c, auto, auto v, auto) { c.dataset_root = std::string(v); }},
  };
  return table;
}

} // namespace

void EngineConfig::validate() const {
  geometry.validate();
  image.validate();
  sos_grid.validate();
  eir.validate();
  mb.validate();
}

EngineConfig parse_config(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  EngineConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string_view::npos, ErrorCode::parse,
            "config line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    require(it != setters().end(), ErrorCode::parse,
            "config line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    require(seen.insert(std::string(key)).second, ErrorCode::parse,
            "config line " + std::to_string(line_no) + ": duplicate key '" + std::string(key) + "'");
    if (value.empty()) bad_value(key, value, line_no);
    it->second(cfg, key, value, line_no);
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    fail(ErrorCode::parse, std::string("config: ") + e.what());
  }
  return cfg;
}

EngineConfig load_config(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  return parse_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string format_config(const EngineConfig& c) {
  std::ostringstream os;
  os.precision(17);
  const auto b = [](bool v) { return v ? "true" : "false"; };
  os << "geometry.n_detectors = " << c.geometry.n_detectors << '\n'
     << "geometry.concavity_radius_m = " << c.geometry.concavity_radius_m << '\n'
     << "geometry.angular_coverage_deg = " << c.geometry.angular_coverage_deg << '\n'
     << "geometry.center_x_m = " << c.geometry.center_of_curvature.x << '\n'
     << "geometry.center_y_m = " << c.geometry.center_of_curvature.y << '\n'
     << "geometry.sampling_rate_hz = " << c.geometry.sampling_rate_hz << '\n'
     << "geometry.n_time_samples = " << c.geometry.n_time_samples << '\n'
     << "geometry.t0_offset_samples = " << c.geometry.t0_offset_samples << '\n'
     << "image.nx = " << c.image.nx << '\n'
     << "image.ny = " << c.image.ny << '\n'
     << "image.fov_x_m = " << c.image.fov_x_m << '\n'
     << "image.fov_y_m = " << c.image.fov_y_m << '\n'
     << "sos.min_mps = " << c.sos_grid.min_mps << '\n'
     << "sos.max_mps = " << c.sos_grid.max_mps << '\n'
     << "sos.step_mps = " << c.sos_grid.step_mps << '\n'
     << "eir.enabled = " << b(c.eir.enabled) << '\n'
     << "eir.center_frequency_hz = " << c.eir.center_frequency_hz << '\n'
     << "eir.fractional_bandwidth = " << c.eir.fractional_bandwidth << '\n'
     << "eir.filter_length_samples = " << c.eir.filter_length_samples << '\n';
  if (c.mb.lambda) os << "mb.lambda = " << *c.mb.lambda << '\n';
  else os << "mb.lambda = auto\n";
  os << "mb.max_iters = " << c.mb.max_iters << '\n'
     << "mb.rel_obj_tol = " << c.mb.rel_obj_tol << '\n'
     << "mb.monotone = " << b(c.mb.monotone) << '\n'
     << "mb.shearlet_scales = " << c.mb.shearlet_scales << '\n'
     << "dataset_root = " << c.dataset_root.string() << '\n';
  return os.str();
}

std::optional<std::filesystem::path> resolve_config_path(
    const std::optional<std::filesystem::path>& explicit_path) {
  if (explicit_path) return explicit_path;
  if (const char* env = std::getenv("OATK_CONFIG"); env && *env) return std::filesystem::path(env);
  return std::nullopt;
}

EngineConfig load_engine_config(const std::optional<std::filesystem::path>& explicit_path) {
  const auto path = resolve_config_path(explicit_path);
  return path ? load_config(*path) : EngineConfig{};
}

} // namespace oatk::app
