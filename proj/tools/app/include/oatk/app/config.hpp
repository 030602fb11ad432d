#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "oatk/filters.hpp"
#include "oatk/geometry.hpp"
#include "oatk/sparsa.hpp"

namespace oatk::app {

/// Everything the CLI and the service need to build operators.
struct EngineConfig {
  ArrayGeometry geometry{};
  ImageGrid image{};
  SosGrid sos_grid{};
  EirSpec eir{};
  MbConfig mb{};
  std::filesystem::path dataset_root = "datasets";

  void validate() const;
};

/// Flat "key = value" text, one entry per line, '#' starts a comment.
/// Keys are dotted (geometry.n_detectors, image.nx, mb.lambda, ...);
/// unknown keys, duplicates and malformed values throw Error(parse).
/// `mb.lambda = auto` leaves lambda unset.
EngineConfig parse_config(std::string_view text);
EngineConfig load_config(const std::filesystem::path& path);

/// Serializes every key, so parse_config(format_config(c)) == c.
std::string format_config(const EngineConfig& config);

/// Config file to use: the explicit path if given, else $OATK_CONFIG,
/// else none (built-in defaults).
std::optional<std::filesystem::path> resolve_config_path(
    const std::optional<std::filesystem::path>& explicit_path);

/// load_config on the resolved path, or defaults.
EngineConfig load_engine_config(const std::optional<std::filesystem::path>& explicit_path);

} // namespace oatk::app
