#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oatk/data.hpp"

namespace oatk::app {

struct Frame {
  std::filesystem::path file;
  Sinogram sinogram;
};

struct Dataset {
  std::string id;
  std::vector<Frame> frames;

  /// Distinct wavelengths over the frames, ascending.
  std::vector<double> wavelengths() const;
};

/// Sinogram datasets found under a root: every subdirectory is a dataset
/// whose frames are its *.oasg files in file-name order. An optional
/// manifest.csv with a `wavelength_nm` column and a `files` column (first
/// entry of each row names the sinogram) assigns wavelengths to frames.
/// Loaded once; read-only afterwards.
class DatasetIndex {
public:
  DatasetIndex() = default;
  static DatasetIndex load(const std::filesystem::path& root, const ArrayGeometry& arc);

  void add(Dataset dataset);
  const std::map<std::string, Dataset>& datasets() const noexcept { return datasets_; }
  const Dataset* find(const std::string& id) const;
  const Frame* frame(const std::string& id, std::size_t index) const;

private:
  std::map<std::string, Dataset> datasets_;
};

} // namespace oatk::app
