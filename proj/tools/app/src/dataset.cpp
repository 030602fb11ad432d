#include "oatk/app/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "oatk/error.hpp"
#include "oatk/io.hpp"

namespace oatk::app {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) {
    if (!cur.empty() && cur.back() == '\r') cur.pop_back();
    out.push_back(cur);
  }
  return out;
}

// file name -> wavelength from an optional manifest.
std::map<std::string, double> manifest_wavelengths(const std::filesystem::path& dir) {
  std::map<std::string, double> out;
  const auto path = dir / "manifest.csv";
  if (!std::filesystem::exists(path)) return out;
  const auto bytes = io::read_file(path);
  const auto lines = split(std::string(bytes.begin(), bytes.end()), '\n');
  if (lines.empty()) return out;
  const auto header = split(lines.front(), ',');
  const auto wl = std::find(header.begin(), header.end(), "wavelength_nm");
  const auto files = std::find(header.begin(), header.end(), "files");
  if (wl == header.end() || files == header.end()) return out;
  const auto wl_col = static_cast<std::size_t>(wl - header.begin());
  const auto f_col = static_cast<std::size_t>(files - header.begin());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split(lines[i], ',');
    if (fields.size() <= std::max(wl_col, f_col) || fields[wl_col].empty()) continue;
    double v = 0.0;
    const auto& text = fields[wl_col];
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    require(ec == std::errc{} && p == text.data() + text.size(), ErrorCode::parse,
            "dataset manifest: bad wavelength '" + text + "' in " + path.string());
    out[split(fields[f_col], ';').front()] = v;
  }
  return out;
}

} // namespace

std::vector<double> Dataset::wavelengths() const {
  std::vector<double> out;
  for (const auto& f : frames)
    if (auto w = f.sinogram.wavelength_nm()) out.push_back(*w);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

DatasetIndex DatasetIndex::load(const std::filesystem::path& root, const ArrayGeometry& arc) {
  DatasetIndex index;
  require(std::filesystem::is_directory(root), ErrorCode::io,
          "dataset root '" + root.string() + "' is not a directory");
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    std::vector<std::filesystem::path> files;
    for (const auto& f : std::filesystem::directory_iterator(entry.path()))
      if (f.is_regular_file() && f.path().extension() == ".oasg") files.push_back(f.path());
    if (files.empty()) continue;
    std::sort(files.begin(), files.end());
    const auto wavelengths = manifest_wavelengths(entry.path());
    Dataset ds{entry.path().filename().string(), {}};
    for (const auto& f : files) {
      Sinogram s = io::read_sinogram(f, arc);
      if (auto it = wavelengths.find(f.filename().string()); it != wavelengths.end())
        s = Sinogram(s.geometry(), std::vector<float>(s.samples().begin(), s.samples().end()),
                     it->second);
      ds.frames.push_back({f, std::move(s)});
    }
    index.add(std::move(ds));
  }
  return index;
}

void DatasetIndex::add(Dataset dataset) {
  const std::string id = dataset.id;
  datasets_.insert_or_assign(id, std::move(dataset));
}

const Dataset* DatasetIndex::find(const std::string& id) const {
  const auto it = datasets_.find(id);
  return it == datasets_.end() ? nullptr : &it->second;
}

const Frame* DatasetIndex::frame(const std::string& id, std::size_t index) const {
  const Dataset* ds = find(id);
  if (!ds || index >= ds->frames.size()) return nullptr;
  return &ds->frames[index];
}

} // namespace oatk::app
