// Copyright 2026 The QHBM Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qhbm/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "qhbm/errors.hpp"
#include "qhbm/rng.hpp"

namespace qhbm {

namespace {

constexpr std::size_t kMagicLength = sizeof(kImageMagic) - 1;

template <typename T>
T to_little(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    std::reverse(bytes, bytes + sizeof(T));
    std::memcpy(&value, bytes, sizeof(T));
  }
  return value;
}

template <typename T>
void write_le(std::ostream& out, T value) {
  value = to_little(value);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const fs::path& path) {
  T value;
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
    throw DataError("truncated image container: " + path.string());
  return to_little(value);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace

fs::path sidecar_path(const fs::path& path) {
  fs::path p = path;
  p += ".json";
  return p;
}

void write_image_container(const fs::path& path, std::span<const PixelImage> images,
                           const nlohmann::json& extra) {
  std::uint32_t width = 0, height = 0;
  if (!images.empty()) {
    width = static_cast<std::uint32_t>(images.front().width());
    height = static_cast<std::uint32_t>(images.front().height());
  } else if (extra.contains("width") && extra.contains("height")) {
    width = extra["width"].get<std::uint32_t>();
    height = extra["height"].get<std::uint32_t>();
  }
  for (const auto& img : images)
    check_shape(img.width() == static_cast<int>(width) && img.height() == static_cast<int>(height),
                "write_image_container: images differ in shape");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(kImageMagic, kMagicLength);
  write_le(out, static_cast<std::uint32_t>(images.size()));
  write_le(out, width);
  write_le(out, height);
  for (const auto& img : images)
    for (Eigen::Index r = 0; r < img.intensities.rows(); ++r)
      for (Eigen::Index c = 0; c < img.intensities.cols(); ++c)
        write_le(out, static_cast<float>(img.intensities(r, c)));
  if (!out) throw DataError("failed writing " + path.string());

  nlohmann::json side = extra.is_object() ? extra : nlohmann::json::object();
  side["format"] = "QHBIMG1";
  side["count"] = images.size();
  side["width"] = width;
  side["height"] = height;
  nlohmann::json labels = nlohmann::json::array(), weights = nlohmann::json::array();
  for (const auto& img : images) {
    labels.push_back(to_string(img.label));
    weights.push_back(img.weight);
  }
  side["labels"] = labels;
  side["weights"] = weights;
  std::ofstream sc(sidecar_path(path));
  if (!sc) throw DataError("cannot write " + sidecar_path(path).string());
  sc << side.dump(2) << '\n';
}

ImageDataset read_image_container(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  char magic[kMagicLength];
  if (!in.read(magic, kMagicLength) || std::memcmp(magic, kImageMagic, kMagicLength) != 0)
    throw DataError("not a QHBIMG1 container: " + path.string());
  const auto count = read_le<std::uint32_t>(in, path);
  const auto width = read_le<std::uint32_t>(in, path);
  const auto height = read_le<std::uint32_t>(in, path);

  ImageDataset ds;
  ds.images.resize(count);
  for (auto& img : ds.images) {
    img.intensities.resize(height, width);
    for (std::uint32_t r = 0; r < height; ++r)
      for (std::uint32_t c = 0; c < width; ++c)
        img.intensities(r, c) = read_le<float>(in, path);
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw DataError("trailing bytes in image container: " + path.string());

  const fs::path side = sidecar_path(path);
  if (fs::exists(side)) {
    std::ifstream sc(side);
    try {
      ds.metadata = nlohmann::json::parse(sc);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("bad sidecar " + side.string() + ": " + e.what());
    }
    const auto& labels = ds.metadata.value("labels", nlohmann::json::array());
    const auto& weights = ds.metadata.value("weights", nlohmann::json::array());
    if (!labels.empty() && labels.size() != count)
      throw DataError("sidecar label count differs from container: " + side.string());
    if (!weights.empty() && weights.size() != count)
      throw DataError("sidecar weight count differs from container: " + side.string());
    for (std::size_t i = 0; i < count; ++i) {
      if (!labels.empty()) ds.images[i].label = parse_label(labels[i].get<std::string>());
      if (!weights.empty()) ds.images[i].weight = weights[i].get<double>();
    }
    ds.metadata.erase("labels");
    ds.metadata.erase("weights");
  } else {
    ds.metadata = nlohmann::json::object();
  }
  ds.metadata["width"] = width;
  ds.metadata["height"] = height;
  return ds;
}

ImageDataset read_image_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  ImageDataset ds;
  ds.metadata = nlohmann::json::object();
  int width = 0, height = 0;
  std::string line;
  bool first_data = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string tok;
      while (meta >> tok) {
        if (tok.rfind("width=", 0) == 0) width = std::stoi(tok.substr(6));
        if (tok.rfind("height=", 0) == 0) height = std::stoi(tok.substr(7));
      }
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() < 3) throw DataError("CSV row too short in " + path.string());
    double probe;
    if (first_data && !parse_double(cells.front(), probe)) {
      first_data = false;  // header row
      continue;
    }
    first_data = false;
    const std::size_t n_pixels = cells.size() - 2;
    if (width == 0 || height == 0) {
      const auto side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_pixels))));
      if (static_cast<std::size_t>(side * side) != n_pixels)
        throw DataError("CSV image is not square and no width/height comment: " + path.string());
      width = height = side;
    }
    if (n_pixels != static_cast<std::size_t>(width * height))
      throw DataError("CSV row pixel count differs from width*height in " + path.string());
    PixelImage img;
    img.intensities.resize(height, width);
    for (std::size_t k = 0; k < n_pixels; ++k) {
      double v;
      if (!parse_double(cells[k], v)) throw DataError("bad number in " + path.string());
      img.intensities(static_cast<Eigen::Index>(k) / width, static_cast<Eigen::Index>(k) % width) = v;
    }
    img.label = parse_label(cells[n_pixels]);
    if (!parse_double(cells[n_pixels + 1], img.weight))
      throw DataError("bad weight in " + path.string());
    ds.images.push_back(std::move(img));
  }
  ds.metadata["width"] = width;
  ds.metadata["height"] = height;
  return ds;
}

void write_image_csv(const fs::path& path, std::span<const PixelImage> images) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  if (!images.empty())
    out << "# width=" << images.front().width() << " height=" << images.front().height() << '\n';
  out.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& img : images) {
    for (Eigen::Index r = 0; r < img.intensities.rows(); ++r)
      for (Eigen::Index c = 0; c < img.intensities.cols(); ++c) out << img.intensities(r, c) << ',';
    out << to_string(img.label) << ',' << img.weight << '\n';
  }
}

ImageDataset read_dataset(const fs::path& path) {
  if (!fs::exists(path)) throw DataError("dataset not found: " + path.string());
  if (path.extension() == ".csv") return read_image_csv(path);
  return read_image_container(path);
}

CsvWriter::CsvWriter(const fs::path& path, const std::string& provenance,
                     const std::vector<std::string>& columns)
    : out_(path) {
  if (!out_) throw DataError("cannot write " + path.string());
  out_ << "# " << provenance << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format(values[i]);
  out_ << '\n';
}

void CsvWriter::row_labelled(const std::vector<std::string>& labels,
                             const std::vector<double>& values) {
  std::size_t i = 0;
  for (const auto& l : labels) out_ << (i++ ? "," : "") << l;
  for (double v : values) out_ << (i++ ? "," : "") << format(v);
  out_ << '\n';
}

std::string CsvWriter::format(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string provenance_line(const nlohmann::json& resolved_config) {
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(fnv1a64(resolved_config.dump())));
  return std::string("qhbm ") + QHBM_VERSION + " config=" + hex;
}

}  // namespace qhbm
