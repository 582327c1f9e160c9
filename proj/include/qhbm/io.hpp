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

#ifndef QHBM_IO_HPP
#define QHBM_IO_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "qhbm/embed.hpp"

namespace qhbm {

namespace fs = std::filesystem;

// Image container layout (all integers little-endian):
//   "QHBIMG1"              7 bytes
//   count, width, height   u32 each
//   count * height * width float32, row-major per image
// Labels, weights and preprocessing parameters live in a JSON sidecar at
// <path>.json.
inline constexpr char kImageMagic[] = "QHBIMG1";

struct ImageDataset {
  std::vector<PixelImage> images;
  nlohmann::json metadata;  // sidecar content (labels/weights stripped)
};

/// Writes the container and its sidecar. `extra` is merged into the sidecar.
void write_image_container(const fs::path& path, std::span<const PixelImage> images,
                           const nlohmann::json& extra = nlohmann::json::object());

/// Reads a container; labels/weights default to unlabelled/1 without a sidecar.
ImageDataset read_image_container(const fs::path& path);

/// CSV alternative: one image per row, flattened row-major, followed by
/// label and weight columns. Lines starting with '#' are comments; a
/// "# width=W height=H" comment fixes the shape, otherwise images are
/// assumed square. A first row that does not parse as numbers is a header.
ImageDataset read_image_csv(const fs::path& path);

/// Dispatches on extension: .csv -> read_image_csv, anything else -> container.
ImageDataset read_dataset(const fs::path& path);

void write_image_csv(const fs::path& path, std::span<const PixelImage> images);

fs::path sidecar_path(const fs::path& path);

/// CSV output with a provenance comment and a header row.
class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::string& provenance,
            const std::vector<std::string>& columns);

  template <typename... Ts>
  void row(const Ts&... values) {
    std::size_t i = 0;
    ((out_ << (i++ ? "," : "") << format(values)), ...);
    out_ << '\n';
  }

  void row(const std::vector<double>& values);

  /// Text cells followed by numeric ones.
  void row_labelled(const std::vector<std::string>& labels, const std::vector<double>& values);

 private:
  static std::string format(double v);
  static std::string format(const std::string& v) { return v; }
  static std::string format(const char* v) { return v; }
  template <typename T>
    requires std::is_integral_v<T>
  static std::string format(T v) { return std::to_string(v); }

  std::ofstream out_;
};

/// "qhbm <version> config=<16 hex digits>".
std::string provenance_line(const nlohmann::json& resolved_config);

}  // namespace qhbm

#endif
