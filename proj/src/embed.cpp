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

#include "qhbm/embed.hpp"

#include <algorithm>
#include <cmath>

#include "qhbm/ebm.hpp"
#include "qhbm/errors.hpp"

namespace qhbm {

std::string to_string(Label label) {
  switch (label) {
    case Label::background: return "background";
    case Label::signal: return "signal";
    case Label::unlabelled: return "unlabelled";
  }
  return "unlabelled";
}

Label parse_label(const std::string& text) {
  if (text == "background" || text == "0") return Label::background;
  if (text == "signal" || text == "1") return Label::signal;
  if (text == "unlabelled" || text == "-1" || text.empty()) return Label::unlabelled;
  throw DataError("unknown label '" + text + "'");
}

PixelImage crop_and_pool(const PixelImage& raw, const PreprocessOptions& options) {
  if (options.crop < 0 || options.pool < 1)
    throw ShapeError("preprocess: crop must be >= 0 and pool >= 1");
  int rows = raw.height() - 2 * options.crop;
  int cols = raw.width() - 2 * options.crop;
  if (rows < options.pool || cols < options.pool)
    throw ShapeError("preprocess: crop exceeds image size");
  if (rows % options.pool != 0 || cols % options.pool != 0) {
    if (!options.trim_remainder)
      throw ShapeError("preprocess: cropped size is not divisible by the pool size");
    rows -= rows % options.pool;
    cols -= cols % options.pool;
  }
  const auto cropped = raw.intensities.block(options.crop, options.crop, rows, cols);
  const int out_rows = rows / options.pool;
  const int out_cols = cols / options.pool;
  PixelImage out;
  out.label = raw.label;
  out.weight = raw.weight;
  out.intensities.resize(out_rows, out_cols);
  for (int r = 0; r < out_rows; ++r)
    for (int c = 0; c < out_cols; ++c)
      out.intensities(r, c) =
          cropped.block(r * options.pool, c * options.pool, options.pool, options.pool).mean();
  return out;
}

Standardiser::Standardiser(double max_intensity) : max_(max_intensity) {
  if (!(max_intensity > 0.0) || !std::isfinite(max_intensity))
    throw DataError("Standardiser: fitted maximum must be positive and finite");
}

Standardiser Standardiser::fit(std::span<const PixelImage> images) {
  if (images.empty()) throw DataError("Standardiser: no calibration images");
  double m = 0.0;
  for (const auto& img : images) m = std::max(m, img.intensities.maxCoeff());
  return Standardiser(m);
}

double Standardiser::scale(double raw) const {
  return std::clamp(raw * std::numbers::pi / max_, 0.0, std::numbers::pi);
}

double Standardiser::unscale(double value) const { return value * max_ / std::numbers::pi; }

PixelImage Standardiser::apply(const PixelImage& image) const {
  PixelImage out = image;
  out.intensities = image.intensities.unaryExpr([this](double x) { return scale(x); });
  return out;
}

PixelImage preprocess(const PixelImage& raw, const PreprocessOptions& options,
                      const Standardiser& standardiser) {
  return standardiser.apply(crop_and_pool(raw, options));
}

PixelLayout central_layout(int width, int height, int n_qubits) {
  if (n_qubits != 2 && n_qubits != 4 && n_qubits != 6 && n_qubits != 8)
    throw ConfigError("central_layout: supported qubit counts are 2, 4, 6 and 8");
  const int r0 = height / 2 - 1;
  const int c0 = width / 2 - 1;
  const int first_row = n_qubits >= 6 ? r0 - 1 : r0;
  const int last_row = n_qubits == 2 ? r0 : (n_qubits == 8 ? r0 + 2 : r0 + 1);
  if (width < 2 || first_row < 0 || last_row >= height)
    throw ShapeError("central_layout: image too small for the requested layout");
  PixelLayout layout;
  for (int r = first_row; r <= last_row; ++r)
    for (int c = c0; c <= c0 + 1; ++c) layout.push_back(r * width + c);
  return layout;
}

PixelProbabilities select_pixels(const PixelImage& image, const PixelLayout& layout) {
  check_shape(!layout.empty() && static_cast<int>(layout.size()) <= kMaxQubits,
              "select_pixels: layout must select between 1 and 10 pixels");
  PixelProbabilities out;
  out.label = image.label;
  out.weight = image.weight;
  out.probs.resize(static_cast<Eigen::Index>(layout.size()));
  const int n_pixels = image.width() * image.height();
  for (std::size_t k = 0; k < layout.size(); ++k) {
    if (layout[k] < 0 || layout[k] >= n_pixels)
      throw ShapeError("select_pixels: pixel index out of range");
    out.probs[Eigen::Index(k)] = logistic(image.pixel(layout[k]));
  }
  return out;
}

Eigen::VectorXd intensities_from_probabilities(const Eigen::VectorXd& probs) {
  return probs.unaryExpr([](double p) {
    const double q = std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
    return std::log(q / (1.0 - q));
  });
}

std::vector<BasisIndex> bernoulli_embed_indices(const PixelProbabilities& probs,
                                                int n_samples, Rng& rng) {
  check_shape(n_samples >= 1, "bernoulli_embed: n_samples must be >= 1");
  const int n = probs.size();
  check_shape(n >= 1 && n <= kMaxQubits, "bernoulli_embed: bad qubit count");
  std::vector<double> p(static_cast<std::size_t>(n));
  for (int q = 0; q < n; ++q)
    p[static_cast<std::size_t>(q)] =
        std::clamp(probs.probs[q], kProbabilityFloor, 1.0 - kProbabilityFloor);
  std::vector<BasisIndex> out(static_cast<std::size_t>(n_samples));
  for (auto& idx : out) {
    BasisIndex z = 0;
    for (int q = 0; q < n; ++q) z = (z << 1) | (uniform01(rng) < p[std::size_t(q)] ? 1U : 0U);
    idx = z;
  }
  return out;
}

std::vector<SpinConfig> bernoulli_embed(const PixelProbabilities& probs, int n_samples,
                                        Rng& rng) {
  std::vector<SpinConfig> out;
  for (BasisIndex z : bernoulli_embed_indices(probs, n_samples, rng))
    out.push_back(SpinConfig::from_index(z, probs.size()));
  return out;
}

namespace {

std::vector<double> normalised_weights(std::span<const PixelProbabilities> images,
                                       std::span<const double> weights) {
  if (images.empty()) throw DataError("dataset_mixed_state: empty dataset");
  check_shape(weights.size() == images.size(),
              "dataset_mixed_state: one weight per image required");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw DataError("dataset_mixed_state: weights must be finite and >= 0");
    total += w;
  }
  if (total <= 0.0) throw DataError("dataset_mixed_state: all weights are zero");
  std::vector<double> out(weights.begin(), weights.end());
  for (auto& w : out) w /= total;
  const int n = images.front().size();
  for (const auto& img : images)
    check_shape(img.size() == n, "dataset_mixed_state: images differ in qubit count");
  return out;
}

template <typename DrawFn>
Eigen::MatrixXcd mixed_state_from_draws(std::span<const PixelProbabilities> images,
                                        std::span<const double> weights, int n_samples,
                                        DrawFn&& draw) {
  const auto alpha = normalised_weights(images, weights);
  const int n = images.front().size();
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis_dim(n)));
  for (std::size_t d = 0; d < images.size(); ++d) {
    const auto draws = draw(d, images[d]);
    const double w = alpha[d] / n_samples;
    for (BasisIndex z : draws) diag[z] += w;
  }
  return diag.cast<std::complex<double>>().asDiagonal();
}

}  // namespace

Eigen::MatrixXcd dataset_mixed_state(std::span<const PixelProbabilities> images,
                                     std::span<const double> weights, int n_samples,
                                     std::uint64_t seed) {
  return mixed_state_from_draws(images, weights, n_samples,
                                [&](std::size_t d, const PixelProbabilities& p) {
                                  Rng rng = make_rng(seed, "embedding", d);
                                  return bernoulli_embed_indices(p, n_samples, rng);
                                });
}

Eigen::MatrixXcd dataset_mixed_state(std::span<const PixelProbabilities> images,
                                     std::span<const double> weights, int n_samples,
                                     Rng& rng) {
  return mixed_state_from_draws(images, weights, n_samples,
                                [&](std::size_t, const PixelProbabilities& p) {
                                  return bernoulli_embed_indices(p, n_samples, rng);
                                });
}

Eigen::VectorXd product_distribution(const Eigen::VectorXd& probs) {
  const int n = static_cast<int>(probs.size());
  Eigen::VectorXd out(static_cast<Eigen::Index>(basis_dim(n)));
  for (Eigen::Index z = 0; z < out.size(); ++z) {
    double p = 1.0;
    for (int q = 0; q < n; ++q)
      p *= qubit_value(static_cast<BasisIndex>(z), n, q) ? probs[q] : 1.0 - probs[q];
    out[z] = p;
  }
  return out;
}

Eigen::VectorXd exact_mixed_state_diagonal(std::span<const PixelProbabilities> images,
                                           std::span<const double> weights) {
  const auto alpha = normalised_weights(images, weights);
  const int n = images.front().size();
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis_dim(n)));
  for (std::size_t d = 0; d < images.size(); ++d)
    diag += alpha[d] * product_distribution(images[d].probs);
  return diag;
}

namespace {

void add_blob(Eigen::MatrixXd& canvas, double row, double col, double width, double energy) {
  // Integrated Gaussian normalised over the canvas so the blob deposits
  // `energy` in total even when partially clipped at the border.
  Eigen::MatrixXd blob(canvas.rows(), canvas.cols());
  for (Eigen::Index r = 0; r < canvas.rows(); ++r)
    for (Eigen::Index c = 0; c < canvas.cols(); ++c) {
      const double dr = (static_cast<double>(r) - row) / width;
      const double dc = (static_cast<double>(c) - col) / width;
      blob(r, c) = std::exp(-0.5 * (dr * dr + dc * dc));
    }
  const double total = blob.sum();
  if (total > 0.0) canvas += (energy / total) * blob;
}

}  // namespace

std::vector<PixelImage> synth_toy_jets(int n_events, Label kind, int grid, Rng& rng) {
  if (grid < 4) throw ShapeError("synth_toy_jets: grid must be >= 4");
  if (n_events < 0) throw ShapeError("synth_toy_jets: negative event count");
  if (kind == Label::unlabelled) throw ShapeError("synth_toy_jets: kind must be signal or background");

  std::normal_distribution<double> normal(0.0, 1.0);
  std::exponential_distribution<double> noise(1.0);
  const double centre = (grid - 1) / 2.0;
  const double g = grid;

  std::vector<PixelImage> events;
  events.reserve(static_cast<std::size_t>(n_events));
  for (int e = 0; e < n_events; ++e) {
    PixelImage img;
    img.label = kind;
    img.intensities = Eigen::MatrixXd::Zero(grid, grid);
    const double pt = 600.0 + 25.0 * normal(rng);
    if (kind == Label::background) {
      // One hard core; a soft splash carries a small share of the energy.
      const double frac = 0.85 + 0.05 * normal(rng);
      add_blob(img.intensities, centre + 0.01 * g * normal(rng),
               centre + 0.01 * g * normal(rng), 0.05 * g, frac * pt);
      add_blob(img.intensities, centre + 0.04 * g * normal(rng),
               centre + 0.04 * g * normal(rng), 0.12 * g, (1.0 - frac) * pt);
    } else {
      // Leading prong at the centre, the others up and to the lower right,
      // rotated together by a small random angle.
      const double rot = 0.12 * normal(rng);
      double f1 = 0.40 + 0.04 * normal(rng);
      double f2 = 0.32 + 0.04 * normal(rng);
      f1 = std::clamp(f1, 0.2, 0.6);
      f2 = std::clamp(f2, 0.15, 0.45);
      const double f3 = std::max(0.05, 1.0 - f1 - f2);
      const double width = 0.04 * g;
      add_blob(img.intensities, centre + 0.01 * g * normal(rng),
               centre + 0.01 * g * normal(rng), width, f1 * pt);
      const double d2 = 0.10 * g * (1.0 + 0.08 * normal(rng));
      const double a2 = -std::numbers::pi / 2 + rot;  // straight up
      add_blob(img.intensities, centre + d2 * std::sin(a2), centre + d2 * std::cos(a2), width,
               f2 * pt);
      const double d3 = 0.12 * g * (1.0 + 0.08 * normal(rng));
      const double a3 = std::numbers::pi / 5 + rot;  // lower right
      add_blob(img.intensities, centre + d3 * std::sin(a3), centre + d3 * std::cos(a3), width,
               f3 * pt);
    }
    // Sparse soft noise.
    for (Eigen::Index r = 0; r < img.intensities.rows(); ++r)
      for (Eigen::Index c = 0; c < img.intensities.cols(); ++c)
        if (uniform01(rng) < 0.1) img.intensities(r, c) += 0.5 * noise(rng);
    events.push_back(std::move(img));
  }
  return events;
}

}  // namespace qhbm
