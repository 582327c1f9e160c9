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

#ifndef QHBM_EMBED_HPP
#define QHBM_EMBED_HPP

#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qhbm/rng.hpp"
#include "qhbm/spin.hpp"

namespace qhbm {

enum class Label { background = 0, signal = 1, unlabelled = -1 };

std::string to_string(Label label);
Label parse_label(const std::string& text);

/// Calorimeter-style image. Row r is the vertical axis (top row first),
/// column c the horizontal one; flat pixel index is r * width + c.
struct PixelImage {
  Eigen::MatrixXd intensities;  // height x width
  Label label = Label::unlabelled;
  double weight = 1.0;

  int width() const { return static_cast<int>(intensities.cols()); }
  int height() const { return static_cast<int>(intensities.rows()); }
  double pixel(int flat) const { return intensities(flat / width(), flat % width()); }
};

struct PreprocessOptions {
  int crop = 12;  // pixels removed from each side of each axis
  int pool = 2;   // pool x pool block means
  // Drop the leftover rows/columns (high-index side) when the cropped size
  // is not a multiple of `pool`. When false that case is an error.
  bool trim_remainder = true;
};

/// Symmetric crop followed by non-overlapping block averaging.
PixelImage crop_and_pool(const PixelImage& raw, const PreprocessOptions& options);

/// Linear map of intensities onto [0, pi] against a fitted maximum.
class Standardiser {
 public:
  Standardiser() = default;
  explicit Standardiser(double max_intensity);

  /// Fits on the largest pixel across `images`.
  static Standardiser fit(std::span<const PixelImage> images);

  double max_intensity() const { return max_; }
  double scale(double raw) const;    // clipped to [0, pi]
  double unscale(double std) const;  // inverse of scale on [0, pi]
  PixelImage apply(const PixelImage& image) const;

 private:
  double max_ = 1.0;
};

/// crop_and_pool followed by standardisation.
PixelImage preprocess(const PixelImage& raw, const PreprocessOptions& options,
                      const Standardiser& standardiser);

/// Flat pixel indices; list order is qubit order.
using PixelLayout = std::vector<int>;

/// Row-major block around the image centre: 4 = central 2x2, 6 adds the
/// two pixels above it, 8 also the two below. 2 is the top row of the 2x2.
PixelLayout central_layout(int width, int height, int n_qubits);

/// Per-qubit probabilities of reading 1.
struct PixelProbabilities {
  Eigen::VectorXd probs;
  Label label = Label::unlabelled;
  double weight = 1.0;

  int size() const { return static_cast<int>(probs.size()); }
};

inline constexpr double kProbabilityFloor = 1e-6;

/// logistic(intensity) of each selected pixel, in layout order.
PixelProbabilities select_pixels(const PixelImage& image, const PixelLayout& layout);

/// Inverse of the logistic map (after clamping to [1e-6, 1 - 1e-6]).
Eigen::VectorXd intensities_from_probabilities(const Eigen::VectorXd& probs);

/// Independent Bernoulli draw per qubit, n_samples times.
std::vector<SpinConfig> bernoulli_embed(const PixelProbabilities& probs, int n_samples,
                                        Rng& rng);

/// Same draws as bernoulli_embed, returned as basis indices.
std::vector<BasisIndex> bernoulli_embed_indices(const PixelProbabilities& probs,
                                                int n_samples, Rng& rng);

/// Sampled dataset mixed state sum_d (a_d / sum a) (1/N) sum_i |p_i><p_i|.
/// Draws for image d come from the substream derive_seed(seed, "embedding", d).
Eigen::MatrixXcd dataset_mixed_state(std::span<const PixelProbabilities> images,
                                     std::span<const double> weights, int n_samples,
                                     std::uint64_t seed);

/// Same construction drawing sequentially from one generator.
Eigen::MatrixXcd dataset_mixed_state(std::span<const PixelProbabilities> images,
                                     std::span<const double> weights, int n_samples,
                                     Rng& rng);

/// N -> infinity limit of dataset_mixed_state: the weighted mixture of
/// product Bernoulli distributions, as a diagonal of length 2^n.
Eigen::VectorXd exact_mixed_state_diagonal(std::span<const PixelProbabilities> images,
                                           std::span<const double> weights);

/// Product Bernoulli distribution over basis states for one probability vector.
Eigen::VectorXd product_distribution(const Eigen::VectorXd& probs);

/// Toy jet images on a grid x grid canvas. Background events carry one
/// central energy blob, signal events three displaced prongs.
std::vector<PixelImage> synth_toy_jets(int n_events, Label kind, int grid, Rng& rng);

}  // namespace qhbm

#endif
