#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "mvmae/render.hpp"
#include "mvmae/rng.hpp"

namespace mvmae {

/// Which channels a masked token loses (and which channels the MAE decoder
/// reconstructs): only RGB, or all ten.
enum class MaskStrategy { RgbOnly = 0, AllChannels = 1 };

inline int strategy_channels(MaskStrategy s) { return s == MaskStrategy::RgbOnly ? 3 : 10; }

inline const char* strategy_name(MaskStrategy s) {
  return s == MaskStrategy::RgbOnly ? "rgb" : "all";
}

inline MaskStrategy parse_strategy(const std::string& s) {
  if (s == "rgb" || s == "rgb_only") return MaskStrategy::RgbOnly;
  if (s == "all" || s == "all_channels") return MaskStrategy::AllChannels;
  throw std::runtime_error("unknown masking strategy '" + s + "' (expected 'rgb' or 'all')");
}

/// Per-view patch tokens: row k holds patch (k / grid_cols, k % grid_cols)
/// flattened channel-last in row-major pixel order.
template <class Scalar>
struct TokenGrid {
  ViewId view_id = ViewId::Top;
  int patch = 0;
  int grid_rows = 0;
  int grid_cols = 0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> tokens;  // N x (P*P*10)

  int count() const { return grid_rows * grid_cols; }
};

/// The exact per-view token mask for one sample.
struct MaskPlan {
  MaskStrategy strategy = MaskStrategy::RgbOnly;
  double ratio = 0.0;
  std::uint64_t seed = 0;
  int tokens_per_view = 0;
  std::array<std::vector<std::uint8_t>, kViewCount> view_masks;

  int masked_per_view() const {
    int n = 0;
    for (auto f : view_masks[0]) n += f != 0;
    return n;
  }
};

template <class Scalar>
struct MaskedViews {
  std::array<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>, kViewCount> tokens;
  std::array<std::vector<std::uint8_t>, kViewCount> flags;
};

inline long round_half_up(double x) { return static_cast<long>(std::floor(x + 0.5)); }

template <class Scalar>
TokenGrid<Scalar> tokenize(const ViewImage<Scalar>& img, int patch) {
  if (patch < 1 || img.width % patch != 0 || img.height % patch != 0) {
    std::ostringstream os;
    os << "tokenize: patch size " << patch << " does not divide image " << img.width << "x"
       << img.height;
    throw std::runtime_error(os.str());
  }
  TokenGrid<Scalar> grid;
  grid.patch = patch;
  grid.grid_cols = img.width / patch;
  grid.grid_rows = img.height / patch;
  const int n = grid.count();
  const int dim = patch * patch * kChannels;
  grid.tokens.resize(n, dim);
  for (int k = 0; k < n; ++k) {
    const int prow = k / grid.grid_cols;
    const int pcol = k % grid.grid_cols;
    for (int py = 0; py < patch; ++py) {
      const int row = prow * patch + py;
      for (int px = 0; px < patch; ++px) {
        const int col = pcol * patch + px;
        const int base = (py * patch + px) * kChannels;
        for (int ch = 0; ch < kChannels; ++ch)
          grid.tokens(k, base + ch) = img.px(static_cast<Eigen::Index>(row) * img.width + col, ch);
      }
    }
  }
  return grid;
}

/// Inverse of tokenize restricted to `channels` reconstructed channels
/// (3 for rgb_only, 10 for all_channels). Returns one H x W plane per channel.
template <class Scalar>
std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> detokenize(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& predictions, int grid_rows,
    int grid_cols, int patch, int channels) {
  const int n = grid_rows * grid_cols;
  const int dim = patch * patch * channels;
  if (predictions.rows() != n || predictions.cols() != dim) {
    std::ostringstream os;
    os << "detokenize: expected " << n << "x" << dim << " predictions, got " << predictions.rows()
       << "x" << predictions.cols();
    throw std::runtime_error(os.str());
  }
  std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> planes(
      channels, Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>(grid_rows * patch,
                                                                      grid_cols * patch));
  for (int k = 0; k < n; ++k) {
    const int prow = k / grid_cols;
    const int pcol = k % grid_cols;
    for (int py = 0; py < patch; ++py)
      for (int px = 0; px < patch; ++px) {
        const int base = (py * patch + px) * channels;
        for (int ch = 0; ch < channels; ++ch)
          planes[ch](prow * patch + py, pcol * patch + px) = predictions(k, base + ch);
      }
  }
  return planes;
}

/// Selects exactly round_half_up(ratio*N) token indices per view, uniformly,
/// via partial Fisher-Yates. Stream per view is seed ^ view_index.
inline MaskPlan sample_mask(int tokens_per_view, double ratio, MaskStrategy strategy,
                            std::uint64_t seed) {
  if (ratio < 0.0 || ratio >= 1.0) throw std::runtime_error("mask ratio must be in [0,1)");
  MaskPlan plan;
  plan.strategy = strategy;
  plan.ratio = ratio;
  plan.seed = seed;
  plan.tokens_per_view = tokens_per_view;
  const long n_mask = round_half_up(ratio * tokens_per_view);
  for (int v = 0; v < kViewCount; ++v) {
    Rng rng(seed ^ static_cast<std::uint64_t>(v));
    std::vector<int> order(tokens_per_view);
    for (int i = 0; i < tokens_per_view; ++i) order[i] = i;
    auto& mask = plan.view_masks[v];
    mask.assign(tokens_per_view, 0);
    for (long i = 0; i < n_mask; ++i) {
      const long j = i + static_cast<long>(rng.uniform_int(tokens_per_view - i));
      std::swap(order[i], order[j]);
      mask[order[i]] = 1;
    }
  }
  return plan;
}

/// Zeroes the masked tokens' content (RGB entries or whole token, by
/// strategy). All tokens stay in the sequence; the flags travel alongside so
/// the encoder can add its mask-indicator embedding.
template <class Scalar>
MaskedViews<Scalar> apply_mask(const std::array<TokenGrid<Scalar>, kViewCount>& grids,
                               const MaskPlan& plan) {
  MaskedViews<Scalar> out;
  for (int v = 0; v < kViewCount; ++v) {
    const auto& grid = grids[v];
    if (grid.count() != plan.tokens_per_view ||
        static_cast<int>(plan.view_masks[v].size()) != grid.count()) {
      std::ostringstream os;
      os << "apply_mask: plan for " << plan.tokens_per_view << " tokens does not match grid with "
         << grid.count() << " tokens (view " << v << ")";
      throw std::runtime_error(os.str());
    }
    out.tokens[v] = grid.tokens;
    out.flags[v] = plan.view_masks[v];
    for (int k = 0; k < grid.count(); ++k) {
      if (!plan.view_masks[v][k]) continue;
      if (plan.strategy == MaskStrategy::AllChannels) {
        out.tokens[v].row(k).setZero();
      } else {
        for (Eigen::Index j = 0; j < out.tokens[v].cols(); ++j)
          if (j % kChannels < 3) out.tokens[v](k, j) = Scalar(0);
      }
    }
  }
  return out;
}

}  // namespace mvmae
