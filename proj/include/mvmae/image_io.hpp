#pragma once

#include <filesystem>
#include <string>

#include "mvmae/render.hpp"

namespace mvmae {

/// Binary PPM (P6) of three channels of a view image. Channels in [-1,1] are
/// remapped to [0,1] first when `signed_range` is set. Top output row is the
/// v-max image row.
void write_ppm(const ViewImage<float>& img, int ch0, int ch1, int ch2, bool signed_range,
               const std::filesystem::path& path);

/// 16-bit big-endian PGM (P5) of the depth channel.
void write_pgm16_depth(const ViewImage<float>& img, const std::filesystem::path& path);

/// Writes the standard dump set for one view:
/// <scene>_<view>_{rgb,xyz,cam}.ppm and <scene>_<view>_depth.pgm.
void dump_view(const ViewImage<float>& img, const std::string& scene, const std::string& view,
               const std::filesystem::path& dir);

/// RGB PPM of several images side by side (all must share W and H).
void write_ppm_strip(const std::vector<ViewImage<float>>& imgs, const std::filesystem::path& path);

}  // namespace mvmae
