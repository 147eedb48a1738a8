#include "mvmae/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace mvmae {
namespace {

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(static_cast<int>(std::lround(v * 255.0)), 0, 255));
}

std::ofstream open_binary(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write image: " + path.string());
  return out;
}

}  // namespace

void write_ppm(const ViewImage<float>& img, int ch0, int ch1, int ch2, bool signed_range,
               const std::filesystem::path& path) {
  auto out = open_binary(path);
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  const int chans[3] = {ch0, ch1, ch2};
  std::vector<std::uint8_t> rowbuf(static_cast<std::size_t>(img.width) * 3);
  for (int r = img.height - 1; r >= 0; --r) {  // top output row = v max
    for (int c = 0; c < img.width; ++c) {
      for (int k = 0; k < 3; ++k) {
        double v = img.at(r, c, chans[k]);
        if (signed_range) v = (v + 1.0) * 0.5;
        rowbuf[static_cast<std::size_t>(c) * 3 + k] = to_u8(v);
      }
    }
    out.write(reinterpret_cast<const char*>(rowbuf.data()), static_cast<std::streamsize>(rowbuf.size()));
  }
}

void write_pgm16_depth(const ViewImage<float>& img, const std::filesystem::path& path) {
  auto out = open_binary(path);
  out << "P5\n" << img.width << " " << img.height << "\n65535\n";
  for (int r = img.height - 1; r >= 0; --r) {
    for (int c = 0; c < img.width; ++c) {
      const double v = std::clamp(static_cast<double>(img.at(r, c, kChDepth)), 0.0, 1.0);
      const auto q = static_cast<std::uint16_t>(std::lround(v * 65535.0));
      const char bytes[2] = {static_cast<char>(q >> 8), static_cast<char>(q & 0xff)};  // MSB first
      out.write(bytes, 2);
    }
  }
}

void dump_view(const ViewImage<float>& img, const std::string& scene, const std::string& view,
               const std::filesystem::path& dir) {
  const std::string stem = scene + "_" + view + "_";
  write_ppm(img, kChR, kChG, kChB, false, dir / (stem + "rgb.ppm"));
  write_ppm(img, kChWorldX, kChWorldY, kChWorldZ, true, dir / (stem + "xyz.ppm"));
  write_ppm(img, kChCamU, kChCamV, kChCamD, true, dir / (stem + "cam.ppm"));
  write_pgm16_depth(img, dir / (stem + "depth.pgm"));
}

void write_ppm_strip(const std::vector<ViewImage<float>>& imgs, const std::filesystem::path& path) {
  if (imgs.empty()) throw std::runtime_error("write_ppm_strip: no images");
  const int w = imgs.front().width;
  const int h = imgs.front().height;
  for (const auto& img : imgs)
    if (img.width != w || img.height != h)
      throw std::runtime_error("write_ppm_strip: image sizes differ");
  auto out = open_binary(path);
  const int total_w = w * static_cast<int>(imgs.size());
  out << "P6\n" << total_w << " " << h << "\n255\n";
  std::vector<std::uint8_t> rowbuf(static_cast<std::size_t>(total_w) * 3);
  for (int r = h - 1; r >= 0; --r) {
    std::size_t o = 0;
    for (const auto& img : imgs) {
      for (int c = 0; c < w; ++c) {
        rowbuf[o++] = to_u8(img.at(r, c, kChR));
        rowbuf[o++] = to_u8(img.at(r, c, kChG));
        rowbuf[o++] = to_u8(img.at(r, c, kChB));
      }
    }
    out.write(reinterpret_cast<const char*>(rowbuf.data()), static_cast<std::streamsize>(rowbuf.size()));
  }
}

}  // namespace mvmae
