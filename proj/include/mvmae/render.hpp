#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mvmae/pointcloud.hpp"

namespace mvmae {

enum class ViewId { Top = 0, Front, Back, Left, Right };
constexpr int kViewCount = 5;

inline const char* view_name(ViewId id) {
  switch (id) {
    case ViewId::Top: return "top";
    case ViewId::Front: return "front";
    case ViewId::Back: return "back";
    case ViewId::Left: return "left";
    case ViewId::Right: return "right";
  }
  throw std::runtime_error("invalid view id");
}

/// One of the five fixed orthographic cameras on the workspace cube faces.
struct VirtualCamera {
  ViewId id;
  Eigen::Vector3d center;
  Eigen::Vector3d view_dir;
  Eigen::Vector3d u_axis;
  Eigen::Vector3d v_axis;
};

/// The fixed convention table, in view order (top, front, back, left, right).
inline const std::array<VirtualCamera, kViewCount>& standard_cameras() {
  static const std::array<VirtualCamera, kViewCount> cams = {{
      {ViewId::Top, {0, 0, 1}, {0, 0, -1}, {1, 0, 0}, {0, 1, 0}},
      {ViewId::Front, {0, -1, 0}, {0, 1, 0}, {1, 0, 0}, {0, 0, 1}},
      {ViewId::Back, {0, 1, 0}, {0, -1, 0}, {-1, 0, 0}, {0, 0, 1}},
      {ViewId::Left, {-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 0, 1}},
      {ViewId::Right, {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, 0, 1}},
  }};
  return cams;
}

// Channel layout of a virtual image.
enum Channel {
  kChR = 0, kChG = 1, kChB = 2,
  kChDepth = 3,
  kChWorldX = 4, kChWorldY = 5, kChWorldZ = 6,
  kChCamU = 7, kChCamV = 8, kChCamD = 9,
};
constexpr int kChannels = 10;

/// W x H x 10 image stored as one row per pixel (index r*W + c, row 0 at
/// v = -1). Background pixels: RGB 0, depth 1, world and camera coords 0.
template <class Scalar>
struct ViewImage {
  int width = 0;
  int height = 0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, kChannels> px;

  Scalar at(int row, int col, int ch) const { return px(row * width + col, ch); }
};

template <class Scalar>
struct MultiViewObservation {
  std::array<ViewImage<Scalar>, kViewCount> views;
};

/// Orthographic projection of one cloud into one view. Nearest-pixel
/// splatting with a z-buffer; depth ties keep the lower point index.
template <class Scalar>
ViewImage<Scalar> render_view(const PointCloud& cloud, const VirtualCamera& cam, int width,
                              int height) {
  if (width < 1 || height < 1) throw std::runtime_error("render_view: W and H must be >= 1");
  ViewImage<Scalar> img;
  img.width = width;
  img.height = height;
  img.px.setZero(static_cast<Eigen::Index>(width) * height, kChannels);
  img.px.col(kChDepth).setConstant(Scalar(1));

  std::vector<double> zbuf(static_cast<std::size_t>(width) * height,
                           std::numeric_limits<double>::infinity());

  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d p = cloud.points.row(i).transpose();
    const double u = p.dot(cam.u_axis);
    const double v = p.dot(cam.v_axis);
    const double d = (p.dot(cam.view_dir) + 1.0) * 0.5;
    const int col = std::clamp(static_cast<int>(std::floor((u + 1.0) * 0.5 * width)), 0, width - 1);
    const int row = std::clamp(static_cast<int>(std::floor((v + 1.0) * 0.5 * height)), 0, height - 1);
    const std::size_t idx = static_cast<std::size_t>(row) * width + col;
    if (d < zbuf[idx]) {
      zbuf[idx] = d;
      auto out = img.px.row(static_cast<Eigen::Index>(idx));
      out[kChR] = static_cast<Scalar>(cloud.colors(i, 0));
      out[kChG] = static_cast<Scalar>(cloud.colors(i, 1));
      out[kChB] = static_cast<Scalar>(cloud.colors(i, 2));
      out[kChDepth] = static_cast<Scalar>(d);
      out[kChWorldX] = static_cast<Scalar>(p[0]);
      out[kChWorldY] = static_cast<Scalar>(p[1]);
      out[kChWorldZ] = static_cast<Scalar>(p[2]);
      out[kChCamU] = static_cast<Scalar>(u);
      out[kChCamV] = static_cast<Scalar>(v);
      out[kChCamD] = static_cast<Scalar>(d);
    }
  }
  return img;
}

/// Renders all five standard views in fixed order.
template <class Scalar>
MultiViewObservation<Scalar> render_all(const PointCloud& cloud, int width, int height) {
  MultiViewObservation<Scalar> obs;
  const auto& cams = standard_cameras();
  for (int v = 0; v < kViewCount; ++v) obs.views[v] = render_view<Scalar>(cloud, cams[v], width, height);
  return obs;
}

}  // namespace mvmae
