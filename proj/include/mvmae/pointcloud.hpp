#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mvmae {

/// Colored points in the workspace cube. `points` and `colors` always have
/// the same number of rows; colors are RGB in [0,1].
struct PointCloud {
  Eigen::Matrix<double, Eigen::Dynamic, 3> points;
  Eigen::Matrix<double, Eigen::Dynamic, 3> colors;

  Eigen::Index size() const { return points.rows(); }
  bool empty() const { return points.rows() == 0; }
};

struct PaletteColor {
  const char* name;
  Eigen::Vector3d rgb;  // multiples of 1/255 so PLY round-trips are exact
};

/// Named object colors; the goal vocabulary indexes into this table.
const std::vector<PaletteColor>& palette();
int palette_size();

struct SceneObject {
  Eigen::Vector3d center;
  Eigen::Vector3d half_extents;
  int color_id = 0;  // palette index
  Eigen::Vector3d color_rgb;
};

/// Generative description of a procedural scene. The point cloud is a pure
/// function of this struct (see synthesize_cloud), which is what makes
/// perturbations that edit geometry or colors deterministic.
struct SceneMeta {
  std::uint64_t seed = 0;
  double density = 400.0;  // points per unit^2 of surface
  bool has_table = true;
  Eigen::Vector3d table_rgb = Eigen::Vector3d::Zero();
  std::vector<SceneObject> objects;
  int target_index = 0;
};

struct CorpusConfig {
  std::string dir = "corpus";
  int n_scenes = 64;
  std::uint64_t seed = 1234;
  int min_objects = 2;
  int max_objects = 5;
  double density = 400.0;
  bool table = true;

  void validate() const;
};

enum class PerturbKind {
  ObjectColor = 0,
  ObjectSize,
  DistractorCount,
  TableColor,
  LightTint,
  PointNoise,
};

constexpr int kPerturbKindCount = 6;
const char* perturb_name(PerturbKind kind);

struct Perturbation {
  PerturbKind kind = PerturbKind::ObjectColor;
  double magnitude = 0.0;  // in [0,1]
};

// --- PLY ingestion (ASCII only) ---------------------------------------------

/// Parses an ASCII PLY with x,y,z float and red,green,blue uchar vertex
/// properties. Colors are scaled to [0,1]. Throws std::runtime_error naming
/// the offending line on malformed input; binary PLY is rejected.
PointCloud load_ply(const std::filesystem::path& path);

/// Debug writer; load_ply(save_ply(c)) is exact for clouds whose colors are
/// multiples of 1/255.
void save_ply(const PointCloud& cloud, const std::filesystem::path& path);

// --- Workspace normalization -------------------------------------------------

/// Isotropically maps the cloud's AABB center to the origin and its largest
/// half-extent to 0.9. Degenerate clouds are translated only; empty clouds
/// throw.
PointCloud normalize_to_workspace(const PointCloud& cloud);

// --- Procedural scenes --------------------------------------------------------

/// Samples non-overlapping colored boxes (optionally on a table plane at
/// z = -0.9) and surfaces them as per-face uniform point samples.
/// Deterministic in (seed, cfg).
std::pair<PointCloud, SceneMeta> gen_scene(std::uint64_t seed, const CorpusConfig& cfg);

/// Re-creates the point cloud described by `meta`. Point positions depend
/// only on (meta.seed, geometry), so color-only edits keep positions intact.
PointCloud synthesize_cloud(const SceneMeta& meta);

/// Applies one perturbation axis; deterministic in `seed`. Geometry/color
/// kinds edit the meta and re-synthesize; light_tint and point_noise act on
/// the cloud directly. Magnitude 0 is the identity for every kind.
std::pair<PointCloud, SceneMeta> apply_perturbation(const PointCloud& cloud,
                                                    const SceneMeta& meta,
                                                    const Perturbation& perturbation,
                                                    std::uint64_t seed);

/// Multiplies all colors by `tint` and clamps to [0,1].
PointCloud apply_light_tint(const PointCloud& cloud, const Eigen::Vector3d& tint);

// --- SceneMeta JSON ------------------------------------------------------------

void save_scene_meta(const SceneMeta& meta, const std::filesystem::path& path);
SceneMeta load_scene_meta(const std::filesystem::path& path);

}  // namespace mvmae
