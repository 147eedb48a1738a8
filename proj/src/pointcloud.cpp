#include "mvmae/pointcloud.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mvmae/rng.hpp"
#include <nlohmann/json.hpp>

namespace mvmae {
namespace {

using json = nlohmann::json;

constexpr double kWorkspaceHalf = 0.9;
constexpr double kTableZ = -0.9;

// substream tags for scene synthesis
constexpr std::uint64_t kTagScene = 0x7363656eull;    // "scen"
constexpr std::uint64_t kTagTable = 0x7461626cull;    // "tabl"
constexpr std::uint64_t kTagFace = 0x66616365ull;     // "face"
constexpr std::uint64_t kTagPerturb = 0x70657274ull;  // "pert"

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

std::string line_err(const std::filesystem::path& path, int line, const std::string& what) {
  std::ostringstream os;
  os << path.string() << ":" << line << ": " << what;
  return os.str();
}

Eigen::Vector3d from_u8(int r, int g, int b) {
  return Eigen::Vector3d(r / 255.0, g / 255.0, b / 255.0);
}

}  // namespace

const std::vector<PaletteColor>& palette() {
  static const std::vector<PaletteColor> table = {
      {"red", from_u8(200, 40, 40)},    {"green", from_u8(40, 170, 60)},
      {"blue", from_u8(50, 80, 200)},   {"yellow", from_u8(230, 210, 50)},
      {"magenta", from_u8(200, 60, 190)}, {"cyan", from_u8(60, 200, 210)},
      {"orange", from_u8(235, 140, 40)}, {"purple", from_u8(130, 60, 180)},
  };
  return table;
}

int palette_size() { return static_cast<int>(palette().size()); }

const char* perturb_name(PerturbKind kind) {
  switch (kind) {
    case PerturbKind::ObjectColor: return "object_color";
    case PerturbKind::ObjectSize: return "object_size";
    case PerturbKind::DistractorCount: return "distractor_count";
    case PerturbKind::TableColor: return "table_color";
    case PerturbKind::LightTint: return "light_tint";
    case PerturbKind::PointNoise: return "point_noise";
  }
  fail("invalid perturbation kind");
}

void CorpusConfig::validate() const {
  if (min_objects < 1 || max_objects > 8 || min_objects > max_objects)
    fail("corpus object count range must satisfy 1 <= min <= max <= 8");
  if (density <= 0.0) fail("corpus density must be positive");
  if (n_scenes < 0) fail("corpus n_scenes must be >= 0");
  if (palette_size() < 6) fail("palette must have at least 6 colors");
}

// --- PLY -----------------------------------------------------------------------

PointCloud load_ply(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open PLY file: " + path.string());

  auto next_line = [&in](std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  std::string line;
  int lineno = 0;

  if (!next_line(line) || line != "ply") fail(line_err(path, 1, "missing 'ply' magic"));
  lineno = 1;

  long vertex_count = -1;
  bool in_vertex_element = false;
  bool saw_format = false;
  // column index of each required property within a vertex line, or -1
  int prop_col[6] = {-1, -1, -1, -1, -1, -1};  // x y z red green blue
  int n_props = 0;
  bool header_done = false;

  while (!header_done) {
    if (!next_line(line)) fail(line_err(path, lineno + 1, "unexpected end of header"));
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok.empty() || tok == "comment") continue;
    if (tok == "format") {
      std::string kind, version;
      ls >> kind >> version;
      if (kind != "ascii") fail(line_err(path, lineno, "unsupported encoding '" + kind + "' (ASCII only)"));
      saw_format = true;
    } else if (tok == "element") {
      std::string name;
      long count = -1;
      ls >> name >> count;
      if (name != "vertex") fail(line_err(path, lineno, "unsupported element '" + name + "'"));
      if (count < 0) fail(line_err(path, lineno, "bad vertex count"));
      vertex_count = count;
      in_vertex_element = true;
    } else if (tok == "property") {
      if (!in_vertex_element) fail(line_err(path, lineno, "property outside vertex element"));
      std::string type, name;
      ls >> type >> name;
      int slot = -1;
      if (name == "x") slot = 0;
      else if (name == "y") slot = 1;
      else if (name == "z") slot = 2;
      else if (name == "red") slot = 3;
      else if (name == "green") slot = 4;
      else if (name == "blue") slot = 5;
      if (slot < 0) fail(line_err(path, lineno, "unknown property '" + name + "'"));
      const bool coord = slot < 3;
      const bool type_ok = coord ? (type == "float" || type == "double" || type == "float32" || type == "float64")
                                 : (type == "uchar" || type == "uint8");
      if (!type_ok) fail(line_err(path, lineno, "property '" + name + "' has unsupported type '" + type + "'"));
      if (prop_col[slot] >= 0) fail(line_err(path, lineno, "duplicate property '" + name + "'"));
      prop_col[slot] = n_props++;
    } else if (tok == "end_header") {
      header_done = true;
    } else {
      fail(line_err(path, lineno, "unknown header keyword '" + tok + "'"));
    }
  }

  if (!saw_format) fail(line_err(path, lineno, "missing format line"));
  if (vertex_count < 0) fail(line_err(path, lineno, "missing 'element vertex'"));
  for (int s = 0; s < 6; ++s) {
    static const char* names[6] = {"x", "y", "z", "red", "green", "blue"};
    if (prop_col[s] < 0) fail(line_err(path, lineno, std::string("missing property '") + names[s] + "'"));
  }

  PointCloud cloud;
  cloud.points.resize(vertex_count, 3);
  cloud.colors.resize(vertex_count, 3);

  for (long i = 0; i < vertex_count; ++i) {
    if (!next_line(line)) fail(line_err(path, lineno + 1, "vertex count mismatch: expected " +
                                                              std::to_string(vertex_count) + " vertices"));
    ++lineno;
    std::istringstream ls(line);
    std::vector<std::string> toks;
    std::string t;
    while (ls >> t) toks.push_back(t);
    if (static_cast<int>(toks.size()) != n_props)
      fail(line_err(path, lineno, "expected " + std::to_string(n_props) + " values, got " +
                                      std::to_string(toks.size())));
    for (int s = 0; s < 3; ++s) {
      const std::string& v = toks[prop_col[s]];
      std::size_t pos = 0;
      double d = 0.0;
      try {
        d = std::stod(v, &pos);
      } catch (const std::exception&) {
        fail(line_err(path, lineno, "bad coordinate '" + v + "'"));
      }
      if (pos != v.size()) fail(line_err(path, lineno, "bad coordinate '" + v + "'"));
      cloud.points(i, s) = d;
    }
    for (int s = 3; s < 6; ++s) {
      const std::string& v = toks[prop_col[s]];
      std::size_t pos = 0;
      long c = 0;
      try {
        c = std::stol(v, &pos);
      } catch (const std::exception&) {
        fail(line_err(path, lineno, "bad color '" + v + "'"));
      }
      if (pos != v.size() || c < 0 || c > 255) fail(line_err(path, lineno, "bad color '" + v + "'"));
      cloud.colors(i, s - 3) = static_cast<double>(c) / 255.0;
    }
  }

  return cloud;
}

void save_ply(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail("cannot write PLY file: " + path.string());
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << cloud.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";
  char buf[160];
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const auto to_u8 = [](double c) {
      return std::clamp(static_cast<int>(std::lround(c * 255.0)), 0, 255);
    };
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %d %d %d\n", cloud.points(i, 0),
                  cloud.points(i, 1), cloud.points(i, 2), to_u8(cloud.colors(i, 0)),
                  to_u8(cloud.colors(i, 1)), to_u8(cloud.colors(i, 2)));
    out << buf;
  }
  if (!out) fail("write failed: " + path.string());
}

// --- Normalization --------------------------------------------------------------

PointCloud normalize_to_workspace(const PointCloud& cloud) {
  if (cloud.empty()) fail("normalize_to_workspace: empty cloud");
  const Eigen::RowVector3d lo = cloud.points.colwise().minCoeff();
  const Eigen::RowVector3d hi = cloud.points.colwise().maxCoeff();
  const Eigen::RowVector3d center = 0.5 * (lo + hi);
  const double max_half = ((hi - lo) * 0.5).maxCoeff();
  const double scale = max_half > 0.0 ? kWorkspaceHalf / max_half : 1.0;
  PointCloud out;
  out.points = (cloud.points.rowwise() - center) * scale;
  out.colors = cloud.colors;
  return out;
}

// --- Procedural scenes -----------------------------------------------------------

namespace {

bool boxes_overlap(const SceneObject& a, const SceneObject& b) {
  for (int ax = 0; ax < 3; ++ax) {
    if (std::abs(a.center[ax] - b.center[ax]) >= a.half_extents[ax] + b.half_extents[ax])
      return false;
  }
  return true;
}

// Attempts to place one box without overlapping `placed`; returns false after
// 100 rejected samples.
bool place_box(Rng& rng, bool on_table, const std::vector<SceneObject>& placed, SceneObject& out) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    SceneObject obj;
    for (int ax = 0; ax < 3; ++ax) obj.half_extents[ax] = rng.uniform(0.06, 0.22);
    const double mx = kWorkspaceHalf - obj.half_extents[0];
    const double my = kWorkspaceHalf - obj.half_extents[1];
    obj.center[0] = rng.uniform(-mx, mx);
    obj.center[1] = rng.uniform(-my, my);
    if (on_table) {
      obj.center[2] = kTableZ + obj.half_extents[2];
    } else {
      const double mz = kWorkspaceHalf - obj.half_extents[2];
      obj.center[2] = rng.uniform(-mz, mz);
    }
    bool ok = true;
    for (const auto& p : placed) {
      if (boxes_overlap(obj, p)) {
        ok = false;
        break;
      }
    }
    if (ok) {
      out = obj;
      return true;
    }
  }
  return false;
}

const Eigen::Vector3d kTablePalette[3] = {
    from_u8(115, 107, 102), from_u8(140, 140, 140), from_u8(90, 77, 64)};

}  // namespace

PointCloud synthesize_cloud(const SceneMeta& meta) {
  std::vector<Eigen::Vector3d> pts;
  std::vector<Eigen::Vector3d> cols;

  if (meta.has_table) {
    Rng rng(derive_seed(meta.seed, kTagTable));
    const long n = std::lround(meta.density * 4.0);  // plane spans [-1,1]^2
    pts.reserve(n);
    cols.reserve(n);
    for (long i = 0; i < n; ++i) {
      const double x = rng.uniform(-1.0, 1.0);
      const double y = rng.uniform(-1.0, 1.0);
      pts.emplace_back(x, y, kTableZ);
      cols.push_back(meta.table_rgb);
    }
  }

  // Face order per box: +x, -x, +y, -y, +z, -z. Each face gets its own
  // substream plus a brightness dither so flat boxes still carry texture.
  for (std::size_t oi = 0; oi < meta.objects.size(); ++oi) {
    const SceneObject& obj = meta.objects[oi];
    for (int f = 0; f < 6; ++f) {
      const int axis = f / 2;
      const double sign = (f % 2 == 0) ? 1.0 : -1.0;
      const int a1 = (axis + 1) % 3;
      const int a2 = (axis + 2) % 3;
      const double area = 4.0 * obj.half_extents[a1] * obj.half_extents[a2];
      const long count = std::lround(meta.density * area);
      Rng rng(derive_seed(meta.seed, kTagFace, oi * 6 + static_cast<std::uint64_t>(f)));
      const double dither = 1.0 + 0.15 * (rng.uniform01() - 0.5);
      Eigen::Vector3d rgb = (obj.color_rgb * dither).cwiseMax(0.0).cwiseMin(1.0);
      for (long i = 0; i < count; ++i) {
        Eigen::Vector3d p = obj.center;
        p[axis] += sign * obj.half_extents[axis];
        p[a1] += rng.uniform(-obj.half_extents[a1], obj.half_extents[a1]);
        p[a2] += rng.uniform(-obj.half_extents[a2], obj.half_extents[a2]);
        pts.push_back(p);
        cols.push_back(rgb);
      }
    }
  }

  PointCloud cloud;
  cloud.points.resize(static_cast<Eigen::Index>(pts.size()), 3);
  cloud.colors.resize(static_cast<Eigen::Index>(cols.size()), 3);
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    cloud.points.row(i) = pts[i].transpose();
    cloud.colors.row(i) = cols[i].transpose();
  }
  return cloud;
}

std::pair<PointCloud, SceneMeta> gen_scene(std::uint64_t seed, const CorpusConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(seed, kTagScene));

  SceneMeta meta;
  meta.seed = seed;
  meta.density = cfg.density;
  meta.has_table = cfg.table;
  meta.table_rgb = cfg.table ? kTablePalette[rng.uniform_int(3)] : Eigen::Vector3d::Zero();

  const int want =
      cfg.min_objects + static_cast<int>(rng.uniform_int(cfg.max_objects - cfg.min_objects + 1));
  for (int i = 0; i < want; ++i) {
    SceneObject obj;
    if (place_box(rng, cfg.table, meta.objects, obj)) meta.objects.push_back(obj);
    // placement failure reduces the object count and moves on
  }
  if (meta.objects.empty()) fail("gen_scene: no objects could be placed");

  for (auto& obj : meta.objects) {
    obj.color_id = static_cast<int>(rng.uniform_int(palette_size()));
    obj.color_rgb = palette()[obj.color_id].rgb;
  }
  meta.target_index = static_cast<int>(rng.uniform_int(meta.objects.size()));

  // the goal "reach <color>" must be unambiguous: distractors may not share
  // the target's color
  const int target_color = meta.objects[meta.target_index].color_id;
  for (std::size_t i = 0; i < meta.objects.size(); ++i) {
    if (static_cast<int>(i) == meta.target_index) continue;
    while (meta.objects[i].color_id == target_color) {
      meta.objects[i].color_id = static_cast<int>(rng.uniform_int(palette_size()));
    }
    meta.objects[i].color_rgb = palette()[meta.objects[i].color_id].rgb;
  }

  return {synthesize_cloud(meta), meta};
}

// --- Perturbations ----------------------------------------------------------------

PointCloud apply_light_tint(const PointCloud& cloud, const Eigen::Vector3d& tint) {
  PointCloud out = cloud;
  for (int c = 0; c < 3; ++c)
    out.colors.col(c) = (out.colors.col(c) * tint[c]).cwiseMax(0.0).cwiseMin(1.0);
  return out;
}

std::pair<PointCloud, SceneMeta> apply_perturbation(const PointCloud& cloud,
                                                    const SceneMeta& meta,
                                                    const Perturbation& perturbation,
                                                    std::uint64_t seed) {
  const double mag = perturbation.magnitude;
  if (mag < 0.0 || mag > 1.0) fail("perturbation magnitude must be in [0,1]");
  Rng rng(derive_seed(seed, kTagPerturb, static_cast<std::uint64_t>(perturbation.kind)));

  switch (perturbation.kind) {
    case PerturbKind::ObjectColor: {
      std::vector<int> others;
      for (std::size_t i = 0; i < meta.objects.size(); ++i)
        if (static_cast<int>(i) != meta.target_index) others.push_back(static_cast<int>(i));
      const long n = std::lround(mag * static_cast<double>(others.size()));
      if (n == 0) return {cloud, meta};
      // seeded partial Fisher-Yates picks which distractors change
      for (std::size_t i = 0; i + 1 < others.size(); ++i) {
        const std::size_t j = i + rng.uniform_int(others.size() - i);
        std::swap(others[i], others[j]);
      }
      SceneMeta m = meta;
      const int target_color = m.objects[m.target_index].color_id;
      for (long k = 0; k < n; ++k) {
        auto& obj = m.objects[others[k]];
        int id = obj.color_id;
        while (id == obj.color_id || id == target_color)
          id = static_cast<int>(rng.uniform_int(palette_size()));
        obj.color_id = id;
        obj.color_rgb = palette()[id].rgb;
      }
      return {synthesize_cloud(m), m};
    }
    case PerturbKind::ObjectSize: {
      const double delta = (rng.uniform_int(2) == 0) ? -0.5 : 0.5;
      const double factor = 1.0 + mag * delta;
      if (factor == 1.0) return {cloud, meta};
      SceneMeta m = meta;
      auto& obj = m.objects[m.target_index];
      obj.half_extents *= factor;
      for (int ax = 0; ax < 3; ++ax)
        obj.half_extents[ax] = std::clamp(obj.half_extents[ax], 0.01, 0.85);
      if (m.has_table) obj.center[2] = kTableZ + obj.half_extents[2];
      for (int ax = 0; ax < 3; ++ax) {
        const double m_ax = 1.0 - obj.half_extents[ax];
        obj.center[ax] = std::clamp(obj.center[ax], -m_ax, m_ax);
      }
      return {synthesize_cloud(m), m};
    }
    case PerturbKind::DistractorCount: {
      const long extra = std::lround(mag * 3.0);
      if (extra == 0) return {cloud, meta};
      SceneMeta m = meta;
      const int target_color = m.objects[m.target_index].color_id;
      for (long k = 0; k < extra; ++k) {
        SceneObject obj;
        if (!place_box(rng, m.has_table, m.objects, obj)) continue;
        int id = target_color;
        while (id == target_color) id = static_cast<int>(rng.uniform_int(palette_size()));
        obj.color_id = id;
        obj.color_rgb = palette()[id].rgb;
        m.objects.push_back(obj);
      }
      return {synthesize_cloud(m), m};
    }
    case PerturbKind::TableColor: {
      if (!meta.has_table || mag == 0.0) return {cloud, meta};
      SceneMeta m = meta;
      const Eigen::Vector3d fresh(rng.uniform01(), rng.uniform01(), rng.uniform01());
      m.table_rgb = (1.0 - mag) * m.table_rgb + mag * fresh;
      return {synthesize_cloud(m), m};
    }
    case PerturbKind::LightTint: {
      Eigen::Vector3d tint;
      for (int c = 0; c < 3; ++c) tint[c] = 1.0 + mag * (rng.uniform01() - 0.5);
      return {apply_light_tint(cloud, tint), meta};
    }
    case PerturbKind::PointNoise: {
      const double half_width = 0.02 * mag;
      PointCloud out = cloud;
      for (Eigen::Index i = 0; i < out.size(); ++i)
        for (int ax = 0; ax < 3; ++ax) {
          const double jitter = half_width * (2.0 * rng.uniform01() - 1.0);
          out.points(i, ax) = std::clamp(out.points(i, ax) + jitter, -1.0, 1.0);
        }
      return {out, meta};
    }
  }
  fail("invalid perturbation kind");
}

// --- SceneMeta JSON -----------------------------------------------------------------

void save_scene_meta(const SceneMeta& meta, const std::filesystem::path& path) {
  json objs = json::array();
  for (const auto& o : meta.objects) {
    objs.push_back({{"shape", "box"},
                    {"center", {o.center[0], o.center[1], o.center[2]}},
                    {"half_extents", {o.half_extents[0], o.half_extents[1], o.half_extents[2]}},
                    {"color_name", palette()[o.color_id].name},
                    {"color_id", o.color_id},
                    {"color_rgb", {o.color_rgb[0], o.color_rgb[1], o.color_rgb[2]}}});
  }
  json j = {{"seed", meta.seed},
            {"density", meta.density},
            {"has_table", meta.has_table},
            {"table_rgb", {meta.table_rgb[0], meta.table_rgb[1], meta.table_rgb[2]}},
            {"objects", objs},
            {"target_index", meta.target_index}};
  std::ofstream out(path);
  if (!out) fail("cannot write scene meta: " + path.string());
  out << j.dump(2) << "\n";
}

SceneMeta load_scene_meta(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open scene meta: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail("bad scene meta " + path.string() + ": " + e.what());
  }
  SceneMeta meta;
  try {
    meta.seed = j.at("seed").get<std::uint64_t>();
    meta.density = j.at("density").get<double>();
    meta.has_table = j.at("has_table").get<bool>();
    for (int c = 0; c < 3; ++c) meta.table_rgb[c] = j.at("table_rgb").at(c).get<double>();
    meta.target_index = j.at("target_index").get<int>();
    for (const auto& jo : j.at("objects")) {
      if (jo.at("shape").get<std::string>() != "box") fail("scene meta: unsupported shape");
      SceneObject o;
      for (int c = 0; c < 3; ++c) {
        o.center[c] = jo.at("center").at(c).get<double>();
        o.half_extents[c] = jo.at("half_extents").at(c).get<double>();
        o.color_rgb[c] = jo.at("color_rgb").at(c).get<double>();
      }
      o.color_id = jo.at("color_id").get<int>();
      meta.objects.push_back(o);
    }
  } catch (const json::exception& e) {
    fail("bad scene meta " + path.string() + ": " + e.what());
  }
  if (meta.target_index < 0 || meta.target_index >= static_cast<int>(meta.objects.size()))
    fail("bad scene meta " + path.string() + ": target_index out of range");
  return meta;
}

}  // namespace mvmae
