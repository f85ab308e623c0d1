#include "hyqurp/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace hyqurp {

namespace {

double dist2(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Point3 sample_shape(ShapeFamily family, std::size_t index, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  switch (family) {
    case ShapeFamily::Sphere: {
      Point3 p{normal(rng), normal(rng), normal(rng)};
      const double r = p.norm();
      return {p.x / r, p.y / r, p.z / r};
    }
    case ShapeFamily::Cube: {
      std::uniform_int_distribution<int> face(0, 5);
      const int f = face(rng);
      const double a = uni(rng);
      const double b = uni(rng);
      const double s = (f % 2 == 0) ? 1.0 : -1.0;
      if (f < 2) return {s, a, b};
      if (f < 4) return {a, s, b};
      return {a, b, s};
    }
    case ShapeFamily::Cylinder: {
      std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
      const double t = angle(rng);
      return {0.25 * std::cos(t), 0.25 * std::sin(t), uni(rng)};
    }
    case ShapeFamily::Disc: {
      std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const double t = angle(rng);
      const double r = std::sqrt(unit(rng));
      return {r * std::cos(t), r * std::sin(t), 0.0};
    }
    case ShapeFamily::Simplex: {
      const double s = 1.0 / std::sqrt(3.0);
      static const Point3 verts[4] = {{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
      return verts[index % 4];
    }
  }
  throw std::logic_error("unhandled shape family");
}

}  // namespace

std::string to_string(Split split) {
  switch (split) {
    case Split::Train:
      return "train";
    case Split::Val:
      return "val";
    case Split::Test:
      return "test";
  }
  return "?";
}

Split parse_split(const std::string& token) {
  if (token == "train") return Split::Train;
  if (token == "val") return Split::Val;
  if (token == "test") return Split::Test;
  throw std::invalid_argument("unknown split token '" + token + "'");
}

std::vector<Point3> normalize(std::vector<Point3> points) {
  if (points.empty()) throw std::invalid_argument("normalize: empty point set");
  Point3 c{};
  for (const auto& p : points) {
    c.x += p.x;
    c.y += p.y;
    c.z += p.z;
  }
  const double inv = 1.0 / static_cast<double>(points.size());
  c = {c.x * inv, c.y * inv, c.z * inv};
  double radius = 0.0;
  for (auto& p : points) {
    p = {p.x - c.x, p.y - c.y, p.z - c.z};
    radius = std::max(radius, p.norm());
  }
  if (radius <= 1e-12) return points;
  for (auto& p : points) p = {p.x / radius, p.y / radius, p.z / radius};
  return points;
}

std::vector<Point3> fps_from_seed(const std::vector<Point3>& candidates, int n, std::size_t seed_index,
                                  std::mt19937_64& rng) {
  if (candidates.empty()) throw std::invalid_argument("fps: no candidates");
  if (n < 1) throw std::invalid_argument("fps: need n >= 1");
  if (seed_index >= candidates.size()) throw std::out_of_range("fps: seed index out of range");

  const std::size_t m = candidates.size();
  const std::size_t take = std::min<std::size_t>(m, static_cast<std::size_t>(n));
  std::vector<bool> chosen(m, false);
  std::vector<double> min_d(m, std::numeric_limits<double>::infinity());
  std::vector<Point3> out;
  out.reserve(static_cast<std::size_t>(n));

  std::size_t current = seed_index;
  for (std::size_t step = 0; step < take; ++step) {
    chosen[current] = true;
    out.push_back(candidates[current]);
    if (step + 1 == take) break;
    std::size_t best = m;
    for (std::size_t i = 0; i < m; ++i) {
      if (chosen[i]) continue;
      min_d[i] = std::min(min_d[i], dist2(candidates[i], candidates[current]));
      if (best == m || min_d[i] > min_d[best]) best = i;
    }
    current = best;
  }

  // Not enough candidates: draw whole shuffled passes so repeats are spread out.
  while (out.size() < static_cast<std::size_t>(n)) {
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < m && out.size() < static_cast<std::size_t>(n); ++i) out.push_back(candidates[order[i]]);
  }
  return out;
}

std::vector<Point3> fps(const std::vector<Point3>& candidates, int n, std::mt19937_64& rng) {
  if (candidates.empty()) throw std::invalid_argument("fps: no candidates");
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  const std::size_t seed = pick(rng);
  return fps_from_seed(candidates, n, seed, rng);
}

Mat2c random_su2(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  double q[4];
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& v : q) {
      v = normal(rng);
      norm += v * v;
    }
  } while (norm < 1e-12);
  norm = std::sqrt(norm);
  for (double& v : q) v /= norm;
  // w I - i (x X + y Y + z Z)
  Mat2c u;
  u(0, 0) = cplx(q[0], -q[3]);
  u(0, 1) = cplx(-q[2], -q[1]);
  u(1, 0) = cplx(q[2], -q[1]);
  u(1, 1) = cplx(q[0], q[3]);
  return u;
}

Mat3 random_rotation(std::mt19937_64& rng) { return su2_to_so3(random_su2(rng)); }

Point3 rotate(const Mat3& r, const Point3& p) {
  const Eigen::Vector3d v = r * Eigen::Vector3d(p.x, p.y, p.z);
  return {v.x(), v.y(), v.z()};
}

std::string to_string(ShapeFamily family) {
  switch (family) {
    case ShapeFamily::Sphere:
      return "sphere";
    case ShapeFamily::Cube:
      return "cube";
    case ShapeFamily::Cylinder:
      return "cylinder";
    case ShapeFamily::Disc:
      return "disc";
    case ShapeFamily::Simplex:
      return "simplex";
  }
  return "?";
}

ShapeFamily parse_shape(const std::string& name) {
  for (ShapeFamily f : {ShapeFamily::Sphere, ShapeFamily::Cube, ShapeFamily::Cylinder, ShapeFamily::Disc,
                        ShapeFamily::Simplex}) {
    if (to_string(f) == name) return f;
  }
  throw std::invalid_argument("unknown shape family '" + name + "'");
}

std::vector<ObjectRecord> synth_dataset(const SynthSpec& spec, std::mt19937_64& rng) {
  if (spec.classes.size() < 2) throw std::invalid_argument("need >= 2 classes");
  if (spec.objects_per_class < 1 || spec.candidates_per_object < 1) {
    throw std::invalid_argument("object and candidate counts must be positive");
  }
  const int n = spec.objects_per_class;
  const int n_train = n * 7 / 10;
  const int n_val = n / 10;
  std::normal_distribution<double> noise(0.0, spec.noise > 0.0 ? spec.noise : 1.0);

  std::vector<ObjectRecord> records;
  for (std::size_t label = 0; label < spec.classes.size(); ++label) {
    const ShapeFamily family = spec.classes[label];
    for (int obj = 0; obj < n; ++obj) {
      ObjectRecord rec;
      char id[64];
      std::snprintf(id, sizeof id, "%s_%04d", to_string(family).c_str(), obj);
      rec.id = id;
      rec.label = static_cast<int>(label);
      rec.split = obj < n_train ? Split::Train : (obj < n_train + n_val ? Split::Val : Split::Test);
      const Mat3 r = random_rotation(rng);
      rec.candidates.reserve(static_cast<std::size_t>(spec.candidates_per_object));
      for (int c = 0; c < spec.candidates_per_object; ++c) {
        Point3 p = sample_shape(family, static_cast<std::size_t>(c), rng);
        if (spec.noise > 0.0) p = {p.x + noise(rng), p.y + noise(rng), p.z + noise(rng)};
        rec.candidates.push_back(rotate(r, p));
      }
      records.push_back(std::move(rec));
    }
  }
  return records;
}

void save_manifest(const std::filesystem::path& manifest, const std::vector<ObjectRecord>& records) {
  namespace fs = std::filesystem;
  const fs::path root = manifest.has_parent_path() ? manifest.parent_path() : fs::path(".");
  fs::create_directories(root / "points");
  std::ofstream csv(manifest);
  if (!csv) throw std::runtime_error("cannot write manifest " + manifest.string());
  csv << "id,label,split,points_path\n";
  for (const auto& rec : records) {
    if (rec.id.find(',') != std::string::npos) throw std::invalid_argument("object id contains a comma: " + rec.id);
    const fs::path rel = fs::path("points") / (rec.id + ".txt");
    csv << rec.id << ',' << rec.label << ',' << to_string(rec.split) << ',' << rel.generic_string() << '\n';
    std::ofstream pts(root / rel);
    if (!pts) throw std::runtime_error("cannot write points file " + (root / rel).string());
    for (const auto& p : rec.candidates) {
      pts << format_double(p.x) << ' ' << format_double(p.y) << ' ' << format_double(p.z) << '\n';
    }
  }
}

std::vector<ObjectRecord> load_manifest(const std::filesystem::path& manifest) {
  namespace fs = std::filesystem;
  std::ifstream csv(manifest);
  if (!csv) throw std::runtime_error("cannot open manifest " + manifest.string());
  const fs::path root = manifest.has_parent_path() ? manifest.parent_path() : fs::path(".");
  std::string line;
  if (!std::getline(csv, line) || line != "id,label,split,points_path") {
    throw std::runtime_error(manifest.string() + ":1: expected header 'id,label,split,points_path'");
  }
  std::vector<ObjectRecord> records;
  std::set<std::string> ids;
  int line_no = 1;
  while (std::getline(csv, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto where = manifest.string() + ":" + std::to_string(line_no) + ": ";
    const auto fields = split_csv(line);
    if (fields.size() != 4) throw std::runtime_error(where + "expected 4 fields");
    ObjectRecord rec;
    rec.id = fields[0];
    if (!ids.insert(rec.id).second) throw std::runtime_error(where + "duplicate object id '" + rec.id + "'");
    try {
      std::size_t used = 0;
      rec.label = std::stoi(fields[1], &used);
      if (used != fields[1].size() || rec.label < 0) throw std::invalid_argument("label");
    } catch (const std::exception&) {
      throw std::runtime_error(where + "bad label '" + fields[1] + "'");
    }
    try {
      rec.split = parse_split(fields[2]);
    } catch (const std::exception& e) {
      throw std::runtime_error(where + e.what());
    }
    const fs::path pts_path = root / fields[3];
    std::ifstream pts(pts_path);
    if (!pts) throw std::runtime_error(where + "missing points file " + pts_path.string());
    std::string pline;
    int pno = 0;
    while (std::getline(pts, pline)) {
      ++pno;
      if (pline.empty()) continue;
      std::istringstream ls(pline);
      Point3 p;
      std::string extra;
      if (!(ls >> p.x >> p.y >> p.z) || (ls >> extra) || !p.finite()) {
        throw std::runtime_error(pts_path.string() + ":" + std::to_string(pno) + ": expected 'x y z'");
      }
      rec.candidates.push_back(p);
    }
    if (rec.candidates.empty()) throw std::runtime_error(where + "points file " + pts_path.string() + " is empty");
    records.push_back(std::move(rec));
  }
  return records;
}

DatasetSplits sample_splits(const std::vector<ObjectRecord>& records, int n_points, std::mt19937_64& rng) {
  DatasetSplits out;
  for (const auto& rec : records) {
    SampledItem item{rec.id, rec.label, fps(normalize(rec.candidates), n_points, rng)};
    switch (rec.split) {
      case Split::Train:
        out.train.push_back(std::move(item));
        break;
      case Split::Val:
        out.val.push_back(std::move(item));
        break;
      case Split::Test:
        out.test.push_back(std::move(item));
        break;
    }
  }
  return out;
}

}  // namespace hyqurp
