#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hyqurp/encoder.hpp"
#include "hyqurp/group_ops.hpp"

namespace hyqurp {

enum class Split { Train, Val, Test };

std::string to_string(Split split);
Split parse_split(const std::string& token);

struct ObjectRecord {
  std::string id;
  int label = 0;
  Split split = Split::Train;
  std::vector<Point3> candidates;

  friend bool operator==(const ObjectRecord&, const ObjectRecord&) = default;
};

struct SampledItem {
  std::string id;
  int label = 0;
  std::vector<Point3> points;
};

/// Centre on the centroid and scale to unit maximum radius. Coincident
/// points (radius <= 1e-12) are centred but not scaled.
std::vector<Point3> normalize(std::vector<Point3> points);

/// Farthest point sampling from a uniformly random seed.
std::vector<Point3> fps(const std::vector<Point3>& candidates, int n, std::mt19937_64& rng);

/// FPS from a given seed index. Ties go to the lowest candidate index. When
/// there are fewer candidates than `n`, the rest is drawn from shuffled
/// passes over the candidates (`rng` is used only then).
std::vector<Point3> fps_from_seed(const std::vector<Point3>& candidates, int n, std::size_t seed_index,
                                  std::mt19937_64& rng);

/// Unit quaternion from four Gaussians, as an SU(2) element.
Mat2c random_su2(std::mt19937_64& rng);

/// Haar-uniform rotation (image of random_su2 under the covering map).
Mat3 random_rotation(std::mt19937_64& rng);

Point3 rotate(const Mat3& r, const Point3& p);

enum class ShapeFamily { Sphere, Cube, Cylinder, Disc, Simplex };

std::string to_string(ShapeFamily family);
ShapeFamily parse_shape(const std::string& name);

struct SynthSpec {
  std::vector<ShapeFamily> classes;
  int objects_per_class = 100;
  int candidates_per_object = 256;
  double noise = 0.0;  // Gaussian std per coordinate, before normalization
};

/// Objects per class split 7:1:2 (train, val, test); every object gets its
/// own random rotation.
std::vector<ObjectRecord> synth_dataset(const SynthSpec& spec, std::mt19937_64& rng);

/// Manifest CSV `id,label,split,points_path`; points files hold one `x y z`
/// per line. Paths are relative to the manifest's directory.
void save_manifest(const std::filesystem::path& manifest, const std::vector<ObjectRecord>& records);
std::vector<ObjectRecord> load_manifest(const std::filesystem::path& manifest);

struct DatasetSplits {
  std::vector<SampledItem> train;
  std::vector<SampledItem> val;
  std::vector<SampledItem> test;
};

/// Normalize each object's candidates and draw N points by FPS, in record order.
DatasetSplits sample_splits(const std::vector<ObjectRecord>& records, int n_points, std::mt19937_64& rng);

}  // namespace hyqurp
