#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "hyqurp/data.hpp"

using namespace hyqurp;
namespace fs = std::filesystem;

namespace {

void expect_close(const Point3& a, const Point3& b, double tol) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_NEAR(a.z, b.z, tol);
}

std::vector<Point3> random_cloud(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 2.0);
  std::vector<Point3> pts;
  for (int i = 0; i < n; ++i) pts.push_back({g(rng) + 3.0, g(rng), g(rng) - 1.0});
  return pts;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST(Normalize, TwoPointExample) {
  const auto out = normalize({{0, 0, 0}, {0, 0, 4}});
  expect_close(out[0], {0, 0, -1}, 1e-15);
  expect_close(out[1], {0, 0, 1}, 1e-15);
}

TEST(Normalize, DegenerateAndIdempotent) {
  const auto same = normalize({{2, 2, 2}, {2, 2, 2}, {2, 2, 2}});
  for (const auto& p : same) expect_close(p, {0, 0, 0}, 0.0);

  std::mt19937_64 rng(71);
  const auto once = normalize(random_cloud(50, rng));
  const auto twice = normalize(once);
  double max_r = 0.0;
  for (std::size_t i = 0; i < once.size(); ++i) {
    expect_close(once[i], twice[i], 1e-12);
    max_r = std::max(max_r, once[i].norm());
  }
  EXPECT_NEAR(max_r, 1.0, 1e-12);
  EXPECT_THROW(normalize({}), std::invalid_argument);
}

TEST(Fps, CollinearTrace) {
  std::mt19937_64 rng(72);
  const std::vector<Point3> c{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  const auto out = fps_from_seed(c, 3, 0, rng);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0], c[0]);
  EXPECT_EQ(out[1], c[2]);
  EXPECT_EQ(out[2], c[1]);
}

TEST(Fps, TiesGoToLowestIndex) {
  std::mt19937_64 rng(73);
  const std::vector<Point3> c{{0, 0, 0}, {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}};
  EXPECT_EQ(fps_from_seed(c, 2, 0, rng)[1], c[1]);
}

TEST(Fps, SubsetWithoutDuplicatesAndFullSet) {
  std::mt19937_64 rng(74);
  const auto cands = random_cloud(40, rng);
  const auto out = fps(cands, 10, rng);
  std::set<std::tuple<double, double, double>> seen;
  for (const auto& p : out) {
    EXPECT_NE(std::find(cands.begin(), cands.end(), p), cands.end());
    EXPECT_TRUE(seen.insert({p.x, p.y, p.z}).second);
  }
  auto all = fps(cands, 40, rng);
  auto key = [](const Point3& a, const Point3& b) { return std::tie(a.x, a.y, a.z) < std::tie(b.x, b.y, b.z); };
  auto sorted = cands;
  std::sort(all.begin(), all.end(), key);
  std::sort(sorted.begin(), sorted.end(), key);
  EXPECT_EQ(all, sorted);
}

TEST(Fps, SinglePointIsTheSeed) {
  std::mt19937_64 a(75), b(75);
  std::mt19937_64 rng(76);
  const auto cands = random_cloud(20, rng);
  const auto out = fps(cands, 1, a);
  std::uniform_int_distribution<std::size_t> pick(0, cands.size() - 1);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], cands[pick(b)]);
}

TEST(Fps, TooFewCandidatesUsesEachBeforeRepeating) {
  std::mt19937_64 rng(77);
  const std::vector<Point3> c{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  const auto out = fps(c, 7, rng);
  ASSERT_EQ(out.size(), 7u);
  for (const auto& p : c) EXPECT_GE(std::count(out.begin(), out.end(), p), 2);
}

TEST(Rotation, HaarSamplesAreRotations) {
  std::mt19937_64 rng(78);
  for (int t = 0; t < 20; ++t) {
    const Mat3 r = random_rotation(rng);
    EXPECT_LT((r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
  }
}

TEST(Synth, SphereNormsAndSplitRatio) {
  SynthSpec spec;
  spec.classes = {ShapeFamily::Sphere, ShapeFamily::Cube};
  spec.candidates_per_object = 32;
  std::mt19937_64 rng(79);
  const auto recs = synth_dataset(spec, rng);
  ASSERT_EQ(recs.size(), 200u);
  std::map<std::pair<int, Split>, int> counts;
  std::set<std::string> ids;
  for (const auto& r : recs) {
    ++counts[{r.label, r.split}];
    EXPECT_TRUE(ids.insert(r.id).second);
    if (r.label == 0) {
      for (const auto& p : r.candidates) EXPECT_NEAR(p.norm(), 1.0, 1e-12);
    }
  }
  for (int label : {0, 1}) {
    EXPECT_EQ((counts[{label, Split::Train}]), 70);
    EXPECT_EQ((counts[{label, Split::Val}]), 10);
    EXPECT_EQ((counts[{label, Split::Test}]), 20);
  }
  spec.classes = {ShapeFamily::Sphere};
  EXPECT_THROW(synth_dataset(spec, rng), std::invalid_argument);
}

TEST(Synth, ShapeNamesRoundTrip) {
  for (auto f : {ShapeFamily::Sphere, ShapeFamily::Cube, ShapeFamily::Cylinder, ShapeFamily::Disc, ShapeFamily::Simplex})
    EXPECT_EQ(parse_shape(to_string(f)), f);
  EXPECT_THROW(parse_shape("torus"), std::invalid_argument);
}

TEST(Manifest, RoundTrip) {
  TempDir dir("hyqurp_manifest_rt");
  SynthSpec spec;
  spec.classes = {ShapeFamily::Disc, ShapeFamily::Simplex};
  spec.objects_per_class = 10;
  spec.candidates_per_object = 16;
  spec.noise = 0.05;
  std::mt19937_64 rng(80);
  const auto recs = synth_dataset(spec, rng);
  save_manifest(dir.path / "m.csv", recs);
  EXPECT_EQ(load_manifest(dir.path / "m.csv"), recs);
}

TEST(Manifest, MissingPointsFileIsNamed) {
  TempDir dir("hyqurp_manifest_missing");
  std::ofstream(dir.path / "m.csv") << "id,label,split,points_path\na,0,train,points/nope.txt\n";
  try {
    load_manifest(dir.path / "m.csv");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("nope.txt"), std::string::npos) << e.what();
  }
}

TEST(Manifest, UnknownSplitReportsLine) {
  TempDir dir("hyqurp_manifest_split");
  std::ofstream(dir.path / "p.txt") << "0 0 0\n";
  std::ofstream(dir.path / "m.csv") << "id,label,split,points_path\na,0,train,p.txt\nb,1,holdout,p.txt\n";
  try {
    load_manifest(dir.path / "m.csv");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("holdout"), std::string::npos) << e.what();
  }
}

TEST(Manifest, DuplicateIdsRejected) {
  TempDir dir("hyqurp_manifest_dup");
  std::ofstream(dir.path / "p.txt") << "0 0 0\n";
  std::ofstream(dir.path / "m.csv") << "id,label,split,points_path\na,0,train,p.txt\na,1,test,p.txt\n";
  EXPECT_THROW(load_manifest(dir.path / "m.csv"), std::runtime_error);
}

TEST(SampleSplits, DisjointNormalizedAndDeterministic) {
  SynthSpec spec;
  spec.classes = {ShapeFamily::Sphere, ShapeFamily::Cylinder};
  spec.objects_per_class = 20;
  spec.candidates_per_object = 32;
  std::mt19937_64 rng(81);
  const auto recs = synth_dataset(spec, rng);
  std::mt19937_64 a(5), b(5);
  const DatasetSplits s = sample_splits(recs, 4, a);
  const DatasetSplits t = sample_splits(recs, 4, b);
  EXPECT_EQ(s.train.size(), 28u);
  EXPECT_EQ(s.val.size(), 4u);
  EXPECT_EQ(s.test.size(), 8u);
  std::set<std::string> ids;
  for (const auto* split : {&s.train, &s.val, &s.test}) {
    for (const auto& item : *split) {
      EXPECT_TRUE(ids.insert(item.id).second);
      ASSERT_EQ(item.points.size(), 4u);
      for (const auto& p : item.points) EXPECT_LE(p.norm(), 1.0 + 1e-9);
    }
  }
  for (std::size_t i = 0; i < s.train.size(); ++i) EXPECT_EQ(s.train[i].points, t.train[i].points);
}
