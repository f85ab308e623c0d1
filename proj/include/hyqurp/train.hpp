#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyqurp/data.hpp"
#include "hyqurp/model.hpp"

namespace hyqurp {

struct AugmentFlags {
  bool rotation = true;
  bool permutation = true;
  bool jitter = true;
};

struct TrainConfig {
  double lr = 1e-2;
  int batch_size = 35;
  int epochs = 1000;
  double sigma_jitter = 0.02;
  AugmentFlags augment;
  std::vector<std::uint64_t> seeds{121, 831, 1557, 2023, 2024, 2025, 2026};

  void validate() const;
};

struct OptimizerState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

/// Bias-corrected Adam update, in place.
void adam_step(std::span<double> params, std::span<const double> grads, OptimizerState& state, double lr);

/// Independent generator for (seed, purpose, index). Every random draw in a
/// run comes from one of these streams.
enum class Stream : std::uint32_t { Init = 1, Sampling = 2, Epoch = 3, Eval = 4 };
std::mt19937_64 make_stream(std::uint64_t seed, Stream purpose, std::uint64_t index);

/// Rotation, then point permutation, then Gaussian jitter, each if enabled.
std::vector<Point3> augment(const std::vector<Point3>& points, std::mt19937_64& rng, const AugmentFlags& flags,
                            double sigma_jitter);

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
};

struct Checkpoint {
  ModelSpec spec;
  std::vector<double> params;
  double best_val_acc = 0.0;
  int epoch = 0;
  std::string convention = kGateConvention;
  // echo of the run that produced it
  double lr = 0.0;
  int batch_size = 0;
  double sigma_jitter = 0.0;
  std::uint64_t seed = 0;
};

struct TrainResult {
  Checkpoint best;
  std::vector<EpochMetrics> log;
  double test_acc = 0.0;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Mini-batch Adam with best-validation checkpoint selection (ties keep the
/// earliest epoch); the selected parameters are left in `model` and scored
/// on the test split.
TrainResult train_loop(Model& model, const DatasetSplits& data, const TrainConfig& cfg, std::uint64_t seed,
                       const EpochCallback& on_epoch = {});

/// Top-1 accuracy; ties in the logits resolve to the lowest class index.
double accuracy(const Model& model, const std::vector<SampledItem>& items);

int argmax(const Eigen::VectorXd& v);

struct InvarianceMetrics {
  double cosine = 1.0;
  double norm_ratio = 1.0;
};

InvarianceMetrics compare_logits(const Eigen::VectorXd& original, const Eigen::VectorXd& transformed);

/// Logits of `points` versus logits after rotating by `rotation` and moving
/// point i to slot perm[i].
InvarianceMetrics invariance_metrics(const Model& model, const std::vector<Point3>& points, const Mat3& rotation,
                                     std::span<const int> perm);

/// Same with a random Haar rotation and uniform permutation.
InvarianceMetrics invariance_metrics(const Model& model, const std::vector<Point3>& points, std::mt19937_64& rng);

/// Checkpoint text format (see checkpoint.cpp for the layout).
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

void write_metrics_csv(const std::filesystem::path& path, const std::vector<EpochMetrics>& log);

std::unique_ptr<Model> model_from_checkpoint(const Checkpoint& ckpt, GeneratorCache& cache);

}  // namespace hyqurp
