#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hyqurp {

using SampleMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;

/// Fully connected layer y = W x + b (W is out x in).
struct DenseLayer {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;

  Eigen::Index in() const { return weight.cols(); }
  Eigen::Index out() const { return weight.rows(); }
};

/// Stack of dense layers; tanh after every layer except (optionally) the last.
struct Mlp {
  std::vector<DenseLayer> layers;
  bool linear_output = true;

  static Mlp zeros(std::span<const int> widths, bool linear_output);
  std::size_t param_count() const;
};

struct MlpCache {
  std::vector<SampleMatrix> inputs;  // input to each layer (rows = samples)
  std::vector<SampleMatrix> outputs;  // post-activation output of each layer
};

SampleMatrix mlp_forward(const Mlp& mlp, const SampleMatrix& x, MlpCache* cache);

/// Returns dL/dx and accumulates parameter gradients into `grad` (same shapes as mlp).
SampleMatrix mlp_backward(const Mlp& mlp, const MlpCache& cache, const SampleMatrix& dout, Mlp& grad);

void init_glorot(Mlp& mlp, std::mt19937_64& rng);

struct HeadConfig {
  std::vector<int> pre_widths{2, 4, 4};
  std::vector<int> post_widths{24, 24, 24, 5};

  static HeadConfig light(int classes);
  static HeadConfig mid(int classes);
  static HeadConfig profile(const std::string& name, int classes);

  int token_width() const { return pre_widths.back(); }
  int classes() const { return post_widths.back(); }
  void validate() const;
};

/// Per-row MLP (tanh on every layer), then the classifier (linear logits).
struct HeadParams {
  Mlp pre;
  Mlp post;

  static HeadParams zeros(const HeadConfig& cfg);
  std::size_t param_count() const;
};

inline constexpr int kAggregateCount = 6;

/// Per-column (mean, max, min, sum, var, std) of an m x d matrix, laid out as
/// six consecutive d-wide blocks. var uses divisor m.
Eigen::VectorXd aggregate(const SampleMatrix& y);

/// Backprop through aggregate. max/min route to the first attaining row;
/// std contributes nothing where var == 0.
SampleMatrix aggregate_backward(const SampleMatrix& y, const Eigen::VectorXd& dagg);

struct HeadCache {
  MlpCache pre;
  MlpCache post;
  SampleMatrix tokens;
  std::uint64_t params_fingerprint = 0;
};

std::uint64_t fingerprint(const HeadParams& params);

Eigen::VectorXd head_forward(const SampleMatrix& features, const HeadParams& params, HeadCache* cache);

struct HeadGradients {
  HeadParams d_params;
  SampleMatrix d_features;
};

/// Throws std::logic_error if `cache` was produced with different parameters.
HeadGradients head_backward(const Eigen::VectorXd& dlogits, const HeadCache& cache, const HeadParams& params);

// Flat packing: for each layer of pre then post, weight row-major then bias.
void pack(const Mlp& mlp, std::vector<double>& out);
std::size_t unpack(Mlp& mlp, std::span<const double> in);

}  // namespace hyqurp
