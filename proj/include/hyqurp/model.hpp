#pragma once

#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hyqurp/circuit.hpp"
#include "hyqurp/group_ops.hpp"
#include "hyqurp/head.hpp"

namespace hyqurp {

enum class ModelKind { Hybrid, SetMlp, PlainMlp };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

/// Everything needed to rebuild a model's shapes.
struct ModelSpec {
  ModelKind kind = ModelKind::Hybrid;
  int n_points = 4;
  int blocks = 12;
  double theta = 1.7;
  std::string profile = "light";
  int classes = 5;

  HeadConfig head_config() const { return HeadConfig::profile(profile, classes); }
  /// Hidden widths of the plain MLP baseline for this profile.
  std::vector<int> plain_widths() const;
};

struct LossAndGrad {
  double loss = 0.0;
  Eigen::VectorXd logits;
  std::vector<double> grad;  // flat, same layout as Model::flat_params()
};

class Model {
 public:
  virtual ~Model() = default;

  const ModelSpec& spec() const { return spec_; }

  virtual Eigen::VectorXd logits(const std::vector<Point3>& points) const = 0;
  virtual LossAndGrad loss_and_grad(const std::vector<Point3>& points, int label) const = 0;

  virtual std::vector<double> flat_params() const = 0;
  virtual void set_flat_params(std::span<const double> values) = 0;
  std::size_t param_count() const { return flat_params().size(); }

  /// Fresh random initial parameters.
  virtual void initialize(std::mt19937_64& rng) = 0;

  virtual std::unique_ptr<Model> clone() const = 0;

 protected:
  explicit Model(ModelSpec spec) : spec_(std::move(spec)) {}
  ModelSpec spec_;
};

/// Quantum circuit + Set-MLP head. Flat layout: circuit coefficients, then head.
class HybridModel final : public Model {
 public:
  HybridModel(ModelSpec spec, std::shared_ptr<const GeneratorSet> gens);

  Eigen::VectorXd logits(const std::vector<Point3>& points) const override;
  LossAndGrad loss_and_grad(const std::vector<Point3>& points, int label) const override;
  std::vector<double> flat_params() const override;
  void set_flat_params(std::span<const double> values) override;
  void initialize(std::mt19937_64& rng) override;
  std::unique_ptr<Model> clone() const override { return std::make_unique<HybridModel>(*this); }

  FeatureMatrix features(const std::vector<Point3>& points) const;
  CircuitConfig circuit_config() const { return {spec_.n_points, spec_.blocks, spec_.theta}; }
  const CircuitParams& circuit() const { return circuit_; }
  CircuitParams& circuit() { return circuit_; }
  const HeadParams& head() const { return head_; }
  HeadParams& head() { return head_; }
  const GeneratorSet& generators() const { return *gens_; }

 private:
  std::shared_ptr<const GeneratorSet> gens_;
  CircuitParams circuit_;
  HeadParams head_;
};

/// Classical ablation: linear 3 -> 2 map per point, then the same head over points.
class SetMlpModel final : public Model {
 public:
  explicit SetMlpModel(ModelSpec spec);

  Eigen::VectorXd logits(const std::vector<Point3>& points) const override;
  LossAndGrad loss_and_grad(const std::vector<Point3>& points, int label) const override;
  std::vector<double> flat_params() const override;
  void set_flat_params(std::span<const double> values) override;
  void initialize(std::mt19937_64& rng) override;
  std::unique_ptr<Model> clone() const override { return std::make_unique<SetMlpModel>(*this); }

 private:
  Mlp input_map_;
  HeadParams head_;
};

/// Dense tanh network over the flattened 3N coordinates.
class PlainMlpModel final : public Model {
 public:
  explicit PlainMlpModel(ModelSpec spec);

  Eigen::VectorXd logits(const std::vector<Point3>& points) const override;
  LossAndGrad loss_and_grad(const std::vector<Point3>& points, int label) const override;
  std::vector<double> flat_params() const override;
  void set_flat_params(std::span<const double> values) override;
  void initialize(std::mt19937_64& rng) override;
  std::unique_ptr<Model> clone() const override { return std::make_unique<PlainMlpModel>(*this); }

 private:
  Mlp net_;
};

/// Builds a zero-parameter model; hybrid models take their generators from `cache`.
std::unique_ptr<Model> make_model(const ModelSpec& spec, GeneratorCache& cache);

}  // namespace hyqurp
