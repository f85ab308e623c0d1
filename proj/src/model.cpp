#include "hyqurp/model.hpp"

#include <stdexcept>

#include "hyqurp/grad.hpp"

namespace hyqurp {

namespace {

// Circuit coefficients start small so the initial features are near the
// zero-circuit null but gradients are not.
constexpr double kCircuitInitScale = 0.1;

SampleMatrix points_matrix(const std::vector<Point3>& points) {
  SampleMatrix m(static_cast<Eigen::Index>(points.size()), 3);
  for (std::size_t i = 0; i < points.size(); ++i) {
    m(static_cast<Eigen::Index>(i), 0) = points[i].x;
    m(static_cast<Eigen::Index>(i), 1) = points[i].y;
    m(static_cast<Eigen::Index>(i), 2) = points[i].z;
  }
  return m;
}

void check_points(const ModelSpec& spec, const std::vector<Point3>& points) {
  if (static_cast<int>(points.size()) != spec.n_points) {
    throw std::invalid_argument("model expects " + std::to_string(spec.n_points) + " points, got " +
                                std::to_string(points.size()));
  }
}

std::vector<double> pack_head(const HeadParams& head) {
  std::vector<double> out;
  pack(head.pre, out);
  pack(head.post, out);
  return out;
}

std::size_t unpack_head(HeadParams& head, std::span<const double> in) {
  std::size_t used = unpack(head.pre, in);
  used += unpack(head.post, in.subspan(used));
  return used;
}

void zero_like(Mlp& m) {
  for (auto& l : m.layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Hybrid:
      return "hybrid";
    case ModelKind::SetMlp:
      return "setmlp";
    case ModelKind::PlainMlp:
      return "mlp";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "hybrid") return ModelKind::Hybrid;
  if (name == "setmlp") return ModelKind::SetMlp;
  if (name == "mlp") return ModelKind::PlainMlp;
  throw std::invalid_argument("unknown model '" + name + "' (expected hybrid, setmlp or mlp)");
}

std::vector<int> ModelSpec::plain_widths() const {
  std::vector<int> widths{3 * n_points};
  if (profile == "light") {
    widths.insert(widths.end(), {32, 24});
  } else if (profile == "mid") {
    widths.insert(widths.end(), {96, 48, 24});
  } else {
    throw std::invalid_argument("unknown profile '" + profile + "'");
  }
  widths.push_back(classes);
  return widths;
}

// ---------------------------------------------------------------- hybrid

HybridModel::HybridModel(ModelSpec spec, std::shared_ptr<const GeneratorSet> gens)
    : Model(std::move(spec)), gens_(std::move(gens)) {
  if (!gens_ || gens_->pair_count() != spec_.n_points) throw std::invalid_argument("generator set does not match N");
  circuit_ = CircuitParams(spec_.blocks, spec_.n_points);
  head_ = HeadParams::zeros(spec_.head_config());
}

FeatureMatrix HybridModel::features(const std::vector<Point3>& points) const {
  check_points(spec_, points);
  return forward(points, circuit_, circuit_config(), *gens_);
}

Eigen::VectorXd HybridModel::logits(const std::vector<Point3>& points) const {
  return head_forward(features(points), head_, nullptr);
}

LossAndGrad HybridModel::loss_and_grad(const std::vector<Point3>& points, int label) const {
  check_points(spec_, points);
  GradientBundle b = hybrid_loss_and_grads(points, label, circuit_, head_, circuit_config(), *gens_);
  LossAndGrad out{b.loss, std::move(b.logits), std::move(b.d_quantum)};
  pack(b.d_head.pre, out.grad);
  pack(b.d_head.post, out.grad);
  return out;
}

std::vector<double> HybridModel::flat_params() const {
  std::vector<double> out = circuit_.values();
  pack(head_.pre, out);
  pack(head_.post, out);
  return out;
}

void HybridModel::set_flat_params(std::span<const double> values) {
  const std::size_t nq = circuit_.size();
  if (values.size() != nq + head_.param_count()) throw std::invalid_argument("parameter count mismatch");
  std::copy(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(nq), circuit_.values().begin());
  unpack_head(head_, values.subspan(nq));
}

void HybridModel::initialize(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-kCircuitInitScale, kCircuitInitScale);
  for (double& c : circuit_.values()) c = dist(rng);
  init_glorot(head_.pre, rng);
  init_glorot(head_.post, rng);
}

// ---------------------------------------------------------------- set-mlp

SetMlpModel::SetMlpModel(ModelSpec spec) : Model(std::move(spec)) {
  const int widths[] = {3, 2};
  input_map_ = Mlp::zeros(widths, true);
  head_ = HeadParams::zeros(spec_.head_config());
}

Eigen::VectorXd SetMlpModel::logits(const std::vector<Point3>& points) const {
  check_points(spec_, points);
  return head_forward(mlp_forward(input_map_, points_matrix(points), nullptr), head_, nullptr);
}

LossAndGrad SetMlpModel::loss_and_grad(const std::vector<Point3>& points, int label) const {
  check_points(spec_, points);
  MlpCache in_cache;
  const SampleMatrix tokens = mlp_forward(input_map_, points_matrix(points), &in_cache);
  HeadCache cache;
  LossAndGrad out;
  out.logits = head_forward(tokens, head_, &cache);
  const CrossEntropy ce = cross_entropy(out.logits, label);
  out.loss = ce.loss;
  HeadGradients hg = head_backward(ce.dlogits, cache, head_);
  Mlp d_in = input_map_;
  zero_like(d_in);
  mlp_backward(input_map_, in_cache, hg.d_features, d_in);
  pack(d_in, out.grad);
  pack(hg.d_params.pre, out.grad);
  pack(hg.d_params.post, out.grad);
  return out;
}

std::vector<double> SetMlpModel::flat_params() const {
  std::vector<double> out;
  pack(input_map_, out);
  const auto head = pack_head(head_);
  out.insert(out.end(), head.begin(), head.end());
  return out;
}

void SetMlpModel::set_flat_params(std::span<const double> values) {
  if (values.size() != input_map_.param_count() + head_.param_count()) {
    throw std::invalid_argument("parameter count mismatch");
  }
  const std::size_t used = unpack(input_map_, values);
  unpack_head(head_, values.subspan(used));
}

void SetMlpModel::initialize(std::mt19937_64& rng) {
  init_glorot(input_map_, rng);
  init_glorot(head_.pre, rng);
  init_glorot(head_.post, rng);
}

// ---------------------------------------------------------------- plain mlp

PlainMlpModel::PlainMlpModel(ModelSpec spec) : Model(std::move(spec)) {
  net_ = Mlp::zeros(spec_.plain_widths(), true);
}

Eigen::VectorXd PlainMlpModel::logits(const std::vector<Point3>& points) const {
  check_points(spec_, points);
  SampleMatrix flat = points_matrix(points).transpose().reshaped(1, 3 * spec_.n_points);
  return mlp_forward(net_, flat, nullptr).row(0).transpose();
}

LossAndGrad PlainMlpModel::loss_and_grad(const std::vector<Point3>& points, int label) const {
  check_points(spec_, points);
  SampleMatrix flat = points_matrix(points).transpose().reshaped(1, 3 * spec_.n_points);
  MlpCache cache;
  LossAndGrad out;
  out.logits = mlp_forward(net_, flat, &cache).row(0).transpose();
  const CrossEntropy ce = cross_entropy(out.logits, label);
  out.loss = ce.loss;
  Mlp d = net_;
  zero_like(d);
  mlp_backward(net_, cache, ce.dlogits.transpose(), d);
  pack(d, out.grad);
  return out;
}

std::vector<double> PlainMlpModel::flat_params() const {
  std::vector<double> out;
  pack(net_, out);
  return out;
}

void PlainMlpModel::set_flat_params(std::span<const double> values) {
  if (values.size() != net_.param_count()) throw std::invalid_argument("parameter count mismatch");
  unpack(net_, values);
}

void PlainMlpModel::initialize(std::mt19937_64& rng) { init_glorot(net_, rng); }

std::unique_ptr<Model> make_model(const ModelSpec& spec, GeneratorCache& cache) {
  switch (spec.kind) {
    case ModelKind::Hybrid:
      return std::make_unique<HybridModel>(spec, cache.get(spec.n_points));
    case ModelKind::SetMlp:
      return std::make_unique<SetMlpModel>(spec);
    case ModelKind::PlainMlp:
      return std::make_unique<PlainMlpModel>(spec);
  }
  throw std::invalid_argument("unknown model kind");
}

}  // namespace hyqurp
