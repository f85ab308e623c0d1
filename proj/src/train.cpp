#include "hyqurp/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace hyqurp {

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw std::invalid_argument("learning rate must be finite and >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(sigma_jitter >= 0.0)) throw std::invalid_argument("sigma_jitter must be >= 0");
}

void adam_step(std::span<double> params, std::span<const double> grads, OptimizerState& state, double lr) {
  if (params.size() != grads.size()) throw std::invalid_argument("adam_step: shape mismatch");
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size()) throw std::invalid_argument("adam_step: optimizer state shape mismatch");
  ++state.t;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = kAdamBeta1 * state.m[i] + (1.0 - kAdamBeta1) * grads[i];
    state.v[i] = kAdamBeta2 * state.v[i] + (1.0 - kAdamBeta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + kAdamEps);
  }
}

std::mt19937_64 make_stream(std::uint64_t seed, Stream purpose, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

std::vector<Point3> augment(const std::vector<Point3>& points, std::mt19937_64& rng, const AugmentFlags& flags,
                            double sigma_jitter) {
  std::vector<Point3> out = points;
  if (flags.rotation) {
    const Mat3 r = random_rotation(rng);
    for (auto& p : out) p = rotate(r, p);
  }
  if (flags.permutation) std::shuffle(out.begin(), out.end(), rng);
  if (flags.jitter && sigma_jitter > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma_jitter);
    for (auto& p : out) p = {p.x + noise(rng), p.y + noise(rng), p.z + noise(rng)};
  }
  return out;
}

int argmax(const Eigen::VectorXd& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = static_cast<int>(i);
  }
  return best;
}

double accuracy(const Model& model, const std::vector<SampledItem>& items) {
  if (items.empty()) throw std::invalid_argument("accuracy: empty split");
  std::size_t correct = 0;
  for (const auto& item : items) {
    if (argmax(model.logits(item.points)) == item.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(items.size());
}

TrainResult train_loop(Model& model, const DatasetSplits& data, const TrainConfig& cfg, std::uint64_t seed,
                       const EpochCallback& on_epoch) {
  cfg.validate();
  if (data.train.empty()) throw std::invalid_argument("train split is empty");
  if (data.val.empty()) throw std::invalid_argument("validation split is empty");
  if (data.test.empty()) throw std::invalid_argument("test split is empty");
  for (const auto* split : {&data.train, &data.val, &data.test}) {
    for (const auto& item : *split) {
      if (item.label < 0 || item.label >= model.spec().classes) {
        throw std::invalid_argument("object " + item.id + " has label outside the model's classes");
      }
    }
  }

  {
    auto init_rng = make_stream(seed, Stream::Init, 0);
    model.initialize(init_rng);
  }
  std::vector<double> params = model.flat_params();
  OptimizerState opt;

  TrainResult result;
  result.best.spec = model.spec();
  result.best.lr = cfg.lr;
  result.best.batch_size = cfg.batch_size;
  result.best.sigma_jitter = cfg.sigma_jitter;
  result.best.seed = seed;
  result.best.best_val_acc = -1.0;

  const std::size_t n_train = data.train.size();
  std::vector<std::size_t> order(n_train);
  std::vector<double> grad_sum(params.size());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    auto rng = make_stream(seed, Stream::Epoch, static_cast<std::uint64_t>(epoch));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < n_train; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(n_train, start + static_cast<std::size_t>(cfg.batch_size));
      std::fill(grad_sum.begin(), grad_sum.end(), 0.0);
      for (std::size_t b = start; b < stop; ++b) {
        const SampledItem& item = data.train[order[b]];
        const auto pts = augment(item.points, rng, cfg.augment, cfg.sigma_jitter);
        const LossAndGrad lg = model.loss_and_grad(pts, item.label);
        if (!std::isfinite(lg.loss)) {
          std::ostringstream msg;
          msg << "non-finite loss at epoch " << epoch << ", object " << item.id << " (lr=" << cfg.lr
              << "); the training loss did not decrease";
          throw TrainingDiverged(msg.str());
        }
        loss_sum += lg.loss;
        if (argmax(lg.logits) == item.label) ++correct;
        for (std::size_t i = 0; i < grad_sum.size(); ++i) grad_sum[i] += lg.grad[i];
      }
      const double inv = 1.0 / static_cast<double>(stop - start);
      for (double& g : grad_sum) g *= inv;
      adam_step(params, grad_sum, opt, cfg.lr);
      model.set_flat_params(params);
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss_sum / static_cast<double>(n_train);
    m.train_acc = static_cast<double>(correct) / static_cast<double>(n_train);
    m.val_acc = accuracy(model, data.val);
    result.log.push_back(m);
    if (m.val_acc > result.best.best_val_acc) {
      result.best.best_val_acc = m.val_acc;
      result.best.epoch = epoch;
      result.best.params = params;
    }
    if (on_epoch) on_epoch(m);
  }

  model.set_flat_params(result.best.params);
  result.test_acc = accuracy(model, data.test);
  return result;
}

InvarianceMetrics compare_logits(const Eigen::VectorXd& original, const Eigen::VectorXd& transformed) {
  if (original.size() == transformed.size() && original == transformed) return {1.0, 1.0};
  const double n0 = original.norm();
  const double n1 = transformed.norm();
  if (n0 == 0.0) {
    // Degenerate zero logits; only an exactly matching zero vector counts as invariant.
    return n1 == 0.0 ? InvarianceMetrics{} : InvarianceMetrics{0.0, std::numeric_limits<double>::infinity()};
  }
  if (n1 == 0.0) return {0.0, 0.0};
  return {original.dot(transformed) / (n0 * n1), n1 / n0};
}

InvarianceMetrics invariance_metrics(const Model& model, const std::vector<Point3>& points, const Mat3& rotation,
                                     std::span<const int> perm) {
  if (perm.size() != points.size() || !is_bijection(perm)) throw std::invalid_argument("bad point permutation");
  std::vector<Point3> moved(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) moved[static_cast<std::size_t>(perm[i])] = rotate(rotation, points[i]);
  return compare_logits(model.logits(points), model.logits(moved));
}

InvarianceMetrics invariance_metrics(const Model& model, const std::vector<Point3>& points, std::mt19937_64& rng) {
  const Mat3 r = random_rotation(rng);
  std::vector<int> perm(points.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  return invariance_metrics(model, points, r, perm);
}

std::unique_ptr<Model> model_from_checkpoint(const Checkpoint& ckpt, GeneratorCache& cache) {
  auto model = make_model(ckpt.spec, cache);
  model->set_flat_params(ckpt.params);
  return model;
}

}  // namespace hyqurp
