#include "hyqurp/head.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace hyqurp {

Mlp Mlp::zeros(std::span<const int> widths, bool linear_output) {
  if (widths.size() < 2) throw std::invalid_argument("an MLP needs at least an input and output width");
  Mlp m;
  m.linear_output = linear_output;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    if (widths[i] < 1 || widths[i + 1] < 1) throw std::invalid_argument("layer widths must be positive");
    m.layers.push_back({Eigen::MatrixXd::Zero(widths[i + 1], widths[i]), Eigen::VectorXd::Zero(widths[i + 1])});
  }
  return m;
}

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

SampleMatrix mlp_forward(const Mlp& mlp, const SampleMatrix& x, MlpCache* cache) {
  if (cache) {
    cache->inputs.clear();
    cache->outputs.clear();
  }
  SampleMatrix a = x;
  for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
    const auto& layer = mlp.layers[i];
    if (a.cols() != layer.in()) throw std::invalid_argument("MLP input width mismatch");
    if (cache) cache->inputs.push_back(a);
    SampleMatrix z = a * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    const bool last = i + 1 == mlp.layers.size();
    if (!(last && mlp.linear_output)) z = z.array().tanh().matrix();
    if (cache) cache->outputs.push_back(z);
    a = std::move(z);
  }
  return a;
}

SampleMatrix mlp_backward(const Mlp& mlp, const MlpCache& cache, const SampleMatrix& dout, Mlp& grad) {
  SampleMatrix d = dout;
  for (std::size_t ri = mlp.layers.size(); ri-- > 0;) {
    const auto& layer = mlp.layers[ri];
    const bool last = ri + 1 == mlp.layers.size();
    if (!(last && mlp.linear_output)) {
      d = (d.array() * (1.0 - cache.outputs[ri].array().square())).matrix();
    }
    grad.layers[ri].weight += d.transpose() * cache.inputs[ri];
    grad.layers[ri].bias += d.colwise().sum().transpose();
    d = d * layer.weight;
  }
  return d;
}

void init_glorot(Mlp& mlp, std::mt19937_64& rng) {
  for (auto& layer : mlp.layers) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in() + layer.out()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = dist(rng);
    }
    layer.bias.setZero();
  }
}

HeadConfig HeadConfig::light(int classes) { return {{2, 4, 4}, {24, 24, 24, classes}}; }

HeadConfig HeadConfig::mid(int classes) { return {{2, 8, 16, 32}, {192, 32, 16, 8, classes}}; }

HeadConfig HeadConfig::profile(const std::string& name, int classes) {
  if (name == "light") return light(classes);
  if (name == "mid") return mid(classes);
  throw std::invalid_argument("unknown head profile '" + name + "' (expected light or mid)");
}

void HeadConfig::validate() const {
  if (pre_widths.size() < 2 || post_widths.size() < 2) throw std::invalid_argument("head needs two MLP stacks");
  if (pre_widths.front() != 2) throw std::invalid_argument("per-row MLP must take 2 inputs");
  if (post_widths.front() != kAggregateCount * pre_widths.back()) {
    throw std::invalid_argument("classifier input must be 6 x token width");
  }
  if (post_widths.back() < 2) throw std::invalid_argument("need at least two classes");
}

HeadParams HeadParams::zeros(const HeadConfig& cfg) {
  cfg.validate();
  return {Mlp::zeros(cfg.pre_widths, false), Mlp::zeros(cfg.post_widths, true)};
}

std::size_t HeadParams::param_count() const { return pre.param_count() + post.param_count(); }

namespace {

// Sums taken over sorted values so the statistics do not depend on row order.
struct Moments {
  double sum;
  double mean;
  double var;
};

Moments column_moments(const Eigen::Ref<const Eigen::VectorXd>& col) {
  std::vector<double> v(col.data(), col.data() + col.size());
  std::sort(v.begin(), v.end());
  const double m = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / m;
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
  std::sort(sq.begin(), sq.end());
  double ss = 0.0;
  for (double x : sq) ss += x;
  return {sum, mean, ss / m};
}

}  // namespace

Eigen::VectorXd aggregate(const SampleMatrix& y) {
  const Eigen::Index m = y.rows();
  const Eigen::Index d = y.cols();
  if (m < 1) throw std::invalid_argument("aggregate: need at least one row");
  Eigen::VectorXd out(kAggregateCount * d);
  for (Eigen::Index c = 0; c < d; ++c) {
    const auto col = y.col(c);
    const auto [sum, mean, var] = column_moments(col);
    out[0 * d + c] = mean;
    out[1 * d + c] = col.maxCoeff();
    out[2 * d + c] = col.minCoeff();
    out[3 * d + c] = sum;
    out[4 * d + c] = var;
    out[5 * d + c] = std::sqrt(var);
  }
  return out;
}

SampleMatrix aggregate_backward(const SampleMatrix& y, const Eigen::VectorXd& dagg) {
  const Eigen::Index m = y.rows();
  const Eigen::Index d = y.cols();
  if (dagg.size() != kAggregateCount * d) throw std::invalid_argument("aggregate gradient shape mismatch");
  SampleMatrix dy = SampleMatrix::Zero(m, d);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (Eigen::Index c = 0; c < d; ++c) {
    const auto col = y.col(c);
    const auto [sum, mean, var] = column_moments(col);
    const double sd = std::sqrt(var);
    Eigen::Index arg_max = 0;
    Eigen::Index arg_min = 0;
    for (Eigen::Index r = 1; r < m; ++r) {
      if (col[r] > col[arg_max]) arg_max = r;
      if (col[r] < col[arg_min]) arg_min = r;
    }
    for (Eigen::Index r = 0; r < m; ++r) {
      const double dev = col[r] - mean;
      double g = dagg[0 * d + c] * inv_m + dagg[3 * d + c];
      g += dagg[4 * d + c] * 2.0 * dev * inv_m;
      if (sd > 0.0) g += dagg[5 * d + c] * dev * inv_m / sd;
      dy(r, c) = g;
    }
    dy(arg_max, c) += dagg[1 * d + c];
    dy(arg_min, c) += dagg[2 * d + c];
  }
  return dy;
}

std::uint64_t fingerprint(const HeadParams& params) {
  std::vector<double> flat;
  pack(params.pre, flat);
  pack(params.post, flat);
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a over the raw bits
  for (double v : flat) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    h = (h ^ bits) * 1099511628211ULL;
  }
  return h;
}

Eigen::VectorXd head_forward(const SampleMatrix& features, const HeadParams& params, HeadCache* cache) {
  if (features.cols() != 2) throw std::invalid_argument("head_forward: features must have 2 columns");
  if (features.rows() < 1) throw std::invalid_argument("head_forward: no feature rows");
  MlpCache* pre_cache = cache ? &cache->pre : nullptr;
  MlpCache* post_cache = cache ? &cache->post : nullptr;
  SampleMatrix tokens = mlp_forward(params.pre, features, pre_cache);
  const Eigen::VectorXd agg = aggregate(tokens);
  const SampleMatrix logits = mlp_forward(params.post, agg.transpose(), post_cache);
  if (cache) {
    cache->tokens = std::move(tokens);
    cache->params_fingerprint = fingerprint(params);
  }
  return logits.row(0).transpose();
}

HeadGradients head_backward(const Eigen::VectorXd& dlogits, const HeadCache& cache, const HeadParams& params) {
  if (cache.pre.inputs.empty() || cache.params_fingerprint != fingerprint(params)) {
    throw std::logic_error("head_backward: cache does not belong to these parameters");
  }
  HeadGradients g{{}, {}};
  g.d_params.pre = params.pre;
  g.d_params.post = params.post;
  for (auto& l : g.d_params.pre.layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  for (auto& l : g.d_params.post.layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  const SampleMatrix dagg = mlp_backward(params.post, cache.post, dlogits.transpose(), g.d_params.post);
  const SampleMatrix dtokens = aggregate_backward(cache.tokens, dagg.row(0).transpose());
  g.d_features = mlp_backward(params.pre, cache.pre, dtokens, g.d_params.pre);
  return g;
}

void pack(const Mlp& mlp, std::vector<double>& out) {
  for (const auto& l : mlp.layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out.push_back(l.weight(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) out.push_back(l.bias[r]);
  }
}

std::size_t unpack(Mlp& mlp, std::span<const double> in) {
  std::size_t pos = 0;
  auto next = [&]() {
    if (pos >= in.size()) throw std::invalid_argument("unpack: not enough values");
    return in[pos++];
  };
  for (auto& l : mlp.layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = next();
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias[r] = next();
  }
  return pos;
}

}  // namespace hyqurp
