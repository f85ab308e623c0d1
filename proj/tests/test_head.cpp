#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hyqurp/head.hpp"

using namespace hyqurp;

namespace {

// Scalar reference: nested loops over plain vectors.
std::vector<double> scalar_layer(const DenseLayer& l, const std::vector<double>& x, bool act) {
  std::vector<double> y(static_cast<std::size_t>(l.out()));
  for (Eigen::Index o = 0; o < l.out(); ++o) {
    double s = l.bias[o];
    for (Eigen::Index i = 0; i < l.in(); ++i) s += l.weight(o, i) * x[static_cast<std::size_t>(i)];
    y[static_cast<std::size_t>(o)] = act ? std::tanh(s) : s;
  }
  return y;
}

std::vector<double> scalar_head(const SampleMatrix& f, const HeadParams& p) {
  const std::size_t m = static_cast<std::size_t>(f.rows());
  std::vector<std::vector<double>> tok;
  for (std::size_t r = 0; r < m; ++r) {
    std::vector<double> x{f(static_cast<Eigen::Index>(r), 0), f(static_cast<Eigen::Index>(r), 1)};
    for (const auto& l : p.pre.layers) x = scalar_layer(l, x, true);
    tok.push_back(x);
  }
  const std::size_t d = tok[0].size();
  std::vector<double> agg(6 * d);
  for (std::size_t c = 0; c < d; ++c) {
    double sum = 0, mx = -1e300, mn = 1e300;
    for (const auto& t : tok) {
      sum += t[c];
      mx = std::max(mx, t[c]);
      mn = std::min(mn, t[c]);
    }
    const double mean = sum / static_cast<double>(m);
    double var = 0;
    for (const auto& t : tok) var += (t[c] - mean) * (t[c] - mean);
    var /= static_cast<double>(m);
    agg[c] = mean;
    agg[d + c] = mx;
    agg[2 * d + c] = mn;
    agg[3 * d + c] = sum;
    agg[4 * d + c] = var;
    agg[5 * d + c] = std::sqrt(var);
  }
  std::vector<double> x = agg;
  for (std::size_t i = 0; i < p.post.layers.size(); ++i) {
    x = scalar_layer(p.post.layers[i], x, i + 1 < p.post.layers.size());
  }
  return x;
}

HeadParams random_head(const HeadConfig& cfg, std::uint64_t seed) {
  HeadParams p = HeadParams::zeros(cfg);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  for (auto* mlp : {&p.pre, &p.post})
    for (auto& l : mlp->layers) {
      for (Eigen::Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = u(rng);
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = u(rng);
    }
  return p;
}

SampleMatrix random_features(int rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  SampleMatrix f(rows, 2);
  for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = u(rng);
  return f;
}

std::vector<double> flat(const HeadParams& p) {
  std::vector<double> v;
  pack(p.pre, v);
  pack(p.post, v);
  return v;
}

void set_flat(HeadParams& p, const std::vector<double>& v) {
  const std::size_t used = unpack(p.pre, v);
  unpack(p.post, std::span<const double>(v).subspan(used));
}

}  // namespace

TEST(HeadConfig, ParameterCounts) {
  EXPECT_EQ(HeadParams::zeros(HeadConfig::light(5)).pre.param_count(), 32u);
  EXPECT_EQ(HeadParams::zeros(HeadConfig::light(5)).post.param_count(), 1325u);
  EXPECT_EQ(HeadParams::zeros(HeadConfig::light(5)).param_count(), 1357u);
  EXPECT_EQ(HeadParams::zeros(HeadConfig::mid(5)).param_count(), 7597u);
  EXPECT_THROW(HeadConfig::profile("heavy", 5), std::invalid_argument);
}

TEST(Aggregate, TwoRowHandExample) {
  SampleMatrix y(2, 1);
  y << 1, 3;
  const Eigen::VectorXd a = aggregate(y);
  const Eigen::VectorXd expected = (Eigen::VectorXd(6) << 2, 3, 1, 4, 1, 1).finished();
  EXPECT_LT((a - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Aggregate, IdenticalRowsAndSingleRow) {
  SampleMatrix y = SampleMatrix::Constant(4, 2, 0.7);
  Eigen::VectorXd a = aggregate(y);
  for (int c = 0; c < 2; ++c) {
    EXPECT_DOUBLE_EQ(a[c], 0.7);
    EXPECT_DOUBLE_EQ(a[2 + c], 0.7);
    EXPECT_DOUBLE_EQ(a[4 + c], 0.7);
    EXPECT_NEAR(a[6 + c], 2.8, 1e-15);
    EXPECT_NEAR(a[8 + c], 0.0, 1e-15);
    EXPECT_NEAR(a[10 + c], 0.0, 1e-15);
  }
  SampleMatrix one(1, 3);
  one << 1, -2, 5;
  a = aggregate(one);
  for (int blk : {0, 1, 2, 3}) EXPECT_EQ(a.segment(3 * blk, 3), one.row(0).transpose());
  EXPECT_EQ(a.segment(12, 6), Eigen::VectorXd::Zero(6));
}

TEST(HeadForward, MatchesScalarOracle) {
  HeadConfig cfg;
  cfg.pre_widths = {2, 2};
  cfg.post_widths = {12, 3};
  HeadParams p = HeadParams::zeros(cfg);
  p.pre.layers[0].weight << 0.5, -0.25, 1.0, 0.75;
  p.pre.layers[0].bias << 0.1, -0.2;
  for (Eigen::Index i = 0; i < p.post.layers[0].weight.size(); ++i) p.post.layers[0].weight.data()[i] = 0.05 * (i % 7) - 0.1;
  p.post.layers[0].bias << 0.3, 0.0, -0.3;
  SampleMatrix f(3, 2);
  f << 1.0, -2.0, 0.5, 0.25, -1.5, 3.0;
  const Eigen::VectorXd logits = head_forward(f, p, nullptr);
  const auto expected = scalar_head(f, p);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(logits[k], expected[static_cast<std::size_t>(k)], 1e-14);

  const HeadParams q = random_head(HeadConfig::light(5), 7);
  const SampleMatrix g = random_features(6, 8);
  const Eigen::VectorXd l2 = head_forward(g, q, nullptr);
  const auto e2 = scalar_head(g, q);
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(l2[k], e2[static_cast<std::size_t>(k)], 1e-12);
}

TEST(HeadForward, RowPermutationInvariantAndZeroWeights) {
  const HeadParams p = random_head(HeadConfig::light(4), 9);
  const SampleMatrix f = random_features(6, 10);
  SampleMatrix g = f;
  g.row(0).swap(g.row(4));
  g.row(1).swap(g.row(5));
  EXPECT_EQ(head_forward(f, p, nullptr), head_forward(g, p, nullptr));
  const HeadParams z = HeadParams::zeros(HeadConfig::light(4));
  EXPECT_EQ(head_forward(f, z, nullptr), Eigen::VectorXd::Zero(4));
}

TEST(HeadBackward, ZeroUpstreamGivesZeroGradients) {
  const HeadParams p = random_head(HeadConfig::light(3), 11);
  HeadCache cache;
  head_forward(random_features(3, 12), p, &cache);
  const HeadGradients g = head_backward(Eigen::VectorXd::Zero(3), cache, p);
  for (double v : flat(g.d_params)) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(g.d_features, SampleMatrix::Zero(3, 2));
}

TEST(HeadBackward, MatchesFiniteDifferences) {
  const HeadConfig cfg = HeadConfig::light(5);
  HeadParams p = random_head(cfg, 13);
  const SampleMatrix f = random_features(6, 14);
  const Eigen::VectorXd w = (Eigen::VectorXd(5) << 0.3, -1.1, 0.7, 0.2, -0.4).finished();
  auto loss = [&](const HeadParams& q, const SampleMatrix& x) { return w.dot(head_forward(x, q, nullptr)); };

  HeadCache cache;
  head_forward(f, p, &cache);
  const HeadGradients g = head_backward(w, cache, p);
  const std::vector<double> analytic = flat(g.d_params);
  std::vector<double> theta = flat(p);
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double keep = theta[i];
    theta[i] = keep + h;
    set_flat(p, theta);
    const double up = loss(p, f);
    theta[i] = keep - h;
    set_flat(p, theta);
    const double down = loss(p, f);
    theta[i] = keep;
    const double fd = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(fd - analytic[i]) / std::max({std::abs(fd), std::abs(analytic[i]), 1e-4}));
  }
  set_flat(p, theta);
  EXPECT_LE(worst, 1e-5);

  double worst_x = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    SampleMatrix a = f, b = f;
    a.data()[i] += h;
    b.data()[i] -= h;
    const double fd = (loss(p, a) - loss(p, b)) / (2 * h);
    worst_x = std::max(worst_x, std::abs(fd - g.d_features.data()[i]) / std::max(std::abs(fd), 1e-4));
  }
  EXPECT_LE(worst_x, 1e-5);
}

TEST(HeadBackward, FeatureGradientIsRowEquivariant) {
  const HeadParams p = random_head(HeadConfig::light(3), 15);
  const SampleMatrix f = random_features(4, 16);
  SampleMatrix g = f;
  g.row(0).swap(g.row(3));
  const Eigen::VectorXd up = (Eigen::VectorXd(3) << 1.0, -0.5, 0.25).finished();
  HeadCache cf, cg;
  head_forward(f, p, &cf);
  head_forward(g, p, &cg);
  SampleMatrix df = head_backward(up, cf, p).d_features;
  const SampleMatrix dg = head_backward(up, cg, p).d_features;
  df.row(0).swap(df.row(3));
  EXPECT_LT((df - dg).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(HeadBackward, StaleCacheIsRejected) {
  HeadParams p = random_head(HeadConfig::light(3), 17);
  HeadCache cache;
  head_forward(random_features(3, 18), p, &cache);
  p.post.layers[0].bias[0] += 1.0;
  EXPECT_THROW(head_backward(Eigen::VectorXd::Ones(3), cache, p), std::logic_error);
}

TEST(Mlp, PackUnpackRoundTripAndGlorotBounds) {
  const int widths[] = {3, 5, 2};
  Mlp m = Mlp::zeros(widths, true);
  std::mt19937_64 rng(19);
  init_glorot(m, rng);
  const double bound = std::sqrt(6.0 / 8.0);
  EXPECT_LE(m.layers[0].weight.cwiseAbs().maxCoeff(), bound);
  EXPECT_EQ(m.layers[0].bias, Eigen::VectorXd::Zero(5));
  std::vector<double> v;
  pack(m, v);
  EXPECT_EQ(v.size(), m.param_count());
  EXPECT_EQ(v[1], m.layers[0].weight(0, 1));
  Mlp n = Mlp::zeros(widths, true);
  EXPECT_EQ(unpack(n, v), v.size());
  EXPECT_EQ(n.layers[1].weight, m.layers[1].weight);
  EXPECT_THROW(unpack(n, std::span<const double>(v).first(4)), std::invalid_argument);
}
