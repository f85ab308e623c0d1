#include "hyqurp/encoder.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hyqurp {

double Point3::norm() const { return std::sqrt(x * x + y * y + z * z); }

bool Point3::finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }

namespace {

void check_point(const Point3& p, const EncoderConfig& cfg) {
  if (!p.finite()) throw std::invalid_argument("encoder: non-finite point");
  if (!(cfg.theta > 0.0)) throw std::invalid_argument("encoder: theta must be positive");
  if (p.norm() / cfg.theta >= std::numbers::pi / 2) {
    throw std::domain_error("encoder: |p|/theta must stay below pi/2");
  }
}

}  // namespace

Mat2c encode_unitary(const Point3& p, const EncoderConfig& cfg) {
  check_point(p, cfg);
  const double r = p.norm();
  if (r == 0.0) return Mat2c::Identity();
  const double phi = r / cfg.theta;
  const double c = std::cos(phi);
  const double s = std::sin(phi) / r;  // folds the 1/|p| of the unit axis
  const cplx i(0.0, 1.0);
  Mat2c u;
  u(0, 0) = cplx(c, s * p.z);
  u(0, 1) = i * s * cplx(p.x, -p.y);
  u(1, 0) = i * s * cplx(p.x, p.y);
  u(1, 1) = cplx(c, -s * p.z);
  return u;
}

Mat2c rz(double angle) {
  Mat2c m = Mat2c::Zero();
  m(0, 0) = std::polar(1.0, -angle / 2);
  m(1, 1) = std::polar(1.0, angle / 2);
  return m;
}

Mat2c ry(double angle) {
  const double c = std::cos(angle / 2);
  const double s = std::sin(angle / 2);
  Mat2c m;
  m << c, -s, s, c;
  return m;
}

ZyzAngles zyz_angles(const Point3& p, const EncoderConfig& cfg) {
  check_point(p, cfg);
  const double r = p.norm();
  if (r <= 1e-12) return {};
  const double phi = r / cfg.theta;
  const double nx = p.x / r;
  const double ny = p.y / r;
  const double nz = p.z / r;
  if (nx == 0.0 && ny == 0.0) {
    const double sgn = nz > 0 ? 1.0 : -1.0;
    return {-2.0 * phi * sgn, 0.0, 0.0};
  }

  // (alpha + gamma)/2 = atan(-nz tan phi), (alpha - gamma)/2 = atan(-nx / ny),
  // with the branch of the second taken from the off-diagonal entry
  // -e^{-i(alpha-gamma)/2} sin(beta/2) = sin(phi) (ny + i nx).
  const double half_sum = std::atan2(-nz * std::sin(phi), std::cos(phi));
  const double half_diff = -std::atan2(-nx, -ny);
  ZyzAngles out;
  out.alpha = half_sum + half_diff;
  out.gamma = half_sum - half_diff;

  const double denom = std::sin(half_diff);
  const double off = std::sin(phi) * std::hypot(nx, ny);
  const double diag = std::hypot(std::cos(phi), nz * std::sin(phi));
  if (std::abs(denom) > 1e-6) {
    const double arg = std::clamp(std::sin(phi) * nx / denom, -1.0, 1.0);
    out.beta = 2.0 * std::asin(arg);
  } else {
    out.beta = 2.0 * std::atan2(off, diag);
  }
  return out;
}

double phase_aligned_residual(const Mat2c& target, const Mat2c& candidate) {
  Eigen::Index r = 0;
  Eigen::Index c = 0;
  target.cwiseAbs().maxCoeff(&r, &c);
  const cplx t = target(r, c);
  const cplx q = candidate(r, c);
  cplx phase(1.0, 0.0);
  if (std::abs(q) > 0.0) phase = (t / std::abs(t)) / (q / std::abs(q));
  return (target - phase * candidate).cwiseAbs().maxCoeff();
}

std::vector<Mat2c> encoding_layer(const std::vector<Point3>& points, const EncoderConfig& cfg) {
  if (points.empty()) throw std::invalid_argument("encoding_layer: empty point list");
  std::vector<Mat2c> layer;
  layer.reserve(points.size());
  for (const auto& p : points) layer.push_back(encode_unitary(p, cfg));
  return layer;
}

void apply_encoding_layer(StateVector& state, const std::vector<Mat2c>& layer) {
  if (static_cast<int>(2 * layer.size()) != state.n_qubits()) {
    throw std::invalid_argument("encoding layer size does not match register");
  }
  for (std::size_t i = 0; i < layer.size(); ++i) apply_single_qubit_inplace(state, static_cast<int>(2 * i), layer[i]);
}

}  // namespace hyqurp
