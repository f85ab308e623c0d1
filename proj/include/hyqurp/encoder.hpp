#pragma once

#include <array>
#include <vector>

#include "hyqurp/qcore.hpp"

namespace hyqurp {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const;
  bool finite() const;
  friend bool operator==(const Point3&, const Point3&) = default;
};

struct EncoderConfig {
  double theta = 1.7;
};

/// E(p) = exp(i (p . sigma) / theta) = cos(phi) I + i sin(phi) (n . sigma).
Mat2c encode_unitary(const Point3& p, const EncoderConfig& cfg);

struct ZyzAngles {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

Mat2c rz(double angle);
Mat2c ry(double angle);

/// Angles with Rz(alpha) Ry(beta) Rz(gamma) equal to encode_unitary(p) up to
/// a global phase. Rz(a) = exp(-i a Z / 2), Ry(b) = exp(-i b Y / 2).
ZyzAngles zyz_angles(const Point3& p, const EncoderConfig& cfg);

/// Max elementwise deviation after aligning the global phase on the
/// largest-magnitude entry of `target`.
double phase_aligned_residual(const Mat2c& target, const Mat2c& candidate);

/// Encoding gates; entry i acts on wire 2i, odd wires stay untouched.
std::vector<Mat2c> encoding_layer(const std::vector<Point3>& points, const EncoderConfig& cfg);

void apply_encoding_layer(StateVector& state, const std::vector<Mat2c>& layer);

}  // namespace hyqurp
