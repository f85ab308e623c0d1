#pragma once

// Reference implementations used only by the tests. They are deliberately
// naive and share no code with the library.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Eigen::Matrix2cd pauli(char axis) {
  Eigen::Matrix2cd m;
  switch (axis) {
    case 'x': m << 0, 1, 1, 0; break;
    case 'y': m << 0, cplx(0, -1), cplx(0, 1), 0; break;
    case 'z': m << 1, 0, 0, -1; break;
    default: m.setIdentity();
  }
  return m;
}

// Operator acting with `u` on `wire` (wire 0 is the leftmost tensor factor).
inline Eigen::MatrixXcd on_wire(int n, int wire, const Eigen::Matrix2cd& u) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
  for (int w = 0; w < n; ++w) out = kron(out, w == wire ? Eigen::MatrixXcd(u) : Eigen::MatrixXcd::Identity(2, 2));
  return out;
}

// Matrix of the wire permutation moving the qubit on wire w to wire sigma[w].
inline Eigen::MatrixXd permutation_matrix(int n, const std::vector<int>& sigma) {
  const std::size_t dim = std::size_t{1} << n;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t x = 0; x < dim; ++x) {
    std::size_t y = 0;
    for (int w = 0; w < n; ++w) {
      const std::size_t bit = (x >> (n - 1 - w)) & 1U;
      y |= bit << (n - 1 - sigma[static_cast<std::size_t>(w)]);
    }
    m(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)) = 1.0;
  }
  return m;
}

// exp(a) by scaling and squaring with a Taylor series.
inline Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::pow(2.0, squarings) > 0.25) ++squarings;
  const Eigen::MatrixXcd s = a / std::pow(2.0, squarings);
  Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(a.rows(), a.cols());
  Eigen::MatrixXcd sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * s / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

// Product of single-wire Paulis on wires (a, b): sigma_axis x sigma_axis.
inline Eigen::MatrixXcd pauli_pair(int n, int a, int b, char axis) {
  return on_wire(n, a, pauli(axis)) * on_wire(n, b, pauli(axis));
}

inline Eigen::VectorXcd random_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(Eigen::Index{1} << n);
  for (auto& a : v) a = cplx(g(rng), g(rng));
  return v / v.norm();
}

inline Eigen::Matrix2cd random_su2(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  double q[4];
  double s = 0;
  for (double& x : q) {
    x = g(rng);
    s += x * x;
  }
  s = std::sqrt(s);
  const cplx a(q[0] / s, q[1] / s), b(q[2] / s, q[3] / s);
  Eigen::Matrix2cd u;
  u << a, -std::conj(b), b, std::conj(a);
  return u;
}

// Rotation matrix acting on Bloch vectors: R_ij = tr(s_i u s_j u^dagger) / 2.
inline Eigen::Matrix3d bloch_rotation(const Eigen::Matrix2cd& u) {
  const char axes[3] = {'x', 'y', 'z'};
  Eigen::Matrix3d r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = 0.5 * (pauli(axes[i]) * u * pauli(axes[j]) * u.adjoint()).trace().real();
  return r;
}

}  // namespace oracle
