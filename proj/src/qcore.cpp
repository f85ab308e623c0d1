#include "hyqurp/qcore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace hyqurp {

namespace {

constexpr double kUnitaryTol = 1e-10;
constexpr double kHermitianTol = 1e-10;

int qubits_for_dim(Eigen::Index dim) {
  if (dim < 2 || !std::has_single_bit(static_cast<std::uint64_t>(dim))) {
    throw std::invalid_argument("dimension " + std::to_string(dim) + " is not a power of two >= 2");
  }
  return std::countr_zero(static_cast<std::uint64_t>(dim));
}

void check_wire(int wire, int n_qubits) {
  if (wire < 0 || wire >= n_qubits) {
    throw std::out_of_range("wire " + std::to_string(wire) + " out of range for " +
                            std::to_string(n_qubits) + " qubits");
  }
}

}  // namespace

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 1 || n_qubits > 30) throw std::invalid_argument("qubit count out of range");
  amps_ = Eigen::VectorXcd::Zero(Eigen::Index{1} << n_qubits);
  amps_[0] = 1.0;
}

StateVector::StateVector(int n_qubits, Eigen::VectorXcd amps)
    : n_qubits_(n_qubits), amps_(std::move(amps)) {
  if (n_qubits < 1 || n_qubits > 30) throw std::invalid_argument("qubit count out of range");
  if (amps_.size() != (Eigen::Index{1} << n_qubits)) {
    throw std::invalid_argument("amplitude count does not match 2^n_qubits");
  }
}

StateVector StateVector::basis(int n_qubits, std::uint64_t index) {
  StateVector s(n_qubits);
  if (index >= s.dim()) throw std::out_of_range("basis index out of range");
  s.amps_[0] = 0.0;
  s.amps_[static_cast<Eigen::Index>(index)] = 1.0;
  return s;
}

DenseOperator::DenseOperator(Eigen::MatrixXcd entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) throw std::invalid_argument("operator must be square");
  n_qubits_ = qubits_for_dim(entries_.rows());
}

bool is_bijection(std::span<const int> perm) {
  std::vector<bool> seen(perm.size(), false);
  for (int p : perm) {
    if (p < 0 || static_cast<std::size_t>(p) >= perm.size() || seen[static_cast<std::size_t>(p)]) {
      return false;
    }
    seen[static_cast<std::size_t>(p)] = true;
  }
  return true;
}

WirePermutation compose(std::span<const int> outer, std::span<const int> inner) {
  if (outer.size() != inner.size()) throw std::invalid_argument("permutation sizes differ");
  WirePermutation out(inner.size());
  for (std::size_t w = 0; w < inner.size(); ++w) {
    out[w] = outer[static_cast<std::size_t>(inner[w])];
  }
  return out;
}

WirePermutation inverse(std::span<const int> perm) {
  WirePermutation inv(perm.size());
  for (std::size_t w = 0; w < perm.size(); ++w) inv[static_cast<std::size_t>(perm[w])] = static_cast<int>(w);
  return inv;
}

double max_abs_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("shape mismatch");
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

double unitarity_residual(const Eigen::MatrixXcd& u) {
  return max_abs_diff(u.adjoint() * u, Eigen::MatrixXcd::Identity(u.rows(), u.cols()));
}

void apply_single_qubit_inplace(StateVector& state, int wire, const Mat2c& u) {
  const int n = state.n_qubits();
  check_wire(wire, n);
  if (unitarity_residual(u) > kUnitaryTol) throw std::invalid_argument("single-qubit gate is not unitary");
  const std::uint64_t bit = std::uint64_t{1} << (n - 1 - wire);
  auto& a = state.amps();
  const auto dim = static_cast<std::uint64_t>(a.size());
  for (std::uint64_t x = 0; x < dim; ++x) {
    if (x & bit) continue;
    const auto i0 = static_cast<Eigen::Index>(x);
    const auto i1 = static_cast<Eigen::Index>(x | bit);
    const cplx a0 = a[i0];
    const cplx a1 = a[i1];
    a[i0] = u(0, 0) * a0 + u(0, 1) * a1;
    a[i1] = u(1, 0) * a0 + u(1, 1) * a1;
  }
}

StateVector apply_single_qubit(const StateVector& state, int wire, const Mat2c& u) {
  StateVector out = state;
  apply_single_qubit_inplace(out, wire, u);
  return out;
}

std::uint64_t permute_index(std::uint64_t index, int n_qubits, std::span<const int> sigma) {
  std::uint64_t out = 0;
  for (int w = 0; w < n_qubits; ++w) {
    if (index >> (n_qubits - 1 - w) & 1U) {
      out |= std::uint64_t{1} << (n_qubits - 1 - sigma[static_cast<std::size_t>(w)]);
    }
  }
  return out;
}

StateVector apply_wire_permutation(const StateVector& state, std::span<const int> sigma) {
  const int n = state.n_qubits();
  if (static_cast<int>(sigma.size()) != n || !is_bijection(sigma)) {
    throw std::invalid_argument("wire permutation is not a bijection on the register");
  }
  Eigen::VectorXcd out(state.amps().size());
  for (std::uint64_t x = 0; x < state.dim(); ++x) {
    out[static_cast<Eigen::Index>(permute_index(x, n, sigma))] = state.amps()[static_cast<Eigen::Index>(x)];
  }
  return StateVector(n, std::move(out));
}

EigenDecomposition eig_hermitian(const DenseOperator& a) {
  const auto& m = a.entries();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (max_abs_diff(m, m.adjoint()) > kHermitianTol * scale) {
    throw std::invalid_argument("eig_hermitian: operator is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eig_hermitian: solver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double expectation(const StateVector& state, const DenseOperator& h) {
  if (h.dim() != static_cast<Eigen::Index>(state.dim())) {
    throw std::invalid_argument("expectation: dimension mismatch");
  }
  const cplx v = state.amps().dot(h.entries() * state.amps());
  if (std::abs(v.imag()) > 1e-10) throw std::domain_error("expectation: operator is not Hermitian");
  return v.real();
}

StateVector apply_global_unitary(const StateVector& state, const Mat2c& u) {
  StateVector out = state;
  for (int w = 0; w < state.n_qubits(); ++w) apply_single_qubit_inplace(out, w, u);
  return out;
}

namespace pauli {
Mat2c identity() { return Mat2c::Identity(); }
Mat2c x() {
  Mat2c m;
  m << 0, 1, 1, 0;
  return m;
}
Mat2c y() {
  Mat2c m;
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}
Mat2c z() {
  Mat2c m;
  m << 1, 0, 0, -1;
  return m;
}
}  // namespace pauli

void apply_pauli_inplace(Eigen::VectorXcd& amps, int n_qubits, int wire, PauliAxis axis) {
  const std::uint64_t bit = std::uint64_t{1} << (n_qubits - 1 - wire);
  const auto dim = static_cast<std::uint64_t>(amps.size());
  const cplx i_unit(0.0, 1.0);
  switch (axis) {
    case PauliAxis::X:
      for (std::uint64_t x = 0; x < dim; ++x) {
        if (!(x & bit)) std::swap(amps[static_cast<Eigen::Index>(x)], amps[static_cast<Eigen::Index>(x | bit)]);
      }
      break;
    case PauliAxis::Y:
      // Y|0> = i|1>, Y|1> = -i|0>
      for (std::uint64_t x = 0; x < dim; ++x) {
        if (x & bit) continue;
        const auto i0 = static_cast<Eigen::Index>(x);
        const auto i1 = static_cast<Eigen::Index>(x | bit);
        const cplx a0 = amps[i0];
        amps[i0] = -i_unit * amps[i1];
        amps[i1] = i_unit * a0;
      }
      break;
    case PauliAxis::Z:
      for (std::uint64_t x = 0; x < dim; ++x) {
        if (x & bit) amps[static_cast<Eigen::Index>(x)] = -amps[static_cast<Eigen::Index>(x)];
      }
      break;
  }
}

Eigen::MatrixXcd embed_single(int n_qubits, int wire, const Mat2c& u) {
  check_wire(wire, n_qubits);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Ones(1, 1);
  for (int w = 0; w < n_qubits; ++w) {
    const Mat2c f = (w == wire) ? u : Mat2c::Identity();
    Eigen::MatrixXcd next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      for (Eigen::Index c = 0; c < out.cols(); ++c) next.block(2 * r, 2 * c, 2, 2) = out(r, c) * f;
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace hyqurp
