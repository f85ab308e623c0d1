#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

// Dense statevector primitives.
//
// Basis convention: wire 0 is the most significant bit of the basis index,
// so for n qubits wire w corresponds to bit (n - 1 - w).

namespace hyqurp {

using cplx = std::complex<double>;
using Mat2c = Eigen::Matrix2cd;

class StateVector {
 public:
  explicit StateVector(int n_qubits);  // |0...0>
  StateVector(int n_qubits, Eigen::VectorXcd amps);

  static StateVector basis(int n_qubits, std::uint64_t index);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }

  const Eigen::VectorXcd& amps() const { return amps_; }
  Eigen::VectorXcd& amps() { return amps_; }

  cplx operator[](std::size_t i) const { return amps_[static_cast<Eigen::Index>(i)]; }

  double norm() const { return amps_.norm(); }

 private:
  int n_qubits_;
  Eigen::VectorXcd amps_;
};

class DenseOperator {
 public:
  explicit DenseOperator(Eigen::MatrixXcd entries);

  int n_qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return entries_.rows(); }
  const Eigen::MatrixXcd& entries() const { return entries_; }

 private:
  int n_qubits_;
  Eigen::MatrixXcd entries_;
};

struct EigenDecomposition {
  Eigen::VectorXd eigvals;   // ascending
  Eigen::MatrixXcd eigvecs;  // columns are eigenvectors
};

/// A permutation of wires: wire w is sent to wire perm[w].
using WirePermutation = std::vector<int>;

bool is_bijection(std::span<const int> perm);
WirePermutation compose(std::span<const int> outer, std::span<const int> inner);
WirePermutation inverse(std::span<const int> perm);

/// Largest |entry| of a - b.
double max_abs_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

double unitarity_residual(const Eigen::MatrixXcd& u);

StateVector apply_single_qubit(const StateVector& state, int wire, const Mat2c& u);
void apply_single_qubit_inplace(StateVector& state, int wire, const Mat2c& u);

/// Pi(sigma): the qubit on wire w moves to wire sigma[w].
StateVector apply_wire_permutation(const StateVector& state, std::span<const int> sigma);

/// Basis index remap of Pi(sigma) for a single computational basis index.
std::uint64_t permute_index(std::uint64_t index, int n_qubits, std::span<const int> sigma);

EigenDecomposition eig_hermitian(const DenseOperator& a);

/// Re<psi|H|psi>; throws if the imaginary residue exceeds 1e-10.
double expectation(const StateVector& state, const DenseOperator& h);

/// u applied to every wire.
StateVector apply_global_unitary(const StateVector& state, const Mat2c& u);

namespace pauli {
Mat2c identity();
Mat2c x();
Mat2c y();
Mat2c z();
}  // namespace pauli

enum class PauliAxis { X = 0, Y = 1, Z = 2 };

/// sigma_axis on one wire, applied in place.
void apply_pauli_inplace(Eigen::VectorXcd& amps, int n_qubits, int wire, PauliAxis axis);

/// Dense operator for a single-qubit matrix embedded at `wire` in n qubits.
Eigen::MatrixXcd embed_single(int n_qubits, int wire, const Mat2c& u);

}  // namespace hyqurp
