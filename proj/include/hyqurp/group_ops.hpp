#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

#include "hyqurp/qcore.hpp"

namespace hyqurp {

enum class Sign { Plus, Minus };

inline char sign_char(Sign s) { return s == Sign::Plus ? '+' : '-'; }

/// One generalized k-cycle tau_pi^s over qubit pairs.
///
/// The cycle acts on wires (2*pairs[0]+selection[0], ..., 2*pairs[k-1]+selection[k-1])
/// and sends the i-th listed wire to the (i+1)-th, the last back to the first.
struct PairCycleTerm {
  std::vector<int> pairs;
  std::vector<std::uint8_t> selection;
  double coefficient = 1.0;  // +1, or (-1)^|s| for the minus generator

  std::vector<int> wires() const;
  WirePermutation as_wire_permutation(int n_qubits) const;
};

/// Eigensystem of a generator restricted to one Hamming-weight sector.
///
/// Every permutation operator preserves the number of set bits, so the
/// generator is block diagonal over weight sectors. It is also real
/// symmetric, hence real eigenvectors.
struct WeightSector {
  std::vector<std::uint32_t> basis;  // global indices, ascending
  Eigen::VectorXd eigvals;
  Eigen::MatrixXd eigvecs;
};

/// Construction knobs exposed for the verification fault-injection hook.
struct GeneratorOptions {
  int max_pairs = 6;
  /// Flip the coefficient of every term whose wire set contains wire 0.
  /// Keeps the operator Hermitian but breaks pair-permutation symmetry.
  bool inject_sign_fault = false;
};

/// P_k^{+/-}: (1/k!) * sum over ordered k-tuples of distinct pairs and
/// selection vectors s of (+1 or (-1)^|s|) * tau_pi^s.
class TwirledGenerator {
 public:
  TwirledGenerator(int pair_count, int k, Sign sign, const GeneratorOptions& opts = {});

  int pair_count() const { return pair_count_; }
  int n_qubits() const { return 2 * pair_count_; }
  std::size_t dim() const { return std::size_t{1} << n_qubits(); }
  int cycle_length() const { return k_; }
  Sign sign() const { return sign_; }
  double normalization() const { return normalization_; }

  const std::vector<PairCycleTerm>& terms() const { return terms_; }
  const std::vector<WeightSector>& sectors() const { return sectors_; }

  /// Real dense realization assembled directly from the term list.
  Eigen::MatrixXd dense() const;

  /// P|psi>, matrix free from the term list.
  Eigen::VectorXcd apply(const Eigen::VectorXcd& amps) const;

  /// exp(i c P)|psi> via the cached sector eigensystems, in place.
  void apply_exp(double c, Eigen::VectorXcd& amps) const;

  /// Adjoint-sweep step for the gate exp(i c P): returns <lam|P|psi>, then
  /// applies exp(-i c P) to both vectors in place.
  cplx reverse_step(double c, Eigen::VectorXcd& psi, Eigen::VectorXcd& lam) const;

  /// max |U^dagger U - I| for U = exp(i c P), built sector by sector.
  double exp_unitarity_residual(double c) const;

  /// Full-dimension eigendecomposition assembled from the sectors
  /// (eigenvalues ascending).
  EigenDecomposition decomposition() const;

 private:
  int pair_count_;
  int k_;
  Sign sign_;
  double normalization_;
  bool fault_;
  std::vector<PairCycleTerm> terms_;
  std::vector<WeightSector> sectors_;
};

TwirledGenerator build_pk(int pair_count, int k, Sign sign, const GeneratorOptions& opts = {});

/// All generators for one pair count, ordered k = 2..N with + before -.
class GeneratorSet {
 public:
  explicit GeneratorSet(int pair_count, const GeneratorOptions& opts = {});

  int pair_count() const { return pair_count_; }
  const TwirledGenerator& get(int k, Sign sign) const;
  const std::vector<TwirledGenerator>& ordered() const { return gens_; }

 private:
  int pair_count_;
  std::vector<TwirledGenerator> gens_;
};

/// Builds each pair count once; concurrent reads are safe.
class GeneratorCache {
 public:
  std::shared_ptr<const GeneratorSet> get(int pair_count);

 private:
  std::mutex mu_;
  std::map<int, std::shared_ptr<const GeneratorSet>> sets_;
};

WirePermutation pair_permutation_rep(int pair_count, std::span<const int> sigma);

using Mat3 = Eigen::Matrix3d;

/// Covering map SU(2) -> SO(3): R_kj = 1/2 Tr(sigma_k u sigma_j u^dagger).
Mat3 su2_to_so3(const Mat2c& u);

/// Dimension of the joint fixed subspace of S_n and global SU(2) on n qubits,
/// by dense enumeration (n <= 6).
int joint_invariant_dim(int n_qubits);

// Flat eigendecomposition cache file: little-endian
//   int32 N, int32 k, int32 sign (+1/-1), int64 dim,
//   dim float64 eigenvalues, then dim*dim complex eigenvectors row-major
//   as interleaved (re, im) float64.
struct CachedDecomposition {
  int pair_count = 0;
  int k = 0;
  Sign sign = Sign::Plus;
  EigenDecomposition eig;
};

void save_decomposition(const std::filesystem::path& path, const TwirledGenerator& gen);
CachedDecomposition load_decomposition(const std::filesystem::path& path);

}  // namespace hyqurp
