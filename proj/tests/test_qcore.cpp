#include <gtest/gtest.h>

#include <bit>
#include <numeric>

#include "hyqurp/qcore.hpp"
#include "oracles.hpp"

using namespace hyqurp;

namespace {

Mat2c hadamard() {
  Mat2c h;
  h << 1, 1, 1, -1;
  return h / std::sqrt(2.0);
}

}  // namespace

TEST(StateVector, StartsInAllZeros) {
  StateVector s(3);
  EXPECT_EQ(s.dim(), 8u);
  EXPECT_EQ(s[0], cplx(1, 0));
  EXPECT_DOUBLE_EQ(s.norm(), 1.0);
}

TEST(StateVector, RejectsWrongAmplitudeCount) {
  EXPECT_THROW(StateVector(2, Eigen::VectorXcd::Zero(3)), std::invalid_argument);
}

TEST(DenseOperator, RejectsNonPowerOfTwo) {
  EXPECT_THROW(DenseOperator(Eigen::MatrixXcd::Identity(3, 3)), std::invalid_argument);
}

TEST(ApplySingleQubit, HadamardTwiceIsIdentity) {
  std::mt19937_64 rng(1);
  const Eigen::VectorXcd psi = oracle::random_state(3, rng);
  StateVector s(3, psi);
  s = apply_single_qubit(s, 1, hadamard());
  s = apply_single_qubit(s, 1, hadamard());
  EXPECT_LT((s.amps() - psi).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ApplySingleQubit, MatchesKroneckerOracle) {
  std::mt19937_64 rng(2);
  for (int wire = 0; wire < 3; ++wire) {
    const Eigen::VectorXcd psi = oracle::random_state(3, rng);
    const Mat2c u = oracle::random_su2(rng);
    const StateVector out = apply_single_qubit(StateVector(3, psi), wire, u);
    const Eigen::VectorXcd expected = oracle::on_wire(3, wire, u) * psi;
    EXPECT_LT((out.amps() - expected).cwiseAbs().maxCoeff(), 1e-14) << "wire " << wire;
  }
}

TEST(ApplySingleQubit, WireZeroIsMostSignificantBit) {
  Mat2c x = pauli::x();
  const StateVector s = apply_single_qubit(StateVector(3), 0, x);
  EXPECT_EQ(s[4], cplx(1, 0));
}

TEST(ApplySingleQubit, RejectsNonUnitaryAndBadWire) {
  Mat2c bad;
  bad << 1, 1, 0, 1;
  EXPECT_THROW(apply_single_qubit(StateVector(2), 0, bad), std::invalid_argument);
  EXPECT_THROW(apply_single_qubit(StateVector(2), 2, pauli::x()), std::out_of_range);
}

TEST(WirePermutation, ThreeCycleMatchesPermutationMatrix) {
  std::mt19937_64 rng(3);
  const std::vector<int> sigma{1, 2, 0, 3};
  const Eigen::VectorXcd psi = oracle::random_state(4, rng);
  const StateVector out = apply_wire_permutation(StateVector(4, psi), sigma);
  const Eigen::VectorXcd expected = oracle::permutation_matrix(4, sigma).cast<cplx>() * psi;
  EXPECT_LT((out.amps() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(WirePermutation, CompositionAndInverse) {
  const std::vector<int> a{2, 0, 1}, b{1, 0, 2};
  std::mt19937_64 rng(4);
  const StateVector psi(3, oracle::random_state(3, rng));
  const StateVector lhs = apply_wire_permutation(apply_wire_permutation(psi, b), a);
  const StateVector rhs = apply_wire_permutation(psi, compose(a, b));
  EXPECT_LT((lhs.amps() - rhs.amps()).cwiseAbs().maxCoeff(), 1e-15);
  const auto id = compose(a, inverse(a));
  EXPECT_EQ(id, (std::vector<int>{0, 1, 2}));
  EXPECT_FALSE(is_bijection(std::vector<int>{0, 0, 1}));
  EXPECT_THROW(apply_wire_permutation(psi, std::vector<int>{0, 0, 1}), std::invalid_argument);
}

TEST(WirePermutation, PreservesHammingWeight) {
  const std::vector<int> sigma{3, 0, 1, 2};
  for (std::uint64_t x = 0; x < 16; ++x) {
    EXPECT_EQ(std::popcount(permute_index(x, 4, sigma)), std::popcount(x));
  }
}

TEST(EigHermitian, ReconstructsOperator) {
  std::mt19937_64 rng(5);
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Random(8, 8);
  a = (a + a.adjoint()).eval();
  const EigenDecomposition e = eig_hermitian(DenseOperator(a));
  const Eigen::MatrixXcd back = e.eigvecs * e.eigvals.cast<cplx>().asDiagonal() * e.eigvecs.adjoint();
  EXPECT_LT(max_abs_diff(a, back), 1e-12);
  for (Eigen::Index i = 1; i < e.eigvals.size(); ++i) EXPECT_LE(e.eigvals[i - 1], e.eigvals[i]);
  EXPECT_LT(unitarity_residual(e.eigvecs), 1e-12);
}

TEST(EigHermitian, RejectsNonHermitian) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(2, 2);
  a(0, 1) = 1.0;
  EXPECT_THROW(eig_hermitian(DenseOperator(a)), std::invalid_argument);
}

TEST(Expectation, ZOnBasisStates) {
  const DenseOperator z(oracle::on_wire(2, 0, pauli::z()));
  EXPECT_DOUBLE_EQ(expectation(StateVector(2), z), 1.0);
  EXPECT_DOUBLE_EQ(expectation(StateVector::basis(2, 2), z), -1.0);
}

TEST(GlobalUnitary, MatchesTensorPower) {
  std::mt19937_64 rng(6);
  const Mat2c u = oracle::random_su2(rng);
  const Eigen::VectorXcd psi = oracle::random_state(3, rng);
  Eigen::MatrixXcd full = oracle::kron(oracle::kron(u, u), u);
  const StateVector out = apply_global_unitary(StateVector(3, psi), u);
  EXPECT_LT((out.amps() - full * psi).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Pauli, InPlaceMatchesMatrices) {
  std::mt19937_64 rng(7);
  const Eigen::VectorXcd psi = oracle::random_state(3, rng);
  const char axes[3] = {'x', 'y', 'z'};
  for (int a = 0; a < 3; ++a) {
    for (int w = 0; w < 3; ++w) {
      Eigen::VectorXcd v = psi;
      apply_pauli_inplace(v, 3, w, static_cast<PauliAxis>(a));
      EXPECT_LT((v - oracle::on_wire(3, w, oracle::pauli(axes[a])) * psi).cwiseAbs().maxCoeff(), 1e-15);
    }
  }
}

TEST(EmbedSingle, MatchesOracle) {
  EXPECT_LT(max_abs_diff(embed_single(3, 2, pauli::y()), oracle::on_wire(3, 2, oracle::pauli('y'))), 1e-15);
}

TEST(WirePermutation, SwapAndThreeCycleOnBasisStates) {
  const StateVector s = apply_wire_permutation(StateVector::basis(2, 0b01), std::vector<int>{1, 0});
  EXPECT_EQ(s[0b10], cplx(1, 0));
  const StateVector t = apply_wire_permutation(StateVector::basis(3, 0b100), std::vector<int>{1, 2, 0});
  EXPECT_EQ(t[0b010], cplx(1, 0));
  const StateVector u = apply_wire_permutation(StateVector::basis(3, 0b101), std::vector<int>{0, 1, 2});
  EXPECT_EQ(u[0b101], cplx(1, 0));
}

TEST(EigHermitian, KnownSpectra) {
  const auto z = eig_hermitian(DenseOperator(pauli::z()));
  EXPECT_NEAR(z.eigvals[0], -1.0, 1e-15);
  EXPECT_NEAR(z.eigvals[1], 1.0, 1e-15);
  const auto id = eig_hermitian(DenseOperator(Eigen::MatrixXcd::Identity(4, 4)));
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(id.eigvals[i], 1.0, 1e-15);
  const auto x = eig_hermitian(DenseOperator(pauli::x()));
  Eigen::Vector2cd minus(1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0));
  Eigen::Vector2cd plus(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
  EXPECT_NEAR(std::abs(minus.dot(x.eigvecs.col(0))), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(plus.dot(x.eigvecs.col(1))), 1.0, 1e-14);
}

TEST(Expectation, PlusStateAndSinglet) {
  Eigen::VectorXcd plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(expectation(StateVector(1, plus), DenseOperator(pauli::z())), 0.0, 1e-15);
  Eigen::VectorXcd singlet = Eigen::VectorXcd::Zero(4);
  singlet[1] = 1.0 / std::sqrt(2.0);
  singlet[2] = -1.0 / std::sqrt(2.0);
  const DenseOperator zz(oracle::kron(oracle::pauli('z'), oracle::pauli('z')));
  EXPECT_NEAR(expectation(StateVector(2, singlet), zz), -1.0, 1e-15);
}
