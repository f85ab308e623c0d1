#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "hyqurp/encoder.hpp"
#include "hyqurp/group_ops.hpp"
#include "hyqurp/qcore.hpp"

namespace hyqurp {

/// Version tag for the gate ordering inside a block: k ascending, and for
/// each k the + factor applied before the - factor. Stored in checkpoints.
inline constexpr const char* kGateConvention = "k-ascending/plus-then-minus/v1";

struct CircuitConfig {
  int n_points = 4;
  int blocks = 12;
  double theta = 1.7;
};

/// Coefficients c_{l,k}^{+/-}, flat with layout [block][k - 2][sign].
class CircuitParams {
 public:
  CircuitParams() = default;
  CircuitParams(int blocks, int n_points);

  int blocks() const { return blocks_; }
  int n_points() const { return n_points_; }
  std::size_t size() const { return values_.size(); }

  double& at(int block, int k, Sign sign);
  double at(int block, int k, Sign sign) const;

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t index(int block, int k, Sign sign) const;

  int blocks_ = 0;
  int n_points_ = 0;
  std::vector<double> values_;
};

inline std::size_t quantum_param_count(int blocks, int n_points) {
  return static_cast<std::size_t>(2 * blocks * (n_points - 1));
}

/// C(N,2) x 2 Heisenberg readouts; rows follow lexicographic (i < j), columns (H+, H-).
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// Row of the unordered pair {i, j} in a FeatureMatrix.
int pair_row(int n_points, int i, int j);

StateVector init_singlets(int pair_count);

/// One block G^l with coefficients laid out as [k - 2][sign].
void apply_block(StateVector& state, std::span<const double> block_params, const GeneratorSet& gens);

/// sum_alpha <(s_a^{2i} +/- s_a^{2i+1})(s_a^{2j} +/- s_a^{2j+1})>.
double measure_heisenberg(const StateVector& state, int i, int j, Sign sign);

/// All readouts at once from Pauli correlations.
FeatureMatrix heisenberg_features(const StateVector& state);

/// sum over rows/signs of weights * H^{+/-}_{ij} |psi>.
Eigen::VectorXcd weighted_heisenberg_apply(const StateVector& state, const FeatureMatrix& weights);

/// Dense H^{+/-}_{<i,j>} on the full register; intended for small test registers.
Eigen::MatrixXcd dense_heisenberg(int pair_count, int i, int j, Sign sign);

/// Encoded and fully evolved register: C * E * psi_0.
StateVector run_circuit(const std::vector<Point3>& points, const CircuitParams& params,
                        const CircuitConfig& cfg, const GeneratorSet& gens);

/// Apply the trainable part C only.
void apply_circuit(StateVector& state, const CircuitParams& params, const GeneratorSet& gens);

FeatureMatrix forward(const std::vector<Point3>& points, const CircuitParams& params,
                      const CircuitConfig& cfg, const GeneratorSet& gens);

}  // namespace hyqurp
