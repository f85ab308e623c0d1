#include "hyqurp/circuit.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hyqurp {

namespace {

constexpr std::array<PauliAxis, 3> kAxes = {PauliAxis::X, PauliAxis::Y, PauliAxis::Z};

void check_pairs(int pair_count, int i, int j) {
  if (i == j) throw std::invalid_argument("Heisenberg readout needs two distinct pairs");
  if (i < 0 || j < 0 || i >= pair_count || j >= pair_count) throw std::out_of_range("pair index out of range");
}

// Cross-pair signs of (s^{2i} +/- s^{2i+1})(s^{2j} +/- s^{2j+1}) for the
// wire offsets (a, b) in {0,1}^2.
double cross_sign(Sign sign, int a, int b) {
  if (sign == Sign::Plus) return 1.0;
  return (a + b) % 2 == 0 ? 1.0 : -1.0;
}

}  // namespace

CircuitParams::CircuitParams(int blocks, int n_points)
    : blocks_(blocks), n_points_(n_points), values_(quantum_param_count(blocks, n_points), 0.0) {
  if (blocks < 1) throw std::invalid_argument("block count must be >= 1");
  if (n_points < 2) throw std::invalid_argument("point count must be >= 2");
}

std::size_t CircuitParams::index(int block, int k, Sign sign) const {
  if (block < 0 || block >= blocks_ || k < 2 || k > n_points_) throw std::out_of_range("circuit parameter index");
  return static_cast<std::size_t>((block * (n_points_ - 1) + (k - 2)) * 2 + (sign == Sign::Plus ? 0 : 1));
}

double& CircuitParams::at(int block, int k, Sign sign) { return values_[index(block, k, sign)]; }
double CircuitParams::at(int block, int k, Sign sign) const { return values_[index(block, k, sign)]; }

int pair_row(int n_points, int i, int j) {
  if (i > j) std::swap(i, j);
  check_pairs(n_points, i, j);
  // rows before i: sum_{a<i} (n - 1 - a)
  return i * (2 * n_points - i - 1) / 2 + (j - i - 1);
}

StateVector init_singlets(int pair_count) {
  if (pair_count < 1) throw std::invalid_argument("init_singlets: need at least one pair");
  const int n = 2 * pair_count;
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(Eigen::Index{1} << n);
  // Each pair contributes |01> with +1/sqrt2 and |10> with -1/sqrt2.
  const double amp = std::pow(1.0 / std::sqrt(2.0), pair_count);
  for (std::uint64_t choice = 0; choice < (std::uint64_t{1} << pair_count); ++choice) {
    std::uint64_t index = 0;
    int flips = 0;
    for (int p = 0; p < pair_count; ++p) {
      const bool second = (choice >> p) & 1U;  // |10> branch
      const int hi = n - 1 - 2 * p;             // bit of wire 2p
      const int lo = n - 2 - 2 * p;             // bit of wire 2p+1
      index |= std::uint64_t{1} << (second ? hi : lo);
      flips += second ? 1 : 0;
    }
    amps[static_cast<Eigen::Index>(index)] = (flips % 2 == 0) ? amp : -amp;
  }
  return StateVector(n, std::move(amps));
}

void apply_block(StateVector& state, std::span<const double> block_params, const GeneratorSet& gens) {
  const int n_points = gens.pair_count();
  if (state.n_qubits() != 2 * n_points) throw std::invalid_argument("apply_block: register size mismatch");
  if (block_params.size() != static_cast<std::size_t>(2 * (n_points - 1))) {
    throw std::invalid_argument("apply_block: expected " + std::to_string(2 * (n_points - 1)) + " coefficients");
  }
  const auto& ordered = gens.ordered();
  for (std::size_t g = 0; g < ordered.size(); ++g) ordered[g].apply_exp(block_params[g], state.amps());
}

double measure_heisenberg(const StateVector& state, int i, int j, Sign sign) {
  const int n = state.n_qubits();
  check_pairs(n / 2, i, j);
  double total = 0.0;
  for (PauliAxis axis : kAxes) {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        Eigen::VectorXcd v = state.amps();
        apply_pauli_inplace(v, n, 2 * j + b, axis);
        apply_pauli_inplace(v, n, 2 * i + a, axis);
        total += cross_sign(sign, a, b) * state.amps().dot(v).real();
      }
    }
  }
  return total;
}

FeatureMatrix heisenberg_features(const StateVector& state) {
  const int n = state.n_qubits();
  const int pairs = n / 2;
  FeatureMatrix out = FeatureMatrix::Zero(pairs * (pairs - 1) / 2, 2);
  std::vector<Eigen::VectorXcd> images(static_cast<std::size_t>(n));
  for (PauliAxis axis : kAxes) {
    for (int w = 0; w < n; ++w) {
      images[static_cast<std::size_t>(w)] = state.amps();
      apply_pauli_inplace(images[static_cast<std::size_t>(w)], n, w, axis);
    }
    // <s^q s^r> = <s^q psi | s^r psi> for commuting Hermitian Paulis.
    for (int i = 0; i < pairs; ++i) {
      for (int j = i + 1; j < pairs; ++j) {
        const int row = pair_row(pairs, i, j);
        for (int a = 0; a < 2; ++a) {
          for (int b = 0; b < 2; ++b) {
            const double corr = images[static_cast<std::size_t>(2 * i + a)].dot(images[static_cast<std::size_t>(2 * j + b)]).real();
            out(row, 0) += corr;
            out(row, 1) += cross_sign(Sign::Minus, a, b) * corr;
          }
        }
      }
    }
  }
  return out;
}

Eigen::VectorXcd weighted_heisenberg_apply(const StateVector& state, const FeatureMatrix& weights) {
  const int n = state.n_qubits();
  const int pairs = n / 2;
  if (weights.rows() != pairs * (pairs - 1) / 2) throw std::invalid_argument("weight matrix shape mismatch");
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(state.amps().size());
  std::vector<Eigen::VectorXcd> images(static_cast<std::size_t>(n));
  for (PauliAxis axis : kAxes) {
    for (int w = 0; w < n; ++w) {
      images[static_cast<std::size_t>(w)] = state.amps();
      apply_pauli_inplace(images[static_cast<std::size_t>(w)], n, w, axis);
    }
    // sum_{q<r cross-pair} W(q,r) s^q s^r psi = sum_q s^q (sum_r W(q,r) s^r psi)
    for (int i = 0; i < pairs; ++i) {
      for (int a = 0; a < 2; ++a) {
        Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(out.size());
        bool any = false;
        for (int j = i + 1; j < pairs; ++j) {
          const int row = pair_row(pairs, i, j);
          for (int b = 0; b < 2; ++b) {
            const double w = weights(row, 0) + cross_sign(Sign::Minus, a, b) * weights(row, 1);
            if (w == 0.0) continue;
            acc += w * images[static_cast<std::size_t>(2 * j + b)];
            any = true;
          }
        }
        if (!any) continue;
        apply_pauli_inplace(acc, n, 2 * i + a, axis);
        out += acc;
      }
    }
  }
  return out;
}

Eigen::MatrixXcd dense_heisenberg(int pair_count, int i, int j, Sign sign) {
  check_pairs(pair_count, i, j);
  const int n = 2 * pair_count;
  const auto d = Eigen::Index{1} << n;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d, d);
  for (const Mat2c& p : {pauli::x(), pauli::y(), pauli::z()}) {
    const double s = sign == Sign::Plus ? 1.0 : -1.0;
    const Eigen::MatrixXcd left = embed_single(n, 2 * i, p) + s * embed_single(n, 2 * i + 1, p);
    const Eigen::MatrixXcd right = embed_single(n, 2 * j, p) + s * embed_single(n, 2 * j + 1, p);
    h += left * right;
  }
  return h;
}

void apply_circuit(StateVector& state, const CircuitParams& params, const GeneratorSet& gens) {
  if (params.n_points() != gens.pair_count()) throw std::invalid_argument("circuit params do not match generators");
  const std::size_t per_block = quantum_param_count(1, params.n_points());
  for (int l = 0; l < params.blocks(); ++l) {
    apply_block(state, std::span<const double>(params.values()).subspan(static_cast<std::size_t>(l) * per_block, per_block),
                gens);
  }
}

StateVector run_circuit(const std::vector<Point3>& points, const CircuitParams& params,
                        const CircuitConfig& cfg, const GeneratorSet& gens) {
  if (static_cast<int>(points.size()) != cfg.n_points || cfg.n_points != gens.pair_count()) {
    throw std::invalid_argument("forward: point count does not match configuration");
  }
  StateVector state = init_singlets(cfg.n_points);
  apply_encoding_layer(state, encoding_layer(points, EncoderConfig{cfg.theta}));
  apply_circuit(state, params, gens);
  return state;
}

FeatureMatrix forward(const std::vector<Point3>& points, const CircuitParams& params,
                      const CircuitConfig& cfg, const GeneratorSet& gens) {
  return heisenberg_features(run_circuit(points, params, cfg, gens));
}

}  // namespace hyqurp
