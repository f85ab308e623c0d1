#include "hyqurp/grad.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hyqurp {

CrossEntropy cross_entropy(const Eigen::VectorXd& logits, int label) {
  if (label < 0 || label >= logits.size()) {
    throw std::out_of_range("cross_entropy: label " + std::to_string(label) + " outside [0, " +
                            std::to_string(logits.size()) + ")");
  }
  const double top = logits.maxCoeff();
  const Eigen::VectorXd shifted = logits.array() - top;
  const Eigen::VectorXd ex = shifted.array().exp();
  const double z = ex.sum();
  CrossEntropy out;
  out.loss = std::log(z) - shifted[label];
  out.dlogits = ex / z;
  out.dlogits[label] -= 1.0;
  return out;
}

namespace {

// Reverse sweep from the circuit output state.
std::vector<double> adjoint_sweep(StateVector out, const CircuitParams& params, const GeneratorSet& gens,
                                  const FeatureMatrix& upstream) {
  std::vector<double> grads(params.size(), 0.0);
  if (upstream.isZero(0.0)) return grads;
  Eigen::VectorXcd lam = weighted_heisenberg_apply(out, upstream);
  Eigen::VectorXcd psi = std::move(out.amps());

  // dL/dc = 2 Re <lam'| i P |psi'> = -2 Im <lam'|P|psi'> with both vectors
  // taken just after the gate.
  const auto& ordered = gens.ordered();
  const std::size_t per_block = ordered.size();
  for (int l = params.blocks(); l-- > 0;) {
    for (std::size_t g = per_block; g-- > 0;) {
      const std::size_t idx = static_cast<std::size_t>(l) * per_block + g;
      const cplx overlap = ordered[g].reverse_step(params.values()[idx], psi, lam);
      grads[idx] = -2.0 * overlap.imag();
    }
  }
  return grads;
}

void check_upstream(const CircuitConfig& cfg, const FeatureMatrix& upstream) {
  const int pairs = cfg.n_points;
  if (upstream.rows() != pairs * (pairs - 1) / 2 || upstream.cols() != 2) {
    throw std::invalid_argument("quantum_grads: upstream must be C(N,2) x 2");
  }
}

}  // namespace

std::vector<double> quantum_grads(const std::vector<Point3>& points, const CircuitParams& params,
                                  const CircuitConfig& cfg, const GeneratorSet& gens,
                                  const FeatureMatrix& upstream) {
  check_upstream(cfg, upstream);
  if (upstream.isZero(0.0)) return std::vector<double>(params.size(), 0.0);
  return adjoint_sweep(run_circuit(points, params, cfg, gens), params, gens, upstream);
}

GradientBundle hybrid_loss_and_grads(const std::vector<Point3>& points, int label, const CircuitParams& circuit,
                                     const HeadParams& head, const CircuitConfig& cfg, const GeneratorSet& gens) {
  StateVector state = run_circuit(points, circuit, cfg, gens);
  const FeatureMatrix features = heisenberg_features(state);
  HeadCache cache;
  GradientBundle out;
  out.logits = head_forward(features, head, &cache);
  const CrossEntropy ce = cross_entropy(out.logits, label);
  out.loss = ce.loss;
  HeadGradients hg = head_backward(ce.dlogits, cache, head);
  out.d_head = std::move(hg.d_params);
  out.d_quantum = adjoint_sweep(std::move(state), circuit, gens, hg.d_features);
  return out;
}

}  // namespace hyqurp
