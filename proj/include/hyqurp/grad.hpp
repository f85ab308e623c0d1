#pragma once

#include <vector>

#include <Eigen/Dense>

#include "hyqurp/circuit.hpp"
#include "hyqurp/head.hpp"

namespace hyqurp {

struct CrossEntropy {
  double loss = 0.0;
  Eigen::VectorXd dlogits;
};

/// -log softmax(logits)[label], with dlogits = softmax - onehot.
CrossEntropy cross_entropy(const Eigen::VectorXd& logits, int label);

/// dL/dc for every circuit coefficient by adjoint differentiation, given
/// dL/dfeatures. Layout matches CircuitParams::values().
std::vector<double> quantum_grads(const std::vector<Point3>& points, const CircuitParams& params,
                                  const CircuitConfig& cfg, const GeneratorSet& gens,
                                  const FeatureMatrix& upstream);

struct GradientBundle {
  std::vector<double> d_quantum;
  HeadParams d_head;
  double loss = 0.0;
  Eigen::VectorXd logits;
};

/// Cross-entropy loss of the full hybrid model on one sample, with gradients.
GradientBundle hybrid_loss_and_grads(const std::vector<Point3>& points, int label, const CircuitParams& circuit,
                                     const HeadParams& head, const CircuitConfig& cfg, const GeneratorSet& gens);

}  // namespace hyqurp
