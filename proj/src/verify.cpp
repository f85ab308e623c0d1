#include "hyqurp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "hyqurp/circuit.hpp"
#include "hyqurp/data.hpp"
#include "hyqurp/encoder.hpp"
#include "hyqurp/group_ops.hpp"
#include "hyqurp/model.hpp"
#include "hyqurp/train.hpp"

namespace hyqurp {

bool VerifyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::vector<std::string> VerifyReport::failures() const {
  std::vector<std::string> out;
  for (const auto& c : checks) {
    if (!c.passed) out.push_back(c.n_points > 0 ? c.name + " (N=" + std::to_string(c.n_points) + ")" : c.name);
  }
  return out;
}

namespace {

constexpr double kHermTol = 1e-12;
constexpr double kEquivTol = 1e-10;
constexpr double kUnitaryTol = 1e-10;
constexpr double kEncodeTol = 1e-10;
constexpr double kZyzTol = 1e-8;
constexpr double kSingletTol = 1e-10;
constexpr double kCircuitTol = 1e-9;
constexpr double kLogitTol = 1e-6;
constexpr double kGradTol = 1e-5;
constexpr double kGradFloor = 1e-4;
constexpr double kFdStep = 1e-5;

Eigen::VectorXcd random_amps(int n_qubits, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(Eigen::Index{1} << n_qubits);
  for (auto& a : v) a = cplx(g(rng), g(rng));
  return v / v.norm();
}

Point3 random_point(std::mt19937_64& rng, double max_norm) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Point3 p{u(rng), u(rng), u(rng)};
  const double s = max_norm * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const double n = p.norm();
  return n > 0.0 ? Point3{p.x / n * s, p.y / n * s, p.z / n * s} : p;
}

std::vector<Point3> random_points(int n, std::mt19937_64& rng) {
  std::vector<Point3> pts;
  for (int i = 0; i < n; ++i) pts.push_back(random_point(rng, 1.0));
  return normalize(pts);
}

std::vector<std::vector<int>> pair_perms(int n, bool exhaustive, int samples, std::mt19937_64& rng) {
  std::vector<int> sigma(static_cast<std::size_t>(n));
  std::iota(sigma.begin(), sigma.end(), 0);
  std::vector<std::vector<int>> out;
  if (exhaustive) {
    do out.push_back(sigma);
    while (std::next_permutation(sigma.begin(), sigma.end()));
  } else {
    for (int s = 0; s < samples; ++s) {
      std::shuffle(sigma.begin(), sigma.end(), rng);
      out.push_back(sigma);
    }
  }
  return out;
}

class Reporter {
 public:
  Reporter(VerifyReport& report, std::ostream& log) : report_(report), log_(log) {}

  void add(const std::string& name, int n, double residual, double tol) {
    const bool ok = std::isfinite(residual) && residual <= tol;
    report_.checks.push_back({name, n, ok, residual, tol});
    char buf[256];
    const std::string n_text = n > 0 ? std::to_string(n) : "-";
    std::snprintf(buf, sizeof buf, "[%s] N=%s %-34s residual=%.3e tol=%.0e", ok ? "PASS" : "FAIL", n_text.c_str(),
                  name.c_str(), residual, tol);
    log_ << buf << std::endl;
  }

 private:
  VerifyReport& report_;
  std::ostream& log_;
};

void check_generators(int n, const GeneratorSet& gens, std::mt19937_64& rng, Reporter& rep) {
  const int nq = 2 * n;
  double herm = 0.0;
  double equiv = 0.0;
  double gate_equiv = 0.0;
  double unit = 0.0;
  const auto perms = pair_perms(n, n <= 4, 20, rng);
  std::uniform_real_distribution<double> cdist(-3.0, 3.0);
  for (const auto& gen : gens.ordered()) {
    const Eigen::VectorXcd a = random_amps(nq, rng);
    const Eigen::VectorXcd b = random_amps(nq, rng);
    herm = std::max(herm, std::abs(a.dot(gen.apply(b)) - gen.apply(a).dot(b)));
    if (n <= 3) {
      const Eigen::MatrixXd d = gen.dense();
      herm = std::max(herm, (d - d.transpose()).cwiseAbs().maxCoeff());
    }

    const Eigen::VectorXcd pa = gen.apply(a);
    const double c = cdist(rng);
    Eigen::VectorXcd ua = a;
    gen.apply_exp(c, ua);
    for (const auto& sigma : perms) {
      const WirePermutation w = pair_permutation_rep(n, sigma);
      const StateVector moved = apply_wire_permutation(StateVector(nq, a), w);
      if (n <= 4) {
        const Eigen::VectorXcd lhs = gen.apply(moved.amps());
        const Eigen::VectorXcd rhs = apply_wire_permutation(StateVector(nq, pa), w).amps();
        equiv = std::max(equiv, (lhs - rhs).cwiseAbs().maxCoeff());
      }
      Eigen::VectorXcd lhs = moved.amps();
      gen.apply_exp(c, lhs);
      const Eigen::VectorXcd rhs = apply_wire_permutation(StateVector(nq, ua), w).amps();
      gate_equiv = std::max(gate_equiv, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    unit = std::max(unit, gen.exp_unitarity_residual(c));
  }
  rep.add("generator hermiticity", n, herm, kHermTol);
  if (n <= 4) rep.add("generator pair-equivariance", n, equiv, kEquivTol);
  rep.add("gate pair-equivariance", n, gate_equiv, kEquivTol);
  rep.add("gate unitarity", n, unit, kUnitaryTol);
}

void check_encoding(int n, std::mt19937_64& rng, Reporter& rep) {
  const EncoderConfig cfg;
  double equiv = 0.0;
  double zyz = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Point3 p = random_point(rng, 1.0);
    const Mat2c u = random_su2(rng);
    const Mat3 r = su2_to_so3(u);
    const Mat2c lhs = encode_unitary(rotate(r, p), cfg);
    const Mat2c rhs = u * encode_unitary(p, cfg) * u.adjoint();
    equiv = std::max(equiv, max_abs_diff(lhs, rhs));

    const ZyzAngles a = zyz_angles(p, cfg);
    zyz = std::max(zyz, phase_aligned_residual(encode_unitary(p, cfg), rz(a.alpha) * ry(a.beta) * rz(a.gamma)));
  }
  for (const Point3& p : {Point3{0, 0, 0.7}, Point3{0, 0, -0.3}, Point3{0.5, 0, 0}, Point3{0, -0.9, 0}, Point3{}}) {
    const ZyzAngles a = zyz_angles(p, cfg);
    zyz = std::max(zyz, phase_aligned_residual(encode_unitary(p, cfg), rz(a.alpha) * ry(a.beta) * rz(a.gamma)));
  }
  rep.add("encoding SU(2) equivariance", n, equiv, kEncodeTol);
  rep.add("Z-Y-Z reconstruction", n, zyz, kZyzTol);
}

void check_singlets(int n, std::mt19937_64& rng, Reporter& rep) {
  const StateVector s = init_singlets(n);
  double worst = 0.0;
  for (int t = 0; t < 5; ++t) {
    const StateVector moved = apply_global_unitary(s, random_su2(rng));
    worst = std::max(worst, (moved.amps() - s.amps()).cwiseAbs().maxCoeff());
  }
  rep.add("singlet invariance", n, worst, kSingletTol);
}

void check_circuit(int n, const std::shared_ptr<const GeneratorSet>& gens, std::mt19937_64& rng, Reporter& rep) {
  const int nq = 2 * n;
  CircuitParams params(2, n);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 3; ++t) {
    for (double& v : params.values()) v = u(rng);
    const Mat2c g = random_su2(rng);
    StateVector a(nq, random_amps(nq, rng));
    StateVector b = apply_global_unitary(a, g);
    apply_circuit(a, params, *gens);
    apply_circuit(b, params, *gens);
    worst = std::max(worst, (apply_global_unitary(a, g).amps() - b.amps()).cwiseAbs().maxCoeff());
  }
  rep.add("circuit SU(2) equivariance", n, worst, kCircuitTol);

  ModelSpec spec;
  spec.n_points = n;
  spec.blocks = 2;
  spec.classes = 3;
  HybridModel model(spec, gens);
  auto init = make_stream(1, Stream::Init, static_cast<std::uint64_t>(n));
  model.initialize(init);
  for (double& v : model.circuit().values()) v = u(rng);
  double inv = 0.0;
  for (int t = 0; t < 5; ++t) {
    const auto pts = random_points(n, rng);
    const InvarianceMetrics m = invariance_metrics(model, pts, rng);
    inv = std::max({inv, std::abs(m.cosine - 1.0), std::abs(m.norm_ratio - 1.0)});
  }
  rep.add("end-to-end invariance", n, inv, kLogitTol);

  // finite differences on every circuit coefficient and a stride of head parameters
  const auto pts = random_points(n, rng);
  const int label = 1;
  const LossAndGrad lg = model.loss_and_grad(pts, label);
  std::vector<double> theta = model.flat_params();
  const std::size_t nq_params = model.circuit().size();
  const std::size_t stride = n <= 4 ? 1 : 37;
  double worst_rel = 0.0;
  auto probe = [&](std::size_t i) {
    const double keep = theta[i];
    theta[i] = keep + kFdStep;
    model.set_flat_params(theta);
    const double up = model.loss_and_grad(pts, label).loss;
    theta[i] = keep - kFdStep;
    model.set_flat_params(theta);
    const double down = model.loss_and_grad(pts, label).loss;
    theta[i] = keep;
    const double fd = (up - down) / (2.0 * kFdStep);
    const double denom = std::max({std::abs(fd), std::abs(lg.grad[i]), kGradFloor});
    worst_rel = std::max(worst_rel, std::abs(fd - lg.grad[i]) / denom);
  };
  for (std::size_t i = 0; i < nq_params; ++i) probe(i);
  for (std::size_t i = nq_params; i < theta.size(); i += stride) probe(i);
  model.set_flat_params(theta);
  rep.add("gradient finite differences", n, worst_rel, kGradTol);
}

}  // namespace

VerifyReport run_verify(const VerifyOptions& opts, std::ostream& log) {
  if (opts.n_min < 2 || opts.n_max > 6 || opts.n_min > opts.n_max) {
    throw std::invalid_argument("verify: N range must satisfy 2 <= n-min <= n-max <= 6");
  }
  VerifyReport report;
  Reporter rep(report, log);
  std::mt19937_64 rng(opts.seed);

  for (int nq = 1; nq <= std::min(4, 2 * opts.n_max); ++nq) {
    rep.add("joint invariant dim (n=" + std::to_string(nq) + ")", 0, joint_invariant_dim(nq), 0.0);
  }
  {
    double hom = 0.0;
    for (int t = 0; t < 20; ++t) {
      const Mat2c a = random_su2(rng);
      const Mat2c b = random_su2(rng);
      hom = std::max(hom, (su2_to_so3(a * b) - su2_to_so3(a) * su2_to_so3(b)).cwiseAbs().maxCoeff());
    }
    const Mat3 kernel = su2_to_so3(-Mat2c::Identity());
    hom = std::max(hom, (kernel - Mat3::Identity()).cwiseAbs().maxCoeff());
    rep.add("covering map homomorphism", 0, hom, 1e-10);
  }

  for (int n = opts.n_min; n <= opts.n_max; ++n) {
    GeneratorOptions gopts;
    gopts.inject_sign_fault = opts.inject_sign_fault;
    auto gens = std::make_shared<const GeneratorSet>(n, gopts);
    check_generators(n, *gens, rng, rep);
    check_encoding(n, rng, rep);
    check_singlets(n, rng, rep);
    check_circuit(n, gens, rng, rep);
  }
  return report;
}

}  // namespace hyqurp
