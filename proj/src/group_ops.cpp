#include "hyqurp/group_ops.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>

namespace hyqurp {

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Calls fn(tuple) for every ordered k-tuple of distinct values in [0, n).
template <typename Fn>
void for_each_ordered_tuple(int n, int k, Fn&& fn) {
  std::vector<int> tuple(static_cast<std::size_t>(k));
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  auto rec = [&](auto&& self, int depth) -> void {
    if (depth == k) {
      fn(tuple);
      return;
    }
    for (int v = 0; v < n; ++v) {
      if (used[static_cast<std::size_t>(v)]) continue;
      used[static_cast<std::size_t>(v)] = true;
      tuple[static_cast<std::size_t>(depth)] = v;
      self(self, depth + 1);
      used[static_cast<std::size_t>(v)] = false;
    }
  };
  rec(rec, 0);
}

// Image of a basis index under the cycle w[0] -> w[1] -> ... -> w[k-1] -> w[0].
struct CycleMap {
  std::uint64_t clear_mask = 0;
  std::vector<int> src_shift;
  std::vector<int> dst_shift;

  CycleMap(std::span<const int> wires, int n_qubits) {
    const std::size_t k = wires.size();
    for (std::size_t i = 0; i < k; ++i) {
      const int src = n_qubits - 1 - wires[i];
      const int dst = n_qubits - 1 - wires[(i + 1) % k];
      src_shift.push_back(src);
      dst_shift.push_back(dst);
      clear_mask |= std::uint64_t{1} << src;
    }
  }

  std::uint64_t operator()(std::uint64_t x) const {
    std::uint64_t y = x & ~clear_mask;
    for (std::size_t i = 0; i < src_shift.size(); ++i) y |= ((x >> src_shift[i]) & 1U) << dst_shift[i];
    return y;
  }
};

// Rotating (pairs, selection) jointly gives the same cycle, so each distinct
// cycle is visited once (tuple led by its smallest pair) with multiplicity k.
bool is_canonical_rotation(const PairCycleTerm& t) {
  return std::min_element(t.pairs.begin(), t.pairs.end()) == t.pairs.begin();
}

template <typename T>
void write_le(std::ostream& os, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(bytes), std::end(bytes));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& is, const char* field) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw std::runtime_error(std::string("decomposition cache truncated reading ") + field);
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(bytes), std::end(bytes));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

std::vector<int> PairCycleTerm::wires() const {
  std::vector<int> w(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) w[i] = 2 * pairs[i] + selection[i];
  return w;
}

WirePermutation PairCycleTerm::as_wire_permutation(int n_qubits) const {
  WirePermutation perm(static_cast<std::size_t>(n_qubits));
  std::iota(perm.begin(), perm.end(), 0);
  const auto w = wires();
  for (std::size_t i = 0; i < w.size(); ++i) perm[static_cast<std::size_t>(w[i])] = w[(i + 1) % w.size()];
  return perm;
}

TwirledGenerator::TwirledGenerator(int pair_count, int k, Sign sign, const GeneratorOptions& opts)
    : pair_count_(pair_count), k_(k), sign_(sign), normalization_(1.0 / factorial(k)),
      fault_(opts.inject_sign_fault) {
  if (pair_count < 2 || pair_count > opts.max_pairs) {
    throw std::invalid_argument("pair count " + std::to_string(pair_count) + " outside [2, " +
                                std::to_string(opts.max_pairs) + "]");
  }
  if (k < 2 || k > pair_count) {
    throw std::invalid_argument("cycle length k=" + std::to_string(k) + " outside [2, N]");
  }

  for_each_ordered_tuple(pair_count, k, [&](const std::vector<int>& tuple) {
    for (unsigned s = 0; s < (1U << k); ++s) {
      PairCycleTerm term;
      term.pairs = tuple;
      term.selection.resize(static_cast<std::size_t>(k));
      for (int i = 0; i < k; ++i) term.selection[static_cast<std::size_t>(i)] = (s >> i) & 1U;
      term.coefficient = (sign == Sign::Minus && (std::popcount(s) % 2 == 1)) ? -1.0 : 1.0;
      if (fault_) {
        const auto w = term.wires();
        if (std::find(w.begin(), w.end(), 0) != w.end()) term.coefficient = -term.coefficient;
      }
      terms_.push_back(std::move(term));
    }
  });

  // Sector bookkeeping: global index -> (weight, local index).
  const int n = n_qubits();
  const std::uint64_t d = dim();
  std::vector<std::uint32_t> local(d);
  std::vector<int> weight(d);
  sectors_.resize(static_cast<std::size_t>(n + 1));
  for (std::uint64_t x = 0; x < d; ++x) {
    const int w = std::popcount(x);
    weight[x] = w;
    local[x] = static_cast<std::uint32_t>(sectors_[static_cast<std::size_t>(w)].basis.size());
    sectors_[static_cast<std::size_t>(w)].basis.push_back(static_cast<std::uint32_t>(x));
  }

  std::vector<Eigen::MatrixXd> blocks;
  for (const auto& s : sectors_) {
    const auto m = static_cast<Eigen::Index>(s.basis.size());
    blocks.push_back(Eigen::MatrixXd::Zero(m, m));
  }
  const double mult = k * normalization_;
  for (const auto& term : terms_) {
    if (!is_canonical_rotation(term)) continue;
    const CycleMap cyc(term.wires(), n);
    const double w = mult * term.coefficient;
    for (std::uint64_t x = 0; x < d; ++x) {
      const std::uint64_t y = cyc(x);
      blocks[static_cast<std::size_t>(weight[x])](local[y], local[x]) += w;
    }
  }

  for (std::size_t i = 0; i < sectors_.size(); ++i) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(blocks[i]);
    if (solver.info() != Eigen::Success) throw std::runtime_error("generator eigensolver failed");
    sectors_[i].eigvals = solver.eigenvalues();
    sectors_[i].eigvecs = solver.eigenvectors();
  }
}

Eigen::MatrixXd TwirledGenerator::dense() const {
  const auto d = static_cast<Eigen::Index>(dim());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(d, d);
  const double mult = k_ * normalization_;
  for (const auto& term : terms_) {
    if (!is_canonical_rotation(term)) continue;
    const CycleMap cyc(term.wires(), n_qubits());
    const double w = mult * term.coefficient;
    for (Eigen::Index x = 0; x < d; ++x) p(static_cast<Eigen::Index>(cyc(static_cast<std::uint64_t>(x))), x) += w;
  }
  return p;
}

Eigen::VectorXcd TwirledGenerator::apply(const Eigen::VectorXcd& amps) const {
  if (amps.size() != static_cast<Eigen::Index>(dim())) throw std::invalid_argument("state dimension mismatch");
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(amps.size());
  for (const auto& term : terms_) {
    const CycleMap cyc(term.wires(), n_qubits());
    const double w = normalization_ * term.coefficient;
    for (Eigen::Index x = 0; x < amps.size(); ++x) {
      out[static_cast<Eigen::Index>(cyc(static_cast<std::uint64_t>(x)))] += w * amps[x];
    }
  }
  return out;
}

void TwirledGenerator::apply_exp(double c, Eigen::VectorXcd& amps) const {
  if (amps.size() != static_cast<Eigen::Index>(dim())) throw std::invalid_argument("state dimension mismatch");
  Eigen::Matrix<double, Eigen::Dynamic, 2> buf;
  Eigen::Matrix<double, Eigen::Dynamic, 2> rot;
  for (const auto& s : sectors_) {
    const auto m = static_cast<Eigen::Index>(s.basis.size());
    buf.resize(m, 2);
    for (Eigen::Index i = 0; i < m; ++i) {
      const cplx a = amps[s.basis[static_cast<std::size_t>(i)]];
      buf(i, 0) = a.real();
      buf(i, 1) = a.imag();
    }
    rot.noalias() = s.eigvecs.transpose() * buf;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double ang = c * s.eigvals[i];
      const double cs = std::cos(ang);
      const double sn = std::sin(ang);
      const double re = rot(i, 0);
      const double im = rot(i, 1);
      rot(i, 0) = cs * re - sn * im;
      rot(i, 1) = sn * re + cs * im;
    }
    buf.noalias() = s.eigvecs * rot;
    for (Eigen::Index i = 0; i < m; ++i) amps[s.basis[static_cast<std::size_t>(i)]] = cplx(buf(i, 0), buf(i, 1));
  }
}

cplx TwirledGenerator::reverse_step(double c, Eigen::VectorXcd& psi, Eigen::VectorXcd& lam) const {
  if (psi.size() != static_cast<Eigen::Index>(dim()) || lam.size() != psi.size()) {
    throw std::invalid_argument("state dimension mismatch");
  }
  // Columns: psi.re, psi.im, lam.re, lam.im
  Eigen::Matrix<double, Eigen::Dynamic, 4> buf;
  Eigen::Matrix<double, Eigen::Dynamic, 4> rot;
  cplx overlap(0.0, 0.0);
  for (const auto& s : sectors_) {
    const auto m = static_cast<Eigen::Index>(s.basis.size());
    buf.resize(m, 4);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto x = s.basis[static_cast<std::size_t>(i)];
      buf(i, 0) = psi[x].real();
      buf(i, 1) = psi[x].imag();
      buf(i, 2) = lam[x].real();
      buf(i, 3) = lam[x].imag();
    }
    rot.noalias() = s.eigvecs.transpose() * buf;
    for (Eigen::Index i = 0; i < m; ++i) {
      const cplx tp(rot(i, 0), rot(i, 1));
      const cplx tl(rot(i, 2), rot(i, 3));
      overlap += s.eigvals[i] * std::conj(tl) * tp;
      const cplx phase = std::polar(1.0, -c * s.eigvals[i]);
      const cplx np = phase * tp;
      const cplx nl = phase * tl;
      rot(i, 0) = np.real();
      rot(i, 1) = np.imag();
      rot(i, 2) = nl.real();
      rot(i, 3) = nl.imag();
    }
    buf.noalias() = s.eigvecs * rot;
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto x = s.basis[static_cast<std::size_t>(i)];
      psi[x] = cplx(buf(i, 0), buf(i, 1));
      lam[x] = cplx(buf(i, 2), buf(i, 3));
    }
  }
  return overlap;
}

double TwirledGenerator::exp_unitarity_residual(double c) const {
  double worst = 0.0;
  for (const auto& s : sectors_) {
    const Eigen::VectorXd ph = c * s.eigvals;
    // U = re + i im on this sector, both parts real symmetric
    const Eigen::MatrixXd re = s.eigvecs * ph.array().cos().matrix().asDiagonal() * s.eigvecs.transpose();
    const Eigen::MatrixXd im = s.eigvecs * ph.array().sin().matrix().asDiagonal() * s.eigvecs.transpose();
    const Eigen::Index m = re.rows();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(re.transpose()).rankUpdate(im.transpose());
    Eigen::MatrixXd cross(m, m);
    cross.noalias() = re * im;
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index i = j; i < m; ++i) {
        const double d = gram(i, j) - (i == j ? 1.0 : 0.0);
        worst = std::max({worst, std::abs(d), std::abs(cross(i, j) - cross(j, i))});
      }
    }
  }
  return worst;
}

EigenDecomposition TwirledGenerator::decomposition() const {
  struct Entry {
    double value;
    std::size_t sector;
    Eigen::Index col;
  };
  std::vector<Entry> entries;
  for (std::size_t si = 0; si < sectors_.size(); ++si) {
    for (Eigen::Index c = 0; c < sectors_[si].eigvals.size(); ++c) entries.push_back({sectors_[si].eigvals[c], si, c});
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.value < b.value; });
  const auto d = static_cast<Eigen::Index>(dim());
  EigenDecomposition out{Eigen::VectorXd(d), Eigen::MatrixXcd::Zero(d, d)};
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto& e = entries[static_cast<std::size_t>(j)];
    const auto& s = sectors_[e.sector];
    out.eigvals[j] = e.value;
    for (std::size_t r = 0; r < s.basis.size(); ++r) {
      out.eigvecs(s.basis[r], j) = s.eigvecs(static_cast<Eigen::Index>(r), e.col);
    }
  }
  return out;
}

TwirledGenerator build_pk(int pair_count, int k, Sign sign, const GeneratorOptions& opts) {
  return TwirledGenerator(pair_count, k, sign, opts);
}

GeneratorSet::GeneratorSet(int pair_count, const GeneratorOptions& opts) : pair_count_(pair_count) {
  for (int k = 2; k <= pair_count; ++k) {
    gens_.emplace_back(pair_count, k, Sign::Plus, opts);
    gens_.emplace_back(pair_count, k, Sign::Minus, opts);
  }
}

const TwirledGenerator& GeneratorSet::get(int k, Sign sign) const {
  if (k < 2 || k > pair_count_) throw std::out_of_range("no generator for k=" + std::to_string(k));
  return gens_[static_cast<std::size_t>(2 * (k - 2) + (sign == Sign::Plus ? 0 : 1))];
}

std::shared_ptr<const GeneratorSet> GeneratorCache::get(int pair_count) {
  std::lock_guard lock(mu_);
  auto it = sets_.find(pair_count);
  if (it != sets_.end()) return it->second;
  auto set = std::make_shared<const GeneratorSet>(pair_count);
  sets_.emplace(pair_count, set);
  return set;
}

WirePermutation pair_permutation_rep(int pair_count, std::span<const int> sigma) {
  if (static_cast<int>(sigma.size()) != pair_count || !is_bijection(sigma)) {
    throw std::invalid_argument("pair permutation is not a bijection");
  }
  WirePermutation wires(static_cast<std::size_t>(2 * pair_count));
  for (int l = 0; l < pair_count; ++l) {
    const int to = sigma[static_cast<std::size_t>(l)];
    wires[static_cast<std::size_t>(2 * l)] = 2 * to;
    wires[static_cast<std::size_t>(2 * l + 1)] = 2 * to + 1;
  }
  return wires;
}

Mat3 su2_to_so3(const Mat2c& u) {
  if (unitarity_residual(u) > 1e-10 || std::abs(u.determinant() - cplx(1.0, 0.0)) > 1e-10) {
    throw std::invalid_argument("su2_to_so3: input is not in SU(2)");
  }
  const std::array<Mat2c, 3> s = {pauli::x(), pauli::y(), pauli::z()};
  Mat3 r;
  for (int k = 0; k < 3; ++k) {
    for (int j = 0; j < 3; ++j) {
      r(k, j) = 0.5 * (s[static_cast<std::size_t>(k)] * u * s[static_cast<std::size_t>(j)] * u.adjoint()).trace().real();
    }
  }
  return r;
}

int joint_invariant_dim(int n_qubits) {
  if (n_qubits < 1) throw std::invalid_argument("joint_invariant_dim: n must be >= 1");
  if (n_qubits > 6) throw std::invalid_argument("joint_invariant_dim: n too large for dense enumeration");
  const auto d = Eigen::Index{1} << n_qubits;

  // Trivial isotype of S_n: average of all wire permutations.
  Eigen::MatrixXd sym = Eigen::MatrixXd::Zero(d, d);
  std::vector<int> perm(static_cast<std::size_t>(n_qubits));
  std::iota(perm.begin(), perm.end(), 0);
  double count = 0;
  do {
    for (Eigen::Index x = 0; x < d; ++x) {
      sym(static_cast<Eigen::Index>(permute_index(static_cast<std::uint64_t>(x), n_qubits, perm)), x) += 1.0;
    }
    count += 1.0;
  } while (std::next_permutation(perm.begin(), perm.end()));
  sym /= count;

  // SU(2)-invariant vectors: common kernel of the total spin generators,
  // i.e. the kernel of S_x^2 + S_y^2 + S_z^2.
  Eigen::MatrixXcd casimir = Eigen::MatrixXcd::Zero(d, d);
  for (const Mat2c& p : {pauli::x(), pauli::y(), pauli::z()}) {
    Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(d, d);
    for (int w = 0; w < n_qubits; ++w) total += embed_single(n_qubits, w, p);
    casimir += total * total;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(casimir);
  Eigen::MatrixXcd kernel_proj = Eigen::MatrixXcd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (std::abs(solver.eigenvalues()[i]) < 1e-8) {
      const Eigen::VectorXcd v = solver.eigenvectors().col(i);
      kernel_proj += v * v.adjoint();
    }
  }

  const Eigen::MatrixXcd product = sym.cast<cplx>() * kernel_proj;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(product);
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()[i] > 1e-8) ++rank;
  }
  return rank;
}

void save_decomposition(const std::filesystem::path& path, const TwirledGenerator& gen) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const EigenDecomposition eig = gen.decomposition();
  const auto d = static_cast<std::int64_t>(gen.dim());
  write_le<std::int32_t>(os, gen.pair_count());
  write_le<std::int32_t>(os, gen.cycle_length());
  write_le<std::int32_t>(os, gen.sign() == Sign::Plus ? 1 : -1);
  write_le<std::int64_t>(os, d);
  for (Eigen::Index i = 0; i < d; ++i) write_le<double>(os, eig.eigvals[i]);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      write_le<double>(os, eig.eigvecs(r, c).real());
      write_le<double>(os, eig.eigvecs(r, c).imag());
    }
  }
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

CachedDecomposition load_decomposition(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  CachedDecomposition out;
  out.pair_count = read_le<std::int32_t>(is, "N");
  out.k = read_le<std::int32_t>(is, "k");
  const auto sign = read_le<std::int32_t>(is, "sign");
  if (sign != 1 && sign != -1) throw std::runtime_error("decomposition cache: bad sign field");
  out.sign = sign == 1 ? Sign::Plus : Sign::Minus;
  const auto d = read_le<std::int64_t>(is, "dim");
  if (out.pair_count < 1 || out.pair_count > 12 || d != (std::int64_t{1} << (2 * out.pair_count))) {
    throw std::runtime_error("decomposition cache: dim does not match N");
  }
  out.eig.eigvals.resize(d);
  out.eig.eigvecs.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i) out.eig.eigvals[i] = read_le<double>(is, "eigvals");
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      const double re = read_le<double>(is, "eigvecs");
      const double im = read_le<double>(is, "eigvecs");
      out.eig.eigvecs(r, c) = cplx(re, im);
    }
  }
  return out;
}

}  // namespace hyqurp
