#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "hyqurp/train.hpp"

// Checkpoint layout (text, one item per line):
//
//   format_version=1
//   model=hybrid|setmlp|mlp
//   n_points=, blocks=, theta=, classes=, profile=
//   pre_widths=2,4,4          (hybrid/setmlp head; informational, checked on load)
//   post_widths=24,24,24,K
//   convention=<gate ordering tag>
//   best_val_acc=, epoch=, lr=, batch_size=, sigma_jitter=, seed=
//   param_count=<total>
//   then for each block: "block <name> <count>" followed by <count> values.
//
// Blocks: hybrid = circuit, head.pre, head.post; setmlp = input_map,
// head.pre, head.post; mlp = net. Within an MLP block values follow layer
// order, each layer weight row-major then bias. Circuit coefficients are
// ordered [block][k - 2][+, -].

namespace hyqurp {

namespace {

constexpr int kFormatVersion = 1;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::size_t mlp_count(const std::vector<int>& widths) {
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    n += static_cast<std::size_t>(widths[i] * widths[i + 1] + widths[i + 1]);
  }
  return n;
}

std::vector<std::pair<std::string, std::size_t>> block_layout(const ModelSpec& spec) {
  const HeadConfig head = spec.head_config();
  switch (spec.kind) {
    case ModelKind::Hybrid:
      return {{"circuit", quantum_param_count(spec.blocks, spec.n_points)},
              {"head.pre", mlp_count(head.pre_widths)},
              {"head.post", mlp_count(head.post_widths)}};
    case ModelKind::SetMlp:
      return {{"input_map", mlp_count({3, 2})},
              {"head.pre", mlp_count(head.pre_widths)},
              {"head.post", mlp_count(head.post_widths)}};
    case ModelKind::PlainMlp:
      return {{"net", mlp_count(spec.plain_widths())}};
  }
  return {};
}

class Fields {
 public:
  explicit Fields(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  const std::string& str(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw std::runtime_error("checkpoint: missing field '" + key + "'");
    return it->second;
  }

  double real(const std::string& key) const {
    const std::string& s = str(key);
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(key);
      return v;
    } catch (const std::exception&) {
      throw std::runtime_error("checkpoint: bad value for field '" + key + "': '" + s + "'");
    }
  }

  long long integer(const std::string& key) const {
    const std::string& s = str(key);
    try {
      std::size_t used = 0;
      const long long v = std::stoll(s, &used);
      if (used != s.size()) throw std::invalid_argument(key);
      return v;
    } catch (const std::exception&) {
      throw std::runtime_error("checkpoint: bad value for field '" + key + "': '" + s + "'");
    }
  }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto layout = block_layout(ckpt.spec);
  std::size_t total = 0;
  for (const auto& [name, count] : layout) total += count;
  if (total != ckpt.params.size()) throw std::invalid_argument("checkpoint parameter count does not match model shape");

  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write checkpoint " + path.string());
  const HeadConfig head = ckpt.spec.head_config();
  os << "format_version=" << kFormatVersion << '\n'
     << "model=" << to_string(ckpt.spec.kind) << '\n'
     << "n_points=" << ckpt.spec.n_points << '\n'
     << "blocks=" << ckpt.spec.blocks << '\n'
     << "theta=" << fmt(ckpt.spec.theta) << '\n'
     << "classes=" << ckpt.spec.classes << '\n'
     << "profile=" << ckpt.spec.profile << '\n'
     << "pre_widths=" << join(head.pre_widths) << '\n'
     << "post_widths=" << join(head.post_widths) << '\n'
     << "convention=" << ckpt.convention << '\n'
     << "best_val_acc=" << fmt(ckpt.best_val_acc) << '\n'
     << "epoch=" << ckpt.epoch << '\n'
     << "lr=" << fmt(ckpt.lr) << '\n'
     << "batch_size=" << ckpt.batch_size << '\n'
     << "sigma_jitter=" << fmt(ckpt.sigma_jitter) << '\n'
     << "seed=" << ckpt.seed << '\n'
     << "param_count=" << total << '\n';
  std::size_t pos = 0;
  for (const auto& [name, count] : layout) {
    os << "block " << name << ' ' << count << '\n';
    for (std::size_t i = 0; i < count; ++i) os << fmt(ckpt.params[pos++]) << '\n';
  }
  if (!os) throw std::runtime_error("write failed for checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  std::streampos body = is.tellg();
  while (std::getline(is, line)) {
    if (line.rfind("block ", 0) == 0) break;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("checkpoint: malformed header line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
    body = is.tellg();
  }
  const Fields f(std::move(kv));
  if (f.integer("format_version") != kFormatVersion) {
    throw std::runtime_error("checkpoint: unsupported field 'format_version'");
  }

  Checkpoint ck;
  try {
    ck.spec.kind = parse_model_kind(f.str("model"));
  } catch (const std::invalid_argument&) {
    throw std::runtime_error("checkpoint: bad value for field 'model'");
  }
  ck.spec.n_points = static_cast<int>(f.integer("n_points"));
  ck.spec.blocks = static_cast<int>(f.integer("blocks"));
  ck.spec.theta = f.real("theta");
  ck.spec.classes = static_cast<int>(f.integer("classes"));
  ck.spec.profile = f.str("profile");
  if (ck.spec.profile != "light" && ck.spec.profile != "mid") {
    throw std::runtime_error("checkpoint: bad value for field 'profile'");
  }
  if (ck.spec.n_points < 2 || ck.spec.n_points > 6) throw std::runtime_error("checkpoint: bad value for field 'n_points'");
  if (ck.spec.blocks < 1) throw std::runtime_error("checkpoint: bad value for field 'blocks'");
  if (ck.spec.classes < 2) throw std::runtime_error("checkpoint: bad value for field 'classes'");
  const HeadConfig head = ck.spec.head_config();
  if (f.str("pre_widths") != join(head.pre_widths)) throw std::runtime_error("checkpoint: bad value for field 'pre_widths'");
  if (f.str("post_widths") != join(head.post_widths)) {
    throw std::runtime_error("checkpoint: bad value for field 'post_widths'");
  }
  ck.convention = f.str("convention");
  if (ck.convention != kGateConvention) {
    throw std::runtime_error("checkpoint: field 'convention' is '" + ck.convention + "', this build uses '" +
                             kGateConvention + "'");
  }
  ck.best_val_acc = f.real("best_val_acc");
  ck.epoch = static_cast<int>(f.integer("epoch"));
  ck.lr = f.real("lr");
  ck.batch_size = static_cast<int>(f.integer("batch_size"));
  ck.sigma_jitter = f.real("sigma_jitter");
  ck.seed = static_cast<std::uint64_t>(f.integer("seed"));

  const auto layout = block_layout(ck.spec);
  std::size_t total = 0;
  for (const auto& [name, count] : layout) total += count;
  if (f.integer("param_count") != static_cast<long long>(total)) {
    throw std::runtime_error("checkpoint: bad value for field 'param_count'");
  }

  is.clear();
  is.seekg(body);
  for (const auto& [name, count] : layout) {
    const std::string field = "block " + name;
    if (!std::getline(is, line)) throw std::runtime_error("checkpoint: missing field '" + field + "'");
    std::istringstream hs(line);
    std::string tag, got_name;
    std::size_t got_count = 0;
    if (!(hs >> tag >> got_name >> got_count) || tag != "block" || got_name != name || got_count != count) {
      throw std::runtime_error("checkpoint: bad header for field '" + field + "': '" + line + "'");
    }
    for (std::size_t i = 0; i < count; ++i) {
      if (!std::getline(is, line)) throw std::runtime_error("checkpoint: field '" + field + "' is truncated");
      try {
        std::size_t used = 0;
        const double v = std::stod(line, &used);
        if (used != line.size() || !std::isfinite(v)) throw std::invalid_argument(line);
        ck.params.push_back(v);
      } catch (const std::exception&) {
        throw std::runtime_error("checkpoint: bad value in field '" + field + "' at entry " + std::to_string(i) +
                                 ": '" + line + "'");
      }
    }
  }
  while (std::getline(is, line)) {
    if (!line.empty()) throw std::runtime_error("checkpoint: trailing data after last block");
  }
  return ck;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<EpochMetrics>& log) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write metrics " + path.string());
  os << "epoch,train_loss,train_acc,val_acc\n";
  for (const auto& m : log) {
    os << m.epoch << ',' << fmt(m.train_loss) << ',' << fmt(m.train_acc) << ',' << fmt(m.val_acc) << '\n';
  }
}

}  // namespace hyqurp
