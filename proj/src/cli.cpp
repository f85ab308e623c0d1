#include "hyqurp/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "hyqurp/data.hpp"
#include "hyqurp/train.hpp"
#include "hyqurp/verify.hpp"

namespace hyqurp {

namespace fs = std::filesystem;

namespace {

struct RunConfig {
  int n = 4;
  int b = 12;
  double theta = 1.7;
  std::string profile = "light";
  int k_classes = 0;  // 0: infer from the manifest labels
  std::string model = "hybrid";
  double lr = 1e-2;
  int epochs = 1000;
  int batch_size = 35;
  double sigma_jitter = 0.02;
  std::vector<std::uint64_t> seeds{121, 831, 1557, 2023, 2024, 2025, 2026};
  std::vector<std::string> augment{"rotation", "permutation", "jitter"};
  bool retry_ladder = false;
  int log_every = 10;
  std::string manifest;
  std::string out = "runs";
  std::string checkpoint;
  int transforms = 100;
  int n_min = 2;
  int n_max = 4;
  bool inject_sign_fault = false;
  std::vector<std::string> classes{"sphere", "cube", "simplex"};
  int objects_per_class = 100;
  int candidates = 256;
  double noise = 0.0;
  std::uint64_t seed = 7;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

void write_config(const fs::path& path, const std::string& command, const RunConfig& c) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "# command: " << command << '\n'
     << "n=" << c.n << '\n'
     << "b=" << c.b << '\n'
     << "theta=" << fmt(c.theta) << '\n'
     << "profile=" << c.profile << '\n'
     << "k-classes=" << c.k_classes << '\n'
     << "model=" << c.model << '\n'
     << "lr=" << fmt(c.lr) << '\n'
     << "epochs=" << c.epochs << '\n'
     << "batch-size=" << c.batch_size << '\n'
     << "sigma-jitter=" << fmt(c.sigma_jitter) << '\n'
     << "seeds=" << join(c.seeds) << '\n'
     << "augment=" << join(c.augment) << '\n'
     << "retry-ladder=" << (c.retry_ladder ? "true" : "false") << '\n'
     << "manifest=" << c.manifest << '\n'
     << "out=" << c.out << '\n'
     << "transforms=" << c.transforms << '\n'
     << "classes=" << join(c.classes) << '\n'
     << "objects-per-class=" << c.objects_per_class << '\n'
     << "candidates=" << c.candidates << '\n'
     << "noise=" << fmt(c.noise) << '\n'
     << "seed=" << c.seed << '\n';
}

AugmentFlags parse_augment(const std::vector<std::string>& names) {
  AugmentFlags f{false, false, false};
  for (const auto& s : names) {
    if (s == "rotation") f.rotation = true;
    else if (s == "permutation") f.permutation = true;
    else if (s == "jitter") f.jitter = true;
    else if (s != "none") throw UsageError("unknown augmentation '" + s + "'");
  }
  return f;
}

std::vector<ObjectRecord> read_manifest(const RunConfig& c) {
  if (c.manifest.empty()) throw UsageError("--manifest is required");
  return load_manifest(c.manifest);
}

int infer_classes(const RunConfig& c, const std::vector<ObjectRecord>& records) {
  int max_label = -1;
  for (const auto& r : records) max_label = std::max(max_label, r.label);
  if (c.k_classes == 0) return max_label + 1;
  if (max_label >= c.k_classes) {
    throw UsageError("manifest has label " + std::to_string(max_label) + " but --k-classes is " +
                     std::to_string(c.k_classes));
  }
  return c.k_classes;
}

int cmd_gen_data(const RunConfig& c, std::ostream& out) {
  SynthSpec spec;
  for (const auto& name : c.classes) spec.classes.push_back(parse_shape(name));
  spec.objects_per_class = c.objects_per_class;
  spec.candidates_per_object = c.candidates;
  spec.noise = c.noise;
  std::mt19937_64 rng(c.seed);
  const auto records = synth_dataset(spec, rng);

  const fs::path dir(c.out);
  fs::create_directories(dir);
  save_manifest(dir / "manifest.csv", records);
  write_config(dir / "config.txt", "gen-data", c);

  std::map<int, std::array<int, 3>> counts;
  for (const auto& r : records) ++counts[r.label][static_cast<std::size_t>(r.split)];
  out << "wrote " << records.size() << " objects to " << (dir / "manifest.csv").string() << '\n';
  for (const auto& [label, n] : counts) {
    out << "class " << label << " (" << c.classes[static_cast<std::size_t>(label)] << "): train " << n[0] << ", val "
        << n[1] << ", test " << n[2] << '\n';
  }
  return 0;
}

int cmd_train(const RunConfig& c, std::ostream& out) {
  const auto records = read_manifest(c);
  ModelSpec spec;
  spec.kind = parse_model_kind(c.model);
  spec.n_points = c.n;
  spec.blocks = c.b;
  spec.theta = c.theta;
  spec.profile = c.profile;
  spec.classes = infer_classes(c, records);
  if (c.n < 2 || c.n > 6) throw UsageError("--n must be in 2..6");
  if (c.b < 1) throw UsageError("--b must be >= 1");
  spec.head_config().validate();

  TrainConfig tc;
  tc.lr = c.lr;
  tc.epochs = c.epochs;
  tc.batch_size = c.batch_size;
  tc.sigma_jitter = c.sigma_jitter;
  tc.augment = parse_augment(c.augment);
  tc.seeds = c.seeds;
  tc.validate();
  if (tc.seeds.empty()) throw UsageError("--seeds must name at least one seed");

  const fs::path root(c.out);
  fs::create_directories(root);
  write_config(root / "config.txt", "train", c);

  GeneratorCache cache;
  std::vector<double> accs;
  for (const std::uint64_t seed : tc.seeds) {
    auto sampling = make_stream(seed, Stream::Sampling, 0);
    const DatasetSplits data = sample_splits(records, c.n, sampling);

    std::vector<double> ladder{tc.lr};
    if (c.retry_ladder) {
      ladder.push_back(tc.lr / 10.0);
      ladder.push_back(tc.lr * 10.0);
    }
    TrainResult result;
    bool done = false;
    for (std::size_t attempt = 0; attempt < ladder.size() && !done; ++attempt) {
      TrainConfig run = tc;
      run.lr = ladder[attempt];
      auto model = make_model(spec, cache);
      try {
        result = train_loop(*model, data, run, seed, [&](const EpochMetrics& m) {
          if (c.log_every > 0 && (m.epoch % c.log_every == 0 || m.epoch == run.epochs)) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "seed %llu epoch %d loss %.6f train_acc %.4f val_acc %.4f",
                          static_cast<unsigned long long>(seed), m.epoch, m.train_loss, m.train_acc, m.val_acc);
            out << buf << std::endl;
          }
        });
        done = true;
      } catch (const TrainingDiverged& e) {
        out << "seed " << seed << ": " << e.what() << '\n';
        if (attempt + 1 == ladder.size()) throw;
        out << "retrying with lr " << ladder[attempt + 1] << '\n';
      }
    }

    const fs::path dir = root / ("seed_" + std::to_string(seed));
    fs::create_directories(dir);
    save_checkpoint(dir / "checkpoint.txt", result.best);
    write_metrics_csv(dir / "metrics.csv", result.log);
    write_config(dir / "config.txt", "train", c);
    char buf[160];
    std::snprintf(buf, sizeof buf, "seed %llu best_epoch %d val_acc %.4f test_acc %.4f",
                  static_cast<unsigned long long>(seed), result.best.epoch, result.best.best_val_acc, result.test_acc);
    out << buf << std::endl;
    accs.push_back(result.test_acc);
  }

  const double mean = std::accumulate(accs.begin(), accs.end(), 0.0) / static_cast<double>(accs.size());
  double var = 0.0;
  for (double a : accs) var += (a - mean) * (a - mean);
  const double sd = accs.size() > 1 ? std::sqrt(var / static_cast<double>(accs.size() - 1)) : 0.0;
  char buf[160];
  std::snprintf(buf, sizeof buf, "test accuracy over %zu seed(s): %.2f%% +/- %.2f%%", accs.size(), 100.0 * mean,
                100.0 * sd);
  out << buf << '\n';
  return 0;
}

int cmd_eval(const RunConfig& c, std::ostream& out) {
  if (c.checkpoint.empty()) throw UsageError("--checkpoint is required");
  if (c.transforms < 0) throw UsageError("--transforms must be >= 0");
  const Checkpoint ck = load_checkpoint(c.checkpoint);
  const auto records = read_manifest(c);
  GeneratorCache cache;
  const auto model = model_from_checkpoint(ck, cache);
  for (const auto& r : records) {
    if (r.label >= ck.spec.classes) throw UsageError("manifest label outside the checkpoint's classes");
  }
  auto sampling = make_stream(ck.seed, Stream::Sampling, 0);
  const DatasetSplits data = sample_splits(records, ck.spec.n_points, sampling);

  char buf[160];
  std::snprintf(buf, sizeof buf, "test accuracy %.6f (%zu objects)", accuracy(*model, data.test), data.test.size());
  out << buf << '\n';
  if (c.transforms == 0) return 0;

  auto rng = make_stream(c.seed, Stream::Eval, 0);
  double cos_sum = 0.0, ratio_sum = 0.0;
  double cos_min = 1.0 / 0.0, ratio_min = 1.0 / 0.0, ratio_max = 0.0;
  for (int t = 0; t < c.transforms; ++t) {
    const auto& item = data.test[static_cast<std::size_t>(t) % data.test.size()];
    const InvarianceMetrics m = invariance_metrics(*model, item.points, rng);
    cos_sum += m.cosine;
    ratio_sum += m.norm_ratio;
    cos_min = std::min(cos_min, m.cosine);
    ratio_min = std::min(ratio_min, m.norm_ratio);
    ratio_max = std::max(ratio_max, m.norm_ratio);
  }
  const double n = static_cast<double>(c.transforms);
  std::snprintf(buf, sizeof buf, "cosine %.6f (min %.6f)\nratio %.6f (range %.6f..%.6f)\ntransforms %d", cos_sum / n,
                cos_min, ratio_sum / n, ratio_min, ratio_max, c.transforms);
  out << buf << '\n';
  return 0;
}

int cmd_verify(const RunConfig& c, std::ostream& out) {
  VerifyOptions opts;
  opts.n_min = c.n_min;
  opts.n_max = c.n_max;
  opts.seed = c.seed;
  opts.inject_sign_fault = c.inject_sign_fault;
  const VerifyReport report = run_verify(opts, out);
  if (report.all_passed()) {
    out << "all " << report.checks.size() << " checks passed\n";
    return 0;
  }
  for (const auto& f : report.failures()) out << "FAILED: " << f << '\n';
  return 1;
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Rotation- and permutation-invariant hybrid point-cloud classifier"};
  app.set_config("--config", "", "key=value file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--n", c.n, "points per cloud (2..6)")->capture_default_str();
  app.add_option("--b", c.b, "circuit blocks")->capture_default_str();
  app.add_option("--theta", c.theta, "encoding scale")->capture_default_str();
  app.add_option("--profile", c.profile, "head profile")->check(CLI::IsMember({"light", "mid"}))->capture_default_str();
  app.add_option("--k-classes", c.k_classes, "number of classes (0: from manifest)")->capture_default_str();
  app.add_option("--model", c.model, "model kind")
      ->check(CLI::IsMember({"hybrid", "setmlp", "mlp"}))
      ->capture_default_str();
  app.add_option("--lr", c.lr, "Adam learning rate")->capture_default_str();
  app.add_option("--epochs", c.epochs)->capture_default_str();
  app.add_option("--batch-size", c.batch_size)->capture_default_str();
  app.add_option("--sigma-jitter", c.sigma_jitter)->capture_default_str();
  app.add_option("--seeds", c.seeds, "comma-separated run seeds")->delimiter(',')->capture_default_str();
  app.add_option("--augment", c.augment, "rotation,permutation,jitter or none")->delimiter(',')->capture_default_str();
  app.add_flag("--retry-ladder", c.retry_ladder, "on divergence retry with lr/10 then lr*10");
  app.add_option("--log-every", c.log_every, "epoch log interval (0: quiet)")->capture_default_str();
  app.add_option("--manifest", c.manifest, "dataset manifest CSV");
  app.add_option("--out", c.out, "output directory")->envname("HYQURP_OUT_DIR")->capture_default_str();
  app.add_option("--checkpoint", c.checkpoint, "checkpoint file for eval");
  app.add_option("--transforms", c.transforms, "random transforms for invariance metrics")->capture_default_str();
  app.add_option("--n-min", c.n_min)->capture_default_str();
  app.add_option("--n-max", c.n_max)->capture_default_str();
  app.add_flag("--inject-sign-fault", c.inject_sign_fault, "corrupt a generator sign (self-test of verify)")
      ->group("");
  app.add_option("--classes", c.classes, "shape families for gen-data")->delimiter(',')->capture_default_str();
  app.add_option("--objects-per-class", c.objects_per_class)->capture_default_str();
  app.add_option("--candidates", c.candidates, "surface samples per object")->capture_default_str();
  app.add_option("--noise", c.noise)->capture_default_str();
  app.add_option("--seed", c.seed, "seed for gen-data, eval transforms and verify")->capture_default_str();

  auto* gen = app.add_subcommand("gen-data", "write a synthetic dataset");
  auto* train = app.add_subcommand("train", "train one run per seed");
  auto* eval = app.add_subcommand("eval", "score a checkpoint");
  auto* verify = app.add_subcommand("verify", "run the invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(c, out);
    if (train->parsed()) return cmd_train(c, out);
    if (eval->parsed()) return cmd_eval(c, out);
    if (verify->parsed()) return cmd_verify(c, out);
  } catch (const TrainingDiverged& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace hyqurp
