// srslab: every experiment behind one executable with deterministic seeds
// and file outputs. Exit codes: 0 success, 1 flag/validation error, 2
// runtime failure.

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "srslab/activation.hpp"
#include "srslab/config.hpp"
#include "srslab/dataset.hpp"
#include "srslab/dynamics.hpp"
#include "srslab/moments.hpp"
#include "srslab/netpbm.hpp"
#include "srslab/nn.hpp"
#include "srslab/train.hpp"

namespace fs = std::filesystem;
using namespace srslab;

namespace {

// validation failure tied to a specific flag; always exits 1
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& flag, const std::string& what)
      : std::runtime_error(flag + ": " + what) {}
};

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::vector<double> parse_doubles(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw UsageError(flag, "not a number: '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError(flag, "empty list");
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text, const char* flag) {
  std::vector<std::size_t> out;
  for (double v : parse_doubles(text, flag)) {
    if (v < 1.0 || v != std::floor(v)) {
      throw UsageError(flag, "not a positive integer: " + fmt_double(v));
    }
    out.push_back(std::size_t(v));
  }
  return out;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) out.push_back(item);
  return out;
}

std::vector<Act> parse_acts(const std::string& text, const char* flag) {
  std::vector<Act> out;
  for (const std::string& name : split_names(text)) {
    try {
      out.push_back(act_from_name(name));
    } catch (const std::invalid_argument&) {
      throw UsageError(flag, "unknown activation '" + name + "'");
    }
  }
  if (out.empty()) throw UsageError(flag, "empty list");
  return out;
}

InitScheme parse_init(const std::string& name, const char* flag) {
  try {
    return init_from_name(name);
  } catch (const std::invalid_argument&) {
    throw UsageError(flag, "unknown init scheme '" + name + "'");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(text.data(), std::streamsize(text.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

void finish_run(const fs::path& out_dir, RunManifest& manifest) {
  write_text(out_dir / "run-manifest", manifest_to_text(manifest));
}

// flag > config > default resolution; CLI11 stores flag values in the bound
// locals, count() says whether the user passed them
struct Resolve {
  CLI::App* sub;
  const ConfigMap* cfg;

  bool passed(const char* flag) const {
    const CLI::Option* o = sub->get_option_no_throw(flag);
    return o != nullptr && o->count() > 0;
  }
  double d(const char* flag, const char* key, double flagval, double dflt) const {
    if (passed(flag)) return flagval;
    return config_double(*cfg, key, dflt);
  }
  long long i(const char* flag, const char* key, long long flagval, long long dflt) const {
    if (passed(flag)) return flagval;
    return config_int(*cfg, key, dflt);
  }
  std::string s(const char* flag, const char* key, const std::string& flagval,
                const std::string& dflt) const {
    if (passed(flag)) return flagval;
    return config_str(*cfg, key, dflt);
  }
};

struct DatasetChoice {
  DatasetSplit train;
  DatasetSplit test;
  std::vector<std::size_t> default_widths;
  ConfigMap echo;  // dataset-specific manifest entries
};

constexpr std::uint64_t kToyTrainSeed = 7;
constexpr std::uint64_t kToyTestSeed = 8;

DatasetChoice load_dataset(const std::string& name, const std::string& data_dir, long long train_n,
                           long long test_n, double noise) {
  DatasetChoice out;
  if (name == "fashion-mnist") {
    fs::path dir = data_dir;
    out.train = load_idx((dir / "train-images-idx3-ubyte").string(),
                         (dir / "train-labels-idx1-ubyte").string());
    out.test = load_idx((dir / "t10k-images-idx3-ubyte").string(),
                        (dir / "t10k-labels-idx1-ubyte").string());
    out.default_widths = {784, 512, 512, 512, 256, 10};
    out.echo["data_dir"] = data_dir;
    return out;
  }
  ToyKind kind;
  std::size_t classes;
  try {
    kind = toy_from_name(name);
  } catch (const std::invalid_argument&) {
    throw UsageError("--dataset", "unknown dataset '" + name + "'");
  }
  switch (kind) {
    case ToyKind::TwoMoons: classes = 2; break;
    case ToyKind::Pinwheel: classes = 5; break;
    case ToyKind::EightGaussians: classes = 8; break;
    default: classes = 2; break;
  }
  if (train_n < 2) throw UsageError("--train-n", "needs at least 2 samples");
  if (test_n < 2) throw UsageError("--test-n", "needs at least 2 samples");
  if (noise < 0.0) throw UsageError("--noise", "must be nonnegative");
  out.train = gen_toy(kind, std::size_t(train_n), noise, kToyTrainSeed);
  out.test = gen_toy(kind, std::size_t(test_n), noise, kToyTestSeed);
  out.default_widths = {2, 32, 32, classes};
  out.echo["train_n"] = std::to_string(train_n);
  out.echo["test_n"] = std::to_string(test_n);
  out.echo["noise"] = fmt_double(noise);
  out.echo["data_seed_train"] = std::to_string(kToyTrainSeed);
  out.echo["data_seed_test"] = std::to_string(kToyTestSeed);
  return out;
}

std::string widths_string(const std::vector<std::size_t>& widths) {
  std::string s;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(widths[i]);
  }
  return s;
}

// ---- moments ----------------------------------------------------------

struct MomentsArgs {
  std::string alphas = "0.5,1,2,3,4,5";
  std::string betas = "1,2,3,4,5,6";
  double truncation = 12.0;
  long long panels = 2048;
  std::string rule = "gauss";
};

int cmd_moments(CLI::App* sub, const ConfigMap& cfg, const MomentsArgs& a, std::uint64_t seed,
                const fs::path& out_dir) {
  Resolve r{sub, &cfg};
  std::string alphas_text = r.s("--alphas", "alphas", a.alphas, "0.5,1,2,3,4,5");
  std::string betas_text = r.s("--betas", "betas", a.betas, "1,2,3,4,5,6");
  QuadratureConfig qc;
  qc.truncation = r.d("--truncation", "truncation", a.truncation, 12.0);
  qc.panels = std::size_t(r.i("--panels", "panels", a.panels, 2048));
  std::string rule = r.s("--rule", "rule", a.rule, "gauss");
  if (rule == "gauss") {
    qc.rule = QuadRule::GaussLegendre;
  } else if (rule == "simpson") {
    qc.rule = QuadRule::Simpson;
  } else {
    throw UsageError("--rule", "expected 'gauss' or 'simpson', got '" + rule + "'");
  }
  if (!(qc.truncation > 0.0)) throw UsageError("--truncation", "must be positive");
  if (qc.panels < 2) throw UsageError("--panels", "needs at least 2 panels");

  std::vector<double> alphas = parse_doubles(alphas_text, "--alphas");
  std::vector<double> betas = parse_doubles(betas_text, "--betas");
  for (double v : alphas) {
    if (!(v > 0.0)) throw UsageError("--alphas", "alpha must be positive: " + fmt_double(v));
  }
  for (double v : betas) {
    if (!(v > 0.0)) throw UsageError("--betas", "beta must be positive: " + fmt_double(v));
  }

  MomentTable table = moments_table(alphas, betas, qc);
  std::size_t divergent = 0;
  for (const MomentResult& c : table.cells) divergent += c.status == MomentStatus::Divergent;

  write_text(out_dir / "moments.csv", format_moments_csv(table));
  std::printf("wrote moments.csv: %zu cells, %zu divergent\n", table.cells.size(), divergent);

  RunManifest manifest;
  manifest.resolved["subcommand"] = "moments";
  manifest.resolved["alphas"] = alphas_text;
  manifest.resolved["betas"] = betas_text;
  manifest.resolved["truncation"] = fmt_double(qc.truncation);
  manifest.resolved["panels"] = std::to_string(qc.panels);
  manifest.resolved["rule"] = rule;
  manifest.resolved["seed"] = std::to_string(seed);
  manifest.outputs.push_back("moments.csv");
  finish_run(out_dir, manifest);
  return 0;
}

// ---- shape -------------------------------------------------------------

int cmd_shape(double alpha, double beta, std::uint64_t seed, const fs::path& out_dir) {
  if (!(alpha > 0.0)) throw UsageError("--alpha", "must be positive");
  if (!(beta > 0.0)) throw UsageError("--beta", "must be positive");
  if (srs_pole_exists(alpha, beta)) {
    throw UsageError("--beta", "denominator has a root for alpha=" + fmt_double(alpha) +
                                   ", beta=" + fmt_double(beta) + " (needs beta < alpha*e)");
  }
  SrsShape s = srs_shape(alpha, beta);
  std::printf("min at x=%.10g\nmin value %.10g\nsupremum %.10g\n", s.min_location, s.min_value,
              s.supremum);

  RunManifest manifest;
  manifest.resolved["subcommand"] = "shape";
  manifest.resolved["alpha"] = fmt_double(alpha);
  manifest.resolved["beta"] = fmt_double(beta);
  manifest.resolved["seed"] = std::to_string(seed);
  finish_run(out_dir, manifest);
  return 0;
}

// ---- iterate -----------------------------------------------------------

Activation make_act(const std::string& name, double alpha, double beta, const char* flag) {
  Act kind;
  try {
    kind = act_from_name(name);
  } catch (const std::invalid_argument&) {
    throw UsageError(flag, "unknown activation '" + name + "'");
  }
  if (kind == Act::SRS) {
    try {
      return Activation::srs(alpha, beta);
    } catch (const std::invalid_argument& e) {
      throw UsageError("--beta", e.what());
    }
  }
  if (kind == Act::PReLU) return Activation::prelu(1, 0.1);
  return Activation::plain(kind);
}

struct IterateArgs {
  std::string act = "srs";
  double alpha = 5.0;
  double beta = 3.0;
  long long iters = 50;
  long long runs = 1;
};

int cmd_iterate(CLI::App* sub, const ConfigMap& cfg, const IterateArgs& a, std::uint64_t seed,
                const fs::path& out_dir) {
  Resolve r{sub, &cfg};
  std::string act_name_text = r.s("--act", "act", a.act, "srs");
  double alpha = r.d("--alpha", "alpha", a.alpha, 5.0);
  double beta = r.d("--beta", "beta", a.beta, 3.0);
  long long iters = r.i("--iters", "iters", a.iters, 50);
  long long runs = r.i("--runs", "runs", a.runs, 1);
  if (iters < 2) throw UsageError("--iters", "needs at least 2 iterations");
  if (runs < 1) throw UsageError("--runs", "needs at least 1 run");

  Activation act = make_act(act_name_text, alpha, beta, "--act");

  RunManifest manifest;
  manifest.resolved["subcommand"] = "iterate";
  manifest.resolved["act"] = act_name_text;
  if (act.kind == Act::SRS) {
    manifest.resolved["alpha"] = fmt_double(alpha);
    manifest.resolved["beta"] = fmt_double(beta);
  }
  manifest.resolved["iters"] = std::to_string(iters);
  manifest.resolved["runs"] = std::to_string(runs);
  manifest.resolved["seed"] = std::to_string(seed);

  for (long long k = 0; k < runs; ++k) {
    std::uint64_t run_seed = seed + std::uint64_t(k);
    Trajectory t = iterate_activation(act, int(iters), run_seed);
    std::string name =
        "trajectory_" + act_name_text + "_seed" + std::to_string(run_seed) + ".csv";
    write_text(out_dir / name, trajectory_to_csv(t));
    manifest.outputs.push_back(name);
  }
  std::printf("wrote %lld trajectories of %lld iterations\n", runs, iters);
  finish_run(out_dir, manifest);
  return 0;
}

// ---- landscape ---------------------------------------------------------

struct LandscapeArgs {
  std::string acts = "srs,relu";
  double alpha = 5.0;
  double beta = 3.0;
  long long height = 256;
  long long width = 256;
  std::string extent = "-6,6,-6,6";
};

int cmd_landscape(CLI::App* sub, const ConfigMap& cfg, const LandscapeArgs& a, std::uint64_t seed,
                  const fs::path& out_dir) {
  Resolve r{sub, &cfg};
  std::string acts_text = r.s("--acts", "acts", a.acts, "srs,relu");
  double alpha = r.d("--alpha", "alpha", a.alpha, 5.0);
  double beta = r.d("--beta", "beta", a.beta, 3.0);
  long long height = r.i("--height", "height", a.height, 256);
  long long width = r.i("--width", "width", a.width, 256);
  std::string extent_text = r.s("--extent", "extent", a.extent, "-6,6,-6,6");

  if (height < 2) throw UsageError("--height", "needs at least 2 rows");
  if (width < 2) throw UsageError("--width", "needs at least 2 columns");
  std::vector<double> ext = parse_doubles(extent_text, "--extent");
  if (ext.size() != 4) throw UsageError("--extent", "expected x_min,x_max,y_min,y_max");
  LandscapeExtent e{ext[0], ext[1], ext[2], ext[3]};
  if (!(e.x_min < e.x_max) || !(e.y_min < e.y_max)) {
    throw UsageError("--extent", "mins must be below maxes");
  }

  std::vector<std::string> names = split_names(acts_text);
  RunManifest manifest;
  manifest.resolved["subcommand"] = "landscape";
  manifest.resolved["acts"] = acts_text;
  manifest.resolved["alpha"] = fmt_double(alpha);
  manifest.resolved["beta"] = fmt_double(beta);
  manifest.resolved["height"] = std::to_string(height);
  manifest.resolved["width"] = std::to_string(width);
  manifest.resolved["extent"] = extent_text;
  manifest.resolved["seed"] = std::to_string(seed);

  for (const std::string& name : names) {
    Activation act = make_act(name, alpha, beta, "--acts");
    Landscape ls = output_landscape(act, std::size_t(height), std::size_t(width), e, seed);
    std::string pgm = "landscape_" + name + ".pgm";
    std::string csv = "landscape_" + name + ".csv";
    write_pgm((out_dir / pgm).string(), ls.grid, PgmFormat::P5);
    write_text(out_dir / csv, landscape_to_csv(ls));
    manifest.outputs.push_back(pgm);
    manifest.outputs.push_back(csv);
    std::printf("%s roughness=%.6g\n", name.c_str(), landscape_roughness(ls));
  }
  finish_run(out_dir, manifest);
  return 0;
}

// ---- train / ablate ----------------------------------------------------

struct TrainArgs {
  std::string dataset = "fashion-mnist";
  std::string data_dir;
  std::string act = "srs";
  std::string widths;
  long long train_n = 1000;
  long long test_n = 500;
  double noise = 0.1;
  double lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  long long batch_size = 50;
  long long steps = 10'000;
  std::string init = "gaussian";
  bool use_bn = false;
  double srs_alpha0 = 3.0;
  double srs_beta0 = 2.0;
  double clamp_floor = kDefaultClampFloor;
  long long log_interval = 50;
  long long eval_interval = 1000;
  long long eval_batch = 1000;
  // ablate-only
  std::string acts = "lrelu,prelu,softplus,elu,selu,swish,relu,srs";
  std::string lrs = "0.01,0.1";
  std::string bns = "0,1";
  std::string inits = "gaussian";
};

void add_train_options(CLI::App* sub, TrainArgs& a, bool ablate) {
  sub->add_option("--dataset", a.dataset, "fashion-mnist, two-moons, pinwheel, eight-gaussians");
  sub->add_option("--data-dir", a.data_dir, "directory with the four idx files");
  sub->add_option("--widths", a.widths, "layer widths, input first, classes last");
  sub->add_option("--train-n", a.train_n, "toy dataset train size");
  sub->add_option("--test-n", a.test_n, "toy dataset test size");
  sub->add_option("--noise", a.noise, "toy dataset noise level");
  sub->add_option("--momentum", a.momentum, "sgd momentum");
  sub->add_option("--weight-decay", a.weight_decay, "l2 decay on dense weights");
  sub->add_option("--batch-size", a.batch_size, "examples per step");
  sub->add_option("--steps", a.steps, "sgd steps");
  sub->add_option("--srs-alpha0", a.srs_alpha0, "srs alpha at init");
  sub->add_option("--srs-beta0", a.srs_beta0, "srs beta at init");
  sub->add_option("--clamp-floor", a.clamp_floor, "srs parameter floor");
  sub->add_option("--log-interval", a.log_interval, "steps between metric rows");
  sub->add_option("--eval-interval", a.eval_interval, "steps between test evaluations");
  sub->add_option("--eval-batch", a.eval_batch, "evaluation chunk size");
  if (ablate) {
    sub->add_option("--acts", a.acts, "activations, one table row each");
    sub->add_option("--lrs", a.lrs, "learning rates in the setting grid");
    sub->add_option("--bns", a.bns, "batchnorm column values (0/1 list)");
    sub->add_option("--inits", a.inits, "init schemes in the setting grid");
  } else {
    sub->add_option("--act", a.act, "hidden activation");
    sub->add_option("--lr", a.lr, "learning rate");
    sub->add_flag("--bn", a.use_bn, "batchnorm before each hidden activation");
    sub->add_option("--init", a.init, "gaussian, xavier, he");
  }
}

// shared flag>config>default resolution for everything in TrainConfig plus
// the dataset choice; fills the manifest as it goes
struct ResolvedTrain {
  TrainConfig cfg;
  DatasetChoice data;
  std::vector<std::size_t> widths;
  ConfigMap echo;
};

ResolvedTrain resolve_train(CLI::App* sub, const ConfigMap& cfgfile, TrainArgs& a,
                            std::uint64_t seed) {
  Resolve r{sub, &cfgfile};
  ResolvedTrain out;
  out.cfg.lr = r.d("--lr", "lr", a.lr, 0.01);
  out.cfg.momentum = r.d("--momentum", "momentum", a.momentum, 0.9);
  out.cfg.weight_decay = r.d("--weight-decay", "weight_decay", a.weight_decay, 5e-4);
  out.cfg.batch_size = int(r.i("--batch-size", "batch_size", a.batch_size, 50));
  out.cfg.steps = int(r.i("--steps", "steps", a.steps, 10'000));
  out.cfg.use_bn = r.passed("--bn") ? a.use_bn : config_bool(cfgfile, "use_bn", false);
  out.cfg.seed = seed;
  out.cfg.srs_alpha0 = r.d("--srs-alpha0", "srs_alpha0", a.srs_alpha0, 3.0);
  out.cfg.srs_beta0 = r.d("--srs-beta0", "srs_beta0", a.srs_beta0, 2.0);
  out.cfg.clamp_floor = r.d("--clamp-floor", "clamp_floor", a.clamp_floor, kDefaultClampFloor);
  out.cfg.log_interval = int(r.i("--log-interval", "log_interval", a.log_interval, 50));
  out.cfg.eval_interval = int(r.i("--eval-interval", "eval_interval", a.eval_interval, 1000));
  out.cfg.eval_batch = int(r.i("--eval-batch", "eval_batch", a.eval_batch, 1000));
  out.cfg.init = parse_init(r.s("--init", "init", a.init, "gaussian"),
                            sub->get_option_no_throw("--init") ? "--init" : "--inits");
  try {
    check_config(out.cfg);
  } catch (const std::invalid_argument& e) {
    throw UsageError("--lr/--steps/--batch-size", e.what());
  }

  std::string dataset = r.s("--dataset", "dataset", a.dataset, "fashion-mnist");
  std::string data_dir = r.s("--data-dir", "data_dir", a.data_dir, "");
  if (data_dir.empty()) {
    const char* env = std::getenv("SRSLAB_DATA_DIR");
    data_dir = env ? env : "data/fashion-mnist";
  }
  long long train_n = r.i("--train-n", "train_n", a.train_n, 1000);
  long long test_n = r.i("--test-n", "test_n", a.test_n, 500);
  double noise = r.d("--noise", "noise", a.noise, 0.1);
  out.data = load_dataset(dataset, data_dir, train_n, test_n, noise);

  std::string widths_text = r.s("--widths", "widths", a.widths, "");
  out.widths = widths_text.empty() ? out.data.default_widths
                                   : parse_sizes(widths_text, "--widths");
  if (out.widths.size() < 2) throw UsageError("--widths", "needs at least two widths");
  if (out.widths.front() != out.data.train.inputs.cols()) {
    throw UsageError("--widths", "first width must match the dataset features (" +
                                     std::to_string(out.data.train.inputs.cols()) + ")");
  }

  out.echo = out.data.echo;
  out.echo["dataset"] = dataset;
  out.echo["widths"] = widths_string(out.widths);
  out.echo["lr"] = fmt_double(out.cfg.lr);
  out.echo["momentum"] = fmt_double(out.cfg.momentum);
  out.echo["weight_decay"] = fmt_double(out.cfg.weight_decay);
  out.echo["batch_size"] = std::to_string(out.cfg.batch_size);
  out.echo["steps"] = std::to_string(out.cfg.steps);
  out.echo["init"] = init_name(out.cfg.init);
  out.echo["use_bn"] = out.cfg.use_bn ? "1" : "0";
  out.echo["srs_alpha0"] = fmt_double(out.cfg.srs_alpha0);
  out.echo["srs_beta0"] = fmt_double(out.cfg.srs_beta0);
  out.echo["clamp_floor"] = fmt_double(out.cfg.clamp_floor);
  out.echo["log_interval"] = std::to_string(out.cfg.log_interval);
  out.echo["eval_interval"] = std::to_string(out.cfg.eval_interval);
  out.echo["eval_batch"] = std::to_string(out.cfg.eval_batch);
  out.echo["seed"] = std::to_string(seed);
  return out;
}

int cmd_train(CLI::App* sub, const ConfigMap& cfgfile, TrainArgs& a, std::uint64_t seed,
              const fs::path& out_dir) {
  ResolvedTrain rt = resolve_train(sub, cfgfile, a, seed);
  Resolve r{sub, &cfgfile};
  std::string act_text = r.s("--act", "act", a.act, "srs");
  Act kind;
  try {
    kind = act_from_name(act_text);
  } catch (const std::invalid_argument&) {
    throw UsageError("--act", "unknown activation '" + act_text + "'");
  }

  MetricsLog log = run_experiment(rt.cfg, rt.data.train, rt.data.test, rt.widths, kind);
  std::string name = "metrics_" + act_text + ".csv";
  write_text(out_dir / name, metrics_to_csv(log));
  std::printf("%s: converged=%d final_test_err=%.4f (%zu metric rows)\n", act_text.c_str(),
              int(log.converged), log.final_test_err, log.records.size());

  RunManifest manifest;
  manifest.resolved = rt.echo;
  manifest.resolved["subcommand"] = "train";
  manifest.resolved["act"] = act_text;
  manifest.outputs.push_back(name);
  finish_run(out_dir, manifest);
  return 0;
}

int cmd_ablate(CLI::App* sub, const ConfigMap& cfgfile, TrainArgs& a, std::uint64_t seed,
               const fs::path& out_dir) {
  ResolvedTrain rt = resolve_train(sub, cfgfile, a, seed);
  Resolve r{sub, &cfgfile};
  std::string acts_text =
      r.s("--acts", "acts", a.acts, "lrelu,prelu,softplus,elu,selu,swish,relu,srs");
  std::string lrs_text = r.s("--lrs", "lrs", a.lrs, "0.01,0.1");
  std::string bns_text = r.s("--bns", "bns", a.bns, "0,1");
  std::string inits_text = r.s("--inits", "inits", a.inits, "gaussian");

  std::vector<Act> acts = parse_acts(acts_text, "--acts");
  std::vector<double> lrs = parse_doubles(lrs_text, "--lrs");
  std::vector<InitScheme> inits;
  for (const std::string& name : split_names(inits_text)) inits.push_back(parse_init(name, "--inits"));
  std::vector<bool> bns;
  for (double v : parse_doubles(bns_text, "--bns")) {
    if (v != 0.0 && v != 1.0) throw UsageError("--bns", "entries must be 0 or 1");
    bns.push_back(v == 1.0);
  }

  std::vector<AblationSetting> settings;
  for (InitScheme init : inits) {
    for (double lr : lrs) {
      for (bool bn : bns) {
        AblationSetting s;
        s.lr = lr;
        s.use_bn = bn;
        s.init = init;
        s.name = (inits.size() > 1 ? std::string(init_name(init)) + "-" : std::string()) + "lr" +
                 fmt_double(lr) + (bn ? "+bn" : "");
        settings.push_back(s);
      }
    }
  }

  AblationResult result =
      run_ablation(acts, settings, rt.cfg, rt.data.train, rt.data.test, rt.widths);
  std::string csv = ablation_to_csv(result);
  write_text(out_dir / "ablation.csv", csv);
  std::fputs(csv.c_str(), stdout);

  RunManifest manifest;
  manifest.resolved = rt.echo;
  manifest.resolved["subcommand"] = "ablate";
  manifest.resolved["acts"] = acts_text;
  manifest.resolved["lrs"] = lrs_text;
  manifest.resolved["bns"] = bns_text;
  manifest.resolved["inits"] = inits_text;
  manifest.resolved.erase("use_bn");  // grid columns own it
  manifest.resolved.erase("lr");
  manifest.resolved.erase("init");
  manifest.outputs.push_back("ablation.csv");
  finish_run(out_dir, manifest);
  return 0;
}

// ---- gradcheck ---------------------------------------------------------

struct GradcheckArgs {
  std::string acts = "all";
  std::string widths = "6,10,8,4";
  long long batches = 10;
  long long batch_size = 8;
  long long samples = 24;
  double tol = 1e-5;
};

int cmd_gradcheck(CLI::App* sub, const ConfigMap& cfgfile, GradcheckArgs& a, std::uint64_t seed,
                  const fs::path& out_dir) {
  Resolve r{sub, &cfgfile};
  std::string acts_text = r.s("--acts", "acts", a.acts, "all");
  std::string widths_text = r.s("--widths", "widths", a.widths, "6,10,8,4");
  long long batches = r.i("--batches", "batches", a.batches, 10);
  long long batch_size = r.i("--batch-size", "batch_size", a.batch_size, 8);
  long long samples = r.i("--samples", "samples", a.samples, 24);
  double tol = r.d("--tol", "tol", a.tol, 1e-5);

  if (batches < 1) throw UsageError("--batches", "needs at least 1 batch");
  if (batch_size < 2) throw UsageError("--batch-size", "needs at least 2 (batchnorm arm)");
  if (samples < 1) throw UsageError("--samples", "needs at least 1 sample per tensor");
  if (!(tol > 0.0)) throw UsageError("--tol", "must be positive");
  std::vector<std::size_t> widths = parse_sizes(widths_text, "--widths");
  if (widths.size() < 2) throw UsageError("--widths", "needs at least two widths");

  std::vector<Act> kinds;
  if (acts_text == "all") {
    kinds.assign(std::begin(kAllActs), std::end(kAllActs));
  } else {
    kinds = parse_acts(acts_text, "--acts");
  }

  TrainConfig proto;  // srs init defaults for hidden_activation
  double overall = 0.0;
  for (Act kind : kinds) {
    double worst = 0.0;
    for (bool bn : {false, true}) {
      Model m = make_mlp(widths, hidden_activation(kind, proto), bn);
      init_weights(m, InitScheme::Gaussian, seed);
      m.mode = Mode::Train;
      for (long long bi = 0; bi < batches; ++bi) {
        std::uint64_t batch_seed = seed * 7919 + std::uint64_t(bi);
        Rng rng(batch_seed);
        const std::size_t bs = std::size_t(batch_size);
        Tensor batch = Tensor::zeros({bs, widths.front()});
        for (double& x : batch.data) x = rng.uniform(-1.0, 1.0);
        std::vector<int> labels(bs);
        for (int& l : labels) l = int(rng.index(widths.back()));
        GradCheckResult res = gradcheck(m, batch, labels, batch_seed, std::size_t(samples));
        worst = std::fmax(worst, res.max_rel_err);
      }
    }
    std::printf("%-9s max_rel_error=%.3e\n", act_name(kind), worst);
    overall = std::fmax(overall, worst);
  }
  std::printf("overall max_rel_error=%.3e (tolerance %.1e)\n", overall, tol);

  RunManifest manifest;
  manifest.resolved["subcommand"] = "gradcheck";
  manifest.resolved["acts"] = acts_text;
  manifest.resolved["widths"] = widths_text;
  manifest.resolved["batches"] = std::to_string(batches);
  manifest.resolved["batch_size"] = std::to_string(batch_size);
  manifest.resolved["samples"] = std::to_string(samples);
  manifest.resolved["tol"] = fmt_double(tol);
  manifest.resolved["seed"] = std::to_string(seed);
  finish_run(out_dir, manifest);
  if (overall >= tol) {
    std::fprintf(stderr, "gradcheck failed: %.3e >= %.3e\n", overall, tol);
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"soft-root-sign activation laboratory"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string out_text = ".";
  std::string config_path;
  app.add_option("--seed", seed, "base seed for every random draw");
  app.add_option("--out", out_text, "output directory, created if absent");
  app.add_option("--config", config_path, "key=value config file, overridden by flags");

  CLI::App* sub_moments = app.add_subcommand("moments", "expectation/variance table under N(0,1)");
  MomentsArgs margs;
  sub_moments->add_option("--alphas", margs.alphas, "alpha grid, comma separated");
  sub_moments->add_option("--betas", margs.betas, "beta grid, comma separated");
  sub_moments->add_option("--truncation", margs.truncation, "integration half-width");
  sub_moments->add_option("--panels", margs.panels, "quadrature panels");
  sub_moments->add_option("--rule", margs.rule, "gauss or simpson");

  CLI::App* sub_shape = app.add_subcommand("shape", "closed-form srs minimum and supremum");
  double shape_alpha = 0.0, shape_beta = 0.0;
  sub_shape->add_option("--alpha", shape_alpha, "srs alpha")->required();
  sub_shape->add_option("--beta", shape_beta, "srs beta")->required();

  CLI::App* sub_iterate = app.add_subcommand("iterate", "scalar feedback trajectories x_i = f(w_i x_{i-1} + b_i)");
  IterateArgs iargs;
  sub_iterate->add_option("--act", iargs.act, "activation to iterate");
  sub_iterate->add_option("--alpha", iargs.alpha, "srs alpha");
  sub_iterate->add_option("--beta", iargs.beta, "srs beta");
  sub_iterate->add_option("--iters", iargs.iters, "iterations per trajectory");
  sub_iterate->add_option("--runs", iargs.runs, "trajectories, seeds seed..seed+runs-1");

  CLI::App* sub_landscape = app.add_subcommand("landscape", "scalar output maps of random 5-layer networks");
  LandscapeArgs largs;
  sub_landscape->add_option("--acts", largs.acts, "activations, one landscape each");
  sub_landscape->add_option("--alpha", largs.alpha, "srs alpha");
  sub_landscape->add_option("--beta", largs.beta, "srs beta");
  sub_landscape->add_option("--height", largs.height, "grid rows");
  sub_landscape->add_option("--width", largs.width, "grid columns");
  sub_landscape->add_option("--extent", largs.extent, "x_min,x_max,y_min,y_max");

  CLI::App* sub_train = app.add_subcommand("train", "one mlp training run with metric logging");
  TrainArgs targs;
  add_train_options(sub_train, targs, false);

  CLI::App* sub_ablate = app.add_subcommand("ablate", "activation x setting grid, median of seeds 1,2,3");
  TrainArgs aargs;
  add_train_options(sub_ablate, aargs, true);

  CLI::App* sub_gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every gradient path");
  GradcheckArgs gargs;
  sub_gradcheck->add_option("--acts", gargs.acts, "'all' or a comma list");
  sub_gradcheck->add_option("--widths", gargs.widths, "mlp widths under test");
  sub_gradcheck->add_option("--batches", gargs.batches, "seeded batches per configuration");
  sub_gradcheck->add_option("--batch-size", gargs.batch_size, "examples per batch");
  sub_gradcheck->add_option("--samples", gargs.samples, "finite-difference probes per tensor");
  sub_gradcheck->add_option("--tol", gargs.tol, "max relative error accepted");

  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    ConfigMap cfg;
    if (app.count("--config")) {
      try {
        cfg = load_config(config_path);
      } catch (const std::runtime_error& e) {
        throw UsageError("--config", e.what());
      }
    }
    if (!app.count("--seed")) seed = std::uint64_t(config_int(cfg, "seed", 1));
    fs::path out_dir = app.count("--out") ? out_text : config_str(cfg, "out", ".");
    fs::create_directories(out_dir);

    if (sub_moments->parsed()) return cmd_moments(sub_moments, cfg, margs, seed, out_dir);
    if (sub_shape->parsed()) return cmd_shape(shape_alpha, shape_beta, seed, out_dir);
    if (sub_iterate->parsed()) return cmd_iterate(sub_iterate, cfg, iargs, seed, out_dir);
    if (sub_landscape->parsed()) return cmd_landscape(sub_landscape, cfg, largs, seed, out_dir);
    if (sub_train->parsed()) return cmd_train(sub_train, cfg, targs, seed, out_dir);
    if (sub_ablate->parsed()) return cmd_ablate(sub_ablate, cfg, aargs, seed, out_dir);
    if (sub_gradcheck->parsed()) return cmd_gradcheck(sub_gradcheck, cfg, gargs, seed, out_dir);
    std::fprintf(stderr, "error: no subcommand\n");
    return 1;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return 2;
  }
}
