#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "hashemb/codes.hpp"
#include "hashemb/decoder.hpp"
#include "hashemb/encoder.hpp"
#include "hashemb/errors.hpp"
#include "hashemb/gnn.hpp"
#include "hashemb/rng.hpp"
#include "hashemb/sparse.hpp"
#include "hashemb/synth.hpp"

namespace hashemb::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

// Sub-seed streams of the single --seed flag.
constexpr std::uint64_t kDecoderStream = 1;
constexpr std::uint64_t kModelStream = 2;
constexpr std::uint64_t kTrainStream = 3;

/// Config-file support and resolved-config echo shared by all subcommands.
struct Common {
  std::string config_path;
  std::string save_config;
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config_path,
                  "key = value settings file; command-line flags win");
  cmd->add_option("--save-config", common.save_config,
                  "Write the fully resolved settings to this file");
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string unquote(std::string v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                        (v.front() == '\'' && v.back() == '\''))) {
    return v.substr(1, v.size() - 2);
  }
  if (v.size() >= 2 && v.front() == '[' && v.back() == ']') {
    std::string joined;
    for (char ch : v.substr(1, v.size() - 2)) {
      if (ch != ' ' && ch != '"') joined += ch;
    }
    return joined;
  }
  return v;
}

/// Expands a `--config FILE` argument into flags for every key the command
/// line does not already set. Unknown keys are rejected.
std::vector<std::string> expand_config(const CLI::App& app, const std::vector<std::string>& args) {
  if (args.empty()) return args;
  const CLI::App* cmd = nullptr;
  for (const auto* sub : app.get_subcommands({})) {
    if (sub->get_name() == args.front()) cmd = sub;
  }
  if (cmd == nullptr) return args;

  std::string path;
  std::vector<std::string> given;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a.rfind("--", 0) != 0) continue;
    const auto eq = a.find('=');
    const auto name = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
    if (name == "config") {
      if (eq != std::string::npos) path = a.substr(eq + 1);
      else if (i + 1 < args.size()) path = args[i + 1];
    }
    given.push_back(name);
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path);
  std::vector<std::string> extra;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw config_error(path + " line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = unquote(trim(line.substr(eq + 1)));
    const CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config" || key == "save-config") {
      throw config_error(path + " line " + std::to_string(line_no) + ": unknown key '" + key +
                         "' for " + cmd->get_name());
    }
    if (std::find(given.begin(), given.end(), key) != given.end()) continue;
    if (opt->get_expected_max() == 0) {
      if (value == "true" || value == "1") extra.push_back("--" + key);
      else if (value != "false" && value != "0") {
        throw config_error(path + " line " + std::to_string(line_no) + ": '" + key +
                           "' expects true or false");
      }
      continue;
    }
    extra.push_back("--" + key);
    extra.push_back(value);
  }
  std::vector<std::string> out(args.begin(), args.begin() + 1);
  out.insert(out.end(), extra.begin(), extra.end());
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

void echo_config(const CLI::App* cmd, const Common& common, std::ostream& out) {
  // Only real settings: drop config plumbing and unset optional values.
  std::istringstream resolved(cmd->config_to_str(true, false));
  std::ostringstream kept;
  std::string line;
  while (std::getline(resolved, line)) {
    if (line.empty() || line.rfind("save-config", 0) == 0 || line.rfind("config", 0) == 0) {
      continue;
    }
    if (line.size() >= 3 && line.compare(line.size() - 3, 3, "=\"\"") == 0) continue;
    kept << line << '\n';
  }
  std::istringstream lines(kept.str());
  while (std::getline(lines, line)) out << "config: " << line << '\n';
  if (!common.save_config.empty()) {
    std::ofstream file(common.save_config, std::ios::trunc);
    if (!file) throw config_error("cannot write " + common.save_config);
    file << "# resolved " << cmd->get_name() << " settings\n" << kept.str();
  }
}

// ---------------------------------------------------------------------------
// Auxiliary input: an edge list (adjacency rows) or a GEF32 dense matrix.

struct AuxInput {
  std::string edges;
  std::string aux;
  std::size_t nodes = 0;
  bool stream = false;
};

void add_aux_options(CLI::App* cmd, AuxInput& in) {
  auto* edges = cmd->add_option("--edges", in.edges, "Edge-list file; adjacency rows are hashed")
                    ->check(CLI::ExistingFile);
  auto* aux = cmd->add_option("--aux", in.aux, "GEF32 dense auxiliary matrix")
                  ->check(CLI::ExistingFile);
  edges->excludes(aux);
  cmd->add_option("--nodes", in.nodes, "Declared node count for --edges (0 = infer)");
  cmd->add_flag("--stream", in.stream, "Stream --aux rows from disk instead of loading them");
}

/// Owns whatever backs the RowSource.
struct LoadedAux {
  std::optional<CsrMatrix> csr;
  std::optional<DenseMatrix> dense;
  std::unique_ptr<RowSource> source;
};

LoadedAux load_aux(const AuxInput& in) {
  LoadedAux loaded;
  if (!in.edges.empty()) {
    if (in.stream) throw config_error("--stream applies to --aux GEF32 input only");
    std::optional<std::size_t> n;
    if (in.nodes > 0) n = in.nodes;
    loaded.csr = load_edge_list(std::filesystem::path(in.edges), true, n);
    loaded.source = std::make_unique<CsrRowSource>(*loaded.csr);
  } else if (!in.aux.empty()) {
    if (in.stream) {
      loaded.source = std::make_unique<DenseFileRowSource>(in.aux);
    } else {
      loaded.dense = read_dense(std::filesystem::path(in.aux));
      loaded.source = std::make_unique<DenseRowSource>(*loaded.dense);
    }
  } else {
    throw config_error("one of --edges or --aux is required");
  }
  return loaded;
}

// ---------------------------------------------------------------------------

struct EncodeArgs {
  Common common;
  AuxInput input;
  std::uint32_t c = 256;
  std::uint32_t m = 16;
  std::uint64_t seed = 0;
  std::string threshold = "median";
  std::string out;
};

void setup_encode(CLI::App& app, EncodeArgs& a) {
  auto* cmd = app.add_subcommand("encode", "Hash auxiliary rows into compositional codes");
  add_common(cmd, a.common);
  add_aux_options(cmd, a.input);
  cmd->add_option("--c", a.c, "Code cardinality (power of 2)")->capture_default_str();
  cmd->add_option("--m", a.m, "Code length")->capture_default_str();
  cmd->add_option("--seed", a.seed, "Master seed")->capture_default_str();
  cmd->add_option("--threshold", a.threshold, "median | zero | random")->capture_default_str();
  cmd->add_option("--out", a.out, "Output GECC file")->required();
}

int run_encode(const CLI::App* cmd, const EncodeArgs& a, std::ostream& out) {
  echo_config(cmd, a.common, out);
  EncoderConfig cfg{a.c, a.m, a.seed, parse_threshold_mode(a.threshold)};
  cfg.validate();
  const auto start = Clock::now();
  auto aux = load_aux(a.input);
  const CodeMatrix codes = cfg.threshold == ThresholdMode::random_baseline
                               ? random_codes(aux.source->n_rows(), cfg)
                               : encode(*aux.source, cfg);
  write_codes(std::filesystem::path(a.out), codes);
  out << "n=" << codes.n() << " n_bit=" << codes.n_bit()
      << " code_bytes=" << codes.bytes().size() << " elapsed_s=" << fixed(seconds_since(start), 3)
      << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct CollisionArgs {
  Common common;
  AuxInput input;
  std::size_t bits = 24;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  std::string out;
};

void setup_collisions(CLI::App& app, CollisionArgs& a) {
  auto* cmd = app.add_subcommand("collisions", "Median vs zero threshold collision experiment");
  add_common(cmd, a.common);
  add_aux_options(cmd, a.input);
  cmd->add_option("--bits", a.bits, "Bits per code")->capture_default_str();
  cmd->add_option("--trials", a.trials, "Number of seeded trials")->capture_default_str();
  cmd->add_option("--seed", a.seed, "Master seed")->capture_default_str();
  cmd->add_option("--out", a.out, "CSV output (default: stdout)");
}

int run_collisions(const CLI::App* cmd, const CollisionArgs& a, std::ostream& out) {
  echo_config(cmd, a.common, out);
  auto aux = load_aux(a.input);
  const auto table = collision_experiment(*aux.source, a.bits, a.trials, a.seed);
  if (a.out.empty()) {
    write_collision_csv(out, table);
  } else {
    std::ofstream csv(a.out, std::ios::trunc);
    if (!csv) throw config_error("cannot write " + a.out);
    write_collision_csv(csv, table);
  }
  double median_sum = 0, zero_sum = 0;
  for (const auto& row : table) {
    median_sum += static_cast<double>(row.median_collisions);
    zero_sum += static_cast<double>(row.zero_collisions);
  }
  const auto trials = static_cast<double>(table.size());
  out << "mean_median_collisions=" << fixed(median_sum / trials, 2)
      << " mean_zero_collisions=" << fixed(zero_sum / trials, 2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct DecoderArgs {
  std::size_t d_c = 512;
  std::size_t d_m = 512;
  std::size_t d_e = 64;
  std::size_t l = 3;
  std::string variant = "light";
};

struct OptimArgs {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;

  AdamWConfig config() const { return {lr, beta1, beta2, eps, weight_decay}; }
};

void add_decoder_options(CLI::App* cmd, DecoderArgs& d, bool with_d_e) {
  cmd->add_option("--d-c", d.d_c, "Codebook vector dimension")->capture_default_str();
  cmd->add_option("--d-m", d.d_m, "Decoder MLP width")->capture_default_str();
  if (with_d_e) cmd->add_option("--d-e", d.d_e, "Decoded embedding dimension")->capture_default_str();
  cmd->add_option("--l", d.l, "Decoder MLP layers (>= 2)")->capture_default_str();
  cmd->add_option("--variant", d.variant, "light | full")->capture_default_str();
}

void add_optim_options(CLI::App* cmd, OptimArgs& o) {
  cmd->add_option("--lr", o.lr, "AdamW learning rate")->capture_default_str();
  cmd->add_option("--beta1", o.beta1, "AdamW beta1")->capture_default_str();
  cmd->add_option("--beta2", o.beta2, "AdamW beta2")->capture_default_str();
  cmd->add_option("--eps", o.eps, "AdamW epsilon")->capture_default_str();
  cmd->add_option("--weight-decay", o.weight_decay, "AdamW decoupled weight decay")
      ->capture_default_str();
}

struct ReconArgs {
  Common common;
  std::string codes;
  std::string targets;
  DecoderArgs decoder;
  OptimArgs optim;
  std::size_t epochs = 1024;
  std::size_t batch_size = 512;
  std::uint64_t seed = 0;
  std::string out;
  std::string loss_log;
};

void setup_recon(CLI::App& app, ReconArgs& a) {
  auto* cmd = app.add_subcommand("train-recon", "Fit a decoder that reconstructs embeddings");
  add_common(cmd, a.common);
  cmd->add_option("--codes", a.codes, "GECC code file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--targets", a.targets, "GEF32 target embeddings")
      ->required()
      ->check(CLI::ExistingFile);
  add_decoder_options(cmd, a.decoder, false);
  add_optim_options(cmd, a.optim);
  cmd->add_option("--epochs", a.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--batch-size", a.batch_size, "Minibatch size")->capture_default_str();
  cmd->add_option("--seed", a.seed, "Master seed")->capture_default_str();
  cmd->add_option("--out", a.out, "Checkpoint prefix (.manifest/.bin)")->required();
  cmd->add_option("--loss-log", a.loss_log, "Per-epoch loss CSV (default: <out>.loss.csv)");
}

int run_recon(const CLI::App* cmd, const ReconArgs& a, std::ostream& out) {
  echo_config(cmd, a.common, out);
  const CodeMatrix codes = read_codes(std::filesystem::path(a.codes));
  const DenseMatrix targets = read_dense(std::filesystem::path(a.targets));
  if (targets.rows != codes.n()) {
    throw config_error("codes have " + std::to_string(codes.n()) + " rows but targets have " +
                       std::to_string(targets.rows));
  }
  DecoderConfig dcfg{codes.c(), codes.m(), a.decoder.d_c, a.decoder.d_m, targets.cols,
                     a.decoder.l, parse_decoder_variant(a.decoder.variant),
                     derive_seed(a.seed, kDecoderStream)};
  ReconTrainConfig rcfg{a.epochs, a.batch_size, a.optim.config(),
                        derive_seed(a.seed, kTrainStream)};
  const auto start = Clock::now();
  const auto result = train_reconstruction(codes, targets, rcfg, dcfg);
  save_checkpoint(a.out, result.params);

  const std::string log_path = a.loss_log.empty() ? a.out + ".loss.csv" : a.loss_log;
  std::ofstream log(log_path, std::ios::trunc);
  if (!log) throw config_error("cannot write " + log_path);
  log << "epoch,loss\n";
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", result.epoch_loss[e]);
    log << e + 1 << ',' << buf << '\n';
  }
  const DenseMatrix recon = reconstruct(codes, result.params);
  out << "epochs=" << result.epoch_loss.size()
      << " final_epoch_loss=" << fixed(result.epoch_loss.back(), 6)
      << " final_mse=" << fixed(mse(recon, targets), 6)
      << " mean_cosine=" << fixed(mean_cosine_similarity(recon, targets), 6)
      << " elapsed_s=" << fixed(seconds_since(start), 2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct NodeArgs {
  Common common;
  std::string edges;
  std::size_t nodes = 0;
  std::string labels;
  std::string splits;
  std::string codes;
  DecoderArgs decoder;
  OptimArgs optim{0.01, 0.9, 0.999, 1e-8, 0.0};
  std::size_t hidden = 128;
  std::size_t k = 15;
  std::size_t epochs = 10;
  std::size_t batch_size = 256;
  std::vector<std::size_t> ks{5, 10, 20};
  std::uint64_t seed = 0;
};

void setup_node(CLI::App& app, NodeArgs& a) {
  auto* cmd = app.add_subcommand("train-node", "Train decoder + GraphSAGE node classifier");
  add_common(cmd, a.common);
  cmd->add_option("--edges", a.edges, "Edge-list file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--nodes", a.nodes, "Declared node count (0 = infer from codes)");
  cmd->add_option("--labels", a.labels, "Labels file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--splits", a.splits, "Splits file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--codes", a.codes, "GECC code file")->required()->check(CLI::ExistingFile);
  a.decoder.variant = "full";
  add_decoder_options(cmd, a.decoder, true);
  add_optim_options(cmd, a.optim);
  cmd->add_option("--hidden", a.hidden, "GraphSAGE hidden width")->capture_default_str();
  cmd->add_option("--k", a.k, "Neighbors sampled per hop")->capture_default_str();
  cmd->add_option("--epochs", a.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--batch-size", a.batch_size, "Minibatch size")->capture_default_str();
  cmd->add_option("--ks", a.ks, "hit@k thresholds")->delimiter(',')->capture_default_str();
  cmd->add_option("--seed", a.seed, "Master seed")->capture_default_str();
}

int run_node(const CLI::App* cmd, const NodeArgs& a, std::ostream& out) {
  echo_config(cmd, a.common, out);
  const CodeMatrix codes = read_codes(std::filesystem::path(a.codes));
  const std::size_t n = a.nodes > 0 ? a.nodes : codes.n();
  if (codes.n() != n) {
    throw config_error("codes have " + std::to_string(codes.n()) + " rows but --nodes is " +
                       std::to_string(n));
  }
  const GraphStore graph(load_edge_list(std::filesystem::path(a.edges), true, n));
  const auto labels = read_labels(a.labels, n);
  const Splits splits = read_splits(a.splits, n);

  std::uint32_t max_label = 0;
  for (const auto l : labels) {
    if (l != kNoLabel) max_label = std::max(max_label, l);
  }
  const std::size_t classes = static_cast<std::size_t>(max_label) + 1;

  NodeTrainConfig ncfg;
  ncfg.epochs = a.epochs;
  ncfg.batch_size = a.batch_size;
  ncfg.optimizer = a.optim.config();
  ncfg.seed = derive_seed(a.seed, kTrainStream);
  ncfg.ks.clear();
  for (const auto k : a.ks) {
    if (k <= classes) {
      ncfg.ks.push_back(k);
    } else {
      out << "note: hit@" << k << " skipped (only " << classes << " classes)\n";
    }
  }
  DecoderConfig dcfg{codes.c(), codes.m(), a.decoder.d_c, a.decoder.d_m, a.decoder.d_e,
                     a.decoder.l, parse_decoder_variant(a.decoder.variant),
                     derive_seed(a.seed, kDecoderStream)};
  SageConfig scfg{a.hidden, a.k, classes, derive_seed(a.seed, kModelStream)};

  const auto start = Clock::now();
  const auto result = train_node_classification(
      graph, codes, labels, splits, scfg, dcfg, ncfg, [&out](const EpochMetrics& m) {
        out << "epoch " << m.epoch + 1 << " train_loss " << fixed(m.train_loss, 6)
            << " valid_acc " << fixed(m.valid_accuracy, 4) << '\n';
      });
  out << "best_epoch " << result.best_epoch + 1 << " test_acc "
      << fixed(result.test.accuracy, 4);
  for (std::size_t i = 0; i < result.test.ks.size(); ++i) {
    out << " hit@" << result.test.ks[i] << ' ' << fixed(result.test.hit[i], 4);
  }
  out << " elapsed_s " << fixed(seconds_since(start), 2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct MemArgs {
  Common common;
  MemorySpec spec;
  std::string variant = "light";
  double raw_mib = 0.0;
  double compressed_mib = 0.0;
};

void setup_mem(CLI::App& app, MemArgs& a) {
  auto* cmd = app.add_subcommand("mem-report", "Memory and compression-ratio accounting");
  add_common(cmd, a.common);
  auto& s = a.spec;
  cmd->add_option("--n", s.n, "Entity count")->capture_default_str();
  cmd->add_option("--d-e", s.d_e, "Embedding dimension")->capture_default_str();
  cmd->add_option("--f", s.f, "Bits per float (16, 32, 64)")->capture_default_str();
  cmd->add_option("--c", s.c, "Code cardinality")->capture_default_str();
  cmd->add_option("--m", s.m, "Code length")->capture_default_str();
  cmd->add_option("--d-c", s.d_c, "Codebook vector dimension")->capture_default_str();
  cmd->add_option("--d-m", s.d_m, "Decoder MLP width")->capture_default_str();
  cmd->add_option("--l", s.l, "Decoder MLP layers")->capture_default_str();
  cmd->add_option("--variant", a.variant, "light | full")->capture_default_str();
  cmd->add_option("--downstream-params", s.downstream_params,
                  "Parameters of the downstream model")
      ->capture_default_str();
  cmd->add_flag("--include-biases", s.include_biases, "Count MLP biases");
  cmd->add_option("--raw-mib", a.raw_mib, "Ratio mode: raw size in MiB");
  cmd->add_option("--compressed-mib", a.compressed_mib, "Ratio mode: compressed size in MiB");
}

int run_mem(const CLI::App* cmd, MemArgs& a, std::ostream& out) {
  echo_config(cmd, a.common, out);
  if (a.raw_mib > 0.0 || a.compressed_mib > 0.0) {
    out << "ratio " << format_ratio(compression_ratio(a.raw_mib, a.compressed_mib)) << '\n';
    return 0;
  }
  a.spec.variant = parse_decoder_variant(a.variant);
  try {
    a.spec.validate();
  } catch (const domain_error& e) {
    throw config_error(e.what());
  }
  const auto report = memory_report(a.spec);
  out << "raw_embedding_mib " << format_mib(report.raw_embedding_bytes) << '\n'
      << "code_mib " << format_mib(report.code_bytes) << '\n'
      << "decoder_trainable_params " << report.decoder_trainable_params << '\n'
      << "decoder_nontrainable_params " << report.decoder_nontrainable_params << '\n'
      << "decoder_mib " << format_mib(report.decoder_bytes) << '\n'
      << "gpu_ratio " << format_ratio(report.gpu_ratio) << '\n'
      << "total_ratio " << format_ratio(report.total_ratio) << '\n'
      << render_memory_table(a.spec, report);
  return 0;
}

// ---------------------------------------------------------------------------

struct SbmArgs {
  Common common;
  SbmConfig cfg;
  double train_fraction = 0.7;
  double valid_fraction = 0.1;
  std::string edges_out;
  std::string labels_out;
  std::string splits_out;
};

void setup_sbm(CLI::App& app, SbmArgs& a) {
  auto* cmd = app.add_subcommand("synth-sbm", "Generate a stochastic block model graph");
  add_common(cmd, a.common);
  cmd->add_option("--communities", a.cfg.communities, "Community count")->capture_default_str();
  cmd->add_option("--nodes-per-community", a.cfg.nodes_per_community, "Community size")
      ->capture_default_str();
  cmd->add_option("--p-in", a.cfg.p_in, "Intra-community edge probability")->capture_default_str();
  cmd->add_option("--p-out", a.cfg.p_out, "Inter-community edge probability")
      ->capture_default_str();
  cmd->add_option("--seed", a.cfg.seed, "Master seed")->capture_default_str();
  cmd->add_option("--train-fraction", a.train_fraction, "Train split share")->capture_default_str();
  cmd->add_option("--valid-fraction", a.valid_fraction, "Validation split share")
      ->capture_default_str();
  cmd->add_option("--edges-out", a.edges_out, "Edge-list output")->required();
  cmd->add_option("--labels-out", a.labels_out, "Labels output")->required();
  cmd->add_option("--splits-out", a.splits_out, "Splits output (optional)");
}

int run_sbm(const CLI::App* cmd, const SbmArgs& a, std::ostream& out) {
  echo_config(cmd, a.common, out);
  SbmConfig cfg = a.cfg;
  const SbmGraph g = gen_sbm(cfg);
  {
    std::ofstream edges(a.edges_out, std::ios::trunc);
    if (!edges) throw config_error("cannot write " + a.edges_out);
    write_edge_list(edges, g);
  }
  write_labels(a.labels_out, g.labels);
  if (!a.splits_out.empty()) {
    write_splits(a.splits_out,
                 make_splits(g.n, a.train_fraction, a.valid_fraction, derive_seed(cfg.seed, 1)));
  }
  out << "nodes=" << g.n << " edges=" << g.edges.size() << '\n';
  return 0;
}

struct EmbArgs {
  Common common;
  ClusterEmbConfig cfg;
  std::string out;
};

void setup_emb(CLI::App& app, EmbArgs& a) {
  auto* cmd = app.add_subcommand("synth-emb", "Generate clustered Gaussian embeddings (GEF32)");
  add_common(cmd, a.common);
  cmd->add_option("--clusters", a.cfg.clusters, "Cluster count")->capture_default_str();
  cmd->add_option("--points-per-cluster", a.cfg.points_per_cluster, "Points per cluster")
      ->capture_default_str();
  cmd->add_option("--dim", a.cfg.dim, "Dimension")->capture_default_str();
  cmd->add_option("--center-scale", a.cfg.center_scale, "Std-dev of cluster centers")
      ->capture_default_str();
  cmd->add_option("--noise-scale", a.cfg.noise_scale, "Std-dev of in-cluster noise")
      ->capture_default_str();
  cmd->add_option("--seed", a.cfg.seed, "Master seed")->capture_default_str();
  cmd->add_option("--out", a.out, "GEF32 output")->required();
}

int run_emb(const CLI::App* cmd, const EmbArgs& a, std::ostream& out) {
  echo_config(cmd, a.common, out);
  const DenseMatrix m = gen_cluster_embeddings(a.cfg);
  write_dense(std::filesystem::path(a.out), m);
  out << "rows=" << m.rows << " cols=" << m.cols << '\n';
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"hashemb: hashing-based compositional codes for node embeddings"};
  app.name("hashemb");
  app.require_subcommand(1);

  EncodeArgs encode_args;
  CollisionArgs collision_args;
  ReconArgs recon_args;
  NodeArgs node_args;
  MemArgs mem_args;
  SbmArgs sbm_args;
  EmbArgs emb_args;
  setup_encode(app, encode_args);
  setup_collisions(app, collision_args);
  setup_recon(app, recon_args);
  setup_node(app, node_args);
  setup_mem(app, mem_args);
  setup_sbm(app, sbm_args);
  setup_emb(app, emb_args);

  try {
    std::vector<std::string> expanded;
    try {
      expanded = expand_config(app, args);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return 2;
    }
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return e.get_exit_code() != 0 ? e.get_exit_code() : 2;
  }

  try {
    const auto* cmd = app.get_subcommands().front();
    const std::string name = cmd->get_name();
    if (name == "encode") return run_encode(cmd, encode_args, out);
    if (name == "collisions") return run_collisions(cmd, collision_args, out);
    if (name == "train-recon") return run_recon(cmd, recon_args, out);
    if (name == "train-node") return run_node(cmd, node_args, out);
    if (name == "mem-report") return run_mem(cmd, mem_args, out);
    if (name == "synth-sbm") return run_sbm(cmd, sbm_args, out);
    if (name == "synth-emb") return run_emb(cmd, emb_args, out);
    err << "error: unknown command " << name << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::string message = e.what();
    std::replace(message.begin(), message.end(), '\n', ' ');
    err << "error: " << message << '\n';
    return 1;
  }
}

}  // namespace hashemb::cli
