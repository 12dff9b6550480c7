#include "hashemb/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <tuple>

#include "hashemb/errors.hpp"
#include "hashemb/rng.hpp"

namespace hashemb {

namespace {
constexpr std::uint64_t kCodebookStream = 0;
constexpr std::uint64_t kMlpStream = 1;
}  // namespace

void DecoderConfig::validate() const {
  (void)bits_per_element(c);
  if (m < 1) throw domain_error("decoder: m must be >= 1");
  if (d_c < 1 || d_m < 1 || d_e < 1) throw domain_error("decoder: dimensions must be >= 1");
  if (l < 2) throw domain_error("decoder: layer count l must be >= 2");
}

std::vector<Tensor> DecoderParams::trainable() const {
  std::vector<Tensor> out;
  if (codebooks.defined() && codebooks.requires_grad()) out.push_back(codebooks);
  if (w0) out.push_back(*w0);
  for (const auto& layer : mlp) {
    out.push_back(layer.weight);
    out.push_back(layer.bias);
  }
  return out;
}

std::size_t DecoderParams::trainable_scalars(bool include_biases) const {
  std::size_t count = 0;
  if (codebooks.defined() && codebooks.requires_grad()) count += codebooks.size();
  if (w0) count += w0->size();
  for (const auto& layer : mlp) {
    count += layer.weight.size();
    if (include_biases) count += layer.bias.size();
  }
  return count;
}

std::size_t DecoderParams::frozen_scalars() const {
  return codebooks.defined() && !codebooks.requires_grad() ? codebooks.size() : 0;
}

DecoderParams DecoderParams::clone() const {
  DecoderParams out;
  out.config = config;
  out.codebooks = codebooks.clone(codebooks.requires_grad());
  if (w0) out.w0 = w0->clone(true);
  for (const auto& layer : mlp) {
    out.mlp.push_back({layer.weight.clone(true), layer.bias.clone(true)});
  }
  return out;
}

std::vector<double> codebook_values(const DecoderConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, kCodebookStream));
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.d_c));
  std::vector<double> values(static_cast<std::size_t>(cfg.m) * cfg.c * cfg.d_c);
  for (auto& v : values) v = rng.normal() * scale;
  return values;
}

DecoderParams init_decoder(const DecoderConfig& cfg) {
  cfg.validate();
  DecoderParams p;
  p.config = cfg;
  const bool full = cfg.variant == DecoderVariant::full;
  p.codebooks = Tensor::from({static_cast<std::size_t>(cfg.m) * cfg.c, cfg.d_c},
                             codebook_values(cfg), full);
  if (!full) p.w0 = Tensor::full({cfg.d_c}, 1.0, true);
  Rng rng(derive_seed(cfg.seed, kMlpStream));
  p.mlp.push_back(nn::make_linear(cfg.d_c, cfg.d_m, rng));
  for (std::size_t i = 0; i + 2 < cfg.l; ++i) p.mlp.push_back(nn::make_linear(cfg.d_m, cfg.d_m, rng));
  p.mlp.push_back(nn::make_linear(cfg.d_m, cfg.d_e, rng));
  return p;
}

Tensor decode_codes(std::span<const std::uint32_t> integer_codes, const DecoderParams& params) {
  const auto& cfg = params.config;
  if (integer_codes.size() % cfg.m != 0) {
    throw shape_error("decode_codes: code buffer is not a multiple of m");
  }
  std::vector<std::size_t> index(integer_codes.size());
  for (std::size_t i = 0; i < integer_codes.size(); ++i) {
    const std::size_t j = i % cfg.m;
    if (integer_codes[i] >= cfg.c) {
      throw range_error("decode_codes: code element " + std::to_string(integer_codes[i]) +
                        " >= c");
    }
    index[i] = j * cfg.c + integer_codes[i];
  }
  Tensor h = nn::embedding_sum(params.codebooks, index, cfg.m);
  if (params.w0) h = nn::scale_columns(h, *params.w0);
  for (std::size_t i = 0; i < params.mlp.size(); ++i) {
    h = params.mlp[i](h);
    if (i + 1 < params.mlp.size()) h = nn::relu(h);
  }
  return h;
}

Tensor decode_batch(const CodeMatrix& codes, std::span<const std::size_t> rows,
                    const DecoderParams& params) {
  if (codes.c() != params.config.c || codes.m() != params.config.m) {
    throw config_error("decode_batch: codes are (c=" + std::to_string(codes.c()) +
                       ", m=" + std::to_string(codes.m()) + ") but the decoder expects (c=" +
                       std::to_string(params.config.c) + ", m=" +
                       std::to_string(params.config.m) + ")");
  }
  const std::size_t m = codes.m();
  std::vector<std::uint32_t> ints(rows.size() * m);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= codes.n()) {
      throw range_error("decode_batch: row " + std::to_string(rows[r]) + " >= n = " +
                        std::to_string(codes.n()));
    }
    codes.code_into(rows[r], std::span(ints).subspan(r * m, m));
  }
  return decode_codes(ints, params);
}

void ReconTrainConfig::validate() const {
  if (epochs < 1) throw config_error("epochs must be >= 1");
  if (batch_size < 1) throw config_error("batch_size must be >= 1");
  optimizer.validate();
}

ReconResult train_reconstruction(const CodeMatrix& codes, const DenseMatrix& targets,
                                 const ReconTrainConfig& cfg, const DecoderConfig& dcfg,
                                 const EpochCallback& on_epoch) {
  cfg.validate();
  if (targets.rows != codes.n()) {
    throw shape_error("train_reconstruction: " + std::to_string(targets.rows) +
                      " target rows for " + std::to_string(codes.n()) + " codes");
  }
  if (targets.cols != dcfg.d_e) {
    throw shape_error("train_reconstruction: target dim " + std::to_string(targets.cols) +
                      " != d_e " + std::to_string(dcfg.d_e));
  }
  if (codes.n() == 0) throw shape_error("train_reconstruction: no rows to fit");

  ReconResult result{init_decoder(dcfg), {}};
  AdamW optimizer(result.params.trainable(), cfg.optimizer);
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(codes.n());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t d_e = targets.cols;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    double weighted = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, order.size() - start);
      const auto rows = std::span(order).subspan(start, count);
      std::vector<double> target(count * d_e);
      for (std::size_t r = 0; r < count; ++r) {
        const auto src = targets.row(rows[r]);
        std::copy(src.begin(), src.end(), target.begin() + static_cast<std::ptrdiff_t>(r * d_e));
      }
      optimizer.zero_grad();
      Tensor loss = nn::mse_loss(decode_batch(codes, rows, result.params),
                                 Tensor::from({count, d_e}, std::move(target)));
      loss.backward();
      optimizer.step();
      weighted += loss.item() * static_cast<double>(count);
    }
    const double mean_loss = weighted / static_cast<double>(order.size());
    result.epoch_loss.push_back(mean_loss);
    if (on_epoch) on_epoch(epoch, mean_loss);
  }
  return result;
}

DenseMatrix reconstruct(const CodeMatrix& codes, const DecoderParams& params,
                        std::size_t batch_size) {
  DenseMatrix out(codes.n(), params.config.d_e);
  std::vector<std::size_t> rows;
  for (std::size_t start = 0; start < codes.n(); start += batch_size) {
    const std::size_t count = std::min(batch_size, codes.n() - start);
    rows.resize(count);
    std::iota(rows.begin(), rows.end(), start);
    const Tensor y = decode_batch(codes, rows, params);
    for (std::size_t i = 0; i < y.size(); ++i) {
      out.data[start * out.cols + i] = static_cast<float>(y[i]);
    }
  }
  return out;
}

double mse(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) throw shape_error("mse: shape mismatch");
  if (a.data.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - b.data[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.data.size());
}

double mean_cosine_similarity(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) throw shape_error("cosine: shape mismatch");
  if (a.rows == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < a.rows; ++i) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t j = 0; j < a.cols; ++j) {
      dot += static_cast<double>(a(i, j)) * b(i, j);
      na += static_cast<double>(a(i, j)) * a(i, j);
      nb += static_cast<double>(b(i, j)) * b(i, j);
    }
    if (na > 0.0 && nb > 0.0) total += dot / std::sqrt(na * nb);
  }
  return total / static_cast<double>(a.rows);
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr const char* kManifestHeader = "# hashemb decoder checkpoint v1";

std::filesystem::path with_suffix(const std::filesystem::path& prefix, const char* suffix) {
  return std::filesystem::path(prefix.string() + suffix);
}

DenseMatrix as_matrix(const Tensor& t) {
  const std::size_t rows = t.rank() == 2 ? t.dim(0) : 1;
  const std::size_t cols = t.rank() == 2 ? t.dim(1) : t.size();
  DenseMatrix m(rows, cols);
  std::transform(t.data().begin(), t.data().end(), m.data.begin(),
                 [](double v) { return static_cast<float>(v); });
  return m;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& prefix, const DecoderParams& params) {
  std::vector<std::pair<std::string, Tensor>> tensors;
  if (params.config.variant == DecoderVariant::full) tensors.emplace_back("codebooks", params.codebooks);
  if (params.w0) tensors.emplace_back("w0", *params.w0);
  for (std::size_t i = 0; i < params.mlp.size(); ++i) {
    tensors.emplace_back("mlp." + std::to_string(i) + ".weight", params.mlp[i].weight);
    tensors.emplace_back("mlp." + std::to_string(i) + ".bias", params.mlp[i].bias);
  }

  const auto bin_path = with_suffix(prefix, ".bin");
  std::ofstream bin(bin_path, std::ios::binary | std::ios::trunc);
  if (!bin) throw format_error("cannot open " + bin_path.string() + " for writing");
  std::ostringstream manifest;
  const auto& c = params.config;
  manifest << kManifestHeader << '\n'
           << "config c=" << c.c << " m=" << c.m << " d_c=" << c.d_c << " d_m=" << c.d_m
           << " d_e=" << c.d_e << " l=" << c.l << " variant=" << to_string(c.variant)
           << " seed=" << c.seed << '\n'
           << "data " << bin_path.filename().string() << '\n';
  for (const auto& [name, tensor] : tensors) {
    const auto offset = static_cast<long long>(bin.tellp());
    manifest << "tensor " << name << ' ' << shape_string(tensor.shape()) << ' ' << offset << '\n';
    write_dense(bin, as_matrix(tensor));
  }
  if (!bin) throw format_error("write to " + bin_path.string() + " failed");

  const auto manifest_path = with_suffix(prefix, ".manifest");
  std::ofstream out(manifest_path, std::ios::trunc);
  if (!out) throw format_error("cannot open " + manifest_path.string() + " for writing");
  out << manifest.str();
}

namespace {

Shape parse_shape(const std::string& text) {
  if (text.size() < 2 || text.front() != '[' || text.back() != ']') {
    throw format_error("checkpoint manifest: bad shape '" + text + "'");
  }
  Shape shape;
  std::stringstream ss(text.substr(1, text.size() - 2));
  std::string part;
  while (std::getline(ss, part, ',')) shape.push_back(std::stoull(part));
  return shape;
}

}  // namespace

DecoderParams load_checkpoint(const std::filesystem::path& prefix) {
  const auto manifest_path = with_suffix(prefix, ".manifest");
  std::ifstream manifest(manifest_path);
  if (!manifest) throw format_error("cannot open " + manifest_path.string());
  std::string line;
  if (!std::getline(manifest, line) || line != kManifestHeader) {
    throw format_error(manifest_path.string() + ": not a decoder checkpoint manifest");
  }

  DecoderConfig cfg;
  std::filesystem::path bin_path;
  std::vector<std::tuple<std::string, Shape, long long>> entries;
  while (std::getline(manifest, line)) {
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "config") {
      std::string kv;
      while (ls >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw format_error("checkpoint manifest: bad config entry");
        const auto key = kv.substr(0, eq);
        const auto value = kv.substr(eq + 1);
        if (key == "c") cfg.c = static_cast<std::uint32_t>(std::stoul(value));
        else if (key == "m") cfg.m = static_cast<std::uint32_t>(std::stoul(value));
        else if (key == "d_c") cfg.d_c = std::stoull(value);
        else if (key == "d_m") cfg.d_m = std::stoull(value);
        else if (key == "d_e") cfg.d_e = std::stoull(value);
        else if (key == "l") cfg.l = std::stoull(value);
        else if (key == "variant") cfg.variant = parse_decoder_variant(value);
        else if (key == "seed") cfg.seed = std::stoull(value);
        else throw format_error("checkpoint manifest: unknown config key '" + key + "'");
      }
    } else if (kind == "data") {
      std::string name;
      ls >> name;
      bin_path = prefix.parent_path() / name;
    } else if (kind == "tensor") {
      std::string name, shape;
      long long offset = -1;
      ls >> name >> shape >> offset;
      if (!ls || offset < 0) throw format_error("checkpoint manifest: bad tensor line");
      entries.emplace_back(name, parse_shape(shape), offset);
    } else if (!kind.empty()) {
      throw format_error("checkpoint manifest: unknown record '" + kind + "'");
    }
  }

  DecoderParams params = init_decoder(cfg);
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw format_error("cannot open " + bin_path.string());
  const auto find_tensor = [&](const std::string& name) -> Tensor* {
    if (name == "codebooks") return &params.codebooks;
    if (name == "w0") return params.w0 ? &*params.w0 : nullptr;
    for (std::size_t i = 0; i < params.mlp.size(); ++i) {
      if (name == "mlp." + std::to_string(i) + ".weight") return &params.mlp[i].weight;
      if (name == "mlp." + std::to_string(i) + ".bias") return &params.mlp[i].bias;
    }
    return nullptr;
  };
  std::size_t loaded = 0;
  for (const auto& [name, shape, offset] : entries) {
    Tensor* target = find_tensor(name);
    if (!target || target->shape() != shape) {
      throw format_error("checkpoint: tensor '" + name + "' does not fit the configured decoder");
    }
    bin.seekg(offset);
    const DenseMatrix m = read_dense(bin);
    if (m.data.size() != target->size()) {
      throw format_error("checkpoint: tensor '" + name + "' has the wrong element count");
    }
    std::copy(m.data.begin(), m.data.end(), target->data().begin());
    ++loaded;
  }
  if (loaded != params.trainable().size()) {
    throw format_error("checkpoint: expected " + std::to_string(params.trainable().size()) +
                       " tensors, found " + std::to_string(loaded));
  }
  return params;
}

}  // namespace hashemb
