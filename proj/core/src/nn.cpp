#include "hashemb/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "hashemb/errors.hpp"

namespace hashemb::nn {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMatrix = Eigen::Map<RowMatrix>;
using ConstMapMatrix = Eigen::Map<const RowMatrix>;

void require_rank2(const Tensor& t, const char* op, const char* name) {
  if (!t.defined() || t.rank() != 2) {
    throw shape_error(std::string(op) + ": " + name + " must be a matrix, got " +
                      (t.defined() ? shape_string(t.shape()) : std::string("undefined")));
  }
}

ConstMapMatrix view(const std::vector<double>& data, std::size_t rows, std::size_t cols) {
  return {data.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}

MapMatrix view(std::vector<double>& data, std::size_t rows, std::size_t cols) {
  return {data.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}

}  // namespace

Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b) {
  require_rank2(x, "affine", "x");
  require_rank2(w, "affine", "w");
  const std::size_t batch = x.dim(0), in = x.dim(1), out = w.dim(1);
  if (w.dim(0) != in || b.size() != out) {
    throw shape_error("affine: x " + shape_string(x.shape()) + ", w " + shape_string(w.shape()) +
                      ", b " + shape_string(b.shape()) + " do not agree");
  }
  std::vector<double> y(batch * out);
  auto ym = view(y, batch, out);
  ym.noalias() = view(std::as_const(x.node()->data), batch, in) *
                 view(std::as_const(w.node()->data), in, out);
  const auto& bd = b.node()->data;
  for (std::size_t r = 0; r < batch; ++r) {
    for (std::size_t c = 0; c < out; ++c) y[r * out + c] += bd[c];
  }
  return Tensor::make_result({batch, out}, std::move(y), {&x, &w, &b},
                             [batch, in, out](Tensor::Node& self) {
    auto& xn = *self.parents[0];
    auto& wn = *self.parents[1];
    auto& bn = *self.parents[2];
    const auto gy = view(std::as_const(self.grad), batch, out);
    if (xn.requires_grad) {
      view(xn.grad_buffer(), batch, in).noalias() += gy * view(std::as_const(wn.data), in, out).transpose();
    }
    if (wn.requires_grad) {
      view(wn.grad_buffer(), in, out).noalias() += view(std::as_const(xn.data), batch, in).transpose() * gy;
    }
    if (bn.requires_grad) {
      auto& gb = bn.grad_buffer();
      for (std::size_t r = 0; r < batch; ++r) {
        for (std::size_t c = 0; c < out; ++c) gb[c] += self.grad[r * out + c];
      }
    }
  });
}

Tensor relu(const Tensor& x) {
  std::vector<double> y(x.data().begin(), x.data().end());
  for (auto& v : y) v = v > 0.0 ? v : 0.0;
  return Tensor::make_result(x.shape(), std::move(y), {&x}, [](Tensor::Node& self) {
    auto& xn = *self.parents[0];
    auto& gx = xn.grad_buffer();
    for (std::size_t i = 0; i < gx.size(); ++i) {
      if (xn.data[i] > 0.0) gx[i] += self.grad[i];
    }
  });
}

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
  if (pred.shape() != target.shape()) {
    throw shape_error("mse_loss: pred " + shape_string(pred.shape()) + " vs target " +
                      shape_string(target.shape()));
  }
  const std::size_t n = pred.size();
  if (n == 0) throw shape_error("mse_loss: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = pred[i] - target[i];
    acc += diff * diff;
  }
  return Tensor::make_result({}, {acc / static_cast<double>(n)}, {&pred, &target},
                             [n](Tensor::Node& self) {
    auto& pn = *self.parents[0];
    auto& tn = *self.parents[1];
    const double scale = 2.0 * self.grad[0] / static_cast<double>(n);
    if (pn.requires_grad) {
      auto& g = pn.grad_buffer();
      for (std::size_t i = 0; i < n; ++i) g[i] += scale * (pn.data[i] - tn.data[i]);
    }
    if (tn.requires_grad) {
      auto& g = tn.grad_buffer();
      for (std::size_t i = 0; i < n; ++i) g[i] -= scale * (pn.data[i] - tn.data[i]);
    }
  });
}

Tensor cross_entropy(const Tensor& logits, std::span<const std::uint32_t> labels) {
  require_rank2(logits, "cross_entropy", "logits");
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  if (labels.size() != batch || batch == 0) {
    throw shape_error("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                      std::to_string(batch) + " rows");
  }
  std::vector<double> probs(batch * classes);
  std::vector<std::uint32_t> owned(labels.begin(), labels.end());
  double loss = 0.0;
  for (std::size_t r = 0; r < batch; ++r) {
    if (owned[r] >= classes) {
      throw range_error("cross_entropy: label " + std::to_string(owned[r]) +
                        " is not below class count " + std::to_string(classes));
    }
    const auto row = logits.data().subspan(r * classes, classes);
    const double peak = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (std::size_t k = 0; k < classes; ++k) {
      probs[r * classes + k] = std::exp(row[k] - peak);
      z += probs[r * classes + k];
    }
    for (std::size_t k = 0; k < classes; ++k) probs[r * classes + k] /= z;
    loss += -(row[owned[r]] - peak - std::log(z));
  }
  loss /= static_cast<double>(batch);
  return Tensor::make_result(
      {}, {loss}, {&logits},
      [batch, classes, probs = std::move(probs), owned = std::move(owned)](Tensor::Node& self) {
        auto& g = self.parents[0]->grad_buffer();
        const double scale = self.grad[0] / static_cast<double>(batch);
        for (std::size_t r = 0; r < batch; ++r) {
          for (std::size_t k = 0; k < classes; ++k) {
            const double indicator = k == owned[r] ? 1.0 : 0.0;
            g[r * classes + k] += scale * (probs[r * classes + k] - indicator);
          }
        }
      });
}

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  return Tensor::make_result({}, {acc}, {&x}, [](Tensor::Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (auto& v : g) v += self.grad[0];
  });
}

Tensor embedding_sum(const Tensor& table, std::span<const std::size_t> indices,
                     std::size_t group) {
  require_rank2(table, "embedding_sum", "table");
  if (group == 0 || indices.size() % group != 0) {
    throw shape_error("embedding_sum: index count must be a multiple of the group size");
  }
  const std::size_t rows = table.dim(0), dim = table.dim(1);
  const std::size_t batch = indices.size() / group;
  std::vector<std::size_t> owned(indices.begin(), indices.end());
  std::vector<double> out(batch * dim, 0.0);
  const auto& td = table.node()->data;
  for (std::size_t b = 0; b < batch; ++b) {
    double* dst = out.data() + b * dim;
    for (std::size_t j = 0; j < group; ++j) {
      const std::size_t r = owned[b * group + j];
      if (r >= rows) {
        throw range_error("embedding_sum: index " + std::to_string(r) + " >= " +
                          std::to_string(rows) + " table rows");
      }
      const double* src = td.data() + r * dim;
      for (std::size_t d = 0; d < dim; ++d) dst[d] += src[d];
    }
  }
  return Tensor::make_result(
      {batch, dim}, std::move(out), {&table},
      [batch, dim, group, owned = std::move(owned)](Tensor::Node& self) {
        auto& g = self.parents[0]->grad_buffer();
        for (std::size_t b = 0; b < batch; ++b) {
          const double* src = self.grad.data() + b * dim;
          for (std::size_t j = 0; j < group; ++j) {
            double* dst = g.data() + owned[b * group + j] * dim;
            for (std::size_t d = 0; d < dim; ++d) dst[d] += src[d];
          }
        }
      });
}

Tensor scale_columns(const Tensor& x, const Tensor& scale) {
  require_rank2(x, "scale_columns", "x");
  const std::size_t batch = x.dim(0), dim = x.dim(1);
  if (scale.size() != dim) {
    throw shape_error("scale_columns: scale " + shape_string(scale.shape()) + " vs x " +
                      shape_string(x.shape()));
  }
  std::vector<double> y(batch * dim);
  for (std::size_t r = 0; r < batch; ++r) {
    for (std::size_t d = 0; d < dim; ++d) y[r * dim + d] = x[r * dim + d] * scale[d];
  }
  return Tensor::make_result({batch, dim}, std::move(y), {&x, &scale},
                             [batch, dim](Tensor::Node& self) {
    auto& xn = *self.parents[0];
    auto& sn = *self.parents[1];
    if (xn.requires_grad) {
      auto& g = xn.grad_buffer();
      for (std::size_t r = 0; r < batch; ++r) {
        for (std::size_t d = 0; d < dim; ++d) g[r * dim + d] += self.grad[r * dim + d] * sn.data[d];
      }
    }
    if (sn.requires_grad) {
      auto& g = sn.grad_buffer();
      for (std::size_t r = 0; r < batch; ++r) {
        for (std::size_t d = 0; d < dim; ++d) g[d] += self.grad[r * dim + d] * xn.data[r * dim + d];
      }
    }
  });
}

Tensor group_mean(const Tensor& x, std::size_t k) {
  require_rank2(x, "group_mean", "x");
  if (k == 0) throw domain_error("group_mean: empty group");
  if (x.dim(0) % k != 0) {
    throw shape_error("group_mean: " + std::to_string(x.dim(0)) +
                      " rows are not a multiple of group size " + std::to_string(k));
  }
  const std::size_t groups = x.dim(0) / k, dim = x.dim(1);
  const double inv = 1.0 / static_cast<double>(k);
  std::vector<double> y(groups * dim, 0.0);
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t j = 0; j < k; ++j) {
      const auto src = x.data().subspan((g * k + j) * dim, dim);
      for (std::size_t d = 0; d < dim; ++d) y[g * dim + d] += src[d];
    }
    for (std::size_t d = 0; d < dim; ++d) y[g * dim + d] *= inv;
  }
  return Tensor::make_result({groups, dim}, std::move(y), {&x},
                             [groups, dim, k, inv](Tensor::Node& self) {
    auto& gx = self.parents[0]->grad_buffer();
    for (std::size_t g = 0; g < groups; ++g) {
      for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t d = 0; d < dim; ++d) {
          gx[(g * k + j) * dim + d] += inv * self.grad[g * dim + d];
        }
      }
    }
  });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  require_rank2(a, "concat_cols", "a");
  require_rank2(b, "concat_cols", "b");
  if (a.dim(0) != b.dim(0)) {
    throw shape_error("concat_cols: row counts differ (" + shape_string(a.shape()) + " vs " +
                      shape_string(b.shape()) + ")");
  }
  const std::size_t rows = a.dim(0), p = a.dim(1), q = b.dim(1);
  std::vector<double> y(rows * (p + q));
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(a.data().begin() + static_cast<std::ptrdiff_t>(r * p), p, y.begin() + static_cast<std::ptrdiff_t>(r * (p + q)));
    std::copy_n(b.data().begin() + static_cast<std::ptrdiff_t>(r * q), q, y.begin() + static_cast<std::ptrdiff_t>(r * (p + q) + p));
  }
  return Tensor::make_result({rows, p + q}, std::move(y), {&a, &b},
                             [rows, p, q](Tensor::Node& self) {
    auto& an = *self.parents[0];
    auto& bn = *self.parents[1];
    if (an.requires_grad) {
      auto& g = an.grad_buffer();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < p; ++c) g[r * p + c] += self.grad[r * (p + q) + c];
      }
    }
    if (bn.requires_grad) {
      auto& g = bn.grad_buffer();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < q; ++c) g[r * q + c] += self.grad[r * (p + q) + p + c];
      }
    }
  });
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> idx) {
  require_rank2(x, "gather_rows", "x");
  const std::size_t rows = x.dim(0), dim = x.dim(1);
  std::vector<std::size_t> owned(idx.begin(), idx.end());
  std::vector<double> y(owned.size() * dim);
  for (std::size_t i = 0; i < owned.size(); ++i) {
    if (owned[i] >= rows) {
      throw range_error("gather_rows: index " + std::to_string(owned[i]) + " >= " +
                        std::to_string(rows));
    }
    std::copy_n(x.data().begin() + static_cast<std::ptrdiff_t>(owned[i] * dim), dim,
                y.begin() + static_cast<std::ptrdiff_t>(i * dim));
  }
  const std::size_t count = owned.size();
  return Tensor::make_result({count, dim}, std::move(y), {&x},
                             [dim, owned = std::move(owned)](Tensor::Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < owned.size(); ++i) {
      for (std::size_t d = 0; d < dim; ++d) g[owned[i] * dim + d] += self.grad[i * dim + d];
    }
  });
}

Linear make_linear(std::size_t in, std::size_t out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  std::vector<double> w(in * out);
  for (auto& v : w) v = (2.0 * rng.uniform() - 1.0) * bound;
  return {Tensor::from({in, out}, std::move(w), true), Tensor::zeros({out}, true)};
}

double grad_check(const std::function<Tensor()>& f, std::span<Tensor> inputs, double epsilon) {
  for (auto& t : inputs) t.zero_grad();
  Tensor loss = f();
  if (loss.size() != 1) throw contract_error("grad_check: function must return a scalar");
  loss.backward();

  double worst = 0.0;
  for (auto& t : inputs) {
    const std::vector<double> analytic(t.grad().begin(), t.grad().end());
    auto data = t.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      data[i] = saved + epsilon;
      const double plus = f().item();
      data[i] = saved - epsilon;
      const double minus = f().item();
      data[i] = saved;
      const double numeric = (plus - minus) / (2.0 * epsilon);
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
  }
  for (auto& t : inputs) t.zero_grad();
  return worst;
}

}  // namespace hashemb::nn
