#pragma once

// Naive reference implementations of every cell. Per-type adjacency is
// materialised as dense multiplicity matrices and everything is plain nested
// loops over std::vector<double>; nothing here calls into relgnn::ops.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "relgnn/cells.hpp"
#include "relgnn/graph.hpp"
#include "relgnn/parameters.hpp"

namespace oracle {

using Vec = std::vector<double>;
using Rows = std::vector<Vec>;  // one row per node

struct Dense {
  std::size_t rows = 0, cols = 0;
  Vec v;
  double operator()(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
};

inline Dense param(const relgnn::ParameterStore& store, const std::string& name) {
  const relgnn::Tensor& t = store.get(name);
  Dense d;
  d.rows = t.rank() == 2 ? t.shape()[0] : 1;
  d.cols = t.rank() == 2 ? t.shape()[1] : t.numel();
  d.v.assign(t.values().begin(), t.values().end());
  return d;
}

inline Rows rows_of(const relgnn::Tensor& t) {
  Rows out(t.rows(), Vec(t.cols()));
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) out[r][c] = t.at(r, c);
  return out;
}

inline Rows rows_of(const relgnn::Matrix& m) {
  Rows out(m.rows, Vec(m.cols));
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) out[r][c] = m(r, c);
  return out;
}

// x W (+ b), x a row vector.
inline Vec vecmat(const Vec& x, const Dense& w) {
  if (x.size() != w.rows) throw std::logic_error("oracle: width mismatch");
  Vec out(w.cols, 0.0);
  for (std::size_t j = 0; j < w.cols; ++j)
    for (std::size_t i = 0; i < w.rows; ++i) out[j] += x[i] * w(i, j);
  return out;
}

inline Vec affine(const Vec& x, const Dense& w, const Dense& b) {
  Vec out = vecmat(x, w);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += b.v[j];
  return out;
}

inline double act(relgnn::Activation a, double x) {
  using relgnn::Activation;
  switch (a) {
    case Activation::Identity: return x;
    case Activation::Relu: return x > 0 ? x : 0.0;
    case Activation::LeakyRelu: return x > 0 ? x : 0.2 * x;
    case Activation::Elu: return x > 0 ? x : std::exp(x) - 1.0;
    case Activation::Gelu: return 0.5 * x * (1.0 + std::tanh(std::sqrt(2.0 / M_PI) * (x + 0.044715 * x * x * x)));
    case Activation::Tanh: return std::tanh(x);
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
  }
  return x;
}

inline Vec act(relgnn::Activation a, Vec x) {
  for (double& e : x) e = act(a, e);
  return x;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Vec slice(const Vec& x, std::size_t start, std::size_t count) {
  return Vec(x.begin() + static_cast<std::ptrdiff_t>(start), x.begin() + static_cast<std::ptrdiff_t>(start + count));
}

inline void add_into(Vec& acc, const Vec& x, double scale = 1.0) {
  for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += scale * x[j];
}

// adjacency[t][v][u] = number of type-t edges u -> v.
using Adjacency = std::vector<std::vector<std::vector<int>>>;

inline Adjacency dense_adjacency(const relgnn::TypedGraph& g) {
  const std::size_t n = g.num_nodes;
  Adjacency a(g.edges.size(), std::vector<std::vector<int>>(n, std::vector<int>(n, 0)));
  for (std::size_t t = 0; t < g.edges.size(); ++t)
    for (const auto& [u, v] : g.edges[t]) a[t][v][u] += 1;
  return a;
}

inline std::string tp(const std::string& prefix, std::size_t t) { return prefix + "type" + std::to_string(t) + "/"; }

inline double norm_factor(const Adjacency& a, std::size_t t, std::size_t v, relgnn::Normalization mode) {
  using relgnn::Normalization;
  if (mode == Normalization::None) return 1.0;
  double c = 0;
  for (std::size_t s = 0; s < a.size(); ++s) {
    if (mode == Normalization::PerType && s != t) continue;
    for (int m : a[s][v]) c += m;
  }
  return 1.0 / c;
}

// Recurrent update r(h, m) with stacked gate blocks (see recurrent.hpp).
inline Vec recurrent(relgnn::RecurrentKind kind, const Vec& h, const Vec& m, const Dense& wi, const Dense& ws,
                     const Dense& b) {
  const std::size_t d = h.size();
  Vec xi = vecmat(m, wi);
  for (std::size_t j = 0; j < xi.size(); ++j) xi[j] += b.v[j];
  Vec out(d);
  switch (kind) {
    case relgnn::RecurrentKind::RNN: {
      Vec xs = vecmat(h, ws);
      for (std::size_t j = 0; j < d; ++j) out[j] = std::tanh(xi[j] + xs[j]);
      break;
    }
    case relgnn::RecurrentKind::GRU: {
      Vec xs = vecmat(h, ws);
      Vec r(d), z(d), rh(d);
      for (std::size_t j = 0; j < d; ++j) {
        r[j] = sigmoid(xi[j] + xs[j]);
        z[j] = sigmoid(xi[d + j] + xs[d + j]);
        rh[j] = r[j] * h[j];
      }
      for (std::size_t j = 0; j < d; ++j) {
        double cand = xi[2 * d + j];
        for (std::size_t i = 0; i < d; ++i) cand += rh[i] * ws(i, 2 * d + j);
        out[j] = z[j] * h[j] + (1.0 - z[j]) * std::tanh(cand);
      }
      break;
    }
    case relgnn::RecurrentKind::LSTM: {
      Vec xs = vecmat(h, ws);
      for (std::size_t j = 0; j < d; ++j) {
        const double i_g = sigmoid(xi[j] + xs[j]);
        const double c_g = std::tanh(xi[2 * d + j] + xs[2 * d + j]);
        const double o_g = sigmoid(xi[3 * d + j] + xs[3 * d + j]);
        out[j] = o_g * std::tanh(i_g * c_g);  // memory starts at zero
      }
      break;
    }
  }
  return out;
}

/// One propagation step of `config.kind` on graph `g` (already carrying SELF
/// when the cell needs it), parameters read from `store` under `prefix`.
inline Rows cell(const relgnn::CellConfig& config, const relgnn::TypedGraph& g, const Rows& h,
                 const relgnn::ParameterStore& store, const std::string& prefix) {
  using relgnn::CellKind;
  const std::size_t n = g.num_nodes;
  const std::size_t T = g.edges.size();
  const std::size_t d = config.hidden_dim;
  const Adjacency a = dense_adjacency(g);
  const relgnn::Activation sigma = config.activation;
  Rows out(n, Vec(d, 0.0));

  switch (config.kind) {
    case CellKind::GGNN: {
      const Dense wi = param(store, prefix + "rnn/input_weight");
      const Dense ws = param(store, prefix + "rnn/state_weight");
      const Dense b = param(store, prefix + "rnn/bias");
      for (std::size_t v = 0; v < n; ++v) {
        Vec m(d, 0.0);
        for (std::size_t t = 0; t < T; ++t) {
          const Dense w = param(store, tp(prefix, t) + "W");
          for (std::size_t u = 0; u < n; ++u)
            if (a[t][v][u]) add_into(m, vecmat(h[u], w), a[t][v][u]);
        }
        out[v] = recurrent(config.recurrent, h[v], m, wi, ws, b);
      }
      return out;
    }
    case CellKind::RGCN: {
      for (std::size_t v = 0; v < n; ++v) {
        Vec s(d, 0.0);
        for (std::size_t t = 0; t < T; ++t) {
          const Dense w = param(store, tp(prefix, t) + "W");
          for (std::size_t u = 0; u < n; ++u)
            if (a[t][v][u]) add_into(s, vecmat(h[u], w), a[t][v][u] * norm_factor(a, t, v, config.normalization));
        }
        out[v] = act(sigma, s);
      }
      return out;
    }
    case CellKind::RGAT: {
      const std::size_t heads = config.num_heads, hd = d / heads;
      for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t k = 0; k < heads; ++k) {
          const std::string hp = "head" + std::to_string(k) + "/";
          // Logits and messages of every incoming edge, duplicates included.
          std::vector<double> logits;
          Rows messages;
          for (std::size_t t = 0; t < T; ++t) {
            const Dense w = param(store, tp(prefix, t) + hp + "W");
            const Dense alpha = param(store, tp(prefix, t) + hp + "attention");
            const Vec wv = vecmat(h[v], w);
            for (std::size_t u = 0; u < n; ++u) {
              for (int rep = 0; rep < a[t][v][u]; ++rep) {
                const Vec wu = vecmat(h[u], w);
                double e = 0;
                for (std::size_t j = 0; j < hd; ++j) e += alpha.v[j] * wu[j] + alpha.v[hd + j] * wv[j];
                logits.push_back(e > 0 ? e : 0.2 * e);
                messages.push_back(wu);
              }
            }
          }
          double z = 0;
          for (double e : logits) z += std::exp(e);
          Vec s(hd, 0.0);
          for (std::size_t i = 0; i < logits.size(); ++i) add_into(s, messages[i], std::exp(logits[i]) / z);
          for (std::size_t j = 0; j < hd; ++j) out[v][k * hd + j] = act(sigma, s[j]);
        }
      }
      return out;
    }
    case CellKind::RGIN: {
      for (std::size_t v = 0; v < n; ++v) {
        Vec s(d, 0.0);
        for (std::size_t t = 0; t < T; ++t) {
          const std::string mp = tp(prefix, t) + "mlp/";
          const Dense w1 = param(store, mp + "hidden_weight"), b1 = param(store, mp + "hidden_bias");
          const Dense w2 = param(store, mp + "out_weight"), b2 = param(store, mp + "out_bias");
          for (std::size_t u = 0; u < n; ++u)
            if (a[t][v][u]) add_into(s, affine(act(sigma, affine(h[u], w1, b1)), w2, b2), a[t][v][u]);
        }
        out[v] = act(sigma, s);
      }
      return out;
    }
    case CellKind::GNN_MLP0:
    case CellKind::GNN_MLP1: {
      const bool deep = config.kind == CellKind::GNN_MLP1;
      for (std::size_t v = 0; v < n; ++v) {
        Vec s(d, 0.0);
        for (std::size_t t = 0; t < T; ++t) {
          const std::string mp = tp(prefix, t) + "mlp/";
          for (std::size_t u = 0; u < n; ++u) {
            if (!a[t][v][u]) continue;
            Vec cat = h[u];
            cat.insert(cat.end(), h[v].begin(), h[v].end());
            Vec msg;
            if (deep) {
              msg = affine(act(sigma, affine(cat, param(store, mp + "hidden_weight"), param(store, mp + "hidden_bias"))),
                           param(store, mp + "out_weight"), param(store, mp + "out_bias"));
            } else {
              msg = affine(cat, param(store, mp + "weight"), param(store, mp + "bias"));
            }
            add_into(s, msg, a[t][v][u] * norm_factor(a, t, v, config.normalization));
          }
        }
        out[v] = act(sigma, s);
      }
      return out;
    }
    case CellKind::RGDCN: {
      const std::size_t C = config.num_chunks, K = d / C;
      for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t c = 0; c < C; ++c) {
          Vec s(K, 0.0);
          for (std::size_t t = 0; t < T; ++t) {
            Vec flat;
            if (config.chunk_tying == relgnn::ChunkTying::Shared) {
              flat = affine(h[v], param(store, tp(prefix, t) + "hyper_weight"), param(store, tp(prefix, t) + "hyper_bias"));
            } else {
              const std::string cp = tp(prefix, t) + "chunk" + std::to_string(c) + "/";
              const Vec input = config.chunk_tying == relgnn::ChunkTying::ChunkLocal ? slice(h[v], c * K, K) : h[v];
              flat = affine(input, param(store, cp + "hyper_weight"), param(store, cp + "hyper_bias"));
            }
            for (std::size_t u = 0; u < n; ++u) {
              if (!a[t][v][u]) continue;
              // Row-vector chunk times the K x K generated matrix.
              for (std::size_t j = 0; j < K; ++j) {
                double m = 0;
                for (std::size_t i = 0; i < K; ++i) m += h[u][c * K + i] * flat[i * K + j];
                s[j] += a[t][v][u] * m;
              }
            }
          }
          for (std::size_t j = 0; j < K; ++j) out[v][c * K + j] = act(sigma, s[j]);
        }
      }
      return out;
    }
    case CellKind::GNN_FILM: {
      const bool before = config.film_aggregation == relgnn::FilmAggregation::Before;
      for (std::size_t v = 0; v < n; ++v) {
        Vec s(d, 0.0);
        for (std::size_t t = 0; t < T; ++t) {
          const Dense w = param(store, tp(prefix, t) + "W");
          const Vec film = affine(h[v], param(store, tp(prefix, t) + "film_g/weight"),
                                  param(store, tp(prefix, t) + "film_g/bias"));
          for (std::size_t u = 0; u < n; ++u) {
            if (!a[t][v][u]) continue;
            const Vec wu = vecmat(h[u], w);
            Vec msg(d);
            for (std::size_t j = 0; j < d; ++j) msg[j] = film[d + j] * wu[j] + film[j];
            add_into(s, before ? act(sigma, msg) : msg, a[t][v][u]);
          }
        }
        if (!before) {
          out[v] = act(sigma, s);
          continue;
        }
        for (std::size_t i = 0; i < config.film_post.size(); ++i) {
          const std::string pp = prefix + "post" + std::to_string(i) + "/";
          switch (config.film_post[i]) {
            case relgnn::PostOp::Tanh:
              for (double& x : s) x = std::tanh(x);
              break;
            case relgnn::PostOp::Linear:
              s = affine(s, param(store, pp + "weight"), param(store, pp + "bias"));
              break;
            case relgnn::PostOp::LayerNorm: {
              const Dense gain = param(store, pp + "gain"), bias = param(store, pp + "bias");
              double mu = 0, var = 0;
              for (double x : s) mu += x;
              mu /= static_cast<double>(d);
              for (double x : s) var += (x - mu) * (x - mu);
              var /= static_cast<double>(d);
              for (std::size_t j = 0; j < d; ++j) s[j] = (s[j] - mu) / std::sqrt(var + 1e-5) * gain.v[j] + bias.v[j];
              break;
            }
          }
        }
        out[v] = s;
      }
      return out;
    }
  }
  throw std::logic_error("oracle: unknown cell");
}

inline double max_abs_diff(const Rows& a, const relgnn::Tensor& b) {
  double m = 0;
  for (std::size_t r = 0; r < a.size(); ++r)
    for (std::size_t c = 0; c < a[r].size(); ++c) m = std::max(m, std::abs(a[r][c] - b.at(r, c)));
  return m;
}

}  // namespace oracle
