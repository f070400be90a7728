#include "relgnn/cells.hpp"

#include <stdexcept>

namespace relgnn {

using namespace ops;

CellKind cell_kind_from_name(std::string_view name) {
  if (name == "GGNN") return CellKind::GGNN;
  if (name == "RGCN" || name == "R-GCN") return CellKind::RGCN;
  if (name == "RGAT" || name == "R-GAT") return CellKind::RGAT;
  if (name == "RGIN" || name == "R-GIN") return CellKind::RGIN;
  if (name == "GNN_MLP0" || name == "GNN-MLP0") return CellKind::GNN_MLP0;
  if (name == "GNN_MLP1" || name == "GNN-MLP1") return CellKind::GNN_MLP1;
  if (name == "RGDCN") return CellKind::RGDCN;
  if (name == "GNN_FILM" || name == "GNN-FiLM") return CellKind::GNN_FILM;
  throw std::invalid_argument("unknown model kind '" + std::string(name) + "'");
}

std::string cell_kind_name(CellKind kind) {
  switch (kind) {
    case CellKind::GGNN: return "GGNN";
    case CellKind::RGCN: return "RGCN";
    case CellKind::RGAT: return "RGAT";
    case CellKind::RGIN: return "RGIN";
    case CellKind::GNN_MLP0: return "GNN_MLP0";
    case CellKind::GNN_MLP1: return "GNN_MLP1";
    case CellKind::RGDCN: return "RGDCN";
    case CellKind::GNN_FILM: return "GNN_FILM";
  }
  return "GNN_FILM";
}

const std::vector<CellKind>& all_cell_kinds() {
  static const std::vector<CellKind> kinds = {CellKind::GGNN,     CellKind::RGCN,     CellKind::RGAT,
                                              CellKind::RGIN,     CellKind::GNN_MLP0, CellKind::GNN_MLP1,
                                              CellKind::RGDCN,    CellKind::GNN_FILM};
  return kinds;
}

FilmAggregation film_aggregation_from_name(std::string_view name) {
  if (name == "after") return FilmAggregation::After;
  if (name == "before") return FilmAggregation::Before;
  throw std::invalid_argument("unknown film_aggregation '" + std::string(name) + "' (after|before)");
}

std::string film_aggregation_name(FilmAggregation mode) {
  return mode == FilmAggregation::After ? "after" : "before";
}

ChunkTying chunk_tying_from_name(std::string_view name) {
  if (name == "per_chunk") return ChunkTying::PerChunk;
  if (name == "shared") return ChunkTying::Shared;
  if (name == "chunk_local") return ChunkTying::ChunkLocal;
  throw std::invalid_argument("unknown chunk_tying '" + std::string(name) +
                              "' (per_chunk|shared|chunk_local)");
}

std::string chunk_tying_name(ChunkTying tying) {
  switch (tying) {
    case ChunkTying::PerChunk: return "per_chunk";
    case ChunkTying::Shared: return "shared";
    case ChunkTying::ChunkLocal: return "chunk_local";
  }
  return "per_chunk";
}

Normalization normalization_from_name(std::string_view name) {
  if (name == "per_type") return Normalization::PerType;
  if (name == "none") return Normalization::None;
  if (name == "total_in_degree") return Normalization::TotalInDegree;
  throw std::invalid_argument("unknown normalization '" + std::string(name) +
                              "' (per_type|none|total_in_degree)");
}

std::string normalization_name(Normalization n) {
  switch (n) {
    case Normalization::PerType: return "per_type";
    case Normalization::None: return "none";
    case Normalization::TotalInDegree: return "total_in_degree";
  }
  return "per_type";
}

std::vector<PostOp> post_ops_from_name(std::string_view spec) {
  std::vector<PostOp> out;
  if (spec == "identity" || spec.empty()) return out;
  std::size_t start = 0;
  while (start <= spec.size()) {
    std::size_t end = spec.find('+', start);
    if (end == std::string_view::npos) end = spec.size();
    std::string_view part = spec.substr(start, end - start);
    if (part == "tanh") out.push_back(PostOp::Tanh);
    else if (part == "linear") out.push_back(PostOp::Linear);
    else if (part == "layer_norm") out.push_back(PostOp::LayerNorm);
    else throw std::invalid_argument("unknown post-aggregation stage '" + std::string(part) +
                                     "' (identity|tanh|linear|layer_norm, joined by '+')");
    start = end + 1;
  }
  return out;
}

std::string post_ops_name(const std::vector<PostOp>& stages) {
  if (stages.empty()) return "identity";
  std::string out;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (i) out += '+';
    switch (stages[i]) {
      case PostOp::Tanh: out += "tanh"; break;
      case PostOp::Linear: out += "linear"; break;
      case PostOp::LayerNorm: out += "layer_norm"; break;
    }
  }
  return out;
}

void CellConfig::validate() const {
  if (hidden_dim == 0) throw std::invalid_argument("hidden_dim must be positive");
  if (kind == CellKind::RGAT) {
    if (num_heads == 0) throw std::invalid_argument("num_heads must be positive");
    if (hidden_dim % num_heads != 0) {
      throw std::invalid_argument("hidden_dim " + std::to_string(hidden_dim) +
                                  " is not divisible by num_heads " + std::to_string(num_heads));
    }
  }
  if (kind == CellKind::RGDCN) {
    if (num_chunks == 0) throw std::invalid_argument("num_chunks must be positive");
    if (hidden_dim % num_chunks != 0) {
      throw std::invalid_argument("hidden_dim " + std::to_string(hidden_dim) +
                                  " is not divisible by num_chunks " + std::to_string(num_chunks));
    }
  }
}

std::size_t CellConfig::required_input_dim() const {
  return kind == CellKind::GGNN || kind == CellKind::RGDCN ? hidden_dim : 0;
}

std::string type_prefix(std::size_t t) { return "type" + std::to_string(t) + "/"; }

namespace {

struct TypeEdges {
  std::vector<Index> src;
  std::vector<Index> tgt;
};

std::vector<TypeEdges> split_edges(const TypedGraph& g) {
  std::vector<TypeEdges> out(g.edges.size());
  for (std::size_t t = 0; t < g.edges.size(); ++t) {
    out[t].src.reserve(g.edges[t].size());
    out[t].tgt.reserve(g.edges[t].size());
    for (const auto& [s, d] : g.edges[t]) {
      out[t].src.push_back(s);
      out[t].tgt.push_back(d);
    }
  }
  return out;
}

void check_inputs(const Tensor& h, const TypedGraph& g, const NormCounts* counts, const char* who) {
  if (h.rank() != 2 || h.rows() != g.num_nodes) {
    throw DimensionError(std::string(who) + ": node states " + shape_to_string(h.shape()) +
                         " do not match a graph of " + std::to_string(g.num_nodes) + " nodes");
  }
  if (counts && (counts->num_nodes() != g.num_nodes || counts->num_types() != g.edge_types.size())) {
    throw DimensionError(std::string(who) + ": normalisation counts do not match the graph");
  }
}

void require_self_loops(const TypedGraph& g, const char* who) {
  if (!g.has_self_loops()) {
    throw GraphError(std::string(who) + " requires the '" + std::string(kSelfLoopType) + "' edge type");
  }
}

void check_input_dim(const Tensor& h, const Tensor& weight, const char* who) {
  if (weight.rows() != h.cols()) {
    throw DimensionError(std::string(who) + ": input width " + std::to_string(h.cols()) +
                         " does not match weight " + shape_to_string(weight.shape()));
  }
}

std::vector<real> edge_norm(const TypeEdges& edges, std::size_t t, const NormCounts& counts, Normalization mode) {
  std::vector<real> w(edges.tgt.size(), real(1));
  for (std::size_t e = 0; e < w.size(); ++e) {
    const std::size_t c = mode == Normalization::PerType ? counts(edges.tgt[e], t) : counts.total(edges.tgt[e]);
    w[e] = real(1) / real(c);
  }
  return w;
}

Tensor accumulate(Tensor acc, const Tensor& term, bool& first) {
  if (first) {
    first = false;
    return term;
  }
  return add(acc, term);
}

Tensor mlp_hidden_out(const Tensor& x, const LayerParams& p, const std::string& prefix, Activation act) {
  Tensor hidden_w = p.get(prefix + "hidden_weight");
  Tensor hidden_b = p.get(prefix + "hidden_bias");
  Tensor out_w = p.get(prefix + "out_weight");
  Tensor out_b = p.get(prefix + "out_bias");
  return linear(activate(act, linear(x, hidden_w, &hidden_b)), out_w, &out_b);
}

void add_linear(ParameterStore& store, const std::string& prefix, const std::string& weight_name,
                const std::string& bias_name, std::size_t in, std::size_t out, Rng& rng) {
  store.add(prefix + weight_name, glorot_uniform(in, out, rng));
  store.add(prefix + bias_name, Tensor::zeros({out}));
}

}  // namespace

void init_cell_params(const CellConfig& config, std::size_t input_dim, std::size_t num_edge_types,
                      ParameterStore& store, const std::string& prefix, Rng& rng) {
  config.validate();
  const std::size_t d = config.hidden_dim;
  if (config.required_input_dim() && input_dim != config.required_input_dim()) {
    throw DimensionError(cell_kind_name(config.kind) + " needs input width " + std::to_string(d) +
                         ", got " + std::to_string(input_dim));
  }
  for (std::size_t t = 0; t < num_edge_types; ++t) {
    const std::string tp = prefix + type_prefix(t);
    switch (config.kind) {
      case CellKind::GGNN:
      case CellKind::RGCN:
        store.add(tp + "W", glorot_uniform(input_dim, d, rng));
        break;
      case CellKind::RGAT: {
        const std::size_t hd = d / config.num_heads;
        for (std::size_t k = 0; k < config.num_heads; ++k) {
          const std::string hp = tp + "head" + std::to_string(k) + "/";
          store.add(hp + "W", glorot_uniform(input_dim, hd, rng));
          store.add(hp + "attention", glorot_uniform(2 * hd, 1, rng));
        }
        break;
      }
      case CellKind::RGIN:
        add_linear(store, tp + "mlp/", "hidden_weight", "hidden_bias", input_dim, d, rng);
        add_linear(store, tp + "mlp/", "out_weight", "out_bias", d, d, rng);
        break;
      case CellKind::GNN_MLP0:
        add_linear(store, tp + "mlp/", "weight", "bias", 2 * input_dim, d, rng);
        break;
      case CellKind::GNN_MLP1:
        add_linear(store, tp + "mlp/", "hidden_weight", "hidden_bias", 2 * input_dim, d, rng);
        add_linear(store, tp + "mlp/", "out_weight", "out_bias", d, d, rng);
        break;
      case CellKind::RGDCN: {
        const std::size_t k = d / config.num_chunks;
        if (config.chunk_tying == ChunkTying::Shared) {
          add_linear(store, tp, "hyper_weight", "hyper_bias", input_dim, k * k, rng);
        } else {
          const std::size_t in = config.chunk_tying == ChunkTying::ChunkLocal ? k : input_dim;
          for (std::size_t c = 0; c < config.num_chunks; ++c) {
            add_linear(store, tp + "chunk" + std::to_string(c) + "/", "hyper_weight", "hyper_bias",
                       in, k * k, rng);
          }
        }
        break;
      }
      case CellKind::GNN_FILM: {
        store.add(tp + "W", glorot_uniform(input_dim, d, rng));
        store.add(tp + "film_g/weight", glorot_uniform(input_dim, 2 * d, rng));
        // beta bias 0, gamma bias 1: an untrained layer starts close to
        // unnormalised R-GCN.
        std::vector<real> bias(2 * d, real(0));
        std::fill(bias.begin() + static_cast<std::ptrdiff_t>(d), bias.end(), real(1));
        store.add(tp + "film_g/bias", Tensor::from({2 * d}, std::move(bias)));
        break;
      }
    }
  }
  if (config.kind == CellKind::GGNN) {
    add_recurrent_params(store, prefix + "rnn/", config.recurrent, d, d, rng);
  }
  if (config.kind == CellKind::GNN_FILM && config.film_aggregation == FilmAggregation::Before) {
    for (std::size_t i = 0; i < config.film_post.size(); ++i) {
      const std::string pp = prefix + "post" + std::to_string(i) + "/";
      if (config.film_post[i] == PostOp::Linear) {
        add_linear(store, pp, "weight", "bias", d, d, rng);
      } else if (config.film_post[i] == PostOp::LayerNorm) {
        store.add(pp + "gain", Tensor::full({d}, 1));
        store.add(pp + "bias", Tensor::zeros({d}));
      }
    }
  }
}

Tensor ggnn_messages(const Tensor& h, const TypedGraph& g, const LayerParams& p, const CellConfig& config) {
  check_inputs(h, g, nullptr, "ggnn_layer");
  const auto edges = split_edges(g);
  Tensor acc = Tensor::zeros({g.num_nodes, config.hidden_dim});
  bool first = true;
  for (std::size_t t = 0; t < edges.size(); ++t) {
    const Tensor& w = p.get(type_prefix(t) + "W");
    check_input_dim(h, w, "ggnn_layer");
    Tensor projected = matmul(h, w);
    acc = accumulate(acc, segment_sum(gather_rows(projected, edges[t].src), edges[t].tgt, g.num_nodes), first);
  }
  return acc;
}

Tensor ggnn_layer(const Tensor& h, const TypedGraph& g, const NormCounts& counts, const LayerParams& p,
                  const CellConfig& config) {
  check_inputs(h, g, &counts, "ggnn_layer");
  if (h.cols() != config.hidden_dim) {
    throw DimensionError("ggnn_layer: state width " + std::to_string(h.cols()) +
                         " differs from the recurrent hidden size " + std::to_string(config.hidden_dim));
  }
  Tensor messages = ggnn_messages(h, g, p, config);
  RecurrentParams rp = recurrent_params_from(p.store(), p.prefix() + "rnn/", config.recurrent);
  return recurrent_cell(RecurrentState{h, std::nullopt}, messages, rp).hidden;
}

Tensor rgcn_layer(const Tensor& h, const TypedGraph& g, const NormCounts& counts, const LayerParams& p,
                  const CellConfig& config) {
  check_inputs(h, g, &counts, "rgcn_layer");
  require_self_loops(g, "rgcn_layer");
  const auto edges = split_edges(g);
  Tensor acc = Tensor::zeros({g.num_nodes, config.hidden_dim});
  bool first = true;
  for (std::size_t t = 0; t < edges.size(); ++t) {
    const Tensor& w = p.get(type_prefix(t) + "W");
    check_input_dim(h, w, "rgcn_layer");
    Tensor messages = gather_rows(matmul(h, w), edges[t].src);
    if (config.normalization != Normalization::None) {
      messages = scale_rows(messages, edge_norm(edges[t], t, counts, config.normalization));
    }
    acc = accumulate(acc, segment_sum(messages, edges[t].tgt, g.num_nodes), first);
  }
  return activate(config.activation, acc);
}

namespace {

struct HeadTerms {
  Tensor logits;    // [E x 1]
  Tensor messages;  // [E x head_dim]
  std::vector<Index> targets;
};

HeadTerms rgat_head_terms(const Tensor& h, const std::vector<TypeEdges>& edges, const LayerParams& p,
                          std::size_t head) {
  std::vector<Tensor> logits, messages;
  HeadTerms out;
  for (std::size_t t = 0; t < edges.size(); ++t) {
    const std::string hp = type_prefix(t) + "head" + std::to_string(head) + "/";
    const Tensor& w = p.get(hp + "W");
    const Tensor& alpha = p.get(hp + "attention");
    check_input_dim(h, w, "rgat_layer");
    const std::size_t hd = w.cols();
    Tensor projected = matmul(h, w);
    Tensor src_score = matmul(projected, slice_rows(alpha, 0, hd));
    Tensor tgt_score = matmul(projected, slice_rows(alpha, hd, hd));
    logits.push_back(add(gather_rows(src_score, edges[t].src), gather_rows(tgt_score, edges[t].tgt)));
    messages.push_back(gather_rows(projected, edges[t].src));
    out.targets.insert(out.targets.end(), edges[t].tgt.begin(), edges[t].tgt.end());
  }
  out.logits = leaky_relu(concat_rows(logits));
  out.messages = concat_rows(messages);
  return out;
}

}  // namespace

Tensor rgat_attention(const Tensor& h, const TypedGraph& g, const LayerParams& p, std::size_t head) {
  check_inputs(h, g, nullptr, "rgat_layer");
  require_self_loops(g, "rgat_layer");
  HeadTerms terms = rgat_head_terms(h, split_edges(g), p, head);
  return segment_softmax(terms.logits, terms.targets, g.num_nodes, true);
}

Tensor rgat_layer(const Tensor& h, const TypedGraph& g, const NormCounts& counts, const LayerParams& p,
                  const CellConfig& config) {
  check_inputs(h, g, &counts, "rgat_layer");
  require_self_loops(g, "rgat_layer");
  config.validate();
  const auto edges = split_edges(g);
  std::vector<Tensor> heads;
  for (std::size_t k = 0; k < config.num_heads; ++k) {
    HeadTerms terms = rgat_head_terms(h, edges, p, k);
    Tensor attention = segment_softmax(terms.logits, terms.targets, g.num_nodes, true);
    Tensor weighted = scale_rows(terms.messages, attention);
    heads.push_back(activate(config.activation, segment_sum(weighted, terms.targets, g.num_nodes)));
  }
  return heads.size() == 1 ? heads.front() : concat_cols(heads);
}

Tensor rgin_layer(const Tensor& h, const TypedGraph& g, const NormCounts& counts, const LayerParams& p,
                  const CellConfig& config) {
  check_inputs(h, g, &counts, "rgin_layer");
  require_self_loops(g, "rgin_layer");
  const auto edges = split_edges(g);
  Tensor acc = Tensor::zeros({g.num_nodes, config.hidden_dim});
  bool first = true;
  for (std::size_t t = 0; t < edges.size(); ++t) {
    const std::string mp = type_prefix(t) + "mlp/";
    check_input_dim(h, p.get(mp + "hidden_weight"), "rgin_layer");
    Tensor transformed = mlp_hidden_out(h, p, mp, config.activation);
    acc = accumulate(acc, segment_sum(gather_rows(transformed, edges[t].src), edges[t].tgt, g.num_nodes), first);
  }
  return activate(config.activation, acc);
}

Tensor gnn_mlp_layer(const Tensor& h, const TypedGraph& g, const NormCounts& counts, const LayerParams& p,
                     const CellConfig& config) {
  check_inputs(h, g, &counts, "gnn_mlp_layer");
  require_self_loops(g, "gnn_mlp_layer");
  const bool deep = config.kind == CellKind::GNN_MLP1;
  const std::size_t d_in = h.cols();
  const auto edges = split_edges(g);
  Tensor acc = Tensor::zeros({g.num_nodes, config.hidden_dim});
  bool first = true;
  for (std::size_t t = 0; t < edges.size(); ++t) {
    const std::string mp = type_prefix(t) + "mlp/";
    const Tensor& w = p.get(mp + (deep ? "hidden_weight" : "weight"));
    const Tensor& b = p.get(mp + (deep ? "hidden_bias" : "bias"));
    if (w.rows() != 2 * d_in) {
      throw DimensionError("gnn_mlp_layer: input width " + std::to_string(d_in) +
                           " does not match weight " + shape_to_string(w.shape()));
    }
    // (h_u || h_v) W == h_u W_top + h_v W_bottom
    Tensor from_src = matmul(h, slice_rows(w, 0, d_in));
    Tensor from_tgt = matmul(h, slice_rows(w, d_in, d_in));
    Tensor messages = add(add(gather_rows(from_src, edges[t].src), gather_rows(from_tgt, edges[t].tgt)), b);
    if (deep) {
      Tensor out_w = p.get(mp + "out_weight");
      Tensor out_b = p.get(mp + "out_bias");
      messages = linear(activate(config.activation, messages), out_w, &out_b);
    }
    if (config.normalization != Normalization::None) {
      messages = scale_rows(messages, edge_norm(edges[t], t, counts, config.normalization));
    }
    acc = accumulate(acc, segment_sum(messages, edges[t].tgt, g.num_nodes), first);
  }
  return activate(config.activation, acc);
}

Tensor rgdcn_layer(const Tensor& h, const TypedGraph& g, const NormCounts& counts, const LayerParams& p,
                   const CellConfig& config) {
  check_inputs(h, g, &counts, "rgdcn_layer");
  require_self_loops(g, "rgdcn_layer");
  config.validate();
  const std::size_t d = config.hidden_dim;
  if (h.cols() != d) {
    throw DimensionError("rgdcn_layer: state width " + std::to_string(h.cols()) + " differs from hidden_dim " +
                         std::to_string(d));
  }
  const std::size_t num_chunks = config.num_chunks;
  const std::size_t k = d / num_chunks;
  const auto edges = split_edges(g);

  // Per-node generated matrices for the shared hypernetwork are reused by
  // every chunk.
  std::vector<Tensor> shared_mats;
  if (config.chunk_tying == ChunkTying::Shared) {
    for (std::size_t t = 0; t < edges.size(); ++t) {
      const std::string tp = type_prefix(t);
      Tensor hb = p.get(tp + "hyper_bias");
      shared_mats.push_back(gather_rows(linear(h, p.get(tp + "hyper_weight"), &hb), edges[t].tgt));
    }
  }

  std::vector<Tensor> chunks;
  for (std::size_t c = 0; c < num_chunks; ++c) {
    Tensor h_chunk = num_chunks == 1 ? h : slice_cols(h, c * k, k);
    Tensor acc = Tensor::zeros({g.num_nodes, k});
    bool first = true;
    for (std::size_t t = 0; t < edges.size(); ++t) {
      Tensor mats;
      if (config.chunk_tying == ChunkTying::Shared) {
        mats = shared_mats[t];
      } else {
        const std::string cp = type_prefix(t) + "chunk" + std::to_string(c) + "/";
        const Tensor& input = config.chunk_tying == ChunkTying::ChunkLocal ? h_chunk : h;
        Tensor hb = p.get(cp + "hyper_bias");
        mats = gather_rows(linear(input, p.get(cp + "hyper_weight"), &hb), edges[t].tgt);
      }
      Tensor messages = batched_vecmat(gather_rows(h_chunk, edges[t].src), mats);
      acc = accumulate(acc, segment_sum(messages, edges[t].tgt, g.num_nodes), first);
    }
    chunks.push_back(activate(config.activation, acc));
  }
  return chunks.size() == 1 ? chunks.front() : concat_cols(chunks);
}

Tensor gnn_film_layer(const Tensor& h, const TypedGraph& g, const NormCounts& counts, const LayerParams& p,
                      const CellConfig& config) {
  check_inputs(h, g, &counts, "gnn_film_layer");
  require_self_loops(g, "gnn_film_layer");
  const std::size_t d = config.hidden_dim;
  const bool before = config.film_aggregation == FilmAggregation::Before;
  const auto edges = split_edges(g);
  Tensor acc = Tensor::zeros({g.num_nodes, d});
  bool first = true;
  for (std::size_t t = 0; t < edges.size(); ++t) {
    const std::string tp = type_prefix(t);
    const Tensor& w = p.get(tp + "W");
    check_input_dim(h, w, "gnn_film_layer");
    Tensor film_b = p.get(tp + "film_g/bias");
    Tensor film = linear(h, p.get(tp + "film_g/weight"), &film_b);
    Tensor beta = slice_cols(film, 0, d);
    Tensor gamma = slice_cols(film, d, d);
    Tensor messages = add(mul(gather_rows(matmul(h, w), edges[t].src), gather_rows(gamma, edges[t].tgt)),
                          gather_rows(beta, edges[t].tgt));
    if (before) messages = activate(config.activation, messages);
    acc = accumulate(acc, segment_sum(messages, edges[t].tgt, g.num_nodes), first);
  }
  if (!before) return activate(config.activation, acc);
  for (std::size_t i = 0; i < config.film_post.size(); ++i) {
    const std::string pp = "post" + std::to_string(i) + "/";
    switch (config.film_post[i]) {
      case PostOp::Tanh: acc = ops::tanh(acc); break;
      case PostOp::Linear: {
        Tensor b = p.get(pp + "bias");
        acc = linear(acc, p.get(pp + "weight"), &b);
        break;
      }
      case PostOp::LayerNorm: acc = layer_norm(acc, p.get(pp + "gain"), p.get(pp + "bias")); break;
    }
  }
  return acc;
}

Tensor apply_cell(const Tensor& h, const TypedGraph& g, const NormCounts& counts, const LayerParams& params,
                  const CellConfig& config) {
  switch (config.kind) {
    case CellKind::GGNN: return ggnn_layer(h, g, counts, params, config);
    case CellKind::RGCN: return rgcn_layer(h, g, counts, params, config);
    case CellKind::RGAT: return rgat_layer(h, g, counts, params, config);
    case CellKind::RGIN: return rgin_layer(h, g, counts, params, config);
    case CellKind::GNN_MLP0:
    case CellKind::GNN_MLP1: return gnn_mlp_layer(h, g, counts, params, config);
    case CellKind::RGDCN: return rgdcn_layer(h, g, counts, params, config);
    case CellKind::GNN_FILM: return gnn_film_layer(h, g, counts, params, config);
  }
  throw std::invalid_argument("apply_cell: unknown cell kind");
}

}  // namespace relgnn
