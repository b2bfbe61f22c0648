#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "fgent/matrix.hpp"

namespace fgent {

inline constexpr double kLayerNormEps = 1e-5;
inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;

// Smooth gaussian-error activation and its derivative.
inline double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }
inline double gelu_derivative(double x) {
  constexpr double inv_sqrt_2pi = 0.3989422804014326779;
  double cdf = 0.5 * (1.0 + std::erf(x / std::sqrt(2.0)));
  double pdf = std::exp(-0.5 * x * x) * inv_sqrt_2pi;
  return cdf + x * pdf;
}

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

struct LayerNormParams {
  Matrix gain, bias;  // 1 x h
  explicit LayerNormParams(std::size_t h = 0) : gain(1, h, 1.0), bias(1, h, 0.0) {}
};

struct AttentionParams {
  Matrix wq, wk, wv, wo;  // h x h
  Matrix bq, bk, bv, bo;  // 1 x h
  explicit AttentionParams(std::size_t h = 0)
      : wq(h, h), wk(h, h), wv(h, h), wo(h, h), bq(1, h), bk(1, h), bv(1, h), bo(1, h) {}
};

struct FfnParams {
  Matrix w1, b1, w2, b2;  // h x f, 1 x f, f x h, 1 x h
  FfnParams(std::size_t h = 0, std::size_t f = 0) : w1(h, f), b1(1, f), w2(f, h), b2(1, h) {}
};

struct BlockParams {
  AttentionParams attn;
  LayerNormParams ln1;
  FfnParams ffn;
  LayerNormParams ln2;
  BlockParams(std::size_t h = 0, std::size_t f = 0) : attn(h), ln1(h), ffn(h, f), ln2(h) {}
};

// ---------------------------------------------------------------------------
// Embedding: row i = token_embedding[id_i] + positional_embedding[i].
// Unknown ids fall back to the UNK row; input is truncated to the positional
// table size.
// ---------------------------------------------------------------------------

inline Matrix embed(std::span<const int> token_ids, const Matrix& tok_emb, const Matrix& pos_emb) {
  std::size_t n = std::min(token_ids.size(), pos_emb.rows());
  std::size_t h = tok_emb.cols();
  Matrix x(n, h);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t id = static_cast<std::size_t>(token_ids[i]);
    if (token_ids[i] < 0 || id >= tok_emb.rows()) id = kUnkId;
    for (std::size_t j = 0; j < h; ++j) x(i, j) = tok_emb(id, j) + pos_emb(i, j);
  }
  return x;
}

inline void embed_backward(std::span<const int> token_ids, const Matrix& d_x, Matrix& d_tok_emb,
                           Matrix& d_pos_emb) {
  for (std::size_t i = 0; i < d_x.rows(); ++i) {
    std::size_t id = static_cast<std::size_t>(token_ids[i]);
    if (token_ids[i] < 0 || id >= d_tok_emb.rows()) id = kUnkId;
    for (std::size_t j = 0; j < d_x.cols(); ++j) {
      d_tok_emb(id, j) += d_x(i, j);
      d_pos_emb(i, j) += d_x(i, j);
    }
  }
}

// ---------------------------------------------------------------------------
// Layer normalization (row-wise)
// ---------------------------------------------------------------------------

struct LayerNormCache {
  Matrix normalized;            // x-hat
  std::vector<double> inv_std;  // per row
};

inline Matrix layer_norm(const Matrix& x, const LayerNormParams& p, LayerNormCache* cache = nullptr) {
  const std::size_t n = x.rows(), h = x.cols();
  Matrix out(n, h);
  Matrix normalized(n, h);
  std::vector<double> inv_std(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < h; ++j) mean += x(i, j);
    mean /= static_cast<double>(h);
    double var = 0.0;
    for (std::size_t j = 0; j < h; ++j) {
      double d = x(i, j) - mean;
      var += d * d;
    }
    var /= static_cast<double>(h);
    double is = 1.0 / std::sqrt(var + kLayerNormEps);
    inv_std[i] = is;
    for (std::size_t j = 0; j < h; ++j) {
      double nrm = (x(i, j) - mean) * is;
      normalized(i, j) = nrm;
      out(i, j) = nrm * p.gain(0, j) + p.bias(0, j);
    }
  }
  if (cache) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return out;
}

inline Matrix layer_norm_backward(const Matrix& d_out, const LayerNormParams& p,
                                  const LayerNormCache& cache, LayerNormParams& grads) {
  const std::size_t n = d_out.rows(), h = d_out.cols();
  Matrix d_x(n, h);
  for (std::size_t i = 0; i < n; ++i) {
    double mean_dn = 0.0, mean_dn_nrm = 0.0;
    for (std::size_t j = 0; j < h; ++j) {
      double dn = d_out(i, j) * p.gain(0, j);
      mean_dn += dn;
      mean_dn_nrm += dn * cache.normalized(i, j);
      grads.gain(0, j) += d_out(i, j) * cache.normalized(i, j);
      grads.bias(0, j) += d_out(i, j);
    }
    mean_dn /= static_cast<double>(h);
    mean_dn_nrm /= static_cast<double>(h);
    for (std::size_t j = 0; j < h; ++j) {
      double dn = d_out(i, j) * p.gain(0, j);
      d_x(i, j) = cache.inv_std[i] * (dn - mean_dn - cache.normalized(i, j) * mean_dn_nrm);
    }
  }
  return d_x;
}

// ---------------------------------------------------------------------------
// Multi-head self-attention: scaled dot-product per head, heads concatenated,
// then output-projected.
// ---------------------------------------------------------------------------

struct AttentionCache {
  Matrix input, q, k, v;     // n x h
  std::vector<Matrix> attn;  // per head, n x n softmax rows
  Matrix concat;             // n x h
};

inline Matrix multi_head_attention(const Matrix& x, const AttentionParams& p,
                                   std::size_t num_heads, AttentionCache* cache = nullptr) {
  const std::size_t n = x.rows(), h = x.cols();
  assert(h % num_heads == 0);
  const std::size_t dh = h / num_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Matrix q = matmul(x, p.wq);
  add_row_bias(q, p.bq);
  Matrix k = matmul(x, p.wk);
  add_row_bias(k, p.bk);
  Matrix v = matmul(x, p.wv);
  add_row_bias(v, p.bv);

  Matrix concat(n, h);
  std::vector<Matrix> attn_all;
  attn_all.reserve(num_heads);
  for (std::size_t head = 0; head < num_heads; ++head) {
    const std::size_t off = head * dh;
    Matrix attn(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      double row_max = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t d = 0; d < dh; ++d) s += q(i, off + d) * k(j, off + d);
        attn(i, j) = s * scale;
        row_max = std::max(row_max, attn(i, j));
      }
      double denom = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        attn(i, j) = std::exp(attn(i, j) - row_max);
        denom += attn(i, j);
      }
      for (std::size_t j = 0; j < n; ++j) attn(i, j) /= denom;
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t d = 0; d < dh; ++d) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += attn(i, j) * v(j, off + d);
        concat(i, off + d) = sum;
      }
    attn_all.push_back(std::move(attn));
  }

  Matrix out = matmul(concat, p.wo);
  add_row_bias(out, p.bo);
  if (cache) {
    cache->input = x;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->attn = std::move(attn_all);
    cache->concat = std::move(concat);
  }
  return out;
}

inline Matrix multi_head_attention_backward(const Matrix& d_out, const AttentionParams& p,
                                            std::size_t num_heads, const AttentionCache& cache,
                                            AttentionParams& grads) {
  const std::size_t n = d_out.rows(), h = d_out.cols();
  const std::size_t dh = h / num_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  grads.wo += matmul_tn(cache.concat, d_out);
  grads.bo += column_sums(d_out);
  Matrix d_concat = matmul_nt(d_out, p.wo);

  Matrix d_q(n, h), d_k(n, h), d_v(n, h);
  for (std::size_t head = 0; head < num_heads; ++head) {
    const std::size_t off = head * dh;
    const Matrix& attn = cache.attn[head];

    // d_attn = d_concat_head * v_headᵀ ; d_v_head = attnᵀ * d_concat_head
    Matrix d_attn(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0;
        for (std::size_t d = 0; d < dh; ++d) sum += d_concat(i, off + d) * cache.v(j, off + d);
        d_attn(i, j) = sum;
      }
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t d = 0; d < dh; ++d) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += attn(i, j) * d_concat(i, off + d);
        d_v(j, off + d) = sum;
      }

    // softmax rows: d_s = attn ∘ (d_attn - rowdot(d_attn, attn))
    Matrix d_scores(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += d_attn(i, j) * attn(i, j);
      for (std::size_t j = 0; j < n; ++j) d_scores(i, j) = attn(i, j) * (d_attn(i, j) - dot);
    }

    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t d = 0; d < dh; ++d) {
        double sq = 0.0, sk = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          sq += d_scores(i, j) * cache.k(j, off + d);
          sk += d_scores(j, i) * cache.q(j, off + d);
        }
        d_q(i, off + d) = sq * scale;
        d_k(i, off + d) = sk * scale;
      }
  }

  grads.wq += matmul_tn(cache.input, d_q);
  grads.bq += column_sums(d_q);
  grads.wk += matmul_tn(cache.input, d_k);
  grads.bk += column_sums(d_k);
  grads.wv += matmul_tn(cache.input, d_v);
  grads.bv += column_sums(d_v);

  Matrix d_x = matmul_nt(d_q, p.wq);
  d_x += matmul_nt(d_k, p.wk);
  d_x += matmul_nt(d_v, p.wv);
  return d_x;
}

// ---------------------------------------------------------------------------
// Position-wise feed-forward
// ---------------------------------------------------------------------------

struct FfnCache {
  Matrix input, pre_act, act;
};

inline Matrix position_ffn(const Matrix& x, const FfnParams& p, FfnCache* cache = nullptr) {
  Matrix pre = matmul(x, p.w1);
  add_row_bias(pre, p.b1);
  Matrix act = pre;
  for (auto& v : act.data()) v = gelu(v);
  Matrix out = matmul(act, p.w2);
  add_row_bias(out, p.b2);
  if (cache) {
    cache->input = x;
    cache->pre_act = std::move(pre);
    cache->act = std::move(act);
  }
  return out;
}

inline Matrix position_ffn_backward(const Matrix& d_out, const FfnParams& p, const FfnCache& cache,
                                    FfnParams& grads) {
  grads.w2 += matmul_tn(cache.act, d_out);
  grads.b2 += column_sums(d_out);
  Matrix d_act = matmul_nt(d_out, p.w2);
  Matrix d_pre = d_act;
  for (std::size_t i = 0; i < d_pre.data().size(); ++i)
    d_pre.data()[i] *= gelu_derivative(cache.pre_act.data()[i]);
  grads.w1 += matmul_tn(cache.input, d_pre);
  grads.b1 += column_sums(d_pre);
  return matmul_nt(d_pre, p.w1);
}

// ---------------------------------------------------------------------------
// Encoder block: residual around each sub-layer, then layer norm (post-LN).
// ---------------------------------------------------------------------------

struct BlockCache {
  AttentionCache attn;
  LayerNormCache ln1;
  FfnCache ffn;
  LayerNormCache ln2;
};

inline Matrix transformer_block(const Matrix& x, const BlockParams& p, std::size_t num_heads,
                                BlockCache* cache = nullptr) {
  Matrix attn_out = multi_head_attention(x, p.attn, num_heads, cache ? &cache->attn : nullptr);
  attn_out += x;
  Matrix y1 = layer_norm(attn_out, p.ln1, cache ? &cache->ln1 : nullptr);
  Matrix ffn_out = position_ffn(y1, p.ffn, cache ? &cache->ffn : nullptr);
  ffn_out += y1;
  return layer_norm(ffn_out, p.ln2, cache ? &cache->ln2 : nullptr);
}

inline Matrix transformer_block_backward(const Matrix& d_out, const BlockParams& p,
                                         std::size_t num_heads, const BlockCache& cache,
                                         BlockParams& grads) {
  Matrix d_b = layer_norm_backward(d_out, p.ln2, cache.ln2, grads.ln2);
  Matrix d_y1 = position_ffn_backward(d_b, p.ffn, cache.ffn, grads.ffn);
  d_y1 += d_b;  // residual
  Matrix d_a = layer_norm_backward(d_y1, p.ln1, cache.ln1, grads.ln1);
  Matrix d_x = multi_head_attention_backward(d_a, p.attn, num_heads, cache.attn, grads.attn);
  d_x += d_a;  // residual
  return d_x;
}

}  // namespace fgent
