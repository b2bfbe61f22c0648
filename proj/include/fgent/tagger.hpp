#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fgent/corpus.hpp"
#include "fgent/crf.hpp"
#include "fgent/errors.hpp"
#include "fgent/matrix.hpp"
#include "fgent/ontology.hpp"
#include "fgent/serialize.hpp"
#include "fgent/transformer.hpp"

namespace fgent {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct TaggerConfig {
  std::size_t vocab_size = 0;
  std::size_t hidden = 128;
  std::size_t num_layers = 2;
  // 12 heads as reported elsewhere does not divide hidden size 128; the
  // default is 8 and 12 is accepted with a compatible hidden size.
  std::size_t num_heads = 8;
  std::size_t ffn_dims = 0;  // 0 -> 4 * hidden
  std::size_t epochs = 10;
  std::size_t batch_size = 8;
  std::size_t max_seq_len = 128;
  // From-scratch default; 2e-5 is the fine-tuning rate, available via config.
  double learning_rate = 1e-3;
  double weight_decay = 0.01;
  std::uint64_t seed = 1;

  std::size_t ffn() const { return ffn_dims ? ffn_dims : 4 * hidden; }

  void validate() const {
    if (vocab_size < 2) throw config_error("vocab_size must cover PAD and UNK");
    if (hidden == 0 || num_layers == 0 || num_heads == 0 || epochs == 0 || batch_size == 0 ||
        max_seq_len == 0)
      throw config_error("tagger counts must be >= 1");
    if (hidden % num_heads != 0)
      throw config_error("hidden (" + std::to_string(hidden) + ") must be divisible by num_heads (" +
                         std::to_string(num_heads) + ")");
    if (!(learning_rate > 0)) throw config_error("learning_rate must be > 0");
    if (weight_decay < 0) throw config_error("weight_decay must be >= 0");
  }
};

// ---------------------------------------------------------------------------
// Vocabulary: one token per line, line number = id, ids 0|1 reserved.
// ---------------------------------------------------------------------------

class Vocabulary {
 public:
  static constexpr const char* kPadToken = "<pad>";
  static constexpr const char* kUnkToken = "<unk>";

  Vocabulary() {
    tokens_ = {kPadToken, kUnkToken};
    reindex();
  }

  static Vocabulary build(const std::vector<const Document*>& docs) {
    std::set<std::string> unique;
    for (const Document* doc : docs)
      for (const auto& seg : doc->segments)
        for (const auto& tok : seg.tokens) unique.insert(tok.text);
    Vocabulary v;
    for (const auto& t : unique)
      if (t != kPadToken && t != kUnkToken) v.tokens_.push_back(t);
    v.reindex();
    return v;
  }

  int id(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? kUnkId : it->second;
  }

  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }

  void save(std::ostream& os) const {
    for (const auto& t : tokens_) os << t << '\n';
  }

  static Vocabulary load(std::istream& is) {
    Vocabulary v;
    v.tokens_.clear();
    std::string line;
    while (std::getline(is, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      v.tokens_.push_back(line);
    }
    if (v.tokens_.size() < 2)
      throw data_error("vocabulary must reserve ids 0 (PAD) and 1 (UNK)");
    v.reindex();
    return v;
  }

 private:
  void reindex() {
    index_.clear();
    for (std::size_t i = 0; i < tokens_.size(); ++i)
      index_.emplace(tokens_[i], static_cast<int>(i));
  }

  std::vector<std::string> tokens_;
  std::map<std::string, int> index_;
};

// ---------------------------------------------------------------------------
// Label alphabets, one per tagging task; index 0 is always O.
// ---------------------------------------------------------------------------

struct LabelAlphabet {
  std::vector<std::string> labels{std::string(kOutsideLabel)};
  std::map<std::string, int> index{{std::string(kOutsideLabel), 0}};

  static LabelAlphabet from_set(const std::set<std::string>& seen) {
    LabelAlphabet a;
    for (const auto& l : seen)
      if (l != kOutsideLabel) {
        a.index.emplace(l, static_cast<int>(a.labels.size()));
        a.labels.push_back(l);
      }
    return a;
  }

  int id(const std::string& label) const {
    auto it = index.find(label);
    if (it == index.end()) throw data_error("label '" + label + "' not in alphabet");
    return it->second;
  }

  std::size_t size() const { return labels.size(); }
};

using TaskAlphabets = std::array<LabelAlphabet, kTagTasks>;

inline TaskAlphabets build_alphabets(std::span<const TagTracks> corpus) {
  std::array<std::set<std::string>, kTagTasks> seen;
  for (const auto& tracks : corpus)
    for (const auto& seg : tracks.segments)
      for (std::size_t k = 0; k < kTagTasks; ++k)
        for (const auto& l : seg.tracks[k]) seen[k].insert(l);
  TaskAlphabets out;
  for (std::size_t k = 0; k < kTagTasks; ++k) out[k] = LabelAlphabet::from_set(seen[k]);
  return out;
}

// One training sequence per segment: token ids plus gold label ids per task.
struct TaggedSequence {
  std::vector<int> token_ids;
  std::array<std::vector<int>, kTagTasks> labels;
};

inline std::vector<TaggedSequence> encode_examples(const Document& doc, const TagTracks& tracks,
                                                   const Vocabulary& vocab,
                                                   const TaskAlphabets& alphabets,
                                                   std::size_t max_seq_len) {
  std::vector<TaggedSequence> out;
  for (std::size_t s = 0; s < doc.segments.size(); ++s) {
    const auto& seg = doc.segments[s];
    if (seg.tokens.empty()) continue;
    TaggedSequence ex;
    std::size_t n = std::min(seg.tokens.size(), max_seq_len);
    for (std::size_t t = 0; t < n; ++t) ex.token_ids.push_back(vocab.id(seg.tokens[t].text));
    for (std::size_t k = 0; k < kTagTasks; ++k)
      for (std::size_t t = 0; t < n; ++t)
        ex.labels[k].push_back(alphabets[k].id(tracks.segments[s].tracks[k][t]));
    out.push_back(std::move(ex));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

struct TaskHead {
  LabelAlphabet alphabet;
  Matrix emission;  // hidden x label_count
  CrfParams crf;
};

struct EncodeCache {
  std::vector<BlockCache> blocks;
};

class TaggerModel {
 public:
  TaggerModel() = default;

  // Randomly initialized model; deterministic for a fixed seed.
  TaggerModel(const TaggerConfig& cfg, TaskAlphabets alphabets, std::mt19937_64& rng)
      : cfg_(cfg),
        tok_emb_(cfg.vocab_size, cfg.hidden),
        pos_emb_(cfg.max_seq_len, cfg.hidden) {
    std::normal_distribution<double> normal(0.0, 1.0);
    auto fill = [&](Matrix& m, double stddev) {
      for (auto& v : m.data()) v = stddev * normal(rng);
    };
    fill(tok_emb_, 0.02);
    fill(pos_emb_, 0.02);
    for (std::size_t l = 0; l < cfg.num_layers; ++l) {
      BlockParams block(cfg.hidden, cfg.ffn());
      double proj_std = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
      fill(block.attn.wq, proj_std);
      fill(block.attn.wk, proj_std);
      fill(block.attn.wv, proj_std);
      fill(block.attn.wo, proj_std);
      fill(block.ffn.w1, proj_std);
      fill(block.ffn.w2, 1.0 / std::sqrt(static_cast<double>(cfg.ffn())));
      blocks_.push_back(std::move(block));
    }
    for (std::size_t k = 0; k < kTagTasks; ++k) {
      TaskHead head;
      head.alphabet = std::move(alphabets[k]);
      head.emission = Matrix(cfg.hidden, head.alphabet.size());
      fill(head.emission, 1.0 / std::sqrt(static_cast<double>(cfg.hidden)));
      head.crf = CrfParams(head.alphabet.size());
      heads_[k] = std::move(head);
    }
  }

  static TaggerModel zeros_like(const TaggerModel& m) {
    TaggerModel z;
    z.cfg_ = m.cfg_;
    z.tok_emb_ = Matrix(m.tok_emb_.rows(), m.tok_emb_.cols());
    z.pos_emb_ = Matrix(m.pos_emb_.rows(), m.pos_emb_.cols());
    for (std::size_t l = 0; l < m.blocks_.size(); ++l) {
      BlockParams zb(m.cfg_.hidden, m.cfg_.ffn());
      zb.ln1.gain.fill(0.0);  // gain defaults to 1; gradients start at zero
      zb.ln2.gain.fill(0.0);
      z.blocks_.push_back(std::move(zb));
    }
    for (std::size_t k = 0; k < kTagTasks; ++k) {
      z.heads_[k].alphabet = m.heads_[k].alphabet;
      z.heads_[k].emission = Matrix(m.heads_[k].emission.rows(), m.heads_[k].emission.cols());
      z.heads_[k].crf = CrfParams(m.heads_[k].alphabet.size());
    }
    return z;
  }

  const TaggerConfig& config() const { return cfg_; }
  const TaskHead& head(std::size_t task) const { return heads_[task]; }
  TaskHead& head(std::size_t task) { return heads_[task]; }
  Matrix& token_embeddings() { return tok_emb_; }
  Matrix& positional_embeddings() { return pos_emb_; }
  const Matrix& token_embeddings() const { return tok_emb_; }
  const Matrix& positional_embeddings() const { return pos_emb_; }
  std::vector<BlockParams>& blocks() { return blocks_; }
  const std::vector<BlockParams>& blocks() const { return blocks_; }

  Matrix embed_input(std::span<const int> ids) const { return embed(ids, tok_emb_, pos_emb_); }

  // Embedding + transformer stack. Caches are filled when requested so the
  // backward pass can run.
  Matrix encode(std::span<const int> ids, EncodeCache* cache = nullptr) const {
    Matrix x = embed_input(ids);
    if (cache) cache->blocks.resize(blocks_.size());
    for (std::size_t l = 0; l < blocks_.size(); ++l)
      x = transformer_block(x, blocks_[l], cfg_.num_heads, cache ? &cache->blocks[l] : nullptr);
    return x;
  }

  Matrix task_emissions(std::size_t task, const Matrix& states) const {
    return matmul(states, heads_[task].emission);
  }

  // Fixed deterministic parameter order shared by the optimizer and the
  // serialization code.
  void for_each_parameter(const std::function<void(const std::string&, Matrix&)>& fn) {
    fn("tok_emb", tok_emb_);
    fn("pos_emb", pos_emb_);
    for (std::size_t l = 0; l < blocks_.size(); ++l) {
      std::string p = "block" + std::to_string(l) + ".";
      auto& b = blocks_[l];
      fn(p + "attn.wq", b.attn.wq);
      fn(p + "attn.bq", b.attn.bq);
      fn(p + "attn.wk", b.attn.wk);
      fn(p + "attn.bk", b.attn.bk);
      fn(p + "attn.wv", b.attn.wv);
      fn(p + "attn.bv", b.attn.bv);
      fn(p + "attn.wo", b.attn.wo);
      fn(p + "attn.bo", b.attn.bo);
      fn(p + "ln1.gain", b.ln1.gain);
      fn(p + "ln1.bias", b.ln1.bias);
      fn(p + "ffn.w1", b.ffn.w1);
      fn(p + "ffn.b1", b.ffn.b1);
      fn(p + "ffn.w2", b.ffn.w2);
      fn(p + "ffn.b2", b.ffn.b2);
      fn(p + "ln2.gain", b.ln2.gain);
      fn(p + "ln2.bias", b.ln2.bias);
    }
    for (std::size_t k = 0; k < kTagTasks; ++k) {
      std::string p = "task" + std::to_string(k) + ".";
      fn(p + "emission", heads_[k].emission);
      fn(p + "transitions", heads_[k].crf.transitions);
      fn(p + "start", heads_[k].crf.start);
      fn(p + "end", heads_[k].crf.end);
    }
  }

  void save_into(ParamContainer& c) const {
    c.meta["format"] = "fgent.tagger";
    c.meta["vocab_size"] = std::to_string(cfg_.vocab_size);
    c.meta["hidden"] = std::to_string(cfg_.hidden);
    c.meta["num_layers"] = std::to_string(cfg_.num_layers);
    c.meta["num_heads"] = std::to_string(cfg_.num_heads);
    c.meta["ffn_dims"] = std::to_string(cfg_.ffn());
    c.meta["epochs"] = std::to_string(cfg_.epochs);
    c.meta["batch_size"] = std::to_string(cfg_.batch_size);
    c.meta["max_seq_len"] = std::to_string(cfg_.max_seq_len);
    c.meta["learning_rate"] = format_double(cfg_.learning_rate);
    c.meta["weight_decay"] = format_double(cfg_.weight_decay);
    c.meta["seed"] = std::to_string(cfg_.seed);
    for (std::size_t k = 0; k < kTagTasks; ++k) {
      std::string joined;
      for (const auto& l : heads_[k].alphabet.labels) {
        if (!joined.empty()) joined += '\n';
        joined += l;
      }
      c.meta["task" + std::to_string(k) + ".labels"] = joined;
    }
    const_cast<TaggerModel*>(this)->for_each_parameter(
        [&](const std::string& name, Matrix& m) { c.matrices[name] = m; });
  }

  static TaggerModel load_from(const ParamContainer& c) {
    if (c.require_meta("format") != "fgent.tagger")
      throw data_error("container does not hold a tagger model");
    TaggerModel m;
    m.cfg_.vocab_size = std::stoull(c.require_meta("vocab_size"));
    m.cfg_.hidden = std::stoull(c.require_meta("hidden"));
    m.cfg_.num_layers = std::stoull(c.require_meta("num_layers"));
    m.cfg_.num_heads = std::stoull(c.require_meta("num_heads"));
    m.cfg_.ffn_dims = std::stoull(c.require_meta("ffn_dims"));
    m.cfg_.epochs = std::stoull(c.require_meta("epochs"));
    m.cfg_.batch_size = std::stoull(c.require_meta("batch_size"));
    m.cfg_.max_seq_len = std::stoull(c.require_meta("max_seq_len"));
    m.cfg_.learning_rate = std::stod(c.require_meta("learning_rate"));
    m.cfg_.weight_decay = std::stod(c.require_meta("weight_decay"));
    m.cfg_.seed = std::stoull(c.require_meta("seed"));
    m.tok_emb_ = Matrix(m.cfg_.vocab_size, m.cfg_.hidden);
    m.pos_emb_ = Matrix(m.cfg_.max_seq_len, m.cfg_.hidden);
    m.blocks_.assign(m.cfg_.num_layers, BlockParams(m.cfg_.hidden, m.cfg_.ffn()));
    for (std::size_t k = 0; k < kTagTasks; ++k) {
      LabelAlphabet a;
      a.labels.clear();
      a.index.clear();
      for (auto& l : split(c.require_meta("task" + std::to_string(k) + ".labels"), '\n')) {
        a.index.emplace(l, static_cast<int>(a.labels.size()));
        a.labels.push_back(std::move(l));
      }
      if (a.labels.empty() || a.labels[0] != kOutsideLabel)
        throw data_error("task alphabet must start with O");
      m.heads_[k].alphabet = std::move(a);
      m.heads_[k].emission = Matrix(m.cfg_.hidden, m.heads_[k].alphabet.size());
      m.heads_[k].crf = CrfParams(m.heads_[k].alphabet.size());
    }
    m.for_each_parameter(
        [&](const std::string& name, Matrix& mat) {
          const Matrix& stored = c.require_matrix(name);
          if (stored.rows() != mat.rows() || stored.cols() != mat.cols())
            throw data_error("matrix '" + name + "' has unexpected shape");
          mat = stored;
        });
    return m;
  }

  static std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
  }

 private:
  TaggerConfig cfg_;
  Matrix tok_emb_;
  Matrix pos_emb_;
  std::vector<BlockParams> blocks_;
  std::array<TaskHead, kTagTasks> heads_;
};

// ---------------------------------------------------------------------------
// Loss: summed negative CRF log-likelihood over the four tasks.
// ---------------------------------------------------------------------------

inline double sequence_loss(const TaggerModel& model, const TaggedSequence& ex) {
  Matrix states = model.encode(ex.token_ids);
  double loss = 0.0;
  for (std::size_t k = 0; k < kTagTasks; ++k) {
    Matrix emissions = model.task_emissions(k, states);
    double log_z = crf_log_partition(emissions, model.head(k).crf);
    loss += log_z - crf_path_score(emissions, model.head(k).crf, ex.labels[k]);
  }
  return loss;
}

// Accumulates analytic gradients into `grads` (shapes from zeros_like).
inline double sequence_loss_and_grad(const TaggerModel& model, const TaggedSequence& ex,
                                     TaggerModel& grads) {
  EncodeCache cache;
  Matrix states = model.encode(ex.token_ids, &cache);
  Matrix d_states(states.rows(), states.cols());
  double loss = 0.0;
  for (std::size_t k = 0; k < kTagTasks; ++k) {
    Matrix emissions = model.task_emissions(k, states);
    CrfGradients cg;
    loss += crf_nll_and_grad(emissions, model.head(k).crf, ex.labels[k], cg);
    grads.head(k).emission += matmul_tn(states, cg.d_emissions);
    grads.head(k).crf.transitions += cg.d_transitions;
    grads.head(k).crf.start += cg.d_start;
    grads.head(k).crf.end += cg.d_end;
    d_states += matmul_nt(cg.d_emissions, model.head(k).emission);
  }
  Matrix d_x = d_states;
  for (std::size_t l = model.blocks().size(); l-- > 0;)
    d_x = transformer_block_backward(d_x, model.blocks()[l], model.config().num_heads,
                                     cache.blocks[l], grads.blocks()[l]);
  embed_backward(ex.token_ids, d_x, grads.token_embeddings(), grads.positional_embeddings());
  return loss;
}

// ---------------------------------------------------------------------------
// Training: AdamW over mini-batches, deterministic for a fixed seed.
// ---------------------------------------------------------------------------

struct TrainLog {
  std::vector<double> epoch_loss;  // mean per-sequence loss
};

namespace detail {

struct AdamState {
  std::vector<Matrix> m, v;
  std::uint64_t step = 0;
};

inline void adamw_step(TaggerModel& model, TaggerModel& grads, AdamState& state, double lr,
                       double weight_decay) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  ++state.step;
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  std::size_t idx = 0;
  std::vector<Matrix*> params, gmats;
  model.for_each_parameter([&](const std::string&, Matrix& m) { params.push_back(&m); });
  grads.for_each_parameter([&](const std::string&, Matrix& m) { gmats.push_back(&m); });
  if (state.m.empty()) {
    for (Matrix* p : params) {
      state.m.emplace_back(p->rows(), p->cols());
      state.v.emplace_back(p->rows(), p->cols());
    }
  }
  for (; idx < params.size(); ++idx) {
    auto& theta = params[idx]->data();
    auto& g = gmats[idx]->data();
    auto& m = state.m[idx].data();
    auto& v = state.v[idx].data();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      theta[i] -= lr * (mhat / (std::sqrt(vhat) + eps) + weight_decay * theta[i]);
    }
  }
}

}  // namespace detail

inline TaggerModel train_tagger(const std::vector<TaggedSequence>& corpus, const TaggerConfig& cfg,
                                TaskAlphabets alphabets, TrainLog* log = nullptr) {
  if (corpus.empty()) throw data_error("training corpus is empty");
  std::mt19937_64 rng(cfg.seed);
  TaggerModel model(cfg, std::move(alphabets), rng);
  TaggerModel grads = TaggerModel::zeros_like(model);
  detail::AdamState adam;

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      std::size_t b_end = std::min(order.size(), b + cfg.batch_size);
      grads.for_each_parameter([](const std::string&, Matrix& m) { m.fill(0.0); });
      double batch_loss = 0.0;
      for (std::size_t i = b; i < b_end; ++i)
        batch_loss += sequence_loss_and_grad(model, corpus[order[i]], grads);
      if (!std::isfinite(batch_loss))
        throw data_error("training loss is not finite (epoch " + std::to_string(epoch + 1) +
                         ", batch " + std::to_string(b / cfg.batch_size + 1) +
                         "); try a lower learning rate");
      double inv = 1.0 / static_cast<double>(b_end - b);
      grads.for_each_parameter([&](const std::string&, Matrix& m) { m *= inv; });
      detail::adamw_step(model, grads, adam, cfg.learning_rate, cfg.weight_decay);
      epoch_loss += batch_loss;
    }
    if (log) log->epoch_loss.push_back(epoch_loss / static_cast<double>(corpus.size()));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Prediction: encode, per-task Viterbi, confidence from posterior marginals,
// mention assembly, ontology correction. Long segments are decoded in
// non-overlapping windows aligned to token boundaries.
// ---------------------------------------------------------------------------

struct PredictDiagnostics {
  std::vector<std::string> warnings;
  std::size_t unresolved_types = 0;
  std::size_t ambiguous_types = 0;
};

inline std::vector<Mention> predict(const TaggerModel& model, const Document& doc,
                                    const Vocabulary& vocab, const TypeHierarchy& hierarchy,
                                    PredictDiagnostics* diag = nullptr) {
  TagTracks tracks;
  tracks.segments.resize(doc.segments.size());
  TokenConfidences confidences(doc.segments.size());
  const std::size_t window = model.config().max_seq_len;

  for (std::size_t s = 0; s < doc.segments.size(); ++s) {
    const auto& seg = doc.segments[s];
    auto& seg_tags = tracks.segments[s];
    for (auto& tr : seg_tags.tracks) tr.reserve(seg.tokens.size());
    confidences[s].reserve(seg.tokens.size());

    for (std::size_t w = 0; w < seg.tokens.size(); w += window) {
      std::size_t w_end = std::min(seg.tokens.size(), w + window);
      std::vector<int> ids;
      ids.reserve(w_end - w);
      for (std::size_t t = w; t < w_end; ++t) ids.push_back(vocab.id(seg.tokens[t].text));

      Matrix states = model.encode(ids);
      std::size_t n = ids.size();
      std::vector<double> token_conf(n, 1.0);
      for (std::size_t k = 0; k < kTagTasks; ++k) {
        Matrix emissions = model.task_emissions(k, states);
        ViterbiResult vit = viterbi_decode(emissions, model.head(k).crf);
        Matrix marginals = crf_marginals(emissions, model.head(k).crf);
        for (std::size_t t = 0; t < n; ++t) {
          seg_tags.tracks[k].push_back(model.head(k).alphabet.labels[vit.labels[t]]);
          token_conf[t] = std::min(token_conf[t], marginals(t, vit.labels[t]));
        }
      }
      confidences[s].insert(confidences[s].end(), token_conf.begin(), token_conf.end());
    }
  }

  std::vector<Mention> mentions = from_iob(doc, tracks, confidences);
  if (!hierarchy.empty()) {
    for (auto& m : mentions) {
      CorrectionResult r = correct_type(m.type_path, hierarchy);
      if (diag) {
        if (r.outcome == CorrectionOutcome::unresolved) {
          ++diag->unresolved_types;
          diag->warnings.push_back("type '" + m.type_path.str() + "' for '" + m.text +
                                   "' not found in ontology; kept as-is");
        } else if (r.ambiguous) {
          ++diag->ambiguous_types;
          diag->warnings.push_back("ambiguous leaf '" + m.type_path.last() + "' for '" + m.text +
                                   "'; chose " + r.path.str());
        }
      }
      m.type_path = r.path;
    }
  }
  return mentions;
}

}  // namespace fgent
