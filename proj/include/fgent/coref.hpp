#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fgent/corpus.hpp"
#include "fgent/errors.hpp"
#include "fgent/matrix.hpp"
#include "fgent/serialize.hpp"
#include "fgent/text.hpp"

namespace fgent {

enum class MentionKind { named, nominal, pronominal };

struct CandidateMention {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string text;
  MentionKind kind = MentionKind::named;
  std::size_t head_token = 0;  // document-global token index
  // context carried along for feature extraction
  std::string head_text;
  std::size_t segment = 0;
  std::optional<TypePath> type_path;
};

struct EntityCluster {
  std::string entity_id;
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // ordered by start
};

// ---------------------------------------------------------------------------
// Lexicons. Shipped as data files (one surface form per line); agreement rows
// are word TAB gender(m|f|n|?) TAB number(s|p|?).
// ---------------------------------------------------------------------------

struct CorefLexicons {
  std::set<std::string> pronouns;
  std::set<std::string> determiners;
  std::map<std::string, std::pair<char, char>> agreement;

  static std::set<std::string> load_wordlist(std::istream& is) {
    std::set<std::string> out;
    std::string line;
    while (std::getline(is, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      auto t = trim(line);
      if (!t.empty() && t.front() != '#') out.insert(ascii_lower(t));
    }
    return out;
  }

  void load_agreement(std::istream& is) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      auto t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      auto cols = split(t, '\t');
      if (cols.size() != 3 || cols[1].size() != 1 || cols[2].size() != 1)
        throw format_error("expected word<TAB>gender<TAB>number", line_no);
      agreement[ascii_lower(cols[0])] = {cols[1][0], cols[2][0]};
    }
  }

  // Built-in minimal English lists; the data files extend these.
  static CorefLexicons defaults() {
    CorefLexicons lex;
    for (const char* p : {"he", "him", "his", "she", "her", "hers", "it", "its", "they", "them",
                          "their", "theirs", "himself", "herself", "itself", "themselves", "who",
                          "whom", "i", "me", "my", "we", "us", "our", "you", "your"})
      lex.pronouns.insert(p);
    for (const char* d : {"the", "a", "an", "this", "that", "these", "those"})
      lex.determiners.insert(d);
    auto put = [&](const char* w, char g, char n) { lex.agreement[w] = {g, n}; };
    put("he", 'm', 's');
    put("him", 'm', 's');
    put("his", 'm', 's');
    put("himself", 'm', 's');
    put("she", 'f', 's');
    put("her", 'f', 's');
    put("hers", 'f', 's');
    put("herself", 'f', 's');
    put("it", 'n', 's');
    put("its", 'n', 's');
    put("itself", 'n', 's');
    put("they", '?', 'p');
    put("them", '?', 'p');
    put("their", '?', 'p');
    put("themselves", '?', 'p');
    put("this", '?', 's');
    put("that", '?', 's');
    put("these", '?', 'p');
    put("those", '?', 'p');
    return lex;
  }
};

// ---------------------------------------------------------------------------
// Candidate detection: tagged mentions, pronoun-lexicon tokens, and
// determiner + noun-run nominals, deduplicated by span.
// ---------------------------------------------------------------------------

namespace detail {

struct FlatToken {
  const Token* token;
  std::size_t segment;
  std::size_t global_index;
  std::size_t index_in_segment;
};

inline std::vector<FlatToken> flatten_tokens(const Document& doc) {
  std::vector<FlatToken> out;
  std::size_t g = 0;
  for (std::size_t s = 0; s < doc.segments.size(); ++s)
    for (std::size_t t = 0; t < doc.segments[s].tokens.size(); ++t)
      out.push_back({&doc.segments[s].tokens[t], s, g++, t});
  return out;
}

inline bool is_alpha_word(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalpha(static_cast<unsigned char>(c))) return false;
  return true;
}

inline bool starts_capitalized(std::string_view s) {
  return !s.empty() && std::isupper(static_cast<unsigned char>(s[0]));
}

}  // namespace detail

inline std::vector<CandidateMention> detect_candidates(const Document& doc,
                                                       std::span<const Mention> tagged,
                                                       const CorefLexicons& lex) {
  auto tokens = detail::flatten_tokens(doc);
  std::map<std::pair<std::size_t, std::size_t>, CandidateMention> by_span;

  auto head_in_pronouns = [&](const detail::FlatToken& ft) {
    return lex.pronouns.count(ascii_lower(ft.token->text)) != 0;
  };
  auto kind_for = [&](const detail::FlatToken& head, MentionKind fallback) {
    return head_in_pronouns(head) ? MentionKind::pronominal : fallback;
  };
  auto add = [&](CandidateMention c) { by_span.emplace(std::make_pair(c.start, c.end), std::move(c)); };

  // (a) tagged mentions, with kind derived from the mention class but kept
  // consistent with the pronoun lexicon
  for (const auto& m : tagged) {
    const detail::FlatToken* head = nullptr;
    for (const auto& ft : tokens)
      if (ft.token->start >= m.start && ft.token->end <= m.end) head = &ft;
    if (!head) continue;  // not token-aligned; skip rather than guess
    MentionKind fallback = m.mention_class == MentionClass::NOM ? MentionKind::nominal
                                                                : MentionKind::named;
    CandidateMention c;
    c.start = m.start;
    c.end = m.end;
    c.text = m.text;
    c.kind = m.mention_class == MentionClass::PRO ? kind_for(*head, MentionKind::nominal)
                                                  : kind_for(*head, fallback);
    c.head_token = head->global_index;
    c.head_text = head->token->text;
    c.segment = head->segment;
    c.type_path = m.type_path;
    add(std::move(c));
  }

  // (b) every pronoun-lexicon token
  for (const auto& ft : tokens) {
    if (!head_in_pronouns(ft)) continue;
    CandidateMention c;
    c.start = ft.token->start;
    c.end = ft.token->end;
    c.text = ft.token->text;
    c.kind = MentionKind::pronominal;
    c.head_token = ft.global_index;
    c.head_text = ft.token->text;
    c.segment = ft.segment;
    add(std::move(c));
  }

  // (c) determiner followed by a short run of lower-case alphabetic tokens
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& det = tokens[i];
    if (!lex.determiners.count(ascii_lower(det.token->text))) continue;
    std::size_t last = i;
    for (std::size_t j = i + 1; j < tokens.size() && j <= i + 3; ++j) {
      const auto& ft = tokens[j];
      if (ft.segment != det.segment) break;
      std::string low = ascii_lower(ft.token->text);
      if (!detail::is_alpha_word(ft.token->text) || lex.determiners.count(low) ||
          lex.pronouns.count(low) || detail::starts_capitalized(ft.token->text))
        break;
      last = j;
    }
    if (last == i) continue;
    CandidateMention c;
    c.start = det.token->start;
    c.end = tokens[last].token->end;
    c.kind = MentionKind::nominal;
    c.head_token = tokens[last].global_index;
    c.head_text = tokens[last].token->text;
    c.segment = det.segment;
    {
      const Segment& seg = doc.segments[det.segment];
      c.text = span_text(seg, det.index_in_segment, tokens[last].index_in_segment);
    }
    add(std::move(c));
  }

  // (d) capitalized runs not opening a segment (position heuristic)
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!detail::starts_capitalized(tokens[i].token->text) ||
        !detail::is_alpha_word(tokens[i].token->text))
      continue;
    if (i > 0 && tokens[i - 1].segment == tokens[i].segment &&
        detail::starts_capitalized(tokens[i - 1].token->text))
      continue;  // not the run start
    std::size_t last = i;
    while (last + 1 < tokens.size() && tokens[last + 1].segment == tokens[i].segment &&
           detail::is_alpha_word(tokens[last + 1].token->text) &&
           detail::starts_capitalized(tokens[last + 1].token->text))
      ++last;
    bool segment_initial = tokens[i].index_in_segment == 0;
    if (segment_initial && last == i) continue;  // likely just sentence case
    if (lex.pronouns.count(ascii_lower(tokens[i].token->text)) && last == i) continue;
    CandidateMention c;
    c.start = tokens[i].token->start;
    c.end = tokens[last].token->end;
    c.kind = kind_for(tokens[last], MentionKind::named);
    c.head_token = tokens[last].global_index;
    c.head_text = tokens[last].token->text;
    c.segment = tokens[i].segment;
    c.text = span_text(doc.segments[tokens[i].segment], tokens[i].index_in_segment,
                       tokens[last].index_in_segment);
    add(std::move(c));
  }

  std::vector<CandidateMention> out;
  out.reserve(by_span.size());
  for (auto& [span, c] : by_span) out.push_back(std::move(c));
  return out;  // map iteration is already (start, end) ordered
}

// ---------------------------------------------------------------------------
// Pair features
// ---------------------------------------------------------------------------

inline constexpr std::size_t kPairFeatureDim = 19;

// Fixed-length feature vector for an ordered candidate pair (a precedes b).
inline std::array<double, kPairFeatureDim> pair_features(const CandidateMention& a,
                                                         const CandidateMention& b,
                                                         const CorefLexicons& lex) {
  std::array<double, kPairFeatureDim> f{};
  std::size_t i = 0;
  f[i++] = a.text == b.text ? 1.0 : 0.0;  // exact string match
  f[i++] = (!a.head_text.empty() && ascii_lower(a.head_text) == ascii_lower(b.head_text))
               ? 1.0
               : 0.0;  // head match
  auto dist = [](std::size_t x, std::size_t y) { return x > y ? x - y : y - x; };
  f[i++] = std::log1p(static_cast<double>(dist(b.head_token, a.head_token)));

  // mention kind pair one-hot (3x3)
  f[i + 3 * static_cast<std::size_t>(a.kind) + static_cast<std::size_t>(b.kind)] = 1.0;
  i += 9;

  f[i++] = (a.type_path && b.type_path && *a.type_path == *b.type_path) ? 1.0 : 0.0;

  auto lookup = [&](const CandidateMention& m) -> std::pair<char, char> {
    // head word first, then full surface form
    if (!m.head_text.empty()) {
      auto it = lex.agreement.find(ascii_lower(m.head_text));
      if (it != lex.agreement.end()) return it->second;
    }
    auto it = lex.agreement.find(ascii_lower(m.text));
    if (it != lex.agreement.end()) return it->second;
    return {'?', '?'};
  };
  auto [ga, na] = lookup(a);
  auto [gb, nb] = lookup(b);
  f[i++] = (ga != '?' && gb != '?' && ga == gb) ? 1.0 : 0.0;  // gender agree
  f[i++] = (ga != '?' && gb != '?' && ga != gb) ? 1.0 : 0.0;  // gender conflict
  f[i++] = (na != '?' && nb != '?' && na == nb) ? 1.0 : 0.0;  // number agree
  f[i++] = (na != '?' && nb != '?' && na != nb) ? 1.0 : 0.0;  // number conflict

  f[i++] = a.segment == b.segment ? 1.0 : 0.0;
  f[i++] = std::log1p(static_cast<double>(dist(b.segment, a.segment)));
  return f;
}

// ---------------------------------------------------------------------------
// Pair scorer: two-layer feed-forward network, tanh hidden layer, scalar out.
// The logistic of the raw score is compared against the clustering threshold.
// ---------------------------------------------------------------------------

struct PairScorerParams {
  Matrix w1;  // dim x hidden
  Matrix b1;  // 1 x hidden
  Matrix w2;  // hidden x 1
  Matrix b2;  // 1 x 1

  explicit PairScorerParams(std::size_t hidden = 16)
      : w1(kPairFeatureDim, hidden), b1(1, hidden), w2(hidden, 1), b2(1, 1) {}

  std::size_t hidden() const { return w1.cols(); }

  void save_into(ParamContainer& c, const std::string& prefix = "coref.") const {
    c.matrices[prefix + "w1"] = w1;
    c.matrices[prefix + "b1"] = b1;
    c.matrices[prefix + "w2"] = w2;
    c.matrices[prefix + "b2"] = b2;
  }

  static PairScorerParams load_from(const ParamContainer& c, const std::string& prefix = "coref.") {
    PairScorerParams p;
    p.w1 = c.require_matrix(prefix + "w1");
    p.b1 = c.require_matrix(prefix + "b1");
    p.w2 = c.require_matrix(prefix + "w2");
    p.b2 = c.require_matrix(prefix + "b2");
    if (p.w1.rows() != kPairFeatureDim)
      throw data_error("pair scorer feature dimensionality mismatch");
    return p;
  }
};

inline double pair_score_features(std::span<const double> f, const PairScorerParams& p) {
  double out = p.b2(0, 0);
  for (std::size_t hcol = 0; hcol < p.hidden(); ++hcol) {
    double pre = p.b1(0, hcol);
    for (std::size_t d = 0; d < kPairFeatureDim; ++d) pre += f[d] * p.w1(d, hcol);
    out += std::tanh(pre) * p.w2(hcol, 0);
  }
  return out;
}

inline double pair_score(const CandidateMention& a, const CandidateMention& b,
                         const PairScorerParams& p, const CorefLexicons& lex) {
  auto f = pair_features(a, b, lex);
  return pair_score_features(f, p);
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// ---------------------------------------------------------------------------
// Pair scorer training: logistic loss, full-batch gradient steps (Adam).
// ---------------------------------------------------------------------------

struct LabeledPair {
  std::array<double, kPairFeatureDim> features{};
  bool coreferent = false;
};

struct PairTrainConfig {
  std::size_t hidden = 16;
  std::size_t epochs = 200;
  double learning_rate = 0.05;
  std::uint64_t seed = 1;
};

inline PairScorerParams train_pair_scorer(std::span<const LabeledPair> pairs,
                                          const PairTrainConfig& cfg,
                                          std::vector<double>* loss_curve = nullptr) {
  std::size_t pos = 0;
  for (const auto& p : pairs) pos += p.coreferent ? 1 : 0;
  if (pos == 0 || pos == pairs.size())
    throw data_error("pair scorer needs at least one positive and one negative example");

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 0.1);
  PairScorerParams p(cfg.hidden);
  for (auto& v : p.w1.data()) v = normal(rng);
  for (auto& v : p.w2.data()) v = normal(rng);

  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::vector<Matrix*> params = {&p.w1, &p.b1, &p.w2, &p.b2};
  std::vector<Matrix> grads, ms, vs;
  for (Matrix* m : params) {
    grads.emplace_back(m->rows(), m->cols());
    ms.emplace_back(m->rows(), m->cols());
    vs.emplace_back(m->rows(), m->cols());
  }

  const double inv_n = 1.0 / static_cast<double>(pairs.size());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (auto& g : grads) g.fill(0.0);
    double loss = 0.0;
    for (const auto& ex : pairs) {
      // forward
      std::vector<double> hidden_act(cfg.hidden);
      double out = p.b2(0, 0);
      for (std::size_t hcol = 0; hcol < cfg.hidden; ++hcol) {
        double pre = p.b1(0, hcol);
        for (std::size_t d = 0; d < kPairFeatureDim; ++d) pre += ex.features[d] * p.w1(d, hcol);
        hidden_act[hcol] = std::tanh(pre);
        out += hidden_act[hcol] * p.w2(hcol, 0);
      }
      double prob = sigmoid(out);
      double y = ex.coreferent ? 1.0 : 0.0;
      loss += -(y * std::log(std::max(prob, 1e-12)) +
                (1.0 - y) * std::log(std::max(1.0 - prob, 1e-12)));
      // backward
      double d_out = prob - y;
      grads[3](0, 0) += d_out;
      for (std::size_t hcol = 0; hcol < cfg.hidden; ++hcol) {
        grads[2](hcol, 0) += d_out * hidden_act[hcol];
        double d_pre = d_out * p.w2(hcol, 0) * (1.0 - hidden_act[hcol] * hidden_act[hcol]);
        grads[1](0, hcol) += d_pre;
        for (std::size_t d = 0; d < kPairFeatureDim; ++d)
          grads[0](d, hcol) += d_pre * ex.features[d];
      }
    }
    if (loss_curve) loss_curve->push_back(loss * inv_n);
    double bc1 = 1.0 - std::pow(beta1, static_cast<double>(epoch + 1));
    double bc2 = 1.0 - std::pow(beta2, static_cast<double>(epoch + 1));
    for (std::size_t k = 0; k < params.size(); ++k) {
      auto& theta = params[k]->data();
      auto& g = grads[k].data();
      for (std::size_t j = 0; j < theta.size(); ++j) {
        double gj = g[j] * inv_n;
        ms[k].data()[j] = beta1 * ms[k].data()[j] + (1.0 - beta1) * gj;
        vs[k].data()[j] = beta2 * vs[k].data()[j] + (1.0 - beta2) * gj * gj;
        theta[j] -= cfg.learning_rate *
                    (ms[k].data()[j] / bc1) / (std::sqrt(vs[k].data()[j] / bc2) + eps);
      }
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Greedy best-first clustering. Each mention links to its highest-scoring
// preceding antecedent above the threshold (nearest wins ties); links close
// transitively. Singletons stay; ids are assigned in first-mention order.
// ---------------------------------------------------------------------------

// Core rule over an arbitrary score function; kept separate so tests can
// drive it with explicit matrices.
inline std::vector<std::vector<std::size_t>> greedy_cluster(
    std::size_t n, const std::function<double(std::size_t, std::size_t)>& score,
    double threshold) {
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };

  for (std::size_t j = 1; j < n; ++j) {
    double best = threshold;
    std::ptrdiff_t best_i = -1;
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(j) - 1; i >= 0; --i) {
      double s = score(static_cast<std::size_t>(i), j);
      if (s > best) {  // strict: nearest antecedent wins ties by scan order
        best = s;
        best_i = i;
      }
    }
    if (best_i >= 0) parent[find(j)] = find(static_cast<std::size_t>(best_i));
  }

  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  for (auto& [root, members] : groups) {
    std::sort(members.begin(), members.end());
    out.push_back(std::move(members));
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

inline std::vector<EntityCluster> cluster(const std::vector<CandidateMention>& candidates,
                                          const PairScorerParams& params,
                                          const CorefLexicons& lex, double threshold) {
  auto clusters = greedy_cluster(
      candidates.size(),
      [&](std::size_t i, std::size_t j) {
        return sigmoid(pair_score(candidates[i], candidates[j], params, lex));
      },
      threshold);
  std::vector<EntityCluster> out;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    EntityCluster ec;
    ec.entity_id = "E" + std::to_string(c + 1);
    for (std::size_t idx : clusters[c])
      ec.spans.emplace_back(candidates[idx].start, candidates[idx].end);
    out.push_back(std::move(ec));
  }
  return out;
}

}  // namespace fgent
