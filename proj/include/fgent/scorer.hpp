#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "fgent/assignment.hpp"
#include "fgent/corpus.hpp"
#include "fgent/errors.hpp"

namespace fgent {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Harmonic-mean convention: F = 0 when P + R = 0; scoring two empty sides
// counts as a perfect (vacuous) match.
inline PRF make_prf(double credit, double sys_total, double gold_total) {
  PRF out;
  out.precision = sys_total > 0 ? credit / sys_total : (gold_total == 0 ? 1.0 : 0.0);
  out.recall = gold_total > 0 ? credit / gold_total : (sys_total == 0 ? 1.0 : 0.0);
  out.f1 = (out.precision + out.recall) > 0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

namespace detail {

using SpanKey = std::tuple<std::string, std::size_t, std::size_t>;

inline SpanKey span_key(const Mention& m) { return {m.doc_id, m.start, m.end}; }

// Deduplicates by key, recording a warning per duplicate.
template <typename Key, typename KeyFn>
std::vector<const Mention*> dedup(std::span<const Mention> mentions, KeyFn key_fn,
                                  std::vector<std::string>* warnings, const char* side) {
  std::set<Key> seen;
  std::vector<const Mention*> out;
  for (const auto& m : mentions) {
    if (seen.insert(key_fn(m)).second) {
      out.push_back(&m);
    } else if (warnings) {
      warnings->push_back(std::string("duplicate ") + side + " mention '" + m.text + "' at " +
                          m.doc_id + ":" + std::to_string(m.start) + "-" + std::to_string(m.end));
    }
  }
  return out;
}

}  // namespace detail

// True positive = exact (doc, start, end) match.
inline PRF strong_mention_match(std::span<const Mention> gold, std::span<const Mention> sys,
                                std::vector<std::string>* warnings = nullptr) {
  auto g = detail::dedup<detail::SpanKey>(gold, detail::span_key, warnings, "gold");
  auto s = detail::dedup<detail::SpanKey>(sys, detail::span_key, warnings, "system");
  std::set<detail::SpanKey> gold_keys;
  for (const Mention* m : g) gold_keys.insert(detail::span_key(*m));
  double tp = 0;
  for (const Mention* m : s) tp += gold_keys.count(detail::span_key(*m)) ? 1 : 0;
  return make_prf(tp, static_cast<double>(s.size()), static_cast<double>(g.size()));
}

// Additionally requires the full type path to match.
inline PRF strong_typed_mention_match(std::span<const Mention> gold, std::span<const Mention> sys,
                                      std::vector<std::string>* warnings = nullptr) {
  using Key = std::tuple<std::string, std::size_t, std::size_t, std::string>;
  auto key_fn = [](const Mention& m) -> Key {
    return {m.doc_id, m.start, m.end, m.type_path.str()};
  };
  auto g = detail::dedup<Key>(gold, key_fn, warnings, "gold");
  auto s = detail::dedup<Key>(sys, key_fn, warnings, "system");
  std::set<Key> gold_keys;
  for (const Mention* m : g) gold_keys.insert(key_fn(*m));
  double tp = 0;
  for (const Mention* m : s) tp += gold_keys.count(key_fn(*m)) ? 1 : 0;
  return make_prf(tp, static_cast<double>(s.size()), static_cast<double>(g.size()));
}

// ---------------------------------------------------------------------------
// CEAF family
// ---------------------------------------------------------------------------

enum class CeafKind { mention, typed_mention, entity };

namespace detail {

struct ScoredCluster {
  std::vector<SpanKey> spans;                       // sorted, unique
  std::vector<std::pair<SpanKey, std::string>> typed;  // sorted, unique
};

// Groups mentions into clusters per (doc, entity id); mentions without an
// entity id become singletons. Throws when the same span appears in two
// clusters on one side (clusters must partition the mention set).
inline std::map<std::string, std::vector<ScoredCluster>> group_clusters(
    std::span<const Mention> mentions, const char* side) {
  std::map<std::string, std::map<std::string, ScoredCluster>> by_doc;
  std::map<std::string, std::map<SpanKey, std::string>> span_owner;
  std::size_t fresh = 0;
  for (const auto& m : mentions) {
    std::string entity =
        m.entity_id ? *m.entity_id : "__singleton_" + std::to_string(fresh++);
    SpanKey key = span_key(m);
    auto [it, inserted] = span_owner[m.doc_id].emplace(key, entity);
    if (!inserted) {
      if (it->second != entity)
        throw data_error(std::string(side) + " clusters overlap: span " + m.doc_id + ":" +
                         std::to_string(m.start) + "-" + std::to_string(m.end) +
                         " appears in entities '" + it->second + "' and '" + entity + "'");
      continue;  // exact duplicate row
    }
    auto& cluster = by_doc[m.doc_id][entity];
    cluster.spans.push_back(key);
    cluster.typed.emplace_back(key, m.type_path.str());
  }
  std::map<std::string, std::vector<ScoredCluster>> out;
  for (auto& [doc, clusters] : by_doc)
    for (auto& [entity, c] : clusters) {
      std::sort(c.spans.begin(), c.spans.end());
      std::sort(c.typed.begin(), c.typed.end());
      out[doc].push_back(std::move(c));
    }
  return out;
}

inline double sorted_intersection_size(const std::vector<SpanKey>& a,
                                       const std::vector<SpanKey>& b) {
  std::size_t i = 0, j = 0, n = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) ++i;
    else if (b[j] < a[i]) ++j;
    else {
      ++n;
      ++i;
      ++j;
    }
  }
  return static_cast<double>(n);
}

inline double sorted_intersection_size(const std::vector<std::pair<SpanKey, std::string>>& a,
                                       const std::vector<std::pair<SpanKey, std::string>>& b) {
  std::size_t i = 0, j = 0, n = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) ++i;
    else if (b[j] < a[i]) ++j;
    else {
      ++n;
      ++i;
      ++j;
    }
  }
  return static_cast<double>(n);
}

inline double ceaf_phi(const ScoredCluster& a, const ScoredCluster& b, CeafKind kind) {
  switch (kind) {
    case CeafKind::mention:
      return sorted_intersection_size(a.spans, b.spans);
    case CeafKind::typed_mention:
      return sorted_intersection_size(a.typed, b.typed);
    case CeafKind::entity: {
      double common = sorted_intersection_size(a.spans, b.spans);
      double denom = static_cast<double>(a.spans.size() + b.spans.size());
      return denom > 0 ? 2.0 * common / denom : 0.0;
    }
  }
  return 0.0;
}

}  // namespace detail

// Constrained entity-alignment F-measure. The alignment maximizes the summed
// similarity phi over a one-to-one cluster matching; P and R normalize by the
// self-similarity of each side (mention counts for the mention variants,
// cluster counts for the entity variant).
inline PRF ceaf(std::span<const Mention> gold, std::span<const Mention> sys, CeafKind kind) {
  auto gold_by_doc = detail::group_clusters(gold, "gold");
  auto sys_by_doc = detail::group_clusters(sys, "system");

  double phi_star = 0.0, gold_norm = 0.0, sys_norm = 0.0;
  for (const auto& [doc, gold_clusters] : gold_by_doc)
    for (const auto& c : gold_clusters) gold_norm += detail::ceaf_phi(c, c, kind);
  for (const auto& [doc, sys_clusters] : sys_by_doc)
    for (const auto& c : sys_clusters) sys_norm += detail::ceaf_phi(c, c, kind);

  // Optimal alignment decomposes over documents (cross-document phi is zero).
  for (const auto& [doc, gold_clusters] : gold_by_doc) {
    auto sit = sys_by_doc.find(doc);
    if (sit == sys_by_doc.end()) continue;
    const auto& sys_clusters = sit->second;
    Matrix sim(gold_clusters.size(), sys_clusters.size());
    for (std::size_t i = 0; i < gold_clusters.size(); ++i)
      for (std::size_t j = 0; j < sys_clusters.size(); ++j)
        sim(i, j) = detail::ceaf_phi(gold_clusters[i], sys_clusters[j], kind);
    phi_star += optimal_alignment(sim, /*maximize=*/true).total;
  }
  PRF out;
  out.precision = sys_norm > 0 ? phi_star / sys_norm : (gold_norm == 0 ? 1.0 : 0.0);
  out.recall = gold_norm > 0 ? phi_star / gold_norm : (sys_norm == 0 ? 1.0 : 0.0);
  out.f1 = (out.precision + out.recall) > 0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Fine-grained typing score. This is a documented approximation of the
// official track metric: micro-averaged F over (span, type) assertions, with
// an optional partial-credit mode granting 0.5 when the system predicts a
// strict ancestor of the gold type.
// ---------------------------------------------------------------------------

inline PRF fine_grain_typing(std::span<const Mention> gold, std::span<const Mention> sys,
                             bool partial_credit = false,
                             std::vector<std::string>* warnings = nullptr) {
  auto g = detail::dedup<detail::SpanKey>(gold, detail::span_key, warnings, "gold");
  auto s = detail::dedup<detail::SpanKey>(sys, detail::span_key, warnings, "system");
  std::map<detail::SpanKey, const Mention*> gold_by_span;
  for (const Mention* m : g) gold_by_span.emplace(detail::span_key(*m), m);
  double credit = 0.0;
  for (const Mention* m : s) {
    auto it = gold_by_span.find(detail::span_key(*m));
    if (it == gold_by_span.end()) continue;
    if (m->type_path == it->second->type_path)
      credit += 1.0;
    else if (partial_credit && m->type_path.strict_ancestor_of(it->second->type_path))
      credit += 0.5;
  }
  return make_prf(credit, static_cast<double>(s.size()), static_cast<double>(g.size()));
}

// ---------------------------------------------------------------------------
// Error categorization
// ---------------------------------------------------------------------------

struct ErrorReport {
  std::size_t wrong_type = 0;    // exact span, type differs
  std::size_t extraneous = 0;    // system span overlaps no gold span
  std::size_t wrong_extent = 0;  // spans overlap but extents differ
  std::size_t missing = 0;       // gold span with no exact or overlap match
  std::size_t coref_error = 0;   // span-correct pair linked to different antecedents

  struct Item {
    std::string category;
    std::string doc_id;
    std::size_t start = 0;
    std::size_t end = 0;
    std::string detail;
  };
  std::vector<Item> items;
};

inline ErrorReport categorize_errors(std::span<const Mention> gold, std::span<const Mention> sys) {
  ErrorReport report;
  auto g = detail::dedup<detail::SpanKey>(gold, detail::span_key, nullptr, "gold");
  auto s = detail::dedup<detail::SpanKey>(sys, detail::span_key, nullptr, "system");

  std::map<detail::SpanKey, const Mention*> gold_by_span;
  for (const Mention* m : g) gold_by_span.emplace(detail::span_key(*m), m);

  // Exact span pairs, in document order.
  struct Pair {
    const Mention* gold;
    const Mention* sys;
  };
  std::map<std::string, std::vector<Pair>> exact_by_doc;
  std::set<detail::SpanKey> matched;
  for (const Mention* m : s) {
    auto it = gold_by_span.find(detail::span_key(*m));
    if (it == gold_by_span.end()) continue;
    matched.insert(it->first);
    exact_by_doc[m->doc_id].push_back({it->second, m});
    if (m->type_path != it->second->type_path) {
      ++report.wrong_type;
      report.items.push_back({"wrong_type", m->doc_id, m->start, m->end,
                              "system " + m->type_path.str() + " vs gold " +
                                  it->second->type_path.str()});
    }
  }

  // Unmatched mentions: pair overlapping ones as wrong extents, the rest are
  // extraneous (system) or missing (gold).
  std::vector<const Mention*> sys_rest, gold_rest;
  for (const Mention* m : s)
    if (!gold_by_span.count(detail::span_key(*m))) sys_rest.push_back(m);
  for (const Mention* m : g)
    if (!matched.count(detail::span_key(*m))) gold_rest.push_back(m);

  std::vector<bool> gold_used(gold_rest.size(), false);
  for (const Mention* m : sys_rest) {
    bool paired = false;
    for (std::size_t i = 0; i < gold_rest.size(); ++i) {
      const Mention* gm = gold_rest[i];
      if (gold_used[i] || gm->doc_id != m->doc_id) continue;
      if (m->start <= gm->end && gm->start <= m->end) {
        gold_used[i] = true;
        paired = true;
        ++report.wrong_extent;
        report.items.push_back({"wrong_extent", m->doc_id, m->start, m->end,
                                "system [" + std::to_string(m->start) + "-" +
                                    std::to_string(m->end) + "] vs gold [" +
                                    std::to_string(gm->start) + "-" + std::to_string(gm->end) +
                                    "]"});
        break;
      }
    }
    if (!paired) {
      ++report.extraneous;
      report.items.push_back({"extraneous", m->doc_id, m->start, m->end, "'" + m->text + "'"});
    }
  }
  for (std::size_t i = 0; i < gold_rest.size(); ++i) {
    if (gold_used[i]) continue;
    ++report.missing;
    report.items.push_back({"missing", gold_rest[i]->doc_id, gold_rest[i]->start,
                            gold_rest[i]->end, "'" + gold_rest[i]->text + "'"});
  }

  // Coreference linkage, among span-correct pairs only: a mention errs when
  // its set of earlier same-entity mentions disagrees with gold.
  for (auto& [doc, pairs] : exact_by_doc) {
    std::sort(pairs.begin(), pairs.end(),
              [](const Pair& a, const Pair& b) { return a.gold->start < b.gold->start; });
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      std::set<std::size_t> gold_links, sys_links;
      for (std::size_t j = 0; j < i; ++j) {
        if (pairs[i].gold->entity_id && pairs[j].gold->entity_id &&
            *pairs[i].gold->entity_id == *pairs[j].gold->entity_id)
          gold_links.insert(j);
        if (pairs[i].sys->entity_id && pairs[j].sys->entity_id &&
            *pairs[i].sys->entity_id == *pairs[j].sys->entity_id)
          sys_links.insert(j);
      }
      if (gold_links != sys_links) {
        ++report.coref_error;
        report.items.push_back({"coref_error", doc, pairs[i].gold->start, pairs[i].gold->end,
                                "antecedent links disagree for '" + pairs[i].gold->text + "'"});
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct MetricResult {
  std::string name;
  PRF prf;
};

inline std::vector<MetricResult> score_all(std::span<const Mention> gold,
                                           std::span<const Mention> sys, bool partial_credit,
                                           std::vector<std::string>* warnings = nullptr) {
  return {
      {"strong_mention_match", strong_mention_match(gold, sys, warnings)},
      {"strong_typed_mention_match", strong_typed_mention_match(gold, sys, warnings)},
      {"mention_ceaf", ceaf(gold, sys, CeafKind::mention)},
      {"typed_mention_ceaf", ceaf(gold, sys, CeafKind::typed_mention)},
      {"entity_ceaf", ceaf(gold, sys, CeafKind::entity)},
      {"fine_grain_typing_approx", fine_grain_typing(gold, sys, partial_credit, warnings)},
  };
}

}  // namespace fgent
