#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fgent/errors.hpp"
#include "fgent/text.hpp"

namespace fgent {

inline constexpr std::size_t kMaxTypeDepth = 3;

// A hierarchical entity type of one to three levels, e.g. PER.Artist.Photographer.
struct TypePath {
  std::vector<std::string> levels;

  TypePath() = default;
  explicit TypePath(std::vector<std::string> lv) : levels(std::move(lv)) {}
  TypePath(std::initializer_list<std::string> lv) : levels(lv) {}

  std::size_t depth() const { return levels.size(); }
  bool empty() const { return levels.empty(); }
  const std::string& last() const { return levels.back(); }

  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (i) out += '.';
      out += levels[i];
    }
    return out;
  }

  bool valid() const {
    if (levels.empty() || levels.size() > kMaxTypeDepth) return false;
    for (const auto& name : levels)
      if (name.empty() || name.find('.') != std::string::npos) return false;
    return true;
  }

  // True when `this` is a strict prefix of `other`.
  bool strict_ancestor_of(const TypePath& other) const {
    if (levels.size() >= other.levels.size()) return false;
    return std::equal(levels.begin(), levels.end(), other.levels.begin());
  }

  static TypePath parse(std::string_view dotted) {
    TypePath p;
    for (auto& part : split(dotted, '.')) p.levels.push_back(std::move(part));
    if (!p.valid())
      throw data_error("invalid type path '" + std::string(dotted) + "'");
    return p;
  }

  bool operator==(const TypePath&) const = default;
  auto operator<=>(const TypePath&) const = default;
};

// Strict prefixes, shortest first; empty for one-level paths.
inline std::vector<TypePath> ancestors(const TypePath& p) {
  std::vector<TypePath> out;
  for (std::size_t len = 1; len < p.levels.size(); ++len)
    out.emplace_back(std::vector<std::string>(p.levels.begin(), p.levels.begin() + len));
  return out;
}

// The three-level type tree. Immutable after load; all lookups are const.
class TypeHierarchy {
 public:
  TypeHierarchy() = default;

  // One dotted path per line; '#'-prefixed lines are comments; duplicates
  // are idempotent. Every listed path and all its prefixes become valid.
  static TypeHierarchy load(std::string_view text) {
    TypeHierarchy h;
    auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      std::string_view line = trim(lines[i]);
      if (line.empty() || line.front() == '#') continue;
      auto parts = split(line, '.');
      if (parts.size() > kMaxTypeDepth)
        throw format_error("type path deeper than " + std::to_string(kMaxTypeDepth) +
                               " levels: '" + std::string(line) + "'",
                           i + 1);
      for (const auto& name : parts)
        if (name.empty() || trim(name) != name)
          throw format_error("malformed type path '" + std::string(line) + "'", i + 1);
      h.insert(TypePath(std::move(parts)));
    }
    h.build_indexes();
    return h;
  }

  bool empty() const { return paths_.empty(); }
  std::size_t path_count() const { return paths_.size(); }
  bool contains(const TypePath& p) const { return paths_.count(p.str()) != 0; }
  const std::set<std::string>& roots() const { return roots_; }

  std::vector<std::string> children(const TypePath& parent) const {
    auto it = children_.find(parent.str());
    if (it == children_.end()) return {};
    return {it->second.begin(), it->second.end()};
  }

  // All valid paths whose last element is `name`, lexicographically sorted.
  const std::vector<TypePath>& paths_ending_in(const std::string& name) const {
    static const std::vector<TypePath> kEmpty;
    auto it = leaf_index_.find(name);
    return it == leaf_index_.end() ? kEmpty : it->second;
  }

  // Paths with no children (the deepest subtypes), sorted.
  std::vector<TypePath> maximal_paths() const {
    std::vector<TypePath> out;
    for (const auto& dotted : paths_) {
      auto it = children_.find(dotted);
      if (it == children_.end() || it->second.empty()) out.push_back(TypePath::parse(dotted));
    }
    return out;
  }

  std::vector<TypePath> all_paths() const {
    std::vector<TypePath> out;
    out.reserve(paths_.size());
    for (const auto& dotted : paths_) out.push_back(TypePath::parse(dotted));
    return out;
  }

 private:
  void insert(const TypePath& p) {
    for (std::size_t len = 1; len <= p.levels.size(); ++len) {
      TypePath prefix(std::vector<std::string>(p.levels.begin(), p.levels.begin() + len));
      paths_.insert(prefix.str());
      if (len == 1)
        roots_.insert(prefix.levels[0]);
      else {
        TypePath parent(std::vector<std::string>(p.levels.begin(), p.levels.begin() + len - 1));
        children_[parent.str()].insert(prefix.levels.back());
      }
    }
  }

  void build_indexes() {
    leaf_index_.clear();
    for (const auto& dotted : paths_) {
      TypePath p = TypePath::parse(dotted);
      leaf_index_[p.last()].push_back(std::move(p));
    }
    for (auto& [name, paths] : leaf_index_) std::sort(paths.begin(), paths.end());
  }

  std::set<std::string> paths_;  // dotted form, prefix-closed
  std::set<std::string> roots_;
  std::map<std::string, std::set<std::string>> children_;
  std::map<std::string, std::vector<TypePath>> leaf_index_;
};

enum class CorrectionOutcome {
  unchanged,        // already valid
  corrected,        // rewritten to the ontology path ending in the predicted leaf
  prefix_fallback,  // leaf unknown; longest valid prefix kept
  unresolved,       // nothing matched; returned as-is, flagged
};

struct CorrectionResult {
  TypePath path;
  CorrectionOutcome outcome = CorrectionOutcome::unchanged;
  bool ambiguous = false;  // leaf matched several ontology paths
};

namespace detail {
// Number of trailing elements shared by `a` and `b`.
inline std::size_t common_suffix_len(const TypePath& a, const TypePath& b) {
  std::size_t n = 0;
  while (n < a.levels.size() && n < b.levels.size() &&
         a.levels[a.levels.size() - 1 - n] == b.levels[b.levels.size() - 1 - n])
    ++n;
  return n;
}
}  // namespace detail

// Ontology post-correction: trust the deepest predicted subtype and rewrite
// the ancestors to the ontology's own path for it. Ambiguous leaves keep the
// candidate sharing the longest suffix with the prediction, then the
// lexicographically smallest one.
inline CorrectionResult correct_type(const TypePath& predicted, const TypeHierarchy& h) {
  if (h.contains(predicted)) return {predicted, CorrectionOutcome::unchanged, false};

  const auto& candidates = h.paths_ending_in(predicted.last());
  if (!candidates.empty()) {
    if (candidates.size() == 1)
      return {candidates.front(), CorrectionOutcome::corrected, false};
    std::size_t best_suffix = 0;
    const TypePath* best = &candidates.front();
    for (const auto& c : candidates) {
      std::size_t s = detail::common_suffix_len(predicted, c);
      if (s > best_suffix) {  // candidates sorted: first max is lexicographically smallest
        best_suffix = s;
        best = &c;
      }
    }
    return {*best, CorrectionOutcome::corrected, true};
  }

  auto prefixes = ancestors(predicted);
  for (auto it = prefixes.rbegin(); it != prefixes.rend(); ++it)
    if (h.contains(*it)) return {*it, CorrectionOutcome::prefix_fallback, false};

  return {predicted, CorrectionOutcome::unresolved, false};
}

}  // namespace fgent
