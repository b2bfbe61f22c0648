#pragma once

#include <algorithm>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fgent/corpus.hpp"
#include "fgent/errors.hpp"
#include "fgent/ontology.hpp"
#include "fgent/text.hpp"

namespace fgent {

enum class MatchMode { token, substring };

// Retype any mention whose text contains the trigger term.
struct Rule {
  std::string trigger;
  MatchMode mode = MatchMode::token;
  TypePath target;
};

struct RuleSet {
  std::vector<Rule> rules;  // longest trigger first, then lexicographic
  std::vector<std::string> warnings;
};

namespace detail {

inline bool rule_order(const Rule& a, const Rule& b) {
  if (a.trigger.size() != b.trigger.size()) return a.trigger.size() > b.trigger.size();
  if (a.trigger != b.trigger) return a.trigger < b.trigger;
  if (a.mode != b.mode) return a.mode == MatchMode::token;
  return a.target.str() < b.target.str();
}

// Case-insensitive (ASCII) search; token mode requires non-word characters
// on both sides of the hit.
inline bool rule_matches(const Rule& rule, const std::string& text) {
  std::string hay = ascii_lower(text);
  std::string needle = ascii_lower(rule.trigger);
  if (needle.empty()) return false;
  std::size_t pos = 0;
  while ((pos = hay.find(needle, pos)) != std::string::npos) {
    if (rule.mode == MatchMode::substring) return true;
    bool left_ok = pos == 0 || !is_word_char(hay[pos - 1]);
    std::size_t after = pos + needle.size();
    bool right_ok = after >= hay.size() || !is_word_char(hay[after]);
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

}  // namespace detail

// One token-mode rule per unique ontology leaf term (deepest subtypes);
// ambiguous leaf names are skipped with a warning. Extra rules are validated
// against the ontology and may use substring mode.
inline RuleSet compile_rules(const TypeHierarchy& h, std::span<const Rule> extra = {}) {
  RuleSet out;
  std::map<std::string, std::vector<TypePath>> by_leaf;
  for (const auto& p : h.maximal_paths()) by_leaf[p.last()].push_back(p);
  for (const auto& [leaf, paths] : by_leaf) {
    if (paths.size() > 1) {
      std::string all;
      for (const auto& p : paths) {
        if (!all.empty()) all += ", ";
        all += p.str();
      }
      out.warnings.push_back("leaf '" + leaf + "' is ambiguous (" + all + "); no rule compiled");
      continue;
    }
    out.rules.push_back({leaf, MatchMode::token, paths.front()});
  }
  for (const auto& r : extra) {
    if (r.trigger.empty()) throw data_error("rule with empty trigger");
    if (!h.contains(r.target))
      throw data_error("rule target '" + r.target.str() + "' is not in the ontology");
    out.rules.push_back(r);
  }
  std::sort(out.rules.begin(), out.rules.end(), detail::rule_order);
  return out;
}

// First matching rule rewrites the type path; spans, class, confidence and
// entity ids never change.
inline std::vector<Mention> apply_rules(std::vector<Mention> mentions, const RuleSet& rules) {
  for (auto& m : mentions)
    for (const auto& rule : rules.rules)
      if (detail::rule_matches(rule, m.text)) {
        m.type_path = rule.target;
        break;
      }
  return mentions;
}

// Extra-rules file: trigger TAB mode TAB dotted-path ('#' comments allowed).
inline std::vector<Rule> parse_rules_tsv(std::istream& is) {
  std::vector<Rule> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto cols = split(t, '\t');
    if (cols.size() != 3) throw format_error("expected trigger<TAB>mode<TAB>path", line_no);
    Rule r;
    r.trigger = cols[0];
    if (cols[1] == "token") r.mode = MatchMode::token;
    else if (cols[1] == "substring") r.mode = MatchMode::substring;
    else throw format_error("unknown match mode '" + cols[1] + "'", line_no);
    try {
      r.target = TypePath::parse(cols[2]);
    } catch (const data_error& e) {
      throw format_error(e.what(), line_no);
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace fgent
