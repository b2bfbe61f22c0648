#pragma once

#include <charconv>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fgent/corpus.hpp"
#include "fgent/errors.hpp"
#include "fgent/ontology.hpp"
#include "fgent/text.hpp"

namespace fgent {

// TAC-style submission row, 8 TAB-separated columns, no header:
//   run_id  mention_id  text  docid:start-end  entity_id  type  class  confidence
struct SubmissionRow {
  std::string run_id;
  std::string mention_id;
  std::string text;
  std::string doc_id;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string entity_id;
  TypePath type_path;
  MentionClass mention_class = MentionClass::NAM;
  double confidence = 1.0;

  bool operator==(const SubmissionRow&) const = default;
};

namespace detail {

inline std::string format_confidence(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace detail

inline std::string format_provenance(const SubmissionRow& r) {
  return r.doc_id + ":" + std::to_string(r.start) + "-" + std::to_string(r.end);
}

inline void write_submission(std::ostream& os, std::span<const SubmissionRow> rows) {
  for (const auto& r : rows) {
    os << r.run_id << '\t' << r.mention_id << '\t' << r.text << '\t' << format_provenance(r)
       << '\t' << r.entity_id << '\t' << r.type_path.str() << '\t'
       << mention_class_name(r.mention_class) << '\t' << detail::format_confidence(r.confidence)
       << '\n';
  }
}

inline std::vector<SubmissionRow> parse_submission(std::istream& is) {
  std::vector<SubmissionRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 8) throw format_error("expected 8 TAB-separated columns", line_no);
    SubmissionRow r;
    r.run_id = cols[0];
    r.mention_id = cols[1];
    r.text = cols[2];

    // provenance docid:start-end; doc ids may themselves contain ':' or '-'
    const std::string& prov = cols[3];
    auto colon = prov.rfind(':');
    if (colon == std::string::npos) throw format_error("bad provenance '" + prov + "'", line_no);
    auto dash = prov.find('-', colon);
    if (dash == std::string::npos) throw format_error("bad provenance '" + prov + "'", line_no);
    r.doc_id = prov.substr(0, colon);
    try {
      r.start = std::stoull(prov.substr(colon + 1, dash - colon - 1));
      r.end = std::stoull(prov.substr(dash + 1));
    } catch (...) {
      throw format_error("bad offsets in provenance '" + prov + "'", line_no);
    }
    if (r.end < r.start) throw format_error("provenance end before start", line_no);
    if (r.doc_id.empty()) throw format_error("empty doc id in provenance", line_no);

    r.entity_id = cols[4];
    try {
      r.type_path = TypePath::parse(cols[5]);
    } catch (const data_error& e) {
      throw format_error(e.what(), line_no);
    }
    r.mention_class = parse_mention_class(cols[6]);
    try {
      r.confidence = std::stod(cols[7]);
    } catch (...) {
      throw format_error("bad confidence '" + cols[7] + "'", line_no);
    }
    if (!(r.confidence > 0.0) || r.confidence > 1.0)
      throw format_error("confidence must be in (0,1]", line_no);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline Mention row_to_mention(const SubmissionRow& r) {
  Mention m;
  m.doc_id = r.doc_id;
  m.start = r.start;
  m.end = r.end;
  m.text = r.text;
  m.type_path = r.type_path;
  m.mention_class = r.mention_class;
  m.confidence = r.confidence;
  if (!r.entity_id.empty()) m.entity_id = r.entity_id;
  return m;
}

inline SubmissionRow mention_to_row(const Mention& m, const std::string& run_id,
                                    const std::string& mention_id) {
  SubmissionRow r;
  r.run_id = run_id;
  r.mention_id = mention_id;
  r.text = m.text;
  r.doc_id = m.doc_id;
  r.start = m.start;
  r.end = m.end;
  r.entity_id = m.entity_id.value_or(mention_id);
  r.type_path = m.type_path;
  r.mention_class = m.mention_class;
  // clamp into (0,1]: submission confidences are strictly positive
  r.confidence = m.confidence <= 0.0 ? 1e-9 : (m.confidence > 1.0 ? 1.0 : m.confidence);
  return r;
}

inline std::vector<Mention> rows_to_mentions(std::span<const SubmissionRow> rows) {
  std::vector<Mention> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(row_to_mention(r));
  return out;
}

}  // namespace fgent
