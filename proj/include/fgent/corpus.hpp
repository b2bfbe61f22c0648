#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fgent/errors.hpp"
#include "fgent/ontology.hpp"
#include "fgent/text.hpp"

namespace fgent {

// ---------------------------------------------------------------------------
// Domain types. Offsets count Unicode characters into the RSD file and are
// end-inclusive throughout, mirroring the LTF convention.
// ---------------------------------------------------------------------------

struct Token {
  std::string id;
  std::string text;
  std::size_t start = 0;
  std::size_t end = 0;
};

struct Segment {
  std::string id;
  std::size_t start = 0;
  std::size_t end = 0;
  std::vector<Token> tokens;
};

struct Document {
  std::string doc_id;
  std::vector<Segment> segments;
  std::size_t rsd_len = 0;

  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& s : segments) n += s.tokens.size();
    return n;
  }
};

enum class MentionClass { NAM, NOM, PRO };

inline std::string_view mention_class_name(MentionClass c) {
  switch (c) {
    case MentionClass::NAM: return "NAM";
    case MentionClass::NOM: return "NOM";
    case MentionClass::PRO: return "PRO";
  }
  return "NAM";
}

inline MentionClass parse_mention_class(std::string_view s) {
  if (s == "NAM") return MentionClass::NAM;
  if (s == "NOM") return MentionClass::NOM;
  if (s == "PRO") return MentionClass::PRO;
  throw data_error("unknown mention class '" + std::string(s) + "'");
}

struct Mention {
  std::string doc_id;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string text;
  TypePath type_path;
  MentionClass mention_class = MentionClass::NAM;
  double confidence = 1.0;
  std::optional<std::string> entity_id;

  bool operator==(const Mention&) const = default;
};

// One label sequence per tagging task: level-1/2/3 type and mention class.
inline constexpr std::size_t kTagTasks = 4;

struct SegmentTags {
  std::array<std::vector<std::string>, kTagTasks> tracks;
};

struct TagTracks {
  std::vector<SegmentTags> segments;  // parallel to Document::segments
};

// ---------------------------------------------------------------------------
// IOB labels
// ---------------------------------------------------------------------------

inline constexpr std::string_view kOutsideLabel = "O";

inline bool is_begin(std::string_view label) { return label.size() > 2 && label.substr(0, 2) == "B-"; }
inline bool is_inside(std::string_view label) { return label.size() > 2 && label.substr(0, 2) == "I-"; }
inline std::string_view label_type(std::string_view label) {
  return (is_begin(label) || is_inside(label)) ? label.substr(2) : std::string_view{};
}

// Well-formed IOB: no I-x after O, the sequence start, or a differently
// typed label.
inline bool iob_well_formed(const std::vector<std::string>& track) {
  for (std::size_t i = 0; i < track.size(); ++i) {
    if (!is_inside(track[i])) continue;
    if (i == 0) return false;
    const auto& prev = track[i - 1];
    if (!(is_begin(prev) || is_inside(prev)) || label_type(prev) != label_type(track[i]))
      return false;
  }
  return true;
}

// Robust-decoding repair: a stray I-x becomes B-x.
inline std::vector<std::string> iob_repair(std::vector<std::string> track) {
  for (std::size_t i = 0; i < track.size(); ++i) {
    if (!is_inside(track[i])) continue;
    bool ok = i > 0 && (is_begin(track[i - 1]) || is_inside(track[i - 1])) &&
              label_type(track[i - 1]) == label_type(track[i]);
    if (!ok) track[i] = "B-" + std::string(label_type(track[i]));
  }
  return track;
}

// ---------------------------------------------------------------------------
// LTF XML
// ---------------------------------------------------------------------------

namespace detail {

// Minimal XML reader for the LTF subset: declarations and comments are
// skipped, elements other than DOC/SEG/TOKEN are treated as transparent
// containers. Offsets in errors are byte positions into the input.
class LtfReader {
 public:
  explicit LtfReader(std::string_view xml) : in_(xml) {}

  Document parse() {
    Document doc;
    std::vector<std::string> stack;
    Segment* seg = nullptr;
    bool seen_doc = false;

    while (true) {
      skip_misc();
      if (pos_ >= in_.size()) break;
      if (in_[pos_] != '<') {
        // character data; meaningful only inside TOKEN (handled there)
        ++pos_;
        continue;
      }
      if (lookahead("</")) {
        std::string name = read_close_tag();
        if (stack.empty() || stack.back() != name)
          fail("mismatched closing tag '" + name + "'");
        stack.pop_back();
        if (name == "SEG") seg = nullptr;
        continue;
      }
      auto [name, attrs, self_closed] = read_open_tag();
      if (name == "DOC") {
        doc.doc_id = require_attr(attrs, "id", name);
        seen_doc = true;
      } else if (name == "SEG") {
        Segment s;
        s.id = require_attr(attrs, "id", name);
        s.start = require_offset(attrs, "start_char", s.id);
        s.end = require_offset(attrs, "end_char", s.id);
        doc.segments.push_back(std::move(s));
        if (!self_closed) seg = &doc.segments.back();
      } else if (name == "TOKEN") {
        if (!seg) fail("TOKEN outside of SEG");
        Token t;
        t.id = require_attr(attrs, "id", name);
        t.start = require_offset(attrs, "start_char", t.id);
        t.end = require_offset(attrs, "end_char", t.id);
        if (!self_closed) {
          t.text = read_element_text("TOKEN");
        }
        seg->tokens.push_back(std::move(t));
        continue;  // close tag already consumed
      }
      if (!self_closed && name != "TOKEN") stack.push_back(name);
    }
    if (!stack.empty()) fail("unexpected end of input, '" + stack.back() + "' still open");
    if (!seen_doc) throw schema_error("LTF input has no DOC element with an id", "");
    // rsd_len is a lower bound inferred from the offsets; loading the actual
    // RSD file may enlarge it.
    for (const auto& s : doc.segments) {
      doc.rsd_len = std::max(doc.rsd_len, s.end + 1);
      if (!s.tokens.empty()) doc.rsd_len = std::max(doc.rsd_len, s.tokens.back().end + 1);
    }
    return doc;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ltf_parse_error(msg, pos_); }

  bool lookahead(std::string_view s) const { return in_.substr(pos_, s.size()) == s; }

  void skip_ws() {
    while (pos_ < in_.size() && std::isspace(static_cast<unsigned char>(in_[pos_]))) ++pos_;
  }

  // Skips whitespace, <?...?> declarations, <!-- --> comments and <!...> decls.
  void skip_misc() {
    while (true) {
      skip_ws();
      if (lookahead("<?")) {
        auto end = in_.find("?>", pos_);
        if (end == std::string_view::npos) fail("unterminated processing instruction");
        pos_ = end + 2;
      } else if (lookahead("<!--")) {
        auto end = in_.find("-->", pos_);
        if (end == std::string_view::npos) fail("unterminated comment");
        pos_ = end + 3;
      } else if (lookahead("<!")) {
        auto end = in_.find('>', pos_);
        if (end == std::string_view::npos) fail("unterminated declaration");
        pos_ = end + 1;
      } else {
        return;
      }
    }
  }

  std::string read_name() {
    std::size_t b = pos_;
    while (pos_ < in_.size() &&
           (std::isalnum(static_cast<unsigned char>(in_[pos_])) || in_[pos_] == '_' ||
            in_[pos_] == '-' || in_[pos_] == ':' || in_[pos_] == '.'))
      ++pos_;
    if (pos_ == b) fail("expected a name");
    return std::string(in_.substr(b, pos_ - b));
  }

  std::tuple<std::string, std::map<std::string, std::string>, bool> read_open_tag() {
    ++pos_;  // '<'
    std::string name = read_name();
    std::map<std::string, std::string> attrs;
    while (true) {
      skip_ws();
      if (pos_ >= in_.size()) fail("unterminated tag '" + name + "'");
      if (in_[pos_] == '>') {
        ++pos_;
        return {name, attrs, false};
      }
      if (lookahead("/>")) {
        pos_ += 2;
        return {name, attrs, true};
      }
      std::string key = read_name();
      skip_ws();
      if (pos_ >= in_.size() || in_[pos_] != '=') fail("expected '=' after attribute '" + key + "'");
      ++pos_;
      skip_ws();
      if (pos_ >= in_.size() || (in_[pos_] != '"' && in_[pos_] != '\''))
        fail("expected quoted value for attribute '" + key + "'");
      char quote = in_[pos_++];
      std::size_t b = pos_;
      while (pos_ < in_.size() && in_[pos_] != quote) ++pos_;
      if (pos_ >= in_.size()) fail("unterminated attribute value for '" + key + "'");
      attrs[key] = decode_entities(in_.substr(b, pos_ - b));
      ++pos_;  // closing quote
    }
  }

  std::string read_close_tag() {
    pos_ += 2;  // "</"
    std::string name = read_name();
    skip_ws();
    if (pos_ >= in_.size() || in_[pos_] != '>') fail("malformed closing tag '" + name + "'");
    ++pos_;
    return name;
  }

  // Reads text content up to the matching close tag (no nested elements).
  std::string read_element_text(const std::string& name) {
    std::size_t b = pos_;
    auto end = in_.find('<', pos_);
    if (end == std::string_view::npos) fail("unterminated element '" + name + "'");
    pos_ = end;
    std::string text = decode_entities(in_.substr(b, end - b));
    if (!lookahead("</")) fail("element '" + name + "' may not contain child elements");
    std::string close = read_close_tag();
    if (close != name) fail("mismatched closing tag '" + close + "'");
    return text;
  }

  std::string decode_entities(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size();) {
      if (raw[i] != '&') {
        out += raw[i++];
        continue;
      }
      auto semi = raw.find(';', i);
      if (semi == std::string_view::npos) fail("unterminated entity");
      std::string_view ent = raw.substr(i + 1, semi - i - 1);
      if (ent == "amp") out += '&';
      else if (ent == "lt") out += '<';
      else if (ent == "gt") out += '>';
      else if (ent == "quot") out += '"';
      else if (ent == "apos") out += '\'';
      else if (!ent.empty() && ent[0] == '#') out += decode_char_ref(ent);
      else fail("unknown entity '&" + std::string(ent) + ";'");
      i = semi + 1;
    }
    return out;
  }

  std::string decode_char_ref(std::string_view ent) {
    unsigned long cp = 0;
    try {
      cp = (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X'))
               ? std::stoul(std::string(ent.substr(2)), nullptr, 16)
               : std::stoul(std::string(ent.substr(1)), nullptr, 10);
    } catch (...) {
      fail("bad character reference '&" + std::string(ent) + ";'");
    }
    // encode as UTF-8
    std::string out;
    if (cp < 0x80) out += static_cast<char>(cp);
    else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
    return out;
  }

  std::string require_attr(const std::map<std::string, std::string>& attrs,
                           const std::string& key, const std::string& element) {
    auto it = attrs.find(key);
    if (it == attrs.end()) {
      auto id = attrs.find("id");
      throw schema_error("element " + element + " is missing attribute '" + key + "'",
                         id == attrs.end() ? std::string{} : id->second);
    }
    return it->second;
  }

  std::size_t require_offset(const std::map<std::string, std::string>& attrs,
                             const std::string& key, const std::string& element_id) {
    auto it = attrs.find(key);
    if (it == attrs.end())
      throw schema_error("missing offset attribute '" + key + "'", element_id);
    try {
      return static_cast<std::size_t>(std::stoull(it->second));
    } catch (...) {
      throw schema_error("offset attribute '" + key + "' is not a number", element_id);
    }
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

inline std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

inline Document parse_ltf(std::string_view xml_bytes) {
  return detail::LtfReader(xml_bytes).parse();
}

inline std::string serialize_ltf(const Document& doc) {
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<LCTL_TEXT>\n<DOC id=\"" + detail::xml_escape(doc.doc_id) + "\">\n<TEXT>\n";
  for (const auto& seg : doc.segments) {
    out += "<SEG id=\"" + detail::xml_escape(seg.id) + "\" start_char=\"" +
           std::to_string(seg.start) + "\" end_char=\"" + std::to_string(seg.end) + "\">\n";
    for (const auto& tok : seg.tokens) {
      out += "  <TOKEN id=\"" + detail::xml_escape(tok.id) + "\" start_char=\"" +
             std::to_string(tok.start) + "\" end_char=\"" + std::to_string(tok.end) + "\">" +
             detail::xml_escape(tok.text) + "</TOKEN>\n";
    }
    out += "</SEG>\n";
  }
  out += "</TEXT>\n</DOC>\n</LCTL_TEXT>\n";
  return out;
}

// ---------------------------------------------------------------------------
// RSD consistency
// ---------------------------------------------------------------------------

struct ValidationReport {
  struct Mismatch {
    std::string segment_id;
    std::string token_id;
    std::size_t start = 0;
    std::size_t end = 0;
    std::string token_text;
    std::string rsd_text;
  };
  std::vector<Mismatch> mismatches;
  bool empty() const { return mismatches.empty(); }
};

// Lists every token whose text differs from the RSD substring at its span.
// Inconsistency is data, not failure: never throws.
inline ValidationReport validate_against_rsd(const Document& doc, std::string_view rsd_text) {
  ValidationReport report;
  for (const auto& seg : doc.segments) {
    for (const auto& tok : seg.tokens) {
      std::string actual = utf8_substr(rsd_text, tok.start, tok.end);
      if (actual != tok.text)
        report.mismatches.push_back({seg.id, tok.id, tok.start, tok.end, tok.text, actual});
    }
  }
  return report;
}

// Structural invariant check used by tests and the CLI; returns problem
// descriptions, empty when the document is internally consistent.
inline std::vector<std::string> document_issues(const Document& doc) {
  std::vector<std::string> issues;
  if (doc.doc_id.empty()) issues.push_back("empty doc_id");
  for (const auto& seg : doc.segments) {
    const Token* prev = nullptr;
    for (const auto& tok : seg.tokens) {
      if (tok.end < tok.start)
        issues.push_back("token " + tok.id + ": end < start");
      if (tok.start < seg.start || tok.end > seg.end)
        issues.push_back("token " + tok.id + " outside segment " + seg.id);
      if (utf8_length(tok.text) != tok.end - tok.start + 1)
        issues.push_back("token " + tok.id + ": text length does not match span");
      if (prev && tok.start <= prev->end)
        issues.push_back("token " + tok.id + " overlaps or precedes " + prev->id);
      if (doc.rsd_len > 0 && tok.end >= doc.rsd_len)
        issues.push_back("token " + tok.id + " beyond rsd_len");
      prev = &tok;
    }
  }
  return issues;
}

// ---------------------------------------------------------------------------
// Mention <-> IOB conversion
// ---------------------------------------------------------------------------

namespace detail {

struct TokenRef {
  std::size_t segment;
  std::size_t token;
};

inline std::string mention_desc(const Mention& m) {
  return "'" + m.text + "' [" + std::to_string(m.start) + "-" + std::to_string(m.end) +
         "] in " + m.doc_id;
}

}  // namespace detail

// Rebuilds surface text for a token range; gaps between tokens become spaces.
// When the RSD text is available, prefer extracting the substring directly.
inline std::string span_text(const Segment& seg, std::size_t first, std::size_t last) {
  std::string out = seg.tokens[first].text;
  for (std::size_t i = first + 1; i <= last; ++i) {
    std::size_t gap = seg.tokens[i].start - seg.tokens[i - 1].end - 1;
    out.append(gap, ' ');
    out += seg.tokens[i].text;
  }
  return out;
}

// Converts gold/system mentions into the four parallel IOB tracks. Mentions
// must start and end exactly on token boundaries within one segment and must
// not overlap.
inline TagTracks to_iob(const Document& doc, const std::vector<Mention>& mentions) {
  TagTracks tags;
  tags.segments.resize(doc.segments.size());
  for (std::size_t s = 0; s < doc.segments.size(); ++s)
    for (auto& track : tags.segments[s].tracks)
      track.assign(doc.segments[s].tokens.size(), std::string(kOutsideLabel));

  // token-boundary lookup
  std::map<std::size_t, detail::TokenRef> by_start, by_end;
  for (std::size_t s = 0; s < doc.segments.size(); ++s)
    for (std::size_t t = 0; t < doc.segments[s].tokens.size(); ++t) {
      by_start[doc.segments[s].tokens[t].start] = {s, t};
      by_end[doc.segments[s].tokens[t].end] = {s, t};
    }

  std::vector<const Mention*> claimed_by;  // per token, flattened
  std::vector<std::size_t> seg_base(doc.segments.size(), 0);
  {
    std::size_t base = 0;
    for (std::size_t s = 0; s < doc.segments.size(); ++s) {
      seg_base[s] = base;
      base += doc.segments[s].tokens.size();
    }
    claimed_by.assign(base, nullptr);
  }

  for (const auto& m : mentions) {
    if (!m.doc_id.empty() && !doc.doc_id.empty() && m.doc_id != doc.doc_id)
      throw alignment_error("mention " + detail::mention_desc(m) + " does not belong to document " +
                            doc.doc_id);
    auto sit = by_start.find(m.start);
    auto eit = by_end.find(m.end);
    if (sit == by_start.end() || eit == by_end.end())
      throw alignment_error("mention " + detail::mention_desc(m) +
                            " is not aligned to token boundaries");
    if (sit->second.segment != eit->second.segment)
      throw alignment_error("mention " + detail::mention_desc(m) + " crosses segment boundaries");
    std::size_t s = sit->second.segment;
    std::size_t first = sit->second.token, last = eit->second.token;
    if (last < first)
      throw alignment_error("mention " + detail::mention_desc(m) + " has end before start");

    for (std::size_t t = first; t <= last; ++t) {
      const Mention*& owner = claimed_by[seg_base[s] + t];
      if (owner)
        throw overlap_error("mentions " + detail::mention_desc(*owner) + " and " +
                            detail::mention_desc(m) + " overlap");
      owner = &m;
    }

    if (!m.type_path.valid())
      throw alignment_error("mention " + detail::mention_desc(m) + " has an invalid type path");
    auto& tr = tags.segments[s].tracks;
    for (std::size_t t = first; t <= last; ++t) {
      std::string_view bi = (t == first) ? "B-" : "I-";
      for (std::size_t level = 0; level < 3; ++level)
        if (level < m.type_path.depth())
          tr[level][t] = std::string(bi) + m.type_path.levels[level];
      tr[3][t] = std::string(bi) + std::string(mention_class_name(m.mention_class));
    }
  }
  return tags;
}

// Keep-longest overlap resolution (CLI flag): mentions sorted by length
// descending then start ascending; later mentions touching a claimed token
// are dropped.
inline std::vector<Mention> resolve_overlaps_keep_longest(std::vector<Mention> mentions) {
  std::stable_sort(mentions.begin(), mentions.end(), [](const Mention& a, const Mention& b) {
    std::size_t la = a.end - a.start, lb = b.end - b.start;
    if (la != lb) return la > lb;
    if (a.start != b.start) return a.start < b.start;
    return a.type_path.str() < b.type_path.str();
  });
  std::vector<Mention> kept;
  for (auto& m : mentions) {
    bool clash = false;
    for (const auto& k : kept)
      if (k.doc_id == m.doc_id && m.start <= k.end && k.start <= m.end) {
        clash = true;
        break;
      }
    if (!clash) kept.push_back(std::move(m));
  }
  std::sort(kept.begin(), kept.end(), [](const Mention& a, const Mention& b) {
    return std::tie(a.doc_id, a.start, a.end) < std::tie(b.doc_id, b.start, b.end);
  });
  return kept;
}

// Snap-outward alignment (CLI flag): the span grows to the full extent of
// every token it overlaps. Errors when the span touches no token.
inline Mention snap_to_tokens(const Document& doc, Mention m) {
  const Segment* in_seg = nullptr;
  std::size_t first = 0, last = 0;
  for (const auto& seg : doc.segments) {
    bool any = false;
    std::size_t f = 0, l = 0;
    for (std::size_t t = 0; t < seg.tokens.size(); ++t) {
      const auto& tok = seg.tokens[t];
      if (tok.start <= m.end && m.start <= tok.end) {
        if (!any) f = t;
        l = t;
        any = true;
      }
    }
    if (any) {
      if (in_seg)
        throw alignment_error("mention " + detail::mention_desc(m) + " crosses segment boundaries");
      in_seg = &seg;
      first = f;
      last = l;
    }
  }
  if (!in_seg)
    throw alignment_error("mention " + detail::mention_desc(m) + " overlaps no token");
  m.start = in_seg->tokens[first].start;
  m.end = in_seg->tokens[last].end;
  m.text = span_text(*in_seg, first, last);
  return m;
}

// Per-token confidences parallel to the document's segments; missing entries
// default to 1.0.
using TokenConfidences = std::vector<std::vector<double>>;

// Inverse of to_iob. Tracks are repaired (stray I- promoted to B-) before
// runs are read off track 1; the type path is assembled from tracks 1-3 at
// the B position and the mention class comes from track 4 (NAM when O).
inline std::vector<Mention> from_iob(const Document& doc, const TagTracks& tracks,
                                     const TokenConfidences& confidences = {}) {
  if (tracks.segments.size() != doc.segments.size())
    throw data_error("tag tracks do not match document segmentation");
  std::vector<Mention> mentions;

  for (std::size_t s = 0; s < doc.segments.size(); ++s) {
    const Segment& seg = doc.segments[s];
    std::array<std::vector<std::string>, kTagTasks> tr;
    for (std::size_t k = 0; k < kTagTasks; ++k) {
      if (tracks.segments[s].tracks[k].size() != seg.tokens.size())
        throw data_error("track length mismatch in segment " + seg.id);
      tr[k] = iob_repair(tracks.segments[s].tracks[k]);
    }

    std::size_t n = seg.tokens.size();
    for (std::size_t i = 0; i < n;) {
      if (!is_begin(tr[0][i])) {
        ++i;
        continue;
      }
      std::string_view l1 = label_type(tr[0][i]);
      std::size_t j = i;
      while (j + 1 < n && is_inside(tr[0][j + 1]) && label_type(tr[0][j + 1]) == l1) ++j;

      Mention m;
      m.doc_id = doc.doc_id;
      m.start = seg.tokens[i].start;
      m.end = seg.tokens[j].end;
      m.text = span_text(seg, i, j);
      m.type_path.levels.emplace_back(l1);
      std::string_view l2 = label_type(tr[1][i]);
      if (!l2.empty()) {
        m.type_path.levels.emplace_back(l2);
        std::string_view l3 = label_type(tr[2][i]);
        if (!l3.empty()) m.type_path.levels.emplace_back(l3);
      }
      std::string_view cls = label_type(tr[3][i]);
      m.mention_class = cls.empty() ? MentionClass::NAM : parse_mention_class(cls);

      double conf = 1.0;
      if (s < confidences.size() && !confidences[s].empty())
        for (std::size_t t = i; t <= j && t < confidences[s].size(); ++t)
          conf = std::min(conf, confidences[s][t]);
      m.confidence = conf;

      mentions.push_back(std::move(m));
      i = j + 1;
    }
  }
  return mentions;
}

// ---------------------------------------------------------------------------
// IOB file export: token TAB start TAB end TAB track1..track4, blank line
// between segments.
// ---------------------------------------------------------------------------

inline void write_iob(std::ostream& os, const Document& doc, const TagTracks& tracks) {
  for (std::size_t s = 0; s < doc.segments.size(); ++s) {
    if (s) os << '\n';
    const auto& seg = doc.segments[s];
    const auto& tr = tracks.segments[s].tracks;
    for (std::size_t t = 0; t < seg.tokens.size(); ++t) {
      os << seg.tokens[t].text << '\t' << seg.tokens[t].start << '\t' << seg.tokens[t].end;
      for (std::size_t k = 0; k < kTagTasks; ++k) os << '\t' << tr[k][t];
      os << '\n';
    }
  }
}

struct IobRow {
  std::string token;
  std::size_t start = 0;
  std::size_t end = 0;
  std::array<std::string, kTagTasks> labels;
};

inline std::vector<std::vector<IobRow>> read_iob(std::istream& is) {
  std::vector<std::vector<IobRow>> segments;
  std::vector<IobRow> current;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (!current.empty()) segments.push_back(std::move(current));
      current.clear();
      continue;
    }
    auto cols = split(line, '\t');
    if (cols.size() != 3 + kTagTasks)
      throw format_error("expected " + std::to_string(3 + kTagTasks) + " columns", line_no);
    IobRow row;
    row.token = cols[0];
    try {
      row.start = std::stoull(cols[1]);
      row.end = std::stoull(cols[2]);
    } catch (...) {
      throw format_error("bad offsets", line_no);
    }
    for (std::size_t k = 0; k < kTagTasks; ++k) row.labels[k] = cols[3 + k];
    current.push_back(std::move(row));
  }
  if (!current.empty()) segments.push_back(std::move(current));
  return segments;
}

}  // namespace fgent
