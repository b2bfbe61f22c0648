#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fgent {

// Data-level problems: bad input files, malformed rows, inconsistent corpora.
// The CLI maps these to exit code 1.
struct data_error : std::runtime_error {
  explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Configuration problems: missing paths, invalid hyperparameters.
// The CLI maps these to exit code 2.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed XML; byte_pos is the offset into the input buffer.
struct ltf_parse_error : data_error {
  ltf_parse_error(const std::string& msg, std::size_t pos)
      : data_error(msg + " (byte " + std::to_string(pos) + ")"), byte_pos(pos) {}
  std::size_t byte_pos;
};

// Structurally valid XML that violates the LTF schema (e.g. a TOKEN without
// offsets); element_id names the offending element when known.
struct schema_error : data_error {
  schema_error(const std::string& msg, std::string id)
      : data_error(msg + (id.empty() ? "" : " (element '" + id + "')")),
        element_id(std::move(id)) {}
  std::string element_id;
};

// Line-oriented format problems (ontology files, rule files, ...).
struct format_error : data_error {
  format_error(const std::string& msg, std::size_t line_no)
      : data_error(msg + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
  std::size_t line;
};

// A mention that cannot be expressed as token tags.
struct alignment_error : data_error {
  explicit alignment_error(const std::string& msg) : data_error(msg) {}
};

struct overlap_error : data_error {
  explicit overlap_error(const std::string& msg) : data_error(msg) {}
};

}  // namespace fgent
