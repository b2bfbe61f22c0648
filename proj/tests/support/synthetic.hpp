#pragma once

// Synthetic corpus generation shared by the unit and acceptance suites.
// Two flavours: unconstrained random token documents (for round-trip and
// validation properties) and a cue corpus where the mention token determines
// the entity type (for the tagger experiments).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fgent/corpus.hpp"
#include "fgent/ontology.hpp"
#include "fgent/submission.hpp"

namespace testsupport {

struct SynthDoc {
  fgent::Document doc;
  std::string rsd;
};

// Random tokenized document; gaps of 1-2 spaces inside segments, a newline
// between segments. All offsets are character offsets into rsd.
inline SynthDoc make_random_doc(std::mt19937_64& rng, const std::string& doc_id,
                                std::size_t num_segments = 3, bool unicode = false) {
  static const char* kWords[] = {"alpha", "bravo", "cedar", "delta", "ember",  "frost",
                                 "grove", "haven", "iris",  "jolt",  "karma",  "lumen",
                                 "march", "nadir", "opal",  "pivot", "quartz", "ridge"};
  static const char* kUnicodeWords[] = {"caf\xC3\xA9", "na\xC3\xAF" "ve", "\xC3\xBC" "ber"};
  std::uniform_int_distribution<std::size_t> word_pick(0, std::size(kWords) - 1);
  std::uniform_int_distribution<std::size_t> uni_pick(0, std::size(kUnicodeWords) - 1);
  std::uniform_int_distribution<std::size_t> count_pick(4, 10);
  std::uniform_int_distribution<std::size_t> gap_pick(1, 2);
  std::uniform_int_distribution<int> uni_roll(0, 9);

  SynthDoc out;
  out.doc.doc_id = doc_id;
  std::size_t offset = 0;  // character offset
  for (std::size_t s = 0; s < num_segments; ++s) {
    if (s > 0) {
      out.rsd += '\n';
      ++offset;
    }
    fgent::Segment seg;
    seg.id = "seg-" + std::to_string(s);
    seg.start = offset;
    std::size_t tokens = count_pick(rng);
    for (std::size_t t = 0; t < tokens; ++t) {
      if (t > 0) {
        std::size_t gap = gap_pick(rng);
        out.rsd.append(gap, ' ');
        offset += gap;
      }
      std::string word = (unicode && uni_roll(rng) == 0) ? kUnicodeWords[uni_pick(rng)]
                                                         : kWords[word_pick(rng)];
      fgent::Token tok;
      tok.id = "tok-" + std::to_string(s) + "-" + std::to_string(t);
      tok.text = word;
      tok.start = offset;
      tok.end = offset + fgent::utf8_length(word) - 1;
      out.rsd += word;
      offset = tok.end + 1;
      seg.tokens.push_back(std::move(tok));
    }
    seg.end = offset == seg.start ? seg.start : offset - 1;
    out.doc.segments.push_back(std::move(seg));
  }
  out.doc.rsd_len = offset;
  return out;
}

// Random non-overlapping token-aligned mentions over a document.
inline std::vector<fgent::Mention> plant_random_mentions(std::mt19937_64& rng,
                                                         const fgent::Document& doc,
                                                         const std::string& rsd,
                                                         std::size_t target_count) {
  static const char* kPaths[] = {"PER",
                                 "PER.Artist",
                                 "PER.Artist.Photographer",
                                 "ORG.Company",
                                 "GPE.ProvinceState",
                                 "FAC.Building.Hospital",
                                 "LOC.Water.River"};
  std::uniform_int_distribution<std::size_t> path_pick(0, std::size(kPaths) - 1);
  std::uniform_int_distribution<int> class_pick(0, 2);

  std::vector<fgent::Mention> mentions;
  for (std::size_t s = 0; s < doc.segments.size(); ++s) {
    const auto& seg = doc.segments[s];
    if (seg.tokens.empty()) continue;
    std::vector<bool> used(seg.tokens.size(), false);
    std::uniform_int_distribution<std::size_t> tok_pick(0, seg.tokens.size() - 1);
    std::uniform_int_distribution<std::size_t> len_pick(1, 2);
    for (std::size_t attempt = 0; attempt < target_count * 2; ++attempt) {
      std::size_t first = tok_pick(rng);
      std::size_t last = std::min(seg.tokens.size() - 1, first + len_pick(rng) - 1);
      bool clash = false;
      for (std::size_t t = first; t <= last; ++t) clash = clash || used[t];
      if (clash) continue;
      for (std::size_t t = first; t <= last; ++t) used[t] = true;
      fgent::Mention m;
      m.doc_id = doc.doc_id;
      m.start = seg.tokens[first].start;
      m.end = seg.tokens[last].end;
      m.text = fgent::utf8_substr(rsd, m.start, m.end);
      m.type_path = fgent::TypePath::parse(kPaths[path_pick(rng)]);
      m.mention_class = static_cast<fgent::MentionClass>(class_pick(rng));
      m.confidence = 1.0;
      mentions.push_back(std::move(m));
      if (mentions.size() >= target_count * doc.segments.size()) break;
    }
  }
  std::sort(mentions.begin(), mentions.end(), [](const auto& a, const auto& b) {
    return std::tie(a.start, a.end) < std::tie(b.start, b.end);
  });
  return mentions;
}

// ---------------------------------------------------------------------------
// Cue corpus: the mention token deterministically selects the type path.
// ---------------------------------------------------------------------------

struct CueType {
  std::string path;                   // dotted
  std::vector<std::string> names;    // capitalized NAM cues
  std::string nominal;               // lowercase NOM cue
};

inline const std::vector<CueType>& cue_types() {
  static const std::vector<CueType> kTypes = {
      {"PER.Artist.Photographer", {"Fotan", "Fotun", "Fotel"}, "fotman"},
      {"PER.Artist.Painter", {"Painor", "Painel", "Painud"}, "painman"},
      {"PER.Athlete.Runner", {"Runok", "Runel", "Runad"}, "runman"},
      {"ORG.Company.Airline", {"Aviex", "Avilo", "Avint"}, "avifirm"},
      {"ORG.Company.Bank", {"Banix", "Banro", "Banul"}, "banfirm"},
      {"ORG.Team.FootballClub", {"Futor", "Futan", "Futel"}, "futteam"},
      {"LOC.Water.River", {"Rivex", "Rivon", "Rival"}, "rivflow"},
      {"LOC.Land.Mountain", {"Monux", "Monar", "Monel"}, "monpeak"},
      {"FAC.Building.Hospital", {"Hosfel", "Hosnar", "Hosped"}, "hosward"},
      {"FAC.Way.Highway", {"Higex", "Higon", "Higul"}, "higroad"},
  };
  return kTypes;
}

inline std::string cue_ontology_text() {
  std::string text = "# synthetic ontology\n";
  for (const auto& t : cue_types()) text += t.path + "\n";
  text += "GPE.ProvinceState\n";
  text += "PER\n";
  text += "Pathogen.Virus\n";
  return text;
}

struct CueCorpus {
  std::vector<SynthDoc> docs;
  std::map<std::string, std::vector<fgent::Mention>> gold_by_doc;
  std::string ontology_text;
  std::size_t sentence_count = 0;
};

// Sentences are built from lowercase filler plus mention slots:
//   NAM: cue (optionally followed by the shared surname "Sorel"),
//   NOM: per-type nominal cue after "the",
//   PRO: "he" -> PER, coreferent with the nearest preceding PER entity.
inline CueCorpus make_cue_corpus(std::size_t num_docs, std::size_t segments_per_doc,
                                 std::uint64_t seed) {
  static const char* kFiller[] = {"the",  "of",    "near", "spoke", "about", "today", "while",
                                  "old",  "new",   "met",  "again", "still", "quiet", "plans",
                                  "files", "visit", "road", "after", "under", "north"};
  const auto& types = cue_types();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> filler_pick(0, std::size(kFiller) - 1);
  std::uniform_int_distribution<std::size_t> type_pick(0, types.size() - 1);
  std::uniform_int_distribution<std::size_t> mention_count_pick(1, 3);
  std::uniform_int_distribution<std::size_t> filler_run_pick(1, 4);
  std::uniform_int_distribution<int> shape_pick(0, 9);

  CueCorpus corpus;
  corpus.ontology_text = cue_ontology_text();

  for (std::size_t d = 0; d < num_docs; ++d) {
    SynthDoc sd;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "DOC%04zu", d);
    sd.doc.doc_id = buf;
    std::size_t offset = 0;
    std::map<std::string, std::string> entity_of_cue;  // per doc
    std::string last_per_entity;

    for (std::size_t s = 0; s < segments_per_doc; ++s) {
      if (s > 0) {
        sd.rsd += '\n';
        ++offset;
      }
      fgent::Segment seg;
      seg.id = "seg-" + std::to_string(s);
      seg.start = offset;

      struct Planned {
        std::vector<std::string> tokens;
        std::string type;
        fgent::MentionClass cls = fgent::MentionClass::NAM;
        std::string entity;
        bool is_mention = false;
      };
      std::vector<Planned> parts;
      std::size_t mentions = mention_count_pick(rng);
      for (std::size_t m = 0; m < mentions; ++m) {
        // filler run before each mention
        Planned filler;
        std::size_t run = filler_run_pick(rng);
        for (std::size_t f = 0; f < run; ++f) filler.tokens.push_back(kFiller[filler_pick(rng)]);
        parts.push_back(std::move(filler));

        int shape = shape_pick(rng);
        Planned mention;
        mention.is_mention = true;
        const CueType& ct = types[type_pick(rng)];
        auto entity_for_cue = [&](const std::string& cue) {
          auto it = entity_of_cue.find(cue);
          if (it == entity_of_cue.end())
            it = entity_of_cue
                     .emplace(cue, sd.doc.doc_id + "-ent" + std::to_string(entity_of_cue.size()))
                     .first;
          return it->second;
        };
        if (shape < 5) {  // single-token name
          std::uniform_int_distribution<std::size_t> name_pick(0, ct.names.size() - 1);
          std::string cue = ct.names[name_pick(rng)];
          mention.tokens = {cue};
          mention.type = ct.path;
          mention.cls = fgent::MentionClass::NAM;
          mention.entity = entity_for_cue(cue);
        } else if (shape < 7) {  // two-token name with shared surname
          std::uniform_int_distribution<std::size_t> name_pick(0, ct.names.size() - 1);
          std::string cue = ct.names[name_pick(rng)];
          mention.tokens = {cue, "Sorel"};
          mention.type = ct.path;
          mention.cls = fgent::MentionClass::NAM;
          mention.entity = entity_for_cue(cue);
        } else if (shape < 9) {  // nominal after "the"
          Planned det;
          det.tokens = {"the"};
          parts.push_back(std::move(det));
          mention.tokens = {ct.nominal};
          mention.type = ct.path;
          mention.cls = fgent::MentionClass::NOM;
          mention.entity = sd.doc.doc_id + "-nom" + std::to_string(s) + "_" + std::to_string(m);
        } else {  // pronoun typed PER, linked to the last PER entity when any
          mention.tokens = {"he"};
          mention.type = "PER";
          mention.cls = fgent::MentionClass::PRO;
          mention.entity = last_per_entity.empty()
                               ? sd.doc.doc_id + "-pro" + std::to_string(s) + "_" + std::to_string(m)
                               : last_per_entity;
        }
        if (mention.type.rfind("PER", 0) == 0 && mention.cls == fgent::MentionClass::NAM)
          last_per_entity = mention.entity;
        parts.push_back(std::move(mention));
      }
      Planned tail;
      tail.tokens.push_back(kFiller[filler_pick(rng)]);
      parts.push_back(std::move(tail));

      for (const auto& part : parts) {
        for (const auto& word : part.tokens) {
          if (!seg.tokens.empty()) {
            sd.rsd += ' ';
            ++offset;
          }
          fgent::Token tok;
          tok.id = "tok-" + std::to_string(s) + "-" + std::to_string(seg.tokens.size());
          tok.text = word;
          tok.start = offset;
          tok.end = offset + fgent::utf8_length(word) - 1;
          sd.rsd += word;
          offset = tok.end + 1;
          seg.tokens.push_back(std::move(tok));
        }
        if (part.is_mention && !part.tokens.empty()) {
          fgent::Mention gm;
          gm.doc_id = sd.doc.doc_id;
          std::size_t last_tok = seg.tokens.size() - 1;
          std::size_t first_idx = last_tok - (part.tokens.size() - 1);
          gm.start = seg.tokens[first_idx].start;
          gm.end = seg.tokens[last_tok].end;
          gm.text = fgent::utf8_substr(sd.rsd, gm.start, gm.end);
          gm.type_path = fgent::TypePath::parse(part.type);
          gm.mention_class = part.cls;
          gm.confidence = 1.0;
          gm.entity_id = part.entity;
          corpus.gold_by_doc[sd.doc.doc_id].push_back(std::move(gm));
        }
      }
      seg.end = offset > seg.start ? offset - 1 : seg.start;
      sd.doc.segments.push_back(std::move(seg));
      ++corpus.sentence_count;
    }
    sd.doc.rsd_len = offset;
    corpus.docs.push_back(std::move(sd));
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// File output helpers
// ---------------------------------------------------------------------------

inline void write_corpus_files(const CueCorpus& corpus, const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  fs::create_directories(root / "ltf");
  fs::create_directories(root / "rsd");
  for (const auto& sd : corpus.docs) {
    std::ofstream ltf(root / "ltf" / (sd.doc.doc_id + ".ltf.xml"), std::ios::binary);
    ltf << fgent::serialize_ltf(sd.doc);
    std::ofstream rsd(root / "rsd" / (sd.doc.doc_id + ".rsd.txt"), std::ios::binary);
    rsd << sd.rsd;
  }
  std::ofstream onto(root / "ontology.txt", std::ios::binary);
  onto << corpus.ontology_text;

  std::vector<fgent::SubmissionRow> rows;
  std::size_t n = 0;
  for (const auto& [doc_id, mentions] : corpus.gold_by_doc)
    for (const auto& m : mentions)
      rows.push_back(fgent::mention_to_row(m, "gold", "G" + std::to_string(++n)));
  std::ofstream ann(root / "gold.tsv", std::ios::binary);
  fgent::write_submission(ann, rows);
}

}  // namespace testsupport
