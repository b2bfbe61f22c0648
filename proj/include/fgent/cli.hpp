#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fgent/coref.hpp"
#include "fgent/corpus.hpp"
#include "fgent/errors.hpp"
#include "fgent/feedback.hpp"
#include "fgent/ontology.hpp"
#include "fgent/scorer.hpp"
#include "fgent/submission.hpp"
#include "fgent/tagger.hpp"

namespace fgent::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitConfigError = 2;

struct PipelineConfig {
  std::string ltf_dir;
  std::string rsd_dir;
  std::string annotations;
  std::string ontology;
  std::string pronouns;
  std::string determiners;
  std::string agreement;
  std::string rules;
  std::string model;
  std::string vocab;
  TaggerConfig tagger;
  double coref_threshold = 0.5;
  bool partial_credit = false;
  std::string run_id = "fgent";
  std::size_t workers = 1;
};

// ---------------------------------------------------------------------------
// Config file: one declarative JSON document; command-line flags win.
// ---------------------------------------------------------------------------

inline PipelineConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw config_error("cannot read config file '" + path + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw config_error("bad config file '" + path + "': " + e.what());
  }
  PipelineConfig cfg;
  auto get_str = [&](const char* key, std::string& out) {
    if (j.contains(key)) out = j.at(key).get<std::string>();
  };
  get_str("ltf_dir", cfg.ltf_dir);
  get_str("rsd_dir", cfg.rsd_dir);
  get_str("annotations", cfg.annotations);
  get_str("ontology", cfg.ontology);
  get_str("pronouns", cfg.pronouns);
  get_str("determiners", cfg.determiners);
  get_str("agreement", cfg.agreement);
  get_str("rules", cfg.rules);
  get_str("model", cfg.model);
  get_str("vocab", cfg.vocab);
  get_str("run_id", cfg.run_id);
  if (j.contains("workers")) cfg.workers = j.at("workers").get<std::size_t>();
  if (j.contains("coref_threshold")) cfg.coref_threshold = j.at("coref_threshold").get<double>();
  if (j.contains("partial_credit")) cfg.partial_credit = j.at("partial_credit").get<bool>();
  if (j.contains("tagger")) {
    const auto& t = j.at("tagger");
    auto get_count = [&](const char* key, std::size_t& out) {
      if (t.contains(key)) out = t.at(key).get<std::size_t>();
    };
    get_count("hidden", cfg.tagger.hidden);
    get_count("num_layers", cfg.tagger.num_layers);
    get_count("num_heads", cfg.tagger.num_heads);
    get_count("ffn_dims", cfg.tagger.ffn_dims);
    get_count("epochs", cfg.tagger.epochs);
    get_count("batch_size", cfg.tagger.batch_size);
    get_count("max_seq_len", cfg.tagger.max_seq_len);
    if (t.contains("learning_rate")) cfg.tagger.learning_rate = t.at("learning_rate").get<double>();
    if (t.contains("weight_decay")) cfg.tagger.weight_decay = t.at("weight_decay").get<double>();
    if (t.contains("seed")) cfg.tagger.seed = t.at("seed").get<std::uint64_t>();
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Corpus directory access
// ---------------------------------------------------------------------------

struct LoadedDocument {
  fs::path path;
  Document doc;
  std::string rsd;  // empty when no RSD file is present
};

inline std::vector<fs::path> list_ltf_files(const std::string& dir) {
  if (!fs::is_directory(dir)) throw config_error("ltf directory '" + dir + "' does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto name = entry.path().filename().string();
    if (name.ends_with(".ltf.xml") || name.ends_with(".xml")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw data_error("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, std::string_view content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw data_error("cannot write '" + path.string() + "'");
  os.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!os) throw data_error("failed writing '" + path.string() + "'");
}

inline LoadedDocument load_document(const fs::path& ltf_path, const std::string& rsd_dir) {
  LoadedDocument loaded;
  loaded.path = ltf_path;
  loaded.doc = parse_ltf(read_file(ltf_path));
  if (!rsd_dir.empty()) {
    fs::path rsd = fs::path(rsd_dir) / (loaded.doc.doc_id + ".rsd.txt");
    if (fs::exists(rsd)) {
      loaded.rsd = read_file(rsd);
      loaded.doc.rsd_len = std::max(loaded.doc.rsd_len, utf8_length(loaded.rsd));
    }
  }
  return loaded;
}

inline std::map<std::string, std::vector<Mention>> load_annotations(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw config_error("cannot read annotations '" + path + "'");
  std::map<std::string, std::vector<Mention>> by_doc;
  for (const auto& row : parse_submission(is)) by_doc[row.doc_id].push_back(row_to_mention(row));
  return by_doc;
}

inline CorefLexicons load_lexicons(const PipelineConfig& cfg) {
  CorefLexicons lex = CorefLexicons::defaults();
  auto merge = [](std::set<std::string>& into, const std::string& path) {
    if (path.empty()) return;
    std::ifstream is(path);
    if (!is) throw config_error("cannot read lexicon '" + path + "'");
    for (const auto& w : CorefLexicons::load_wordlist(is)) into.insert(w);
  };
  merge(lex.pronouns, cfg.pronouns);
  merge(lex.determiners, cfg.determiners);
  if (!cfg.agreement.empty()) {
    std::ifstream is(cfg.agreement);
    if (!is) throw config_error("cannot read lexicon '" + cfg.agreement + "'");
    lex.load_agreement(is);
  }
  return lex;
}

inline TypeHierarchy load_ontology_file(const std::string& path) {
  if (path.empty()) throw config_error("an ontology file is required (--ontology)");
  if (!fs::exists(path)) throw config_error("ontology '" + path + "' does not exist");
  return TypeHierarchy::load(read_file(path));
}

// Runs fn(i) for i in [0, n) on `workers` threads. Exceptions propagate.
inline void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n == 0 ? 1 : n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// convert: LTF + gold annotations -> per-document IOB files
// ---------------------------------------------------------------------------

struct ConvertOptions {
  std::string out_dir;
  bool keep_longest = false;  // resolve overlapping gold mentions
  bool snap = false;          // snap unaligned mentions outward to tokens
};

inline int cmd_convert(const PipelineConfig& cfg, const ConvertOptions& opt) {
  if (cfg.annotations.empty()) throw config_error("convert requires --annotations");
  auto files = list_ltf_files(cfg.ltf_dir);
  auto annotations = load_annotations(cfg.annotations);
  fs::create_directories(opt.out_dir);

  bool had_errors = false;
  std::size_t written = 0;
  for (const auto& path : files) {
    try {
      LoadedDocument loaded = load_document(path, cfg.rsd_dir);
      if (!loaded.rsd.empty()) {
        auto report = validate_against_rsd(loaded.doc, loaded.rsd);
        for (const auto& mm : report.mismatches)
          std::cerr << "warning: " << loaded.doc.doc_id << " token " << mm.token_id
                    << " text does not match rsd at " << mm.start << "-" << mm.end << "\n";
      }
      std::vector<Mention> mentions;
      auto it = annotations.find(loaded.doc.doc_id);
      if (it != annotations.end()) mentions = it->second;
      if (opt.snap)
        for (auto& m : mentions) m = snap_to_tokens(loaded.doc, m);
      if (opt.keep_longest) mentions = resolve_overlaps_keep_longest(std::move(mentions));
      TagTracks tracks = to_iob(loaded.doc, mentions);
      std::ostringstream out;
      write_iob(out, loaded.doc, tracks);
      write_file(fs::path(opt.out_dir) / (loaded.doc.doc_id + ".iob"), out.str());
      ++written;
    } catch (const data_error& e) {
      std::cerr << "error: skipping " << path.filename().string() << ": " << e.what() << "\n";
      had_errors = true;
    }
  }
  std::cout << "convert: wrote " << written << " IOB file(s) to " << opt.out_dir << "\n";
  return had_errors ? kExitDataError : kExitOk;
}

// ---------------------------------------------------------------------------
// train: fits the tagger (and, when gold entity ids are present, the
// coreference pair scorer) and writes the model container plus vocabulary.
// ---------------------------------------------------------------------------

inline std::vector<LabeledPair> collect_coref_pairs(const Document& doc,
                                                    const std::vector<Mention>& gold,
                                                    const CorefLexicons& lex) {
  auto candidates = detect_candidates(doc, gold, lex);
  std::map<std::pair<std::size_t, std::size_t>, const Mention*> gold_by_span;
  for (const auto& m : gold) gold_by_span[{m.start, m.end}] = &m;

  std::vector<LabeledPair> pairs;
  for (std::size_t j = 1; j < candidates.size(); ++j)
    for (std::size_t i = 0; i < j; ++i) {
      auto gi = gold_by_span.find({candidates[i].start, candidates[i].end});
      auto gj = gold_by_span.find({candidates[j].start, candidates[j].end});
      bool i_known = gi != gold_by_span.end() && gi->second->entity_id.has_value();
      bool j_known = gj != gold_by_span.end() && gj->second->entity_id.has_value();
      if (!i_known && !j_known) continue;  // no supervision for this pair
      LabeledPair lp;
      lp.features = pair_features(candidates[i], candidates[j], lex);
      lp.coreferent = i_known && j_known && *gi->second->entity_id == *gj->second->entity_id;
      pairs.push_back(lp);
    }
  return pairs;
}

inline int cmd_train(const PipelineConfig& cfg) {
  if (cfg.annotations.empty()) throw config_error("train requires --annotations");
  if (cfg.model.empty() || cfg.vocab.empty())
    throw config_error("train requires --model and --vocab output paths");

  auto files = list_ltf_files(cfg.ltf_dir);
  if (files.empty()) throw data_error("no LTF files in '" + cfg.ltf_dir + "'");
  auto annotations = load_annotations(cfg.annotations);
  CorefLexicons lex = load_lexicons(cfg);

  std::vector<LoadedDocument> docs;
  docs.reserve(files.size());
  for (const auto& path : files) docs.push_back(load_document(path, cfg.rsd_dir));
  std::sort(docs.begin(), docs.end(),
            [](const LoadedDocument& a, const LoadedDocument& b) { return a.doc.doc_id < b.doc.doc_id; });

  std::vector<const Document*> doc_ptrs;
  for (const auto& d : docs) doc_ptrs.push_back(&d.doc);
  Vocabulary vocab = Vocabulary::build(doc_ptrs);

  std::vector<TagTracks> all_tracks;
  std::vector<TaggedSequence> examples;
  std::vector<LabeledPair> pairs;
  for (const auto& d : docs) {
    auto it = annotations.find(d.doc.doc_id);
    std::vector<Mention> gold = it == annotations.end() ? std::vector<Mention>{} : it->second;
    all_tracks.push_back(to_iob(d.doc, gold));
    auto doc_pairs = collect_coref_pairs(d.doc, gold, lex);
    pairs.insert(pairs.end(), doc_pairs.begin(), doc_pairs.end());
  }
  TaskAlphabets alphabets = build_alphabets(all_tracks);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    auto ex = encode_examples(docs[i].doc, all_tracks[i], vocab, alphabets,
                              cfg.tagger.max_seq_len);
    examples.insert(examples.end(), ex.begin(), ex.end());
  }

  TaggerConfig tcfg = cfg.tagger;
  tcfg.vocab_size = vocab.size();
  tcfg.validate();
  TrainLog log;
  TaggerModel model = train_tagger(examples, tcfg, alphabets, &log);
  for (std::size_t e = 0; e < log.epoch_loss.size(); ++e)
    std::cout << "epoch " << (e + 1) << " loss " << log.epoch_loss[e] << "\n";

  ParamContainer container;
  model.save_into(container);
  bool has_pos = false, has_neg = false;
  for (const auto& p : pairs) (p.coreferent ? has_pos : has_neg) = true;
  if (has_pos && has_neg) {
    PairTrainConfig pcfg;
    pcfg.seed = cfg.tagger.seed;
    PairScorerParams scorer = train_pair_scorer(pairs, pcfg);
    scorer.save_into(container);
    container.meta["coref.trained"] = "1";
  } else {
    std::cerr << "warning: gold annotations carry no usable coreference signal; "
                 "pair scorer not trained\n";
  }
  container.save_file(cfg.model);
  std::ofstream vs(cfg.vocab);
  if (!vs) throw data_error("cannot write vocabulary '" + cfg.vocab + "'");
  vocab.save(vs);
  std::cout << "train: " << examples.size() << " sequences, vocab " << vocab.size()
            << ", model written to " << cfg.model << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// tag: model + LTF -> submission rows (fresh entity id per mention)
// ---------------------------------------------------------------------------

struct TagOptions {
  std::string out_path;
};

inline int cmd_tag(const PipelineConfig& cfg, const TagOptions& opt) {
  if (cfg.model.empty() || !fs::exists(cfg.model))
    throw config_error("tag requires an existing --model");
  if (cfg.vocab.empty() || !fs::exists(cfg.vocab))
    throw config_error("tag requires an existing --vocab");
  TypeHierarchy hierarchy = load_ontology_file(cfg.ontology);

  ParamContainer container = ParamContainer::load_file(cfg.model);
  TaggerModel model = TaggerModel::load_from(container);
  std::ifstream vs(cfg.vocab);
  Vocabulary vocab = Vocabulary::load(vs);

  auto files = list_ltf_files(cfg.ltf_dir);
  std::vector<LoadedDocument> docs(files.size());
  std::vector<std::vector<Mention>> mentions_per_doc(files.size());
  std::vector<PredictDiagnostics> diags(files.size());

  parallel_for(files.size(), cfg.workers, [&](std::size_t i) {
    docs[i] = load_document(files[i], cfg.rsd_dir);
    mentions_per_doc[i] = predict(model, docs[i].doc, vocab, hierarchy, &diags[i]);
    if (!docs[i].rsd.empty())
      for (auto& m : mentions_per_doc[i]) m.text = utf8_substr(docs[i].rsd, m.start, m.end);
  });

  for (const auto& d : diags)
    for (const auto& w : d.warnings) std::cerr << "warning: " << w << "\n";

  std::vector<Mention> all;
  for (auto& ms : mentions_per_doc) all.insert(all.end(), ms.begin(), ms.end());
  std::sort(all.begin(), all.end(), [](const Mention& a, const Mention& b) {
    return std::tie(a.doc_id, a.start, a.end) < std::tie(b.doc_id, b.start, b.end);
  });

  std::vector<SubmissionRow> rows;
  rows.reserve(all.size());
  for (std::size_t i = 0; i < all.size(); ++i)
    rows.push_back(mention_to_row(all[i], cfg.run_id, "M" + std::to_string(i + 1)));
  std::ostringstream out;
  write_submission(out, rows);
  write_file(opt.out_path, out.str());
  std::cout << "tag: wrote " << rows.size() << " mention(s) to " << opt.out_path << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// coref: rewrites the entity_id column of a submission in place (textually,
// so every other byte of the file is preserved).
// ---------------------------------------------------------------------------

struct CorefOptions {
  std::string submission;
  std::string out_path;
};

inline int cmd_coref(const PipelineConfig& cfg, const CorefOptions& opt) {
  if (cfg.model.empty() || !fs::exists(cfg.model))
    throw config_error("coref requires an existing --model");
  ParamContainer container = ParamContainer::load_file(cfg.model);
  if (!container.meta.count("coref.trained"))
    throw config_error("model '" + cfg.model + "' holds no trained pair scorer");
  PairScorerParams scorer = PairScorerParams::load_from(container);
  CorefLexicons lex = load_lexicons(cfg);

  std::string text = read_file(opt.submission);
  std::istringstream is(text);
  std::vector<SubmissionRow> rows = parse_submission(is);

  std::map<std::string, std::vector<std::size_t>> rows_by_doc;
  for (std::size_t i = 0; i < rows.size(); ++i) rows_by_doc[rows[i].doc_id].push_back(i);

  auto files = list_ltf_files(cfg.ltf_dir);
  std::map<std::string, std::string> entity_of_row;  // mention_id -> entity id
  for (const auto& path : files) {
    LoadedDocument loaded = load_document(path, cfg.rsd_dir);
    auto it = rows_by_doc.find(loaded.doc.doc_id);
    if (it == rows_by_doc.end()) continue;
    std::vector<Mention> mentions;
    for (std::size_t idx : it->second) mentions.push_back(row_to_mention(rows[idx]));
    auto candidates = detect_candidates(loaded.doc, mentions, lex);
    auto clusters = cluster(candidates, scorer, lex, cfg.coref_threshold);
    std::map<std::pair<std::size_t, std::size_t>, std::string> id_by_span;
    for (const auto& c : clusters)
      for (const auto& span : c.spans) id_by_span[span] = loaded.doc.doc_id + "-" + c.entity_id;
    for (std::size_t idx : it->second) {
      auto sit = id_by_span.find({rows[idx].start, rows[idx].end});
      if (sit != id_by_span.end()) entity_of_row[rows[idx].mention_id] = sit->second;
    }
    rows_by_doc.erase(it);
  }
  for (const auto& [doc_id, idxs] : rows_by_doc)
    std::cerr << "warning: no LTF document for '" << doc_id << "'; " << idxs.size()
              << " row(s) keep their entity ids\n";

  // textual rewrite of column 5 only
  std::ostringstream out;
  std::size_t row_idx = 0;
  for (const auto& line : split_lines(text)) {
    if (trim(line).empty()) {
      out << line << '\n';
      continue;
    }
    auto cols = split(line, '\t');
    if (cols.size() == 8 && row_idx < rows.size()) {
      auto eit = entity_of_row.find(rows[row_idx].mention_id);
      if (eit != entity_of_row.end()) cols[4] = eit->second;
      ++row_idx;
    }
    for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "\t" : "") << cols[c];
    out << '\n';
  }
  write_file(opt.out_path, out.str());
  std::cout << "coref: rewrote entity ids for " << entity_of_row.size() << " mention(s)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// correct: ontology correction, then feedback rules (in that order)
// ---------------------------------------------------------------------------

struct CorrectOptions {
  std::string submission;
  std::string out_path;
  bool auto_rules = false;  // compile token rules from ontology leaves
};

inline int cmd_correct(const PipelineConfig& cfg, const CorrectOptions& opt) {
  TypeHierarchy hierarchy = load_ontology_file(cfg.ontology);
  std::ifstream is(opt.submission);
  if (!is) throw config_error("cannot read submission '" + opt.submission + "'");
  std::vector<SubmissionRow> rows = parse_submission(is);

  std::size_t type_corrections = 0;
  for (auto& r : rows) {
    CorrectionResult c = correct_type(r.type_path, hierarchy);
    if (c.outcome == CorrectionOutcome::unresolved)
      std::cerr << "warning: type '" << r.type_path.str() << "' (" << r.mention_id
                << ") not found in ontology; kept\n";
    if (!(c.path == r.type_path)) ++type_corrections;
    r.type_path = c.path;
  }

  std::size_t rule_corrections = 0;
  bool want_rules = opt.auto_rules || !cfg.rules.empty();
  if (want_rules) {
    std::vector<Rule> extra;
    if (!cfg.rules.empty()) {
      std::ifstream rs(cfg.rules);
      if (!rs) throw config_error("cannot read rules '" + cfg.rules + "'");
      extra = parse_rules_tsv(rs);
    }
    for (const auto& r : extra)
      if (!hierarchy.contains(r.target))
        throw data_error("rule target '" + r.target.str() + "' is not in the ontology");
    RuleSet ruleset =
        opt.auto_rules ? compile_rules(hierarchy, extra) : RuleSet{std::move(extra), {}};
    if (!opt.auto_rules) std::sort(ruleset.rules.begin(), ruleset.rules.end(), detail::rule_order);
    for (const auto& w : ruleset.warnings) std::cerr << "warning: " << w << "\n";
    for (auto& r : rows) {
      std::vector<Mention> one = {row_to_mention(r)};
      one = apply_rules(std::move(one), ruleset);
      if (!(one[0].type_path == r.type_path)) ++rule_corrections;
      r.type_path = one[0].type_path;
    }
  }

  std::ostringstream out;
  write_submission(out, rows);
  write_file(opt.out_path, out.str());
  std::cout << "correct: " << type_corrections << " ontology correction(s), " << rule_corrections
            << " rule correction(s)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// score / analyze
// ---------------------------------------------------------------------------

struct ScoreOptions {
  std::string gold;
  std::string system;
  std::string report;  // machine-readable TSV, optional
};

inline std::vector<Mention> load_mention_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw config_error("cannot read '" + path + "'");
  return rows_to_mentions(parse_submission(is));
}

inline int cmd_score(const PipelineConfig& cfg, const ScoreOptions& opt) {
  auto gold = load_mention_file(opt.gold);
  auto sys = load_mention_file(opt.system);
  std::vector<std::string> warnings;
  auto results = score_all(gold, sys, cfg.partial_credit, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

  std::cout << "metric                          P        R        F1\n";
  for (const auto& r : results) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-28s %8.4f %8.4f %8.4f", r.name.c_str(), r.prf.precision,
                  r.prf.recall, r.prf.f1);
    std::cout << buf << "\n";
  }
  std::cout << "(fine_grain_typing_approx is an approximation of the official track metric)\n";

  if (!opt.report.empty()) {
    std::ostringstream out;
    for (const auto& r : results)
      out << r.name << '\t' << TaggerModel::format_double(r.prf.precision) << '\t'
          << TaggerModel::format_double(r.prf.recall) << '\t'
          << TaggerModel::format_double(r.prf.f1) << '\n';
    write_file(opt.report, out.str());
  }
  return kExitOk;
}

inline int cmd_analyze(const PipelineConfig& cfg, const ScoreOptions& opt) {
  (void)cfg;
  auto gold = load_mention_file(opt.gold);
  auto sys = load_mention_file(opt.system);
  ErrorReport report = categorize_errors(gold, sys);
  std::cout << "wrong_type\t" << report.wrong_type << "\n"
            << "extraneous\t" << report.extraneous << "\n"
            << "wrong_extent\t" << report.wrong_extent << "\n"
            << "missing\t" << report.missing << "\n"
            << "coref_error\t" << report.coref_error << "\n";
  for (const auto& item : report.items)
    std::cout << item.category << '\t' << item.doc_id << ':' << item.start << '-' << item.end
              << '\t' << item.detail << "\n";
  if (!opt.report.empty()) {
    std::ostringstream out;
    out << "wrong_type\t" << report.wrong_type << "\nextraneous\t" << report.extraneous
        << "\nwrong_extent\t" << report.wrong_extent << "\nmissing\t" << report.missing
        << "\ncoref_error\t" << report.coref_error << "\n";
    for (const auto& item : report.items)
      out << item.category << '\t' << item.doc_id << ':' << item.start << '-' << item.end << '\t'
          << item.detail << '\n';
    write_file(opt.report, out.str());
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Argument parsing
// ---------------------------------------------------------------------------

inline int run(std::vector<std::string> args) {
  CLI::App app{"fgent: fine-grained entity discovery toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  PipelineConfig cfg;

  // shared flag storage; only applied when the user passed the flag
  std::map<std::string, std::string> paths;
  std::optional<std::size_t> workers_flag;
  std::optional<std::uint64_t> seed_flag;
  std::optional<double> threshold_flag;
  bool partial_credit_flag = false;
  std::optional<std::string> run_id_flag;
  std::optional<std::size_t> epochs_flag;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON pipeline configuration (flags override it)");
    sub->add_option_function<std::string>(
        "--ltf", [&](const std::string& v) { paths["ltf"] = v; }, "LTF directory");
    sub->add_option_function<std::string>(
        "--rsd", [&](const std::string& v) { paths["rsd"] = v; }, "RSD directory");
    sub->add_option_function<std::string>(
        "--annotations", [&](const std::string& v) { paths["annotations"] = v; },
        "gold mention TSV");
    sub->add_option_function<std::string>(
        "--ontology", [&](const std::string& v) { paths["ontology"] = v; }, "ontology file");
    sub->add_option_function<std::string>(
        "--model", [&](const std::string& v) { paths["model"] = v; }, "model container path");
    sub->add_option_function<std::string>(
        "--vocab", [&](const std::string& v) { paths["vocab"] = v; }, "vocabulary path");
    sub->add_option_function<std::string>(
        "--pronouns", [&](const std::string& v) { paths["pronouns"] = v; }, "pronoun lexicon");
    sub->add_option_function<std::string>(
        "--determiners", [&](const std::string& v) { paths["determiners"] = v; },
        "determiner lexicon");
    sub->add_option_function<std::string>(
        "--agreement", [&](const std::string& v) { paths["agreement"] = v; },
        "gender/number lexicon");
    sub->add_option_function<std::string>(
        "--rules", [&](const std::string& v) { paths["rules"] = v; }, "extra rules TSV");
    sub->add_option("--workers", workers_flag, "worker threads for per-document stages");
    sub->add_option("--seed", seed_flag, "random seed");
    sub->add_option("--threshold", threshold_flag, "coreference threshold on the logistic score");
    sub->add_flag("--partial-credit", partial_credit_flag,
                  "grant 0.5 typing credit for strict ancestor predictions");
    sub->add_option_function<std::string>(
        "--run-id", [&](const std::string& v) { run_id_flag = v; }, "run id for submission rows");
    sub->add_option("--epochs", epochs_flag, "training epochs");
  };

  auto* convert = app.add_subcommand("convert", "convert LTF + annotations to IOB files");
  ConvertOptions convert_opt;
  convert->add_option("--out", convert_opt.out_dir, "output directory")->required();
  convert->add_flag("--keep-longest", convert_opt.keep_longest,
                    "resolve overlapping gold mentions by keeping the longest");
  convert->add_flag("--snap", convert_opt.snap, "snap unaligned mentions outward to tokens");
  add_common(convert);

  auto* train = app.add_subcommand("train", "train the tagger and pair scorer");
  add_common(train);

  auto* tag = app.add_subcommand("tag", "tag documents and emit a submission file");
  TagOptions tag_opt;
  tag->add_option("--out", tag_opt.out_path, "output submission TSV")->required();
  add_common(tag);

  auto* coref = app.add_subcommand("coref", "cluster mentions and rewrite entity ids");
  CorefOptions coref_opt;
  coref->add_option("--submission", coref_opt.submission, "input submission TSV")->required();
  coref->add_option("--out", coref_opt.out_path, "output submission TSV")->required();
  add_common(coref);

  auto* correct = app.add_subcommand("correct", "apply ontology and feedback corrections");
  CorrectOptions correct_opt;
  correct->add_option("--submission", correct_opt.submission, "input submission TSV")->required();
  correct->add_option("--out", correct_opt.out_path, "output submission TSV")->required();
  correct->add_flag("--auto-rules", correct_opt.auto_rules,
                    "compile token rules from unique ontology leaf terms");
  add_common(correct);

  auto* score = app.add_subcommand("score", "score a submission against gold");
  ScoreOptions score_opt;
  score->add_option("--gold", score_opt.gold, "gold TSV")->required();
  score->add_option("--system", score_opt.system, "system TSV")->required();
  score->add_option("--report", score_opt.report, "machine-readable report path");
  add_common(score);

  auto* analyze = app.add_subcommand("analyze", "categorize system errors against gold");
  ScoreOptions analyze_opt;
  analyze->add_option("--gold", analyze_opt.gold, "gold TSV")->required();
  analyze->add_option("--system", analyze_opt.system, "system TSV")->required();
  analyze->add_option("--report", analyze_opt.report, "machine-readable report path");
  add_common(analyze);

  std::reverse(args.begin(), args.end());  // CLI11 consumes reversed argv
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (!config_path.empty()) cfg = load_config(config_path);
    auto apply = [&](const char* key, std::string& target) {
      auto it = paths.find(key);
      if (it != paths.end()) target = it->second;
    };
    apply("ltf", cfg.ltf_dir);
    apply("rsd", cfg.rsd_dir);
    apply("annotations", cfg.annotations);
    apply("ontology", cfg.ontology);
    apply("model", cfg.model);
    apply("vocab", cfg.vocab);
    apply("pronouns", cfg.pronouns);
    apply("determiners", cfg.determiners);
    apply("agreement", cfg.agreement);
    apply("rules", cfg.rules);
    if (workers_flag) cfg.workers = *workers_flag;
    if (seed_flag) cfg.tagger.seed = *seed_flag;
    if (threshold_flag) cfg.coref_threshold = *threshold_flag;
    if (partial_credit_flag) cfg.partial_credit = true;
    if (run_id_flag) cfg.run_id = *run_id_flag;
    if (epochs_flag) cfg.tagger.epochs = *epochs_flag;

    if (convert->parsed()) return cmd_convert(cfg, convert_opt);
    if (train->parsed()) return cmd_train(cfg);
    if (tag->parsed()) return cmd_tag(cfg, tag_opt);
    if (coref->parsed()) return cmd_coref(cfg, coref_opt);
    if (correct->parsed()) return cmd_correct(cfg, correct_opt);
    if (score->parsed()) return cmd_score(cfg, score_opt);
    if (analyze->parsed()) return cmd_analyze(cfg, analyze_opt);
    return kExitConfigError;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const data_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDataError;
  }
}

inline int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(std::move(args));
}

}  // namespace fgent::cli
