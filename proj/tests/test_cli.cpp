#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include "fgent/cli.hpp"
#include "support/synthetic.hpp"
#include "support/tempdir.hpp"

using namespace fgent;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run_cli(std::initializer_list<std::string> args) {
  return fgent::cli::run(std::vector<std::string>(args));
}

// Writes the cue corpus plus a tiny training configuration. Returns the
// config path.
fs::path write_corpus_and_config(const testsupport::TempDir& dir, std::size_t docs,
                                 std::size_t segments, std::uint64_t seed) {
  auto corpus = testsupport::make_cue_corpus(docs, segments, seed);
  testsupport::write_corpus_files(corpus, dir.path());
  nlohmann::json j = {
      {"ltf_dir", (dir / "ltf").string()},
      {"rsd_dir", (dir / "rsd").string()},
      {"annotations", (dir / "gold.tsv").string()},
      {"ontology", (dir / "ontology.txt").string()},
      {"model", (dir / "model.fgpc").string()},
      {"vocab", (dir / "vocab.txt").string()},
      {"run_id", "test-run"},
      {"tagger",
       {{"hidden", 16},
        {"num_layers", 1},
        {"num_heads", 2},
        {"ffn_dims", 32},
        {"epochs", 6},
        {"batch_size", 4},
        {"max_seq_len", 40},
        {"learning_rate", 0.005},
        {"seed", 7}}},
  };
  fs::path cfg = dir / "config.json";
  std::ofstream os(cfg);
  os << j.dump(2);
  return cfg;
}

}  // namespace

TEST_CASE("convert on an empty corpus dir writes nothing and exits 0") {
  testsupport::TempDir dir;
  fs::create_directories(dir / "ltf");
  std::ofstream(dir / "gold.tsv").close();
  int rc = run_cli({"convert", "--ltf", (dir / "ltf").string(), "--annotations",
                    (dir / "gold.tsv").string(), "--out", (dir / "iob").string()});
  CHECK(rc == 0);
  CHECK(fs::is_directory(dir / "iob"));
  CHECK(fs::is_empty(dir / "iob"));
}

TEST_CASE("convert writes one clean IOB file per document") {
  testsupport::TempDir dir;
  auto corpus = testsupport::make_cue_corpus(3, 3, 11);
  testsupport::write_corpus_files(corpus, dir.path());
  int rc = run_cli({"convert", "--ltf", (dir / "ltf").string(), "--rsd", (dir / "rsd").string(),
                    "--annotations", (dir / "gold.tsv").string(), "--out", (dir / "iob").string()});
  REQUIRE(rc == 0);

  for (const auto& sd : corpus.docs) {
    fs::path iob = dir / "iob" / (sd.doc.doc_id + ".iob");
    REQUIRE(fs::exists(iob));
    std::ifstream is(iob);
    auto rows = read_iob(is);
    TagTracks expect = to_iob(sd.doc, corpus.gold_by_doc[sd.doc.doc_id]);
    std::size_t non_empty = 0;
    for (const auto& seg : sd.doc.segments) non_empty += seg.tokens.empty() ? 0 : 1;
    REQUIRE(rows.size() == non_empty);
    std::size_t r = 0;
    for (std::size_t s = 0; s < sd.doc.segments.size(); ++s) {
      if (sd.doc.segments[s].tokens.empty()) continue;
      for (std::size_t t = 0; t < rows[r].size(); ++t)
        for (std::size_t k = 0; k < kTagTasks; ++k)
          CHECK(rows[r][t].labels[k] == expect.segments[s].tracks[k][t]);
      ++r;
    }
  }
}

TEST_CASE("convert skips corrupt XML with a nonzero exit") {
  testsupport::TempDir dir;
  auto corpus = testsupport::make_cue_corpus(3, 2, 13);
  testsupport::write_corpus_files(corpus, dir.path());
  std::ofstream(dir / "ltf" / "broken.ltf.xml") << "<LCTL_TEXT><DOC id=\"broken\"><SEG";
  int rc = run_cli({"convert", "--ltf", (dir / "ltf").string(), "--annotations",
                    (dir / "gold.tsv").string(), "--out", (dir / "iob").string()});
  CHECK(rc == 1);
  std::size_t written = 0;
  for (auto& e : fs::directory_iterator(dir / "iob")) written += e.is_regular_file() ? 1 : 0;
  CHECK(written == 3);  // the healthy documents still convert
}

TEST_CASE("train then tag produces a parseable, ordered submission") {
  testsupport::TempDir dir;
  fs::path cfg = write_corpus_and_config(dir, 4, 6, 17);
  REQUIRE(run_cli({"train", "--config", cfg.string()}) == 0);
  REQUIRE(fs::exists(dir / "model.fgpc"));
  REQUIRE(fs::exists(dir / "vocab.txt"));

  auto container = ParamContainer::load_file((dir / "model.fgpc").string());
  CHECK(container.meta.count("coref.trained") == 1);

  fs::path out = dir / "submission.tsv";
  REQUIRE(run_cli({"tag", "--config", cfg.string(), "--out", out.string()}) == 0);
  std::ifstream is(out);
  auto rows = parse_submission(is);
  CHECK(!rows.empty());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::tie(rows[i - 1].doc_id, rows[i - 1].start) <=
          std::tie(rows[i].doc_id, rows[i].start));
    CHECK(rows[i].run_id == "test-run");
  }
}

TEST_CASE("train and tag are byte-deterministic for a fixed seed") {
  testsupport::TempDir dir_a, dir_b;
  fs::path cfg_a = write_corpus_and_config(dir_a, 3, 4, 19);
  fs::path cfg_b = write_corpus_and_config(dir_b, 3, 4, 19);

  REQUIRE(run_cli({"train", "--config", cfg_a.string()}) == 0);
  REQUIRE(run_cli({"tag", "--config", cfg_a.string(), "--out", (dir_a / "out.tsv").string(),
                   "--workers", "2"}) == 0);
  REQUIRE(run_cli({"train", "--config", cfg_b.string()}) == 0);
  REQUIRE(run_cli({"tag", "--config", cfg_b.string(), "--out", (dir_b / "out.tsv").string()}) == 0);

  CHECK(slurp(dir_a / "model.fgpc") == slurp(dir_b / "model.fgpc"));
  CHECK(slurp(dir_a / "vocab.txt") == slurp(dir_b / "vocab.txt"));
  CHECK(slurp(dir_a / "out.tsv") == slurp(dir_b / "out.tsv"));
}

TEST_CASE("coref rewrites only the entity_id column") {
  testsupport::TempDir dir;
  fs::path cfg = write_corpus_and_config(dir, 4, 6, 23);
  REQUIRE(run_cli({"train", "--config", cfg.string()}) == 0);
  fs::path tagged = dir / "tagged.tsv";
  REQUIRE(run_cli({"tag", "--config", cfg.string(), "--out", tagged.string()}) == 0);
  fs::path clustered = dir / "clustered.tsv";
  REQUIRE(run_cli({"coref", "--config", cfg.string(), "--submission", tagged.string(), "--out",
                   clustered.string()}) == 0);

  auto before = split_lines(slurp(tagged));
  auto after = split_lines(slurp(clustered));
  REQUIRE(before.size() == after.size());
  bool any_entity_changed = false;
  for (std::size_t i = 0; i < before.size(); ++i) {
    auto a = split(before[i], '\t');
    auto b = split(after[i], '\t');
    REQUIRE(a.size() == b.size());
    for (std::size_t c = 0; c < a.size(); ++c) {
      if (c == 4) {
        any_entity_changed = any_entity_changed || a[c] != b[c];
      } else {
        CHECK(a[c] == b[c]);
      }
    }
  }
  CHECK(any_entity_changed);  // repeated cue names must cluster together

  // clustering is idempotent on re-run
  fs::path again = dir / "clustered2.tsv";
  REQUIRE(run_cli({"coref", "--config", cfg.string(), "--submission", tagged.string(), "--out",
                   again.string()}) == 0);
  CHECK(slurp(clustered) == slurp(again));
}

TEST_CASE("correct applies the ontology stage and the Norovirus rule") {
  testsupport::TempDir dir;
  std::ofstream onto(dir / "onto.txt");
  onto << "GPE.ProvinceState\nPathogen.Virus\nGPE\n";
  onto.close();

  std::vector<SubmissionRow> rows;
  SubmissionRow r;
  r.run_id = "t";
  r.mention_id = "M1";
  r.text = "Illinois";
  r.doc_id = "d";
  r.start = 0;
  r.end = 7;
  r.entity_id = "E1";
  r.type_path = TypePath::parse("LOC.ProvinceState");
  r.mention_class = MentionClass::NAM;
  r.confidence = 0.9;
  rows.push_back(r);
  r.mention_id = "M2";
  r.text = "Norovirus";
  r.start = 20;
  r.end = 28;
  r.type_path = TypePath::parse("GPE");
  rows.push_back(r);
  {
    std::ofstream os(dir / "in.tsv");
    write_submission(os, rows);
  }
  std::ofstream rules(dir / "rules.tsv");
  rules << "virus\tsubstring\tPathogen.Virus\n";
  rules.close();

  REQUIRE(run_cli({"correct", "--ontology", (dir / "onto.txt").string(), "--rules",
                   (dir / "rules.tsv").string(), "--submission", (dir / "in.tsv").string(),
                   "--out", (dir / "out.tsv").string()}) == 0);
  std::ifstream is(dir / "out.tsv");
  auto out = parse_submission(is);
  REQUIRE(out.size() == 2);
  CHECK(out[0].type_path.str() == "GPE.ProvinceState");
  CHECK(out[1].type_path.str() == "Pathogen.Virus");
}

TEST_CASE("correct without rules leaves valid types untouched") {
  testsupport::TempDir dir;
  std::ofstream onto(dir / "onto.txt");
  onto << "FAC.Building.Hospital\nORG.Company\n";
  onto.close();
  std::vector<SubmissionRow> rows;
  SubmissionRow r;
  r.run_id = "t";
  r.mention_id = "M1";
  r.text = "Hospital Corporation";  // contains a leaf term, must stay ORG.Company
  r.doc_id = "d";
  r.start = 0;
  r.end = 19;
  r.entity_id = "E1";
  r.type_path = TypePath::parse("ORG.Company");
  r.mention_class = MentionClass::NAM;
  r.confidence = 1.0;
  rows.push_back(r);
  {
    std::ofstream os(dir / "in.tsv");
    write_submission(os, rows);
  }
  REQUIRE(run_cli({"correct", "--ontology", (dir / "onto.txt").string(), "--submission",
                   (dir / "in.tsv").string(), "--out", (dir / "out.tsv").string()}) == 0);
  CHECK(slurp(dir / "in.tsv") == slurp(dir / "out.tsv"));

  // with --auto-rules the compiled leaf rule fires
  REQUIRE(run_cli({"correct", "--ontology", (dir / "onto.txt").string(), "--auto-rules",
                   "--submission", (dir / "in.tsv").string(), "--out",
                   (dir / "out2.tsv").string()}) == 0);
  std::ifstream is(dir / "out2.tsv");
  CHECK(parse_submission(is)[0].type_path.str() == "FAC.Building.Hospital");
}

TEST_CASE("correct rejects rule files whose targets are not in the ontology") {
  testsupport::TempDir dir;
  std::ofstream(dir / "onto.txt") << "PER\n";
  std::ofstream(dir / "rules.tsv") << "virus\tsubstring\tPathogen.Virus\n";
  std::ofstream(dir / "in.tsv") << "r\tM1\tx\td:0-4\tE1\tPER\tNAM\t1\n";
  int rc = run_cli({"correct", "--ontology", (dir / "onto.txt").string(), "--rules",
                    (dir / "rules.tsv").string(), "--submission", (dir / "in.tsv").string(),
                    "--out", (dir / "out.tsv").string()});
  CHECK(rc == 1);
}

TEST_CASE("score of a file against itself reports 1.0 everywhere") {
  testsupport::TempDir dir;
  auto corpus = testsupport::make_cue_corpus(3, 3, 29);
  testsupport::write_corpus_files(corpus, dir.path());
  fs::path report = dir / "report.tsv";
  REQUIRE(run_cli({"score", "--gold", (dir / "gold.tsv").string(), "--system",
                   (dir / "gold.tsv").string(), "--report", report.string()}) == 0);
  std::size_t metrics = 0;
  for (const auto& line : split_lines(slurp(report))) {
    auto cols = split(line, '\t');
    REQUIRE(cols.size() == 4);
    CHECK(std::stod(cols[1]) == doctest::Approx(1.0));
    CHECK(std::stod(cols[2]) == doctest::Approx(1.0));
    CHECK(std::stod(cols[3]) == doctest::Approx(1.0));
    ++metrics;
  }
  CHECK(metrics == 6);
}

TEST_CASE("analyze reports the five error categories") {
  testsupport::TempDir dir;
  std::string gold_rows =
      "g\tG1\ta\td:0-4\tge1\tPER\tNAM\t1\n"
      "g\tG2\tb\td:10-14\tge2\tGPE\tNAM\t1\n"
      "g\tG3\tc\td:20-24\tge3\tORG\tNAM\t1\n"
      "g\tG4\td\td:30-34\tge1\tPER\tNAM\t1\n";
  std::string sys_rows =
      "s\tS1\ta\td:0-4\tse1\tORG\tNAM\t1\n"
      "s\tS2\tb\td:10-16\tse2\tGPE\tNAM\t1\n"
      "s\tS3\td\td:30-34\tse3\tPER\tNAM\t1\n"
      "s\tS4\tz\td:50-54\tse4\tPER\tNAM\t1\n";
  std::ofstream(dir / "gold.tsv") << gold_rows;
  std::ofstream(dir / "sys.tsv") << sys_rows;
  fs::path report = dir / "errors.tsv";
  REQUIRE(run_cli({"analyze", "--gold", (dir / "gold.tsv").string(), "--system",
                   (dir / "sys.tsv").string(), "--report", report.string()}) == 0);
  auto lines = split_lines(slurp(report));
  REQUIRE(lines.size() >= 5);
  CHECK(lines[0] == "wrong_type\t1");
  CHECK(lines[1] == "extraneous\t1");
  CHECK(lines[2] == "wrong_extent\t1");
  CHECK(lines[3] == "missing\t1");
  CHECK(lines[4] == "coref_error\t1");
}

TEST_CASE("the full pipeline chains cleanly from convert to analyze") {
  testsupport::TempDir dir;
  fs::path cfg = write_corpus_and_config(dir, 4, 6, 37);
  REQUIRE(run_cli({"convert", "--config", cfg.string(), "--out", (dir / "iob").string()}) == 0);
  REQUIRE(run_cli({"train", "--config", cfg.string()}) == 0);
  REQUIRE(run_cli({"tag", "--config", cfg.string(), "--out", (dir / "sys.tsv").string()}) == 0);
  REQUIRE(run_cli({"coref", "--config", cfg.string(), "--submission", (dir / "sys.tsv").string(),
                   "--out", (dir / "coref.tsv").string()}) == 0);
  REQUIRE(run_cli({"correct", "--config", cfg.string(), "--submission",
                   (dir / "coref.tsv").string(), "--out", (dir / "final.tsv").string()}) == 0);
  REQUIRE(run_cli({"score", "--gold", (dir / "gold.tsv").string(), "--system",
                   (dir / "final.tsv").string(), "--report", (dir / "scores.tsv").string()}) == 0);
  REQUIRE(run_cli({"analyze", "--gold", (dir / "gold.tsv").string(), "--system",
                   (dir / "final.tsv").string(), "--report", (dir / "errors.tsv").string()}) == 0);

  auto lines = split_lines(slurp(dir / "scores.tsv"));
  REQUIRE(lines.size() == 6);
  for (const auto& line : lines) {
    auto cols = split(line, '\t');
    REQUIRE(cols.size() == 4);
    for (int c = 1; c < 4; ++c) {
      double v = std::stod(cols[c]);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("missing model or vocab is a config error before any work") {
  testsupport::TempDir dir;
  fs::create_directories(dir / "ltf");
  std::ofstream(dir / "onto.txt") << "PER\n";
  int rc = run_cli({"tag", "--ltf", (dir / "ltf").string(), "--ontology",
                    (dir / "onto.txt").string(), "--model", (dir / "nope.fgpc").string(),
                    "--vocab", (dir / "nope.txt").string(), "--out", (dir / "x.tsv").string()});
  CHECK(rc == 2);
}

TEST_CASE("unknown flags are a usage error") {
  CHECK(run_cli({"score", "--no-such-flag"}) == 2);
}

TEST_CASE("the installed binary runs end to end as a subprocess") {
  const char* bin = std::getenv("FGENT_BIN");
  if (!bin) return;  // only wired up under ctest
  testsupport::TempDir dir;
  auto corpus = testsupport::make_cue_corpus(2, 2, 31);
  testsupport::write_corpus_files(corpus, dir.path());
  std::string cmd = std::string(bin) + " score --gold " + (dir / "gold.tsv").string() +
                    " --system " + (dir / "gold.tsv").string() + " > " +
                    (dir / "stdout.txt").string() + " 2>&1";
  int rc = std::system(cmd.c_str());
  CHECK(rc == 0);
  CHECK(slurp(dir / "stdout.txt").find("strong_mention_match") != std::string::npos);
}
