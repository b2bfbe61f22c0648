#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fgent/ontology.hpp"

using namespace fgent;

TEST_CASE("load_ontology keeps listed paths and their prefixes") {
  auto h = TypeHierarchy::load("GPE.ProvinceState\nPER.Artist.Photographer\n");
  CHECK(h.roots().size() == 2);
  CHECK(h.contains(TypePath::parse("GPE")));
  CHECK(h.contains(TypePath::parse("GPE.ProvinceState")));
  CHECK(h.contains(TypePath::parse("PER.Artist")));
  CHECK(!h.contains(TypePath::parse("LOC")));
  const auto& paths = h.paths_ending_in("ProvinceState");
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].str() == "GPE.ProvinceState");
}

TEST_CASE("load_ontology handles comments, blanks and duplicates") {
  auto h = TypeHierarchy::load("# comment\n\nPER.Artist\nPER.Artist\n");
  CHECK(h.path_count() == 2);  // PER, PER.Artist
}

TEST_CASE("load_ontology on an empty file yields an empty hierarchy") {
  auto h = TypeHierarchy::load("");
  CHECK(h.empty());
}

TEST_CASE("load_ontology rejects over-deep paths with a line number") {
  try {
    TypeHierarchy::load("PER\nA.B.C.D\n");
    FAIL("expected format_error");
  } catch (const format_error& e) {
    CHECK(e.line == 2);
  }
  CHECK_THROWS_AS(TypeHierarchy::load("A..B\n"), format_error);
}

TEST_CASE("ancestors returns strict prefixes, shortest first") {
  auto p = TypePath::parse("PER.Artist.Photographer");
  auto anc = ancestors(p);
  REQUIRE(anc.size() == 2);
  CHECK(anc[0].str() == "PER");
  CHECK(anc[1].str() == "PER.Artist");
  CHECK(ancestors(TypePath::parse("GPE")).empty());
}

TEST_CASE("ancestors of random three-level paths form the prefix chain") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::string> levels = {"A" + std::to_string(rng() % 50),
                                       "B" + std::to_string(rng() % 50),
                                       "C" + std::to_string(rng() % 50)};
    TypePath p(levels);
    auto anc = ancestors(p);
    REQUIRE(anc.size() == 2);
    CHECK(anc[0].strict_ancestor_of(p));
    CHECK(anc[1].strict_ancestor_of(p));
    CHECK(anc[0].strict_ancestor_of(anc[1]));
  }
}

TEST_CASE("correct_type repairs the worked ProvinceState example") {
  auto h = TypeHierarchy::load("GPE.ProvinceState\nLOC.Position\n");
  auto r = correct_type(TypePath::parse("LOC.ProvinceState"), h);
  CHECK(r.path.str() == "GPE.ProvinceState");
  CHECK(r.outcome == CorrectionOutcome::corrected);
  CHECK(!r.ambiguous);
}

TEST_CASE("correct_type leaves valid paths unchanged") {
  auto h = TypeHierarchy::load("PER.Artist.Photographer\n");
  auto r = correct_type(TypePath::parse("PER.Artist"), h);
  CHECK(r.path.str() == "PER.Artist");
  CHECK(r.outcome == CorrectionOutcome::unchanged);
}

TEST_CASE("correct_type falls back to the longest valid prefix") {
  auto h = TypeHierarchy::load("PER.Artist\n");
  auto r = correct_type(TypePath::parse("PER.Artist.Sculptor"), h);
  CHECK(r.path.str() == "PER.Artist");
  CHECK(r.outcome == CorrectionOutcome::prefix_fallback);
}

TEST_CASE("correct_type flags fully unknown predictions") {
  auto h = TypeHierarchy::load("PER.Artist\n");
  auto r = correct_type(TypePath::parse("XYZ.Unseen"), h);
  CHECK(r.path.str() == "XYZ.Unseen");
  CHECK(r.outcome == CorrectionOutcome::unresolved);
}

TEST_CASE("ambiguous leaves prefer the longest matching suffix, then smallest") {
  auto h = TypeHierarchy::load("ORG.Unit\nFAC.Part.Unit\n");
  // suffix Part.Unit matches FAC.Part.Unit more deeply
  auto r = correct_type(TypePath::parse("LOC.Part.Unit"), h);
  CHECK(r.path.str() == "FAC.Part.Unit");
  CHECK(r.ambiguous);
  // no deeper suffix in common: lexicographically smallest candidate wins
  auto r2 = correct_type(TypePath::parse("GPE.Unit"), h);
  CHECK(r2.path.str() == "FAC.Part.Unit");
  CHECK(r2.ambiguous);
}

TEST_CASE("correct_type restores corrupted level-1 names over unique leaves") {
  std::mt19937_64 rng(17);
  std::string text;
  std::vector<TypePath> truth;
  for (int i = 0; i < 40; ++i) {
    TypePath p({"R" + std::to_string(i % 7), "M" + std::to_string(i), "L" + std::to_string(i)});
    truth.push_back(p);
    text += p.str() + "\n";
  }
  auto h = TypeHierarchy::load(text);
  for (const auto& p : truth) {
    TypePath corrupted = p;
    corrupted.levels[0] = "WRONG" + std::to_string(rng() % 100);
    auto r = correct_type(corrupted, h);
    CHECK(r.path == p);
  }
}

TEST_CASE("correct_type is idempotent and stays inside the hierarchy") {
  std::mt19937_64 rng(29);
  auto h = TypeHierarchy::load(
      "PER.Artist.Photographer\nPER.Artist.Painter\nORG.Company\nGPE.ProvinceState\nFAC.Part.Unit\n"
      "ORG.Unit\n");
  std::vector<std::string> names = {"PER",  "Artist", "Photographer", "Painter",      "ORG",
                                    "Company", "GPE",  "ProvinceState", "Unit",        "Part",
                                    "FAC",  "Nope",   "Missing",      "Photographer", "X"};
  for (int i = 0; i < 500; ++i) {
    std::size_t depth = 1 + rng() % 3;
    std::vector<std::string> levels;
    for (std::size_t d = 0; d < depth; ++d) levels.push_back(names[rng() % names.size()]);
    TypePath p(levels);
    auto once = correct_type(p, h);
    auto twice = correct_type(once.path, h);
    CHECK(twice.path == once.path);
    if (once.outcome != CorrectionOutcome::unresolved) CHECK(h.contains(once.path));
  }
}
