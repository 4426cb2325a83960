#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "hopchain/catalog.hpp"

using namespace hopchain;

namespace {

double dist(const Catalog& c, std::string_view a, std::string_view b) {
  return tree_distance(c, a, b).value;
}

}  // namespace

TEST(Catalog, BundledHasSeventyOneLanguagesWithEnglishReference) {
  const Catalog& c = bundled_catalog();
  EXPECT_EQ(c.size(), 71u);
  EXPECT_EQ(c.reference(), "en");
  EXPECT_TRUE(c.contains("en"));
  EXPECT_EQ(c.non_reference_codes().size(), 70u);
}

TEST(Catalog, LanguagesSortedByCode) {
  const auto& langs = bundled_catalog().languages();
  EXPECT_TRUE(std::is_sorted(langs.begin(), langs.end(),
                             [](const Language& a, const Language& b) { return a.code < b.code; }));
}

TEST(Catalog, ParsesCommentsAndMinimalFile) {
  const Catalog c = parse_catalog("# header\nen\tEnglish\tGermanic>English\n\nde\tGerman\tGermanic>German\n");
  EXPECT_EQ(c.size(), 2u);
  EXPECT_EQ(c.at("de").name, "German");
  EXPECT_EQ(c.at("de").family_path, (std::vector<std::string>{"Germanic", "German"}));
}

TEST(Catalog, RejectsDuplicateCode) {
  EXPECT_THROW(parse_catalog("en\tEnglish\tA>English\nen\tEnglish2\tA>English2\n"), IntegrityError);
}

TEST(Catalog, RejectsMissingReference) {
  EXPECT_THROW(parse_catalog("de\tGerman\tA>German\nfr\tFrench\tB>French\n"), IntegrityError);
}

TEST(Catalog, RejectsSingleLanguage) {
  EXPECT_THROW(parse_catalog("en\tEnglish\tA>English\n"), IntegrityError);
}

TEST(Catalog, RejectsMalformedLines) {
  EXPECT_THROW(parse_catalog("en\tEnglish\nde\tGerman\tA>German\n"), IntegrityError);
  EXPECT_THROW(parse_catalog("en\tEnglish\t\nde\tGerman\tA>German\n"), IntegrityError);
}

TEST(Catalog, AlternateReference) {
  const Catalog c = parse_catalog("en\tEnglish\tA>English\nde\tGerman\tA>German\n", "de");
  EXPECT_EQ(c.reference(), "de");
  EXPECT_EQ(c.non_reference_codes(), (std::vector<std::string>{"en"}));
}

TEST(Catalog, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "hopchain_catalog_test.tsv";
  std::ofstream(path) << "en\tEnglish\tA>English\nfr\tFrench\tB>French\n";
  EXPECT_EQ(load_catalog(path).size(), 2u);
  std::filesystem::remove(path);
  EXPECT_THROW(load_catalog(path), StoreError);
}

TEST(Catalog, UnknownCode) {
  EXPECT_THROW(bundled_catalog().at("xx"), std::invalid_argument);
  EXPECT_THROW(tree_distance(bundled_catalog(), "en", "xx"), std::invalid_argument);
}

TEST(TreeDistance, HandCounts) {
  const Catalog c = parse_catalog(
      "en\tEnglish\tRoot>A>English\n"
      "de\tGerman\tRoot>A>German\n"
      "ru\tRussian\tRoot>B>Russian\n"
      "zh\tChinese\tOther>Chinese\n");
  EXPECT_EQ(dist(c, "en", "en"), 0.0);
  EXPECT_EQ(dist(c, "en", "de"), 2.0);
  EXPECT_EQ(dist(c, "en", "ru"), 4.0);
  // No shared root: both paths climb to a virtual common root.
  EXPECT_EQ(dist(c, "en", "zh"), 5.0);
}

TEST(TreeDistance, SharedRootDepthTwo) {
  const Catalog c = parse_catalog("en\tEnglish\tRoot>X>English\nfr\tFrench\tRoot>Y>French\n");
  EXPECT_EQ(dist(c, "en", "fr"), 4.0);
}

TEST(TreeDistance, RomanceCloserThanSlavic) {
  const Catalog& c = bundled_catalog();
  EXPECT_LT(dist(c, "pt", "it"), dist(c, "pt", "ru"));
}

TEST(TreeDistance, MetricOnBundledCatalog) {
  const Catalog& c = bundled_catalog();
  std::vector<std::string> codes;
  for (const auto& l : c.languages()) codes.push_back(l.code);
  double max_seen = 0;
  for (const auto& a : codes) {
    for (const auto& b : codes) {
      const double ab = dist(c, a, b);
      EXPECT_GE(ab, 0.0);
      EXPECT_EQ(ab, dist(c, b, a));
      EXPECT_EQ(ab == 0.0, a == b) << a << " " << b;
      max_seen = std::max(max_seen, ab);
      for (const auto& m : codes) {
        ASSERT_LE(ab, dist(c, a, m) + dist(c, m, b)) << a << " " << m << " " << b;
      }
    }
  }
  EXPECT_EQ(c.max_distance().value, max_seen);
}

TEST(Catalog, FamilyMembersForStudySets) {
  const Catalog& c = bundled_catalog();
  EXPECT_EQ(c.family_members("Romance"),
            (std::vector<std::string>{"ca", "es", "fr", "it", "pt", "ro"}));
  EXPECT_EQ(c.family_members("Germanic"),
            (std::vector<std::string>{"af", "da", "de", "nl", "no", "sv"}));
  for (const char* f : {"Indic", "Iranian", "Sino-Tibetan", "Slavic"}) {
    EXPECT_GE(c.family_members(f).size(), 2u) << f;
  }
  EXPECT_TRUE(c.family_members("Nonexistent").empty());
  // Leaf names are not families.
  EXPECT_TRUE(c.family_members("Portuguese").empty());
}
