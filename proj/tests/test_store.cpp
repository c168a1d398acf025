#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "mavsir/store.hpp"
#include "record_fixture.hpp"

using namespace mavsir;
using testing_support::random_record;

TEST(Registry, IdsAreDistinctAndLookupsAgree) {
  std::set<std::uint32_t> ids;
  for (const auto& t : kTargets) {
    ids.insert(t.id());
    EXPECT_EQ(&find_target(t.code), &find_target(t.name));
  }
  EXPECT_EQ(ids.size(), kTargets.size());
  EXPECT_EQ(fnv1a(""), 2166136261u);
  EXPECT_EQ(fnv1a("a"), 0xe40c292cu);
  EXPECT_THROW(find_target("C9"), DataError);
}

TEST(Registry, CombinedConceptIsTheMaximum) {
  EXPECT_DOUBLE_EQ(combined_concept_score({{"C1", -0.2}, {"C2", 0.4}, {"C3", 0.1}, {"E1", 0.9}}), 0.4);
  EXPECT_DOUBLE_EQ(combined_concept_score({}), -1.0);
}

TEST(Xml, RoundTripIsByteIdentical) {
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const auto r = random_record(s);
    const auto xml = export_xml(r);
    const auto back = import_xml(xml);
    EXPECT_EQ(back, r);
    EXPECT_EQ(export_xml(back), xml);
  }
}

TEST(Xml, EscapesAndStructure) {
  EXPECT_EQ(detail::xml_escape("a<b>&\"'"), "a&lt;b&gt;&amp;&quot;&apos;");
  auto r = random_record(3, 1);
  r.keyframes[0].objects.clear();
  const auto xml = export_xml(r);
  EXPECT_EQ(xml.find("<object"), std::string::npos);
  EXPECT_NE(xml.find("<keyframe idx="), std::string::npos);
  EXPECT_EQ(import_xml(xml).keyframes[0].objects.size(), 0u);
}

TEST(Xml, MalformedInputIsRejected) {
  EXPECT_THROW(import_xml("<shot"), DataError);
  EXPECT_THROW(import_xml("<notashot/>"), DataError);
  auto xml = export_xml(random_record(4));
  const auto pos = xml.find("begin=\"");
  xml.replace(pos, 8, "begin=\"x");
  EXPECT_THROW(import_xml(xml), DataError);
}

namespace {

ShotRecord scored(const std::string& id, double c2) {
  ShotRecord r;
  r.shot_id = id;
  r.source = "src";
  r.frame_begin = 0;
  r.frame_end = 10;
  r.scores["C2"] = c2;
  return r;
}

}  // namespace

TEST(Index, QueryOrdersByScore) {
  ShotIndex idx;
  idx.add(scored("a", 0.1));
  idx.add(scored("b", 0.9));
  const auto q = idx.query("C2", 10);
  ASSERT_EQ(q.items.size(), 2u);
  EXPECT_EQ(q.items[0].shot_id, "b");
  EXPECT_EQ(q.items[1].shot_id, "a");
  EXPECT_EQ(idx.query("MovingVehicles", 1).items.size(), 1u);
  EXPECT_TRUE(idx.query("C4", 5).items.empty());
  EXPECT_THROW(idx.add(scored("a", 0.3)), DataError);
}

TEST(Index, QueryMatchesSortOracle) {
  Rng rng(21);
  ShotIndex idx;
  std::vector<std::pair<double, std::string>> want;
  for (int i = 0; i < 40; ++i) {
    const double v = std::round(rng.uniform(-1, 1) * 8) / 8;  // plenty of ties
    const std::string id = "s" + std::to_string(100 + i);
    idx.add(scored(id, v));
    want.push_back({-v, id});
  }
  std::sort(want.begin(), want.end());
  const auto q = idx.query("C2", 15);
  ASSERT_EQ(q.items.size(), 15u);
  for (int i = 0; i < 15; ++i) {
    EXPECT_EQ(q.items[i].shot_id, want[i].second);
    EXPECT_EQ(q.items[i].score, -want[i].first);
  }
}

TEST(Index, SaveAndLoad) {
  const auto dir = std::filesystem::temp_directory_path() / "mavsir_test_index";
  std::filesystem::remove_all(dir);
  ShotIndex idx;
  for (std::uint64_t s = 1; s <= 4; ++s) idx.add(random_record(s));
  idx.save(dir);
  const auto back = ShotIndex::load(dir);
  ASSERT_EQ(back.size(), idx.size());
  for (const auto* r : idx.records()) EXPECT_EQ(back.at(r->shot_id), *r);
  EXPECT_EQ(ShotIndex::file_name("a/b c"), "a_b_c.xml");
  std::filesystem::remove_all(dir);
  EXPECT_THROW(ShotIndex::load(dir), DataError);
}
