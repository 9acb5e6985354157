#include <fstream>

#include <gtest/gtest.h>

#include "emocorpus/config.hpp"
#include "test_support.hpp"

namespace emocorpus::config {
namespace {

TEST(KeyValues, SectionsQuotesAndComments) {
  const auto kv = parse_key_values(
      "# top\ncorpus = \"data/c.jsonl\"\n\n[provider]\nmodel = gpt # trailing\n"
      "name = \"a # b\"\n[bands]\nA2 = \"[0, 4]\"\n");
  EXPECT_EQ(kv.at("corpus"), "data/c.jsonl");
  EXPECT_EQ(kv.at("provider.model"), "gpt");
  EXPECT_EQ(kv.at("provider.name"), "a # b");
  EXPECT_EQ(kv.at("bands.A2"), "[0, 4]");
}

TEST(KeyValues, Errors) {
  try {
    parse_key_values("a = 1\nno equals here\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line_no(), 2u);
  }
  EXPECT_THROW(parse_key_values("a = 1\na = 2\n"), ParseError);
  EXPECT_THROW(parse_key_values("[open\n"), ParseError);
  EXPECT_THROW(parse_key_values("a = \"unterminated\n"), ParseError);
}

TEST(Bands, IntervalNotation) {
  EXPECT_EQ(parse_band("[0, 5]"), (curation::Band{0, 5, false}));
  EXPECT_EQ(parse_band("(5, 9]"), (curation::Band{5, 9, true}));
  const auto c2 = parse_band("(9, inf)");
  EXPECT_TRUE(std::isinf(c2.hi));
  EXPECT_THROW(parse_band("(9, 10)"), Error);
  EXPECT_THROW(parse_band("[5, 1]"), Error);
  EXPECT_THROW(parse_band("5-9"), Error);
}

TEST(Apply, OverlaysAndResolvesPaths) {
  const auto base = default_config("/data");
  const auto cfg = apply(parse_key_values("corpus = c.jsonl\n"
                                          "[provider]\nkind = mock\nmax_parallel = 2\n"
                                          "timeout_ms = 1500\ntemperature = 0.2\n"
                                          "[lexicons]\neasy_words = /abs/easy.txt\n"
                                          "[bands]\nA2 = \"[0, 4]\"\nB2 = \"(4, 9]\"\n"
                                          "[combiners.carec]\nintercept = 1.5\n"
                                          "sentence_count = -0.25\n"),
                         base, "/etc/emo");
  EXPECT_EQ(cfg.corpus, "/etc/emo/c.jsonl");
  EXPECT_EQ(cfg.provider.kind, "mock");
  EXPECT_EQ(cfg.provider.max_parallel, 2u);
  EXPECT_EQ(cfg.provider.timeout.count(), 1500);
  EXPECT_DOUBLE_EQ(cfg.provider.temperature, 0.2);
  EXPECT_EQ(cfg.lexicons.easy_words, "/abs/easy.txt");
  EXPECT_EQ(cfg.lexicons.emotions_dir, "/data/emotions");
  EXPECT_EQ(cfg.bands.describe(Cefr::A2), curation::CefrBandTable(
      {{Cefr::A2, {0, 4, false}}, {Cefr::B2, {4, 9, true}},
       {Cefr::C2, {9, std::numeric_limits<double>::infinity(), true}}})
      .describe(Cefr::A2));
  EXPECT_TRUE(cfg.bands.contains(Cefr::B2, 4.5));
  EXPECT_DOUBLE_EQ(cfg.combiners.at("carec").intercept, 1.5);
  EXPECT_DOUBLE_EQ(cfg.combiners.at("carec").weights.at("sentence_count"), -0.25);
}

TEST(Apply, RejectsBadInput) {
  const auto base = default_config("/data");
  EXPECT_THROW(apply(parse_key_values("nonsense = 1\n"), base, "/"), Error);
  EXPECT_THROW(apply(parse_key_values("[provider]\nmax_parallel = 0\n"), base, "/"),
               Error);
  EXPECT_THROW(apply(parse_key_values("[provider]\nmax_retries = -1\n"), base, "/"),
               Error);
  EXPECT_THROW(apply(parse_key_values("[bands]\nB1 = \"[0, 1]\"\n"), base, "/"), Error);
  // A2 overlapping B2.
  EXPECT_THROW(apply(parse_key_values("[bands]\nA2 = \"[0, 7]\"\n"), base, "/"), Error);
}

TEST(Resources, BundledLexiconsLoad) {
  testing::TempDir tmp;
  const auto file = tmp.path() / "emo.toml";
  {
    std::ofstream(file) << "[curation]\ncoherence_mode = any_client_turn\n";
  }
  const auto cfg = load_config(file, testing::lexicon_dir());
  const auto res = load_resources(cfg);
  EXPECT_TRUE(res.emotions.expresses(Emotion::Anger, "angry"));
  EXPECT_TRUE(res.scoring.easy_words.count("the"));
  EXPECT_FALSE(res.scoring.syllable_exceptions.empty());
  EXPECT_TRUE(res.scoring.features.stopwords.has_value());
  EXPECT_FALSE(res.brands.empty());
  EXPECT_EQ(res.auto_check_context().mode, curation::CoherenceMode::AnyClientTurn);
}

}  // namespace
}  // namespace emocorpus::config
