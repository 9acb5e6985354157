#include <random>

#include <gtest/gtest.h>

#include "emocorpus/curation.hpp"
#include "emocorpus/error.hpp"
#include "test_support.hpp"

namespace emocorpus::curation {
namespace {

using testing::load_sample;
using testing::bundled_samples;

const lexicon::EmotionLexicon& bundled_lexicon() {
  static const auto lex =
      lexicon::load_emotion_lexicon(testing::lexicon_dir() / "emotions");
  return lex;
}

lexicon::EmotionLexicon tiny_lexicon(std::vector<std::string> anger) {
  std::map<Emotion, lexicon::WordList> lists;
  for (Emotion e : kAllEmotions) {
    lexicon::WordList wl;
    wl.name = std::string(to_string(e));
    wl.entries = {std::string(to_string(e)) + "-word"};
    lists.emplace(e, wl);
  }
  lists[Emotion::Anger].entries = {anger.begin(), anger.end()};
  return lexicon::EmotionLexicon(std::move(lists));
}

Dialogue implicit_anger(std::string client_text) {
  Dialogue d = transcript::parse("Client (annoyed): " + client_text +
                                 "\nAgent (calm): I see.");
  d.id = "x";
  d.meta.target_emotion = Emotion::Anger;
  d.meta.cefr = Cefr::A2;
  d.meta.implicit = true;
  return d;
}

TEST(EmotionalCoherence, SampleAngerA2) {
  const auto r = check_emotional_coherence(load_sample(bundled_samples()[0]),
                                           bundled_lexicon());
  EXPECT_TRUE(r.coherent);
  EXPECT_EQ(r.matched, "angry");
}

TEST(EmotionalCoherence, SurpriseDialogueWithAngerTarget) {
  auto d = load_sample(bundled_samples()[3]);
  ASSERT_FALSE(bundled_lexicon().expresses(Emotion::Anger, "surprised"));
  d.meta.target_emotion = Emotion::Anger;
  EXPECT_FALSE(check_emotional_coherence(d, bundled_lexicon()).coherent);
}

TEST(EmotionalCoherence, NoRelatedLabel) {
  auto d = transcript::parse("Client (calm): hi\nAgent (calm): hello\nClient (bored): ok");
  d.meta.target_emotion = Emotion::Fear;
  EXPECT_FALSE(check_emotional_coherence(d, bundled_lexicon()).coherent);
}

TEST(EmotionalCoherence, AnyClientTurnMode) {
  auto d = transcript::parse(
      "Client (calm): hi\nAgent (calm): hello\nClient (scared): help");
  d.meta.target_emotion = Emotion::Fear;
  EXPECT_FALSE(check_emotional_coherence(d, bundled_lexicon()).coherent);
  const auto any = check_emotional_coherence(d, bundled_lexicon(),
                                             CoherenceMode::AnyClientTurn);
  EXPECT_TRUE(any.coherent);
  EXPECT_EQ(any.matched, "scared");
}

TEST(EmotionalCoherence, LabelEqualToEmotionName) {
  auto d = transcript::parse("Client (disgust): eww");
  d.meta.target_emotion = Emotion::Disgust;
  EXPECT_TRUE(check_emotional_coherence(d, tiny_lexicon({"angry"})).coherent);
  d.meta.target_emotion.reset();
  EXPECT_THROW(check_emotional_coherence(d, bundled_lexicon()), Error);
}

TEST(Ied, NoListedWord) {
  const auto lex = tiny_lexicon({"angry", "furious"});
  EXPECT_TRUE(check_ied(implicit_anger("I'm not happy at all"), lex).empty());
}

TEST(Ied, DirectHit) {
  const auto lex = tiny_lexicon({"angry", "furious"});
  EXPECT_EQ(check_ied(implicit_anger("I am so ANGRY"), lex),
            (std::vector<IedViolation>{{0, "angry"}}));
}

TEST(Ied, WholeWordOnly) {
  // Token boundaries: "angrier" is one token distinct from "angry".
  const auto lex = tiny_lexicon({"angry"});
  EXPECT_TRUE(check_ied(implicit_anger("I am angrier than before"), lex).empty());
  EXPECT_EQ(check_ied(implicit_anger("an angry-looking man"), lex).size(), 1u);
}

TEST(Ied, LabelsAndAgentTurnsExempt) {
  const auto lex = tiny_lexicon({"angry"});
  auto d = transcript::parse(
      "Client (angry): fix it\nAgent (calm): you sound angry");
  d.meta.target_emotion = Emotion::Anger;
  EXPECT_TRUE(check_ied(d, lex).empty());
}

TEST(Ied, PropertyTextWithoutListedTokensNeverFlagged) {
  const auto lex = tiny_lexicon({"angry", "furious", "mad"});
  std::mt19937 rng(5);
  const std::vector<std::string> vocab = {"phone", "broken", "madam", "angrily",
                                          "fury", "please", "now", "it's",
                                          "nomad", "furiously", "help"};
  for (int i = 0; i < 300; ++i) {
    std::string text;
    for (int k = 0; k < 12; ++k) {
      text += vocab[rng() % vocab.size()];
      text += (rng() % 4 == 0) ? ". " : " ";
    }
    EXPECT_TRUE(check_ied(implicit_anger(text), lex).empty()) << text;
  }
}

Dialogue with_client_text(const std::string& text, Cefr level) {
  auto d = transcript::parse("Client (angry): " + text);
  d.id = "c";
  d.meta.target_emotion = Emotion::Anger;
  d.meta.cefr = level;
  return d;
}

TEST(ComplexityCoherence, SimpleTextInA2Band) {
  // 1 sentence, 11 words, 12 syllables (today = to-day).
  const auto r = check_complexity_coherence(
      with_client_text("My phone is dead and I need it for work today.", Cefr::A2),
      CefrBandTable{});
  EXPECT_NEAR(r.fkgl, 0.39 * 11 + 11.8 * 12 / 11 - 15.59, 1e-9);
  EXPECT_TRUE(r.coherent);
}

TEST(ComplexityCoherence, DenseTextOutsideA2Band) {
  // 1 sentence, 20 three-syllable words: 0.39*20 + 11.8*3 - 15.59 = 27.61.
  std::string text;
  for (int i = 0; i < 20; ++i) text += (i % 2 ? "potato " : "banana ");
  text.back() = '.';
  const auto a2 = check_complexity_coherence(with_client_text(text, Cefr::A2),
                                             CefrBandTable{});
  EXPECT_NEAR(a2.fkgl, 27.61, 1e-9);
  EXPECT_FALSE(a2.coherent);
  EXPECT_TRUE(check_complexity_coherence(with_client_text(text, Cefr::C2),
                                         CefrBandTable{})
                  .coherent);
}

TEST(ComplexityCoherence, NoClientText) {
  auto d = with_client_text("...", Cefr::A2);
  try {
    check_complexity_coherence(d, CefrBandTable{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateText);
  }
}

TEST(Bands, DefaultsAndValidation) {
  CefrBandTable t;
  EXPECT_TRUE(t.contains(Cefr::A2, 0.0));
  EXPECT_TRUE(t.contains(Cefr::A2, 5.0));
  EXPECT_FALSE(t.contains(Cefr::B2, 5.0));
  EXPECT_TRUE(t.contains(Cefr::B2, 9.0));
  EXPECT_TRUE(t.contains(Cefr::C2, 42.0));
  EXPECT_FALSE(t.contains(Cefr::A2, -0.5));
  EXPECT_EQ(t.describe(Cefr::B2), "(5, 9]");
  EXPECT_THROW(CefrBandTable({{Cefr::A2, {0, 6}},
                              {Cefr::B2, {5, 9, true}},
                              {Cefr::C2, {9, 20, true}}}),
               Error);
  EXPECT_THROW(CefrBandTable({{Cefr::A2, {0, 5}}, {Cefr::B2, {5, 9}}}), Error);
}

TEST(Disposition, TruthTable) {
  for (bool ec : {false, true}) {
    for (bool cc : {false, true}) {
      for (Qoi q : {Qoi::S, Qoi::A, Qoi::F}) {
        const bool accept = ec && cc && q != Qoi::F;
        EXPECT_EQ(decide(ec, cc, q),
                  accept ? Disposition::Accepted : Disposition::Rejected)
            << ec << cc << to_string(q);
      }
    }
  }
  EXPECT_EQ(decide(true, true, std::nullopt), Disposition::Pending);
  EXPECT_EQ(decide(std::nullopt, true, Qoi::S), Disposition::Rejected);
}

GateRecord pending(bool ec, bool cc) {
  GateRecord g;
  g.dialogue_id = "d1";
  g.emotional_coherence = ec;
  g.complexity_coherence = cc;
  return g;
}

TEST(RecordReview, AcceptsSufficient) {
  const auto at = transcript::parse_timestamp("2026-01-02T03:04:05Z");
  const auto g = record_review(pending(true, true), {Qoi::S, "rev", {}, {}, at});
  EXPECT_EQ(g.disposition, Disposition::Accepted);
  EXPECT_EQ(g.reviewer, "rev");
  EXPECT_EQ(g.reviewed_at, at);
}

TEST(RecordReview, FailRejectsRegardless) {
  EXPECT_EQ(record_review(pending(true, true), {Qoi::F, "rev"}).disposition,
            Disposition::Rejected);
}

TEST(RecordReview, OverridesApplied) {
  ReviewInput in{Qoi::A, "rev", std::nullopt, true};
  EXPECT_EQ(record_review(pending(true, false), in).disposition,
            Disposition::Accepted);
}

TEST(RecordReview, SecondReviewRefused) {
  const auto g = record_review(pending(true, true), {Qoi::S, "rev"});
  try {
    record_review(g, {Qoi::F, "other"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AlreadyDisposed);
  }
}

TEST(AutoCheck, PrefillsEvidence) {
  AutoCheckContext ctx;
  ctx.lexicon = &bundled_lexicon();
  auto d = load_sample(bundled_samples()[0]);
  d.meta.implicit = true;
  const auto g = auto_check(d, ctx);
  EXPECT_EQ(g.disposition, Disposition::Pending);
  EXPECT_EQ(g.emotional_coherence, true);
  ASSERT_TRUE(g.evidence.client_fkgl.has_value());
  EXPECT_EQ(g.evidence.band, "[0, 5]");
  EXPECT_EQ(g.complexity_coherence,
            CefrBandTable{}.contains(Cefr::A2, *g.evidence.client_fkgl));
  EXPECT_FALSE(g.reviewed_at.has_value());
  EXPECT_TRUE(g.auto_checked_at.has_value());
}

TEST(GateRecordIo, CsvAndJson) {
  auto g = record_review(pending(true, false),
                         {Qoi::A, "rev", {}, {},
                          transcript::parse_timestamp("2026-01-02T03:04:05Z")});
  g.ied_violations.push_back({2, "angry"});
  g.evidence.client_fkgl = 4.5;
  DialogueMeta meta;
  meta.target_emotion = Emotion::Anger;
  meta.cefr = Cefr::B2;
  meta.implicit = true;
  EXPECT_EQ(to_csv_row(g, meta), "d1,anger,B2,true,true,false,A,rejected");
  EXPECT_EQ(gate_from_json(to_json(g)), g);
}

}  // namespace
}  // namespace emocorpus::curation
