#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "emocorpus/error.hpp"
#include "emocorpus/store.hpp"
#include "test_support.hpp"

namespace emocorpus::store {
namespace {

using testing::TempDir;

const std::vector<std::string> kClientAttitudes = {"frustrated", "angry",
                                                   "calm", "relieved"};
const std::vector<std::string> kAgentAttitudes = {"sympathetic", "helpful",
                                                  "apologetic"};

Dialogue random_dialogue(std::mt19937_64& rng) {
  auto pick = [&](const auto& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  Dialogue d;
  const int n = std::uniform_int_distribution<int>(1, 7)(rng);
  for (int i = 0; i < n; ++i) {
    const bool client = i % 2 == 0;
    d.turns.push_back({static_cast<std::size_t>(i),
                       client ? Role::Client : Role::Agent,
                       client ? pick(kClientAttitudes) : pick(kAgentAttitudes),
                       client ? "My phone does not work." : "Let me help."});
  }
  d.meta.target_emotion = pick(std::vector<Emotion>(kAllEmotions.begin(),
                                                    kAllEmotions.end()));
  d.meta.cefr = pick(std::vector<Cefr>(kAllCefrLevels.begin(), kAllCefrLevels.end()));
  d.meta.implicit = rng() % 2 == 0;
  return d;
}

curation::GateRecord random_gate(std::mt19937_64& rng) {
  curation::GateRecord g;
  g.emotional_coherence = rng() % 2 == 0;
  g.complexity_coherence = rng() % 2 == 0;
  if (rng() % 3 != 0) {
    g.qoi = static_cast<curation::Qoi>(rng() % 3);
    g.reviewed_at = curation::now_utc();
    g.reviewer = "tester";
  }
  g.disposition = curation::decide(g.emotional_coherence,
                                   g.complexity_coherence, g.qoi);
  return g;
}

curation::GateRecord pending_gate() {
  curation::GateRecord g;
  g.emotional_coherence = true;
  g.complexity_coherence = true;
  return g;
}

TEST(Store, ReadYourWriteAndAutoIds) {
  TempDir tmp;
  auto s = Store::open(tmp.path() / "c.jsonl", Store::Mode::Writer);
  std::mt19937_64 rng(1);
  const auto a = s.append(make_record(random_dialogue(rng), pending_gate()));
  const auto b = s.append(make_record(random_dialogue(rng), pending_gate()));
  EXPECT_EQ(a, "d000001");
  EXPECT_EQ(b, "d000002");
  EXPECT_EQ(s.get(a).gate.dialogue_id, a);
  EXPECT_EQ(s.size(), 2u);
}

TEST(Store, DuplicateIdRejected) {
  TempDir tmp;
  auto s = Store::open(tmp.path() / "c.jsonl", Store::Mode::Writer);
  auto d = testing::load_sample(testing::bundled_samples()[0]);
  s.append(make_record(d, pending_gate()));
  try {
    s.append(make_record(d, pending_gate()));
    FAIL() << "expected DuplicateId";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DuplicateId);
  }
}

TEST(Store, IdsStayMonotonicAcrossReopen) {
  TempDir tmp;
  const auto path = tmp.path() / "c.jsonl";
  std::mt19937_64 rng(2);
  {
    auto s = Store::open(path, Store::Mode::Writer);
    s.append(make_record(random_dialogue(rng), pending_gate()));
    s.append(make_record(random_dialogue(rng), pending_gate()));
  }
  auto s = Store::open(path, Store::Mode::Writer);
  EXPECT_EQ(s.append(make_record(random_dialogue(rng), pending_gate())),
            "d000003");
}

TEST(Store, UnknownIdAndInvalidRecord) {
  TempDir tmp;
  auto s = Store::open(tmp.path() / "c.jsonl", Store::Mode::Writer);
  EXPECT_THROW(s.get("nope"), Error);
  auto d = testing::load_sample(testing::bundled_samples()[0]);
  auto g = pending_gate();
  g.disposition = curation::Disposition::Accepted;  // no qoi: contradictory
  EXPECT_THROW(s.append(make_record(d, g)), Error);
  EXPECT_EQ(s.size(), 0u);
}

TEST(Store, SecondWriterIsLockedOut) {
  TempDir tmp;
  const auto path = tmp.path() / "c.jsonl";
  auto w = Store::open(path, Store::Mode::Writer);
  try {
    Store::open(path, Store::Mode::Writer);
    FAIL() << "expected StoreLocked";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StoreLocked);
  }
  auto r = Store::open(path, Store::Mode::ReadOnly);
  EXPECT_FALSE(r.writable());
  EXPECT_THROW(r.append_sample_run({{"x", 1}}), Error);
}

TEST(Store, ReaderSeesWritesAfterRefresh) {
  TempDir tmp;
  const auto path = tmp.path() / "c.jsonl";
  auto w = Store::open(path, Store::Mode::Writer);
  auto r = Store::open(path, Store::Mode::ReadOnly);
  std::mt19937_64 rng(3);
  const auto id = w.append(make_record(random_dialogue(rng), pending_gate()));
  EXPECT_EQ(r.find(id), nullptr);
  r.refresh();
  ASSERT_NE(r.find(id), nullptr);
}

TEST(Store, AmendmentsAreWriteOnce) {
  TempDir tmp;
  const auto path = tmp.path() / "c.jsonl";
  auto d = testing::load_sample(testing::bundled_samples()[0]);
  std::string id;
  {
    auto s = Store::open(path, Store::Mode::Writer);
    id = s.append(make_record(d, pending_gate()));
    const auto reviewed = curation::record_review(
        s.get(id).gate, {curation::Qoi::S, "ana", {}, {}, {}});
    s.amend_gate(reviewed);
    EXPECT_EQ(s.get(id).gate.disposition, curation::Disposition::Accepted);
    try {
      s.amend_gate(reviewed);
      FAIL() << "expected AlreadyDisposed";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::AlreadyDisposed);
    }
    curation::GateRecord ghost = reviewed;
    ghost.dialogue_id = "ghost";
    EXPECT_THROW(s.amend_gate(ghost), Error);
  }
  auto s = Store::open(path, Store::Mode::ReadOnly);
  EXPECT_EQ(s.get(id).gate.disposition, curation::Disposition::Accepted);
  EXPECT_EQ(s.get(id).gate.reviewer, "ana");
}

TEST(Store, TornFinalLineIsIgnored) {
  TempDir tmp;
  const auto path = tmp.path() / "c.jsonl";
  std::mt19937_64 rng(4);
  {
    auto s = Store::open(path, Store::Mode::Writer);
    s.append(make_record(random_dialogue(rng), pending_gate()));
  }
  { std::ofstream(path, std::ios::app) << "{\"id\":\"d0000"; }
  auto s = Store::open(path, Store::Mode::ReadOnly);
  EXPECT_EQ(s.size(), 1u);
}

TEST(Store, CorruptMiddleLineIsReported) {
  TempDir tmp;
  const auto path = tmp.path() / "c.jsonl";
  { std::ofstream(path) << "garbage\n{}\n"; }
  try {
    Store::open(path, Store::Mode::ReadOnly);
    FAIL() << "expected CorruptRecord";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CorruptRecord);
  }
}

TEST(Store, ReopenRoundTripsEverything) {
  TempDir tmp;
  const auto path = tmp.path() / "c.jsonl";
  std::mt19937_64 rng(5);
  std::vector<CorpusRecord> written;
  {
    auto s = Store::open(path, Store::Mode::Writer);
    for (int i = 0; i < 40; ++i) {
      s.append(make_record(random_dialogue(rng), random_gate(rng)));
    }
    s.append_sample_run({{"seed", 7}});
    written = s.query({});
  }
  auto s = Store::open(path, Store::Mode::ReadOnly);
  EXPECT_EQ(s.query({}), written);
  ASSERT_EQ(s.sample_runs().size(), 1u);
  EXPECT_EQ(s.sample_runs()[0]["seed"], 7);
}

TEST(Store, QueryMatchesBruteForce) {
  TempDir tmp;
  auto s = Store::open(tmp.path() / "c.jsonl", Store::Mode::Writer);
  std::mt19937_64 rng(6);
  std::vector<CorpusRecord> all;
  for (int i = 0; i < 120; ++i) {
    const auto id = s.append(make_record(random_dialogue(rng), random_gate(rng)));
    all.push_back(s.get(id));
  }
  for (int trial = 0; trial < 200; ++trial) {
    QueryFilter f;
    if (rng() % 2) f.emotion = kAllEmotions[rng() % kAllEmotions.size()];
    if (rng() % 2) f.cefr = kAllCefrLevels[rng() % kAllCefrLevels.size()];
    if (rng() % 3 == 0) f.implicit = rng() % 2 == 0;
    if (rng() % 3 == 0) f.has_role = rng() % 2 ? Role::Client : Role::Agent;
    if (rng() % 3 == 0) f.disposition = static_cast<curation::Disposition>(rng() % 3);
    if (rng() % 4 == 0) f.qoi = static_cast<curation::Qoi>(rng() % 3);
    std::vector<CorpusRecord> expected;
    for (const auto& r : all) {
      const auto& m = r.dialogue.meta;
      bool ok = true;
      if (f.emotion && *f.emotion != *m.target_emotion) ok = false;
      if (f.cefr && *f.cefr != *m.cefr) ok = false;
      if (f.implicit && *f.implicit != m.implicit) ok = false;
      if (f.disposition && *f.disposition != r.gate.disposition) ok = false;
      if (f.qoi && f.qoi != r.gate.qoi) ok = false;
      if (f.has_role) {
        bool found = false;
        for (const auto& t : r.dialogue.turns) found |= t.role == *f.has_role;
        ok = ok && found;
      }
      if (ok) expected.push_back(r);
    }
    EXPECT_EQ(s.query(f), expected);
  }
}

TEST(Mining, SupportsSumToWindowCount) {
  std::mt19937_64 rng(7);
  std::vector<CorpusRecord> recs;
  for (int i = 0; i < 80; ++i) {
    auto d = random_dialogue(rng);
    d.id = "r" + std::to_string(i);
    recs.push_back(make_record(d, pending_gate()));
  }
  for (std::size_t n = 2; n <= 4; ++n) {
    std::size_t windows = 0;
    for (const auto& r : recs) {
      const auto len = r.chain.entries.size();
      if (len >= n) windows += len - n + 1;
    }
    std::size_t total = 0;
    const auto patterns = mine_chain_patterns(recs, n, 1);
    for (const auto& p : patterns) {
      EXPECT_EQ(p.gram.size(), n);
      total += p.support;
    }
    EXPECT_EQ(total, windows);
    for (std::size_t i = 1; i < patterns.size(); ++i) {
      EXPECT_GE(patterns[i - 1].support, patterns[i].support);
      if (patterns[i - 1].support == patterns[i].support) {
        EXPECT_LT(patterns[i - 1].gram, patterns[i].gram);
      }
    }
  }
}

TEST(Mining, MinSupportFiltersAndArgsValidated) {
  Dialogue d = transcript::parse(
      "Client (frustrated): a\nAgent (sympathetic): b\n"
      "Client (frustrated): c\nAgent (sympathetic): d");
  d.id = "x";
  const auto recs = std::vector<CorpusRecord>{make_record(d, pending_gate())};
  const auto p = mine_chain_patterns(recs, 2, 2);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0].support, 2u);
  EXPECT_EQ(p[0].gram[0], std::make_pair(Role::Client, std::string("frustrated")));
  EXPECT_THROW(mine_chain_patterns(recs, 1, 1), Error);
  EXPECT_THROW(mine_chain_patterns(recs, 2, 0), Error);
}

TEST(Mining, SampleAngerDialoguesFrustratedSympatheticCount) {
  TempDir tmp;
  auto s = Store::open(tmp.path() / "c.jsonl", Store::Mode::Writer);
  for (const auto& ps : testing::bundled_samples()) {
    s.append(make_record(testing::load_sample(ps), pending_gate()));
  }
  QueryFilter f;
  f.emotion = Emotion::Anger;
  const auto patterns = s.mine_chain_patterns(f, 2, 1);
  const ChainGram want = {{Role::Client, "frustrated"}, {Role::Agent, "sympathetic"}};
  auto it = std::find_if(patterns.begin(), patterns.end(),
                         [&](const ChainPattern& p) { return p.gram == want; });
  ASSERT_NE(it, patterns.end());
  // Only the A2 chain contains this bigram; B2 and C2 pair frustrated with
  // empathetic.
  EXPECT_EQ(it->support, 1u);
  EXPECT_EQ(it->emotion, Emotion::Anger);
  const ChainGram shared = {{Role::Client, "angry"}, {Role::Agent, "attentive"}};
  auto top = s.mine_chain_patterns(f, 2, 2);
  EXPECT_TRUE(std::any_of(top.begin(), top.end(),
                          [&](const ChainPattern& p) { return p.gram == shared; }));
}

}  // namespace
}  // namespace emocorpus::store
