#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "emocorpus/store.hpp"
#include "sample_chains.hpp"
#include "test_support.hpp"

namespace emocorpus::cli {
namespace {

using nlohmann::json;
using testing::TempDir;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "emocorpus");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  std::string corpus() const { return (tmp_.path() / "corpus.jsonl").string(); }
  std::vector<std::string> base() const {
    return {"--data-dir", testing::lexicon_dir().string(), "--corpus", corpus()};
  }
  Outcome run_with(std::vector<std::string> args) const {
    auto all = base();
    all.insert(all.end(), args.begin(), args.end());
    return cli(all);
  }
  void ingest_sample() const {
    for (const auto& s : testing::bundled_samples()) {
      const auto stem = s.file.substr(0, s.file.size() - 4);
      const auto r = run_with({"ingest", (testing::samples_dir() / s.file).string(),
                               "--emotion", std::string(to_string(s.emotion)),
                               "--cefr", std::string(to_string(s.cefr)), "--id", stem});
      ASSERT_EQ(r.code, 0) << r.err;
      ASSERT_EQ(r.out, stem + "\n");
    }
  }
  std::string write(const std::string& name, const std::string& content) const {
    const auto p = tmp_.path() / name;
    std::ofstream(p) << content;
    return p.string();
  }

  TempDir tmp_;
};

TEST_F(CliTest, IngestPrintsOneId) {
  const auto r = run_with({"ingest", (testing::samples_dir() / "anger_a2.txt").string(),
                           "--emotion", "anger", "--cefr", "A2"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "d000001\n");
}

TEST_F(CliTest, MineMatchesBruteForceCount) {
  ingest_sample();
  const auto r = run_with({"mine", "--n", "2", "--min-support", "2", "--emotion",
                           "anger", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  // Oracle: count bigrams over the printed anger chains.
  std::map<std::pair<std::string, std::string>, int> counts;
  for (const auto& [name, chain] : testing::printed_chains()) {
    if (name.rfind("anger", 0) != 0) continue;
    std::vector<std::string> items;
    std::stringstream ss(chain);
    for (std::string item; std::getline(ss, item, ';');) items.push_back(item);
    for (std::size_t i = 0; i + 1 < items.size(); ++i) ++counts[{items[i], items[i + 1]}];
  }
  std::map<std::pair<std::string, std::string>, int> expected;
  for (const auto& [k, v] : counts) {
    if (v >= 2) expected[k] = v;
  }
  std::map<std::pair<std::string, std::string>, int> got;
  for (const auto& p : json::parse(r.out)) {
    auto item = [&](int i) {
      return p["pattern"][i]["role"].get<std::string>() + "," +
             p["pattern"][i]["attitude"].get<std::string>();
    };
    got[{item(0), item(1)}] = p["support"].get<int>();
  }
  EXPECT_EQ(got, expected);

  const auto table = run_with({"mine", "--n", "2", "--min-support", "2", "--emotion", "anger"});
  EXPECT_NE(table.out.find("      3  Agent (confirming) -> Client (frustrated)\n"),
            std::string::npos);
}

TEST_F(CliTest, GenerateWithMockGridAndUnreachableProvider) {
  const auto mock = write("mock.toml", "[provider]\nkind = mock\nmax_parallel = 3\n");
  auto r = run_with({"--config", mock, "generate", "--grid", "--count", "1",
                     "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["ids"].size(), 36u);

  const auto down = write("down.toml",
                          "[provider]\nendpoint = \"http://127.0.0.1:9/v1\"\n"
                          "api_key_env = \"\"\nmax_retries = 0\n");
  r = run_with({"generate", "--emotion", "anger", "--cefr", "A2",
                "--provider-config", down});
  EXPECT_EQ(r.code, kProvider);
  EXPECT_NE(r.err.find("cannot reach"), std::string::npos);
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run_with({}).code, kUsage);
  EXPECT_EQ(run_with({"generate", "--emotion", "anger"}).code, kUsage);
  EXPECT_EQ(run_with({"mine", "--n", "1"}).code, kUsage);
  EXPECT_EQ(run_with({"ingest", "x.txt", "--emotion", "bliss", "--cefr", "A2"}).code, kUsage);
  EXPECT_EQ(run_with({"--help"}).code, kOk);
}

TEST_F(CliTest, IoAndValidationExitCodes) {
  EXPECT_EQ(run_with({"ingest", "/nonexistent.txt", "--emotion", "joy", "--cefr", "A2"}).code,
            kIo);
  const auto bad = write("bad.txt", "Narrator (calm): once upon a time\n");
  const auto r = run_with({"ingest", bad, "--emotion", "joy", "--cefr", "A2"});
  EXPECT_EQ(r.code, kValidation);
  EXPECT_NE(r.err.find("bad.txt:1"), std::string::npos) << r.err;
  EXPECT_EQ(run_with({"check", "missing"}).code, kValidation);
}

TEST_F(CliTest, CheckReportsEvidence) {
  ingest_sample();
  const auto r = run_with({"check", "anger_a2", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["evidence"]["emotional_coherence"], true);
  EXPECT_EQ(j["evidence"]["coherence_match"], "angry");
  EXPECT_TRUE(j["evidence"]["fkgl"].is_number());
}

TEST_F(CliTest, ExportTranscriptsRoundTrip) {
  ingest_sample();
  const auto dir = tmp_.path() / "out";
  const auto r = run_with({"export", "--format", "transcript", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto& s : testing::bundled_samples()) {
    const auto stem = s.file.substr(0, s.file.size() - 4);
    const auto exported = lexicon::read_file(dir / (stem + ".txt"));
    EXPECT_EQ(transcript::serialize(transcript::parse(exported)), exported);
    EXPECT_EQ(transcript::parse(exported).turns,
              testing::load_sample(s).turns);
  }
  ASSERT_EQ(run_with({"export", "--format", "csv", "--out", dir.string()}).code, 0);
  const auto gates = lexicon::read_file(dir / "gates.csv");
  EXPECT_EQ(std::count(gates.begin(), gates.end(), '\n'), 7);
}

TEST_F(CliTest, SampleReadabilityIsSeedDeterministic) {
  {
    auto s = store::Store::open(corpus(), store::Store::Mode::Writer);
    for (const auto& ps : testing::bundled_samples()) {
      auto d = testing::load_sample(ps);
      curation::GateRecord g;
      g.emotional_coherence = true;
      g.complexity_coherence = true;
      g.qoi = curation::Qoi::A;
      g.reviewed_at = curation::now_utc();
      g.disposition = curation::Disposition::Accepted;
      d.meta.implicit = ps.emotion == Emotion::Surprise;
      s.append(store::make_record(d, g));
    }
  }
  const auto a = run_with({"sample-readability", "--runs", "4", "--seed", "11"});
  const auto b = run_with({"sample-readability", "--runs", "4", "--seed", "11"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.substr(0, a.out.find('\n')), "stratum,metric,run_count,mean,stddev");
  // 6 strata x 4 metrics.
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 25);
  const auto modes = (tmp_.path() / "modes.csv").string();
  ASSERT_EQ(run_with({"sample-readability", "--runs", "2", "--modes-out", modes}).code, 0);
  const auto m = lexicon::read_file(modes);
  EXPECT_NE(m.find("A2,explicit,fre,"), std::string::npos);
  EXPECT_NE(m.find("C2,implicit,ndc,"), std::string::npos);
  auto s = store::Store::open(corpus(), store::Store::Mode::ReadOnly);
  EXPECT_EQ(s.sample_runs().size(), 3u);
}

}  // namespace
}  // namespace emocorpus::cli
