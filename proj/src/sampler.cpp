#include "emocorpus/sampler.hpp"

#include <cmath>
#include <map>

#include <fmt/format.h>

#include "emocorpus/error.hpp"

namespace emocorpus::sampler {

std::string Stratum::label() const {
  return fmt::format("{}/{}", to_string(cefr), to_string(role));
}

std::vector<Stratum> all_strata() {
  std::vector<Stratum> out;
  for (Cefr c : kAllCefrLevels) {
    for (Role r : kAllRoles) out.push_back({c, r});
  }
  return out;
}

std::size_t word_count(std::string_view text,
                       const metrics::TokenizerOptions& opts) {
  return metrics::tokenize_words(text, opts).size();
}

namespace {

bool accepted(const store::CorpusRecord& r) {
  return r.gate.disposition == curation::Disposition::Accepted;
}

std::map<std::string_view, const store::CorpusRecord*> index_by_id(
    const std::vector<store::CorpusRecord>& corpus) {
  std::map<std::string_view, const store::CorpusRecord*> idx;
  for (const auto& r : corpus) idx.emplace(r.id(), &r);
  return idx;
}

metrics::MetricReport score_utterances(const std::vector<std::string_view>& texts,
                                       metrics::ScoreConfig scoring) {
  scoring.strip_speaker_prefixes = false;
  return metrics::score_text(metrics::join_utterances(texts), scoring);
}

}  // namespace

std::vector<TurnRef> stratum_turns(const std::vector<store::CorpusRecord>& corpus,
                                   const Stratum& stratum) {
  std::vector<const store::CorpusRecord*> recs;
  for (const auto& r : corpus) {
    if (accepted(r) && r.dialogue.meta.cefr == stratum.cefr) recs.push_back(&r);
  }
  std::sort(recs.begin(), recs.end(),
            [](auto* a, auto* b) { return a->id() < b->id(); });
  std::vector<TurnRef> out;
  for (const auto* r : recs) {
    for (const auto& t : r->dialogue.turns) {
      if (t.role == stratum.role) out.push_back({r->id(), t.index});
    }
  }
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::size_t stratum_index,
                          std::size_t run) {
  return splitmix64(splitmix64(base + stratum_index) + run);
}

SampleRun build_sample(const std::vector<store::CorpusRecord>& corpus,
                       const Stratum& stratum, std::uint64_t seed,
                       const SampleOptions& opts) {
  auto pool = stratum_turns(corpus, stratum);
  if (pool.empty()) {
    throw Error(ErrorCode::EmptyStratum,
                fmt::format("no accepted {} turns at level {}",
                            to_string(stratum.role), to_string(stratum.cefr)));
  }
  shuffle(pool, seed);
  const auto idx = index_by_id(corpus);

  SampleRun run;
  run.stratum = stratum;
  run.seed = seed;
  std::vector<std::string_view> texts;
  for (const auto& ref : pool) {
    const auto& text = idx.at(ref.dialogue_id)->dialogue.turns.at(ref.turn).text;
    const auto wc = word_count(text, opts.scoring.tokenizer);
    if (run.word_count + wc > opts.cap) {
      if (opts.overflow == OverflowMode::Skip) continue;
      if (run.included.empty()) {
        throw Error(ErrorCode::CapTooSmall,
                    fmt::format("first drawn turn ({} turn {}) has {} words, "
                                "over the cap of {}",
                                ref.dialogue_id, ref.turn, wc, opts.cap));
      }
      run.overflow_turn = ref;
      break;
    }
    run.word_count += wc;
    run.included.push_back(ref);
    texts.push_back(text);
  }
  if (run.included.empty()) {
    throw Error(ErrorCode::CapTooSmall,
                fmt::format("no {} turn fits under the cap of {} words",
                            stratum.label(), opts.cap));
  }
  run.report = score_utterances(texts, opts.scoring);
  return run;
}

Moments moments(const std::vector<double>& values) {
  Moments m;
  double m2 = 0;
  for (double x : values) {
    ++m.n;
    const double delta = x - m.mean;
    m.mean += delta / static_cast<double>(m.n);
    m2 += delta * (x - m.mean);
  }
  if (m.n >= 2) m.stddev = std::sqrt(m2 / static_cast<double>(m.n - 1));
  return m;
}

std::vector<std::pair<std::string, double>> metric_values(
    const metrics::MetricReport& r) {
  std::vector<std::pair<std::string, double>> out = {
      {"ari", r.ari}, {"fre", r.fre}, {"fkgl", r.fkgl}, {"ndc", r.ndc}};
  for (const auto& [k, v] : r.optional_scores) out.emplace_back(k, v);
  return out;
}

ExperimentResult run_experiment(const std::vector<store::CorpusRecord>& corpus,
                                const std::vector<Stratum>& strata,
                                std::size_t runs_per_stratum,
                                std::uint64_t base_seed,
                                const SampleOptions& opts) {
  if (runs_per_stratum < 2) {
    throw Error(ErrorCode::InvalidValue,
                fmt::format("runs per stratum must be at least 2 (got {})",
                            runs_per_stratum));
  }
  ExperimentResult out;
  for (std::size_t s = 0; s < strata.size(); ++s) {
    std::vector<SampleRun> runs;
    try {
      for (std::size_t r = 0; r < runs_per_stratum; ++r) {
        runs.push_back(
            build_sample(corpus, strata[s], derive_seed(base_seed, s, r), opts));
      }
    } catch (const Error& e) {
      out.failures.push_back({strata[s], e.code(), e.what()});
      continue;
    }
    std::vector<std::string> names;
    std::map<std::string, std::vector<double>> series;
    for (const auto& run : runs) {
      for (auto& [name, value] : metric_values(run.report)) {
        auto [it, fresh] = series.try_emplace(name);
        if (fresh) names.push_back(name);
        it->second.push_back(value);
      }
    }
    for (const auto& name : names) {
      const auto& values = series[name];
      // Optional metrics missing from some runs are not comparable.
      if (values.size() != runs.size()) continue;
      const auto m = moments(values);
      out.stats.push_back({strata[s], name, m.n, m.mean, m.stddev});
    }
    for (auto& run : runs) out.runs.push_back(std::move(run));
  }
  return out;
}

std::pair<ModeReport, ModeReport> run_explicit_vs_implicit(
    const std::vector<store::CorpusRecord>& corpus, Cefr cefr,
    const metrics::ScoreConfig& scoring) {
  std::vector<const store::CorpusRecord*> recs;
  for (const auto& r : corpus) {
    if (accepted(r) && r.dialogue.meta.cefr == cefr) recs.push_back(&r);
  }
  std::sort(recs.begin(), recs.end(),
            [](auto* a, auto* b) { return a->id() < b->id(); });
  auto build = [&](bool implicit) {
    ModeReport m;
    m.implicit = implicit;
    std::vector<std::string_view> texts;
    for (const auto* r : recs) {
      if (r->dialogue.meta.implicit != implicit) continue;
      m.dialogue_ids.push_back(r->id());
      for (const auto& t : r->dialogue.turns) texts.push_back(t.text);
    }
    if (m.dialogue_ids.empty()) {
      throw Error(ErrorCode::EmptyStratum,
                  fmt::format("no accepted {} dialogues at level {}",
                              implicit ? "implicit" : "explicit",
                              to_string(cefr)));
    }
    m.text = metrics::join_utterances(texts);
    auto cfg = scoring;
    cfg.strip_speaker_prefixes = false;
    m.report = metrics::score_text(m.text, cfg);
    return m;
  };
  auto explicit_report = build(false);
  auto implicit_report = build(true);
  return {std::move(explicit_report), std::move(implicit_report)};
}

std::string experiment_csv(const std::vector<AggregateStats>& stats) {
  std::string out(kExperimentCsvHeader);
  out += '\n';
  for (const auto& s : stats) {
    out += fmt::format("{},{},{},{:.10g},{}\n", s.stratum.label(), s.metric,
                       s.run_count, s.mean,
                       s.stddev ? fmt::format("{:.10g}", *s.stddev) : "");
  }
  return out;
}

std::string mode_csv(Cefr cefr, const ModeReport& explicit_report,
                     const ModeReport& implicit_report) {
  std::string out(kModeCsvHeader);
  out += '\n';
  for (const auto* m : {&explicit_report, &implicit_report}) {
    for (const auto& [name, value] : metric_values(m->report)) {
      out += fmt::format("{},{},{},{:.10g}\n", to_string(cefr),
                         m->implicit ? "implicit" : "explicit", name, value);
    }
  }
  return out;
}

nlohmann::json to_json(const SampleRun& r) {
  nlohmann::json included = nlohmann::json::array();
  for (const auto& t : r.included) included.push_back({t.dialogue_id, t.turn});
  return {{"stratum", r.stratum.label()},
          {"seed", r.seed},
          {"included", std::move(included)},
          {"word_count", r.word_count},
          {"overflow_turn", r.overflow_turn
                                ? nlohmann::json{r.overflow_turn->dialogue_id,
                                                 r.overflow_turn->turn}
                                : nlohmann::json(nullptr)},
          {"report", metrics::to_json(r.report)}};
}

nlohmann::json to_json(const AggregateStats& s) {
  return {{"stratum", s.stratum.label()},
          {"metric", s.metric},
          {"run_count", s.run_count},
          {"mean", s.mean},
          {"stddev", s.stddev ? nlohmann::json(*s.stddev) : nlohmann::json(nullptr)}};
}

}  // namespace emocorpus::sampler
