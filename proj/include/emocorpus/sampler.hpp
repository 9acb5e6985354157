#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emocorpus/error.hpp"
#include "emocorpus/store.hpp"
#include "emocorpus/textmetrics.hpp"
#include "emocorpus/types.hpp"

namespace emocorpus::sampler {

inline constexpr std::size_t kDefaultCap = 1000;

struct Stratum {
  Cefr cefr = Cefr::A2;
  Role role = Role::Client;

  /// "A2/Client"
  std::string label() const;
  auto operator<=>(const Stratum&) const = default;
};

/// Every (level, role) pair, level-major.
std::vector<Stratum> all_strata();

struct TurnRef {
  std::string dialogue_id;
  std::size_t turn = 0;
  bool operator==(const TurnRef&) const = default;
};

enum class OverflowMode {
  Stop,  // the first turn that would exceed the cap ends the sample
  Skip,  // overflowing turns are passed over and drawing continues
};

struct SampleOptions {
  std::size_t cap = kDefaultCap;
  OverflowMode overflow = OverflowMode::Stop;
  metrics::ScoreConfig scoring;
};

struct SampleRun {
  Stratum stratum;
  std::uint64_t seed = 0;
  std::vector<TurnRef> included;
  std::size_t word_count = 0;
  /// Set when drawing ended on a turn that did not fit.
  std::optional<TurnRef> overflow_turn;
  metrics::MetricReport report;
};

/// Words as the readability tokenizer counts them.
std::size_t word_count(std::string_view text,
                       const metrics::TokenizerOptions& opts = {});

/// Turns of accepted dialogues in the stratum, ordered by (id, turn).
std::vector<TurnRef> stratum_turns(const std::vector<store::CorpusRecord>& corpus,
                                   const Stratum& stratum);

/// Seeded Fisher-Yates over mt19937_64 with rejection-sampled bounds, so the
/// permutation depends only on the seed and the input order.
template <typename T>
void shuffle(std::vector<T>& v, std::uint64_t seed);

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base, std::size_t stratum_index,
                          std::size_t run);

/// Throws EmptyStratum when no accepted turn matches, CapTooSmall when no
/// drawn turn fits under the cap (in Stop mode: the first drawn turn).
SampleRun build_sample(const std::vector<store::CorpusRecord>& corpus,
                       const Stratum& stratum, std::uint64_t seed,
                       const SampleOptions& opts = {});

struct Moments {
  std::size_t n = 0;
  double mean = 0;
  /// Sample (n-1) standard deviation; unset below two values.
  std::optional<double> stddev;
};

/// Welford accumulation, exact for constant input.
Moments moments(const std::vector<double>& values);

struct AggregateStats {
  Stratum stratum;
  std::string metric;
  std::size_t run_count = 0;
  double mean = 0;
  std::optional<double> stddev;
};

struct StratumFailure {
  Stratum stratum;
  ErrorCode code;
  std::string message;
};

struct ExperimentResult {
  std::vector<AggregateStats> stats;
  std::vector<SampleRun> runs;
  std::vector<StratumFailure> failures;
};

/// Throws InvalidValue when runs_per_stratum < 2. A stratum that cannot be
/// sampled is reported in `failures` and the others still run.
ExperimentResult run_experiment(const std::vector<store::CorpusRecord>& corpus,
                                const std::vector<Stratum>& strata,
                                std::size_t runs_per_stratum,
                                std::uint64_t base_seed,
                                const SampleOptions& opts = {});

/// Metrics in report order: ari, fre, fkgl, ndc, then optional scores.
std::vector<std::pair<std::string, double>> metric_values(
    const metrics::MetricReport& r);

struct ModeReport {
  bool implicit = false;
  std::vector<std::string> dialogue_ids;
  std::string text;
  metrics::MetricReport report;
};

/// Whole accepted dialogues at `cefr`, merged per mode in id order.
/// Throws EmptyStratum naming the missing mode.
std::pair<ModeReport, ModeReport> run_explicit_vs_implicit(
    const std::vector<store::CorpusRecord>& corpus, Cefr cefr,
    const metrics::ScoreConfig& scoring = {});

inline constexpr std::string_view kExperimentCsvHeader =
    "stratum,metric,run_count,mean,stddev";
inline constexpr std::string_view kModeCsvHeader = "cefr,mode,metric,value";

std::string experiment_csv(const std::vector<AggregateStats>& stats);
std::string mode_csv(Cefr cefr, const ModeReport& explicit_report,
                     const ModeReport& implicit_report);

nlohmann::json to_json(const SampleRun& r);
nlohmann::json to_json(const AggregateStats& s);

}  // namespace emocorpus::sampler

template <typename T>
void emocorpus::sampler::shuffle(std::vector<T>& v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::uint64_t bound = i;
    // Largest multiple of bound that fits; draws above it are rejected.
    const std::uint64_t limit = std::mt19937_64::max() -
                                std::mt19937_64::max() % bound;
    std::uint64_t x;
    do {
      x = rng();
    } while (x >= limit);
    std::swap(v[i - 1], v[x % bound]);
  }
}
