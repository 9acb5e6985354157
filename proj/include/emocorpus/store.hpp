#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "emocorpus/curation.hpp"
#include "emocorpus/textmetrics.hpp"
#include "emocorpus/transcript.hpp"

namespace emocorpus::store {

struct CorpusRecord {
  Dialogue dialogue;
  curation::GateRecord gate;
  AttitudeChain chain;
  std::optional<metrics::MetricReport> metric_report;

  const std::string& id() const { return dialogue.id; }
  bool operator==(const CorpusRecord&) const = default;
};

/// Builds a record with a fresh chain and a gate keyed to the dialogue id.
CorpusRecord make_record(Dialogue d, curation::GateRecord gate,
                         std::optional<metrics::MetricReport> report = {});

struct QueryFilter {
  std::optional<Emotion> emotion;
  std::optional<Cefr> cefr;
  std::optional<bool> implicit;
  std::optional<Role> has_role;  // at least one turn by this role
  std::optional<curation::Disposition> disposition;
  std::optional<curation::Qoi> qoi;

  bool matches(const CorpusRecord& r) const;
};

using ChainGram = std::vector<std::pair<Role, std::string>>;

struct ChainPattern {
  ChainGram gram;
  std::size_t support = 0;
  std::optional<Emotion> emotion;  // stratum the pattern was mined in
  std::optional<Cefr> cefr;
};

/// Counts every contiguous n-gram over the chains of `records`. Support is
/// the total occurrence count. Sorted by support desc, then gram ascending.
std::vector<ChainPattern> mine_chain_patterns(
    const std::vector<CorpusRecord>& records, std::size_t n,
    std::size_t min_support);

/// Throws InvalidDialogue / CorruptRecord when a record breaks an invariant.
void validate_record(const CorpusRecord& r);

/// Append-only JSON-lines corpus. Record lines hold a full CorpusRecord;
/// amendment lines `{"amend": id, "gate": {...}}` replace a gate through a
/// legal transition; `{"sample_run": {...}}` lines keep experiment runs.
class Store {
 public:
  enum class Mode { ReadOnly, Writer };

  /// Writer mode takes an exclusive lock on `<path>.lock`; a second writer
  /// gets StoreLocked. The file is created if missing (writer only).
  static Store open(const std::filesystem::path& path, Mode mode);

  Store(Store&&) noexcept;
  Store& operator=(Store&&) noexcept;
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;
  ~Store();

  /// Assigns an id when the dialogue has none. Returns the record id.
  std::string append(CorpusRecord record);

  /// Only pending -> pending (re-check) and pending -> disposed are legal.
  void amend_gate(const curation::GateRecord& gate);

  void append_sample_run(const nlohmann::json& run);

  /// Re-reads the log, picking up appends from other processes.
  void refresh();

  const CorpusRecord& get(const std::string& id) const;  // UnknownId
  const CorpusRecord* find(const std::string& id) const;
  std::vector<CorpusRecord> query(const QueryFilter& filter = {}) const;
  std::vector<ChainPattern> mine_chain_patterns(const QueryFilter& filter,
                                                std::size_t n,
                                                std::size_t min_support) const;
  const std::vector<nlohmann::json>& sample_runs() const { return runs_; }

  std::size_t size() const { return records_.size(); }
  bool writable() const { return mode_ == Mode::Writer; }
  const std::filesystem::path& path() const { return path_; }

 private:
  Store(std::filesystem::path path, Mode mode);
  void load();
  void write_line(const nlohmann::json& line);
  void require_writer() const;

  std::filesystem::path path_;
  Mode mode_;
  int lock_fd_ = -1;
  int log_fd_ = -1;
  std::map<std::string, CorpusRecord> records_;
  std::vector<nlohmann::json> runs_;
  std::size_t next_seq_ = 1;
};

nlohmann::json to_json(const CorpusRecord& r);
CorpusRecord record_from_json(const nlohmann::json& j);
nlohmann::json summary_json(const CorpusRecord& r);
nlohmann::json to_json(const ChainPattern& p);

}  // namespace emocorpus::store
