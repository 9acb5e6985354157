#include "emocorpus/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include <fmt/format.h>

#include "emocorpus/error.hpp"
#include "emocorpus/lexicons.hpp"
#include "text_util.hpp"

namespace emocorpus::store {

using curation::Disposition;

CorpusRecord make_record(Dialogue d, curation::GateRecord gate,
                         std::optional<metrics::MetricReport> report) {
  CorpusRecord r;
  r.chain = transcript::extract_attitude_chain(d);
  gate.dialogue_id = d.id;
  r.dialogue = std::move(d);
  r.gate = std::move(gate);
  r.metric_report = std::move(report);
  return r;
}

bool QueryFilter::matches(const CorpusRecord& r) const {
  const auto& m = r.dialogue.meta;
  if (emotion && m.target_emotion != emotion) return false;
  if (cefr && m.cefr != cefr) return false;
  if (implicit && m.implicit != *implicit) return false;
  if (disposition && r.gate.disposition != *disposition) return false;
  if (qoi && r.gate.qoi != qoi) return false;
  if (has_role) {
    const auto& turns = r.dialogue.turns;
    if (std::none_of(turns.begin(), turns.end(),
                     [&](const Turn& t) { return t.role == *has_role; })) {
      return false;
    }
  }
  return true;
}

std::vector<ChainPattern> mine_chain_patterns(
    const std::vector<CorpusRecord>& records, std::size_t n,
    std::size_t min_support) {
  if (n < 2 || min_support < 1) {
    throw Error(ErrorCode::InvalidValue,
                fmt::format("pattern mining needs n >= 2 and min_support >= 1 "
                            "(got n={}, min_support={})",
                            n, min_support));
  }
  std::map<ChainGram, std::size_t> counts;
  for (const auto& r : records) {
    const auto& e = r.chain.entries;
    for (std::size_t i = 0; i + n <= e.size(); ++i) {
      ++counts[ChainGram(e.begin() + static_cast<std::ptrdiff_t>(i),
                         e.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
  }
  std::vector<ChainPattern> out;
  for (auto& [gram, support] : counts) {
    if (support >= min_support) out.push_back({gram, support, {}, {}});
  }
  // counts is already gram-ordered, so a stable sort keeps ties lexicographic.
  std::stable_sort(out.begin(), out.end(),
                   [](const ChainPattern& a, const ChainPattern& b) {
                     return a.support > b.support;
                   });
  return out;
}

void validate_record(const CorpusRecord& r) {
  transcript::validate(r.dialogue);
  auto corrupt = [&](const std::string& why) {
    throw Error(ErrorCode::InvalidDialogue,
                fmt::format("record '{}': {}", r.id(), why));
  };
  if (r.id().empty()) corrupt("empty id");
  if (r.chain != transcript::extract_attitude_chain(r.dialogue)) {
    corrupt("attitude chain does not match the dialogue");
  }
  const auto& g = r.gate;
  if (g.dialogue_id != r.id()) corrupt("gate belongs to another dialogue");
  if (g.qoi.has_value() != g.reviewed_at.has_value()) {
    corrupt("reviewed_at must be set exactly when qoi is set");
  }
  if (g.disposition != curation::decide(g.emotional_coherence,
                                        g.complexity_coherence, g.qoi)) {
    corrupt(fmt::format("disposition '{}' contradicts the gate values",
                        curation::to_string(g.disposition)));
  }
  for (const auto& v : g.ied_violations) {
    if (v.turn >= r.dialogue.turns.size()) corrupt("IED violation out of range");
  }
}

Store::Store(std::filesystem::path path, Mode mode)
    : path_(std::move(path)), mode_(mode) {}

Store::Store(Store&& other) noexcept
    : path_(std::move(other.path_)),
      mode_(other.mode_),
      lock_fd_(std::exchange(other.lock_fd_, -1)),
      log_fd_(std::exchange(other.log_fd_, -1)),
      records_(std::move(other.records_)),
      runs_(std::move(other.runs_)),
      next_seq_(other.next_seq_) {}

Store& Store::operator=(Store&& other) noexcept {
  if (this != &other) {
    this->~Store();
    new (this) Store(std::move(other));
  }
  return *this;
}

Store::~Store() {
  if (log_fd_ >= 0) ::close(log_fd_);
  if (lock_fd_ >= 0) {
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
  }
}

Store Store::open(const std::filesystem::path& path, Mode mode) {
  Store s(path, mode);
  if (mode == Mode::Writer) {
    const auto lock_path = path.string() + ".lock";
    s.lock_fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (s.lock_fd_ < 0) {
      throw Error(ErrorCode::IoError,
                  fmt::format("cannot create lock file '{}': {}", lock_path,
                              std::strerror(errno)));
    }
    if (::flock(s.lock_fd_, LOCK_EX | LOCK_NB) != 0) {
      throw Error(ErrorCode::StoreLocked,
                  fmt::format("corpus '{}' is locked by another writer",
                              path.string()));
    }
    s.log_fd_ = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC,
                       0644);
    if (s.log_fd_ < 0) {
      throw Error(ErrorCode::IoError,
                  fmt::format("cannot open corpus '{}': {}", path.string(),
                              std::strerror(errno)));
    }
  }
  s.load();
  return s;
}

void Store::load() {
  records_.clear();
  runs_.clear();
  next_seq_ = 1;
  if (!std::filesystem::exists(path_)) {
    if (mode_ == Mode::ReadOnly) return;
  }
  const auto bytes = lexicon::read_file(path_);
  const auto lines = detail::split_lines(bytes);
  const bool unterminated_tail = !bytes.empty() && bytes.back() != '\n';
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (detail::trim(lines[i]).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines[i]);
    } catch (const nlohmann::json::parse_error&) {
      // A torn final write is not a committed record.
      if (unterminated_tail && i + 1 == lines.size()) break;
      throw Error(ErrorCode::CorruptRecord,
                  fmt::format("{}:{}: not valid JSON", path_.string(), i + 1));
    }
    try {
      if (j.contains("amend")) {
        const auto id = j.at("amend").get<std::string>();
        auto it = records_.find(id);
        if (it == records_.end()) {
          throw Error(ErrorCode::CorruptRecord, "amendment for unknown id " + id);
        }
        it->second.gate = curation::gate_from_json(j.at("gate"));
      } else if (j.contains("sample_run")) {
        runs_.push_back(j.at("sample_run"));
      } else {
        auto rec = record_from_json(j);
        ++next_seq_;
        auto id = rec.id();
        if (!records_.emplace(id, std::move(rec)).second) {
          throw Error(ErrorCode::CorruptRecord, "duplicate id " + id);
        }
      }
    } catch (const Error& e) {
      throw Error(ErrorCode::CorruptRecord,
                  fmt::format("{}:{}: {}", path_.string(), i + 1, e.what()));
    }
  }
}

void Store::refresh() { load(); }

void Store::require_writer() const {
  if (mode_ != Mode::Writer) {
    throw Error(ErrorCode::StoreLocked,
                fmt::format("corpus '{}' is open read-only", path_.string()));
  }
}

void Store::write_line(const nlohmann::json& line) {
  const auto text = line.dump() + "\n";
  std::size_t written = 0;
  while (written < text.size()) {
    const auto n = ::write(log_fd_, text.data() + written, text.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::IoError,
                  fmt::format("write to '{}' failed: {}", path_.string(),
                              std::strerror(errno)));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(log_fd_) != 0) {
    throw Error(ErrorCode::IoError,
                fmt::format("fsync of '{}' failed: {}", path_.string(),
                            std::strerror(errno)));
  }
}

std::string Store::append(CorpusRecord record) {
  require_writer();
  if (record.dialogue.id.empty()) {
    std::string id;
    do {
      id = fmt::format("d{:06}", next_seq_++);
    } while (records_.count(id));
    --next_seq_;
    record.dialogue.id = id;
    record.gate.dialogue_id = id;
  }
  if (record.chain.entries.empty()) {
    record.chain = transcript::extract_attitude_chain(record.dialogue);
  }
  const auto id = record.id();
  if (records_.count(id)) {
    throw Error(ErrorCode::DuplicateId,
                fmt::format("record '{}' already exists", id));
  }
  validate_record(record);
  write_line(to_json(record));
  ++next_seq_;
  records_.emplace(id, std::move(record));
  return id;
}

void Store::amend_gate(const curation::GateRecord& gate) {
  require_writer();
  auto it = records_.find(gate.dialogue_id);
  if (it == records_.end()) {
    throw Error(ErrorCode::UnknownId,
                fmt::format("no record '{}'", gate.dialogue_id));
  }
  if (it->second.gate.disposition != Disposition::Pending) {
    throw Error(ErrorCode::AlreadyDisposed,
                fmt::format("record '{}' is already {}", gate.dialogue_id,
                            curation::to_string(it->second.gate.disposition)));
  }
  CorpusRecord updated = it->second;
  updated.gate = gate;
  validate_record(updated);
  write_line({{"amend", gate.dialogue_id}, {"gate", curation::to_json(gate)}});
  it->second.gate = gate;
}

void Store::append_sample_run(const nlohmann::json& run) {
  require_writer();
  write_line({{"sample_run", run}});
  runs_.push_back(run);
}

const CorpusRecord* Store::find(const std::string& id) const {
  auto it = records_.find(id);
  return it == records_.end() ? nullptr : &it->second;
}

const CorpusRecord& Store::get(const std::string& id) const {
  if (const auto* r = find(id)) return *r;
  throw Error(ErrorCode::UnknownId, fmt::format("no record '{}'", id));
}

std::vector<CorpusRecord> Store::query(const QueryFilter& filter) const {
  std::vector<CorpusRecord> out;
  for (const auto& [_, r] : records_) {
    if (filter.matches(r)) out.push_back(r);
  }
  return out;
}

std::vector<ChainPattern> Store::mine_chain_patterns(
    const QueryFilter& filter, std::size_t n, std::size_t min_support) const {
  auto patterns = store::mine_chain_patterns(query(filter), n, min_support);
  for (auto& p : patterns) {
    p.emotion = filter.emotion;
    p.cefr = filter.cefr;
  }
  return patterns;
}

nlohmann::json to_json(const CorpusRecord& r) {
  return {{"id", r.id()},
          {"dialogue", transcript::to_json(r.dialogue)},
          {"gate", curation::to_json(r.gate)},
          {"chain", transcript::to_json(r.chain)},
          {"metric_report", r.metric_report
                                ? metrics::to_json(*r.metric_report)
                                : nlohmann::json(nullptr)}};
}

CorpusRecord record_from_json(const nlohmann::json& j) {
  try {
    CorpusRecord r;
    r.dialogue = transcript::dialogue_from_json(j.at("dialogue"));
    if (j.at("id").get<std::string>() != r.dialogue.id) {
      throw Error(ErrorCode::CorruptRecord, "record id differs from dialogue id");
    }
    r.gate = curation::gate_from_json(j.at("gate"));
    r.chain = transcript::chain_from_json(j.at("chain"));
    if (auto it = j.find("metric_report"); it != j.end() && !it->is_null()) {
      r.metric_report = metrics::report_from_json(*it);
    }
    validate_record(r);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptRecord,
                fmt::format("bad record JSON: {}", e.what()));
  }
}

nlohmann::json summary_json(const CorpusRecord& r) {
  const auto& m = r.dialogue.meta;
  return {
      {"id", r.id()},
      {"emotion", m.target_emotion ? nlohmann::json(to_string(*m.target_emotion))
                                   : nlohmann::json(nullptr)},
      {"cefr", m.cefr ? nlohmann::json(to_string(*m.cefr))
                      : nlohmann::json(nullptr)},
      {"implicit", m.implicit},
      {"disposition", curation::to_string(r.gate.disposition)},
      {"qoi", r.gate.qoi ? nlohmann::json(curation::to_string(*r.gate.qoi))
                         : nlohmann::json(nullptr)},
      {"turns", r.dialogue.turns.size()},
  };
}

nlohmann::json to_json(const ChainPattern& p) {
  nlohmann::json gram = nlohmann::json::array();
  for (const auto& [role, attitude] : p.gram) {
    gram.push_back({{"role", to_string(role)}, {"attitude", attitude}});
  }
  return {{"pattern", std::move(gram)},
          {"support", p.support},
          {"emotion", p.emotion ? nlohmann::json(to_string(*p.emotion))
                                : nlohmann::json(nullptr)},
          {"cefr", p.cefr ? nlohmann::json(to_string(*p.cefr))
                          : nlohmann::json(nullptr)}};
}

}  // namespace emocorpus::store
