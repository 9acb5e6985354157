#include "emocorpus/pipeline.hpp"

#include "emocorpus/error.hpp"

namespace emocorpus::pipeline {

store::CorpusRecord prepare_record(std::string_view raw, DialogueMeta meta,
                                   const config::Resources& res,
                                   std::string id) {
  auto d = transcript::redact_brands(transcript::parse(raw), res.brands);
  d.id = std::move(id);
  if (!meta.created_at) meta.created_at = curation::now_utc();
  d.meta = std::move(meta);
  transcript::validate(d);
  auto gate = curation::auto_check(d, res.auto_check_context());
  auto record = store::make_record(std::move(d), std::move(gate));
  std::vector<std::string_view> client;
  for (const auto& t : record.dialogue.turns) {
    if (t.role == Role::Client) client.push_back(t.text);
  }
  auto scoring = res.scoring;
  scoring.strip_speaker_prefixes = false;
  try {
    record.metric_report =
        metrics::score_text(metrics::join_utterances(client), scoring);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateText) throw;
  }
  return record;
}

curation::GateRecord recheck(const store::CorpusRecord& r,
                             const config::Resources& res) {
  auto gate = curation::auto_check(r.dialogue, res.auto_check_context());
  gate.dialogue_id = r.id();
  return gate;
}

}  // namespace emocorpus::pipeline
