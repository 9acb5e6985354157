#pragma once

#include <string_view>

#include "emocorpus/config.hpp"
#include "emocorpus/store.hpp"

namespace emocorpus::pipeline {

/// Parses a raw transcript, redacts brand names, attaches `meta`, runs the
/// automatic gates and returns a pending record with an unassigned id.
store::CorpusRecord prepare_record(std::string_view raw, DialogueMeta meta,
                                   const config::Resources& res,
                                   std::string id = {});

/// Re-runs the automatic gates on a stored dialogue.
curation::GateRecord recheck(const store::CorpusRecord& r,
                             const config::Resources& res);

}  // namespace emocorpus::pipeline
