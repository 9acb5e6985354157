#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

#include "emocorpus/config.hpp"
#include "emocorpus/generator.hpp"
#include "emocorpus/pipeline.hpp"
#include "emocorpus/sampler.hpp"
#include "emocorpus/service.hpp"
#include "emocorpus/store.hpp"

#ifndef EMOCORPUS_DATA_DIR
#define EMOCORPUS_DATA_DIR "lexicons"
#endif

namespace emocorpus::cli {

namespace fs = std::filesystem;
using nlohmann::json;

ExitCode exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError:
    case ErrorCode::StoreLocked:
    case ErrorCode::CorruptRecord:
    case ErrorCode::EncodingError:
    case ErrorCode::EmptyList:
    case ErrorCode::MissingEmotionFile:
    case ErrorCode::DuplicateAcrossEmotions:
      return kIo;
    case ErrorCode::ProviderUnavailable:
    case ErrorCode::Timeout:
    case ErrorCode::AuthFailure:
    case ErrorCode::MalformedResponse:
      return kProvider;
    case ErrorCode::InvalidValue:
    case ErrorCode::InvalidSpec:
    case ErrorCode::InvalidBands:
    case ErrorCode::UnknownFeature:
      return kUsage;
    default:
      return kValidation;
  }
}

namespace {

struct Globals {
  std::string config_path;
  std::string data_dir;
  std::string corpus;
};

config::AppConfig load_app_config(const Globals& g) {
  fs::path data_dir = g.data_dir;
  if (data_dir.empty()) {
    const char* env = std::getenv("EMOCORPUS_DATA_DIR");
    data_dir = env && *env ? env : EMOCORPUS_DATA_DIR;
  }
  auto cfg = g.config_path.empty() ? config::default_config(data_dir)
                                   : config::load_config(g.config_path, data_dir);
  if (!g.corpus.empty()) cfg.corpus = g.corpus;
  return cfg;
}

std::string read_input(const std::string& path) {
  if (path == "-") {
    return {std::istreambuf_iterator<char>(std::cin),
            std::istreambuf_iterator<char>()};
  }
  return lexicon::read_file(path);
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  f << content;
  if (!f) {
    throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", path.string()));
  }
}

std::string format_gram(const store::ChainGram& gram) {
  return transcript::format_chain(AttitudeChain{gram});
}

template <typename T, typename F>
CLI::Option* add_enum(CLI::App* app, const std::string& name, std::optional<T>& slot,
                      F parse, const std::string& help) {
  return app
      ->add_option_function<std::string>(
          name,
          [&slot, parse, name](const std::string& v) {
            slot = parse(v);
            if (!slot) {
              throw CLI::ValidationError(name, fmt::format("unknown value '{}'", v));
            }
          },
          help);
}

void print_failures(std::ostream& err, const std::vector<std::string>& failures) {
  for (const auto& f : failures) fmt::print(err, "error: {}\n", f);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Build, curate and analyse an emotion-labelled dialogue corpus."};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Config file (TOML-like key = value)");
  app.add_option("--data-dir", g.data_dir, "Directory holding the bundled lexicons");
  app.add_option("--corpus", g.corpus, "Corpus file (overrides the config)");

  std::function<int()> action;

  // generate ---------------------------------------------------------------
  auto* gen_cmd = app.add_subcommand("generate", "Generate dialogues with a chat provider");
  std::optional<Emotion> gen_emotion;
  std::optional<Cefr> gen_cefr;
  bool gen_implicit = false, gen_grid = false;
  std::size_t gen_count = 1;
  std::string gen_scenario = gen::kDefaultScenario, gen_provider_cfg, gen_format = "text";
  add_enum(gen_cmd, "--emotion", gen_emotion, parse_emotion, "Target emotion");
  add_enum(gen_cmd, "--cefr", gen_cefr, parse_cefr, "CEFR level (A2, B2, C2)");
  gen_cmd->add_flag("--implicit", gen_implicit, "Forbid naming the emotion");
  gen_cmd->add_flag("--grid", gen_grid,
                    "Every emotion x level x mode cell, --count dialogues each");
  gen_cmd->add_option("--count", gen_count, "Dialogues per cell")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--scenario", gen_scenario, "Conversation setting");
  gen_cmd->add_option("--provider-config", gen_provider_cfg,
                      "File whose [provider] section overrides the config");
  gen_cmd->add_option("--format", gen_format)->check(CLI::IsMember({"text", "json"}));
  gen_cmd->callback([&] {
    if (!gen_grid && (!gen_emotion || !gen_cefr)) {
      throw CLI::ValidationError("generate", "--emotion and --cefr are required without --grid");
    }
    action = [&]() -> int {
      auto cfg = load_app_config(g);
      if (!gen_provider_cfg.empty()) {
        config::KeyValues provider_only;
        for (auto& [k, v] : config::parse_key_values(lexicon::read_file(gen_provider_cfg))) {
          if (k.rfind("provider.", 0) == 0) provider_only.emplace(k, v);
        }
        cfg = config::apply(provider_only, cfg, fs::path(gen_provider_cfg).parent_path());
      }
      const auto res = config::load_resources(cfg);
      std::vector<gen::PromptSpec> specs;
      const auto cells = gen_grid ? gen::full_grid(gen_scenario) : [&] {
        gen::PromptSpec s;
        s.target_emotion = *gen_emotion;
        s.cefr = *gen_cefr;
        s.implicit = gen_implicit;
        s.scenario = gen_scenario;
        return std::vector<gen::PromptSpec>{s};
      }();
      for (const auto& cell : cells) {
        for (std::size_t i = 0; i < gen_count; ++i) specs.push_back(cell);
      }
      auto provider = gen::make_provider(cfg.provider);
      gen::GenerateContext ctx;
      ctx.lexicon = &res.emotions;
      auto store = store::Store::open(cfg.corpus, store::Store::Mode::Writer);
      const auto items = gen::generate_batch(specs, cfg.provider, *provider, ctx);

      ExitCode worst = kOk;
      std::vector<std::string> ids, failures;
      json failures_json = json::array();
      for (const auto& item : items) {
        std::optional<ErrorCode> code = item.error;
        std::string message = item.error_message;
        if (item.ok()) {
          DialogueMeta meta;
          meta.target_emotion = item.spec.target_emotion;
          meta.cefr = item.spec.cefr;
          meta.implicit = item.spec.implicit;
          meta.scenario = item.spec.scenario;
          meta.provider = fmt::format("{}:{}", item.result->provider, item.result->model);
          try {
            ids.push_back(store.append(
                pipeline::prepare_record(item.result->raw_text, meta, res)));
          } catch (const Error& e) {
            code = e.code();
            message = e.what();
          }
        }
        if (code) {
          const auto ec = exit_code_for(*code);
          if (worst == kOk || ec == kProvider) worst = ec;
          failures.push_back(fmt::format("{}/{}/{}: {}", to_string(item.spec.target_emotion),
                                         to_string(item.spec.cefr),
                                         item.spec.implicit ? "implicit" : "explicit",
                                         message));
          failures_json.push_back({{"spec", gen::to_json(item.spec)},
                                   {"code", error_code_name(*code)},
                                   {"message", message}});
        }
      }
      if (gen_format == "json") {
        out << json{{"ids", ids}, {"failures", failures_json}}.dump(2) << '\n';
      } else {
        for (const auto& id : ids) out << id << '\n';
      }
      print_failures(err, failures);
      return worst;
    };
  });

  // ingest -----------------------------------------------------------------
  auto* ing_cmd = app.add_subcommand("ingest", "Add externally produced transcripts");
  std::vector<std::string> ing_files;
  std::optional<Emotion> ing_emotion;
  std::optional<Cefr> ing_cefr;
  bool ing_implicit = false;
  std::string ing_id, ing_provider = "external", ing_format = "text",
                      ing_scenario = gen::kDefaultScenario;
  ing_cmd->add_option("files", ing_files, "Transcript files ('-' for stdin)")->required();
  add_enum(ing_cmd, "--emotion", ing_emotion, parse_emotion, "Target emotion")->required();
  add_enum(ing_cmd, "--cefr", ing_cefr, parse_cefr, "CEFR level")->required();
  ing_cmd->add_flag("--implicit", ing_implicit);
  ing_cmd->add_option("--id", ing_id, "Record id (single file only)");
  ing_cmd->add_option("--provider", ing_provider, "Provenance label");
  ing_cmd->add_option("--scenario", ing_scenario);
  ing_cmd->add_option("--format", ing_format)->check(CLI::IsMember({"text", "json"}));
  ing_cmd->callback([&] {
    if (!ing_id.empty() && ing_files.size() != 1) {
      throw CLI::ValidationError("--id", "only valid with a single file");
    }
    action = [&]() -> int {
      const auto cfg = load_app_config(g);
      const auto res = config::load_resources(cfg);
      auto store = store::Store::open(cfg.corpus, store::Store::Mode::Writer);
      std::vector<std::string> ids;
      for (const auto& file : ing_files) {
        DialogueMeta meta;
        meta.target_emotion = ing_emotion;
        meta.cefr = ing_cefr;
        meta.implicit = ing_implicit;
        meta.scenario = ing_scenario;
        meta.provider = ing_provider;
        try {
          ids.push_back(store.append(
              pipeline::prepare_record(read_input(file), meta, res, ing_id)));
        } catch (const ParseError& e) {
          throw ParseError(e.code(), e.line_no(),
                           fmt::format("{}:{}: {}", file, e.line_no(), e.what()));
        }
      }
      if (ing_format == "json") out << json(ids).dump() << '\n';
      else for (const auto& id : ids) out << id << '\n';
      return kOk;
    };
  });

  // check ------------------------------------------------------------------
  auto* chk_cmd = app.add_subcommand("check", "Re-run the automatic gates on a record");
  std::string chk_id, chk_format = "text";
  chk_cmd->add_option("id", chk_id)->required();
  chk_cmd->add_option("--format", chk_format)->check(CLI::IsMember({"text", "json"}));
  chk_cmd->callback([&] {
    action = [&]() -> int {
      const auto cfg = load_app_config(g);
      const auto res = config::load_resources(cfg);
      auto store = store::Store::open(cfg.corpus, store::Store::Mode::Writer);
      auto rec = store.get(chk_id);
      auto gate = pipeline::recheck(rec, res);
      if (rec.gate.disposition == curation::Disposition::Pending) {
        store.amend_gate(gate);
        rec.gate = gate;
      } else {
        // Disposed gates are final; show fresh evidence without storing it.
        gate.qoi = rec.gate.qoi;
        gate.reviewed_at = rec.gate.reviewed_at;
        gate.reviewer = rec.gate.reviewer;
        gate.disposition = rec.gate.disposition;
        rec.gate = gate;
      }
      const auto task = service::review_task_json(rec);
      if (chk_format == "json") {
        out << json{{"dialogue_id", rec.id()},
                    {"disposition", curation::to_string(rec.gate.disposition)},
                    {"evidence", task["evidence"]}}
                   .dump(2)
            << '\n';
        return kOk;
      }
      const auto& ev = task["evidence"];
      auto tri = [](const json& v) { return v.is_null() ? std::string("unknown") : v.dump(); };
      fmt::print(out, "id: {}\n", rec.id());
      fmt::print(out, "disposition: {}\n", curation::to_string(rec.gate.disposition));
      fmt::print(out, "emotional_coherence: {}{}\n", tri(ev["emotional_coherence"]),
                 ev["coherence_match"].is_null()
                     ? ""
                     : fmt::format(" (matched '{}')", ev["coherence_match"].get<std::string>()));
      fmt::print(out, "complexity_coherence: {}\n", tri(ev["complexity_coherence"]));
      if (ev["fkgl"].is_number()) {
        fmt::print(out, "client_fkgl: {:.4f} (band {} {})\n", ev["fkgl"].get<double>(),
                   rec.dialogue.meta.cefr ? to_string(*rec.dialogue.meta.cefr) : "?",
                   ev["band"].get<std::string>());
      } else {
        fmt::print(out, "client_fkgl: n/a ({})\n", ev["complexity_error"].get<std::string>());
      }
      if (rec.gate.ied_violations.empty()) {
        fmt::print(out, "ied_violations: none\n");
      }
      for (const auto& v : rec.gate.ied_violations) {
        fmt::print(out, "ied_violation: turn {} '{}'\n", v.turn, v.word);
      }
      return kOk;
    };
  });

  // serve ------------------------------------------------------------------
  auto* srv_cmd = app.add_subcommand("serve", "Start the review service");
  std::string srv_listen;
  srv_cmd->add_option("--listen", srv_listen, "host:port (default from config)");
  srv_cmd->callback([&] {
    action = [&]() -> int {
      const auto cfg = load_app_config(g);
      std::optional<store::Store> store;
      try {
        store.emplace(store::Store::open(cfg.corpus, store::Store::Mode::Writer));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::StoreLocked) throw;
        fmt::print(err, "warning: {}; serving read-only\n", e.what());
        store.emplace(store::Store::open(cfg.corpus, store::Store::Mode::ReadOnly));
      }
      service::ServiceOptions opts;
      if (!cfg.token_env.empty()) {
        const char* token = std::getenv(cfg.token_env.c_str());
        if (!token || !*token) {
          throw Error(ErrorCode::InvalidValue,
                      fmt::format("environment variable {} is not set", cfg.token_env));
        }
        opts.token = token;
      }
      opts.ui_dir = cfg.ui_dir;
      service::serve(*store, opts, srv_listen.empty() ? cfg.listen : srv_listen,
                     [&](int port) {
                       fmt::print(err, "listening on port {}\n", port);
                       err.flush();
                     });
      return kOk;
    };
  });

  // sample-readability -----------------------------------------------------
  auto* smp_cmd = app.add_subcommand("sample-readability",
                                     "Repeated capped turn samples per level and role");
  std::size_t smp_runs = 10, smp_cap = sampler::kDefaultCap;
  std::uint64_t smp_seed = 1;
  std::string smp_out, smp_modes_out, smp_format = "csv";
  bool smp_skip = false;
  smp_cmd->add_option("--runs", smp_runs, "Runs per stratum")->check(CLI::Range(2, 1000000));
  smp_cmd->add_option("--seed", smp_seed, "Base seed");
  smp_cmd->add_option("--cap", smp_cap, "Word cap per sample")->check(CLI::PositiveNumber);
  smp_cmd->add_option("--out", smp_out, "Write the experiment CSV here");
  smp_cmd->add_option("--modes-out", smp_modes_out,
                      "Write the explicit-vs-implicit CSV here");
  smp_cmd->add_flag("--skip-overflow", smp_skip,
                    "Skip turns that do not fit instead of stopping");
  smp_cmd->add_option("--format", smp_format)->check(CLI::IsMember({"csv", "json"}));
  smp_cmd->callback([&] {
    action = [&]() -> int {
      const auto cfg = load_app_config(g);
      const auto res = config::load_resources(cfg);
      std::optional<store::Store> store;
      try {
        store.emplace(store::Store::open(cfg.corpus, store::Store::Mode::Writer));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::StoreLocked) throw;
        store.emplace(store::Store::open(cfg.corpus, store::Store::Mode::ReadOnly));
      }
      const auto corpus = store->query({});
      sampler::SampleOptions opts;
      opts.cap = smp_cap;
      opts.overflow = smp_skip ? sampler::OverflowMode::Skip : sampler::OverflowMode::Stop;
      opts.scoring = res.scoring;
      const auto result =
          sampler::run_experiment(corpus, sampler::all_strata(), smp_runs, smp_seed, opts);
      for (const auto& f : result.failures) {
        fmt::print(err, "warning: {}: {}\n", f.stratum.label(), f.message);
      }

      std::string modes_csv(sampler::kModeCsvHeader);
      modes_csv += '\n';
      json modes_json = json::array();
      for (Cefr c : kAllCefrLevels) {
        try {
          const auto [ex, im] = sampler::run_explicit_vs_implicit(corpus, c, res.scoring);
          const auto csv = sampler::mode_csv(c, ex, im);
          modes_csv += csv.substr(csv.find('\n') + 1);
          modes_json.push_back({{"cefr", to_string(c)},
                                {"explicit", metrics::to_json(ex.report)},
                                {"implicit", metrics::to_json(im.report)}});
        } catch (const Error& e) {
          if (e.code() != ErrorCode::EmptyStratum) throw;
          fmt::print(err, "warning: {}\n", e.what());
        }
      }

      json stats = json::array();
      for (const auto& s : result.stats) stats.push_back(sampler::to_json(s));
      if (store->writable()) {
        json runs = json::array();
        for (const auto& r : result.runs) runs.push_back(sampler::to_json(r));
        store->append_sample_run({{"base_seed", smp_seed},
                                  {"runs_per_stratum", smp_runs},
                                  {"cap", smp_cap},
                                  {"overflow", smp_skip ? "skip" : "stop"},
                                  {"stats", stats},
                                  {"runs", runs}});
      }

      const auto csv = sampler::experiment_csv(result.stats);
      if (!smp_out.empty()) write_file(smp_out, csv);
      if (!smp_modes_out.empty()) write_file(smp_modes_out, modes_csv);
      if (smp_format == "json") {
        out << json{{"stats", stats}, {"modes", modes_json}}.dump(2) << '\n';
      } else if (smp_out.empty()) {
        out << csv;
      }
      return result.stats.empty() ? kValidation : kOk;
    };
  });

  // mine -------------------------------------------------------------------
  auto* mine_cmd = app.add_subcommand("mine", "Frequent attitude-chain n-grams");
  std::size_t mine_n = 2, mine_min = 1;
  std::optional<Emotion> mine_emotion;
  std::optional<Cefr> mine_cefr;
  std::string mine_format = "text";
  mine_cmd->add_option("--n", mine_n, "n-gram length (>= 2)");
  mine_cmd->add_option("--min-support", mine_min, "Minimum support (>= 1)");
  add_enum(mine_cmd, "--emotion", mine_emotion, parse_emotion, "Restrict to an emotion");
  add_enum(mine_cmd, "--cefr", mine_cefr, parse_cefr, "Restrict to a level");
  mine_cmd->add_option("--format", mine_format)->check(CLI::IsMember({"text", "json"}));
  mine_cmd->callback([&] {
    action = [&]() -> int {
      const auto cfg = load_app_config(g);
      auto store = store::Store::open(cfg.corpus, store::Store::Mode::ReadOnly);
      store::QueryFilter f;
      f.emotion = mine_emotion;
      f.cefr = mine_cefr;
      const auto patterns = store.mine_chain_patterns(f, mine_n, mine_min);
      if (mine_format == "json") {
        json arr = json::array();
        for (const auto& p : patterns) arr.push_back(store::to_json(p));
        out << arr.dump(2) << '\n';
      } else {
        fmt::print(out, "{:>7}  {}\n", "support", "pattern");
        for (const auto& p : patterns) {
          fmt::print(out, "{:>7}  {}\n", p.support, format_gram(p.gram));
        }
      }
      return kOk;
    };
  });

  // export -----------------------------------------------------------------
  auto* exp_cmd = app.add_subcommand("export", "Write the corpus out as files");
  std::string exp_format = "transcript", exp_out;
  std::optional<curation::Disposition> exp_disposition;
  exp_cmd->add_option("--format", exp_format)
      ->check(CLI::IsMember({"transcript", "csv", "jsonl"}));
  exp_cmd->add_option("--out", exp_out, "Output directory")->required();
  add_enum(exp_cmd, "--disposition", exp_disposition, curation::parse_disposition,
           "Only records with this disposition");
  exp_cmd->callback([&] {
    action = [&]() -> int {
      const auto cfg = load_app_config(g);
      auto store = store::Store::open(cfg.corpus, store::Store::Mode::ReadOnly);
      store::QueryFilter f;
      f.disposition = exp_disposition;
      const auto records = store.query(f);
      const fs::path dir = exp_out;
      fs::create_directories(dir);
      if (exp_format == "transcript") {
        for (const auto& r : records) {
          write_file(dir / (r.id() + ".txt"), transcript::serialize(r.dialogue));
        }
      } else if (exp_format == "csv") {
        std::string gates(curation::kGateCsvHeader), metrics_csv(metrics::kMetricCsvHeader);
        gates += '\n';
        metrics_csv += '\n';
        for (const auto& r : records) {
          gates += curation::to_csv_row(r.gate, r.dialogue.meta) + '\n';
          if (r.metric_report) metrics_csv += metrics::to_csv_row(r.id(), *r.metric_report) + '\n';
        }
        write_file(dir / "gates.csv", gates);
        write_file(dir / "metrics.csv", metrics_csv);
      } else {
        std::string lines;
        for (const auto& r : records) lines += store::to_json(r).dump() + '\n';
        write_file(dir / "corpus.jsonl", lines);
      }
      fmt::print(out, "{} records exported to {}\n", records.size(), dir.string());
      return kOk;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }
  try {
    return action();
  } catch (const ParseError& e) {
    fmt::print(err, "error [{}]: {}\n", error_code_name(e.code()), e.what());
    return exit_code_for(e.code());
  } catch (const Error& e) {
    fmt::print(err, "error [{}]: {}\n", error_code_name(e.code()), e.what());
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(err, "error [io_error]: {}\n", e.what());
    return kIo;
  }
}

}  // namespace emocorpus::cli
