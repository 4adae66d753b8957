// classmind command-line entry point.
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "classmind/config.hpp"
#include "classmind/fsutil.hpp"
#include "classmind/json_io.hpp"
#include "classmind/report.hpp"
#include "classmind/server.hpp"
#include "classmind/workflow.hpp"

using namespace classmind;
using Json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::optional<std::string> store;
  std::optional<std::string> config;
  std::optional<std::string> backend;
  std::optional<std::string> fixtures;
  std::optional<std::string> cache_dir;
  std::optional<int> parallelism;
  std::optional<std::string> log_level;
  bool json = false;
};

Config resolve(const Globals& g) {
  auto c = load_config(g.config ? std::optional<fs::path>(*g.config) : std::nullopt);
  if (g.store) c.store_dir = *g.store;
  if (g.backend) c.backend = *g.backend;
  if (g.fixtures) c.fixtures_dir = *g.fixtures;
  if (g.cache_dir) c.cache_dir = *g.cache_dir;
  if (g.parallelism) c.parallelism = *g.parallelism;
  if (g.log_level) c.log_level = *g.log_level;
  c.validate();
  return c;
}

Json stats_json(const ModelGateway& gw) {
  const auto s = gw.stats();
  return {{"requests", s.requests},
          {"backend_calls", s.backend_calls},
          {"cache_hits", s.cache_hits},
          {"retries", s.retries},
          {"network_calls", s.network_calls}};
}

int exit_code_for(ErrorCode code) {
  return code == ErrorCode::kBackendUnavailable || code == ErrorCode::kSchemaViolation ? 2 : 1;
}

void emit(const Globals& g, const Json& result, const std::string& human) {
  if (g.json) {
    std::cout << result.dump() << "\n";
  } else {
    std::cout << human;
  }
}

// Opens store + gateway for one command.
struct Session {
  Config config;
  ArtifactStore store;
  std::unique_ptr<ModelGateway> gateway;
  workflow::Context ctx;

  explicit Session(Config c)
      : config(std::move(c)), store(config.store_dir), gateway(make_gateway(config)),
        ctx{store, *gateway, config.parallelism} {}
};

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("classmind"));
  spdlog::set_level(spdlog::level::warn);

  CLI::App app{"classmind: rubric-aligned classroom video feedback engine"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--store", g.store, "Store directory");
  app.add_option("--config", g.config, "Config file (JSON)");
  app.add_option("--backend", g.backend, "mock | remote")->check(CLI::IsMember({"mock", "remote"}));
  app.add_option("--fixtures", g.fixtures, "Mock fixture directory (rules.json, captions.json)");
  app.add_option("--cache-dir", g.cache_dir, "Model response cache directory");
  app.add_option("--parallelism", g.parallelism, "Concurrent backend requests")->check(CLI::PositiveNumber);
  app.add_option("--log-level", g.log_level, "trace|debug|info|warn|error|off");
  app.add_flag("--json", g.json, "Machine-readable output");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Build timeline.json from a transcript");
  std::string lesson_id;
  std::int64_t duration_ms = 0;
  std::string transcript;
  std::vector<std::string> contexts;
  double window_s = 120.0;
  std::string title;
  ingest->add_option("--lesson-id", lesson_id)->required();
  ingest->add_option("--duration-ms", duration_ms)->required();
  ingest->add_option("--transcript", transcript, "JSONL transcript")->required()->check(CLI::ExistingFile);
  ingest->add_option("--context", contexts, "Lesson plan / slides / notes")->check(CLI::ExistingFile);
  ingest->add_option("--window-s", window_s, "Caption window length in seconds");
  ingest->add_option("--title", title);

  auto* analyze = app.add_subcommand("analyze", "Generate validated rubric-aligned feedback");
  std::string rubric;
  std::size_t max_per_dim = 3;
  analyze->add_option("--lesson-id", lesson_id)->required();
  analyze->add_option("--rubric", rubric)->required()->check(CLI::ExistingFile);
  analyze->add_option("--max-per-dim", max_per_dim)->check(CLI::PositiveNumber);

  auto* annotate = app.add_subcommand("annotate", "Activity codes, Bloom-classified questions and outline");
  std::optional<std::string> taxonomy;
  annotate->add_option("--lesson-id", lesson_id)->required();
  annotate->add_option("--taxonomy", taxonomy)->check(CLI::ExistingFile);

  auto* index_build = app.add_subcommand("index-build", "Embed an exemplar clip CSV into an index");
  std::string clips;
  std::string out_dir;
  index_build->add_option("--clips", clips)->required()->check(CLI::ExistingFile);
  index_build->add_option("--out", out_dir)->required();

  auto* recommend = app.add_subcommand("recommend", "Exemplar clips for each validated feedback item");
  std::string index_dir;
  std::size_t k = 10;
  std::size_t max_results = 3;
  std::size_t min_results = 0;
  recommend->add_option("--lesson-id", lesson_id)->required();
  recommend->add_option("--index", index_dir)->required()->check(CLI::ExistingDirectory);
  recommend->add_option("--k", k)->check(CLI::PositiveNumber);
  recommend->add_option("--max-results", max_results);
  recommend->add_option("--min-results", min_results);

  auto* evaluate = app.add_subcommand("evaluate", "Coverage, grounding and gold-based scores");
  std::optional<std::string> gold_q, gold_a, gold_d;
  std::optional<std::size_t> bins;
  bool duration_weighted = false;
  evaluate->add_option("--lesson-id", lesson_id)->required();
  evaluate->add_option("--gold-questions", gold_q)->check(CLI::ExistingFile);
  evaluate->add_option("--gold-activities", gold_a)->check(CLI::ExistingFile);
  evaluate->add_option("--gold-diarization", gold_d)->check(CLI::ExistingFile);
  evaluate->add_option("--bins", bins)->check(CLI::PositiveNumber);
  evaluate->add_flag("--duration-weighted", duration_weighted, "Weight entropy bins by item duration");

  auto* serve = app.add_subcommand("serve", "Run the HTTP API and job workers");
  std::optional<std::string> host;
  std::optional<int> port;
  std::optional<int> workers;
  std::optional<std::string> serve_rubric, serve_index;
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  serve->add_option("--workers", workers)->check(CLI::PositiveNumber);
  serve->add_option("--rubric", serve_rubric, "Default rubric for ANALYZE jobs")->check(CLI::ExistingFile);
  serve->add_option("--taxonomy", taxonomy, "Default taxonomy for ANNOTATE jobs")->check(CLI::ExistingFile);
  serve->add_option("--index", serve_index, "Default index for RECOMMEND jobs")->check(CLI::ExistingDirectory);

  auto* export_report = app.add_subcommand("export-report", "Render feedback and annotations as one HTML file");
  std::string out_file;
  export_report->add_option("--lesson-id", lesson_id)->required();
  export_report->add_option("--out", out_file)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    auto config = resolve(g);
    if (auto lvl = spdlog::level::from_str(config.log_level); lvl != spdlog::level::off || config.log_level == "off") {
      spdlog::set_level(lvl);
    }

    if (*ingest) {
      Session s(config);
      workflow::IngestRequest req;
      req.lesson_id = lesson_id;
      req.duration = MediaTime::from_ms(duration_ms);
      req.transcript_jsonl = json_io::read_text_file(transcript);
      for (const auto& c : contexts) req.context_docs.push_back(ingestion::load_context_document(c));
      req.window_seconds = window_s;
      req.title = title;
      const auto tl = workflow::run_ingest(s.ctx, req);
      emit(g,
           {{"command", "ingest"},
            {"lesson_id", lesson_id},
            {"artifact", workflow::kTimelineArtifact},
            {"turns", tl.turns().size()},
            {"windows", tl.captions().size()},
            {"gateway", stats_json(*s.gateway)}},
           "ingested " + lesson_id + ": " + std::to_string(tl.turns().size()) + " turns, " +
               std::to_string(tl.captions().size()) + " caption windows\n");
    } else if (*analyze) {
      Session s(config);
      workflow::AnalyzeRequest req{lesson_id, json_io::load_rubric(rubric), {}};
      req.policy.max_per_dimension = max_per_dim;
      const auto r = workflow::run_analyze(s.ctx, req);
      emit(g,
           {{"command", "analyze"},
            {"lesson_id", lesson_id},
            {"artifact", ava::kFeedbackArtifact},
            {"validated", r.items.size()},
            {"rejected", r.rejected.size()},
            {"gateway", stats_json(*s.gateway)}},
           "analyzed " + lesson_id + ": " + std::to_string(r.items.size()) + " validated, " +
               std::to_string(r.rejected.size()) + " rejected\n");
    } else if (*annotate) {
      Session s(config);
      const auto tax = taxonomy ? annotations::load_taxonomy(*taxonomy) : annotations::default_taxonomy();
      const auto a = workflow::run_annotate(s.ctx, lesson_id, tax);
      emit(g,
           {{"command", "annotate"},
            {"lesson_id", lesson_id},
            {"artifact", annotations::kAnnotationsArtifact},
            {"activities", a.activities.size()},
            {"questions", a.questions.size()},
            {"outline_sections", a.outline.size()},
            {"gateway", stats_json(*s.gateway)}},
           "annotated " + lesson_id + ": " + std::to_string(a.activities.size()) + " activity spans, " +
               std::to_string(a.questions.size()) + " questions, " + std::to_string(a.outline.size()) +
               " outline sections\n");
    } else if (*index_build) {
      Session s(config);
      const auto parsed = recommendation::parse_clips_csv(json_io::read_text_file(clips), fs::path(clips).filename());
      const auto idx = recommendation::build_index(parsed, *s.gateway, config.parallelism);
      recommendation::save_index(idx, out_dir);
      emit(g,
           {{"command", "index-build"},
            {"clips", idx.clips.size()},
            {"dim", idx.dim()},
            {"fingerprint", idx.fingerprint},
            {"out", out_dir},
            {"gateway", stats_json(*s.gateway)}},
           "indexed " + std::to_string(idx.clips.size()) + " clips into " + out_dir + "\n");
    } else if (*recommend) {
      Session s(config);
      recommendation::RecommendOptions opts;
      opts.k = k;
      opts.max_results = max_results;
      opts.min_results = min_results;
      const auto recs = workflow::run_recommend(s.ctx, lesson_id, recommendation::load_index(index_dir), opts);
      std::size_t n = 0;
      for (const auto& r : recs) n += r.results.size();
      emit(g,
           {{"command", "recommend"},
            {"lesson_id", lesson_id},
            {"artifact", recommendation::kRecommendationsArtifact},
            {"items", recs.size()},
            {"clips", n},
            {"gateway", stats_json(*s.gateway)}},
           "recommended " + std::to_string(n) + " clips for " + std::to_string(recs.size()) + " feedback items\n");
    } else if (*evaluate) {
      Session s(config);
      metrics::EvaluationOptions opts;
      opts.bins = bins;
      opts.duration_weighted = duration_weighted;
      if (gold_q) opts.gold_questions = *gold_q;
      if (gold_a) opts.gold_activities = *gold_a;
      if (gold_d) opts.gold_diarization = *gold_d;
      const auto r = workflow::run_evaluate(s.ctx, lesson_id, opts);
      auto doc = json_io::parse(json_io::dump_artifact(metrics::evaluation_to_json(r)), "evaluation");
      emit(g, {{"command", "evaluate"}, {"lesson_id", lesson_id}, {"evaluation", doc}, {"gateway", stats_json(*s.gateway)}},
           metrics::evaluation_table(r));
    } else if (*serve) {
      if (host) config.host = *host;
      if (port) config.port = *port;
      if (workers) config.workers = *workers;
      if (serve_rubric) config.rubric = *serve_rubric;
      if (taxonomy) config.taxonomy = *taxonomy;
      if (serve_index) config.index_dir = *serve_index;

      // Block termination signals before any thread starts so only the
      // waiter below receives them.
      sigset_t set;
      sigemptyset(&set);
      sigaddset(&set, SIGINT);
      sigaddset(&set, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &set, nullptr);

      Session s(config);
      JobManager jobs(
          s.store, [&](const Job& job) { run_job(s.config, s.store, *s.gateway, job); }, config.workers);
      ApiServer server(s.config, s.store, jobs);
      jobs.start();
      std::thread waiter([&] {
        int sig = 0;
        sigwait(&set, &sig);
        spdlog::info("signal {}, shutting down", sig);
        server.stop();
      });
      waiter.detach();
      const int bound = config.port == 0 ? server.bind_any_port(config.host) : -1;
      if (config.port != 0 && !server.listen(config.host, config.port)) {
        fail(ErrorCode::kConfig, "cannot listen on " + config.host + ":" + std::to_string(config.port));
      }
      if (config.port == 0) {
        std::cout << "listening on " << config.host << ":" << bound << std::endl;
        server.listen_after_bind();
      }
      jobs.stop();
    } else if (*export_report) {
      Session s(config);
      const auto fb = workflow::load_feedback(s.store, lesson_id);
      std::optional<annotations::AnnotationSet> ann;
      if (s.store.has_artifact(lesson_id, annotations::kAnnotationsArtifact)) {
        ann = annotations::annotations_from_json(
            json_io::parse(s.store.get_artifact(lesson_id, annotations::kAnnotationsArtifact), "annotations.json"));
      }
      const auto record = s.store.lesson(lesson_id);
      fsutil::write_atomic(out_file, report::render_html("Lesson feedback: " + record.title, fb, ann));
      emit(g, {{"command", "export-report"}, {"lesson_id", lesson_id}, {"out", out_file}},
           "wrote " + out_file + "\n");
    }
  } catch (const Error& e) {
    if (g.json) {
      std::cerr << Json{{"error", {{"code", std::string(e.code_name())}, {"message", e.what()}}}}.dump() << "\n";
    } else {
      std::cerr << "error: " << e.code_name() << ": " << e.what() << "\n";
    }
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    if (g.json) {
      std::cerr << Json{{"error", {{"code", "InternalError"}, {"message", e.what()}}}}.dump() << "\n";
    } else {
      std::cerr << "error: " << e.what() << "\n";
    }
    return 1;
  }
  return 0;
}
