#include "classmind/server.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "classmind/json_io.hpp"
#include "classmind/workflow.hpp"

namespace classmind {

using Json = nlohmann::json;

namespace {

std::optional<std::filesystem::path> param_path(const Json& params, const char* key,
                                                const std::optional<std::filesystem::path>& fallback) {
  if (params.contains(key)) return std::filesystem::path(params[key].get<std::string>());
  return fallback;
}

}  // namespace

void run_job(const Config& config, ArtifactStore& store, ModelGateway& gateway, const Job& job) {
  workflow::Context ctx{store, gateway, config.parallelism};
  const auto& p = job.params;
  switch (job.stage) {
    case Stage::kIngest: {
      workflow::IngestRequest req;
      req.lesson_id = job.lesson_id;
      req.window_seconds = p.value("window_seconds", config.window_seconds);
      workflow::run_ingest(ctx, req);
      break;
    }
    case Stage::kAnalyze: {
      const auto rubric = param_path(p, "rubric", config.rubric);
      if (!rubric) fail(ErrorCode::kConfig, "ANALYZE needs params.rubric or a configured rubric");
      workflow::AnalyzeRequest req{job.lesson_id, json_io::load_rubric(*rubric), {}};
      req.policy.max_per_dimension = p.value("max_per_dimension", req.policy.max_per_dimension);
      workflow::run_analyze(ctx, req);
      break;
    }
    case Stage::kAnnotate: {
      const auto tax = param_path(p, "taxonomy", config.taxonomy);
      workflow::run_annotate(ctx, job.lesson_id,
                             tax ? annotations::load_taxonomy(*tax) : annotations::default_taxonomy());
      break;
    }
    case Stage::kRecommend: {
      const auto dir = param_path(p, "index_dir", config.index_dir);
      if (!dir) fail(ErrorCode::kConfig, "RECOMMEND needs params.index_dir or a configured index_dir");
      recommendation::RecommendOptions opts;
      opts.k = p.value("k", opts.k);
      opts.max_results = p.value("max_results", opts.max_results);
      opts.min_results = p.value("min_results", opts.min_results);
      workflow::run_recommend(ctx, job.lesson_id, recommendation::load_index(*dir), opts);
      break;
    }
    case Stage::kEvaluate: {
      metrics::EvaluationOptions opts;
      if (p.contains("bins")) opts.bins = p["bins"].get<std::size_t>();
      opts.duration_weighted = p.value("duration_weighted", false);
      opts.gold_questions = param_path(p, "gold_questions", std::nullopt);
      opts.gold_activities = param_path(p, "gold_activities", std::nullopt);
      opts.gold_diarization = param_path(p, "gold_diarization", std::nullopt);
      workflow::run_evaluate(ctx, job.lesson_id, opts);
      break;
    }
  }
}

namespace {

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kLessonNotFound:
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kDependencyMissing:
    case ErrorCode::kIllegalTransition: return 409;
    case ErrorCode::kHashMismatch: return 500;
    case ErrorCode::kBackendUnavailable:
    case ErrorCode::kSchemaViolation: return 502;
    default: return 400;
  }
}

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(json_io::dump_compact(body), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, {{"error", {{"code", std::string(code)}, {"message", message}}}});
}

// Wraps a handler so engine errors become {error:{code,message}} bodies.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, status_for(e.code()), e.code_name(), e.what());
    } catch (const Json::exception& e) {
      send_error(res, 400, "ParseError", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "InternalError", e.what());
    }
  };
}

const std::map<std::string, std::string> kArtifactRoutes = {
    {"timeline", "timeline.json"},         {"hotspots", "hotspots.json"},
    {"annotations", "annotations.json"},   {"feedback", "feedback.json"},
    {"recommendations", "recommendations.json"}, {"evaluation", "evaluation.json"}};

}  // namespace

ApiServer::ApiServer(const Config& config, ArtifactStore& store, JobManager& jobs)
    : config_(config), store_(store), jobs_(jobs), http_(std::make_unique<httplib::Server>()) {
  routes();
}

ApiServer::~ApiServer() { stop(); }

void ApiServer::routes() {
  auto& s = *http_;
  const auto origin = config_.cors_origin;
  const auto token = config_.api_token;

  s.set_pre_routing_handler([origin, token](const httplib::Request& req, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type, Authorization");
    if (req.method == "OPTIONS") {
      res.status = 204;
      return httplib::Server::HandlerResponse::Handled;
    }
    if (!token.empty() && req.get_header_value("Authorization") != "Bearer " + token) {
      send_error(res, 401, "Unauthorized", "missing or invalid bearer token");
      return httplib::Server::HandlerResponse::Handled;
    }
    return httplib::Server::HandlerResponse::Unhandled;
  });

  s.Get("/api/health", guarded([](const httplib::Request&, httplib::Response& res) {
          send_json(res, 200, {{"status", "ok"}});
        }));

  s.Get("/api/lessons", guarded([this](const httplib::Request&, httplib::Response& res) {
          Json list = Json::array();
          for (const auto& r : store_.lessons()) list.push_back(lesson_to_api_json(r));
          send_json(res, 200, {{"lessons", list}});
        }));

  s.Post("/api/lessons", guarded([this](const httplib::Request& req, httplib::Response& res) {
           const auto body = json_io::parse(req.body, "request body");
           const auto title = json_io::get_string(body, "title", "body");
           const auto duration = MediaTime::from_ms(json_io::get_int(body, "duration_ms", "body"));
           std::optional<std::string> media;
           if (body.contains("media_url")) media = json_io::get_string(body, "media_url", "body");
           const auto r = store_.create_lesson(json_io::get_string_or(body, "lesson_id", ""), title, duration, media);
           send_json(res, 201, {{"lesson_id", r.lesson_id}});
         }));

  s.Get(R"(/api/lessons/([A-Za-z0-9._-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
          send_json(res, 200, lesson_to_api_json(store_.lesson(req.matches[1])));
        }));

  s.Put(R"(/api/lessons/([A-Za-z0-9._-]+)/transcript)",
        guarded([this](const httplib::Request& req, httplib::Response& res) {
          const std::string id = req.matches[1];
          if (!store_.has_lesson(id)) fail(ErrorCode::kLessonNotFound, "lesson '" + id + "' not found");
          const auto turns = ingestion::parse_transcript(req.body, ingestion::SpeakerMap::defaults(), "transcript");
          for (const auto& t : turns) {
            if (t.interval.end() > store_.lesson(id).duration) {
              fail(ErrorCode::kRange, "turn " + t.interval.to_string() + " ends after the lesson");
            }
          }
          store_.put_artifact(id, workflow::kTranscriptArtifact, req.body);
          send_json(res, 200, {{"lesson_id", id}, {"turns", turns.size()}});
        }));

  s.Post(R"(/api/lessons/([A-Za-z0-9._-]+)/jobs)", guarded([this](const httplib::Request& req, httplib::Response& res) {
           const auto body = json_io::parse(req.body, "request body");
           const auto stage = parse_stage(json_io::get_string(body, "stage", "body"));
           const auto id = jobs_.submit(req.matches[1], stage, body.value("params", Json::object()));
           send_json(res, 202, {{"job_id", id}});
         }));

  s.Get(R"(/api/lessons/([A-Za-z0-9._-]+)/jobs)", guarded([this](const httplib::Request& req, httplib::Response& res) {
          const std::string id = req.matches[1];
          if (!store_.has_lesson(id)) fail(ErrorCode::kLessonNotFound, "lesson '" + id + "' not found");
          Json list = Json::array();
          for (const auto& j : jobs_.jobs_for(id)) list.push_back(job_to_json(j));
          send_json(res, 200, {{"jobs", list}});
        }));

  s.Get(R"(/api/jobs/([A-Za-z0-9._-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
          send_json(res, 200, job_to_json(jobs_.get(req.matches[1])));
        }));

  s.Get(R"(/api/lessons/([A-Za-z0-9._-]+)/([a-z]+))", guarded([this](const httplib::Request& req,
                                                                    httplib::Response& res) {
          const std::string id = req.matches[1];
          const std::string kind = req.matches[2];
          const auto it = kArtifactRoutes.find(kind);
          if (it == kArtifactRoutes.end()) fail(ErrorCode::kNotFound, "no such resource '" + kind + "'");
          auto bytes = store_.get_artifact(id, it->second);
          if (kind == "feedback" && req.has_param("dimension")) {
            const auto dim = req.get_param_value("dimension");
            auto doc = json_io::parse(bytes, "feedback.json");
            for (const char* key : {"items", "rejected"}) {
              Json kept = Json::array();
              for (const auto& item : doc[key]) {
                if (item.value("dimension_id", "") == dim) kept.push_back(item);
              }
              doc[key] = std::move(kept);
            }
            bytes = doc.dump(2) + "\n";
          }
          res.status = 200;
          res.set_content(bytes, "application/json");
        }));

  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) send_error(res, res.status, res.status == 404 ? "NotFound" : "HttpError", "no such route");
  });
}

bool ApiServer::listen(const std::string& host, int port) {
  spdlog::info("listening on {}:{}", host, port);
  return http_->listen(host, port);
}

int ApiServer::bind_any_port(const std::string& host) { return http_->bind_to_any_port(host); }

bool ApiServer::listen_after_bind() { return http_->listen_after_bind(); }

void ApiServer::stop() {
  if (http_ && http_->is_running()) http_->stop();
}

bool ApiServer::is_running() const { return http_->is_running(); }

}  // namespace classmind
