#pragma once

#include <memory>
#include <string>

#include "classmind/config.hpp"
#include "classmind/jobs.hpp"
#include "classmind/store.hpp"

namespace httplib {
class Server;
}

namespace classmind {

// Executes one job against the store. Params by stage:
//   INGEST    {window_seconds?}
//   ANALYZE   {rubric?, max_per_dimension?}
//   ANNOTATE  {taxonomy?}
//   RECOMMEND {index_dir?, k?, max_results?, min_results?}
//   EVALUATE  {bins?, gold_questions?, gold_activities?, gold_diarization?, duration_weighted?}
// Paths fall back to the config defaults.
void run_job(const Config& config, ArtifactStore& store, ModelGateway& gateway, const Job& job);

// JSON API:
//   GET  /api/health
//   GET  /api/lessons
//   POST /api/lessons                          {title, duration_ms, media_url?}
//   GET  /api/lessons/{id}
//   PUT  /api/lessons/{id}/transcript          JSONL body
//   POST /api/lessons/{id}/jobs                {stage, params?}
//   GET  /api/lessons/{id}/jobs
//   GET  /api/jobs/{id}
//   GET  /api/lessons/{id}/{timeline|hotspots|annotations|feedback|recommendations|evaluation}
//   GET  /api/lessons/{id}/feedback?dimension=2e
class ApiServer {
 public:
  ApiServer(const Config& config, ArtifactStore& store, JobManager& jobs);
  ~ApiServer();

  // Binds and serves until stop(). Returns false when binding failed.
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port; serve with listen_after_bind().
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  bool is_running() const;

 private:
  void routes();

  Config config_;
  ArtifactStore& store_;
  JobManager& jobs_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace classmind
