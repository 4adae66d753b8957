#include "classmind/jobs.hpp"

#include <algorithm>
#include <cstdio>

#include <spdlog/spdlog.h>

#include "classmind/error.hpp"
#include "classmind/fsutil.hpp"
#include "classmind/json_io.hpp"

namespace classmind {

namespace fs = std::filesystem;
using Json = nlohmann::json;

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::kIngest: return "INGEST";
    case Stage::kAnalyze: return "ANALYZE";
    case Stage::kAnnotate: return "ANNOTATE";
    case Stage::kRecommend: return "RECOMMEND";
    case Stage::kEvaluate: return "EVALUATE";
  }
  return "INGEST";
}

std::string_view to_string(JobState s) {
  switch (s) {
    case JobState::kQueued: return "QUEUED";
    case JobState::kRunning: return "RUNNING";
    case JobState::kDone: return "DONE";
    case JobState::kFailed: return "FAILED";
  }
  return "QUEUED";
}

Stage parse_stage(std::string_view s) {
  for (auto st : {Stage::kIngest, Stage::kAnalyze, Stage::kAnnotate, Stage::kRecommend, Stage::kEvaluate}) {
    if (to_string(st) == s) return st;
  }
  fail(ErrorCode::kParse, "unknown stage '" + std::string(s) + "'");
}

JobState parse_job_state(std::string_view s) {
  for (auto st : {JobState::kQueued, JobState::kRunning, JobState::kDone, JobState::kFailed}) {
    if (to_string(st) == s) return st;
  }
  fail(ErrorCode::kParse, "unknown job state '" + std::string(s) + "'");
}

void transition(Job& job, JobState to) {
  const bool ok = (job.state == JobState::kQueued && to == JobState::kRunning) ||
                  (job.state == JobState::kRunning && (to == JobState::kDone || to == JobState::kFailed));
  if (!ok) {
    fail(ErrorCode::kIllegalTransition, "job " + job.job_id + ": " + std::string(to_string(job.state)) + " -> " +
                                            std::string(to_string(to)));
  }
  job.state = to;
}

Json job_to_json(const Job& job) {
  Json timings{{"queued_at", job.queued_at}};
  if (!job.started_at.empty()) timings["started_at"] = job.started_at;
  if (!job.finished_at.empty()) timings["finished_at"] = job.finished_at;
  if (job.run_ms) timings["run_ms"] = *job.run_ms;
  Json j{{"job_id", job.job_id},
         {"seq", job.seq},
         {"lesson_id", job.lesson_id},
         {"stage", std::string(to_string(job.stage))},
         {"state", std::string(to_string(job.state))},
         {"params", job.params},
         {"error", nullptr},
         {"timings", timings}};
  if (job.error) j["error"] = {{"code", job.error->code}, {"message", job.error->message}};
  return j;
}

Job job_from_json(const Json& j) {
  Job job;
  job.job_id = json_io::get_string(j, "job_id", "job");
  job.seq = static_cast<std::uint64_t>(json_io::get_int(j, "seq", "job"));
  job.lesson_id = json_io::get_string(j, "lesson_id", "job");
  job.stage = parse_stage(json_io::get_string(j, "stage", "job"));
  job.state = parse_job_state(json_io::get_string(j, "state", "job"));
  job.params = j.value("params", Json::object());
  if (j.contains("error") && j["error"].is_object()) {
    job.error = JobError{j["error"].value("code", ""), j["error"].value("message", "")};
  }
  const auto t = j.value("timings", Json::object());
  job.queued_at = t.value("queued_at", "");
  job.started_at = t.value("started_at", "");
  job.finished_at = t.value("finished_at", "");
  if (t.contains("run_ms")) job.run_ms = t["run_ms"].get<std::int64_t>();
  return job;
}

JobManager::JobManager(ArtifactStore& store, Runner runner, int workers)
    : store_(store), runner_(std::move(runner)), workers_(std::max(1, workers)), dir_(store.root() / "jobs") {
  fs::create_directories(dir_);
  recover();
}

JobManager::~JobManager() { stop(); }

void JobManager::persist(const Job& job) const {
  fsutil::write_atomic(dir_ / (job.job_id + ".json"), json_io::dump_artifact(job_to_json(job)));
}

void JobManager::recover() {
  fsutil::remove_stale_temps(dir_);
  std::lock_guard lock(mu_);
  for (const auto& e : fs::directory_iterator(dir_)) {
    if (!e.is_regular_file() || e.path().extension() != ".json") continue;
    try {
      auto job = job_from_json(json_io::read_file(e.path()));
      if (job.state == JobState::kRunning) {
        job.state = JobState::kFailed;
        job.error = JobError{"Interrupted", "the service stopped while this job was running; resubmit to rerun"};
        job.finished_at = utc_now_iso8601();
        persist(job);
      }
      next_seq_ = std::max(next_seq_, job.seq + 1);
      jobs_[job.job_id] = std::move(job);
    } catch (const std::exception& ex) {
      spdlog::warn("skipping unreadable job record {}: {}", e.path().string(), ex.what());
    }
  }
}

void JobManager::start() {
  std::lock_guard lock(mu_);
  if (started_) return;
  started_ = true;
  stopping_ = false;
  for (int i = 0; i < workers_; ++i) threads_.emplace_back([this] { worker_loop(); });
}

void JobManager::stop() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  for (auto& t : threads_) {
    if (t.joinable()) t.join();
  }
  threads_.clear();
  std::lock_guard lock(mu_);
  started_ = false;
}

bool JobManager::pending(const std::string& lesson_id, Stage stage) const {
  return std::any_of(jobs_.begin(), jobs_.end(), [&](const auto& kv) {
    const auto& j = kv.second;
    return j.lesson_id == lesson_id && j.stage == stage &&
           (j.state == JobState::kQueued || j.state == JobState::kRunning);
  });
}

void JobManager::check_dependencies(const std::string& lesson_id, Stage stage) const {
  auto need = [&](const char* artifact, Stage producer, const char* what) {
    if (store_.has_artifact(lesson_id, artifact) || pending(lesson_id, producer)) return;
    fail(ErrorCode::kDependencyMissing, std::string(to_string(stage)) + " needs " + artifact + " for lesson '" +
                                            lesson_id + "'; " + what);
  };
  switch (stage) {
    case Stage::kIngest:
      if (!store_.has_artifact(lesson_id, "transcript.jsonl")) {
        fail(ErrorCode::kDependencyMissing, "INGEST needs a transcript; PUT /api/lessons/" + lesson_id + "/transcript first");
      }
      break;
    case Stage::kAnalyze:
    case Stage::kAnnotate:
      need("timeline.json", Stage::kIngest, "submit INGEST first");
      break;
    case Stage::kRecommend:
    case Stage::kEvaluate:
      need("feedback.json", Stage::kAnalyze, "submit ANALYZE first");
      break;
  }
}

std::string JobManager::submit(const std::string& lesson_id, Stage stage, Json params) {
  if (!store_.has_lesson(lesson_id)) fail(ErrorCode::kLessonNotFound, "lesson '" + lesson_id + "' not found");
  if (!params.is_object()) fail(ErrorCode::kParse, "job params must be an object");
  std::string id;
  {
    std::lock_guard lock(mu_);
    check_dependencies(lesson_id, stage);
    Job job;
    job.seq = next_seq_++;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "job-%06llu", static_cast<unsigned long long>(job.seq));
    job.job_id = buf;
    job.lesson_id = lesson_id;
    job.stage = stage;
    job.params = std::move(params);
    job.queued_at = utc_now_iso8601();
    persist(job);
    id = job.job_id;
    jobs_[id] = std::move(job);
  }
  cv_.notify_all();
  return id;
}

Job JobManager::get(const std::string& job_id) const {
  std::lock_guard lock(mu_);
  const auto it = jobs_.find(job_id);
  if (it == jobs_.end()) fail(ErrorCode::kNotFound, "job '" + job_id + "' not found");
  return it->second;
}

std::vector<Job> JobManager::jobs_for(const std::string& lesson_id) const {
  std::lock_guard lock(mu_);
  std::vector<Job> out;
  for (const auto& [_, j] : jobs_) {
    if (j.lesson_id == lesson_id) out.push_back(j);
  }
  std::sort(out.begin(), out.end(), [](const Job& a, const Job& b) { return a.seq < b.seq; });
  return out;
}

bool JobManager::wait(const std::string& job_id, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  return cv_.wait_for(lock, timeout, [&] {
    const auto it = jobs_.find(job_id);
    return it != jobs_.end() && (it->second.state == JobState::kDone || it->second.state == JobState::kFailed);
  });
}

void JobManager::worker_loop() {
  while (true) {
    Job job;
    {
      std::unique_lock lock(mu_);
      Job* next = nullptr;
      cv_.wait(lock, [&] {
        if (stopping_) return true;
        next = nullptr;
        for (auto& [_, j] : jobs_) {
          if (j.state != JobState::kQueued || running_lessons_.count(j.lesson_id)) continue;
          if (!next || j.seq < next->seq) next = &j;
        }
        return next != nullptr;
      });
      if (stopping_) return;
      transition(*next, JobState::kRunning);
      next->started_at = utc_now_iso8601();
      running_lessons_.insert(next->lesson_id);
      persist(*next);
      job = *next;
    }
    cv_.notify_all();

    const auto t0 = std::chrono::steady_clock::now();
    std::optional<JobError> error;
    try {
      runner_(job);
    } catch (const Error& e) {
      error = JobError{std::string(e.code_name()), e.what()};
    } catch (const std::exception& e) {
      error = JobError{"InternalError", e.what()};
    }
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);

    {
      std::lock_guard lock(mu_);
      auto& j = jobs_.at(job.job_id);
      transition(j, error ? JobState::kFailed : JobState::kDone);
      j.error = error;
      j.finished_at = utc_now_iso8601();
      j.run_ms = ms.count();
      running_lessons_.erase(j.lesson_id);
      persist(j);
      if (error) spdlog::warn("job {} failed: {}: {}", j.job_id, error->code, error->message);
    }
    cv_.notify_all();
  }
}

}  // namespace classmind
