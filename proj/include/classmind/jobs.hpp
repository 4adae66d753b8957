#pragma once

#include <chrono>
#include <condition_variable>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "classmind/store.hpp"

namespace classmind {

enum class Stage { kIngest, kAnalyze, kAnnotate, kRecommend, kEvaluate };
enum class JobState { kQueued, kRunning, kDone, kFailed };

std::string_view to_string(Stage s);
std::string_view to_string(JobState s);
Stage parse_stage(std::string_view s);
JobState parse_job_state(std::string_view s);

struct JobError {
  std::string code;
  std::string message;
};

struct Job {
  std::string job_id;
  std::uint64_t seq = 0;
  std::string lesson_id;
  Stage stage = Stage::kIngest;
  JobState state = JobState::kQueued;
  nlohmann::json params = nlohmann::json::object();
  std::optional<JobError> error;
  std::string queued_at;
  std::string started_at;
  std::string finished_at;
  std::optional<std::int64_t> run_ms;
};

// QUEUED -> RUNNING -> {DONE, FAILED}; anything else is IllegalTransition.
void transition(Job& job, JobState to);

nlohmann::json job_to_json(const Job& job);
Job job_from_json(const nlohmann::json& j);

// In-process worker pool. Jobs run FIFO by submission order, skipping jobs
// whose lesson already has a RUNNING job (single writer per lesson). Job
// records are persisted under <store>/jobs so a restarted manager can mark
// interrupted jobs FAILED and requeue the rest.
class JobManager {
 public:
  using Runner = std::function<void(const Job&)>;

  JobManager(ArtifactStore& store, Runner runner, int workers = 2);
  ~JobManager();
  JobManager(const JobManager&) = delete;
  JobManager& operator=(const JobManager&) = delete;

  void start();
  void stop();

  // LessonNotFound, DependencyMissing
  std::string submit(const std::string& lesson_id, Stage stage, nlohmann::json params = nlohmann::json::object());
  Job get(const std::string& job_id) const;  // NotFound
  std::vector<Job> jobs_for(const std::string& lesson_id) const;
  // True when the job reached DONE or FAILED within the timeout.
  bool wait(const std::string& job_id, std::chrono::milliseconds timeout) const;

 private:
  void recover();
  void persist(const Job& job) const;
  void worker_loop();
  bool pending(const std::string& lesson_id, Stage stage) const;  // caller holds mu_
  void check_dependencies(const std::string& lesson_id, Stage stage) const;

  ArtifactStore& store_;
  Runner runner_;
  int workers_;
  std::filesystem::path dir_;

  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::map<std::string, Job> jobs_;
  std::set<std::string> running_lessons_;
  std::uint64_t next_seq_ = 1;
  bool stopping_ = false;
  bool started_ = false;
  std::vector<std::thread> threads_;
};

}  // namespace classmind
