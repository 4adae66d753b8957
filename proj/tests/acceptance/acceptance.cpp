// One line per acceptance criterion; exit status is the number of failures.
#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "classmind/annotations.hpp"
#include "classmind/ingestion.hpp"
#include "classmind/json_io.hpp"
#include "classmind/metrics.hpp"
#include "classmind/workflow.hpp"

using namespace classmind;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kSource = CLASSMIND_SOURCE_DIR;
const fs::path kFixtures = kSource / "tests/fixtures/lesson30";
const fs::path kRubric = kSource / "data/rubrics/danielson_subset.json";
const fs::path kTaxonomy = kSource / "data/taxonomy/copus.json";

// tolerances
constexpr double kEntropyTol = 1e-9;
constexpr double kEntropyMaxSeconds = 1.0;
constexpr double kExpectedF1 = 0.9637;
constexpr double kF1Tol = 0.001;
constexpr double kJerTol = 1e-6;
constexpr double kMicroF1 = 2.0 / 3.0;
constexpr double kMicroF1Tol = 1e-4;
constexpr double kPipelineMaxSeconds = 60.0;
constexpr double kMinHnorm = 0.7;

struct Outcome {
  bool ok = true;
  std::ostringstream why;
  void expect(bool cond, const std::string& what) {
    if (!cond) {
      if (!ok) why << "; ";
      ok = false;
      why << what;
    }
  }
};

int failures = 0;

void criterion(const std::string& name, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = Clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.expect(false, std::string("exception: ") + e.what());
  }
  const auto secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (!o.ok) ++failures;
  std::cout << (o.ok ? "PASS " : "FAIL ") << name << " (" << std::fixed;
  std::cout.precision(2);
  std::cout << secs << " s)";
  if (!o.ok) std::cout << ": " << o.why.str();
  std::cout << std::endl;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = fs::temp_directory_path() / ("cm-accept-" + tag + "-" + std::to_string(::getpid()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

// ---- oracles ----

double oracle_hnorm(const std::vector<std::int64_t>& ts, std::int64_t d, std::int64_t k) {
  std::vector<long double> counts(static_cast<std::size_t>(k), 0);
  for (auto t : ts) {
    for (std::int64_t i = 0; i < k; ++i) {
      if (t * k >= i * d && (t * k < (i + 1) * d || i == k - 1)) {
        counts[static_cast<std::size_t>(i)] += 1;
        break;
      }
    }
  }
  long double h = 0;
  for (auto c : counts) {
    if (c > 0) {
      const long double p = c / static_cast<long double>(ts.size());
      h -= p * std::log(p);
    }
  }
  return k > 1 ? static_cast<double>(h / std::log(static_cast<long double>(k))) : 0.0;
}

double oracle_jer(const metrics::LabeledTimeSet& a, const metrics::LabeledTimeSet& b) {
  std::set<std::pair<int, std::int64_t>> ua, ub;
  for (const auto& [r, iv] : a) {
    for (auto t = iv.start_ms(); t < iv.end_ms(); ++t) ua.insert({static_cast<int>(r), t});
  }
  for (const auto& [r, iv] : b) {
    for (auto t = iv.start_ms(); t < iv.end_ms(); ++t) ub.insert({static_cast<int>(r), t});
  }
  std::size_t inter = 0;
  for (const auto& u : ua) inter += ub.count(u);
  return 1.0 - static_cast<double>(inter) / static_cast<double>(ua.size() + ub.size() - inter);
}

// ---- pipeline helpers ----

std::shared_ptr<MockBackend> mock() { return std::make_shared<MockBackend>(MockFixtures::load(kFixtures)); }

metrics::EvaluationOptions gold_options() {
  metrics::EvaluationOptions o;
  o.gold_questions = kFixtures / "gold_questions.json";
  o.gold_activities = kFixtures / "gold_activities.json";
  o.gold_diarization = kFixtures / "gold_diarization.json";
  return o;
}

void run_pipeline(workflow::Context& ctx) {
  workflow::IngestRequest in;
  in.lesson_id = "lesson30";
  in.duration = MediaTime::from_ms(1'800'000);
  in.transcript_jsonl = json_io::read_text_file(kFixtures / "transcript.jsonl");
  in.context_docs.push_back(ingestion::load_context_document(kFixtures / "lesson_plan.txt"));
  in.title = "How plants lose water";
  workflow::run_ingest(ctx, in);
  workflow::run_analyze(ctx, {"lesson30", json_io::load_rubric(kRubric), {}});
  workflow::run_annotate(ctx, "lesson30", annotations::load_taxonomy(kTaxonomy));
  workflow::run_evaluate(ctx, "lesson30", gold_options());
}

// Runs the CLI; returns the exit status, or -signal.
int spawn_cli(const std::vector<std::string>& args, const std::vector<std::string>& env, const fs::path& err_file,
              pid_t* pid_out = nullptr) {
  const pid_t pid = ::fork();
  if (pid == 0) {
    for (const auto& e : env) ::putenv(const_cast<char*>(e.c_str()));
    const int fd = ::open(err_file.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    ::dup2(fd, STDERR_FILENO);
    const int null = ::open("/dev/null", O_WRONLY);
    ::dup2(null, STDOUT_FILENO);
    std::vector<char*> argv{const_cast<char*>(CLASSMIND_CLI)};
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    ::execv(CLASSMIND_CLI, argv.data());
    std::_Exit(127);
  }
  if (pid_out) {
    *pid_out = pid;
    return 0;
  }
  int status = 0;
  ::waitpid(pid, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -WTERMSIG(status);
}

std::vector<std::string> cli_base(const fs::path& store) {
  return {"--store", store.string(), "--fixtures", kFixtures.string()};
}

std::vector<std::string> plus(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

int main() {
  ::setenv("SOURCE_DATE_EPOCH", "0", 1);

  criterion("entropy: single bin 0, uniform two bins 1, 100 random sets match oracle, < 1 s", [](Outcome& o) {
    const auto t0 = Clock::now();
    const auto d = MediaTime::from_ms(600'000);
    o.expect(metrics::temporal_entropy({MediaTime::from_ms(5), MediaTime::from_ms(9)}, d, 1).H_norm == 0.0,
             "k=1 not 0");
    o.expect(metrics::temporal_entropy({MediaTime::from_ms(100), MediaTime::from_ms(101)}, d, 4).H_norm == 0.0,
             "one occupied bin not 0");
    const auto two = metrics::temporal_entropy({MediaTime::from_ms(0), MediaTime::from_ms(300'000)}, d, 2);
    o.expect(std::abs(two.H_norm - 1.0) <= kEntropyTol, "uniform two-bin not 1");
    std::mt19937_64 rng(1);
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
      const auto dur = std::uniform_int_distribution<std::int64_t>(1, 7'200'000)(rng);
      const auto k = std::uniform_int_distribution<std::int64_t>(1, 60)(rng);
      const auto n = std::uniform_int_distribution<int>(1, 80)(rng);
      std::vector<std::int64_t> ts;
      std::vector<MediaTime> mts;
      for (int j = 0; j < n; ++j) {
        ts.push_back(std::uniform_int_distribution<std::int64_t>(0, dur)(rng));
        mts.push_back(MediaTime::from_ms(ts.back()));
      }
      const auto got = metrics::temporal_entropy(mts, MediaTime::from_ms(dur), static_cast<std::size_t>(k)).H_norm;
      worst = std::max(worst, std::abs(got - oracle_hnorm(ts, dur, k)));
    }
    o.expect(worst <= kEntropyTol, "oracle deviation " + std::to_string(worst));
    const auto secs = std::chrono::duration<double>(Clock::now() - t0).count();
    o.expect(secs < kEntropyMaxSeconds, "took " + std::to_string(secs) + " s");
  });

  criterion("F1 arithmetic: P=1.0, R=0.93 gives 0.9637 +- 0.001", [](Outcome& o) {
    const auto s = metrics::prf1(93, 0, 7);
    o.expect(s.precision == 1.0, "precision " + std::to_string(s.precision));
    o.expect(std::abs(s.recall - 0.93) < 1e-12, "recall " + std::to_string(s.recall));
    o.expect(std::abs(s.f1 - kExpectedF1) <= kF1Tol, "f1 " + std::to_string(s.f1));
    o.expect(std::round(s.f1 * 1000) / 1000 == 0.964, "does not round to 0.964");
  });

  criterion("JER: identity 0, disjoint 1, 100 random cases match 1 ms oracle to 1e-6", [](Outcome& o) {
    const metrics::LabeledTimeSet a{{SpeakerRole::kTeacher, TimeInterval::from_ms(0, 1000)},
                                    {SpeakerRole::kStudent, TimeInterval::from_ms(1000, 1500)}};
    const metrics::LabeledTimeSet b{{SpeakerRole::kTeacher, TimeInterval::from_ms(2000, 3000)}};
    o.expect(metrics::jaccard_error_rate(a, a) == 0.0, "identity");
    o.expect(metrics::jaccard_error_rate(a, b) == 1.0, "disjoint");
    std::mt19937 rng(2);
    std::uniform_int_distribution<int> n(1, 6), role(0, 2), pos(0, 3000), len(1, 700);
    auto random_set = [&] {
      metrics::LabeledTimeSet s;
      for (int i = n(rng); i > 0; --i) {
        const int st = pos(rng);
        s.push_back({static_cast<SpeakerRole>(role(rng)), TimeInterval::from_ms(st, st + len(rng))});
      }
      return s;
    };
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
      const auto p = random_set(), g = random_set();
      worst = std::max(worst, std::abs(metrics::jaccard_error_rate(p, g) - oracle_jer(p, g)));
    }
    o.expect(worst <= kJerTol, "oracle deviation " + std::to_string(worst));
  });

  criterion("micro-F1: TP=3 FP=1 FN=2 gives 0.6667, single class equals prf1", [](Outcome& o) {
    const auto m = metrics::micro_f1({{"A", {2, 0, 1}}, {"B", {1, 1, 1}}});
    o.expect(std::abs(m.micro_f1 - kMicroF1) <= kMicroF1Tol, "micro f1 " + std::to_string(m.micro_f1));
    o.expect(std::abs(m.micro_precision - 0.75) < 1e-12 && std::abs(m.micro_recall - 0.6) < 1e-12, "P/R");
    for (std::int64_t tp = 0; tp < 6; ++tp) {
      for (std::int64_t fp = 0; fp < 6; ++fp) {
        for (std::int64_t fn = 0; fn < 6; ++fn) {
          if (metrics::micro_f1({{"only", {tp, fp, fn}}}).micro_f1 != metrics::prf1(tp, fp, fn).f1) {
            o.expect(false, "single-class mismatch");
            return;
          }
        }
      }
    }
  });

  criterion("end-to-end fixture lesson: < 60 s, no network, golden bytes, grounded, fabricated item rejected, "
            "H_norm >= 0.7",
            [](Outcome& o) {
              TempDir dir("e2e");
              ArtifactStore store(dir.path());
              ModelGateway gateway(mock());
              workflow::Context ctx{store, gateway, 4};
              const auto t0 = Clock::now();
              run_pipeline(ctx);
              const auto secs = std::chrono::duration<double>(Clock::now() - t0).count();
              o.expect(secs < kPipelineMaxSeconds, "took " + std::to_string(secs) + " s");
              o.expect(gateway.stats().network_calls == 0,
                       std::to_string(gateway.stats().network_calls) + " network calls");
              for (const char* name :
                   {"timeline.json", "hotspots.json", "feedback.json", "annotations.json", "evaluation.json"}) {
                o.expect(store.get_artifact("lesson30", name) == json_io::read_text_file(kFixtures / "golden" / name),
                         std::string(name) + " differs from golden");
              }
              const auto tl = workflow::load_timeline(store, "lesson30");
              const auto fb = workflow::load_feedback(store, "lesson30");
              o.expect(!fb.items.empty(), "no validated items");
              for (const auto& item : fb.items) {
                o.expect(item.status == ava::FeedbackStatus::kValidated && ava::is_grounded(item, tl),
                         item.feedback_id + " not grounded");
              }
              // planted in window 5 via a fabricated quote
              const auto w5 = TimeInterval::from_ms(600'000, 720'000);
              bool rejected = false;
              for (const auto& item : fb.rejected) {
                rejected |= item.status == ava::FeedbackStatus::kRejected && item.dimension_id == "3c" &&
                            w5.overlaps(item.interval) &&
                            item.full_text().find("ignored the worksheet") != std::string::npos;
              }
              o.expect(rejected, "fabricated item not rejected");
              for (const auto& item : fb.items) {
                o.expect(item.full_text().find("ignored the worksheet") == std::string::npos,
                         "fabricated quote validated");
              }
              const auto eval = json_io::parse(store.get_artifact("lesson30", "evaluation.json"), "evaluation");
              o.expect(eval["grounding_rate"] == 1.0, "grounding rate " + eval["grounding_rate"].dump());
              const double h = eval["coverage"]["H_norm"];
              o.expect(h >= kMinHnorm, "H_norm " + std::to_string(h));
            });

  criterion("Bloom verb mapping: 6/6 seeded questions, one per level", [](Outcome& o) {
    ModelGateway gateway(mock());
    const std::vector<std::pair<std::string, int>> seeded = {
        {"Can you identify the parts of a leaf?", 1},
        {"Who can explain why leaves are green?", 2},
        {"How would you calculate the rate of water loss?", 3},
        {"How would you compare the two plants?", 4},
        {"How would you defend your prediction?", 5},
        {"Could you design an experiment to test the light effect?", 6}};
    int exact = 0;
    for (const auto& [q, level] : seeded) {
      const auto got = ordinal(annotations::classify_bloom(q, gateway).level);
      if (got == level) {
        ++exact;
      } else {
        o.expect(false, "'" + q + "' -> " + std::to_string(got));
      }
    }
    o.expect(exact == 6, std::to_string(exact) + "/6");
  });

  criterion("windowing: 1800 s gives 15 x 120 s; tails merge below 30 s", [](Outcome& o) {
    const auto w = ingestion::plan_windows(MediaTime::from_ms(1'800'000));
    o.expect(w.size() == 15, std::to_string(w.size()) + " windows");
    for (std::size_t i = 0; i < w.size(); ++i) {
      o.expect(w[i] == TimeInterval::from_ms(static_cast<std::int64_t>(i) * 120'000,
                                             static_cast<std::int64_t>(i + 1) * 120'000),
               "window " + std::to_string(i));
    }
    // short tail folds into the last window, a long one stands alone
    const auto folded = ingestion::plan_windows(MediaTime::from_ms(1'820'000));
    o.expect(folded.size() == 15 && folded.back() == TimeInterval::from_ms(1'680'000, 1'820'000), "20 s tail");
    const auto kept = ingestion::plan_windows(MediaTime::from_ms(1'830'000));
    o.expect(kept.size() == 16 && kept.back() == TimeInterval::from_ms(1'800'000, 1'830'000), "30 s tail");
    const auto tiny = ingestion::plan_windows(MediaTime::from_ms(45'000));
    o.expect(tiny.size() == 1 && tiny[0] == TimeInterval::from_ms(0, 45'000), "short lesson");
  });

  criterion("crash safety: SIGKILL during analyze, rerun, artifacts match an uninterrupted run", [](Outcome& o) {
    TempDir dir("crash");
    const auto clean = dir.path() / "clean";
    const auto crashed = dir.path() / "crashed";
    const auto err = dir.path() / "stderr.txt";
    const std::vector<std::string> env{"SOURCE_DATE_EPOCH=0"};
    const auto ingest = std::vector<std::string>{"ingest", "--lesson-id", "lesson30", "--duration-ms", "1800000",
                                                 "--transcript", (kFixtures / "transcript.jsonl").string(),
                                                 "--context", (kFixtures / "lesson_plan.txt").string(), "--title",
                                                 "How plants lose water"};
    const auto analyze = std::vector<std::string>{"analyze", "--lesson-id", "lesson30", "--rubric", kRubric.string()};
    const auto annotate =
        std::vector<std::string>{"annotate", "--lesson-id", "lesson30", "--taxonomy", kTaxonomy.string()};

    for (const auto& store : {clean, crashed}) {
      o.expect(spawn_cli(plus(cli_base(store), ingest), env, err) == 0, "ingest failed");
    }
    o.expect(spawn_cli(plus(cli_base(clean), analyze), env, err) == 0, "clean analyze failed");
    o.expect(spawn_cli(plus(cli_base(clean), annotate), env, err) == 0, "clean annotate failed");

    pid_t pid = 0;
    spawn_cli(plus(cli_base(crashed), analyze), {"SOURCE_DATE_EPOCH=0", "CLASSMIND_FAILPOINT=hang:analyze:after_hotspots"},
              err, &pid);
    bool hung = false;
    for (int i = 0; i < 600 && !hung; ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
      hung = json_io::read_text_file(err).find("failpoint") != std::string::npos;
    }
    ::kill(pid, SIGKILL);
    int status = 0;
    ::waitpid(pid, &status, 0);
    o.expect(hung, "failpoint never reached");
    o.expect(WIFSIGNALED(status) && WTERMSIG(status) == SIGKILL, "analyze was not killed");
    o.expect(!fs::exists(crashed / "lessons/lesson30/feedback.json"), "feedback written before the kill");

    o.expect(spawn_cli(plus(cli_base(crashed), analyze), env, err) == 0, "rerun analyze failed");
    o.expect(spawn_cli(plus(cli_base(crashed), annotate), env, err) == 0, "rerun annotate failed");
    for (const char* name : {"timeline.json", "hotspots.json", "feedback.json", "annotations.json"}) {
      const auto a = json_io::read_text_file(clean / "lessons/lesson30" / name);
      const auto b = json_io::read_text_file(crashed / "lessons/lesson30" / name);
      o.expect(a == b, std::string(name) + " differs after restart");
    }
    ArtifactStore store(crashed);
    o.expect(store.get_artifact("lesson30", "feedback.json").size() > 0, "manifest does not verify");
  });

  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
