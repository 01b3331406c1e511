#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "opencat/cloud_io.hpp"
#include "opencat/ibl.hpp"
#include "opencat/keyvalue.hpp"

namespace opencat {

class Pipeline;

/// Accuracy window length as a function of the number of known categories.
struct WindowPolicy {
  std::size_t factor = 3;
  std::size_t minimum = 6;

  std::size_t size_for(std::size_t known_categories) const {
    return std::max(minimum, factor * known_categories);
  }
  friend bool operator==(const WindowPolicy&, const WindowPolicy&) = default;
};

struct TeacherConfig {
  double tau = 0.67;
  std::size_t max_idle_iterations = 100;
  WindowPolicy window;
  std::uint64_t seed = 0;
  std::size_t runs = 10;
  bool shuffle_categories = false;

  void validate() const;
  static TeacherConfig from_keyvalue(const KeyValueFile& kv);
};

enum class TeacherAction { kIntroduce, kTeach, kAsk, kCorrect };
enum class StopReason { kLackOfData, kFailure };

std::string_view action_name(TeacherAction a);
std::string_view stop_reason_name(StopReason r);

struct ProtocolEvent {
  std::uint64_t iteration = 0;
  TeacherAction action = TeacherAction::kAsk;
  std::string category;
  std::string instance;
  std::string view;
  std::string predicted;  // asks only
  bool correct = true;    // false only for a wrong ask

  friend bool operator==(const ProtocolEvent&, const ProtocolEvent&) = default;
};

struct ExperimentLog {
  std::uint64_t seed = 0;
  double tau = 0.67;
  std::size_t max_idle_iterations = 100;
  WindowPolicy window;
  std::vector<ProtocolEvent> events;
  StopReason stop_reason = StopReason::kLackOfData;

  friend bool operator==(const ExperimentLog&, const ExperimentLog&) = default;
};

/// The learner driven by the simulated teacher.
class Agent {
 public:
  virtual ~Agent() = default;
  /// Predicts the category of `view`; must not read view.category_label.
  virtual Prediction ask(const DatasetView& view) = 0;
  virtual void teach(const std::string& label, const DatasetView& view) = 0;
  virtual void correct(const std::string& label, const DatasetView& view) = 0;
};

/// Always answers the true label.
class OracleAgent final : public Agent {
 public:
  Prediction ask(const DatasetView& view) override;
  void teach(const std::string&, const DatasetView&) override {}
  void correct(const std::string&, const DatasetView&) override {}
};

/// Never answers the true label.
class AdversarialAgent final : public Agent {
 public:
  Prediction ask(const DatasetView& view) override;
  void teach(const std::string&, const DatasetView&) override {}
  void correct(const std::string&, const DatasetView&) override {}
};

/// Thread-safe cache of object representations keyed by cloud path, shared
/// across repeated runs over one dataset.
class FeatureCache {
 public:
  FeatureVector get_or_compute(const DatasetView& view, const Pipeline& pipeline);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, FeatureVector> features_;
};

/// Instance-based learner over the full representation pipeline.
class IblAgent final : public Agent {
 public:
  IblAgent(const Pipeline& pipeline, MemoryOptions options, FeatureCache* cache = nullptr);

  Prediction ask(const DatasetView& view) override;
  void teach(const std::string& label, const DatasetView& view) override;
  void correct(const std::string& label, const DatasetView& view) override;

  const PerceptualMemory& memory() const { return memory_; }

 private:
  FeatureVector feature(const DatasetView& view);

  const Pipeline& pipeline_;
  PerceptualMemory memory_;
  FeatureCache* cache_;
  FeatureCache own_cache_;
};

/// Sliding accuracy window over ask outcomes since the last introduction.
class AccuracyWindow {
 public:
  void reset(std::size_t capacity);
  void push(bool correct);
  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return outcomes_.size(); }
  bool full() const { return outcomes_.size() >= capacity_; }
  /// Correct fraction of the outcomes currently held; 0 when empty.
  double accuracy() const;

 private:
  std::size_t capacity_ = 0;
  std::vector<bool> outcomes_;
};

/// True when a new category may be introduced: the window is full, every
/// known category was asked since the last introduction, and the window
/// accuracy exceeds tau.
bool introduction_allowed(double window_accuracy, bool window_full, bool all_known_tested, double tau);

/// Simulated-teacher test-then-train run. Introduces two categories, then
/// repeatedly asks about an unseen view of a random known category
/// (correcting wrong answers) and introduces the next category whenever
/// introduction_allowed() holds. Stops with LackOfData when no category is
/// left to introduce or no unseen view remains, and with Failure after
/// max_idle_iterations asks without an introduction. Deterministic in
/// (dataset, config.seed, agent). Categories with fewer than two views are
/// ignored; throws EmptyDataset if fewer than two categories remain.
ExperimentLog run_experiment(std::span<const DatasetView> dataset, Agent& agent, const TeacherConfig& config);

/// Seed of repetition `run` derived from the base seed.
std::uint64_t derive_run_seed(std::uint64_t base_seed, std::size_t run);

struct MetricsReport {
  double qci = 0.0;  // asks, each with its optional correction
  double nlc = 0.0;  // categories introduced
  double aic = 0.0;  // stored instances per learned category
  double gca = 0.0;  // correct asks / asks
  double apa = 0.0;  // mean window accuracy sampled at every ask
  StopReason stop_reason = StopReason::kLackOfData;
};

/// Replays a log and computes its metrics. Throws LogError for malformed
/// logs (non-increasing iterations, a correction not preceded by a wrong
/// ask, inconsistent ask flags, asks before any introduction).
MetricsReport compute_metrics(const ExperimentLog& log);

/// Window accuracy after every ask of the log, in order.
std::vector<double> window_accuracy_trace(const ExperimentLog& log);

struct RunSummary {
  MetricsReport mean;
  MetricsReport variance;  // population variance per metric
  std::vector<MetricsReport> runs;
  std::size_t lack_of_data = 0;
  std::size_t failures = 0;
};

/// Throws EmptyInput for an empty list.
RunSummary summarize_runs(std::span<const MetricsReport> reports);

// --- serialization --------------------------------------------------------

/// JSON lines: a header object, one object per event, a stop object.
std::string write_log_jsonl(const ExperimentLog& log);
ExperimentLog read_log_jsonl(std::string_view text);

/// Fixed-width text table of per-run metrics plus mean and variance rows.
std::string format_summary_table(const RunSummary& summary, std::span<const std::uint64_t> seeds);
std::string format_summary_json(const RunSummary& summary, std::span<const std::uint64_t> seeds);

}  // namespace opencat
