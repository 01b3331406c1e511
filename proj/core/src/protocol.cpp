#include "opencat/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "opencat/error.hpp"
#include "opencat/pipeline.hpp"

namespace opencat {
namespace {

// Unbiased draw from [0, n) that does not depend on the standard library's
// distribution implementation.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t bound = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r = rng();
  while (r >= limit) r = rng();
  return static_cast<std::size_t>(r % bound);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::string_view action_name(TeacherAction a) {
  switch (a) {
    case TeacherAction::kIntroduce: return "introduce";
    case TeacherAction::kTeach: return "teach";
    case TeacherAction::kAsk: return "ask";
    case TeacherAction::kCorrect: return "correct";
  }
  return "unknown";
}

std::string_view stop_reason_name(StopReason r) {
  return r == StopReason::kFailure ? "Failure" : "LackOfData";
}

void TeacherConfig::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorCode::kConfigError, "tau must lie in (0, 1)");
  if (max_idle_iterations == 0) throw Error(ErrorCode::kConfigError, "max_idle_iterations must be positive");
  if (window.minimum == 0) throw Error(ErrorCode::kConfigError, "window minimum must be positive");
  if (runs == 0) throw Error(ErrorCode::kConfigError, "runs must be positive");
}

TeacherConfig TeacherConfig::from_keyvalue(const KeyValueFile& kv) {
  TeacherConfig c;
  auto count = [&](const std::string& key, std::size_t& out) {
    if (auto v = kv.get_number(key)) {
      if (*v < 0 || std::floor(*v) != *v) throw Error(ErrorCode::kConfigError, key + " must be a non-negative integer");
      out = static_cast<std::size_t>(*v);
    }
  };
  if (auto v = kv.get_number("tau")) c.tau = *v;
  count("max_idle_iterations", c.max_idle_iterations);
  count("window_factor", c.window.factor);
  count("window_minimum", c.window.minimum);
  count("runs", c.runs);
  if (auto v = kv.get_number("seed")) {
    if (*v < 0 || std::floor(*v) != *v) throw Error(ErrorCode::kConfigError, "seed must be a non-negative integer");
    c.seed = static_cast<std::uint64_t>(*v);
  }
  if (auto v = kv.get_bool("shuffle_categories")) c.shuffle_categories = *v;
  c.validate();
  return c;
}

// --- agents ----------------------------------------------------------------

Prediction OracleAgent::ask(const DatasetView& view) {
  Prediction p;
  p.label = view.category_label;
  p.distance = 0.0;
  return p;
}

Prediction AdversarialAgent::ask(const DatasetView& view) {
  Prediction p;
  p.label = view.category_label + "~";
  p.distance = 1.0;
  return p;
}

FeatureVector FeatureCache::get_or_compute(const DatasetView& view, const Pipeline& pipeline) {
  const std::string key = view.cloud_ref.string();
  {
    std::lock_guard lock(mutex_);
    auto it = features_.find(key);
    if (it != features_.end()) return it->second;
  }
  FeatureVector f = represent_object(read_cloud(view.cloud_ref), pipeline);
  std::lock_guard lock(mutex_);
  return features_.emplace(key, std::move(f)).first->second;
}

std::size_t FeatureCache::size() const {
  std::lock_guard lock(mutex_);
  return features_.size();
}

IblAgent::IblAgent(const Pipeline& pipeline, MemoryOptions options, FeatureCache* cache)
    : pipeline_(pipeline), memory_(options), cache_(cache ? cache : &own_cache_) {}

FeatureVector IblAgent::feature(const DatasetView& view) { return cache_->get_or_compute(view, pipeline_); }

Prediction IblAgent::ask(const DatasetView& view) { return memory_.classify(feature(view)); }

void IblAgent::teach(const std::string& label, const DatasetView& view) { memory_.teach(label, feature(view)); }

void IblAgent::correct(const std::string& label, const DatasetView& view) {
  memory_.correct(label, feature(view));
}

// --- window ----------------------------------------------------------------

void AccuracyWindow::reset(std::size_t capacity) {
  capacity_ = capacity;
  outcomes_.clear();
}

void AccuracyWindow::push(bool correct) {
  outcomes_.push_back(correct);
  if (outcomes_.size() > capacity_) outcomes_.erase(outcomes_.begin());
}

double AccuracyWindow::accuracy() const {
  if (outcomes_.empty()) return 0.0;
  const auto hits = std::count(outcomes_.begin(), outcomes_.end(), true);
  return static_cast<double>(hits) / static_cast<double>(outcomes_.size());
}

bool introduction_allowed(double window_accuracy, bool window_full, bool all_known_tested, double tau) {
  return window_full && all_known_tested && window_accuracy > tau;
}

// --- runner ----------------------------------------------------------------

ExperimentLog run_experiment(std::span<const DatasetView> dataset, Agent& agent, const TeacherConfig& config) {
  config.validate();

  std::map<std::string, std::vector<std::size_t>> by_category;
  for (std::size_t i = 0; i < dataset.size(); ++i) by_category[dataset[i].category_label].push_back(i);
  std::vector<std::string> order;
  for (const auto& [label, views] : by_category) {
    if (views.size() >= 2) order.push_back(label);
  }
  if (order.size() < 2) {
    throw Error(ErrorCode::kEmptyDataset, "the protocol needs at least two categories with two views each");
  }

  std::mt19937_64 rng(config.seed);
  if (config.shuffle_categories) {
    std::mt19937_64 shuffle_rng(splitmix64(config.seed ^ 0x5348554646ULL));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[uniform_index(shuffle_rng, i)]);
    }
  }

  ExperimentLog log;
  log.seed = config.seed;
  log.tau = config.tau;
  log.max_idle_iterations = config.max_idle_iterations;
  log.window = config.window;

  std::map<std::string, std::vector<std::size_t>> unseen = by_category;
  std::vector<std::string> known;
  std::set<std::string> tested;
  AccuracyWindow window;
  std::size_t next_category = 0;
  std::size_t idle = 0;
  std::uint64_t iteration = 0;

  auto take_unseen = [&](const std::string& label) -> const DatasetView& {
    auto& pool = unseen[label];
    const std::size_t k = uniform_index(rng, pool.size());
    const std::size_t idx = pool[k];
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
    return dataset[idx];
  };
  auto record = [&](TeacherAction action, const DatasetView& v, std::string predicted, bool correct) {
    log.events.push_back({iteration++, action, v.category_label, v.instance_id, v.view_id, std::move(predicted),
                          correct});
  };
  auto introduce = [&]() {
    const std::string& label = order[next_category++];
    const DatasetView& v = take_unseen(label);
    agent.teach(label, v);
    record(TeacherAction::kIntroduce, v, {}, true);
    known.push_back(label);
    tested.clear();
    window.reset(config.window.size_for(known.size()));
    idle = 0;
  };

  introduce();
  introduce();
  for (;;) {
    std::vector<const std::string*> candidates;
    for (const auto& label : known) {
      if (!unseen[label].empty()) candidates.push_back(&label);
    }
    if (candidates.empty()) {
      log.stop_reason = StopReason::kLackOfData;
      break;
    }
    const std::string& label = *candidates[uniform_index(rng, candidates.size())];
    const DatasetView& v = take_unseen(label);
    const Prediction p = agent.ask(v);
    const bool ok = p.label == label;
    record(TeacherAction::kAsk, v, p.label, ok);
    if (!ok) {
      agent.correct(label, v);
      record(TeacherAction::kCorrect, v, {}, true);
    }
    window.push(ok);
    tested.insert(label);
    ++idle;

    if (introduction_allowed(window.accuracy(), window.full(), tested.size() == known.size(), config.tau)) {
      if (next_category == order.size()) {
        log.stop_reason = StopReason::kLackOfData;
        break;
      }
      introduce();
      continue;
    }
    if (idle >= config.max_idle_iterations) {
      log.stop_reason = StopReason::kFailure;
      break;
    }
  }
  return log;
}

std::uint64_t derive_run_seed(std::uint64_t base_seed, std::size_t run) {
  return splitmix64(base_seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(run));
}

// --- metrics ---------------------------------------------------------------

namespace {

void log_error(std::size_t event, const std::string& what) {
  throw Error(ErrorCode::kLogError, "event " + std::to_string(event) + ": " + what);
}

struct Replay {
  std::size_t asks = 0, correct_asks = 0, introductions = 0, teaches = 0, corrections = 0;
  std::vector<double> window_trace;
};

Replay replay(const ExperimentLog& log) {
  Replay r;
  AccuracyWindow window;
  const ProtocolEvent* previous = nullptr;
  for (std::size_t i = 0; i < log.events.size(); ++i) {
    const ProtocolEvent& e = log.events[i];
    if (previous && e.iteration <= previous->iteration) log_error(i, "iteration indices must increase");
    switch (e.action) {
      case TeacherAction::kIntroduce:
        ++r.introductions;
        window.reset(log.window.size_for(r.introductions));
        break;
      case TeacherAction::kTeach:
        ++r.teaches;
        break;
      case TeacherAction::kAsk:
        if (r.introductions == 0) log_error(i, "ask before any introduction");
        if (e.correct != (e.predicted == e.category)) log_error(i, "ask outcome disagrees with the prediction");
        ++r.asks;
        if (e.correct) ++r.correct_asks;
        window.push(e.correct);
        r.window_trace.push_back(window.accuracy());
        break;
      case TeacherAction::kCorrect:
        if (!previous || previous->action != TeacherAction::kAsk || previous->correct) {
          log_error(i, "correction must follow a wrong answer");
        }
        if (previous->category != e.category || previous->view != e.view || previous->instance != e.instance) {
          log_error(i, "correction refers to a different view than the ask");
        }
        ++r.corrections;
        break;
    }
    previous = &e;
  }
  return r;
}

}  // namespace

MetricsReport compute_metrics(const ExperimentLog& log) {
  const Replay r = replay(log);
  MetricsReport m;
  m.qci = static_cast<double>(r.asks);
  m.nlc = static_cast<double>(r.introductions);
  if (r.introductions > 0) {
    m.aic = static_cast<double>(r.introductions + r.teaches + r.corrections) / static_cast<double>(r.introductions);
  }
  if (r.asks > 0) {
    m.gca = static_cast<double>(r.correct_asks) / static_cast<double>(r.asks);
    double sum = 0.0;
    for (double a : r.window_trace) sum += a;
    m.apa = sum / static_cast<double>(r.asks);
  }
  m.stop_reason = log.stop_reason;
  return m;
}

std::vector<double> window_accuracy_trace(const ExperimentLog& log) { return replay(log).window_trace; }

RunSummary summarize_runs(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw Error(ErrorCode::kEmptyInput, "no runs to summarize");
  RunSummary s;
  s.runs.assign(reports.begin(), reports.end());
  const double n = static_cast<double>(reports.size());
  auto field = [](MetricsReport& m, int k) -> double& {
    switch (k) {
      case 0: return m.qci;
      case 1: return m.nlc;
      case 2: return m.aic;
      case 3: return m.gca;
      default: return m.apa;
    }
  };
  for (int k = 0; k < 5; ++k) {
    double mean = 0.0;
    for (auto m : s.runs) mean += field(m, k);
    mean /= n;
    // Identical runs report their common value exactly.
    if (std::all_of(s.runs.begin(), s.runs.end(), [&](auto m) { return field(m, k) == field(s.runs[0], k); })) {
      mean = field(s.runs[0], k);
    }
    double var = 0.0;
    for (auto m : s.runs) var += (field(m, k) - mean) * (field(m, k) - mean);
    field(s.mean, k) = mean;
    field(s.variance, k) = var / n;
  }
  for (const auto& m : reports) {
    if (m.stop_reason == StopReason::kFailure) ++s.failures;
    else ++s.lack_of_data;
  }
  s.mean.stop_reason = s.failures > s.lack_of_data ? StopReason::kFailure : StopReason::kLackOfData;
  s.variance.stop_reason = s.mean.stop_reason;
  return s;
}

}  // namespace opencat
