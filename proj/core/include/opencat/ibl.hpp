#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "opencat/embedding.hpp"

namespace opencat {

inline constexpr std::string_view kUnknownLabel = "UNKNOWN";

/// 1 - a.b / (|a| |b|). Throws InvalidFeature for mismatched lengths or a
/// zero-norm argument.
double cosine_distance(std::span<const double> a, std::span<const double> b);

/// A category is the set of instances taught for its label.
struct CategoryModel {
  std::string label;
  std::vector<std::vector<double>> instances;
  std::uint64_t created_at = 0;  // event index of the first teach

  friend bool operator==(const CategoryModel&, const CategoryModel&) = default;
};

struct Prediction {
  std::string label{kUnknownLabel};
  double distance = std::numeric_limits<double>::infinity();
  std::optional<std::pair<std::string, double>> runner_up;

  bool is_unknown() const { return label == kUnknownLabel; }
};

struct MemoryEvent {
  std::uint64_t index = 0;
  std::string label;
  bool correction = false;

  friend bool operator==(const MemoryEvent&, const MemoryEvent&) = default;
};

struct MemoryOptions {
  /// Open-set rejection: predictions farther than this are UNKNOWN.
  std::optional<double> unknown_threshold;
  /// Per-category instance bound with FIFO eviction; 0 disables eviction.
  std::size_t category_capacity = 0;

  friend bool operator==(const MemoryOptions&, const MemoryOptions&) = default;
};

/// Open-ended instance-based category memory with 1-NN recognition.
///
/// The first teach fixes the feature layout. Categories keep creation order,
/// which also breaks distance ties. Not synchronized; see ConcurrentMemory.
class PerceptualMemory {
 public:
  explicit PerceptualMemory(MemoryOptions options = {}) : options_(options) {}

  void teach(const std::string& label, const FeatureVector& f);
  /// Same effect on the categories as teach(); the event is flagged.
  void correct(const std::string& label, const FeatureVector& f);

  /// Nearest stored instance under cosine distance; UNKNOWN with infinite
  /// distance when empty. The runner-up is the nearest other category.
  Prediction classify(const FeatureVector& f) const;
  Prediction classify(std::span<const double> values) const;

  const std::vector<CategoryModel>& categories() const { return categories_; }
  const CategoryModel* find(std::string_view label) const;
  const std::optional<FeatureLayout>& layout() const { return layout_; }
  const std::vector<MemoryEvent>& events() const { return events_; }
  const MemoryOptions& options() const { return options_; }
  std::uint64_t event_counter() const { return event_counter_; }

  std::size_t instance_count() const;
  /// Mean instances per category; 0 for an empty memory.
  double average_instances_per_category() const;
  bool empty() const { return categories_.empty(); }

  friend bool operator==(const PerceptualMemory&, const PerceptualMemory&) = default;

 private:
  friend PerceptualMemory load_memory(std::span<const std::uint8_t> bytes);

  void store(const std::string& label, const FeatureVector& f, bool correction);

  MemoryOptions options_;
  std::optional<FeatureLayout> layout_;
  std::vector<CategoryModel> categories_;
  std::vector<MemoryEvent> events_;
  std::uint64_t event_counter_ = 0;
};

/// Versioned little-endian snapshot: magic "OCATMEM1", format version,
/// options, layout, event counter, categories, event flags.
std::vector<std::uint8_t> save_memory(const PerceptualMemory& memory);
/// Throws ParseError for bad magic, unsupported version, or truncation.
PerceptualMemory load_memory(std::span<const std::uint8_t> bytes);

inline constexpr std::uint32_t kMemorySnapshotVersion = 1;

/// Single-writer, multi-reader wrapper: classify() runs concurrently,
/// teach()/correct() are serialized, and readers never see a half-applied
/// update.
class ConcurrentMemory {
 public:
  explicit ConcurrentMemory(MemoryOptions options = {}) : memory_(options) {}
  explicit ConcurrentMemory(PerceptualMemory memory) : memory_(std::move(memory)) {}

  void teach(const std::string& label, const FeatureVector& f);
  void correct(const std::string& label, const FeatureVector& f);
  Prediction classify(const FeatureVector& f) const;
  PerceptualMemory snapshot() const;

 private:
  mutable std::shared_mutex mutex_;
  PerceptualMemory memory_;
};

}  // namespace opencat
