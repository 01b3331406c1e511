#include "opencat/ibl.hpp"

#include <cmath>
#include <mutex>

#include "opencat/error.hpp"

namespace opencat {

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kInvalidFeature, "cosine distance of vectors of different length");
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (!(na > 0.0) || !(nb > 0.0)) throw Error(ErrorCode::kInvalidFeature, "cosine distance of a zero vector");
  return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

void PerceptualMemory::store(const std::string& label, const FeatureVector& f, bool correction) {
  if (label.empty() || label == kUnknownLabel) {
    throw Error(ErrorCode::kInvalidFeature, "'" + label + "' is not a valid category label");
  }
  if (f.values.size() != f.layout.total()) {
    throw Error(ErrorCode::kLayoutError, "feature length does not match its layout descriptor");
  }
  if (layout_ && !(*layout_ == f.layout)) {
    throw Error(ErrorCode::kLayoutError, "feature layout differs from the layout of this memory");
  }
  double norm = 0.0;
  for (double v : f.values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidFeature, "feature has non-finite values");
    norm += v * v;
  }
  if (!(norm > 0.0)) throw Error(ErrorCode::kInvalidFeature, "cannot store a zero-norm feature");

  if (!layout_) layout_ = f.layout;
  const std::uint64_t index = event_counter_++;
  CategoryModel* category = nullptr;
  for (CategoryModel& c : categories_) {
    if (c.label == label) category = &c;
  }
  if (!category) {
    categories_.push_back({label, {}, index});
    category = &categories_.back();
  }
  category->instances.push_back(f.values);
  if (options_.category_capacity > 0 && category->instances.size() > options_.category_capacity) {
    category->instances.erase(category->instances.begin());
  }
  events_.push_back({index, label, correction});
}

void PerceptualMemory::teach(const std::string& label, const FeatureVector& f) { store(label, f, false); }

void PerceptualMemory::correct(const std::string& label, const FeatureVector& f) { store(label, f, true); }

Prediction PerceptualMemory::classify(const FeatureVector& f) const {
  if (layout_ && !(*layout_ == f.layout)) {
    throw Error(ErrorCode::kLayoutError, "query layout differs from the layout of this memory");
  }
  return classify(std::span<const double>(f.values));
}

Prediction PerceptualMemory::classify(std::span<const double> values) const {
  double qnorm = 0.0;
  for (double v : values) qnorm += v * v;
  if (!(qnorm > 0.0) || !std::isfinite(qnorm)) {
    throw Error(ErrorCode::kInvalidFeature, "query feature has zero norm");
  }
  Prediction p;
  if (categories_.empty()) return p;
  if (values.size() != layout_->total()) {
    throw Error(ErrorCode::kLayoutError, "query length does not match the memory layout");
  }

  // Nearest instance per category, categories in creation order.
  std::vector<double> best(categories_.size(), std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < categories_.size(); ++c) {
    for (const auto& inst : categories_[c].instances) {
      const double d = cosine_distance(values, inst);
      if (d < best[c]) best[c] = d;
    }
  }
  std::size_t winner = 0;
  for (std::size_t c = 1; c < best.size(); ++c) {
    if (best[c] < best[winner]) winner = c;
  }
  p.label = categories_[winner].label;
  p.distance = best[winner];
  std::optional<std::size_t> second;
  for (std::size_t c = 0; c < best.size(); ++c) {
    if (c != winner && (!second || best[c] < best[*second])) second = c;
  }
  if (second) p.runner_up = std::make_pair(categories_[*second].label, best[*second]);

  if (options_.unknown_threshold && p.distance > *options_.unknown_threshold) {
    p.runner_up = std::make_pair(p.label, p.distance);
    p.label = std::string(kUnknownLabel);
  }
  return p;
}

const CategoryModel* PerceptualMemory::find(std::string_view label) const {
  for (const CategoryModel& c : categories_) {
    if (c.label == label) return &c;
  }
  return nullptr;
}

std::size_t PerceptualMemory::instance_count() const {
  std::size_t n = 0;
  for (const CategoryModel& c : categories_) n += c.instances.size();
  return n;
}

double PerceptualMemory::average_instances_per_category() const {
  if (categories_.empty()) return 0.0;
  return static_cast<double>(instance_count()) / static_cast<double>(categories_.size());
}

void ConcurrentMemory::teach(const std::string& label, const FeatureVector& f) {
  std::unique_lock lock(mutex_);
  memory_.teach(label, f);
}

void ConcurrentMemory::correct(const std::string& label, const FeatureVector& f) {
  std::unique_lock lock(mutex_);
  memory_.correct(label, f);
}

Prediction ConcurrentMemory::classify(const FeatureVector& f) const {
  std::shared_lock lock(mutex_);
  return memory_.classify(f);
}

PerceptualMemory ConcurrentMemory::snapshot() const {
  std::shared_lock lock(mutex_);
  return memory_;
}

}  // namespace opencat
