#include <bit>
#include <cstring>

#include "opencat/error.hpp"
#include "opencat/ibl.hpp"

namespace opencat {
namespace {

constexpr char kMagic[8] = {'O', 'C', 'A', 'T', 'M', 'E', 'M', '1'};

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

class Writer {
 public:
  template <typename T>
  void put(T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out_.insert(out_.end(), p, p + sizeof(T));
  }
  void put_string(const std::string& s) {
    put(static_cast<std::uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void put_raw(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void get_raw(void* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw ParseError(0, "memory snapshot is truncated");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> save_memory(const PerceptualMemory& memory) {
  Writer w;
  w.put_raw(kMagic, sizeof(kMagic));
  w.put(kMemorySnapshotVersion);

  const MemoryOptions& opt = memory.options();
  w.put(static_cast<std::uint8_t>(opt.unknown_threshold.has_value()));
  w.put(opt.unknown_threshold.value_or(0.0));
  w.put(static_cast<std::uint64_t>(opt.category_capacity));

  const auto& layout = memory.layout();
  w.put(static_cast<std::uint8_t>(layout.has_value()));
  if (layout) {
    w.put(static_cast<std::uint64_t>(layout->shape_length));
    w.put(static_cast<std::uint64_t>(layout->color_length));
    w.put(layout->w);
    w.put(static_cast<std::uint32_t>(layout->spaces.size()));
    for (ColorspaceId s : layout->spaces) w.put(static_cast<std::uint8_t>(s));
    w.put_string(layout->shape_backbone);
    w.put_string(layout->color_backbone);
  }

  w.put(memory.event_counter());
  w.put(static_cast<std::uint32_t>(memory.categories().size()));
  for (const CategoryModel& c : memory.categories()) {
    w.put_string(c.label);
    w.put(c.created_at);
    w.put(static_cast<std::uint32_t>(c.instances.size()));
    for (const auto& inst : c.instances) w.put_raw(inst.data(), inst.size() * sizeof(double));
  }
  w.put(static_cast<std::uint32_t>(memory.events().size()));
  for (const MemoryEvent& e : memory.events()) {
    w.put(e.index);
    w.put_string(e.label);
    w.put(static_cast<std::uint8_t>(e.correction));
  }
  return w.take();
}

PerceptualMemory load_memory(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  char magic[8];
  r.get_raw(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw ParseError(0, "not a memory snapshot (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kMemorySnapshotVersion) {
    throw ParseError(0, "unsupported memory snapshot version " + std::to_string(version));
  }

  MemoryOptions opt;
  const bool has_threshold = r.get<std::uint8_t>() != 0;
  const double threshold = r.get<double>();
  if (has_threshold) opt.unknown_threshold = threshold;
  opt.category_capacity = static_cast<std::size_t>(r.get<std::uint64_t>());

  PerceptualMemory m(opt);
  if (r.get<std::uint8_t>() != 0) {
    FeatureLayout l;
    l.shape_length = static_cast<std::size_t>(r.get<std::uint64_t>());
    l.color_length = static_cast<std::size_t>(r.get<std::uint64_t>());
    l.w = r.get<double>();
    const auto n_spaces = r.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < n_spaces; ++i) {
      const auto id = r.get<std::uint8_t>();
      if (id >= kAllColorspaces.size()) throw ParseError(0, "invalid colorspace id in snapshot");
      l.spaces.push_back(static_cast<ColorspaceId>(id));
    }
    l.shape_backbone = r.get_string();
    l.color_backbone = r.get_string();
    m.layout_ = l;
  }

  m.event_counter_ = r.get<std::uint64_t>();
  const auto n_categories = r.get<std::uint32_t>();
  if (n_categories > 0 && !m.layout_) throw ParseError(0, "snapshot has categories but no layout");
  for (std::uint32_t i = 0; i < n_categories; ++i) {
    CategoryModel c;
    c.label = r.get_string();
    c.created_at = r.get<std::uint64_t>();
    const auto n = r.get<std::uint32_t>();
    for (std::uint32_t k = 0; k < n; ++k) {
      std::vector<double> inst(m.layout_->total());
      r.get_raw(inst.data(), inst.size() * sizeof(double));
      c.instances.push_back(std::move(inst));
    }
    m.categories_.push_back(std::move(c));
  }
  const auto n_events = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_events; ++i) {
    MemoryEvent e;
    e.index = r.get<std::uint64_t>();
    e.label = r.get_string();
    e.correction = r.get<std::uint8_t>() != 0;
    m.events_.push_back(std::move(e));
  }
  if (!r.at_end()) throw ParseError(0, "trailing bytes after memory snapshot");
  return m;
}

}  // namespace opencat
