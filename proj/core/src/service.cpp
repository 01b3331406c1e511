#include "opencat/service.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <deque>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <shared_mutex>

#include <httplib.h>
#include <json.hpp>

#include "opencat/cloud_io.hpp"
#include "opencat/error.hpp"
#include "opencat/png_io.hpp"

namespace opencat {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct HttpError {
  int status;
  std::string code;
  std::string message;
};

HttpResponse error_response(int status, std::string_view code, std::string_view message) {
  return {status, json{{"code", code}, {"message", message}}.dump()};
}

json parse_body(std::string_view body) {
  if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) return json::object();
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw HttpError{400, "BadRequest", "request body must be a JSON object"};
  return j;
}

std::string required_label(const json& body) {
  auto it = body.find("label");
  if (it == body.end() || !it->is_string()) throw HttpError{400, "BadRequest", "missing string field 'label'"};
  std::string label = it->get<std::string>();
  if (label.empty() || label == kUnknownLabel) {
    throw HttpError{400, "BadRequest", "label must be non-empty and not " + std::string(kUnknownLabel)};
  }
  return label;
}

json distance_json(double d) { return std::isfinite(d) ? json(d) : json(nullptr); }

json prediction_json(const Prediction& p) {
  json j = {{"label", p.label}, {"distance", distance_json(p.distance)}, {"runner_up", nullptr}};
  if (p.runner_up) j["runner_up"] = {{"label", p.runner_up->first}, {"distance", distance_json(p.runner_up->second)}};
  return j;
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  const std::size_t q = path.find('?');
  if (q != std::string_view::npos) path = path.substr(0, q);
  std::size_t pos = 0;
  while (pos < path.size()) {
    const std::size_t next = path.find('/', pos);
    const std::size_t end = next == std::string_view::npos ? path.size() : next;
    if (end > pos) parts.emplace_back(path.substr(pos, end - pos));
    pos = end + 1;
  }
  return parts;
}

struct CurrentObject {
  std::string source;
  FeatureVector feature;
  Prediction prediction;
  bool resolved = false;  // taught, corrected or accepted
};

// Everything a GET may read, rebuilt after each mutation.
struct Published {
  std::string state;
  std::string categories;
};

struct Session {
  std::string id;
  bool upload = false;
  std::vector<DatasetView> queue;
  std::size_t cursor = 0;

  std::mutex write_mutex;
  PerceptualMemory memory;
  std::optional<CurrentObject> current;
  AccuracyWindow window;
  std::vector<double> accuracy_series;
  std::size_t asks = 0, hits = 0, resolved = 0;

  mutable std::mutex log_mutex;
  std::deque<std::string> log;

  mutable std::mutex publish_mutex;
  std::shared_ptr<const Published> published;
};

}  // namespace

struct SessionService::Impl {
  ServiceConfig config;
  std::shared_ptr<const Pipeline> pipeline;
  MemoryOptions memory_options;

  mutable std::shared_mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  std::atomic<std::uint64_t> next_id{1};

  httplib::Server server;

  std::shared_ptr<Session> find(const std::string& id) const {
    std::shared_lock lock(sessions_mutex);
    auto it = sessions.find(id);
    if (it == sessions.end()) throw HttpError{404, "NotFound", "unknown session '" + id + "'"};
    return it->second;
  }

  void append_log(Session& s, json event) {
    std::lock_guard lock(s.log_mutex);
    event["index"] = s.log.size();
    s.log.push_back(event.dump());
  }

  // Called with the session write mutex held.
  void publish(Session& s) {
    const std::size_t n = s.memory.categories().size();
    double apa = 0.0;
    for (double a : s.accuracy_series) apa += a;
    if (!s.accuracy_series.empty()) apa /= static_cast<double>(s.accuracy_series.size());
    json metrics = {{"qci", s.asks},
                    {"nlc", n},
                    {"aic", n ? s.memory.average_instances_per_category() : 0.0},
                    {"gca", s.resolved ? static_cast<double>(s.hits) / static_cast<double>(s.resolved) : 0.0},
                    {"apa", apa}};
    json state = {{"id", s.id},
                  {"mode", s.upload ? "upload" : "dataset"},
                  {"remaining", s.upload ? json(nullptr) : json(s.queue.size() - s.cursor)},
                  {"current", nullptr},
                  {"window_accuracy", s.window.accuracy()},
                  {"window_size", s.window.capacity()},
                  {"accuracy_series", s.accuracy_series},
                  {"categories", n},
                  {"instances", s.memory.instance_count()},
                  {"metrics", metrics}};
    if (s.current) {
      state["current"] = {{"source", s.current->source},
                          {"prediction", prediction_json(s.current->prediction)},
                          {"resolved", s.current->resolved}};
    }
    json cats = json::array();
    for (const auto& c : s.memory.categories()) cats.push_back({{"label", c.label}, {"instances", c.instances.size()}});
    auto p = std::make_shared<Published>(Published{state.dump(), json{{"categories", cats}}.dump()});
    std::lock_guard lock(s.publish_mutex);
    s.published = std::move(p);
  }

  std::shared_ptr<const Published> snapshot(const Session& s) const {
    std::lock_guard lock(s.publish_mutex);
    return s.published;
  }

  void record_outcome(Session& s, bool hit) {
    ++s.resolved;
    if (hit) ++s.hits;
    s.window.push(hit);
    s.accuracy_series.push_back(s.window.accuracy());
  }

  void resize_window(Session& s) {
    const std::size_t size = config.window.size_for(std::max<std::size_t>(1, s.memory.categories().size()));
    if (size != s.window.capacity()) s.window.reset(size);
  }

  HttpResponse create(const json& body) {
    auto s = std::make_shared<Session>();
    s->memory = PerceptualMemory(memory_options);
    if (body.value("mode", std::string()) == "upload") {
      s->upload = true;
    } else {
      auto it = body.find("dataset");
      if (it == body.end() || !it->is_string()) {
        throw HttpError{400, "BadRequest", "body needs a string 'dataset' root or \"mode\": \"upload\""};
      }
      DatasetIndex index = load_dataset_index(it->get<std::string>());
      s->queue = std::move(index.views);
      if (body.value("shuffle", true)) {
        const auto seed = body.value("seed", std::uint64_t{0});
        std::mt19937_64 rng(derive_run_seed(seed, 0));
        for (std::size_t i = s->queue.size(); i > 1; --i) {
          std::swap(s->queue[i - 1], s->queue[rng() % i]);
        }
      }
    }
    s->id = "s" + std::to_string(next_id++);
    {
      std::lock_guard lock(s->write_mutex);
      resize_window(*s);
      publish(*s);
    }
    const std::string state = snapshot(*s)->state;
    std::unique_lock lock(sessions_mutex);
    sessions.emplace(s->id, s);
    return {201, state};
  }

  HttpResponse next(Session& s, const json& body) {
    std::lock_guard lock(s.write_mutex);
    ObjectCloud cloud;
    std::string source;
    if (s.upload) {
      auto it = body.find("cloud");
      if (it == body.end() || !it->is_string()) throw HttpError{400, "BadRequest", "missing string field 'cloud'"};
      std::string text = it->get<std::string>();
      if (body.value("base64", false)) {
        const Bytes raw = base64_decode(text);
        text.assign(raw.begin(), raw.end());
      }
      const std::string format = body.value("format", std::string("pcd"));
      if (format == "pcd") cloud = parse_pcd(text);
      else if (format == "csv") cloud = parse_csv(text);
      else throw HttpError{400, "BadRequest", "format must be 'pcd' or 'csv'"};
      if (auto g = body.find("gravity"); g != body.end()) {
        if (!g->is_array() || g->size() != 3) throw HttpError{400, "BadRequest", "gravity must be [x, y, z]"};
        cloud.gravity = Eigen::Vector3d((*g)[0].get<double>(), (*g)[1].get<double>(), (*g)[2].get<double>());
      }
      source = body.value("name", std::string("upload"));
    } else {
      if (s.cursor >= s.queue.size()) {
        if (s.current && !s.current->resolved) finish_current(s);
        s.current.reset();
        publish(s);
        return {200, json{{"end_of_data", true}}.dump()};
      }
      const DatasetView& v = s.queue[s.cursor++];
      cloud = read_cloud(v.cloud_ref);
      source = v.cloud_ref.string();
    }
    if (s.current && !s.current->resolved) finish_current(s);

    const ObjectRepresentation rep = represent_object_detailed(cloud, *pipeline);
    CurrentObject cur{source, rep.feature, s.memory.classify(rep.feature), false};
    ++s.asks;

    json depth = json::object();
    json entropy = json::object();
    for (ViewId v : kAllViews) {
      const std::string name(view_name(v));
      depth[name] = base64_encode(encode_depth_png(rep.views.depth_of(v)));
      const auto& e = rep.entropy.entropy[static_cast<std::size_t>(v)];
      entropy[name] = e ? json(*e) : json(nullptr);
    }
    entropy["selected"] = std::string(view_name(rep.entropy.selected));
    json out = {{"end_of_data", false},
                {"source", source},
                {"views",
                 {{"depth", depth},
                  {"color", base64_encode(encode_color_png(rep.views.color_of(rep.entropy.selected)))},
                  {"selected", std::string(view_name(rep.entropy.selected))}}},
                {"entropy", entropy},
                {"prediction", prediction_json(cur.prediction)}};
    append_log(s, {{"action", "ask"},
                   {"source", source},
                   {"predicted", cur.prediction.label},
                   {"distance", distance_json(cur.prediction.distance)}});
    s.current = std::move(cur);
    publish(s);
    return {200, out.dump()};
  }

  // An object left without feedback counts as accepted, unless the learner
  // had nothing to offer.
  void finish_current(Session& s) {
    s.current->resolved = true;
    if (!s.current->prediction.is_unknown()) record_outcome(s, true);
  }

  HttpResponse feedback(Session& s, const json& body, bool correction) {
    const std::string label = required_label(body);
    std::lock_guard lock(s.write_mutex);
    if (!s.current) throw HttpError{409, "Conflict", "no current object; call /next first"};
    if (s.current->resolved) throw HttpError{409, "Conflict", "the current object was already labeled"};
    if (correction) s.memory.correct(label, s.current->feature);
    else s.memory.teach(label, s.current->feature);
    s.current->resolved = true;
    record_outcome(s, s.current->prediction.label == label);
    resize_window(s);
    append_log(s, {{"action", correction ? "correct" : "teach"},
                   {"source", s.current->source},
                   {"label", label},
                   {"predicted", s.current->prediction.label},
                   {"feature", s.current->feature.values}});
    publish(s);
    return {200, snapshot(s)->categories};
  }

  HttpResponse log_of(const Session& s) const {
    std::string out = "{\"events\":[";
    std::lock_guard lock(s.log_mutex);
    for (std::size_t i = 0; i < s.log.size(); ++i) {
      if (i) out += ',';
      out += s.log[i];
    }
    out += "]}";
    return {200, out};
  }

  HttpResponse route(std::string_view method, std::string_view path, std::string_view body) {
    const auto parts = split_path(path);
    if (parts.empty() || parts[0] != "sessions") throw HttpError{404, "NotFound", "no such endpoint"};
    if (parts.size() == 1) {
      if (method != "POST") throw HttpError{405, "MethodNotAllowed", "use POST /sessions"};
      return create(parse_body(body));
    }
    auto session = find(parts[1]);
    if (parts.size() == 2) {
      if (method != "GET") throw HttpError{405, "MethodNotAllowed", "use GET"};
      return {200, snapshot(*session)->state};
    }
    if (parts.size() != 3) throw HttpError{404, "NotFound", "no such endpoint"};
    const std::string& op = parts[2];
    const bool get = method == "GET";
    if (op == "categories" && get) return {200, snapshot(*session)->categories};
    if (op == "log" && get) return log_of(*session);
    if (method == "POST") {
      if (op == "next") return next(*session, parse_body(body));
      if (op == "teach") return feedback(*session, parse_body(body), false);
      if (op == "correct") return feedback(*session, parse_body(body), true);
    }
    throw HttpError{404, "NotFound", "no such endpoint"};
  }
};

ServiceConfig ServiceConfig::from_keyvalue(const KeyValueFile& kv, const fs::path& base_dir) {
  ServiceConfig c;
  c.pipeline = PipelineConfig::from_keyvalue(kv, base_dir);
  if (auto v = kv.get_string("host")) c.host = *v;
  if (auto v = kv.get_number("port")) {
    if (*v < 0 || *v > 65535 || std::floor(*v) != *v) throw Error(ErrorCode::kConfigError, "port out of range");
    c.port = static_cast<int>(*v);
  }
  auto path = [&](const std::string& key, fs::path& out) {
    if (auto v = kv.get_string(key)) out = fs::path(*v).is_absolute() ? fs::path(*v) : base_dir / *v;
  };
  path("static_dir", c.static_dir);
  path("snapshot_dir", c.snapshot_dir);
  if (auto v = kv.get_number("window_factor")) c.window.factor = static_cast<std::size_t>(*v);
  if (auto v = kv.get_number("window_minimum")) c.window.minimum = static_cast<std::size_t>(*v);
  if (c.window.minimum == 0) throw Error(ErrorCode::kConfigError, "window_minimum must be positive");
  if (auto v = kv.get_bool("access_log")) c.access_log = *v;
  return c;
}

ServiceConfig ServiceConfig::load(const fs::path& path) {
  return from_keyvalue(KeyValueFile::read(path), path.parent_path());
}

SessionService::SessionService(ServiceConfig config)
    : SessionService(config, std::make_shared<const Pipeline>(Pipeline::create(config.pipeline))) {}

SessionService::SessionService(ServiceConfig config, std::shared_ptr<const Pipeline> pipeline)
    : impl_(std::make_unique<Impl>()) {
  impl_->config = std::move(config);
  impl_->pipeline = std::move(pipeline);
  impl_->memory_options.unknown_threshold = impl_->pipeline->config().unknown_threshold;
  impl_->memory_options.category_capacity = impl_->pipeline->config().category_capacity;
  if (impl_->config.access_log) {
    for (const auto& w : impl_->pipeline->warnings()) {
      std::cerr << json{{"level", "warning"}, {"message", w}}.dump() << '\n';
    }
  }

  auto& server = impl_->server;
  if (!impl_->config.static_dir.empty()) server.set_mount_point("/", impl_->config.static_dir.string());
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    const auto start = std::chrono::steady_clock::now();
    HttpResponse r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
    if (impl_->config.access_log) {
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      std::cerr << json{{"method", req.method}, {"path", req.path}, {"status", r.status}, {"ms", ms}}.dump() << '\n';
    }
  };
  server.Get(R"(/sessions.*)", forward);
  server.Post(R"(/sessions.*)", forward);
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

SessionService::~SessionService() { stop(); }

HttpResponse SessionService::handle(std::string_view method, std::string_view path, std::string_view body) {
  try {
    return impl_->route(method, path, body);
  } catch (const HttpError& e) {
    return error_response(e.status, e.code, e.message);
  } catch (const Error& e) {
    return error_response(400, error_code_name(e.code()), e.what());
  } catch (const json::exception& e) {
    return error_response(400, "BadRequest", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "InternalError", e.what());
  }
}

int SessionService::bind() {
  auto& c = impl_->config;
  if (c.port == 0) return impl_->server.bind_to_any_port(c.host);
  if (!impl_->server.bind_to_port(c.host, c.port)) {
    throw Error(ErrorCode::kIoError, "cannot bind " + c.host + ":" + std::to_string(c.port));
  }
  return c.port;
}

void SessionService::run() { impl_->server.listen_after_bind(); }

void SessionService::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

PerceptualMemory SessionService::memory_of(const std::string& session_id) const {
  std::shared_ptr<Session> s;
  try {
    s = impl_->find(session_id);
  } catch (const HttpError& e) {
    throw Error(ErrorCode::kConfigError, e.message);
  }
  std::lock_guard lock(s->write_mutex);
  return s->memory;
}

const Pipeline& SessionService::pipeline() const { return *impl_->pipeline; }
const ServiceConfig& SessionService::config() const { return impl_->config; }

void SessionService::persist_snapshots() const {
  if (impl_->config.snapshot_dir.empty()) return;
  std::error_code ec;
  fs::create_directories(impl_->config.snapshot_dir, ec);
  std::shared_lock lock(impl_->sessions_mutex);
  for (const auto& [id, s] : impl_->sessions) {
    std::lock_guard session_lock(s->write_mutex);
    write_binary_file(impl_->config.snapshot_dir / (id + ".ocatmem"), save_memory(s->memory));
  }
}

PerceptualMemory replay_session_log(std::string_view log_json, const FeatureLayout& layout,
                                    const MemoryOptions& options) {
  PerceptualMemory memory(options);
  json j = json::parse(log_json, nullptr, false);
  if (j.is_discarded() || !j.contains("events") || !j["events"].is_array()) {
    throw Error(ErrorCode::kLogError, "session log must be an object with an 'events' array");
  }
  for (const auto& e : j["events"]) {
    const std::string action = e.value("action", std::string());
    if (action != "teach" && action != "correct") continue;
    FeatureVector f;
    f.layout = layout;
    f.values = e.at("feature").get<std::vector<double>>();
    const std::string label = e.at("label").get<std::string>();
    if (action == "teach") memory.teach(label, f);
    else memory.correct(label, f);
  }
  return memory;
}

}  // namespace opencat
