#include <gtest/gtest.h>

#include <json.hpp>

#include "opencat/cloud_io.hpp"
#include "opencat/error.hpp"
#include "opencat/png_io.hpp"
#include "opencat/service.hpp"
#include "opencat/synthetic.hpp"
#include "test_support.hpp"

using namespace opencat;
using namespace opencat::testing;
using nlohmann::json;

namespace {

ServiceConfig quiet_config() {
  ServiceConfig c;
  c.access_log = false;
  c.port = 0;
  return c;
}

struct Fixture {
  TempDir dir;
  SessionService service{quiet_config()};

  Fixture() { write_synthetic_dataset(dir.path(), 2, 1, 3, SyntheticOptions{400, 0.003}); }

  json call(std::string_view method, const std::string& path, const json& body, int want) {
    const HttpResponse r = service.handle(method, path, body.is_null() ? "" : body.dump());
    EXPECT_EQ(r.status, want) << method << " " << path << ": " << r.body;
    return json::parse(r.body);
  }

  std::string create() {
    return call("POST", "/sessions", {{"dataset", dir.path().string()}, {"shuffle", false}}, 201)["id"];
  }
};

std::string category_of(const std::string& source) {
  return std::filesystem::path(source).parent_path().parent_path().filename().string();
}

}  // namespace

TEST(Service, TeachThenRecognize) {
  Fixture f;
  const std::string id = f.create();
  const std::string base = "/sessions/" + id;

  json n = f.call("POST", base + "/next", {}, 200);
  EXPECT_FALSE(n["end_of_data"].get<bool>());
  EXPECT_EQ(n["prediction"]["label"], "UNKNOWN");
  EXPECT_TRUE(n["prediction"]["distance"].is_null());
  for (const char* v : {"front", "side", "top"}) {
    const Bytes png = base64_decode(n["views"]["depth"][v].get<std::string>());
    EXPECT_EQ(decode_depth_png(png).width, f.service.pipeline().config().render.resolution);
  }
  EXPECT_TRUE(n["entropy"].contains("selected"));
  const std::string first = category_of(n["source"]);

  json cats = f.call("POST", base + "/teach", {{"label", first}}, 200);
  ASSERT_EQ(cats["categories"].size(), 1u);
  EXPECT_EQ(cats["categories"][0]["instances"], 1);
  f.call("POST", base + "/teach", {{"label", first}}, 409);

  n = f.call("POST", base + "/next", {}, 200);
  EXPECT_EQ(category_of(n["source"]), first);
  EXPECT_EQ(n["prediction"]["label"], first);
  EXPECT_LT(n["prediction"]["distance"].get<double>(), 0.2);

  f.call("POST", base + "/correct", {{"label", "other"}}, 200);
  cats = f.call("GET", base + "/categories", nullptr, 200);
  EXPECT_EQ(cats["categories"].size(), 2u);

  const json state = f.call("GET", base, nullptr, 200);
  EXPECT_EQ(state["metrics"]["qci"], 2);
  EXPECT_EQ(state["metrics"]["nlc"], 2);
  EXPECT_EQ(state["metrics"]["gca"], 0.0);
  EXPECT_EQ(state["instances"], 2);
  EXPECT_EQ(state["remaining"], 4);
}

TEST(Service, LogReplaysToSessionMemory) {
  Fixture f;
  const std::string id = f.create();
  const std::string base = "/sessions/" + id;
  for (int i = 0; i < 6; ++i) {
    const json n = f.call("POST", base + "/next", {}, 200);
    const std::string truth = category_of(n["source"]);
    if (n["prediction"]["label"] != truth) {
      f.call("POST", base + (i % 2 ? "/correct" : "/teach"), {{"label", truth}}, 200);
    }
  }
  const HttpResponse log = f.service.handle("GET", base + "/log", "");
  ASSERT_EQ(log.status, 200);
  const PerceptualMemory replayed =
      replay_session_log(log.body, f.service.pipeline().layout(), f.service.memory_of(id).options());
  EXPECT_EQ(replayed, f.service.memory_of(id));
  EXPECT_FALSE(replayed.empty());

  const json end = f.call("POST", base + "/next", {}, 200);
  EXPECT_TRUE(end["end_of_data"].get<bool>());
  EXPECT_EQ(f.call("GET", base, nullptr, 200)["remaining"], 0);
}

TEST(Service, ErrorStatuses) {
  Fixture f;
  f.call("GET", "/sessions/nope", nullptr, 404);
  f.call("GET", "/elsewhere", nullptr, 404);
  f.call("GET", "/sessions", nullptr, 405);
  EXPECT_EQ(f.service.handle("POST", "/sessions", "{not json").status, 400);
  f.call("POST", "/sessions", json::object(), 400);
  const json missing = f.call("POST", "/sessions", {{"dataset", (f.dir / "absent").string()}}, 400);
  EXPECT_TRUE(missing.contains("code"));

  const std::string id = f.create();
  f.call("POST", "/sessions/" + id + "/teach", {{"label", "x"}}, 409);
  f.call("POST", "/sessions/" + id + "/next", {}, 200);
  f.call("POST", "/sessions/" + id + "/teach", json::object(), 400);
  EXPECT_THROW(f.service.memory_of("nope"), Error);
}

TEST(Service, UploadMode) {
  Fixture f;
  const std::string id = f.call("POST", "/sessions", {{"mode", "upload"}}, 201)["id"];
  const std::string base = "/sessions/" + id;
  const ObjectCloud cloud = make_synthetic_object(0, 1, 2, SyntheticOptions{400, 0.003});

  json n = f.call("POST", base + "/next", {{"cloud", write_pcd(cloud, PcdEncoding::kAscii)}, {"name", "mine"}}, 200);
  EXPECT_EQ(n["source"], "mine");
  EXPECT_EQ(n["prediction"]["label"], "UNKNOWN");
  f.call("POST", base + "/teach", {{"label", "thing"}}, 200);

  const std::string binary = write_pcd(cloud, PcdEncoding::kBinary);
  const std::string b64 = base64_encode(std::span(reinterpret_cast<const std::uint8_t*>(binary.data()), binary.size()));
  n = f.call("POST", base + "/next", {{"cloud", b64}, {"base64", true}}, 200);
  EXPECT_EQ(n["prediction"]["label"], "thing");
  EXPECT_LT(n["prediction"]["distance"].get<double>(), 1e-6);

  f.call("POST", base + "/next", {{"cloud", "x,y\n1,2"}, {"format", "csv"}}, 400);
  f.call("POST", base + "/next", {{"cloud", "abc"}, {"format", "ply"}}, 400);
  EXPECT_TRUE(f.call("GET", base, nullptr, 200)["remaining"].is_null());
}

TEST(Service, ConfigKeys) {
  const KeyValueFile kv = KeyValueFile::parse("host = \"0.0.0.0\"\nport = 9001\nw = 0.3\nwindow_minimum = 4\naccess_log = false\n");
  const ServiceConfig c = ServiceConfig::from_keyvalue(kv, "/tmp");
  EXPECT_EQ(c.host, "0.0.0.0");
  EXPECT_EQ(c.port, 9001);
  EXPECT_EQ(c.pipeline.w, 0.3);
  EXPECT_EQ(c.window.minimum, 4u);
  EXPECT_FALSE(c.access_log);
}
