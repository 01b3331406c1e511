#include "cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "opencat/cloud_io.hpp"
#include "opencat/colorspace.hpp"
#include "opencat/error.hpp"
#include "opencat/ibl.hpp"
#include "opencat/pipeline.hpp"
#include "opencat/png_io.hpp"
#include "opencat/protocol.hpp"
#include "opencat/service.hpp"

namespace opencat {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

struct CloudArgs {
  std::string path;
  std::vector<double> gravity;

  ObjectCloud load() const {
    std::optional<Eigen::Vector3d> g;
    if (!gravity.empty()) g = Eigen::Vector3d(gravity[0], gravity[1], gravity[2]);
    return read_cloud(path, g);
  }
};

void add_cloud_args(CLI::App* cmd, CloudArgs& a) {
  cmd->add_option("cloud", a.path, "Point cloud (.pcd or .csv)")->required();
  cmd->add_option("--gravity", a.gravity, "Gravity hint x,y,z")->expected(3)->delimiter(',');
}

struct RenderArgs {
  std::optional<int> resolution;
  std::optional<int> splat;
  std::optional<double> margin;
};

void add_render_args(CLI::App* cmd, RenderArgs& a) {
  cmd->add_option("--resolution", a.resolution, "Image side in pixels");
  cmd->add_option("--splat", a.splat, "Splat radius in pixels");
  cmd->add_option("--margin", a.margin, "Relative margin around the object");
}

PipelineConfig load_pipeline_config(const std::string& path) {
  return path.empty() ? PipelineConfig::fallback_profile() : PipelineConfig::load(path);
}

RenderOptions render_options(const PipelineConfig& cfg, const RenderArgs& a) {
  RenderOptions r = cfg.render;
  if (a.resolution) r.resolution = *a.resolution;
  if (a.splat) r.splat_radius = *a.splat;
  if (a.margin) r.margin = *a.margin;
  return r;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << std::fixed << v;
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

std::unique_ptr<Agent> make_agent(const std::string& kind, const Pipeline& pipeline, FeatureCache& cache) {
  if (kind == "oracle") return std::make_unique<OracleAgent>();
  if (kind == "adversarial") return std::make_unique<AdversarialAgent>();
  MemoryOptions opts{pipeline.config().unknown_threshold, pipeline.config().category_capacity};
  return std::make_unique<IblAgent>(pipeline, opts, &cache);
}

void print_warnings(const Pipeline& p, std::ostream& err) {
  for (const auto& w : p.warnings()) err << json{{"level", "warning"}, {"message", w}}.dump() << "\n";
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"opencat: open-ended object category learning from point clouds"};
  app.require_subcommand(1);

  std::string config_path;

  // project
  auto* project = app.add_subcommand("project", "Render the three orthographic views to PNG");
  CloudArgs project_cloud;
  RenderArgs project_render;
  std::string project_out = ".";
  add_cloud_args(project, project_cloud);
  add_render_args(project, project_render);
  project->add_option("--out", project_out, "Output directory");
  project->add_option("--config", config_path, "Pipeline config file");

  // entropy
  auto* entropy = app.add_subcommand("entropy", "Print per-view entropy and the selected view");
  CloudArgs entropy_cloud;
  RenderArgs entropy_render;
  add_cloud_args(entropy, entropy_cloud);
  add_render_args(entropy, entropy_render);
  entropy->add_option("--config", config_path, "Pipeline config file");

  // convert
  auto* conv = app.add_subcommand("convert", "Convert a PNG image to another colorspace");
  std::string conv_in, conv_space, conv_out;
  conv->add_option("image", conv_in, "Input PNG")->required();
  conv->add_option("--space", conv_space, "Target colorspace")->required();
  conv->add_option("--out", conv_out, "Output PNG (default <stem>_<space>.png)");

  // embed
  auto* embed = app.add_subcommand("embed", "Compute the fused object representation");
  CloudArgs embed_cloud;
  std::string embed_out;
  add_cloud_args(embed, embed_cloud);
  embed->add_option("--config", config_path, "Pipeline config file");
  embed->add_option("--out", embed_out, "Output prefix (default <stem>.embedding)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run the simulated-teacher protocol");
  std::string sim_dataset, sim_out, sim_agent = "ibl";
  std::optional<std::uint64_t> sim_seed;
  std::optional<std::size_t> sim_runs;
  bool sim_json = false;
  sim->add_option("--dataset", sim_dataset, "Dataset root")->required();
  sim->add_option("--config", config_path, "Pipeline and teacher config file");
  sim->add_option("--seed", sim_seed, "Base seed");
  sim->add_option("--runs", sim_runs, "Number of runs");
  sim->add_option("--out", sim_out, "Directory for run logs and summaries");
  sim->add_option("--agent", sim_agent, "ibl, oracle or adversarial")
      ->check(CLI::IsMember({"ibl", "oracle", "adversarial"}));
  sim->add_flag("--json", sim_json, "Print the machine-readable summary instead of the table");

  // memory
  auto* memory = app.add_subcommand("memory", "Export, import or query memory snapshots");
  memory->require_subcommand(1);
  auto* mem_export = memory->add_subcommand("export", "Teach every view of a dataset and save the memory");
  std::string mem_dataset, mem_file;
  mem_export->add_option("--dataset", mem_dataset, "Dataset root")->required();
  mem_export->add_option("--out", mem_file, "Snapshot file")->required();
  mem_export->add_option("--config", config_path, "Pipeline config file");
  auto* mem_import = memory->add_subcommand("import", "Validate a snapshot and print its contents");
  mem_import->add_option("file", mem_file, "Snapshot file")->required();
  auto* mem_classify = memory->add_subcommand("classify", "Classify a cloud against a snapshot");
  CloudArgs mem_cloud;
  mem_classify->add_option("--memory", mem_file, "Snapshot file")->required();
  mem_classify->add_option("--config", config_path, "Pipeline config file");
  add_cloud_args(mem_classify, mem_cloud);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP teaching service");
  std::optional<std::string> serve_host, serve_static;
  std::optional<int> serve_port;
  serve->add_option("--config", config_path, "Service config file");
  serve->add_option("--host", serve_host, "Bind address");
  serve->add_option("--port", serve_port, "Port (0 picks a free one)");
  serve->add_option("--static", serve_static, "Directory served at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (*project) {
      const auto cfg = load_pipeline_config(config_path);
      const ObjectCloud cloud = project_cloud.load();
      const ViewTriplet views = render_object(cloud, render_options(cfg, project_render));
      fs::create_directories(project_out);
      for (ViewId v : kAllViews) {
        const std::string base = cloud.source_id + "_" + std::string(view_name(v));
        const fs::path depth = fs::path(project_out) / (base + "_depth.png");
        const fs::path color = fs::path(project_out) / (base + "_color.png");
        write_binary_file(depth, encode_depth_png(views.depth_of(v)));
        write_binary_file(color, encode_color_png(views.color_of(v)));
        out << depth.string() << "\n" << color.string() << "\n";
      }
    } else if (*entropy) {
      const auto cfg = load_pipeline_config(config_path);
      const ViewTriplet views = render_object(entropy_cloud.load(), render_options(cfg, entropy_render));
      const EntropyReport rep = select_max_entropy(views.color);
      for (ViewId v : kAllViews) {
        const auto& h = rep.entropy[static_cast<std::size_t>(v)];
        out << view_name(v) << ": " << (h ? fmt(*h) : std::string("empty")) << "\n";
      }
      out << "selected: " << view_name(rep.selected) << "\n";
    } else if (*conv) {
      const ColorspaceId space = parse_colorspace(conv_space);
      const ColorImage img = decode_color_png(read_binary_file(conv_in));
      const ColorConvertedView cv = convert(img, space);
      const auto ranges = native_range(space);
      std::vector<std::uint8_t> rgb(static_cast<std::size_t>(img.width) * img.height * 3, 0);
      for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
          const std::size_t px = static_cast<std::size_t>(r) * img.width + c;
          if (!cv.mask[px]) continue;
          for (int ch = 0; ch < 3; ++ch) {
            const double t = (cv.pixels.at(ch, r, c) - ranges[ch].lo) / (ranges[ch].hi - ranges[ch].lo);
            rgb[px * 3 + ch] = static_cast<std::uint8_t>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0));
          }
        }
      }
      if (conv_out.empty()) {
        conv_out = (fs::path(conv_in).parent_path() /
                    (fs::path(conv_in).stem().string() + "_" + std::string(colorspace_name(space)) + ".png"))
                       .string();
      }
      write_binary_file(conv_out, encode_rgb8_png(img.width, img.height, rgb));
      std::ostringstream side;
      side << std::setprecision(17);
      side << "space = \"" << colorspace_name(space) << "\"\n";
      side << "# channel value v maps to round(255 * (v - lo) / (hi - lo)), clamped\n";
      for (int ch = 0; ch < 3; ++ch) {
        side << "channel" << ch << "_range = [" << ranges[ch].lo << ", " << ranges[ch].hi << "]\n";
      }
      write_text(conv_out + ".range.txt", side.str());
      out << conv_out << "\n" << conv_out << ".range.txt\n";
    } else if (*embed) {
      const Pipeline pipeline = Pipeline::create(load_pipeline_config(config_path));
      print_warnings(pipeline, err);
      const ObjectCloud cloud = embed_cloud.load();
      const FeatureVector f = represent_object(cloud, pipeline);
      if (embed_out.empty()) embed_out = fs::path(embed_cloud.path).stem().string() + ".embedding";
      std::vector<std::uint8_t> blob(f.values.size() * sizeof(double));
      std::memcpy(blob.data(), f.values.data(), blob.size());
      write_binary_file(embed_out + ".bin", blob);
      std::ostringstream header;
      header << std::setprecision(17);
      header << "dtype = \"float64-le\"\n";
      header << "length = " << f.values.size() << "\n";
      header << "shape_length = " << f.layout.shape_length << "\n";
      header << "color_length = " << f.layout.color_length << "\n";
      header << "shape_backbone = \"" << f.layout.shape_backbone << "\"\n";
      header << "color_backbone = \"" << f.layout.color_backbone << "\"\n";
      header << "w = " << f.layout.w << "\n";
      header << "spaces = [";
      for (std::size_t i = 0; i < f.layout.spaces.size(); ++i) {
        header << (i ? ", " : "") << '"' << colorspace_name(f.layout.spaces[i]) << '"';
      }
      header << "]\n";
      write_text(embed_out + ".txt", header.str());
      out << embed_out << ".bin\n" << embed_out << ".txt\n";
    } else if (*sim) {
      PipelineConfig pcfg = PipelineConfig::fallback_profile();
      TeacherConfig tcfg;
      if (!config_path.empty()) {
        const KeyValueFile kv = KeyValueFile::read(config_path);
        pcfg = PipelineConfig::from_keyvalue(kv, fs::path(config_path).parent_path());
        tcfg = TeacherConfig::from_keyvalue(kv);
      }
      if (sim_seed) tcfg.seed = *sim_seed;
      if (sim_runs) tcfg.runs = *sim_runs;
      tcfg.validate();
      const DatasetIndex index = load_dataset_index(sim_dataset);
      for (const auto& w : index.warnings) err << json{{"level", "warning"}, {"message", w}}.dump() << "\n";
      const Pipeline pipeline = Pipeline::create(pcfg);
      if (sim_agent == "ibl") print_warnings(pipeline, err);
      FeatureCache cache;
      std::vector<MetricsReport> reports;
      std::vector<std::uint64_t> seeds;
      if (!sim_out.empty()) fs::create_directories(sim_out);
      for (std::size_t k = 0; k < tcfg.runs; ++k) {
        TeacherConfig run_cfg = tcfg;
        run_cfg.seed = derive_run_seed(tcfg.seed, k);
        auto agent = make_agent(sim_agent, pipeline, cache);
        const ExperimentLog log = run_experiment(index.views, *agent, run_cfg);
        reports.push_back(compute_metrics(log));
        seeds.push_back(run_cfg.seed);
        if (!sim_out.empty()) {
          char name[32];
          std::snprintf(name, sizeof name, "run_%03zu.jsonl", k);
          write_text(fs::path(sim_out) / name, write_log_jsonl(log));
        }
      }
      const RunSummary summary = summarize_runs(reports);
      const std::string table = format_summary_table(summary, seeds);
      const std::string machine = format_summary_json(summary, seeds);
      if (!sim_out.empty()) {
        write_text(fs::path(sim_out) / "summary.txt", table);
        write_text(fs::path(sim_out) / "summary.json", machine);
      }
      out << (sim_json ? machine : table);
    } else if (*memory) {
      if (*mem_export) {
        const Pipeline pipeline = Pipeline::create(load_pipeline_config(config_path));
        print_warnings(pipeline, err);
        const DatasetIndex index = load_dataset_index(mem_dataset);
        PerceptualMemory mem({pipeline.config().unknown_threshold, pipeline.config().category_capacity});
        for (const auto& v : index.views) mem.teach(v.category_label, represent_object(read_cloud(v.cloud_ref), pipeline));
        write_binary_file(mem_file, save_memory(mem));
        out << json{{"file", mem_file}, {"categories", mem.categories().size()}, {"instances", mem.instance_count()}}
                   .dump()
            << "\n";
      } else if (*mem_import) {
        const PerceptualMemory mem = load_memory(read_binary_file(mem_file));
        json cats = json::array();
        for (const auto& c : mem.categories()) cats.push_back({{"label", c.label}, {"instances", c.instances.size()}});
        json j = {{"file", mem_file}, {"categories", cats}, {"instances", mem.instance_count()},
                  {"events", mem.event_counter()}};
        if (mem.layout()) {
          j["layout"] = {{"shape_length", mem.layout()->shape_length},
                         {"color_length", mem.layout()->color_length},
                         {"w", mem.layout()->w}};
        }
        out << j.dump() << "\n";
      } else {
        const PerceptualMemory mem = load_memory(read_binary_file(mem_file));
        const Pipeline pipeline = Pipeline::create(load_pipeline_config(config_path));
        print_warnings(pipeline, err);
        const Prediction p = mem.classify(represent_object(mem_cloud.load(), pipeline));
        json j = {{"label", p.label}, {"distance", std::isfinite(p.distance) ? json(p.distance) : json(nullptr)}};
        if (p.runner_up) j["runner_up"] = {{"label", p.runner_up->first}, {"distance", p.runner_up->second}};
        out << j.dump() << "\n";
      }
    } else if (*serve) {
      ServiceConfig cfg;
      if (!config_path.empty()) cfg = ServiceConfig::load(config_path);
      if (serve_host) cfg.host = *serve_host;
      if (serve_port) cfg.port = *serve_port;
      if (serve_static) cfg.static_dir = *serve_static;
      SessionService service(cfg);
      const int port = service.bind();
      err << json{{"level", "info"}, {"message", "listening"}, {"host", cfg.host}, {"port", port}}.dump() << "\n";
      g_interrupted = false;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::thread watcher([&] {
        while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        service.stop();
      });
      service.run();
      g_interrupted = true;
      watcher.join();
      service.persist_snapshots();
    }
  } catch (const Error& e) {
    err << json{{"error", error_code_name(e.code())}, {"message", e.what()}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << json{{"error", "InternalError"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace opencat
