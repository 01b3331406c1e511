#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "opencat/error.hpp"
#include "opencat/protocol.hpp"

namespace opencat {
namespace {

using json = nlohmann::ordered_json;

TeacherAction parse_action(const std::string& s, std::size_t line) {
  if (s == "introduce") return TeacherAction::kIntroduce;
  if (s == "teach") return TeacherAction::kTeach;
  if (s == "ask") return TeacherAction::kAsk;
  if (s == "correct") return TeacherAction::kCorrect;
  throw ParseError(line, "unknown action '" + s + "'");
}


}  // namespace

std::string write_log_jsonl(const ExperimentLog& log) {
  std::string out;
  json header = {{"type", "header"},
                 {"seed", log.seed},
                 {"tau", log.tau},
                 {"max_idle_iterations", log.max_idle_iterations},
                 {"window_factor", log.window.factor},
                 {"window_minimum", log.window.minimum}};
  out += header.dump() + "\n";
  for (const auto& e : log.events) {
    json j = {{"type", "event"},
              {"iteration", e.iteration},
              {"action", std::string(action_name(e.action))},
              {"category", e.category},
              {"instance", e.instance},
              {"view", e.view}};
    if (e.action == TeacherAction::kAsk) {
      j["predicted"] = e.predicted;
      j["correct"] = e.correct;
    }
    out += j.dump() + "\n";
  }
  json stop = {{"type", "stop"}, {"reason", std::string(stop_reason_name(log.stop_reason))}};
  out += stop.dump() + "\n";
  return out;
}

ExperimentLog read_log_jsonl(std::string_view text) {
  ExperimentLog log;
  bool have_header = false, have_stop = false;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (have_stop) throw ParseError(line_no, "content after the stop record");
    json j;
    try {
      j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        if (have_header) throw ParseError(line_no, "duplicate header");
        have_header = true;
        log.seed = j.at("seed").get<std::uint64_t>();
        log.tau = j.at("tau").get<double>();
        log.max_idle_iterations = j.at("max_idle_iterations").get<std::size_t>();
        log.window.factor = j.at("window_factor").get<std::size_t>();
        log.window.minimum = j.at("window_minimum").get<std::size_t>();
      } else if (type == "event") {
        if (!have_header) throw ParseError(line_no, "event before header");
        ProtocolEvent e;
        e.iteration = j.at("iteration").get<std::uint64_t>();
        e.action = parse_action(j.at("action").get<std::string>(), line_no);
        e.category = j.at("category").get<std::string>();
        e.instance = j.value("instance", std::string());
        e.view = j.value("view", std::string());
        if (e.action == TeacherAction::kAsk) {
          e.predicted = j.at("predicted").get<std::string>();
          e.correct = j.at("correct").get<bool>();
        }
        log.events.push_back(std::move(e));
      } else if (type == "stop") {
        const std::string reason = j.at("reason").get<std::string>();
        if (reason == "LackOfData") log.stop_reason = StopReason::kLackOfData;
        else if (reason == "Failure") log.stop_reason = StopReason::kFailure;
        else throw ParseError(line_no, "unknown stop reason '" + reason + "'");
        have_stop = true;
      } else {
        throw ParseError(line_no, "unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (!have_header) throw ParseError(0, "missing header record");
  if (!have_stop) throw ParseError(0, "missing stop record");
  return log;
}

std::string format_summary_table(const RunSummary& summary, std::span<const std::uint64_t> seeds) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-8s %-20s %8s %6s %8s %8s %8s  %s\n", "run", "seed", "QCI", "NLC", "AIC", "GCA",
                "APA", "stop");
  out += buf;
  for (std::size_t i = 0; i < summary.runs.size(); ++i) {
    const auto& m = summary.runs[i];
    const std::string seed = i < seeds.size() ? std::to_string(seeds[i]) : "-";
    std::snprintf(buf, sizeof buf, "%-8zu %-20s %8.0f %6.0f %8.4f %8.4f %8.4f  %s\n", i, seed.c_str(), m.qci, m.nlc,
                  m.aic, m.gca, m.apa, std::string(stop_reason_name(m.stop_reason)).c_str());
    out += buf;
  }
  for (const auto* row : {&summary.mean, &summary.variance}) {
    std::snprintf(buf, sizeof buf, "%-8s %-20s %8.2f %6.2f %8.4f %8.4f %8.4f\n",
                  row == &summary.mean ? "mean" : "variance", "", row->qci, row->nlc, row->aic, row->gca, row->apa);
    out += buf;
  }
  out += "stops: LackOfData=" + std::to_string(summary.lack_of_data) +
         " Failure=" + std::to_string(summary.failures) + "\n";
  return out;
}

std::string format_summary_json(const RunSummary& summary, std::span<const std::uint64_t> seeds) {
  auto metrics = [](const MetricsReport& m) {
    return json{{"qci", m.qci}, {"nlc", m.nlc}, {"aic", m.aic}, {"gca", m.gca}, {"apa", m.apa}};
  };
  json runs = json::array();
  for (std::size_t i = 0; i < summary.runs.size(); ++i) {
    json r = metrics(summary.runs[i]);
    r["stop"] = std::string(stop_reason_name(summary.runs[i].stop_reason));
    if (i < seeds.size()) r["seed"] = seeds[i];
    runs.push_back(std::move(r));
  }
  json out = {{"runs", runs},
              {"mean", metrics(summary.mean)},
              {"variance", metrics(summary.variance)},
              {"lack_of_data", summary.lack_of_data},
              {"failures", summary.failures}};
  return out.dump(2) + "\n";
}

}  // namespace opencat
