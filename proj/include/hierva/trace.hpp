#pragma once

#include <algorithm>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "hierva/backend.hpp"
#include "hierva/message.hpp"
#include "hierva/task.hpp"

namespace hierva {

/// Replayable record of one episode: one JSON event per message append,
/// backend call, tool call, validation event, plan draft, and distilled
/// entry. Events carry no wall-clock data, so two runs of the same scripted
/// episode serialize byte-identically.
class EpisodeTrace {
public:
    using json = nlohmann::json;

    int next_message_id() { return ++last_message_id_; }

    void message_appended(const std::string& window, const Message& m) {
        json parts = json::array();
        for (const auto& p : m.parts) {
            if (const auto* t = std::get_if<TextPart>(&p)) {
                parts.push_back({{"type", "text"}, {"text", t->text}});
            } else if (const auto* i = std::get_if<ImagePart>(&p)) {
                parts.push_back({{"type", "image"},
                                 {"image_ref", i->ref.index},
                                 {"width", i->width},
                                 {"height", i->height}});
            }
        }
        json ev = {{"event", "message"},
                   {"window", window},
                   {"id", m.id},
                   {"role", role_name(m.role)},
                   {"parts", parts}};
        if (!m.tool_call_name.empty()) {
            ev["tool_call_name"] = m.tool_call_name;
            ev["tool_call_arguments"] = m.tool_call_arguments;
        }
        if (!m.tool_call_id.empty()) ev["tool_call_id"] = m.tool_call_id;
        events_.push_back(std::move(ev));
    }

    void backend_call(const std::string& window, size_t message_count, const ChatResponse& resp) {
        json ev = {{"event", "backend_call"},
                   {"window", window},
                   {"messages", message_count},
                   {"prompt_tokens", resp.usage.prompt_tokens},
                   {"completion_tokens", resp.usage.completion_tokens}};
        if (resp.is_tool_call()) {
            ev["response_kind"] = "tool_call";
            ev["tool"] = resp.tool_call().name;
            ev["arguments"] = resp.tool_call().arguments;
        } else {
            ev["response_kind"] = "text";
            ev["text"] = resp.text();
        }
        events_.push_back(std::move(ev));
    }

    void tool_executed(const std::string& window, const std::string& tool, const json& arguments,
                       bool ok, const std::string& result, const std::string& diagnostics) {
        events_.push_back({{"event", "tool_call"},
                           {"window", window},
                           {"tool", tool},
                           {"arguments", arguments},
                           {"ok", ok},
                           {"result", result},
                           {"diagnostics", diagnostics}});
    }

    void validation_event(const ValidationError& err, const std::string& feedback) {
        events_.push_back({{"event", "validation"},
                           {"kind", validation_kind_name(err.kind)},
                           {"detail", err.detail},
                           {"feedback", feedback}});
    }

    void plan_draft(int stage, const std::string& text) {
        events_.push_back({{"event", "plan_draft"}, {"stage", stage}, {"text", text}});
    }

    void task_accepted(int ordinal, const TaskSpec& task) {
        json tools = json::array();
        for (ToolName t : task.tools) tools.push_back(tool_wire_name(t));
        json skills = json::array();
        for (const auto& s : task.skills) skills.push_back(s);
        events_.push_back(
            {{"event", "task"},
             {"ordinal", ordinal},
             {"worker_id", task.worker_id},
             {"image_ref", task.image_ref.index},
             {"instruction", task.instruction},
             {"known_information", task.known_information},
             {"tools", tools},
             {"skills", skills},
             {"expected_output", task.expected_output == ExpectedOutput::Text ? "text" : "image"}});
    }

    void distilled_entry(const std::string& task_summary, const std::string& outcome,
                         bool degraded) {
        events_.push_back({{"event", "distilled"},
                           {"task_summary", task_summary},
                           {"outcome", outcome},
                           {"degraded", degraded}});
    }

    void crop_recorded(int worker_id, int src, const IntBox& box, int w, int h) {
        events_.push_back({{"event", "crop"},
                           {"worker", worker_id},
                           {"src", src},
                           {"bbox", {box.x1, box.y1, box.x2, box.y2}},
                           {"width", w},
                           {"height", h}});
    }

    void episode_start(const std::string& method, const std::string& question) {
        events_.push_back({{"event", "episode_start"}, {"method", method}, {"question", question}});
    }

    void episode_end(const std::string& answer, const std::string& error, long peak_tokens,
                     int task_count) {
        events_.push_back({{"event", "episode_end"},
                           {"answer", answer},
                           {"error", error},
                           {"peak_tokens", peak_tokens},
                           {"task_count", task_count}});
    }

    const std::vector<json>& events() const { return events_; }

    std::string to_jsonl() const {
        std::string out;
        for (const auto& e : events_) out += e.dump() + "\n";
        return out;
    }

    void save(const std::string& path) const {
        std::ofstream f(path);
        f << to_jsonl();
    }

    static std::vector<json> load_jsonl(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw std::runtime_error("cannot open trace: " + path);
        std::vector<json> events;
        std::string line;
        while (std::getline(f, line)) {
            if (!trim_copy(line).empty()) events.push_back(json::parse(line));
        }
        return events;
    }

    // ---- queries used by invariant checks ----

    std::vector<json> window_messages(const std::string& window_prefix) const {
        return filter([&](const json& e) {
            return e["event"] == "message" &&
                   e["window"].get<std::string>().rfind(window_prefix, 0) == 0;
        });
    }

    std::set<int> message_ids(const std::string& window_prefix) const {
        std::set<int> ids;
        for (const auto& e : window_messages(window_prefix)) ids.insert(e["id"].get<int>());
        return ids;
    }

    int image_part_count(const std::string& window_prefix) const {
        int n = 0;
        for (const auto& e : window_messages(window_prefix))
            for (const auto& p : e["parts"])
                if (p["type"] == "image") ++n;
        return n;
    }

    std::string window_text(const std::string& window_prefix) const {
        std::string out;
        for (const auto& e : window_messages(window_prefix))
            for (const auto& p : e["parts"])
                if (p["type"] == "text") out += p["text"].get<std::string>() + "\n";
        return out;
    }

    std::vector<json> filter(const std::function<bool(const json&)>& pred) const {
        std::vector<json> out;
        for (const auto& e : events_)
            if (pred(e)) out.push_back(e);
        return out;
    }

    /// All window labels seen in message events, in first-seen order.
    std::vector<std::string> window_labels() const {
        std::vector<std::string> labels;
        for (const auto& e : events_) {
            if (e["event"] != "message") continue;
            std::string w = e["window"].get<std::string>();
            if (std::find(labels.begin(), labels.end(), w) == labels.end()) labels.push_back(w);
        }
        return labels;
    }

private:
    static std::string trim_copy(const std::string& s) {
        size_t b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        size_t e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    std::vector<json> events_;
    int last_message_id_ = 0;
};

/// Per-episode outcome row feeding the run report.
struct EpisodeMetrics {
    std::string example_id;
    std::string method;
    std::string answer;
    std::string gold_answer;
    bool correct = false;
    long peak_tokens = 0;
    int task_count = 0;
    int backend_calls = 0;
    double wall_ms = 0.0;
    std::string error;  // empty on clean completion
    std::string qtype;

    nlohmann::json to_json() const {
        return {{"id", example_id},     {"method", method},
                {"answer", answer},     {"gold_answer", gold_answer},
                {"correct", correct},   {"peak_tokens", peak_tokens},
                {"task_count", task_count}, {"backend_calls", backend_calls},
                {"wall_ms", wall_ms},   {"error", error},
                {"qtype", qtype}};
    }

    static EpisodeMetrics from_json(const nlohmann::json& j) {
        EpisodeMetrics m;
        m.example_id = j.value("id", "");
        m.method = j.value("method", "");
        m.answer = j.value("answer", "");
        m.gold_answer = j.value("gold_answer", "");
        m.correct = j.value("correct", false);
        m.peak_tokens = j.value("peak_tokens", 0L);
        m.task_count = j.value("task_count", 0);
        m.backend_calls = j.value("backend_calls", 0);
        m.wall_ms = j.value("wall_ms", 0.0);
        m.error = j.value("error", "");
        m.qtype = j.value("qtype", "");
        return m;
    }
};

}  // namespace hierva
