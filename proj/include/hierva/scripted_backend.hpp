#pragma once

#include <fstream>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <json.hpp>

#include "hierva/backend.hpp"

namespace hierva {

/// One scripted rule: fires when the last user/tool message contains
/// `match` (or matches `pattern` as ECMAScript regex) and, when given,
/// the request holds exactly `message_count` messages.
struct ScriptRule {
    std::string match;                  // substring; empty = always
    std::optional<std::string> pattern; // regex alternative to `match`
    std::optional<int> message_count;
    ChatResponse response;
};

/// Deterministic test backend: first matching rule wins; without a match the
/// default response is served, and without a default the script is
/// exhausted. Token usage is computed with the deterministic estimator so
/// two runs of the same episode are byte-identical.
class ScriptedBackend : public Backend {
public:
    ScriptedBackend() = default;

    void add_rule(ScriptRule rule) { rules_.push_back(std::move(rule)); }
    void set_default(ChatResponse resp) { default_ = std::move(resp); }

    ChatResponse complete(const ChatRequest& req) override {
        check_request(req);
        std::string last = last_user_or_tool_text(req);
        const ChatResponse* chosen = nullptr;
        for (const auto& rule : rules_) {
            if (rule.message_count && *rule.message_count != static_cast<int>(req.messages.size()))
                continue;
            if (rule.pattern) {
                if (!std::regex_search(last, std::regex(*rule.pattern))) continue;
            } else if (!rule.match.empty() && last.find(rule.match) == std::string::npos) {
                continue;
            }
            chosen = &rule.response;
            break;
        }
        if (!chosen) {
            if (!default_)
                throw ScriptExhausted("no scripted rule matches last message: \"" +
                                      last.substr(0, 120) + "\" (" +
                                      std::to_string(req.messages.size()) + " messages)");
            chosen = &*default_;
        }
        ChatResponse out = *chosen;
        out.usage.prompt_tokens = count_tokens(req.messages, token_cost_);
        out.usage.completion_tokens = completion_estimate(out);
        return out;
    }

    std::string name() const override { return "scripted"; }

    /// Script document: {"rules": [{"match": ..., "pattern": ..., "count":
    /// ..., "response": {"kind": "text"|"tool_call", ...}}], "default": ...}
    static ScriptedBackend from_json(const nlohmann::json& doc) {
        ScriptedBackend b;
        for (const auto& r : doc.value("rules", nlohmann::json::array())) {
            ScriptRule rule;
            rule.match = r.value("match", "");
            if (r.contains("pattern")) rule.pattern = r.at("pattern").get<std::string>();
            if (r.contains("count")) rule.message_count = r.at("count").get<int>();
            rule.response = parse_response(r.at("response"));
            b.add_rule(std::move(rule));
        }
        if (doc.contains("default")) b.set_default(parse_response(doc.at("default")));
        return b;
    }

    static ScriptedBackend from_file(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw std::runtime_error("cannot open script file: " + path);
        nlohmann::json doc = nlohmann::json::parse(f);
        return from_json(doc);
    }

    static ChatResponse text_response(std::string text) {
        ChatResponse r;
        r.kind = TextReply{std::move(text)};
        return r;
    }

    static ChatResponse tool_call_response(std::string name, nlohmann::json arguments) {
        ChatResponse r;
        r.kind = ToolCall{std::move(name), std::move(arguments), ""};
        return r;
    }

private:
    static ChatResponse parse_response(const nlohmann::json& j) {
        std::string kind = j.value("kind", "text");
        if (kind == "tool_call")
            return tool_call_response(j.at("name").get<std::string>(),
                                      j.value("arguments", nlohmann::json::object()));
        return text_response(j.value("text", ""));
    }

    long completion_estimate(const ChatResponse& r) const {
        if (r.is_tool_call())
            return count_text_tokens(r.tool_call().name + r.tool_call().arguments.dump(),
                                     token_cost_);
        return count_text_tokens(r.text(), token_cost_);
    }

    static std::string last_user_or_tool_text(const ChatRequest& req) {
        for (auto it = req.messages.rbegin(); it != req.messages.rend(); ++it) {
            if (it->role == Role::User || it->role == Role::ToolResult) return it->joined_text();
        }
        return "";
    }

    std::vector<ScriptRule> rules_;
    std::optional<ChatResponse> default_;
};

}  // namespace hierva
