#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hierva/message.hpp"

namespace hierva {

/// Wire-level tool description rendered into system prompts and sent to
/// tool-calling backends.
struct ToolSchema {
    struct Param {
        std::string name;
        std::string type;  // JSON-schema-ish tag: "string", "number", "array"
        std::string description;
    };
    std::string name;
    std::string description;
    std::vector<Param> parameters;
};

struct TokenUsage {
    long prompt_tokens = 0;
    long completion_tokens = 0;
};

/// Deterministic token estimator constants. Defaults are chosen for
/// reproducibility, not fidelity to any particular tokenizer; a live
/// backend's reported prompt_tokens supersedes the estimate for metrics.
struct TokenCostConfig {
    int bytes_per_token = 4;
    int image_base_tokens = 64;
    int image_patch_px = 28;
};

inline long count_text_tokens(const std::string& text, const TokenCostConfig& cfg = {}) {
    if (text.empty()) return 0;
    return static_cast<long>((text.size() + cfg.bytes_per_token - 1) / cfg.bytes_per_token);
}

inline long count_image_tokens(int width, int height, const TokenCostConfig& cfg = {}) {
    auto patches = [&](int px) { return (px + cfg.image_patch_px - 1) / cfg.image_patch_px; };
    return cfg.image_base_tokens + static_cast<long>(patches(width)) * patches(height);
}

/// Deterministic size estimate for a prompt: ceil(utf8 bytes / 4) per text
/// part, base + patch grid per image part, summed over all messages.
/// Monotone under message append.
inline long count_tokens(const std::vector<Message>& messages, const TokenCostConfig& cfg = {}) {
    long total = 0;
    for (const auto& m : messages) {
        for (const auto& p : m.parts) {
            if (const auto* t = std::get_if<TextPart>(&p))
                total += count_text_tokens(t->text, cfg);
            else if (const auto* i = std::get_if<ImagePart>(&p))
                total += count_image_tokens(i->width, i->height, cfg);
        }
    }
    return total;
}

struct ChatRequest {
    std::vector<Message> messages;
    std::vector<ToolSchema> tool_schemas;
    int max_output_tokens = 1024;
    double temperature = 0.0;
};

struct TextReply {
    std::string text;
};

struct ToolCall {
    std::string name;
    nlohmann::json arguments;  // structured map
    std::string id;            // backend-assigned; synthesized when absent
};

struct ChatResponse {
    std::variant<TextReply, ToolCall> kind;
    TokenUsage usage;

    bool is_tool_call() const { return std::holds_alternative<ToolCall>(kind); }
    const ToolCall& tool_call() const { return std::get<ToolCall>(kind); }
    const std::string& text() const { return std::get<TextReply>(kind).text; }
};

struct TransportError : std::runtime_error {
    explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};
struct ProtocolError : std::runtime_error {
    explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};
struct ScriptExhausted : std::runtime_error {
    explicit ScriptExhausted(const std::string& what) : std::runtime_error(what) {}
};

/// Multimodal chat completion interface. Implementations: HttpBackend
/// (OpenAI-compatible endpoints) and ScriptedBackend (deterministic tests).
class Backend {
public:
    virtual ~Backend() = default;
    virtual ChatResponse complete(const ChatRequest& req) = 0;
    virtual std::string name() const = 0;

    const TokenCostConfig& token_cost() const { return token_cost_; }
    void set_token_cost(const TokenCostConfig& cfg) { token_cost_ = cfg; }

protected:
    // Request sanity shared by implementations.
    void check_request(const ChatRequest& req) const {
        if (req.messages.empty()) throw std::invalid_argument("ChatRequest: messages empty");
        if (!req.tool_schemas.empty() && req.messages.front().role != Role::System)
            throw std::invalid_argument(
                "ChatRequest: tool schemas require a leading system message");
    }

    TokenCostConfig token_cost_;
};

/// Raises the window's token high-water mark after a completion; the episode
/// peak metric is the max over every window's mark.
inline void record_peak(ContextWindow& window, const TokenUsage& usage) {
    window.raise_high_water(usage.prompt_tokens);
}

}  // namespace hierva
