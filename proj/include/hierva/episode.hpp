#pragma once

#include <memory>
#include <string>

#include "hierva/backend.hpp"
#include "hierva/image_registry.hpp"
#include "hierva/skills.hpp"
#include "hierva/task.hpp"
#include "hierva/tools.hpp"
#include "hierva/trace.hpp"

namespace hierva {

struct EpisodeConfig {
    int max_tasks = 8;
    int task_retry_bound = 3;
    int worker_budget = 6;
    int monolith_budget = 12;  // Thinking-with-Images step budget
    int crop_min_side = 512;
    ResizeFilter resize_filter = ResizeFilter::Nearest;
    int max_output_tokens = 1024;
    double temperature = 0.0;
    Allowlists allowlists;
    SandboxConfig sandbox;
    std::string plan_refine_prompt;  // empty: prompts::kPlanRefinePrompt
};

struct EpisodeError {
    enum class Code {
        TaskCreationFailed,
        BackendError,
        BudgetExhausted,
        MissingCrop,
        EmptyReply,
        NoBoxedAnswer,
    };
    Code code;
    std::string message;
};

inline const char* episode_error_name(EpisodeError::Code c) {
    switch (c) {
        case EpisodeError::Code::TaskCreationFailed: return "TaskCreationFailed";
        case EpisodeError::Code::BackendError: return "BackendError";
        case EpisodeError::Code::BudgetExhausted: return "BudgetExhausted";
        case EpisodeError::Code::MissingCrop: return "MissingCrop";
        case EpisodeError::Code::EmptyReply: return "EmptyReply";
        case EpisodeError::Code::NoBoxedAnswer: return "NoBoxedAnswer";
    }
    return "?";
}

/// Mutable per-episode state threaded through the control loops: the image
/// registry, the trace, message-id assignment, and peak-token accounting.
/// One runtime per episode; episodes share nothing but the backend and the
/// (immutable) skill library.
class EpisodeRuntime {
public:
    EpisodeRuntime(Backend& backend, const SkillLibrary& library, EpisodeConfig config)
        : backend_(backend), library_(library), config_(std::move(config)) {
        if (config_.allowlists.skills.empty()) config_.allowlists.skills = library_.names();
    }

    Backend& backend() { return backend_; }
    const SkillLibrary& library() const { return library_; }
    const EpisodeConfig& config() const { return config_; }
    ImageRegistry& registry() { return registry_; }
    const ImageRegistry& registry() const { return registry_; }
    EpisodeTrace& trace() { return trace_; }
    long peak_tokens() const { return peak_tokens_; }
    int backend_calls() const { return backend_calls_; }

    /// Appends with a fresh episode-unique message id and mirrors the
    /// message into the trace under the window's label.
    void append(ContextWindow& window, Message msg) {
        msg.id = trace_.next_message_id();
        trace_.message_appended(window.label(), msg);
        window.append(std::move(msg));
    }

    /// Submits the window to the backend; updates the window high-water
    /// mark and the episode peak, and traces the call.
    ChatResponse call(ContextWindow& window, std::vector<ToolSchema> tool_schemas = {}) {
        ChatRequest req;
        req.messages = window.messages();
        req.tool_schemas = std::move(tool_schemas);
        req.max_output_tokens = config_.max_output_tokens;
        req.temperature = config_.temperature;
        ChatResponse resp = backend_.complete(req);
        if (resp.usage.prompt_tokens <= 0)
            resp.usage.prompt_tokens = count_tokens(req.messages, backend_.token_cost());
        record_peak(window, resp.usage);
        if (resp.usage.prompt_tokens > peak_tokens_) peak_tokens_ = resp.usage.prompt_tokens;
        ++backend_calls_;
        trace_.backend_call(window.label(), req.messages.size(), resp);
        return resp;
    }

    ImagePart image_part(ImageRef ref) const { return make_image_part(registry_, ref); }

    std::vector<ToolSchema> schemas_for(const std::set<ToolName>& tools) const {
        std::vector<ToolSchema> out;
        for (ToolName t : {ToolName::Zoom, ToolName::Code})
            if (tools.count(t)) out.push_back(builtin_tool_schema(t));
        return out;
    }

private:
    Backend& backend_;
    const SkillLibrary& library_;
    EpisodeConfig config_;
    ImageRegistry registry_;
    EpisodeTrace trace_;
    long peak_tokens_ = 0;
    int backend_calls_ = 0;
};

}  // namespace hierva
