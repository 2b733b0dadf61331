#pragma once

#include <optional>
#include <string>
#include <variant>

#include "hierva/episode.hpp"
#include "hierva/prompts.hpp"
#include "hierva/result.hpp"
#include "hierva/textutil.hpp"

namespace hierva {

struct TextFact {
    std::string sentence;    // single sentence, per the output contract
    std::string full_reply;  // the worker's complete final reply
};

struct CropHandle {
    ImageRef ref;
};

struct WorkerResult {
    std::variant<TextFact, CropHandle> kind;
    int steps_used = 0;
    long peak_tokens = 0;
    bool degraded = false;  // budget ran out; last assistant text was distilled

    bool is_text() const { return std::holds_alternative<TextFact>(kind); }
    const TextFact& text_fact() const { return std::get<TextFact>(kind); }
    const CropHandle& crop_handle() const { return std::get<CropHandle>(kind); }
};

/// Output contract for text tasks: the worker's answer must appear in the
/// last sentence, which is extracted and stored.
inline Result<std::string, EpisodeError> extract_text_result(const std::string& reply) {
    auto sentence = extract_last_sentence(reply);
    if (!sentence || sentence->empty())
        return EpisodeError{EpisodeError::Code::EmptyReply, "worker reply was empty"};
    return *sentence;
}

namespace worker_detail {

inline std::string tool_error_text(const ToolError& err) {
    const char* label = "tool error";
    switch (err.code) {
        case ToolError::Code::MalformedArguments: label = "malformed arguments"; break;
        case ToolError::Code::InvalidImageRef: label = "invalid image reference"; break;
        case ToolError::Code::DegenerateBBox: label = "degenerate bounding box"; break;
        case ToolError::Code::Timeout: label = "timeout"; break;
        case ToolError::Code::SandboxUnavailable: label = "sandbox unavailable"; break;
    }
    return std::string("Tool error (") + label + "): " + err.message + " Please adjust and retry.";
}

/// Executes one tool call for the loop and appends the results to `window`.
/// Every failure becomes an in-context tool-result message; tool errors
/// never abort the episode. Returns the produced image ref for zooms.
inline std::optional<ImageRef> run_tool_call(EpisodeRuntime& rt, ContextWindow& window,
                                             const ToolCall& call, int crop_worker_id,
                                             std::shared_ptr<const RasterImage> current_image) {
    // Echo the assistant's call so the transcript (and a live wire peer)
    // sees what was requested.
    Message echo;
    echo.role = Role::Assistant;
    echo.parts.push_back(TextPart{"[tool call] " + call.name + " " + call.arguments.dump()});
    echo.tool_call_id = call.id.empty() ? "call_" + std::to_string(rt.backend_calls()) : call.id;
    echo.tool_call_name = call.name;
    echo.tool_call_arguments = call.arguments.dump();
    std::string call_id = echo.tool_call_id;
    rt.append(window, std::move(echo));

    auto append_tool_text = [&](const std::string& text) {
        Message m = text_message(Role::ToolResult, text);
        m.tool_call_id = call_id;
        rt.append(window, std::move(m));
    };

    if (call.name == tool_wire_name(ToolName::Zoom)) {
        auto outcome = execute_zoom(call.arguments, rt.registry(), crop_worker_id,
                                    rt.config().crop_min_side, rt.config().resize_filter);
        if (!outcome.ok()) {
            rt.trace().tool_executed(window.label(), call.name, call.arguments, false, "",
                                     outcome.error().message);
            append_tool_text(tool_error_text(outcome.error()));
            return std::nullopt;
        }
        ImageRef ref = outcome.value().image().ref;
        auto img = rt.registry().resolve(ref);
        const auto& rec = rt.registry().records().back();
        rt.trace().crop_recorded(crop_worker_id, rec.src.index, rec.clamped_bbox, img->width,
                                 img->height);
        rt.trace().tool_executed(window.label(), call.name, call.arguments, true,
                                 "image " + std::to_string(ref.index), "");
        append_tool_text("Zoomed crop stored as image " + std::to_string(ref.index) + " (" +
                         std::to_string(img->width) + "x" + std::to_string(img->height) + ").");
        // The crop itself arrives as a separate user message: tool-role
        // messages cannot carry images on OpenAI-compatible wires.
        Message img_msg;
        img_msg.role = Role::User;
        img_msg.parts.push_back(
            TextPart{"(attached: image " + std::to_string(ref.index) + ")"});
        img_msg.parts.push_back(rt.image_part(ref));
        rt.append(window, std::move(img_msg));
        return ref;
    }

    if (call.name == tool_wire_name(ToolName::Code)) {
        auto outcome = execute_code(call.arguments, rt.config().sandbox, current_image);
        if (!outcome.ok()) {
            rt.trace().tool_executed(window.label(), call.name, call.arguments, false, "",
                                     outcome.error().message);
            append_tool_text(tool_error_text(outcome.error()));
            return std::nullopt;
        }
        const auto& res = outcome.value();
        std::string text = res.text().text.empty() ? "(no output)" : res.text().text;
        if (res.diagnostics.rfind("exit status 0", 0) != 0)
            text += "\n[diagnostics] " + res.diagnostics;
        rt.trace().tool_executed(window.label(), call.name, call.arguments, true,
                                 text.substr(0, 200), res.diagnostics);
        append_tool_text(text);
        return std::nullopt;
    }

    rt.trace().tool_executed(window.label(), call.name, call.arguments, false, "",
                             "unknown tool");
    append_tool_text("Tool error (unknown tool): '" + call.name + "' is not available.");
    return std::nullopt;
}

}  // namespace worker_detail

/// Executes one validated TaskSpec in an isolated local context: a scoped
/// system prompt (base role text + injected skills + tool schemas), a user
/// message with the instruction, the known information, and exactly one
/// image, then a bounded tool loop. The context is discarded after return;
/// only the result crosses back to the manager.
inline Result<WorkerResult, EpisodeError> run_worker(const TaskSpec& task, EpisodeRuntime& rt,
                                                     const std::string& window_label) {
    const int budget = rt.config().worker_budget;
    ContextWindow window(window_label);

    std::string system_text = prompts::kWorkerBasePrompt;
    std::string skills_text = inject_skills(task.skills, rt.library());
    if (!skills_text.empty()) system_text += "\n\n" + skills_text;
    std::string tools_text = render_tool_schemas(task.tools);
    if (!tools_text.empty()) system_text += "\n\n" + tools_text;
    rt.append(window, text_message(Role::System, system_text));

    std::string user_text = task.instruction;
    if (!task.known_information.empty())
        user_text += "\n\n" + prompts::known_information_sentence(task.known_information);
    Message user;
    user.role = Role::User;
    user.parts.push_back(TextPart{user_text});
    user.parts.push_back(rt.image_part(task.image_ref));  // exactly one image at invocation
    rt.append(window, std::move(user));

    auto schemas = rt.schemas_for(task.tools);
    std::optional<ImageRef> produced_crop;
    std::optional<std::string> last_text;
    int steps = 0;

    auto finish = [&](WorkerResult r) {
        r.steps_used = steps;
        r.peak_tokens = window.token_high_water();
        return Result<WorkerResult, EpisodeError>(std::move(r));
    };
    auto fail = [&](EpisodeError e) { return Result<WorkerResult, EpisodeError>(std::move(e)); };

    while (steps < budget) {
        ChatResponse resp;
        try {
            resp = rt.call(window, schemas);
        } catch (const std::exception& e) {
            return fail({EpisodeError::Code::BackendError, e.what()});
        }
        ++steps;

        if (resp.is_tool_call()) {
            std::shared_ptr<const RasterImage> current =
                produced_crop ? rt.registry().resolve(*produced_crop)
                              : rt.registry().resolve(task.image_ref);
            auto ref = worker_detail::run_tool_call(rt, window, resp.tool_call(), task.worker_id,
                                                    current);
            if (ref) produced_crop = ref;
            continue;
        }

        // Final text reply.
        const std::string& reply = resp.text();
        last_text = reply;
        rt.append(window, text_message(Role::Assistant, reply));
        if (task.expected_output == ExpectedOutput::Image) {
            if (!produced_crop)
                return fail({EpisodeError::Code::MissingCrop,
                             "image task finished without a successful zoom"});
            return finish({CropHandle{*produced_crop}, 0, 0, false});
        }
        auto sentence = extract_text_result(reply);
        if (!sentence.ok()) return fail(sentence.error());
        return finish({TextFact{sentence.value(), reply}, 0, 0, false});
    }

    // Budget exhausted. Text tasks degrade to the last assistant text when
    // one exists; image tasks cannot.
    if (task.expected_output == ExpectedOutput::Text && last_text) {
        auto sentence = extract_text_result(*last_text);
        if (sentence.ok()) {
            WorkerResult r{TextFact{sentence.value(), *last_text}, 0, 0, true};
            return finish(std::move(r));
        }
    }
    if (task.expected_output == ExpectedOutput::Image && produced_crop) {
        WorkerResult r{CropHandle{*produced_crop}, 0, 0, true};
        return finish(std::move(r));
    }
    return fail({EpisodeError::Code::BudgetExhausted,
                 "worker exceeded its step budget of " + std::to_string(budget)});
}

/// Runs the hooks of the task's selected skills (name-sorted) over a text
/// fact; crop handles pass through unchanged.
inline WorkerResult apply_hooks(WorkerResult result, const TaskSpec& task,
                                const SkillLibrary& library) {
    if (!result.is_text()) return result;
    auto& fact = std::get<TextFact>(result.kind);
    for (const auto& name : task.skills) {  // std::set: name-sorted
        if (!library.contains(name)) continue;
        auto hook = resolve_hook(library.at(name));
        if (hook) fact.sentence = (*hook)(fact.sentence, task);
    }
    return result;
}

}  // namespace hierva
