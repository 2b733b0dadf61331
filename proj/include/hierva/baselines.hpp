#pragma once

#include <optional>
#include <string>

#include "hierva/episode.hpp"
#include "hierva/manager.hpp"
#include "hierva/prompts.hpp"
#include "hierva/worker.hpp"

namespace hierva {

/// Non-hierarchical comparison methods. TwI variants differ in tool set and
/// whether the full skill list is statically prepended to the system prompt.
struct BaselineKind {
    enum class Family { Direct, CoT, CoTPlan, ThinkingWithImages };
    Family family = Family::Direct;
    std::set<ToolName> tools;   // TwI only: {zoom} or {zoom, code}
    bool fixed_skills = false;  // TwI only; implies {zoom, code}

    static BaselineKind direct() { return {Family::Direct, {}, false}; }
    static BaselineKind cot() { return {Family::CoT, {}, false}; }
    static BaselineKind cot_plan() { return {Family::CoTPlan, {}, false}; }
    static BaselineKind twi_zoom() {
        return {Family::ThinkingWithImages, {ToolName::Zoom}, false};
    }
    static BaselineKind twi_code() {
        return {Family::ThinkingWithImages, {ToolName::Zoom, ToolName::Code}, false};
    }
    static BaselineKind twi_fixed_skills() {
        return {Family::ThinkingWithImages, {ToolName::Zoom, ToolName::Code}, true};
    }
};

namespace baseline_detail {

/// Shared single-completion flow for Direct/CoT/CoT-Plan: question + suffix
/// + chart in one user message, boxed extraction with one formatting
/// re-prompt.
inline EpisodeResult run_single_prompt(const std::string& question, RasterImage chart,
                                       const std::string& suffix, const std::string& method,
                                       EpisodeRuntime& rt) {
    EpisodeResult result;
    rt.trace().episode_start(method, question);
    rt.registry().register_original(std::move(chart));

    ContextWindow window("mono");
    Message user;
    user.role = Role::User;
    user.parts.push_back(TextPart{question + "\n" + suffix});
    user.parts.push_back(rt.image_part(ImageRef{0}));
    rt.append(window, std::move(user));

    auto finish = [&](EpisodeResult r) {
        rt.trace().episode_end(r.answer, r.error ? episode_error_name(r.error->code) : "",
                               rt.peak_tokens(), 0);
        return r;
    };

    for (int attempt = 0; attempt < 2; ++attempt) {
        ChatResponse resp;
        try {
            resp = rt.call(window);
        } catch (const std::exception& e) {
            result.error = EpisodeError{EpisodeError::Code::BackendError, e.what()};
            return finish(result);
        }
        if (resp.is_tool_call()) {
            result.error =
                EpisodeError{EpisodeError::Code::BackendError, "unexpected tool call"};
            return finish(result);
        }
        rt.append(window, text_message(Role::Assistant, resp.text()));
        auto boxed = extract_boxed_answer(resp.text());
        if (boxed) {
            result.answer = *boxed;
            return finish(result);
        }
        if (attempt == 0)
            rt.append(window, text_message(Role::User, prompts::kBoxedNudge));
    }
    result.error = EpisodeError{EpisodeError::Code::NoBoxedAnswer,
                                "no \\boxed{} answer after re-prompt"};
    return finish(result);
}

}  // namespace baseline_detail

inline EpisodeResult run_direct(const std::string& question, RasterImage chart,
                                EpisodeRuntime& rt) {
    return baseline_detail::run_single_prompt(question, std::move(chart),
                                              prompts::kDirectSuffix, "direct", rt);
}

inline EpisodeResult run_cot(const std::string& question, RasterImage chart, bool plan_variant,
                             EpisodeRuntime& rt) {
    return baseline_detail::run_single_prompt(
        question, std::move(chart),
        plan_variant ? prompts::kCotPlanSuffix : prompts::kCotSuffix,
        plan_variant ? "cot-plan" : "cot", rt);
}

/// Thinking-with-Images: one monolithic growing context. Every tool result
/// (crop images included) is appended to the single window; there is no
/// delegation, no reset, no distillation. Terminates on a boxed answer or
/// on the step budget.
inline EpisodeResult run_twi(const std::string& question, RasterImage chart,
                             const BaselineKind& kind, EpisodeRuntime& rt) {
    std::string method = kind.fixed_skills          ? "twi-fixed-skills"
                         : kind.tools.size() == 2   ? "twi-code"
                                                    : "twi";
    EpisodeResult result;
    rt.trace().episode_start(method, question);
    rt.registry().register_original(std::move(chart));

    ContextWindow window("mono");
    std::string system_text = prompts::kMonolithBasePrompt;
    if (kind.fixed_skills) {
        std::string all = inject_skills(rt.library().names(), rt.library());
        if (!all.empty()) system_text += "\n\n" + all;
    }
    std::string tools_text = render_tool_schemas(kind.tools);
    if (!tools_text.empty()) system_text += "\n\n" + tools_text;
    rt.append(window, text_message(Role::System, system_text));

    Message user;
    user.role = Role::User;
    user.parts.push_back(TextPart{question + "\n" + prompts::kFinalAnswerPrompt});
    user.parts.push_back(rt.image_part(ImageRef{0}));
    rt.append(window, std::move(user));

    auto finish = [&](EpisodeResult r) {
        rt.trace().episode_end(r.answer, r.error ? episode_error_name(r.error->code) : "",
                               rt.peak_tokens(), 0);
        return r;
    };

    auto schemas = rt.schemas_for(kind.tools);
    int crop_ordinal = 0;  // each crop is addressable: stored under 1, 2, ...
    std::shared_ptr<const RasterImage> latest_image = rt.registry().resolve(ImageRef{0});

    for (int step = 0; step < rt.config().monolith_budget; ++step) {
        ChatResponse resp;
        try {
            resp = rt.call(window, schemas);
        } catch (const std::exception& e) {
            result.error = EpisodeError{EpisodeError::Code::BackendError, e.what()};
            return finish(result);
        }
        if (resp.is_tool_call()) {
            int next_id = resp.tool_call().name == tool_wire_name(ToolName::Zoom)
                              ? ++crop_ordinal
                              : crop_ordinal;
            auto ref = worker_detail::run_tool_call(rt, window, resp.tool_call(),
                                                    std::max(next_id, 1), latest_image);
            if (ref) latest_image = rt.registry().resolve(*ref);
            continue;
        }
        rt.append(window, text_message(Role::Assistant, resp.text()));
        auto boxed = extract_boxed_answer(resp.text());
        if (boxed) {
            result.answer = *boxed;
            return finish(result);
        }
        rt.append(window, text_message(Role::User, prompts::kBoxedNudge));
    }
    result.error = EpisodeError{EpisodeError::Code::BudgetExhausted,
                                "no boxed answer within " +
                                    std::to_string(rt.config().monolith_budget) + " steps"};
    return finish(result);
}

}  // namespace hierva
