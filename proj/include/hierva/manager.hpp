#pragma once

#include <chrono>
#include <optional>
#include <string>

#include "hierva/episode.hpp"
#include "hierva/prompts.hpp"
#include "hierva/worker.hpp"

namespace hierva {

/// Two-stage plan. Only the refined plan is ever appended to the manager
/// context; drafts live in the trace.
struct Plan {
    std::string high_level;
    std::string step_list;
    bool refined = false;
};

struct DistilledEntry {
    std::string task_summary;  // worker id, image ref, instruction digest
    std::string outcome;       // single sentence, or "crop stored as image k"
};

struct EpisodeResult {
    std::string answer;
    std::optional<EpisodeError> error;
    int task_count = 0;
};

namespace manager_detail {

inline std::string instruction_digest(const std::string& instruction, size_t limit = 80) {
    std::string s = normalize_spaces(instruction);
    if (s.size() > limit) s = s.substr(0, limit - 3) + "...";
    return s;
}

}  // namespace manager_detail

/// Two-stage planning with refinement. Both prompts run on a scratch fork
/// of C_M so drafts never enter the persistent context; C_M then gains the
/// planning prompt turn and exactly one consolidated plan message.
inline Result<Plan, EpisodeError> plan(const std::string& question, EpisodeRuntime& rt,
                                       ContextWindow& manager_window) {
    if (trim(question).empty())
        return EpisodeError{EpisodeError::Code::BackendError, "question must be non-empty"};

    ContextWindow scratch("plan_scratch");
    for (const auto& m : manager_window.messages()) scratch.append(m);

    Plan result;
    try {
        rt.append(scratch, text_message(Role::User, prompts::planning_prompt(question)));
        ChatResponse draft1 = rt.call(scratch);
        if (draft1.is_tool_call())
            return EpisodeError{EpisodeError::Code::BackendError,
                                "unexpected tool call during planning"};
        result.high_level = draft1.text();
        rt.trace().plan_draft(1, result.high_level);
        rt.append(scratch, text_message(Role::Assistant, result.high_level));

        const std::string& refine = rt.config().plan_refine_prompt.empty()
                                        ? prompts::kPlanRefinePrompt
                                        : rt.config().plan_refine_prompt;
        rt.append(scratch, text_message(Role::User, refine));
        ChatResponse draft2 = rt.call(scratch);
        if (draft2.is_tool_call())
            return EpisodeError{EpisodeError::Code::BackendError,
                                "unexpected tool call during planning"};
        result.step_list = draft2.text();
        rt.trace().plan_draft(2, result.step_list);
    } catch (const std::exception& e) {
        return EpisodeError{EpisodeError::Code::BackendError, e.what()};
    }
    result.refined = true;

    rt.append(manager_window, text_message(Role::User, prompts::planning_prompt(question)));
    rt.append(manager_window, text_message(Role::Assistant, result.step_list));
    return result;
}

/// Task creation with schema-constrained self-correction: prompt, parse,
/// validate; on failure append structured feedback and re-prompt, up to
/// `retry_bound` attempts in total.
inline Result<TaskSpec, EpisodeError> create_next_task(EpisodeRuntime& rt,
                                                       ContextWindow& manager_window) {
    const auto& allow = rt.config().allowlists;
    rt.append(manager_window,
              text_message(Role::User, prompts::task_creation_prompt(allow.skills)));

    for (int attempt = 1; attempt <= rt.config().task_retry_bound; ++attempt) {
        ChatResponse resp;
        try {
            resp = rt.call(manager_window);
        } catch (const std::exception& e) {
            return EpisodeError{EpisodeError::Code::BackendError, e.what()};
        }
        if (resp.is_tool_call())
            return EpisodeError{EpisodeError::Code::BackendError,
                                "unexpected tool call during task creation"};
        rt.append(manager_window, text_message(Role::Assistant, resp.text()));

        auto parsed = parse_task(resp.text(), allow);
        std::optional<ValidationError> err;
        std::optional<TaskSpec> task;
        if (parsed.ok()) {
            auto valid = validate_task(parsed.value(), rt.registry(), allow);
            if (valid.ok())
                task = parsed.value();
            else
                err = valid.error();
        } else {
            err = parsed.error();
        }

        if (task) return *task;

        std::string feedback = render_validation_feedback(*err, allow);
        rt.trace().validation_event(*err, feedback);
        if (attempt < rt.config().task_retry_bound)
            rt.append(manager_window, text_message(Role::User, feedback));
    }
    return EpisodeError{EpisodeError::Code::TaskCreationFailed,
                        "no valid task after " + std::to_string(rt.config().task_retry_bound) +
                            " attempts"};
}

/// Termination check: "yes" means stop. An unclear reply earns one
/// re-prompt, then defaults to continuing.
inline Result<bool, EpisodeError> should_stop(EpisodeRuntime& rt,
                                              ContextWindow& manager_window) {
    auto normalize = [](std::string s) {
        s = to_lower(trim(s));
        while (!s.empty() && (std::ispunct(static_cast<unsigned char>(s.back())) ||
                              std::isspace(static_cast<unsigned char>(s.back()))))
            s.pop_back();
        return s;
    };

    rt.append(manager_window, text_message(Role::User, prompts::kTerminationPrompt));
    for (int attempt = 0; attempt < 2; ++attempt) {
        ChatResponse resp;
        try {
            resp = rt.call(manager_window);
        } catch (const std::exception& e) {
            return EpisodeError{EpisodeError::Code::BackendError, e.what()};
        }
        if (resp.is_tool_call())
            return EpisodeError{EpisodeError::Code::BackendError,
                                "unexpected tool call during termination check"};
        rt.append(manager_window, text_message(Role::Assistant, resp.text()));
        std::string norm = normalize(resp.text());
        if (norm == "yes") return true;
        if (norm == "no") return false;
        if (attempt == 0)
            rt.append(manager_window, text_message(Role::User, prompts::kTerminationNudge));
    }
    return false;
}

/// Appends one compact summary of (task, outcome) to C_M. Crop handles are
/// referenced textually; the raster never enters the manager context.
inline DistilledEntry distill_and_append(const TaskSpec& task, const WorkerResult& result,
                                         EpisodeRuntime& rt, ContextWindow& manager_window) {
    DistilledEntry entry;
    entry.task_summary = "Worker " + std::to_string(task.worker_id) + " on image " +
                         std::to_string(task.image_ref.index) + ": " +
                         manager_detail::instruction_digest(task.instruction);
    if (result.is_text())
        entry.outcome = result.text_fact().sentence;
    else
        entry.outcome =
            "crop stored as image " + std::to_string(result.crop_handle().ref.index);

    rt.trace().distilled_entry(entry.task_summary, entry.outcome, result.degraded);
    rt.append(manager_window,
              text_message(Role::User, entry.task_summary + "\nResult: " + entry.outcome));
    return entry;
}

/// Prompts for the final answer and extracts the last balanced \boxed{}
/// group; a reply without one earns a single formatting re-prompt.
inline Result<std::string, EpisodeError> final_answer(EpisodeRuntime& rt,
                                                      ContextWindow& manager_window) {
    rt.append(manager_window, text_message(Role::User, prompts::kFinalAnswerPrompt));
    for (int attempt = 0; attempt < 2; ++attempt) {
        ChatResponse resp;
        try {
            resp = rt.call(manager_window);
        } catch (const std::exception& e) {
            return EpisodeError{EpisodeError::Code::BackendError, e.what()};
        }
        if (resp.is_tool_call())
            return EpisodeError{EpisodeError::Code::BackendError,
                                "unexpected tool call during final answer"};
        rt.append(manager_window, text_message(Role::Assistant, resp.text()));
        auto boxed = extract_boxed_answer(resp.text());
        if (boxed) return *boxed;
        if (attempt == 0)
            rt.append(manager_window, text_message(Role::User, prompts::kBoxedNudge));
    }
    return EpisodeError{EpisodeError::Code::NoBoxedAnswer,
                        "manager never produced a \\boxed{} answer"};
}

/// Full control loop: init C_M with {question, chart}, plan, then iterate
/// termination check / task creation / worker execution / hooks / distilled
/// reporting, and close with the boxed final answer.
inline EpisodeResult run_hierva_episode(const std::string& question, RasterImage chart,
                                        EpisodeRuntime& rt) {
    EpisodeResult result;
    rt.trace().episode_start("hierva", question);
    rt.registry().register_original(std::move(chart));

    ContextWindow manager_window("manager");
    Message init;
    init.role = Role::User;
    init.parts.push_back(TextPart{question});
    init.parts.push_back(rt.image_part(ImageRef{0}));
    rt.append(manager_window, std::move(init));

    auto finish = [&](EpisodeResult r) {
        rt.trace().episode_end(r.answer, r.error ? episode_error_name(r.error->code) : "",
                               rt.peak_tokens(), r.task_count);
        return r;
    };

    auto planned = plan(question, rt, manager_window);
    if (!planned.ok()) {
        result.error = planned.error();
        return finish(result);
    }

    for (int t = 1; t <= rt.config().max_tasks; ++t) {
        if (t > 1) {
            auto stop = should_stop(rt, manager_window);
            if (!stop.ok()) {
                result.error = stop.error();
                return finish(result);
            }
            if (stop.value()) break;
        }

        auto task = create_next_task(rt, manager_window);
        if (!task.ok()) {
            result.error = task.error();
            return finish(result);
        }
        rt.trace().task_accepted(t, task.value());

        std::string label = "worker/t" + std::to_string(t) + "/w" +
                            std::to_string(task.value().worker_id);
        auto worker = run_worker(task.value(), rt, label);
        ++result.task_count;
        if (!worker.ok()) {
            if (worker.error().code == EpisodeError::Code::BackendError) {
                result.error = worker.error();
                return finish(result);
            }
            // Worker contract failures degrade to a distilled failure note;
            // the manager may retry with a new task.
            WorkerResult failed{TextFact{"The sub-agent failed to complete this task (" +
                                             std::string(episode_error_name(
                                                 worker.error().code)) +
                                             ").",
                                         ""},
                                0, 0, true};
            distill_and_append(task.value(), failed, rt, manager_window);
            continue;
        }

        WorkerResult processed = apply_hooks(worker.value(), task.value(), rt.library());
        distill_and_append(task.value(), processed, rt, manager_window);
    }

    auto answer = final_answer(rt, manager_window);
    if (!answer.ok()) {
        result.error = answer.error();
        return finish(result);
    }
    result.answer = answer.value();
    return finish(result);
}

}  // namespace hierva
