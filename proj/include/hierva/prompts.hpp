#pragma once

#include <set>
#include <string>

namespace hierva::prompts {

// Baseline prompt suffixes. These are golden strings covered by tests; do
// not reword.
inline constexpr const char* kDirectSuffix =
    "You cannot reason or think. You must ONLY answer directly in \\boxed{}.";
inline constexpr const char* kCotSuffix = "Let's reason step by step.";
inline constexpr const char* kCotPlanSuffix =
    "Let's first plan how to solve this problem, then answer step by step.";

/// Stage-1 manager planning prompt.
inline std::string planning_prompt(const std::string& question) {
    return "For the question '" + question +
           "', we need to develop a plan.\n"
           "We can decompose the image and the question into sub-images + sub-tasks pairs.\n"
           "Since the question can be complex, we need to plan twice.\n"
           "The sub-image-task pair should be atomic.\n"
           "Only plan now.";
}

/// Stage-2 refinement prompt (project-authored continuation; configurable
/// through EpisodeConfig).
inline constexpr const char* kPlanRefinePrompt =
    "Now refine the plan into an explicit, numbered step list of atomic sub-image + "
    "sub-task pairs. For each step, name the image it uses and what the sub-agent must "
    "deliver. Output only the final refined plan.";

// Task-creation prompt; the seven labeled lines are golden strings.
inline constexpr const char* kTaskCreationPrompt =
    "What is the next task? Provide for the sub-agent: the image to use,\n"
    "the instruction, and the expected output type.\n"
    "\n"
    "After reviewing, output in the following format:\n"
    "- Sub-agent ID: [ID]\n"
    "- Image: [image index]\n"
    "- Instruction: [instruction]\n"
    "- Known Information: [necessary information to finish the task]\n"
    "- Tools: [image_zoom_in_tool, code_interpreter, or None]\n"
    "- Skills: [choose from the skill allowlist or None]\n"
    "- Expected Output: [image or text]";

inline std::string task_creation_prompt(const std::set<std::string>& skill_allowlist) {
    std::string out = kTaskCreationPrompt;
    if (!skill_allowlist.empty()) {
        out += "\n\nSkill allowlist: ";
        bool first = true;
        for (const auto& s : skill_allowlist) {
            if (!first) out += ", ";
            out += s;
            first = false;
        }
    }
    return out;
}

inline std::string known_information_sentence(const std::string& known) {
    return "We know the following information: " + known + ".";
}

/// Termination check. Phrased so that "Yes" means the episode should stop
/// (the manager has enough information to answer).
inline constexpr const char* kTerminationPrompt =
    "Before assigning the next task: do you already have enough information to answer "
    "the original question, so that no further sub-agent task is needed? "
    "Answer only \"Yes\" or \"No\".";

inline constexpr const char* kTerminationNudge = "Answer only \"Yes\" or \"No\".";

inline constexpr const char* kFinalAnswerPrompt = "Put your final answer in \\boxed{}.";
inline constexpr const char* kBoxedNudge =
    "Please restate your final answer inside \\boxed{}.";

inline constexpr const char* kWorkerBasePrompt =
    "You are a focused sub-agent; complete exactly the given task. "
    "For text tasks, state your final answer in the last sentence of your reply. "
    "For image tasks, produce the requested crop with the zoom tool, then reply with a "
    "short confirmation.";

inline constexpr const char* kMonolithBasePrompt =
    "You are a visual reasoning assistant. You may call the available tools to inspect "
    "the chart while you reason. When you are confident, put your final answer in "
    "\\boxed{}.";

}  // namespace hierva::prompts
