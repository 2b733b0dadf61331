#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hierva/image_registry.hpp"
#include "hierva/result.hpp"
#include "hierva/textutil.hpp"

namespace hierva {

enum class ToolName { Zoom, Code };

inline const char* tool_wire_name(ToolName t) {
    return t == ToolName::Zoom ? "image_zoom_in_tool" : "code_interpreter";
}

inline std::optional<ToolName> tool_from_wire_name(std::string_view s) {
    if (to_lower(s) == "image_zoom_in_tool") return ToolName::Zoom;
    if (to_lower(s) == "code_interpreter") return ToolName::Code;
    return std::nullopt;
}

enum class ExpectedOutput { Text, Image };

/// The subtask record exchanged between manager and worker: worker index,
/// input image, instruction, known information, enabled tools, injected
/// skills, and the expected output type.
struct TaskSpec {
    int worker_id = 0;
    ImageRef image_ref{0};
    std::string instruction;
    std::string known_information;
    std::set<ToolName> tools;
    std::set<std::string> skills;
    ExpectedOutput expected_output = ExpectedOutput::Text;

    bool operator==(const TaskSpec&) const = default;
};

struct Allowlists {
    std::set<ToolName> tools = {ToolName::Zoom, ToolName::Code};
    std::set<std::string> skills;
};

enum class ValidationKind {
    MissingField,
    EmptyInstruction,
    UnknownTool,
    UnknownSkill,
    InvalidImageRef,
    BadExpectedOutput,
    Unparseable,
};

inline const char* validation_kind_name(ValidationKind k) {
    switch (k) {
        case ValidationKind::MissingField: return "MissingField";
        case ValidationKind::EmptyInstruction: return "EmptyInstruction";
        case ValidationKind::UnknownTool: return "UnknownTool";
        case ValidationKind::UnknownSkill: return "UnknownSkill";
        case ValidationKind::InvalidImageRef: return "InvalidImageRef";
        case ValidationKind::BadExpectedOutput: return "BadExpectedOutput";
        case ValidationKind::Unparseable: return "Unparseable";
    }
    return "?";
}

struct ValidationError {
    ValidationKind kind = ValidationKind::Unparseable;
    std::string detail;
    bool operator==(const ValidationError&) const = default;
};

namespace task_detail {

inline const std::vector<std::string>& canonical_labels() {
    static const std::vector<std::string> labels = {
        "Sub-agent ID", "Image",  "Instruction", "Known Information",
        "Tools",        "Skills", "Expected Output",
    };
    return labels;
}

// Normalizes a candidate label: markdown emphasis and bullets stripped,
// lowercased, inner whitespace collapsed.
inline std::string normalize_label(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '*' || c == '_' || c == '`') continue;
        out.push_back(c);
    }
    return to_lower(normalize_spaces(out));
}

inline std::string strip_bullet(std::string_view line) {
    std::string s = trim(line);
    while (!s.empty() && (s[0] == '-' || s[0] == '*' || s[0] == '+')) s = trim(s.substr(1));
    // Numbered bullets like "3." or "3)".
    size_t i = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')')) {
        std::string rest = trim(s.substr(i + 1));
        // Only treat it as a bullet when a labeled field follows.
        if (rest.find(':') != std::string::npos) s = rest;
    }
    return s;
}

inline std::string strip_brackets(std::string_view s) {
    std::string v = trim(s);
    if (v.size() >= 2 && v.front() == '[' && v.back() == ']') v = trim(v.substr(1, v.size() - 2));
    return v;
}

inline bool is_none(std::string_view v) {
    std::string s = to_lower(trim(v));
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s == "none" || s == "n/a" || s.empty();
}

inline std::optional<long> first_integer(std::string_view v) {
    size_t i = 0;
    while (i < v.size() && !std::isdigit(static_cast<unsigned char>(v[i]))) ++i;
    if (i == v.size()) return std::nullopt;
    long out = 0;
    bool any = false;
    while (i < v.size() && std::isdigit(static_cast<unsigned char>(v[i]))) {
        out = out * 10 + (v[i] - '0');
        any = true;
        ++i;
    }
    return any ? std::optional<long>(out) : std::nullopt;
}

inline std::vector<std::string> split_list(std::string_view v) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : v) {
        if (c == ',' || c == ';') {
            std::string t = trim(cur);
            if (!t.empty()) out.push_back(t);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    std::string t = trim(cur);
    if (!t.empty()) out.push_back(t);
    return out;
}

}  // namespace task_detail

/// Parses the manager's labeled-line task format (`Sub-agent ID`, `Image`,
/// `Instruction`, `Known Information`, `Tools`, `Skills`, `Expected
/// Output`). Tolerates list bullets, reordered lines, surrounding prose, and
/// case differences in labels. `None` in Tools/Skills maps to the empty set.
inline Result<TaskSpec, ValidationError> parse_task(std::string_view raw,
                                                    const Allowlists& allowlists) {
    using namespace task_detail;

    std::vector<std::optional<std::string>> values(canonical_labels().size());
    size_t start = 0;
    while (start <= raw.size()) {
        size_t nl = raw.find('\n', start);
        std::string_view line = raw.substr(start, nl == std::string_view::npos ? raw.size() - start
                                                                                : nl - start);
        start = nl == std::string_view::npos ? raw.size() + 1 : nl + 1;

        std::string stripped = strip_bullet(line);
        size_t colon = stripped.find(':');
        if (colon == std::string::npos) continue;
        std::string label = normalize_label(stripped.substr(0, colon));
        std::string value = trim(stripped.substr(colon + 1));
        for (size_t i = 0; i < canonical_labels().size(); ++i) {
            if (label == to_lower(canonical_labels()[i])) {
                if (!values[i]) values[i] = value;  // first occurrence wins
                break;
            }
        }
    }

    for (size_t i = 0; i < values.size(); ++i) {
        if (!values[i])
            return ValidationError{ValidationKind::Unparseable,
                                   "missing required label '" + canonical_labels()[i] + "'"};
    }

    TaskSpec task;

    auto id = first_integer(strip_brackets(*values[0]));
    if (!id)
        return ValidationError{ValidationKind::MissingField,
                               "Sub-agent ID must be a non-negative integer, got '" +
                                   *values[0] + "'"};
    task.worker_id = static_cast<int>(*id);

    std::string instruction = strip_brackets(*values[2]);
    if (instruction.empty())
        return ValidationError{ValidationKind::EmptyInstruction,
                               "Instruction must be non-empty"};
    task.instruction = instruction;

    std::string known = strip_brackets(*values[3]);
    task.known_information = is_none(known) ? "" : known;

    std::string tools_v = strip_brackets(*values[4]);
    if (!is_none(tools_v)) {
        for (const auto& tok : split_list(tools_v)) {
            if (is_none(tok)) continue;
            auto tool = tool_from_wire_name(tok);
            if (!tool || !allowlists.tools.count(*tool))
                return ValidationError{ValidationKind::UnknownTool,
                                       "unknown tool '" + tok + "'"};
            task.tools.insert(*tool);
        }
    }

    std::string skills_v = strip_brackets(*values[5]);
    if (!is_none(skills_v)) {
        for (const auto& tok : split_list(skills_v)) {
            if (is_none(tok)) continue;
            if (!allowlists.skills.count(tok))
                return ValidationError{ValidationKind::UnknownSkill,
                                       "unknown skill '" + tok + "'"};
            task.skills.insert(tok);
        }
    }

    std::string out_v = to_lower(strip_brackets(*values[6]));
    if (!out_v.empty() && out_v.back() == '.') out_v = trim(out_v.substr(0, out_v.size() - 1));
    if (out_v == "text")
        task.expected_output = ExpectedOutput::Text;
    else if (out_v == "image")
        task.expected_output = ExpectedOutput::Image;
    else
        return ValidationError{ValidationKind::BadExpectedOutput,
                               "Expected Output must be 'image' or 'text', got '" +
                                   *values[6] + "'"};

    // Image reference: a bare integer or "image k" prose.
    std::string img_v = strip_brackets(*values[1]);
    {
        std::string low = to_lower(img_v);
        std::string_view rest = low;
        if (rest.rfind("image", 0) == 0) rest = rest.substr(5);
        std::string t = trim(rest);
        bool all_digits = !t.empty();
        for (char c : t)
            if (!std::isdigit(static_cast<unsigned char>(c))) all_digits = false;
        if (!all_digits)
            return ValidationError{ValidationKind::InvalidImageRef,
                                   "Image must be a bare index or 'image k', got '" + img_v +
                                       "'"};
        task.image_ref = ImageRef{static_cast<int>(*first_integer(t))};
    }

    return task;
}

/// Full validation pass, fixed check order: field presence, instruction,
/// tools, skills, image-ref resolution. A task violating several rules
/// always reports the earliest failing check.
inline Result<std::monostate, ValidationError> validate_task(const TaskSpec& task,
                                                             const ImageRegistry& registry,
                                                             const Allowlists& allowlists) {
    if (task.worker_id < 0)
        return ValidationError{ValidationKind::MissingField, "Sub-agent ID must be >= 0"};
    if (trim(task.instruction).empty())
        return ValidationError{ValidationKind::EmptyInstruction, "Instruction must be non-empty"};
    for (ToolName t : task.tools) {
        if (!allowlists.tools.count(t))
            return ValidationError{ValidationKind::UnknownTool,
                                   std::string("tool '") + tool_wire_name(t) +
                                       "' is not in the allowlist"};
    }
    for (const auto& s : task.skills) {
        if (!allowlists.skills.count(s))
            return ValidationError{ValidationKind::UnknownSkill,
                                   "skill '" + s + "' is not in the allowlist"};
    }
    if (!registry.resolvable(task.image_ref))
        return ValidationError{ValidationKind::InvalidImageRef,
                               "image index " + std::to_string(task.image_ref.index) +
                                   " does not resolve (no crop from that worker yet)"};
    return std::monostate{};
}

/// Emits the canonical labeled-line form; parse_task(render_task(t)) == t.
/// Field values are assumed single-line (the parser is line-based).
inline std::string render_task(const TaskSpec& task) {
    std::string tools;
    for (ToolName t : task.tools) {
        if (!tools.empty()) tools += ", ";
        tools += tool_wire_name(t);
    }
    std::string skills;
    for (const auto& s : task.skills) {
        if (!skills.empty()) skills += ", ";
        skills += s;
    }
    std::string out = "- Sub-agent ID: " + std::to_string(task.worker_id) + "\n";
    out += "- Image: " + std::to_string(task.image_ref.index) + "\n";
    out += "- Instruction: " + task.instruction + "\n";
    out += "- Known Information: " +
           (task.known_information.empty() ? std::string("None") : task.known_information) + "\n";
    out += "- Tools: " + (tools.empty() ? std::string("None") : tools) + "\n";
    out += "- Skills: " + (skills.empty() ? std::string("None") : skills) + "\n";
    out += "- Expected Output: " +
           std::string(task.expected_output == ExpectedOutput::Text ? "text" : "image");
    return out;
}

/// Deterministic single-paragraph re-prompt message: names the failed field,
/// lists the allowed values, and asks for the full labeled format again.
inline std::string render_validation_feedback(const ValidationError& err,
                                              const Allowlists& allowlists) {
    using namespace task_detail;
    std::string labels;
    for (const auto& l : canonical_labels()) {
        if (!labels.empty()) labels += ", ";
        labels += l;
    }
    std::string tools;
    for (ToolName t : allowlists.tools) {
        if (!tools.empty()) tools += ", ";
        tools += tool_wire_name(t);
    }
    std::string skills;
    for (const auto& s : allowlists.skills) {
        if (!skills.empty()) skills += ", ";
        skills += s;
    }
    if (skills.empty()) skills = "(no skills configured)";

    std::string msg = "The task you emitted is invalid: ";
    switch (err.kind) {
        case ValidationKind::Unparseable:
            msg += "it could not be parsed (" + err.detail + ").";
            break;
        case ValidationKind::MissingField:
            msg += "a required field is missing or malformed (" + err.detail + ").";
            break;
        case ValidationKind::EmptyInstruction:
            msg += "the Instruction field must be non-empty.";
            break;
        case ValidationKind::UnknownTool:
            msg += err.detail + "; allowed tools are: " + tools + ", or None.";
            break;
        case ValidationKind::UnknownSkill:
            msg += err.detail + "; allowed skills are: " + skills + ", or None.";
            break;
        case ValidationKind::InvalidImageRef:
            msg += err.detail +
                   "; the Image field must be the index of the original chart (0) or of a "
                   "worker that has already produced a crop.";
            break;
        case ValidationKind::BadExpectedOutput:
            msg += err.detail + "; Expected Output must be exactly 'image' or 'text'.";
            break;
    }
    msg += " Please re-emit the complete task using every labeled line: " + labels + ".";
    return msg;
}

}  // namespace hierva
