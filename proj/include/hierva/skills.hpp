#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hierva/task.hpp"
#include "hierva/textutil.hpp"

namespace hierva {

/// Post-processor applied to a worker's distilled text output. Hooks are
/// total functions on text; the task gives access to the instruction (e.g.
/// to see whether a fraction was requested).
using HookFn = std::function<std::string(const std::string&, const TaskSpec&)>;

struct Skill {
    std::string name;
    std::string description;
    std::string body;  // markdown procedure
    std::optional<std::string> hook;
};

struct SkillLoadError : std::runtime_error {
    enum class Kind { DuplicateSkillName, MalformedFrontMatter, UnknownHook, MissingDirectory };
    Kind kind;
    SkillLoadError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}
};

namespace hook_detail {

inline bool digit_at(const std::string& s, size_t i) {
    return i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]));
}

/// Removes thousands separators: a comma between a digit and exactly three
/// digits (not followed by a fourth) is dropped; repeated for chains like
/// "1,234,567".
inline std::string strip_thousands_separators(std::string s) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 1; i < s.size(); ++i) {
            if (s[i] != ',' || !digit_at(s, i - 1)) continue;
            if (digit_at(s, i + 1) && digit_at(s, i + 2) && digit_at(s, i + 3) &&
                !digit_at(s, i + 4)) {
                s.erase(i, 1);
                changed = true;
                break;
            }
        }
    }
    return s;
}

/// Unifies a decimal comma ("3,14" style: comma followed by one or two
/// digits at a number boundary) to a decimal point.
inline std::string unify_decimal_point(std::string s) {
    for (size_t i = 1; i < s.size(); ++i) {
        if (s[i] != ',') continue;
        if (!std::isdigit(static_cast<unsigned char>(s[i - 1]))) continue;
        size_t digits = 0;
        while (i + 1 + digits < s.size() &&
               std::isdigit(static_cast<unsigned char>(s[i + 1 + digits])))
            ++digits;
        if (digits >= 1 && digits <= 2) s[i] = '.';
    }
    return s;
}

inline std::string format_minimal(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

/// Rewrites "42%" as "0.42" when the instruction asked for a fraction,
/// proportion, or decimal form.
inline std::string percents_to_fractions(std::string s) {
    std::string out;
    size_t i = 0;
    while (i < s.size()) {
        if (std::isdigit(static_cast<unsigned char>(s[i]))) {
            size_t j = i;
            while (j < s.size() &&
                   (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.'))
                ++j;
            if (j < s.size() && s[j] == '%') {
                double v = std::stod(s.substr(i, j - i));
                out += format_minimal(v / 100.0);
                i = j + 1;
                continue;
            }
            out += s.substr(i, j - i);
            i = j;
            continue;
        }
        out.push_back(s[i]);
        ++i;
    }
    return out;
}

inline bool instruction_requests_fraction(const TaskSpec& task) {
    std::string t = to_lower(task.instruction + " " + task.known_information);
    return t.find("fraction") != std::string::npos ||
           t.find("proportion") != std::string::npos ||
           t.find("as a decimal") != std::string::npos;
}

}  // namespace hook_detail

/// Numeric-format normalization hook: strips thousands separators, unifies
/// the decimal point, and converts percent signs to fractions when the task
/// instruction requested a fraction.
inline std::string normalize_coordinates_hook(const std::string& text, const TaskSpec& task) {
    using namespace hook_detail;
    std::string s = strip_thousands_separators(text);
    s = unify_decimal_point(s);
    if (instruction_requests_fraction(task)) s = percents_to_fractions(s);
    return s;
}

inline const std::map<std::string, HookFn>& builtin_hooks() {
    static const std::map<std::string, HookFn> hooks = {
        {"normalize_coordinates", normalize_coordinates_hook},
    };
    return hooks;
}

/// Immutable library of markdown skill procedures, loaded once and shared
/// read-only across episodes.
class SkillLibrary {
public:
    void add(Skill skill) {
        if (skills_.count(skill.name))
            throw SkillLoadError(SkillLoadError::Kind::DuplicateSkillName,
                                 "duplicate skill name '" + skill.name + "'");
        if (skill.hook && !builtin_hooks().count(*skill.hook))
            throw SkillLoadError(SkillLoadError::Kind::UnknownHook,
                                 "skill '" + skill.name + "' declares unknown hook '" +
                                     *skill.hook + "'");
        if (trim(skill.body).empty())
            throw SkillLoadError(SkillLoadError::Kind::MalformedFrontMatter,
                                 "skill '" + skill.name + "' has an empty body");
        skills_.emplace(skill.name, std::move(skill));
    }

    bool contains(const std::string& name) const { return skills_.count(name) > 0; }
    const Skill& at(const std::string& name) const { return skills_.at(name); }
    size_t size() const { return skills_.size(); }

    std::set<std::string> names() const {
        std::set<std::string> out;
        for (const auto& [k, v] : skills_) out.insert(k);
        return out;
    }

    const std::map<std::string, Skill>& all() const { return skills_; }

private:
    std::map<std::string, Skill> skills_;  // name-sorted
};

/// Parses one markdown skill file: a `---` fenced front-matter header with
/// `name`, `description`, and optional `hook` keys, followed by the body.
inline Skill parse_skill_markdown(const std::string& content, const std::string& origin) {
    auto malformed = [&](const std::string& why) {
        return SkillLoadError(SkillLoadError::Kind::MalformedFrontMatter,
                              origin + ": " + why);
    };

    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line) || trim(line) != "---")
        throw malformed("front matter must start with '---'");

    Skill skill;
    bool closed = false;
    while (std::getline(in, line)) {
        if (trim(line) == "---") {
            closed = true;
            break;
        }
        size_t colon = line.find(':');
        if (colon == std::string::npos) throw malformed("front-matter line lacks 'key: value'");
        std::string key = to_lower(trim(line.substr(0, colon)));
        std::string value = trim(line.substr(colon + 1));
        if (key == "name")
            skill.name = value;
        else if (key == "description")
            skill.description = value;
        else if (key == "hook")
            skill.hook = value;
        else
            throw malformed("unknown front-matter key '" + key + "'");
    }
    if (!closed) throw malformed("front matter never closed with '---'");
    if (skill.name.empty()) throw malformed("front matter lacks a name");
    if (skill.description.empty()) throw malformed("front matter lacks a description");

    std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    skill.body = trim(body);
    return skill;
}

/// Loads every *.md file under `dir` (sorted by filename, so load order
/// never affects the result).
inline SkillLibrary load_library(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir))
        throw SkillLoadError(SkillLoadError::Kind::MissingDirectory,
                             "skill directory does not exist: " + dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".md")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    SkillLibrary lib;
    for (const auto& path : files) {
        std::ifstream f(path);
        std::string content((std::istreambuf_iterator<char>(f)),
                            std::istreambuf_iterator<char>());
        lib.add(parse_skill_markdown(content, path.filename().string()));
    }
    return lib;
}

/// Concatenates the selected skills' bodies, name-sorted, under a "Skills"
/// heading; empty selection renders empty text. Only worker-context
/// assembly calls this: the manager never reads skill content.
inline std::string inject_skills(const std::set<std::string>& selected,
                                 const SkillLibrary& library) {
    if (selected.empty()) return "";
    std::string out = "## Skills\n";
    for (const auto& name : selected) {  // std::set iterates name-sorted
        const Skill& s = library.at(name);
        out += "\n### " + s.name + "\n" + s.body + "\n";
    }
    return out;
}

/// Returns the registered post-processor for the skill's declared hook, or
/// nullopt when the skill declares none.
inline std::optional<HookFn> resolve_hook(const Skill& skill) {
    if (!skill.hook) return std::nullopt;
    return builtin_hooks().at(*skill.hook);  // UnknownHook rejected at load
}

}  // namespace hierva
