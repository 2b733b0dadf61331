#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hierva {

inline std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

/// Collapses runs of whitespace to single spaces and trims the ends.
inline std::string normalize_spaces(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_ws = true;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!in_ws) out.push_back(' ');
            in_ws = true;
        } else {
            out.push_back(c);
            in_ws = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

inline bool starts_with_ci(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[i])) !=
            std::tolower(static_cast<unsigned char>(prefix[i])))
            return false;
    }
    return true;
}

inline bool contains_ci(std::string_view s, std::string_view needle) {
    if (needle.empty()) return true;
    if (s.size() < needle.size()) return false;
    for (size_t i = 0; i + needle.size() <= s.size(); ++i) {
        if (starts_with_ci(s.substr(i), needle)) return true;
    }
    return false;
}

namespace detail {

// Abbreviations whose trailing period never ends a sentence. The lowercase
// forms match case-insensitively ("E.g." at sentence start); "Fig." matches
// exactly; "No." is protected only in numero usage, i.e. when a digit
// follows ("No. 5"), so "I say no." still ends a sentence.
inline constexpr std::array<std::string_view, 5> kAbbreviationsCi = {
    "e.g.", "i.e.", "etc.", "vs.", "cf.",
};

inline bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

inline bool abbr_ends_at(std::string_view text, size_t i, std::string_view abbr,
                         bool case_insensitive) {
    if (i + 1 < abbr.size()) return false;
    std::string_view tail = text.substr(i + 1 - abbr.size(), abbr.size());
    bool eq = case_insensitive
                  ? starts_with_ci(tail, abbr) && tail.size() == abbr.size()
                  : tail == abbr;
    if (!eq) return false;
    size_t start = i + 1 - abbr.size();
    return start == 0 || !std::isalnum(static_cast<unsigned char>(text[start - 1]));
}

// True when the terminator at position `i` closes a sentence: it must be
// followed by whitespace or end-of-text and must not be the trailing period
// of a protected abbreviation.
inline bool is_sentence_boundary(std::string_view text, size_t i) {
    if (!is_terminator(text[i])) return false;
    if (i + 1 < text.size() && !std::isspace(static_cast<unsigned char>(text[i + 1])))
        return false;
    if (text[i] == '.') {
        for (std::string_view abbr : kAbbreviationsCi)
            if (abbr_ends_at(text, i, abbr, true)) return false;
        if (abbr_ends_at(text, i, "Fig.", false)) return false;
        if (abbr_ends_at(text, i, "No.", false)) {
            size_t j = i + 1;
            while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
            if (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j])))
                return false;
        }
    }
    return true;
}

}  // namespace detail

/// Returns the last sentence of `reply`, per the worker output contract: the
/// final maximal chunk ending in `.`, `!`, or `?` followed by whitespace or
/// end-of-text. Decimal points and common abbreviations (e.g., i.e., Fig.,
/// No.) do not end a sentence. Falls back to the whole trimmed text when no
/// terminator exists. Empty (after trimming) input yields nullopt.
inline std::optional<std::string> extract_last_sentence(std::string_view reply) {
    std::string text = trim(reply);
    if (text.empty()) return std::nullopt;

    // Collect the end position (exclusive) of every sentence boundary. Runs
    // of terminators ("?!", "...") collapse naturally: only the last one is
    // followed by whitespace or end-of-text.
    std::vector<size_t> ends;
    for (size_t i = 0; i < text.size(); ++i) {
        if (detail::is_sentence_boundary(text, i)) ends.push_back(i + 1);
    }

    size_t end = text.size();
    size_t begin = 0;
    if (!ends.empty() && ends.back() == text.size()) {
        end = ends.back();
        if (ends.size() >= 2) begin = ends[ends.size() - 2];
    } else if (!ends.empty()) {
        // Trailing text without terminator: the last sentence is that tail.
        begin = ends.back();
    }
    return trim(std::string_view(text).substr(begin, end - begin));
}

/// Extracts the content of the LAST balanced `\boxed{...}` group, scanning
/// braces with nesting and skipping `\{` / `\}` escapes. Unbalanced
/// occurrences are ignored. Returns nullopt when no balanced group exists.
inline std::optional<std::string> extract_boxed_answer(std::string_view text) {
    static constexpr std::string_view kMarker = "\\boxed{";
    std::optional<std::string> last;
    size_t pos = 0;
    while ((pos = text.find(kMarker, pos)) != std::string_view::npos) {
        size_t i = pos + kMarker.size();
        int depth = 1;
        std::string content;
        bool closed = false;
        while (i < text.size()) {
            char c = text[i];
            if (c == '\\' && i + 1 < text.size() &&
                (text[i + 1] == '{' || text[i + 1] == '}')) {
                content.push_back(c);
                content.push_back(text[i + 1]);
                i += 2;
                continue;
            }
            if (c == '{') ++depth;
            if (c == '}') {
                --depth;
                if (depth == 0) {
                    closed = true;
                    ++i;
                    break;
                }
            }
            content.push_back(c);
            ++i;
        }
        if (closed) {
            last = content;
            pos = i;
        } else {
            pos += kMarker.size();
        }
    }
    return last;
}

}  // namespace hierva
