#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hierva/backend.hpp"
#include "hierva/textutil.hpp"
#include "hierva/trace.hpp"

namespace hierva {

enum class AnswerKind { Numeric, Categorical, Text };

enum class QType { ReadValue, FindExtreme, FindFirst, ReverseRead, Compare, Frequency };

inline const char* answer_kind_name(AnswerKind k) {
    switch (k) {
        case AnswerKind::Numeric: return "numeric";
        case AnswerKind::Categorical: return "categorical";
        case AnswerKind::Text: return "text";
    }
    return "?";
}

inline std::optional<AnswerKind> answer_kind_from(std::string_view s) {
    std::string v = to_lower(s);
    if (v == "numeric") return AnswerKind::Numeric;
    if (v == "categorical") return AnswerKind::Categorical;
    if (v == "text") return AnswerKind::Text;
    return std::nullopt;
}

inline const char* qtype_name(QType q) {
    switch (q) {
        case QType::ReadValue: return "read_value";
        case QType::FindExtreme: return "find_extreme";
        case QType::FindFirst: return "find_first";
        case QType::ReverseRead: return "reverse_read";
        case QType::Compare: return "compare";
        case QType::Frequency: return "frequency";
    }
    return "?";
}

inline std::optional<QType> qtype_from(std::string_view s) {
    std::string v = to_lower(s);
    if (v == "read_value") return QType::ReadValue;
    if (v == "find_extreme") return QType::FindExtreme;
    if (v == "find_first") return QType::FindFirst;
    if (v == "reverse_read") return QType::ReverseRead;
    if (v == "compare") return QType::Compare;
    if (v == "frequency") return QType::Frequency;
    return std::nullopt;
}

struct QARecord {
    std::string id;
    std::string image_path;  // resolved to an absolute/openable path at load
    std::string question;
    std::string gold_answer;
    AnswerKind answer_kind = AnswerKind::Text;
    std::optional<QType> qtype;
    std::optional<int> subplot_count;
};

struct SchemaError : std::runtime_error {
    int line;
    SchemaError(int line_no, const std::string& what)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
};
struct MissingImage : std::runtime_error {
    int line;
    MissingImage(int line_no, const std::string& path)
        : std::runtime_error("line " + std::to_string(line_no) + ": image not found: " + path),
          line(line_no) {}
};

/// First number in the string, after stripping commas; tolerates %, $, and
/// unit suffixes by simply scanning past them.
inline std::optional<double> parse_number(std::string_view text) {
    std::string s;
    s.reserve(text.size());
    for (char c : text)
        if (c != ',') s.push_back(c);
    size_t i = 0;
    while (i < s.size()) {
        bool start = std::isdigit(static_cast<unsigned char>(s[i])) ||
                     ((s[i] == '-' || s[i] == '+' || s[i] == '.') && i + 1 < s.size() &&
                      std::isdigit(static_cast<unsigned char>(s[i + 1])));
        if (start) {
            size_t end = i;
            try {
                double v = std::stod(s.substr(i), &end);
                if (end > 0) return v;
            } catch (...) {
            }
        }
        ++i;
    }
    return std::nullopt;
}

/// Loads the neutral JSONL dataset schema. Image paths resolve relative to
/// the dataset file's directory; order is the file order.
inline std::vector<QARecord> load_dataset(const std::string& path) {
    namespace fs = std::filesystem;
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open dataset: " + path);
    fs::path base = fs::path(path).parent_path();

    std::vector<QARecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw SchemaError(line_no, std::string("malformed JSON: ") + e.what());
        }
        QARecord r;
        for (const char* key : {"id", "image_path", "question", "gold_answer", "answer_kind"})
            if (!j.contains(key)) throw SchemaError(line_no, std::string("missing key '") + key + "'");
        r.id = j["id"].get<std::string>();
        r.question = j["question"].get<std::string>();
        r.gold_answer = j["gold_answer"].is_string() ? j["gold_answer"].get<std::string>()
                                                     : j["gold_answer"].dump();
        auto kind = answer_kind_from(j["answer_kind"].get<std::string>());
        if (!kind) throw SchemaError(line_no, "unknown answer_kind");
        r.answer_kind = *kind;
        if (j.contains("qtype") && !j["qtype"].is_null()) {
            auto q = qtype_from(j["qtype"].get<std::string>());
            if (!q) throw SchemaError(line_no, "unknown qtype");
            r.qtype = q;
        }
        if (j.contains("subplot_count") && !j["subplot_count"].is_null())
            r.subplot_count = j["subplot_count"].get<int>();

        fs::path img = j["image_path"].get<std::string>();
        if (img.is_relative()) img = base / img;
        if (!fs::exists(img)) throw MissingImage(line_no, img.string());
        r.image_path = img.string();

        if (r.answer_kind == AnswerKind::Numeric && !parse_number(r.gold_answer))
            throw SchemaError(line_no, "numeric gold answer does not parse: " + r.gold_answer);
        records.push_back(std::move(r));
    }
    return records;
}

namespace score_detail {

inline std::string normalize_categorical(std::string_view s) {
    std::string lowered = to_lower(trim(s));
    while (!lowered.empty() && (lowered.back() == '.' || lowered.back() == '!')) {
        lowered.pop_back();
    }
    std::istringstream in(lowered);
    std::string word, out;
    while (in >> word) {
        if (word == "a" || word == "an" || word == "the") continue;
        if (!out.empty()) out += ' ';
        out += word;
    }
    return out;
}

}  // namespace score_detail

/// Numeric: relaxed 5% relative tolerance, boundary-exclusive (a prediction
/// off by exactly 5% is incorrect); gold 0 demands an exact match.
/// Categorical/Text: case-insensitive, whitespace-normalized,
/// article-stripped exact match. Unparseable numeric predictions score
/// incorrect.
inline bool score_answer(const std::string& predicted, const QARecord& record) {
    if (record.answer_kind == AnswerKind::Numeric) {
        auto p = parse_number(predicted);
        auto g = parse_number(record.gold_answer);
        if (!p || !g) return false;
        if (*g == 0.0) return *p == 0.0;
        double ratio = std::abs(*p - *g) / std::abs(*g);
        return ratio < 0.05 - 1e-9;
    }
    return score_detail::normalize_categorical(predicted) ==
           score_detail::normalize_categorical(record.gold_answer);
}

namespace classify_detail {

inline bool has_word(const std::string& lowered, const std::string& word) {
    size_t pos = 0;
    while ((pos = lowered.find(word, pos)) != std::string::npos) {
        bool left = pos == 0 || !std::isalnum(static_cast<unsigned char>(lowered[pos - 1]));
        size_t end = pos + word.size();
        bool right =
            end >= lowered.size() || !std::isalnum(static_cast<unsigned char>(lowered[end]));
        if (left && right) return true;
        pos = end;
    }
    return false;
}

}  // namespace classify_detail

/// Ordered keyword rules. ReverseRead patterns run before extremum words so
/// that label-selection questions mentioning "highest" still classify as
/// reverse reads.
inline QType classify_qtype_keyword(const std::string& question) {
    using classify_detail::has_word;
    std::string q = to_lower(question);

    if (q.find("how many") != std::string::npos) return QType::Frequency;
    if (has_word(q, "first")) return QType::FindFirst;
    if (q.rfind("which", 0) == 0 || q.find("what's the color") != std::string::npos ||
        q.find("what is the color") != std::string::npos ||
        q.find("color of") != std::string::npos || q.find("label of") != std::string::npos ||
        q.find("name of") != std::string::npos)
        return QType::ReverseRead;
    for (const char* w : {"highest", "lowest", "maximum", "minimum", "largest", "smallest",
                          "max", "min", "extreme"})
        if (has_word(q, w)) return QType::FindExtreme;
    if (has_word(q, "compare") || has_word(q, "than") ||
        q.find("difference between") != std::string::npos)
        return QType::Compare;
    return QType::ReadValue;
}

inline std::string classifier_prompt(const std::string& question) {
    return "Classify the chart question into exactly one reasoning type.\n"
           "Types:\n"
           "- read_value: reading or estimating a numeric value\n"
           "- find_extreme: identifying max/min or ranked extremes\n"
           "- find_first: identifying the first crossing, drop, plateau, or threshold event\n"
           "- reverse_read: selecting the label, method, or subplot matching a described "
           "pattern\n"
           "- compare: comparing two items\n"
           "- frequency: counting occurrences or items meeting a condition\n\n"
           "Question: " +
           question + "\n\nAnswer with the type name only.";
}

/// Backend-assisted classification; any unparseable label falls back to the
/// keyword rules.
inline QType classify_qtype(const std::string& question, Backend* backend = nullptr) {
    if (backend) {
        try {
            ChatRequest req;
            req.messages = {text_message(Role::User, classifier_prompt(question))};
            ChatResponse resp = backend->complete(req);
            if (!resp.is_tool_call()) {
                std::string reply = to_lower(trim(resp.text()));
                for (QType q : {QType::ReadValue, QType::FindExtreme, QType::FindFirst,
                                QType::ReverseRead, QType::Compare, QType::Frequency})
                    if (reply.find(qtype_name(q)) != std::string::npos) return q;
            }
        } catch (const std::exception&) {
            // fall through to keyword mode
        }
    }
    return classify_qtype_keyword(question);
}

struct RunReport {
    std::string method;
    std::map<QType, double> per_bucket_accuracy;  // empty buckets omitted
    double overall_accuracy = 0.0;
    double avg_peak_tokens = 0.0;
    int examples = 0;
    int correct = 0;

    nlohmann::json to_json() const {
        nlohmann::json buckets = nlohmann::json::object();
        for (const auto& [q, acc] : per_bucket_accuracy) buckets[qtype_name(q)] = acc;
        return {{"method", method},
                {"per_bucket_accuracy", buckets},
                {"overall_accuracy", overall_accuracy},
                {"avg_peak_tokens", avg_peak_tokens},
                {"examples", examples},
                {"correct", correct}};
    }
};

/// Overall and per-bucket accuracies plus the average per-example peak token
/// count. Buckets with no scored examples are omitted, not reported as 0.
inline RunReport aggregate(const std::vector<EpisodeMetrics>& rows) {
    RunReport rep;
    if (!rows.empty()) rep.method = rows.front().method;
    std::map<QType, std::pair<int, int>> buckets;  // correct / total
    double peak_sum = 0.0;
    for (const auto& r : rows) {
        ++rep.examples;
        if (r.correct) ++rep.correct;
        peak_sum += static_cast<double>(r.peak_tokens);
        if (auto q = qtype_from(r.qtype)) {
            auto& b = buckets[*q];
            ++b.second;
            if (r.correct) ++b.first;
        }
    }
    if (rep.examples > 0) {
        rep.overall_accuracy = static_cast<double>(rep.correct) / rep.examples;
        rep.avg_peak_tokens = peak_sum / rep.examples;
    }
    for (const auto& [q, b] : buckets)
        rep.per_bucket_accuracy[q] = static_cast<double>(b.first) / b.second;
    return rep;
}

/// Aligned text table with the question-type columns and the average peak
/// token count per method.
inline std::string render_report_table(const std::vector<RunReport>& reports) {
    const std::vector<std::pair<std::string, std::optional<QType>>> columns = {
        {"All", std::nullopt},
        {"Extr", QType::FindExtreme},
        {"First", QType::FindFirst},
        {"Read", QType::ReadValue},
        {"RevR", QType::ReverseRead},
        {"Comp", QType::Compare},
        {"Freq", QType::Frequency},
    };

    auto pct = [](double v) {
        std::ostringstream os;
        os.setf(std::ios::fixed);
        os.precision(1);
        os << v * 100.0;
        return os.str();
    };

    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header = {"Method"};
    for (const auto& [name, _] : columns) header.push_back(name);
    header.push_back("Peak Tok #");
    grid.push_back(header);

    for (const auto& rep : reports) {
        std::vector<std::string> row = {rep.method};
        for (const auto& [_, q] : columns) {
            if (!q) {
                row.push_back(pct(rep.overall_accuracy));
            } else if (auto it = rep.per_bucket_accuracy.find(*q);
                       it != rep.per_bucket_accuracy.end()) {
                row.push_back(pct(it->second));
            } else {
                row.push_back("-");
            }
        }
        std::ostringstream peak;
        peak.setf(std::ios::fixed);
        peak.precision(2);
        peak << rep.avg_peak_tokens;
        row.push_back(peak.str());
        grid.push_back(row);
    }

    std::vector<size_t> widths(grid[0].size(), 0);
    for (const auto& row : grid)
        for (size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());

    std::string out;
    for (size_t r = 0; r < grid.size(); ++r) {
        for (size_t i = 0; i < grid[r].size(); ++i) {
            std::string cell = grid[r][i];
            cell.resize(widths[i], ' ');
            out += cell;
            if (i + 1 < grid[r].size()) out += "  ";
        }
        out += "\n";
        if (r == 0) {
            for (size_t i = 0; i < widths.size(); ++i) {
                out += std::string(widths[i], '-');
                if (i + 1 < widths.size()) out += "  ";
            }
            out += "\n";
        }
    }
    return out;
}

}  // namespace hierva
