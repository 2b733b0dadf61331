#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hierva/dataset.hpp"
#include "hierva/png.hpp"
#include "hierva/rng.hpp"
#include "hierva/vecchart.hpp"

namespace hierva {

enum class ChartType { Line, Bar, Scatter, Pie };

inline const char* chart_type_name(ChartType t) {
    switch (t) {
        case ChartType::Line: return "line";
        case ChartType::Bar: return "bar";
        case ChartType::Scatter: return "scatter";
        case ChartType::Pie: return "pie";
    }
    return "?";
}

/// Controlled composite-chart spec: one seeded target plot and a templated
/// question, rendered at each requested subplot count with the target placed
/// by `target_position_seed` and the remaining cells filled with seeded
/// distractors. The gold answer comes from the target's data table and is
/// identical across subplot variants.
struct SyntheticSpec {
    uint64_t seed = 0;
    ChartType chart_type = ChartType::Line;
    int series_count = 3;                     // [2, 10]
    std::vector<int> subplot_counts = {1, 2, 4, 6};
    uint64_t target_position_seed = 0;
};

struct SeriesData {
    std::string name;
    std::vector<double> values;
    Rgba color;
};

struct PlotData {
    ChartType type = ChartType::Line;
    std::string title;
    std::vector<std::string> x_labels;  // bar categories / pie slice labels
    std::vector<double> x_values;       // line & scatter x coordinates
    std::vector<SeriesData> series;
};

enum class TemplateKind { ValueRead, Extreme, Compare, Frequency, LargestSlice };

struct SyntheticOutput {
    std::vector<QARecord> records;  // one per subplot count, shared question/gold
    PlotData target;                // ground-truth data table
    TemplateKind template_kind = TemplateKind::ValueRead;
    std::string question;
    std::string gold_answer;
};

struct RenderError : std::runtime_error {
    explicit RenderError(const std::string& what) : std::runtime_error(what) {}
};

namespace synth_detail {

inline const std::vector<Rgba>& palette() {
    static const std::vector<Rgba> colors = {
        {214, 69, 65, 255},  {31, 119, 180, 255}, {44, 160, 44, 255},  {255, 127, 14, 255},
        {148, 103, 189, 255}, {140, 86, 75, 255},  {23, 190, 207, 255}, {188, 189, 34, 255},
        {227, 119, 194, 255}, {127, 127, 127, 255},
    };
    return colors;
}

inline const std::vector<std::string>& series_names() {
    static const std::vector<std::string> names = {
        "alpha", "beta", "gamma", "delta", "epsilon",
        "zeta",  "eta",  "theta", "iota",  "kappa",
    };
    return names;
}

inline const std::vector<std::string>& category_pool() {
    static const std::vector<std::string> cats = {
        "North", "South", "East", "West", "Center", "Coast", "Inland", "Ridge",
    };
    return cats;
}

inline double grid_value(Rng& rng) { return rng.uniform_int(50, 950) / 10.0; }

inline std::string format_number(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

inline PlotData make_plot(Rng& rng, ChartType type, int series_count,
                          const std::string& title) {
    PlotData plot;
    plot.type = type;
    plot.title = title;
    if (type == ChartType::Bar) {
        int cats = static_cast<int>(rng.uniform_int(4, 6));
        for (int i = 0; i < cats; ++i) plot.x_labels.push_back(category_pool()[i]);
    } else if (type == ChartType::Pie) {
        series_count = std::min(series_count, 8);
    } else {
        int points = static_cast<int>(rng.uniform_int(6, 9));
        for (int i = 1; i <= points; ++i) plot.x_values.push_back(i);
    }

    int columns = type == ChartType::Bar      ? static_cast<int>(plot.x_labels.size())
                  : type == ChartType::Pie    ? 1
                                              : static_cast<int>(plot.x_values.size());
    for (int s = 0; s < series_count; ++s) {
        SeriesData series;
        series.name = series_names()[s];
        series.color = palette()[s];
        for (int i = 0; i < columns; ++i) series.values.push_back(grid_value(rng));
        plot.series.push_back(std::move(series));
    }
    if (type == ChartType::Pie) {
        plot.x_labels.clear();
        for (const auto& s : plot.series) plot.x_labels.push_back(s.name);
    }
    return plot;
}

// ---- question templates over the data table ----

struct TemplatedQuestion {
    TemplateKind kind;
    std::string question;
    std::string gold;
    AnswerKind answer_kind;
    QType qtype;
};

inline std::string titled(const PlotData& plot, const std::string& rest) {
    return "In the chart titled '" + plot.title + "', " + rest;
}

inline TemplatedQuestion build_question(Rng& rng, PlotData& plot) {
    switch (plot.type) {
        case ChartType::Pie: {
            // Ensure a unique largest slice with a clear margin.
            size_t best = 0;
            for (size_t i = 1; i < plot.series.size(); ++i)
                if (plot.series[i].values[0] > plot.series[best].values[0]) best = i;
            for (size_t i = 0; i < plot.series.size(); ++i) {
                if (i != best &&
                    plot.series[best].values[0] - plot.series[i].values[0] < 8.0)
                    plot.series[i].values[0] =
                        std::max(5.0, plot.series[best].values[0] - 8.0 -
                                          static_cast<double>(i));
            }
            return {TemplateKind::LargestSlice,
                    titled(plot, "which slice is the largest?"),
                    plot.series[best].name, AnswerKind::Categorical, QType::FindExtreme};
        }
        case ChartType::Scatter: {
            if (rng.uniform() < 0.5) {
                const auto& s = plot.series[rng.uniform_int(0, plot.series.size() - 1)];
                // Off-grid threshold so no point ever sits exactly on it.
                double threshold = rng.uniform_int(300, 700) / 10.0 + 0.05;
                int count = 0;
                for (double v : s.values)
                    if (v > threshold) ++count;
                std::ostringstream t;
                t.setf(std::ios::fixed);
                t.precision(2);
                t << threshold;
                return {TemplateKind::Frequency,
                        titled(plot, "how many points of series '" + s.name +
                                         "' have a value above " + t.str() + "?"),
                        std::to_string(count), AnswerKind::Numeric, QType::Frequency};
            }
            break;  // fall through to ValueRead below
        }
        case ChartType::Line:
        case ChartType::Bar: {
            double pick = rng.uniform();
            if (pick < 0.34) break;  // ValueRead below
            if (pick < 0.67) {
                // Extreme with a unique argmax.
                auto& s = plot.series[rng.uniform_int(0, plot.series.size() - 1)];
                size_t best = 0;
                for (size_t i = 1; i < s.values.size(); ++i)
                    if (s.values[i] > s.values[best]) best = i;
                for (size_t i = 0; i < s.values.size(); ++i)
                    if (i != best && s.values[best] - s.values[i] < 6.0)
                        s.values[i] = std::max(5.0, s.values[best] - 6.0 -
                                                        0.7 * static_cast<double>(i));
                if (plot.type == ChartType::Bar) {
                    return {TemplateKind::Extreme,
                            titled(plot, "which category has the largest value for series '" +
                                             s.name + "'?"),
                            plot.x_labels[best], AnswerKind::Categorical,
                            QType::FindExtreme};
                }
                return {TemplateKind::Extreme,
                        titled(plot, "what is the highest value of series '" + s.name + "'?"),
                        format_number(s.values[best]), AnswerKind::Numeric,
                        QType::FindExtreme};
            }
            // Compare two series at one slot, forced apart for an
            // unambiguous winner.
            size_t a = static_cast<size_t>(rng.uniform_int(0, plot.series.size() - 1));
            size_t b = (a + 1) % plot.series.size();
            size_t columns = plot.series[a].values.size();
            size_t k = static_cast<size_t>(rng.uniform_int(0, columns - 1));
            double& va = plot.series[a].values[k];
            double& vb = plot.series[b].values[k];
            if (std::abs(va - vb) < 10.0) vb = va >= vb ? std::max(5.0, va - 12.0)
                                                        : std::min(95.0, va + 12.0);
            const std::string& winner =
                va > vb ? plot.series[a].name : plot.series[b].name;
            std::string slot = plot.type == ChartType::Bar
                                   ? "for category '" + plot.x_labels[k] + "'"
                                   : "at x=" + format_number(plot.x_values[k]);
            return {TemplateKind::Compare,
                    titled(plot, "which series has the higher value " + slot + ": '" +
                                     plot.series[a].name + "' or '" + plot.series[b].name +
                                     "'?"),
                    winner, AnswerKind::Categorical, QType::Compare};
        }
    }

    // Default: read one datum.
    const auto& s = plot.series[rng.uniform_int(0, plot.series.size() - 1)];
    size_t k = static_cast<size_t>(rng.uniform_int(0, s.values.size() - 1));
    std::string slot = plot.type == ChartType::Bar
                           ? "for category '" + plot.x_labels[k] + "'"
                           : "at x=" + format_number(plot.x_values[k]);
    return {TemplateKind::ValueRead,
            titled(plot, "what is the value of series '" + s.name + "' " + slot + "?"),
            format_number(s.values[k]), AnswerKind::Numeric, QType::ReadValue};
}

// ---- rendering ----

inline void render_plot(vec::Scene& scene, const PlotData& plot, double ox, double oy,
                        double w, double h) {
    const Rgba axis{40, 40, 40, 255};
    const Rgba grid{220, 220, 220, 255};
    const Rgba text{30, 30, 30, 255};
    const double left = 52, right = 14, top = 30, bottom = 32;
    double px = ox + left, py = oy + top;
    double pw = w - left - right, ph = h - top - bottom;

    scene.add(vec::StrokeRect{ox + 1, oy + 1, w - 2, h - 2, {170, 170, 170, 255}, 1});
    scene.add(vec::Text{ox + w / 2, oy + 8, 14, text, plot.title, vec::Anchor::Center});

    if (plot.type == ChartType::Pie) {
        double cx = px + pw * 0.42, cy = py + ph / 2;
        double r = std::min(pw, ph) * 0.42;
        double total = 0;
        for (const auto& s : plot.series) total += s.values[0];
        double angle = 0;
        for (const auto& s : plot.series) {
            double span = 2 * M_PI * (s.values[0] / total);
            scene.add(vec::Wedge{cx, cy, r, angle, angle + span, s.color});
            angle += span;
        }
    } else {
        // y axis 0..100 with gridlines.
        for (int tick = 0; tick <= 100; tick += 25) {
            double y = py + ph * (1.0 - tick / 100.0);
            scene.add(vec::Line{px, y, px + pw, y, grid, 1});
            scene.add(vec::Text{px - 6, y - 4, 7, text, std::to_string(tick),
                                vec::Anchor::Right});
        }
        scene.add(vec::Line{px, py, px, py + ph, axis, 1.5});
        scene.add(vec::Line{px, py + ph, px + pw, py + ph, axis, 1.5});

        auto y_of = [&](double v) { return py + ph * (1.0 - v / 100.0); };

        if (plot.type == ChartType::Bar) {
            size_t cats = plot.x_labels.size();
            double group = pw / cats;
            double bar_w = group * 0.8 / plot.series.size();
            for (size_t c = 0; c < cats; ++c) {
                for (size_t s = 0; s < plot.series.size(); ++s) {
                    double x = px + c * group + group * 0.1 + s * bar_w;
                    double y = y_of(plot.series[s].values[c]);
                    scene.add(vec::FillRect{x, y, bar_w - 1, py + ph - y,
                                            plot.series[s].color});
                }
                scene.add(vec::Text{px + c * group + group / 2, py + ph + 6, 7, text,
                                    plot.x_labels[c], vec::Anchor::Center});
            }
        } else {
            double xmax = plot.x_values.back();
            auto x_of = [&](double v) { return px + pw * (v / (xmax + 1.0)); };
            for (double v : plot.x_values) {
                scene.add(vec::Text{x_of(v), py + ph + 6, 7, text, format_number(v),
                                    vec::Anchor::Center});
            }
            for (const auto& s : plot.series) {
                if (plot.type == ChartType::Line) {
                    vec::Polyline line;
                    line.color = s.color;
                    line.width = 2;
                    for (size_t i = 0; i < s.values.size(); ++i)
                        line.points.push_back({x_of(plot.x_values[i]), y_of(s.values[i])});
                    scene.add(line);
                    for (size_t i = 0; i < s.values.size(); ++i)
                        scene.add(vec::Disk{x_of(plot.x_values[i]), y_of(s.values[i]), 2.5,
                                            s.color});
                } else {
                    for (size_t i = 0; i < s.values.size(); ++i)
                        scene.add(vec::Disk{x_of(plot.x_values[i]), y_of(s.values[i]), 3,
                                            s.color});
                }
            }
        }
    }

    // Legend, top-right.
    double lw = 0, lh = plot.series.size() * 11.0 + 6;
    for (const auto& s : plot.series)
        lw = std::max(lw, 14.0 + text_width(s.name, 1) + 6.0);
    double lx = ox + w - right - lw - 4, ly = py + 4;
    scene.add(vec::FillRect{lx, ly, lw, lh, {255, 255, 255, 255}});
    scene.add(vec::StrokeRect{lx, ly, lw, lh, {120, 120, 120, 255}, 1});
    for (size_t s = 0; s < plot.series.size(); ++s) {
        double row = ly + 4 + s * 11.0;
        scene.add(vec::FillRect{lx + 3, row, 8, 8, plot.series[s].color});
        scene.add(vec::Text{lx + 14, row, 7, text, plot.series[s].name, vec::Anchor::Left});
    }
}

inline std::pair<int, int> grid_for(int subplots) {
    switch (subplots) {
        case 1: return {1, 1};
        case 2: return {1, 2};
        case 4: return {2, 2};
        case 6: return {2, 3};
        default: throw RenderError("unsupported subplot count " + std::to_string(subplots));
    }
}

}  // namespace synth_detail

/// Renders the composite image for one subplot count; the target plot sits
/// at `target_index`, the other cells are distractors.
inline vec::Scene compose_scene(const PlotData& target, const std::vector<PlotData>& distractors,
                                int subplots, int target_index) {
    using namespace synth_detail;
    auto [rows, cols] = grid_for(subplots);
    const int cell_w = 480, cell_h = 360;
    vec::Scene scene;
    scene.width = cols * cell_w;
    scene.height = rows * cell_h;

    int distractor_at = 0;
    for (int cell = 0; cell < subplots; ++cell) {
        int r = cell / cols, c = cell % cols;
        const PlotData& plot =
            cell == target_index ? target : distractors[distractor_at++];
        render_plot(scene, plot, c * cell_w, r * cell_h, cell_w, cell_h);
    }
    return scene;
}

/// Generates the full four-variant (or as requested) composite set for one
/// spec. Byte-identical under the same spec. Writes `syn<seed>_sp<k>.png`
/// and the matching `.svg` markup into out_dir.
inline SyntheticOutput generate_synthetic(const SyntheticSpec& spec,
                                          const std::string& out_dir) {
    using namespace synth_detail;
    namespace fs = std::filesystem;
    if (spec.series_count < 2 || spec.series_count > 10)
        throw RenderError("series_count must be in [2, 10]");
    std::error_code ec;
    fs::create_directories(out_dir, ec);

    Rng rng(spec.seed);
    SyntheticOutput out;
    std::string title = "Chart " + std::to_string(10 + spec.seed % 80);
    out.target = make_plot(rng, spec.chart_type, spec.series_count, title);
    auto templated = build_question(rng, out.target);
    out.template_kind = templated.kind;
    out.question = templated.question;
    out.gold_answer = templated.gold;

    // Distractors: independent derived streams, titles distinct from the
    // target's.
    int max_distractors = 0;
    for (int sp : spec.subplot_counts) max_distractors = std::max(max_distractors, sp - 1);
    std::vector<PlotData> distractors;
    for (int i = 0; i < max_distractors; ++i) {
        Rng drng = rng.fork(1000 + static_cast<uint64_t>(i));
        ChartType dtype = static_cast<ChartType>(drng.uniform_int(0, 3));
        int dseries = static_cast<int>(drng.uniform_int(2, 5));
        std::string dtitle = "Chart " + std::to_string(100 + (spec.seed + 7 * (i + 1)) % 80 +
                                                       (i + 1) * 100);
        distractors.push_back(make_plot(drng, dtype, dseries, dtitle));
    }

    for (int sp : spec.subplot_counts) {
        Rng pos_rng = Rng(spec.target_position_seed).fork(static_cast<uint64_t>(sp));
        int target_index = sp == 1 ? 0 : static_cast<int>(pos_rng.uniform_int(0, sp - 1));
        vec::Scene scene = compose_scene(out.target, distractors, sp, target_index);

        std::string stem = "syn" + std::to_string(spec.seed) + "_sp" + std::to_string(sp);
        fs::path png_path = fs::path(out_dir) / (stem + ".png");
        fs::path svg_path = fs::path(out_dir) / (stem + ".svg");
        RasterImage img = vec::rasterize(scene);
        save_png(img, png_path.string());
        std::ofstream svg(svg_path);
        svg << vec::emit_svg(scene);

        QARecord record;
        record.id = "syn" + std::to_string(spec.seed) + "-sp" + std::to_string(sp);
        record.image_path = png_path.string();
        record.question = out.question;
        record.gold_answer = out.gold_answer;
        record.answer_kind = templated.answer_kind;
        record.qtype = templated.qtype;
        record.subplot_count = sp;
        out.records.push_back(std::move(record));
    }
    return out;
}

/// Writes records as dataset JSONL with image paths relative to the file.
inline void write_dataset_jsonl(const std::vector<QARecord>& records,
                                const std::string& path) {
    namespace fs = std::filesystem;
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write dataset: " + path);
    fs::path base = fs::path(path).parent_path();
    for (const auto& r : records) {
        nlohmann::json j = {
            {"id", r.id},
            {"image_path", fs::relative(r.image_path, base).string()},
            {"question", r.question},
            {"gold_answer", r.gold_answer},
            {"answer_kind", answer_kind_name(r.answer_kind)},
        };
        if (r.qtype) j["qtype"] = qtype_name(*r.qtype);
        if (r.subplot_count) j["subplot_count"] = *r.subplot_count;
        f << j.dump() << "\n";
    }
}

}  // namespace hierva
