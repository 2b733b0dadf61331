#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <hierva/synthetic.hpp>

using namespace hierva;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path dir;
    explicit TempDir(const std::string& tag) {
        dir = fs::temp_directory_path() /
              ("hierva_syn_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
};

std::vector<uint8_t> slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    return std::vector<uint8_t>((std::istreambuf_iterator<char>(f)),
                                std::istreambuf_iterator<char>());
}

std::string quoted_after(const std::string& text, const std::string& marker) {
    size_t at = text.find(marker);
    REQUIRE(at != std::string::npos);
    at += marker.size();
    size_t end = text.find('\'', at);
    REQUIRE(end != std::string::npos);
    return text.substr(at, end - at);
}

const SeriesData& series_by_name(const PlotData& plot, const std::string& name) {
    for (const auto& s : plot.series)
        if (s.name == name) return s;
    FAIL("series not found: " << name);
    return plot.series[0];
}

/// Independent gold recomputation straight from the returned data table.
std::string recompute_gold(const SyntheticOutput& out) {
    const PlotData& t = out.target;
    const std::string& q = out.question;
    switch (out.template_kind) {
        case TemplateKind::LargestSlice: {
            size_t best = 0;
            for (size_t i = 1; i < t.series.size(); ++i)
                if (t.series[i].values[0] > t.series[best].values[0]) best = i;
            return t.series[best].name;
        }
        case TemplateKind::Frequency: {
            std::string name = quoted_after(q, "series '");
            size_t above = q.find("above ");
            REQUIRE(above != std::string::npos);
            double threshold = std::stod(q.substr(above + 6));
            int count = 0;
            for (double v : series_by_name(t, name).values)
                if (v > threshold) ++count;
            return std::to_string(count);
        }
        case TemplateKind::Extreme: {
            std::string name = quoted_after(q, "series '");
            const auto& s = series_by_name(t, name);
            size_t best = 0;
            for (size_t i = 1; i < s.values.size(); ++i)
                if (s.values[i] > s.values[best]) best = i;
            if (t.type == ChartType::Bar) return t.x_labels[best];
            return synth_detail::format_number(s.values[best]);
        }
        case TemplateKind::Compare: {
            std::string a = quoted_after(q, ": '");
            size_t or_at = q.find("' or '");
            REQUIRE(or_at != std::string::npos);
            std::string b = quoted_after(q.substr(or_at), "or '");
            size_t k;
            if (t.type == ChartType::Bar) {
                std::string cat = quoted_after(q, "category '");
                k = std::find(t.x_labels.begin(), t.x_labels.end(), cat) - t.x_labels.begin();
            } else {
                size_t x_at = q.find("at x=");
                REQUIRE(x_at != std::string::npos);
                double x = std::stod(q.substr(x_at + 5));
                k = std::find(t.x_values.begin(), t.x_values.end(), x) - t.x_values.begin();
            }
            const auto& sa = series_by_name(t, a);
            const auto& sb = series_by_name(t, b);
            return sa.values[k] > sb.values[k] ? a : b;
        }
        case TemplateKind::ValueRead: {
            std::string name = quoted_after(q, "series '");
            const auto& s = series_by_name(t, name);
            size_t k;
            if (t.type == ChartType::Bar) {
                std::string cat = quoted_after(q, "category '");
                k = std::find(t.x_labels.begin(), t.x_labels.end(), cat) - t.x_labels.begin();
            } else {
                size_t x_at = q.find("at x=");
                REQUIRE(x_at != std::string::npos);
                double x = std::stod(q.substr(x_at + 5));
                k = std::find(t.x_values.begin(), t.x_values.end(), x) - t.x_values.begin();
            }
            return synth_detail::format_number(s.values[k]);
        }
    }
    return "";
}

SyntheticSpec spec_for(uint64_t seed) {
    SyntheticSpec spec;
    spec.seed = seed;
    spec.chart_type = static_cast<ChartType>(seed % 4);
    spec.series_count = 2 + static_cast<int>(seed % 5);
    spec.target_position_seed = seed * 31 + 7;
    return spec;
}

}  // namespace

TEST_CASE("each spec yields one record per subplot count, sharing question and gold") {
    TempDir tmp("share");
    auto out = generate_synthetic(spec_for(3), tmp.dir.string());
    REQUIRE(out.records.size() == 4);
    for (const auto& r : out.records) {
        CHECK(r.question == out.records[0].question);
        CHECK(r.gold_answer == out.records[0].gold_answer);
        CHECK(fs::exists(r.image_path));
    }
    CHECK(out.records[0].subplot_count == 1);
    CHECK(out.records[3].subplot_count == 6);
    CHECK(out.records[0].id == "syn3-sp1");
}

TEST_CASE("regeneration under the same seed is byte-identical") {
    TempDir a("rega"), b("regb");
    auto out_a = generate_synthetic(spec_for(11), a.dir.string());
    auto out_b = generate_synthetic(spec_for(11), b.dir.string());
    REQUIRE(out_a.records.size() == out_b.records.size());
    CHECK(out_a.question == out_b.question);
    CHECK(out_a.gold_answer == out_b.gold_answer);
    for (size_t i = 0; i < out_a.records.size(); ++i) {
        CHECK(slurp(out_a.records[i].image_path) == slurp(out_b.records[i].image_path));
    }
}

TEST_CASE("different seeds give different images") {
    TempDir tmp("diff");
    auto a = generate_synthetic(spec_for(20), tmp.dir.string());
    auto b = generate_synthetic(spec_for(21), tmp.dir.string());
    CHECK(slurp(a.records[0].image_path) != slurp(b.records[0].image_path));
}

TEST_CASE("gold answers equal the generator's ground-truth data table") {
    TempDir tmp("gold");
    for (uint64_t seed = 1; seed <= 16; ++seed) {
        auto out = generate_synthetic(spec_for(seed), tmp.dir.string());
        INFO("seed " << seed << " question: " << out.question);
        CHECK(out.gold_answer == recompute_gold(out));
    }
}

TEST_CASE("grid layouts match the subplot counts") {
    TempDir tmp("grid");
    auto out = generate_synthetic(spec_for(5), tmp.dir.string());
    std::map<int, std::pair<int, int>> expected = {
        {1, {480, 360}}, {2, {960, 360}}, {4, {960, 720}}, {6, {1440, 720}}};
    for (const auto& r : out.records) {
        RasterImage img = load_png(r.image_path);
        auto [w, h] = expected.at(*r.subplot_count);
        CHECK(img.width == w);
        CHECK(img.height == h);
    }
}

TEST_CASE("svg markup is emitted alongside each png") {
    TempDir tmp("svg");
    auto out = generate_synthetic(spec_for(7), tmp.dir.string());
    for (const auto& r : out.records) {
        fs::path svg = fs::path(r.image_path).replace_extension(".svg");
        REQUIRE(fs::exists(svg));
        std::ifstream f(svg);
        std::string content((std::istreambuf_iterator<char>(f)),
                            std::istreambuf_iterator<char>());
        CHECK(content.rfind("<svg", 0) == 0);
        CHECK(content.find(out.target.title) != std::string::npos);
    }
}

TEST_CASE("generated records load back through the dataset schema") {
    TempDir tmp("roundtrip");
    auto out = generate_synthetic(spec_for(9), tmp.dir.string());
    fs::path jsonl = tmp.dir / "dataset.jsonl";
    write_dataset_jsonl(out.records, jsonl.string());
    auto records = load_dataset(jsonl.string());
    REQUIRE(records.size() == out.records.size());
    CHECK(records[0].question == out.question);
    CHECK(records[0].gold_answer == out.gold_answer);
    CHECK(records[0].qtype == out.records[0].qtype);
}

TEST_CASE("bad specs are rejected") {
    TempDir tmp("bad");
    SyntheticSpec spec = spec_for(1);
    spec.series_count = 1;
    CHECK_THROWS_AS(generate_synthetic(spec, tmp.dir.string()), RenderError);

    SyntheticSpec bad_sp = spec_for(1);
    bad_sp.subplot_counts = {3};
    CHECK_THROWS_AS(generate_synthetic(bad_sp, tmp.dir.string()), RenderError);
}

TEST_CASE("target placement varies with the position seed") {
    // With sp=4 over several position seeds, the target should not always
    // land in cell 0; detect by pixel differences at fixed cells.
    TempDir tmp("pos");
    std::set<std::vector<uint8_t>> first_cells;
    for (uint64_t pos = 0; pos < 4; ++pos) {
        SyntheticSpec spec = spec_for(13);
        spec.subplot_counts = {4};
        spec.target_position_seed = pos;
        auto out = generate_synthetic(spec, (tmp.dir / std::to_string(pos)).string());
        RasterImage img = load_png(out.records[0].image_path);
        RasterImage cell = crop_and_resize(img, BBox{0, 0, 480, 360}, 0);
        first_cells.insert(cell.rgba);
    }
    CHECK(first_cells.size() >= 2);
}
