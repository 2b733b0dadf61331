#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <hierva/skills.hpp>

using namespace hierva;
namespace fs = std::filesystem;

namespace {

const std::string kAssetsSkills = std::string(HIERVA_ASSETS_DIR) + "/skills";

struct TempSkillDir {
    fs::path dir;
    TempSkillDir() {
        dir = fs::temp_directory_path() /
              ("hierva_skills_" + std::to_string(::getpid()) + "_" +
               std::to_string(counter()++));
        fs::create_directories(dir);
    }
    ~TempSkillDir() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    void write(const std::string& name, const std::string& content) {
        std::ofstream f(dir / name);
        f << content;
    }
    static int& counter() {
        static int n = 0;
        return n;
    }
};

TaskSpec plain_task(const std::string& instruction = "Read the value.") {
    TaskSpec t;
    t.worker_id = 1;
    t.instruction = instruction;
    return t;
}

}  // namespace

TEST_CASE("bundled assets load exactly the five paper skills") {
    SkillLibrary lib = load_library(kAssetsSkills);
    CHECK(lib.size() == 5);
    for (const char* name : {"ReadValue", "FindExtremum", "CompareValues", "ComputeAggregate",
                             "ComputeRatioDelta"})
        CHECK(lib.contains(name));
    CHECK(lib.at("ReadValue").hook == std::optional<std::string>("normalize_coordinates"));
    CHECK_FALSE(lib.at("FindExtremum").hook.has_value());
}

TEST_CASE("duplicate skill names are rejected") {
    TempSkillDir tmp;
    tmp.write("a.md", "---\nname: ReadValue\ndescription: one\n---\nbody a\n");
    tmp.write("b.md", "---\nname: ReadValue\ndescription: two\n---\nbody b\n");
    CHECK_THROWS_MATCHES(load_library(tmp.dir.string()), SkillLoadError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("duplicate")));
}

TEST_CASE("unknown hooks are rejected at load time") {
    TempSkillDir tmp;
    tmp.write("a.md", "---\nname: X\ndescription: d\nhook: no_such_hook\n---\nbody\n");
    try {
        load_library(tmp.dir.string());
        FAIL("expected SkillLoadError");
    } catch (const SkillLoadError& e) {
        CHECK(e.kind == SkillLoadError::Kind::UnknownHook);
    }
}

TEST_CASE("malformed front matter is rejected") {
    TempSkillDir tmp;
    SECTION("no fence") { tmp.write("a.md", "name: X\ndescription: d\nbody\n"); }
    SECTION("unclosed fence") { tmp.write("a.md", "---\nname: X\ndescription: d\nbody\n"); }
    SECTION("missing name") { tmp.write("a.md", "---\ndescription: d\n---\nbody\n"); }
    SECTION("empty body") { tmp.write("a.md", "---\nname: X\ndescription: d\n---\n  \n"); }
    try {
        load_library(tmp.dir.string());
        FAIL("expected SkillLoadError");
    } catch (const SkillLoadError& e) {
        CHECK(e.kind == SkillLoadError::Kind::MalformedFrontMatter);
    }
}

TEST_CASE("missing directory is its own error") {
    try {
        load_library("/nonexistent/skill/dir");
        FAIL("expected SkillLoadError");
    } catch (const SkillLoadError& e) {
        CHECK(e.kind == SkillLoadError::Kind::MissingDirectory);
    }
}

TEST_CASE("library load is order independent") {
    TempSkillDir forward, backward;
    std::vector<std::pair<std::string, std::string>> skills = {
        {"Alpha", "body one"}, {"Beta", "body two"}, {"Gamma", "body three"}};
    for (size_t i = 0; i < skills.size(); ++i) {
        std::string content = "---\nname: " + skills[i].first +
                              "\ndescription: d\n---\n" + skills[i].second + "\n";
        forward.write(std::to_string(i) + ".md", content);
        backward.write(std::to_string(9 - i) + ".md", content);
    }
    SkillLibrary a = load_library(forward.dir.string());
    SkillLibrary b = load_library(backward.dir.string());
    CHECK(a.names() == b.names());
    CHECK(inject_skills(a.names(), a) == inject_skills(b.names(), b));
}

TEST_CASE("injection selects exactly the requested bodies, name-sorted") {
    SkillLibrary lib = load_library(kAssetsSkills);

    CHECK(inject_skills({}, lib).empty());

    std::string one = inject_skills({"ReadValue"}, lib);
    CHECK(one.find(lib.at("ReadValue").body) != std::string::npos);
    CHECK(one.find(lib.at("CompareValues").body) == std::string::npos);

    std::string two = inject_skills({"ReadValue", "CompareValues"}, lib);
    size_t compare_at = two.find("### CompareValues");
    size_t read_at = two.find("### ReadValue");
    REQUIRE(compare_at != std::string::npos);
    REQUIRE(read_at != std::string::npos);
    CHECK(compare_at < read_at);  // name-sorted
    CHECK(two.find("### FindExtremum") == std::string::npos);

    // Byte-identical determinism.
    CHECK(two == inject_skills({"CompareValues", "ReadValue"}, lib));
}

TEST_CASE("resolve_hook: absent without declaration, callable with one") {
    SkillLibrary lib = load_library(kAssetsSkills);
    CHECK_FALSE(resolve_hook(lib.at("CompareValues")).has_value());
    auto hook = resolve_hook(lib.at("ReadValue"));
    REQUIRE(hook.has_value());
    CHECK((*hook)("It reads 1,250.", plain_task()) == "It reads 1250.");
}

TEST_CASE("normalize_coordinates: thousands separators and decimal commas") {
    auto t = plain_task();
    CHECK(normalize_coordinates_hook("1,234.5", t) == "1234.5");
    CHECK(normalize_coordinates_hook("1,234,567", t) == "1234567");
    CHECK(normalize_coordinates_hook("The value is 12,5 units.", t) ==
          "The value is 12.5 units.");
    CHECK(normalize_coordinates_hook("lists 1, 2, and 3 stay", t) == "lists 1, 2, and 3 stay");
    CHECK(normalize_coordinates_hook("pair (3,14)", t) == "pair (3.14)");
    // Idempotent on already-normal text.
    std::string s = "The value is 1234.5.";
    CHECK(normalize_coordinates_hook(s, t) == s);
}

TEST_CASE("normalize_coordinates: percents become fractions only when asked") {
    auto plain = plain_task("Read the growth rate.");
    CHECK(normalize_coordinates_hook("42%", plain) == "42%");

    auto fraction = plain_task("Report the growth rate as a fraction.");
    CHECK(normalize_coordinates_hook("42%", fraction) == "0.42");
    CHECK(normalize_coordinates_hook("The share is 5%.", fraction) == "The share is 0.05.");
    CHECK(normalize_coordinates_hook("12.5%", fraction) == "0.125");
}
