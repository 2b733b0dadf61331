#include <catch2/catch_amalgamated.hpp>

#include <hierva/backend.hpp>
#include <hierva/rng.hpp>
#include <hierva/scripted_backend.hpp>
#include <hierva/tools.hpp>

using namespace hierva;

namespace {

Message with_image(Role role, const std::string& text, int w, int h) {
    Message m;
    m.role = role;
    m.parts.push_back(TextPart{text});
    m.parts.push_back(ImagePart{ImageRef{0}, w, h, nullptr});
    return m;
}

}  // namespace

TEST_CASE("token estimator arithmetic") {
    CHECK(count_tokens({}) == 0);

    std::string text(400, 'a');
    CHECK(count_tokens({text_message(Role::User, text)}) == 100);  // ceil(400/4)

    CHECK(count_tokens({with_image(Role::User, "", 560, 280)}) == 64 + 20 * 10);

    // Mixed message sums parts.
    CHECK(count_tokens({with_image(Role::User, text, 560, 280)}) == 100 + 264);

    // Partial patches round up.
    CHECK(count_image_tokens(29, 29) == 64 + 2 * 2);
    CHECK(count_image_tokens(1, 1) == 64 + 1);
}

TEST_CASE("token estimate is monotone under message append") {
    Rng rng(555);
    std::vector<Message> msgs;
    long prev = 0;
    for (int i = 0; i < 40; ++i) {
        if (rng.uniform() < 0.7) {
            std::string t(rng.uniform_int(0, 300), 'x');
            msgs.push_back(text_message(Role::User, t));
        } else {
            msgs.push_back(with_image(Role::User, "img",
                                      static_cast<int>(rng.uniform_int(1, 900)),
                                      static_cast<int>(rng.uniform_int(1, 900))));
        }
        long now = count_tokens(msgs);
        CHECK(now >= prev);
        prev = now;
    }
}

TEST_CASE("record_peak keeps a running maximum") {
    ContextWindow w("test");
    record_peak(w, {700, 1});
    record_peak(w, {1900, 1});
    record_peak(w, {1200, 1});
    CHECK(w.token_high_water() == 1900);

    ContextWindow single("one");
    record_peak(single, {702, 0});
    CHECK(single.token_high_water() == 702);
}

TEST_CASE("episode peak is the max over all windows") {
    ContextWindow manager("manager"), w1("worker/1"), w2("worker/2");
    record_peak(manager, {900, 0});
    record_peak(w1, {400, 0});
    record_peak(w2, {1100, 0});
    long episode_peak = std::max({manager.token_high_water(), w1.token_high_water(),
                                  w2.token_high_water()});
    CHECK(episode_peak == 1100);
}

TEST_CASE("scripted backend: first matching rule wins") {
    ScriptedBackend b;
    b.add_rule({"step by step", {}, {}, ScriptedBackend::text_response("first")});
    b.add_rule({"step", {}, {}, ScriptedBackend::text_response("second")});

    ChatRequest req;
    req.messages = {text_message(Role::User, "Let's reason step by step.")};
    CHECK(b.complete(req).text() == "first");
}

TEST_CASE("scripted backend: message count gates a rule") {
    ScriptedBackend b;
    b.add_rule({"next task", {}, 2, ScriptedBackend::text_response("task one")});
    b.add_rule({"next task", {}, 4, ScriptedBackend::text_response("task two")});

    ChatRequest req;
    req.messages = {text_message(Role::User, "context"),
                    text_message(Role::User, "What is the next task?")};
    CHECK(b.complete(req).text() == "task one");

    req.messages.push_back(text_message(Role::Assistant, "task one"));
    req.messages.push_back(text_message(Role::User, "What is the next task?"));
    CHECK(b.complete(req).text() == "task two");
}

TEST_CASE("scripted backend: regex patterns, defaults, exhaustion") {
    ScriptedBackend b;
    b.add_rule({"", std::string("median of \\(b\\)"), {},
                ScriptedBackend::text_response("The median is 4.2.")});

    ChatRequest req;
    req.messages = {text_message(Role::User, "Read the median of (b) now")};
    CHECK(b.complete(req).text() == "The median is 4.2.");

    req.messages = {text_message(Role::User, "something else")};
    CHECK_THROWS_AS(b.complete(req), ScriptExhausted);

    b.set_default(ScriptedBackend::text_response("fallback"));
    CHECK(b.complete(req).text() == "fallback");
}

TEST_CASE("scripted backend returns tool calls with usage accounting") {
    ScriptedBackend b;
    b.add_rule({"zoom", {}, {},
                ScriptedBackend::tool_call_response(
                    "image_zoom_in_tool",
                    {{"bbox_2d", {10, 20, 60, 80}}, {"img_idx", 0}, {"label", "axis"}})});

    ChatRequest req;
    req.messages = {text_message(Role::System, "sys"),
                    text_message(Role::User, "Please zoom in")};
    req.tool_schemas = {zoom_tool_schema()};
    auto resp = b.complete(req);
    REQUIRE(resp.is_tool_call());
    CHECK(resp.tool_call().name == "image_zoom_in_tool");
    CHECK(resp.tool_call().arguments["bbox_2d"].size() == 4);
    CHECK(resp.usage.prompt_tokens == count_tokens(req.messages));
    CHECK(resp.usage.completion_tokens > 0);
}

TEST_CASE("scripted determinism: identical requests, identical responses") {
    ScriptedBackend b;
    b.add_rule({"q", {}, {}, ScriptedBackend::text_response("a")});
    ChatRequest req;
    req.messages = {text_message(Role::User, "q")};
    auto r1 = b.complete(req);
    auto r2 = b.complete(req);
    CHECK(r1.text() == r2.text());
    CHECK(r1.usage.prompt_tokens == r2.usage.prompt_tokens);
}

TEST_CASE("scripts load from JSON documents") {
    nlohmann::json doc = {
        {"rules",
         {{{"match", "plan"}, {"response", {{"kind", "text"}, {"text", "the plan"}}}},
          {{"match", "zoom"},
           {"count", 2},
           {"response",
            {{"kind", "tool_call"},
             {"name", "image_zoom_in_tool"},
             {"arguments", {{"bbox_2d", {0, 0, 5, 5}}, {"img_idx", 0}}}}}}}},
        {"default", {{"kind", "text"}, {"text", "dunno"}}},
    };
    ScriptedBackend b = ScriptedBackend::from_json(doc);

    ChatRequest req;
    req.messages = {text_message(Role::User, "make a plan")};
    CHECK(b.complete(req).text() == "the plan");

    req.messages = {text_message(Role::System, "s"), text_message(Role::User, "zoom here")};
    req.tool_schemas = {zoom_tool_schema()};
    CHECK(b.complete(req).is_tool_call());

    req.messages = {text_message(Role::User, "unmatched")};
    req.tool_schemas.clear();
    CHECK(b.complete(req).text() == "dunno");
}

TEST_CASE("requests with tool schemas demand a leading system message") {
    ScriptedBackend b;
    b.set_default(ScriptedBackend::text_response("x"));
    ChatRequest req;
    req.messages = {text_message(Role::User, "hi")};
    req.tool_schemas = {zoom_tool_schema()};
    CHECK_THROWS_AS(b.complete(req), std::invalid_argument);

    ChatRequest empty;
    CHECK_THROWS_AS(b.complete(empty), std::invalid_argument);
}
