#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hierva/image.hpp"
#include "hierva/image_registry.hpp"

namespace hierva {

enum class Role { System, User, Assistant, ToolResult };

inline const char* role_name(Role r) {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
        case Role::ToolResult: return "tool";
    }
    return "?";
}

struct TextPart {
    std::string text;
    bool operator==(const TextPart&) const = default;
};

/// Image content, resolved at append time: carries the registry address plus
/// the pixels and dimensions captured when the message was built, so token
/// accounting and wire serialization need no registry access.
struct ImagePart {
    ImageRef ref;
    int width = 0;
    int height = 0;
    std::shared_ptr<const RasterImage> pixels;
};

using Part = std::variant<TextPart, ImagePart>;

inline ImagePart make_image_part(const ImageRegistry& registry, ImageRef ref) {
    auto img = registry.resolve(ref);  // throws UnresolvedRef if stale
    return ImagePart{ref, img->width, img->height, img};
}

struct Message {
    Role role = Role::User;
    std::vector<Part> parts;
    int id = 0;  // assigned by the episode runtime; unique within an episode

    // Wire plumbing for OpenAI-style tool calling: an Assistant message that
    // requested a tool carries the echoed call; a ToolResult message carries
    // the id it answers.
    std::string tool_call_id;
    std::string tool_call_name;
    std::string tool_call_arguments;  // JSON text

    std::string joined_text() const {
        std::string out;
        for (const auto& p : parts) {
            if (const auto* t = std::get_if<TextPart>(&p)) {
                if (!out.empty()) out += "\n";
                out += t->text;
            }
        }
        return out;
    }
    int image_part_count() const {
        int n = 0;
        for (const auto& p : parts)
            if (std::holds_alternative<ImagePart>(p)) ++n;
        return n;
    }
};

inline Message text_message(Role role, std::string text) {
    Message m;
    m.role = role;
    m.parts.push_back(TextPart{std::move(text)});
    return m;
}

/// Append-only multimodal message history with token accounting. The manager
/// context C_M and each worker context C_W are instances. History is never
/// rewritten: distillation builds summaries before append.
class ContextWindow {
public:
    explicit ContextWindow(std::string label = "") : label_(std::move(label)) {}

    void append(Message msg) {
        if (msg.parts.empty()) throw std::invalid_argument("Message must have parts");
        messages_.push_back(std::move(msg));
    }

    const std::vector<Message>& messages() const { return messages_; }
    size_t size() const { return messages_.size(); }
    const std::string& label() const { return label_; }

    long token_high_water() const { return token_high_water_; }
    void raise_high_water(long prompt_tokens) {
        if (prompt_tokens > token_high_water_) token_high_water_ = prompt_tokens;
    }

    int image_part_count() const {
        int n = 0;
        for (const auto& m : messages_) n += m.image_part_count();
        return n;
    }

private:
    std::string label_;
    std::vector<Message> messages_;
    long token_high_water_ = 0;
};

}  // namespace hierva
