#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "hierva/backend.hpp"
#include "hierva/image_registry.hpp"
#include "hierva/png.hpp"
#include "hierva/result.hpp"
#include "hierva/task.hpp"

namespace hierva {

struct ImageProduced {
    ImageRef ref;
};
struct TextProduced {
    std::string text;
};

struct ToolOutcome {
    std::variant<ImageProduced, TextProduced> kind;
    std::string diagnostics;  // stderr, warnings, exit status

    bool is_image() const { return std::holds_alternative<ImageProduced>(kind); }
    const ImageProduced& image() const { return std::get<ImageProduced>(kind); }
    const TextProduced& text() const { return std::get<TextProduced>(kind); }
};

/// Tool failures are data, not exceptions: the worker loop renders them back
/// into its context as tool-error text so the model can retry.
struct ToolError {
    enum class Code {
        MalformedArguments,
        InvalidImageRef,
        DegenerateBBox,
        Timeout,
        SandboxUnavailable,
    };
    Code code;
    std::string message;
};

inline const ToolSchema& zoom_tool_schema() {
    static const ToolSchema schema{
        "image_zoom_in_tool",
        "Zoom in on a specific region of an image by cropping it based on\n"
        "             a bounding box (bbox) and an optional object label.",
        {
            {"bbox_2d", "array[4] of numbers",
             "[x1, y1, x2, y2] with top-left and bottom-right"},
            {"label", "string", "name or label of the object in the specified bbox"},
            {"img_idx", "number", "index of the input image (starting from 0)"},
        },
    };
    return schema;
}

inline const ToolSchema& code_tool_schema() {
    static const ToolSchema schema{
        "code_interpreter",
        "Python code sandbox, which can be used to execute Python code.",
        {
            {"code", "string", "the python code"},
        },
    };
    return schema;
}

inline const ToolSchema& builtin_tool_schema(ToolName t) {
    return t == ToolName::Zoom ? zoom_tool_schema() : code_tool_schema();
}

/// Renders the enabled tools as the system-prompt block (Tool/Description/
/// Parameters per tool, zoom first). Empty set renders empty text; distinct
/// sets render distinct text.
inline std::string render_tool_schemas(const std::set<ToolName>& tools) {
    std::string out;
    for (ToolName t : {ToolName::Zoom, ToolName::Code}) {
        if (!tools.count(t)) continue;
        const ToolSchema& s = builtin_tool_schema(t);
        if (!out.empty()) out += "\n";
        out += "Tool: " + s.name + "\n";
        out += "Description: " + s.description + "\n";
        out += "Parameters:\n";
        for (const auto& p : s.parameters)
            out += "  - " + p.name + ": " + p.type + ", " + p.description + "\n";
    }
    return out;
}

/// Executes a zoom-in call: crops via the registry (clamping + min-side
/// resize) and stores the result as the latest image of `worker_id`.
inline Result<ToolOutcome, ToolError> execute_zoom(const nlohmann::json& arguments,
                                                   ImageRegistry& registry, int worker_id,
                                                   int min_side,
                                                   ResizeFilter filter = ResizeFilter::Nearest) {
    if (!arguments.contains("bbox_2d") || !arguments["bbox_2d"].is_array() ||
        arguments["bbox_2d"].size() != 4)
        return ToolError{ToolError::Code::MalformedArguments,
                         "bbox_2d must be an array of 4 numbers [x1, y1, x2, y2]"};
    BBox bbox;
    double* coords[4] = {&bbox.x1, &bbox.y1, &bbox.x2, &bbox.y2};
    for (int i = 0; i < 4; ++i) {
        const auto& v = arguments["bbox_2d"][i];
        if (!v.is_number())
            return ToolError{ToolError::Code::MalformedArguments,
                             "bbox_2d must contain only numbers"};
        *coords[i] = v.get<double>();
    }
    int img_idx = 0;
    if (arguments.contains("img_idx")) {
        if (!arguments["img_idx"].is_number_integer() && !arguments["img_idx"].is_number())
            return ToolError{ToolError::Code::MalformedArguments, "img_idx must be a number"};
        img_idx = static_cast<int>(arguments["img_idx"].get<double>());
    }
    if (worker_id < 1)
        return ToolError{ToolError::Code::MalformedArguments,
                         "zoom is only available to workers with id >= 1"};

    try {
        auto crop = registry.crop(ImageRef{img_idx}, bbox, min_side, filter);
        ImageRef ref = registry.record_crop(worker_id, std::move(crop));
        return ToolOutcome{ImageProduced{ref}, ""};
    } catch (const UnresolvedRef& e) {
        return ToolError{ToolError::Code::InvalidImageRef, e.what()};
    } catch (const DegenerateBBox& e) {
        return ToolError{ToolError::Code::DegenerateBBox, e.what()};
    }
}

struct SandboxConfig {
    std::string interpreter = "python3";
    double timeout_seconds = 20.0;
    std::string workdir_root;  // empty: std::filesystem::temp_directory_path()
    size_t max_output_bytes = 4096;
};

namespace sandbox_detail {

struct RunResult {
    std::string out;
    std::string err;
    int exit_code = 0;
    bool timed_out = false;
    bool spawn_failed = false;
    std::string spawn_error;
};

/// Runs `argv` in `workdir` with captured stdout/stderr and a wall-clock
/// deadline. The child gets its own process group so a timeout kills any
/// grandchildren too.
inline RunResult run_subprocess(const std::vector<std::string>& argv,
                                const std::string& workdir, double timeout_seconds,
                                size_t max_bytes) {
    RunResult result;
    int out_pipe[2], err_pipe[2];
    if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0) {
        result.spawn_failed = true;
        result.spawn_error = "pipe() failed";
        return result;
    }

    pid_t pid = fork();
    if (pid < 0) {
        result.spawn_failed = true;
        result.spawn_error = "fork() failed";
        return result;
    }
    if (pid == 0) {
        setpgid(0, 0);
        if (chdir(workdir.c_str()) != 0) _exit(127);
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(err_pipe[1], STDERR_FILENO);
        close(out_pipe[0]);
        close(out_pipe[1]);
        close(err_pipe[0]);
        close(err_pipe[1]);
        std::vector<char*> args;
        for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        execvp(args[0], args.data());
        _exit(127);
    }

    setpgid(pid, pid);  // mirror the child's setpgid; whichever runs first wins
    close(out_pipe[1]);
    close(err_pipe[1]);
    fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);
    fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);

    auto deadline = std::chrono::steady_clock::now() +
                    std::chrono::milliseconds(static_cast<long>(timeout_seconds * 1000));
    bool out_open = true, err_open = true;
    char buf[4096];
    while (out_open || err_open) {
        auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            result.timed_out = true;
            kill(-pid, SIGKILL);
            break;
        }
        pollfd fds[2];
        int n = 0;
        if (out_open) fds[n++] = {out_pipe[0], POLLIN, 0};
        if (err_open) fds[n++] = {err_pipe[0], POLLIN, 0};
        int wait_ms = static_cast<int>(
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());
        int rc = poll(fds, static_cast<nfds_t>(n), std::max(1, std::min(wait_ms, 200)));
        if (rc < 0 && errno != EINTR) break;
        auto drain = [&](int fd, std::string& sink, bool& open_flag) {
            ssize_t r;
            while ((r = read(fd, buf, sizeof(buf))) > 0) sink.append(buf, static_cast<size_t>(r));
            if (r == 0) open_flag = false;
        };
        drain(out_pipe[0], result.out, out_open);
        drain(err_pipe[0], result.err, err_open);
    }
    close(out_pipe[0]);
    close(err_pipe[0]);

    int status = 0;
    waitpid(pid, &status, 0);
    if (WIFEXITED(status))
        result.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
        result.exit_code = 128 + WTERMSIG(status);

    auto truncate_to = [&](std::string& s) {
        if (s.size() > max_bytes) {
            s.resize(max_bytes);
            s += "\n[output truncated]";
        }
    };
    truncate_to(result.out);
    truncate_to(result.err);
    return result;
}

}  // namespace sandbox_detail

/// Runs Python code in a fresh subordinate process: fresh temp workdir,
/// wall-clock timeout, captured stdout/stderr. When `current_image` is
/// given it is materialized as `input.png` in the workdir so the code can
/// analyze the worker's chart crop. Two calls share no state.
inline Result<ToolOutcome, ToolError> execute_code(
    const nlohmann::json& arguments, const SandboxConfig& cfg,
    std::shared_ptr<const RasterImage> current_image = nullptr) {
    namespace fs = std::filesystem;
    if (!arguments.contains("code") || !arguments["code"].is_string())
        return ToolError{ToolError::Code::MalformedArguments, "code must be a string"};
    std::string code = arguments["code"].get<std::string>();

    fs::path root = cfg.workdir_root.empty() ? fs::temp_directory_path()
                                             : fs::path(cfg.workdir_root);
    std::error_code ec;
    fs::create_directories(root, ec);
    char tmpl[] = "sandbox-XXXXXX";
    fs::path workdir;
    {
        std::string full = (root / tmpl).string();
        std::vector<char> buf(full.begin(), full.end());
        buf.push_back('\0');
        if (!mkdtemp(buf.data()))
            return ToolError{ToolError::Code::SandboxUnavailable,
                             "cannot create sandbox workdir under " + root.string()};
        workdir = buf.data();
    }

    {
        std::ofstream script(workdir / "main.py");
        if (!script)
            return ToolError{ToolError::Code::SandboxUnavailable, "cannot write sandbox script"};
        script << code;
    }
    if (current_image) save_png(*current_image, (workdir / "input.png").string());

    auto run = sandbox_detail::run_subprocess({cfg.interpreter, "main.py"}, workdir.string(),
                                              cfg.timeout_seconds, cfg.max_output_bytes);
    fs::remove_all(workdir, ec);

    if (run.spawn_failed)
        return ToolError{ToolError::Code::SandboxUnavailable, run.spawn_error};
    if (run.timed_out)
        return ToolError{ToolError::Code::Timeout,
                         "code execution exceeded " + std::to_string(cfg.timeout_seconds) +
                             " seconds"};
    if (run.exit_code == 127 && run.out.empty())
        return ToolError{ToolError::Code::SandboxUnavailable,
                         "interpreter '" + cfg.interpreter + "' could not be executed"};

    std::string diagnostics = "exit status " + std::to_string(run.exit_code);
    if (!run.err.empty()) diagnostics += "\n" + run.err;
    std::string out = run.out;
    while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
    return ToolOutcome{TextProduced{out}, diagnostics};
}

}  // namespace hierva
