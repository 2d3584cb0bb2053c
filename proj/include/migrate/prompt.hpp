#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace migrate::prompt {

enum class Strategy { ZeroShot, OneShot, ChainOfThought };

/// Stable identifier used in configs, CLI flags and report JSON.
std::string_view strategy_id(Strategy strategy);
/// Human-facing label used in markdown tables.
std::string_view strategy_label(Strategy strategy);
std::optional<Strategy> strategy_from_id(std::string_view id);

struct PromptError : std::runtime_error {
    enum class Kind { MissingExample, MissingGuide, InvalidTemplate };
    PromptError(Kind kind, const std::string& message)
        : std::runtime_error(message), kind(kind) {}
    Kind kind;
};

/// Template parts for the three prompting strategies. All strategies share
/// base_command; One-Shot and Chain-of-Thought additionally need
/// example_code, Chain-of-Thought also needs a non-empty step_guide.
struct PromptTemplate {
    std::string base_command;
    std::optional<std::string> example_code;
    std::vector<std::string> step_guide;
    std::string start_marker;
    std::string end_marker;
};

struct RenderedPrompt {
    std::string system_message;
    std::string user_message;
};

/// Built-in defaults: the upstream migration command text, the
/// `### START CODE ###` / `### END CODE ###` markers and the nine-step
/// guide. The default example code shows the target idioms
/// (`mapped_column`, `Mapped[...]`, async engine).
PromptTemplate default_template();
std::string default_system_role();
std::string default_example_code();

/// Literal section preambles used when assembling prompts.
std::string_view example_preamble();
std::string_view step_guide_preamble();
std::string_view subject_preamble();

/// Checks the template invariants: markers non-empty and distinct,
/// base_command mentions each marker exactly once, steps non-blank.
/// Throws PromptError{InvalidTemplate} on violation.
void validate_template(const PromptTemplate& tmpl);

/// The marker-delimited block embedding the subject code. render() places
/// exactly one of these at the end of every user message; the gateway's
/// extractor reverses it.
std::string wrap_subject_code(const PromptTemplate& tmpl, std::string_view subject_code);

/// Pure assembly of the user/system messages for one strategy. Byte-stable
/// for identical inputs. Throws PromptError for strategies whose required
/// template parts are absent.
RenderedPrompt render(Strategy strategy, const PromptTemplate& tmpl,
                      std::string_view subject_code);
RenderedPrompt render(Strategy strategy, const PromptTemplate& tmpl,
                      std::string_view subject_code, std::string_view system_role);

/// Applies overrides from a config object (keys: base_command,
/// example_code_path, step_guide, start_marker, end_marker) on top of the
/// defaults. Relative example_code_path is resolved against base_dir.
PromptTemplate template_from_config(const nlohmann::json& config,
                                    const std::filesystem::path& base_dir);

} // namespace migrate::prompt
