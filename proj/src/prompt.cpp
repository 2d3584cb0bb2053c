#include "migrate/prompt.hpp"

#include <fstream>
#include <sstream>

namespace migrate::prompt {

namespace {

constexpr std::string_view kBaseCommand =
    "The Python code bellow uses the library sqlalchemy with version 1. "
    "Migrate it so that it works with version 2 of sqlalchemy. "
    "Make the code compatible with python's asyncio. "
    "Use python's typing module to add type hints to the code. "
    "Your answer must only contain code. Do not explain it. "
    "Do not add markdown backticks for code. "
    "Do not add extra functionality to the code. "
    "Do not remove code that is not being changed. "
    "If there's no need to change the code, answer only with the code itself. "
    "The first line of code must have a comment \"### START CODE ###\". "
    "The last line of code must have a comment \"### END CODE ###\".";

constexpr std::string_view kExamplePreamble =
    "Use the following code block as an example of migrated code, "
    "follow the same patterns used in it:";

constexpr std::string_view kStepGuidePreamble =
    "Use the steps bellow as a guide for the migration. You don't need to "
    "follow them exactly as described, but they should be able to help with "
    "the migration:";

constexpr std::string_view kSubjectPreamble = "Here is the code to migrate:";

constexpr std::string_view kSystemRole = "You are a developer with expertise in Python";

constexpr std::string_view kStartMarker = "### START CODE ###";
constexpr std::string_view kEndMarker = "### END CODE ###";

const std::vector<std::string>& default_steps() {
    static const std::vector<std::string> steps = {
        "Update the used database engine, if any, so that you're using "
        "`create_async_engine` instead of `create_engine`.",
        "If any tables and their columns are declared, update their declarations "
        "so that they use `mapped_columns` instead of `schema.Column` and ensure "
        "they are correctly typed with the Mapped annotation, making sure to "
        "import the correct types from the library.",
        "Ensure that all queries, if any, are updated to use the new 2.0 style "
        "of querying, such as using `select()` instead of `query()`.",
        "Update functions that use `sessionmaker` to use `session` instead.",
        "Update the code to use async functions and await calls where necessary.",
        "Implement type hinting for all functions and variables and update old "
        "type hinting to ensure they are correct.",
        "Ensure there are no missing import statements.",
        "Remove any unused imports or variable declarations.",
        "Make sure the code works.",
    };
    return steps;
}

// Default One-Shot example: a small self-contained module showing the
// target idioms (async engine, Mapped annotations, mapped_column, select).
constexpr std::string_view kExampleCode = R"PY(from typing import AsyncIterator, Optional

from sqlalchemy import ForeignKey, String, select
from sqlalchemy.ext.asyncio import AsyncSession, async_sessionmaker, create_async_engine
from sqlalchemy.orm import DeclarativeBase, Mapped, mapped_column


class Base(DeclarativeBase):
    pass


class Author(Base):
    __tablename__ = "author"

    id: Mapped[int] = mapped_column(primary_key=True)
    name: Mapped[str] = mapped_column(String(100))


class Book(Base):
    __tablename__ = "book"

    id: Mapped[int] = mapped_column(primary_key=True)
    title: Mapped[str] = mapped_column(String(200))
    author_id: Mapped[int] = mapped_column(ForeignKey("author.id"))


engine = create_async_engine("postgresql+asyncpg://example/library", echo=True)
session_factory = async_sessionmaker(engine, expire_on_commit=False)


async def create_schema() -> None:
    async with engine.begin() as connection:
        await connection.run_sync(Base.metadata.create_all)


async def add_book(title: str, author_name: str) -> Book:
    async with session_factory() as session:
        author = Author(name=author_name)
        book = Book(title=title, author_id=author.id)
        session.add_all([author, book])
        await session.commit()
        await session.refresh(book)
        return book


async def find_book(title: str) -> Optional[Book]:
    async with session_factory() as session:
        result = await session.execute(select(Book).where(Book.title == title))
        return result.scalar_one_or_none()


async def list_books() -> AsyncIterator[Book]:
    async with session_factory() as session:
        result = await session.execute(select(Book))
        for book in result.scalars():
            yield book
)PY";

size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) {
        return 0;
    }
    size_t count = 0;
    size_t pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string_view::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

bool is_blank(std::string_view text) {
    return text.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

} // namespace

std::string_view strategy_id(Strategy strategy) {
    switch (strategy) {
    case Strategy::ZeroShot:
        return "zero_shot";
    case Strategy::OneShot:
        return "one_shot";
    case Strategy::ChainOfThought:
        return "chain_of_thought";
    }
    return "unknown";
}

std::string_view strategy_label(Strategy strategy) {
    switch (strategy) {
    case Strategy::ZeroShot:
        return "Zero-Shot";
    case Strategy::OneShot:
        return "One-Shot";
    case Strategy::ChainOfThought:
        return "Chain Of Thoughts";
    }
    return "Unknown";
}

std::optional<Strategy> strategy_from_id(std::string_view id) {
    if (id == "zero_shot") {
        return Strategy::ZeroShot;
    }
    if (id == "one_shot") {
        return Strategy::OneShot;
    }
    if (id == "chain_of_thought") {
        return Strategy::ChainOfThought;
    }
    return std::nullopt;
}

PromptTemplate default_template() {
    PromptTemplate tmpl;
    tmpl.base_command = std::string(kBaseCommand);
    tmpl.example_code = std::string(kExampleCode);
    tmpl.step_guide = default_steps();
    tmpl.start_marker = std::string(kStartMarker);
    tmpl.end_marker = std::string(kEndMarker);
    return tmpl;
}

std::string default_system_role() {
    return std::string(kSystemRole);
}

std::string default_example_code() {
    return std::string(kExampleCode);
}

std::string_view example_preamble() {
    return kExamplePreamble;
}

std::string_view step_guide_preamble() {
    return kStepGuidePreamble;
}

std::string_view subject_preamble() {
    return kSubjectPreamble;
}

void validate_template(const PromptTemplate& tmpl) {
    if (tmpl.start_marker.empty() || tmpl.end_marker.empty()) {
        throw PromptError(PromptError::Kind::InvalidTemplate, "markers must be non-empty");
    }
    if (tmpl.start_marker == tmpl.end_marker) {
        throw PromptError(PromptError::Kind::InvalidTemplate, "markers must be distinct");
    }
    if (count_occurrences(tmpl.base_command, tmpl.start_marker) != 1) {
        throw PromptError(PromptError::Kind::InvalidTemplate,
                          "base_command must mention the start marker exactly once");
    }
    if (count_occurrences(tmpl.base_command, tmpl.end_marker) != 1) {
        throw PromptError(PromptError::Kind::InvalidTemplate,
                          "base_command must mention the end marker exactly once");
    }
    for (const auto& step : tmpl.step_guide) {
        if (is_blank(step)) {
            throw PromptError(PromptError::Kind::InvalidTemplate,
                              "step_guide entries must be non-blank");
        }
    }
}

std::string wrap_subject_code(const PromptTemplate& tmpl, std::string_view subject_code) {
    std::string block;
    block.reserve(tmpl.start_marker.size() + subject_code.size() + tmpl.end_marker.size() + 2);
    block += tmpl.start_marker;
    block += '\n';
    block += subject_code;
    block += '\n';
    block += tmpl.end_marker;
    return block;
}

RenderedPrompt render(Strategy strategy, const PromptTemplate& tmpl,
                      std::string_view subject_code) {
    return render(strategy, tmpl, subject_code, kSystemRole);
}

RenderedPrompt render(Strategy strategy, const PromptTemplate& tmpl,
                      std::string_view subject_code, std::string_view system_role) {
    validate_template(tmpl);
    const bool needs_example =
        strategy == Strategy::OneShot || strategy == Strategy::ChainOfThought;
    if (needs_example && !tmpl.example_code.has_value()) {
        throw PromptError(PromptError::Kind::MissingExample,
                          std::string(strategy_id(strategy)) + " requires example_code");
    }
    if (strategy == Strategy::ChainOfThought && tmpl.step_guide.empty()) {
        throw PromptError(PromptError::Kind::MissingGuide,
                          "chain_of_thought requires a step_guide");
    }

    std::string user = tmpl.base_command;
    if (strategy == Strategy::OneShot) {
        user += "\n\n";
        user += kExamplePreamble;
        user += "\n\n";
        user += *tmpl.example_code;
    } else if (strategy == Strategy::ChainOfThought) {
        user += "\n\n";
        user += kStepGuidePreamble;
        user += "\n\n";
        std::ostringstream steps;
        for (size_t i = 0; i < tmpl.step_guide.size(); ++i) {
            if (i > 0) {
                steps << '\n';
            }
            steps << (i + 1) << ". " << tmpl.step_guide[i];
        }
        user += steps.str();
        user += "\n\n";
        user += *tmpl.example_code;
    }
    user += "\n\n";
    user += kSubjectPreamble;
    user += "\n\n";
    user += wrap_subject_code(tmpl, subject_code);

    RenderedPrompt rendered;
    rendered.system_message = std::string(system_role);
    rendered.user_message = std::move(user);
    return rendered;
}

PromptTemplate template_from_config(const nlohmann::json& config,
                                    const std::filesystem::path& base_dir) {
    PromptTemplate tmpl = default_template();
    if (config.is_null()) {
        return tmpl;
    }
    if (config.contains("base_command")) {
        tmpl.base_command = config.at("base_command").get<std::string>();
    }
    if (config.contains("start_marker")) {
        tmpl.start_marker = config.at("start_marker").get<std::string>();
    }
    if (config.contains("end_marker")) {
        tmpl.end_marker = config.at("end_marker").get<std::string>();
    }
    if (config.contains("step_guide")) {
        tmpl.step_guide = config.at("step_guide").get<std::vector<std::string>>();
    }
    if (config.contains("example_code_path")) {
        std::filesystem::path path = config.at("example_code_path").get<std::string>();
        if (path.is_relative()) {
            path = base_dir / path;
        }
        std::ifstream in(path, std::ios::binary);
        if (!in.good()) {
            throw PromptError(PromptError::Kind::InvalidTemplate,
                              "example_code_path not readable: " + path.string());
        }
        std::ostringstream buffer;
        buffer << in.rdbuf();
        tmpl.example_code = buffer.str();
    }
    validate_template(tmpl);
    return tmpl;
}

} // namespace migrate::prompt
