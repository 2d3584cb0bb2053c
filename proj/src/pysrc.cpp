#include "migrate/pysrc.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace migrate::pysrc {

namespace {

enum class TokKind { Name, Number, Str, Op, Newline, Indent, Dedent, End };

struct Token {
    TokKind kind;
    std::string text;
    int line = 0;
};

bool is_name_start(unsigned char c) {
    return std::isalpha(c) != 0 || c == '_' || c >= 0x80;
}

bool is_name_char(unsigned char c) {
    return std::isalnum(c) != 0 || c == '_' || c >= 0x80;
}

class Tokenizer {
public:
    explicit Tokenizer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        indents_.push_back(0);
        while (pos_ < src_.size()) {
            if (at_line_start_ && depth_ == 0) {
                if (handle_line_start()) {
                    continue;
                }
            }
            scan_token();
        }
        if (depth_ > 0) {
            throw SyntaxError(line_, "unexpected end of file inside brackets");
        }
        if (!tokens_.empty() && tokens_.back().kind != TokKind::Newline) {
            emit(TokKind::Newline, "");
        }
        while (indents_.size() > 1) {
            indents_.pop_back();
            emit(TokKind::Dedent, "");
        }
        emit(TokKind::End, "");
        return std::move(tokens_);
    }

private:
    void emit(TokKind kind, std::string text) {
        tokens_.push_back(Token{kind, std::move(text), line_});
    }

    char peek(size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    // Returns true when the whole line was consumed (blank/comment line).
    bool handle_line_start() {
        size_t scan = pos_;
        int width = 0;
        while (scan < src_.size() && (src_[scan] == ' ' || src_[scan] == '\t')) {
            width = src_[scan] == '\t' ? (width / 8 + 1) * 8 : width + 1;
            ++scan;
        }
        if (scan >= src_.size()) {
            pos_ = scan;
            return true;
        }
        if (src_[scan] == '\n') {
            pos_ = scan + 1;
            ++line_;
            return true;
        }
        if (src_[scan] == '#') {
            pos_ = src_.find('\n', scan);
            if (pos_ == std::string_view::npos) {
                pos_ = src_.size();
            } else {
                ++pos_;
                ++line_;
            }
            return true;
        }
        pos_ = scan;
        at_line_start_ = false;
        if (width > indents_.back()) {
            indents_.push_back(width);
            emit(TokKind::Indent, "");
        } else {
            while (width < indents_.back()) {
                indents_.pop_back();
                emit(TokKind::Dedent, "");
            }
            if (width != indents_.back()) {
                throw SyntaxError(line_, "unindent does not match any outer indentation level");
            }
        }
        return false;
    }

    void scan_token() {
        char c = peek();
        if (c == ' ' || c == '\t' || c == '\r') {
            ++pos_;
            return;
        }
        if (c == '#') {
            while (pos_ < src_.size() && src_[pos_] != '\n') {
                ++pos_;
            }
            return;
        }
        if (c == '\\' && peek(1) == '\n') {
            pos_ += 2;
            ++line_;
            return;
        }
        if (c == '\n') {
            ++pos_;
            if (depth_ == 0) {
                if (!tokens_.empty() && tokens_.back().kind != TokKind::Newline &&
                    tokens_.back().kind != TokKind::Indent &&
                    tokens_.back().kind != TokKind::Dedent) {
                    emit(TokKind::Newline, "");
                }
                at_line_start_ = true;
            }
            ++line_;
            return;
        }
        if (is_string_start()) {
            scan_string();
            return;
        }
        if (is_name_start(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            while (pos_ < src_.size() && is_name_char(static_cast<unsigned char>(src_[pos_]))) {
                ++pos_;
            }
            emit(TokKind::Name, std::string(src_.substr(start, pos_ - start)));
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) != 0 ||
            (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))) != 0)) {
            scan_number();
            return;
        }
        scan_operator();
    }

    bool is_string_start() const {
        size_t scan = pos_;
        int prefix = 0;
        while (prefix < 2 && scan < src_.size()) {
            char p = src_[scan];
            if (p == 'r' || p == 'R' || p == 'b' || p == 'B' || p == 'u' || p == 'U' ||
                p == 'f' || p == 'F') {
                ++scan;
                ++prefix;
            } else {
                break;
            }
        }
        return scan < src_.size() && (src_[scan] == '"' || src_[scan] == '\'') &&
               (prefix == 0 || pos_ + prefix == scan);
    }

    void scan_string() {
        size_t start = pos_;
        int start_line = line_;
        bool raw = false;
        while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\'') {
            if (src_[pos_] == 'r' || src_[pos_] == 'R') {
                raw = true;
            }
            ++pos_;
        }
        char quote = src_[pos_];
        bool triple = peek(1) == quote && peek(2) == quote;
        pos_ += triple ? 3 : 1;
        for (;;) {
            if (pos_ >= src_.size()) {
                throw SyntaxError(start_line, "unterminated string literal");
            }
            char ch = src_[pos_];
            if (ch == '\\') {
                // In raw strings the backslash still prevents the quote from
                // terminating the literal.
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') {
                    ++line_;
                }
                pos_ += 2;
                continue;
            }
            if (ch == '\n') {
                if (!triple) {
                    throw SyntaxError(start_line, "unterminated string literal");
                }
                ++line_;
                ++pos_;
                continue;
            }
            if (ch == quote) {
                if (!triple) {
                    ++pos_;
                    break;
                }
                if (peek(1) == quote && peek(2) == quote) {
                    pos_ += 3;
                    break;
                }
                ++pos_;
                continue;
            }
            ++pos_;
        }
        (void)raw;
        emit(TokKind::Str, std::string(src_.substr(start, pos_ - start)));
    }

    void scan_number() {
        size_t start = pos_;
        while (pos_ < src_.size()) {
            char ch = src_[pos_];
            if (std::isalnum(static_cast<unsigned char>(ch)) != 0 || ch == '_' || ch == '.') {
                ++pos_;
                continue;
            }
            if ((ch == '+' || ch == '-') && pos_ > start &&
                (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E')) {
                ++pos_;
                continue;
            }
            break;
        }
        emit(TokKind::Number, std::string(src_.substr(start, pos_ - start)));
    }

    void scan_operator() {
        static constexpr std::array<std::string_view, 5> three = {"**=", "//=", ">>=", "<<=",
                                                                  "..."};
        static constexpr std::array<std::string_view, 19> two = {
            "->", ":=", "==", "!=", "<=", ">=", "//", "**", "<<", ">>",
            "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@="};
        static constexpr std::string_view singles = "()[]{}+-*/%@&|^~<>=.,:;";

        std::string_view rest = src_.substr(pos_);
        for (auto op : three) {
            if (rest.substr(0, 3) == op) {
                emit(TokKind::Op, std::string(op));
                pos_ += 3;
                return;
            }
        }
        for (auto op : two) {
            if (rest.substr(0, 2) == op) {
                emit(TokKind::Op, std::string(op));
                pos_ += 2;
                return;
            }
        }
        char c = src_[pos_];
        if (singles.find(c) != std::string_view::npos) {
            if (c == '(' || c == '[' || c == '{') {
                ++depth_;
            } else if (c == ')' || c == ']' || c == '}') {
                if (depth_ == 0) {
                    throw SyntaxError(line_, std::string("unmatched '") + c + "'");
                }
                --depth_;
            }
            emit(TokKind::Op, std::string(1, c));
            ++pos_;
            return;
        }
        throw SyntaxError(line_, std::string("invalid character '") + c + "' in source");
    }

    std::string_view src_;
    size_t pos_ = 0;
    int line_ = 1;
    int depth_ = 0;
    bool at_line_start_ = true;
    std::vector<int> indents_;
    std::vector<Token> tokens_;
};

// ---------------------------------------------------------------------------

bool no_space_before(const std::string& text) {
    return text == "[" || text == "]" || text == "(" || text == ")" || text == "." ||
           text == ",";
}

bool no_space_after(const std::string& text) {
    return text == "[" || text == "(" || text == ".";
}

std::string join_tokens(const std::vector<Token>& toks, size_t first, size_t last_exclusive) {
    std::string out;
    bool suppress_space = true;
    for (size_t i = first; i < last_exclusive; ++i) {
        const std::string& text = toks[i].text;
        if (!out.empty() && !suppress_space && !no_space_before(text)) {
            out += ' ';
        }
        out += text;
        suppress_space = no_space_after(text);
    }
    return out;
}

struct Scope {
    ClassNode* cls = nullptr;     // set when directly inside a class body
    FunctionNode* func = nullptr; // innermost enclosing function
};

class Parser {
public:
    Parser(std::string path, std::vector<Token> tokens)
        : tokens_(std::move(tokens)) {
        file_.path = std::move(path);
    }

    SourceFile run() {
        Scope scope;
        parse_statements(scope, "");
        expect(TokKind::End);
        return std::move(file_);
    }

private:
    const Token& cur() const { return tokens_[idx_]; }
    const Token& peek(size_t ahead = 1) const {
        size_t i = std::min(idx_ + ahead, tokens_.size() - 1);
        return tokens_[i];
    }
    void advance() {
        if (idx_ + 1 < tokens_.size()) {
            ++idx_;
        }
    }
    bool at(TokKind kind) const { return cur().kind == kind; }
    bool at_op(std::string_view text) const {
        return cur().kind == TokKind::Op && cur().text == text;
    }
    bool at_name(std::string_view text) const {
        return cur().kind == TokKind::Name && cur().text == text;
    }
    void expect(TokKind kind) {
        if (cur().kind != kind) {
            throw SyntaxError(cur().line, "unexpected token '" + cur().text + "'");
        }
    }
    void expect_op(std::string_view text) {
        if (!at_op(text)) {
            throw SyntaxError(cur().line, "expected '" + std::string(text) + "', found '" +
                                              cur().text + "'");
        }
        advance();
    }

    void skip_newlines() {
        while (at(TokKind::Newline)) {
            advance();
        }
    }

    // Consumes a block that was opened by an unexpected INDENT.
    void skip_block() {
        expect(TokKind::Indent);
        advance();
        int depth = 1;
        while (depth > 0 && !at(TokKind::End)) {
            if (at(TokKind::Indent)) {
                ++depth;
            } else if (at(TokKind::Dedent)) {
                --depth;
            }
            advance();
        }
    }

    void parse_statements(Scope scope, const std::string& qualprefix) {
        std::vector<std::string> pending_decorators;
        while (!at(TokKind::End) && !at(TokKind::Dedent)) {
            if (at(TokKind::Newline)) {
                advance();
                continue;
            }
            if (at(TokKind::Indent)) {
                skip_block();
                continue;
            }
            if (at_op("@")) {
                pending_decorators.push_back(parse_decorator(scope));
                continue;
            }
            if (at_name("class")) {
                parse_class(scope, qualprefix, std::move(pending_decorators));
                pending_decorators.clear();
                continue;
            }
            if (at_name("def") || (at_name("async") && peek().kind == TokKind::Name &&
                                   peek().text == "def")) {
                parse_function(scope, qualprefix, std::move(pending_decorators));
                pending_decorators.clear();
                continue;
            }
            pending_decorators.clear();
            if (at_name("import")) {
                parse_import(false);
                continue;
            }
            if (at_name("from")) {
                parse_import(true);
                continue;
            }
            if (is_compound_keyword()) {
                parse_compound(scope, qualprefix);
                continue;
            }
            parse_simple_statement(scope);
        }
    }

    std::string parse_decorator(Scope scope) {
        expect_op("@");
        std::string name;
        while (at(TokKind::Name)) {
            name += cur().text;
            advance();
            if (at_op(".")) {
                name += '.';
                advance();
            } else {
                break;
            }
        }
        // Arguments (if any) are scanned for calls then discarded.
        size_t start = idx_;
        while (!at(TokKind::Newline) && !at(TokKind::End)) {
            advance();
        }
        scan_for_calls(start, idx_, scope);
        skip_newlines();
        return name;
    }

    bool is_compound_keyword() const {
        if (!at(TokKind::Name)) {
            return false;
        }
        const std::string& text = cur().text;
        if (text == "if" || text == "elif" || text == "else" || text == "for" ||
            text == "while" || text == "with" || text == "try" || text == "except" ||
            text == "finally") {
            return true;
        }
        // 'async with' / 'async for' (async def handled separately).
        return text == "async" && peek().kind == TokKind::Name &&
               (peek().text == "with" || peek().text == "for");
    }

    void parse_compound(Scope scope, const std::string& qualprefix) {
        // Header up to the ':' at bracket depth zero, scanned for calls.
        size_t start = idx_;
        while (!at(TokKind::End)) {
            if (at_op(":")) {
                break;
            }
            if (at(TokKind::Newline)) {
                // e.g. a bare 'else' typo; treat line as simple statement
                scan_for_calls(start, idx_, scope);
                advance();
                return;
            }
            advance();
        }
        scan_for_calls(start, idx_, scope);
        expect_op(":");
        parse_suite(scope, qualprefix);
    }

    void parse_suite(Scope scope, const std::string& qualprefix) {
        if (at(TokKind::Newline)) {
            advance();
            skip_newlines();
            if (!at(TokKind::Indent)) {
                throw SyntaxError(cur().line, "expected an indented block");
            }
            advance();
            parse_statements(scope, qualprefix);
            expect(TokKind::Dedent);
            advance();
        } else {
            // Inline suite: one or more simple statements on the header line.
            parse_simple_statement(scope);
        }
    }

    void parse_import(bool is_from) {
        ImportNode node;
        node.is_from = is_from;
        node.line = cur().line;
        advance(); // 'import' or 'from'
        if (is_from) {
            while (at_op(".")) {
                node.module += '.';
                advance();
            }
            while (at(TokKind::Name)) {
                node.module += cur().text;
                advance();
                if (at_op(".")) {
                    node.module += '.';
                    advance();
                } else {
                    break;
                }
            }
            if (!at_name("import")) {
                throw SyntaxError(cur().line, "expected 'import' in from-import");
            }
            advance();
            bool parenthesized = at_op("(");
            if (parenthesized) {
                advance();
            }
            for (;;) {
                if (at_op("*")) {
                    node.names.emplace_back("*", "");
                    advance();
                } else if (at(TokKind::Name)) {
                    std::string name = cur().text;
                    std::string alias;
                    advance();
                    if (at_name("as")) {
                        advance();
                        if (at(TokKind::Name)) {
                            alias = cur().text;
                            advance();
                        }
                    }
                    node.names.emplace_back(std::move(name), std::move(alias));
                } else {
                    break;
                }
                if (at_op(",")) {
                    advance();
                    continue;
                }
                break;
            }
            if (parenthesized && at_op(")")) {
                advance();
            }
        } else {
            for (;;) {
                std::string mod;
                while (at(TokKind::Name)) {
                    mod += cur().text;
                    advance();
                    if (at_op(".")) {
                        mod += '.';
                        advance();
                    } else {
                        break;
                    }
                }
                std::string alias;
                if (at_name("as")) {
                    advance();
                    if (at(TokKind::Name)) {
                        alias = cur().text;
                        advance();
                    }
                }
                if (node.module.empty()) {
                    node.module = mod;
                }
                node.names.emplace_back(std::move(mod), std::move(alias));
                if (at_op(",")) {
                    advance();
                    continue;
                }
                break;
            }
        }
        file_.imports.push_back(std::move(node));
        while (!at(TokKind::Newline) && !at(TokKind::End)) {
            advance();
        }
        skip_newlines();
    }

    void parse_class(Scope scope, const std::string& qualprefix,
                     std::vector<std::string> decorators) {
        (void)decorators;
        int line = cur().line;
        advance(); // 'class'
        expect(TokKind::Name);
        ClassNode node;
        node.name = cur().text;
        node.qualified_name = qualprefix.empty() ? node.name : qualprefix + "." + node.name;
        node.line = line;
        advance();
        if (at_op("(")) {
            size_t start = idx_;
            int depth = 0;
            while (!at(TokKind::End)) {
                if (at_op("(") || at_op("[") || at_op("{")) {
                    ++depth;
                } else if (at_op(")") || at_op("]") || at_op("}")) {
                    --depth;
                    if (depth == 0) {
                        advance();
                        break;
                    }
                }
                advance();
            }
            scan_for_calls(start, idx_, scope);
        }
        expect_op(":");

        ClassNode* target = &node;
        Scope inner;
        inner.cls = target;
        inner.func = scope.func;
        parse_suite(inner, node.qualified_name);

        if (scope.cls != nullptr) {
            scope.cls->nested.push_back(std::move(node));
        } else {
            file_.classes.push_back(std::move(node));
        }
    }

    void parse_function(Scope scope, const std::string& qualprefix,
                        std::vector<std::string> decorators) {
        FunctionNode node;
        node.line = cur().line;
        node.decorators = std::move(decorators);
        if (at_name("async")) {
            node.is_async = true;
            advance();
        }
        advance(); // 'def'
        expect(TokKind::Name);
        node.name = cur().text;
        node.qualified_name = qualprefix.empty() ? node.name : qualprefix + "." + node.name;
        advance();
        expect_op("(");
        parse_params(node, scope);
        if (at_op("->")) {
            advance();
            size_t start = idx_;
            int depth = 0;
            while (!at(TokKind::End)) {
                if (at_op(":") && depth == 0) {
                    break;
                }
                if (at_op("(") || at_op("[") || at_op("{")) {
                    ++depth;
                } else if (at_op(")") || at_op("]") || at_op("}")) {
                    --depth;
                }
                advance();
            }
            node.return_annotation = join_tokens(tokens_, start, idx_);
            node.has_return_annotation = !node.return_annotation.empty();
        }
        expect_op(":");

        Scope inner;
        inner.cls = nullptr; // attributes inside a function body are not class attrs
        inner.func = &node;
        parse_suite(inner, node.qualified_name);

        if (scope.cls != nullptr) {
            scope.cls->methods.push_back(std::move(node));
        } else if (scope.func != nullptr) {
            scope.func->nested.push_back(std::move(node));
        } else {
            file_.functions.push_back(std::move(node));
        }
    }

    void parse_params(FunctionNode& node, Scope scope) {
        // cur() is at '('.
        advance();
        while (!at_op(")") && !at(TokKind::End)) {
            if (at_op(",")) {
                advance();
                continue;
            }
            if (at_op("*") || at_op("**") || at_op("/")) {
                bool star = !at_op("/");
                advance();
                if (star && at(TokKind::Name)) {
                    Param param;
                    param.name = cur().text;
                    advance();
                    consume_param_tail(param, scope);
                    node.params.push_back(std::move(param));
                }
                continue;
            }
            if (at(TokKind::Name)) {
                Param param;
                param.name = cur().text;
                advance();
                consume_param_tail(param, scope);
                node.params.push_back(std::move(param));
                continue;
            }
            throw SyntaxError(cur().line, "unexpected token '" + cur().text +
                                              "' in parameter list");
        }
        expect_op(")");
    }

    void consume_param_tail(Param& param, Scope scope) {
        if (at_op(":")) {
            advance();
            size_t start = idx_;
            int depth = 0;
            while (!at(TokKind::End)) {
                if (depth == 0 && (at_op(",") || at_op("=") || at_op(")"))) {
                    break;
                }
                if (at_op("(") || at_op("[") || at_op("{")) {
                    ++depth;
                } else if (at_op(")") || at_op("]") || at_op("}")) {
                    --depth;
                }
                advance();
            }
            param.annotation = join_tokens(tokens_, start, idx_);
            param.has_annotation = !param.annotation.empty();
        }
        if (at_op("=")) {
            param.has_default = true;
            advance();
            size_t start = idx_;
            int depth = 0;
            while (!at(TokKind::End)) {
                if (depth == 0 && (at_op(",") || at_op(")"))) {
                    break;
                }
                if (at_op("(") || at_op("[") || at_op("{")) {
                    ++depth;
                } else if (at_op(")") || at_op("]") || at_op("}")) {
                    --depth;
                }
                advance();
            }
            scan_for_calls(start, idx_, scope);
        }
    }

    void parse_simple_statement(Scope scope) {
        size_t start = idx_;
        while (!at(TokKind::Newline) && !at(TokKind::End) && !at(TokKind::Dedent)) {
            advance();
        }
        size_t end = idx_;
        skip_newlines();

        if (scope.cls != nullptr) {
            try_class_attribute(start, end, *scope.cls);
        }
        scan_for_calls(start, end, scope);
    }

    void try_class_attribute(size_t start, size_t end, ClassNode& cls) {
        if (end - start < 2 || tokens_[start].kind != TokKind::Name) {
            return;
        }
        const Token& second = tokens_[start + 1];
        if (second.kind != TokKind::Op || (second.text != ":" && second.text != "=")) {
            return;
        }
        AttributeNode attr;
        attr.name = tokens_[start].text;
        attr.line = tokens_[start].line;
        size_t i = start + 1;
        if (tokens_[i].text == ":") {
            ++i;
            size_t ann_start = i;
            int depth = 0;
            while (i < end) {
                if (depth == 0 && tokens_[i].kind == TokKind::Op && tokens_[i].text == "=") {
                    break;
                }
                const std::string& t = tokens_[i].text;
                if (t == "(" || t == "[" || t == "{") {
                    ++depth;
                } else if (t == ")" || t == "]" || t == "}") {
                    --depth;
                }
                ++i;
            }
            attr.annotation = join_tokens(tokens_, ann_start, i);
            attr.has_annotation = !attr.annotation.empty();
            if (ann_start < i && tokens_[ann_start].kind == TokKind::Name) {
                attr.annotation_head = tokens_[ann_start].text;
            }
        }
        if (i < end && tokens_[i].kind == TokKind::Op && tokens_[i].text == "=") {
            ++i;
            // A call value: dotted name chain immediately followed by '('.
            std::string callee;
            size_t j = i;
            while (j < end && tokens_[j].kind == TokKind::Name) {
                callee += tokens_[j].text;
                ++j;
                if (j < end && tokens_[j].kind == TokKind::Op && tokens_[j].text == ".") {
                    callee += '.';
                    ++j;
                } else {
                    break;
                }
            }
            if (!callee.empty() && j < end && tokens_[j].kind == TokKind::Op &&
                tokens_[j].text == "(") {
                attr.value_callee = callee;
                attr.value_is_call = true;
            }
        } else if (!attr.has_annotation) {
            return; // bare name statement, not an attribute
        }
        cls.attributes.push_back(std::move(attr));
    }

    void scan_for_calls(size_t start, size_t end, Scope scope) {
        size_t i = start;
        while (i < end) {
            const Token& tok = tokens_[i];
            if (tok.kind == TokKind::Name && tok.text == "await") {
                if (scope.func != nullptr) {
                    ++scope.func->await_count;
                }
                ++i;
                continue;
            }
            if (tok.kind == TokKind::Name) {
                std::string chain = tok.text;
                int line = tok.line;
                size_t j = i + 1;
                while (j + 1 < end && tokens_[j].kind == TokKind::Op && tokens_[j].text == "." &&
                       tokens_[j + 1].kind == TokKind::Name) {
                    chain += '.';
                    chain += tokens_[j + 1].text;
                    j += 2;
                }
                if (j < end && tokens_[j].kind == TokKind::Op && tokens_[j].text == "(") {
                    file_.calls.push_back(CallSite{chain, line});
                }
                i = j;
                continue;
            }
            ++i;
        }
    }

    std::vector<Token> tokens_;
    size_t idx_ = 0;
    SourceFile file_;
};

} // namespace

SourceFile parse_file(const std::string& path, std::string_view text) {
    Tokenizer tokenizer(text);
    Parser parser(path, tokenizer.run());
    return parser.run();
}

SourceModel parse_sources(const std::map<std::string, std::string>& files) {
    SourceModel model;
    for (const auto& [path, text] : files) {
        try {
            model.files.push_back(parse_file(path, text));
        } catch (const SyntaxError& err) {
            model.errors.push_back(ParseIssue{path, err.line, err.what()});
        }
    }
    return model;
}

} // namespace migrate::pysrc
