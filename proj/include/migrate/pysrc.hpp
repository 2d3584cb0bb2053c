#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace migrate::pysrc {

/// Raised for a single unparseable file; parse_sources converts it into a
/// ParseIssue and keeps going with the remaining files.
struct SyntaxError : std::runtime_error {
    SyntaxError(int line, const std::string& message)
        : std::runtime_error(message), line(line) {}
    int line;
};

struct Param {
    std::string name;
    std::string annotation; // empty when absent
    bool has_annotation = false;
    bool has_default = false;
};

struct CallSite {
    std::string callee; // dotted name as written, e.g. "self.session.query"
    int line = 0;
};

struct FunctionNode {
    std::string name;
    std::string qualified_name; // scope path joined with '.', no module prefix
    bool is_async = false;
    std::vector<Param> params;
    std::string return_annotation;
    bool has_return_annotation = false;
    std::vector<std::string> decorators;
    int line = 0;
    int await_count = 0; // awaits in this function's own body (not nested defs)
    std::vector<FunctionNode> nested;
};

struct AttributeNode {
    std::string name;
    std::string annotation;
    std::string annotation_head; // first name token of the annotation
    bool has_annotation = false;
    std::string value_callee; // dotted callee when the value is a call
    bool value_is_call = false;
    int line = 0;
};

struct ClassNode {
    std::string name;
    std::string qualified_name;
    int line = 0;
    std::vector<AttributeNode> attributes;
    std::vector<FunctionNode> methods;
    std::vector<ClassNode> nested;
};

struct ImportNode {
    bool is_from = false;
    std::string module; // for plain imports, the dotted module itself
    std::vector<std::pair<std::string, std::string>> names; // (name, asname)
    int line = 0;
};

struct SourceFile {
    std::string path;
    std::vector<ImportNode> imports;
    std::vector<ClassNode> classes;
    std::vector<FunctionNode> functions;
    std::vector<CallSite> calls; // every call expression in the file
};

struct ParseIssue {
    std::string path;
    int line = 0;
    std::string message;
};

struct SourceModel {
    std::vector<SourceFile> files;  // in input (path-sorted) order
    std::vector<ParseIssue> errors; // files that failed to parse
};

/// Structural parse of one file. Handles the grammar subset the analyzer
/// needs: indentation blocks, class/def signatures, annotations, imports,
/// call expressions, await occurrences, strings/f-strings/comments.
SourceFile parse_file(const std::string& path, std::string_view text);

/// Parses every file, collecting per-file syntax errors instead of failing.
SourceModel parse_sources(const std::map<std::string, std::string>& files);

} // namespace migrate::pysrc
