#pragma once

// Internal token model shared by the Python and JavaScript/TypeScript
// front ends. Comments and whitespace never produce tokens.

#include <cstddef>
#include <string_view>
#include <vector>

#include "docrepair/code_model.hpp"

namespace docrepair::detail {

enum class TokKind { ident, punct, string, number, regex, jsx_open, jsx_close };

struct Token {
    TokKind kind = TokKind::punct;
    std::string_view text;
    int line = 0;      // line of the first character
    int end_line = 0;  // line of the last character
    std::size_t begin = 0;
    std::size_t end = 0;
    bool jsx_tag = false;
    bool definition = false;  // name token of a def/function/class/member definition

    bool is(std::string_view s) const {
        return (kind == TokKind::punct || kind == TokKind::ident) && text == s;
    }
};

struct LogicalLine {
    int first_line = 0;
    int last_line = 0;
    int indent = 0;
    std::vector<Token> tokens;
};

std::vector<LogicalLine> lex_python(std::string_view src);
std::vector<Token> lex_javascript(std::string_view src, bool allow_jsx);

ParsedFile parse_python(std::string_view src);
ParsedFile parse_javascript(std::string_view src, bool typescript, bool allow_jsx);

/// Collects references for every unit from the tokens inside its span.
/// `tokens` must be in source order.
void attach_references(std::vector<CodeUnit>& units, const std::vector<Token>& tokens);

}  // namespace docrepair::detail
