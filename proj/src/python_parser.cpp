#include <algorithm>
#include <array>
#include <cctype>
#include <optional>

#include "lexer.hpp"

namespace docrepair::detail {

namespace {

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

constexpr std::array<std::string_view, 24> kPyOps = {
    "**=", "//=", ">>=", "<<=", "...", "==", "!=", "<=", ">=", ":=", "->", "+=",
    "-=",  "*=",  "/=",  "%=",  "&=",  "|=", "^=", "@=", "**", "//", "<<", ">>"};

bool is_string_prefix(std::string_view word) {
    if (word.size() > 2) return false;
    for (char c : word) {
        char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (l != 'r' && l != 'b' && l != 'f' && l != 'u') return false;
    }
    return true;
}

class PyLexer {
public:
    explicit PyLexer(std::string_view src) : src_(src) {}

    std::vector<LogicalLine> run() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '\n') {
                end_physical_line();
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\r' || c == '\f') {
                if (at_line_start_ && depth_ == 0 && current_.tokens.empty()) {
                    indent_ += (c == '\t') ? 8 - (indent_ % 8) : 1;
                }
                ++pos_;
                continue;
            }
            at_line_start_ = false;
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
                continue;
            }
            if (c == '\\' && pos_ + 1 < src_.size() &&
                (src_[pos_ + 1] == '\n' || (src_[pos_ + 1] == '\r' && pos_ + 2 < src_.size() &&
                                            src_[pos_ + 2] == '\n'))) {
                pos_ += (src_[pos_ + 1] == '\n') ? 2 : 3;
                ++line_;
                continue;
            }
            if (c == '"' || c == '\'') {
                lex_string(pos_, pos_);
                continue;
            }
            if (is_ident_start(static_cast<unsigned char>(c))) {
                std::size_t start = pos_;
                while (pos_ < src_.size() && is_ident_char(static_cast<unsigned char>(src_[pos_]))) ++pos_;
                std::string_view word = src_.substr(start, pos_ - start);
                if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'') &&
                    is_string_prefix(word)) {
                    lex_string(start, pos_);
                    continue;
                }
                push(TokKind::ident, start, pos_, line_);
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) ||
                (c == '.' && pos_ + 1 < src_.size() &&
                 std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
                std::size_t start = pos_;
                while (pos_ < src_.size()) {
                    char d = src_[pos_];
                    if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '.') {
                        ++pos_;
                    } else if ((d == '+' || d == '-') && (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E') &&
                               !(pos_ - start >= 2 && (src_[start + 1] == 'x' || src_[start + 1] == 'X'))) {
                        ++pos_;
                    } else {
                        break;
                    }
                }
                push(TokKind::number, start, pos_, line_);
                continue;
            }
            lex_punct();
        }
        if (depth_ != 0) throw ParseFailure("unbalanced brackets at end of file");
        flush();
        return std::move(lines_);
    }

private:
    void lex_punct() {
        std::size_t start = pos_;
        for (auto op : kPyOps) {
            if (src_.substr(pos_, op.size()) == op) {
                pos_ += op.size();
                push(TokKind::punct, start, pos_, line_);
                return;
            }
        }
        char c = src_[pos_++];
        if (c == '(' || c == '[' || c == '{') {
            ++depth_;
        } else if (c == ')' || c == ']' || c == '}') {
            if (depth_ == 0) throw ParseFailure("unmatched '" + std::string(1, c) + "' on line " + std::to_string(line_));
            --depth_;
        }
        push(TokKind::punct, start, pos_, line_);
    }

    void lex_string(std::size_t token_start, std::size_t quote_pos) {
        char q = src_[quote_pos];
        bool triple = quote_pos + 2 < src_.size() && src_[quote_pos + 1] == q && src_[quote_pos + 2] == q;
        int start_line = line_;
        pos_ = quote_pos + (triple ? 3 : 1);
        while (true) {
            if (pos_ >= src_.size()) throw ParseFailure("unterminated string starting on line " + std::to_string(start_line));
            char c = src_[pos_];
            if (c == '\\') {
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') ++line_;
                pos_ += 2;
                continue;
            }
            if (c == '\n') {
                if (!triple) throw ParseFailure("unterminated string on line " + std::to_string(line_));
                ++line_;
                ++pos_;
                continue;
            }
            if (c == q) {
                if (!triple) {
                    ++pos_;
                    break;
                }
                if (pos_ + 2 < src_.size() && src_[pos_ + 1] == q && src_[pos_ + 2] == q) {
                    pos_ += 3;
                    break;
                }
            }
            ++pos_;
        }
        push(TokKind::string, token_start, pos_, start_line);
    }

    void push(TokKind kind, std::size_t begin, std::size_t end, int first_line) {
        if (current_.tokens.empty()) {
            current_.first_line = first_line;
            current_.indent = indent_;
        }
        Token t;
        t.kind = kind;
        t.text = src_.substr(begin, end - begin);
        t.line = first_line;
        t.end_line = line_;
        t.begin = begin;
        t.end = end;
        current_.tokens.push_back(t);
        current_.last_line = line_;
    }

    void end_physical_line() {
        ++pos_;
        if (depth_ == 0) {
            flush();
            indent_ = 0;
            at_line_start_ = true;
        }
        ++line_;
    }

    void flush() {
        if (!current_.tokens.empty()) {
            lines_.push_back(std::move(current_));
        }
        current_ = LogicalLine{};
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int depth_ = 0;
    int indent_ = 0;
    bool at_line_start_ = true;
    LogicalLine current_;
    std::vector<LogicalLine> lines_;
};

bool is_keyword(std::string_view w) {
    static constexpr std::array<std::string_view, 35> kw = {
        "False", "None",   "True",    "and",    "as",       "assert", "async", "await", "break",
        "class", "continue", "def",   "del",    "elif",     "else",   "except", "finally", "for",
        "from",  "global", "if",      "import", "in",       "is",     "lambda", "nonlocal", "not",
        "or",    "pass",   "raise",   "return", "try",      "while",  "with",   "yield"};
    return std::find(kw.begin(), kw.end(), w) != kw.end();
}

bool is_assignment(const LogicalLine& ll) {
    const auto& toks = ll.tokens;
    if (toks.empty()) return false;
    const Token& first = toks.front();
    if (first.kind == TokKind::ident && is_keyword(first.text)) return false;
    if (first.kind != TokKind::ident && !first.is("(") && !first.is("[") && !first.is("*")) return false;
    int depth = 0;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        const Token& t = toks[i];
        if (t.is("(") || t.is("[") || t.is("{")) ++depth;
        else if (t.is(")") || t.is("]") || t.is("}")) --depth;
        else if (depth == 0 && t.is("=")) return true;
        else if (depth == 0 && t.is(":") && i == 1 && first.kind == TokKind::ident) return true;  // annotated
    }
    return false;
}

// def/class header starts at token `at`; returns index of the `def`/`class`
// keyword or nullopt when this line is not a definition.
std::optional<std::size_t> definition_keyword(const LogicalLine& ll) {
    const auto& toks = ll.tokens;
    if (toks.empty()) return std::nullopt;
    if (toks[0].is("def") || toks[0].is("class")) return 0;
    if (toks.size() > 1 && toks[0].is("async") && toks[1].is("def")) return 1;
    return std::nullopt;
}

std::string header_signature(std::string_view src, const LogicalLine& ll, std::size_t kw) {
    const auto& toks = ll.tokens;
    std::size_t begin = toks[kw > 0 ? 0 : kw].begin;
    // Header ends at the ':' that closes it (depth 0).
    int depth = 0;
    std::size_t end = toks.back().end;
    for (std::size_t i = kw; i < toks.size(); ++i) {
        const Token& t = toks[i];
        if (t.is("(") || t.is("[") || t.is("{")) ++depth;
        else if (t.is(")") || t.is("]") || t.is("}")) --depth;
        else if (depth == 0 && t.is(":")) {
            end = t.end;
            break;
        }
    }
    return collapse_whitespace(src.substr(begin, end - begin));
}

// Last logical line index belonging to the block opened at `header`,
// i.e. the run of following lines with indent > header indent.
std::size_t block_end(const std::vector<LogicalLine>& lines, std::size_t header, std::size_t limit) {
    int indent = lines[header].indent;
    std::size_t j = header;
    while (j + 1 < limit && lines[j + 1].indent > indent) ++j;
    return j;
}

}  // namespace

std::vector<LogicalLine> lex_python(std::string_view src) { return PyLexer(src).run(); }

ParsedFile parse_python(std::string_view src) {
    std::vector<LogicalLine> lines = lex_python(src);
    ParsedFile out;

    auto make_unit = [&](std::size_t header, std::size_t kw, std::size_t last, int span_start,
                         std::optional<std::string> parent) {
        LogicalLine& ll = lines[header];
        CodeUnit u;
        bool is_class = ll.tokens[kw].is("class");
        u.kind = is_class ? UnitKind::class_ : (parent ? UnitKind::method : UnitKind::function);
        if (kw + 1 < ll.tokens.size() && ll.tokens[kw + 1].kind == TokKind::ident) {
            u.name = std::string(ll.tokens[kw + 1].text);
            ll.tokens[kw + 1].definition = true;
        } else {
            throw ParseFailure("definition without a name on line " + std::to_string(ll.first_line));
        }
        u.signature = header_signature(src, ll, kw);
        u.span = Span{span_start, lines[last].last_line};
        u.parent = std::move(parent);
        return u;
    };

    std::size_t i = 0;
    std::optional<int> decorator_start;
    while (i < lines.size()) {
        LogicalLine& ll = lines[i];
        if (ll.indent != 0) {
            ++i;
            continue;
        }
        if (ll.tokens.front().is("@")) {
            if (!decorator_start) decorator_start = ll.first_line;
            ++i;
            continue;
        }
        if (auto kw = definition_keyword(ll)) {
            std::size_t last = block_end(lines, i, lines.size());
            int span_start = decorator_start.value_or(ll.first_line);
            decorator_start.reset();
            CodeUnit unit = make_unit(i, *kw, last, span_start, std::nullopt);
            bool is_class = unit.kind == UnitKind::class_;
            std::string class_name = unit.name;
            out.units.push_back(std::move(unit));
            if (is_class && last > i) {
                int body_indent = lines[i + 1].indent;
                int member_decorator = 0;
                std::size_t k = i + 1;
                while (k <= last) {
                    LogicalLine& ml = lines[k];
                    if (ml.indent != body_indent) {
                        ++k;
                        continue;
                    }
                    if (ml.tokens.front().is("@")) {
                        if (member_decorator == 0) member_decorator = ml.first_line;
                        ++k;
                        continue;
                    }
                    auto mkw = definition_keyword(ml);
                    if (mkw && ml.tokens[*mkw].is("def")) {
                        std::size_t mlast = block_end(lines, k, last + 1);
                        out.units.push_back(make_unit(k, *mkw, mlast,
                                                      member_decorator != 0 ? member_decorator : ml.first_line, class_name));
                        k = mlast + 1;
                    } else {
                        k = block_end(lines, k, last + 1) + 1;
                    }
                    member_decorator = 0;
                }
            }
            i = last + 1;
            continue;
        }
        decorator_start.reset();
        const Token& first = ll.tokens.front();
        std::size_t last = block_end(lines, i, lines.size());
        if (first.is("import") || first.is("from")) {
            out.preamble.push_back({PreambleKind::import, Span{ll.first_line, ll.last_line}});
        } else if (last == i && is_assignment(ll)) {
            out.preamble.push_back({PreambleKind::global, Span{ll.first_line, ll.last_line}});
        }
        // Anything else (compound statements, bare expressions) is residual.
        i = last + 1;
    }

    std::vector<Token> flat;
    for (const auto& ll : lines) flat.insert(flat.end(), ll.tokens.begin(), ll.tokens.end());
    attach_references(out.units, flat);
    return out;
}

}  // namespace docrepair::detail
