#include <algorithm>
#include <array>
#include <cctype>
#include <optional>

#include "lexer.hpp"

namespace docrepair::detail {

namespace {

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }

constexpr std::array<std::string_view, 37> kJsOps = {
    ">>>=", "...", "===", "!==", "**=", "<<=", ">>=", ">>>", "&&=", "||=", "?\?=", "=>", "==",
    "!=",   "<=",  ">=",  "&&",  "||",  "??",  "?.",  "++",  "--",  "+=",  "-=",  "*=",  "/=",
    "%=",   "&=",  "|=",  "^=",  "**",  "<<",  ">>",  "@",   "#",   "~",   "!"};

bool in(std::string_view w, std::initializer_list<std::string_view> set) {
    return std::find(set.begin(), set.end(), w) != set.end();
}

// Keywords after which an expression (regex literal, JSX) may start.
bool expression_keyword(std::string_view w) {
    return in(w, {"return", "typeof", "instanceof", "in", "of", "new", "delete", "void", "throw",
                  "case", "do", "else", "yield", "await", "default"});
}

struct JsxAbort {};

class JsLexer {
public:
    JsLexer(std::string_view src, bool allow_jsx) : src_(src), allow_jsx_(allow_jsx) {}

    std::vector<Token> run() {
        lex_code(false);
        return std::move(tokens_);
    }

private:
    // Lexes code until end of input or, when nested, until the '}' that
    // closes the enclosing `${` or JSX `{` (consumed, not emitted).
    void lex_code(bool nested) {
        int local_depth = 0;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '\n') {
                ++line_;
                ++pos_;
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
                continue;
            }
            if (c == '/' && peek(1) == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
                continue;
            }
            if (c == '/' && peek(1) == '*') {
                skip_block_comment();
                continue;
            }
            if (c == '"' || c == '\'') {
                lex_quoted(c);
                continue;
            }
            if (c == '`') {
                lex_template();
                continue;
            }
            if (is_ident_start(static_cast<unsigned char>(c))) {
                std::size_t start = pos_;
                while (pos_ < src_.size() && is_ident_char(static_cast<unsigned char>(src_[pos_]))) ++pos_;
                push(TokKind::ident, start, pos_, line_);
                continue;
            }
            if (c == '#' && is_ident_start(static_cast<unsigned char>(peek(1)))) {
                std::size_t start = pos_++;
                while (pos_ < src_.size() && is_ident_char(static_cast<unsigned char>(src_[pos_]))) ++pos_;
                push(TokKind::ident, start, pos_, line_);
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) ||
                (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
                lex_number();
                continue;
            }
            if (c == '/' && expression_allowed()) {
                if (lex_regex()) continue;
            }
            if (c == '<' && allow_jsx_ && expression_allowed() &&
                (is_ident_start(static_cast<unsigned char>(peek(1))) || peek(1) == '>')) {
                if (try_jsx()) continue;
            }
            if (nested && c == '}' && local_depth == 0) {
                ++pos_;
                return;
            }
            if (c == '{') ++local_depth;
            if (c == '}') --local_depth;
            lex_punct();
        }
        if (nested) throw ParseFailure("unterminated template or JSX expression");
    }

    char peek(std::size_t k) const { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; }

    bool expression_allowed() const {
        if (tokens_.empty()) return true;
        const Token& prev = tokens_.back();
        switch (prev.kind) {
            case TokKind::ident:
                return expression_keyword(prev.text);
            case TokKind::number:
            case TokKind::string:
            case TokKind::regex:
            case TokKind::jsx_close:
                return false;
            case TokKind::jsx_open:
                return true;
            case TokKind::punct:
                return !in(prev.text, {")", "]", "}", "++", "--"});
        }
        return true;
    }

    void skip_block_comment() {
        int start_line = line_;
        pos_ += 2;
        while (pos_ + 1 < src_.size() && !(src_[pos_] == '*' && src_[pos_ + 1] == '/')) {
            if (src_[pos_] == '\n') ++line_;
            ++pos_;
        }
        if (pos_ + 1 >= src_.size()) throw ParseFailure("unterminated comment starting on line " + std::to_string(start_line));
        pos_ += 2;
    }

    void lex_quoted(char q) {
        std::size_t start = pos_++;
        while (true) {
            if (pos_ >= src_.size() || src_[pos_] == '\n') {
                throw ParseFailure("unterminated string on line " + std::to_string(line_));
            }
            char c = src_[pos_];
            if (c == '\\') {
                if (peek(1) == '\n') ++line_;
                pos_ += 2;
                continue;
            }
            ++pos_;
            if (c == q) break;
        }
        push(TokKind::string, start, pos_, line_);
    }

    void lex_template() {
        std::size_t start = pos_++;
        int start_line = line_;
        while (true) {
            if (pos_ >= src_.size()) throw ParseFailure("unterminated template literal starting on line " + std::to_string(start_line));
            char c = src_[pos_];
            if (c == '\\') {
                if (peek(1) == '\n') ++line_;
                pos_ += 2;
                continue;
            }
            if (c == '\n') ++line_;
            if (c == '`') {
                ++pos_;
                break;
            }
            if (c == '$' && peek(1) == '{') {
                push(TokKind::string, start, pos_, start_line);
                pos_ += 2;
                lex_code(true);
                start = pos_;
                start_line = line_;
                continue;
            }
            ++pos_;
        }
        push(TokKind::string, start, pos_, start_line);
    }

    void lex_number() {
        std::size_t start = pos_;
        bool hex = src_[pos_] == '0' && (peek(1) == 'x' || peek(1) == 'X');
        while (pos_ < src_.size()) {
            char d = src_[pos_];
            if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '.') {
                ++pos_;
            } else if ((d == '+' || d == '-') && !hex && (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E')) {
                ++pos_;
            } else {
                break;
            }
        }
        push(TokKind::number, start, pos_, line_);
    }

    bool lex_regex() {
        std::size_t start = pos_;
        std::size_t p = pos_ + 1;
        bool in_class = false;
        while (p < src_.size()) {
            char c = src_[p];
            if (c == '\n') return false;
            if (c == '\\') {
                p += 2;
                continue;
            }
            if (c == '[') in_class = true;
            else if (c == ']') in_class = false;
            else if (c == '/' && !in_class) break;
            ++p;
        }
        if (p >= src_.size()) return false;
        ++p;
        while (p < src_.size() && std::isalpha(static_cast<unsigned char>(src_[p]))) ++p;
        pos_ = p;
        push(TokKind::regex, start, pos_, line_);
        return true;
    }

    void lex_punct() {
        std::size_t start = pos_;
        for (auto op : kJsOps) {
            if (src_.substr(pos_, op.size()) == op) {
                if (op == "?." && std::isdigit(static_cast<unsigned char>(peek(2)))) break;
                pos_ += op.size();
                push(TokKind::punct, start, pos_, line_);
                return;
            }
        }
        ++pos_;
        push(TokKind::punct, start, pos_, line_);
    }

    bool try_jsx() {
        std::size_t saved_pos = pos_;
        int saved_line = line_;
        std::size_t saved_tokens = tokens_.size();
        try {
            std::size_t open_at = pos_;
            push(TokKind::jsx_open, open_at, open_at, line_);
            lex_jsx_element();
            push(TokKind::jsx_close, pos_, pos_, line_);
            return true;
        } catch (const JsxAbort&) {
            pos_ = saved_pos;
            line_ = saved_line;
            tokens_.resize(saved_tokens);
            return false;
        }
    }

    void skip_jsx_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
            if (src_[pos_] == '\n') ++line_;
            ++pos_;
        }
    }

    std::string_view jsx_name() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && (is_ident_char(static_cast<unsigned char>(src_[pos_])) ||
                                      src_[pos_] == '.' || src_[pos_] == '-' || src_[pos_] == ':')) {
            ++pos_;
        }
        return src_.substr(start, pos_ - start);
    }

    void jsx_expression() {
        // at '{'
        std::size_t at = pos_;
        push(TokKind::punct, at, at + 1, line_);
        ++pos_;
        lex_code(true);
        push(TokKind::punct, pos_ - 1, pos_, line_);
    }

    // pos_ at '<'
    void lex_jsx_element() {
        ++pos_;
        skip_jsx_space();
        std::size_t name_start = pos_;
        std::string_view name = jsx_name();
        if (!name.empty()) {
            std::size_t head_end = name.find('.');
            std::string_view head = name.substr(0, head_end);
            Token t;
            t.kind = TokKind::ident;
            t.text = head;
            t.line = t.end_line = line_;
            t.begin = name_start;
            t.end = name_start + head.size();
            t.jsx_tag = std::isupper(static_cast<unsigned char>(head.empty() ? 'a' : head[0])) != 0;
            tokens_.push_back(t);
        }
        // attributes
        while (true) {
            skip_jsx_space();
            if (pos_ >= src_.size()) throw JsxAbort{};
            char c = src_[pos_];
            if (c == '/' && peek(1) == '>') {
                pos_ += 2;
                return;
            }
            if (c == '>') {
                ++pos_;
                break;
            }
            if (c == '{') {
                jsx_expression();
                continue;
            }
            if (!is_ident_start(static_cast<unsigned char>(c))) throw JsxAbort{};
            jsx_name();
            skip_jsx_space();
            if (peek(0) == '=') {
                ++pos_;
                skip_jsx_space();
                char v = peek(0);
                if (v == '"' || v == '\'') {
                    std::size_t close = src_.find(v, pos_ + 1);
                    if (close == std::string_view::npos) throw JsxAbort{};
                    for (std::size_t k = pos_; k < close; ++k) {
                        if (src_[k] == '\n') ++line_;
                    }
                    pos_ = close + 1;
                } else if (v == '{') {
                    jsx_expression();
                } else if (v == '<') {
                    lex_jsx_element();
                } else {
                    throw JsxAbort{};
                }
            }
        }
        // children
        while (true) {
            if (pos_ >= src_.size()) throw JsxAbort{};
            char c = src_[pos_];
            if (c == '\n') {
                ++line_;
                ++pos_;
            } else if (c == '{') {
                jsx_expression();
            } else if (c == '<' && peek(1) == '/') {
                pos_ += 2;
                skip_jsx_space();
                jsx_name();
                skip_jsx_space();
                if (peek(0) != '>') throw JsxAbort{};
                ++pos_;
                return;
            } else if (c == '<') {
                lex_jsx_element();
            } else {
                ++pos_;
            }
        }
    }

    void push(TokKind kind, std::size_t begin, std::size_t end, int first_line) {
        Token t;
        t.kind = kind;
        t.text = src_.substr(begin, end - begin);
        t.line = first_line;
        t.end_line = line_;
        t.begin = begin;
        t.end = end;
        tokens_.push_back(t);
    }

    std::string_view src_;
    bool allow_jsx_;
    std::size_t pos_ = 0;
    int line_ = 1;
    std::vector<Token> tokens_;
};

bool is_open(const Token& t) {
    return t.kind == TokKind::jsx_open || (t.kind == TokKind::punct && (t.text == "(" || t.text == "[" || t.text == "{"));
}
bool is_close(const Token& t) {
    return t.kind == TokKind::jsx_close || (t.kind == TokKind::punct && (t.text == ")" || t.text == "]" || t.text == "}"));
}

bool ends_expression(const Token& t) {
    switch (t.kind) {
        case TokKind::number:
        case TokKind::string:
        case TokKind::regex:
        case TokKind::jsx_close:
            return true;
        case TokKind::ident:
            return !in(t.text, {"if", "for", "while", "do", "else", "return", "throw", "new", "typeof",
                                "void", "delete", "await", "yield", "in", "of", "instanceof", "case",
                                "export", "default", "import", "function", "class", "const", "let",
                                "var", "extends", "async", "static", "get", "set"}) ||
                   in(t.text, {"return", "break", "continue"});
        case TokKind::punct:
            return in(t.text, {")", "]", "}", "++", "--"});
        case TokKind::jsx_open:
            return false;
    }
    return false;
}

bool continues_statement(const Token& t) {
    if (t.kind == TokKind::punct) {
        return !in(t.text, {"{", "!", "~", "++", "--", "@", "#", ";"});
    }
    if (t.kind == TokKind::ident) {
        return in(t.text, {"else", "catch", "finally", "instanceof", "in", "of", "as", "satisfies"});
    }
    return false;
}

struct Construct {
    enum Kind { residual, preamble, unit } kind = residual;
    PreambleKind preamble_kind = PreambleKind::global;
    std::size_t first = 0;  // token index
    std::size_t last = 0;   // token index, inclusive
    std::vector<CodeUnit> units;  // [0] is the top-level unit, followed by methods
};

class JsParser {
public:
    JsParser(std::string_view src, std::vector<Token>& tokens, bool typescript)
        : src_(src), toks_(tokens), ts_(typescript) {
        match_.assign(toks_.size(), 0);
        std::vector<std::size_t> stack;
        for (std::size_t i = 0; i < toks_.size(); ++i) {
            if (is_open(toks_[i])) {
                stack.push_back(i);
            } else if (is_close(toks_[i])) {
                if (stack.empty()) throw ParseFailure("unmatched '" + std::string(toks_[i].text) + "' on line " + std::to_string(toks_[i].line));
                match_[stack.back()] = i;
                match_[i] = stack.back();
                stack.pop_back();
            }
        }
        if (!stack.empty()) throw ParseFailure("unclosed '" + std::string(toks_[stack.back()].text) + "' opened on line " + std::to_string(toks_[stack.back()].line));
    }

    ParsedFile run() {
        std::vector<Construct> constructs;
        std::size_t i = 0;
        while (i < toks_.size()) {
            Construct c = parse_statement(i, toks_.size());
            i = c.last + 1;
            merge_or_push(constructs, std::move(c));
        }
        ParsedFile out;
        for (auto& c : constructs) {
            Span span{toks_[c.first].line, toks_[c.last].end_line};
            if (c.kind == Construct::unit) {
                c.units[0].span = span;
                for (auto& u : c.units) out.units.push_back(std::move(u));
            } else if (c.kind == Construct::preamble) {
                out.preamble.push_back({c.preamble_kind, span});
            }
        }
        int anon = 0;
        for (auto& u : out.units) {
            if (u.anonymous) u.name = "function_" + std::to_string(++anon);
        }
        for (auto& u : out.units) {
            if (u.parent && u.parent->empty()) {
                // method of an anonymous class: parent resolved after numbering
                for (const auto& cls : out.units) {
                    if (cls.kind == UnitKind::class_ && cls.span.contains(u.span) && !cls.parent) u.parent = cls.name;
                }
            }
        }
        attach_references(out.units, toks_);
        return out;
    }

private:
    // Adjacent constructs sharing a physical line are merged; a unit wins
    // over preamble, preamble over residual.
    void merge_or_push(std::vector<Construct>& out, Construct c) {
        if (!out.empty() && toks_[c.first].line <= toks_[out.back().last].end_line) {
            Construct& prev = out.back();
            prev.last = c.last;
            if (c.kind > prev.kind) {
                c.first = prev.first;
                prev = std::move(c);
            }
            return;
        }
        out.push_back(std::move(c));
    }

    std::string text_between(std::size_t first, std::size_t last_exclusive_begin) const {
        return collapse_whitespace(src_.substr(toks_[first].begin, last_exclusive_begin - toks_[first].begin));
    }

    // First-line signature for constructs without an identifiable body brace.
    std::string first_line_signature(std::size_t first, std::size_t last) const {
        std::size_t begin = toks_[first].begin;
        std::size_t end = src_.find('\n', begin);
        std::size_t stmt_end = toks_[last].end;
        if (end == std::string_view::npos || end > stmt_end) end = stmt_end;
        std::string sig = collapse_whitespace(src_.substr(begin, end - begin));
        while (!sig.empty() && (sig.back() == '{' || sig.back() == ' ')) sig.pop_back();
        return sig;
    }

    // Generic ASI-aware end of a statement beginning at `i`.
    std::size_t statement_end(std::size_t i, std::size_t limit) const {
        bool block_head = toks_[i].kind == TokKind::ident && in(toks_[i].text, {"if", "for", "while", "with", "switch"});
        bool is_do = toks_[i].is("do");
        std::size_t k = i;
        while (k < limit) {
            const Token& t = toks_[k];
            if (t.is(";")) return k;
            if (is_close(t) && match_[k] < i) return k - 1;  // closing an outer block
            std::size_t cur = k;
            if (is_open(t)) k = match_[k];
            if (block_head && cur == i + 1 && toks_[cur].is("(")) {
                // header parens: the following token belongs to this statement
                if (k + 1 < limit) {
                    ++k;
                    if (is_open(toks_[k])) k = match_[k];
                    else if (toks_[k].is(";")) return k;
                }
            }
            if (k + 1 >= limit) return k;
            const Token& cur_end = toks_[k];
            const Token& next = toks_[k + 1];
            if (next.is(";")) return k + 1;
            if (is_close(next) && match_[k + 1] < i) return k;
            if (is_do && next.is("while")) {
                ++k;
                continue;
            }
            if (next.line > cur_end.end_line && ends_expression(cur_end) && !continues_statement(next)) {
                return k;
            }
            // `}` ending a block body directly followed by a new statement on the same line
            ++k;
        }
        return limit - 1;
    }

    std::size_t skip_decorators(std::size_t i, std::size_t limit) const {
        while (i < limit && toks_[i].is("@")) {
            ++i;
            while (i < limit && (toks_[i].kind == TokKind::ident || toks_[i].is("."))) ++i;
            if (i < limit && toks_[i].is("(")) i = match_[i] + 1;
        }
        return i;
    }

    // Skips an optional `<...>` type parameter list starting at i.
    std::size_t skip_angles(std::size_t i, std::size_t limit) const {
        if (i >= limit || !toks_[i].is("<")) return i;
        int depth = 0;
        for (; i < limit; ++i) {
            if (toks_[i].is("<")) ++depth;
            else if (toks_[i].is(">")) --depth;
            else if (toks_[i].is(">>")) depth -= 2;
            else if (toks_[i].is(">>>")) depth -= 3;
            else if (is_open(toks_[i])) i = match_[i];
            if (depth <= 0) return i + 1;
        }
        return limit;
    }

    // From the token after a parameter list, finds the body '{', skipping a
    // return type annotation. Returns nullopt if a ';' or statement end comes first.
    std::optional<std::size_t> find_body(std::size_t i, std::size_t limit) const {
        std::size_t start = i;
        while (i < limit) {
            const Token& t = toks_[i];
            if (t.is("{")) {
                const Token* prev = i > start ? &toks_[i - 1] : nullptr;
                bool type_literal = prev && prev->kind == TokKind::punct &&
                                    in(prev->text, {":", "|", "&", "<", ",", "=>"});
                if (!type_literal) return i;
                i = match_[i] + 1;
                continue;
            }
            if (t.is(";") || is_close(t)) return std::nullopt;
            if (i > start && t.kind == TokKind::ident && in(t.text, {"function", "class", "export", "const", "let", "var"})) {
                return std::nullopt;
            }
            if (i > start && t.line > toks_[i - 1].end_line && ends_expression(toks_[i - 1]) &&
                !continues_statement(t) && !t.is("{")) {
                return std::nullopt;
            }
            if (is_open(t)) {
                i = match_[i] + 1;
                continue;
            }
            ++i;
        }
        return std::nullopt;
    }

    Construct parse_statement(std::size_t i, std::size_t limit) {
        Construct c;
        c.first = i;
        std::size_t k = skip_decorators(i, limit);
        bool exported = false;
        while (k < limit && toks_[k].kind == TokKind::ident &&
               in(toks_[k].text, {"export", "default", "declare", "abstract"})) {
            if (toks_[k].is("export")) exported = true;
            // `export default <expr>` handled by the generic path below
            if (toks_[k].is("default") && k + 1 < limit && !toks_[k + 1].is("function") &&
                !toks_[k + 1].is("class") && !toks_[k + 1].is("async") && !toks_[k + 1].is("abstract")) {
                ++k;
                return generic_statement(c, k, limit);
            }
            ++k;
        }
        if (k >= limit) {
            c.last = limit - 1;
            return c;
        }
        const Token& t = toks_[k];
        bool async_fn = t.is("async") && k + 1 < limit && toks_[k + 1].is("function") &&
                        toks_[k + 1].line == t.line;
        if (t.is("function") || async_fn) {
            if (auto r = function_declaration(c, async_fn ? k + 1 : k, limit)) return *r;
        }
        if (t.is("class")) {
            if (auto r = class_declaration(c, k, limit)) return *r;
        }
        if (t.is("import") && !(k + 1 < limit && (toks_[k + 1].is("(") || toks_[k + 1].is(".")))) {
            c.kind = Construct::preamble;
            c.preamble_kind = PreambleKind::import;
            c.last = statement_end(k, limit);
            return c;
        }
        if (exported && (t.is("{") || t.is("*"))) {
            c.kind = Construct::preamble;
            c.preamble_kind = PreambleKind::import;
            c.last = statement_end(k, limit);
            return c;
        }
        if (t.kind == TokKind::ident && in(t.text, {"const", "let", "var"})) {
            return variable_statement(c, k, limit);
        }
        if (ts_ && t.kind == TokKind::ident && k + 1 < limit && toks_[k + 1].kind == TokKind::ident &&
            in(t.text, {"interface", "type", "enum", "namespace", "module"})) {
            c.kind = Construct::preamble;
            c.preamble_kind = PreambleKind::global;
            std::size_t j = k + 2;
            if (!t.is("type")) {
                while (j < limit && !toks_[j].is("{") && !toks_[j].is(";")) ++j;
                c.last = (j < limit && toks_[j].is("{")) ? match_[j] : statement_end(k, limit);
                if (c.last + 1 < limit && toks_[c.last + 1].is(";") ) ++c.last;
            } else {
                c.last = statement_end(k, limit);
            }
            return c;
        }
        return generic_statement(c, k, limit);
    }

    bool contains_function(std::size_t first, std::size_t last) const {
        for (std::size_t j = first; j <= last; ++j) {
            if (toks_[j].is("function") || toks_[j].is("=>")) return true;
        }
        return false;
    }

    Construct generic_statement(Construct c, std::size_t k, std::size_t limit) {
        c.last = statement_end(k, limit);
        if (contains_function(k, c.last)) {
            c.kind = Construct::unit;
            CodeUnit u;
            u.anonymous = true;
            u.kind = UnitKind::function;
            u.signature = first_line_signature(c.first, c.last);
            c.units.push_back(std::move(u));
        }
        return c;
    }

    std::optional<Construct> function_declaration(Construct c, std::size_t k, std::size_t limit) {
        std::size_t j = k + 1;
        if (j < limit && toks_[j].is("*")) ++j;
        CodeUnit u;
        u.kind = UnitKind::function;
        if (j < limit && toks_[j].kind == TokKind::ident) {
            u.name = std::string(toks_[j].text);
            toks_[j].definition = true;
            ++j;
        } else {
            u.anonymous = true;
        }
        j = skip_angles(j, limit);
        if (j >= limit || !toks_[j].is("(")) return std::nullopt;
        auto body = find_body(match_[j] + 1, limit);
        if (!body) {
            // overload signature or ambient declaration
            c.last = statement_end(k, limit);
            return c;
        }
        u.signature = text_between(c.first, toks_[*body].begin);
        c.kind = Construct::unit;
        c.last = match_[*body];
        c.units.push_back(std::move(u));
        return c;
    }

    std::optional<Construct> class_declaration(Construct c, std::size_t k, std::size_t limit) {
        std::size_t j = k + 1;
        CodeUnit u;
        u.kind = UnitKind::class_;
        if (j < limit && toks_[j].kind == TokKind::ident && !in(toks_[j].text, {"extends", "implements"})) {
            u.name = std::string(toks_[j].text);
            toks_[j].definition = true;
            ++j;
        } else {
            u.anonymous = true;
        }
        while (j < limit && !toks_[j].is("{")) {
            if (is_open(toks_[j])) j = match_[j];
            ++j;
        }
        if (j >= limit) return std::nullopt;
        u.signature = text_between(c.first, toks_[j].begin);
        c.kind = Construct::unit;
        c.last = match_[j];
        std::string parent = u.anonymous ? std::string() : u.name;
        c.units.push_back(std::move(u));
        class_members(c.units, j + 1, match_[j], parent);
        return c;
    }

    void class_members(std::vector<CodeUnit>& units, std::size_t i, std::size_t close, const std::string& parent) {
        static const std::initializer_list<std::string_view> modifiers = {
            "static", "public", "private", "protected", "readonly", "abstract", "override",
            "declare", "async", "get", "set", "accessor"};
        while (i < close) {
            if (toks_[i].is(";")) {
                ++i;
                continue;
            }
            std::size_t mstart = i;
            i = skip_decorators(i, close);
            while (i + 1 < close && (toks_[i].is("*") ||
                                     (toks_[i].kind == TokKind::ident && in(toks_[i].text, modifiers) &&
                                      !in(toks_[i + 1].text, {"(", "=", ";", ":", "<", "?", "!", "}"})))) {
                ++i;
            }
            if (i >= close) break;
            if (toks_[i].is("static") && i + 1 < close && toks_[i + 1].is("{")) {
                i = match_[i + 1] + 1;
                continue;
            }
            std::string name;
            std::size_t name_tok = i;
            if (toks_[i].is("[")) {
                name = collapse_whitespace(src_.substr(toks_[i].begin, toks_[match_[i]].end - toks_[i].begin));
                i = match_[i] + 1;
            } else {
                name = std::string(toks_[i].text);
                if (toks_[i].kind == TokKind::string && name.size() >= 2) name = name.substr(1, name.size() - 2);
                ++i;
            }
            if (i < close && (toks_[i].is("?") || toks_[i].is("!"))) ++i;
            std::size_t after_name = i;
            i = skip_angles(i, close);
            if (i < close && toks_[i].is("(")) {
                auto body = find_body(match_[i] + 1, close);
                if (body) {
                    toks_[name_tok].definition = true;
                    CodeUnit m;
                    m.name = name;
                    m.kind = UnitKind::method;
                    m.parent = parent;
                    m.signature = text_between(mstart, toks_[*body].begin);
                    m.span = Span{toks_[mstart].line, toks_[match_[*body]].end_line};
                    units.push_back(std::move(m));
                    i = match_[*body] + 1;
                } else {
                    i = member_end(match_[i] + 1, close);
                }
                continue;
            }
            i = after_name;
            std::size_t end = member_end(i, close);
            if (i < close && toks_[i].is("=") && contains_function(i, std::min(end, close - 1))) {
                toks_[name_tok].definition = true;
                CodeUnit m;
                m.name = name;
                m.kind = UnitKind::method;
                m.parent = parent;
                m.signature = first_line_signature(mstart, std::min(end, close - 1));
                m.span = Span{toks_[mstart].line, toks_[std::min(end, close - 1)].end_line};
                units.push_back(std::move(m));
            }
            i = end + 1;
        }
    }

    std::size_t member_end(std::size_t i, std::size_t close) const {
        if (i >= close) return close;
        std::size_t end = statement_end(i, close);
        return std::max(end, i);
    }

    Construct variable_statement(Construct c, std::size_t k, std::size_t limit) {
        c.last = statement_end(k, limit);
        // Single `name = init` declarator?
        std::size_t j = k + 1;
        bool single = j < c.last && toks_[j].kind == TokKind::ident;
        std::size_t eq = 0;
        if (single) {
            std::size_t p = j + 1;
            if (p <= c.last && toks_[p].is("!")) ++p;
            if (p <= c.last && toks_[p].is(":")) {
                // type annotation: scan to '='
                while (p <= c.last && !toks_[p].is("=")) {
                    if (is_open(toks_[p])) p = match_[p];
                    ++p;
                }
            }
            if (p <= c.last && toks_[p].is("=")) {
                eq = p;
                for (std::size_t q = skip_angles(p + 1, c.last + 1); q <= c.last; ++q) {
                    if (toks_[q].is(",")) {
                        single = false;
                        break;
                    }
                    if (is_open(toks_[q])) q = match_[q];
                }
            } else {
                single = false;
            }
        }
        bool has_fn = contains_function(k, c.last);
        bool has_class = false;
        for (std::size_t q = k; q <= c.last; ++q) has_class = has_class || toks_[q].is("class");
        if (has_fn || has_class) {
            c.kind = Construct::unit;
            CodeUnit u;
            if (single) {
                u.name = std::string(toks_[j].text);
                toks_[j].definition = true;
                bool direct_class = eq + 1 <= c.last && toks_[eq + 1].is("class");
                u.kind = direct_class ? UnitKind::class_ : UnitKind::function;
            } else {
                u.anonymous = true;
                u.kind = UnitKind::function;
            }
            u.signature = first_line_signature(c.first, c.last);
            c.units.push_back(std::move(u));
            if (single && c.units[0].kind == UnitKind::class_) {
                std::size_t b = eq + 1;
                while (b <= c.last && !toks_[b].is("{")) {
                    if (is_open(toks_[b])) b = match_[b];
                    ++b;
                }
                if (b <= c.last) class_members(c.units, b + 1, match_[b], c.units[0].name);
            }
            return c;
        }
        c.kind = Construct::preamble;
        bool is_require = false;
        for (std::size_t q = k; q + 1 <= c.last; ++q) {
            is_require = is_require || (toks_[q].is("require") && toks_[q + 1].is("("));
        }
        c.preamble_kind = is_require ? PreambleKind::import : PreambleKind::global;
        return c;
    }

    std::string_view src_;
    std::vector<Token>& toks_;
    bool ts_;
    std::vector<std::size_t> match_;
};

}  // namespace

std::vector<Token> lex_javascript(std::string_view src, bool allow_jsx) {
    return JsLexer(src, allow_jsx).run();
}

ParsedFile parse_javascript(std::string_view src, bool typescript, bool allow_jsx) {
    std::vector<Token> tokens = lex_javascript(src, allow_jsx);
    return JsParser(src, tokens, typescript).run();
}

}  // namespace docrepair::detail
