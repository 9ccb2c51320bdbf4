#include "prast/parser.hpp"

#include <cctype>
#include <set>

namespace prast {

namespace {

const std::set<std::string>& keywords() {
    static const std::set<std::string> k = {"type", "decl", "proc", "case", "pcase", "flip", "send",
                                            "recv", "close", "wait", "pay",  "get",  "work"};
    return k;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<Token> lex(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0;
    int line = 1, col = 1;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) {
                ++col;
            }
        }
    };
    auto emit = [&](TokKind k, std::size_t len) {
        Token t{k, std::string(text.substr(i, len)), Span{line, col, i, i + len}};
        advance(len);
        out.push_back(std::move(t));
    };
    auto starts = [&](std::string_view s) { return text.substr(i, s.size()) == s; };

    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '%') {
            while (i < text.size() && text[i] != '\n') advance(1);
            continue;
        }
        if (ident_start(c)) {
            std::size_t j = i;
            while (j < text.size() && ident_char(text[j])) ++j;
            std::string w(text.substr(i, j - i));
            emit(keywords().count(w) ? TokKind::Keyword : TokKind::Ident, j - i);
            continue;
        }
        if (digit(c)) {
            std::size_t j = i;
            while (j < text.size() && digit(text[j])) ++j;
            if (j + 1 < text.size() && (text[j] == '.' || text[j] == '/') && digit(text[j + 1])) {
                ++j;
                while (j < text.size() && digit(text[j])) ++j;
            }
            emit(TokKind::Number, j - i);
            continue;
        }
        if (c == '*') {
            emit(TokKind::Star, 1);
            continue;
        }
        static const char* multi[] = {"<->", "<-", "<|", "|>", "|-", "=>", ".."};
        bool matched = false;
        for (const char* m : multi) {
            if (starts(m)) {
                emit(TokKind::Punct, std::string_view(m).size());
                matched = true;
                break;
            }
        }
        if (matched) continue;
        if (starts("-o") && (i + 2 >= text.size() || !ident_char(text[i + 2]))) {
            emit(TokKind::Punct, 2);
            continue;
        }
        if (std::string_view("(){},:;.|+&^=-").find(c) != std::string_view::npos) {
            emit(TokKind::Punct, 1);
            continue;
        }
        std::size_t len = 1;
        while (i + len < text.size() && (static_cast<unsigned char>(text[i + len]) & 0xC0) == 0x80) ++len;
        throw DiagnosticError(Diagnostic{Span{line, col, i, i + len},
                                         "unexpected character '" + std::string(text.substr(i, len)) + "'", "lex"});
    }
    out.push_back(Token{TokKind::End, "", Span{line, col, text.size(), text.size()}});
    return out;
}

}  // namespace prast
