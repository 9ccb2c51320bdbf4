#pragma once

#include "prast/ast.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace prast {

enum class TokKind { Ident, Keyword, Punct, Number, Star, End };

struct Token {
    TokKind kind = TokKind::End;
    std::string lexeme;
    Span span;
};

// Throws DiagnosticError on an unexpected character.
std::vector<Token> lex(std::string_view text);

struct ParseResult {
    std::optional<Signature> sig;  // set iff diags is empty
    std::vector<Diagnostic> diags;
    bool ok() const { return sig.has_value(); }
};

// Parses and validates. Thread-safe.
ParseResult parse_program(std::string_view text);

// Throws DiagnosticError carrying the first diagnostic.
Signature parse_or_throw(std::string_view text);

std::string print_type(const TypePtr& t);
std::string print_proc(const ProcPtr& p, int indent = 2);
std::string print_decl(const ProcDef& d);
std::string pretty_print(const Signature& sig);

}  // namespace prast
