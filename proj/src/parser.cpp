#include "prast/parser.hpp"

#include <map>

namespace prast {

namespace {

struct RawProc {
    std::string name;
    std::string offered;
    std::vector<std::string> used;
    ProcPtr body;
    Span span;
};

struct RawDecl {
    ProcDef def;
};

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

    ParseResult run() {
        std::vector<RawDecl> decls;
        std::vector<RawProc> procs;
        std::vector<TypeDef> types;
        std::vector<Diagnostic> diags;
        while (peek().kind != TokKind::End) {
            try {
                if (is_kw("type")) {
                    types.push_back(type_def());
                } else if (is_kw("decl")) {
                    decls.push_back({decl()});
                } else if (is_kw("proc")) {
                    procs.push_back(proc_def());
                } else {
                    fail(peek().span, "expected 'type', 'decl' or 'proc', found " + describe(peek()));
                }
            } catch (const DiagnosticError& e) {
                diags.push_back(e.diag);
                advance();
                while (peek().kind != TokKind::End && !is_kw("type") && !is_kw("decl") && !is_kw("proc")) advance();
            }
        }

        Signature sig;
        sig.types = std::move(types);
        std::map<std::string, const RawProc*> by_name;
        for (const auto& p : procs) {
            if (by_name.count(p.name)) {
                diags.push_back({p.span, "process '" + p.name + "' defined twice", "parse"});
                continue;
            }
            by_name[p.name] = &p;
        }
        std::map<std::string, bool> declared;
        for (auto& d : decls) {
            ProcDef def = d.def;
            if (declared.count(def.name)) {
                diags.push_back({def.decl_span, "process '" + def.name + "' declared twice", "parse"});
                continue;
            }
            declared[def.name] = true;
            auto it = by_name.find(def.name);
            if (it == by_name.end()) {
                diags.push_back({def.decl_span, "declaration of '" + def.name + "' has no definition", "parse"});
                continue;
            }
            const RawProc& p = *it->second;
            if (p.used.size() != def.used.size()) {
                diags.push_back({p.span,
                                 "definition of '" + def.name + "' takes " + std::to_string(p.used.size()) +
                                     " channels but its declaration lists " + std::to_string(def.used.size()),
                                 "parse"});
                continue;
            }
            // The definition's channel names are the binding ones.
            for (std::size_t k = 0; k < p.used.size(); ++k) def.used[k].name = p.used[k];
            def.offered.name = p.offered;
            def.body = p.body;
            def.proc_span = p.span;
            sig.procs.push_back(std::move(def));
        }
        for (const auto& p : procs)
            if (!declared.count(p.name))
                diags.push_back({p.span, "definition of '" + p.name + "' has no declaration", "parse"});

        if (diags.empty()) {
            auto v = validate_signature(sig);
            diags.insert(diags.end(), v.begin(), v.end());
        }
        ParseResult r;
        r.diags = std::move(diags);
        if (r.diags.empty()) r.sig = std::move(sig);
        return r;
    }

private:
    std::vector<Token> t_;
    std::size_t pos_ = 0;

    const Token& peek(std::size_t k = 0) const { return t_[std::min(pos_ + k, t_.size() - 1)]; }
    const Token& advance() {
        const Token& t = t_[pos_];
        if (pos_ + 1 < t_.size()) ++pos_;
        return t;
    }
    bool is_kw(const char* k, std::size_t off = 0) const {
        return peek(off).kind == TokKind::Keyword && peek(off).lexeme == k;
    }
    bool is_p(const char* p, std::size_t off = 0) const {
        return peek(off).kind == TokKind::Punct && peek(off).lexeme == p;
    }

    static std::string describe(const Token& t) {
        if (t.kind == TokKind::End) return "end of input";
        return "'" + t.lexeme + "'";
    }

    [[noreturn]] static void fail(Span s, std::string msg) { throw DiagnosticError(Diagnostic{s, std::move(msg), "parse"}); }

    void expect_p(const char* p) {
        if (!is_p(p)) fail(peek().span, std::string("expected '") + p + "', found " + describe(peek()));
        advance();
    }
    void expect_kw(const char* k) {
        if (!is_kw(k)) fail(peek().span, std::string("expected '") + k + "', found " + describe(peek()));
        advance();
    }
    std::string ident(const char* what) {
        if (peek().kind != TokKind::Ident) fail(peek().span, std::string("expected ") + what + ", found " + describe(peek()));
        return advance().lexeme;
    }

    Rational number() {
        if (peek().kind != TokKind::Number) fail(peek().span, "expected a rational literal, found " + describe(peek()));
        const Token& t = advance();
        auto r = Rational::try_parse(t.lexeme);
        if (!r) fail(t.span, "malformed rational literal '" + t.lexeme + "'");
        return *r;
    }

    Prob prob_annot() {
        if (peek().kind == TokKind::Star) {
            advance();
            return Prob::star();
        }
        Span s = peek().span;
        Rational r = number();
        if (r > Rational(1)) fail(s, "probability literal out of range");
        return Prob::constant(r);
    }

    Pot pot_annot() {
        if (peek().kind == TokKind::Star) {
            advance();
            return Pot::star();
        }
        return Pot::constant(number());
    }

    Pot braced_pot() {
        expect_p("{");
        Pot p = pot_annot();
        expect_p("}");
        return p;
    }

    // ---- types ----

    TypeDef type_def() {
        Span s = peek().span;
        expect_kw("type");
        std::string n = ident("a type name");
        expect_p("=");
        TypePtr ty = type();
        return TypeDef{n, ty, s};
    }

    TypePtr type() {
        Span s = peek().span;
        TypePtr l = tensor();
        if (is_p("-o")) {
            advance();
            return make_binary(TypeKind::Lolli, l, type(), s);
        }
        return l;
    }

    TypePtr tensor() {
        Span s = peek().span;
        TypePtr l = prefix();
        if (peek().kind == TokKind::Star) {
            advance();
            return make_binary(TypeKind::Tensor, l, tensor(), s);
        }
        return l;
    }

    TypePtr prefix() {
        Span s = peek().span;
        if (is_p("|>") || is_p("<|")) {
            TypeKind k = is_p("|>") ? TypeKind::PayPot : TypeKind::GetPot;
            advance();
            Pot p = braced_pot();
            return make_pot(k, p, prefix(), s);
        }
        return atom();
    }

    TypePtr atom() {
        const Token& t = peek();
        Span s = t.span;
        if (t.kind == TokKind::Number) {
            if (t.lexeme != "1") fail(s, "expected a type, found " + describe(t));
            advance();
            return make_one(s);
        }
        if (t.kind == TokKind::Ident) {
            advance();
            return make_name(t.lexeme, s);
        }
        if (is_p("(")) {
            advance();
            TypePtr ty = type();
            expect_p(")");
            return ty;
        }
        if (is_p("+") || is_p("&")) {
            bool internal = is_p("+");
            advance();
            expect_p("{");
            std::vector<Branch> bs;
            int with = 0, without = 0;
            while (true) {
                Branch b;
                b.label = ident("a label");
                if (is_p("^")) {
                    advance();
                    b.prob = prob_annot();
                    ++with;
                } else {
                    ++without;
                }
                expect_p(":");
                b.cont = type();
                bs.push_back(std::move(b));
                if (is_p(",")) {
                    advance();
                    continue;
                }
                break;
            }
            expect_p("}");
            if (with && without) fail(s, "either every branch or no branch of a choice carries a probability");
            TypeKind k = internal ? (with ? TypeKind::PIChoice : TypeKind::IChoice)
                                  : (with ? TypeKind::PEChoice : TypeKind::EChoice);
            return make_choice(k, std::move(bs), s);
        }
        fail(s, "expected a type, found " + describe(t));
    }

    // ---- declarations ----

    ProcDef decl() {
        ProcDef d;
        d.decl_span = peek().span;
        expect_kw("decl");
        d.name = ident("a process name");
        expect_p(":");
        if (is_p(".")) {
            advance();
        } else {
            while (is_p("(")) {
                advance();
                ChanDecl c;
                c.name = ident("a channel name");
                expect_p(":");
                c.type = type();
                expect_p(")");
                d.used.push_back(std::move(c));
                if (is_p(",")) advance();
            }
            if (d.used.empty()) fail(peek().span, "expected '.' or a channel list, found " + describe(peek()));
        }
        if (is_p("|-")) {
            advance();
            d.potential = Pot::constant(Rational(0));
        } else if (is_p("|")) {
            advance();
            d.potential = braced_pot();
            expect_p("-");
        } else {
            fail(peek().span, "expected a turnstile, found " + describe(peek()));
        }
        expect_p("(");
        d.offered.name = ident("a channel name");
        expect_p(":");
        d.offered.type = type();
        expect_p(")");
        return d;
    }

    RawProc proc_def() {
        RawProc r;
        r.span = peek().span;
        expect_kw("proc");
        r.offered = ident("the offered channel");
        expect_p("<-");
        r.name = ident("a process name");
        while (peek().kind == TokKind::Ident) r.used.push_back(advance().lexeme);
        expect_p("=");
        r.body = proc();
        return r;
    }

    // ---- processes ----

    bool at_end_of_proc() const {
        return peek().kind == TokKind::End || is_p("|") || is_p(")") || is_kw("type") || is_kw("decl") ||
               is_kw("proc");
    }

    ProcPtr seq(std::shared_ptr<ProcExpr> head) {
        expect_p(";");
        head->cont = proc();
        return head;
    }

    std::vector<Alt> alts() {
        expect_p("(");
        std::vector<Alt> as;
        while (true) {
            Alt a;
            a.label = ident("a branch label");
            expect_p("=>");
            a.body = proc();
            as.push_back(std::move(a));
            if (is_p("|")) {
                advance();
                continue;
            }
            break;
        }
        expect_p(")");
        return as;
    }

    ProcPtr proc() {
        const Token& t = peek();
        auto e = std::make_shared<ProcExpr>();
        e->span = t.span;
        if (is_p("(")) {
            advance();
            ProcPtr p = proc();
            expect_p(")");
            return p;
        }
        if (t.kind == TokKind::Keyword) {
            std::string k = t.lexeme;
            advance();
            if (k == "case" || k == "pcase") {
                e->kind = k == "case" ? ProcKind::Case : ProcKind::PCase;
                e->x = ident("a channel");
                e->alts = alts();
                return e;
            }
            if (k == "flip") {
                e->kind = ProcKind::Flip;
                bool braced = is_p("{");
                if (braced) advance();
                if (peek().kind == TokKind::Star) fail(peek().span, "flip probability must be a constant");
                e->prob = prob_annot();
                if (braced) expect_p("}");
                e->alts = alts();
                if (e->alts.size() != 2 || e->alts[0].label != "H" || e->alts[1].label != "T")
                    fail(t.span, "flip takes exactly the branches H and T, in that order");
                return e;
            }
            if (k == "send") {
                e->kind = ProcKind::SendChan;
                e->x = ident("a channel");
                e->y = ident("a channel");
                return seq(e);
            }
            if (k == "close") {
                e->kind = ProcKind::Close;
                e->x = ident("a channel");
                return e;
            }
            if (k == "wait") {
                e->kind = ProcKind::Wait;
                e->x = ident("a channel");
                return seq(e);
            }
            if (k == "pay" || k == "get") {
                e->kind = k == "pay" ? ProcKind::Pay : ProcKind::Get;
                e->x = ident("a channel");
                e->pot = braced_pot();
                return seq(e);
            }
            if (k == "work") {
                e->kind = ProcKind::Work;
                Span s = peek().span;
                e->pot = braced_pot();
                if (!e->pot.is_const()) fail(s, "work amount must be a constant");
                return seq(e);
            }
            fail(t.span, "unexpected keyword '" + k + "'");
        }
        if (t.kind != TokKind::Ident) fail(t.span, "expected a process, found " + describe(t));
        std::string x = advance().lexeme;
        e->x = x;
        if (is_p(".") || is_p("..")) {
            e->kind = is_p(".") ? ProcKind::SendLabel : ProcKind::PSendLabel;
            advance();
            e->label = ident("a label");
            return seq(e);
        }
        if (is_p("<->")) {
            advance();
            e->kind = ProcKind::Fwd;
            e->y = ident("a channel");
            return e;
        }
        expect_p("<-");
        if (is_kw("recv")) {
            advance();
            e->kind = ProcKind::RecvChan;
            e->y = x;
            e->x = ident("a channel");
            return seq(e);
        }
        e->kind = ProcKind::Spawn;
        e->callee = ident("a process name");
        while (peek().kind == TokKind::Ident) e->args.push_back(advance().lexeme);
        if (is_p(";")) return seq(e);
        if (!at_end_of_proc()) fail(peek().span, "expected ';' or the end of the process, found " + describe(peek()));
        // tail call: spawn into a fresh channel and forward to it
        e->tail = true;
        e->x = "%" + x;
        auto fwd = std::make_shared<ProcExpr>();
        fwd->kind = ProcKind::Fwd;
        fwd->x = x;
        fwd->y = e->x;
        fwd->span = t.span;
        e->cont = fwd;
        return e;
    }
};

}  // namespace

ParseResult parse_program(std::string_view text) {
    std::vector<Token> toks;
    try {
        toks = lex(text);
    } catch (const DiagnosticError& e) {
        ParseResult r;
        r.diags.push_back(e.diag);
        return r;
    }
    return Parser(std::move(toks)).run();
}

Signature parse_or_throw(std::string_view text) {
    auto r = parse_program(text);
    if (!r.ok()) throw DiagnosticError(r.diags.front());
    return std::move(*r.sig);
}

}  // namespace prast
