#ifndef PSATZ_PROBLEM_HPP
#define PSATZ_PROBLEM_HPP

#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "psatz/matpoly.hpp"
#include "psatz/witness.hpp"

namespace psatz {

struct ParseError : std::runtime_error {
    int line, col;
    ParseError(const std::string& msg, int line_, int col_)
        : std::runtime_error("parse error at " + std::to_string(line_) + ":" +
                             std::to_string(col_) + ": " + msg),
          line(line_),
          col(col_) {}
};

namespace detail {

struct Token {
    enum class Kind { Number, Ident, Punct, End };
    Kind kind;
    std::string text;
    int line, col;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token next() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) bump();
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= src_.size()) {
            tok_.kind = Token::Kind::End;
            tok_.text.clear();
            return;
        }
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string num;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                num += src_[pos_];
                bump();
            }
            if (pos_ < src_.size() && src_[pos_] == '/') {
                size_t save = pos_;
                int sl = line_, sc = col_;
                bump();
                if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                    num += '/';
                    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                        num += src_[pos_];
                        bump();
                    }
                } else {
                    pos_ = save;
                    line_ = sl;
                    col_ = sc;
                }
            }
            tok_.kind = Token::Kind::Number;
            tok_.text = num;
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string id;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                id += src_[pos_];
                bump();
            }
            tok_.kind = Token::Kind::Ident;
            tok_.text = id;
            return;
        }
        tok_.kind = Token::Kind::Punct;
        tok_.text = std::string(1, c);
        bump();
    }

    void bump() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    const std::string& src_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token tok_;
};

/// Recursive-descent parser for polynomial expressions over + - * ^,
/// rational literals and declared variable names.
class ExprParser {
public:
    ExprParser(Lexer& lex, int nvars, const std::vector<std::string>& names)
        : lex_(lex), nvars_(nvars), names_(names) {}

    Poly parse_expr() {
        Poly acc = parse_term();
        while (is_punct("+") || is_punct("-")) {
            const bool minus = lex_.next().text == "-";
            Poly rhs = parse_term();
            acc = minus ? acc - rhs : acc + rhs;
        }
        return acc;
    }

private:
    Poly parse_term() {
        Poly acc = parse_unary();
        while (is_punct("*")) {
            lex_.next();
            acc *= parse_unary();
        }
        return acc;
    }

    Poly parse_unary() {
        if (is_punct("-")) {
            lex_.next();
            return -parse_unary();
        }
        return parse_factor();
    }

    Poly parse_factor() {
        Poly base = parse_base();
        if (is_punct("^")) {
            lex_.next();
            const Token t = lex_.next();
            if (t.kind != Token::Kind::Number || t.text.find('/') != std::string::npos)
                throw ParseError("expected integer exponent", t.line, t.col);
            return base.pow(std::stol(t.text));
        }
        return base;
    }

    Poly parse_base() {
        const Token t = lex_.next();
        if (t.kind == Token::Kind::Number) return Poly::constant(nvars_, parse_rat(t.text));
        if (t.kind == Token::Kind::Ident) {
            for (int i = 0; i < nvars_; ++i)
                if (names_[static_cast<size_t>(i)] == t.text) return Poly::variable(nvars_, i);
            throw ParseError("unknown variable '" + t.text + "'", t.line, t.col);
        }
        if (t.kind == Token::Kind::Punct && t.text == "(") {
            Poly inner = parse_expr();
            expect_punct(")");
            return inner;
        }
        throw ParseError("expected a polynomial factor", t.line, t.col);
    }

    bool is_punct(const char* p) const {
        return lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == p;
    }

    void expect_punct(const char* p) {
        const Token t = lex_.next();
        if (t.kind != Token::Kind::Punct || t.text != p)
            throw ParseError(std::string("expected '") + p + "'", t.line, t.col);
    }

    Lexer& lex_;
    int nvars_;
    const std::vector<std::string>& names_;
};

}  // namespace detail

/// Parse a standalone polynomial expression (used by the certificate reader).
inline Poly parse_poly_expr(const std::string& text, int nvars,
                            const std::vector<std::string>& names) {
    detail::Lexer lex(text);
    detail::ExprParser p(lex, nvars, names);
    Poly out = p.parse_expr();
    if (lex.peek().kind != detail::Token::Kind::End)
        throw ParseError("trailing input after polynomial", lex.peek().line, lex.peek().col);
    return out;
}

inline Poly parse_poly_expr(const std::string& text, int nvars) {
    return parse_poly_expr(text, nvars, default_var_names(nvars));
}

/// A problem instance: variable count, constraints, and a scalar or
/// symmetric matrix target.
struct ProblemFile {
    int nvars = 0;
    std::vector<std::string> var_names;
    std::vector<Poly> constraints;
    std::optional<Poly> poly_target;
    std::optional<MatPoly> matrix_target;

    bool has_matrix_target() const { return matrix_target.has_value(); }
    ConstraintSet constraint_set() const { return ConstraintSet(nvars, constraints); }

    MatPoly target_as_matrix() const {
        if (matrix_target) return *matrix_target;
        return MatPoly::scalar(*poly_target);
    }
};

/// Grammar: `vars d;` then `constraint <expr>;`* then
/// `target poly <expr>;` or `target matrix [[...],[...]];`
inline ProblemFile parse_problem(const std::string& text, bool require_symmetric_target = true) {
    detail::Lexer lex(text);
    ProblemFile pf;
    bool have_vars = false, have_target = false;

    auto expect_punct = [&](const char* p) {
        const detail::Token t = lex.next();
        if (t.kind != detail::Token::Kind::Punct || t.text != p)
            throw ParseError(std::string("expected '") + p + "'", t.line, t.col);
    };

    while (lex.peek().kind != detail::Token::Kind::End) {
        const detail::Token kw = lex.next();
        if (kw.kind != detail::Token::Kind::Ident)
            throw ParseError("expected a statement keyword", kw.line, kw.col);
        if (kw.text == "vars") {
            const detail::Token t = lex.next();
            if (t.kind != detail::Token::Kind::Number || t.text.find('/') != std::string::npos)
                throw ParseError("expected the variable count", t.line, t.col);
            pf.nvars = std::stoi(t.text);
            if (pf.nvars < 0) throw ParseError("negative variable count", t.line, t.col);
            pf.var_names = default_var_names(pf.nvars);
            have_vars = true;
            expect_punct(";");
        } else if (kw.text == "constraint") {
            if (!have_vars) throw ParseError("'vars' must come first", kw.line, kw.col);
            detail::ExprParser ep(lex, pf.nvars, pf.var_names);
            pf.constraints.push_back(ep.parse_expr());
            expect_punct(";");
        } else if (kw.text == "target") {
            if (!have_vars) throw ParseError("'vars' must come first", kw.line, kw.col);
            if (have_target) throw ParseError("duplicate target", kw.line, kw.col);
            const detail::Token kind = lex.next();
            if (kind.kind != detail::Token::Kind::Ident)
                throw ParseError("expected 'poly' or 'matrix'", kind.line, kind.col);
            if (kind.text == "poly") {
                detail::ExprParser ep(lex, pf.nvars, pf.var_names);
                pf.poly_target = ep.parse_expr();
            } else if (kind.text == "matrix") {
                std::vector<std::vector<Poly>> rows;
                expect_punct("[");
                while (true) {
                    expect_punct("[");
                    std::vector<Poly> row;
                    while (true) {
                        detail::ExprParser ep(lex, pf.nvars, pf.var_names);
                        row.push_back(ep.parse_expr());
                        if (lex.peek().kind == detail::Token::Kind::Punct && lex.peek().text == ",")
                            lex.next();
                        else
                            break;
                    }
                    expect_punct("]");
                    rows.push_back(std::move(row));
                    if (lex.peek().kind == detail::Token::Kind::Punct && lex.peek().text == ",")
                        lex.next();
                    else
                        break;
                }
                expect_punct("]");
                const int n = static_cast<int>(rows.size());
                for (const auto& r : rows)
                    if (static_cast<int>(r.size()) != n)
                        throw ParseError("matrix target must be square", kind.line, kind.col);
                MatPoly m(n, n, pf.nvars);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        m.at(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
                if (require_symmetric_target && !m.is_symmetric())
                    throw ParseError("matrix target is not symmetric", kind.line, kind.col);
                pf.matrix_target = std::move(m);
            } else {
                throw ParseError("expected 'poly' or 'matrix'", kind.line, kind.col);
            }
            have_target = true;
            expect_punct(";");
        } else {
            throw ParseError("unknown statement '" + kw.text + "'", kw.line, kw.col);
        }
    }
    if (!have_vars) throw ParseError("missing 'vars' statement", 1, 1);
    if (!have_target) throw ParseError("missing 'target' statement", 1, 1);
    return pf;
}

}  // namespace psatz

#endif
