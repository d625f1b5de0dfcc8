#include "geom/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>

namespace geom {
namespace expr {

namespace {

Expr make(NodeKind k, std::vector<Expr> children) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->children = std::move(children);
    return n;
}

struct FunctionName {
    const char* name;
    NodeKind kind;
};

constexpr FunctionName kFunctions[] = {
    {"sin", NodeKind::Sin},   {"cos", NodeKind::Cos}, {"sinh", NodeKind::Sinh},
    {"cosh", NodeKind::Cosh}, {"exp", NodeKind::Exp}, {"ln", NodeKind::Ln},
};

const char* function_name(NodeKind k) {
    for (const auto& f : kFunctions)
        if (f.kind == k) return f.name;
    return nullptr;
}

class Parser {
public:
    Parser(std::string_view text, std::span<const std::string> coords, int line, int column_offset)
        : text_(text), coords_(coords), line_(line), col0_(column_offset) {}

    Expr parse_all() {
        skip_ws();
        if (pos_ >= text_.size()) fail("empty expression", pos_);
        Expr e = parse_expr();
        skip_ws();
        if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'", pos_);
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
        throw SyntaxError("syntax error: " + msg, line_, col0_ + static_cast<int>(at) + 1);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr parse_expr() {
        Expr lhs = parse_term();
        for (;;) {
            if (accept('+')) lhs = add(lhs, parse_term());
            else if (accept('-')) lhs = sub(lhs, parse_term());
            else return lhs;
        }
    }

    Expr parse_term() {
        Expr lhs = parse_unary();
        for (;;) {
            if (accept('*')) lhs = mul(lhs, parse_unary());
            else if (accept('/')) lhs = div(lhs, parse_unary());
            else return lhs;
        }
    }

    Expr parse_unary() {
        if (accept('-')) return neg(parse_unary());
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_primary();
        if (accept('^')) return pow(base, parse_unary());
        return base;
    }

    Expr parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("expected an operand before end of input", pos_);
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (c == '(') {
            const std::size_t open = pos_++;
            skip_ws();
            if (pos_ >= text_.size()) fail("unclosed '('", open);
            Expr inner = parse_expr();
            if (!accept(')')) fail("unclosed '('", open);
            return inner;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        fail("unexpected '" + std::string(1, c) + "'", pos_);
    }

    Expr parse_number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            } else {
                pos_ = save;
            }
        }
        std::string lit(text_.substr(start, pos_ - start));
        char* end = nullptr;
        double v = std::strtod(lit.c_str(), &end);
        if (end != lit.c_str() + lit.size()) fail("malformed number '" + lit + "'", start);
        return constant(v);
    }

    Expr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
        const std::string id(text_.substr(start, pos_ - start));
        for (const auto& f : kFunctions) {
            if (id == f.name) {
                skip_ws();
                if (pos_ >= text_.size() || text_[pos_] != '(') fail("expected '(' after function " + id, pos_);
                const std::size_t open = pos_++;
                skip_ws();
                if (pos_ >= text_.size()) fail("unclosed '('", open);
                Expr arg = parse_expr();
                if (!accept(')')) fail("unclosed '('", open);
                return unary(f.kind, arg);
            }
        }
        if (id == "pi") return constant(std::numbers::pi);
        for (std::size_t i = 0; i < coords_.size(); ++i)
            if (coords_[i] == id) return coordinate(static_cast<int>(i));
        fail("unknown coordinate name '" + id + "'", start);
    }

    std::string_view text_;
    std::span<const std::string> coords_;
    int line_;
    int col0_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr constant(double v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Constant;
    n->value = v;
    return n;
}

Expr coordinate(int index) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Coordinate;
    n->coord = index;
    return n;
}

Expr neg(Expr a) {
    if (a->kind == NodeKind::Constant) return constant(-a->value);
    return make(NodeKind::Neg, {std::move(a)});
}

Expr add(Expr a, Expr b) { return make(NodeKind::Add, {std::move(a), std::move(b)}); }
Expr sub(Expr a, Expr b) { return make(NodeKind::Sub, {std::move(a), std::move(b)}); }
Expr mul(Expr a, Expr b) { return make(NodeKind::Mul, {std::move(a), std::move(b)}); }
Expr div(Expr a, Expr b) { return make(NodeKind::Div, {std::move(a), std::move(b)}); }
Expr pow(Expr a, Expr b) { return make(NodeKind::Pow, {std::move(a), std::move(b)}); }

Expr unary(NodeKind fn, Expr a) {
    if (!function_name(fn)) throw ConfigError("not a unary function node");
    return make(fn, {std::move(a)});
}

bool is_constant(const Expr& e) {
    if (e->kind == NodeKind::Coordinate) return false;
    for (const auto& c : e->children)
        if (!is_constant(c)) return false;
    return true;
}

bool equal(const Expr& a, const Expr& b) {
    if (a.get() == b.get()) return true;
    if (!a || !b || a->kind != b->kind || a->children.size() != b->children.size()) return false;
    if (a->kind == NodeKind::Constant && a->value != b->value) return false;
    if (a->kind == NodeKind::Coordinate && a->coord != b->coord) return false;
    for (std::size_t i = 0; i < a->children.size(); ++i)
        if (!equal(a->children[i], b->children[i])) return false;
    return true;
}

Expr parse(std::string_view text, std::span<const std::string> coords, int line, int column_offset) {
    return Parser(text, coords, line, column_offset).parse_all();
}

std::string format_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::string print(const Expr& e, std::span<const std::string> coords) {
    switch (e->kind) {
        case NodeKind::Constant:
            return e->value < 0 || (e->value == 0 && std::signbit(e->value)) ? "(-" + format_number(-e->value) + ")"
                                                                            : format_number(e->value);
        case NodeKind::Coordinate: return coords[static_cast<std::size_t>(e->coord)];
        case NodeKind::Neg: return "(-" + print(e->children[0], coords) + ")";
        case NodeKind::Add: return "(" + print(e->children[0], coords) + " + " + print(e->children[1], coords) + ")";
        case NodeKind::Sub: return "(" + print(e->children[0], coords) + " - " + print(e->children[1], coords) + ")";
        case NodeKind::Mul: return "(" + print(e->children[0], coords) + " * " + print(e->children[1], coords) + ")";
        case NodeKind::Div: return "(" + print(e->children[0], coords) + " / " + print(e->children[1], coords) + ")";
        case NodeKind::Pow: return "(" + print(e->children[0], coords) + " ^ " + print(e->children[1], coords) + ")";
        default: return std::string(function_name(e->kind)) + "(" + print(e->children[0], coords) + ")";
    }
}

}  // namespace expr

namespace {

double fold_constant(const Expr& e) {
    ExprProgram p(e);
    return p.eval(std::span<const double>{});
}

}  // namespace

ExprProgram::ExprProgram(const Expr& e) {
    constant_ = expr::is_constant(e);
    emit(e, 1);
}

void ExprProgram::emit(const Expr& e, int depth) {
    max_depth_ = std::max(max_depth_, depth);
    auto bin = [&](Op op) {
        emit(e->children[0], depth);
        emit(e->children[1], depth + 1);
        code_.push_back({op, -1, 0.0});
    };
    auto un = [&](Op op) {
        emit(e->children[0], depth);
        code_.push_back({op, -1, 0.0});
    };
    switch (e->kind) {
        case NodeKind::Constant: code_.push_back({Op::Push, -1, e->value}); break;
        case NodeKind::Coordinate: code_.push_back({Op::Load, e->coord, 0.0}); break;
        case NodeKind::Add: bin(Op::Add); break;
        case NodeKind::Sub: bin(Op::Sub); break;
        case NodeKind::Mul: bin(Op::Mul); break;
        case NodeKind::Div: bin(Op::Div); break;
        case NodeKind::Pow:
            if (expr::is_constant(e->children[1])) {
                emit(e->children[0], depth);
                code_.push_back({Op::PowConst, -1, fold_constant(e->children[1])});
            } else {
                bin(Op::Pow);
            }
            break;
        case NodeKind::Neg: un(Op::Neg); break;
        case NodeKind::Sin: un(Op::Sin); break;
        case NodeKind::Cos: un(Op::Cos); break;
        case NodeKind::Sinh: un(Op::Sinh); break;
        case NodeKind::Cosh: un(Op::Cosh); break;
        case NodeKind::Exp: un(Op::Exp); break;
        case NodeKind::Ln: un(Op::Ln); break;
    }
}

}  // namespace geom
