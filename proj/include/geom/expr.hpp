#pragma once

// Arithmetic expressions over chart coordinates.
//
// Grammar (LL(1), no implicit multiplication):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?            right associative
//   primary := number | 'pi' | coordinate | func '(' expr ')' | '(' expr ')'
//   func    := sin | cos | sinh | cosh | exp | ln

#include "geom/dual.hpp"
#include "geom/errors.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace geom {

enum class NodeKind : std::uint8_t {
    Constant,
    Coordinate,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Neg,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
    Ln,
};

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    NodeKind kind = NodeKind::Constant;
    double value = 0.0;  // Constant
    int coord = -1;      // Coordinate
    std::vector<Expr> children;
};

namespace expr {

Expr constant(double v);
Expr coordinate(int index);
/// Folds negation of a literal into a negative constant.
Expr neg(Expr a);
Expr add(Expr a, Expr b);
Expr sub(Expr a, Expr b);
Expr mul(Expr a, Expr b);
Expr div(Expr a, Expr b);
Expr pow(Expr a, Expr b);
Expr unary(NodeKind fn, Expr a);

bool is_constant(const Expr& e);
bool equal(const Expr& a, const Expr& b);

/// Parses `text` whose identifiers refer to `coords`. `line` and `column_offset`
/// position reported errors within an enclosing document.
Expr parse(std::string_view text, std::span<const std::string> coords, int line = 1, int column_offset = 0);

/// Fully parenthesized form that parses back to a structurally equal tree.
std::string print(const Expr& e, std::span<const std::string> coords);

/// Shortest decimal form of `v` that reads back to the same double.
std::string format_number(double v);

}  // namespace expr

/// Postfix program compiled from an expression tree, evaluable on any scalar
/// type supporting the dual-number operations.
class ExprProgram {
public:
    ExprProgram() = default;
    explicit ExprProgram(const Expr& e);

    template <class T>
    T eval(std::span<const T> x) const;

    double eval(std::span<const double> x) const { return eval<double>(x); }
    bool is_constant() const noexcept { return constant_; }

private:
    enum class Op : std::uint8_t { Push, Load, Add, Sub, Mul, Div, PowConst, Pow, Neg, Sin, Cos, Sinh, Cosh, Exp, Ln };
    struct Instr {
        Op op;
        int coord;
        double value;
    };

    void emit(const Expr& e, int depth);

    std::vector<Instr> code_;
    int max_depth_ = 0;
    bool constant_ = true;
};

template <class T>
T ExprProgram::eval(std::span<const T> x) const {
    using std::cos, std::cosh, std::exp, std::log, std::sin, std::sinh;
    constexpr int kInline = 32;
    T inline_stack[kInline]{};
    std::vector<T> heap_stack;
    T* st = inline_stack;
    if (max_depth_ > kInline) {
        heap_stack.resize(static_cast<std::size_t>(max_depth_));
        st = heap_stack.data();
    }
    int top = -1;
    for (const Instr& in : code_) {
        switch (in.op) {
            case Op::Push: st[++top] = T(in.value); break;
            case Op::Load: st[++top] = x[static_cast<std::size_t>(in.coord)]; break;
            case Op::Add: st[top - 1] = st[top - 1] + st[top]; --top; break;
            case Op::Sub: st[top - 1] = st[top - 1] - st[top]; --top; break;
            case Op::Mul: st[top - 1] = st[top - 1] * st[top]; --top; break;
            case Op::Div: st[top - 1] = st[top - 1] / st[top]; --top; break;
            case Op::PowConst: st[top] = powc(st[top], in.value); break;
            case Op::Pow:
                if constexpr (std::is_same_v<T, double>) st[top - 1] = std::pow(st[top - 1], st[top]);
                else st[top - 1] = pow(st[top - 1], st[top]);
                --top;
                break;
            case Op::Neg: st[top] = -st[top]; break;
            case Op::Sin: st[top] = sin(st[top]); break;
            case Op::Cos: st[top] = cos(st[top]); break;
            case Op::Sinh: st[top] = sinh(st[top]); break;
            case Op::Cosh: st[top] = cosh(st[top]); break;
            case Op::Exp: st[top] = exp(st[top]); break;
            case Op::Ln: st[top] = log(st[top]); break;
        }
    }
    return st[0];
}

}  // namespace geom
