#include "levyconj/expression.hpp"

#include <cctype>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

namespace levyconj {

namespace {

struct Node {
    enum class Kind { constant, variable, add, sub, mul, div, pow_, neg, call1, call2 };
    Kind kind;
    double value = 0.0;
    double (*fn1)(double) = nullptr;
    double (*fn2)(double, double) = nullptr;
    std::unique_ptr<Node> a, b;

    double eval(double u) const {
        switch (kind) {
            case Kind::constant: return value;
            case Kind::variable: return u;
            case Kind::add: return a->eval(u) + b->eval(u);
            case Kind::sub: return a->eval(u) - b->eval(u);
            case Kind::mul: return a->eval(u) * b->eval(u);
            case Kind::div: return a->eval(u) / b->eval(u);
            case Kind::pow_: return std::pow(a->eval(u), b->eval(u));
            case Kind::neg: return -a->eval(u);
            case Kind::call1: return fn1(a->eval(u));
            case Kind::call2: return fn2(a->eval(u), b->eval(u));
        }
        return 0.0;
    }
};

using NodePtr = std::unique_ptr<Node>;

class Parser {
public:
    explicit Parser(const std::string& s) : src_(s) {}

    NodePtr parse() {
        NodePtr n = expr();
        skip_ws();
        if (pos_ != src_.size()) fail("trailing input");
        return n;
    }

private:
    const std::string& src_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument("expression: " + what + " at position " +
                                    std::to_string(pos_));
    }
    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    NodePtr expr() {
        NodePtr n = term();
        for (;;) {
            if (eat('+')) {
                NodePtr r = term();
                n = make_bin(Node::Kind::add, std::move(n), std::move(r));
            } else if (eat('-')) {
                NodePtr r = term();
                n = make_bin(Node::Kind::sub, std::move(n), std::move(r));
            } else {
                return n;
            }
        }
    }

    NodePtr term() {
        NodePtr n = unary();
        for (;;) {
            if (eat('*')) {
                NodePtr r = unary();
                n = make_bin(Node::Kind::mul, std::move(n), std::move(r));
            } else if (eat('/')) {
                NodePtr r = unary();
                n = make_bin(Node::Kind::div, std::move(n), std::move(r));
            } else {
                return n;
            }
        }
    }

    NodePtr unary() {
        if (eat('-')) {
            auto n = std::make_unique<Node>();
            n->kind = Node::Kind::neg;
            n->a = unary();
            return n;
        }
        (void)eat('+');
        return power();
    }

    NodePtr power() {
        NodePtr base = atom();
        if (eat('^')) {
            NodePtr e = unary();  // right-assoc, allows 2^-3
            return make_bin(Node::Kind::pow_, std::move(base), std::move(e));
        }
        return base;
    }

    NodePtr atom() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr n = expr();
            if (!eat(')')) fail("expected ')'");
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        fail("unexpected character");
    }

    NodePtr number() {
        std::size_t end = pos_;
        while (end < src_.size() &&
               (std::isdigit(static_cast<unsigned char>(src_[end])) || src_[end] == '.' ||
                src_[end] == 'e' || src_[end] == 'E' ||
                ((src_[end] == '+' || src_[end] == '-') && end > pos_ &&
                 (src_[end - 1] == 'e' || src_[end - 1] == 'E'))))
            ++end;
        const std::string tok = src_.substr(pos_, end - pos_);
        std::size_t used = 0;
        double v;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            fail("bad numeric literal");
        }
        if (used != tok.size()) fail("bad numeric literal");
        pos_ = end;
        auto n = std::make_unique<Node>();
        n->kind = Node::Kind::constant;
        n->value = v;
        return n;
    }

    NodePtr identifier() {
        std::size_t end = pos_;
        while (end < src_.size() && std::isalnum(static_cast<unsigned char>(src_[end]))) ++end;
        const std::string name = src_.substr(pos_, end - pos_);
        pos_ = end;
        if (name == "u" || name == "r" || name == "x") {
            auto n = std::make_unique<Node>();
            n->kind = Node::Kind::variable;
            return n;
        }
        if (name == "pi") {
            auto n = std::make_unique<Node>();
            n->kind = Node::Kind::constant;
            n->value = M_PI;
            return n;
        }
        if (name == "pow") {
            if (!eat('(')) fail("expected '(' after pow");
            NodePtr a = expr();
            if (!eat(',')) fail("expected ',' in pow");
            NodePtr b = expr();
            if (!eat(')')) fail("expected ')'");
            auto n = std::make_unique<Node>();
            n->kind = Node::Kind::call2;
            n->fn2 = [](double x, double y) { return std::pow(x, y); };
            n->a = std::move(a);
            n->b = std::move(b);
            return n;
        }
        double (*fn)(double) = nullptr;
        if (name == "exp") fn = [](double x) { return std::exp(x); };
        else if (name == "log") fn = [](double x) { return std::log(x); };
        else if (name == "sin") fn = [](double x) { return std::sin(x); };
        else if (name == "cos") fn = [](double x) { return std::cos(x); };
        else if (name == "sqrt") fn = [](double x) { return std::sqrt(x); };
        else if (name == "abs") fn = [](double x) { return std::abs(x); };
        if (!fn) fail("unknown identifier '" + name + "'");
        if (!eat('(')) fail("expected '(' after function name");
        NodePtr a = expr();
        if (!eat(')')) fail("expected ')'");
        auto n = std::make_unique<Node>();
        n->kind = Node::Kind::call1;
        n->fn1 = fn;
        n->a = std::move(a);
        return n;
    }

    static NodePtr make_bin(Node::Kind k, NodePtr a, NodePtr b) {
        auto n = std::make_unique<Node>();
        n->kind = k;
        n->a = std::move(a);
        n->b = std::move(b);
        return n;
    }
};

}  // namespace

std::function<double(double)> compile_expression(const std::string& source) {
    Parser p(source);
    std::shared_ptr<Node> root(p.parse().release());
    return [root](double u) { return root->eval(u); };
}

}  // namespace levyconj
