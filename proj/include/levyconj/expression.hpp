#pragma once

#include <functional>
#include <string>

namespace levyconj {

/// Compiles a one-variable arithmetic expression into an evaluator.
/// Grammar: the variable (named "u" or "r"), decimal literals, + - * / ^,
/// parentheses, and the functions exp, log, sin, cos, sqrt, abs, pow(x,y).
/// '^' is right-associative. Throws std::invalid_argument on parse errors,
/// with the offending position in the message.
std::function<double(double)> compile_expression(const std::string& source);

}  // namespace levyconj
