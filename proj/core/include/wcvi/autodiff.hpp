#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "wcvi/errors.hpp"
#include "wcvi/math.hpp"

// Reverse-mode automatic differentiation on an append-only tape.
//
// Every primitive records its parents together with the analytic local
// partials, evaluated during the forward pass.  The backward sweep is then a
// single reverse walk accumulating adjoint * partial, with no dispatch on the
// operation.  Opcodes are kept purely for diagnostics: any primitive that is
// handed an argument outside its domain, or that produces a non-finite value,
// raises DomainError naming itself and its node index instead of letting NaNs
// propagate.
//
// Var is a 24-byte value type.  A Var with a null tape pointer is a constant;
// arithmetic folds constants into node values and partial weights, so graphs
// stay small when mixing parameters with data.

namespace wcvi::ad {

enum class Op : std::uint8_t {
  Input, Add, Sub, Mul, Div, Neg, Exp, Log, Sqrt, Square, Sigmoid, Tanh,
  Log1pExp, NormalCdf, NormalQuantile, Sum, Dot, Affine, CumSum, Interp,
};

const char* op_name(Op op);

class Tape;

struct Var {
  Tape* tape = nullptr;
  std::uint32_t node = 0;
  double val = 0.0;

  Var() = default;
  Var(double v) : val(v) {}  // NOLINT: implicit by design, constants are Vars
  double value() const { return val; }
  bool is_const() const { return tape == nullptr; }
};

inline double scalar_value(const Var& v) { return v.val; }

inline bool operator<(Var a, Var b) { return a.val < b.val; }
inline bool operator>(Var a, Var b) { return a.val > b.val; }
inline bool operator<=(Var a, Var b) { return a.val <= b.val; }
inline bool operator>=(Var a, Var b) { return a.val >= b.val; }

class Tape {
 public:
  Var input(double value);
  std::vector<Var> inputs(std::span<const double> values);

  std::size_t size() const { return val_.size(); }
  std::size_t num_inputs() const { return inputs_.size(); }
  void clear();
  void reserve(std::size_t nodes, std::size_t entries);

  // Adjoint of every node up to and including the seed.  The walk visits each
  // node exactly once, in reverse creation order.
  std::vector<double> gradient(const Var& seed) const;

  // Adjoints of the input nodes only, in creation order.
  std::vector<double> grad_inputs(const Var& seed) const;

  double value_of(std::uint32_t node) const { return val_[node]; }
  Op op_of(std::uint32_t node) const { return static_cast<Op>(op_[node]); }

  // Low-level streaming node construction.  Between nb_begin and nb_finish no
  // other node may be created on this tape; the n-ary primitives below use
  // this to avoid materializing parent lists.
  void nb_begin();
  void nb_arg(const Var& v, double partial);
  Var nb_finish(Op op, double value);

  Var node1(Op op, double value, const Var& p, double w);
  Var node2(Op op, double value, const Var& a, double wa, const Var& b, double wb);

 private:
  void check_mine(const Var& v) const;
  std::vector<double> val_;
  std::vector<std::uint8_t> op_;
  std::vector<std::uint32_t> beg_;   // start of each node's args in args_/w_
  std::vector<std::uint32_t> args_;
  std::vector<double> w_;
  std::vector<std::uint32_t> inputs_;
};

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator-(Var a);
inline Var& operator+=(Var& a, Var b) { return a = a + b; }
inline Var& operator-=(Var& a, Var b) { return a = a - b; }
inline Var& operator*=(Var& a, Var b) { return a = a * b; }

Var exp(Var x);
Var log(Var x);
Var sqrt(Var x);
Var square(Var x);
Var sigmoid(Var x);
Var tanh(Var x);
Var log1p_exp(Var x);
Var normal_cdf(Var x);
Var normal_quantile(Var u);

Var sum(std::span<const Var> xs);
Var dot(std::span<const Var> xs, std::span<const Var> ys);
// c0 + sum_i w[i] * x[i]; the workhorse for filters and design-matrix rows.
Var affine(std::span<const double> w, std::span<const Var> xs, double c0 = 0.0);
std::vector<Var> matvec(std::span<const double> a, int rows, int cols, std::span<const Var> x);
std::vector<Var> cumulative_sum(std::span<const Var> xs);

// One linear segment, differentiable in all five arguments.
Var interpolate_segment(Var x0, Var x1, Var y0, Var y1, Var x);
// Piecewise-linear interpolant through (xs, ys); xs strictly increasing by
// value, x within [xs.front(), xs.back()].  Right-hand derivative at knots.
Var linear_interpolate(std::span<const Var> xs, std::span<const Var> ys, Var x);

// Dense lower Cholesky of a symmetric positive definite matrix of Vars,
// row-major n*n; composed from scalar primitives so partials need no special
// casing.
std::vector<Var> cholesky(std::span<const Var> sym, int n);
std::vector<Var> triangular_solve(std::span<const Var> chol, int n, std::span<const Var> b);
Var logdet_from_cholesky(std::span<const Var> chol, int n);

// max_i |central_difference_i - grad_i| / (|grad_i| + 1e-8)
double gradient_check(const std::function<Var(std::span<const Var>)>& f,
                      std::span<const double> x, double h = 1e-5);

}  // namespace wcvi::ad
