#include "wcvi/autodiff.hpp"

#include <algorithm>
#include <cmath>

namespace wcvi::ad {

const char* op_name(Op op) {
  switch (op) {
    case Op::Input: return "input";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Neg: return "neg";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::Square: return "square";
    case Op::Sigmoid: return "sigmoid";
    case Op::Tanh: return "tanh";
    case Op::Log1pExp: return "log1p_exp";
    case Op::NormalCdf: return "normal_cdf";
    case Op::NormalQuantile: return "normal_quantile";
    case Op::Sum: return "sum";
    case Op::Dot: return "dot";
    case Op::Affine: return "affine";
    case Op::CumSum: return "cumulative_sum";
    case Op::Interp: return "interp";
  }
  return "?";
}

void Tape::check_mine(const Var& v) const {
  if (v.tape != this)
    throw InvalidInputError("autodiff: variable belongs to a different tape");
  if (v.node >= val_.size())
    throw InvalidInputError("autodiff: variable index out of range for this tape");
}

Var Tape::input(double value) {
  if (!std::isfinite(value))
    throw DomainError("input", "non-finite value", static_cast<long>(val_.size()));
  beg_.push_back(static_cast<std::uint32_t>(args_.size()));
  op_.push_back(static_cast<std::uint8_t>(Op::Input));
  val_.push_back(value);
  std::uint32_t idx = static_cast<std::uint32_t>(val_.size() - 1);
  inputs_.push_back(idx);
  Var v;
  v.tape = this;
  v.node = idx;
  v.val = value;
  return v;
}

std::vector<Var> Tape::inputs(std::span<const double> values) {
  std::vector<Var> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(input(v));
  return out;
}

void Tape::clear() {
  val_.clear();
  op_.clear();
  beg_.clear();
  args_.clear();
  w_.clear();
  inputs_.clear();
}

void Tape::reserve(std::size_t nodes, std::size_t entries) {
  val_.reserve(nodes);
  op_.reserve(nodes);
  beg_.reserve(nodes);
  args_.reserve(entries);
  w_.reserve(entries);
}

void Tape::nb_begin() { beg_.push_back(static_cast<std::uint32_t>(args_.size())); }

void Tape::nb_arg(const Var& v, double partial) {
  check_mine(v);
  args_.push_back(v.node);
  w_.push_back(partial);
}

Var Tape::nb_finish(Op op, double value) {
  op_.push_back(static_cast<std::uint8_t>(op));
  val_.push_back(value);
  std::uint32_t idx = static_cast<std::uint32_t>(val_.size() - 1);
  if (!std::isfinite(value))
    throw DomainError(op_name(op), "non-finite value", static_cast<long>(idx));
  Var v;
  v.tape = this;
  v.node = idx;
  v.val = value;
  return v;
}

Var Tape::node1(Op op, double value, const Var& p, double w) {
  nb_begin();
  nb_arg(p, w);
  return nb_finish(op, value);
}

Var Tape::node2(Op op, double value, const Var& a, double wa, const Var& b, double wb) {
  nb_begin();
  nb_arg(a, wa);
  nb_arg(b, wb);
  return nb_finish(op, value);
}

std::vector<double> Tape::gradient(const Var& seed) const {
  check_mine(seed);
  std::vector<double> adj(seed.node + 1, 0.0);
  adj[seed.node] = 1.0;
  const std::size_t n_nodes = val_.size();
  for (std::uint32_t i = seed.node + 1; i-- > 0;) {
    double a = adj[i];
    if (a == 0.0) continue;
    std::uint32_t b = beg_[i];
    std::uint32_t e = (i + 1 < n_nodes) ? beg_[i + 1] : static_cast<std::uint32_t>(args_.size());
    for (std::uint32_t k = b; k < e; ++k) adj[args_[k]] += a * w_[k];
  }
  return adj;
}

std::vector<double> Tape::grad_inputs(const Var& seed) const {
  std::vector<double> adj = gradient(seed);
  std::vector<double> g(inputs_.size(), 0.0);
  for (std::size_t i = 0; i < inputs_.size(); ++i)
    if (inputs_[i] < adj.size()) g[i] = adj[inputs_[i]];
  return g;
}

namespace {

Tape* tape_of(const Var& a, const Var& b) {
  if (a.tape && b.tape && a.tape != b.tape)
    throw InvalidInputError("autodiff: mixing variables from different tapes");
  return a.tape ? a.tape : b.tape;
}

}  // namespace

Var operator+(Var a, Var b) {
  Tape* t = tape_of(a, b);
  double v = a.val + b.val;
  if (!t) return Var(v);
  if (a.is_const()) return t->node1(Op::Add, v, b, 1.0);
  if (b.is_const()) return t->node1(Op::Add, v, a, 1.0);
  return t->node2(Op::Add, v, a, 1.0, b, 1.0);
}

Var operator-(Var a, Var b) {
  Tape* t = tape_of(a, b);
  double v = a.val - b.val;
  if (!t) return Var(v);
  if (a.is_const()) return t->node1(Op::Sub, v, b, -1.0);
  if (b.is_const()) return t->node1(Op::Sub, v, a, 1.0);
  return t->node2(Op::Sub, v, a, 1.0, b, -1.0);
}

Var operator*(Var a, Var b) {
  Tape* t = tape_of(a, b);
  double v = a.val * b.val;
  if (!t) return Var(v);
  if (a.is_const()) return t->node1(Op::Mul, v, b, a.val);
  if (b.is_const()) return t->node1(Op::Mul, v, a, b.val);
  return t->node2(Op::Mul, v, a, b.val, b, a.val);
}

Var operator/(Var a, Var b) {
  Tape* t = tape_of(a, b);
  if (b.val == 0.0) throw DomainError("div", "division by zero");
  double v = a.val / b.val;
  if (!t) return Var(v);
  double inv = 1.0 / b.val;
  if (a.is_const()) return t->node1(Op::Div, v, b, -v * inv);
  if (b.is_const()) return t->node1(Op::Div, v, a, inv);
  return t->node2(Op::Div, v, a, inv, b, -v * inv);
}

Var operator-(Var a) {
  if (a.is_const()) return Var(-a.val);
  return a.tape->node1(Op::Neg, -a.val, a, -1.0);
}

Var exp(Var x) {
  double v = std::exp(x.val);
  if (x.is_const()) return Var(v);
  return x.tape->node1(Op::Exp, v, x, v);
}

Var log(Var x) {
  if (!(x.val > 0.0)) throw DomainError("log", "argument must be positive");
  double v = std::log(x.val);
  if (x.is_const()) return Var(v);
  return x.tape->node1(Op::Log, v, x, 1.0 / x.val);
}

Var sqrt(Var x) {
  if (!(x.val > 0.0))
    throw DomainError("sqrt", "argument must be positive (derivative undefined at zero)");
  double v = std::sqrt(x.val);
  if (x.is_const()) return Var(v);
  return x.tape->node1(Op::Sqrt, v, x, 0.5 / v);
}

Var square(Var x) {
  double v = x.val * x.val;
  if (x.is_const()) return Var(v);
  return x.tape->node1(Op::Square, v, x, 2.0 * x.val);
}

Var sigmoid(Var x) {
  double v = wcvi::sigmoid(x.val);
  if (x.is_const()) return Var(v);
  return x.tape->node1(Op::Sigmoid, v, x, v * (1.0 - v));
}

Var tanh(Var x) {
  double v = std::tanh(x.val);
  if (x.is_const()) return Var(v);
  return x.tape->node1(Op::Tanh, v, x, 1.0 - v * v);
}

Var log1p_exp(Var x) {
  double v = wcvi::log1p_exp(x.val);
  if (x.is_const()) return Var(v);
  return x.tape->node1(Op::Log1pExp, v, x, wcvi::sigmoid(x.val));
}

Var normal_cdf(Var x) {
  double v = wcvi::normal_cdf(x.val);
  if (x.is_const()) return Var(v);
  return x.tape->node1(Op::NormalCdf, v, x, wcvi::normal_pdf(x.val));
}

Var normal_quantile(Var u) {
  if (!(u.val > 0.0 && u.val < 1.0))
    throw DomainError("normal_quantile", "argument must lie strictly inside (0, 1)");
  double z = wcvi::normal_quantile(u.val);
  if (u.is_const()) return Var(z);
  double dens = wcvi::normal_pdf(z);
  return u.tape->node1(Op::NormalQuantile, z, u, 1.0 / dens);
}

namespace {

Tape* tape_of_span(std::span<const Var> xs) {
  Tape* t = nullptr;
  for (const Var& x : xs)
    if (x.tape) {
      if (t && x.tape != t)
        throw InvalidInputError("autodiff: mixing variables from different tapes");
      t = x.tape;
    }
  return t;
}

}  // namespace

Var sum(std::span<const Var> xs) {
  Tape* t = tape_of_span(xs);
  double v = 0.0;
  for (const Var& x : xs) v += x.val;
  if (!t) return Var(v);
  t->nb_begin();
  for (const Var& x : xs)
    if (!x.is_const()) t->nb_arg(x, 1.0);
  return t->nb_finish(Op::Sum, v);
}

Var dot(std::span<const Var> xs, std::span<const Var> ys) {
  if (xs.size() != ys.size()) throw InvalidInputError("dot: length mismatch");
  Tape* t = tape_of_span(xs);
  Tape* ty = tape_of_span(ys);
  if (t && ty && t != ty) throw InvalidInputError("dot: mixing tapes");
  if (!t) t = ty;
  double v = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) v += xs[i].val * ys[i].val;
  if (!t) return Var(v);
  t->nb_begin();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!xs[i].is_const()) t->nb_arg(xs[i], ys[i].val);
    if (!ys[i].is_const()) t->nb_arg(ys[i], xs[i].val);
  }
  return t->nb_finish(Op::Dot, v);
}

Var affine(std::span<const double> w, std::span<const Var> xs, double c0) {
  if (w.size() != xs.size()) throw InvalidInputError("affine: length mismatch");
  Tape* t = tape_of_span(xs);
  double v = c0;
  for (std::size_t i = 0; i < xs.size(); ++i) v += w[i] * xs[i].val;
  if (!t) return Var(v);
  t->nb_begin();
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (!xs[i].is_const()) t->nb_arg(xs[i], w[i]);
  return t->nb_finish(Op::Affine, v);
}

std::vector<Var> matvec(std::span<const double> a, int rows, int cols,
                        std::span<const Var> x) {
  if (static_cast<int>(a.size()) != rows * cols || static_cast<int>(x.size()) != cols)
    throw InvalidInputError("matvec: size mismatch");
  std::vector<Var> out(static_cast<std::size_t>(rows));
  for (int i = 0; i < rows; ++i)
    out[i] = affine(a.subspan(static_cast<std::size_t>(i) * cols, cols), x);
  return out;
}

std::vector<Var> cumulative_sum(std::span<const Var> xs) {
  std::vector<Var> out(xs.size());
  if (xs.empty()) return out;
  out[0] = xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i) out[i] = out[i - 1] + xs[i];
  return out;
}

Var interpolate_segment(Var x0, Var x1, Var y0, Var y1, Var x) {
  double dx = x1.val - x0.val;
  if (dx == 0.0) throw DomainError("interp", "zero-width segment");
  double tt = (x.val - x0.val) / dx;
  double dy = y1.val - y0.val;
  double v = y0.val + dy * tt;
  Tape* t = nullptr;
  for (const Var* p : {&x0, &x1, &y0, &y1, &x})
    if (p->tape) {
      if (t && p->tape != t) throw InvalidInputError("interp: mixing tapes");
      t = p->tape;
    }
  if (!t) return Var(v);
  double slope = dy / dx;
  t->nb_begin();
  if (!y0.is_const()) t->nb_arg(y0, 1.0 - tt);
  if (!y1.is_const()) t->nb_arg(y1, tt);
  if (!x.is_const()) t->nb_arg(x, slope);
  if (!x0.is_const()) t->nb_arg(x0, dy * (x.val - x1.val) / (dx * dx));
  if (!x1.is_const()) t->nb_arg(x1, -dy * (x.val - x0.val) / (dx * dx));
  return t->nb_finish(Op::Interp, v);
}

Var linear_interpolate(std::span<const Var> xs, std::span<const Var> ys, Var x) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw InvalidInputError("linear_interpolate: need matching knot arrays of length >= 2");
  if (x.val < xs.front().val || x.val > xs.back().val)
    throw DomainError("interp", "query outside knot range");
  // first knot strictly above x; at a knot this selects the right segment
  std::size_t hi = std::upper_bound(xs.begin(), xs.end(), x.val,
                                    [](double q, const Var& k) { return q < k.val; }) -
                   xs.begin();
  if (hi >= xs.size()) hi = xs.size() - 1;
  if (hi == 0) hi = 1;
  return interpolate_segment(xs[hi - 1], xs[hi], ys[hi - 1], ys[hi], x);
}

std::vector<Var> cholesky(std::span<const Var> sym, int n) {
  if (static_cast<int>(sym.size()) != n * n)
    throw InvalidInputError("cholesky: matrix size mismatch");
  std::vector<Var> l(static_cast<std::size_t>(n) * n, Var(0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      Var s = sym[static_cast<std::size_t>(i) * n + j];
      if (j > 0) {
        auto ri = std::span<const Var>(l).subspan(static_cast<std::size_t>(i) * n, j);
        auto rj = std::span<const Var>(l).subspan(static_cast<std::size_t>(j) * n, j);
        s = s - dot(ri, rj);
      }
      if (j == i) {
        if (!(s.val > 0.0)) throw DomainError("cholesky", "matrix is not positive definite");
        l[static_cast<std::size_t>(i) * n + i] = sqrt(s);
      } else {
        l[static_cast<std::size_t>(i) * n + j] = s / l[static_cast<std::size_t>(j) * n + j];
      }
    }
  }
  return l;
}

std::vector<Var> triangular_solve(std::span<const Var> chol, int n, std::span<const Var> b) {
  if (static_cast<int>(chol.size()) != n * n || static_cast<int>(b.size()) != n)
    throw InvalidInputError("triangular_solve: size mismatch");
  std::vector<Var> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Var s = b[i];
    if (i > 0) {
      auto row = std::span<const Var>(chol).subspan(static_cast<std::size_t>(i) * n, i);
      auto sol = std::span<const Var>(w).subspan(0, i);
      s = s - dot(row, sol);
    }
    w[i] = s / chol[static_cast<std::size_t>(i) * n + i];
  }
  return w;
}

Var logdet_from_cholesky(std::span<const Var> chol, int n) {
  Var s(0.0);
  for (int i = 0; i < n; ++i) s += log(chol[static_cast<std::size_t>(i) * n + i]);
  return Var(2.0) * s;
}

double gradient_check(const std::function<Var(std::span<const Var>)>& f,
                      std::span<const double> x, double h) {
  std::vector<double> g;
  {
    Tape tape;
    std::vector<Var> vars = tape.inputs(x);
    Var out = f(vars);
    if (out.is_const())
      throw InvalidInputError("gradient_check: function output does not depend on the tape");
    g = tape.grad_inputs(out);
  }
  auto eval = [&](std::span<const double> p) {
    Tape tape;
    std::vector<Var> vars = tape.inputs(p);
    return f(vars).val;
  };
  std::vector<double> xp(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < xp.size(); ++i) {
    double orig = xp[i];
    xp[i] = orig + h;
    double fp = eval(xp);
    xp[i] = orig - h;
    double fm = eval(xp);
    xp[i] = orig;
    double fd = (fp - fm) / (2.0 * h);
    double rel = std::abs(fd - g[i]) / (std::abs(g[i]) + 1e-8);
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace wcvi::ad
