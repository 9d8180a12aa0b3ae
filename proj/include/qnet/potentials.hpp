#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qnet/kernels.hpp"
#include "qnet/linalg.hpp"
#include "qnet/topology.hpp"

namespace qnet {

struct CombineError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Declared properties of a quadratic-form matrix, verified at load time.
struct MatrixAttrs {
  enum class OffDiag { Unchecked, NonPositive, NonNegative };
  bool positive_definite = false;  // verified by Cholesky when declared
  OffDiag off_diagonal = OffDiag::Unchecked;
};

namespace detail {

class PotentialNode {
 public:
  virtual ~PotentialNode() = default;
  virtual double value(const RealVec& x) const = 0;
  virtual RealVec gradient(const RealVec& x) const = 0;
  // Structural attributes used by the combination rules.
  virtual bool monotonic() const = 0;    // gradient >= 0 on the domain
  virtual bool nonnegative() const = 0;  // value >= 0 on the domain
  virtual double degree() const = 0;     // asymptotic polynomial degree
  virtual bool superlinear() const = 0;  // value/||x|| -> infinity
  virtual std::string describe() const = 0;
};

using NodePtr = std::shared_ptr<const PotentialNode>;

}  // namespace detail

/// Composable potential G(X) over nonnegative states, with an exact
/// analytic gradient at every node (chain and product rules, never numeric).
/// The gradient supplies the scheduling weights; the value doubles as the
/// Lyapunov function in drift diagnostics.
class Potential {
 public:
  Potential() = default;
  explicit Potential(detail::NodePtr node) : node_(std::move(node)) {}

  bool empty() const { return node_ == nullptr; }

  const detail::NodePtr& node() const { return node_; }

  double value(const RealVec& x) const { return node_->value(x); }
  double value(const QueueState& x) const { return node_->value(to_real(x)); }

  RealVec gradient(const RealVec& x) const { return node_->gradient(x); }
  RealVec gradient(const QueueState& x) const {
    return node_->gradient(to_real(x));
  }

  bool monotonic() const { return node_->monotonic(); }
  bool nonnegative() const { return node_->nonnegative(); }
  double degree() const { return node_->degree(); }
  bool superlinear() const { return node_->superlinear(); }

  /// Declared smoothness order: the first derivative order that stays
  /// bounded, assuming the dominant behavior is polynomial of `degree()`.
  int smoothness_order() const {
    return static_cast<int>(std::ceil(degree() - 1e-12));
  }

  std::string describe() const { return node_->describe(); }

 private:
  detail::NodePtr node_;
};

namespace detail {

class SumScalarNode final : public PotentialNode {
 public:
  explicit SumScalarNode(ScalarKernel k) : kernel_(k) {}

  double value(const RealVec& x) const override {
    double s = 0.0;
    for (double v : x) s += kernel_.g(v);
    return s;
  }
  RealVec gradient(const RealVec& x) const override {
    RealVec g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = kernel_.gp(x[i]);
    return g;
  }
  bool monotonic() const override { return true; }
  bool nonnegative() const override { return true; }
  double degree() const override { return kernel_.degree(); }
  bool superlinear() const override { return kernel_.superlinear(); }
  std::string describe() const override {
    return "sum_scalar(" + kernel_.name() + ")";
  }

 private:
  ScalarKernel kernel_;
};

class QuadFormNode final : public PotentialNode {
 public:
  QuadFormNode(ScalarKernel k, RealMatrix q, MatrixAttrs attrs)
      : kernel_(k), q_(std::move(q)), attrs_(attrs) {
    const std::size_t n = q_.size();
    if (n == 0) throw CombineError("quad form: empty matrix");
    for (const auto& row : q_)
      if (row.size() != n) throw CombineError("quad form: non-square matrix");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (std::abs(q_[i][j] - q_[j][i]) > 1e-12)
          throw CombineError("quad form: matrix is not symmetric");
    if (attrs_.off_diagonal == MatrixAttrs::OffDiag::NonPositive ||
        attrs_.off_diagonal == MatrixAttrs::OffDiag::NonNegative) {
      const bool want_nonpos =
          attrs_.off_diagonal == MatrixAttrs::OffDiag::NonPositive;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          if (want_nonpos ? q_[i][j] > 0.0 : q_[i][j] < 0.0)
            throw CombineError(
                "quad form: off-diagonal sign violates declared attribute");
        }
    }
    if (attrs_.positive_definite) {
      Eigen::MatrixXd m(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              q_[i][j];
      Eigen::LLT<Eigen::MatrixXd> llt(m);
      if (llt.info() != Eigen::Success)
        throw CombineError(
            "quad form: matrix declared positive definite but Cholesky "
            "failed");
    }
    all_nonneg_ = true;
    for (const auto& row : q_)
      for (double v : row)
        if (v < 0.0) all_nonneg_ = false;
  }

  double value(const RealVec& x) const override {
    const std::size_t n = q_.size();
    RealVec g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = kernel_.g(x[i]);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += q_[i][j] * g[j];
      s += g[i] * row;
    }
    return s;
  }

  RealVec gradient(const RealVec& x) const override {
    const std::size_t n = q_.size();
    RealVec g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = kernel_.g(x[i]);
    RealVec out(n);
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += q_[i][j] * g[j];
      out[i] = 2.0 * kernel_.gp(x[i]) * row;
    }
    return out;
  }

  bool monotonic() const override { return all_nonneg_; }
  bool nonnegative() const override {
    return attrs_.positive_definite || all_nonneg_;
  }
  double degree() const override { return 2.0 * kernel_.degree(); }
  bool superlinear() const override { return true; }
  std::string describe() const override {
    return "quad(" + kernel_.name() + ", " + std::to_string(q_.size()) +
           "x" + std::to_string(q_.size()) + ")";
  }

  const RealMatrix& matrix() const { return q_; }
  const MatrixAttrs& attrs() const { return attrs_; }

 private:
  ScalarKernel kernel_;
  RealMatrix q_;
  MatrixAttrs attrs_;
  bool all_nonneg_ = false;
};

class SumNode final : public PotentialNode {
 public:
  SumNode(double a, NodePtr g1, double b, NodePtr g2)
      : a_(a), b_(b), g1_(std::move(g1)), g2_(std::move(g2)) {
    if (a_ < 0.0 || b_ < 0.0)
      throw CombineError("add: coefficients must be nonnegative");
  }
  double value(const RealVec& x) const override {
    return a_ * g1_->value(x) + b_ * g2_->value(x);
  }
  RealVec gradient(const RealVec& x) const override {
    RealVec g = g1_->gradient(x);
    RealVec h = g2_->gradient(x);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = a_ * g[i] + b_ * h[i];
    return g;
  }
  bool monotonic() const override {
    return g1_->monotonic() && g2_->monotonic();
  }
  bool nonnegative() const override {
    return g1_->nonnegative() && g2_->nonnegative();
  }
  double degree() const override {
    if (a_ == 0.0) return b_ == 0.0 ? 0.0 : g2_->degree();
    if (b_ == 0.0) return g1_->degree();
    return std::max(g1_->degree(), g2_->degree());
  }
  bool superlinear() const override {
    return (a_ > 0.0 && g1_->superlinear()) ||
           (b_ > 0.0 && g2_->superlinear());
  }
  std::string describe() const override {
    return "add(" + g1_->describe() + ", " + std::to_string(a_) + ", " +
           g2_->describe() + ", " + std::to_string(b_) + ")";
  }

 private:
  double a_, b_;
  NodePtr g1_, g2_;
};

class ProductNode final : public PotentialNode {
 public:
  ProductNode(NodePtr g1, NodePtr g2)
      : g1_(std::move(g1)), g2_(std::move(g2)) {
    if (!g2_->monotonic())
      throw CombineError("mul: second factor must be monotonic");
    if (!g1_->nonnegative() || !g2_->nonnegative())
      throw CombineError("mul: factors must be nonnegative");
  }
  double value(const RealVec& x) const override {
    return g1_->value(x) * g2_->value(x);
  }
  RealVec gradient(const RealVec& x) const override {
    const double v1 = g1_->value(x);
    const double v2 = g2_->value(x);
    RealVec g = g1_->gradient(x);
    RealVec h = g2_->gradient(x);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = v2 * g[i] + v1 * h[i];
    return g;
  }
  bool monotonic() const override {
    return g1_->monotonic() && g2_->monotonic();
  }
  bool nonnegative() const override { return true; }
  double degree() const override { return g1_->degree() + g2_->degree(); }
  bool superlinear() const override { return true; }
  std::string describe() const override {
    return "mul(" + g1_->describe() + ", " + g2_->describe() + ")";
  }

 private:
  NodePtr g1_, g2_;
};

class OuterComposeNode final : public PotentialNode {
 public:
  OuterComposeNode(ScalarKernel k, NodePtr g) : kernel_(k), g_(std::move(g)) {
    if (!g_->nonnegative())
      throw CombineError(
          "outer: inner potential must be nonnegative (kernel domain)");
  }
  double value(const RealVec& x) const override {
    return kernel_.g(g_->value(x));
  }
  RealVec gradient(const RealVec& x) const override {
    const double s = kernel_.gp(g_->value(x));
    RealVec g = g_->gradient(x);
    for (double& v : g) v *= s;
    return g;
  }
  bool monotonic() const override { return g_->monotonic(); }
  bool nonnegative() const override { return true; }
  double degree() const override { return kernel_.degree() * g_->degree(); }
  bool superlinear() const override { return true; }
  std::string describe() const override {
    return "outer(" + kernel_.name() + ", " + g_->describe() + ")";
  }

 private:
  ScalarKernel kernel_;
  NodePtr g_;
};

class InnerComposeNode final : public PotentialNode {
 public:
  InnerComposeNode(NodePtr g, ScalarKernel k) : kernel_(k), g_(std::move(g)) {
    if (!kernel_.derivative_vanishes_at_zero())
      throw CombineError("inner: kernel derivative must vanish at zero");
  }
  double value(const RealVec& x) const override {
    return g_->value(apply(x));
  }
  RealVec gradient(const RealVec& x) const override {
    RealVec g = g_->gradient(apply(x));
    for (std::size_t i = 0; i < x.size(); ++i) g[i] *= kernel_.gp(x[i]);
    return g;
  }
  bool monotonic() const override { return g_->monotonic(); }
  bool nonnegative() const override { return g_->nonnegative(); }
  double degree() const override { return kernel_.degree() * g_->degree(); }
  bool superlinear() const override {
    return g_->superlinear() || kernel_.superlinear();
  }
  std::string describe() const override {
    return "inner(" + g_->describe() + ", " + kernel_.name() + ")";
  }

 private:
  RealVec apply(const RealVec& x) const {
    RealVec y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = kernel_.g(x[i]);
    return y;
  }
  ScalarKernel kernel_;
  NodePtr g_;
};

}  // namespace detail

inline Potential sum_scalar(ScalarKernel k) {
  return Potential(std::make_shared<detail::SumScalarNode>(k));
}

inline Potential quad_form(ScalarKernel k, RealMatrix q,
                           MatrixAttrs attrs = {}) {
  return Potential(
      std::make_shared<detail::QuadFormNode>(k, std::move(q), attrs));
}

/// LPF-style potential f(X) P f(X)^T with f(x) = x + theta(e^{-x/theta}-1).
inline Potential lpf_quad(double theta, RealMatrix p, MatrixAttrs attrs = {}) {
  return quad_form(ScalarKernel::lpf(theta), std::move(p), attrs);
}

inline Potential add(double a, const Potential& g1, double b,
                     const Potential& g2) {
  return Potential(
      std::make_shared<detail::SumNode>(a, g1.node(), b, g2.node()));
}

inline Potential mul(const Potential& g1, const Potential& g2) {
  return Potential(std::make_shared<detail::ProductNode>(g1.node(), g2.node()));
}

inline Potential outer(ScalarKernel k, const Potential& g) {
  return Potential(std::make_shared<detail::OuterComposeNode>(k, g.node()));
}

inline Potential inner(const Potential& g, ScalarKernel k) {
  return Potential(std::make_shared<detail::InnerComposeNode>(g.node(), k));
}

/// Scaled copy c*G, used by the scale-invariance checks.
inline Potential scale(double c, const Potential& g) {
  return add(c, g, 0.0, g);
}

inline RealVec pressure(const Potential& g, const RealVec& x,
                        const NetworkTopology& t) {
  RealVec grad = g.gradient(x);
  RealVec p(grad.size());
  for (std::size_t m = 0; m < grad.size(); ++m) {
    p[m] = grad[m];
    int d = t.downstream(static_cast<int>(m));
    if (d >= 0) p[m] -= grad[static_cast<std::size_t>(d)];
  }
  return p;
}

inline RealVec pressure(const Potential& g, const QueueState& x,
                        const NetworkTopology& t) {
  return pressure(g, to_real(x), t);
}

/// Central finite differences of the exact gradient. Diagnostics only; the
/// policy path never touches it.
inline RealMatrix numeric_hessian(const Potential& g, const RealVec& x,
                                  double h = 1e-4) {
  const std::size_t n = x.size();
  RealMatrix out(n, RealVec(n, 0.0));
  RealVec xp = x, xm = x;
  for (std::size_t i = 0; i < n; ++i) {
    xp[i] = x[i] + h;
    xm[i] = std::max(0.0, x[i] - h);
    const double span = xp[i] - xm[i];
    RealVec gp = g.gradient(xp);
    RealVec gm = g.gradient(xm);
    for (std::size_t j = 0; j < n; ++j) out[i][j] = (gp[j] - gm[j]) / span;
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return out;
}

}  // namespace qnet
