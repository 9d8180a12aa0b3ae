#pragma once

#include <cctype>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qnet/kernels.hpp"
#include "qnet/linalg.hpp"
#include "qnet/policies.hpp"
#include "qnet/potentials.hpp"

namespace qnet {

struct ParseError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Resolves `@file` matrix references; receives the path as written.
using MatrixLoader = std::function<RealMatrix(const std::string&)>;

/// Parser for the potential / policy expression language used in configs:
///
///   kernels:    pow(a) | log | lpf(theta) | identity
///   potentials: sum_scalar(k) | quad(k, Q=<mat>[, pd=true|false]
///               [, offdiag=nonpos|nonneg]) | lpf_quad(theta=t, P=<mat>...)
///               | add(g1, a, g2, b) | mul(g1, g2) | outer(k, g)
///               | inner(g, k) | <name>
///   policies:   max_scalar(g) | memory(g) | memory_dyn(g)
///               | stale(p, delay=d) | frame(p, k=n)
///
/// Matrices are inline ([[2,-1],[-1,2]]) or @file references to
/// whitespace-separated numeric text. <name> looks up a previously defined
/// potential.
class ExprParser {
 public:
  ExprParser(std::string text, const std::map<std::string, Potential>* named,
             MatrixLoader loader)
      : text_(std::move(text)), named_(named), loader_(std::move(loader)) {}

  Potential parse_potential() {
    Potential g = potential();
    expect_end();
    return g;
  }

  PolicyPtr parse_policy() {
    PolicyPtr p = policy();
    expect_end();
    return p;
  }

 private:
  // --- lexing ---------------------------------------------------------
  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!eat(c))
      throw ParseError("expected '" + std::string(1, c) + "' at offset " +
                       std::to_string(pos_) + " in '" + text_ + "'");
  }

  void expect_end() {
    skip_ws();
    if (pos_ != text_.size())
      throw ParseError("trailing input at offset " + std::to_string(pos_) +
                       " in '" + text_ + "'");
  }

  std::string ident() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_'))
      ++pos_;
    if (start == pos_)
      throw ParseError("expected identifier at offset " +
                       std::to_string(start) + " in '" + text_ + "'");
    return text_.substr(start, pos_ - start);
  }

  double number() {
    skip_ws();
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin)
      throw ParseError("expected number at offset " + std::to_string(pos_));
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  bool peek_is(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  // --- grammar --------------------------------------------------------
  ScalarKernel kernel() {
    const std::string name = ident();
    if (name == "pow") {
      expect('(');
      double a = number();
      expect(')');
      return ScalarKernel::power(a);
    }
    if (name == "log") return ScalarKernel::log();
    if (name == "lpf") {
      expect('(');
      double th = number();
      expect(')');
      return ScalarKernel::lpf(th);
    }
    if (name == "identity") return ScalarKernel::identity();
    throw ParseError("unknown kernel '" + name + "'");
  }

  RealMatrix matrix() {
    skip_ws();
    if (eat('@')) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && text_[pos_] != ',' &&
             text_[pos_] != ')' &&
             !std::isspace(static_cast<unsigned char>(text_[pos_])))
        ++pos_;
      std::string path = text_.substr(start, pos_ - start);
      if (path.empty()) throw ParseError("empty @file reference");
      if (!loader_) throw ParseError("no matrix loader for @" + path);
      return loader_(path);
    }
    expect('[');
    RealMatrix rows;
    while (true) {
      expect('[');
      RealVec row;
      if (!peek_is(']')) {
        row.push_back(number());
        while (eat(',')) row.push_back(number());
      }
      expect(']');
      rows.push_back(std::move(row));
      if (!eat(',')) break;
    }
    expect(']');
    return rows;
  }

  MatrixAttrs attrs_tail() {
    MatrixAttrs attrs;
    while (eat(',')) {
      const std::string key = ident();
      expect('=');
      const std::string val = ident();
      if (key == "pd") {
        if (val == "true")
          attrs.positive_definite = true;
        else if (val == "false")
          attrs.positive_definite = false;
        else
          throw ParseError("pd expects true or false");
      } else if (key == "offdiag") {
        if (val == "nonpos")
          attrs.off_diagonal = MatrixAttrs::OffDiag::NonPositive;
        else if (val == "nonneg")
          attrs.off_diagonal = MatrixAttrs::OffDiag::NonNegative;
        else if (val == "any")
          attrs.off_diagonal = MatrixAttrs::OffDiag::Unchecked;
        else
          throw ParseError("offdiag expects nonpos, nonneg or any");
      } else {
        throw ParseError("unknown matrix attribute '" + key + "'");
      }
    }
    return attrs;
  }

  Potential potential() {
    const std::size_t mark = pos_;
    const std::string name = ident();
    if (name == "sum_scalar") {
      expect('(');
      ScalarKernel k = kernel();
      expect(')');
      return sum_scalar(k);
    }
    if (name == "quad") {
      expect('(');
      ScalarKernel k = kernel();
      expect(',');
      skip_ws();
      // optional "Q=" / "M=" tag before the matrix
      std::size_t tag = pos_;
      if (std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
        std::string t = ident();
        if (!eat('=')) pos_ = tag;
      }
      RealMatrix q = matrix();
      MatrixAttrs attrs = attrs_tail();
      expect(')');
      return quad_form(k, std::move(q), attrs);
    }
    if (name == "lpf_quad") {
      expect('(');
      double theta = 1.0;
      skip_ws();
      std::size_t tag = pos_;
      std::string first = ident();
      if (first == "theta") {
        expect('=');
        theta = number();
        expect(',');
      } else {
        pos_ = tag;
        theta = number();
        expect(',');
      }
      skip_ws();
      tag = pos_;
      if (std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
        std::string t = ident();
        if (!eat('=')) pos_ = tag;
      }
      RealMatrix p = matrix();
      MatrixAttrs attrs = attrs_tail();
      expect(')');
      return lpf_quad(theta, std::move(p), attrs);
    }
    if (name == "add") {
      expect('(');
      Potential g1 = potential();
      expect(',');
      double a = number();
      expect(',');
      Potential g2 = potential();
      expect(',');
      double b = number();
      expect(')');
      return add(a, g1, b, g2);
    }
    if (name == "mul") {
      expect('(');
      Potential g1 = potential();
      expect(',');
      Potential g2 = potential();
      expect(')');
      return mul(g1, g2);
    }
    if (name == "outer") {
      expect('(');
      ScalarKernel k = kernel();
      expect(',');
      Potential g = potential();
      expect(')');
      return outer(k, g);
    }
    if (name == "inner") {
      expect('(');
      Potential g = potential();
      expect(',');
      ScalarKernel k = kernel();
      expect(')');
      return inner(g, k);
    }
    if (named_) {
      auto it = named_->find(name);
      if (it != named_->end()) return it->second;
    }
    pos_ = mark;
    throw ParseError("unknown potential '" + name + "'");
  }

  PolicyPtr policy() {
    const std::string name = ident();
    if (name == "max_scalar") {
      expect('(');
      Potential g = potential();
      expect(')');
      return std::make_unique<MaxScalarPolicy>(std::move(g));
    }
    if (name == "memory") {
      expect('(');
      Potential g = potential();
      expect(')');
      return std::make_unique<MemoryPolicy>(std::move(g));
    }
    if (name == "memory_dyn") {
      expect('(');
      Potential g = potential();
      expect(')');
      return std::make_unique<MemoryDynamicPolicy>(std::move(g));
    }
    if (name == "stale") {
      expect('(');
      PolicyPtr inner = policy();
      expect(',');
      const std::string key = ident();
      if (key != "delay") throw ParseError("stale expects delay=<n>");
      expect('=');
      int d = static_cast<int>(number());
      expect(')');
      return wrap_stale(std::move(inner), d);
    }
    if (name == "frame") {
      expect('(');
      PolicyPtr inner = policy();
      expect(',');
      const std::string key = ident();
      if (key != "k") throw ParseError("frame expects k=<n>");
      expect('=');
      int k = static_cast<int>(number());
      expect(')');
      return wrap_frame(std::move(inner), k);
    }
    throw ParseError("unknown policy '" + name + "'");
  }

  std::string text_;
  std::size_t pos_ = 0;
  const std::map<std::string, Potential>* named_;
  MatrixLoader loader_;
};

inline Potential parse_potential(
    const std::string& text,
    const std::map<std::string, Potential>* named = nullptr,
    MatrixLoader loader = nullptr) {
  return ExprParser(text, named, std::move(loader)).parse_potential();
}

inline PolicyPtr parse_policy(
    const std::string& text,
    const std::map<std::string, Potential>* named = nullptr,
    MatrixLoader loader = nullptr) {
  return ExprParser(text, named, std::move(loader)).parse_policy();
}

}  // namespace qnet
