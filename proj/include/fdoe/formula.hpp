#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "fdoe/basis.hpp"
#include "fdoe/errors.hpp"

namespace fdoe {

/// One model term as written in a formula.
struct Term {
  enum class Kind { main, interaction, polynomial };
  Kind kind;
  std::string a;       // first (or only) factor name
  std::string b;       // second factor of an interaction
  int degree = 0;      // polynomial degree, >= 2

  friend bool operator==(const Term&, const Term&) = default;
};

/// Parsed model formula. The intercept is always part of the model; a literal
/// "1" in the formula is accepted and redundant.
struct FormulaAst {
  bool include_intercept = true;
  std::vector<Term> terms;

  friend bool operator==(const FormulaAst&, const FormulaAst&) = default;
};

namespace detail {

class FormulaParser {
 public:
  explicit FormulaParser(std::string_view text) : text_(text) {}

  FormulaAst parse() {
    FormulaAst ast;
    skip_ws();
    expect('~');
    parse_term(ast);
    skip_ws();
    while (!at_end()) {
      expect('+');
      parse_term(ast);
      skip_ws();
    }
    return ast;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    throw ConfigError("formula: " + msg + " at position " + std::to_string(pos_));
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }
  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string ident() {
    skip_ws();
    std::size_t start = pos_;
    auto head = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
    auto tail = [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    };
    if (at_end() || !head(text_[pos_])) fail("expected a factor name");
    ++pos_;
    while (!at_end() && tail(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  int integer() {
    skip_ws();
    std::size_t start = pos_;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) fail("expected an integer");
    return std::stoi(std::string(text_.substr(start, pos_ - start)));
  }

  void parse_term(FormulaAst& ast) {
    skip_ws();
    if (peek() == '1') {  // explicit intercept, already implied
      ++pos_;
      return;
    }
    std::size_t term_pos = pos_;
    std::string name = ident();
    Term term;
    skip_ws();
    if (name == "P" && peek() == '(') {
      ++pos_;
      term.kind = Term::Kind::polynomial;
      term.a = ident();
      expect(',');
      term.degree = integer();
      expect(')');
      if (term.degree < 2) {
        pos_ = term_pos;
        fail("polynomial degree must be at least 2 (a degree-1 term is a main effect)");
      }
    } else if (peek() == ':') {
      ++pos_;
      term.kind = Term::Kind::interaction;
      term.a = name;
      term.b = ident();
      if (term.a == term.b) {
        pos_ = term_pos;
        fail("interaction of a factor with itself; use P(" + term.a + ", 2)");
      }
      if (term.b < term.a) std::swap(term.a, term.b);
    } else {
      term.kind = Term::Kind::main;
      term.a = name;
    }
    if (std::find(ast.terms.begin(), ast.terms.end(), term) != ast.terms.end()) {
      pos_ = term_pos;
      fail("duplicate term");
    }
    ast.terms.push_back(std::move(term));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parse "~ term (+ term)*" where a term is "1", a factor name, a:b, or
/// P(a, deg). Interactions are stored with the lexicographically smaller
/// name first.
inline FormulaAst parse_formula(std::string_view text) {
  return detail::FormulaParser(text).parse();
}

/// Canonical text form; parse_formula(to_string(ast)) == ast.
inline std::string to_string(const FormulaAst& ast) {
  std::string out = "~";
  if (ast.terms.empty()) return out + " 1";
  for (std::size_t q = 0; q < ast.terms.size(); ++q) {
    const Term& t = ast.terms[q];
    out += q == 0 ? " " : " + ";
    switch (t.kind) {
      case Term::Kind::main: out += t.a; break;
      case Term::Kind::interaction: out += t.a + ":" + t.b; break;
      case Term::Kind::polynomial:
        out += "P(" + t.a + ", " + std::to_string(t.degree) + ")";
        break;
    }
  }
  return out;
}

enum class TermKind { intercept, main, interaction, polynomial };

/// A formula term bound to factor indices and a parameter basis.
struct BoundTerm {
  TermKind kind;
  std::vector<int> factors;  // empty for the intercept
  int poly_degree = 0;
  BasisSpec param_basis;
  int nbeta = 0;       // columns this term contributes to Z
  int col_offset = 0;  // first column of the term's block in Z
};

/// The expanded model structure: ordered terms (intercept first), factor
/// bindings, and the parameter-space dimensions.
struct TermList {
  std::vector<std::string> factor_names;
  std::vector<BoundTerm> terms;

  int Q() const noexcept { return static_cast<int>(terms.size()); }
  int P() const noexcept {
    return terms.empty() ? 0 : terms.back().col_offset + terms.back().nbeta;
  }
};

/// Bind each formula term to its factors and parameter basis and lay out the
/// Z column blocks in formula order. `param_specs` covers the non-intercept
/// terms, one entry per formula term in order.
inline TermList expand_terms(const FormulaAst& ast,
                             const std::vector<std::string>& factor_names,
                             const std::vector<BasisSpec>& factor_specs,
                             const std::vector<BasisSpec>& param_specs) {
  if (factor_names.size() != factor_specs.size())
    throw ConfigError("expand_terms: factor name and basis counts differ");
  if (param_specs.size() != ast.terms.size())
    throw ConfigError("expand_terms: expected " + std::to_string(ast.terms.size()) +
                      " parameter bases (one per formula term), got " +
                      std::to_string(param_specs.size()));

  auto factor_index = [&](const std::string& name) {
    auto it = std::find(factor_names.begin(), factor_names.end(), name);
    if (it == factor_names.end())
      throw ConfigError("formula references unknown factor '" + name + "'");
    return static_cast<int>(it - factor_names.begin());
  };

  TermList list;
  list.factor_names = factor_names;
  int offset = 0;
  auto push = [&](BoundTerm term) {
    term.nbeta = term.param_basis.dimension();
    term.col_offset = offset;
    offset += term.nbeta;
    list.terms.push_back(std::move(term));
  };

  const auto tb = factor_specs.empty() ? std::pair{0.0, 1.0} : factor_specs.front().tbounds();
  push({TermKind::intercept, {}, 0, BasisSpec::constant(tb)});

  for (std::size_t q = 0; q < ast.terms.size(); ++q) {
    const Term& t = ast.terms[q];
    BoundTerm bound{TermKind::main, {}, 0, param_specs[q]};
    if (!param_specs[q].same_tbounds(factor_specs.front()))
      throw ConfigError("parameter basis time bounds differ from the factor bases");
    switch (t.kind) {
      case Term::Kind::main:
        bound.factors = {factor_index(t.a)};
        break;
      case Term::Kind::interaction: {
        bound.kind = TermKind::interaction;
        int ia = factor_index(t.a), ib = factor_index(t.b);
        if (ib < ia) std::swap(ia, ib);
        bound.factors = {ia, ib};
        break;
      }
      case Term::Kind::polynomial:
        bound.kind = TermKind::polynomial;
        bound.factors = {factor_index(t.a)};
        bound.poly_degree = t.degree;
        break;
    }
    push(std::move(bound));
  }
  return list;
}

}  // namespace fdoe
