#pragma once

// Sparse multivariate polynomials with exact rational coefficients.
//
// Text grammar accepted by parse() and produced by to_string():
//
//   expr     := term { ('+' | '-') term }
//   term     := factor { ('*' | '/') factor }       divisor must be a nonzero constant
//   factor   := ('+' | '-') factor | power
//   power    := primary [ '^' integer ]
//   primary  := number | variable | '(' expr ')'
//   number   := digits [ '.' digits ]               at most 12 fractional digits, exact
//   variable := 'x' digits                          1-based, at most nvars
//
// Rationals are written "p/q", which the grammar reads as a constant division.

#include <gmpxx.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <map>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace raregion {

using Rational = mpq_class;

// Sorted set of 1-based coordinate indices.
class VarSet {
 public:
  VarSet() = default;
  VarSet(std::initializer_list<int> indices) : VarSet(std::vector<int>(indices)) {}
  explicit VarSet(std::vector<int> indices) : idx_(std::move(indices)) {
    std::sort(idx_.begin(), idx_.end());
    idx_.erase(std::unique(idx_.begin(), idx_.end()), idx_.end());
    if (!idx_.empty() && idx_.front() < 1)
      throw std::invalid_argument("VarSet: coordinate indices are 1-based");
  }

  static VarSet range(int lo, int hi) {
    std::vector<int> v;
    for (int i = lo; i <= hi; ++i) v.push_back(i);
    return VarSet(std::move(v));
  }

  bool empty() const { return idx_.empty(); }
  int size() const { return static_cast<int>(idx_.size()); }
  const std::vector<int>& indices() const { return idx_; }
  auto begin() const { return idx_.begin(); }
  auto end() const { return idx_.end(); }
  int front() const { return idx_.front(); }
  int back() const { return idx_.back(); }

  bool contains(int i) const { return std::binary_search(idx_.begin(), idx_.end(), i); }

  // 0-based position of coordinate i inside the set, or -1.
  int position(int i) const {
    auto it = std::lower_bound(idx_.begin(), idx_.end(), i);
    return (it != idx_.end() && *it == i) ? static_cast<int>(it - idx_.begin()) : -1;
  }

  bool subset_of(const VarSet& other) const {
    return std::includes(other.idx_.begin(), other.idx_.end(), idx_.begin(), idx_.end());
  }

  VarSet intersect(const VarSet& other) const {
    std::vector<int> out;
    std::set_intersection(idx_.begin(), idx_.end(), other.idx_.begin(), other.idx_.end(),
                          std::back_inserter(out));
    return VarSet(std::move(out));
  }
  VarSet unite(const VarSet& other) const {
    std::vector<int> out;
    std::set_union(idx_.begin(), idx_.end(), other.idx_.begin(), other.idx_.end(),
                   std::back_inserter(out));
    return VarSet(std::move(out));
  }
  VarSet minus(const VarSet& other) const {
    std::vector<int> out;
    std::set_difference(idx_.begin(), idx_.end(), other.idx_.begin(), other.idx_.end(),
                        std::back_inserter(out));
    return VarSet(std::move(out));
  }

  std::string to_string() const {
    std::string s = "{";
    for (std::size_t k = 0; k < idx_.size(); ++k) {
      if (k) s += ",";
      s += std::to_string(idx_[k]);
    }
    return s + "}";
  }

  auto operator<=>(const VarSet&) const = default;
  bool operator==(const VarSet&) const = default;

 private:
  std::vector<int> idx_;
};

// All subsets of `s` with exactly k elements, in lexicographic order.
inline std::vector<VarSet> subsets_of_size(const VarSet& s, int k) {
  std::vector<VarSet> out;
  const auto& v = s.indices();
  const int n = s.size();
  if (k < 0 || k > n) return out;
  std::vector<int> pick(k);
  for (int i = 0; i < k; ++i) pick[i] = i;
  while (true) {
    std::vector<int> sub;
    for (int p : pick) sub.push_back(v[p]);
    out.emplace_back(std::move(sub));
    int i = k - 1;
    while (i >= 0 && pick[i] == n - k + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

using Monomial = std::vector<std::uint32_t>;

class Polynomial {
 public:
  explicit Polynomial(int nvars = 1) : nvars_(nvars) {
    if (nvars < 1) throw std::invalid_argument("Polynomial: nvars must be positive");
  }

  static Polynomial constant(int nvars, const Rational& c) {
    Polynomial p(nvars);
    p.add_term(Monomial(nvars, 0), c);
    return p;
  }

  static Polynomial variable(int nvars, int index) {
    if (index < 1 || index > nvars) throw std::out_of_range("Polynomial: variable index out of range");
    Polynomial p(nvars);
    Monomial m(nvars, 0);
    m[index - 1] = 1;
    p.add_term(m, Rational(1));
    return p;
  }

  int nvars() const { return nvars_; }
  const std::map<Monomial, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && total_degree(terms_.begin()->first) == 0);
  }

  int degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, total_degree(m));
    return d;
  }

  Rational coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  Rational constant_term() const { return coefficient(Monomial(nvars_, 0)); }

  Rational max_abs_coefficient() const {
    Rational best(0);
    for (const auto& [m, c] : terms_) {
      Rational a = abs(c);
      if (a > best) best = a;
    }
    return best;
  }

  // Inserts c·m, merging with an existing term and dropping zeros.
  void add_term(const Monomial& m, const Rational& c) {
    if (static_cast<int>(m.size()) != nvars_)
      throw std::invalid_argument("Polynomial: exponent vector length differs from nvars");
    if (c == 0) return;
    Rational v = c;
    v.canonicalize();
    auto it = terms_.find(m);
    if (it == terms_.end()) {
      terms_.emplace(m, std::move(v));
    } else {
      it->second += v;
      if (it->second == 0) terms_.erase(it);
    }
  }

  Polynomial& operator+=(const Polynomial& o) {
    check_same(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    check_same(o);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  Polynomial& operator*=(const Rational& s) {
    if (s == 0) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator-(Polynomial a) { return a *= Rational(-1); }
  friend Polynomial operator*(Polynomial a, const Rational& s) { return a *= s; }
  friend Polynomial operator*(const Rational& s, Polynomial a) { return a *= s; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check_same(b);
    Polynomial out(a.nvars_);
    Monomial m(a.nvars_);
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) {
        for (int i = 0; i < a.nvars_; ++i) m[i] = ma[i] + mb[i];
        out.add_term(m, ca * cb);
      }
    return out;
  }
  Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }

  Polynomial pow(unsigned e) const {
    Polynomial result = constant(nvars_, Rational(1));
    Polynomial base = *this;
    while (e) {
      if (e & 1u) result *= base;
      e >>= 1u;
      if (e) base = base * base;
    }
    return result;
  }

  Polynomial derivative(int index) const {
    if (index < 1 || index > nvars_) throw std::out_of_range("Polynomial: variable index out of range");
    Polynomial out(nvars_);
    for (const auto& [m, c] : terms_) {
      const auto e = m[index - 1];
      if (e == 0) continue;
      Monomial d = m;
      d[index - 1] = e - 1;
      out.add_term(d, c * Rational(e));
    }
    return out;
  }

  bool operator==(const Polynomial& o) const { return nvars_ == o.nvars_ && terms_ == o.terms_; }

  static int total_degree(const Monomial& m) {
    int d = 0;
    for (auto e : m) d += static_cast<int>(e);
    return d;
  }

 private:
  void check_same(const Polynomial& o) const {
    if (o.nvars_ != nvars_) throw std::invalid_argument("Polynomial: mismatched number of variables");
  }

  int nvars_;
  std::map<Monomial, Rational> terms_;
};

// ---------------------------------------------------------------------------
// Parsing

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

namespace detail {

class PolyParser {
 public:
  PolyParser(std::string_view text, int nvars) : s_(text), n_(nvars) {}

  Polynomial parse_all() {
    skip();
    if (pos_ >= s_.size()) throw ParseError("empty expression", pos_);
    Polynomial p = expr();
    skip();
    if (pos_ != s_.size()) throw ParseError(std::string("unexpected character '") + s_[pos_] + "'", pos_);
    return p;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Polynomial expr() {
    Polynomial acc = term();
    while (true) {
      if (accept('+'))
        acc += term();
      else if (accept('-'))
        acc -= term();
      else
        return acc;
    }
  }

  Polynomial term() {
    Polynomial acc = factor();
    while (true) {
      if (accept('*')) {
        acc *= factor();
      } else if (accept('/')) {
        const std::size_t at = pos_;
        Polynomial d = factor();
        if (!d.is_constant() || d.is_zero()) throw ParseError("division by a non-constant or zero", at);
        acc *= Rational(1) / d.constant_term();
      } else {
        return acc;
      }
    }
  }

  Polynomial factor() {
    if (accept('-')) return -factor();
    if (accept('+')) return factor();
    return power();
  }

  Polynomial power() {
    Polynomial base = primary();
    if (accept('^')) {
      skip();
      const std::size_t at = pos_;
      if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
        throw ParseError("expected nonnegative integer exponent", at);
      unsigned long e = 0;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        e = e * 10 + static_cast<unsigned long>(s_[pos_] - '0');
        if (e > 64) throw ParseError("exponent too large", at);
        ++pos_;
      }
      return base.pow(static_cast<unsigned>(e));
    }
    return base;
  }

  Polynomial primary() {
    skip();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Polynomial inner = expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return inner;
    }
    if (c == 'x') {
      const std::size_t at = pos_++;
      if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
        throw ParseError("expected variable index after 'x'", pos_);
      long k = 0;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        k = k * 10 + (s_[pos_] - '0');
        if (k > 1000000) throw ParseError("variable index out of range", at);
        ++pos_;
      }
      if (k < 1 || k > n_) throw ParseError("variable index out of range: x" + std::to_string(k), at);
      return Polynomial::variable(n_, static_cast<int>(k));
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  Polynomial number() {
    const std::size_t at = pos_;
    std::string digits;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) digits += s_[pos_++];
    std::string frac;
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) frac += s_[pos_++];
      if (frac.empty()) throw ParseError("expected digits after decimal point", pos_);
      if (frac.size() > 12) throw ParseError("more than 12 fractional digits", at);
    }
    if (digits.empty() && frac.empty()) throw ParseError("malformed number", at);
    mpz_class num(digits.empty() ? std::string("0") : digits + frac, 10);
    mpz_class den(1);
    for (std::size_t k = 0; k < frac.size(); ++k) den *= 10;
    Rational value(num, den);
    value.canonicalize();
    return Polynomial::constant(n_, value);
  }

  std::string_view s_;
  int n_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Polynomial parse(std::string_view text, int nvars) {
  if (nvars < 1) throw std::invalid_argument("parse: nvars must be positive");
  return detail::PolyParser(text, nvars).parse_all();
}

// Canonical text form; graded order, highest degree first. Reparses to an equal polynomial.
inline std::string to_string(const Polynomial& p) {
  if (p.is_zero()) return "0";
  std::vector<std::pair<Monomial, Rational>> terms(p.terms().begin(), p.terms().end());
  std::stable_sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
    const int da = Polynomial::total_degree(a.first), db = Polynomial::total_degree(b.first);
    if (da != db) return da > db;
    return a.first > b.first;
  });
  std::string out;
  bool first = true;
  for (const auto& [m, c] : terms) {
    const bool neg = c < 0;
    const Rational mag = abs(c);
    if (first)
      out += neg ? "-" : "";
    else
      out += neg ? " - " : " + ";
    first = false;
    std::string mono;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] == 0) continue;
      if (!mono.empty()) mono += "*";
      mono += "x" + std::to_string(i + 1);
      if (m[i] > 1) mono += "^" + std::to_string(m[i]);
    }
    if (mono.empty())
      out += mag.get_str();
    else if (mag == 1)
      out += mono;
    else
      out += mag.get_str() + "*" + mono;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Analysis

// Exact evaluation: point coordinates are converted to rationals without rounding,
// the sum is accumulated exactly and rounded once.
inline Rational evaluate_exact(const Polynomial& p, std::span<const double> point) {
  if (static_cast<int>(point.size()) != p.nvars())
    throw std::invalid_argument("evaluate: point dimension " + std::to_string(point.size()) +
                                " differs from nvars " + std::to_string(p.nvars()));
  std::vector<Rational> x;
  x.reserve(point.size());
  for (double v : point) {
    if (!std::isfinite(v)) throw std::invalid_argument("evaluate: non-finite coordinate");
    x.emplace_back(v);
  }
  Rational acc(0), mono;
  for (const auto& [m, c] : p.terms()) {
    mono = c;
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::uint32_t e = 0; e < m[i]; ++e) mono *= x[i];
    acc += mono;
  }
  return acc;
}

inline double evaluate(const Polynomial& p, std::span<const double> point) {
  return evaluate_exact(p, point).get_d();
}

inline std::vector<Polynomial> gradient(const Polynomial& p) {
  std::vector<Polynomial> g;
  g.reserve(p.nvars());
  for (int i = 1; i <= p.nvars(); ++i) g.push_back(p.derivative(i));
  return g;
}

// Syntactic variable support: indices carrying a positive exponent in some term.
inline VarSet support(const Polynomial& p) {
  std::vector<bool> used(p.nvars(), false);
  for (const auto& [m, c] : p.terms())
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i] > 0) used[i] = true;
  std::vector<int> idx;
  for (int i = 0; i < p.nvars(); ++i)
    if (used[i]) idx.push_back(i + 1);
  return VarSet(std::move(idx));
}

// Rewrites p (support inside A) in |A| variables via the order-preserving map A -> {1..|A|}.
inline Polynomial relabel(const Polynomial& p, const VarSet& A) {
  if (A.empty()) throw std::invalid_argument("relabel: empty target variable set");
  if (A.back() > p.nvars()) throw std::invalid_argument("relabel: variable set exceeds nvars");
  if (!support(p).subset_of(A))
    throw std::invalid_argument("relabel: support " + support(p).to_string() + " not contained in " +
                                A.to_string());
  Polynomial out(A.size());
  Monomial small(A.size());
  for (const auto& [m, c] : p.terms()) {
    for (int k = 0; k < A.size(); ++k) small[k] = m[A.indices()[k] - 1];
    out.add_term(small, c);
  }
  return out;
}

// Inverse of relabel: places the variables of q onto coordinates A of an n-dimensional space.
inline Polynomial lift(const Polynomial& q, const VarSet& A, int n) {
  if (q.nvars() != A.size()) throw std::invalid_argument("lift: nvars differs from |A|");
  if (!A.empty() && A.back() > n) throw std::invalid_argument("lift: variable set exceeds n");
  Polynomial out(n);
  Monomial big(n, 0);
  for (const auto& [m, c] : q.terms()) {
    std::fill(big.begin(), big.end(), 0);
    for (int k = 0; k < A.size(); ++k) big[A.indices()[k] - 1] = m[k];
    out.add_term(big, c);
  }
  return out;
}

// Same polynomial viewed in more variables (new ones appended).
inline Polynomial extend(const Polynomial& p, int nvars) {
  if (nvars < p.nvars()) throw std::invalid_argument("extend: cannot shrink");
  return lift(p, VarSet::range(1, p.nvars()), nvars);
}

// p divided by its largest coefficient magnitude; invariant under positive rescaling of p.
inline Polynomial normalized(const Polynomial& p) {
  if (p.is_zero()) return p;
  return p * (Rational(1) / p.max_abs_coefficient());
}

// ---------------------------------------------------------------------------
// Floating-point evaluation for hot loops.

class CompiledPolynomial {
 public:
  CompiledPolynomial() = default;
  explicit CompiledPolynomial(const Polynomial& p) : nvars_(p.nvars()) {
    for (const auto& [m, c] : p.terms()) {
      Term t{c.get_d(), static_cast<std::uint32_t>(factors_.size()), 0};
      for (std::size_t i = 0; i < m.size(); ++i)
        if (m[i]) factors_.push_back({static_cast<std::uint32_t>(i), m[i]});
      t.end = static_cast<std::uint32_t>(factors_.size());
      terms_.push_back(t);
      degree_ = std::max(degree_, Polynomial::total_degree(m));
    }
  }

  int nvars() const { return nvars_; }
  int degree() const { return degree_; }
  std::size_t term_count() const { return terms_.size(); }

  double operator()(std::span<const double> x) const {
    double acc = 0.0;
    for (const auto& t : terms_) acc += t.coeff * monomial(t, x);
    return acc;
  }

  // Value together with Σ|c·m(x)|, the scale of the floating rounding error.
  std::pair<double, double> eval_with_magnitude(std::span<const double> x) const {
    double acc = 0.0, mag = 0.0;
    for (const auto& t : terms_) {
      const double v = t.coeff * monomial(t, x);
      acc += v;
      mag += std::abs(v);
    }
    return {acc, mag};
  }

 private:
  struct Term {
    double coeff;
    std::uint32_t begin, end;
  };
  struct Factor {
    std::uint32_t var, exp;
  };

  double monomial(const Term& t, std::span<const double> x) const {
    double m = 1.0;
    for (std::uint32_t f = t.begin; f < t.end; ++f) {
      const double xv = x[factors_[f].var];
      for (std::uint32_t e = 0; e < factors_[f].exp; ++e) m *= xv;
    }
    return m;
  }

  int nvars_ = 0;
  int degree_ = 0;
  std::vector<Term> terms_;
  std::vector<Factor> factors_;
};

// Sign of p(x) with a floating filter and an exact fallback near zero.
inline int sign_at(const Polynomial& exact, const CompiledPolynomial& fast, std::span<const double> x) {
  const auto [v, mag] = fast.eval_with_magnitude(x);
  const double gamma = 4.0 * (fast.degree() + static_cast<double>(fast.term_count()) + 2.0) *
                       std::numeric_limits<double>::epsilon();
  if (std::abs(v) > gamma * mag) return v > 0 ? 1 : -1;
  return sgn(evaluate_exact(exact, x));
}

}  // namespace raregion
