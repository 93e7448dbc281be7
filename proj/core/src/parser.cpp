#include <cctype>
#include <charconv>
#include <cstdlib>
#include <string>

#include "ncrat/errors.hpp"
#include "ncrat/ncexpr.hpp"

namespace ncrat {

namespace {

class Parser {
 public:
  Parser(std::string_view text, int arity) : s_(text), arity_(arity) {}

  NcExpr parse() {
    NcExpr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  std::string_view s_;
  int arity_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::SyntaxError, "ncexpr", msg + " at position " + std::to_string(pos_),
                {{"position", pos_}, {"message", msg}});
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  bool accept(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  bool keyword(std::string_view kw) {
    skip();
    if (s_.substr(pos_, kw.size()) != kw) return false;
    std::size_t after = pos_ + kw.size();
    // allow "inv (" but not "invx"
    std::size_t p = after;
    while (p < s_.size() && std::isspace(static_cast<unsigned char>(s_[p]))) ++p;
    if (p >= s_.size() || s_[p] != '(') return false;
    pos_ = after;
    return true;
  }

  bool at_number() {
    skip();
    if (pos_ >= s_.size()) return false;
    const char c = s_[pos_];
    return std::isdigit(static_cast<unsigned char>(c)) || c == '.';
  }

  // Unsigned decimal literal with optional exponent.
  double number() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
      ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
      if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
        while (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) ++p;
        pos_ = p;
      }
    }
    const std::string tok(s_.substr(start, pos_ - start));
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || end != tok.c_str() + tok.size()) {
      pos_ = start;
      fail("malformed number");
    }
    return v;
  }

  // a or ai
  Complex literal(double sign) {
    const double v = sign * number();
    if (pos_ < s_.size() && s_[pos_] == 'i') {
      ++pos_;
      return {0.0, v};
    }
    return {v, 0.0};
  }

  // "(a+bi)" / "(a-bi)" with optional sign on a. Restores position on mismatch.
  bool complex_literal(Complex& out) {
    const std::size_t save = pos_;
    auto bail = [&] {
      pos_ = save;
      return false;
    };
    if (!accept('(')) return bail();
    double sa = 1.0;
    if (accept('-')) sa = -1.0;
    if (!at_number()) return bail();
    const double a = sa * number();
    if (pos_ < s_.size() && s_[pos_] == 'i') return bail();
    double sb;
    if (accept('+')) {
      sb = 1.0;
    } else if (accept('-')) {
      sb = -1.0;
    } else {
      return bail();
    }
    if (!at_number()) return bail();
    const double b = number();
    if (pos_ >= s_.size() || s_[pos_] != 'i') return bail();
    ++pos_;
    if (!accept(')')) return bail();
    out = Complex(a, sb * b);
    return true;
  }

  NcExpr expr() {
    NcExpr e = term();
    for (;;) {
      if (accept('+')) {
        e = NcExpr::add(e, term());
      } else if (accept('-')) {
        e = NcExpr::add(e, NcExpr::mul(NcExpr::constant(-1.0), term()));
      } else {
        return e;
      }
    }
  }

  NcExpr term() {
    NcExpr e = factor();
    while (accept('*')) e = NcExpr::mul(e, factor());
    return e;
  }

  NcExpr factor() {
    if (accept('-')) {
      if (at_number()) return NcExpr::constant(literal(-1.0));
      return NcExpr::mul(NcExpr::constant(-1.0), factor());
    }
    return atom();
  }

  NcExpr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    if (at_number()) return NcExpr::constant(literal(1.0));
    if (keyword("inv")) {
      expect('(');
      if (peek(')')) fail("empty argument");
      NcExpr e = expr();
      expect(')');
      return NcExpr::inv(e);
    }
    if (keyword("adj")) {
      expect('(');
      if (peek(')')) fail("empty argument");
      NcExpr e = expr();
      expect(')');
      return NcExpr::adj(e);
    }
    if (s_[pos_] == 'x') return variable();
    if (s_[pos_] == 'i') {
      ++pos_;
      return NcExpr::constant({0.0, 1.0});
    }
    if (peek('(')) {
      Complex c;
      if (complex_literal(c)) return NcExpr::constant(c);
      expect('(');
      if (peek(')')) fail("empty parentheses");
      NcExpr e = expr();
      expect(')');
      return e;
    }
    fail(std::string("unexpected character '") + s_[pos_] + "'");
  }

  NcExpr variable() {
    const std::size_t start = pos_;
    ++pos_;  // 'x'
    bool braced = false;
    if (pos_ < s_.size() && s_[pos_] == '{') {
      braced = true;
      ++pos_;
    }
    const std::size_t d0 = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ == d0) {
      pos_ = start;
      fail("variable index expected");
    }
    int k = 0;
    const auto res = std::from_chars(s_.data() + d0, s_.data() + pos_, k);
    if (res.ec != std::errc()) {
      pos_ = start;
      fail("variable index out of range");
    }
    if (braced) {
      if (pos_ >= s_.size() || s_[pos_] != '}') fail("expected '}'");
      ++pos_;
    }
    if (k < 1) {
      pos_ = start;
      fail("variable indices start at 1");
    }
    if (k > arity_) {
      throw Error(ErrorCode::ArityError, "ncexpr",
                  "variable x" + std::to_string(k) + " exceeds arity " + std::to_string(arity_),
                  {{"index", k}, {"arity", arity_}, {"position", start}});
    }
    return NcExpr::var(k);
  }
};

}  // namespace

NcExpr parse_expr(std::string_view text, int arity) { return Parser(text, arity).parse(); }

}  // namespace ncrat
