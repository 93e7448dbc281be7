#include <cmath>
#include <string>

#include "ncrat/errors.hpp"
#include "ncrat/ncexpr.hpp"

namespace ncrat {

namespace {

// Dense truncated series: by_len[k][i] is the coefficient of the word of
// length k whose base-g digits (most significant first) spell i.
struct Dense {
  std::vector<std::vector<Complex>> by_len;
};

class Expander {
 public:
  Expander(int arity, int degree) : g_(arity), d_(degree) {
    pow_.assign(d_ + 1, 1);
    for (int k = 1; k <= d_; ++k) pow_[k] = pow_[k - 1] * g_;
  }

  Dense zero() const {
    Dense s;
    s.by_len.resize(d_ + 1);
    for (int k = 0; k <= d_; ++k) s.by_len[k].assign(pow_[k], Complex(0.0));
    return s;
  }

  Dense run(const NcExpr& e) {
    using K = NcExpr::Kind;
    switch (e.kind()) {
      case K::Const: {
        Dense s = zero();
        s.by_len[0][0] = e.value();
        return s;
      }
      case K::Var: {
        if (e.index() > g_) {
          throw Error(ErrorCode::ArityError, "ncexpr", "variable index exceeds arity",
                      {{"index", e.index()}, {"arity", g_}});
        }
        Dense s = zero();
        if (d_ >= 1) s.by_len[1][e.index() - 1] = 1.0;
        return s;
      }
      case K::Add: {
        path_.push_back(0);
        Dense a = run(e.lhs());
        path_.back() = 1;
        Dense b = run(e.rhs());
        path_.pop_back();
        for (int k = 0; k <= d_; ++k)
          for (std::size_t i = 0; i < a.by_len[k].size(); ++i) a.by_len[k][i] += b.by_len[k][i];
        return a;
      }
      case K::Mul: {
        path_.push_back(0);
        Dense a = run(e.lhs());
        path_.back() = 1;
        Dense b = run(e.rhs());
        path_.pop_back();
        return product(a, b);
      }
      case K::Inv: {
        path_.push_back(0);
        Dense p = run(e.child());
        path_.pop_back();
        const Complex p0 = p.by_len[0][0];
        if (std::abs(p0) <= kInvertibilityTol) {
          std::string path;
          for (std::size_t i = 0; i < path_.size(); ++i) {
            if (i) path += '.';
            path += std::to_string(path_[i]);
          }
          throw Error(ErrorCode::NotRegularAtZero, "ncexpr", "expression is not regular at 0",
                      {{"path", path}});
        }
        // p = p0 (1 - q) with q = 1 - p/p0, so p^-1 = (1/p0) sum_k q^k
        Dense q = zero();
        for (int k = 1; k <= d_; ++k)
          for (std::size_t i = 0; i < q.by_len[k].size(); ++i) q.by_len[k][i] = -p.by_len[k][i] / p0;
        Dense sum = zero();
        sum.by_len[0][0] = 1.0;
        Dense term = sum;
        for (int k = 1; k <= d_; ++k) {
          term = product(term, q);
          for (int l = 0; l <= d_; ++l)
            for (std::size_t i = 0; i < sum.by_len[l].size(); ++i) sum.by_len[l][i] += term.by_len[l][i];
        }
        for (auto& row : sum.by_len)
          for (auto& c : row) c /= p0;
        return sum;
      }
      case K::Adj: {
        path_.push_back(0);
        Dense a = run(e.child());
        path_.pop_back();
        Dense out = zero();
        for (int k = 0; k <= d_; ++k)
          for (std::size_t i = 0; i < a.by_len[k].size(); ++i)
            out.by_len[k][reverse(i, k)] = std::conj(a.by_len[k][i]);
        return out;
      }
    }
    return zero();
  }

  SeriesTable table(const Dense& s) const {
    SeriesTable t;
    t.arity = g_;
    t.degree = d_;
    for (int k = 0; k <= d_; ++k)
      for (std::size_t i = 0; i < s.by_len[k].size(); ++i)
        if (s.by_len[k][i] != Complex(0.0)) t.coeffs.emplace(word(i, k), s.by_len[k][i]);
    return t;
  }

 private:
  int g_;
  int d_;
  std::vector<std::size_t> pow_;
  std::vector<int> path_;

  Dense product(const Dense& a, const Dense& b) const {
    Dense out = zero();
    for (int ka = 0; ka <= d_; ++ka) {
      for (std::size_t ia = 0; ia < a.by_len[ka].size(); ++ia) {
        const Complex ca = a.by_len[ka][ia];
        if (ca == Complex(0.0)) continue;
        for (int kb = 0; ka + kb <= d_; ++kb) {
          auto& dst = out.by_len[ka + kb];
          const std::size_t base = ia * pow_[kb];
          const auto& src = b.by_len[kb];
          for (std::size_t ib = 0; ib < src.size(); ++ib)
            if (src[ib] != Complex(0.0)) dst[base + ib] += ca * src[ib];
        }
      }
    }
    return out;
  }

  Word word(std::size_t i, int k) const {
    Word w(k);
    for (int p = k - 1; p >= 0; --p) {
      w[p] = static_cast<int>(i % g_) + 1;
      i /= g_;
    }
    return w;
  }

  std::size_t reverse(std::size_t i, int k) const {
    std::size_t r = 0;
    for (int p = 0; p < k; ++p) {
      r = r * g_ + i % g_;
      i /= g_;
    }
    return r;
  }
};

}  // namespace

Complex SeriesTable::coeff(const Word& w) const {
  auto it = coeffs.find(w);
  return it == coeffs.end() ? Complex(0.0) : it->second;
}

SeriesTable series_expand(const NcExpr& r, int degree, int arity) {
  if (degree < 0) throw Error(ErrorCode::ConfigError, "ncexpr", "negative degree");
  if (arity < 1) arity = std::max(1, r.max_var());
  Expander ex(arity, degree);
  return ex.table(ex.run(r));
}

MatC eval_series(const SeriesTable& s, const MatTuple& x) {
  const Index n = tuple_dim(x);
  MatC out = MatC::Zero(n, n);
  for (const auto& [w, c] : s.coeffs) {
    MatC m = MatC::Identity(n, n);
    for (int j : w) m = m * x.at(j - 1);
    out += c * m;
  }
  return out;
}

std::vector<Word> all_words(int arity, int max_len) {
  std::vector<Word> out{Word{}};
  std::size_t begin = 0;
  for (int k = 1; k <= max_len; ++k) {
    const std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i) {
      for (int j = 1; j <= arity; ++j) {
        Word w = out[i];
        w.push_back(j);
        out.push_back(std::move(w));
      }
    }
    begin = end;
  }
  return out;
}

}  // namespace ncrat
