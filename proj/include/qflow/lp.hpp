#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qflow/error.hpp"

namespace qflow {

enum class Relation { kLessEqual, kEqual };

struct Term {
  std::size_t var;
  double coef;
};

struct Variable {
  std::string name;
  double objective = 0.0;
  double lower = 0.0;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
};

// Maximization LP: variables x_j >= lower_j, rows sum a_ij x_j {<=,=} b_i.
class LinearProgram {
 public:
  std::size_t add_variable(std::string name, double objective = 0.0, double lower = 0.0) {
    vars_.push_back({std::move(name), objective, lower});
    return vars_.size() - 1;
  }

  std::size_t add_constraint(std::string name, std::vector<Term> terms, Relation rel, double rhs) {
    rows_.push_back({std::move(name), std::move(terms), rel, rhs});
    return rows_.size() - 1;
  }

  void set_objective(std::size_t var, double coef) { vars_.at(var).objective = coef; }

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }
  std::size_t num_variables() const { return vars_.size(); }
  std::size_t num_constraints() const { return rows_.size(); }

  std::size_t num_nonzeros() const {
    std::size_t nz = 0;
    for (const auto& r : rows_) nz += r.terms.size();
    return nz;
  }

  // Throws InputError on a dangling variable index or a non-finite number.
  void validate() const {
    for (const auto& v : vars_) {
      if (!std::isfinite(v.objective) || !std::isfinite(v.lower)) {
        throw InputError("lp: non-finite data on variable '" + v.name + "'");
      }
    }
    for (const auto& r : rows_) {
      if (!std::isfinite(r.rhs)) throw InputError("lp: non-finite rhs on row '" + r.name + "'");
      for (const auto& t : r.terms) {
        if (t.var >= vars_.size()) {
          throw InputError("lp: row '" + r.name + "' references undeclared variable " + std::to_string(t.var));
        }
        if (!std::isfinite(t.coef)) throw InputError("lp: non-finite coefficient on row '" + r.name + "'");
      }
    }
  }

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
  }
  return "?";
}

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  double objective = 0.0;
  // Primal values per variable and dual prices per row (only when optimal).
  std::vector<double> values;
  std::vector<double> duals;
  std::size_t iterations = 0;
};

struct SimplexOptions {
  double tol_feas = 1e-7;
  double tol_obj = 1e-7;
  double dual_tol = 1e-9;
  double pivot_tol = 1e-9;
  std::size_t refactor_period = 100;
  // Consecutive degenerate pivots before ratio-test ties are broken
  // lexicographically.
  std::size_t degenerate_streak = 200;
  // Consecutive degenerate pivots before falling back to Bland's rule;
  // 0 picks max(1000, 4m).
  std::size_t bland_streak = 0;
  // 0 picks a limit from the problem size.
  std::size_t max_iterations = 0;
};

namespace detail {

// Revised primal simplex on  A' x' + S s + R a = |b'|, all columns >= 0,
// where rows with negative shifted rhs are negated and get an artificial.
// The basis is factorized with sparse LU and updated in product form.
class RevisedSimplex {
 public:
  RevisedSimplex(const LinearProgram& lp, const SimplexOptions& opt) : lp_(lp), opt_(opt) {
    n_struct_ = lp.num_variables();
    m_ = lp.num_constraints();
    build();
  }

  LpSolution run() {
    LpSolution sol;
    const std::size_t limit =
        opt_.max_iterations ? opt_.max_iterations : 100 * (m_ + cols_.size()) + 10000;

    double infeas = 0.0;
    for (std::size_t r = 0; r < m_; ++r) {
      if (kind_[head_[r]] == Kind::kArtificial) infeas += xb_[r];
    }
    if (infeas > opt_.tol_feas) {
      for (std::size_t c = 0; c < cols_.size(); ++c) cost_[c] = kind_[c] == Kind::kArtificial ? -1.0 : 0.0;
      phase_ = 1;
      const auto st = iterate(limit);
      if (st == Step::kUnbounded) throw NumericalError("lp: phase 1 reported unbounded");
      refactor();
      infeas = 0.0;
      for (std::size_t r = 0; r < m_; ++r) {
        if (kind_[head_[r]] == Kind::kArtificial) infeas += std::max(0.0, xb_[r]);
      }
      if (infeas > opt_.tol_feas) {
        sol.status = LpStatus::kInfeasible;
        sol.iterations = iterations_;
        return sol;
      }
    }

    phase_ = 2;
    for (std::size_t c = 0; c < cols_.size(); ++c) cost_[c] = c < n_struct_ ? lp_.variables()[c].objective : 0.0;
    if (iterate(limit) == Step::kUnbounded) {
      sol.status = LpStatus::kUnbounded;
      sol.iterations = iterations_;
      return sol;
    }
    refactor();
    return finish();
  }

 private:
  enum class Kind : unsigned char { kStructural, kSlack, kArtificial };
  enum class Step { kOptimal, kUnbounded };
  enum class Rule { kDantzig, kLexicographic, kBland };

  struct Entry {
    int row;
    double val;
  };
  struct Eta {
    int row;
    double pivot;
    std::vector<Entry> entries;
  };

  void build() {
    const auto& vars = lp_.variables();
    const auto& rows = lp_.constraints();
    std::vector<double> shifted(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      double b = rows[i].rhs;
      for (const auto& t : rows[i].terms) b -= t.coef * vars[t.var].lower;
      shifted[i] = b;
    }
    sign_.assign(m_, 1.0);
    for (std::size_t i = 0; i < m_; ++i) {
      if (shifted[i] < 0) sign_[i] = -1.0;
    }
    b_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) b_[i] = sign_[i] * shifted[i];

    // Structural columns, duplicate (row, var) terms merged.
    cols_.assign(n_struct_, {});
    for (std::size_t i = 0; i < m_; ++i) {
      for (const auto& t : rows[i].terms) {
        auto& col = cols_[t.var];
        if (!col.empty() && col.back().row == static_cast<int>(i)) {
          col.back().val += sign_[i] * t.coef;
        } else {
          col.push_back({static_cast<int>(i), sign_[i] * t.coef});
        }
      }
    }
    kind_.assign(n_struct_, Kind::kStructural);
    head_.assign(m_, 0);
    for (std::size_t i = 0; i < m_; ++i) {
      if (rows[i].relation == Relation::kLessEqual) {
        cols_.push_back({{static_cast<int>(i), sign_[i]}});
        kind_.push_back(Kind::kSlack);
        if (sign_[i] > 0) {
          head_[i] = cols_.size() - 1;
          continue;
        }
      }
      cols_.push_back({{static_cast<int>(i), 1.0}});
      kind_.push_back(Kind::kArtificial);
      head_[i] = cols_.size() - 1;
    }
    basic_.assign(cols_.size(), -1);
    for (std::size_t i = 0; i < m_; ++i) basic_[head_[i]] = static_cast<int>(i);
    cost_.assign(cols_.size(), 0.0);
    xb_ = b_;
    if (m_ > 0) refactor();
  }

  void refactor() {
    etas_.clear();
    if (m_ == 0) return;
    std::vector<Eigen::Triplet<double>> trips;
    for (std::size_t r = 0; r < m_; ++r) {
      for (const auto& e : cols_[head_[r]]) trips.emplace_back(e.row, static_cast<int>(r), e.val);
    }
    Eigen::SparseMatrix<double> basis(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
    basis.setFromTriplets(trips.begin(), trips.end());
    basis.makeCompressed();
    lu_.analyzePattern(basis);
    lu_.factorize(basis);
    if (lu_.info() != Eigen::Success) throw NumericalError("lp: singular basis during refactorization");
    Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b_.data(), static_cast<Eigen::Index>(m_));
    Eigen::VectorXd x = lu_.solve(rhs);
    for (std::size_t r = 0; r < m_; ++r) xb_[r] = x[static_cast<Eigen::Index>(r)];
  }

  Eigen::VectorXd ftran(std::size_t col) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
    for (const auto& e : cols_[col]) v[e.row] = e.val;
    return ftran_vec(std::move(v));
  }

  Eigen::VectorXd ftran_vec(Eigen::VectorXd v) {
    v = lu_.solve(v).eval();
    for (const auto& eta : etas_) {
      const double pivot_val = v[eta.row] / eta.pivot;
      v[eta.row] = pivot_val;
      if (pivot_val == 0.0) continue;
      for (const auto& e : eta.entries) v[e.row] -= e.val * pivot_val;
    }
    return v;
  }

  Eigen::VectorXd btran(Eigen::VectorXd c) {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double acc = c[it->row];
      for (const auto& e : it->entries) acc -= c[e.row] * e.val;
      c[it->row] = acc / it->pivot;
    }
    return lu_.transpose().solve(c);
  }

  double reduced_cost(std::size_t col, const Eigen::VectorXd& y) const {
    double d = cost_[col];
    for (const auto& e : cols_[col]) d -= y[e.row] * e.val;
    return d;
  }

  Step iterate(std::size_t limit) {
    if (m_ == 0) {
      for (std::size_t c = 0; c < cols_.size(); ++c) {
        if (cost_[c] > opt_.dual_tol) return Step::kUnbounded;
      }
      return Step::kOptimal;
    }
    std::size_t since_refactor = 0;
    std::size_t streak = 0;
    double best_obj = -std::numeric_limits<double>::infinity();
    Rule rule = Rule::kDantzig;
    const std::size_t bland_after = opt_.bland_streak ? opt_.bland_streak : std::max<std::size_t>(1000, 4 * m_);
    Eigen::VectorXd cb(static_cast<Eigen::Index>(m_));
    for (;;) {
      if (iterations_ >= limit) throw NumericalError("lp: iteration limit reached");
      if (since_refactor >= opt_.refactor_period) {
        refactor();
        since_refactor = 0;
      }
      for (std::size_t r = 0; r < m_; ++r) cb[static_cast<Eigen::Index>(r)] = cost_[head_[r]];
      const Eigen::VectorXd y = btran(cb);

      // Pricing. Artificial columns never re-enter.
      std::size_t enter = cols_.size();
      double best = opt_.dual_tol;
      for (std::size_t c = 0; c < cols_.size(); ++c) {
        if (basic_[c] >= 0 || kind_[c] == Kind::kArtificial) continue;
        const double d = reduced_cost(c, y);
        if (d > best) {
          best = d;
          enter = c;
          if (rule == Rule::kBland) break;
        }
      }
      if (enter == cols_.size()) return Step::kOptimal;

      const Eigen::VectorXd alpha = ftran(enter);
      const std::size_t leave = ratio_test(alpha, rule);
      if (leave == m_) return Step::kUnbounded;

      const double a_r = alpha[static_cast<Eigen::Index>(leave)];
      const double theta = std::max(0.0, xb_[leave]) / std::abs(a_r);
      for (std::size_t r = 0; r < m_; ++r) {
        const double a = alpha[static_cast<Eigen::Index>(r)];
        if (a != 0.0) xb_[r] -= theta * a;
      }
      xb_[leave] = theta;

      Eta eta{static_cast<int>(leave), a_r, {}};
      for (std::size_t r = 0; r < m_; ++r) {
        const double a = alpha[static_cast<Eigen::Index>(r)];
        if (r != leave && std::abs(a) > 1e-14) eta.entries.push_back({static_cast<int>(r), a});
      }
      etas_.push_back(std::move(eta));

      basic_[head_[leave]] = -1;
      head_[leave] = enter;
      basic_[enter] = static_cast<int>(leave);
      ++iterations_;
      ++since_refactor;

      // Anti-cycling: a run of degenerate pivots switches the ratio test to
      // lexicographic tie-breaking, a much longer run to Bland's rule; both
      // end when the objective strictly improves.
      double obj = 0.0;
      for (std::size_t r = 0; r < m_; ++r) obj += cost_[head_[r]] * xb_[r];
      if (obj > best_obj + 1e-12 * (1.0 + std::abs(best_obj))) {
        best_obj = obj;
        streak = 0;
        rule = Rule::kDantzig;
      } else if (++streak >= bland_after) {
        rule = Rule::kBland;
      } else if (streak >= opt_.degenerate_streak) {
        rule = Rule::kLexicographic;
      }
    }
  }

  // Returns the leaving row, or m_ when the entering column is unbounded.
  // Dantzig mode uses a two-pass (Harris) test. The other modes take the
  // exact minimum ratio; lexicographic mode breaks ties by comparing rows of
  // B^-1 scaled by the pivot entry, Bland's mode by smallest column index.
  // In phase 2 basic artificials are fixed at zero and block either way.
  std::size_t ratio_test(const Eigen::VectorXd& alpha, Rule rule) {
    constexpr double kHarris = 1e-9;
    const bool harris = rule == Rule::kDantzig;
    auto blocking = [&](std::size_t r) {
      const double a = alpha[static_cast<Eigen::Index>(r)];
      if (a > opt_.pivot_tol) return a;
      if (phase_ == 2 && kind_[head_[r]] == Kind::kArtificial && a < -opt_.pivot_tol) return -a;
      return 0.0;
    };
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m_; ++r) {
      const double a = blocking(r);
      if (a == 0.0) continue;
      bound = std::min(bound, (std::max(0.0, xb_[r]) + (harris ? kHarris : 0.0)) / a);
    }
    if (!std::isfinite(bound)) return m_;

    std::vector<std::size_t> ties;
    std::size_t leave = m_;
    double best_a = 0.0;
    for (std::size_t r = 0; r < m_; ++r) {
      const double a = blocking(r);
      if (a == 0.0) continue;
      const double ratio = std::max(0.0, xb_[r]) / a;
      if (ratio > bound + (harris ? 0.0 : 1e-12 * (1.0 + bound))) continue;
      if (rule == Rule::kBland) {
        if (leave == m_ || head_[r] < head_[leave]) leave = r;
      } else if (rule == Rule::kLexicographic) {
        ties.push_back(r);
      } else if (a > best_a) {
        best_a = a;
        leave = r;
      }
    }
    if (rule != Rule::kLexicographic) return leave;

    if (ties.size() > 1) {
      // Row r of B^-1 is B^-T e_r; rows are distinct, so the order is strict.
      std::vector<Eigen::VectorXd> rows;
      for (std::size_t r : ties) {
        Eigen::VectorXd unit = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
        unit[static_cast<Eigen::Index>(r)] = 1.0;
        rows.push_back(btran(std::move(unit)) / blocking(r));
      }
      std::size_t best = 0;
      for (std::size_t t = 1; t < ties.size(); ++t) {
        for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(m_); ++k) {
          const double diff = rows[t][k] - rows[best][k];
          if (std::abs(diff) <= 1e-12) continue;
          if (diff < 0) best = t;
          break;
        }
      }
      return ties[best];
    }
    return ties.front();
  }

  LpSolution finish() {
    LpSolution sol;
    sol.status = LpStatus::kOptimal;
    sol.iterations = iterations_;
    const auto& vars = lp_.variables();
    const auto& rows = lp_.constraints();
    sol.values.assign(n_struct_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      if (head_[r] < n_struct_) sol.values[head_[r]] = xb_[r];
    }
    for (std::size_t j = 0; j < n_struct_; ++j) {
      if (sol.values[j] < 0.0) {
        if (sol.values[j] < -opt_.tol_feas) throw NumericalError("lp: negative primal value after solve");
        sol.values[j] = 0.0;
      }
      sol.values[j] += vars[j].lower;
    }
    sol.duals.assign(m_, 0.0);
    if (m_ > 0) {
      Eigen::VectorXd cb(static_cast<Eigen::Index>(m_));
      for (std::size_t r = 0; r < m_; ++r) cb[static_cast<Eigen::Index>(r)] = cost_[head_[r]];
      const Eigen::VectorXd y = btran(cb);
      for (std::size_t i = 0; i < m_; ++i) sol.duals[i] = sign_[i] * y[static_cast<Eigen::Index>(i)];
    }
    double obj = 0.0;
    for (std::size_t j = 0; j < n_struct_; ++j) obj += vars[j].objective * sol.values[j];
    sol.objective = obj;

    for (std::size_t i = 0; i < m_; ++i) {
      double act = 0.0;
      for (const auto& t : rows[i].terms) act += t.coef * sol.values[t.var];
      const double diff = act - rows[i].rhs;
      const bool bad = rows[i].relation == Relation::kEqual ? std::abs(diff) > opt_.tol_feas : diff > opt_.tol_feas;
      if (bad) {
        throw NumericalError("lp: row '" + rows[i].name + "' violated by " + std::to_string(diff) + " after solve");
      }
    }
    return sol;
  }

  const LinearProgram& lp_;
  const SimplexOptions& opt_;
  std::size_t n_struct_ = 0;
  std::size_t m_ = 0;
  std::vector<std::vector<Entry>> cols_;
  std::vector<Kind> kind_;
  std::vector<double> cost_;
  std::vector<double> sign_;
  std::vector<double> b_;
  std::vector<std::size_t> head_;
  std::vector<int> basic_;
  std::vector<double> xb_;
  std::vector<Eta> etas_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::size_t iterations_ = 0;
  int phase_ = 2;
};

}  // namespace detail

// Solves a maximization LP with a bounded-iteration revised simplex.
// Deterministic for identical input. Throws InputError for malformed LPs and
// NumericalError if the final point misses tol_feas.
inline LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opt = {}) {
  lp.validate();
  detail::RevisedSimplex solver(lp, opt);
  return solver.run();
}

namespace detail {

inline std::string lp_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// LP-format names: [A-Za-z0-9_] only, never starting with a digit, unique.
inline std::vector<std::string> mangle_names(const std::vector<std::string>& raw, char fallback) {
  std::vector<std::string> out;
  out.reserve(raw.size());
  std::set<std::string> used;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    std::string s = raw[i];
    for (auto& c : s) {
      const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
      if (!ok) c = '_';
    }
    if (s.empty()) s = std::string(1, fallback) + std::to_string(i);
    if (s[0] >= '0' && s[0] <= '9') s = std::string(1, fallback) + "_" + s;
    if (used.contains(s)) s += "_" + std::to_string(i);
    used.insert(s);
    out.push_back(std::move(s));
  }
  return out;
}

inline void append_terms(std::string& out, const std::vector<std::pair<std::string, double>>& terms) {
  std::size_t on_line = 0;
  for (const auto& [name, coef] : terms) {
    if (on_line == 8) {
      out += "\n   ";
      on_line = 0;
    }
    out += coef < 0 ? " - " : " + ";
    out += lp_number(std::abs(coef));
    out += ' ';
    out += name;
    ++on_line;
  }
}

}  // namespace detail

// CPLEX-style LP text. Sections in order: Maximize, Subject To, Bounds, End.
// Names are mangled to [A-Za-z0-9_] (leading digit gets an 'x_'/'c_' prefix,
// collisions get the index appended); numbers use 12 significant digits;
// at most 8 terms per line.
inline std::string export_lp_text(const LinearProgram& lp) {
  lp.validate();
  std::vector<std::string> raw;
  for (const auto& v : lp.variables()) raw.push_back(v.name);
  const auto vnames = detail::mangle_names(raw, 'x');
  raw.clear();
  for (const auto& r : lp.constraints()) raw.push_back(r.name);
  const auto rnames = detail::mangle_names(raw, 'c');

  std::string out = "Maximize\n obj:";
  std::vector<std::pair<std::string, double>> terms;
  for (std::size_t j = 0; j < lp.num_variables(); ++j) {
    if (lp.variables()[j].objective != 0.0) terms.emplace_back(vnames[j], lp.variables()[j].objective);
  }
  if (terms.empty() && !vnames.empty()) terms.emplace_back(vnames[0], 0.0);
  detail::append_terms(out, terms);
  out += "\nSubject To\n";
  for (std::size_t i = 0; i < lp.num_constraints(); ++i) {
    const auto& row = lp.constraints()[i];
    terms.clear();
    for (const auto& t : row.terms) terms.emplace_back(vnames[t.var], t.coef);
    out += ' ' + rnames[i] + ':';
    if (terms.empty() && !vnames.empty()) terms.emplace_back(vnames[0], 0.0);
    detail::append_terms(out, terms);
    out += row.relation == Relation::kEqual ? " = " : " <= ";
    out += detail::lp_number(row.rhs) + '\n';
  }
  out += "Bounds\n";
  for (std::size_t j = 0; j < lp.num_variables(); ++j) {
    out += ' ' + vnames[j] + " >= " + detail::lp_number(lp.variables()[j].lower) + '\n';
  }
  out += "End\n";
  return out;
}

}  // namespace qflow
