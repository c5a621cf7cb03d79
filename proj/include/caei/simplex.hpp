#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "caei/rational.hpp"

namespace caei {

enum class Sense { maximize, minimize };
enum class Relation { less_equal, equal, greater_equal };
enum class LpStatus { optimal, infeasible, unbounded };

using VarId = std::size_t;
using LinearExpr = std::map<VarId, Rational>;

struct VariableSpec {
  std::string name;
  /// Lower bound is 0 unless the variable is free below (-infinity).
  bool free_below = false;
  /// Finite upper bound, or +infinity when empty.
  std::optional<Rational> upper;
};

struct Constraint {
  LinearExpr coefficients;
  Relation relation = Relation::less_equal;
  Rational rhs;
};

/// A linear program over exact rationals. Variables are declared up front;
/// constraints may reference any VarId, and references to undeclared
/// variables are rejected by simplex_solve.
class LinearProgram {
 public:
  explicit LinearProgram(Sense sense = Sense::maximize) : sense_(sense) {}

  VarId add_variable(std::string name = {}, std::optional<Rational> upper = std::nullopt,
                     bool free_below = false) {
    variables_.push_back({std::move(name), free_below, std::move(upper)});
    return variables_.size() - 1;
  }

  void set_objective(VarId var, const Rational& coefficient) { objective_[var] = coefficient; }

  void add_constraint(LinearExpr coefficients, Relation relation, const Rational& rhs) {
    constraints_.push_back({std::move(coefficients), relation, rhs});
  }

  void set_sense(Sense sense) { sense_ = sense; }

  [[nodiscard]] Sense sense() const { return sense_; }
  [[nodiscard]] const std::vector<VariableSpec>& variables() const { return variables_; }
  [[nodiscard]] const LinearExpr& objective() const { return objective_; }
  [[nodiscard]] const std::vector<Constraint>& constraints() const { return constraints_; }
  [[nodiscard]] std::size_t variable_count() const { return variables_.size(); }

 private:
  Sense sense_;
  std::vector<VariableSpec> variables_;
  LinearExpr objective_;
  std::vector<Constraint> constraints_;
};

struct LpOutcome {
  LpStatus status = LpStatus::infeasible;
  /// One value per declared variable; empty unless status is optimal.
  std::vector<Rational> assignment;
  std::optional<Rational> objective;

  [[nodiscard]] bool optimal() const { return status == LpStatus::optimal; }
  [[nodiscard]] const Rational& value(VarId var) const { return assignment.at(var); }
};

namespace detail {

/// Dense simplex tableau in maximization form. Row r holds the constraint
/// coefficients followed by the right-hand side; `reduced_` holds the
/// reduced costs with -objective in the last slot.
class Tableau {
 public:
  Tableau(std::size_t columns) : columns_(columns), eligible_(columns, true) {}

  void add_row(std::vector<Rational> row, std::size_t basic) {
    rows_.push_back(std::move(row));
    basis_.push_back(basic);
  }

  /// Installs cost vector `cost` (length columns_) and prices out the basis.
  void set_cost(const std::vector<Rational>& cost) {
    reduced_.assign(columns_ + 1, Rational(0));
    for (std::size_t j = 0; j < columns_; ++j) reduced_[j] = cost[j];
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const Rational& cb = cost[basis_[r]];
      if (sgn(cb) == 0) continue;
      for (std::size_t j = 0; j <= columns_; ++j)
        if (sgn(rows_[r][j]) != 0) reduced_[j] -= cb * rows_[r][j];
    }
  }

  void exclude(std::size_t column) { eligible_[column] = false; }

  /// Runs Bland's rule to optimality. Returns false on unboundedness.
  bool optimize() {
    for (;;) {
      std::size_t entering = columns_;
      for (std::size_t j = 0; j < columns_; ++j) {
        if (eligible_[j] && sgn(reduced_[j]) > 0) {
          entering = j;
          break;
        }
      }
      if (entering == columns_) return true;

      std::size_t leaving = rows_.size();
      Rational best_ratio;
      for (std::size_t r = 0; r < rows_.size(); ++r) {
        const Rational& a = rows_[r][entering];
        if (sgn(a) <= 0) continue;
        Rational ratio = rows_[r][columns_] / a;
        if (leaving == rows_.size() || ratio < best_ratio ||
            (ratio == best_ratio && basis_[r] < basis_[leaving])) {
          leaving = r;
          best_ratio = ratio;
        }
      }
      if (leaving == rows_.size()) return false;
      pivot(leaving, entering);
    }
  }

  void pivot(std::size_t row, std::size_t column) {
    std::vector<Rational>& prow = rows_[row];
    const Rational inv = 1 / prow[column];
    std::vector<std::size_t> support;
    for (std::size_t j = 0; j <= columns_; ++j) {
      if (sgn(prow[j]) != 0) {
        prow[j] *= inv;
        support.push_back(j);
      }
    }
    auto eliminate = [&](std::vector<Rational>& target) {
      if (sgn(target[column]) == 0) return;
      const Rational factor = target[column];
      for (std::size_t j : support) target[j] -= factor * prow[j];
    };
    for (std::size_t r = 0; r < rows_.size(); ++r)
      if (r != row) eliminate(rows_[r]);
    eliminate(reduced_);
    basis_[row] = column;
  }

  void remove_row(std::size_t row) {
    rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(row));
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(row));
  }

  [[nodiscard]] std::size_t row_count() const { return rows_.size(); }
  [[nodiscard]] std::size_t basic(std::size_t row) const { return basis_[row]; }
  [[nodiscard]] const Rational& entry(std::size_t row, std::size_t column) const { return rows_[row][column]; }
  [[nodiscard]] const Rational& rhs(std::size_t row) const { return rows_[row][columns_]; }
  [[nodiscard]] const Rational& negated_objective() const { return reduced_[columns_]; }

  [[nodiscard]] std::vector<Rational> column_values() const {
    std::vector<Rational> values(columns_, Rational(0));
    for (std::size_t r = 0; r < rows_.size(); ++r) values[basis_[r]] = rows_[r][columns_];
    return values;
  }

 private:
  std::size_t columns_;
  std::vector<std::vector<Rational>> rows_;
  std::vector<std::size_t> basis_;
  std::vector<Rational> reduced_;
  std::vector<bool> eligible_;
};

}  // namespace detail

/// Two-phase dense simplex with Bland's lowest-index rule for both the
/// entering and the leaving variable, so the pivot sequence is finite and
/// fully determined by the input.
inline LpOutcome simplex_solve(const LinearProgram& lp) {
  const std::size_t n = lp.variable_count();
  auto check_ids = [n](const LinearExpr& expr, const char* where) {
    for (const auto& [var, coef] : expr) {
      (void)coef;
      if (var >= n)
        throw InputError(std::string("undeclared variable ") + std::to_string(var) + " in " + where);
    }
  };
  check_ids(lp.objective(), "objective");
  for (const Constraint& c : lp.constraints()) check_ids(c.coefficients, "constraint");

  // Structural columns: one per variable, plus a negative part for free ones.
  std::vector<std::size_t> positive_col(n), negative_col(n, SIZE_MAX);
  std::size_t structural = 0;
  for (std::size_t k = 0; k < n; ++k) {
    positive_col[k] = structural++;
    if (lp.variables()[k].free_below) negative_col[k] = structural++;
  }

  struct Row {
    std::map<std::size_t, Rational> coefs;
    Relation relation;
    Rational rhs;
  };
  std::vector<Row> rows;
  auto push_row = [&](const LinearExpr& expr, Relation rel, const Rational& rhs) {
    Row row{{}, rel, rhs};
    for (const auto& [var, coef] : expr) {
      if (sgn(coef) == 0) continue;
      row.coefs[positive_col[var]] += coef;
      if (negative_col[var] != SIZE_MAX) row.coefs[negative_col[var]] -= coef;
    }
    if (sgn(row.rhs) < 0) {
      row.rhs = -row.rhs;
      for (auto& [col, coef] : row.coefs) coef = -coef;
      if (row.relation == Relation::less_equal)
        row.relation = Relation::greater_equal;
      else if (row.relation == Relation::greater_equal)
        row.relation = Relation::less_equal;
    }
    rows.push_back(std::move(row));
  };
  for (const Constraint& c : lp.constraints()) push_row(c.coefficients, c.relation, c.rhs);
  for (std::size_t k = 0; k < n; ++k) {
    if (const auto& ub = lp.variables()[k].upper) push_row(LinearExpr{{k, Rational(1)}}, Relation::less_equal, *ub);
  }

  std::size_t slack_count = 0, artificial_count = 0;
  for (const Row& row : rows) {
    if (row.relation != Relation::equal) ++slack_count;
    if (row.relation != Relation::less_equal) ++artificial_count;
  }
  const std::size_t first_slack = structural;
  const std::size_t first_artificial = structural + slack_count;
  const std::size_t columns = first_artificial + artificial_count;

  detail::Tableau tableau(columns);
  std::size_t next_slack = first_slack, next_artificial = first_artificial;
  for (const Row& row : rows) {
    std::vector<Rational> dense(columns + 1, Rational(0));
    for (const auto& [col, coef] : row.coefs) dense[col] = coef;
    dense[columns] = row.rhs;
    std::size_t basic = 0;
    switch (row.relation) {
      case Relation::less_equal:
        dense[next_slack] = 1;
        basic = next_slack++;
        break;
      case Relation::greater_equal:
        dense[next_slack++] = -1;
        dense[next_artificial] = 1;
        basic = next_artificial++;
        break;
      case Relation::equal:
        dense[next_artificial] = 1;
        basic = next_artificial++;
        break;
    }
    tableau.add_row(std::move(dense), basic);
  }

  LpOutcome outcome;

  if (artificial_count > 0) {
    std::vector<Rational> phase1(columns, Rational(0));
    for (std::size_t j = first_artificial; j < columns; ++j) phase1[j] = -1;
    tableau.set_cost(phase1);
    tableau.optimize();  // bounded below by zero
    // reduced_[rhs] holds -(-sum of artificials).
    if (sgn(tableau.negated_objective()) != 0) {
      outcome.status = LpStatus::infeasible;
      return outcome;
    }
    for (std::size_t r = 0; r < tableau.row_count();) {
      if (tableau.basic(r) < first_artificial) {
        ++r;
        continue;
      }
      std::size_t replacement = columns;
      for (std::size_t j = 0; j < first_artificial; ++j) {
        if (sgn(tableau.entry(r, j)) != 0) {
          replacement = j;
          break;
        }
      }
      if (replacement == columns) {
        tableau.remove_row(r);  // redundant equality
      } else {
        tableau.pivot(r, replacement);
        ++r;
      }
    }
    for (std::size_t j = first_artificial; j < columns; ++j) tableau.exclude(j);
  }

  std::vector<Rational> cost(columns, Rational(0));
  const bool minimize = lp.sense() == Sense::minimize;
  for (const auto& [var, coef] : lp.objective()) {
    Rational c = minimize ? Rational(-coef) : coef;
    cost[positive_col[var]] += c;
    if (negative_col[var] != SIZE_MAX) cost[negative_col[var]] -= c;
  }
  tableau.set_cost(cost);
  if (!tableau.optimize()) {
    outcome.status = LpStatus::unbounded;
    return outcome;
  }

  const std::vector<Rational> cols = tableau.column_values();
  outcome.status = LpStatus::optimal;
  outcome.assignment.assign(n, Rational(0));
  for (std::size_t k = 0; k < n; ++k) {
    outcome.assignment[k] = cols[positive_col[k]];
    if (negative_col[k] != SIZE_MAX) outcome.assignment[k] -= cols[negative_col[k]];
  }
  Rational objective(0);
  for (const auto& [var, coef] : lp.objective()) objective += coef * outcome.assignment[var];
  outcome.objective = objective;
  return outcome;
}

/// Left-hand side of a constraint evaluated at an assignment.
inline Rational evaluate(const LinearExpr& expr, const std::vector<Rational>& assignment) {
  Rational total(0);
  for (const auto& [var, coef] : expr) total += coef * assignment.at(var);
  return total;
}

inline bool satisfies(const Constraint& c, const std::vector<Rational>& assignment) {
  Rational lhs = evaluate(c.coefficients, assignment);
  switch (c.relation) {
    case Relation::less_equal: return lhs <= c.rhs;
    case Relation::equal: return lhs == c.rhs;
    case Relation::greater_equal: return lhs >= c.rhs;
  }
  return false;
}

}  // namespace caei
