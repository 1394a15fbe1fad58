#include "fleetsp/linear_program.h"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "fleetsp/errors.h"

namespace fleet {

int LinearProgram::add_variable(std::string name, double objective, double lower, double upper,
                                bool integer) {
  if (lower > upper) {
    throw ConfigError(fmt::format("variable '{}': lower bound {} exceeds upper bound {}", name,
                                  lower, upper));
  }
  objective_.push_back(objective);
  lower_.push_back(lower);
  upper_.push_back(upper);
  integer_.push_back(integer);
  names_.push_back(std::move(name));
  return num_variables() - 1;
}

int LinearProgram::add_row(std::vector<Term> terms, Comparator cmp, double rhs, std::string name) {
  for (const auto& t : terms) {
    if (t.var < 0 || t.var >= num_variables()) {
      throw ConfigError(fmt::format("row '{}' references undeclared variable {}", name, t.var));
    }
  }
  rows_.push_back({std::move(terms), cmp, rhs, std::move(name)});
  return num_rows() - 1;
}

void LinearProgram::set_bounds(int var, double lower, double upper) {
  if (lower > upper) {
    throw ConfigError(fmt::format("variable {}: lower bound {} exceeds upper bound {}", var, lower,
                                  upper));
  }
  lower_.at(var) = lower;
  upper_.at(var) = upper;
}

double LinearProgram::evaluate(const std::vector<double>& x) const {
  double v = 0.0;
  for (int j = 0; j < num_variables(); ++j) v += objective_[j] * x[j];
  return v;
}

double LinearProgram::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (int j = 0; j < num_variables(); ++j) {
    worst = std::max({worst, lower_[j] - x[j], x[j] - upper_[j]});
  }
  for (const auto& row : rows_) {
    double lhs = 0.0;
    for (const auto& t : row.terms) lhs += t.coef * x[t.var];
    switch (row.cmp) {
      case Comparator::kLessEqual: worst = std::max(worst, lhs - row.rhs); break;
      case Comparator::kGreaterEqual: worst = std::max(worst, row.rhs - lhs); break;
      case Comparator::kEqual: worst = std::max(worst, std::abs(lhs - row.rhs)); break;
    }
  }
  return worst;
}

void LinearProgram::validate() const {
  for (int j = 0; j < num_variables(); ++j) {
    if (lower_[j] > upper_[j] || std::isnan(lower_[j]) || std::isnan(upper_[j])) {
      throw ConfigError(fmt::format("variable '{}' has invalid bounds", names_[j]));
    }
  }
  for (const auto& row : rows_) {
    for (const auto& t : row.terms) {
      if (t.var < 0 || t.var >= num_variables()) {
        throw ConfigError(fmt::format("row '{}' references undeclared variable {}", row.name, t.var));
      }
    }
  }
}

namespace {

std::string var_label(const LinearProgram& lp, int j) {
  return lp.names()[j].empty() ? fmt::format("v{}", j) : lp.names()[j];
}

void write_expr(std::ostream& out, const LinearProgram& lp, const std::vector<Term>& terms) {
  if (terms.empty()) {
    out << "0";
    return;
  }
  bool first = true;
  for (const auto& t : terms) {
    if (first) {
      out << fmt::format("{} {}", t.coef, var_label(lp, t.var));
    } else {
      out << fmt::format(" {} {} {}", t.coef < 0 ? '-' : '+', std::abs(t.coef), var_label(lp, t.var));
    }
    first = false;
  }
}

}  // namespace

void LinearProgram::write_lp(std::ostream& out) const {
  out << "Maximize\n obj: ";
  std::vector<Term> obj;
  for (int j = 0; j < num_variables(); ++j) {
    if (objective_[j] != 0.0) obj.push_back({j, objective_[j]});
  }
  write_expr(out, *this, obj);
  out << "\nSubject To\n";
  for (int i = 0; i < num_rows(); ++i) {
    const auto& row = rows_[i];
    out << ' ' << (row.name.empty() ? fmt::format("r{}", i) : row.name) << ": ";
    write_expr(out, *this, row.terms);
    const char* op = row.cmp == Comparator::kLessEqual ? "<=" : row.cmp == Comparator::kEqual ? "=" : ">=";
    out << fmt::format(" {} {}\n", op, row.rhs);
  }
  out << "Bounds\n";
  for (int j = 0; j < num_variables(); ++j) {
    const auto bound = [](double b) {
      return std::isinf(b) ? std::string(b > 0 ? "+inf" : "-inf") : fmt::format("{}", b);
    };
    out << fmt::format(" {} <= {} <= {}\n", bound(lower_[j]), var_label(*this, j), bound(upper_[j]));
  }
  bool any_int = false;
  for (int j = 0; j < num_variables(); ++j) {
    if (!integer_[j]) continue;
    if (!any_int) out << "General\n";
    any_int = true;
    out << ' ' << var_label(*this, j) << '\n';
  }
  out << "End\n";
}

}  // namespace fleet
