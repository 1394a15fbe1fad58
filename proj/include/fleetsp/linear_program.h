#ifndef FLEETSP_LINEAR_PROGRAM_H_
#define FLEETSP_LINEAR_PROGRAM_H_

#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace fleet {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Comparator { kLessEqual, kEqual, kGreaterEqual };

struct Term {
  int var;
  double coef;
};

struct Row {
  std::vector<Term> terms;
  Comparator cmp = Comparator::kLessEqual;
  double rhs = 0.0;
  std::string name;
};

// Maximization LP/MIP in sparse row form.
class LinearProgram {
 public:
  // Returns the new variable's index.
  int add_variable(std::string name, double objective, double lower = 0.0,
                   double upper = kInfinity, bool integer = false);
  // Returns the new row's index.
  int add_row(std::vector<Term> terms, Comparator cmp, double rhs, std::string name = {});

  int num_variables() const { return static_cast<int>(objective_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }

  const std::vector<double>& objective() const { return objective_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<bool>& integer() const { return integer_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<Row>& rows() const { return rows_; }

  void set_objective(int var, double coef) { objective_.at(var) = coef; }
  void set_bounds(int var, double lower, double upper);
  void set_integer(int var, bool integer) { integer_.at(var) = integer; }
  void set_rhs(int row, double rhs) { rows_.at(row).rhs = rhs; }
  void set_comparator(int row, Comparator cmp) { rows_.at(row).cmp = cmp; }

  // Objective value of a point.
  double evaluate(const std::vector<double>& x) const;
  // Largest bound or row violation of a point (0 when feasible).
  double max_violation(const std::vector<double>& x) const;

  // Throws ConfigError when a row references an undeclared variable or a
  // bound pair is inverted.
  void validate() const;

  // LP-format-like dump with stable ordering.
  void write_lp(std::ostream& out) const;

 private:
  std::vector<double> objective_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<bool> integer_;
  std::vector<std::string> names_;
  std::vector<Row> rows_;
};

}  // namespace fleet

#endif  // FLEETSP_LINEAR_PROGRAM_H_
