#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "fleetsp/errors.h"
#include "fleetsp/lpcore.h"

namespace fleet {

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kInfeasible: return "infeasible";
  }
  return "?";
}

namespace {

// How an original variable maps onto nonnegative standard-form columns.
enum class Mapping {
  kShift,   // x = lower + x'
  kMirror,  // x = upper - x'
  kSplit,   // x = x+ - x-
};

struct ColumnMap {
  Mapping kind;
  int col;
  int col2 = -1;  // x- for kSplit
  double offset = 0.0;
};

using SparseColumn = std::vector<std::pair<int, double>>;

// Standard form: A z = b, z >= 0, b >= 0, plus an identity column per row
// (slack or artificial) that seeds the basis.
struct StandardForm {
  int rows = 0;
  int cols = 0;
  int num_structural = 0;
  std::vector<SparseColumn> columns;
  std::vector<double> b;
  std::vector<double> cost;          // phase-2 objective (maximize)
  std::vector<bool> artificial;
  std::vector<int> identity_col;     // per row
  std::vector<double> row_sign;      // +1 or -1 normalization applied to each row
  std::vector<ColumnMap> var_map;
  int original_rows = 0;
};

StandardForm standardize(const LinearProgram& lp) {
  StandardForm sf;
  const int n = lp.num_variables();
  sf.var_map.reserve(n);

  struct PendingRow {
    std::vector<std::pair<int, double>> terms;
    Comparator cmp;
    double rhs;
  };
  std::vector<PendingRow> rows;

  int next_col = 0;
  std::vector<double> struct_cost;
  std::vector<std::pair<int, double>> bound_rows;  // (col, width)
  for (int j = 0; j < n; ++j) {
    const double lo = lp.lower()[j];
    const double hi = lp.upper()[j];
    const double c = lp.objective()[j];
    if (std::isfinite(lo)) {
      sf.var_map.push_back({Mapping::kShift, next_col, -1, lo});
      struct_cost.push_back(c);
      if (std::isfinite(hi)) bound_rows.emplace_back(next_col, hi - lo);
      ++next_col;
    } else if (std::isfinite(hi)) {
      sf.var_map.push_back({Mapping::kMirror, next_col, -1, hi});
      struct_cost.push_back(-c);
      ++next_col;
    } else {
      sf.var_map.push_back({Mapping::kSplit, next_col, next_col + 1, 0.0});
      struct_cost.push_back(c);
      struct_cost.push_back(-c);
      next_col += 2;
    }
  }
  sf.num_structural = next_col;

  std::vector<double> dense(next_col, 0.0);
  std::vector<char> seen(next_col, 0);
  std::vector<int> touched;
  for (const auto& row : lp.rows()) {
    double rhs = row.rhs;
    for (const auto& t : row.terms) {
      const auto& m = sf.var_map[t.var];
      const auto add = [&](int col, double v) {
        if (!seen[col]) {
          seen[col] = 1;
          touched.push_back(col);
        }
        dense[col] += v;
      };
      switch (m.kind) {
        case Mapping::kShift:
          add(m.col, t.coef);
          rhs -= t.coef * m.offset;
          break;
        case Mapping::kMirror:
          add(m.col, -t.coef);
          rhs -= t.coef * m.offset;
          break;
        case Mapping::kSplit:
          add(m.col, t.coef);
          add(m.col2, -t.coef);
          break;
      }
    }
    PendingRow pr{{}, row.cmp, rhs};
    std::sort(touched.begin(), touched.end());
    for (const int col : touched) {
      if (dense[col] != 0.0) pr.terms.emplace_back(col, dense[col]);
      dense[col] = 0.0;
      seen[col] = 0;
    }
    touched.clear();
    rows.push_back(std::move(pr));
  }
  sf.original_rows = static_cast<int>(rows.size());
  for (const auto& [col, width] : bound_rows) {
    rows.push_back({{{col, 1.0}}, Comparator::kLessEqual, width});
  }

  sf.rows = static_cast<int>(rows.size());
  sf.row_sign.assign(sf.rows, 1.0);
  sf.b.resize(sf.rows);
  for (int i = 0; i < sf.rows; ++i) {
    auto& r = rows[i];
    if (r.rhs < 0.0) {
      sf.row_sign[i] = -1.0;
      r.rhs = -r.rhs;
      for (auto& [col, v] : r.terms) v = -v;
      if (r.cmp == Comparator::kLessEqual) {
        r.cmp = Comparator::kGreaterEqual;
      } else if (r.cmp == Comparator::kGreaterEqual) {
        r.cmp = Comparator::kLessEqual;
      }
    }
    sf.b[i] = r.rhs;
  }

  sf.columns.assign(sf.num_structural, {});
  for (int i = 0; i < sf.rows; ++i) {
    for (const auto& [col, v] : rows[i].terms) sf.columns[col].emplace_back(i, v);
  }
  sf.cost = struct_cost;
  sf.artificial.assign(sf.num_structural, false);
  sf.identity_col.assign(sf.rows, -1);
  const auto push_col = [&](int row, double v, bool artificial) {
    sf.columns.push_back({{row, v}});
    sf.cost.push_back(0.0);
    sf.artificial.push_back(artificial);
    return static_cast<int>(sf.columns.size()) - 1;
  };
  for (int i = 0; i < sf.rows; ++i) {
    if (rows[i].cmp == Comparator::kLessEqual) {
      sf.identity_col[i] = push_col(i, 1.0, false);
    } else if (rows[i].cmp == Comparator::kGreaterEqual) {
      push_col(i, -1.0, false);
    }
  }
  for (int i = 0; i < sf.rows; ++i) {
    if (sf.identity_col[i] < 0) sf.identity_col[i] = push_col(i, 1.0, true);
  }
  sf.cols = static_cast<int>(sf.columns.size());
  return sf;
}

class Tableau {
 public:
  Tableau(const StandardForm& sf, const SimplexOptions& options)
      : sf_(sf), opt_(options), m_(sf.rows), n_(sf.cols), width_(sf.cols + 1),
        t_(static_cast<std::size_t>(m_) * width_, 0.0), z_(width_, 0.0), basis_(m_) {
    for (int j = 0; j < n_; ++j) {
      for (const auto& [i, v] : sf_.columns[j]) at(i, j) = v;
    }
    for (int i = 0; i < m_; ++i) {
      at(i, n_) = sf_.b[i];
      basis_[i] = sf_.identity_col[i];
    }
  }

  // Installs an objective and prices the current basis.
  void set_cost(std::vector<double> cost) {
    cost_ = std::move(cost);
    price();
  }

  enum class Result { kOptimal, kUnbounded };

  Result run(bool allow_artificial) {
    while (true) {
      if (since_refactor_ >= opt_.refactor_interval) refactor();
      // Bland: lowest-index improving column.
      int q = -1;
      for (int j = 0; j < n_; ++j) {
        if (!allow_artificial && sf_.artificial[j]) continue;
        if (z_[j] > opt_.tol.optimality) {
          q = j;
          break;
        }
      }
      if (q < 0) return Result::kOptimal;
      int p = -1;
      double best = kInfinity;
      for (int i = 0; i < m_; ++i) {
        const double a = at(i, q);
        if (a <= opt_.tol.pivot) continue;
        const double ratio = std::max(at(i, n_), 0.0) / a;
        const double eps = 1e-12 * (1.0 + best);
        if (p < 0 || ratio < best - eps) {
          best = ratio;
          p = i;
        } else if (ratio <= best + eps && basis_[i] < basis_[p]) {
          p = i;
        }
      }
      if (p < 0) {
        entering_ = q;
        return Result::kUnbounded;
      }
      pivot(p, q);
      if (++pivots_ > opt_.max_pivots) {
        throw SolverError(fmt::format("simplex exceeded {} pivots", opt_.max_pivots));
      }
    }
  }

  void pivot(int p, int q) {
    if (opt_.log) {
      *opt_.log << fmt::format("pivot {}: enter {} leave {} (row {}) value {:.6g}\n", pivots_, q,
                               basis_[p], p, at(p, q));
    }
    double* prow = &t_[static_cast<std::size_t>(p) * width_];
    const double inv = 1.0 / prow[q];
    for (int j = 0; j < width_; ++j) prow[j] *= inv;
    prow[q] = 1.0;
    // Nonzero pattern of the pivot row, reused for every elimination.
    nz_.clear();
    for (int j = 0; j < width_; ++j) {
      if (prow[j] != 0.0) nz_.push_back(j);
    }
    for (int i = 0; i < m_; ++i) {
      if (i == p) continue;
      double* row = &t_[static_cast<std::size_t>(i) * width_];
      const double f = row[q];
      if (f == 0.0) continue;
      for (const int j : nz_) row[j] -= f * prow[j];
      row[q] = 0.0;
      if (row[n_] < 0.0 && row[n_] > -opt_.tol.feasibility) row[n_] = 0.0;
    }
    const double f = z_[q];
    if (f != 0.0) {
      for (const int j : nz_) z_[j] -= f * prow[j];
      z_[q] = 0.0;
    }
    basis_[p] = q;
    ++since_refactor_;
  }

  // Rebuilds B^-1 A and B^-1 b from the original columns.
  void refactor() {
    since_refactor_ = 0;
    std::vector<double> binv(static_cast<std::size_t>(m_) * m_, 0.0);
    std::vector<double> bmat(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int k = 0; k < m_; ++k) {
      for (const auto& [i, v] : sf_.columns[basis_[k]]) bmat[static_cast<std::size_t>(i) * m_ + k] = v;
      binv[static_cast<std::size_t>(k) * m_ + k] = 1.0;
    }
    // Gauss-Jordan with partial pivoting: binv <- B^-1.
    for (int c = 0; c < m_; ++c) {
      int piv = c;
      double big = std::abs(bmat[static_cast<std::size_t>(c) * m_ + c]);
      for (int r = c + 1; r < m_; ++r) {
        const double v = std::abs(bmat[static_cast<std::size_t>(r) * m_ + c]);
        if (v > big) {
          big = v;
          piv = r;
        }
      }
      if (big < 1e-11) {
        throw NumericFailure(fmt::format("singular basis during refactorization (column {})", c));
      }
      if (piv != c) {
        for (int j = 0; j < m_; ++j) {
          std::swap(bmat[static_cast<std::size_t>(c) * m_ + j], bmat[static_cast<std::size_t>(piv) * m_ + j]);
          std::swap(binv[static_cast<std::size_t>(c) * m_ + j], binv[static_cast<std::size_t>(piv) * m_ + j]);
        }
      }
      const double inv = 1.0 / bmat[static_cast<std::size_t>(c) * m_ + c];
      for (int j = 0; j < m_; ++j) {
        bmat[static_cast<std::size_t>(c) * m_ + j] *= inv;
        binv[static_cast<std::size_t>(c) * m_ + j] *= inv;
      }
      for (int r = 0; r < m_; ++r) {
        if (r == c) continue;
        const double f = bmat[static_cast<std::size_t>(r) * m_ + c];
        if (f == 0.0) continue;
        for (int j = 0; j < m_; ++j) {
          bmat[static_cast<std::size_t>(r) * m_ + j] -= f * bmat[static_cast<std::size_t>(c) * m_ + j];
          binv[static_cast<std::size_t>(r) * m_ + j] -= f * binv[static_cast<std::size_t>(c) * m_ + j];
        }
      }
    }
    std::fill(t_.begin(), t_.end(), 0.0);
    for (int j = 0; j < n_; ++j) {
      for (const auto& [i, v] : sf_.columns[j]) {
        for (int r = 0; r < m_; ++r) {
          const double w = binv[static_cast<std::size_t>(r) * m_ + i];
          if (w != 0.0) at(r, j) += w * v;
        }
      }
    }
    for (int r = 0; r < m_; ++r) {
      double s = 0.0;
      for (int i = 0; i < m_; ++i) s += binv[static_cast<std::size_t>(r) * m_ + i] * sf_.b[i];
      if (s < 0.0 && s > -opt_.tol.feasibility) s = 0.0;
      at(r, n_) = s;
    }
    for (int r = 0; r < m_; ++r) {
      for (int k = 0; k < m_; ++k) {
        if (k != r) at(r, basis_[k]) = 0.0;
      }
      at(r, basis_[r]) = 1.0;
    }
    for (int r = 0; r < m_; ++r) {
      if (at(r, n_) < -opt_.tol.feasibility * (1.0 + std::abs(sf_.b[r]))) {
        throw NumericFailure("refactorized basis is primal infeasible");
      }
    }
    price();
  }

  // Pivots zero-level artificials out of the basis where possible.
  void drive_out_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (!sf_.artificial[basis_[i]]) continue;
      int best = -1;
      double mag = 1e-9;
      for (int j = 0; j < n_; ++j) {
        if (sf_.artificial[j]) continue;
        if (std::abs(at(i, j)) > mag) {
          mag = std::abs(at(i, j));
          best = j;
        }
      }
      if (best >= 0) pivot(i, best);
    }
  }

  double objective() const { return -z_[n_]; }
  double reduced_cost(int j) const { return z_[j]; }
  int entering() const { return entering_; }
  long pivots() const { return pivots_; }
  double value_in_row(int i) const { return at(i, n_); }
  double entry(int i, int j) const { return at(i, j); }
  const std::vector<int>& basis() const { return basis_; }
  int rows() const { return m_; }
  const std::vector<double>& cost() const { return cost_; }

 private:
  double& at(int i, int j) { return t_[static_cast<std::size_t>(i) * width_ + j]; }
  double at(int i, int j) const { return t_[static_cast<std::size_t>(i) * width_ + j]; }

  void price() {
    for (int j = 0; j < width_; ++j) z_[j] = j < n_ ? cost_[j] : 0.0;
    for (int i = 0; i < m_; ++i) {
      const double cb = cost_[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = &t_[static_cast<std::size_t>(i) * width_];
      for (int j = 0; j < width_; ++j) z_[j] -= cb * row[j];
    }
    for (int i = 0; i < m_; ++i) z_[basis_[i]] = 0.0;
  }

  const StandardForm& sf_;
  const SimplexOptions& opt_;
  int m_;
  int n_;
  int width_;
  std::vector<double> t_;
  std::vector<double> z_;  // reduced costs; last entry is -objective
  std::vector<int> basis_;
  std::vector<double> cost_;
  std::vector<int> nz_;
  int since_refactor_ = 0;
  long pivots_ = 0;
  int entering_ = -1;
};

std::vector<double> to_original(const StandardForm& sf, const std::vector<double>& z, bool direction) {
  std::vector<double> x(sf.var_map.size());
  for (std::size_t j = 0; j < sf.var_map.size(); ++j) {
    const auto& m = sf.var_map[j];
    const double base = direction ? 0.0 : m.offset;
    switch (m.kind) {
      case Mapping::kShift: x[j] = base + z[m.col]; break;
      case Mapping::kMirror: x[j] = base - z[m.col]; break;
      case Mapping::kSplit: x[j] = z[m.col] - z[m.col2]; break;
    }
  }
  return x;
}

std::vector<double> basic_point(const Tableau& tab, int cols) {
  std::vector<double> z(cols, 0.0);
  for (int i = 0; i < tab.rows(); ++i) z[tab.basis()[i]] = std::max(tab.value_in_row(i), 0.0);
  return z;
}

// Row multipliers y = c_B B^-1 read off the identity columns, mapped back to
// the caller's row orientation.
std::vector<double> row_multipliers(const StandardForm& sf, const Tableau& tab) {
  std::vector<double> y(sf.original_rows);
  for (int i = 0; i < sf.original_rows; ++i) {
    const int col = sf.identity_col[i];
    y[i] = sf.row_sign[i] * (tab.cost()[col] - tab.reduced_cost(col));
  }
  return y;
}

}  // namespace

LpOutcome solve_lp(const LinearProgram& program, const SimplexOptions& options) {
  program.validate();
  if (program.num_variables() == 0) throw ConfigError("solve_lp: program has no variables");
  const StandardForm sf = standardize(program);
  Tableau tab(sf, options);
  LpOutcome out;

  const bool needs_phase1 = std::any_of(sf.artificial.begin(), sf.artificial.end(), [](bool a) { return a; });
  if (needs_phase1) {
    std::vector<double> c1(sf.cols, 0.0);
    for (int j = 0; j < sf.cols; ++j) {
      if (sf.artificial[j]) c1[j] = -1.0;
    }
    tab.set_cost(c1);
    if (tab.run(false) != Tableau::Result::kOptimal) {
      throw NumericFailure("phase 1 reported an unbounded auxiliary problem");
    }
    tab.refactor();
    double bscale = 1.0;
    for (const double v : sf.b) bscale = std::max(bscale, std::abs(v));
    if (tab.objective() < -options.tol.feasibility * bscale) {
      out.status = LpStatus::kInfeasible;
      out.farkas = row_multipliers(sf, tab);
      out.pivots = tab.pivots();
      return out;
    }
    tab.drive_out_artificials();
  }

  tab.set_cost(sf.cost);
  auto result = tab.run(false);
  // Re-check optimality against freshly refactorized reduced costs.
  for (int round = 0; round < 3 && result == Tableau::Result::kOptimal; ++round) {
    const long before = tab.pivots();
    tab.refactor();
    result = tab.run(false);
    if (tab.pivots() == before) break;
  }
  out.pivots = tab.pivots();
  if (result == Tableau::Result::kUnbounded) {
    const int q = tab.entering();
    std::vector<double> dir(sf.cols, 0.0);
    dir[q] = 1.0;
    for (int i = 0; i < tab.rows(); ++i) dir[tab.basis()[i]] = -tab.entry(i, q);
    out.status = LpStatus::kUnbounded;
    out.ray = to_original(sf, dir, true);
    out.primal = to_original(sf, basic_point(tab, sf.cols), false);
    out.objective = program.evaluate(out.primal);
    return out;
  }
  out.status = LpStatus::kOptimal;
  out.primal = to_original(sf, basic_point(tab, sf.cols), false);
  out.objective = program.evaluate(out.primal);
  out.duals = row_multipliers(sf, tab);
  return out;
}

}  // namespace fleet
