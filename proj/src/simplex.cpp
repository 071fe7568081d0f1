/* SPDX-License-Identifier: Apache-2.0 */

#include "pcmsolve/simplex.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <memory>
#include <stdexcept>

#include <omp.h>

#include "pcmsolve/util.hpp"

namespace pcm {

namespace {

constexpr double kPivotTol   = 1e-9;   // minimum magnitude of a leaving pivot
constexpr double kDegenStep  = 1e-12;  // steps below this count as stalls
constexpr long kBlandAfter   = 50;     // stalled iterations before Bland's rule
constexpr int kEtaLimit      = 100;    // product-form updates between refactors
constexpr double kSingularTol = 1e-11;

/// Dense LU with partial pivoting for the kernel block. The kernel holds
/// only the structural basic columns restricted to the rows no basic slack
/// covers, so its order stays far below the row count.
struct kernel_factor
{
  int k = 0;
  std::vector<int> krows;     // kernel rows, ascending
  std::vector<int> kcols;     // basis positions of structural basics, ascending
  std::vector<int> row_to_k;  // row -> kernel row index, -1 if slack-covered
  std::vector<int> pos_to_k;  // basis position -> kernel column index, -1 if slack
  std::vector<int> base_basic;  // the basis this factor describes; later
                                // pivots live in the eta list, so base solves
                                // must not look at the current basis
  std::vector<double> lu;     // k*k row-major, L below unit diagonal, U upon
  std::vector<int> piv;       // row swapped into place at each elimination step

  // returns the kernel column where elimination found no usable pivot, or -1
  int decompose()
  {
    piv.assign(k, 0);
    for (int c = 0; c < k; ++c) {
      int best = c;
      double best_abs = std::abs(lu[std::size_t(c) * k + c]);
      for (int r = c + 1; r < k; ++r) {
        const double a = std::abs(lu[std::size_t(r) * k + c]);
        if (a > best_abs) {
          best_abs = a;
          best = r;
        }
      }
      if (best_abs < kSingularTol) return c;
      piv[c] = best;
      if (best != c)
        for (int j = 0; j < k; ++j)
          std::swap(lu[std::size_t(c) * k + j], lu[std::size_t(best) * k + j]);
      const double d = lu[std::size_t(c) * k + c];
      for (int r = c + 1; r < k; ++r) {
        const double f = lu[std::size_t(r) * k + c] / d;
        lu[std::size_t(r) * k + c] = f;
        if (f != 0.0)
          for (int j = c + 1; j < k; ++j)
            lu[std::size_t(r) * k + j] -= f * lu[std::size_t(c) * k + j];
      }
    }
    return -1;
  }

  void solve(double* z) const  // M z = rhs in place
  {
    for (int c = 0; c < k; ++c)
      if (piv[c] != c) std::swap(z[c], z[piv[c]]);
    for (int c = 0; c < k; ++c) {
      const double zc = z[c];
      if (zc != 0.0)
        for (int r = c + 1; r < k; ++r) z[r] -= lu[std::size_t(r) * k + c] * zc;
    }
    for (int c = k - 1; c >= 0; --c) {
      double v = z[c];
      for (int j = c + 1; j < k; ++j) v -= lu[std::size_t(c) * k + j] * z[j];
      z[c] = v / lu[std::size_t(c) * k + c];
    }
  }

  void solve_transposed(double* y) const  // M' y = rhs in place
  {
    // M = P' L U, so M' y = U' (L' (P y))
    for (int c = 0; c < k; ++c) {
      double v = y[c];
      for (int r = 0; r < c; ++r) v -= lu[std::size_t(r) * k + c] * y[r];
      y[c] = v / lu[std::size_t(c) * k + c];
    }
    for (int c = k - 1; c >= 0; --c) {
      const double yc = y[c];
      if (yc != 0.0)
        for (int r = 0; r < c; ++r) y[r] -= lu[std::size_t(c) * k + r] * yc;
    }
    for (int c = k - 1; c >= 0; --c)
      if (piv[c] != c) std::swap(y[c], y[piv[c]]);
  }
};

struct eta_update
{
  int pos = 0;
  double wp = 0.0;
  std::vector<double> w;
};

}  // namespace

struct lp_solver::impl
{
  int n = 0;  // structural columns
  int m = 0;  // rows; slack j = n + r for row r

  // structural matrix, compressed by column
  std::vector<int> col_start;
  std::vector<int> row_idx;
  std::vector<double> val;

  std::vector<double> cost;  // structural objective
  std::vector<double> lb, ub;  // all n + m columns
  std::vector<double> rhs;

  std::vector<int> basic;      // basis position -> column
  std::vector<int> in_basis;   // column -> position + 1, or 0
  std::vector<char> at_upper;  // nonbasic side
  std::vector<double> xB;      // basic values by position

  std::shared_ptr<const kernel_factor> factor;
  std::vector<eta_update> etas;
  bool dirty_values = true;
  long degen_streak = 0;

  // scratch
  std::vector<double> work_a, work_z, work_y, work_cb, work_d;

  explicit impl(const milp_problem& prob)
  {
    n = prob.n_vars;
    m = int(prob.rows.size());
    col_start.assign(n + 1, 0);
    std::vector<std::vector<std::pair<int, double>>> cols(n);
    for (int i = 0; i < m; ++i) {
      const auto& r = prob.rows[i];
      for (std::size_t e = 0; e < r.cols.size(); ++e)
        cols[r.cols[e]].push_back({i, r.coef[e]});
    }
    for (int j = 0; j < n; ++j) {
      col_start[j + 1] = col_start[j] + int(cols[j].size());
      for (const auto& [r, v] : cols[j]) {
        row_idx.push_back(r);
        val.push_back(v);
      }
    }

    cost = prob.objective;
    lb.resize(n + m);
    ub.resize(n + m);
    for (int j = 0; j < n; ++j) {
      lb[j] = prob.var_lb[j];
      ub[j] = prob.var_ub[j];
    }
    rhs.resize(m);
    for (int i = 0; i < m; ++i) {
      rhs[i] = prob.rows[i].rhs;
      switch (prob.rows[i].sense) {
        case row_sense::le: lb[n + i] = 0.0; ub[n + i] = kInf; break;
        case row_sense::eq: lb[n + i] = 0.0; ub[n + i] = 0.0; break;
        case row_sense::ge: lb[n + i] = -kInf; ub[n + i] = 0.0; break;
      }
    }

    basic.resize(m);
    in_basis.assign(n + m, 0);
    at_upper.assign(n + m, 0);
    for (int i = 0; i < m; ++i) {
      basic[i] = n + i;
      in_basis[n + i] = i + 1;
    }
    for (int j = 0; j < n + m; ++j)
      if (!in_basis[j] && is_inf(-lb[j]) && !is_inf(ub[j])) at_upper[j] = 1;
    xB.assign(m, 0.0);

    rebuild_factor();
    recompute_basic_values();
  }

  double nb_value(int j) const
  {
    if (at_upper[j]) return ub[j];
    if (!is_inf(-lb[j])) return lb[j];
    return 0.0;
  }

  void column_axpy(int j, double s, double* acc) const
  {
    if (j >= n) {
      acc[j - n] += s;
      return;
    }
    for (int e = col_start[j]; e < col_start[j + 1]; ++e)
      acc[row_idx[e]] += s * val[e];
  }

  double column_dot(int j, const double* y) const
  {
    if (j >= n) return y[j - n];
    double d = 0.0;
    for (int e = col_start[j]; e < col_start[j + 1]; ++e) d += val[e] * y[row_idx[e]];
    return d;
  }

  void rebuild_factor()
  {
    for (;;) {
      auto f = std::make_shared<kernel_factor>();
      f->row_to_k.assign(m, -2);  // -2 unassigned, -1 covered by a basic slack
      f->pos_to_k.assign(m, -1);
      for (int i = 0; i < m; ++i)
        if (basic[i] >= n) f->row_to_k[basic[i] - n] = -1;
      for (int r = 0; r < m; ++r)
        if (f->row_to_k[r] == -2) {
          f->row_to_k[r] = int(f->krows.size());
          f->krows.push_back(r);
        }
      for (int i = 0; i < m; ++i)
        if (basic[i] < n) {
          f->pos_to_k[i] = int(f->kcols.size());
          f->kcols.push_back(i);
        }
      f->k = int(f->kcols.size());
      assert(int(f->krows.size()) == f->k);

      f->lu.assign(std::size_t(f->k) * f->k, 0.0);
      for (int c = 0; c < f->k; ++c) {
        const int j = basic[f->kcols[c]];
        for (int e = col_start[j]; e < col_start[j + 1]; ++e) {
          const int kr = f->row_to_k[row_idx[e]];
          if (kr >= 0) f->lu[std::size_t(kr) * f->k + c] = val[e];
        }
      }

      const int bad = f->decompose();
      if (bad < 0) {
        f->base_basic = basic;
        factor = std::move(f);
        etas.clear();
        return;
      }

      // Dependent structural column: hand its basis position to the slack of
      // an uncovered row and park the column at its nearest bound.
      const int p = f->kcols[bad];
      const int j = basic[p];
      int free_row = -1;
      for (int r : f->krows)
        if (!in_basis[n + r]) {
          free_row = r;
          break;
        }
      if (free_row < 0) throw std::runtime_error("basis repair failed");
      in_basis[j] = 0;
      const double v = xB[p];
      at_upper[j] = !is_inf(ub[j]) && (is_inf(-lb[j]) || v > 0.5 * (lb[j] + ub[j]));
      basic[p] = n + free_row;
      in_basis[n + free_row] = p + 1;
      dirty_values = true;
    }
  }

  /// z = B^{-1} a; a is a dense row-space vector, destroyed.
  void ftran(double* a, double* z) const
  {
    const kernel_factor& f = *factor;
    std::vector<double>& zk = const_cast<impl*>(this)->work_z;
    zk.assign(std::size_t(std::max(f.k, 1)), 0.0);
    for (int c = 0; c < f.k; ++c) zk[c] = a[f.krows[c]];
    if (f.k > 0) f.solve(zk.data());

    // slack completion: subtract the structural basic columns' contribution
    for (int c = 0; c < f.k; ++c)
      if (zk[c] != 0.0) column_axpy(f.base_basic[f.kcols[c]], -zk[c], a);
    for (int i = 0; i < m; ++i)
      z[i] = f.base_basic[i] >= n ? a[f.base_basic[i] - n] : 0.0;
    for (int c = 0; c < f.k; ++c) z[f.kcols[c]] = zk[c];

    for (const auto& e : etas) {
      const double t = z[e.pos] / e.wp;
      if (t != 0.0) {
        for (int i = 0; i < m; ++i) z[i] -= e.w[i] * t;
        z[e.pos] = t;
      } else {
        z[e.pos] = 0.0;
      }
    }
  }

  /// y = B^{-T} cb; cb is indexed by basis position, destroyed.
  void btran(double* cb, double* y) const
  {
    for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
      double dot = 0.0;
      for (int i = 0; i < m; ++i) dot += it->w[i] * cb[i];
      cb[it->pos] = (cb[it->pos] - (dot - it->w[it->pos] * cb[it->pos])) / it->wp;
    }

    const kernel_factor& f = *factor;
    for (int i = 0; i < m; ++i)
      if (f.base_basic[i] >= n) y[f.base_basic[i] - n] = cb[i];
    std::vector<double>& yk = const_cast<impl*>(this)->work_y;
    yk.assign(std::size_t(std::max(f.k, 1)), 0.0);
    for (int c = 0; c < f.k; ++c) {
      const int j = f.base_basic[f.kcols[c]];
      double v = cb[f.kcols[c]];
      for (int e = col_start[j]; e < col_start[j + 1]; ++e)
        if (f.row_to_k[row_idx[e]] < 0) v -= val[e] * y[row_idx[e]];
      yk[c] = v;
    }
    if (f.k > 0) f.solve_transposed(yk.data());
    for (int c = 0; c < f.k; ++c) y[f.krows[c]] = yk[c];
  }

  void recompute_basic_values()
  {
    std::vector<double> r = rhs;
    for (int j = 0; j < n + m; ++j)
      if (!in_basis[j]) {
        const double v = nb_value(j);
        if (v != 0.0) column_axpy(j, -v, r.data());
      }
    std::vector<double> z(m);
    ftran(r.data(), z.data());
    xB = z;
    dirty_values = false;
  }

  double violation(int j, double x) const
  {
    const double below = is_inf(-lb[j]) ? 0.0 : lb[j] - x;
    const double above = is_inf(ub[j]) ? 0.0 : x - ub[j];
    return std::max({0.0, below, above});
  }
};

lp_solver::lp_solver(const milp_problem& prob) : pimpl(std::make_unique<impl>(prob)) {}
lp_solver::lp_solver(const lp_solver& other) : pimpl(std::make_unique<impl>(*other.pimpl)) {}
lp_solver::~lp_solver() = default;

int lp_solver::n_rows() const { return pimpl->m; }
int lp_solver::n_structural() const { return pimpl->n; }
double lp_solver::lower_bound(int col) const { return pimpl->lb[col]; }
double lp_solver::upper_bound(int col) const { return pimpl->ub[col]; }

void lp_solver::refactor_now()
{
  if (!pimpl->etas.empty()) {
    pimpl->rebuild_factor();
    pimpl->recompute_basic_values();
  }
}

void lp_solver::set_bounds(int col, double lo, double hi)
{
  impl& S = *pimpl;
  if (col < 0 || col >= S.n) throw std::invalid_argument("set_bounds: bad column");
  if (lo > hi) throw std::invalid_argument("set_bounds: lo > hi");
  S.lb[col] = lo;
  S.ub[col] = hi;
  if (!S.in_basis[col]) {
    // keep the parked value on a bound that still exists
    if (S.at_upper[col] && is_inf(hi)) S.at_upper[col] = 0;
    if (!S.at_upper[col] && is_inf(-lo)) S.at_upper[col] = !is_inf(hi);
    S.dirty_values = true;
  }
}

lp_result lp_solver::solve(const lp_options& opts)
{
  impl& S = *pimpl;
  const int n = S.n, m = S.m;
  const long max_iters = opts.max_iters >= 0 ? opts.max_iters : 50L * (n + m);
  const double feas_tol = opts.feas_tol;
  const double opt_tol = opts.opt_tol;

  lp_result res;
  if (S.dirty_values) S.recompute_basic_values();

  std::vector<double>& cb = S.work_cb;
  std::vector<double>& y = S.work_d;
  cb.assign(m, 0.0);
  y.assign(m, 0.0);
  std::vector<double> acol(m), w(m);

  auto finish = [&](lp_status st) {
    res.status = st;
    res.x.assign(n, 0.0);
    for (int j = 0; j < n; ++j)
      res.x[j] = S.in_basis[j] ? S.xB[S.in_basis[j] - 1] : S.nb_value(j);
    res.objective = 0.0;
    for (int j = 0; j < n; ++j) res.objective += S.cost[j] * res.x[j];
    if (st == lp_status::infeasible) res.objective = kInf;
    double worst = 0.0;
    for (int i = 0; i < m; ++i)
      worst = std::max(worst, S.violation(S.basic[i], S.xB[i]));
    res.primal_feasible = worst <= 10.0 * feas_tol;
    if (st == lp_status::optimal) {
      res.reduced_cost.assign(n, 0.0);
      for (int j = 0; j < n; ++j)
        if (!S.in_basis[j]) res.reduced_cost[j] = S.cost[j] - S.column_dot(j, y.data());
    }
    return res;
  };

  while (true) {
    if (res.iterations >= max_iters) return finish(lp_status::iter_limit);

    // phase: restore basic feasibility first, then price the true objective
    bool infeasible_basis = false;
    for (int i = 0; i < m && !infeasible_basis; ++i)
      if (S.violation(S.basic[i], S.xB[i]) > feas_tol) infeasible_basis = true;

    for (int i = 0; i < m; ++i) {
      const int j = S.basic[i];
      if (!infeasible_basis) {
        cb[i] = j < n ? S.cost[j] : 0.0;
      } else {
        const double x = S.xB[i];
        if (!is_inf(-S.lb[j]) && x < S.lb[j] - feas_tol)
          cb[i] = -1.0;
        else if (!is_inf(S.ub[j]) && x > S.ub[j] + feas_tol)
          cb[i] = 1.0;
        else
          cb[i] = 0.0;
      }
    }
    std::vector<double> cb_copy = cb;
    S.btran(cb_copy.data(), y.data());

    // pricing: most negative improvement direction, Bland's rule under stall
    const bool bland = S.degen_streak > kBlandAfter;
    int enter = -1;
    double enter_sigma = 1.0;
    double best_score = opt_tol;

    // score of column j as an entering candidate; <= opt_tol means ineligible
    auto price_one = [&](int j, double& sigma) {
      if (S.in_basis[j] || S.lb[j] == S.ub[j]) return 0.0;
      const double cj = !infeasible_basis && j < n ? S.cost[j] : 0.0;
      const double d = cj - S.column_dot(j, y.data());
      if (is_inf(-S.lb[j]) && is_inf(S.ub[j])) {
        sigma = d > 0.0 ? -1.0 : 1.0;
        return std::abs(d);
      }
      if (S.at_upper[j]) {
        sigma = -1.0;
        return d;
      }
      sigma = 1.0;
      return -d;
    };

    if (bland) {
      for (int j = 0; j < n + m; ++j) {
        double sigma = 1.0;
        if (price_one(j, sigma) > opt_tol) {
          enter = j;
          enter_sigma = sigma;
          break;
        }
      }
    } else if (parallel_kernels_enabled()) {
      const int total = n + m;
#pragma omp parallel
      {
        int l_enter = -1;
        double l_score = opt_tol, l_sigma = 1.0;
#pragma omp for schedule(static)
        for (int j = 0; j < total; ++j) {
          double sigma = 1.0;
          const double score = price_one(j, sigma);
          if (score > opt_tol && (l_enter < 0 || score > l_score)) {
            l_score = score;
            l_enter = j;
            l_sigma = sigma;
          }
        }
#pragma omp critical
        {
          // exact (value, index) comparator keeps the winner independent of
          // the thread partition
          if (l_enter >= 0 &&
              (enter < 0 || l_score > best_score ||
               (l_score == best_score && l_enter < enter))) {
            best_score = l_score;
            enter = l_enter;
            enter_sigma = l_sigma;
          }
        }
      }
    } else {
      for (int j = 0; j < n + m; ++j) {
        double sigma = 1.0;
        const double score = price_one(j, sigma);
        if (score > opt_tol && (enter < 0 || score > best_score)) {
          best_score = score;
          enter = j;
          enter_sigma = sigma;
        }
      }
    }

    if (enter < 0)
      return finish(infeasible_basis ? lp_status::infeasible : lp_status::optimal);

    // direction through the basis
    std::fill(acol.begin(), acol.end(), 0.0);
    S.column_axpy(enter, 1.0, acol.data());
    S.ftran(acol.data(), w.data());

    // ratio test; in the infeasible phase a violated basic variable stops the
    // step at the bound it is approaching (first breakpoint)
    double theta = kInf;
    int leave_pos = -1;
    bool leave_at_upper = false;
    double leave_pivot = 0.0;
    if (!is_inf(-S.lb[enter]) && !is_inf(S.ub[enter]))
      theta = S.ub[enter] - S.lb[enter];  // bound flip

    for (int i = 0; i < m; ++i) {
      const double wi = w[i];
      if (std::abs(wi) < kPivotTol) continue;
      const int j = S.basic[i];
      const double x = S.xB[i];
      const double delta = -enter_sigma * wi;  // movement of this basic var
      double limit = kInf;
      bool hits_upper = false;
      if (infeasible_basis && !is_inf(-S.lb[j]) && x < S.lb[j] - feas_tol) {
        if (delta > 0.0) {
          limit = (S.lb[j] - x) / delta;
          hits_upper = false;
        }
      } else if (infeasible_basis && !is_inf(S.ub[j]) && x > S.ub[j] + feas_tol) {
        if (delta < 0.0) {
          limit = (S.ub[j] - x) / delta;
          hits_upper = true;
        }
      } else if (delta > 0.0) {
        if (!is_inf(S.ub[j])) {
          limit = (S.ub[j] - x) / delta;
          hits_upper = true;
        }
      } else {
        if (!is_inf(-S.lb[j])) {
          limit = (S.lb[j] - x) / delta;
          hits_upper = false;
        }
      }
      if (is_inf(limit)) continue;
      if (limit < 0.0) limit = 0.0;  // roundoff just past a bound
      bool take = false;
      if (limit < theta - 1e-10) {
        take = true;
      } else if (leave_pos >= 0 && limit < theta + 1e-10) {
        // near-tie: prefer the steadier pivot, or Bland's lowest column
        take = bland ? S.basic[i] < S.basic[leave_pos]
                     : std::abs(wi) > std::abs(leave_pivot);
      }
      if (take) {
        theta = std::min(theta, limit);
        leave_pos = i;
        leave_at_upper = hits_upper;
        leave_pivot = wi;
      }
    }

    if (is_inf(theta)) return finish(lp_status::unbounded);

    res.iterations += 1;
    S.degen_streak = theta <= kDegenStep ? S.degen_streak + 1 : 0;

    if (leave_pos < 0) {
      // bound flip: the entering column crosses to its other bound
      for (int i = 0; i < m; ++i) S.xB[i] -= theta * enter_sigma * w[i];
      S.at_upper[enter] = !S.at_upper[enter];
      continue;
    }

    const double new_value = S.nb_value(enter) + enter_sigma * theta;
    for (int i = 0; i < m; ++i) S.xB[i] -= theta * enter_sigma * w[i];
    const int leave_col = S.basic[leave_pos];
    S.in_basis[leave_col] = 0;
    S.at_upper[leave_col] = leave_at_upper;
    S.basic[leave_pos] = enter;
    S.in_basis[enter] = leave_pos + 1;
    S.xB[leave_pos] = new_value;

    eta_update e;
    e.pos = leave_pos;
    e.w = w;
    e.wp = w[leave_pos];
    S.etas.push_back(std::move(e));
    if (int(S.etas.size()) >= kEtaLimit || std::abs(w[leave_pos]) < 1e-7) {
      S.rebuild_factor();
      S.recompute_basic_values();
    }
  }
}

probe_result strong_branch_probe(const lp_solver& parent,
                                 double parent_objective,
                                 int col,
                                 double value,
                                 long iter_cap)
{
  lp_solver child(parent);
  child.set_bounds(col, value, value);
  lp_options opts;
  opts.max_iters = iter_cap;
  const lp_result r = child.solve(opts);

  probe_result pr;
  pr.iterations = r.iterations;
  switch (r.status) {
    case lp_status::infeasible:
      pr.proven_infeasible = true;
      pr.objective_delta = kInf;
      break;
    case lp_status::optimal:
    case lp_status::unbounded:
      pr.objective_delta = std::max(0.0, r.objective - parent_objective);
      break;
    case lp_status::iter_limit:
      // a feasible-but-unfinished re-solve still yields a usable movement;
      // one cut off mid-repair tells us nothing
      pr.truncated = true;
      pr.objective_delta =
          r.primal_feasible ? std::max(0.0, r.objective - parent_objective) : 0.0;
      break;
  }
  return pr;
}

}  // namespace pcm
