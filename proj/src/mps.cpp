/* SPDX-License-Identifier: Apache-2.0 */

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pcmsolve/milp.hpp"
#include "pcmsolve/util.hpp"

namespace pcm {

namespace {

std::string col_name(int j) { return "c" + std::to_string(j); }
std::string row_name(int i) { return "r" + std::to_string(i); }

}  // namespace

std::string to_mps(const milp_problem& prob, const std::string& name)
{
  std::ostringstream out;
  out << "NAME          " << name << "\n";

  out << "ROWS\n";
  out << " N  COST\n";
  for (std::size_t i = 0; i < prob.rows.size(); ++i)
    out << " " << char(prob.rows[i].sense) << "  " << row_name(int(i)) << "\n";

  // column-major entries: objective first, then every row touching the column
  std::vector<std::vector<std::pair<int, double>>> by_col(prob.n_vars);
  for (std::size_t i = 0; i < prob.rows.size(); ++i) {
    const auto& r = prob.rows[i];
    for (std::size_t k = 0; k < r.cols.size(); ++k)
      by_col[r.cols[k]].push_back({int(i), r.coef[k]});
  }

  out << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  for (int j = 0; j < prob.n_vars; ++j) {
    if (prob.is_binary[j] != in_int) {
      out << "    MARKER" << marker++ << "  'MARKER'  "
          << (prob.is_binary[j] ? "'INTORG'" : "'INTEND'") << "\n";
      in_int = prob.is_binary[j];
    }
    const std::string cn = col_name(j);
    if (prob.objective[j] != 0.0)
      out << "    " << cn << "  COST  " << fmt_double(prob.objective[j]) << "\n";
    for (const auto& [i, v] : by_col[j])
      out << "    " << cn << "  " << row_name(i) << "  " << fmt_double(v) << "\n";
  }
  if (in_int) out << "    MARKER" << marker++ << "  'MARKER'  'INTEND'\n";

  out << "RHS\n";
  for (std::size_t i = 0; i < prob.rows.size(); ++i)
    if (prob.rows[i].rhs != 0.0)
      out << "    RHS  " << row_name(int(i)) << "  " << fmt_double(prob.rows[i].rhs) << "\n";

  out << "BOUNDS\n";
  for (int j = 0; j < prob.n_vars; ++j) {
    const std::string cn = col_name(j);
    const double lb = prob.var_lb[j];
    const double ub = prob.var_ub[j];
    if (prob.is_binary[j]) {
      out << " BV BND  " << cn << "\n";
      continue;
    }
    if (lb == 0.0 && is_inf(ub)) continue;  // the MPS default
    if (is_inf(lb) && is_inf(ub)) {
      out << " FR BND  " << cn << "\n";
      continue;
    }
    if (is_inf(lb))
      out << " MI BND  " << cn << "\n";
    else if (lb != 0.0)
      out << " LO BND  " << cn << "  " << fmt_double(lb) << "\n";
    if (!is_inf(ub)) out << " UP BND  " << cn << "  " << fmt_double(ub) << "\n";
  }

  out << "ENDATA\n";
  return out.str();
}

void save_mps(const milp_problem& prob, const std::string& path, const std::string& name)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << to_mps(prob, name);
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace pcm
