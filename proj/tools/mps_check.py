# SPDX-License-Identifier: Apache-2.0
"""Cross-check an exported MPS model with scipy's HiGHS MILP solver.

Usage: python3 tools/mps_check.py model.mps
Prints "objective <value>" on success, "infeasible" when HiGHS proves there
is no solution. The parser covers exactly the subset our exporter writes:
N/L/G/E rows, one coefficient pair per COLUMNS line, INTORG/INTEND markers,
an RHS vector, and UP/LO/BV/FR/MI bounds.
"""

import sys

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp


def parse_mps(path):
    section = None
    row_sense = {}
    row_order = []
    obj_row = None
    cols = {}
    col_order = []
    integral = set()
    in_integer = False
    rhs = {}
    lower = {}
    upper = {}
    explicit_free = set()

    with open(path) as handle:
        for raw in handle:
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("*"):
                continue
            if not line.startswith(" ") and not line.startswith("\t"):
                head = line.split()[0]
                if head in ("ROWS", "COLUMNS", "RHS", "BOUNDS", "RANGES", "ENDATA", "NAME"):
                    section = head
                    continue
            tok = line.split()
            if section == "ROWS":
                sense, name = tok
                if sense == "N":
                    obj_row = name
                else:
                    row_sense[name] = sense
                    row_order.append(name)
            elif section == "COLUMNS":
                if len(tok) >= 3 and tok[1] == "'MARKER'":
                    in_integer = tok[2] == "'INTORG'"
                    continue
                name = tok[0]
                if name not in cols:
                    cols[name] = {}
                    col_order.append(name)
                    if in_integer:
                        integral.add(name)
                for i in range(1, len(tok) - 1, 2):
                    cols[name][tok[i]] = float(tok[i + 1])
            elif section == "RHS":
                for i in range(1, len(tok) - 1, 2):
                    rhs[tok[i]] = float(tok[i + 1])
            elif section == "BOUNDS":
                kind, _, name = tok[0], tok[1], tok[2]
                if kind == "BV":
                    integral.add(name)
                    lower[name] = 0.0
                    upper[name] = 1.0
                elif kind == "FR":
                    explicit_free.add(name)
                elif kind == "MI":
                    lower[name] = -np.inf
                elif kind == "LO":
                    lower[name] = float(tok[3])
                elif kind == "UP":
                    upper[name] = float(tok[3])
                else:
                    raise ValueError(f"unsupported bound type {kind}")
            elif section == "RANGES":
                raise ValueError("RANGES sections are not supported")

    n = len(col_order)
    col_index = {name: j for j, name in enumerate(col_order)}
    c = np.zeros(n)
    lb = np.zeros(n)
    ub = np.full(n, np.inf)
    for name in explicit_free:
        lb[col_index[name]] = -np.inf
    for name, b in lower.items():
        lb[col_index[name]] = b
    for name, b in upper.items():
        ub[col_index[name]] = b
    integrality = np.zeros(n)
    for name in integral:
        integrality[col_index[name]] = 1

    row_index = {name: i for i, name in enumerate(row_order)}
    data, ri, ci = [], [], []
    for name, entries in cols.items():
        j = col_index[name]
        for row, v in entries.items():
            if row == obj_row:
                c[j] = v
            else:
                data.append(v)
                ri.append(row_index[row])
                ci.append(j)
    a = sparse.csr_matrix((data, (ri, ci)), shape=(len(row_order), n))

    con_lb = np.empty(len(row_order))
    con_ub = np.empty(len(row_order))
    for name, i in row_index.items():
        b = rhs.get(name, 0.0)
        sense = row_sense[name]
        if sense == "L":
            con_lb[i], con_ub[i] = -np.inf, b
        elif sense == "G":
            con_lb[i], con_ub[i] = b, np.inf
        else:
            con_lb[i], con_ub[i] = b, b

    return c, a, con_lb, con_ub, lb, ub, integrality


def main():
    if len(sys.argv) != 2:
        print("usage: mps_check.py model.mps", file=sys.stderr)
        return 2
    c, a, con_lb, con_ub, lb, ub, integrality = parse_mps(sys.argv[1])
    res = milp(
        c=c,
        constraints=LinearConstraint(a, con_lb, con_ub),
        bounds=Bounds(lb, ub),
        integrality=integrality,
        options={"mip_rel_gap": 1e-9},
    )
    if res.status == 2:
        print("infeasible")
        return 0
    if not res.success:
        print(f"error: solver status {res.status}: {res.message}", file=sys.stderr)
        return 1
    print(f"objective {res.fun:.12g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
