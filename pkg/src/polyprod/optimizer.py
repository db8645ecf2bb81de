"""Exact rational LP/IP engine and the universal triangulation model.

The model has one nonnegative variable per nondegenerate top-dimensional
simplex on the polytope's vertices.  Interior wall balance rows force the
simplices on the two sides of every interior wall to agree, and a single
generic-point row normalizes the cover to weight one; triangulation
incidence vectors are exactly the integral solutions.  Everything runs in
exact rational arithmetic: a revised simplex with Dantzig pricing falling
back to Bland's rule for anti-cycling, warm-started row generation, and a
best-bound branch and bound on top.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from polyprod.geometry import affine_span_dim, format_rational, orientation

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass
class LinearProgram:
    """The universal model: minimize the total weight of a fractional
    face-to-face cover subject to wall balance and one-point normalization."""

    polytope: object
    simplices: list           # canonical (sorted) label tuples, the variables
    var_index: dict
    rows: list                # list of (dict var_idx -> Fraction, Fraction rhs, tag)
    generic_point: tuple
    var_rows: dict = field(default_factory=dict)

    def add_row(self, coefs: dict, rhs, tag: str):
        idx = len(self.rows)
        self.rows.append((coefs, Fraction(rhs), tag))
        for v, c in coefs.items():
            self.var_rows.setdefault(v, []).append((idx, c))
        return idx

    def dump_json_dict(self) -> dict:
        return {
            "variables": [[list(l) for l in s] for s in self.simplices],
            "rows": [
                {
                    "coefficients": {str(v): format_rational(c) for v, c in coefs.items()},
                    "rhs": format_rational(rhs),
                    "tag": tag,
                }
                for coefs, rhs, tag in self.rows
            ],
        }


def generic_interior_point(P):
    """Deterministic generic point: the vertex centroid nudged by a small
    rational direction, shrunk until it avoids every hyperplane spanned by
    affinely independent vertex d-subsets."""
    d = P.dim
    labels = sorted(P.labels)
    cent = [_ZERO] * d
    for l in labels:
        v = P.vertex(l)
        for i in range(d):
            cent[i] += v[i]
    cent = [c / len(labels) for c in cent]
    subsets = list(combinations(labels, d))
    K = 2
    while K <= 200:
        Kp = K + 1
        scale = Fraction(1, K * Kp ** d)
        p = tuple(cent[i] + Fraction(Kp ** i) * scale for i in range(d))
        if _is_generic(P, p, subsets):
            return p
        K += 1
    raise RuntimeError("failed to find a generic interior point")


def _is_generic(P, p, subsets):
    for f in P.facets():
        if sum(a * x for a, x in zip(f.normal, p)) >= f.rhs:
            return False
    for sub in subsets:
        pts = [P.vertex(l) for l in sub]
        if orientation(pts + [p]) == 0:
            if affine_span_dim(pts) == P.dim - 1:
                return False
    return True


def point_in_simplex(P, p, key) -> bool:
    """Strict interior test of a generic point against a canonical simplex."""
    d = P.dim
    for i in range(d + 1):
        tet = key[:i] + key[i + 1:]
        ref = P.orient(tet + (key[i],))
        got = orientation([P.vertex(l) for l in tet] + [p])
        if got != ref:
            return False
    return True


def build_universal_model(P) -> LinearProgram:
    """Variables over nondegenerate simplices; balance rows over interior
    walls; a generic-point normalization row."""
    sims = sorted(tuple(sorted(s)) for s in P.enumerate_simplices())
    var_index = {s: i for i, s in enumerate(sims)}
    p = generic_interior_point(P)
    model = LinearProgram(P, sims, var_index, [], p)

    labels = sorted(P.labels)
    d = P.dim
    for tet in combinations(labels, d):
        if P.facet_containing(tet) is not None:
            continue
        coefs = {}
        for v in labels:
            if v in tet:
                continue
            s = P.orient(tet + (v,))
            if s != 0:
                coefs[var_index[tuple(sorted(tet + (v,)))]] = Fraction(s)
        if coefs:
            model.add_row(coefs, 0, f"balance:{tet}")

    cover = {}
    for key in sims:
        if point_in_simplex(P, p, key):
            cover[var_index[key]] = _ONE
    model.add_row(cover, 1, "normalization")
    return model


class _ActiveSimplex:
    """Primal simplex over an extensible subset of the model's rows.

    Basis and inverse survive row additions (new rows enter with fresh
    artificial columns), so row generation never restarts from scratch.
    The inverse is stored as integer rows over per-row denominators (the
    model's coefficients are integers), with basic values appended as the
    last column; all pivoting is exact integer arithmetic.
    """

    def __init__(self, model: LinearProgram, lb=None, banned=None):
        self.model = model
        self.lb = {j: Fraction(v) for j, v in (lb or {}).items()}
        self.banned = frozenset(banned or ())
        self.n = len(model.simplices)
        self.active = []            # static row ids, in insertion order
        self.pos_of = {}
        self.rowsign = []
        self.colcache = {}          # var j -> list[(pos, +-1 int coef)]
        self.basis = []             # var id j, or -1-pos for row pos's artificial
        self.basis_set = set()
        self.rows_num = []          # integer rows, length m+1 (last = basic value)
        self.rows_den = []          # positive integer denominators
        self.pivots = 0

    # -- construction -------------------------------------------------------
    def _row_adjusted_rhs(self, rid) -> Fraction:
        coefs, rhs, _ = self.model.rows[rid]
        if self.lb:
            rhs = rhs - sum(
                (c * self.lb[j] for j, c in coefs.items() if j in self.lb), _ZERO
            )
        return Fraction(rhs)

    def add_rows(self, row_ids):
        from math import gcd

        for rid in row_ids:
            if rid in self.pos_of:
                continue
            pos = len(self.active)
            m_old = pos
            coefs, _, _ = self.model.rows[rid]
            rhs = self._row_adjusted_rhs(rid)
            cur = _ZERO
            for p, j in enumerate(self.basis):
                if j >= 0:
                    c = coefs.get(j)
                    if c:
                        num = self.rows_num[p][m_old]
                        if num:
                            cur += Fraction(int(c) * num, self.rows_den[p])
            resid = rhs - cur
            sign = 1 if resid >= 0 else -1
            self.active.append(rid)
            self.pos_of[rid] = pos
            self.rowsign.append(sign)
            for j, c in coefs.items():
                if j in self.colcache:
                    self.colcache[j].append((pos, int(c) * sign))
            # extend the inverse: B_new = [[B,0],[N_B,I]], signed and over a
            # common denominator with the residual as the basic value
            den = 1
            contrib = []
            for p, j in enumerate(self.basis):
                if j >= 0:
                    c = coefs.get(j)
                    if c:
                        contrib.append((p, int(c) * sign))
                        den = den * self.rows_den[p] // gcd(den, self.rows_den[p])
            rden = (sign * resid).denominator
            den = den * rden // gcd(den, rden)
            newrow = [0] * (m_old + 2)
            for p, c in contrib:
                f = c * (den // self.rows_den[p])
                rowp = self.rows_num[p]
                for k in range(m_old):
                    if rowp[k]:
                        newrow[k] -= f * rowp[k]
            newrow[m_old] = den
            newrow[m_old + 1] = int((sign * resid) * den)
            for row in self.rows_num:
                row.insert(len(row) - 1, 0)
            self.rows_num.append(newrow)
            self.rows_den.append(den)
            self._reduce_row(pos)
            self.basis.append(-1 - pos)
            self.basis_set.add(-1 - pos)

    def _reduce_row(self, i):
        from math import gcd

        g = self.rows_den[i]
        for v in self.rows_num[i]:
            if v:
                g = gcd(g, v)
                if g == 1:
                    return
        if g > 1:
            self.rows_num[i] = [v // g for v in self.rows_num[i]]
            self.rows_den[i] //= g

    def _col_entries(self, j):
        cached = self.colcache.get(j)
        if cached is None:
            cached = []
            for rid, c in self.model.var_rows.get(j, ()):
                pos = self.pos_of.get(rid)
                if pos is not None:
                    cached.append((pos, int(c) * self.rowsign[pos]))
            self.colcache[j] = cached
        return cached

    # -- simplex core ---------------------------------------------------------
    def _iterate(self, phase1, guard):
        from math import gcd

        m = len(self.active)
        rows_num = self.rows_num
        rows_den = self.rows_den
        basis = self.basis
        while True:
            # scaled duals yD (common positive denominator D)
            D = 1
            idx = []
            for i, bj in enumerate(basis):
                if (bj < 0) == phase1:
                    idx.append(i)
                    D = D * rows_den[i] // gcd(D, rows_den[i])
            yD = [0] * m
            for i in idx:
                f = D // rows_den[i]
                row = rows_num[i]
                for k in range(m):
                    if row[k]:
                        yD[k] += f * row[k]
            bland = self.pivots > guard
            entering = None
            best = 0
            base_cost = 0 if phase1 else D
            for j in self.candidates:
                if j in self.basis_set:
                    continue
                rc = base_cost
                for pos, v in self._col_entries(j):
                    yk = yD[pos]
                    if yk:
                        rc -= yk if v > 0 else -yk
                if rc < 0:
                    if bland:
                        entering = j
                        break
                    if rc < best:
                        best = rc
                        entering = j
            if entering is None:
                num = 0
                for i in idx:
                    v = rows_num[i][m]
                    if v:
                        num += (D // rows_den[i]) * v
                return "optimal", Fraction(num, D)
            # direction numerators (per-row denominators cancel in the ratios)
            ent = self._col_entries(entering)
            leave = -1
            tn = td = None
            for i in range(m):
                row = rows_num[i]
                dnum = 0
                for pos, v in ent:
                    rv = row[pos]
                    if rv:
                        dnum += rv if v > 0 else -rv
                if dnum > 0:
                    xn = row[m]
                    # compare xn/dnum with tn/td
                    if leave < 0 or xn * td < tn * dnum or (
                        xn * td == tn * dnum and basis[i] < basis[leave]
                    ):
                        tn, td = xn, dnum
                        leave = i
                elif dnum < 0 and basis[i] < 0 and row[m] == 0:
                    if leave < 0 or tn != 0:
                        tn, td = 0, 1
                        leave = i
            if leave < 0:
                return "unbounded", None
            self.basis_set.discard(basis[leave])
            self.basis_set.add(entering)
            basis[leave] = entering
            # pivot: actual row_leave / d_leave = nums / dnum_leave
            lrow = rows_num[leave]
            dl = 0
            for pos, v in ent:
                rv = lrow[pos]
                if rv:
                    dl += rv if v > 0 else -rv
            if dl < 0:
                rows_num[leave] = lrow = [-v for v in lrow]
                dl = -dl
            rows_den[leave] = dl
            self._reduce_row(leave)
            lrow = rows_num[leave]
            lden = rows_den[leave]
            for i in range(m):
                if i == leave:
                    continue
                row = rows_num[i]
                dnum = 0
                for pos, v in ent:
                    rv = row[pos]
                    if rv:
                        dnum += rv if v > 0 else -rv
                if dnum:
                    # actual_i -= (dnum/den_i) * (lrow/lden)
                    rows_num[i] = [a * lden - dnum * b for a, b in zip(row, lrow)]
                    rows_den[i] = rows_den[i] * lden
                    self._reduce_row(i)
            self.pivots += 1

    def optimize(self):
        """Phase 1 on outstanding artificials, then phase 2 on the real cost."""
        m = len(self.active)
        guard = 400 + 20 * (m + 1)
        self.candidates = [j for j in range(self.n) if j not in self.banned]
        self.pivots = 0
        if any(
            bj < 0 and self.rows_num[i][m] != 0 for i, bj in enumerate(self.basis)
        ):
            status, value = self._iterate(True, guard)
            if status != "optimal" or value > 0:
                return "infeasible"
        self.pivots = 0
        status, value = self._iterate(False, guard)
        if status != "optimal":
            return status
        self._value = value + sum(self.lb.values(), _ZERO)
        return "optimal"

    def solution(self):
        m = len(self.active)
        xs = {j: v for j, v in self.lb.items() if v}
        for i, bj in enumerate(self.basis):
            if bj >= 0 and self.rows_num[i][m]:
                xs[bj] = xs.get(bj, _ZERO) + Fraction(
                    self.rows_num[i][m], self.rows_den[i]
                )
        return xs

    def duals(self):
        """Exact duals of the active rows for the real objective."""
        from math import gcd

        m = len(self.active)
        y = [_ZERO] * m
        for i, bj in enumerate(self.basis):
            if bj >= 0:
                den = self.rows_den[i]
                row = self.rows_num[i]
                for k in range(m):
                    if row[k]:
                        y[k] += Fraction(row[k], den)
        return {
            rid: y[pos] * self.rowsign[pos] for rid, pos in self.pos_of.items()
        }


@dataclass
class LPResult:
    status: str
    value: Fraction
    x: dict               # canonical simplex -> Fraction
    duals: dict           # static row index -> Fraction
    active_rows: list


def _violated_rows(model: LinearProgram, xs, pos_of):
    hits = {}
    for j, v in xs.items():
        if v:
            for rid, c in model.var_rows.get(j, ()):
                hits[rid] = hits.get(rid, _ZERO) + c * v
    out = [
        rid
        for rid, val in hits.items()
        if rid not in pos_of and val != model.rows[rid][1]
    ]
    out.sort()
    return out


def solve_lp(model: LinearProgram, lb=None, banned=None, seed_rows=None) -> LPResult:
    """Exact optimum over the full static system via warm-started row
    generation; the returned duals certify optimality for the full model."""
    lp = _ActiveSimplex(model, lb=lb, banned=banned)
    seed = set(seed_rows or ())
    seed.update(
        i
        for i, r in enumerate(model.rows)
        if r[2] == "normalization" or r[2].startswith("cut:")
    )
    lp.add_rows(sorted(seed))
    while True:
        status = lp.optimize()
        if status != "optimal":
            return LPResult(status, None, None, None, list(lp.active))
        xs = lp.solution()
        new = _violated_rows(model, xs, lp.pos_of)
        if not new:
            xkeys = {model.simplices[j]: v for j, v in xs.items() if v}
            return LPResult("optimal", lp._value, xkeys, lp.duals(), list(lp.active))
        lp.add_rows(new)


def check_duality(model: LinearProgram, res: LPResult) -> bool:
    """Exact strong duality: y.b equals the optimum and every reduced cost is
    nonnegative (rows outside the active set price at zero)."""
    if res.status != "optimal":
        return False
    yb = _ZERO
    for rid, y in res.duals.items():
        yb += y * model.rows[rid][1]
    if yb != res.value:
        return False
    for j in range(len(model.simplices)):
        rc = _ONE
        for rid, c in model.var_rows.get(j, ()):
            y = res.duals.get(rid)
            if y:
                rc -= y * c
        if rc < 0:
            return False
    return True


@dataclass
class IPSolution:
    value: int
    support: list
    node_count: int
    certificate: object
    status: str
    lower_bound: Fraction

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "support": [[list(l) for l in s] for s in self.support],
            "node_count": self.node_count,
            "status": self.status,
            "lower_bound": format_rational(self.lower_bound),
            "certificate": self.certificate.to_json_dict() if self.certificate else None,
        }


def solve_ip(model: LinearProgram, time_budget=None, incumbent_support=None) -> IPSolution:
    """Best-bound branch and bound with exact LP relaxations.

    Every integral candidate is re-verified geometrically; a failed candidate
    contributes a chamber cut (a generic-point cover row) and the search
    continues.  Returns the proven optimum, or the best bound pair when the
    time budget runs out.
    """
    from polyprod.chains import verify_triangulation

    P = model.polytope
    start = time.monotonic()
    best_support = None
    best_value = None
    if incumbent_support:
        keys = sorted(tuple(sorted(s)) for s in incumbent_support)
        if verify_triangulation(keys, P, level="fast").valid:
            best_support = keys
            best_value = len(keys)

    res = solve_lp(model)
    if res.status != "optimal":
        raise RuntimeError("universal model LP infeasible; model construction bug")
    root_bound = res.value
    counter = 0
    node_count = 0
    heap = [(res.value, counter, {}, frozenset(), res)]

    def finish(status):
        lb = min((h[0] for h in heap), default=best_value)
        cert = None
        if best_support is not None and status == "optimal":
            cert = verify_triangulation(best_support, P, level="full")
        return IPSolution(
            best_value if best_value is not None else -1,
            best_support or [],
            node_count,
            cert,
            status,
            lb if lb is not None else root_bound,
        )

    while heap:
        if time_budget is not None and time.monotonic() - start > time_budget:
            return finish("budget_exhausted")
        bound, _, lbm, ubm, res = heapq.heappop(heap)
        node_count += 1
        if best_value is not None and bound > best_value - 1:
            continue
        frac_var = None
        frac_gap = Fraction(-1)
        for key, v in sorted(res.x.items()):
            f = v - v.__floor__()
            if f:
                gap = min(f, 1 - f)
                if gap > frac_gap:
                    frac_gap = gap
                    frac_var = key
        if frac_var is None:
            support = sorted(res.x)
            rep = verify_triangulation(support, P, level="full")
            if rep.valid:
                val = int(sum(res.x.values()))
                if best_value is None or val < best_value:
                    best_value = val
                    best_support = support
                continue
            cut = _chamber_cut(model, res.x)
            if cut is None:
                raise RuntimeError("integral candidate failed verification but no cut found")
            model.add_row(*cut)
            res2 = _node_lp(model, lbm, ubm)
            if res2.status == "optimal":
                counter += 1
                heapq.heappush(heap, (res2.value, counter, lbm, ubm, res2))
            continue
        v = res.x[frac_var]
        if v.__floor__() != 0:
            raise RuntimeError(f"fractional value {v} outside (0,1) for {frac_var}")
        for child in ("up", "down"):
            if child == "down":
                lbm2, ubm2 = lbm, ubm | {frac_var}
            else:
                lbm2, ubm2 = {**lbm, frac_var: 1}, ubm
            res2 = _node_lp(model, lbm2, ubm2)
            if res2.status != "optimal":
                continue
            if best_value is not None and res2.value > best_value - 1:
                continue
            counter += 1
            heapq.heappush(heap, (res2.value, counter, lbm2, ubm2, res2))

    if best_value is None:
        return IPSolution(-1, [], node_count, None, "infeasible", root_bound)
    return finish("optimal")


def _node_lp(model, lbm, ubm):
    return solve_lp(
        model,
        lb={model.var_index[k]: Fraction(v) for k, v in lbm.items()},
        banned=frozenset(model.var_index[k] for k in ubm),
    )


def _chamber_cut(model: LinearProgram, xs):
    """A cover row at a generic point inside an over/under-covered region."""
    P = model.polytope
    support = [k for k, v in xs.items() if v]
    d = P.dim
    labels = sorted(P.labels)
    subsets = list(combinations(labels, d))
    for key in support:
        pts = [P.vertex(l) for l in key]
        cent = tuple(sum(c) / len(pts) for c in zip(*pts))
        K = 2
        while K < 60:
            Kp = K + 1
            scale = Fraction(1, K * Kp ** d)
            p = tuple(cent[i] + Fraction(Kp ** i) * scale for i in range(d))
            if _is_generic(P, p, subsets):
                count = sum(1 for k2 in support if point_in_simplex(P, p, k2))
                if count != 1:
                    coefs = {
                        i: _ONE
                        for i, k2 in enumerate(model.simplices)
                        if point_in_simplex(P, p, k2)
                    }
                    return coefs, _ONE, f"cut:{p}"
                break
            K += 1
    return None


class _DenseSimplex:
    """Small dense exact simplex used for pairwise feasibility subproblems."""

    def __init__(self, num_cols, col_entries, costs, b):
        self.n = num_cols
        self.m = len(b)
        self.cols = col_entries
        self.costs = costs
        self.b = b

    def solve(self):
        m, n = self.m, self.n
        b = list(self.b)
        cols = [dict(c) for c in self.cols]
        for i in range(m):
            if b[i] < 0:
                b[i] = -b[i]
                for col in cols:
                    if i in col:
                        col[i] = -col[i]
        tab = [[_ZERO] * (n + m) for _ in range(m)]
        for j, col in enumerate(cols):
            for i, v in col.items():
                tab[i][j] = v
        for i in range(m):
            tab[i][n + i] = _ONE
        basis = [n + i for i in range(m)]
        rhs = list(b)

        def pivot(r, c):
            pr = tab[r]
            pv = pr[c]
            if pv != 1:
                inv = _ONE / pv
                tab[r] = pr = [x * inv for x in pr]
                rhs[r] *= inv
            for i in range(m):
                if i != r:
                    f = tab[i][c]
                    if f:
                        tab[i] = [a - f * b2 for a, b2 in zip(tab[i], pr)]
                        rhs[i] -= f * rhs[r]
            basis[r] = c

        def run(cost, allowed):
            steps = 0
            while True:
                steps += 1
                bland = steps > 200
                y = [cost[basis[i]] for i in range(m)]
                entering = -1
                best = _ZERO
                for j in range(len(cost)):
                    if j not in allowed or j in basis:
                        continue
                    rc = cost[j] - sum(y[i] * tab[i][j] for i in range(m) if tab[i][j])
                    if rc < 0:
                        if bland:
                            entering = j
                            break
                        if rc < best:
                            best = rc
                            entering = j
                if entering < 0:
                    return "optimal"
                leave = -1
                theta = None
                for i in range(m):
                    tij = tab[i][entering]
                    if tij > 0:
                        t = rhs[i] / tij
                        if theta is None or t < theta or (t == theta and basis[i] < basis[leave]):
                            theta = t
                            leave = i
                    elif tij < 0 and basis[i] >= n and rhs[i] == 0:
                        # a zeroed artificial must never climb back up
                        if theta is None or theta > 0:
                            theta = _ZERO
                            leave = i
                if leave < 0:
                    return "unbounded"
                pivot(leave, entering)

        art_cost = [_ZERO] * n + [_ONE] * m
        if run(art_cost, set(range(n + m))) != "optimal":
            return "infeasible", None, None
        if sum(rhs[i] for i in range(m) if basis[i] >= n) > 0:
            return "infeasible", None, None
        cost = list(self.costs) + [_ZERO] * m
        status = run(cost, set(range(n)))
        if status != "optimal":
            return status, None, None
        x = {basis[i]: rhs[i] for i in range(m) if basis[i] < n and rhs[i]}
        value = sum(self.costs[j] * v for j, v in x.items())
        return "optimal", value, x


def feasibility_point(simplex_a, simplex_b, P):
    """An exact rational point strictly interior to both simplices, or None.

    Solved as a small exact LP maximizing the common barycentric margin.
    """
    A = [P.vertex(l) for l in simplex_a]
    B = [P.vertex(l) for l in simplex_b]
    k = len(A)
    d = len(A[0])
    nv = 2 * k + 1  # alpha, beta, t with lambda = alpha + t, mu = beta + t
    cols = [dict() for _ in range(nv)]
    b = []

    def add_row(coefs, rhs):
        ridx = len(b)
        b.append(rhs)
        for j, c in coefs.items():
            if c:
                cols[j][ridx] = c

    add_row({i: _ONE for i in range(k)} | {2 * k: Fraction(k)}, _ONE)
    add_row({k + i: _ONE for i in range(k)} | {2 * k: Fraction(k)}, _ONE)
    for c in range(d):
        coefs = {}
        for i in range(k):
            if A[i][c]:
                coefs[i] = Fraction(A[i][c])
            if B[i][c]:
                coefs[k + i] = coefs.get(k + i, _ZERO) - Fraction(B[i][c])
        tc = sum(p[c] for p in A) - sum(p[c] for p in B)
        if tc:
            coefs[2 * k] = tc
        add_row(coefs, _ZERO)
    costs = [_ZERO] * (2 * k) + [Fraction(-1)]
    status, _, x = _DenseSimplex(nv, cols, costs, b).solve()
    if status != "optimal":
        return None
    t = x.get(2 * k, _ZERO)
    if t <= 0:
        return None
    lam = [x.get(i, _ZERO) + t for i in range(k)]
    return tuple(sum(lam[i] * A[i][c] for i in range(k)) for c in range(d))
