"""Dense two-phase primal simplex for ``min cᵀz  s.t.  E z = e,  G z ≥ h``.

The variables ``z`` are free. The method works on the inequality form
directly: a basis is a set of ``p`` linearly independent active rows
(all equality rows plus chosen rows of ``G``, or coordinate rows while the
iterate is not yet a vertex). Moving off one active row along the
corresponding column of the basis inverse is a simplex pivot; the blocking
row found by the ratio test enters the basis. The inverse is updated with
Sherman–Morrison and refactorized periodically.

Phase 1 adds one artificial variable ``t`` that shifts every inequality,
``G z + t ≥ h``, and minimizes ``t``; a positive optimum proves infeasibility.

Degenerate vertices (far more active rows than dimensions) stall the method,
so the pivoting runs on ``h - δ`` with a tiny random ``δ > 0``. Reduced costs
do not depend on ``h``, so the final basis is still optimal for the original
bounds; the exact vertex is recovered by solving it against ``h``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.linalg.blas import dger as _dger

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"


class LPError(RuntimeError):
    pass


class IterationLimitError(LPError):
    """Pivot cap hit before optimality was proven."""


class UnboundedError(LPError):
    pass


@dataclass
class LPResult:
    status: str
    z: np.ndarray | None = None
    objective: float = float("nan")
    basis: tuple[int, ...] | None = None
    pivots: int = 0
    phase1_objective: float = 0.0
    eq_residual: float = 0.0

    @property
    def feasible(self) -> bool:
        return self.status == OPTIMAL


@dataclass
class SimplexOptions:
    tol_feas: float = 1e-9
    tol_cost: float = 1e-9
    tol_pivot: float = 1e-9
    tol_infeasible: float = 1e-7
    bland_after: int = 50
    refactor_every: int = 100
    max_pivots: int | None = None
    perturb: float = 1e-7
    perturb_seed: int = 0


def independent_rows(e_mat: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Indices of a maximal set of linearly independent rows, by pivoted QR."""
    if e_mat.size == 0:
        return np.zeros(0, dtype=int)
    _, r, piv = scipy.linalg.qr(e_mat.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return np.zeros(0, dtype=int)
    rank = int(np.count_nonzero(diag > tol * max(1.0, diag[0])))
    return np.sort(piv[:rank])


class _Simplex:
    """One run of the active-set simplex from a feasible point."""

    def __init__(self, e_mat, e_rhs, g_mat, h_rhs, opts: SimplexOptions, h_true=None):
        self.E, self.e, self.G, self.h = e_mat, e_rhs, g_mat, h_rhs
        self.h_true = h_rhs if h_true is None else h_true
        self.q, self.p = e_mat.shape
        self.m = g_mat.shape[0]
        self.opts = opts

    # rows[pos] >= 0: G row index; rows[pos] < 0: coordinate -rows[pos]-1;
    # positions < q are the equality rows.
    def _start_basis(self, basis):
        q, p = self.q, self.p
        if basis is not None and len(basis) == p - q:
            rows = np.asarray(basis, dtype=np.int64)
            k = np.vstack([self.E, self.G[rows]]) if q else self.G[rows].copy()
            if np.linalg.cond(k) < 1e12:
                return rows, k
        if q:
            _, _, piv = scipy.linalg.qr(self.E, mode="economic", pivoting=True)
            free = np.sort(piv[q:])
        else:
            free = np.arange(p)
        rows = -(free.astype(np.int64) + 1)
        k = np.zeros((p, p))
        k[:q] = self.E
        k[np.arange(q, p), free] = 1.0
        return rows, k

    def _row(self, code: int) -> np.ndarray:
        if code >= 0:
            return self.G[code]
        r = np.zeros(self.p)
        r[-code - 1] = 1.0
        return r

    def _rhs(self, rows, z, h=None):
        h = self.h if h is None else h
        rhs = np.empty(self.p)
        rhs[:self.q] = self.e
        for pos, code in enumerate(rows, start=self.q):
            rhs[pos] = h[code] if code >= 0 else z[-code - 1]
        return rhs

    def _clean(self, k, rows, z):
        """Basic solution against the unperturbed bounds, if still feasible."""
        zc = np.linalg.solve(k, self._rhs(rows, z, self.h_true))
        scale = max(1.0, float(np.max(np.abs(self.h_true), initial=0.0)))
        if float(np.max(self.h_true - self.G @ zc, initial=0.0)) <= self.opts.tol_feas * scale:
            return zc
        log.debug("perturbed basis infeasible after cleanup; keeping perturbed vertex")
        return z

    def run(self, c, z, basis=None):
        opts = self.opts
        q, p, m = self.q, self.p, self.m
        c = np.asarray(c, dtype=float)
        z = np.array(z, dtype=float)
        if p == 0:
            return z, (), 0
        rows, k = self._start_basis(basis)
        kinv = np.asfortranarray(np.linalg.inv(k))
        in_ws = np.zeros(m, dtype=bool)
        in_ws[rows[rows >= 0]] = True
        if np.any(rows >= 0):
            z = kinv @ self._rhs(rows, z)
        slack = self.G @ z - self.h
        cscale = max(1.0, float(np.max(np.abs(c)))) if c.size else 1.0
        cap = opts.max_pivots or (20000 + 50 * (p + m))
        # Refactorization costs O(p³); amortize it over O(p) rank-one updates.
        refactor = max(opts.refactor_every, p // 2)
        streak = 0
        pivots = 0
        stuck = set()
        lam = kinv.T @ c
        while True:
            if pivots >= cap:
                raise IterationLimitError(f"simplex exceeded {cap} pivots")
            lam_w = lam[q:]
            is_u = rows < 0
            improving = np.where(is_u, np.abs(lam_w) > opts.tol_cost * cscale,
                                 lam_w < -opts.tol_cost * cscale)
            bland = streak >= opts.bland_after
            cand = np.flatnonzero(improving)
            if cand.size:
                if bland:
                    # Lowest variable index: coordinates first, then slack rows.
                    keys = np.where(rows[cand] < 0, -rows[cand] - 1, p + rows[cand])
                    j = cand[np.argmin(keys)]
                else:
                    j = cand[np.argmax(np.abs(lam_w[cand]))]
                sgn = -np.sign(lam_w[j]) if rows[j] < 0 else 1.0
                tries = [sgn]
            else:
                pending = [i for i in np.flatnonzero(is_u) if i not in stuck]
                if not pending:
                    break
                j = pending[0]
                tries = [1.0, -1.0]
            pos = q + j
            dcol = kinv[:, pos].copy()
            gd_col = self.G @ dcol
            step = None
            for sgn in tries:
                gd = sgn * gd_col
                step = self._ratio_test(gd, slack, in_ws, bland)
                if step is not None:
                    break
            if step is None:
                if cand.size:
                    raise UnboundedError("objective unbounded below")
                stuck.add(j)
                continue
            r, alpha = step
            d = sgn * dcol
            z = z + alpha * d
            slack = slack + alpha * gd
            slack[r] = 0.0
            old = rows[j]
            if old >= 0:
                in_ws[old] = False
            rows[j] = r
            in_ws[r] = True
            # Sherman–Morrison for replacing row ``pos`` of K, applied in place.
            row = (self.G[r] - k[pos]) @ kinv
            lam -= row * (float(dcol @ c) / gd_col[r])
            kinv = _dger(-1.0 / gd_col[r], dcol, row, a=kinv, overwrite_a=True)
            k[pos] = self.G[r]
            pivots += 1
            streak = streak + 1 if alpha <= opts.tol_feas else 0
            if pivots % refactor == 0:
                kinv = np.asfortranarray(np.linalg.inv(k))
                lam = kinv.T @ c
                z = kinv @ self._rhs(rows, z)
                slack = self.G @ z - self.h
        if np.any(rows >= 0):
            z = np.linalg.solve(k, self._rhs(rows, z))
            if self.h is not self.h_true:
                z = self._clean(k, rows, z)
        return z, tuple(int(r) for r in rows), pivots

    def _ratio_test(self, gd, slack, in_ws, bland):
        opts = self.opts
        tol = opts.tol_pivot * max(1.0, float(np.max(np.abs(gd))))
        mask = (gd < -tol) & ~in_ws
        idx = np.flatnonzero(mask)
        if idx.size == 0:
            return None
        s = np.maximum(slack[idx], 0.0)
        rate = -gd[idx]
        if bland:
            ratios = s / rate
            best = ratios.min()
            ties = idx[ratios <= best + opts.tol_feas * 1e-3]
            r = int(ties.min())
            return r, float(max(best, 0.0))
        # Harris two-pass: relaxed bound, then the largest pivot under it.
        bound = np.min((s + opts.tol_feas) / rate)
        ok = (s / rate) <= bound
        sel = np.flatnonzero(ok)
        r_local = sel[np.argmax(rate[sel])]
        r = int(idx[r_local])
        return r, float(s[r_local] / rate[r_local])


@dataclass
class LinearProgram:
    """``E z = e``, ``G z ≥ h`` over free ``z``; the cost is supplied per solve."""

    E: np.ndarray
    e: np.ndarray
    G: np.ndarray
    h: np.ndarray
    options: SimplexOptions = field(default_factory=SimplexOptions)

    def __post_init__(self):
        self.G = np.ascontiguousarray(self.G, dtype=float)
        self.h = np.asarray(self.h, dtype=float)
        p = self.G.shape[1]
        e_mat = np.asarray(self.E, dtype=float)
        # reshape(-1, 0) is ambiguous, so keep 2-D input as given
        self.E = e_mat if e_mat.ndim == 2 else e_mat.reshape(-1 if p else 0, p)
        self.e = np.asarray(self.e, dtype=float).reshape(-1)
        keep = independent_rows(self.E)
        self.eq_rows = keep
        self.E_ind = self.E[keep]
        self.e_ind = self.e[keep]
        z_ls = np.zeros(p)
        if keep.size:
            z_ls = np.linalg.lstsq(self.E_ind, self.e_ind, rcond=None)[0]
        self.eq_residual = float(np.max(np.abs(self.E @ z_ls - self.e), initial=0.0))
        self._z_ls = z_ls
        m = self.G.shape[0]
        scale = max(1.0, float(np.max(np.abs(self.h), initial=0.0)))
        rng = np.random.default_rng(self.options.perturb_seed)
        self._delta = self.options.perturb * scale * rng.uniform(1.0, 2.0, m)

    @property
    def dim(self) -> int:
        return self.G.shape[1]

    @property
    def free_dim(self) -> int:
        """Dimension of the affine hull of the equalities."""
        return self.dim - self.E_ind.shape[0]

    def consistent(self, tol: float = 1e-8) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.e)))) if self.e.size else 1.0
        return self.eq_residual <= tol * scale

    def violation(self, z: np.ndarray) -> float:
        """Largest violation of any constraint at ``z``."""
        v = float(np.max(self.h - self.G @ z, initial=0.0))
        if self.E.shape[0]:
            v = max(v, float(np.max(np.abs(self.E @ z - self.e))))
        return max(v, 0.0)

    def with_cut(self, g_row: np.ndarray, h_val: float) -> "LinearProgram":
        """Same program with one extra inequality ``g_row · z ≥ h_val`` appended."""
        return LinearProgram(self.E, self.e, np.vstack([self.G, g_row]),
                             np.append(self.h, h_val), self.options)

    def _simplex(self) -> _Simplex:
        return _Simplex(self.E_ind, self.e_ind, self.G, self.h - self._delta,
                        self.options, h_true=self.h)

    def find_feasible(self, start: np.ndarray | None = None) -> LPResult:
        """Phase 1. Returns a feasible ``z`` or an INFEASIBLE result."""
        if not self.consistent():
            return LPResult(INFEASIBLE, phase1_objective=float("inf"),
                            eq_residual=self.eq_residual)
        z0 = self._z_ls if start is None else np.asarray(start, dtype=float)
        viol = float(np.max(self.h - self.G @ z0, initial=0.0))
        if viol <= self.options.tol_feas:
            return LPResult(OPTIMAL, z=z0, objective=0.0)
        p, m = self.dim, self.G.shape[0]
        g_aug = np.zeros((m + 1, p + 1))
        g_aug[:m, :p] = self.G
        g_aug[:m, p] = 1.0
        g_aug[m, p] = 1.0
        h_aug = np.concatenate([self.h, [0.0]])
        d_aug = np.concatenate([self._delta, [0.0]])
        e_aug = np.hstack([self.E_ind, np.zeros((self.E_ind.shape[0], 1))])
        aux = _Simplex(e_aug, self.e_ind, g_aug, h_aug - d_aug, self.options, h_true=h_aug)
        cost = np.zeros(p + 1)
        cost[p] = 1.0
        zt, _, piv = aux.run(cost, np.concatenate([z0, [viol]]))
        t = float(zt[p])
        scale = max(1.0, float(np.max(np.abs(self.h), initial=0.0)))
        if t > self.options.tol_infeasible * scale:
            log.debug("phase 1 optimum %.3e > tolerance: infeasible", t)
            return LPResult(INFEASIBLE, pivots=piv, phase1_objective=t)
        return LPResult(OPTIMAL, z=zt[:p], objective=0.0, pivots=piv, phase1_objective=t)

    def solve(self, c: np.ndarray, start: np.ndarray | None = None,
              basis: tuple[int, ...] | None = None) -> LPResult:
        """Vertex minimizer of ``cᵀz``; ``start`` must be feasible if given."""
        piv1 = 0
        t = 0.0
        if start is None or self.violation(start) > 1e3 * self.options.tol_feas:
            feas = self.find_feasible(start)
            if not feas.feasible:
                return feas
            start, piv1, t = feas.z, feas.pivots, feas.phase1_objective
            basis = None
        z, rows, piv = self._simplex().run(c, start, basis)
        c = np.asarray(c, dtype=float)
        return LPResult(OPTIMAL, z=z, objective=float(c @ z),
                        basis=rows if all(r >= 0 for r in rows) else None,
                        pivots=piv1 + piv, phase1_objective=t)
