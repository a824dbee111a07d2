"""Isomorphism decision pipeline.

Stages, in order: spectral gate, sign fixing of simple eigenvalues (with a
closed-form answer when every sign is forced), phase-1 feasibility of the
reduced LP, then Frank–Wolfe on ``-xᵀx`` over
``{x = N σ ≥ 0, C x = 1}`` with perturbation restarts. An ``Isomorphic``
verdict always carries a permutation that passed ``verify_isomorphism``.
"""

from __future__ import annotations

import csv
import enum
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import SolverConfig
from .graphs import Permutation, WeightedGraph, verify_isomorphism
from .lp import LinearProgram, LPResult
from .relaxation import (
    HOperator,
    NullSpaceBasis,
    Sign,
    SignConstraints,
    rank_of_h,
    sign_equations,
    unvec,
    vec,
)
from .spectral import GroupedSpectrum, SpectrumComparison, compare_spectra, decompose

log = logging.getLogger(__name__)

TRACE_HEADER = ("restart", "iter", "f", "fw_gap", "eq_resid", "pos_resid", "h_resid")


class DimensionOverflowError(ValueError):
    """The instance exceeds the configured size caps."""


class Verdict(enum.Enum):
    ISOMORPHIC = "Isomorphic"
    NOT_ISOMORPHIC = "NotIsomorphic"
    INCONCLUSIVE = "Inconclusive"


SPECTRAL_GATE = "spectral-gate"
SIGN_INFEASIBLE = "sign-infeasible"
LP_INFEASIBLE = "lp-infeasible"


@dataclass
class IsoVerdict:
    kind: Verdict
    reason: str | None = None
    certificate: Permutation | None = None
    best_x: np.ndarray | None = None
    best_f: float | None = None
    stage: str = ""
    spectra: tuple[GroupedSpectrum, GroupedSpectrum] | None = None
    comparison: SpectrumComparison | None = None
    rank_h: int | None = None
    iterations: int = 0
    restarts: int = 0
    free_dim: int | None = None
    trace: list[tuple] = field(default_factory=list)
    snapshots: list[np.ndarray] = field(default_factory=list)

    @property
    def isomorphic(self) -> bool:
        return self.kind is Verdict.ISOMORPHIC

    def exit_code(self) -> int:
        return {Verdict.ISOMORPHIC: 0, Verdict.NOT_ISOMORPHIC: 1,
                Verdict.INCONCLUSIVE: 2}[self.kind]


class ReducedLP:
    """The feasible set ``{x = x_fix + N_free z ≥ 0, C x = 1}`` in ``z``-coordinates.

    Blocks whose sign is forced contribute the fixed part ``x_fix``; the
    remaining null-space columns form ``N_free``. Because all columns are
    orthonormal, ``xᵀx == ‖σ_fixed‖² + ‖z‖²``.
    """

    def __init__(self, basis: NullSpaceBasis, signs: SignConstraints | None = None,
                 max_entries: int | None = None):
        self.basis = basis
        n = self.n = basis.n
        forced = signs.forced() if signs is not None else {}
        fixed_sigma = np.zeros(basis.r)
        free_cols = []
        for k, m in enumerate(basis.mu):
            lo, hi = basis.offsets[k], basis.offsets[k + 1]
            if k in forced:
                fixed_sigma[lo] = forced[k]
            else:
                free_cols.extend(range(lo, hi))
        self.free_cols = np.array(free_cols, dtype=int)
        self.fixed_sigma = fixed_sigma
        p = self.free_cols.size
        if max_entries is not None and n * n * p > max_entries:
            raise DimensionOverflowError(
                f"reduced LP needs {n * n} x {p} dense entries (cap {max_entries})")
        self.x_fix = basis.matvec(fixed_sigma)
        self.fixed_norm2 = float(fixed_sigma @ fixed_sigma)
        cols = [np.kron(ua, ub) for k, (ua, ub) in enumerate(basis.blocks) if k not in forced]
        self.N = np.hstack(cols) if cols else np.zeros((n * n, 0))
        self.E = self.constraint_rows(self.N)
        self.d = np.ones(2 * n) - self.constraint_rows(self.x_fix[:, None])[:, 0]
        self.lp = LinearProgram(self.E, self.d, self.N, -self.x_fix)

    def constraint_rows(self, cols: np.ndarray) -> np.ndarray:
        """``C · cols``: row sums then column sums of each matricized column."""
        n = self.n
        t = cols.reshape(n, n, -1)  # t[j, i] holds X[i, j]
        return np.vstack([t.sum(axis=0), t.sum(axis=1)])

    @property
    def dim(self) -> int:
        return int(self.free_cols.size)

    @property
    def free_dim(self) -> int:
        return self.lp.free_dim

    def x_of(self, z: np.ndarray) -> np.ndarray:
        return self.x_fix + self.N @ z

    def z_of(self, x: np.ndarray) -> np.ndarray:
        return self.N.T @ x

    def sigma_of(self, z: np.ndarray) -> np.ndarray:
        s = self.fixed_sigma.copy()
        s[self.free_cols] = z
        return s

    def objective(self, z: np.ndarray) -> float:
        return -(self.fixed_norm2 + float(z @ z))

    def residuals(self, x: np.ndarray, h: HOperator) -> tuple[float, float, float]:
        eq = float(np.max(np.abs(self.constraint_rows(x[:, None])[:, 0] - 1.0)))
        pos = float(max(0.0, -float(np.min(x))))
        hres = float(np.max(np.abs(h.matvec(x))))
        return eq, pos, hres


@dataclass
class SolverState:
    z: np.ndarray
    x: np.ndarray
    f: float
    iter: int = 0
    restart: int = 0
    basis: tuple[int, ...] | None = None
    gamma: float = 0.0
    fw_gap: float = float("nan")

    @classmethod
    def at(cls, lp: ReducedLP, z: np.ndarray, **kw) -> "SolverState":
        z = np.asarray(z, dtype=float)
        return cls(z=z, x=lp.x_of(z), f=lp.objective(z), **kw)

    @property
    def sigma(self) -> np.ndarray:
        return self.z


def solve_lp(lp: ReducedLP, cost: np.ndarray | None = None,
             start: np.ndarray | None = None, basis=None) -> LPResult:
    """Vertex minimizer of ``costᵀz`` over the reduced feasible set."""
    c = np.zeros(lp.dim) if cost is None else np.asarray(cost, dtype=float)
    return lp.lp.solve(c, start=start, basis=basis)


def initial_point(lp: ReducedLP, rng: np.random.Generator | None = None,
                  perturb_range: tuple[float, float] = (0.1, 0.5)) -> LPResult:
    """Phase-1 feasible point, optionally pushed toward a random vertex.

    For regular pairs the minimum-norm solution of the equalities is the
    constant matrix, which is returned unchanged when ``rng`` is None.
    """
    feas = lp.lp.find_feasible()
    if not feas.feasible or rng is None or lp.dim == 0:
        return feas
    y = solve_lp(lp, rng.standard_normal(lp.dim), start=feas.z)
    eps = rng.uniform(*perturb_range)
    feas.z = (1.0 - eps) * feas.z + eps * y.z
    return feas


def explore_face(state: SolverState, lp: ReducedLP, rng: np.random.Generator,
                 tol: float = 1e-9) -> LPResult:
    """Random vertex of the oracle's optimal face ``{y : ⟨y, x⟩ ≥ ⟨x, x⟩}``.

    At a stagnated ``x`` every other point ``y`` of that face has
    ``⟨x, y - x⟩ = 0``, hence ``‖y‖² = ‖x‖² + ‖y - x‖²``: strictly better.
    """
    zz = float(state.z @ state.z)
    cut = lp.lp.with_cut(state.z, zz - tol * max(1.0, zz))
    res = cut.solve(rng.standard_normal(lp.dim), start=state.z, basis=state.basis)
    if res.basis is not None and max(res.basis, default=-1) >= lp.lp.G.shape[0]:
        res.basis = None  # the cut row is not part of the original program
    return res


def frank_wolfe_step(state: SolverState, lp: ReducedLP, tol_progress: float = 1e-10,
                     rng: np.random.Generator | None = None) -> SolverState:
    """One conditional-gradient step on ``f(x) = -xᵀx``.

    The linear oracle maximizes ``⟨y, x⟩``. ``f`` is concave along the segment
    to ``y``, so the exact line search lands on an endpoint: ``γ = 1`` when
    ``y`` improves the objective, otherwise ``γ = 0`` (stagnation). With
    ``rng`` a stagnated step breaks ties in the oracle via ``explore_face``.
    """
    res = solve_lp(lp, -state.z, start=state.z, basis=state.basis)
    y = res.z
    fy = lp.objective(y)
    gap = 2.0 * float(state.z @ y - state.z @ state.z)
    scale = tol_progress * max(1.0, abs(state.f))
    if fy >= state.f - scale and rng is not None and lp.dim:
        alt = explore_face(state, lp, rng)
        if alt.feasible and lp.objective(alt.z) < fy:
            res, y, fy = alt, alt.z, lp.objective(alt.z)
    if fy < state.f - scale:
        return SolverState(z=y, x=lp.x_of(y), f=fy, iter=state.iter + 1,
                           restart=state.restart, basis=res.basis, gamma=1.0, fw_gap=gap)
    return SolverState(z=state.z, x=state.x, f=state.f, iter=state.iter + 1,
                       restart=state.restart, basis=state.basis, gamma=0.0, fw_gap=gap)


def round_to_permutation(x: np.ndarray, tol_bin: float = 1e-6) -> Permutation | None:
    """The permutation ``x`` encodes, if every entry is within ``tol_bin`` of 0 or 1."""
    xm = unvec(np.asarray(x, dtype=float))
    hi = xm >= 1.0 - tol_bin
    lo = xm <= tol_bin
    if not np.all(hi | lo):
        return None
    if not (np.all(hi.sum(axis=1) == 1) and np.all(hi.sum(axis=0) == 1)):
        return None
    return Permutation(np.argmax(hi, axis=0))


def perturb_restart(state: SolverState, lp: ReducedLP, rng: np.random.Generator,
                    perturb_range: tuple[float, float] = (0.1, 0.5),
                    tol: float = 1e-9) -> SolverState:
    """Move a stagnated iterate part of the way toward a random vertex."""
    if state.f <= -lp.n + tol or lp.dim == 0:
        return state
    y = solve_lp(lp, rng.standard_normal(lp.dim), start=state.z)
    eps = rng.uniform(*perturb_range)
    z = (1.0 - eps) * state.z + eps * y.z
    return SolverState.at(lp, z, iter=0, restart=state.restart + 1)


def _certify(a, b, x, tol_bin) -> Permutation | None:
    perm = round_to_permutation(x, tol_bin)
    if perm is not None and verify_isomorphism(a, b, perm):
        return perm
    return None


def check(a: WeightedGraph, b: WeightedGraph, cfg: SolverConfig | None = None) -> IsoVerdict:
    """Decide whether ``a`` and ``b`` are isomorphic."""
    cfg = cfg or SolverConfig()
    if a.n != b.n:
        return IsoVerdict(Verdict.NOT_ISOMORPHIC, SPECTRAL_GATE, stage="size")
    n = a.n
    if n > cfg.size_cap:
        raise DimensionOverflowError(f"n = {n} exceeds size cap {cfg.size_cap}")

    spec_kw = dict(tol_group=cfg.tol_group, tol_friendly=cfg.tol_friendly,
                   tol_entry=cfg.tol_entry)
    sa, sb = decompose(a, **spec_kw), decompose(b, **spec_kw)
    cmp = compare_spectra(sa, sb, cfg.tol_group)
    out = IsoVerdict(Verdict.INCONCLUSIVE, spectra=(sa, sb), comparison=cmp)
    if not cmp.isospectral:
        out.kind, out.reason, out.stage = Verdict.NOT_ISOMORPHIC, SPECTRAL_GATE, "spectral"
        return out
    out.rank_h = rank_of_h(sa.mu, n)

    signs = sign_equations(sa, sb, cfg.tol_group, cfg.tol_entry)
    if not signs.feasible:
        out.kind, out.reason, out.stage = Verdict.NOT_ISOMORPHIC, SIGN_INFEASIBLE, "signs"
        return out
    basis = NullSpaceBasis(sa, sb, cfg.tol_group)
    if signs.all_forced:
        # Every isomorphism equals X*(S) for these signs, so X* decides.
        out.stage = "signs"
        out.free_dim = 0
        x = basis.matvec(basis.join([np.array([[s]]) for s in signs.diagonal()]))
        out.best_x, out.best_f = x, -float(x @ x)
        perm = _certify(a, b, x, cfg.tol_bin)
        if perm is not None:
            out.kind, out.certificate = Verdict.ISOMORPHIC, perm
        else:
            out.kind, out.reason = Verdict.NOT_ISOMORPHIC, SIGN_INFEASIBLE
        return out

    lp = ReducedLP(basis, signs, cfg.max_lp_entries)
    out.free_dim = lp.free_dim
    return _run_frank_wolfe(a, b, lp, cfg, out)


def _run_frank_wolfe(a, b, lp: ReducedLP, cfg: SolverConfig, out: IsoVerdict) -> IsoVerdict:
    n = lp.n
    rng = np.random.default_rng(cfg.seed)
    h = HOperator(a, b)
    out.stage = "frank-wolfe"

    start = initial_point(lp)
    if not start.feasible:
        out.kind, out.reason, out.stage = Verdict.NOT_ISOMORPHIC, LP_INFEASIBLE, "lp"
        return out
    state = SolverState.at(lp, start.z)
    best = state

    def record(st: SolverState):
        eq, pos, hres = lp.residuals(st.x, h)
        out.trace.append((st.restart, st.iter, st.f, st.fw_gap, eq, pos, hres))
        if cfg.snapshots:
            out.snapshots.append(unvec(st.x, n).copy())

    def finish(perm: Permutation | None):
        out.best_x, out.best_f = best.x, best.f
        if perm is not None:
            out.kind, out.certificate = Verdict.ISOMORPHIC, perm
        if cfg.trace_path is not None:
            write_trace(out.trace, cfg.trace_path)
        return out

    record(state)
    perm = _certify(a, b, state.x, cfg.tol_bin)
    if perm is not None:
        return finish(perm)
    origin = state
    for restart in range(cfg.max_restarts + 1):
        if restart:
            # Perturb the initial point: from a stagnated vertex v any
            # ε ≤ 1/2 leaves v the oracle's answer, so FW would fall back to it.
            origin.restart = restart - 1
            state = perturb_restart(origin, lp, rng, cfg.perturb_range)
            record(state)
            out.restarts = restart
        history = [state.f]
        for _ in range(cfg.max_iters):
            state = frank_wolfe_step(state, lp, cfg.tol_progress, rng)
            out.iterations += 1
            record(state)
            history.append(state.f)
            if state.f < best.f:
                best = state
            if state.gamma == 0.0:
                break
            perm = _certify(a, b, state.x, cfg.tol_bin)
            if perm is not None:
                return finish(perm)
            if _stalled(history, cfg.stall_window, cfg.stall_rel):
                break
        if state.f <= -n + 1e-9:
            # Binary doubly stochastic point that failed verification.
            break
    return finish(None)


def _stalled(history: list[float], window: int, rel: float) -> bool:
    """Decrease over the last ``window`` steps below ``rel · |f|``."""
    if len(history) <= window:
        return False
    return history[-1 - window] - history[-1] < rel * abs(history[-1])


def format_trace(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for r in rows:
        w.writerow([r[0], r[1]] + [repr(float(v)) for v in r[2:]])
    return buf.getvalue()


def write_trace(rows, path: str | Path) -> None:
    Path(path).write_text(format_trace(rows))


def sign_completions(a: WeightedGraph, b: WeightedGraph,
                     cfg: SolverConfig | None = None) -> list[tuple[tuple[int, ...], np.ndarray]]:
    """Every ``X*(S)`` with forced signs kept and free signs enumerated.

    Only for graphs with simple spectra.
    """
    cfg = cfg or SolverConfig()
    sa = decompose(a, cfg.tol_group, cfg.tol_friendly, cfg.tol_entry)
    sb = decompose(b, cfg.tol_group, cfg.tol_friendly, cfg.tol_entry)
    if not (sa.distinct and sb.distinct):
        raise ValueError("sign completions need simple spectra")
    signs = sign_equations(sa, sb, cfg.tol_group, cfg.tol_entry)
    if not signs.feasible:
        return []
    basis = NullSpaceBasis(sa, sb, cfg.tol_group)
    diag = signs.diagonal()
    free = signs.free()
    out = []
    for bits in range(2 ** len(free)):
        s = list(diag)
        for t, k in enumerate(free):
            s[k] = -1 if (bits >> t) & 1 else 1
        x = basis.matrix_of(basis.join([np.array([[v]]) for v in s]))
        out.append((tuple(s), x))
    return out
