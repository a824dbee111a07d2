"""The H operator, its null space, and the X*(S) / Q*(R) parametrizations.

All vectorization is column-stacking: ``vec(X)[j*n + i] == X[i, j]``. With
that convention ``(A ⊗ I - I ⊗ B) vec(X) == vec(X A - B X)`` for symmetric
``A``, and a null-space column ``u_A ⊗ u_B`` is ``vec(u_B u_Aᵀ)``.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graphs import WeightedGraph
from .spectral import (
    TOL_ENTRY,
    GroupedSpectrum,
    compare_spectra,
    multiset_distance,
)


def vec(x: np.ndarray) -> np.ndarray:
    return np.asarray(x).reshape(-1, order="F")


def unvec(x: np.ndarray, n: int | None = None) -> np.ndarray:
    x = np.asarray(x)
    if n is None:
        n = int(round(np.sqrt(x.size)))
    if n * n != x.size:
        raise ValueError(f"vector of length {x.size} is not a vectorized square matrix")
    return x.reshape(n, n, order="F")


class NotIsospectralError(ValueError):
    pass


def _adj(g) -> np.ndarray:
    return g.adj if isinstance(g, WeightedGraph) else np.asarray(g, dtype=float)


class HOperator:
    """Matrix-free ``H = (A ⊗ I - I ⊗ B)²`` acting on vectors of length ``n²``."""

    def __init__(self, a, b):
        self.a = _adj(a)
        self.b = _adj(b)
        if self.a.shape != self.b.shape:
            raise ValueError("adjacency matrices differ in size")
        self.n = self.a.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n * self.n, self.n * self.n)

    def commutator(self, x: np.ndarray) -> np.ndarray:
        """``vec(X A - B X)``, i.e. one application of ``A ⊗ I - I ⊗ B``."""
        if np.size(x) != self.n * self.n:
            raise ValueError(f"expected a vector of length {self.n ** 2}, got {np.size(x)}")
        xm = unvec(x, self.n)
        return vec(xm @ self.a - self.b @ xm)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.commutator(self.commutator(x))

    __call__ = matvec

    def quadratic_form(self, x: np.ndarray) -> float:
        """``xᵀ H x``, computed as ``‖X A - B X‖²_F``."""
        r = self.commutator(x)
        return float(r @ r)

    def dense(self) -> np.ndarray:
        """Explicit ``n² × n²`` matrix; for testing small instances only."""
        if self.n > 12:
            raise ValueError("refusing to materialize H for n > 12")
        eye = np.eye(self.n)
        k = np.kron(self.a, eye) - np.kron(eye, self.b)
        return k @ k


def rank_of_h(mu: Sequence[int], n: int) -> int:
    mu = np.asarray(mu, dtype=int)
    if np.any(mu < 1) or int(mu.sum()) != n:
        raise ValueError(f"multiplicities {mu.tolist()} do not sum to n={n}")
    return int(n * n - np.sum(mu * mu))


def h_eigenvalue_table(lambda_a, lambda_b) -> np.ndarray:
    la = np.asarray(lambda_a, dtype=float)
    lb = np.asarray(lambda_b, dtype=float)
    return (la[:, None] - lb[None, :]) ** 2


def h_spectrum(lambda_a, mu_a, lambda_b, mu_b, decimals: int = 10) -> dict[float, int]:
    """Eigenvalues of H with multiplicities, from the two graph spectra."""
    table = h_eigenvalue_table(lambda_a, lambda_b)
    mult = np.outer(np.asarray(mu_a), np.asarray(mu_b))
    out: Counter = Counter()
    for v, c in zip(np.round(table, decimals).ravel(), mult.ravel()):
        out[float(v) + 0.0] += int(c)
    return dict(sorted(out.items(), reverse=True))


class NullSpaceBasis:
    """Orthonormal basis of null(H): columns ``u_A^(k,α) ⊗ u_B^(k,β)`` per block.

    Reduced coordinates ``σ`` stack ``vec(S^(k))`` block by block, so that
    ``N σ == vec(U_B S U_Aᵀ)``.
    """

    def __init__(self, sa: GroupedSpectrum, sb: GroupedSpectrum, tol: float = 1e-8):
        cmp = compare_spectra(sa, sb, tol)
        if not cmp.isospectral:
            raise NotIsospectralError("null-space basis needs isospectral graphs")
        self.sa, self.sb = sa, sb
        self.n = sa.n
        self.mu = sa.mu.copy()
        self.blocks = tuple(zip(sa.blocks, sb.blocks))
        sizes = self.mu * self.mu
        self.offsets = np.concatenate([[0], np.cumsum(sizes)])
        self.r = int(self.offsets[-1])

    def split(self, sigma: np.ndarray) -> list[np.ndarray]:
        """Reduced coordinates to the list of ``S^(k)`` blocks."""
        sigma = np.asarray(sigma, dtype=float)
        if sigma.size != self.r:
            raise ValueError(f"expected {self.r} reduced coordinates, got {sigma.size}")
        return [sigma[self.offsets[k]:self.offsets[k + 1]].reshape(m, m, order="F")
                for k, m in enumerate(self.mu)]

    def join(self, s_blocks: Sequence[np.ndarray]) -> np.ndarray:
        if len(s_blocks) != len(self.mu):
            raise ValueError("wrong number of S blocks")
        parts = []
        for s, m in zip(s_blocks, self.mu):
            s = np.atleast_2d(np.asarray(s, dtype=float))
            if s.shape != (m, m):
                raise ValueError(f"S block of shape {s.shape}, expected {(m, m)}")
            parts.append(vec(s))
        return np.concatenate(parts)

    def matrix_of(self, sigma: np.ndarray) -> np.ndarray:
        """``X = U_B S U_Aᵀ`` for reduced coordinates ``σ``."""
        x = np.zeros((self.n, self.n))
        for (ua, ub), s in zip(self.blocks, self.split(sigma)):
            x += ub @ s @ ua.T
        return x

    def matvec(self, sigma: np.ndarray) -> np.ndarray:
        return vec(self.matrix_of(sigma))

    def rmatvec(self, x: np.ndarray) -> np.ndarray:
        """``Nᵀ x``: block ``k`` is ``U_B^(k)ᵀ X U_A^(k)``."""
        xm = unvec(x, self.n)
        return np.concatenate([vec(ub.T @ xm @ ua) for ua, ub in self.blocks])

    def dense(self) -> np.ndarray:
        return np.hstack([np.kron(ua, ub) for ua, ub in self.blocks])


def build_x_of_s(basis: NullSpaceBasis, s_blocks: Sequence[np.ndarray]) -> np.ndarray:
    """``X*(S) = U_B S U_Aᵀ`` for a block-diagonal ``S``."""
    return basis.matrix_of(basis.join(s_blocks))


def orthogonal_minimizer(sa: GroupedSpectrum, sb: GroupedSpectrum,
                         r_blocks: Sequence[np.ndarray], tol: float = 1e-8) -> np.ndarray:
    """``Q*(R) = U_B R U_Aᵀ``; requires every ``R^(k)`` to be orthogonal."""
    basis = NullSpaceBasis(sa, sb, tol)
    for k, r in enumerate(r_blocks):
        r = np.atleast_2d(np.asarray(r, dtype=float))
        if r.shape != (basis.mu[k], basis.mu[k]):
            raise ValueError(f"R block {k} has shape {r.shape}, expected {(basis.mu[k],) * 2}")
        if not np.allclose(r.T @ r, np.eye(r.shape[0]), atol=1e-9):
            raise ValueError(f"R block {k} is not orthogonal")
    return build_x_of_s(basis, r_blocks)


class Sign(enum.Enum):
    FORCED = "forced"
    FREE = "free"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class BlockSign:
    status: Sign
    sign: int = 0
    via: str = ""


@dataclass(frozen=True)
class SignConstraints:
    """Per-block outcome of the row/column-sum sign equations."""

    blocks: tuple[BlockSign, ...]

    @property
    def feasible(self) -> bool:
        return all(b.status is not Sign.INFEASIBLE for b in self.blocks)

    @property
    def all_forced(self) -> bool:
        return all(b.status is Sign.FORCED for b in self.blocks)

    def forced(self) -> dict[int, int]:
        return {k: b.sign for k, b in enumerate(self.blocks) if b.status is Sign.FORCED}

    def free(self) -> list[int]:
        return [k for k, b in enumerate(self.blocks) if b.status is Sign.FREE]

    def diagonal(self) -> list[int | None]:
        """Forced signs with ``None`` for free entries (distinct spectra only)."""
        return [b.sign if b.status is Sign.FORCED else None for b in self.blocks]


# Declaring a mismatch needs a wider margin than declaring a match.
_MISMATCH_FACTOR = 100.0


def sign_from_projections(wa: float, wb: float, tol: float) -> BlockSign:
    """Scalar case of ``S w_A = w_B`` and ``Sᵀ w_B = w_A``."""
    if abs(wa) <= tol and abs(wb) <= tol:
        return BlockSign(Sign.FREE)
    gap = abs(abs(wa) - abs(wb))
    if gap > _MISMATCH_FACTOR * tol * max(1.0, abs(wa)):
        return BlockSign(Sign.INFEASIBLE, via="projection")
    if gap > tol * max(1.0, abs(wa)) or min(abs(wa), abs(wb)) <= tol:
        # Too close to call; the equality rows of the LP still apply.
        return BlockSign(Sign.FREE)
    return BlockSign(Sign.FORCED, 1 if wa * wb > 0 else -1, via="projection")


def signs_from_projections(w_a, w_b, tol: float = 1e-8) -> SignConstraints:
    """Sign equations for a distinct spectrum given only the projections ``w``."""
    w_a, w_b = np.ravel(w_a), np.ravel(w_b)
    if w_a.size != w_b.size:
        raise ValueError("projection vectors differ in length")
    return SignConstraints(tuple(sign_from_projections(a, b, tol) for a, b in zip(w_a, w_b)))


def sign_from_entries(ua: np.ndarray, ub: np.ndarray, tol_entry: float = TOL_ENTRY) -> BlockSign:
    """Sign ``s`` with ``s·u_A`` and ``u_B`` sharing entries, if exactly one exists."""
    d_pos = multiset_distance(ua, ub)
    d_neg = multiset_distance(-ua, ub)
    wide = _MISMATCH_FACTOR * tol_entry
    if d_pos <= tol_entry and d_neg > wide:
        return BlockSign(Sign.FORCED, 1, via="entries")
    if d_neg <= tol_entry and d_pos > wide:
        return BlockSign(Sign.FORCED, -1, via="entries")
    if min(d_pos, d_neg) > wide:
        return BlockSign(Sign.INFEASIBLE, via="entries")
    return BlockSign(Sign.FREE)


def sign_equations(sa: GroupedSpectrum, sb: GroupedSpectrum,
                   tol: float = 1e-8, tol_entry: float = TOL_ENTRY) -> SignConstraints:
    """Classify every 1×1 block as forced, free or infeasible.

    Friendly pairs are settled by the projections onto the all-ones vector;
    unfriendly ones by matching entry multisets, which leaves ambiguous
    vectors free. Repeated-eigenvalue blocks are always free.
    """
    if not compare_spectra(sa, sb, tol).isospectral:
        raise NotIsospectralError("sign equations need isospectral graphs")
    scale = tol * np.sqrt(sa.n)
    out = []
    for k, m in enumerate(sa.mu):
        if m > 1:
            out.append(BlockSign(Sign.FREE))
            continue
        ua, ub = sa.blocks[k][:, 0], sb.blocks[k][:, 0]
        bs = sign_from_projections(float(sa.w[k][0]), float(sb.w[k][0]), scale)
        if bs.status is Sign.FREE:
            bs = sign_from_entries(ua, ub, tol_entry)
        out.append(bs)
    return SignConstraints(tuple(out))
