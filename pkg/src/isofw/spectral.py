"""Grouped eigendecomposition and eigenvector classification.

Eigenvalues are grouped by chained gaps, each group gets an orthonormal
eigenvector block, and single eigenvectors are labelled friendly (not
orthogonal to the all-ones vector) and/or ambiguous (entry multiset invariant
under negation).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .graphs import WeightedGraph

TOL_GROUP = 1e-8
TOL_FRIENDLY = 1e-8
TOL_ENTRY = 1e-8


class EigensolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class GroupedSpectrum:
    """Unique eigenvalues (decreasing), multiplicities and eigenvector blocks.

    ``w[k]`` is ``blocks[k].T @ 1``. ``friendly`` and ``ambiguous`` hold one
    boolean array per block, one flag per column.
    """

    lam: np.ndarray
    mu: np.ndarray
    blocks: tuple[np.ndarray, ...]
    w: tuple[np.ndarray, ...]
    friendly: tuple[np.ndarray, ...]
    ambiguous: tuple[np.ndarray, ...]

    @property
    def n(self) -> int:
        return int(self.mu.sum())

    @property
    def m(self) -> int:
        return int(self.lam.size)

    @property
    def distinct(self) -> bool:
        """All eigenvalues simple."""
        return bool(np.all(self.mu == 1))

    def eigenvectors(self) -> np.ndarray:
        return np.hstack(self.blocks)

    def is_friendly_graph(self) -> bool:
        return self.distinct and all(bool(f.all()) for f in self.friendly)

    def reconstruct(self) -> np.ndarray:
        return sum(lam * u @ u.T for lam, u in zip(self.lam, self.blocks))


@dataclass(frozen=True)
class SpectrumComparison:
    isospectral: bool
    matched_multiplicities: bool
    max_eigenvalue_gap: float


def group_eigenvalues(vals: np.ndarray, tol: float) -> list[np.ndarray]:
    """Split decreasing ``vals`` into runs whose consecutive gaps are ``<= tol``."""
    groups = [[0]]
    for i in range(1, vals.size):
        if vals[i - 1] - vals[i] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return [np.array(g) for g in groups]


def _align_to_ones(u: np.ndarray) -> np.ndarray:
    """Rotate a block so that only its first column can have non-zero sum."""
    w = u.sum(axis=0)
    norm = np.linalg.norm(w)
    if u.shape[1] == 1 or norm == 0.0:
        return u
    # Householder reflection taking w to norm * e1.
    v = w.copy()
    v[0] += np.copysign(norm, w[0]) if w[0] != 0 else norm
    h = np.eye(w.size) - 2.0 * np.outer(v, v) / (v @ v)
    out = u @ h
    if out[:, 0].sum() < 0:
        out[:, 0] = -out[:, 0]
    return out


def multiset_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Max gap between sorted entries; zero iff some permutation maps ``u`` to ``v``."""
    return float(np.max(np.abs(np.sort(u) - np.sort(v))))


def classify_ambiguous(u: np.ndarray, tol_entry: float = TOL_ENTRY) -> bool:
    """True iff ``u`` and ``-u`` have the same entries up to ``tol_entry``."""
    u = np.asarray(u, dtype=float)
    return multiset_distance(u, -u) <= tol_entry


def canonical_sign(u: np.ndarray, tol_friendly: float = TOL_FRIENDLY,
                   tol_entry: float = TOL_ENTRY) -> int:
    """Sign ``s`` fixing a representative of ``±u``.

    Friendly vectors get a positive entry sum. Otherwise the sign making the
    decreasingly sorted entries lexicographically larger wins; ambiguous
    vectors keep ``+1``.
    """
    n = u.size
    total = u.sum()
    if abs(total) > tol_friendly * np.sqrt(n):
        return 1 if total > 0 else -1
    pos = np.sort(u)[::-1]
    neg = np.sort(-u)[::-1]
    diff = pos - neg
    idx = np.flatnonzero(np.abs(diff) > tol_entry)
    if idx.size == 0:
        return 1
    return 1 if diff[idx[0]] > 0 else -1


def decompose(g: WeightedGraph | np.ndarray, tol_group: float = TOL_GROUP,
              tol_friendly: float = TOL_FRIENDLY,
              tol_entry: float = TOL_ENTRY) -> GroupedSpectrum:
    a = g.adj if isinstance(g, WeightedGraph) else np.asarray(g, dtype=float)
    n = a.shape[0]
    try:
        vals, vecs = scipy.linalg.eigh(a)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigensolverError(f"symmetric eigensolver failed: {exc}") from exc
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    scale = max(1.0, float(np.max(np.abs(vals))))

    lam, mu, blocks, ws, friendly, ambiguous = [], [], [], [], [], []
    for idx in group_eigenvalues(vals, tol_group * scale):
        u, _ = np.linalg.qr(vecs[:, idx])
        u = _align_to_ones(u)
        if u.shape[1] == 1:
            u = canonical_sign(u[:, 0], tol_friendly, tol_entry) * u
        lam.append(float(vals[idx].mean()))
        mu.append(idx.size)
        blocks.append(u)
        w = u.sum(axis=0)
        ws.append(w)
        friendly.append(np.abs(w) > tol_friendly * np.sqrt(n))
        ambiguous.append(np.array([classify_ambiguous(u[:, c], tol_entry)
                                   for c in range(u.shape[1])]))
    return GroupedSpectrum(
        lam=np.array(lam), mu=np.array(mu, dtype=int), blocks=tuple(blocks),
        w=tuple(ws), friendly=tuple(friendly), ambiguous=tuple(ambiguous),
    )


def compare_spectra(sa: GroupedSpectrum, sb: GroupedSpectrum,
                    tol: float = TOL_GROUP) -> SpectrumComparison:
    if sa.m != sb.m or sa.n != sb.n:
        gap = float("inf")
        if sa.n == sb.n:
            ea = np.repeat(sa.lam, sa.mu)
            eb = np.repeat(sb.lam, sb.mu)
            gap = float(np.max(np.abs(ea - eb)))
        return SpectrumComparison(False, False, gap)
    matched = bool(np.array_equal(sa.mu, sb.mu))
    gap = float(np.max(np.abs(sa.lam - sb.lam)))
    scale = max(1.0, float(np.max(np.abs(sa.lam))), float(np.max(np.abs(sb.lam))))
    return SpectrumComparison(matched and gap <= tol * scale, matched, gap)


def count_unfriendly(s: GroupedSpectrum) -> int:
    return int(sum(np.count_nonzero(~f) for f in s.friendly))


def count_ambiguous(s: GroupedSpectrum) -> int:
    return int(sum(np.count_nonzero(a) for a in s.ambiguous))
