"""Dense complex tensor algebra and eigensolvers.

Thin, explicit layer over numpy: labeled dense tensors, pairwise
contraction, leg regrouping, Hermitian eigendecomposition and an
Arnoldi solver for implicit non-Hermitian maps. Everything is complex
double precision; tolerances are arguments with conservative defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "DenseTensor",
    "LinearMapHandle",
    "ContractionError",
    "ConvergenceError",
    "contract",
    "permute_reshape",
    "hermitian_eigs",
    "leading_eigs",
    "unitarity_residual",
]


class ContractionError(ValueError):
    """Leg mismatch or malformed pairing in a contraction."""


class ConvergenceError(RuntimeError):
    """Iterative eigensolver failed to reach the requested residual."""


def _as_labels(n: int) -> tuple:
    return tuple(range(n))


@dataclass(frozen=True)
class DenseTensor:
    """Immutable labeled tensor, row-major complex entries.

    legs are opaque hashable labels, unique within one tensor. An
    omitted label list defaults to positional integers.
    """

    data: np.ndarray
    legs: tuple = field(default=None)

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.data, dtype=complex))
        object.__setattr__(self, "data", arr)
        legs = self.legs if self.legs is not None else _as_labels(arr.ndim)
        legs = tuple(legs)
        if len(legs) != arr.ndim:
            raise ValueError(f"{len(legs)} labels for {arr.ndim} legs")
        if len(set(legs)) != len(legs):
            raise ValueError(f"duplicate leg labels in {legs!r}")
        object.__setattr__(self, "legs", legs)
        arr.setflags(write=False)

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def entries(self) -> np.ndarray:
        """Entries flattened in row-major order."""
        return self.data.reshape(-1)

    def conj(self) -> "DenseTensor":
        return DenseTensor(self.data.conj(), self.legs)

    def axis(self, leg) -> int:
        try:
            return self.legs.index(leg)
        except ValueError:
            raise ContractionError(f"no leg {leg!r} on tensor with legs {self.legs!r}") from None

    def relabel(self, legs: Sequence) -> "DenseTensor":
        return DenseTensor(self.data, tuple(legs))


def contract(a: DenseTensor, b: DenseTensor, pairs: Sequence[tuple]) -> DenseTensor:
    """Contract a with b over the given (leg-of-a, leg-of-b) pairs.

    Result legs are the unpaired legs of a, then of b, in their
    original order. Pairing the same leg twice is an error, as is a
    dimension mismatch (reported with both leg labels).
    """
    pairs = list(pairs)
    la = [p[0] for p in pairs]
    lb = [p[1] for p in pairs]
    if len(set(la)) != len(la) or len(set(lb)) != len(lb):
        raise ContractionError(f"repeated leg in pairs {pairs!r}")
    ax_a = [a.axis(x) for x in la]
    ax_b = [b.axis(x) for x in lb]
    for x, y, i, j in zip(la, lb, ax_a, ax_b):
        if a.shape[i] != b.shape[j]:
            raise ContractionError(
                f"dimension mismatch contracting leg {x!r} (dim {a.shape[i]}) "
                f"with leg {y!r} (dim {b.shape[j]})"
            )
    out = np.tensordot(a.data, b.data, axes=(ax_a, ax_b))
    keep_a = [l for l in a.legs if l not in set(la)]
    keep_b = [l for l in b.legs if l not in set(lb)]
    legs = keep_a + keep_b
    # tensordot orders free axes of a then b, each in original order
    if len(set(legs)) != len(legs):
        legs = [("a", l) for l in keep_a] + [("b", l) for l in keep_b]
    return DenseTensor(out, tuple(legs))


def permute_reshape(t: DenseTensor, new_leg_order: Sequence, groupings: Sequence[Sequence[int]]) -> DenseTensor:
    """Reorder legs, then fuse groups of adjacent positions.

    new_leg_order is a permutation given either as leg labels or as
    axis indices. groupings partitions the positions 0..n-1 after the
    permutation; each group fuses into one leg whose label is the
    tuple of member labels and whose dimension is the product.
    """
    n = t.data.ndim
    if len(new_leg_order) != n:
        raise ValueError(f"permutation of length {len(new_leg_order)} for {n} legs")
    if all(isinstance(x, (int, np.integer)) and not isinstance(x, bool) for x in new_leg_order) \
            and sorted(new_leg_order) == list(range(n)):
        perm = [int(x) for x in new_leg_order]
    else:
        perm = [t.axis(x) for x in new_leg_order]
    if sorted(perm) != list(range(n)):
        raise ValueError(f"not a permutation: {new_leg_order!r}")
    arr = np.transpose(t.data, perm)
    labels = [t.legs[i] for i in perm]
    seen = sorted(x for g in groupings for x in g)
    if seen != list(range(n)):
        raise ValueError(f"groupings {groupings!r} do not partition 0..{n - 1}")
    for g in groupings:
        if list(g) != list(range(min(g), min(g) + len(g))):
            raise ValueError(f"group {g!r} is not a contiguous run after permutation")
    shape = []
    legs = []
    for g in groupings:
        dim = 1
        for i in g:
            dim *= arr.shape[i]
        shape.append(dim)
        legs.append(labels[g[0]] if len(g) == 1 else tuple(labels[i] for i in g))
    order = sorted(range(len(groupings)), key=lambda k: groupings[k][0])
    shape = [shape[k] for k in order]
    legs = [legs[k] for k in order]
    return DenseTensor(np.ascontiguousarray(arr).reshape(shape), tuple(legs))


def hermitian_eigs(m, tol: float = 1e-10):
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Accepts a DenseTensor with two legs or a square ndarray. Inputs
    whose anti-Hermitian part exceeds tol are rejected.
    """
    arr = m.data if isinstance(m, DenseTensor) else np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    asym = np.max(np.abs(arr - arr.conj().T))
    if asym > tol:
        raise ValueError(f"matrix is not Hermitian: asymmetry {asym:.3e} exceeds {tol:.1e}")
    vals, vecs = np.linalg.eigh((arr + arr.conj().T) / 2)
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


@dataclass
class LinearMapHandle:
    """Implicit linear operator on complex vectors of a fixed dimension."""

    dim: int
    apply: Callable[[np.ndarray], np.ndarray]
    is_hermitian: bool = False

    def linearity_residual(self, seed: int = 0, probes: int = 3) -> float:
        """Max deviation of apply from linearity on random probe pairs."""
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(probes):
            x = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
            y = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
            al = complex(rng.standard_normal(), rng.standard_normal())
            be = complex(rng.standard_normal(), rng.standard_normal())
            lhs = self.apply(al * x + be * y)
            rhs = al * self.apply(x) + be * self.apply(y)
            dev = np.linalg.norm(lhs - rhs) / (np.linalg.norm(x) + np.linalg.norm(y))
            worst = max(worst, float(dev))
        return worst

    def densify(self) -> np.ndarray:
        """Explicit matrix, one apply per basis vector. For small dims only."""
        cols = []
        e = np.zeros(self.dim, dtype=complex)
        for i in range(self.dim):
            e[:] = 0
            e[i] = 1
            cols.append(self.apply(e))
        return np.array(cols).T


def _sort_by_modulus(vals: np.ndarray) -> np.ndarray:
    order = np.lexsort((-vals.imag, -vals.real, -np.abs(vals)))
    return vals[order]


def leading_eigs(op: LinearMapHandle, k: int, tol: float = 1e-8,
                 max_iter: int = 300, seed: int = 7,
                 return_vectors: bool = False):
    """Leading eigenvalues of an implicit map, by modulus, via Arnoldi.

    A lucky breakdown (invariant subspace) restarts with a fresh
    orthogonal vector so degenerate eigenvalues are still found with
    their multiplicity. Residuals ||op(v) - lambda v|| <= tol*|lambda|
    are verified on the Ritz vectors; failure raises ConvergenceError
    with the best residual seen.
    """
    n = op.dim
    if k > n:
        raise ValueError(f"requested {k} eigenvalues of a dim-{n} map")
    m_max = min(n, max(max_iter, 2 * k + 10))
    rng = np.random.default_rng(seed)
    V = np.zeros((n, m_max + 1), dtype=complex)
    H = np.zeros((m_max + 1, m_max), dtype=complex)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    V[:, 0] = v / np.linalg.norm(v)
    best_res = np.inf
    j = 0
    while j < m_max:
        w = op.apply(V[:, j])
        for i in range(j + 1):  # modified Gram-Schmidt
            h = V[:, i].conj() @ w
            H[i, j] = h
            w = w - h * V[:, i]
        for i in range(j + 1):  # re-orthogonalization pass
            c = V[:, i].conj() @ w
            H[i, j] += c
            w = w - c * V[:, i]
        hnext = np.linalg.norm(w)
        if hnext > 1e-12:
            H[j + 1, j] = hnext
            V[:, j + 1] = w / hnext
        else:
            # invariant subspace; continue in a fresh orthogonal direction
            if j + 1 >= max(k, 1) and _arnoldi_converged(op, V, H, j + 1, k, tol)[0]:
                j += 1
                break
            v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            for i in range(j + 1):
                v = v - (V[:, i].conj() @ v) * V[:, i]
            nv = np.linalg.norm(v)
            if nv < 1e-12:
                j += 1
                break  # whole space exhausted
            H[j + 1, j] = 0
            V[:, j + 1] = v / nv
        j += 1
        if j >= k and (j % 5 == 0 or j == m_max):
            ok, res = _arnoldi_converged(op, V, H, j, k, tol)
            best_res = min(best_res, res)
            if ok:
                break
    m = j
    vals, vecs, res = _ritz(op, V, H, m, k)
    best_res = min(best_res, res)
    if res > tol * max(np.max(np.abs(vals)), 1e-300):
        raise ConvergenceError(
            f"Arnoldi did not converge: best residual {best_res:.3e} "
            f"after {m} iterations (tol {tol:.1e})"
        )
    if return_vectors:
        return list(vals), vecs
    return list(vals)


def _ritz(op, V, H, m, k):
    """Top-k Ritz pairs from an m-step Arnoldi factorization."""
    Hm = H[:m, :m]
    vals, ys = np.linalg.eig(Hm)
    order = np.lexsort((-vals.imag, -vals.real, -np.abs(vals)))
    vals = vals[order][:k]
    ys = ys[:, order][:, :k]
    vecs = V[:, :m] @ ys
    worst = 0.0
    for i in range(vals.size):
        v = vecs[:, i]
        nv = np.linalg.norm(v)
        if nv == 0:
            worst = np.inf
            continue
        v = v / nv
        vecs[:, i] = v
        r = np.linalg.norm(op.apply(v) - vals[i] * v)
        worst = max(worst, r / max(abs(vals[i]), 1e-300))
    return vals, vecs, worst


def _arnoldi_converged(op, V, H, m, k, tol):
    vals, _, worst = _ritz(op, V, H, m, k)
    scale = max(np.max(np.abs(vals)) if vals.size else 0.0, 1e-300)
    return worst <= tol, worst * scale


def unitarity_residual(t: DenseTensor, in_legs: Sequence) -> float:
    """Max-norm deviation of t from an isometry with in_legs as rows.

    Reshapes t to a matrix M with the in_legs fused as the row index
    and returns ||M^dag M - I||_max over the column space. Zero iff t
    is an exact isometry from the remaining legs into the in_legs.
    """
    in_legs = list(in_legs)
    rows = [t.axis(l) for l in in_legs]
    cols = [i for i in range(t.data.ndim) if i not in rows]
    dr = int(np.prod([t.shape[i] for i in rows], initial=1))
    dc = int(np.prod([t.shape[i] for i in cols], initial=1))
    if dr < dc:
        raise ValueError(f"in_legs dimension {dr} smaller than remaining {dc}: wrong isometry direction")
    M = np.transpose(t.data, rows + cols).reshape(dr, dc)
    g = M.conj().T @ M
    return float(np.max(np.abs(g - np.eye(dc))))
