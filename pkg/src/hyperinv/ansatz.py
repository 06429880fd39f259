"""Parameterized tensor families for the {7,3} and {5,4} networks.

Every vertex tensor A and edge matrix B is assembled from small
two-qubit building blocks: a doubly unitary Y, a doubly unitary R and
a singly unitary Q, each carrying explicit angle parameters. The
assembled pairs are rescaled once so the isometry constants of the
`constraints` module equal 1; downstream superoperators then have
leading eigenvalue 1 and fixed points of unit trace.

All blocks share a checkerboard sparsity pattern: entries vanish
unless the total bit-parity of the fine indices is even, which gives
every assembled tensor a global Z2 grading.

Conventions fixed here and relied on everywhere else:
  - a fat {7,3} leg of dim 16 is (tail pair of one Y, head pair of
    the next Y), in that order;
  - helicity reversal therefore swaps the two dim-4 halves of each
    fat leg in addition to reversing leg order;
  - the {5,4} vertex pairs opposite legs, A[n,e,s,w] = Q[n,s] Q[e,w];
  - 4-leg blocks are "R-form" when unitary across (ij)|(kl) and
    (il)|(jk), "standard form" when the second split is (ik)|(jl).
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__

__all__ = [
    "AnsatzError",
    "AnsatzParams",
    "TensorPair",
    "make_Y",
    "make_R",
    "make_Q",
    "assemble_73",
    "assemble_54",
    "compose_doubly_unitary",
    "perfect_tensor_A",
    "parity_violation",
    "random_params",
    "save_pair",
    "load_pair",
]

FAMILIES = ("{7,3}", "{5,4}")
_MAGIC = b"HINV"
_FORMAT_VERSION = 1


class AnsatzError(ValueError):
    """Invalid parameters or a construction that fails its own checks."""


@dataclass(frozen=True)
class AnsatzParams:
    """Angles and dimensions defining one tensor pair.

    {7,3} takes five angles (Y, R, and three for Q); {5,4} takes four
    (R, and three for Q). chi_fine is fixed at 2 in this version; use
    compose_doubly_unitary to build larger blocks explicitly.
    """

    family: str
    thetas: tuple
    chi_fine: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise AnsatzError(f"unknown family {self.family!r}")
        if self.chi_fine != 2:
            raise AnsatzError("only chi_fine = 2 is supported")
        thetas = tuple(float(t) for t in self.thetas)
        if not all(np.isfinite(thetas)):
            raise AnsatzError("angles must be finite reals")
        want = 5 if self.family == "{7,3}" else 4
        if len(thetas) != want:
            raise AnsatzError(
                f"{self.family} needs {want} angles, got {len(thetas)}")
        object.__setattr__(self, "thetas", thetas)

    @property
    def chi(self) -> int:
        if self.family == "{7,3}":
            return self.chi_fine ** 4
        return self.chi_fine ** 2


@dataclass(frozen=True)
class TensorPair:
    """Assembled vertex tensor A and edge matrix B for one family."""

    A: np.ndarray
    B: np.ndarray
    family: str
    params: AnsatzParams = field(default=None, compare=False)

    @property
    def chi(self) -> int:
        return self.B.shape[0]


def random_params(family: str, seed: int) -> AnsatzParams:
    """Draw a uniform angle vector in [0, 2pi) for the family."""
    rng = np.random.default_rng(seed)
    n = 5 if family == "{7,3}" else 4
    return AnsatzParams(family, tuple(rng.uniform(0.0, 2.0 * np.pi, n)),
                        seed=seed)


# ---------------------------------------------------------------------------
# building blocks

def make_Y(theta1: float) -> np.ndarray:
    """Doubly unitary 4-leg block, legs (i,j,k,l) of dim 2.

    Unitary across (ij)|(kl) and (ik)|(jl), and reflection symmetric
    Y_ijkl = Y_klij. The corner entry is -cos(theta1): with the
    symmetric sparsity pattern, row orthogonality forces the sign.
    """
    c, s = np.cos(theta1), np.sin(theta1)
    m = np.array([
        [c, 0, 0, s],
        [0, s, 1j * c, 0],
        [0, 1j * c, s, 0],
        [s, 0, 0, -c],
    ], dtype=complex)
    return m.reshape(2, 2, 2, 2)


def make_R(theta2: float) -> np.ndarray:
    """Doubly unitary 4-leg block in R-form, legs dim 2.

    Unitary across (ij)|(kl) and (il)|(jk); bisymmetric, i.e.
    R_ijkl = R_klij and R_ijkl = R_jilk. R(0) is the identity.
    """
    c, s = np.cos(theta2), np.sin(theta2)
    m = np.array([
        [c, 0, 0, 1j * s],
        [0, c, 1j * s, 0],
        [0, 1j * s, c, 0],
        [1j * s, 0, 0, c],
    ], dtype=complex)
    return m.reshape(2, 2, 2, 2)


def make_Q(theta3: float, theta4: float, theta5: float) -> np.ndarray:
    """Singly unitary 4-leg block, legs dim 2.

    Unitary across (ij)|(kl) only; bisymmetric like make_R. The
    vertical splits are generically non-unitary.
    """
    c3, s3 = np.cos(theta3), np.sin(theta3)
    c5, s5 = np.cos(theta5), np.sin(theta5)
    e = np.exp(1j * theta4)
    m = np.array([
        [c3, 0, 0, s3 * e],
        [0, c5, 1j * s5, 0],
        [0, 1j * s5, c5, 0],
        [s3 * e, 0, 0, -c3 * e * e],
    ], dtype=complex)
    return m.reshape(2, 2, 2, 2)


# ---------------------------------------------------------------------------
# assembly

def assemble_73(p: AnsatzParams) -> TensorPair:
    """Vertex tensor from three Y blocks, edge matrix from Q and R.

    A[l0, l1, l2] with each fat leg (tail pair of Y_m, head pair of
    Y_{m+1}); the cyclic wiring makes leg rotation an exact symmetry.
    B = kron(Q, R) on the (Q pair, R pair) fine splitting. Scaled so
    both isometry constants are 1.
    """
    if p.family != "{7,3}":
        raise AnsatzError("assemble_73 needs a {7,3} parameter set")
    t = p.thetas
    P = make_Y(t[0])
    A = 8.0 * np.einsum("abcd,efgh,ijkl->cdefghijklab", P, P, P).reshape(16, 16, 16)
    Q = make_Q(t[2], t[3], t[4]).reshape(4, 4)
    R = make_R(t[1]).reshape(4, 4)
    B = np.kron(Q, R) / 4.0
    _construction_check(A, B)
    return TensorPair(A=A, B=B, family=p.family, params=p)


def assemble_54(p: AnsatzParams) -> TensorPair:
    """Vertex tensor from two Q blocks on opposite leg pairs, edge
    matrix from R. Scaled so both isometry constants are 1.

    A[n, e, s, w] = 4 Q[n, s] Q[e, w]; bisymmetry of Q makes A both
    cyclic and reversal invariant.
    """
    if p.family != "{5,4}":
        raise AnsatzError("assemble_54 needs a {5,4} parameter set")
    t = p.thetas
    Q = make_Q(t[1], t[2], t[3]).reshape(4, 4)
    A = 4.0 * np.einsum("ns,ew->nesw", Q, Q)
    B = make_R(t[0]).reshape(4, 4) / 2.0
    _construction_check(A, B)
    return TensorPair(A=A, B=B, family=p.family, params=p)


def _construction_check(A: np.ndarray, B: np.ndarray, tol: float = 1e-12):
    """Cheap structural gate run on every assembly."""
    q = A.ndim
    rot = tuple(range(1, q)) + (0,)
    cyc = float(np.abs(A - np.transpose(A, rot)).max())
    sym = float(np.abs(B - B.T).max())
    if cyc > tol or sym > tol:
        raise AnsatzError(
            f"assembled pair fails structural checks "
            f"(cyclic {cyc:.2e}, symmetric {sym:.2e}): wiring error")


# ---------------------------------------------------------------------------
# larger blocks and special solutions

def _split_residual(t: np.ndarray, rows: tuple) -> float:
    perm = list(rows) + [a for a in range(4) if a not in rows]
    d = t.shape[0]
    m = np.transpose(t, perm).reshape(d * d, d * d)
    return float(np.abs(m.conj().T @ m - np.eye(d * d)).max())


def _standardize(t: np.ndarray, tol: float) -> np.ndarray:
    """Move a doubly unitary block to standard form, or raise."""
    if t.ndim != 4 or len(set(t.shape)) != 1:
        raise AnsatzError("inputs must be 4-leg tensors with equal leg dims")
    if _split_residual(t, (0, 1)) > tol:
        raise AnsatzError("input is not unitary across the (ij)|(kl) split")
    if _split_residual(t, (0, 2)) <= tol:
        return t
    if _split_residual(t, (0, 3)) <= tol:
        return np.transpose(t, (0, 1, 3, 2))
    raise AnsatzError("input is not unitary across any second split")


def compose_doubly_unitary(r1, r2, r3, r4, tol: float = 1e-10) -> np.ndarray:
    """Combine four doubly unitary blocks into one of squared leg dim.

    The four blocks form a two-row brick pattern on four wires with
    periodic offset; pairs of wires group into fat legs. Inputs may
    present their second unitary split as either (ik)|(jl) or
    (il)|(jk); the output is returned in R-form, so composing four
    identity blocks yields the identity and outputs can seed further
    composition rounds.
    """
    blocks = [_standardize(np.asarray(t, dtype=complex), tol)
              for t in (r1, r2, r3, r4)]
    chi = blocks[0].shape[0]
    if any(b.shape[0] != chi for b in blocks):
        raise AnsatzError("all four blocks must share one leg dimension")
    C = np.einsum("abwx,cdyz,xyqr,zwsp->abcdpqrs", *blocks, optimize=True)
    n = chi * chi
    return C.reshape(n, n, n, n).transpose(0, 1, 3, 2)


def perfect_tensor_A(dim: int = 3) -> np.ndarray:
    """4-leg tensor isometric across every balanced leg bipartition.

    Linear construction over Z_dim: entry 1 at (i, j, i+j, i+2j) mod
    dim. Requires the defining 2x2 coefficient matrix to be invertible
    in every pairing, which holds for dim 3. With B = identity this
    tensor satisfies both {5,4} isometry constraints (constant 3).
    """
    if dim != 3:
        raise AnsatzError(f"no supported construction for dim {dim}")
    T = np.zeros((dim,) * 4, dtype=complex)
    for i in range(dim):
        for j in range(dim):
            T[i, j, (i + j) % dim, (i + 2 * j) % dim] = 1.0
    return T


def parity_violation(t: np.ndarray) -> float:
    """Max |entry| where the total fine-index bit parity is odd.

    Each leg dimension must be a power of two; a leg value's parity is
    the popcount of its binary form, so fat legs grade consistently
    with their fine factors.
    """
    t = np.asarray(t)
    pars = []
    for d in t.shape:
        if d & (d - 1):
            raise AnsatzError(f"leg dim {d} is not a power of two")
        pars.append(np.array([bin(v).count("1") % 2 for v in range(d)]))
    total = np.zeros((), dtype=int)
    for ax, par in enumerate(pars):
        shape = [1] * t.ndim
        shape[ax] = t.shape[ax]
        total = total + par.reshape(shape)
    odd = (total % 2).astype(bool)
    if not odd.any():
        return 0.0
    return float(np.abs(t[odd]).max())


# ---------------------------------------------------------------------------
# persistence

_FAMILY_CODE = {"{7,3}": 0, "{5,4}": 1}
_FAMILY_NAME = {v: k for k, v in _FAMILY_CODE.items()}


def save_pair(pair: TensorPair, path) -> dict:
    """Write a tensor pair to a binary container plus JSON manifest.

    Layout: magic, format version, family code, chi, chi_fine, A leg
    count, angle count, angles as little-endian float64, then A and B
    entries as little-endian complex128 in row-major order. The
    manifest (same path with '.json' appended) records the header
    fields and a SHA-256 of the payload; it carries no timestamps so
    identical inputs produce identical bytes.
    """
    path = Path(path)
    p = pair.params
    thetas = p.thetas if p is not None else ()
    chi_fine = p.chi_fine if p is not None else 2
    seed = p.seed if p is not None else 0
    header = struct.pack(
        "<4sIIIIII", _MAGIC, _FORMAT_VERSION, _FAMILY_CODE[pair.family],
        pair.chi, chi_fine, pair.A.ndim, len(thetas))
    body = (np.asarray(thetas, dtype="<f8").tobytes()
            + np.ascontiguousarray(pair.A, dtype="<c16").tobytes()
            + np.ascontiguousarray(pair.B, dtype="<c16").tobytes())
    blob = header + body
    path.write_bytes(blob)
    manifest = {
        "format_version": _FORMAT_VERSION,
        "family": pair.family,
        "chi": pair.chi,
        "chi_fine": chi_fine,
        "legs": pair.A.ndim,
        "thetas": [float(t) for t in thetas],
        "seed": int(seed),
        "sha256": hashlib.sha256(blob).hexdigest(),
        "tool_version": __version__,
    }
    Path(str(path) + ".json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return manifest


def load_pair(path) -> TensorPair:
    """Read a tensor pair written by save_pair."""
    blob = Path(path).read_bytes()
    head = struct.calcsize("<4sIIIIII")
    magic, ver, fam, chi, chi_fine, legs, ntheta = struct.unpack(
        "<4sIIIIII", blob[:head])
    if magic != _MAGIC:
        raise AnsatzError("not a tensor pair container")
    if ver != _FORMAT_VERSION:
        raise AnsatzError(f"unsupported format version {ver}")
    family = _FAMILY_NAME.get(fam)
    if family is None:
        raise AnsatzError(f"unknown family code {fam}")
    off = head
    thetas = np.frombuffer(blob, dtype="<f8", count=ntheta, offset=off)
    off += ntheta * 8
    na = chi ** legs
    A = np.frombuffer(blob, dtype="<c16", count=na, offset=off)
    off += na * 16
    B = np.frombuffer(blob, dtype="<c16", count=chi * chi, offset=off)
    params = None
    want = 5 if family == "{7,3}" else 4
    if ntheta == want and chi_fine == 2:
        params = AnsatzParams(family, tuple(thetas), chi_fine=chi_fine)
    return TensorPair(
        A=A.reshape((chi,) * legs).copy(),
        B=B.reshape(chi, chi).copy(),
        family=family,
        params=params,
    )
