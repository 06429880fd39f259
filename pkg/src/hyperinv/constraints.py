"""Symmetry and multi-tensor isometry checks on assembled pairs.

Four named checks: cyclic invariance of A, symmetry of B, and the two
multi-tensor isometries w (one vertex, all but one leg dressed) and u
(a chain of vertices with dressed bonds and dressed lower legs). The
isometries hold up to a multiplicative constant; each check fits that
constant and reports the max-norm deviation from c*I, so tolerances
are dimension independent.

w and u wirings per family:
  {7,3}  w: B on legs 0,1 of A, leg 2 free (1 out, 2 in);
         u: A-B-A-B-A chain, middle vertex oriented with its dressed
            leg between the bonds, three dressed lower legs (3 in),
            outer legs out (2 out).
  {5,4}  w: B on legs 1,2,3, leg 0 free (1 out, 3 in);
         u: two vertices joined by one dressed bond adjacent to both
            up legs, four dressed lower legs (4 in, 2 out).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConstraintError",
    "ConstraintReport",
    "DEFAULT_TOL",
    "check_cyclic",
    "check_symmetric",
    "check_w",
    "check_u",
    "run_all",
]

DEFAULT_TOL = 1e-10
FAMILIES = ("{7,3}", "{5,4}")


class ConstraintError(ValueError):
    """Malformed input to a constraint check."""


@dataclass(frozen=True)
class ConstraintReport:
    """Outcome of one named check."""

    name: str
    residual: float
    constant: float
    passed: bool
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "residual": self.residual,
            "constant": self.constant,
            "passed": self.passed,
            "tolerance": self.tolerance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _report(name: str, residual: float, constant: float,
            tol: float) -> ConstraintReport:
    residual = float(residual)
    return ConstraintReport(name=name, residual=residual,
                            constant=float(constant),
                            passed=residual <= tol, tolerance=float(tol))


def check_cyclic(A: np.ndarray, tol: float = 1e-12) -> ConstraintReport:
    """Max deviation of A from one generator rotation of its legs."""
    A = np.asarray(A)
    if len(set(A.shape)) != 1:
        raise ConstraintError(f"legs must share one dimension, got {A.shape}")
    rot = tuple(range(1, A.ndim)) + (0,)
    res = np.abs(A - np.transpose(A, rot)).max()
    return _report("cyclic", res, 1.0, tol)


def check_symmetric(B: np.ndarray, tol: float = 1e-12) -> ConstraintReport:
    """Max deviation of B from its plain (unconjugated) transpose."""
    B = np.asarray(B)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ConstraintError(f"B must be square, got shape {B.shape}")
    res = np.abs(B - B.T).max()
    return _report("symmetric", res, 1.0, tol)


def _validate_family(A: np.ndarray, B: np.ndarray, family: str):
    if family not in FAMILIES:
        raise ConstraintError(f"unknown family {family!r}")
    legs = 3 if family == "{7,3}" else 4
    if A.ndim != legs:
        raise ConstraintError(f"{family} vertex tensor needs {legs} legs")
    chi = A.shape[0]
    if any(d != chi for d in A.shape) or B.shape != (chi, chi):
        raise ConstraintError("leg dimension mismatch between A and B")


def check_w(A: np.ndarray, B: np.ndarray, family: str,
            tol: float = DEFAULT_TOL) -> ConstraintReport:
    """Single-vertex isometry: M = w'w on the free leg vs c*I.

    Every rotation of the free-leg choice is evaluated; the reported
    residual is the worst one, so a pass certifies leg independence.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    _validate_family(A, B, family)
    chi = A.shape[0]
    worst = 0.0
    constant = None
    for k in range(A.ndim):
        Ak = np.transpose(A, tuple((k + i) % A.ndim for i in range(A.ndim)))
        if family == "{7,3}":
            w = np.einsum("ae,bf,efc->abc", B, B, Ak)
            M = np.einsum("abc,abd->cd", w.conj(), w)
        else:
            w = np.einsum("be,cf,dg,aefg->abcd", B, B, B, Ak)
            M = np.einsum("abcd,Abcd->aA", w.conj(), w)
        c = np.trace(M) / chi
        if constant is None:
            constant = c.real
        worst = max(worst, float(np.abs(M - c * np.eye(chi)).max()))
    return _report("w", worst, constant, tol)


def check_u(A: np.ndarray, B: np.ndarray, family: str,
            tol: float = DEFAULT_TOL) -> ConstraintReport:
    """Multi-vertex isometry: M = u'u on the out legs vs c*I."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    _validate_family(A, B, family)
    chi = A.shape[0]
    if family == "{7,3}":
        u = np.einsum("xia,am,mjn,no,yok,pi,qj,rk->pqrxy",
                      A, B, A, B, A, B, B, B, optimize=True)
        M = np.einsum("pqrxy,pqrXY->xyXY", u.conj(), u,
                      optimize=True).reshape(chi * chi, chi * chi)
    else:
        u = np.einsum("xija,ab,bykl,pi,qj,rk,sl->pqrsxy",
                      A, B, A, B, B, B, B, optimize=True)
        M = np.einsum("pqrsxy,pqrsXY->xyXY", u.conj(), u,
                      optimize=True).reshape(chi * chi, chi * chi)
    c = np.trace(M) / (chi * chi)
    res = np.abs(M - c * np.eye(chi * chi)).max()
    return _report("u", res, c.real, tol)


def run_all(A: np.ndarray, B: np.ndarray, family: str,
            tol: float = DEFAULT_TOL,
            structural_tol: float = 1e-12) -> list:
    """All four checks in order cyclic, symmetric, w, u."""
    return [
        check_cyclic(A, structural_tol),
        check_symmetric(B, structural_tol),
        check_w(A, B, family, tol),
        check_u(A, B, family, tol),
    ]
