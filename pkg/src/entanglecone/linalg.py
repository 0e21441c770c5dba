"""Dense Hermitian linear algebra on small matrix algebras.

Conventions used everywhere in this package:

* matrices are complex numpy arrays indexed from zero,
* a bipartite operator on ``M_n (x) M_m`` lives on the Kronecker
  composite where basis vector ``(i, k)`` maps to row ``i * m + k``,
* eigenvalues are reported in descending order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, NumericalError

FIRST = "first"
SECOND = "second"


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by every analysis routine.

    psd_slack   slack below zero allowed for "positive semidefinite",
                scaled by max(1, Frobenius norm) of the operand.
    eig_offdiag Hermiticity deviation accepted by the eigensolver.
    convergence iteration and consistency-check threshold.
    """

    psd_slack: float = 1e-9
    eig_offdiag: float = 1e-12
    convergence: float = 1e-10

    def __post_init__(self) -> None:
        for name in ("psd_slack", "eig_offdiag", "convergence"):
            value = getattr(self, name)
            if not (0.0 < value <= 1e-3):
                raise DomainError(
                    f"tolerance {name}={value!r} must lie in (0, 1e-3]"
                )


DEFAULT_TOL = Tolerances()


def as_matrix(x, square: bool = True) -> np.ndarray:
    """Coerce to a finite complex 2-D array, validating shape."""
    a = np.asarray(x, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionError(f"expected a matrix, got ndim={a.ndim}")
    if square and a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if a.size and not np.all(np.isfinite(a)):
        raise DomainError("matrix contains non-finite entries")
    return a


def frob(x: np.ndarray) -> float:
    return float(np.linalg.norm(x))


def hermitian_part(x: np.ndarray) -> np.ndarray:
    return (x + x.conj().T) / 2.0


def hermitian_deviation(x: np.ndarray) -> float:
    return float(np.linalg.norm(x - x.conj().T))


def e_matrix(i: int, j: int, n: int) -> np.ndarray:
    """Matrix unit e_ij in M_n."""
    out = np.zeros((n, n), dtype=np.complex128)
    out[i, j] = 1.0
    return out


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(as_matrix(a, square=False), as_matrix(b, square=False))


def _check_bipartite(x: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    n, m = dims
    if n < 1 or m < 1:
        raise DimensionError(f"factor dimensions must be positive, got {dims}")
    a = as_matrix(x)
    if a.shape[0] != n * m:
        raise DimensionError(
            f"matrix of shape {a.shape} does not act on a {n}x{m} composite"
        )
    return a


def _side_axis(side: str) -> str:
    s = str(side).lower()
    if s not in (FIRST, SECOND):
        raise DomainError(f"side must be {FIRST!r} or {SECOND!r}, got {side!r}")
    return s


def partial_transpose(
    x: np.ndarray, dims: tuple[int, int], side: str = SECOND
) -> np.ndarray:
    """Transpose one tensor factor of an operator on M_n (x) M_m."""
    n, m = dims
    a = _check_bipartite(x, dims).reshape(n, m, n, m)
    if _side_axis(side) == SECOND:
        a = a.transpose(0, 3, 2, 1)
    else:
        a = a.transpose(2, 1, 0, 3)
    return a.reshape(n * m, n * m)


def partial_trace(
    x: np.ndarray, dims: tuple[int, int], side: str = FIRST
) -> np.ndarray:
    """Trace out one tensor factor, returning the reduced operator."""
    n, m = dims
    a = _check_bipartite(x, dims).reshape(n, m, n, m)
    if _side_axis(side) == FIRST:
        return np.einsum("ikil->kl", a)
    return np.einsum("ikjk->ij", a)


def hermitian_eigen(
    x: np.ndarray, tol: Tolerances = DEFAULT_TOL
) -> tuple[np.ndarray, np.ndarray]:
    """Full eigendecomposition of a Hermitian matrix.

    Returns ``(w, V)`` with eigenvalues ``w`` sorted descending and the
    matching unit eigenvectors in the columns of ``V``. Raises
    DomainError when the input is not Hermitian within tolerance and
    NumericalError when the residual check fails afterwards.
    """
    a = as_matrix(x)
    if hermitian_deviation(a) > tol.convergence * frob(a):
        raise DomainError("matrix is not Hermitian within tolerance")
    # Symmetrize to absorb roundoff before handing to the solver.
    h = hermitian_part(a)
    w, v = np.linalg.eigh(h)
    order = np.argsort(w)[::-1]
    w = w[order]
    v = v[:, order]
    residual = np.linalg.norm(h @ v - v * w)
    if residual > tol.convergence * max(1.0, frob(a)):
        raise NumericalError(
            f"eigendecomposition residual {residual:.3e} exceeds tolerance"
        )
    return w, v


def min_eigenpair(
    x: np.ndarray, tol: Tolerances = DEFAULT_TOL
) -> tuple[float, np.ndarray]:
    w, v = hermitian_eigen(x, tol)
    return float(w[-1]), v[:, -1]


def is_psd(
    x: np.ndarray, tol: Tolerances = DEFAULT_TOL
) -> tuple[bool, np.ndarray | None]:
    """Positive-semidefiniteness test with a witness on failure.

    Returns ``(True, None)`` when the least eigenvalue clears
    ``-psd_slack * max(1, ||x||_F)``, otherwise ``(False, v)`` where the
    unit vector ``v`` satisfies ``<v, x v> < 0`` beyond slack.
    """
    a = as_matrix(x)
    lo, vec = min_eigenpair(a, tol)
    if lo >= -tol.psd_slack * max(1.0, frob(a)):
        return True, None
    return False, vec


def support_projection(
    x: np.ndarray, tol: Tolerances = DEFAULT_TOL
) -> np.ndarray:
    """Orthogonal projection onto the range of a PSD matrix.

    Eigenvalues at or below the slack threshold count as zero, so the
    support of a numerically tiny perturbation of ``p`` is ``p`` again.
    """
    a = as_matrix(x)
    ok, _ = is_psd(a, tol)
    if not ok:
        raise DomainError("support projection requires a PSD matrix")
    w, v = hermitian_eigen(a, tol)
    cut = tol.psd_slack * max(1.0, frob(a))
    keep = v[:, w > cut]
    return keep @ keep.conj().T


def projections_orthogonal(
    p: np.ndarray, q: np.ndarray, tol: Tolerances = DEFAULT_TOL
) -> bool:
    """Whether two projections have orthogonal ranges, ||p q|| ~ 0."""
    return float(np.linalg.norm(as_matrix(p) @ as_matrix(q))) <= tol.psd_slack * max(
        1.0, frob(p) * frob(q)
    )
