"""Block structure of separable ensembles and abelian-range analyses.

A separable ensemble splits into components whose factor supports are
mutually orthogonal; the split is found by union-find over pairwise
support overlaps. The definite set of a map (self-adjoint a with
phi(a^2) = phi(a)^2) drives the splitting identities, and unital
idempotent maps are separable-versus-entangled decidable through
commutativity of their range.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .duality import (
    BipartiteState,
    HolevoForm,
    MatrixMap,
    apply_map,
    holevo_to_map,
    map_adjoint,
    state_from_map,
)
from .errors import DimensionError, DomainError, NumericalError
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    as_matrix,
    e_matrix,
    frob,
    hermitian_deviation,
    hermitian_eigen,
    hermitian_part,
    is_psd,
    kron,
    support_projection,
)
from .rng import derive_stream, random_hermitian

logger = logging.getLogger(__name__)

# Trace of a product of projections is near an integer; anything above
# this is a genuine overlap, anything below is orthogonality.
_OVERLAP_THRESHOLD = 1e-8
# Eigenvalue clusters are split at gaps larger than this fraction of
# the spectral spread.
_CLUSTER_GAP = 1e-8
_DIAG_SEED = 0xD1A6
_SPLIT_SEED = 0x4B10C5

VERDICT_SEPARABLE = "separable"
VERDICT_ENTANGLED = "entangled"


@dataclass(eq=False)
class SeparableEnsemble:
    """Convex combination sum_i w_i a_i (x) b_i of product densities."""

    terms: tuple[tuple[float, np.ndarray, np.ndarray], ...]

    def __post_init__(self) -> None:
        if not self.terms:
            raise DomainError("ensemble needs at least one term")
        checked = []
        n = m = None
        total = 0.0
        for weight, a, b in self.terms:
            weight = float(weight)
            if weight <= 0.0:
                raise DomainError("ensemble weights must be positive")
            a = as_matrix(a)
            b = as_matrix(b)
            n = n or a.shape[0]
            m = m or b.shape[0]
            if a.shape[0] != n or b.shape[0] != m:
                raise DimensionError("inconsistent factor dimensions in ensemble")
            for factor, label in ((a, "a"), (b, "b")):
                ok, _ = is_psd(factor)
                if not ok:
                    raise DomainError(f"ensemble factor {label} is not PSD")
                if abs(np.real(np.trace(factor)) - 1.0) > 1e-9:
                    raise DomainError(f"ensemble factor {label} must have trace one")
            total += weight
            checked.append((weight, a, b))
        if abs(total - 1.0) > 1e-9:
            raise DomainError(f"ensemble weights sum to {total!r}, expected 1")
        self.terms = tuple(checked)

    @property
    def dims(self) -> tuple[int, int]:
        return (self.terms[0][1].shape[0], self.terms[0][2].shape[0])

    def to_state(self) -> BipartiteState:
        n, m = self.dims
        density = np.zeros((n * m, n * m), dtype=np.complex128)
        for weight, a, b in self.terms:
            density += weight * kron(a, b)
        return BipartiteState(self.dims, density)

    def to_holevo(self) -> HolevoForm:
        """The Holevo-form map whose dual functional is this ensemble.

        The pairing Tr(phi(a) b^t) puts a transpose on the output side,
        so the terms carry b^t; state_from_map of the result reproduces
        to_state() exactly.
        """
        return HolevoForm(tuple((w * a, b.T.copy()) for w, a, b in self.terms))


@dataclass(eq=False)
class BlockComponent:
    indices: tuple[int, ...]
    e: np.ndarray
    f: np.ndarray
    weight: float
    state: BipartiteState


@dataclass(eq=False)
class BlockDecomposition:
    components: tuple[BlockComponent, ...]
    max_cross_overlap: float


class _UnionFind:
    """Disjoint sets over range(n); roots are the smallest members."""

    def __init__(self, n: int) -> None:
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return
        if rj < ri:
            ri, rj = rj, ri
        self.parent[rj] = ri


def is_definite_element(
    f: MatrixMap, a: np.ndarray, tol: Tolerances = DEFAULT_TOL
) -> bool:
    """Whether phi(a^2) = phi(a)^2 within tolerance."""
    a = as_matrix(a)
    if hermitian_deviation(a) > tol.convergence * max(1.0, frob(a)):
        raise DomainError("definite-set membership is defined for Hermitian inputs")
    fa = apply_map(f, a)
    fa2 = apply_map(f, a @ a)
    return frob(fa2 - fa @ fa) <= tol.convergence * max(1.0, frob(fa) ** 2)


def _is_projection(p: np.ndarray, tol: Tolerances) -> bool:
    scale = max(1.0, frob(p))
    return (
        hermitian_deviation(p) <= tol.psd_slack * scale
        and frob(p @ p - p) <= tol.psd_slack * max(1.0, scale * scale)
    )


def split_by_projection(
    f: MatrixMap,
    e: np.ndarray,
    samples: int = 20,
    seed: int = 0,
    tol: Tolerances = DEFAULT_TOL,
) -> bool:
    """Whether the map splits across e and 1 - e.

    Checks, on random Hermitian inputs x, the two splitting identities

        phi(x) = phi(exe) + phi(fxf)
        phi(x) = phi(e) phi(x) phi(e) + phi(f) phi(x) phi(f)

    with f = 1 - e, plus that phi(e) and phi(f) are orthogonal
    projections. Requires e to be a projection in the definite set;
    membership alone does not force the split, so a False return is a
    meaningful answer, not an error.
    """
    e = as_matrix(e)
    if e.shape != (f.dim_in, f.dim_in):
        raise DimensionError("projection size does not match map input")
    if not _is_projection(e, tol):
        raise DomainError("splitting requires a projection")
    if not is_definite_element(f, e, tol):
        raise DomainError("projection is not in the definite set of the map")

    fc = np.eye(f.dim_in) - e
    pe = apply_map(f, e)
    pf = apply_map(f, fc)
    check_tol = 1e-9
    if not (_is_projection(pe, tol) and _is_projection(pf, tol)):
        return False
    if frob(pe @ pf) > check_tol * max(1.0, frob(pe) * frob(pf)):
        return False

    stream = derive_stream(_SPLIT_SEED ^ seed, 0)
    for _ in range(samples):
        x = random_hermitian(stream, f.dim_in)
        fx = apply_map(f, x)
        split_inputs = apply_map(f, e @ x @ e) + apply_map(f, fc @ x @ fc)
        split_outputs = pe @ fx @ pe + pf @ fx @ pf
        bound = check_tol * max(1.0, frob(fx))
        if frob(fx - split_inputs) > bound or frob(fx - split_outputs) > bound:
            return False
    return True


def decompose_separable(
    ens: SeparableEnsemble, tol: Tolerances = DEFAULT_TOL
) -> BlockDecomposition:
    """Split an ensemble into components with orthogonal factor supports.

    Terms are related when their supports overlap on either factor;
    connected components of that relation are the blocks. The result is
    validated in place: support containment, weighted reconstruction of
    the original state, and the splitting identity
    omega_i(e) omega_j(1-e) Tr(b_i b_j) = 0 across each block boundary.
    """
    k = len(ens.terms)
    supports_a = [support_projection(a, tol) for _, a, _ in ens.terms]
    supports_b = [support_projection(b, tol) for _, _, b in ens.terms]

    uf = _UnionFind(k)
    for i in range(k):
        for j in range(i + 1, k):
            overlap_a = float(np.real(np.trace(supports_a[i] @ supports_a[j])))
            overlap_b = float(np.real(np.trace(supports_b[i] @ supports_b[j])))
            if overlap_a > _OVERLAP_THRESHOLD or overlap_b > _OVERLAP_THRESHOLD:
                uf.union(i, j)

    groups: dict[int, list[int]] = {}
    for i in range(k):
        groups.setdefault(uf.find(i), []).append(i)

    n, m = ens.dims
    components = []
    for root in sorted(groups):
        indices = tuple(sorted(groups[root]))
        weight = sum(ens.terms[i][0] for i in indices)
        sum_a = np.zeros((n, n), dtype=np.complex128)
        sum_b = np.zeros((m, m), dtype=np.complex128)
        density = np.zeros((n * m, n * m), dtype=np.complex128)
        for i in indices:
            w, a, b = ens.terms[i]
            sum_a += a
            sum_b += b
            density += (w / weight) * kron(a, b)
        e_c = support_projection(sum_a, tol)
        f_c = support_projection(sum_b, tol)
        for i in indices:
            _, a, b = ens.terms[i]
            if frob(e_c @ a - a) > 1e-8 or frob(f_c @ b - b) > 1e-8:
                raise NumericalError(
                    "component support does not contain one of its terms"
                )
        components.append(
            BlockComponent(indices, e_c, f_c, weight, BipartiteState((n, m), density))
        )

    max_cross = 0.0
    for s in range(len(components)):
        for t in range(s + 1, len(components)):
            max_cross = max(
                max_cross,
                frob(components[s].e @ components[t].e),
                frob(components[s].f @ components[t].f),
            )

    reconstructed = np.zeros((n * m, n * m), dtype=np.complex128)
    for comp in components:
        reconstructed += comp.weight * comp.state.density
    original = ens.to_state().density
    if frob(reconstructed - original) > 1e-9 * max(1.0, frob(original)):
        raise NumericalError("weighted components do not reconstruct the state")

    _validate_splitting_identity(ens, components)
    return BlockDecomposition(tuple(components), max_cross)


def _validate_splitting_identity(
    ens: SeparableEnsemble, components: list[BlockComponent]
) -> None:
    """The boundary identity omega_i(e) omega_j(1-e) Tr(b_i b_j) ~ 0.

    This is the consequence of the splitting theorem that the
    construction actually guarantees; it must hold for every component
    projection against every pair of terms.
    """
    n = ens.dims[0]
    eye = np.eye(n)
    for comp in components:
        e_c = comp.e
        for _, ai, bi in ens.terms:
            omega_i_e = float(np.real(np.trace(ai @ e_c)))
            for _, aj, bj in ens.terms:
                omega_j_f = float(np.real(np.trace(aj @ (eye - e_c))))
                cross = float(np.real(np.trace(bi @ bj)))
                if abs(omega_i_e * omega_j_f * cross) > 1e-9:
                    raise NumericalError(
                        "splitting identity violated across a block boundary"
                    )


def hermitian_basis(n: int) -> list[np.ndarray]:
    """Standard Hermitian basis of M_n: diagonal units, symmetric and
    antisymmetric pair combinations."""
    basis = [e_matrix(i, i, n) for i in range(n)]
    root_half = 1.0 / np.sqrt(2.0)
    for i in range(n):
        for j in range(i + 1, n):
            basis.append(root_half * (e_matrix(i, j, n) + e_matrix(j, i, n)))
            basis.append(root_half * 1j * (e_matrix(i, j, n) - e_matrix(j, i, n)))
    return basis


@dataclass(eq=False)
class NotAbelian:
    """Evidence that a map's range fails to commute."""

    pair: tuple[int, int]
    commutator_norm: float


def _refine_clusters(
    blocks: list[np.ndarray], images: list[np.ndarray], rng_index: int, depth: int
) -> list[np.ndarray]:
    """Split cluster bases until every image compresses to a scalar."""
    if depth > 12:
        raise NumericalError(
            "simultaneous diagonalization failed to refine a degenerate cluster"
        )
    out: list[np.ndarray] = []
    for block in blocks:
        d = block.shape[1]
        if d == 1:
            out.append(block)
            continue
        compressions = [block.conj().T @ g @ block for g in images]
        scalar = True
        for comp in compressions:
            mean = np.trace(comp) / d
            if frob(comp - mean * np.eye(d)) > 1e-8 * max(1.0, frob(comp)):
                scalar = False
                break
        if scalar:
            out.append(block)
            continue
        stream = derive_stream(_DIAG_SEED, rng_index + depth)
        coeffs = stream.gaussian_vector(len(compressions))
        combo = hermitian_part(
            sum(c * comp for c, comp in zip(coeffs, compressions))
        )
        w, v = hermitian_eigen(combo)
        sub_blocks = [block @ v[:, idx] for idx in _cluster_indices(w)]
        out.extend(
            _refine_clusters(sub_blocks, images, rng_index + 1, depth + 1)
        )
    return out


def _cluster_indices(w: np.ndarray) -> list[np.ndarray]:
    """Group sorted eigenvalues into clusters separated by spectral gaps."""
    spread = float(w[0] - w[-1])
    if spread <= 1e-12 * max(1.0, abs(float(w[0]))):
        return [np.arange(len(w))]
    threshold = _CLUSTER_GAP * spread
    clusters = []
    start = 0
    for i in range(1, len(w)):
        if w[i - 1] - w[i] > threshold:
            clusters.append(np.arange(start, i))
            start = i
    clusters.append(np.arange(start, len(w)))
    return clusters


def abelian_range_decompose(
    f: MatrixMap, tol: Tolerances = DEFAULT_TOL
) -> HolevoForm | NotAbelian:
    """Spectral resolution of a map whose range is commutative.

    The images of a Hermitian basis either all commute, in which case a
    generic real combination is diagonalized and its eigenvalue
    clusters (refined recursively where degenerate) yield common
    spectral projections p_r, giving phi(x) = sum_r omega_r(x) p_r; or
    some pair fails to commute and that pair is returned as evidence.
    """
    n, m = f.dim_in, f.dim_out
    basis = hermitian_basis(n)
    images = [hermitian_part(apply_map(f, h)) for h in basis]

    for k in range(len(images)):
        for l in range(k + 1, len(images)):
            comm = images[k] @ images[l] - images[l] @ images[k]
            norm = frob(comm)
            if norm > tol.convergence * max(1.0, frob(images[k]) * frob(images[l])):
                return NotAbelian((k, l), norm)

    stream = derive_stream(_DIAG_SEED, 0)
    coeffs = stream.gaussian_vector(len(images))
    combo = hermitian_part(sum(c * g for c, g in zip(coeffs, images)))
    w, v = hermitian_eigen(combo, tol)
    blocks = [v[:, idx] for idx in _cluster_indices(w)]
    blocks = _refine_clusters(blocks, images, 1, 0)

    adjoint = map_adjoint(f)
    terms = []
    for block in blocks:
        p = block @ block.conj().T
        rank = float(np.real(np.trace(p)))
        sigma = hermitian_part(apply_map(adjoint, p)) / rank
        if frob(sigma) <= tol.psd_slack:
            continue
        terms.append((sigma, p))
    form = HolevoForm(tuple(terms))

    check_stream = derive_stream(_DIAG_SEED, 999)
    for _ in range(5):
        x = random_hermitian(check_stream, n)
        fx = apply_map(f, x)
        rebuilt = np.zeros((m, m), dtype=np.complex128)
        for sigma, p in form.terms:
            rebuilt += np.real(np.trace(sigma @ x)) * p
        if frob(fx - rebuilt) > 1e-9 * max(1.0, frob(fx)):
            raise NumericalError(
                "spectral resolution does not reproduce the map within tolerance"
            )
    return form


@dataclass(eq=False)
class ExpectationReport:
    """Separability verdict for a unital idempotent map."""

    verdict: str
    certificate: HolevoForm | None
    commutator: NotAbelian | None
    state_report: object | None


def conditional_expectation_verdict(
    f: MatrixMap, tol: Tolerances = DEFAULT_TOL
) -> ExpectationReport:
    """Decide separability of a conditional expectation's functional.

    The functional is separable exactly when the range is abelian; the
    abelian branch returns the explicit Holevo certificate, the
    non-abelian branch cross-checks that the map's state really is
    detected as entangled, failing loudly if not.
    """
    if f.dim_in != f.dim_out:
        raise DomainError("a conditional expectation maps an algebra to itself")
    n = f.dim_in
    eye = np.eye(n)
    if frob(apply_map(f, eye) - eye) > tol.convergence * max(1.0, float(n)):
        raise DomainError("map is not unital")
    for h in hermitian_basis(n):
        fh = apply_map(f, h)
        if frob(apply_map(f, fh) - fh) > tol.convergence * max(1.0, frob(fh)):
            raise DomainError("map is not idempotent")

    outcome = abelian_range_decompose(f, tol)
    if isinstance(outcome, HolevoForm):
        rebuilt = holevo_to_map(outcome)
        if frob(rebuilt.choi - f.choi) > 1e-9 * max(1.0, frob(f.choi)):
            raise NumericalError("separability certificate fails to rebuild the map")
        return ExpectationReport(VERDICT_SEPARABLE, outcome, None, None)

    from .states import witness_battery

    state = state_from_map(f, tol)
    report = witness_battery(state, tol=tol)
    if report.ppt and report.entanglement != "certified-entangled":
        raise NumericalError(
            "non-abelian range but the map's state evaded every witness"
        )
    return ExpectationReport(VERDICT_ENTANGLED, None, outcome, report)
