"""State-side entanglement analyses.

The partial-transpose test is necessary for separability; the witness
battery applies positive maps to the second tensor factor and certifies
entanglement from any negative output eigenvalue; the search optimizer
hunts for states that pass the partial-transpose test yet are caught by
a nondecomposable witness, the interesting corner of the theory.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .classify import Budget, WitnessLibrary, default_witness_library, is_copositive, is_cp
from .duality import (
    BipartiteState,
    MatrixMap,
    apply_to_second,
    kraus_to_map,
    map_adjoint,
    map_from_state,
    maximally_entangled_matrix,
    post_transpose,
)
from .errors import DimensionError, NumericalError
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    frob,
    hermitian_part,
    is_psd,
    min_eigenpair,
    partial_transpose,
)
from .parallel import run_indexed
from .rng import SplitMix64, derive_stream, gaussian_complex_matrix

logger = logging.getLogger(__name__)

CERTIFIED_ENTANGLED = "certified-entangled"
CERTIFIED_SEPARABLE = "certified-separable"
INCONCLUSIVE = "inconclusive"

# Internal stream label for the random copositive cross-check maps.
_PPT_CROSSCHECK_SEED = 0x9D7C
# Number of pure products mixed into each search starting point.
_INIT_PRODUCT_TERMS = 4
_INIT_INTERIOR_WEIGHT = 0.1
_ASCENT_STEP = 0.1
_MAX_HALVINGS = 30
_PLATEAU_EXIT = 50
# Subgradient tails shrink geometrically without ever hitting zero, so a
# step only counts as progress above a threshold relative to the attained
# violation. The floor keeps stalled runs near zero from crawling forever.
_PLATEAU_RELATIVE = 1e-4
_PLATEAU_SCALE_FLOOR = 1e-3
_DYKSTRA_ITERATIONS = 500
_DYKSTRA_EXIT = 1e-8

SEARCH_BUDGET = Budget(restarts=16, iterations=200)


def ppt_check(
    s: BipartiteState,
    tol: Tolerances = DEFAULT_TOL,
    crosscheck_samples: int = 20,
) -> tuple[bool, np.ndarray | None]:
    """Partial-transpose test with two independent cross-checks.

    The verdict comes from the spectrum of the second-factor partial
    transpose. The first-factor partial transpose must give the same
    verdict (the two are transposes of each other), and when the
    verdict is positive, applying random copositive maps to the second
    factor must give PSD outputs. Either cross-check failing raises
    NumericalError, since both are theorems.
    """
    pt = partial_transpose(s.density, s.dims, "second")
    ok, witness = is_psd(pt, tol)

    pt_first = partial_transpose(s.density, s.dims, "first")
    ok_first, _ = is_psd(pt_first, tol)
    if ok != ok_first:
        raise NumericalError(
            "partial transposes on the two factors disagree about positivity"
        )

    if ok:
        m = s.dims[1]
        for k in range(crosscheck_samples):
            stream = derive_stream(_PPT_CROSSCHECK_SEED, k)
            ops = [gaussian_complex_matrix(stream, m, m) for _ in range(2)]
            copositive_map = post_transpose(kraus_to_map(ops))
            out = hermitian_part(apply_to_second(s.density, s.dims, copositive_map))
            out_ok, _ = is_psd(out, tol)
            if not out_ok:
                raise NumericalError(
                    "a random copositive map produced a negative output "
                    "on a state that passed the partial-transpose test"
                )
    return ok, witness


@dataclass(eq=False)
class WitnessHit:
    name: str
    eigenvalue: float
    eigenvector: np.ndarray


@dataclass(eq=False)
class StateReport:
    """Combined verdicts of the battery on one state."""

    dims: tuple[int, int]
    mass: float
    ppt: bool
    ppt_witness: np.ndarray | None
    ppt_min_eigenvalue: float
    entanglement: str
    certificate_name: str | None
    certificate_vector: np.ndarray | None
    certificate_value: float | None
    hits: tuple[WitnessHit, ...]
    peres_crosscheck: bool


def witness_battery(
    s: BipartiteState,
    lib: WitnessLibrary | None = None,
    tol: Tolerances = DEFAULT_TOL,
    separable_certificate: bool = False,
) -> StateReport:
    """Apply every library map to the second factor and collect verdicts.

    A separable certificate attached by the caller (states built from
    an explicit product ensemble) turns the verdict into
    certified-separable; such a state hitting any witness means a bug,
    not a result, and raises NumericalError.
    """
    n, m = s.dims
    lib = lib if lib is not None else default_witness_library(m)
    pt = partial_transpose(s.density, s.dims, "second")
    ppt_eig, _ = min_eigenpair(pt, tol)
    ppt, ppt_witness = ppt_check(s, tol)

    hits: list[WitnessHit] = []
    for name, psi in lib.entries:
        if psi.dim_in != m:
            logger.warning(
                "skipping witness %s: input dimension %d does not match "
                "second factor %d",
                name,
                psi.dim_in,
                m,
            )
            continue
        out = hermitian_part(apply_to_second(s.density, s.dims, psi))
        low, vec = min_eigenpair(out, tol)
        if low < -tol.psd_slack * max(1.0, frob(out)):
            hits.append(WitnessHit(name, float(low), vec))

    if separable_certificate and hits:
        raise NumericalError(
            "state with a separable certificate was detected by witness "
            f"{hits[0].name}; one of the two must be wrong"
        )

    if separable_certificate:
        verdict = CERTIFIED_SEPARABLE
        cert_name, cert_vec, cert_val = None, None, None
    elif hits:
        verdict = CERTIFIED_ENTANGLED
        cert_name = hits[0].name
        cert_vec = hits[0].eigenvector
        cert_val = hits[0].eigenvalue
    elif not ppt:
        # No library map of matching dimension caught it, but the
        # partial transpose itself did.
        verdict = CERTIFIED_ENTANGLED
        cert_name = "partial-transpose"
        cert_vec = ppt_witness
        cert_val = float(ppt_eig)
    else:
        verdict = INCONCLUSIVE
        cert_name, cert_vec, cert_val = None, None, None

    return StateReport(
        dims=s.dims,
        mass=s.mass,
        ppt=ppt,
        ppt_witness=ppt_witness,
        ppt_min_eigenvalue=float(ppt_eig),
        entanglement=verdict,
        certificate_name=cert_name,
        certificate_vector=cert_vec,
        certificate_value=cert_val,
        hits=tuple(hits),
        peres_crosscheck=peres_equivalence(s, tol),
    )


def witness_pairing(s: BipartiteState, f: MatrixMap) -> float:
    """The scalar pairing Tr(h C_phi).

    Nonnegative whenever h is separable and phi is a positive map; the
    detecting quantity for entanglement is the output eigenvalue, not
    this number.
    """
    n, m = s.dims
    if (f.dim_in, f.dim_out) != (n, m):
        raise DimensionError(
            f"map dims ({f.dim_in}, {f.dim_out}) do not match state dims {s.dims}"
        )
    return float(np.real(np.trace(s.density @ f.choi)))


def pairing_via_adjoint(s: BipartiteState, f: MatrixMap) -> float:
    """Same pairing computed as Tr((id (x) phi*)(h) P); cross-check route."""
    n = s.dims[0]
    moved = apply_to_second(s.density, s.dims, map_adjoint(f))
    return float(np.real(np.trace(moved @ maximally_entangled_matrix(n))))


def peres_equivalence(s: BipartiteState, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Agreement of the state-side and map-side positivity tests.

    The partial-transpose verdict on the state must match complete
    positivity plus copositivity of the dual map. Always true
    mathematically; a False return is a bug detector.
    """
    pt = partial_transpose(s.density, s.dims, "second")
    state_side, _ = is_psd(pt, tol)
    f = map_from_state(s)
    cp, _ = is_cp(f, tol)
    cop, _ = is_copositive(f, tol)
    return state_side == (cp and cop)


def random_product_mixture(
    stream: SplitMix64, n: int, m: int, terms: int
) -> np.ndarray:
    """Random convex mixture of pure product states, trace one."""
    h = np.zeros((n * m, n * m), dtype=np.complex128)
    weights = []
    pieces = []
    for _ in range(terms):
        weights.append(stream.next_float())
        x = stream.complex_unit_vector(n)
        y = stream.complex_unit_vector(m)
        pieces.append(np.kron(np.outer(x, x.conj()), np.outer(y, y.conj())))
    total = sum(weights)
    for w, piece in zip(weights, pieces):
        h += (w / total) * piece
    return h


def random_pure_mixture(stream: SplitMix64, d: int, terms: int) -> np.ndarray:
    """Random mixture of (generally entangled) pure states, trace one."""
    h = np.zeros((d, d), dtype=np.complex128)
    weights = [stream.next_float() for _ in range(terms)]
    total = sum(weights)
    for w in weights:
        v = stream.complex_unit_vector(d)
        h += (w / total) * np.outer(v, v.conj())
    return h


def _proj_psd(x: np.ndarray) -> np.ndarray:
    x = hermitian_part(x)
    w, v = np.linalg.eigh(x)
    return (v * np.maximum(w, 0.0)) @ v.conj().T


def _proj_pt_psd(x: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    pt = partial_transpose(x, dims, "second")
    return partial_transpose(_proj_psd(pt), dims, "second")


def _dykstra(x: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    """Project onto {PSD} intersect {PT-PSD} by Dykstra's algorithm.

    Plain alternating projections converge to some point of the
    intersection; Dykstra's correction terms make it the nearest one.
    """
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    for _ in range(_DYKSTRA_ITERATIONS):
        y = _proj_psd(x + p)
        p = x + p - y
        x_next = _proj_pt_psd(y + q, dims)
        q = y + q - x_next
        if frob(x_next - x) < _DYKSTRA_EXIT:
            return x_next
        x = x_next
    return x


@dataclass(eq=False)
class SearchResult:
    """Outcome of the PPT-entangled state search."""

    state: BipartiteState
    violation: float
    iterations: int
    converged: bool
    seed: int
    witness_name: str


@dataclass(eq=False)
class _RestartOutcome:
    violation: float
    h: np.ndarray
    converged: bool
    iterations: int
    restart: int


def _violation(
    h: np.ndarray, dims: tuple[int, int], witness: MatrixMap, tol: Tolerances
) -> tuple[float, np.ndarray]:
    out = hermitian_part(apply_to_second(h, dims, witness))
    low, vec = min_eigenpair(out, tol)
    return -float(low), vec


def search_ppt_entangled(
    witness: MatrixMap,
    budget: Budget = SEARCH_BUDGET,
    seed: int = 0,
    tol: Tolerances = DEFAULT_TOL,
    dim_first: int | None = None,
    witness_name: str = "witness",
) -> SearchResult:
    """Maximize the witness violation over the PPT spectrahedron.

    Projected subgradient ascent on violation(h) = -lambda_min of
    (id (x) witness)(h) over {h PSD, Tr h = 1, PT(h) PSD}. Each restart
    owns a PRNG stream derived from (seed, restart index); the winner
    is selected by (violation, restart index), so the result does not
    depend on scheduling. A decomposable witness makes success
    provably impossible; the ascent then stalls at zero and the caller
    sees a non-finding result rather than an error.
    """
    n = dim_first if dim_first is not None else witness.dim_in
    m = witness.dim_in
    dims = (n, m)
    adjoint = map_adjoint(witness)

    cp_now, _ = is_cp(witness, tol)
    cop_now, _ = is_copositive(witness, tol)
    if cp_now or cop_now:
        logger.warning(
            "witness %s is %s; every PPT state passes it and the search "
            "cannot succeed",
            witness_name,
            "completely positive" if cp_now else "copositive",
        )

    def fresh_start(stream: SplitMix64) -> np.ndarray:
        mixed = random_product_mixture(stream, n, m, _INIT_PRODUCT_TERMS)
        h = (1.0 - _INIT_INTERIOR_WEIGHT) * mixed
        h += _INIT_INTERIOR_WEIGHT * np.eye(n * m) / (n * m)
        h = _dykstra(h, dims)
        return h / np.real(np.trace(h))

    def one_restart(r: int) -> _RestartOutcome:
        stream = derive_stream(seed, r)
        h = fresh_start(stream)
        viol, vec = _violation(h, dims, witness, tol)
        best = viol
        plateau = 0
        converged = False
        iterations = 0
        for _ in range(budget.iterations):
            iterations += 1
            grad = -hermitian_part(
                apply_to_second(np.outer(vec, vec.conj()), (n, witness.dim_out), adjoint)
            )
            step = _ASCENT_STEP
            accepted = False
            for _ in range(_MAX_HALVINGS):
                cand = _dykstra(h + step * grad, dims)
                trace = float(np.real(np.trace(cand)))
                if trace < 1e-12:
                    # Projection collapsed; restart from a fresh point.
                    cand = fresh_start(stream)
                    trace = 1.0
                cand = cand / trace
                cand_viol, cand_vec = _violation(cand, dims, witness, tol)
                if cand_viol > viol:
                    h, viol, vec = cand, cand_viol, cand_vec
                    accepted = True
                    break
                step /= 2.0
            if not accepted:
                # No step length improves the objective: stationary.
                converged = True
                break
            if viol - best < _PLATEAU_RELATIVE * max(abs(viol), _PLATEAU_SCALE_FLOOR):
                plateau += 1
                if plateau >= _PLATEAU_EXIT:
                    converged = True
                    break
            else:
                plateau = 0
            best = max(best, viol)
        return _RestartOutcome(viol, h, converged, iterations, r)

    outcomes = run_indexed(one_restart, budget.restarts)
    winner = min(outcomes, key=lambda o: (-o.violation, o.restart))
    total_iterations = sum(o.iterations for o in outcomes)

    h = _polish_feasibility(winner.h, dims)
    violation, _ = _violation(h, dims, witness, tol)
    return SearchResult(
        state=BipartiteState(dims, h),
        violation=float(violation),
        iterations=total_iterations,
        converged=winner.converged,
        seed=seed,
        witness_name=witness_name,
    )


def _polish_feasibility(
    h: np.ndarray, dims: tuple[int, int], target: float = 1e-12, rounds: int = 200
) -> np.ndarray:
    """Alternating projections until both spectra clear the target slack.

    The ascent leaves iterates feasible only up to the Dykstra exit
    threshold; certificates deserve more headroom than that.
    """
    for _ in range(rounds):
        scale = max(1.0, frob(h))
        low_direct = np.linalg.eigvalsh(hermitian_part(h))[0]
        low_pt = np.linalg.eigvalsh(
            hermitian_part(partial_transpose(h, dims, "second"))
        )[0]
        if low_direct >= -target * scale and low_pt >= -target * scale:
            break
        h = _proj_pt_psd(_proj_psd(h), dims)
        h = h / np.real(np.trace(h))
    return h
