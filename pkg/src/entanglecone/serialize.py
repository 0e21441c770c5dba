"""Canonical JSON encodings for matrices, maps, states and reports.

Matrices are row-major lists of [re, im] pairs. Serialization is
deterministic: sorted keys, fixed layout, and Python's shortest
round-trip float formatting, so identical values produce identical
bytes. Parsing raises ParseError on malformed documents and leaves
mathematical validation (PSD checks and so on) to the constructors.
"""
from __future__ import annotations

import json

import numpy as np

from .blocks import BlockDecomposition, SeparableEnsemble
from .classify import MapClassReport
from .duality import (
    BipartiteState,
    HolevoForm,
    MatrixMap,
    holevo_to_map,
    kraus_to_map,
)
from .errors import ParseError
from .states import SearchResult, StateReport


def matrix_to_json(x: np.ndarray) -> dict:
    a = np.asarray(x, dtype=np.complex128)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    rows, cols = a.shape
    entries = [
        [float(a[i, j].real), float(a[i, j].imag)]
        for i in range(rows)
        for j in range(cols)
    ]
    return {"rows": rows, "cols": cols, "entries": entries}


def matrix_from_json(obj) -> np.ndarray:
    if not isinstance(obj, dict):
        raise ParseError("matrix document must be an object")
    try:
        rows = int(obj["rows"])
        cols = int(obj["cols"])
        entries = obj["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"matrix document missing or invalid field: {exc}") from exc
    if rows < 1 or cols < 1:
        raise ParseError("matrix dimensions must be positive")
    if not isinstance(entries, list) or len(entries) != rows * cols:
        raise ParseError(
            f"matrix entries must hold {rows * cols} [re, im] pairs"
        )
    out = np.empty((rows, cols), dtype=np.complex128)
    for k, pair in enumerate(entries):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ParseError("matrix entries must be [re, im] pairs")
        try:
            out[k // cols, k % cols] = float(pair[0]) + 1j * float(pair[1])
        except (TypeError, ValueError) as exc:
            raise ParseError("matrix entries must be numeric") from exc
    return out


def map_to_json(f: MatrixMap, force_choi: bool = False) -> dict:
    doc = {"dim_in": f.dim_in, "dim_out": f.dim_out}
    if force_choi or f.form == "choi":
        doc["repr"] = "choi"
        doc["choi"] = matrix_to_json(f.choi)
    elif f.form == "kraus":
        doc["repr"] = "kraus"
        doc["kraus"] = [matrix_to_json(v) for v in f.kraus]
    else:
        doc["repr"] = "holevo"
        doc["holevo"] = holevo_terms_to_json(f.holevo)
    return doc


def holevo_terms_to_json(form: HolevoForm) -> list:
    return [
        {"omega": matrix_to_json(omega), "b": matrix_to_json(b)}
        for omega, b in form.terms
    ]


def holevo_terms_from_json(obj) -> HolevoForm:
    if not isinstance(obj, list) or not obj:
        raise ParseError("holevo payload must be a nonempty list of terms")
    terms = []
    for term in obj:
        if not isinstance(term, dict) or "omega" not in term or "b" not in term:
            raise ParseError("each holevo term needs 'omega' and 'b' matrices")
        terms.append((matrix_from_json(term["omega"]), matrix_from_json(term["b"])))
    return HolevoForm(tuple(terms))


def map_from_json(obj) -> MatrixMap:
    if not isinstance(obj, dict):
        raise ParseError("map document must be an object")
    try:
        n = int(obj["dim_in"])
        m = int(obj["dim_out"])
        repr_tag = obj["repr"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"map document missing or invalid field: {exc}") from exc
    if repr_tag == "choi":
        if "choi" not in obj:
            raise ParseError("choi repr requires a 'choi' matrix")
        return MatrixMap(n, m, matrix_from_json(obj["choi"]))
    if repr_tag == "kraus":
        ops = obj.get("kraus")
        if not isinstance(ops, list) or not ops:
            raise ParseError("kraus repr requires a nonempty 'kraus' list")
        f = kraus_to_map([matrix_from_json(v) for v in ops])
        if (f.dim_in, f.dim_out) != (n, m):
            raise ParseError("kraus operator shapes disagree with declared dims")
        return f
    if repr_tag == "holevo":
        form = holevo_terms_from_json(obj.get("holevo"))
        f = holevo_to_map(form)
        if (f.dim_in, f.dim_out) != (n, m):
            raise ParseError("holevo term shapes disagree with declared dims")
        return f
    raise ParseError(f"unknown map repr {repr_tag!r}")


def state_to_json(s: BipartiteState) -> dict:
    return {
        "dims": [s.dims[0], s.dims[1]],
        "repr": "density",
        "density": matrix_to_json(s.density),
    }


def ensemble_to_json(ens: SeparableEnsemble) -> dict:
    n, m = ens.dims
    return {
        "dims": [n, m],
        "repr": "ensemble",
        "terms": [
            {"weight": w, "a": matrix_to_json(a), "b": matrix_to_json(b)}
            for w, a, b in ens.terms
        ],
    }


def state_document_from_json(obj) -> BipartiteState | SeparableEnsemble:
    """Parse a state file: a density envelope or an ensemble envelope."""
    if not isinstance(obj, dict):
        raise ParseError("state document must be an object")
    try:
        dims = obj["dims"]
        n, m = int(dims[0]), int(dims[1])
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ParseError("state document needs dims [n, m]") from exc
    repr_tag = obj.get("repr", "density")
    if repr_tag == "density":
        if "density" not in obj:
            raise ParseError("density repr requires a 'density' matrix")
        return BipartiteState((n, m), matrix_from_json(obj["density"]))
    if repr_tag == "ensemble":
        raw_terms = obj.get("terms")
        if not isinstance(raw_terms, list) or not raw_terms:
            raise ParseError("ensemble repr requires a nonempty 'terms' list")
        terms = []
        for term in raw_terms:
            if not isinstance(term, dict):
                raise ParseError("ensemble terms must be objects")
            try:
                weight = float(term["weight"])
                a = matrix_from_json(term["a"])
                b = matrix_from_json(term["b"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(
                    "ensemble terms need 'weight', 'a' and 'b'"
                ) from exc
            terms.append((weight, a, b))
        ens = SeparableEnsemble(tuple(terms))
        if ens.dims != (n, m):
            raise ParseError("ensemble factor shapes disagree with declared dims")
        return ens
    raise ParseError(f"unknown state repr {repr_tag!r}")


def _vector_or_null(v: np.ndarray | None) -> dict | None:
    return None if v is None else matrix_to_json(np.asarray(v).reshape(-1, 1))


def map_report_to_json(r: MapClassReport) -> dict:
    return {
        "dim_in": r.dim_in,
        "dim_out": r.dim_out,
        "cp": r.cp,
        "cp_witness": _vector_or_null(r.cp_witness),
        "copositive": r.copositive,
        "copositive_witness": _vector_or_null(r.copositive_witness),
        "block_min": r.block_min,
        "block_x": _vector_or_null(r.block_x),
        "block_y": _vector_or_null(r.block_y),
        "block_converged": r.block_converged,
        "positive_verdict": r.positive_verdict,
        "eb_verdict": r.eb_verdict,
        "eb_certificate": (
            None if r.eb_certificate is None else holevo_terms_to_json(r.eb_certificate)
        ),
        "eb_witness_name": r.eb_witness_name,
    }


def state_report_to_json(r: StateReport) -> dict:
    return {
        "dims": [r.dims[0], r.dims[1]],
        "mass": r.mass,
        "ppt": r.ppt,
        "ppt_min_eigenvalue": r.ppt_min_eigenvalue,
        "ppt_witness": _vector_or_null(r.ppt_witness),
        "entanglement": r.entanglement,
        "certificate_name": r.certificate_name,
        "certificate_value": r.certificate_value,
        "certificate_vector": _vector_or_null(r.certificate_vector),
        "hits": [
            {
                "name": h.name,
                "eigenvalue": h.eigenvalue,
                "eigenvector": _vector_or_null(h.eigenvector),
            }
            for h in r.hits
        ],
        "peres_crosscheck": r.peres_crosscheck,
    }


def search_result_to_json(r: SearchResult) -> dict:
    return {
        "witness": r.witness_name,
        "violation": r.violation,
        "iterations": r.iterations,
        "converged": r.converged,
        "seed": r.seed,
        "state": state_to_json(r.state),
    }


def decomposition_to_json(d: BlockDecomposition) -> dict:
    return {
        "components": [
            {
                "indices": list(c.indices),
                "weight": c.weight,
                "e": matrix_to_json(c.e),
                "f": matrix_to_json(c.f),
                "state": state_to_json(c.state),
            }
            for c in d.components
        ],
        "max_cross_overlap": d.max_cross_overlap,
    }


def dumps(obj) -> str:
    """Canonical JSON text: sorted keys, two-space indent."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False)


def to_text(obj, prefix: str = "") -> str:
    """Flat key: value rendering carrying the same verdicts as the JSON.

    Matrices are summarized by shape; everything scalar is printed.
    """
    lines: list[str] = []

    def walk(node, path: str) -> None:
        if isinstance(node, dict):
            if set(node) == {"rows", "cols", "entries"}:
                lines.append(f"{path}: matrix {node['rows']}x{node['cols']}")
                return
            for key in sorted(node):
                walk(node[key], f"{path}.{key}" if path else key)
        elif isinstance(node, list):
            if node and all(not isinstance(v, (dict, list)) for v in node):
                lines.append(f"{path}: {node}")
            else:
                for i, v in enumerate(node):
                    walk(v, f"{path}[{i}]")
                if not node:
                    lines.append(f"{path}: []")
        else:
            lines.append(f"{path}: {node}")

    walk(obj, prefix)
    return "\n".join(lines)


def load_json_file(path: str):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc}") from exc
