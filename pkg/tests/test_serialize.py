import json

import numpy as np
import pytest

from entanglecone.blocks import BlockComponent, BlockDecomposition, SeparableEnsemble
from entanglecone.classify import MapClassReport
from entanglecone.duality import (
    BipartiteState,
    HolevoForm,
    MatrixMap,
    holevo_to_map,
    kraus_to_map,
    maximally_entangled_matrix,
)
from entanglecone.errors import ParseError
from entanglecone.rng import derive_stream, gaussian_complex_matrix, random_density
from entanglecone.serialize import (
    decomposition_to_json,
    dumps,
    ensemble_to_json,
    map_from_json,
    map_report_to_json,
    map_to_json,
    matrix_from_json,
    matrix_to_json,
    search_result_to_json,
    state_document_from_json,
    state_report_to_json,
    state_to_json,
)
from entanglecone.states import SearchResult, StateReport, WitnessHit


def _json_cycle(doc):
    # Force a real text trip so float formatting is exercised, not just
    # the in-memory dict.
    return json.loads(dumps(doc))


def test_matrix_roundtrip_exact():
    stream = derive_stream(701, 0)
    for shape in ((1, 1), (2, 2), (3, 5), (4, 1)):
        x = gaussian_complex_matrix(stream, *shape)
        back = matrix_from_json(_json_cycle(matrix_to_json(x)))
        # repr formatting of doubles is lossless, so equality is exact.
        assert np.array_equal(back, x)


def test_matrix_vector_becomes_column():
    doc = matrix_to_json(np.array([1.0, 2.0 + 1j]))
    assert (doc["rows"], doc["cols"]) == (2, 1)
    back = matrix_from_json(doc)
    assert back.shape == (2, 1)
    assert back[1, 0] == 2.0 + 1j


@pytest.mark.parametrize(
    "doc",
    [
        [],
        {"rows": 2, "cols": 2},
        {"rows": 0, "cols": 1, "entries": []},
        {"rows": 2, "cols": 2, "entries": [[1.0, 0.0]] * 3},
        {"rows": 1, "cols": 1, "entries": [[1.0]]},
        {"rows": 1, "cols": 1, "entries": [["a", "b"]]},
        {"rows": "x", "cols": 1, "entries": []},
    ],
)
def test_matrix_from_json_rejects_malformed(doc):
    with pytest.raises(ParseError):
        matrix_from_json(doc)


def test_map_roundtrip_choi():
    c = maximally_entangled_matrix(2)
    f = MatrixMap(2, 2, c)
    doc = _json_cycle(map_to_json(f))
    assert doc["repr"] == "choi"
    g = map_from_json(doc)
    assert (g.dim_in, g.dim_out) == (2, 2)
    assert np.array_equal(g.choi, f.choi)


def test_map_roundtrip_kraus():
    stream = derive_stream(702, 0)
    ops = [gaussian_complex_matrix(stream, 3, 2) for _ in range(2)]
    f = kraus_to_map(ops)
    doc = _json_cycle(map_to_json(f))
    assert doc["repr"] == "kraus"
    g = map_from_json(doc)
    assert g.form == "kraus"
    # Operators roundtrip exactly, so the recomputed Choi matrix does too.
    assert np.array_equal(g.choi, f.choi)


def test_map_roundtrip_holevo():
    stream = derive_stream(703, 0)
    form = HolevoForm(
        tuple(
            (random_density(stream, 2), random_density(stream, 3))
            for _ in range(2)
        )
    )
    f = holevo_to_map(form)
    doc = _json_cycle(map_to_json(f))
    assert doc["repr"] == "holevo"
    g = map_from_json(doc)
    assert g.form == "holevo"
    assert np.array_equal(g.choi, f.choi)


def test_map_force_choi_flattens_repr():
    ops = [np.eye(2, dtype=complex)]
    f = kraus_to_map(ops)
    doc = map_to_json(f, force_choi=True)
    assert doc["repr"] == "choi"
    g = map_from_json(doc)
    assert np.array_equal(g.choi, f.choi)


def test_map_from_json_rejects_malformed():
    with pytest.raises(ParseError):
        map_from_json("not a dict")
    with pytest.raises(ParseError):
        map_from_json({"dim_in": 2, "dim_out": 2, "repr": "spectral"})
    with pytest.raises(ParseError):
        map_from_json({"dim_in": 2, "dim_out": 2, "repr": "choi"})
    eye = matrix_to_json(np.eye(2, dtype=complex))
    with pytest.raises(ParseError):
        # declared dims disagree with the 2x2 operator
        map_from_json({"dim_in": 3, "dim_out": 3, "repr": "kraus", "kraus": [eye]})
    with pytest.raises(ParseError):
        map_from_json({"dim_in": 2, "dim_out": 2, "repr": "kraus", "kraus": []})
    term = {"omega": eye, "b": eye}
    with pytest.raises(ParseError):
        map_from_json({"dim_in": 3, "dim_out": 2, "repr": "holevo", "holevo": [term]})
    with pytest.raises(ParseError):
        map_from_json({"dim_in": 2, "dim_out": 2, "repr": "holevo", "holevo": [{"omega": eye}]})


def test_state_roundtrip_density():
    s = BipartiteState((2, 2), maximally_entangled_matrix(2) / 2.0)
    doc = _json_cycle(state_to_json(s))
    back = state_document_from_json(doc)
    assert isinstance(back, BipartiteState)
    assert back.dims == (2, 2)
    assert np.array_equal(back.density, s.density)


def test_state_roundtrip_ensemble():
    stream = derive_stream(704, 0)
    terms = tuple(
        (w, random_density(stream, 2), random_density(stream, 2))
        for w in (0.3, 0.7)
    )
    ens = SeparableEnsemble(terms)
    doc = _json_cycle(ensemble_to_json(ens))
    back = state_document_from_json(doc)
    assert isinstance(back, SeparableEnsemble)
    assert back.dims == (2, 2)
    for (w0, a0, b0), (w1, a1, b1) in zip(ens.terms, back.terms):
        assert w0 == w1
        assert np.array_equal(a0, a1)
        assert np.array_equal(b0, b1)


def test_state_document_rejects_malformed():
    dens = matrix_to_json(np.eye(4, dtype=complex) / 4.0)
    with pytest.raises(ParseError):
        state_document_from_json([1, 2])
    with pytest.raises(ParseError):
        state_document_from_json({"repr": "density", "density": dens})
    with pytest.raises(ParseError):
        state_document_from_json({"dims": [2, 2], "repr": "density"})
    with pytest.raises(ParseError):
        state_document_from_json({"dims": [2, 2], "repr": "ensemble", "terms": []})
    with pytest.raises(ParseError):
        state_document_from_json({"dims": [2, 2], "repr": "vector", "density": dens})
    good_term = {
        "weight": 1.0,
        "a": matrix_to_json(np.diag([1.0, 0.0]).astype(complex)),
        "b": matrix_to_json(np.diag([1.0, 0.0]).astype(complex)),
    }
    with pytest.raises(ParseError):
        # 2x2 factors under declared dims (3, 3)
        state_document_from_json({"dims": [3, 3], "repr": "ensemble", "terms": [good_term]})


def test_density_repr_is_default():
    dens = matrix_to_json(np.eye(4, dtype=complex) / 4.0)
    back = state_document_from_json({"dims": [2, 2], "density": dens})
    assert isinstance(back, BipartiteState)


def test_dumps_is_canonical():
    a = {"beta": 1.0, "alpha": [1, 2], "nested": {"y": 0.5, "x": None}}
    b = {"nested": {"x": None, "y": 0.5}, "alpha": [1, 2], "beta": 1.0}
    assert dumps(a) == dumps(b)
    assert dumps(a) == dumps(json.loads(dumps(a)))


def test_dumps_rejects_nonfinite():
    with pytest.raises(ValueError):
        dumps({"v": float("nan")})


def _sample_state_report() -> StateReport:
    vec = np.array([1.0, 0.0, 0.0, 0.0], dtype=complex)
    return StateReport(
        dims=(2, 2),
        mass=1.0,
        ppt=False,
        ppt_witness=vec,
        ppt_min_eigenvalue=-0.5,
        entanglement="certified-entangled",
        certificate_name="transpose2",
        certificate_vector=vec,
        certificate_value=-0.5,
        hits=(WitnessHit("transpose2", -0.5, vec),),
        peres_crosscheck=True,
    )


def test_state_report_document_shape():
    doc = _json_cycle(state_report_to_json(_sample_state_report()))
    assert doc["entanglement"] == "certified-entangled"
    assert doc["hits"][0]["name"] == "transpose2"
    assert doc["ppt_witness"]["cols"] == 1
    assert doc["peres_crosscheck"] is True


def test_map_report_document_shape():
    report = MapClassReport(
        dim_in=2,
        dim_out=2,
        cp=True,
        cp_witness=None,
        copositive=False,
        copositive_witness=np.array([1.0, 0.0, 0.0, 1.0], dtype=complex),
        block_min=0.0,
        block_x=np.array([1.0, 0.0], dtype=complex),
        block_y=np.array([0.0, 1.0], dtype=complex),
        block_converged=True,
        positive_verdict="probably-positive",
        eb_verdict="inconclusive",
    )
    doc = _json_cycle(map_report_to_json(report))
    assert doc["cp"] is True
    assert doc["cp_witness"] is None
    assert doc["copositive_witness"]["rows"] == 4
    assert doc["eb_certificate"] is None
    assert doc["positive_verdict"] == "probably-positive"


def test_search_result_document_shape():
    s = BipartiteState((2, 2), np.eye(4, dtype=complex) / 4.0)
    r = SearchResult(
        state=s, violation=0.01, iterations=42, converged=True, seed=7,
        witness_name="choi3",
    )
    doc = _json_cycle(search_result_to_json(r))
    assert doc["witness"] == "choi3"
    assert doc["seed"] == 7
    back = state_document_from_json(doc["state"])
    assert isinstance(back, BipartiteState)
    assert np.array_equal(back.density, s.density)


def test_decomposition_document_shape():
    e = np.diag([1.0, 0.0]).astype(complex)
    s = BipartiteState((2, 2), np.diag([1.0, 0.0, 0.0, 0.0]).astype(complex))
    comp = BlockComponent(indices=(0,), e=e, f=e, weight=1.0, state=s)
    doc = _json_cycle(decomposition_to_json(BlockDecomposition((comp,), 0.0)))
    assert doc["components"][0]["indices"] == [0]
    assert doc["components"][0]["weight"] == 1.0
    assert doc["max_cross_overlap"] == 0.0


def test_to_text_flattening():
    from entanglecone.serialize import to_text

    doc = {
        "verdict": "ok",
        "value": -0.5,
        "vec": matrix_to_json(np.zeros((3, 1), dtype=complex)),
        "hits": [{"name": "w"}],
        "empty": [],
        "flags": [True, False],
    }
    text = to_text(doc)
    lines = dict(line.split(": ", 1) for line in text.splitlines())
    assert lines["verdict"] == "ok"
    assert lines["value"] == "-0.5"
    assert lines["vec"] == "matrix 3x1"
    assert lines["hits[0].name"] == "w"
    assert lines["empty"] == "[]"
    assert lines["flags"] == "[True, False]"
