"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 parse error, 3 numerical or
domain error, 4 search finished without finding a state. Reports go to
stdout; logging and diagnostics go to stderr so stdout stays byte
deterministic for fixed inputs, seed and budget.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .blocks import SeparableEnsemble, decompose_separable
from .classify import Budget, builtin_map, classify_map
from .duality import BipartiteState, MatrixMap, pairing_value
from .errors import (
    DimensionError,
    DomainError,
    EntangleConeError,
    NumericalError,
    ParseError,
    SearchError,
)
from .linalg import DEFAULT_TOL, Tolerances
from .serialize import (
    decomposition_to_json,
    dumps,
    load_json_file,
    map_from_json,
    map_report_to_json,
    map_to_json,
    matrix_from_json,
    search_result_to_json,
    state_document_from_json,
    state_report_to_json,
    state_to_json,
    to_text,
)
from .states import SEARCH_BUDGET, search_ppt_entangled, witness_battery

FOUND_VIOLATION = 1e-3

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_NUMERICAL = 3
EXIT_NOT_FOUND = 4


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        raise _UsageError(message)


def _add_common(sub: argparse.ArgumentParser, budget: Budget) -> None:
    sub.add_argument("--seed", type=int, default=0, help="PRNG seed (default 0)")
    sub.add_argument(
        "--budget-restarts",
        type=int,
        default=budget.restarts,
        help=f"search restarts (default {budget.restarts})",
    )
    sub.add_argument(
        "--budget-iters",
        type=int,
        default=budget.iterations,
        help=f"iterations per restart (default {budget.iterations})",
    )
    sub.add_argument(
        "--tol-psd",
        type=float,
        default=DEFAULT_TOL.psd_slack,
        help="relative PSD slack (default 1e-9)",
    )
    sub.add_argument(
        "--format", choices=("json", "text"), default="json", help="output format"
    )
    sub.add_argument("--out", help="also write the result JSON to this file")


def build_parser() -> _Parser:
    parser = _Parser(
        prog="entanglecone",
        description="Positive maps, bipartite states and their entanglement verdicts.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    choi = commands.add_parser(
        "choi", help="canonicalize a map to its Choi representation"
    )
    choi.add_argument("map", help="map JSON file or builtin:<name>")
    _add_common(choi, Budget())

    classify = commands.add_parser(
        "classify-map", help="positivity and separability classification of a map"
    )
    classify.add_argument("map", help="map JSON file or builtin:<name>")
    _add_common(classify, Budget())

    analyze = commands.add_parser(
        "analyze-state", help="PPT test, witness battery and cross-checks for a state"
    )
    analyze.add_argument("state", help="state JSON file (density or ensemble repr)")
    analyze.add_argument(
        "--normalize", action="store_true", help="rescale the state to trace one"
    )
    _add_common(analyze, Budget())

    decompose = commands.add_parser(
        "decompose", help="orthogonal block decomposition of a separable ensemble"
    )
    decompose.add_argument("ensemble", help="state JSON file with ensemble repr")
    _add_common(decompose, Budget())

    search = commands.add_parser(
        "search-ppt-entangled",
        help="search for a PPT state detected by a named witness map",
    )
    search.add_argument("witness", help="builtin witness name, e.g. choi3")
    _add_common(search, SEARCH_BUDGET)

    pair = commands.add_parser(
        "pair", help="evaluate the duality pairing Tr(phi(a) b^T)"
    )
    pair.add_argument("map", help="map JSON file or builtin:<name>")
    pair.add_argument("a", help="matrix JSON file for the first factor")
    pair.add_argument("b", help="matrix JSON file for the second factor")
    _add_common(pair, Budget())

    return parser


def _resolve_map(source: str) -> MatrixMap:
    if source.startswith("builtin:"):
        name = source[len("builtin:"):]
        try:
            return builtin_map(name)
        except DomainError as exc:
            raise _UsageError(str(exc)) from exc
    return map_from_json(load_json_file(source))


def _tolerances(args) -> Tolerances:
    return Tolerances(psd_slack=args.tol_psd)


def _budget(args) -> Budget:
    return Budget(restarts=args.budget_restarts, iterations=args.budget_iters)


def _emit(doc: dict, args) -> None:
    if args.format == "text":
        print(to_text(doc))
    else:
        print(dumps(doc))
    if args.out and args.command != "search-ppt-entangled":
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(dumps(doc) + "\n")


def _cmd_choi(args) -> int:
    f = _resolve_map(args.map)
    _emit(map_to_json(f, force_choi=True), args)
    return EXIT_OK


def _cmd_classify(args) -> int:
    f = _resolve_map(args.map)
    report = classify_map(f, _budget(args), args.seed, _tolerances(args))
    _emit(map_report_to_json(report), args)
    return EXIT_OK


def _cmd_analyze(args) -> int:
    parsed = state_document_from_json(load_json_file(args.state))
    separable = isinstance(parsed, SeparableEnsemble)
    state: BipartiteState = parsed.to_state() if separable else parsed
    if args.normalize:
        state = state.normalized()
    report = witness_battery(
        state, tol=_tolerances(args), separable_certificate=separable
    )
    _emit(state_report_to_json(report), args)
    return EXIT_OK


def _cmd_decompose(args) -> int:
    parsed = state_document_from_json(load_json_file(args.ensemble))
    if not isinstance(parsed, SeparableEnsemble):
        raise ParseError("decompose requires a state file with ensemble repr")
    result = decompose_separable(parsed, _tolerances(args))
    _emit(decomposition_to_json(result), args)
    return EXIT_OK


def _cmd_search(args) -> int:
    try:
        witness = builtin_map(args.witness)
    except DomainError as exc:
        raise _UsageError(str(exc)) from exc
    result = search_ppt_entangled(
        witness,
        budget=_budget(args),
        seed=args.seed,
        tol=_tolerances(args),
        witness_name=args.witness,
    )
    _emit(search_result_to_json(result), args)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(dumps(state_to_json(result.state)) + "\n")
    if result.violation >= FOUND_VIOLATION and result.converged:
        return EXIT_OK
    return EXIT_NOT_FOUND


def _cmd_pair(args) -> int:
    f = _resolve_map(args.map)
    a = matrix_from_json(load_json_file(args.a))
    b = matrix_from_json(load_json_file(args.b))
    value = pairing_value(f, a, b)
    _emit({"value": [value.real, value.imag]}, args)
    return EXIT_OK


_DISPATCH = {
    "choi": _cmd_choi,
    "classify-map": _cmd_classify,
    "analyze-state": _cmd_analyze,
    "decompose": _cmd_decompose,
    "search-ppt-entangled": _cmd_search,
    "pair": _cmd_pair,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _tolerances(args)  # reject out-of-range --tol-psd uniformly
        return _DISPATCH[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (DomainError, DimensionError, NumericalError, SearchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except EntangleConeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
