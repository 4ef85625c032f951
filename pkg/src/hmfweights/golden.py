"""The three built-in worked weights with their expected values, for regression diffs."""

from __future__ import annotations

from dataclasses import dataclass

from .derivation import DerivationReport, reconstruct
from .lattice import KAPPA, P, SymbolContext, Weight, make_embedding_set, parse_coeff, vec_strs
from .operators import CONDITION_3


@dataclass(frozen=True)
class Golden:
    name: str
    degrees: tuple[int, ...]
    k: tuple[str, ...]
    kappa_min: int | None
    expected: dict  # field -> expected canonical strings


GOLDEN = {
    "quadratic-cubic": Golden(
        "quadratic-cubic",
        (3,),
        ("1", "1", "κ"),
        3,
        {
            "M": [[0, 0], [0, 2]],
            "Mtilde": [[0, 2]],
            "kprime": ["p", "p+1", "κ-1"],
            "kmu": [{"mu": [0, 2], "k": ["p", "p+1", "κ+1"], "l": ["0", "0", "-1"]}],
        },
    ),
    "k2-equals-2": Golden(
        "k2-equals-2",
        (3,),
        ("1", "1", "2"),
        None,
        {
            "M": [[0, 0], [0, 1], [0, 2]],
            "Mtilde": [[0, 2]],
            "kprime": ["p", "p", "p+1"],
            "kmu": [{"mu": [0, 2], "k": ["p", "p", "p+3"], "l": ["0", "0", "-1"]}],
        },
    ),
    "eight-tuple": Golden(
        "eight-tuple",
        (8,),
        ("1", "1", "κ", "2", "2", "1", "2", "2"),
        3,
        {
            "kprime": ["p", "p+1", "κ-1", "p+1", "p+1", "p", "p+1", "p+1"],
            "kmu": [
                {"mu": [0, 2], "k": ["p", "p+1", "κ+1", "p+1", "p+1", "p", "p+1", "p+1"]},
                {"mu": [0, 4], "k": ["p", "p+1", "κ-1", "p+1", "p+3", "p", "p+1", "p+1"]},
                {"mu": [0, 7], "k": ["p", "p+1", "κ-1", "p+1", "p+1", "p", "p+1", "p+3"]},
            ],
            "kdoubleprime": ["0", "p+1", "κ", "1", "p+2", "0", "p+1", "p+2"],
            "final": ["1", "1", "κ", "2", "2", "1", "2", "2"],
            "verdict": "verified",
        },
    ),
}


def golden_weight(g: Golden, pmin: int = 2) -> tuple[Weight, SymbolContext]:
    bounds = {P: pmin}
    if g.kappa_min is not None:
        bounds[KAPPA] = g.kappa_min
    ctx = SymbolContext(tuple(bounds.items()))
    E = make_embedding_set(g.degrees)
    return Weight.of(E, [parse_coeff(c, ctx) for c in g.k]), ctx


def run_golden(name: str) -> tuple[DerivationReport, list[str]]:
    """Symbolic run of a named example and the list of fields that differ."""
    g = GOLDEN[name]
    w, ctx = golden_weight(g)
    report = reconstruct(w, ctx.sym(P), {CONDITION_3})
    got = report.to_json()
    diffs = []
    for field, want in g.expected.items():
        have = got[field]
        if field == "kprime":
            have = have["k"]
        elif field == "kmu":
            # compare only the keys the golden entry pins down
            have = [{key: m[key] for key in w_} for m, w_ in zip(have, want)] + have[len(want):]
        if have != want:
            diffs.append(f"{field}: expected {want}, got {have}")
    if g.name == "eight-tuple" and vec_strs(report.final or ()) != list(g.k):
        diffs.append("final weight differs from input")
    return report, diffs
