"""Hasse invariant and Theta operator weight calculus.

Weights only: a :class:`FormExpr` records how a form was obtained (base
form, Hasse multiplications, Theta applications) together with the weight
this forces and which eigenform properties are guaranteed to survive.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import InputError, UndecidableError
from .lattice import (
    Coeff,
    CVec,
    Embedding,
    EmbeddingSet,
    Tri,
    Weight,
    ge,
    in_minimal_cone,
    lt,
    scaled_cmp,
    vadd,
    vec_strs,
    vsub,
)

CONDITION_3 = "condition-3"


def hasse_weight(E: EmbeddingSet, tau: Embedding, p: Coeff) -> CVec:
    """Weight of the partial Hasse invariant at ``tau``: ``p·e_{Frob⁻¹∘τ} − e_τ``."""
    return vadd(E.unit(E.frob_inv(tau), p), E.unit(tau, -1))


def theta_weight(E: EmbeddingSet, tau: Embedding, p: Coeff) -> CVec:
    """k-shift of the partial Theta operator: ``e_τ + p·e_{Frob⁻¹∘τ}``."""
    return vadd(E.unit(tau, 1), E.unit(E.frob_inv(tau), p))


def theta_shift(w: Weight, tau: Embedding, p: Coeff) -> Weight:
    return w.shift(theta_weight(w.E, tau, p), w.E.unit(tau, -1))


def dk_divisibility(E: EmbeddingSet, k: Sequence[Coeff], tau: Embedding, p: Coeff) -> Tri:
    """Divisibility criterion by ``Ha_τ``: ``p·k_τ < k_{Frob⁻¹∘τ}``."""
    return scaled_cmp(p, E.get(k, tau), E.get(k, E.frob_inv(tau)), "<")


def divide_hasse(E: EmbeddingSet, k: Sequence[Coeff], tau: Embedding, p: Coeff) -> CVec:
    """``k − hasse_weight(τ)``, unconditionally."""
    return vsub(k, hasse_weight(E, tau, p))


def multiply_hasse(E: EmbeddingSet, k: Sequence[Coeff], tau: Embedding, p: Coeff) -> CVec:
    return vadd(k, hasse_weight(E, tau, p))


# --------------------------------------------------------------------------
# Eigenform property flags and derivation terms
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EigenProps:
    """Guaranteed eigenform properties; ``False`` means unknown, not false."""

    normalised: bool = False
    stabilised: bool = False
    strongly_stabilised: bool = False
    assumptions: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if self.strongly_stabilised and not self.stabilised:
            raise InputError("strongly stabilised implies stabilised")
        if self.stabilised and not self.normalised:
            raise InputError("stabilised implies normalised")
        object.__setattr__(self, "assumptions", frozenset(self.assumptions))

    @classmethod
    def level(cls, name: str, assumptions: frozenset[str] | set[str] = frozenset()) -> EigenProps:
        """Flags for ``none``, ``normalised``, ``stabilised`` or ``strongly_stabilised``."""
        order = ["none", "normalised", "stabilised", "strongly_stabilised"]
        if name not in order:
            raise InputError(f"unknown eigenform level {name!r}")
        n = order.index(name)
        return cls(n >= 1, n >= 2, n >= 3, frozenset(assumptions))

    def _with(self, normalised: bool, stabilised: bool, strongly: bool) -> EigenProps:
        return EigenProps(normalised, stabilised, strongly, self.assumptions)

    def to_json(self) -> dict:
        yes = lambda b: "yes" if b else "unknown"  # noqa: E731
        return {
            "normalised": yes(self.normalised),
            "stabilised": yes(self.stabilised),
            "strongly_stabilised": yes(self.strongly_stabilised),
            "assumptions": sorted(self.assumptions),
        }


@dataclass(frozen=True)
class FormExpr:
    op: str  # "base" | "hasse" | "theta"
    weight: Weight
    props: EigenProps
    p: Coeff
    tau: Embedding | None = None
    child: FormExpr | None = None
    label: str | None = None
    # set on a base form that stands for f^mu (the Theta-derived form at mu)
    fmu: Embedding | None = field(default=None)

    def leaf(self) -> FormExpr:
        node = self
        while node.child is not None:
            node = node.child
        return node

    def to_json(self) -> dict:
        out: dict = {"op": self.op}
        if self.tau is not None:
            out["tau"] = list(self.tau)
        if self.label is not None:
            out["label"] = self.label
        if self.fmu is not None:
            out["fmu"] = list(self.fmu)
        if self.child is not None:
            out["child"] = self.child.to_json()
        out["weight"] = self.weight.to_json()
        out["props"] = self.props.to_json()
        return out


def base(
    weight: Weight,
    p: Coeff,
    props: EigenProps | None = None,
    label: str | None = None,
    fmu: Embedding | None = None,
) -> FormExpr:
    return FormExpr("base", weight, props or EigenProps(), p, label=label, fmu=fmu)


def _is_fmu(g: FormExpr, mu: Embedding) -> bool:
    if g.op == "theta":
        return g.tau == mu
    return g.op == "base" and g.fmu == mu


def propagate_props(op: str, tau: Embedding, child: FormExpr) -> EigenProps:
    """Flags of ``op`` applied at ``tau`` to ``child``.

    Hasse multiplication keeps the child's flags when ``k_τ >= 3`` is certain
    or τ is Frobenius-fixed.  Under the declared condition (3), ``Ha_μ(f^μ)``
    of a stabilised ``f^μ`` is strongly stabilised.  Theta keeps flags and
    promotes stabilised to strongly stabilised.
    """
    c = child.props
    E = child.weight.E
    if op == "theta":
        return c._with(c.normalised, c.stabilised, c.stabilised)
    if op != "hasse":
        raise InputError(f"unknown operator {op!r}")
    keeps_flags = E.is_fixed(tau) or ge(E.get(child.weight.k, tau), 3) is Tri.ALWAYS
    out = c if keeps_flags else c._with(False, False, False)
    if CONDITION_3 in child.leaf().props.assumptions and _is_fmu(child, tau) and c.stabilised:
        out = c._with(True, True, True)
    return out


def mul_hasse(g: FormExpr, tau: Embedding) -> FormExpr:
    E = g.weight.E
    tau = E.check(tau)
    w = g.weight.shift(hasse_weight(E, tau, g.p))
    return FormExpr("hasse", w, propagate_props("hasse", tau, g), g.p, tau=tau, child=g)


def apply_theta(g: FormExpr, tau: Embedding) -> FormExpr:
    tau = g.weight.E.check(tau)
    w = theta_shift(g.weight, tau, g.p)
    return FormExpr("theta", w, propagate_props("theta", tau, g), g.p, tau=tau, child=g)


# --------------------------------------------------------------------------
# Greedy reduction into the minimal cone
# --------------------------------------------------------------------------

Policy = Callable[[list[Embedding]], Embedding]


def lowest_first(candidates: list[Embedding]) -> Embedding:
    return candidates[0]


def random_policy(rng: random.Random) -> Policy:
    return lambda candidates: rng.choice(candidates)


@dataclass(frozen=True)
class Reduction:
    final: CVec
    chain: tuple[Embedding, ...]
    before: tuple[CVec, ...]  # weight at which each chain step was applied
    in_cone: Tri

    def to_json(self, E: EmbeddingSet) -> dict:
        return {
            "final": vec_strs(self.final),
            "chain": [list(t) for t in self.chain],
            "steps": [
                {"tau": list(t), "at": vec_strs(b), "dk": Tri.ALWAYS.value}
                for t, b in zip(self.chain, self.before)
            ],
            "in_cone": self.in_cone.value,
        }


def reduce_to_min_cone(
    E: EmbeddingSet,
    k: Sequence[Coeff],
    p: Coeff,
    policy: Policy | None = None,
    strict: bool = False,
    max_steps: int = 100_000,
) -> Reduction:
    """Divide by Hasse invariants while the divisibility criterion certainly holds.

    Stops when no embedding has an ``ALWAYS`` verdict, or when an orbit's
    entries certainly sum below zero (each division lowers that sum by
    ``p-1`` and the cone needs nonnegative entries).  If the result is not
    certainly in the minimal cone, ``strict`` raises
    :class:`UndecidableError`; otherwise ``in_cone`` carries the verdict.
    """
    policy = policy or lowest_first
    cur = tuple(k)
    chain: list[Embedding] = []
    before: list[CVec] = []
    for _ in range(max_steps):
        candidates = [t for t in E.embeddings if dk_divisibility(E, cur, t, p) is Tri.ALWAYS]
        if not candidates:
            break
        tau = policy(candidates)
        chain.append(tau)
        before.append(cur)
        cur = divide_hasse(E, cur, tau, p)
        if lt(sum(E.get(cur, t) for t in E.orbit(tau.orbit)), 0) is Tri.ALWAYS:
            break
    else:
        raise UndecidableError(f"reduction did not terminate within {max_steps} steps")
    cone = in_minimal_cone(E, cur, p)
    if strict and cone is not Tri.ALWAYS:
        raise UndecidableError(
            f"undecidable under symbol bounds: reduction stopped at {vec_strs(cur)} "
            f"with minimal-cone verdict {cone.value}"
        )
    return Reduction(cur, tuple(chain), tuple(before), cone)
