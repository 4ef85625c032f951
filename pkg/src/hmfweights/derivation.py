"""From a non-algebraic weight to its family of algebraic weights, and back.

Forward: the embedding sets ``M`` and ``M̃`` of a weight ``k`` with all
``k_τ >= 1`` determine ``k′`` (multiply by ``Ha_τ`` for τ in M) and, for each
μ in M̃, ``(k^μ, l^μ)`` (multiply by ``Ha_τ`` for τ in M∖{μ}, then ``Θ_μ``).

Backward: dividing ``k′`` by ``Ha_μ`` for μ in M̃ (each division licensed by
the matching identity ``Θ_μ(f′) = Ha_μ(f^μ)``) gives ``k″``.  The remaining
Hasse factors, one per τ in ``M′ = M∖M̃``, come off ``k″`` along maximal runs
of consecutive embeddings of ``M′``.  Each run starts right after an element
of M̃ and every step is licensed by the divisibility criterion
``p·k_τ < k_{Frob⁻¹∘τ}`` or by an iterated Hasse-divisibility pattern.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .errors import ConsistencyError, InputError, UndecidableError
from .lattice import (
    Coeff,
    CVec,
    Embedding,
    EmbeddingSet,
    Tri,
    Weight,
    congruent_one_mod,
    eq,
    evaluate,
    format_coeff,
    ge,
    in_minimal_cone,
    is_algebraic,
    vadd,
    vec_strs,
    vsub,
)
from .operators import (
    CONDITION_3,
    EigenProps,
    FormExpr,
    apply_theta,
    base,
    divide_hasse,
    dk_divisibility,
    hasse_weight,
    mul_hasse,
)

HYPOTHESES = ("non_algebraic", "nonzero", "minimal_cone", "positive", "condition_4", "condition_5")

CONVENTION_NOTE = (
    "matching identity computed with Θ_μ shifting k by e_μ + p·e_{Frob⁻¹∘μ} and "
    "Ha_μ shifting k by p·e_{Frob⁻¹∘μ} − e_μ; both sides equal k′ + e_μ + p·e_{Frob⁻¹∘μ}"
)


def _is(c: Coeff, value: int, what: str) -> bool:
    verdict = eq(c, value)
    if verdict is Tri.INDETERMINATE:
        raise UndecidableError(f"undecidable under symbol bounds: {what} = {value} ({format_coeff(c)})")
    return verdict is Tri.ALWAYS


class _Classes:
    """Lazily computed class of each entry: 1, 2, or 3 (meaning >= 3).

    Requires every entry to be >= 1 for certain.
    """

    def __init__(self, E: EmbeddingSet, k: Sequence[Coeff]):
        self.E, self.k = E, tuple(k)
        self._cache: dict[Embedding, int] = {}

    def __call__(self, tau: Embedding) -> int:
        if tau not in self._cache:
            c = self.E.get(self.k, tau)
            name = self.E.label(tau)
            self._cache[tau] = 1 if _is(c, 1, f"k_{name}") else 2 if _is(c, 2, f"k_{name}") else 3
        return self._cache[tau]


def _require_positive(k: Sequence[Coeff]) -> None:
    verdict = Tri.all(ge(c, 1) for c in k)
    if verdict is Tri.NEVER:
        raise InputError("every k_τ must be >= 1")
    if verdict is Tri.INDETERMINATE:
        raise UndecidableError("undecidable under symbol bounds: k_τ >= 1")


def compute_M(E: EmbeddingSet, k: Sequence[Coeff]) -> tuple[Embedding, ...]:
    """τ with ``k_{Frob⁻¹∘τ} = … = k_{Frob^{1−s}∘τ} = 2`` and ``k_{Frob^{−s}∘τ} = 1`` for some s >= 1.

    The search for s stops after one full orbit.
    """
    _require_positive(k)
    cls = _Classes(E, k)
    out = []
    for tau in E.embeddings:
        f = E.degrees[tau.orbit]
        for s in range(1, f + 1):
            c = cls(E.frob_pow(tau, -s))
            if c == 1:
                out.append(tau)
                break
            if c != 2:
                break
    return tuple(out)


def compute_Mtilde(
    E: EmbeddingSet, k: Sequence[Coeff], M: Sequence[Embedding] | None = None
) -> tuple[Embedding, ...]:
    M = set(compute_M(E, k) if M is None else M)
    cls = _Classes(E, k)
    out = []
    for tau in E.embeddings:
        c0 = cls(tau)
        if c0 == 3 and tau in M:
            out.append(tau)
        elif c0 == 2 and cls(E.frob_pow(tau, -1)) == 1:
            t2 = E.frob_pow(tau, -2)
            c2 = cls(t2)
            if c2 == 1 or (c2 == 2 and t2 in M):
                out.append(tau)
    return tuple(out)


def derive_kprime(w: Weight, p: Coeff, M: Sequence[Embedding] | None = None) -> tuple[Weight, FormExpr]:
    """Weight of ``f·∏_{τ∈M} Ha_τ``; ``l′ = l``."""
    M = compute_M(w.E, w.k) if M is None else M
    g = base(w, p, label="f")
    for tau in M:
        g = mul_hasse(g, tau)
    return g.weight, g


def derive_kmu(
    w: Weight, mu: Embedding, p: Coeff, M: Sequence[Embedding] | None = None
) -> tuple[Weight, FormExpr]:
    """Weight of ``Θ_μ(f·∏_{τ∈M∖{μ}} Ha_τ)``; ``l^μ = l − e_μ``."""
    E = w.E
    mu = E.check(mu)
    M = compute_M(E, w.k) if M is None else M
    if mu not in compute_Mtilde(E, w.k, M):
        raise InputError(f"{E.label(mu)} is not in M̃")
    g = base(w, p, label="f")
    for tau in M:
        if tau != mu:
            g = mul_hasse(g, tau)
    g = apply_theta(g, mu)
    return g.weight, g


# --------------------------------------------------------------------------
# Hypotheses
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Hypotheses:
    verdicts: dict[str, Tri]
    condition_3: bool = False

    @property
    def failed(self) -> list[str]:
        return [name for name in HYPOTHESES if self.verdicts[name] is Tri.NEVER]

    @property
    def undecided(self) -> list[str]:
        return [name for name in HYPOTHESES if self.verdicts[name] is Tri.INDETERMINATE]

    @property
    def admissible(self) -> bool:
        return all(self.verdicts[name] is Tri.ALWAYS for name in HYPOTHESES)

    def first_failure(self) -> str | None:
        failed = self.failed
        return failed[0] if failed else None

    def to_json(self) -> dict:
        out = {name: self.verdicts[name].value for name in HYPOTHESES}
        out["condition_3"] = "declared" if self.condition_3 else "not-declared"
        return out


def _not_one_mod_p(c: Coeff, p: Coeff) -> Tri:
    return ~congruent_one_mod(c, p)


def check_hypotheses(w: Weight, p: Coeff, assumptions: frozenset[str] | set[str] = frozenset()) -> Hypotheses:
    """Decidable weight-level hypotheses of the converse direction.

    Condition (3) is not decidable from weights; it is echoed from
    ``assumptions``.
    """
    E, k = w.E, w.k
    v: dict[str, Tri] = {}
    v["non_algebraic"] = ~is_algebraic(k)
    v["nonzero"] = Tri.any(~eq(c, 0) for c in k)
    v["minimal_cone"] = in_minimal_cone(E, k, p)
    v["positive"] = Tri.all(ge(c, 1) for c in k)
    v["condition_4"] = Tri.all(
        ~Tri.all(eq(E.get(k, t), 1) for t in E.orbit(o)) for o in range(len(E.degrees))
    )
    if v["positive"] is Tri.ALWAYS:
        try:
            Mt = compute_Mtilde(E, k)
            v["condition_5"] = Tri.all(_not_one_mod_p(E.get(k, mu), p) for mu in Mt)
        except UndecidableError:
            v["condition_5"] = Tri.INDETERMINATE
    else:
        v["condition_5"] = Tri.INDETERMINATE
    return Hypotheses(v, CONDITION_3 in assumptions)


# --------------------------------------------------------------------------
# Case classification of M′ = M ∖ M̃
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CaseInfo:
    tau: Embedding
    case: str  # "i" | "ii" | "iii"
    s: int
    t: int | None = None
    # False for a case-(i) embedding whose successor k_{Frob⁻¹∘τ} is 2, not 1
    literal: bool = True
    routes_to: Embedding | None = None

    def to_json(self, E: EmbeddingSet) -> dict:
        out = {"tau": list(self.tau), "label": E.label(self.tau), "case": self.case, "s": self.s, "t": self.t}
        if not self.literal:
            out["literal"] = False
        if self.routes_to is not None:
            out["routes_to"] = list(self.routes_to)
        return out


def _back_scan(E: EmbeddingSet, cls: _Classes, tau: Embedding, value: int, start: int) -> int:
    """Number of consecutive entries equal to ``value`` at Frob^j∘τ, j = start, start+1, …"""
    f = E.degrees[tau.orbit]
    n = 0
    while n < f and cls(E.frob_pow(tau, start + n)) == value:
        n += 1
    return n


def classify_Mprime(
    E: EmbeddingSet,
    k: Sequence[Coeff],
    M: Sequence[Embedding] | None = None,
    Mt: Sequence[Embedding] | None = None,
) -> dict[Embedding, CaseInfo]:
    """Assign each τ in M∖M̃ its case.

    (i)   ``k_τ = 1``; ``s`` is such that ``Frob^s∘τ ∈ M̃`` with ones in between.
    (ii)  ``k_τ = 2``, ``k_{Frob⁻¹∘τ} = 1``; ``(s, t)``: s twos ending at τ,
          then t ones, then ``Frob^{s+t}∘τ ∈ M̃``.
    (iii) ``k_τ = 2``, ``k_{Frob⁻¹∘τ} = 2``; routed to the case-(ii)
          embedding closing its run of twos, with (s, t) as in (ii).
    """
    M = compute_M(E, k) if M is None else tuple(M)
    Mt = compute_Mtilde(E, k, M) if Mt is None else tuple(Mt)
    Mset, Mtset = set(M), set(Mt)
    cls = _Classes(E, k)
    out: dict[Embedding, CaseInfo] = {}
    for tau in M:
        if tau in Mtset:
            continue
        f = E.degrees[tau.orbit]
        c0, c1, c2 = cls(tau), cls(E.frob_pow(tau, -1)), cls(E.frob_pow(tau, -2))
        t2 = E.frob_pow(tau, -2)
        matches = [
            c0 == 1,
            c0 == 2 and c1 == 1 and c2 != 1 and (c2 != 2 or t2 not in Mset),
            c0 == 2 and c1 == 2,
        ]
        if sum(matches) != 1:
            raise ConsistencyError(
                f"{E.label(tau)} in M∖M̃ matches {sum(matches)} cases (k={vec_strs(k)})"
            )
        if matches[0]:
            s = _back_scan(E, cls, tau, 1, 0)
            if s >= f or E.frob_pow(tau, s) not in Mtset:
                raise ConsistencyError(f"case (i) at {E.label(tau)}: no element of M̃ behind the ones")
            out[tau] = CaseInfo(tau, "i", s, literal=(c1 == 1))
            continue
        s = _back_scan(E, cls, tau, 2, 0)
        t = _back_scan(E, cls, tau, 1, s)
        if s + t >= f or E.frob_pow(tau, s + t) not in Mtset:
            raise ConsistencyError(
                f"case ({'ii' if matches[1] else 'iii'}) at {E.label(tau)}: "
                f"no element of M̃ behind {s} twos and {t} ones"
            )
        if matches[1]:
            out[tau] = CaseInfo(tau, "ii", s, t)
            continue
        if E.frob_inv(tau) not in Mset:
            raise ConsistencyError(f"case (iii) at {E.label(tau)}: Frob⁻¹∘τ not in M")
        end = tau
        for _ in range(f):
            if cls(E.frob_inv(end)) == 1:
                break
            end = E.frob_inv(end)
        out[tau] = CaseInfo(tau, "iii", s, t, routes_to=end)
    return out


# --------------------------------------------------------------------------
# Iterated Hasse divisibility
# --------------------------------------------------------------------------


class PatternError(InputError):
    """The iterated-divisibility pattern does not hold (or is undecidable)."""


@dataclass(frozen=True)
class HasDivChain:
    chain: tuple[Embedding, ...]
    m: Coeff
    s: int
    weights: tuple[CVec, ...]  # weight after each division


def hasdiv_pattern(E: EmbeddingSet, k: Sequence[Coeff], tau: Embedding, p: Coeff) -> tuple[Coeff, int]:
    """``(m, s)`` with ``k_{Frob⁻¹∘τ} = … = k_{Frob^{−s}∘τ} = m``, ``k_{Frob^{−s−1}∘τ} = m+1``, ``1 <= m <= p+1``.

    ``s`` is the full length of the run of m's; the pattern must not wrap
    back onto τ.
    """
    f = E.degrees[tau.orbit]
    m = E.get(k, E.frob_pow(tau, -1))
    s = 1
    while True:
        if s + 1 > f - 1:
            raise PatternError(f"no m, m+1 step along the orbit of {E.label(tau)}")
        nxt = E.get(k, E.frob_pow(tau, -(s + 1)))
        same = eq(nxt, m)
        if same is Tri.INDETERMINATE:
            raise PatternError(f"undecidable run at {E.label(E.frob_pow(tau, -(s + 1)))}")
        if same is Tri.NEVER:
            break
        s += 1
    if eq(nxt, m + 1) is not Tri.ALWAYS:
        raise PatternError(f"entry after the run of m={format_coeff(m)} is {format_coeff(nxt)}, not m+1")
    if ge(m, 1) is not Tri.ALWAYS or ge(p + 1, m) is not Tri.ALWAYS:
        raise PatternError(f"m={format_coeff(m)} is not certainly within 1..p+1")
    return m, s


def hasdiv_chain(E: EmbeddingSet, k: Sequence[Coeff], tau: Embedding, p: Coeff) -> HasDivChain:
    """Chain ``[τ, Frob⁻¹∘τ, …, Frob^{−s}∘τ]`` given divisibility at τ.

    Divisibility at τ itself is the caller's responsibility; every later
    step is checked against the divisibility criterion and must be ``ALWAYS``.
    """
    tau = E.check(tau)
    m, s = hasdiv_pattern(E, k, tau, p)
    chain = [E.frob_pow(tau, -j) for j in range(s + 1)]
    cur = divide_hasse(E, k, tau, p)
    weights = [cur]
    for step in chain[1:]:
        verdict = dk_divisibility(E, cur, step, p)
        if verdict is not Tri.ALWAYS:
            raise PatternError(
                f"divisibility criterion at {E.label(step)} is {verdict.value} on {vec_strs(cur)}"
            )
        cur = divide_hasse(E, cur, step, p)
        weights.append(cur)
    return HasDivChain(tuple(chain), m, s, tuple(weights))


# --------------------------------------------------------------------------
# Reconstruction report
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainStep:
    tau: Embedding
    justification: str  # "matching-identity" | "dk-criterion" | "hasdiv-step"
    at: CVec  # weight before the division

    def to_json(self, E: EmbeddingSet) -> dict:
        return {"tau": list(self.tau), "label": E.label(self.tau), "justification": self.justification}


@dataclass(frozen=True)
class MatchRecord:
    mu: Embedding
    theta_side: Weight  # weight of Θ_μ(f′)
    hasse_side: Weight  # weight of Ha_μ(f^μ)
    strongly_stabilised: bool  # both sides carry the flag

    @property
    def weights_agree(self) -> bool:
        return self.theta_side == self.hasse_side


@dataclass(frozen=True)
class DerivationReport:
    input: Weight
    p: Coeff
    hypotheses: Hypotheses
    M: tuple[Embedding, ...] | None = None
    Mtilde: tuple[Embedding, ...] | None = None
    kprime: Weight | None = None
    kmu: tuple[tuple[Embedding, Weight], ...] = ()
    matching: tuple[MatchRecord, ...] = ()
    kdoubleprime: CVec | None = None
    cases: tuple[CaseInfo, ...] = ()
    chain: tuple[ChainStep, ...] = ()
    final: CVec | None = None
    verdict: str = "verified"
    identities: dict[str, bool] = field(default_factory=dict)
    notes: tuple[str, ...] = ()
    terms: dict[str, FormExpr] = field(default_factory=dict, compare=False)

    @property
    def E(self) -> EmbeddingSet:
        return self.input.E

    @property
    def Mprime(self) -> tuple[Embedding, ...]:
        if self.M is None or self.Mtilde is None:
            return ()
        return tuple(t for t in self.M if t not in set(self.Mtilde))

    def evaluate(self, assignment: Mapping[str, int]) -> DerivationReport:
        """Instantiate every weight in the report; sets, cases and verdicts are kept."""
        ev = lambda x: None if x is None else evaluate(x, assignment)  # noqa: E731
        return replace(
            self,
            input=ev(self.input),
            p=ev(self.p),
            kprime=ev(self.kprime),
            kmu=tuple((mu, ev(w)) for mu, w in self.kmu),
            matching=tuple(
                replace(r, theta_side=ev(r.theta_side), hasse_side=ev(r.hasse_side)) for r in self.matching
            ),
            kdoubleprime=ev(self.kdoubleprime),
            chain=tuple(replace(c, at=ev(c.at)) for c in self.chain),
            final=ev(self.final),
            terms={},
        )

    def to_json(self) -> dict:
        E = self.E
        taus = lambda xs: None if xs is None else [list(t) for t in xs]  # noqa: E731
        vec = lambda v: None if v is None else vec_strs(v)  # noqa: E731
        return {
            "input": self.input.to_json(),
            "degrees": list(E.degrees),
            "p": format_coeff(self.p),
            "M": taus(self.M),
            "Mtilde": taus(self.Mtilde),
            "kprime": None if self.kprime is None else self.kprime.to_json(),
            "kmu": [{"mu": list(mu), **w.to_json()} for mu, w in self.kmu],
            "hypotheses": self.hypotheses.to_json(),
            "matching": [
                {
                    "mu": list(r.mu),
                    "theta_side": r.theta_side.to_json(),
                    "hasse_side": r.hasse_side.to_json(),
                    "weights_agree": r.weights_agree,
                    "strongly_stabilised": r.strongly_stabilised,
                }
                for r in self.matching
            ],
            "kdoubleprime": vec(self.kdoubleprime),
            "cases": [c.to_json(E) for c in self.cases],
            "chain": [c.to_json(E) for c in self.chain],
            "final": vec(self.final),
            "verdict": self.verdict,
            "identities": dict(sorted(self.identities.items())),
            "notes": list(self.notes),
            "terms": {name: t.to_json() for name, t in sorted(self.terms.items())},
        }


def _sum_hasse(E: EmbeddingSet, taus: Sequence[Embedding], p: Coeff) -> CVec:
    total = E.zeros()
    for t in taus:
        total = vadd(total, hasse_weight(E, t, p))
    return total


def mprime_runs(E: EmbeddingSet, Mprime: Sequence[Embedding]) -> list[list[Embedding]]:
    """Maximal runs τ, Frob⁻¹∘τ, Frob⁻²∘τ, … inside M′, in embedding order of their starts."""
    Ms = set(Mprime)
    runs = []
    for tau in E.embeddings:
        if tau not in Ms or E.frob(tau) in Ms:
            continue
        run = [tau]
        while E.frob_inv(run[-1]) in Ms and len(run) < E.degrees[tau.orbit]:
            run.append(E.frob_inv(run[-1]))
        runs.append(run)
    if sum(len(r) for r in runs) != len(Ms):
        raise ConsistencyError("M′ fills a whole orbit; no element of M̃ to start from")
    return runs


def _divide_run(E: EmbeddingSet, cur: CVec, run: list[Embedding], p: Coeff, steps: list[ChainStep]) -> CVec:
    i = 0
    while i < len(run):
        tau = run[i]
        verdict = dk_divisibility(E, cur, tau, p)
        if verdict is Tri.INDETERMINATE:
            raise UndecidableError(f"undecidable under symbol bounds: divisibility at {E.label(tau)}")
        if verdict is Tri.NEVER:
            raise ConsistencyError(f"divisibility criterion fails at {E.label(tau)} on {vec_strs(cur)}")
        try:
            _, s = hasdiv_pattern(E, cur, tau, p)
            fits = i + s < len(run)
        except PatternError:
            fits = False
        if not fits:
            steps.append(ChainStep(tau, "dk-criterion", cur))
            cur = divide_hasse(E, cur, tau, p)
            i += 1
            continue
        hd = hasdiv_chain(E, cur, tau, p)
        before = (cur,) + hd.weights[:-1]
        for j, (t, at) in enumerate(zip(hd.chain, before)):
            steps.append(ChainStep(t, "dk-criterion" if j == 0 else "hasdiv-step", at))
        cur = hd.weights[-1]
        i += len(hd.chain)
    return cur


def reconstruct(
    w: Weight, p: Coeff, assumptions: frozenset[str] | set[str] = frozenset()
) -> DerivationReport:
    """Run the forward derivation and replay the converse at the weight level.

    ``verdict`` is ``verified`` when the divisions of ``k″`` cover ``M′``
    exactly and land on the input ``k``; ``hypothesis-failed`` when a
    decidable hypothesis other than non-algebraicity certainly fails (the
    converse is not attempted; an algebraic input gets the degenerate replay);
    ``undecidable`` when a needed comparison cannot be settled;
    ``mismatch`` otherwise.
    """
    E, k = w.E, w.k
    assumptions = frozenset(assumptions)
    hyp = check_hypotheses(w, p, assumptions)
    notes = [CONVENTION_NOTE]
    report = DerivationReport(input=w, p=p, hypotheses=hyp)
    if hyp.verdicts["positive"] is not Tri.ALWAYS:
        verdict = "hypothesis-failed" if hyp.verdicts["positive"] is Tri.NEVER else "undecidable"
        return replace(report, verdict=verdict, notes=tuple(notes + ["k_τ >= 1 is required for M"]))

    M = compute_M(E, k)
    Mt = compute_Mtilde(E, k, M)
    Mprime = tuple(t for t in M if t not in set(Mt))
    kp, fprime_fwd = derive_kprime(w, p, M)
    kmu, terms = [], {"f'": fprime_fwd}
    for mu in Mt:
        wmu, g = derive_kmu(w, mu, p, M)
        kmu.append((mu, wmu))
        terms[f"f^{E.label(mu)}"] = g

    ids: dict[str, bool] = {}
    ids["Mtilde_subset_M"] = set(Mt) <= set(M)
    ids["kprime_minus_hasse_is_k"] = vsub(kp.k, _sum_hasse(E, M, p)) == tuple(k)
    ids["lprime_is_l"] = kp.l == w.l
    ids["kmu_is_kprime_plus_2e"] = all(wm.k == vadd(kp.k, E.unit(mu, 2)) for mu, wm in kmu)
    ids["lmu_is_l_minus_e"] = all(wm.l == vadd(w.l, E.unit(mu, -1)) for mu, wm in kmu)

    # converse side: f′ and f^μ as given stabilised eigenforms
    fprime = base(kp, p, EigenProps.level("stabilised"), label="f'")
    matching = []
    for mu, wm in kmu:
        fmu = base(wm, p, EigenProps.level("stabilised", assumptions), label=f"f^{E.label(mu)}", fmu=mu)
        lhs, rhs = apply_theta(fprime, mu), mul_hasse(fmu, mu)
        matching.append(
            MatchRecord(mu, lhs.weight, rhs.weight, lhs.props.strongly_stabilised and rhs.props.strongly_stabilised)
        )
    ids["matching_weights_agree"] = all(r.weights_agree for r in matching)
    if matching and not all(r.strongly_stabilised for r in matching):
        notes.append("condition (3) not declared: matching identity holds at the weight level only")

    blocking = [h for h in hyp.failed if h != "non_algebraic"]
    if hyp.verdicts["non_algebraic"] is Tri.NEVER:
        notes.append("input is algebraic: M is empty and the replay is degenerate")
    if blocking:
        return replace(
            report,
            M=M, Mtilde=Mt, kprime=kp, kmu=tuple(kmu), matching=tuple(matching),
            verdict="hypothesis-failed", identities=ids, terms=terms,
            notes=tuple(notes + [f"failed hypothesis: {', '.join(blocking)}"]),
        )
    if hyp.undecided:
        notes.append(f"not established under symbol bounds: {', '.join(hyp.undecided)}")

    steps: list[ChainStep] = []
    cur = kp.k
    for mu in Mt:
        steps.append(ChainStep(mu, "matching-identity", cur))
        cur = divide_hasse(E, cur, mu, p)
    kdp = cur
    ids["kdoubleprime_is_k_plus_Mprime_hasse"] = kdp == vadd(k, _sum_hasse(E, Mprime, p))
    ids["kprime_algebraic"] = is_algebraic(kp.k) is Tri.ALWAYS
    ids["kmu_algebraic"] = all(is_algebraic(wm.k) is Tri.ALWAYS for _, wm in kmu)

    common = dict(
        M=M, Mtilde=Mt, kprime=kp, kmu=tuple(kmu), matching=tuple(matching),
        kdoubleprime=kdp, identities=ids, terms=terms,
    )
    cases = classify_Mprime(E, k, M, Mt)
    common["cases"] = tuple(cases[t] for t in Mprime)
    try:
        for run in mprime_runs(E, Mprime):
            cur = _divide_run(E, cur, run, p, steps)
    except UndecidableError as exc:
        return replace(report, **common, chain=tuple(steps), final=None, verdict="undecidable",
                       notes=tuple(notes + [str(exc)]))
    except ConsistencyError as exc:
        return replace(report, **common, chain=tuple(steps), final=cur, verdict="mismatch",
                       notes=tuple(notes + [str(exc)]))

    divided = Counter(s.tau for s in steps if s.justification != "matching-identity")
    ok = divided == Counter(Mprime) and cur == tuple(k)
    if not ok:
        notes.append("reconstruction mismatch")
    return replace(report, **common, chain=tuple(steps), final=cur,
                   verdict="verified" if ok else "mismatch", notes=tuple(notes))


def reports_agree(symbolic: DerivationReport, concrete: DerivationReport) -> list[str]:
    """Differences between an instantiated symbolic report and a concrete one.

    Weights, sets, cases and the chain must be equal.  A symbolic hypothesis
    verdict of ``indeterminate`` is compatible with any concrete verdict.
    """
    diffs = []
    for name in ("input", "p", "M", "Mtilde", "kprime", "kmu", "kdoubleprime", "final", "verdict"):
        if getattr(symbolic, name) != getattr(concrete, name):
            diffs.append(name)
    if symbolic.cases != concrete.cases:
        diffs.append("cases")
    if [(c.tau, c.justification, c.at) for c in symbolic.chain] != [
        (c.tau, c.justification, c.at) for c in concrete.chain
    ]:
        diffs.append("chain")
    if [(r.mu, r.theta_side, r.hasse_side) for r in symbolic.matching] != [
        (r.mu, r.theta_side, r.hasse_side) for r in concrete.matching
    ]:
        diffs.append("matching")
    for name in HYPOTHESES:
        a, b = symbolic.hypotheses.verdicts[name], concrete.hypotheses.verdicts[name]
        if a is not Tri.INDETERMINATE and a is not b:
            diffs.append(f"hypotheses.{name}")
    if symbolic.identities != concrete.identities:
        diffs.append("identities")
    return diffs
