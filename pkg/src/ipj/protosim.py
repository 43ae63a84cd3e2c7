"""Quasimodels realizing round-based protocols and protocol-bound witnesses.

Rounds are modeled as outcome-vector worlds under an exact product measure:
each of the n rounds independently passes with probability 1 - r.  The
amplification bound mu([claim]) >= 1 - r^n is then verified exactly.  A
second construction builds witness models whose protocol-event measures hit
the 1 - 1/n^k bounds exactly up to a chosen complexity and stabilize at a
value that is infinitesimally close to 1 (honest run) or to 0 (dishonest
run), exercising the limit forms of the model conditions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from . import syntax
from .ispec import InteractionSpec
from .qeps import QEps
from .semantics import EpistemicModel, Quasimodel, Report, check_independence
from .syntax import Atom, Box, EFormula, Just, Proto, Term, Var


class ConfigError(ValueError):
    pass


class SizeError(ConfigError):
    pass


_MAX_ROUNDS = 20


@dataclass(frozen=True)
class RoundConfig:
    rounds: int
    per_round_error: Fraction
    secret_term: Term = Var("t")
    claim: EFormula = Atom("accept")
    honest: bool = True

    def __post_init__(self):
        if self.rounds < 1:
            raise ConfigError("at least one round is required")
        if self.rounds > _MAX_ROUNDS:
            raise SizeError(
                f"{self.rounds} rounds would need 2^{self.rounds} worlds; "
                f"the limit is {_MAX_ROUNDS}"
            )
        if not 0 < self.per_round_error < 1:
            raise ConfigError("the per-round error must be strictly between 0 and 1")
        if not isinstance(self.claim, Atom):
            raise ConfigError("the claim must be a single atom")
        if not syntax.is_f_free(self.secret_term):
            raise ConfigError("the secret term must not mention protocol runs")


@dataclass
class RoundModel:
    cfg: RoundConfig
    quasimodel: Quasimodel
    round_terms: tuple[Term, ...]

    @property
    def claim(self) -> EFormula:
        return self.cfg.claim


def build_round_model(cfg: RoundConfig) -> RoundModel:
    """Product-measure quasimodel with one world per outcome vector."""
    n = cfg.rounds
    r = cfg.per_round_error
    claim = cfg.claim.name
    terms = tuple(Var(f"s{i}") for i in range(1, n + 1))

    worlds = ["o" + "".join(bits) for bits in itertools.product("10", repeat=n)]
    identity = [(w, w) for w in worlds]
    valuation = {}
    evidence = []
    measure = {}
    for w in worlds:
        bits = w[1:]
        passes = [i for i, b in enumerate(bits) if b == "1"]
        if passes:
            valuation[w] = [claim]
        for i in passes:
            evidence.append((w, syntax.VERIFIER, terms[i], cfg.claim))
        mass = Fraction(1)
        for b in bits:
            mass *= (1 - r) if b == "1" else r
        measure[w] = QEps.from_rational(mass)
    base = EpistemicModel(
        worlds,
        {syntax.PROVER: identity, syntax.VERIFIER: identity},
        valuation,
        evidence,
        atoms=[claim],
    )
    w0 = "o" + ("1" if cfg.honest else "0") * n
    return RoundModel(cfg, Quasimodel(base, worlds, measure, w0), terms)


def verify_ipp_bound(m: RoundModel) -> Report:
    """Exact check of the amplification bound mu([claim]) >= 1 - r^n."""
    rep = Report()
    q = m.quasimodel
    n, r = m.cfg.rounds, m.cfg.per_round_error
    per_round = QEps.from_rational(1 - r)
    for i, t in enumerate(m.round_terms, start=1):
        got = q.measure_of(Just(t, syntax.VERIFIER, m.claim))
        if got != per_round:
            rep.fail(f"round {i} has mass {got}, expected {1 - r}")
    for a, b in itertools.combinations(m.round_terms, 2):
        if not check_independence(
            q, Just(a, syntax.VERIFIER, m.claim), Just(b, syntax.VERIFIER, m.claim)
        ):
            rep.fail(f"rounds {a} and {b} are not independent")
    bound = 1 - r**n
    measured = q.measure_of(m.claim)
    rep.note(f"bound 1 - r^n = {bound}")
    rep.note(f"measure of the claim = {measured}")
    cmpv = measured.compare(QEps.from_rational(bound))
    if cmpv < 0:
        rep.fail("the claim's measure is below the bound")
    else:
        rep.note("bound met " + ("with equality" if cmpv == 0 else "strictly"))
    return rep


# ---------------------------------------------------------------------------
# witness models for the protocol bound conditions
# ---------------------------------------------------------------------------


def build_interaction_witness(
    spec: InteractionSpec,
    alpha: EFormula,
    t: Term,
    k: int,
    n_max: int,
    honest: bool = True,
    zk: bool = False,
) -> Quasimodel:
    """Quasimodel hitting the 1 - 1/n^k protocol bounds exactly.

    One world u_j per complexity in (threshold, n_max] carries the evidence
    that first appears at complexity j, so the event family grows one world
    at a time and its measure telescopes to exactly 1 - 1/n^k.  A final
    stabilization world leaves an infinitesimal residue, so the limit forms
    see a standard part of 1 (honest) or 0 (dishonest) without ever reaching
    it at a finite stage.
    """
    if k < 1:
        raise ConfigError("k must be at least 1")
    if not syntax.is_f_free(t):
        raise ConfigError("the base term must not mention protocol runs")
    fn = spec.threshold(alpha)
    if fn is None:
        raise ConfigError("the formula has no interaction-spec entry")
    thr = fn.value_at(k)
    if thr is None:
        raise ConfigError(f"the interaction threshold is undefined at k={k}")
    if n_max <= thr:
        raise ConfigError(f"n_max must exceed the threshold {thr}")

    eps = QEps.epsilon()
    one = QEps.from_rational(1)
    levels = list(range(thr + 1, n_max + 1))
    worlds = [f"u{j}" for j in levels] + ["ustar", "uout"]
    identity = [(w, w) for w in worlds]

    # fractions of the event mass added at each level; they sum to 1
    shares: dict[str, QEps] = {}
    shares[f"u{levels[0]}"] = QEps.from_rational(1 - Fraction(1, levels[0] ** k))
    for j in levels[1:]:
        shares[f"u{j}"] = QEps.from_rational(
            Fraction(1, (j - 1) ** k) - Fraction(1, j**k)
        )
    shares["ustar"] = QEps.from_rational(Fraction(1, n_max**k))

    measure: dict[str, QEps] = {}
    if honest:
        for w, share in shares.items():
            measure[w] = share
        measure["ustar"] = shares["ustar"] - eps
        measure["uout"] = eps
    else:
        for w, share in shares.items():
            measure[w] = share * eps
        measure["uout"] = one - eps

    atoms = sorted(syntax.atoms_of_e(alpha)) or ["p"]
    valuation = {w: list(syntax.atoms_of_e(alpha)) for w in worlds}
    body = Box(syntax.PROVER, alpha)

    evidence: list[tuple] = []
    for j in levels:
        evidence.append((f"u{j}", syntax.VERIFIER, Proto(j, t), body))
    evidence.append(("ustar", syntax.VERIFIER, Proto(n_max + 1, t), body))

    w0 = "ustar" if honest else "uout"
    if honest:
        evidence.append(("ustar", syntax.PROVER, t, alpha))
    if zk and honest:
        inner = Just(t, syntax.PROVER, alpha)
        evidence.append(("uout", syntax.PROVER, t, alpha))
        evidence.append(("uout", syntax.VERIFIER, Proto(thr + 1, t), inner))

    base = EpistemicModel(
        worlds,
        {syntax.PROVER: identity, syntax.VERIFIER: identity},
        valuation,
        evidence,
        atoms=atoms,
    )
    if not all(base.eval(w, alpha) for w in worlds):
        raise ConfigError("the witness construction needs a formula true at every world")
    return Quasimodel(base, worlds, measure, w0)
