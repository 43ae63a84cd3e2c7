"""Finite, queryable interaction specifications.

An interaction specification assigns to each registered epistemic formula a
threshold function ``k -> m``; the formula belongs to the (m, k) family iff
the function is defined at k and m is at least its value.  A formula is
interactively provable iff its threshold function is total.

Spec file format, one entry per line (``#`` starts a comment):

    eform ":" ("const" nat | "poly" nat+ | "table" (nat "->" nat)+ ["default" nat])
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from . import syntax
from .syntax import EFormula


class ISpecError(ValueError):
    pass


class DuplicateEntry(ISpecError):
    pass


@dataclass(frozen=True)
class ConstantFn:
    m: int

    def value_at(self, k: int) -> Optional[int]:
        return self.m

    @property
    def is_total(self) -> bool:
        return True

    def describe(self) -> str:
        return f"const {self.m}"


@dataclass(frozen=True)
class PolynomialFn:
    coeffs: tuple[int, ...]  # m(k) = sum coeffs[i] * k**i

    def value_at(self, k: int) -> Optional[int]:
        return sum(c * k**i for i, c in enumerate(self.coeffs))

    @property
    def is_total(self) -> bool:
        return True

    def describe(self) -> str:
        return "poly " + " ".join(str(c) for c in self.coeffs)


@dataclass(frozen=True)
class TableFn:
    entries: tuple[tuple[int, int], ...]
    default: Optional[int] = None

    def value_at(self, k: int) -> Optional[int]:
        for kk, m in self.entries:
            if kk == k:
                return m
        return self.default

    @property
    def is_total(self) -> bool:
        return self.default is not None

    def describe(self) -> str:
        s = "table " + " ".join(f"{k} -> {m}" for k, m in self.entries)
        if self.default is not None:
            s += f" default {self.default}"
        return s


ThresholdFn = Union[ConstantFn, PolynomialFn, TableFn]


@dataclass
class InteractionSpec:
    """Map from canonical formula text to its threshold function."""

    entries: dict[str, tuple[EFormula, ThresholdFn]] = field(default_factory=dict)

    def add(self, formula: EFormula, fn: ThresholdFn):
        key = syntax.print_eformula(formula)
        if key in self.entries:
            raise DuplicateEntry(f"duplicate entry for {key!r}")
        self.entries[key] = (formula, fn)

    def threshold(self, formula: EFormula) -> Optional[ThresholdFn]:
        entry = self.entries.get(syntax.print_eformula(formula))
        return entry[1] if entry else None

    def member(self, formula: EFormula, m: int, k: int) -> bool:
        """Membership of the formula in the (m, k) family."""
        fn = self.threshold(formula)
        if fn is None:
            return False
        thr = fn.value_at(k)
        return thr is not None and m >= thr

    def in_I(self, formula: EFormula) -> bool:
        """Interactively provable: some m works for every k."""
        fn = self.threshold(formula)
        return fn is not None and fn.is_total

    def formulas(self) -> list[EFormula]:
        return [f for f, _ in self.entries.values()]

    def dump(self) -> str:
        return "".join(f"{key} : {fn.describe()}\n" for key, (_, fn) in self.entries.items())


_ENTRY_RE = re.compile(r"^(?P<formula>.*?)\s*:\s*(?P<kind>const|poly|table)\s+(?P<rest>.*)$")
_PAIR_RE = re.compile(r"(\d+)\s*->\s*(\d+)")


def load_spec(text: str) -> InteractionSpec:
    spec = InteractionSpec()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        m = _ENTRY_RE.match(line)
        if not m:
            raise ISpecError(f"line {lineno}: expected 'eform : const|poly|table ...'")
        try:
            formula = syntax.parse_eformula(m.group("formula"))
        except syntax.ParseError as exc:
            raise ISpecError(f"line {lineno}: bad formula: {exc}") from exc
        kind, rest = m.group("kind"), m.group("rest").strip()
        try:
            fn = _parse_fn(kind, rest)
        except ValueError as exc:
            raise ISpecError(f"line {lineno}: {exc}") from exc
        try:
            spec.add(formula, fn)
        except DuplicateEntry as exc:
            raise DuplicateEntry(f"line {lineno}: {exc}") from exc
    return spec


def _parse_fn(kind: str, rest: str) -> ThresholdFn:
    if kind == "const":
        return ConstantFn(_nat(rest))
    if kind == "poly":
        coeffs = tuple(_nat(w) for w in rest.split())
        if not coeffs:
            raise ValueError("poly needs at least one coefficient")
        return PolynomialFn(coeffs)
    default = None
    dm = re.search(r"\bdefault\s+(\d+)\s*$", rest)
    if dm:
        default = int(dm.group(1))
        rest = rest[: dm.start()]
    pairs = tuple((int(a), int(b)) for a, b in _PAIR_RE.findall(rest))
    leftover = _PAIR_RE.sub("", rest).strip()
    if leftover:
        raise ValueError(f"bad table entry near {leftover!r}")
    if len({k for k, _ in pairs}) != len(pairs):
        raise ValueError("table has duplicate k entries")
    if not pairs and default is None:
        raise ValueError("empty table")
    return TableFn(pairs, default)


def _nat(w: str) -> int:
    n = int(w)
    if n < 0:
        raise ValueError(f"expected a natural number, got {w}")
    return n


def load_spec_file(path: str) -> InteractionSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return load_spec(fh.read())
