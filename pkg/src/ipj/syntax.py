"""ASTs, parser and printer for justification terms, epistemic formulas and
probability formulas.

Concrete syntax (ASCII, line oriented):

    term  := ident | "c:" ident | term "*" term | term "+" term | "!" term
           | "f[" (nat|"w") "](" term ")"
    agent := "P" | "V"
    eform := ident | "~" eform | eform "&" eform | eform "|" eform
           | eform "->" eform | "box[" agent "]" eform
           | term ":[" agent "]" eform
    form  := eform | "Pr>=" q "(" eform ")" | "Pr~" rational "(" eform ")"
           | "Pr<" q "(" eform ")" | "Pr<=" q "(" eform ")"
           | "Pr>" q "(" eform ")" | "Pr=" q "(" eform ")"
           | "~" form | form "&" form

Precedence: ``!`` > ``*`` > ``+`` for terms and ``~`` > ``&`` > ``|`` >
``->`` for formulas; parentheses are always allowed.  Derived operators
(``|``, ``->``, ``<->``, ``Pr<``, ``Pr<=``, ``Pr>``, ``Pr=``) are desugared
at parse time, so printed output is always in the core connectives and
reparses to an identical tree.

Probability thresholds are exact field literals; inside proof templates
they may instead be parametric expressions ``q + 1/v^j`` (see
:class:`SymThresh`).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Union

from .qeps import QEps

# ---------------------------------------------------------------------------
# complexities and agents
# ---------------------------------------------------------------------------


class _Omega:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "w"


OMEGA = _Omega()
Complexity = Union[int, _Omega]

PROVER = "P"
VERIFIER = "V"
AGENTS = (PROVER, VERIFIER)


def comp_lt(m: Complexity, n: Complexity) -> bool:
    if n is OMEGA:
        return m is not OMEGA
    if m is OMEGA:
        return False
    return m < n


def comp_le(m: Complexity, n: Complexity) -> bool:
    return m == n or comp_lt(m, n)


# ---------------------------------------------------------------------------
# terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class App:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Sum:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Bang:
    inner: "Term"


@dataclass(frozen=True)
class Proto:
    complexity: Complexity
    inner: "Term"


Term = Union[Const, Var, App, Sum, Bang, Proto]


# ---------------------------------------------------------------------------
# epistemic formulas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class ENot:
    inner: "EFormula"


@dataclass(frozen=True)
class EAnd:
    left: "EFormula"
    right: "EFormula"


@dataclass(frozen=True)
class Box:
    agent: str
    inner: "EFormula"


@dataclass(frozen=True)
class Just:
    term: Term
    agent: str
    inner: "EFormula"


EFormula = Union[Atom, ENot, EAnd, Box, Just]


def eimp(a: EFormula, b: EFormula) -> EFormula:
    return ENot(EAnd(a, ENot(b)))


def eor(a: EFormula, b: EFormula) -> EFormula:
    return ENot(EAnd(ENot(a), ENot(b)))


def eiff(a: EFormula, b: EFormula) -> EFormula:
    return EAnd(eimp(a, b), eimp(b, a))


def dest_eimp(f: EFormula) -> Optional[tuple[EFormula, EFormula]]:
    if isinstance(f, ENot) and isinstance(f.inner, EAnd) and isinstance(f.inner.right, ENot):
        return f.inner.left, f.inner.right.inner
    return None


def dest_eor(f: EFormula) -> Optional[tuple[EFormula, EFormula]]:
    if (
        isinstance(f, ENot)
        and isinstance(f.inner, EAnd)
        and isinstance(f.inner.left, ENot)
        and isinstance(f.inner.right, ENot)
    ):
        return f.inner.left.inner, f.inner.right.inner
    return None


# ---------------------------------------------------------------------------
# probability thresholds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymThresh:
    """Parametric threshold ``base + coeff / v^power`` used in proof templates.

    ``power >= 1`` with an integer parameter v >= N (approximation rule);
    ``power == 0`` means ``base + coeff * v`` with v ranging over the whole
    unit interval (non-equality rule).
    """

    base: Fraction
    coeff: Fraction
    power: int

    def __post_init__(self):
        if self.coeff == 0 and self.power != 0:
            object.__setattr__(self, "power", 0)

    def instantiate(self, v: Union[int, Fraction]) -> Fraction:
        if self.power == 0:
            return self.base + self.coeff * Fraction(v)
        return self.base + self.coeff / Fraction(v) ** self.power

    def __str__(self):
        if self.coeff == 0:
            return str(self.base)
        if self.power == 0:
            mono = f"{self.coeff} v"
        else:
            suffix = "v" if self.power == 1 else f"v^{self.power}"
            mono = f"{self.coeff}/{suffix}"
        if self.base == 0:
            return mono
        return f"{self.base} + {mono}"


Threshold = Union[QEps, SymThresh]


def thresh_complement(s: Threshold) -> Threshold:
    """1 - s, for concrete and parametric thresholds alike."""
    if isinstance(s, SymThresh):
        return SymThresh(1 - s.base, -s.coeff, s.power)
    return QEps.from_rational(1) - s


def is_symbolic(s: Threshold) -> bool:
    return isinstance(s, SymThresh) and s.coeff != 0


# ---------------------------------------------------------------------------
# formulas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Epistemic:
    inner: EFormula


@dataclass(frozen=True)
class ProbGeq:
    threshold: Threshold
    inner: EFormula


@dataclass(frozen=True)
class ProbApprox:
    r: Fraction
    inner: EFormula


@dataclass(frozen=True)
class FNot:
    inner: "Formula"


@dataclass(frozen=True)
class FAnd:
    left: "Formula"
    right: "Formula"


Formula = Union[Epistemic, ProbGeq, ProbApprox, FNot, FAnd]


def fnot(f: Formula) -> Formula:
    """Negation, keeping purely epistemic trees inside a single Epistemic node."""
    if isinstance(f, Epistemic):
        return Epistemic(ENot(f.inner))
    return FNot(f)


def fand(a: Formula, b: Formula) -> Formula:
    if isinstance(a, Epistemic) and isinstance(b, Epistemic):
        return Epistemic(EAnd(a.inner, b.inner))
    return FAnd(a, b)


def fimp(a: Formula, b: Formula) -> Formula:
    return fnot(fand(a, fnot(b)))


def for_(a: Formula, b: Formula) -> Formula:
    return fnot(fand(fnot(a), fnot(b)))


def fiff(a: Formula, b: Formula) -> Formula:
    return fand(fimp(a, b), fimp(b, a))


def dest_fimp(f: Formula) -> Optional[tuple[Formula, Formula]]:
    """View a formula as an implication, seeing through the epistemic merge."""
    if isinstance(f, FNot) and isinstance(f.inner, FAnd) and isinstance(f.inner.right, FNot):
        return f.inner.left, f.inner.right.inner
    if isinstance(f, Epistemic):
        d = dest_eimp(f.inner)
        if d is not None:
            return Epistemic(d[0]), Epistemic(d[1])
    return None


def as_efml(f: Formula) -> Optional[EFormula]:
    return f.inner if isinstance(f, Epistemic) else None


# sugar constructors used throughout the kernel -----------------------------


def prob_geq(s: Threshold, a: EFormula) -> Formula:
    return ProbGeq(s, a)


def prob_leq(s: Threshold, a: EFormula) -> Formula:
    return ProbGeq(thresh_complement(s), ENot(a))


def prob_lt(s: Threshold, a: EFormula) -> Formula:
    return FNot(ProbGeq(s, a))


def prob_gt(s: Threshold, a: EFormula) -> Formula:
    return FNot(prob_leq(s, a))


def prob_eq(s: Threshold, a: EFormula) -> Formula:
    return FAnd(prob_leq(s, a), prob_geq(s, a))


# ---------------------------------------------------------------------------
# syntactic closure
# ---------------------------------------------------------------------------


def esubformulas(f: EFormula) -> set[EFormula]:
    out = {f}
    if isinstance(f, ENot):
        out |= esubformulas(f.inner)
    elif isinstance(f, EAnd):
        out |= esubformulas(f.left) | esubformulas(f.right)
    elif isinstance(f, (Box, Just)):
        out |= esubformulas(f.inner)
    return out


def subformulas(f: Formula) -> set[Formula]:
    out: set[Formula] = {f}
    if isinstance(f, Epistemic):
        out |= {Epistemic(g) for g in esubformulas(f.inner)}
    elif isinstance(f, (ProbGeq, ProbApprox)):
        out |= {Epistemic(g) for g in esubformulas(f.inner)}
    elif isinstance(f, FNot):
        out |= subformulas(f.inner)
    elif isinstance(f, FAnd):
        out |= subformulas(f.left) | subformulas(f.right)
    return out


def subterms(t: Term) -> set[Term]:
    out = {t}
    if isinstance(t, (App, Sum)):
        out |= subterms(t.left) | subterms(t.right)
    elif isinstance(t, Bang):
        out |= subterms(t.inner)
    elif isinstance(t, Proto):
        out |= subterms(t.inner)
    return out


def eterms_of(f: EFormula) -> set[Term]:
    if isinstance(f, Atom):
        return set()
    if isinstance(f, ENot):
        return eterms_of(f.inner)
    if isinstance(f, EAnd):
        return eterms_of(f.left) | eterms_of(f.right)
    if isinstance(f, Box):
        return eterms_of(f.inner)
    return subterms(f.term) | eterms_of(f.inner)


def terms_of(f: Formula) -> set[Term]:
    if isinstance(f, Epistemic):
        return eterms_of(f.inner)
    if isinstance(f, (ProbGeq, ProbApprox)):
        return eterms_of(f.inner)
    if isinstance(f, FNot):
        return terms_of(f.inner)
    return terms_of(f.left) | terms_of(f.right)


def atoms_of_e(f: EFormula) -> set[str]:
    if isinstance(f, Atom):
        return {f.name}
    if isinstance(f, ENot):
        return atoms_of_e(f.inner)
    if isinstance(f, EAnd):
        return atoms_of_e(f.left) | atoms_of_e(f.right)
    return atoms_of_e(f.inner)


def is_f_free(t: Term) -> bool:
    return not any(isinstance(s, Proto) for s in subterms(t))


def names_in_term(t: Term) -> set[str]:
    out = set()
    for s in subterms(t):
        if isinstance(s, (Const, Var)):
            out.add(s.name)
    return out


def names_in_eform(f: EFormula) -> set[str]:
    out = atoms_of_e(f)
    for t in eterms_of(f):
        out |= names_in_term(t)
    return out


def names_in_formula(f: Formula) -> set[str]:
    if isinstance(f, Epistemic):
        return names_in_eform(f.inner)
    if isinstance(f, (ProbGeq, ProbApprox)):
        return names_in_eform(f.inner)
    if isinstance(f, FNot):
        return names_in_formula(f.inner)
    return names_in_formula(f.left) | names_in_formula(f.right)


# ---------------------------------------------------------------------------
# errors
# ---------------------------------------------------------------------------


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.line = line
        self.col = col


class RangeError(ParseError):
    """Threshold literal outside its admissible range."""


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<prop>Pr>=|Pr<=|Pr~|Pr=|Pr<|Pr>)
    | (?P<arrow>->)
    | (?P<justsep>:\[)
    | (?P<const>c:(?=[A-Za-z_]))
    | (?P<num>-?\d+)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
    | (?P<sym>[()\[\]/^~&|*+!:=.;,])
    """,
    re.VERBOSE,
)

RESERVED_NAMES = {"box", "f", "P", "V"}


@dataclass(frozen=True)
class Token:
    kind: str  # 'num' | 'ident' | 'const' | exact symbol text
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    toks = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        lexeme = m.group(0)
        kind = m.lastgroup
        if kind == "const":
            # the constant token carries the following identifier
            m2 = _TOKEN_RE.match(text, m.end())
            toks.append(Token("const", m2.group(0), line, col))
            lexeme = lexeme + m2.group(0)
        elif kind == "num":
            toks.append(Token("num", lexeme, line, col))
        elif kind == "ident":
            toks.append(Token("ident", lexeme, line, col))
        elif kind == "prop":
            toks.append(Token("prop", lexeme, line, col))
        elif kind != "ws":
            toks.append(Token(lexeme, lexeme, line, col))
        for ch in lexeme:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        pos += len(lexeme)
    toks.append(Token("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


class Parser:
    def __init__(self, text: str, allow_symbolic: bool = True):
        self.toks = tokenize(text)
        self.i = 0
        self.allow_symbolic = allow_symbolic

    # -- token plumbing ------------------------------------------------------

    def peek(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, kind: str) -> Token:
        t = self.next()
        if t.kind != kind:
            raise ParseError(f"expected {kind!r}, got {t.text!r}", t.line, t.col)
        return t

    def error(self, msg: str):
        t = self.peek()
        raise ParseError(msg, t.line, t.col)

    def at_end(self) -> bool:
        return self.peek().kind == "eof"

    # -- terms ----------------------------------------------------------------

    def term(self) -> Term:
        t = self.term_mul()
        while self.peek().kind == "+":
            self.next()
            t = Sum(t, self.term_mul())
        return t

    def term_mul(self) -> Term:
        t = self.term_prefix()
        while self.peek().kind == "*":
            self.next()
            t = App(t, self.term_prefix())
        return t

    def term_prefix(self) -> Term:
        tok = self.peek()
        if tok.kind == "!":
            self.next()
            return Bang(self.term_prefix())
        if tok.kind == "const":
            self.next()
            return Const(tok.text)
        if tok.kind == "(":
            self.next()
            t = self.term()
            self.expect(")")
            return t
        if tok.kind == "ident":
            if tok.text == "f":
                self.next()
                self.expect("[")
                c = self.complexity()
                self.expect("]")
                self.expect("(")
                inner = self.term()
                self.expect(")")
                return Proto(c, inner)
            if tok.text in RESERVED_NAMES:
                self.error(f"{tok.text!r} is reserved and cannot name a variable")
            self.next()
            return Var(tok.text)
        self.error(f"expected a term, got {tok.text!r}")

    def complexity(self) -> Complexity:
        tok = self.next()
        if tok.kind == "num":
            n = int(tok.text)
            if n < 0:
                raise ParseError("complexity must be a natural number", tok.line, tok.col)
            return n
        if tok.kind == "ident" and tok.text == "w":
            return OMEGA
        raise ParseError(f"expected a complexity (nat or 'w'), got {tok.text!r}", tok.line, tok.col)

    def agent(self) -> str:
        tok = self.next()
        if tok.kind == "ident" and tok.text in AGENTS:
            return tok.text
        raise ParseError(f"expected agent 'P' or 'V', got {tok.text!r}", tok.line, tok.col)

    # -- formulas ---------------------------------------------------------------

    def formula(self) -> Formula:
        f = self.form_or()
        if self.peek().kind == "->":
            self.next()
            return fimp(f, self.formula())
        return f

    def form_or(self) -> Formula:
        f = self.form_and()
        while self.peek().kind == "|":
            self.next()
            f = for_(f, self.form_and())
        return f

    def form_and(self) -> Formula:
        f = self.form_unary()
        while self.peek().kind == "&":
            self.next()
            f = fand(f, self.form_unary())
        return f

    def form_unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "~":
            self.next()
            return fnot(self.form_unary())
        if tok.kind == "prop":
            return self.prob_formula(tok)
        if tok.kind == "ident" and tok.text == "box":
            self.next()
            self.expect("[")
            a = self.agent()
            self.expect("]")
            inner = self.form_unary()
            return Epistemic(Box(a, self.require_efml(inner, tok)))
        if tok.kind == "(":
            # could be a parenthesized formula or a parenthesized term in
            # front of a justification separator; try the term reading first
            mark = self.i
            try:
                t = self.term()
                if self.peek().kind == ":[":
                    return self.justification(t)
            except ParseError:
                pass
            self.i = mark
            self.next()
            f = self.formula()
            self.expect(")")
            if self.peek().kind == ":[":
                self.error("a justified formula needs a term on the left of ':['")
            return f
        if tok.kind in ("ident", "const", "!") or (tok.kind == "ident" and tok.text == "f"):
            mark = self.i
            t = self.term()
            if self.peek().kind == ":[":
                return self.justification(t)
            if isinstance(t, Var):
                return Epistemic(Atom(t.name))
            self.i = mark
            self.error("expected ':[' after term")
        self.error(f"expected a formula, got {tok.text!r}")

    def justification(self, t: Term) -> Formula:
        tok = self.expect(":[")
        a = self.agent()
        self.expect("]")
        inner = self.form_unary()
        return Epistemic(Just(t, a, self.require_efml(inner, tok)))

    def require_efml(self, f: Formula, tok: Token) -> EFormula:
        e = as_efml(f)
        if e is None:
            raise ParseError(
                "probability operators cannot occur inside an epistemic formula",
                tok.line,
                tok.col,
            )
        return e

    def prob_formula(self, tok: Token) -> Formula:
        op = self.next().text
        s = self.threshold(op)
        self.expect("(")
        body = self.formula()
        self.expect(")")
        e = self.require_efml(body, tok)
        if op == "Pr~":
            assert isinstance(s, Fraction)
            return ProbApprox(s, e)
        builder = {
            "Pr>=": prob_geq,
            "Pr<=": prob_leq,
            "Pr<": prob_lt,
            "Pr>": prob_gt,
            "Pr=": prob_eq,
        }[op]
        return builder(s, e)

    # -- thresholds ----------------------------------------------------------------

    def threshold(self, op: str):
        tok = self.peek()
        if op == "Pr~":
            r = self.rational()
            if not 0 <= r <= 1:
                raise RangeError(
                    f"approximate-probability threshold {r} outside [0,1]", tok.line, tok.col
                )
            return r
        s = self.qeps_or_sym()
        if isinstance(s, QEps) and not s.in_unit_interval():
            raise RangeError(f"probability threshold {s} outside [0,1]", tok.line, tok.col)
        return s

    def rational(self) -> Fraction:
        tok = self.expect("num")
        n = int(tok.text)
        if self.peek().kind == "/":
            self.next()
            d = int(self.expect("num").text)
            if d <= 0:
                raise ParseError("denominator must be positive", tok.line, tok.col)
            return Fraction(n, d)
        return Fraction(n)

    def qeps_or_sym(self):
        tok = self.peek()
        if tok.kind == "(":
            self.next()
            num = self.poly_monomials()
            self.expect(")")
            self.expect("/")
            self.expect("(")
            den = self.poly_monomials()
            self.expect(")")
            try:
                return QEps.from_monomials(num, den)
            except (ValueError, ZeroDivisionError) as exc:
                raise ParseError(str(exc), tok.line, tok.col) from None
        monos, sym = self.poly_with_param()
        if sym is not None:
            if not self.allow_symbolic:
                raise ParseError("parametric threshold outside a proof template", tok.line, tok.col)
            base = sum((c for c, p in monos if p == 0), Fraction(0))
            if any(p != 0 for _, p in monos):
                raise ParseError("cannot mix e and the parameter v in one threshold", tok.line, tok.col)
            return SymThresh(base, sym[0], sym[1])
        return QEps.from_monomials(monos)

    def poly_with_param(self):
        monos: list[tuple[Fraction, int]] = []
        sym = None
        while True:
            tok = self.peek()
            if tok.kind == "ident" and tok.text == "v":
                # bare parameter monomial (linear, coefficient 1)
                self.next()
                if sym is not None:
                    raise ParseError("only one parametric monomial is allowed", tok.line, tok.col)
                sym = (Fraction(1), 0)
                if self.peek().kind == "+":
                    self.next()
                    continue
                return monos, sym
            c = self.rational_allow_slash_v()
            if isinstance(c, tuple):  # (coeff, power) parametric monomial
                if sym is not None:
                    raise ParseError("only one parametric monomial is allowed", tok.line, tok.col)
                sym = c
            else:
                if self.peek().kind == "ident" and self.peek().text == "e":
                    self.next()
                    p = 1
                    if self.peek().kind == "^":
                        self.next()
                        p = int(self.expect("num").text)
                        if p <= 0:
                            raise ParseError("e power must be positive", tok.line, tok.col)
                    monos.append((c, p))
                elif self.peek().kind == "ident" and self.peek().text == "v":
                    self.next()
                    if sym is not None:
                        raise ParseError("only one parametric monomial is allowed", tok.line, tok.col)
                    sym = (c, 0)  # linear parameter: c * v
                else:
                    monos.append((c, 0))
            if self.peek().kind == "+":
                self.next()
                continue
            return monos, sym

    def rational_allow_slash_v(self):
        tok = self.expect("num")
        n = int(tok.text)
        if self.peek().kind == "/":
            nxt = self.toks[self.i + 1]
            if nxt.kind == "ident" and nxt.text == "v":
                self.next()
                self.next()
                p = 1
                if self.peek().kind == "^":
                    self.next()
                    p = int(self.expect("num").text)
                    if p <= 0:
                        raise ParseError("v power must be positive", tok.line, tok.col)
                return (Fraction(n), p)
            self.next()
            d = int(self.expect("num").text)
            if d <= 0:
                raise ParseError("denominator must be positive", tok.line, tok.col)
            return Fraction(n, d)
        return Fraction(n)

    def poly_monomials(self) -> list[tuple[Fraction, int]]:
        monos, sym = self.poly_with_param()
        if sym is not None:
            self.error("parametric threshold cannot use the fraction form")
        return monos


def parse_term(text: str) -> Term:
    p = Parser(text)
    t = p.term()
    if not p.at_end():
        p.error(f"trailing input: {p.peek().text!r}")
    return t


def parse_formula(text: str, allow_symbolic: bool = True) -> Formula:
    p = Parser(text, allow_symbolic=allow_symbolic)
    f = p.formula()
    if not p.at_end():
        p.error(f"trailing input: {p.peek().text!r}")
    return f


def parse_eformula(text: str) -> EFormula:
    f = parse_formula(text, allow_symbolic=False)
    e = as_efml(f)
    if e is None:
        raise ParseError("expected a purely epistemic formula")
    return e


# ---------------------------------------------------------------------------
# printer
# ---------------------------------------------------------------------------

_TERM_SUM, _TERM_MUL, _TERM_PREFIX = 0, 1, 2


def _term_str(t: Term, prec: int) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return f"c:{t.name}"
    if isinstance(t, Proto):
        c = "w" if t.complexity is OMEGA else str(t.complexity)
        return f"f[{c}]({_term_str(t.inner, _TERM_SUM)})"
    if isinstance(t, Bang):
        return f"!{_term_str(t.inner, _TERM_PREFIX)}"
    if isinstance(t, App):
        s = f"{_term_str(t.left, _TERM_MUL)} * {_term_str(t.right, _TERM_PREFIX)}"
        return f"({s})" if prec > _TERM_MUL else s
    if isinstance(t, Sum):
        s = f"{_term_str(t.left, _TERM_SUM)} + {_term_str(t.right, _TERM_MUL)}"
        return f"({s})" if prec > _TERM_SUM else s
    raise TypeError(f"not a term: {t!r}")


def print_term(t: Term) -> str:
    return _term_str(t, _TERM_SUM)


_E_AND, _E_UNARY = 0, 1


def _eform_str(f: EFormula, prec: int) -> str:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, ENot):
        return f"~{_eform_str(f.inner, _E_UNARY)}"
    if isinstance(f, Box):
        return f"box[{f.agent}] {_eform_str(f.inner, _E_UNARY)}"
    if isinstance(f, Just):
        s = f"{_term_str(f.term, _TERM_PREFIX)} :[{f.agent}] {_eform_str(f.inner, _E_UNARY)}"
        return f"({s})" if prec > _E_AND else s
    if isinstance(f, EAnd):
        s = f"{_eform_str(f.left, _E_AND)} & {_eform_str(f.right, _E_UNARY)}"
        return f"({s})" if prec > _E_AND else s
    raise TypeError(f"not an epistemic formula: {f!r}")


def print_eformula(f: EFormula) -> str:
    return _eform_str(f, _E_AND)


def _thresh_str(s: Threshold) -> str:
    return str(s)


def _form_str(f: Formula, prec: int) -> str:
    if isinstance(f, Epistemic):
        return _eform_str(f.inner, prec)
    if isinstance(f, FNot):
        return f"~{_form_str(f.inner, _E_UNARY)}"
    if isinstance(f, FAnd):
        s = f"{_form_str(f.left, _E_AND)} & {_form_str(f.right, _E_UNARY)}"
        return f"({s})" if prec > _E_AND else s
    if isinstance(f, ProbGeq):
        return f"Pr>= {_thresh_str(f.threshold)} ({_eform_str(f.inner, _E_AND)})"
    if isinstance(f, ProbApprox):
        return f"Pr~ {f.r} ({_eform_str(f.inner, _E_AND)})"
    raise TypeError(f"not a formula: {f!r}")


def print_formula(f: Formula) -> str:
    return _form_str(f, _E_AND)


def print_node(node) -> str:
    """Print any term or formula node; output reparses to the same tree."""
    if isinstance(node, (Const, Var, App, Sum, Bang, Proto)):
        return print_term(node)
    if isinstance(node, (Atom, ENot, EAnd, Box, Just)):
        return print_eformula(node)
    return print_formula(node)


# -- justified-term precedence note -----------------------------------------
# Just bodies print the left term at prefix precedence, so sums and
# applications are parenthesized there: `(s + t) :[P] p` reparses correctly.


# ---------------------------------------------------------------------------
# parametric-formula helpers (used by the proof checker)
# ---------------------------------------------------------------------------


def formula_has_param(f: Formula) -> bool:
    if isinstance(f, ProbGeq):
        return is_symbolic(f.threshold)
    if isinstance(f, FNot):
        return formula_has_param(f.inner)
    if isinstance(f, FAnd):
        return formula_has_param(f.left) or formula_has_param(f.right)
    return False


def instantiate_param(f: Formula, v: Union[int, Fraction]) -> Formula:
    """Replace every parametric threshold with its value at the given v."""
    if isinstance(f, ProbGeq):
        s = f.threshold
        if isinstance(s, SymThresh):
            return ProbGeq(QEps.from_rational(s.instantiate(v)), f.inner)
        return f
    if isinstance(f, FNot):
        return FNot(instantiate_param(f.inner, v))
    if isinstance(f, FAnd):
        return FAnd(instantiate_param(f.left, v), instantiate_param(f.right, v))
    return f
