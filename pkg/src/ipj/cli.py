"""Command-line frontend.

Exit codes: 0 when the requested check passes (VALID / PASS / true), 1 when
it fails logically, 2 on usage or parse errors.  ``--json`` mirrors the text
report as a machine-readable object.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction

from . import generators, proofcheck, protosim, semantics, syntax
from .ispec import InteractionSpec, ISpecError, load_spec_file
from .qeps import QEps, QEpsParseError, parse_qeps


def _emit(args, ok: bool, lines: list[str], extra: dict | None = None) -> int:
    if args.json:
        payload = {"ok": ok, "report": lines}
        if extra:
            payload.update(extra)
        print(json.dumps(payload, sort_keys=True))
    else:
        for line in lines:
            print(line)
    return 0 if ok else 1


def _load_spec(path: str | None) -> InteractionSpec:
    if path is None:
        return InteractionSpec()
    return load_spec_file(path)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_parse(args) -> int:
    parsers = {
        "formula": lambda t: syntax.print_formula(syntax.parse_formula(t)),
        "eformula": lambda t: syntax.print_eformula(syntax.parse_eformula(t)),
        "term": lambda t: syntax.print_term(syntax.parse_term(t)),
    }
    printed = parsers[args.kind](args.text)
    return _emit(args, True, [printed], {"canonical": printed})


def cmd_check_proof(args) -> int:
    spec = _load_spec(args.spec)
    derivation = proofcheck.load_derivation_file(args.proof, spec, zk=args.zk)
    report = proofcheck.check_derivation(derivation)
    extra = {"line": report.line} if report.line is not None else {}
    return _emit(args, report.valid, [report.render()], extra)


def _model_universe(q: semantics.Quasimodel) -> semantics.Universe:
    bases = []
    for _, _, t, _ in sorted(
        q.base.evidence, key=lambda e: syntax.print_term(e[2])
    ):
        if isinstance(t, syntax.Proto) and syntax.is_f_free(t.inner):
            if t.inner not in bases:
                bases.append(t.inner)
    return semantics.Universe(terms=tuple(bases))


def cmd_check_model(args) -> int:
    spec = _load_spec(args.spec)
    if args.random:
        return _soundness_harness(args, spec)
    q = semantics.load_model_file(args.model)
    report = semantics.check_model_conditions(
        q, spec, _model_universe(q), zk=args.zk, kmax=args.kmax
    )
    return _emit(args, report.ok, report.render().splitlines())


def _soundness_harness(args, spec: InteractionSpec) -> int:
    rng = random.Random(args.seed)
    lines = []
    violations = 0
    for i in range(args.random):
        q = generators.rand_model(rng)
        for _ in range(args.instances):
            schema = rng.choice(generators.HARNESS_SCHEMAS)
            inst = generators.rand_axiom_instance(rng, schema)
            if not q.eval(inst):
                violations += 1
                lines.append(
                    f"violation in model {i}: ({schema}) {syntax.print_formula(inst)}"
                )
    total = args.random * args.instances
    lines.append(f"{total} axiom instances over {args.random} random models")
    lines.append(f"{violations} violations")
    lines.append("PASS" if violations == 0 else "FAIL")
    return _emit(args, violations == 0, lines, {"violations": violations})


def cmd_eval(args) -> int:
    q = semantics.load_model_file(args.model)
    f = syntax.parse_formula(args.formula, allow_symbolic=False)
    value = q.eval(f)
    return _emit(args, value, ["true" if value else "false"], {"value": value})


def cmd_simulate(args) -> int:
    spec = _load_spec(args.spec)
    if args.witness:
        alpha = syntax.parse_eformula(args.witness)
        t = syntax.parse_term(args.term)
        q = protosim.build_interaction_witness(
            spec, alpha, t, k=args.k, n_max=args.nmax, honest=not args.dishonest,
            zk=args.zk,
        )
        report = semantics.check_model_conditions(
            q, spec, semantics.Universe(terms=(t,)), zk=args.zk, kmax=args.k
        )
        lines = report.render().splitlines()
        if args.emit:
            with open(args.emit, "w", encoding="utf-8") as fh:
                fh.write(semantics.write_model_file(q))
            lines.insert(-1, f"model written to {args.emit}")
        return _emit(args, report.ok, lines)
    error = Fraction(args.error)
    cfg = protosim.RoundConfig(
        rounds=args.rounds, per_round_error=error, honest=not args.dishonest
    )
    model = protosim.build_round_model(cfg)
    report = protosim.verify_ipp_bound(model)
    lines = list(report.lines)
    lines.append(f"{1 - error ** args.rounds}")
    if args.emit:
        with open(args.emit, "w", encoding="utf-8") as fh:
            fh.write(semantics.write_model_file(model.quasimodel))
        lines.append(f"model written to {args.emit}")
    lines.append("PASS" if report.ok else "FAIL")
    return _emit(
        args, report.ok, lines, {"bound": str(1 - error ** args.rounds)}
    )


def cmd_arith(args) -> int:
    a = parse_qeps(args.value)
    lines = [str(a)]
    extra: dict = {"canonical": str(a)}
    ok = True
    if args.cmp is not None:
        b = parse_qeps(args.cmp)
        sign = a.compare(b)
        rel = {1: ">", 0: "=", -1: "<"}[sign]
        lines.append(f"cmp: {rel}")
        extra["cmp"] = sign
    if args.std:
        try:
            sp = a.std_part()
            lines.append(f"std: {sp}")
            extra["std"] = str(sp)
        except ValueError:
            lines.append("std: undefined (infinite element)")
            ok = False
    if args.approx is not None:
        r = Fraction(args.approx)
        res = a.approx_eq(r)
        lines.append(f"approx {r}: {'true' if res else 'false'}")
        ok = ok and res
    return _emit(args, ok, lines, extra)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ipj",
        description="verification kernel for a probabilistic two-agent justification logic",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("parse", help="parse input and print its canonical form")
    p.add_argument("text")
    p.add_argument(
        "--kind", choices=("formula", "eformula", "term"), default="formula"
    )
    common(p)
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("check-proof", help="check a derivation file")
    p.add_argument("proof")
    p.add_argument("--spec", help="interaction specification file")
    p.add_argument("--zk", action="store_true", help="enable the zero-knowledge axioms")
    common(p)
    p.set_defaults(fn=cmd_check_proof)

    p = sub.add_parser("check-model", help="check model conditions, or run the random harness")
    p.add_argument("model", nargs="?")
    p.add_argument("--spec", help="interaction specification file")
    p.add_argument("--zk", action="store_true", help="also check the zero-knowledge condition")
    p.add_argument("--kmax", type=int, default=2, help="largest exponent k to check (default 2)")
    p.add_argument("--random", type=int, default=0, metavar="N",
                   help="instead of a file, check axiom soundness on N random models")
    p.add_argument("--instances", type=int, default=1000,
                   help="axiom instances per random model (default 1000)")
    p.add_argument("--seed", type=int, default=0, help="random seed for the harness")
    common(p)
    p.set_defaults(fn=cmd_check_model)

    p = sub.add_parser("eval", help="evaluate a formula in a model")
    p.add_argument("formula")
    p.add_argument("--model", required=True)
    common(p)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("simulate", help="build round/witness models and verify the bounds")
    p.add_argument("--rounds", type=int, default=2, help="number of protocol rounds")
    p.add_argument("--error", default="1/3", help="per-round error as a rational (default 1/3)")
    p.add_argument("--dishonest", action="store_true", help="distinguish a failing run")
    p.add_argument("--witness", metavar="EFORMULA",
                   help="build a protocol-bound witness model for this formula instead")
    p.add_argument("--term", default="t", help="base evidence term for the witness model")
    p.add_argument("--k", type=int, default=1, help="bound exponent for the witness model")
    p.add_argument("--nmax", type=int, default=10, help="largest exact complexity level")
    p.add_argument("--spec", help="interaction specification file")
    p.add_argument("--zk", action="store_true", help="include zero-knowledge evidence/checks")
    p.add_argument("--emit", metavar="FILE", help="write the model file here")
    common(p)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("arith", help="exact arithmetic on field literals")
    p.add_argument("value")
    p.add_argument("--cmp", metavar="VALUE", help="compare against another literal")
    p.add_argument("--std", action="store_true", help="print the standard part")
    p.add_argument("--approx", metavar="R", help="test closeness to a rational")
    common(p)
    p.set_defaults(fn=cmd_arith)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "check-model" and not args.random and not args.model:
        ap.error("check-model needs a model file or --random N")
    try:
        return args.fn(args)
    except (
        syntax.ParseError,
        QEpsParseError,
        ISpecError,
        proofcheck.ProofParseError,
        semantics.ModelError,
        protosim.ConfigError,
        ValueError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
