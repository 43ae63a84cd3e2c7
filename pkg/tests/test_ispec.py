"""Interaction specifications: threshold functions and the membership test."""

import pytest

from ipj.ispec import (
    ConstantFn,
    DuplicateEntry,
    ISpecError,
    InteractionSpec,
    PolynomialFn,
    TableFn,
    load_spec,
)
from ipj.syntax import parse_eformula


def test_constant_function():
    fn = ConstantFn(3)
    assert fn.value_at(1) == 3 and fn.value_at(7) == 3
    assert fn.is_total


def test_polynomial_function():
    fn = PolynomialFn((1, 0, 2))  # 1 + 2k^2
    assert fn.value_at(1) == 3
    assert fn.value_at(3) == 19
    assert fn.is_total


def test_table_function():
    fn = TableFn(((1, 2), (2, 5)), default=None)
    assert fn.value_at(1) == 2 and fn.value_at(2) == 5
    assert fn.value_at(3) is None
    assert not fn.is_total
    assert TableFn(((1, 2),), default=7).is_total


def test_membership_and_in_i():
    spec = load_spec(
        """
        # protocol-provable formulas
        p : const 1
        box[P] q : table 1 -> 2 2 -> 4
        q : poly 1 2
        """
    )
    p = parse_eformula("p")
    bq = parse_eformula("box[P] q")
    assert spec.member(p, 1, 1) and spec.member(p, 5, 3)
    assert not spec.member(p, 0, 1)
    assert spec.member(bq, 2, 1) and not spec.member(bq, 1, 1)
    assert not spec.member(bq, 100, 3)  # undefined at k=3
    assert spec.in_I(p)
    assert not spec.in_I(bq)
    assert spec.in_I(parse_eformula("q"))
    assert spec.threshold(parse_eformula("r")) is None
    assert not spec.member(parse_eformula("r"), 10, 1)


def test_duplicate_entries_rejected():
    with pytest.raises(DuplicateEntry):
        load_spec("p : const 1\np : const 2\n")


def test_parse_errors():
    for bad in ("p const 1", "p : const", "p : const -1", "p : table", "p : foo 1"):
        with pytest.raises(ISpecError):
            load_spec(bad)


def test_formula_with_colon_in_entry():
    spec = load_spec("t :[P] p : const 2\n")
    assert spec.member(parse_eformula("t :[P] p"), 2, 1)


def test_dump_roundtrip():
    text = "p : const 1\nbox[P] q : table 1 -> 2 2 -> 4\nq : poly 1 2\n"
    spec = load_spec(text)
    again = load_spec(spec.dump())
    for f in spec.formulas():
        assert again.threshold(f) == spec.threshold(f)
