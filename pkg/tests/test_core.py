"""Tests for the scheme data model and shift-operator algebra."""

from __future__ import annotations

import math

import numpy as np
import pytest

from dibvp.core import (
    DifferenceOp,
    GridSequence,
    RangeError,
    SchemeDef,
    SchemeError,
    apply_op,
    difference_power_taps,
    discrete_derivative,
    lax_friedrichs,
    lax_wendroff,
    leap_frog,
    scheme_from_dict,
    scheme_to_dict,
    three_point,
    upwind,
    validate_scheme,
)


# ---------------------------------------------------------------------------
# operator algebra


def test_shift_composition_adds_offsets():
    a = DifferenceOp.shift(2)
    b = DifferenceOp.shift(-3)
    c = a @ b
    assert set(c.taps) == {-1}
    assert c.taps[-1][0, 0] == 1.0


def test_binomial_identity_shift_in_terms_of_differences():
    # T^j = sum_ell C(j, ell) D^ell, checked as operators for j up to 6
    for j in range(7):
        lhs = DifferenceOp.shift(j)
        rhs = None
        for ell in range(j + 1):
            term = math.comb(j, ell) * (DifferenceOp.diff() ** ell)
            rhs = term if rhs is None else rhs + term
        diff = (lhs - rhs).drop_zeros(tol=1e-14)
        assert set(diff.taps) == {0}
        assert np.abs(diff.taps[0]).max() == 0.0


def test_difference_power_taps_are_signed_binomials():
    taps = difference_power_taps(3)
    assert taps == {0: -1.0, 1: 3.0, 2: -3.0, 3: 1.0}


def test_apply_diff_to_linear_sequence():
    u = GridSequence(-5, np.arange(-5, 6, dtype=float))
    du = apply_op(DifferenceOp.diff(), u)
    assert du.offset == -5
    assert du.last == 4
    assert np.allclose(du.values[:, 0], 1.0)


def test_second_difference_of_squares_is_two_and_third_vanishes():
    j = np.arange(-4, 9)
    u = GridSequence(-4, (j ** 2).astype(float))
    d2 = discrete_derivative(u, 2)
    assert np.allclose(d2.values[:, 0], 2.0)
    d3 = discrete_derivative(u, 3)
    assert np.abs(d3.values).max() == 0.0


def test_apply_to_spike_with_implicit_zero():
    u = GridSequence(3, [1.0], implicit_zero=True)
    du = apply_op(DifferenceOp.diff(), u)
    # support sits one index left of the spike: (Du)_2 = 1, (Du)_3 = -1
    assert du.offset == 2
    assert np.allclose(du.values[:, 0], [1.0, -1.0])
    assert du.get(10)[0] == 0.0


def test_apply_op_range_shrinks_and_errors_when_exhausted():
    u = GridSequence(0, np.ones(3))
    d = DifferenceOp.diff()
    du = apply_op(d, u)
    assert len(du) == 2
    with pytest.raises(RangeError):
        apply_op(d, apply_op(d, du))


def test_apply_op_dimension_mismatch():
    u = GridSequence(0, np.ones((4, 2)))
    with pytest.raises(SchemeError):
        apply_op(DifferenceOp.diff(1), u)


def test_composition_matches_sequential_application():
    rng = np.random.default_rng(7)
    vals = rng.standard_normal((12, 2))
    u = GridSequence(-3, vals)
    a = DifferenceOp({0: rng.standard_normal((2, 2)), 1: rng.standard_normal((2, 2))})
    b = DifferenceOp({-1: rng.standard_normal((2, 2)), 2: rng.standard_normal((2, 2))})
    lhs = apply_op(a @ b, u)
    rhs = apply_op(a, apply_op(b, u))
    assert lhs.offset == rhs.offset
    assert np.allclose(lhs.values, rhs.values)


# ---------------------------------------------------------------------------
# grid sequences


def test_grid_sequence_get_and_window():
    u = GridSequence(2, [1.0, 2.0, 3.0])
    assert u.get(3)[0] == 2.0
    with pytest.raises(RangeError):
        u.get(5)
    z = GridSequence(2, [1.0, 2.0, 3.0], implicit_zero=True)
    assert z.get(5)[0] == 0.0
    w = z.window(0, 5)
    assert np.allclose(w[:, 0], [0, 0, 1, 2, 3, 0])


# ---------------------------------------------------------------------------
# fixtures and validation


@pytest.mark.parametrize(
    "make", [upwind, lax_friedrichs, lax_wendroff, leap_frog]
)
def test_fixture_consistency_sum_is_identity(make):
    scheme = make(1.0, 0.5)
    assert np.allclose(scheme.consistency_sum(), np.eye(1), atol=1e-14)


def test_upwind_coefficients():
    sch = upwind(1.0, 0.5)
    assert sch.A(-1, 0)[0, 0] == pytest.approx(0.5)
    assert sch.A(0, 0)[0, 0] == pytest.approx(0.5)
    assert sch.r == 1 and sch.p == 0 and sch.s == 0


def test_leap_frog_coefficients():
    sch = leap_frog(1.0, 0.5)
    assert sch.A(1, 0)[0, 0] == pytest.approx(-0.5)
    assert sch.A(-1, 0)[0, 0] == pytest.approx(0.5)
    assert sch.A(0, 1)[0, 0] == pytest.approx(1.0)
    assert sch.s == 1


def test_validate_scheme_passes_fixtures():
    for make in (upwind, lax_friedrichs, lax_wendroff, leap_frog):
        rep = validate_scheme(make(1.0, 0.5))
        assert rep.ok
        assert rep.consistent


def test_validate_flags_inconsistent_scheme():
    sch = three_point(0.3, 0.3, 0.3)
    rep = validate_scheme(sch)
    assert not rep.consistent
    assert rep.consistency_residual == pytest.approx(0.1)


def test_validate_flags_characteristic_scheme():
    # a_plus = 0 makes the rightmost coefficient block singular for every z
    sch = three_point(0.5, 0.5, 0.0)
    rep = validate_scheme(sch)
    assert not rep.noncharacteristic_ok
    assert rep.min_sv_right < 1e-10


def test_resolvent_block_values_for_upwind():
    # z = 2, lam*a = 0.5: block at ell=0 is 1 - 0.5/2 = 0.75, at ell=-1 is -0.25
    from dibvp.core import _resolvent_block

    sch = upwind(1.0, 0.5)
    assert _resolvent_block(sch, 0, 2.0)[0, 0] == pytest.approx(0.75)
    assert _resolvent_block(sch, -1, 2.0)[0, 0] == pytest.approx(-0.25)


def test_scheme_constructor_rejects_bad_shapes():
    with pytest.raises(SchemeError):
        SchemeDef(
            N=1, r=1, p=0, q=0, s=0, lam=1.0,
            interior=np.zeros((3, 1, 1, 1)),  # wrong: p+r+1 = 2
            boundary=np.zeros((1, 1, 2, 1, 1)),
        )


# ---------------------------------------------------------------------------
# JSON round trip


def test_scheme_json_roundtrip():
    sch = lax_wendroff(0.9, 0.7, boundary="extrapolation")
    data = scheme_to_dict(sch)
    back = scheme_from_dict(data)
    assert back.N == sch.N and back.r == sch.r and back.p == sch.p
    assert back.q == sch.q and back.s == sch.s
    assert back.lam == pytest.approx(sch.lam)
    assert np.allclose(back.interior, sch.interior)
    assert np.allclose(back.boundary, sch.boundary)


def test_scheme_dict_rejects_unknown_version_and_duplicates():
    data = scheme_to_dict(upwind(1.0, 0.5))
    bad = dict(data, schema_version=99)
    with pytest.raises(SchemeError):
        scheme_from_dict(bad)
    dup = dict(data)
    dup["interior"] = data["interior"] + [data["interior"][0]]
    with pytest.raises(SchemeError):
        scheme_from_dict(dup)


def test_scheme_file_io(tmp_path):
    from dibvp.core import load_scheme, save_scheme

    path = tmp_path / "scheme.json"
    sch = lax_friedrichs(0.8, 0.5)
    save_scheme(sch, path)
    back = load_scheme(path)
    assert back.label == "lax-friedrichs"
    assert np.allclose(back.interior, sch.interior)
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(SchemeError):
        load_scheme(bad)
