import math

import numpy as np
import pytest

from conftest import random_direction, random_ket
from eprworlds.errors import ComparisonAlreadyFired, ComparisonBeforeMeasurement, DeviceAlreadyFired
from eprworlds.measurement import (
    MeasurementSetup,
    apply_comparison,
    apply_measurement,
    check_commutation,
    measure_both,
    run_three_measurements,
)
from eprworlds.spin import (
    X,
    Z,
    BasisLabel,
    Comparison,
    Record,
    Sign,
    from_dense,
    inner_product,
    make_singlet,
    product_state,
    rotate_spin_basis,
)

UP, DOWN = Sign.UP, Sign.DOWN
R2 = 1 / math.sqrt(2)


def test_eigenstate_sets_the_record_only():
    s = apply_measurement(product_state(Z, UP, Z, DOWN), 1, Z)
    ((label, amp),) = s.terms.items()
    assert label == BasisLabel(UP, DOWN, Record.UP, Record.UNSET)
    assert amp == 1


def test_singlet_same_axis_two_worlds():
    s = measure_both(make_singlet(Z), MeasurementSetup(Z, Z))
    assert dict(s.terms) == pytest.approx(
        {BasisLabel(UP, DOWN, Record.UP, Record.DOWN): R2, BasisLabel(DOWN, UP, Record.DOWN, Record.UP): -R2}
    )


def test_perpendicular_device_gives_four_quarter_terms():
    s0 = make_singlet(Z)
    s = apply_measurement(s0, 2, X)
    assert len(s) == 4
    for label, amp in s:
        assert abs(abs(amp) ** 2 - 0.25) < 1e-12
    # same amplitudes as the bare rotation, just with device 2 recorded
    rotated = rotate_spin_basis(s0, 2, X)
    for label, amp in rotated:
        assert s.amplitude(label.with_device(2, Record.of(label.s2))) == amp


def test_single_shot():
    s = apply_measurement(make_singlet(Z), 1, Z)
    with pytest.raises(DeviceAlreadyFired):
        apply_measurement(s, 1, X)


def test_comparison_records_the_pair():
    s = apply_comparison(measure_both(make_singlet(Z), MeasurementSetup(Z, Z)))
    assert {l.comp: a for l, a in s} == pytest.approx({Comparison.UP_DOWN: R2, Comparison.DOWN_UP: -R2}, abs=1e-15)
    for label, _ in s:
        assert label.comp.pair == (label.dev1, label.dev2)


def test_comparison_on_product_state():
    s = measure_both(product_state(Z, UP, Z, DOWN), MeasurementSetup(Z, Z))
    ((label, _),) = apply_comparison(s).terms.items()
    assert label.comp is Comparison.UP_DOWN


def test_comparison_on_four_worlds():
    s = run_three_measurements(make_singlet(Z), MeasurementSetup(Z, X))
    assert len({l.comp for l, _ in s}) == 4
    assert all(abs(abs(a) ** 2 - 0.25) < 1e-12 for _, a in s)


def test_comparison_errors():
    with pytest.raises(ComparisonBeforeMeasurement):
        apply_comparison(apply_measurement(make_singlet(Z), 1, Z))
    done = run_three_measurements(make_singlet(Z), MeasurementSetup(Z, Z))
    with pytest.raises(ComparisonAlreadyFired):
        apply_comparison(done)


def test_commutation_same_axis_is_exact():
    assert check_commutation(make_singlet(Z), MeasurementSetup(Z, Z)) <= 1e-15


def test_commutation_z_x():
    # both orders written out: each term becomes +-1/2 with both records set
    assert check_commutation(make_singlet(Z), MeasurementSetup(Z, X)) < 1e-12
    a = measure_both(make_singlet(Z), MeasurementSetup(Z, X), (1, 2))
    b = measure_both(make_singlet(Z), MeasurementSetup(Z, X), (2, 1))
    assert set(a.terms) == set(b.terms)


def test_commutation_random(rng):
    for _ in range(100):
        s = from_dense(random_ket(rng))
        setup = MeasurementSetup(random_direction(rng), random_direction(rng))
        assert check_commutation(s, setup) < 1e-12


def test_isometry(rng):
    for _ in range(50):
        a, b = from_dense(random_ket(rng)), from_dense(random_ket(rng))
        n = random_direction(rng)
        for device in (1, 2):
            before = inner_product(a, b)
            after = inner_product(apply_measurement(a, device, n), apply_measurement(b, device, n))
            assert abs(before - after) < 1e-12


def test_locality_of_action(rng):
    for _ in range(50):
        s = apply_measurement(from_dense(random_ket(rng)), 2, random_direction(rng))
        n = random_direction(rng)
        out = apply_measurement(s, 1, n)
        # device 1 leaves the particle-2 slot, device 2 and the comparator alone
        before = {(l.s2, l.dev2, l.comp) for l, _ in s}
        after = {(l.s2, l.dev2, l.comp) for l, _ in out}
        assert after <= before
        assert out.axis2 == s.axis2
        # and marginal weights on particle 2's register are unchanged
        for key in before:
            w0 = sum(abs(a) ** 2 for l, a in s if (l.s2, l.dev2, l.comp) == key)
            w1 = sum(abs(a) ** 2 for l, a in out if (l.s2, l.dev2, l.comp) == key)
            assert abs(w0 - w1) < 1e-12


def test_record_matches_spin(rng):
    for _ in range(50):
        n = random_direction(rng)
        s = apply_measurement(from_dense(random_ket(rng)), 1, n)
        assert s.axis1 == n
        for label, _ in s:
            assert (label.dev1 is Record.UP) == (label.s1 is UP)


def test_norm_preserved(rng):
    for _ in range(50):
        setup = MeasurementSetup(random_direction(rng), random_direction(rng))
        s = run_three_measurements(from_dense(random_ket(rng)), setup)
        assert abs(s.norm_squared() - 1) < 1e-12


@pytest.mark.parametrize("seed", range(12))
def test_perfect_anticorrelation_and_minus_sign(seed):
    n = [Z, X][seed] if seed < 2 else random_direction(np.random.default_rng(seed))
    s = run_three_measurements(make_singlet(n), MeasurementSetup(n, n))
    assert len(s) == 2
    for label, _ in s:
        assert {label.dev1, label.dev2} == {Record.UP, Record.DOWN}
    (l1, a1), (l2, a2) = s.terms.items()
    assert abs(a2 / a1 + 1) < 1e-12


def test_singlet_prepared_on_another_axis():
    # preparing along z and measuring along x is the same experiment as preparing along x
    a = run_three_measurements(make_singlet(Z), MeasurementSetup(X, X))
    b = run_three_measurements(make_singlet(X), MeasurementSetup(X, X))
    assert set(a.terms) == set(b.terms)
    ratio = [a.amplitude(k) / b.amplitude(k) for k in a.terms]
    assert abs(ratio[0] - ratio[1]) < 1e-12 and abs(abs(ratio[0]) - 1) < 1e-12
