"""Measurement as linear entangling maps on device registers.

``U_i`` copies the spin sign of particle ``i`` along the chosen axis into
device ``i`` and leaves every spin untouched; ``U_c`` copies the pair of
device records into the comparison apparatus.  Both are defined on product
kets and extended by linearity, so no branch is ever discarded.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ComparisonAlreadyFired, ComparisonBeforeMeasurement, DeviceAlreadyFired
from .spin import (
    BasisLabel,
    Comparison,
    Direction,
    Record,
    StateVector,
    max_amplitude_deviation,
    rotate_spin_basis,
)


@dataclass(frozen=True)
class MeasurementSetup:
    device1_axis: Direction
    device2_axis: Direction

    def axis(self, device: int) -> Direction:
        return self.device1_axis if device == 1 else self.device2_axis


def apply_measurement(state: StateVector, device: int, axis: Direction) -> StateVector:
    """Fire device ``device`` (1 or 2) along ``axis``.

    The particle is first re-expressed along ``axis``; each ``|axis, up>``
    term then gets record UP and each ``|axis, down>`` term record DOWN.
    Raises :class:`DeviceAlreadyFired` if any term already carries a record.
    """
    if device not in (1, 2):
        raise ValueError(f"device must be 1 or 2, got {device!r}")
    for label, _ in state:
        if label.device(device) is not Record.UNSET:
            raise DeviceAlreadyFired(f"device {device} has already recorded {label.device(device).tag}")
    rotated = rotate_spin_basis(state, device, axis)
    return StateVector.from_terms(
        rotated.axis1,
        rotated.axis2,
        {label.with_device(device, Record.of(label.spin(device))): amp for label, amp in rotated},
    )


def apply_comparison(state: StateVector) -> StateVector:
    """Fire the comparison apparatus, which reads both device records on every term."""
    relabeled: dict[BasisLabel, complex] = {}
    for label, amp in state:
        if label.comp is not Comparison.UNSET:
            raise ComparisonAlreadyFired("the comparison apparatus has already recorded")
        if Record.UNSET in (label.dev1, label.dev2):
            raise ComparisonBeforeMeasurement(
                "comparison requires both devices to have measured; "
                f"found M1({label.dev1.tag}) M2({label.dev2.tag})"
            )
        relabeled[label._replace(comp=Comparison.of(label.dev1, label.dev2))] = amp
    return StateVector.from_terms(state.axis1, state.axis2, relabeled)


def measure_both(state: StateVector, setup: MeasurementSetup, order=(1, 2)) -> StateVector:
    for device in order:
        state = apply_measurement(state, device, setup.axis(device))
    return state


def run_three_measurements(state: StateVector, setup: MeasurementSetup, order=(1, 2)) -> StateVector:
    """Both spin measurements followed by the comparison."""
    return apply_comparison(measure_both(state, setup, order))


def check_commutation(state: StateVector, setup: MeasurementSetup) -> float:
    """Max amplitude deviation between ``U2 U1 |state>`` and ``U1 U2 |state>``."""
    forward = measure_both(state, setup, (1, 2))
    reverse = measure_both(state, setup, (2, 1))
    return max_amplitude_deviation(forward, reverse)
