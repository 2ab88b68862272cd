"""Sparse two-particle spin-1/2 kets with device and comparison registers.

A :class:`StateVector` keeps one measurement axis per particle and maps
:class:`BasisLabel` tuples to complex amplitudes.  Each spin label is the
sign of the projection along the particle's axis, so a label together with
the state's axes names a product ket such as ``M1(up) M2(down) |n,up>|n,down>``.

Spinor frames follow the SU(2) half-angle convention

    U(theta, phi) = exp(-i phi sz/2) exp(-i theta sy/2)
                  = [[e^{-i phi/2} cos(theta/2), -e^{-i phi/2} sin(theta/2)],
                     [e^{+i phi/2} sin(theta/2),  e^{+i phi/2} cos(theta/2)]]

whose columns are ``|n,up>`` and ``|n,down>`` written in the z basis.
Re-expressing a particle from axis ``a`` to axis ``b`` multiplies its
coefficients by ``U(b)^dagger U(a)``.  With ``b = z`` and ``a`` at polar
angle theta, azimuth 0, this is ``[[cos, -sin], [sin, cos]]`` (theta/2), i.e.

    |a,up>   =  cos(theta/2) |z,up> + sin(theta/2) |z,down>
    |a,down> = -sin(theta/2) |z,up> + cos(theta/2) |z,down>
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import IntEnum
from types import MappingProxyType
from typing import Mapping, NamedTuple

import numpy as np

NORM_TOL = 1e-12
PRUNE_TOL = 1e-14
DIRECTION_TOL = 1e-12

_SQRT1_2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class Direction:
    """Unit vector on the sphere given by polar angle ``theta`` and azimuth ``phi`` (radians)."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta, phi = float(self.theta), float(self.phi)
        if not (math.isfinite(theta) and math.isfinite(phi)):
            raise ValueError(f"non-finite direction ({theta}, {phi})")
        if theta < -1e-12 or theta > math.pi + 1e-12:
            raise ValueError(f"polar angle {theta} outside [0, pi]")
        theta = min(max(theta, 0.0), math.pi)
        phi = math.fmod(phi, 2 * math.pi)
        if phi < 0:
            phi += 2 * math.pi
        if phi >= 2 * math.pi:
            phi = 0.0
        # the frame at a pole must not depend on a meaningless azimuth
        if theta == 0.0 or theta == math.pi:
            phi = 0.0
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_degrees(cls, polar: float, azimuth: float = 0.0) -> Direction:
        return cls(math.radians(polar), math.radians(azimuth))

    @classmethod
    def from_vector(cls, v) -> Direction:
        x, y, z = (float(c) for c in v)
        r = math.sqrt(x * x + y * y + z * z)
        if r == 0.0 or not math.isfinite(r):
            raise ValueError("cannot take the direction of a zero or non-finite vector")
        x, y, z = x / r, y / r, z / r
        theta = math.acos(min(1.0, max(-1.0, z)))
        phi = math.atan2(y, x) if (x or y) else 0.0
        return cls(theta, phi)

    @property
    def vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])

    @property
    def degrees(self) -> tuple[float, float]:
        return math.degrees(self.theta), math.degrees(self.phi)

    def dot(self, other: Direction) -> float:
        return float(np.dot(self.vector, other.vector))

    def angle_to(self, other: Direction) -> float:
        return math.acos(min(1.0, max(-1.0, self.dot(other))))

    def __eq__(self, other):
        if not isinstance(other, Direction):
            return NotImplemented
        return bool(np.all(np.abs(self.vector - other.vector) <= DIRECTION_TOL))

    __hash__ = None

    def __repr__(self):
        return f"Direction(theta={self.theta!r}, phi={self.phi!r})"


Z = Direction(0.0, 0.0)
X = Direction(math.pi / 2, 0.0)
Y = Direction(math.pi / 2, math.pi / 2)


class Sign(IntEnum):
    """Spin projection along an axis, +1 (UP) or -1 (DOWN) in units of hbar/2."""

    UP = 0
    DOWN = 1

    @property
    def eigenvalue(self) -> int:
        return 1 if self is Sign.UP else -1

    @property
    def arrow(self) -> str:
        return "up" if self is Sign.UP else "down"


@dataclass(frozen=True)
class SpinLabel:
    axis: Direction
    sign: Sign


class Record(IntEnum):
    """Pointer state of a single spin-measuring device."""

    UNSET = 0
    UP = 1
    DOWN = 2

    @classmethod
    def of(cls, sign: Sign) -> Record:
        return cls.UP if sign is Sign.UP else cls.DOWN

    @property
    def eigenvalue(self) -> int:
        if self is Record.UNSET:
            raise ValueError("an unset device has no outcome")
        return 1 if self is Record.UP else -1

    @property
    def tag(self) -> str:
        return {Record.UNSET: "...", Record.UP: "up", Record.DOWN: "down"}[self]


class Comparison(IntEnum):
    """Pointer state of the comparison apparatus: the pair of device records it has read."""

    UNSET = 0
    UP_DOWN = 1
    DOWN_UP = 2
    UP_UP = 3
    DOWN_DOWN = 4

    @classmethod
    def of(cls, dev1: Record, dev2: Record) -> Comparison:
        return _COMPARISON_OF[(dev1, dev2)]

    @property
    def pair(self) -> tuple[Record, Record] | None:
        return None if self is Comparison.UNSET else _COMPARISON_PAIR[self]

    @property
    def tag(self) -> str:
        if self is Comparison.UNSET:
            return "..."
        a, b = self.pair
        return f"{a.tag},{b.tag}"


_COMPARISON_OF = {
    (Record.UP, Record.DOWN): Comparison.UP_DOWN,
    (Record.DOWN, Record.UP): Comparison.DOWN_UP,
    (Record.UP, Record.UP): Comparison.UP_UP,
    (Record.DOWN, Record.DOWN): Comparison.DOWN_DOWN,
}
_COMPARISON_PAIR = {v: k for k, v in _COMPARISON_OF.items()}


class BasisLabel(NamedTuple):
    """Key of one product ket; spin signs refer to the owning state's axes."""

    s1: Sign
    s2: Sign
    dev1: Record = Record.UNSET
    dev2: Record = Record.UNSET
    comp: Comparison = Comparison.UNSET

    def spin(self, particle: int) -> Sign:
        return self.s1 if particle == 1 else self.s2

    def device(self, device: int) -> Record:
        return self.dev1 if device == 1 else self.dev2

    def with_spin(self, particle: int, sign: Sign) -> BasisLabel:
        return self._replace(s1=sign) if particle == 1 else self._replace(s2=sign)

    def with_device(self, device: int, record: Record) -> BasisLabel:
        return self._replace(dev1=record) if device == 1 else self._replace(dev2=record)

    @property
    def records(self) -> tuple[Record, Record, Comparison]:
        return self.dev1, self.dev2, self.comp

    def describe(self) -> str:
        return (
            f"Mc[{self.comp.tag}] M1({self.dev1.tag}) M2({self.dev2.tag}) "
            f"|{self.s1.arrow}>1 |{self.s2.arrow}>2"
        )


def _check_particle(particle: int) -> None:
    if particle not in (1, 2):
        raise ValueError(f"particle index must be 1 or 2, got {particle!r}")


@dataclass(frozen=True, eq=False)
class StateVector:
    """Immutable sparse ket.  Build through :meth:`from_terms` so amplitudes are pruned and sorted."""

    axis1: Direction
    axis2: Direction
    terms: Mapping[BasisLabel, complex]

    @classmethod
    def from_terms(cls, axis1: Direction, axis2: Direction, terms) -> StateVector:
        items = terms.items() if isinstance(terms, Mapping) else terms
        cleaned = {}
        for label, amp in items:
            amp = complex(amp)
            if not (math.isfinite(amp.real) and math.isfinite(amp.imag)):
                raise ValueError(f"non-finite amplitude {amp} on {label}")
            cleaned[BasisLabel(*label)] = cleaned.get(BasisLabel(*label), 0j) + amp
        ordered = {k: cleaned[k] for k in sorted(cleaned) if abs(cleaned[k]) >= PRUNE_TOL}
        return cls(axis1, axis2, MappingProxyType(ordered))

    def axis(self, particle: int) -> Direction:
        _check_particle(particle)
        return self.axis1 if particle == 1 else self.axis2

    def spin_label(self, label: BasisLabel, particle: int) -> SpinLabel:
        return SpinLabel(self.axis(particle), label.spin(particle))

    def norm_squared(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self.terms.values())

    def amplitude(self, label: BasisLabel) -> complex:
        return self.terms.get(label, 0j)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def describe(self) -> str:
        return "\n".join(f"{amp.real:+.12g}{amp.imag:+.12g}j  {lab.describe()}" for lab, amp in self)


def spin_frame(direction: Direction) -> np.ndarray:
    """2x2 matrix whose columns are ``|n,up>`` and ``|n,down>`` in the z basis."""
    c, s = math.cos(direction.theta / 2), math.sin(direction.theta / 2)
    em, ep = cmath.exp(-0.5j * direction.phi), cmath.exp(0.5j * direction.phi)
    return np.array([[em * c, -em * s], [ep * s, ep * c]], dtype=complex)


PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def spin_operator(direction: Direction) -> np.ndarray:
    """``n . sigma`` in the z basis."""
    nx, ny, nz = direction.vector
    return nx * PAULI[0] + ny * PAULI[1] + nz * PAULI[2]


def make_singlet(axis: Direction = Z) -> StateVector:
    """(|up>1|down>2 - |down>1|up>2)/sqrt(2) with both spins quantised along ``axis``."""
    return StateVector.from_terms(
        axis,
        axis,
        {
            BasisLabel(Sign.UP, Sign.DOWN): _SQRT1_2,
            BasisLabel(Sign.DOWN, Sign.UP): -_SQRT1_2,
        },
    )


def product_state(axis1: Direction, sign1: Sign, axis2: Direction, sign2: Sign) -> StateVector:
    return StateVector.from_terms(axis1, axis2, {BasisLabel(sign1, sign2): 1.0})


def from_dense(vector, axis1: Direction = Z, axis2: Direction = Z) -> StateVector:
    """Spin-only state from a length-4 vector ordered (up up, up down, down up, down down)."""
    vector = np.asarray(vector, dtype=complex).reshape(4)
    return StateVector.from_terms(
        axis1,
        axis2,
        {BasisLabel(Sign(i // 2), Sign(i % 2)): vector[i] for i in range(4)},
    )


def _apply_local(state: StateVector, particle: int, matrix: np.ndarray, axis: Direction) -> StateVector:
    # new[t] = sum_s matrix[t, s] * old[s] on the chosen particle's slot
    acc: dict[BasisLabel, complex] = {}
    for label, amp in state:
        s = label.spin(particle)
        for t in Sign:
            m = matrix[t, s]
            if m != 0:
                key = label.with_spin(particle, t)
                acc[key] = acc.get(key, 0j) + m * amp
    axis1, axis2 = (axis, state.axis2) if particle == 1 else (state.axis1, axis)
    return StateVector.from_terms(axis1, axis2, acc)


def rotate_spin_basis(state: StateVector, particle: int, new_axis: Direction) -> StateVector:
    """Re-express one particle's spin labels along ``new_axis``; the abstract ket is unchanged."""
    _check_particle(particle)
    old_axis = state.axis(particle)
    if old_axis == new_axis:
        return state
    matrix = spin_frame(new_axis).conj().T @ spin_frame(old_axis)
    return _apply_local(state, particle, matrix, new_axis)


def rotate_to(state: StateVector, axis1: Direction, axis2: Direction) -> StateVector:
    return rotate_spin_basis(rotate_spin_basis(state, 1, axis1), 2, axis2)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>; ``b`` is re-expressed along ``a``'s axes first when they differ."""
    b = rotate_to(b, a.axis1, a.axis2)
    return complex(sum(amp.conjugate() * b.amplitude(label) for label, amp in a))


def spin_observable_expectation(state: StateVector, axis1: Direction, axis2: Direction) -> float:
    """<psi|(n1.sigma1)(n2.sigma2)|psi> by applying Pauli matrices label by label.

    Device and comparison registers are spectators.
    """
    ops = []
    for particle, n in ((1, axis1), (2, axis2)):
        frame = spin_frame(state.axis(particle))
        ops.append(frame.conj().T @ spin_operator(n) @ frame)
    image = _apply_local(_apply_local(state, 1, ops[0], state.axis1), 2, ops[1], state.axis2)
    return float(inner_product(state, image).real)


def max_amplitude_deviation(a: StateVector, b: StateVector) -> float:
    """Largest |a_l - b_l| over all labels, with ``b`` rotated onto ``a``'s axes."""
    b = rotate_to(b, a.axis1, a.axis2)
    labels = set(a.terms) | set(b.terms)
    return max((abs(a.amplitude(k) - b.amplitude(k)) for k in labels), default=0.0)


def equal_up_to_phase(a: StateVector, b: StateVector, tol: float = NORM_TOL) -> bool:
    """True when ``b = e^{i chi} a`` for some global phase ``chi``."""
    b = rotate_to(b, a.axis1, a.axis2)
    overlap = inner_product(a, b)
    if abs(overlap) < PRUNE_TOL:
        return len(a) == 0 and len(b) == 0
    phase = overlap / abs(overlap)
    labels = set(a.terms) | set(b.terms)
    return all(abs(phase * a.amplitude(k) - b.amplitude(k)) <= tol for k in labels)
