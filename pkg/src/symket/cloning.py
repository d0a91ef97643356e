"""The cloning map on exchange-symmetrized two-particle states.

``T`` is known only through its action on states of the form
``|x_h, 0_t>``, sending each to ``|x_h, x_t>``. Everything else follows
from linearity, which is exactly what makes superpositions uncloneable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .hilbert import (
    BasisLabel,
    State,
    Statistics,
    inner,
    symmetrize,
    tensor,
    ket,
)

HERE = "h"
THERE = "t"
BLANK = "0"

# residual norm allowed when decomposing onto the declared inputs
SPAN_TOL = 1e-10
CLONE_TOL = 1e-12


class OutsideSpan(ValueError):
    """The state has a component the clone map was never told how to act on."""


def here(internal: str) -> State:
    return ket(BasisLabel(internal, HERE))


def there(internal: str) -> State:
    return ket(BasisLabel(internal, THERE))


def clone_input(internal: str, stats: Statistics) -> State:
    """|x_h, 0_t>: the thing to copy here, the blank there."""
    return symmetrize(here(internal), there(BLANK), stats)


def clone_output(internal: str, stats: Statistics) -> State:
    """|x_h, x_t>: same internal state in both places."""
    return symmetrize(here(internal), there(internal), stats)


@dataclass(frozen=True)
class CloneMap:
    """Extensional description of ``T``: a list of declared (input, output) pairs."""

    statistics: Statistics
    declared_actions: tuple[tuple[State, State], ...]

    def __post_init__(self):
        inputs = [pair[0] for pair in self.declared_actions]
        for k, u in enumerate(inputs):
            if not u.is_normalized(1e-12):
                raise ValueError("declared inputs must be normalized")
            for v in inputs[k + 1:]:
                if abs(inner(u, v)) > 1e-12:
                    raise ValueError("declared inputs must be mutually orthogonal")

    @classmethod
    def for_labels(cls, internals: Iterable[str], stats: Statistics) -> "CloneMap":
        internals = list(dict.fromkeys(internals))
        if BLANK in internals:
            raise ValueError(f"the blank label {BLANK!r} cannot be cloned")
        actions = tuple((clone_input(x, stats), clone_output(x, stats)) for x in internals)
        return cls(stats, actions)

    @property
    def inputs(self) -> list[State]:
        return [pair[0] for pair in self.declared_actions]


def apply_clone_map(clone_map: CloneMap, state: State) -> State:
    """Apply the linear extension of ``clone_map`` to ``state``.

    Raises :class:`OutsideSpan` if ``state`` is not (within ``SPAN_TOL``) a
    combination of declared inputs.
    """
    result = State.zero(2)
    residual = state
    for u, out in clone_map.declared_actions:
        c = inner(u, state)
        residual = residual - c * u
        result = result + c * out
    if residual.norm() > SPAN_TOL:
        raise OutsideSpan(f"state has norm {residual.norm():.3g} outside the declared inputs")
    return result


def _check_amplitudes(a: complex, b: complex, psi: str, phi: str) -> None:
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1) > 1e-12:
        raise ValueError(f"|a|^2 + |b|^2 must be 1, got {abs(a) ** 2 + abs(b) ** 2!r}")
    if psi == phi:
        raise ValueError("psi and phi must be distinct labels")
    if BLANK in (psi, phi):
        raise ValueError(f"the blank label {BLANK!r} cannot be cloned")


def ideal_clone(a: complex, b: complex, psi: str, phi: str,
                stats: Statistics = Statistics.BOSON) -> State:
    """What a perfect copier would produce from ``|a psi_h + b phi_h, 0_t>``.

    Expanded term by term:
    a²|ψ_h,ψ_t> + ab(|ψ_h,φ_t> + |φ_h,ψ_t>) + b²|φ_h,φ_t>.
    """
    _check_amplitudes(a, b, psi, phi)
    sym = lambda x, y: symmetrize(here(x), there(y), stats)  # noqa: E731
    return (
        a * a * sym(psi, psi)
        + a * b * (sym(psi, phi) + sym(phi, psi))
        + b * b * sym(phi, phi)
    )


@dataclass(frozen=True)
class CloneVerdict:
    ideal_state: State
    linear_state: State
    fidelity: float
    is_clone: bool


def no_cloning_gap(a: complex, b: complex, psi: str, phi: str,
                   stats: Statistics = Statistics.BOSON) -> CloneVerdict:
    """Compare the ideal clone with what linearity forces ``T`` to output."""
    _check_amplitudes(a, b, psi, phi)
    clone_map = CloneMap.for_labels([psi, phi], stats)
    source = a * clone_input(psi, stats) + b * clone_input(phi, stats)
    linear = apply_clone_map(clone_map, source)
    ideal = ideal_clone(a, b, psi, phi, stats)
    fidelity = min(abs(inner(ideal, linear)), 1.0)
    return CloneVerdict(ideal, linear, fidelity, fidelity >= 1 - CLONE_TOL)


def naive_slot_clone(state: State) -> State:
    """Per-term substitution |x_l⟩|y_m⟩ -> |x_l⟩|x_m⟩, applied to each product term.

    This treats ``T`` as acting on bare direct products, copying slot 1's
    internal state into slot 2 while keeping slot 2's location.
    """
    if state.particle_count != 2:
        raise ValueError("naive_slot_clone acts on two-particle states")
    out = State.zero(2)
    for (first, second), amp in state.items():
        copied = BasisLabel(first.internal, second.location)
        out = out + amp * tensor(ket(first), ket(copied))
    return out


def wrong_clone_demo(phi: str, stats: Statistics = Statistics.BOSON) -> tuple[State, State, float]:
    """Return (wrong, ideal, |<ideal|wrong>|) for slot-wise copying of |φ_h, 0_t>."""
    if phi == BLANK:
        raise ValueError(f"the blank label {BLANK!r} cannot be cloned")
    wrong = naive_slot_clone(clone_input(phi, stats))
    ideal = clone_output(phi, stats)
    return wrong, ideal, abs(inner(ideal, wrong))


def grid_amplitudes(points: int) -> Sequence[tuple[float, float]]:
    """``points`` real (a, b) pairs on the unit circle's first quadrant, endpoints included."""
    if points < 2:
        raise ValueError("need at least two points")
    out = []
    for k in range(points):
        theta = 0.5 * math.pi * k / (points - 1)
        a, b = math.cos(theta), math.sin(theta)
        # snap the endpoints so the pure basis states are exact
        if k == 0:
            a, b = 1.0, 0.0
        elif k == points - 1:
            a, b = 0.0, 1.0
        out.append((a, b))
    return out

