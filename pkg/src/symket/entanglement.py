"""Schmidt analysis, the polarization-entangled photon pair, and collapse."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .hilbert import (
    RANK_TOL,
    SQRT1_2,
    State,
    Statistics,
    ZeroNormState,
    coefficient_matrix,
    combine_location,
    exchange,
    ket,
    symmetrize,
    tensor,
    _internal_tuple,
    _location_tuple,
)

PROB_TOL = 1e-12


class BipartiteSplit(enum.Enum):
    """How a two-particle basis tuple is cut into subsystems A and B."""

    PARTICLES = "particles"  # slot 1 | slot 2
    INTERNAL_LOCATION = "internal-location"  # internal labels | location labels

    def keys(self):
        if self is BipartiteSplit.PARTICLES:
            return (lambda key: key[:1]), (lambda key: key[1:])
        return _internal_tuple, _location_tuple


@dataclass(frozen=True)
class SchmidtResult:
    coefficients: np.ndarray
    left_vectors: tuple[State, ...]
    right_vectors: tuple[State, ...]
    rank: int
    split: BipartiteSplit = BipartiteSplit.PARTICLES

    def reconstruct(self) -> State:
        """Σ c_i |l_i>⊗|r_i>, joined the way ``split`` cut the state."""
        join = tensor if self.split is BipartiteSplit.PARTICLES else combine_location
        out = None
        for c, l, r in zip(self.coefficients, self.left_vectors, self.right_vectors):
            term = c * join(l, r)
            out = term if out is None else out + term
        return out


def schmidt(state: State, split: BipartiteSplit = BipartiteSplit.PARTICLES) -> SchmidtResult:
    """Singular-value decomposition of the coefficient matrix induced by ``split``.

    Only components with coefficient above ``RANK_TOL`` are kept.
    """
    if state.particle_count != 2:
        raise ValueError("schmidt expects a two-particle state")
    if state.norm() < RANK_TOL:
        raise ZeroNormState("cannot Schmidt-decompose the zero state")
    if split is BipartiteSplit.INTERNAL_LOCATION and any(
        label.location is None for label in state.labels()
    ):
        raise ValueError("internal/location split needs location labels on every particle")
    row_key, col_key = split.keys()
    mat, rows, cols = coefficient_matrix(state, row_key, col_key)
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    keep = s > RANK_TOL
    rank = int(np.sum(keep))
    n_left = len(rows[0])
    n_right = len(cols[0])
    lefts, rights = [], []
    for k in np.flatnonzero(keep):
        lefts.append(State(n_left, dict(zip(rows, u[:, k]))))
        rights.append(State(n_right, dict(zip(cols, vh[k]))))
    return SchmidtResult(s[keep].copy(), tuple(lefts), tuple(rights), rank, split)


def photon_pair_naive() -> State:
    """(|H>_1|H>_2 + |V>_1|V>_2)/√2 written as a bare product-basis state."""
    return SQRT1_2 * (ket("H_1", "H_2") + ket("V_1", "V_2"))


def photon_pair_symmetrized() -> State:
    """(|H_1,H_2> + |V_1,V_2>)/√2 with each term boson-symmetrized."""
    boson = Statistics.BOSON
    hh = symmetrize(ket("H_1"), ket("H_2"), boson)
    vv = symmetrize(ket("V_1"), ket("V_2"), boson)
    return SQRT1_2 * (hh + vv)


def exchange_eigenvalue(state: State, tol: float = 1e-12) -> Optional[int]:
    """+1 or -1 if ``state`` is an eigenstate of swapping particles 1 and 2, else None."""
    swapped = exchange(state, 0, 1)
    for sign in (1, -1):
        if (swapped - sign * state).norm() < tol:
            return sign
    return None


def _slot_at(key: tuple, location: str) -> Optional[int]:
    slots = [k for k, label in enumerate(key) if label.location == location]
    if len(slots) > 1:
        raise ValueError(f"more than one particle at location {location!r} in {key}")
    return slots[0] if slots else None


def project(state: State, location: str, outcome: str) -> State:
    """Unnormalized projection onto "the particle at ``location`` has internal ``outcome``".

    The projector is keyed on the location label, not on the tuple slot.
    """
    kept = {}
    for key, amp in state.items():
        slot = _slot_at(key, location)
        if slot is not None and key[slot].internal == outcome:
            kept[key] = amp
    return State(state.particle_count, kept)


def outcome_probabilities(
    state: State, location: str, outcomes: Sequence[str]
) -> tuple[dict[str, float], float]:
    """Born probabilities for each outcome and the probability left unaccounted for."""
    if not any(label.location == location for label in state.labels()):
        raise ValueError(f"location {location!r} does not occur in the state")
    outcomes = list(dict.fromkeys(outcomes))
    total = state.norm() ** 2
    probs = {x: project(state, location, x).norm() ** 2 / total for x in outcomes}
    deficit = max(0.0, 1.0 - sum(probs.values()))
    return probs, deficit


@dataclass(frozen=True)
class MeasurementRecord:
    location: str
    outcome: Optional[str]  # None: landed outside the listed outcomes
    probability: float
    post_state: State
    probabilities: Mapping[str, float] = field(default_factory=dict)
    deficit: float = 0.0

    @property
    def projector_label(self) -> tuple[str, Optional[str]]:
        return (self.location, self.outcome)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def measure(
    state: State,
    location: str,
    outcomes: Sequence[str],
    seed: int | np.random.Generator | None = None,
) -> MeasurementRecord:
    """Measure the internal label of the particle at ``location`` and collapse.

    The sampled outcome follows the Born probabilities. If the listed outcomes
    do not exhaust the state, the leftover probability is reported as
    ``deficit`` and may itself be sampled (``outcome=None``). Passing a
    ``Generator`` advances it, so a sequence of calls shares one stream.
    """
    if not state.is_normalized(1e-10):
        raise ValueError(f"state must be normalized (norm {state.norm():.15g})")
    probs, deficit = outcome_probabilities(state, location, outcomes)
    rng = _rng(seed)
    draw = rng.random()
    chosen: Optional[str] = None
    acc = 0.0
    for x, p in probs.items():
        acc += p
        if draw < acc and p > PROB_TOL:
            chosen = x
            break
    if chosen is None and deficit <= PROB_TOL:
        # rounding pushed the draw past the last bin; take the last possible outcome
        chosen = [x for x, p in probs.items() if p > PROB_TOL][-1]
    if chosen is None:
        projected = state
        for x in probs:
            projected = projected - project(state, location, x)
        probability = deficit
    else:
        projected = project(state, location, chosen)
        probability = probs[chosen]
    return MeasurementRecord(
        location=location,
        outcome=chosen,
        probability=probability,
        post_state=projected.canonical(),
        probabilities=dict(probs),
        deficit=deficit,
    )


def collapse(state: State, location: str, outcome: str) -> tuple[float, State]:
    """Deterministic version of :func:`measure`: (probability, normalized post-state)."""
    projected = project(state, location, outcome)
    p = projected.norm() ** 2 / state.norm() ** 2
    if p <= PROB_TOL:
        raise ZeroNormState(f"outcome {outcome!r} at {location!r} has zero probability")
    return p, projected.canonical()

