"""Sparse ket algebra over a labeled orthonormal basis.

A many-particle state is a finite map from ordered tuples of basis labels to
complex amplitudes. Tuple slot ``k`` holds particle ``k + 1``. Distinct labels
are orthonormal, so "here" and "there" are orthogonal by construction.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable, Hashable, Iterable, Mapping, Optional, Sequence

import numpy as np

# Amplitudes below this modulus are dropped.
ZERO_TOL = 1e-12
# Singular values below this count as zero when deciding rank.
RANK_TOL = 1e-10

SQRT1_2 = 1 / math.sqrt(2)


class ZeroNormState(ValueError):
    """Raised when an operation would produce the zero vector as a physical state."""


class NotSeparable(ValueError):
    """Raised when a state does not factor across the requested split."""


class Statistics(enum.Enum):
    BOSON = 1
    FERMION = -1

    @property
    def sign(self) -> int:
        return self.value

    @classmethod
    def parse(cls, name: str) -> "Statistics":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown statistics {name!r}; expected boson or fermion") from None


@dataclass(frozen=True)
class BasisLabel:
    """An orthonormal basis element: internal state plus optional location tag."""

    internal: str
    location: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.internal, str) or not self.internal:
            raise ValueError("basis label needs a non-empty internal label")
        if self.location is not None and (not isinstance(self.location, str) or not self.location):
            raise ValueError("location must be a non-empty string or None")

    @property
    def sort_key(self) -> tuple[str, str]:
        return (self.internal, self.location or "")

    def __str__(self) -> str:
        return self.internal if self.location is None else f"{self.internal}_{self.location}"


def _tuple_key(labels: tuple[BasisLabel, ...]):
    return tuple(label.sort_key for label in labels)


class State:
    """Immutable sparse n-particle ket.

    ``amplitudes`` maps length-``particle_count`` tuples of :class:`BasisLabel`
    to complex numbers. Entries with modulus below ``ZERO_TOL`` never appear.
    """

    __slots__ = ("_n", "_amps")

    def __init__(self, particle_count: int, amplitudes: Mapping[tuple, complex] | None = None):
        if not isinstance(particle_count, (int, np.integer)) or particle_count < 1:
            raise ValueError("particle_count must be a positive integer")
        amps: dict[tuple[BasisLabel, ...], complex] = {}
        for key, amp in (amplitudes or {}).items():
            key = tuple(key)
            if len(key) != particle_count:
                raise ValueError(f"key {key} does not have {particle_count} entries")
            if not all(isinstance(label, BasisLabel) for label in key):
                raise TypeError("state keys must be tuples of BasisLabel")
            amp = complex(amp)
            if not (math.isfinite(amp.real) and math.isfinite(amp.imag)):
                raise ValueError("amplitudes must be finite")
            if abs(amp) >= ZERO_TOL:
                amps[key] = amp
        self._n = int(particle_count)
        self._amps = dict(sorted(amps.items(), key=lambda kv: _tuple_key(kv[0])))

    @classmethod
    def zero(cls, particle_count: int) -> "State":
        return cls(particle_count, {})

    @property
    def particle_count(self) -> int:
        return self._n

    @property
    def amplitudes(self) -> Mapping[tuple[BasisLabel, ...], complex]:
        return MappingProxyType(self._amps)

    def amplitude(self, *labels: BasisLabel) -> complex:
        return self._amps.get(tuple(labels), 0j)

    def labels(self) -> set[BasisLabel]:
        """Every basis label that appears in any slot."""
        return {label for key in self._amps for label in key}

    def items(self):
        return self._amps.items()

    def __len__(self) -> int:
        return len(self._amps)

    def __iter__(self):
        return iter(self._amps)

    def is_zero(self) -> bool:
        return not self._amps

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self._amps.values()))

    def is_normalized(self, tol: float = 1e-12) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def normalized(self) -> "State":
        nrm = self.norm()
        if nrm < ZERO_TOL:
            raise ZeroNormState("cannot normalize a zero-norm state")
        return self * (1.0 / nrm)

    def canonical(self) -> "State":
        """Normalized copy whose first amplitude (lexicographic order) is real positive."""
        if self.is_zero():
            return self
        state = self.normalized()
        first = next(iter(state._amps.values()))
        return state * (abs(first) / first)

    # arithmetic

    def _check_compatible(self, other: "State") -> None:
        if not isinstance(other, State):
            raise TypeError(f"expected State, got {type(other).__name__}")
        if other._n != self._n:
            raise ValueError(f"particle count mismatch: {self._n} vs {other._n}")

    def __add__(self, other: "State") -> "State":
        if not isinstance(other, State):
            return NotImplemented
        self._check_compatible(other)
        amps = dict(self._amps)
        for key, amp in other._amps.items():
            amps[key] = amps.get(key, 0j) + amp
        return State(self._n, amps)

    def __neg__(self) -> "State":
        return self * -1

    def __sub__(self, other: "State") -> "State":
        if not isinstance(other, State):
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar) -> "State":
        if isinstance(scalar, State):
            return NotImplemented
        scalar = complex(scalar)
        return State(self._n, {k: scalar * a for k, a in self._amps.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "State":
        return self * (1 / complex(scalar))

    def __eq__(self, other) -> bool:
        # exact structural equality; use ``same_ray`` / ``distance`` for tolerances
        if not isinstance(other, State):
            return NotImplemented
        return self._n == other._n and self._amps == other._amps

    def __hash__(self):
        return hash((self._n, tuple(self._amps.items())))

    def __repr__(self) -> str:
        if not self._amps:
            return f"State({self._n}, 0)"
        terms = " + ".join(
            f"({a.real:.6g}{a.imag:+.6g}j)|{','.join(map(str, k))}>" for k, a in self._amps.items()
        )
        return f"State({self._n}, {terms})"


def ket(*labels: BasisLabel | str) -> State:
    """Unit-amplitude product ket. Strings like ``"phi_h"`` are split at the last ``_``."""
    return State(len(labels), {tuple(_as_label(lab) for lab in labels): 1.0})


def _as_label(label: BasisLabel | str) -> BasisLabel:
    if isinstance(label, BasisLabel):
        return label
    internal, sep, location = label.rpartition("_")
    if sep and internal:
        return BasisLabel(internal, location)
    return BasisLabel(label)


def superpose(terms: Iterable[tuple[complex, State]]) -> State:
    terms = list(terms)
    if not terms:
        raise ValueError("superpose needs at least one term")
    out = State.zero(terms[0][1].particle_count)
    for coeff, state in terms:
        out = out + coeff * state
    return out


def tensor(a: State, b: State) -> State:
    """Direct product; particles of ``b`` follow those of ``a``."""
    amps = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            amps[ka + kb] = va * vb
    return State(a.particle_count + b.particle_count, amps)


def inner(a: State, b: State) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    a._check_compatible(b)
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    total = 0j
    for key in small:
        if key in large.amplitudes:
            total += a.amplitude(*key).conjugate() * b.amplitude(*key)
    return total


def distance(a: State, b: State) -> float:
    return (a - b).norm()


def same_ray(a: State, b: State, tol: float = 1e-12) -> bool:
    """True when the canonical forms of ``a`` and ``b`` agree within ``tol``."""
    return distance(a.canonical(), b.canonical()) < tol


def exchange(state: State, i: int, j: int) -> State:
    """Swap the contents of particle slots ``i`` and ``j`` in every term."""
    n = state.particle_count
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"particle indices ({i}, {j}) out of range for {n} particles")
    if i == j:
        raise ValueError("exchange needs two distinct particle indices")
    amps = {}
    for key, amp in state.items():
        swapped = list(key)
        swapped[i], swapped[j] = swapped[j], swapped[i]
        amps[tuple(swapped)] = amp
    return State(n, amps)


def symmetrize_raw(a: State, b: State, stats: Statistics) -> State:
    """(a⊗b ± b⊗a)/√2 without renormalization; exactly bilinear."""
    ab = tensor(a, b)
    ba = tensor(b, a)
    return (ab + stats.sign * ba) * SQRT1_2


def symmetrize(a: State, b: State, stats: Statistics) -> State:
    """Normalized two-particle state with the exchange symmetry of ``stats``.

    Raises :class:`ZeroNormState` for fermions in the same state (Pauli
    exclusion). Bosons sharing a state give the plain product with amplitude 1.
    """
    if a.particle_count != 1 or b.particle_count != 1:
        raise ValueError("symmetrize takes one-particle states")
    raw = symmetrize_raw(a, b, stats)
    if raw.norm() < ZERO_TOL:
        raise ZeroNormState(f"{stats.name.lower()} symmetrization vanishes (identical fermion states)")
    return raw.normalized()


def coefficient_matrix(
    state: State,
    row_key: Callable[[tuple], Hashable],
    col_key: Callable[[tuple], Hashable],
) -> tuple[np.ndarray, list, list]:
    """Arrange amplitudes into a matrix indexed by ``row_key(tuple)`` and ``col_key(tuple)``.

    Row and column index lists come back sorted so the layout is deterministic.
    ``row_key``/``col_key`` together must determine the tuple uniquely.
    """
    rows, cols, entries = set(), set(), {}
    for key, amp in state.items():
        r, c = row_key(key), col_key(key)
        if (r, c) in entries:
            raise ValueError("row/column keys do not identify basis tuples uniquely")
        entries[(r, c)] = amp
        rows.add(r)
        cols.add(c)
    row_list = sorted(rows, key=_sort_any)
    col_list = sorted(cols, key=_sort_any)
    ri = {r: k for k, r in enumerate(row_list)}
    ci = {c: k for k, c in enumerate(col_list)}
    mat = np.zeros((len(row_list), len(col_list)), dtype=complex)
    for (r, c), amp in entries.items():
        mat[ri[r], ci[c]] = amp
    return mat, row_list, col_list


def _sort_any(key):
    if isinstance(key, BasisLabel):
        return key.sort_key
    if isinstance(key, tuple):
        return tuple(_sort_any(k) for k in key)
    return key


def _internal_tuple(key: tuple) -> tuple[BasisLabel, ...]:
    return tuple(BasisLabel(label.internal) for label in key)


def _location_tuple(key: tuple) -> tuple[BasisLabel, ...]:
    return tuple(BasisLabel(label.location) for label in key)


def factorize_location(state: State) -> tuple[State, State]:
    """Split a state into (internal part) ⊗ (location part).

    The internal factor is normalized with its first amplitude real positive;
    the location factor carries the remaining norm and phase, so
    ``combine_location(internal, location)`` reproduces ``state``.
    Raises :class:`NotSeparable` when the internal/location Schmidt rank exceeds 1.
    """
    if state.is_zero():
        raise ZeroNormState("cannot factorize the zero state")
    if any(label.location is None for label in state.labels()):
        raise ValueError("every basis label needs a location to factorize")
    mat, rows, cols = coefficient_matrix(state, _internal_tuple, _location_tuple)
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    rank = int(np.sum(s > RANK_TOL * max(s[0], 1.0)))
    if rank != 1:
        raise NotSeparable(f"internal/location Schmidt rank is {rank}")
    n = state.particle_count
    left = u[:, 0]
    # first nonzero entry of the internal factor -> real positive
    pivot = left[np.flatnonzero(np.abs(left) >= ZERO_TOL)[0]]
    phase = abs(pivot) / pivot
    internal = State(n, {r: phase * c for r, c in zip(rows, left)})
    location = State(n, {c: s[0] * v / phase for c, v in zip(cols, vh[0])})
    return internal, location


def combine_location(internal: State, location: State) -> State:
    """Inverse of :func:`factorize_location`: attach location labels slot by slot."""
    internal._check_compatible(location)
    amps = {}
    for ki, ai in internal.items():
        for kl, al in location.items():
            key = tuple(BasisLabel(i.internal, l.internal) for i, l in zip(ki, kl))
            amps[key] = amps.get(key, 0j) + ai * al
    return State(internal.particle_count, amps)


def one_particle(coeffs: Mapping[BasisLabel | str, complex] | Sequence[tuple[BasisLabel | str, complex]]) -> State:
    """Build a one-particle superposition from label -> amplitude pairs."""
    pairs = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
    amps: dict[tuple[BasisLabel], complex] = {}
    for label, amp in pairs:
        key = (_as_label(label),)
        amps[key] = amps.get(key, 0j) + amp
    return State(1, amps)
