"""Discrete strings of beads.

A string of beads is an interval carrying finitely many point masses. Strings
built from an ordered CRP put the j-th spinal table at local-time position
j * n**(-alpha) with mass n_j / n; positions deliberately omit the constant
Gamma(1-alpha) local-time normalization, since every length-based check here
is two-sample with the same convention on both sides.

Strings carry the exponent ``alpha`` used for mass-to-length rescaling, which
``split_at`` and ``concat_beads`` need.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .crp import OrderedCrpState, run_crp
from .errors import ParameterError
from .rng import RngStream

_MASS_TOL = 1e-9


@dataclass(frozen=True)
class StringOfBeads:
    positions: np.ndarray
    masses: np.ndarray
    length: float
    alpha: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        mas = np.asarray(self.masses, dtype=float)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "masses", mas)
        if pos.shape != mas.shape or pos.ndim != 1:
            raise ParameterError("positions and masses must be aligned vectors")
        if len(pos) > 0:
            if np.any(mas <= 0):
                raise ParameterError("atom masses must be strictly positive")
            if np.any(pos <= 0):
                raise ParameterError("atom positions must be strictly positive")
            if np.any(np.diff(pos) <= 0):
                raise ParameterError("atom positions must be strictly increasing")
            if pos[-1] > self.length + 1e-12:
                raise ParameterError("last atom lies beyond the string length")

    @classmethod
    def empty(cls, alpha: float | None = None) -> "StringOfBeads":
        return cls(np.empty(0), np.empty(0), 0.0, alpha)

    @property
    def is_empty(self) -> bool:
        return len(self.positions) == 0

    @property
    def n_atoms(self) -> int:
        return len(self.positions)

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def to_csv(self) -> str:
        """CSV export: (atom_index, position, mass), 12 significant digits."""
        buf = io.StringIO()
        buf.write("atom_index,position,mass\n")
        for i, (p, m) in enumerate(zip(self.positions, self.masses)):
            buf.write(f"{i},{p:.12g},{m:.12g}\n")
        return buf.getvalue()


@dataclass(frozen=True)
class MassSplit:
    """Masses strictly before, at, and strictly after a selected atom."""

    before: float
    atom: float
    after: float

    @property
    def total(self) -> float:
        return self.before + self.atom + self.after


def beads_from_crp(state: OrderedCrpState) -> StringOfBeads:
    """Bead string of an ordered CRP: atom j at j * n**(-alpha), mass n_j / n."""
    n = state.n_customers
    scale = n ** (-state.alpha)
    k = state.n_tables
    positions = np.arange(1, k + 1, dtype=float) * scale
    masses = np.array([t.size for t in state.tables], dtype=float) / n
    return StringOfBeads(positions, masses, k * scale, state.alpha)


def coin_toss_sample(beads: StringOfBeads, alpha: float, theta: float,
                     rng: RngStream) -> tuple[int, MassSplit]:
    """Select an atom by the first-success walk; return its index and split.

    Walking left to right, atom i is selected with probability
    p(u) = (1-u)*theta/((1-u)*theta + u*alpha) where u is the fraction of the
    remaining mass strictly after atom i. The walk cannot pass the last atom
    (p(0) = 1); if floating-point exhaustion occurs the last atom is selected.
    """
    if beads.is_empty:
        raise ParameterError("cannot sample from an empty string of beads")
    if not 0 < alpha < 1 or theta <= 0:
        raise ParameterError("need 0 < alpha < 1 and theta > 0")
    idx = int(_kernels.coin_walk(beads.masses, 0, alpha, theta, rng.generator))
    before = float(beads.masses[:idx].sum())
    after = float(beads.masses[idx + 1:].sum())
    return idx, MassSplit(before, float(beads.masses[idx]), after)


def split_at(beads: StringOfBeads, index: int) -> tuple[StringOfBeads, float, StringOfBeads]:
    """Split at an atom into rescaled prefix and suffix strings.

    The prefix holds the atoms strictly before ``index`` with positions
    rescaled by before_mass**(-alpha) and masses by 1/before_mass (its length
    is the selected atom's position, rescaled); the suffix is analogous with
    the after-mass, positions measured from the selected atom. An empty side
    comes back as the distinct empty string of total mass 0.
    """
    if not 0 <= index < beads.n_atoms:
        raise ParameterError("atom index out of range")
    if beads.alpha is None:
        raise ParameterError("string carries no rescaling exponent alpha")
    a = beads.alpha
    before = float(beads.masses[:index].sum())
    after = float(beads.masses[index + 1:].sum())
    if index == 0 or before <= 0:
        prefix = StringOfBeads.empty(a)
    else:
        prefix = StringOfBeads(
            beads.positions[:index] * before ** (-a),
            beads.masses[:index] / before,
            float(beads.positions[index]) * before ** (-a),
            a,
        )
    if index == beads.n_atoms - 1 or after <= 0:
        suffix = StringOfBeads.empty(a)
    else:
        suffix = StringOfBeads(
            (beads.positions[index + 1:] - beads.positions[index]) * after ** (-a),
            beads.masses[index + 1:] / after,
            (beads.length - float(beads.positions[index])) * after ** (-a),
            a,
        )
    return prefix, float(beads.masses[index]), suffix


def concat_beads(g: float, d: float, left: StringOfBeads, right: StringOfBeads) -> StringOfBeads:
    """Join two unit-mass strings with a middle atom of mass d - g.

    The left string is scaled by (g**alpha, g), the middle atom sits at
    g**alpha * len(left), and the right string is scaled by ((1-d)**alpha,
    1-d) and appended after the atom. If the left string's final atom sits
    exactly at its length, the middle atom is nudged up by one ulp to keep
    positions strictly increasing (the two points coincide only through the
    finite-resolution convention that a CRP string ends at its last atom).
    """
    if not 0 < g < d < 1:
        raise ParameterError("need 0 < g < d < 1")
    a = left.alpha if left.alpha is not None else right.alpha
    if a is None:
        raise ParameterError("strings carry no rescaling exponent alpha")
    for s in (left, right):
        if s.is_empty or abs(s.total_mass - 1.0) > 1e-9:
            raise ParameterError("left and right must be non-empty with total mass 1")
    lscale = g ** a
    rscale = (1.0 - d) ** a
    mid_pos = lscale * left.length
    positions = [left.positions * lscale]
    masses = [left.masses * g]
    if len(left.positions) > 0 and positions[0][-1] >= mid_pos:
        mid_pos = np.nextafter(positions[0][-1], np.inf)
    positions.append(np.array([mid_pos]))
    masses.append(np.array([d - g]))
    positions.append(mid_pos + right.positions * rscale)
    masses.append(right.masses * (1.0 - d))
    length = lscale * left.length + rscale * right.length
    if mid_pos > length:
        length = mid_pos
    return StringOfBeads(np.concatenate(positions), np.concatenate(masses), length, a)


def beads_via_stick_breaking(alpha: float, theta: float, n_sticks: int, crp_n: int,
                             rng: RngStream) -> StringOfBeads:
    """Concatenation of rescaled (alpha, 0) bead strings over Beta(1, theta) sticks.

    Stick i has mass V_i - V_{i-1} where V_i = 1 - prod(1 - Y_j),
    Y_j ~ Beta(1, theta); it is shattered by an independent (alpha, 0) string
    of resolution crp_n, scaled by (stick**alpha, stick). The undivided tail
    mass 1 - V_{n_sticks} is dropped and recorded under meta['discarded_mass'].
    """
    if not 0 < alpha < 1 or theta <= 0:
        raise ParameterError("need 0 < alpha < 1 and theta > 0")
    if n_sticks < 1 or crp_n < 1:
        raise ParameterError("n_sticks and crp_n must be >= 1")
    gen = rng.generator
    positions = []
    masses = []
    offset = 0.0
    v = 0.0
    for _ in range(n_sticks):
        y = gen.beta(1.0, theta)
        stick = (1.0 - v) * y
        v += stick
        piece = beads_from_crp(run_crp(alpha, 0.0, crp_n, rng))
        positions.append(offset + piece.positions * stick ** alpha)
        masses.append(piece.masses * stick)
        offset += piece.length * stick ** alpha
    return StringOfBeads(
        np.concatenate(positions),
        np.concatenate(masses),
        offset,
        alpha,
        {"discarded_mass": 1.0 - v},
    )
