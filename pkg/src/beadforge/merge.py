"""Merging strings of beads along a sequence of cut points.

The deterministic operator consumes, for each cut, the segment of the source
string reaching from just after that string's previous cut up to and
including the cut atom, and concatenates the segments in cut order; the
output position of a point is its cumulative offset, so lengths add up and no
re-spacing happens. After the last cut every string contributes a terminal
segment running to its interval end (in string order), so leftover atoms and
trailing开 tail lengths are preserved.

Boundary atoms: a string may carry an atom at position 0 (a closed left
endpoint, as tree branches rooted at a vertex with mass do). Such an atom is
never re-spaced; it rides with its string's first emitted segment and lands
exactly on the segment's opening boundary, fusing with the atom already
there, or standing at the output origin when its segment opens the output.

The randomized variant selects a string with probability proportional to its
remaining mass and picks the cut atom by an (alpha, theta_i) first-success
walk on the remainder; merging k unit strings rescaled by an independent
Dirichlet(theta_1..theta_k) mass split produces an (alpha, sum theta_i)
string of beads, which the statistical suite checks against direct
constructions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .beads import StringOfBeads, beads_from_crp
from .crp import run_crp
from .distributions import SimplexVector, sample_dirichlet
from .errors import CutSequenceError, ParameterError
from .rng import RngStream

_MASS_TOL = 1e-9


@dataclass(frozen=True)
class Branch:
    """A mergeable interval: atoms at positions in [0, length], position 0 allowed."""

    length: float
    positions: np.ndarray
    masses: np.ndarray
    payloads: list | None = None

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        mas = np.asarray(self.masses, dtype=float)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "masses", mas)
        if len(pos) and (np.any(np.diff(pos) <= 0) or pos[0] < 0):
            raise ParameterError("branch positions must be >= 0 and strictly increasing")
        if len(pos) and pos[-1] > self.length + 1e-12:
            raise ParameterError("branch atom beyond branch length")
        if self.payloads is not None and len(self.payloads) != len(pos):
            raise ParameterError("payloads must align with atoms")


@dataclass(frozen=True)
class CutSequence:
    """Cuts as (string_index, atom_index) pairs, per-string indices increasing."""

    cuts: tuple

    def validate(self, branches) -> None:
        last = [-1] * len(branches)
        for s, a in self.cuts:
            if not 0 <= s < len(branches):
                raise CutSequenceError(f"cut references string {s} out of range")
            if not 0 <= a < len(branches[s].positions):
                raise CutSequenceError(f"cut references atom {a} out of range in string {s}")
            if a <= last[s]:
                raise CutSequenceError("per-string cut atoms must strictly increase")
            last[s] = a


@dataclass(frozen=True)
class Segment:
    string_index: int
    from_atom: int  # exclusive; -1 means the interval start
    to_atom: int | None  # inclusive; None marks the terminal segment to the interval end


@dataclass
class MergedBranch:
    positions: np.ndarray
    masses: np.ndarray
    payload_groups: list
    segments: list[Segment]
    length: float


def run_cut_merge(branches: list[Branch], cuts: CutSequence) -> MergedBranch:
    """Assemble the merged interval defined by a cut sequence."""
    cuts.validate(branches)
    heads = [0] * len(branches)  # first unconsumed atom per string
    prev_pos = [0.0] * len(branches)  # position of the last cut in each string
    prev_idx = [-1] * len(branches)
    out_pos: list[float] = []
    out_mass: list[float] = []
    out_pay: list[list] = []
    segments: list[Segment] = []
    cum = 0.0

    def emit(branch_i, lo, hi, end_pos):
        # emit atoms heads..hi of branch branch_i inside a segment opening at cum
        nonlocal cum
        b = branches[branch_i]
        start = prev_pos[branch_i]
        for j in range(lo, hi + 1):
            p = b.positions[j]
            pay = b.payloads[j] if b.payloads is not None else (branch_i, j)
            # a boundary atom (p == start == 0) lands exactly on the opening
            # junction: target then equals the previous cut atom's position bitwise
            target = cum + (p - start)
            if out_pos and target == out_pos[-1]:
                out_mass[-1] += b.masses[j]
                out_pay[-1].append(pay)
            else:
                out_pos.append(target)
                out_mass.append(float(b.masses[j]))
                out_pay.append([pay])
        cum += end_pos - start

    for s, a in cuts.cuts:
        b = branches[s]
        emit(s, heads[s], a, float(b.positions[a]))
        segments.append(Segment(s, prev_idx[s], a))
        heads[s] = a + 1
        prev_idx[s] = a
        prev_pos[s] = float(b.positions[a])
    for s, b in enumerate(branches):
        tail = b.length - prev_pos[s]
        if heads[s] < len(b.positions) or tail > 0:
            emit(s, heads[s], len(b.positions) - 1, b.length)
            segments.append(Segment(s, prev_idx[s], None))
            heads[s] = len(b.positions)
    return MergedBranch(np.array(out_pos), np.array(out_mass), out_pay, segments, cum)


@dataclass
class MergeTrace:
    """Cut-order segments plus the assembled output string."""

    segments: list[Segment]
    output: StringOfBeads
    cuts: CutSequence
    atom_sources: list  # per output atom, list of (string_index, atom_index)

    def to_json(self) -> str:
        return json.dumps(
            {
                "segments": [
                    {"string": s.string_index, "from": s.from_atom, "to": s.to_atom}
                    for s in self.segments
                ],
                "output": [[float(p), float(m)] for p, m in
                           zip(self.output.positions, self.output.masses)],
            }
        )


def _strings_to_branches(strings):
    return [Branch(s.length, s.positions, s.masses) for s in strings]


def merge_with_cutpoints(strings: list[StringOfBeads], cuts: CutSequence) -> MergeTrace:
    """Deterministic merge of bead strings along the given cut sequence."""
    if not strings:
        raise ParameterError("need at least one string")
    merged = run_cut_merge(_strings_to_branches(strings), cuts)
    alpha = next((s.alpha for s in strings if s.alpha is not None), None)
    out = StringOfBeads(merged.positions, merged.masses, merged.length, alpha)
    total_in = sum(s.total_mass for s in strings)
    if abs(out.total_mass - total_in) > _MASS_TOL:
        raise CutSequenceError("merge lost mass; cut sequence inconsistent")
    return MergeTrace(merged.segments, out, cuts, merged.payload_groups)


def merge_alpha_theta(strings: list[StringOfBeads], alpha: float, thetas,
                      rng: RngStream) -> MergeTrace:
    """Randomized merge: remaining-mass string selection plus first-success walks."""
    thetas = np.asarray(thetas, dtype=float)
    if len(strings) != len(thetas) or len(strings) == 0:
        raise ParameterError("need one theta per string")
    if np.any(thetas <= 0) or not 0 < alpha < 1:
        raise ParameterError("need 0 < alpha < 1 and positive thetas")
    if any(s.is_empty for s in strings):
        raise ParameterError("cannot merge empty strings")
    masses = np.concatenate([s.masses for s in strings])
    offsets = np.zeros(len(strings) + 1, dtype=np.int64)
    np.cumsum([s.n_atoms for s in strings], out=offsets[1:])
    cut_s = np.empty(len(masses), dtype=np.int64)
    cut_a = np.empty(len(masses), dtype=np.int64)
    nc = _kernels.merge_cuts(masses, offsets, alpha, thetas, rng.generator, cut_s, cut_a)
    cuts = CutSequence(tuple((int(cut_s[i]), int(cut_a[i] - offsets[cut_s[i]]))
                             for i in range(nc)))
    return merge_with_cutpoints(strings, cuts)


def build_merge_inputs(alpha: float, thetas, crp_n: int,
                       rng: RngStream) -> tuple[list[StringOfBeads], SimplexVector]:
    """k independent (alpha, theta_i) strings rescaled by a Dirichlet mass split.

    String i is built from a CRP of size crp_n and rescaled so its total mass
    equals the i-th Dirichlet weight (lengths scale with weight**alpha).
    """
    thetas = np.asarray(thetas, dtype=float)
    if len(thetas) < 1 or np.any(thetas <= 0) or not 0 < alpha < 1 or crp_n < 1:
        raise ParameterError("invalid merge input parameters")
    w = sample_dirichlet(thetas, rng)
    strings = []
    for i, wi in enumerate(w.weights):
        s = beads_from_crp(run_crp(alpha, float(thetas[i]), crp_n, rng))
        strings.append(StringOfBeads(
            s.positions * wi ** alpha, s.masses * wi, s.length * wi ** alpha, alpha))
    return strings, w
