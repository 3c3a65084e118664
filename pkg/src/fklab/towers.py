"""Kakutani-Rohlin towers for the Beatty suspension.

The hull of omega(alpha) is the suspension of the gap sequence, so the
abstract flow-box induction specializes to return words of the symbolic gap
sequence: floors are words over the gap letters, heights are word lengths in
real time, and the homology matrix counts letters per word.  The transverse
measure is replaced by empirical occurrence frequencies over a finite window.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .environments import PointSet
from .errors import DomainError, InsufficientDataError
from .exact import AlphaValue


@dataclass(frozen=True)
class Tower:
    level: int
    labels: Tuple[Tuple[int, ...], ...]  # flat gap-letter words, one per floor
    heights: np.ndarray
    base_index: int
    nu: np.ndarray  # empirical transverse frequencies (counts / realized span)
    sequence: np.ndarray  # floor indices along the window
    span: float
    periodic: bool

    @property
    def base_label(self) -> Tuple[int, ...]:
        return self.labels[self.base_index]

    def measure_mass(self) -> float:
        """sum_a nu_a H_a, which approximates 1 for long windows."""
        return float(np.dot(self.nu, self.heights))


@dataclass(frozen=True)
class HomologyMatrix:
    entries: np.ndarray  # (lower floors) x (upper floors), integer letter counts
    row_labels: Tuple[Tuple[int, ...], ...]
    col_labels: Tuple[Tuple[int, ...], ...]


def level0_tower(alpha: AlphaValue, window_length: float) -> Tower:
    """Floors are the gap letters of omega(alpha) read over [0, window_length]."""
    if window_length < 1000.0 * alpha.max_gap():
        raise DomainError("window must cover at least 1000 max gaps")
    ps = PointSet(alpha)
    idx = ps.raw_indices_in(0, int(window_length))
    gaps = np.diff(idx).astype(np.int64)
    letters = sorted(set(int(g) for g in gaps))
    lookup = {g: i for i, g in enumerate(letters)}
    seq = np.array([lookup[int(g)] for g in gaps], dtype=np.int32)
    counts = np.bincount(seq, minlength=len(letters)).astype(float)
    span = float(idx[-1] - idx[0])
    labels = tuple((g,) for g in letters)
    heights = np.array([float(g) for g in letters])
    return Tower(
        level=0,
        labels=labels,
        heights=heights,
        base_index=0,  # lexicographically smallest letter
        nu=counts / span,
        sequence=seq,
        span=span,
        periodic=alpha.is_rational,
    )


def induce_tower(t: Tower, alpha: AlphaValue, window_length: float) -> Tuple[Tower, HomologyMatrix]:
    """Induce on the base floor: new floors are the distinct return words.

    Heights are computed through the homology matrix, so the column identity
    sum_a M[a, b] H_a = H_b holds exactly.  If only one return word shows up
    the splitting trick (split the base by its follower letter) is attempted;
    for gap sequences the follower of a unique return word is always the same
    letter, so the system is periodic and the tower is returned as-is.
    """
    # each induction level trims boundary words, so allow a small shortfall
    if window_length > 1.05 * t.span + 100.0:
        raise DomainError("tower was built over a much shorter window than requested")
    seq = t.sequence
    occ = np.flatnonzero(seq == t.base_index)
    if occ.size < 100:
        raise DomainError("base floor must occur at least 100 times in the window")

    words = [tuple(int(v) for v in seq[occ[i] : occ[i + 1]]) for i in range(occ.size - 1)]
    distinct = sorted(set(words), key=lambda w: (tuple(t.labels[i] for i in w), w))
    # A single return word means the sequence is periodic.  The splitting
    # trick (split the base by the follower letter) cannot separate anything
    # then, because the unique word forces a unique follower; the general
    # construction below still yields the correct one-floor induced tower.
    counts = {w: 0 for w in distinct}
    for w in words:
        counts[w] += 1
    shallow = [w for w in distinct if counts[w] < 2]
    if shallow:
        raise InsufficientDataError(
            f"{len(shallow)} return word(s) observed fewer than twice; lengthen the window"
        )

    n_lower = len(t.labels)
    M = np.zeros((n_lower, len(distinct)), dtype=np.int64)
    for b, w in enumerate(distinct):
        for i in w:
            M[i, b] += 1
    heights = M.T.astype(float) @ t.heights
    labels = tuple(sum((t.labels[i] for i in w), ()) for w in distinct)
    word_id = {w: b for b, w in enumerate(distinct)}
    seq1 = np.array([word_id[w] for w in words], dtype=np.int32)
    counts_arr = np.bincount(seq1, minlength=len(distinct)).astype(float)
    span1 = float(np.sum(counts_arr * heights))
    base1 = min(range(len(labels)), key=lambda b: labels[b])
    tower1 = Tower(
        level=t.level + 1,
        labels=labels,
        heights=heights,
        base_index=base1,
        nu=counts_arr / span1,
        sequence=seq1,
        span=span1,
        periodic=t.periodic,
    )
    return tower1, HomologyMatrix(entries=M, row_labels=t.labels, col_labels=labels)


def tower_measure_residual(lower: Tower, upper: Tower, M: HomologyMatrix) -> float:
    """max_a | nu^l_a - sum_b M[a, b] nu^{l+1}_b | for empirical frequencies."""
    if M.entries.shape != (len(lower.labels), len(upper.labels)):
        raise DomainError("homology matrix shape does not match the tower pair")
    if upper.level != lower.level + 1:
        raise DomainError("towers must be consecutive levels")
    predicted = M.entries.astype(float) @ upper.nu
    return float(np.max(np.abs(lower.nu - predicted)))
