"""One-sided multiresolution ladder ``V_N = V_0 + W_0 + W_1 + W_2 + ... + W_{N/2}``."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .monomial import substitute_squares
from .sampling import approximate_fekete, random_subset, regular_points
from .wavelets import (
    DualWaveletBasis,
    IndependenceError,
    WaveletBasis,
    block_range,
    dual_build,
    independence_gate,
    top_degree,
    wavelet_build,
    wavelet_coefficients,
)
from .zernike import DiskPolynomial, dim_v, dim_w

__all__ = [
    "Level",
    "MraLadder",
    "LevelBasis",
    "LevelCoeffs",
    "Decomposition",
    "is_power_of_two",
    "project_onto_VN",
    "build_level_bases",
    "decompose",
    "reconstruct",
    "dilation_check",
    "write_decomposition_csv",
]


def is_power_of_two(N: int) -> bool:
    return N >= 1 and N & (N - 1) == 0


@dataclass(frozen=True)
class Level:
    """A rung of the ladder. ``wavelet_level`` is None for V_0."""

    wavelet_level: int | None
    start: int
    stop: int

    @property
    def name(self) -> str:
        return "V_0" if self.wavelet_level is None else f"W_{self.wavelet_level}"

    @property
    def size(self) -> int:
        return self.stop - self.start


@dataclass(frozen=True)
class MraLadder:
    top: int
    levels: tuple[Level, ...]

    @classmethod
    def build(cls, N: int) -> "MraLadder":
        if not is_power_of_two(N):
            raise ValueError(f"ladder degree must be a power of 2, got {N}")
        levels = [Level(None, 0, 1)]
        for M in [0] + [2**k for k in range(int(math.log2(N)))]:
            levels.append(Level(M, *block_range(M)))
        ladder = cls(N, tuple(levels))
        ladder.check()
        return ladder

    @property
    def wavelet_levels(self) -> list[int]:
        return [lv.wavelet_level for lv in self.levels if lv.wavelet_level is not None]

    def check(self):
        covered = np.zeros(dim_v(self.top), dtype=int)
        for lv in self.levels:
            covered[lv.start : lv.stop] += 1
        if not np.all(covered == 1):
            raise AssertionError("ladder index ranges do not partition V_N")
        assert sum(lv.size for lv in self.levels) == dim_v(self.top)


@dataclass(frozen=True, eq=False)
class LevelBasis:
    basis: WaveletBasis
    dual: DualWaveletBasis


def build_level_bases(ladder: MraLadder, strategy: str = "fekete", seed: int = 0) -> dict[int, LevelBasis]:
    """Wavelet bases and duals for every W level of the ladder.

    Candidates for W_M are the regular points of degree 2M (degree 1 for
    W_0). ``strategy`` is ``"fekete"`` or ``"random"``; random subsets draw
    from a per-level stream seeded by ``(seed, M)``.

    Raises
    ------
    IndependenceError
        With ``.level`` set, when a level's wavelets fail the gate.
    """
    out = {}
    for M in ladder.wavelet_levels:
        cand = regular_points(top_degree(M))
        start, stop = block_range(M)
        if strategy == "fekete":
            params = approximate_fekete(cand, start, stop)
        elif strategy == "random":
            params = random_subset(cand, dim_w(M), [seed, M])
        else:
            raise ValueError(f"unknown point strategy {strategy!r}")
        basis = wavelet_build(M, params)
        gate = independence_gate(basis)
        gate.raise_for_failure(M)
        out[M] = LevelBasis(basis, dual_build(basis))
    return out


def project_onto_VN(f: DiskPolynomial, N: int) -> DiskPolynomial:
    """Orthogonal projection onto V_N: truncate (or zero-pad) the coefficients."""
    J = dim_v(N)
    c = f.coeffs[:J]
    return DiskPolynomial(N, np.pad(c, (0, J - c.size)))


@dataclass(frozen=True, eq=False)
class LevelCoeffs:
    level: int
    analysis: np.ndarray  # <f_M, psi_{M,j}>
    points: np.ndarray  # parameter points (mu, omega)
    synthesis: np.ndarray  # c_j with f_M = sum_j c_j psi_{M,j}

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.analysis) ** 2))


@dataclass(frozen=True, eq=False)
class Decomposition:
    top: int
    v0: complex
    levels: tuple[LevelCoeffs, ...]
    bases: dict

    @property
    def count(self) -> int:
        """Number of functions used, the V_0 constant included."""
        return 1 + sum(lc.analysis.size for lc in self.levels)

    def level(self, M: int) -> LevelCoeffs:
        for lc in self.levels:
            if lc.level == M:
                return lc
        raise KeyError(M)

    def replace(self, M: int, analysis) -> "Decomposition":
        """Copy with one level's analysis coefficients swapped out."""
        levels = []
        for lc in self.levels:
            if lc.level == M:
                a = np.asarray(analysis, dtype=complex)
                syn = self.bases[M].dual.duals.conj() @ self.bases[M].dual.reconstruct(a)
                lc = LevelCoeffs(M, a, lc.points, syn)
            levels.append(lc)
        return Decomposition(self.top, self.v0, tuple(levels), self.bases)


def decompose(f: DiskPolynomial, ladder: MraLadder, bases: dict[int, LevelBasis]) -> Decomposition:
    """Split ``P_N f`` across the ladder and expand each W block in its wavelets."""
    fp = project_onto_VN(f, ladder.top)
    levels = []
    for M in ladder.wavelet_levels:
        if M not in bases:
            raise KeyError(f"no wavelet basis for level W_{M}")
        lb = bases[M]
        gate = independence_gate(lb.basis)
        gate.raise_for_failure(M)
        start, stop = block_range(M)
        block = fp.coeffs[start:stop]
        levels.append(
            LevelCoeffs(
                M,
                wavelet_coefficients(block, lb.basis),
                lb.basis.points,
                lb.dual.synthesis_coefficients(block),
            )
        )
    return Decomposition(ladder.top, complex(fp.coeffs[0]), tuple(levels), bases)


def reconstruct(d: Decomposition) -> DiskPolynomial:
    """Reassemble the V_N polynomial: each block is ``sum_j <f, psi_j> dual_j``."""
    c = np.zeros(dim_v(d.top), dtype=complex)
    c[0] = d.v0
    for lc in d.levels:
        start, stop = block_range(lc.level)
        c[start:stop] = d.bases[lc.level].dual.reconstruct(lc.analysis)
    return DiskPolynomial(d.top, c)


def dilation_check(p: DiskPolynomial, j: int | None = None, tol: float = 1e-10) -> bool:
    """Is ``p(x^2, y^2)`` in ``V_{2^(j+1)}``?

    ``j`` defaults to the smallest with ``deg p <= 2^j``. ``p`` must lie in
    ``V_{2^j}``.
    """
    deg = p.degree
    if j is None:
        j = 0 if deg <= 1 else math.ceil(math.log2(deg))
    if np.any(np.abs(p.coeffs[dim_v(2**j) :]) > tol):
        raise ValueError(f"polynomial is not in V_{2**j}")
    q = substitute_squares(p)
    return bool(np.all(np.abs(q.coeffs[dim_v(2 ** (j + 1)) :]) <= tol))


def write_decomposition_csv(path, d: Decomposition) -> None:
    """Columns ``level,slot,mu,omega,re,im``; the V_0 row has level -1 and no point."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["level", "slot", "mu", "omega", "re", "im"])
        w.writerow([-1, 0, "", "", f"{d.v0.real:.17g}", f"{d.v0.imag:.17g}"])
        for lc in d.levels:
            for slot, ((mu, om), a) in enumerate(zip(lc.points, lc.analysis)):
                w.writerow([lc.level, slot, f"{mu:.17g}", f"{om:.17g}", f"{a.real:.17g}", f"{a.imag:.17g}"])
