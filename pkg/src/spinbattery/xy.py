"""Momentum-space description of the dimerized anisotropic XY chain.

The chain of N = 2*n_dimers spins with bond strengths 1 -+ delta and
anisotropy gamma maps, in its even-parity sector, onto free fermions with
half-integer momentum labels q in {1/2, 3/2, ..., n_dimers - 1/2}.  Each q
carries a 4x4 Hermitian Bloch matrix whose spectrum (+w1, +w2, -w1, -w2)
gives the two quasiparticle bands

    w_{1/2}(q) = 2 sqrt((1 +- g d)^2 cos^2(pi q / Nd) + (d +- g)^2 sin^2(pi q / Nd))

in units of the overall exchange scale J = 1 (hbar = 1).  Everything here is
a pure function of its inputs; all containers are immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .sums import compensated_sum

__all__ = [
    "ChainParams",
    "ModeIndex",
    "BlochMatrix",
    "ModeSpectrum",
    "Phase",
    "momentum_modes",
    "bloch_hamiltonian",
    "dispersion",
    "mode_eigensystem",
    "classify_phase",
    "ground_energy",
    "spectral_gap",
]

# Tolerance band for the critical-line classifiers; inputs are exact reals.
CRITICAL_TOL = 1e-12

GAUGE_TAG = "largest-modulus-entry-real-positive"


@dataclass(frozen=True)
class ChainParams:
    """Anisotropy, dimerization and size of one XY chain instance.

    ``energy_scale`` is the exchange constant J; it exists for documentation
    only and must be 1 (all energies and times are expressed in units of J
    and 1/J).
    """

    gamma: float
    delta: float
    n_dimers: int
    energy_scale: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if self.delta < 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")
        if int(self.n_dimers) != self.n_dimers or self.n_dimers < 2:
            raise ValueError(f"n_dimers must be an integer >= 2, got {self.n_dimers}")
        if self.energy_scale != 1.0:
            raise ValueError("energy_scale J is the reference scale and must equal 1")

    @property
    def n_sites(self) -> int:
        return 2 * self.n_dimers


@dataclass(frozen=True)
class ModeIndex:
    """Half-integer momentum label q with derived momentum k = 2 pi q / n_dimers."""

    q: float
    n_dimers: int

    def __post_init__(self):
        two_q = 2.0 * self.q
        if two_q != round(two_q) or round(two_q) % 2 != 1:
            raise ValueError(f"q must be half-integer (m + 1/2), got {self.q}")
        if not 0 < self.q < self.n_dimers:
            raise ValueError(
                f"q={self.q} outside the mode set (0, {self.n_dimers}) for n_dimers={self.n_dimers}"
            )

    @property
    def k(self) -> float:
        return 2.0 * math.pi * self.q / self.n_dimers


def momentum_modes(n_dimers: int) -> tuple[ModeIndex, ...]:
    """All modes of the even-parity sector, ascending in q."""
    return tuple(ModeIndex(j + 0.5, n_dimers) for j in range(n_dimers))


@dataclass(frozen=True)
class BlochMatrix:
    """4x4 Hermitian single-mode matrix with its two structure constants."""

    entries: np.ndarray
    zq: complex
    wq: complex

    def __post_init__(self):
        self.entries.setflags(write=False)


@dataclass(frozen=True)
class ModeSpectrum:
    """Eigensystem of one Bloch matrix.

    ``eigvecs`` columns are ordered to the eigenvalues
    (+omega1, +omega2, -omega1, -omega2) with omega1 >= omega2 >= 0, and each
    column is phase-fixed so its largest-modulus entry is real positive
    (ties broken by lowest row index).
    """

    mode: ModeIndex
    omega1: float
    omega2: float
    eigvecs: np.ndarray
    gauge_tag: str = GAUGE_TAG

    def __post_init__(self):
        self.eigvecs.setflags(write=False)


class Phase(Enum):
    """Ground-state regions of the (gamma, delta) plane and its two critical lines."""

    FERROMAGNET_X = 1
    SPIN1_ANTIFERROMAGNET_X = 2
    DIMER_ALIGNED_Z = 3
    DIMER_ANTIALIGNED_Z = 4
    CRITICAL_GAMMA_DELTA = 5
    CRITICAL_DELTA_GAMMA = 6

    @property
    def region(self) -> int | None:
        return self.value if self.value <= 4 else None

    @property
    def label(self) -> str:
        return {
            Phase.FERROMAGNET_X: "ferromagnet-x",
            Phase.SPIN1_ANTIFERROMAGNET_X: "spin1-antiferromagnet-x",
            Phase.DIMER_ALIGNED_Z: "dimer-aligned-z",
            Phase.DIMER_ANTIALIGNED_Z: "dimer-antialigned-z",
            Phase.CRITICAL_GAMMA_DELTA: "critical-gamma-delta",
            Phase.CRITICAL_DELTA_GAMMA: "critical-delta-gamma",
        }[self]


# ----------------------------------------------------------------------
# batched internals (shared with the quench engine)
# ----------------------------------------------------------------------

def structure_constants(gamma: float, delta: float, k: np.ndarray | float):
    """Z and W entries of the Bloch matrix at momentum k = 2 pi q / n_dimers."""
    phase = np.exp(-1j * np.asarray(k))
    z = -((1.0 + delta) + (1.0 - delta) * phase)
    w = -gamma * ((1.0 + delta) - (1.0 - delta) * phase)
    return z, w


def bloch_stack(gamma: float, delta: float, n_dimers: int) -> np.ndarray:
    """Bloch matrices for every q, shape (n_dimers, 4, 4).

    Layout (rows/cols ordered as particle-A, particle-B, hole-A, hole-B):

        [[ 0,   Z,   0,  -W ],
         [ Z*,  0,   W*,  0 ],
         [ 0,   W,   0,  -Z ],
         [-W*,  0,  -Z*,  0 ]]

    Hermitian with zero diagonal and zero trace; the spectrum is symmetric
    about zero because the matrix anticommutes with diag(1, -1, 1, -1).
    """
    q = np.arange(n_dimers) + 0.5
    k = 2.0 * np.pi * q / n_dimers
    z, w = structure_constants(gamma, delta, k)
    h = np.zeros((n_dimers, 4, 4), dtype=complex)
    h[:, 0, 1] = z
    h[:, 1, 0] = np.conj(z)
    h[:, 0, 3] = -w
    h[:, 3, 0] = -np.conj(w)
    h[:, 1, 2] = np.conj(w)
    h[:, 2, 1] = w
    h[:, 2, 3] = -z
    h[:, 3, 2] = -np.conj(z)
    return h


def _orthonormalize_degenerate(vals: np.ndarray, vecs: np.ndarray, tol: float = 1e-10):
    """Deterministic Gram-Schmidt inside degenerate eigenvalue groups.

    ``vals``/``vecs`` are single-matrix eigh output (ascending).  The solver
    already returns an orthonormal basis; this pass only pins the choice
    within exactly degenerate subspaces to the ascending original column
    order so repeated runs agree bit for bit.
    """
    n = len(vals)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and abs(vals[stop] - vals[start]) <= tol:
            stop += 1
        if stop - start > 1:
            block = vecs[:, start:stop].copy()
            for c in range(block.shape[1]):
                v = block[:, c]
                for p in range(c):
                    v = v - (block[:, p].conj() @ v) * block[:, p]
                block[:, c] = v / np.linalg.norm(v)
            vecs[:, start:stop] = block
        start = stop
    return vecs


def _gauge_fix_columns(vecs: np.ndarray) -> np.ndarray:
    """Make the largest-modulus entry of each column real positive.

    FMA-based complex products can leave a one-ulp imaginary residue on
    z * conj(z), so the rotated lead entry is overwritten with its modulus
    to pin the convention exactly.
    """
    idx = np.argmax(np.abs(vecs), axis=-2)[..., None, :]
    lead = np.take_along_axis(vecs, idx, axis=-2)[..., 0, :]
    vecs = vecs * np.conj(lead)[..., None, :] / np.abs(lead)[..., None, :]
    rotated = np.take_along_axis(vecs, idx, axis=-2)
    np.put_along_axis(vecs, idx, np.abs(rotated).astype(complex), axis=-2)
    return vecs


# eigh ascending order is (-w1, -w2, +w2, +w1); map to (+w1, +w2, -w1, -w2)
_BAND_ORDER = np.array([3, 2, 0, 1])


def eigensystem_stack(bloch: np.ndarray):
    """Eigen-decompose a (n, 4, 4) Bloch stack.

    Returns ``(omegas, vecs)`` with ``omegas[:, 0] >= omegas[:, 1] >= 0`` and
    ``vecs`` columns ordered to (+w1, +w2, -w1, -w2), gauge fixed.  A failed
    eigensolver raises ``numpy.linalg.LinAlgError`` (never returns garbage).
    """
    vals, vecs = np.linalg.eigh(bloch)
    for i in range(bloch.shape[0]):
        span = max(1.0, float(np.max(np.abs(vals[i]))))
        if np.min(np.diff(vals[i])) <= 1e-10 * span:
            _orthonormalize_degenerate(vals[i], vecs[i], tol=1e-10 * span)
    vals = vals[:, _BAND_ORDER]
    vecs = vecs[:, :, _BAND_ORDER]
    vecs = _gauge_fix_columns(vecs)
    omegas = np.maximum(vals[:, :2], 0.0)
    return omegas, vecs


def dispersion_curves(gamma: float, delta: float, n_dimers: int) -> np.ndarray:
    """Closed-form bands, shape (n_dimers, 2) ordered (w1, w2) per mode."""
    q = np.arange(n_dimers) + 0.5
    x = np.pi * q / n_dimers
    cos2 = np.cos(x) ** 2
    sin2 = np.sin(x) ** 2
    plus = 2.0 * np.sqrt((1.0 + gamma * delta) ** 2 * cos2 + (delta + gamma) ** 2 * sin2)
    minus = 2.0 * np.sqrt((1.0 - gamma * delta) ** 2 * cos2 + (delta - gamma) ** 2 * sin2)
    return np.column_stack([plus, minus])


# ----------------------------------------------------------------------
# public per-mode operations
# ----------------------------------------------------------------------

def _check_mode(params: ChainParams, mode: ModeIndex) -> None:
    if mode.n_dimers != params.n_dimers:
        raise ValueError(
            f"mode built for n_dimers={mode.n_dimers}, params have {params.n_dimers}"
        )


def bloch_hamiltonian(params: ChainParams, mode: ModeIndex) -> BlochMatrix:
    """4x4 Bloch matrix of one momentum mode.

    Convention: the chain Hamiltonian equals (J/2) sum_q Psi_q^dag H_q Psi_q
    over the half-integer mode set, with Psi_q mixing the two dimer-sublattice
    fermions at q with their conjugates at n_dimers - q.  The 1/2 compensates
    the q <-> n_dimers - q double counting, so the eigenvalues of H_q are the
    band energies themselves.
    """
    _check_mode(params, mode)
    z, w = structure_constants(params.gamma, params.delta, mode.k)
    z = complex(z)
    w = complex(w)
    entries = np.array(
        [
            [0, z, 0, -w],
            [np.conj(z), 0, np.conj(w), 0],
            [0, w, 0, -z],
            [-np.conj(w), 0, -np.conj(z), 0],
        ],
        dtype=complex,
    )
    return BlochMatrix(entries=entries, zq=z, wq=w)


def dispersion(params: ChainParams, mode: ModeIndex) -> tuple[float, float]:
    """Band energies (omega1, omega2) with omega1 >= omega2 >= 0.

    The two closed-form branches never cross for gamma > 0, delta >= 0
    (their squared difference is 16 gamma delta), so the '+' branch is
    always omega1 and the '-' branch always omega2.
    """
    _check_mode(params, mode)
    x = math.pi * mode.q / params.n_dimers
    cos2 = math.cos(x) ** 2
    sin2 = math.sin(x) ** 2
    g, d = params.gamma, params.delta
    plus = 2.0 * math.sqrt((1.0 + g * d) ** 2 * cos2 + (d + g) ** 2 * sin2)
    minus = 2.0 * math.sqrt((1.0 - g * d) ** 2 * cos2 + (d - g) ** 2 * sin2)
    return (max(plus, minus), min(plus, minus))


def mode_eigensystem(params: ChainParams, mode: ModeIndex) -> ModeSpectrum:
    """Gauge-fixed eigensystem of one Bloch matrix."""
    bloch = bloch_hamiltonian(params, mode)
    omegas, vecs = eigensystem_stack(bloch.entries[None, :, :])
    return ModeSpectrum(
        mode=mode,
        omega1=float(omegas[0, 0]),
        omega2=float(omegas[0, 1]),
        eigvecs=vecs[0],
    )


def classify_phase(gamma: float, delta: float) -> Phase:
    """Place (gamma, delta) in the phase diagram.

    Boundary labels take precedence inside the tolerance band
    |g^2 d^2 - 1| <= 1e-12 or |d^2 - g^2| <= 1e-12; at the multicritical
    point gamma = delta = 1 both hold and CRITICAL_GAMMA_DELTA is reported.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    if abs(gamma**2 * delta**2 - 1.0) <= CRITICAL_TOL:
        return Phase.CRITICAL_GAMMA_DELTA
    if abs(delta**2 - gamma**2) <= CRITICAL_TOL:
        return Phase.CRITICAL_DELTA_GAMMA
    if gamma * delta < 1.0:
        return Phase.FERROMAGNET_X if delta < gamma else Phase.DIMER_ANTIALIGNED_Z
    return Phase.DIMER_ALIGNED_Z if delta < gamma else Phase.SPIN1_ANTIFERROMAGNET_X


def ground_energy(params: ChainParams) -> float:
    """Even-sector ground energy -(1/2) sum_q (omega1 + omega2)."""
    bands = dispersion_curves(params.gamma, params.delta, params.n_dimers)
    return -0.5 * compensated_sum(bands[:, 0] + bands[:, 1])


def spectral_gap(params: ChainParams) -> float:
    """Smallest single-quasiparticle energy over the mode set."""
    bands = dispersion_curves(params.gamma, params.delta, params.n_dimers)
    return float(np.min(bands))
