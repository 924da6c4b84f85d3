"""Brute-force spin-space oracle for small chains.

Everything here works on the dense 2^N-dimensional spin Hamiltonian with
periodic boundaries and knows nothing about fermions or momentum space: it
exists to verify the momentum-space engines independently.  Ground states
are taken inside the even sector of the parity operator P = prod_j sz_j,
and time evolution uses one full eigendecomposition of the charging
Hamiltonian (no stepping error).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .quench import EnergyTrace

__all__ = [
    "DimerizedXY",
    "TransverseIsing",
    "SpinHamiltonian",
    "DegenerateGroundStateWarning",
    "build_hamiltonian",
    "parity_diagonal",
    "even_sector_ground_state",
    "oracle_energy_trace",
]

MAX_SITES = 12

_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]])
_ID = np.eye(2)

# sy x sy = -(isy) x (isy); isy is real, so the builder stays in float64.
_ISY = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True)
class DimerizedXY:
    """Battery chain: bonds 1 - (-1)^j delta with anisotropy gamma."""

    gamma: float
    delta: float


@dataclass(frozen=True)
class TransverseIsing:
    """H = (1/2) sum_j [sx_j sx_{j+1} + h sz_j]."""

    h: float


@dataclass(frozen=True)
class SpinHamiltonian:
    n_sites: int
    matrix: np.ndarray
    kind: DimerizedXY | TransverseIsing
    boundary: str = "periodic"

    def __post_init__(self):
        self.matrix.setflags(write=False)


class DegenerateGroundStateWarning(UserWarning):
    """Ground state selection is ambiguous at the 1e-10 level."""


def _kron_chain(ops) -> np.ndarray:
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def _two_site(op_a: np.ndarray, op_b: np.ndarray, j: int, n: int) -> np.ndarray:
    """op_a at site j, op_b at site j+1 (1-based, periodic)."""
    ops = [_ID] * n
    ops[(j - 1) % n] = op_a
    ops[j % n] = op_b
    return _kron_chain(ops)


def build_hamiltonian(kind: DimerizedXY | TransverseIsing, n_sites: int) -> SpinHamiltonian:
    """Assemble the dense periodic spin Hamiltonian term by term."""
    if int(n_sites) != n_sites or not 2 <= n_sites <= MAX_SITES:
        raise ValueError(f"n_sites must be an integer in [2, {MAX_SITES}], got {n_sites}")
    dim = 2**n_sites
    h = np.zeros((dim, dim))
    if isinstance(kind, DimerizedXY):
        if n_sites % 2 != 0:
            raise ValueError("the dimerized XY chain needs an even number of sites")
        for j in range(1, n_sites + 1):
            bond = 1.0 - (-1.0) ** j * kind.delta
            h -= bond * (1.0 + kind.gamma) / 2.0 * _two_site(_SX, _SX, j, n_sites)
            # sy_j sy_{j+1} = -(i sy)_j (i sy)_{j+1}, real arithmetic throughout
            h -= bond * (1.0 - kind.gamma) / 2.0 * (-_two_site(_ISY, _ISY, j, n_sites))
    elif isinstance(kind, TransverseIsing):
        for j in range(1, n_sites + 1):
            h += 0.5 * _two_site(_SX, _SX, j, n_sites)
            ops = [_ID] * n_sites
            ops[j - 1] = _SZ
            h += 0.5 * kind.h * _kron_chain(ops)
    else:
        raise TypeError(f"unknown Hamiltonian kind {kind!r}")
    return SpinHamiltonian(n_sites=n_sites, matrix=h, kind=kind)


def parity_diagonal(n_sites: int) -> np.ndarray:
    """Diagonal of P = prod_j sz_j over the computational basis."""
    idx = np.arange(2**n_sites)
    pop = np.zeros_like(idx)
    for bit in range(n_sites):
        pop += (idx >> bit) & 1
    return np.where(pop % 2 == 0, 1.0, -1.0)


def _even_indices(n_sites: int) -> np.ndarray:
    return np.nonzero(parity_diagonal(n_sites) > 0)[0]


def _even_block(ham: SpinHamiltonian) -> np.ndarray:
    idx = _even_indices(ham.n_sites)
    return ham.matrix[np.ix_(idx, idx)]


def even_sector_ground_state(ham: SpinHamiltonian) -> np.ndarray:
    """Normalized lowest eigenvector with parity +1, in the full 2^N space.

    Warns with :class:`DegenerateGroundStateWarning` when the selection is
    ambiguous: another even state, or the odd-sector minimum, lies within
    1e-10 of the even ground energy.
    """
    idx = _even_indices(ham.n_sites)
    vals, vecs = np.linalg.eigh(ham.matrix[np.ix_(idx, idx)])
    if len(vals) > 1 and vals[1] - vals[0] < 1e-10:
        warnings.warn(
            f"even-sector ground state degenerate within {vals[1] - vals[0]:.3e}",
            DegenerateGroundStateWarning,
        )
    odd_idx = np.nonzero(parity_diagonal(ham.n_sites) < 0)[0]
    odd_min = float(np.min(np.linalg.eigvalsh(ham.matrix[np.ix_(odd_idx, odd_idx)])))
    if abs(odd_min - vals[0]) < 1e-10:
        warnings.warn(
            f"even and odd sector ground energies within {abs(odd_min - vals[0]):.3e}",
            DegenerateGroundStateWarning,
        )
    full = np.zeros(ham.matrix.shape[0], dtype=complex)
    full[idx] = vecs[:, 0]
    return full


def oracle_energy_trace(
    battery: SpinHamiltonian, charger: SpinHamiltonian, times: np.ndarray
) -> EnergyTrace:
    """dE(t) = <psi(t)|H_B|psi(t)> - E_gs with psi evolved exactly by the charger.

    The initial state is the even-sector ground state of the battery; the
    evolution stays in that sector because both Hamiltonians commute with
    parity, so everything is done inside the even block.
    """
    if battery.n_sites != charger.n_sites:
        raise ValueError("battery and charger must share n_sites")
    times = np.asarray(times, dtype=float)
    idx = _even_indices(battery.n_sites)
    hb = battery.matrix[np.ix_(idx, idx)]
    hc = charger.matrix[np.ix_(idx, idx)]
    psi0 = even_sector_ground_state(battery)[idx]
    e0 = float(np.real(psi0.conj() @ hb @ psi0))
    w, qmat = np.linalg.eigh(hc)
    coeff = qmat.conj().T @ psi0
    values = np.empty(times.size, dtype=float)
    for i, t in enumerate(times):
        psi_t = qmat @ (np.exp(-1j * w * t) * coeff)
        values[i] = float(np.real(psi_t.conj() @ hb @ psi_t)) - e0
    return EnergyTrace(
        times=times.copy(),
        values=values,
        protocol=(battery.kind, charger.kind, battery.n_sites),
        evaluator="ed-oracle",
    )
