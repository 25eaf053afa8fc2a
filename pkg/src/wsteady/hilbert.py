"""Hilbert-space bookkeeping for 3 three-level atoms coupled to a truncated cavity mode.

Basis convention (fixed, never configurable): atom 1 is the slowest index and
the photon number the fastest, i.e.

    index = ((a1 * 3 + a2) * 3 + a3) * cavity_dim + n

with atomic levels a_m in {0, 1, 2} and photon number n in {0, ..., n_max}.
All operators are dense complex ndarrays; frequencies are in units of g.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

ATOM_LEVELS = 3
ATOM_COUNT = 3


@dataclass(frozen=True)
class HilbertSpace:
    """Dimensions of the composite 3-atom (x) cavity space."""

    n_max: int = 2

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")

    @property
    def cavity_dim(self) -> int:
        return self.n_max + 1

    @property
    def total_dim(self) -> int:
        return ATOM_LEVELS**ATOM_COUNT * self.cavity_dim

    def encode(self, levels: tuple[int, int, int], n: int) -> int:
        """Map (atom levels, photon number) to the flat basis index."""
        a1, a2, a3 = levels
        if not all(0 <= a < ATOM_LEVELS for a in levels):
            raise ValueError(f"atomic levels out of range: {levels}")
        if not 0 <= n < self.cavity_dim:
            raise ValueError(f"photon number out of range: {n}")
        return ((a1 * ATOM_LEVELS + a2) * ATOM_LEVELS + a3) * self.cavity_dim + n

    def decode(self, idx: int) -> tuple[tuple[int, int, int], int]:
        """Inverse of encode."""
        if not 0 <= idx < self.total_dim:
            raise ValueError(f"basis index out of range: {idx}")
        idx, n = divmod(idx, self.cavity_dim)
        idx, a3 = divmod(idx, ATOM_LEVELS)
        a1, a2 = divmod(idx, ATOM_LEVELS)
        return (a1, a2, a3), n


def tensor_product(space: HilbertSpace, factors: list[np.ndarray]) -> np.ndarray:
    """Kronecker product of per-subsystem operators in the fixed order
    (atom 1, atom 2, atom 3, cavity).  Factor dims must multiply to total_dim."""
    dims = [ATOM_LEVELS, ATOM_LEVELS, ATOM_LEVELS, space.cavity_dim]
    if len(factors) != len(dims):
        raise ValueError(f"expected {len(dims)} factors, got {len(factors)}")
    for f, d in zip(factors, dims):
        if f.shape != (d, d):
            raise ValueError(f"factor shape {f.shape} does not match subsystem dim {d}")
    return reduce(np.kron, factors).astype(complex)


def atomic_transition_op(space: HilbertSpace, m: int, i: int, j: int) -> np.ndarray:
    """|i><j| on atom m (1-based), identity on everything else."""
    if m not in (1, 2, 3):
        raise ValueError(f"atom index must be 1..3, got {m}")
    if not (0 <= i < ATOM_LEVELS and 0 <= j < ATOM_LEVELS):
        raise ValueError(f"levels must be 0..2, got ({i}, {j})")
    ketbra = np.zeros((ATOM_LEVELS, ATOM_LEVELS), dtype=complex)
    ketbra[i, j] = 1.0
    eye_a = np.eye(ATOM_LEVELS, dtype=complex)
    eye_c = np.eye(space.cavity_dim, dtype=complex)
    factors = [eye_a, eye_a, eye_a, eye_c]
    factors[m - 1] = ketbra
    return tensor_product(space, factors)


def cavity_annihilation(space: HilbertSpace) -> np.ndarray:
    """Annihilation operator a on the truncated Fock ladder, identity on atoms."""
    a = np.zeros((space.cavity_dim, space.cavity_dim), dtype=complex)
    for n in range(1, space.cavity_dim):
        a[n - 1, n] = np.sqrt(n)
    eye_a = np.eye(ATOM_LEVELS, dtype=complex)
    return tensor_product(space, [eye_a, eye_a, eye_a, a])


def excitation_number(space: HilbertSpace) -> np.ndarray:
    """N_exc = a^dag a + sum_m |2>_m<2|.  Diagonal in the product basis."""
    a = cavity_annihilation(space)
    n_op = a.conj().T @ a
    for m in (1, 2, 3):
        n_op += atomic_transition_op(space, m, 2, 2)
    return n_op


def excited_indices(space: HilbertSpace) -> np.ndarray:
    """Basis indices of the N_exc = 1 manifold (the domain of the block inversion)."""
    diag = np.real(np.diag(excitation_number(space)))
    return np.where(np.round(diag).astype(int) == 1)[0]
