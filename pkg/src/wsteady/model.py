"""Physical model: system parameters, per-drive Hamiltonians, the seven
dissipators, and the Fourier-transformed ground basis.

Everything is expressed in units of g (g = 1).  Drives k = 1, 2 couple
|0> <-> |2| and drives k = 3, 4 couple |1> <-> |2>, each with amplitude
Omega_k / 3 per atom and detuning Delta_k.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hilbert import (
    HilbertSpace,
    atomic_transition_op,
    cavity_annihilation,
    excitation_number,
)

GROUND_LABELS = ("000", "s11", "s12", "s13", "s21", "s22", "s23", "111")
TARGET_INDEX = GROUND_LABELS.index("s13")

DRIVE_INDICES = (1, 2, 3, 4)

# regularization floor and degeneracy threshold used below
R_TILDE_DEGENERACY_EPS = 1e-9


class DegenerateParameterError(ValueError):
    """Raised when a resolvent denominator R_{n,k} collapses and the
    excited-block inversion would blow up."""


@dataclass(frozen=True)
class SystemParams:
    """Physical inputs in units of g. Cooperativity is always recomputed."""

    kappa: float
    gamma: float
    omegas: tuple[float, float, float, float]
    deltas: tuple[float, float, float, float]
    n_max: int = 2
    g: float = 1.0

    def __post_init__(self):
        if self.g != 1.0:
            raise ValueError("all frequencies are in units of g; g must be 1")
        if self.kappa < 0 or self.gamma < 0:
            raise ValueError("kappa and gamma must be nonnegative")
        if len(self.omegas) != 4 or len(self.deltas) != 4:
            raise ValueError("omegas and deltas must each have 4 entries")
        if any(om < 0 for om in self.omegas):
            raise ValueError("Rabi frequencies must be nonnegative")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    @property
    def cooperativity(self) -> float:
        """C = g^2 / (kappa * gamma); inf when either rate vanishes."""
        prod = self.kappa * self.gamma
        return np.inf if prod == 0 else 1.0 / prod

    @property
    def space(self) -> HilbertSpace:
        return HilbertSpace(n_max=self.n_max)


@dataclass(frozen=True)
class DriveSpec:
    k: int
    transition: str  # "zero_to_two" for k=1,2; "one_to_two" for k=3,4
    omega: float
    delta: float


def drive_source_level(k: int) -> int:
    """Atomic level the k-th drive pumps out of (fixed by the level scheme)."""
    if k not in DRIVE_INDICES:
        raise ValueError(f"drive index must be 1..4, got {k}")
    return 0 if k in (1, 2) else 1


def drives(params: SystemParams) -> list[DriveSpec]:
    return [
        DriveSpec(
            k=k,
            transition="zero_to_two" if k in (1, 2) else "one_to_two",
            omega=params.omegas[k - 1],
            delta=params.deltas[k - 1],
        )
        for k in DRIVE_INDICES
    ]


# --- Hamiltonian / dissipator constructors ---------------------------------


def build_h0(space: HilbertSpace, k: int, params: SystemParams) -> np.ndarray:
    """H0 for drive k: Delta_k (a^dag a + sum_m |2>_m<2|) + g sum_m (a |2>_m<1| + h.c.)."""
    if k not in DRIVE_INDICES:
        raise ValueError(f"drive index must be 1..4, got {k}")
    delta = params.deltas[k - 1]
    a = cavity_annihilation(space)
    h = delta * (a.conj().T @ a)
    coupling = np.zeros_like(a)
    for m in (1, 2, 3):
        h += delta * atomic_transition_op(space, m, 2, 2)
        coupling += a @ atomic_transition_op(space, m, 2, 1)
    return h + coupling + coupling.conj().T


def build_vplus(space: HilbertSpace, k: int, params: SystemParams) -> np.ndarray:
    """V+ for drive k: (Omega_k/3) sum_m |2>_m<q| with q = 0 (k=1,2) or 1 (k=3,4)."""
    q = drive_source_level(k)
    omega = params.omegas[k - 1]
    v = np.zeros((space.total_dim, space.total_dim), dtype=complex)
    for m in (1, 2, 3):
        v += atomic_transition_op(space, m, 2, q)
    return (omega / 3.0) * v


def build_hk(space: HilbertSpace, k: int, params: SystemParams) -> np.ndarray:
    """Full time-independent Hamiltonian of drive k in its own rotating frame."""
    vplus = build_vplus(space, k, params)
    return build_h0(space, k, params) + vplus + vplus.conj().T


def build_lindblad_set(space: HilbertSpace, params: SystemParams) -> list[np.ndarray]:
    """The seven Lindblad operators, in the fixed order
    [sqrt(kappa) a, sqrt(gamma/2)|0>_m<2| m=1..3, sqrt(gamma/2)|1>_m<2| m=1..3]."""
    ops = [np.sqrt(params.kappa) * cavity_annihilation(space)]
    for target in (0, 1):
        for m in (1, 2, 3):
            ops.append(np.sqrt(params.gamma / 2.0) * atomic_transition_op(space, m, target, 2))
    return ops


# --- ground basis -----------------------------------------------------------


def ground_basis(space: HilbertSpace) -> np.ndarray:
    """Columns are the 8 ground states (all with photon vacuum), in the order
    |000>, |S11>, |S12>, |S13>, |S21>, |S22>, |S23>, |111>.

    |S_{q,j}> = (e^{i 2j pi/3} |x1> + e^{i 4j pi/3} |x2> + |x3>)/sqrt(3) with
    single-excitation kets (|100>,|010>,|001>) for q=1 and double-excitation
    kets (|110>,|101>,|011>) for q=2; j=3 gives equal phases (the W state for q=1).
    """
    singles = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    doubles = [(1, 1, 0), (1, 0, 1), (0, 1, 1)]
    basis = np.zeros((space.total_dim, 8), dtype=complex)
    basis[space.encode((0, 0, 0), 0), 0] = 1.0
    for q, kets in ((1, singles), (2, doubles)):
        for j in (1, 2, 3):
            col = (q - 1) * 3 + j
            for pos, ket in enumerate(kets, start=1):
                phase = np.exp(2j * np.pi * j * pos / 3.0) if pos < 3 else 1.0
                basis[space.encode(ket, 0), col] += phase / np.sqrt(3.0)
    basis[space.encode((1, 1, 1), 0), 7] = 1.0
    return basis


# --- derived quantities and diagnostics -------------------------------------


@dataclass(frozen=True)
class DerivedQuantities:
    """Resolvent building blocks: Delta~_k = Delta_k - i gamma/2,
    delta~_k = Delta_k - i kappa/2, R~_{n,k} = Delta~_k delta~_k - n g^2."""

    delta_tilde: tuple[complex, complex, complex, complex]
    deltasmall_tilde: tuple[complex, complex, complex, complex]
    r_tilde: dict[tuple[int, int], complex] = field(repr=False)

    def r(self, n: int, k: int) -> complex:
        return self.r_tilde[(n, k)]


def derived_quantities(params: SystemParams) -> DerivedQuantities:
    dt = tuple(d - 0.5j * params.gamma for d in params.deltas)
    st = tuple(d - 0.5j * params.kappa for d in params.deltas)
    r = {}
    for n in (1, 2, 3):
        for k in DRIVE_INDICES:
            val = dt[k - 1] * st[k - 1] - n
            if abs(val) < R_TILDE_DEGENERACY_EPS:
                raise DegenerateParameterError(
                    f"R~_({n},{k}) = {val:.3e} is degenerate; the excited-block "
                    f"inversion is singular at these parameters"
                )
            r[(n, k)] = val
    return DerivedQuantities(delta_tilde=dt, deltasmall_tilde=st, r_tilde=r)


@dataclass(frozen=True)
class WeakFieldPair:
    k: int
    l: int
    lhs: float
    rhs: float
    ratio: float
    flagged: bool


def check_weak_field(params: SystemParams, threshold: float = 0.1) -> list[WeakFieldPair]:
    """Raman-transition diagnostic over all drive pairs:
    Omega_k Omega_l (1/Delta_k + 1/Delta_l)/2 << |Delta_k - Delta_l|.

    1/Delta is regularized to 1/max(|Delta|, gamma/2) so the resonant drive
    (Delta = 0) is scored against its linewidth instead of diverging.  Pairs
    with ratio > threshold are flagged; equal detunings on two active drives
    make the condition unsatisfiable and raise instead.
    """
    floor = params.gamma / 2.0
    report = []
    for k in DRIVE_INDICES:
        for l in DRIVE_INDICES:
            if l <= k:
                continue
            om_k, om_l = params.omegas[k - 1], params.omegas[l - 1]
            d_k, d_l = params.deltas[k - 1], params.deltas[l - 1]
            rhs = abs(d_k - d_l)
            if rhs == 0.0 and om_k > 0 and om_l > 0:
                raise ValueError(
                    f"drives {k} and {l} share detuning {d_k}; the weak-field "
                    f"separation condition cannot hold"
                )
            inv_k = 1.0 / max(abs(d_k), floor) if max(abs(d_k), floor) > 0 else np.inf
            inv_l = 1.0 / max(abs(d_l), floor) if max(abs(d_l), floor) > 0 else np.inf
            lhs = 0.0 if om_k * om_l == 0.0 else om_k * om_l * (inv_k + inv_l) / 2.0
            ratio = 0.0 if lhs == 0.0 else (np.inf if rhs == 0.0 else lhs / rhs)
            report.append(
                WeakFieldPair(k=k, l=l, lhs=lhs, rhs=rhs, ratio=ratio,
                              flagged=bool(ratio > threshold))
            )
    return report


# --- presets ----------------------------------------------------------------


def fig2_preset(cooperativity: float = 80.0, ratio: float = 1.5, omega: float = 0.04,
                n_max: int = 2) -> SystemParams:
    """Operating point used throughout: gamma = ratio * kappa at the given C,
    Omega = (omega, 0.6 omega, omega, 1.2 omega), Delta = (0, 1, sqrt(3), sqrt(2))."""
    kappa = 1.0 / np.sqrt(ratio * cooperativity)
    return SystemParams(
        kappa=kappa,
        gamma=ratio * kappa,
        omegas=(omega, 0.6 * omega, omega, 1.2 * omega),
        deltas=(0.0, 1.0, np.sqrt(3.0), np.sqrt(2.0)),
        n_max=n_max,
    )


def experimental_preset(omega: float = 0.04, n_max: int = 2) -> SystemParams:
    """Parameters of a demonstrated cavity: (g, gamma/2, kappa/2)/2pi = (34, 2.5, 4.1) MHz,
    i.e. kappa = 8.2/34 g, gamma = 5/34 g (C ~ 28)."""
    return SystemParams(
        kappa=8.2 / 34.0,
        gamma=5.0 / 34.0,
        omegas=(omega, 0.6 * omega, omega, 1.2 * omega),
        deltas=(0.0, 1.0, np.sqrt(3.0), np.sqrt(2.0)),
        n_max=n_max,
    )


PRESETS = {
    "fig2": fig2_preset,
    "experimental": experimental_preset,
}


def preset(name: str, **kwargs) -> SystemParams:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; available: {sorted(PRESETS)}") from None
    return factory(**kwargs)
