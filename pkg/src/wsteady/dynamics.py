"""Time evolution for both descriptions of the model.

Rate side: fixed-step RK4 on the classical generator built from the effective
rate matrix, plus its null-space steady state.  Full side: fixed-step RK4 on
the vectorized Lindblad equation

    drho/dt = -i[H(t), rho] + sum_x (L_x rho L_x^dag - 1/2 {L_x^dag L_x, rho})

with the four-drive composite Hamiltonian written as a static part plus
oscillating pieces exp(+/- i Delta_k t) V_k.  The superoperator pieces are kept
as sparse matrices acting on vec(rho); trace is conserved identically by the
generator, Hermiticity is restored every step (deviation logged), and
positivity is monitored at sample points.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.integrate import trapezoid

from .effective import assemble_rate_matrix, effective_hamiltonian, effective_lindblads
from .hilbert import HilbertSpace, cavity_annihilation, atomic_transition_op
from .model import (
    GROUND_LABELS,
    TARGET_INDEX,
    SystemParams,
    build_hk,
    build_lindblad_set,
    build_vplus,
    ground_basis,
)

log = logging.getLogger("wsteady")

RATE_STEP_LIMIT = 0.1     # reject dt when ||G||_1 * dt exceeds this
TRACE_TOL = 1e-9
POSITIVITY_FLOOR = -1e-6
DEFAULT_RATE_DT = 1.0
DEFAULT_MASTER_DT = 0.02


class StepSizeError(RuntimeError):
    """Integration step too large for the requested dynamics."""


class NumericalFailureError(RuntimeError):
    """Conserved-quantity or positivity violation during propagation."""


class NonUniqueSteadyStateError(RuntimeError):
    """Rate generator kernel is not one-dimensional."""


@dataclass(frozen=True)
class Metrics:
    fidelity: float
    purity: float


@dataclass
class Trajectory:
    times: np.ndarray
    populations: np.ndarray  # (n_samples, 8) in GROUND_LABELS order
    fidelity: np.ndarray
    purity: np.ndarray
    method: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.times)
        if not (len(self.populations) == len(self.fidelity) == len(self.purity) == n):
            raise ValueError("trajectory series lengths differ")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    @property
    def final_metrics(self) -> Metrics:
        return Metrics(fidelity=float(self.fidelity[-1]), purity=float(self.purity[-1]))


# --- classical rate dynamics --------------------------------------------------


def rate_generator(mu: np.ndarray) -> np.ndarray:
    """G with G[z, y] = mu[z, y] off-diagonal and columns summing to zero."""
    g = np.array(mu, dtype=float)
    np.fill_diagonal(g, 0.0)
    np.fill_diagonal(g, -g.sum(axis=0))
    return g


def uniform_population() -> np.ndarray:
    return np.full(8, 1.0 / 8.0)


def integrate_rate(p0: np.ndarray, mu: np.ndarray, t_end: float,
                   dt: float = DEFAULT_RATE_DT, sample_every: int = 1,
                   method_label: str = "rate") -> Trajectory:
    """RK4 on dp/dt = G p with conservation checked along the way.

    Generic in dimension; the fidelity column is the W target for the 8-state
    model and the first state for toy generators.
    """
    p0 = np.asarray(p0, dtype=float)
    if abs(p0.sum() - 1.0) > 1e-9:
        raise ValueError(f"initial populations sum to {p0.sum()}, expected 1")
    g = rate_generator(mu)
    norm = np.linalg.norm(g, 1)
    if norm * dt > RATE_STEP_LIMIT:
        raise StepSizeError(
            f"dt={dt} too large for rate generator (||G||*dt={norm * dt:.3e} > {RATE_STEP_LIMIT})"
        )
    n_steps = max(1, int(round(t_end / dt)))
    times = [0.0]
    samples = [p0.copy()]
    p = p0.copy()
    for step in range(1, n_steps + 1):
        k1 = g @ p
        k2 = g @ (p + 0.5 * dt * k1)
        k3 = g @ (p + 0.5 * dt * k2)
        k4 = g @ (p + dt * k3)
        p = p + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if step % sample_every == 0 or step == n_steps:
            times.append(step * dt)
            samples.append(p.copy())
    pops = np.array(samples)
    drift = np.max(np.abs(pops.sum(axis=1) - 1.0))
    if drift > TRACE_TOL:
        raise NumericalFailureError(f"population sum drifted by {drift:.3e}")
    target = TARGET_INDEX if pops.shape[1] == 8 else 0
    return Trajectory(
        times=np.array(times),
        populations=pops,
        fidelity=pops[:, target].copy(),
        purity=(pops**2).sum(axis=1),
        method=method_label,
        diagnostics={"population_drift": float(drift)},
    )


def rate_steady_state(mu: np.ndarray) -> np.ndarray:
    """Normalized kernel vector of the rate generator."""
    g = rate_generator(mu)
    kernel = scipy.linalg.null_space(g)
    if kernel.shape[1] != 1:
        raise NonUniqueSteadyStateError(
            f"rate generator kernel has dimension {kernel.shape[1]}, expected 1"
        )
    p = np.real(kernel[:, 0])
    p = p / p.sum()
    if p.min() < -1e-9:
        raise NumericalFailureError(f"steady state has negative population {p.min():.3e}")
    p = np.clip(p, 0.0, None)
    p = p / p.sum()
    residual = np.max(np.abs(g @ p))
    if residual > 1e-12:
        raise NumericalFailureError(f"steady-state residual {residual:.3e} exceeds 1e-12")
    return p


# --- composite Hamiltonian ----------------------------------------------------


@dataclass(frozen=True)
class CompositeHamiltonian:
    """H(t) = static + sum_j (exp(i delta_j t) v_j + h.c.) in the resonant frame."""

    static: np.ndarray
    oscillating: tuple[tuple[float, np.ndarray], ...]

    def __call__(self, t: float) -> np.ndarray:
        h = self.static.copy()
        for delta, v in self.oscillating:
            h += np.exp(1j * delta * t) * v
            h += np.exp(-1j * delta * t) * v.conj().T
        return h


def build_composite_hamiltonian(space: HilbertSpace, params: SystemParams) -> CompositeHamiltonian:
    a = cavity_annihilation(space)
    coupling = np.zeros_like(a)
    for m in (1, 2, 3):
        coupling += a @ atomic_transition_op(space, m, 2, 1)
    static = coupling + coupling.conj().T
    oscillating = []
    for k in (1, 2, 3, 4):
        v = build_vplus(space, k, params)
        delta = params.deltas[k - 1]
        if delta == 0.0:
            static = static + v + v.conj().T
        else:
            oscillating.append((delta, v))
    return CompositeHamiltonian(static=static, oscillating=tuple(oscillating))


# --- full master equation -------------------------------------------------------


def _commutator_piece(op: np.ndarray) -> sp.csr_matrix:
    n = op.shape[0]
    eye = sp.identity(n, format="csr")
    s = sp.csr_matrix(op)
    return (-1j * (sp.kron(s, eye) - sp.kron(eye, s.T))).tocsr()


def _dissipator_piece(lindblads: list[np.ndarray], n: int) -> sp.csr_matrix:
    eye = sp.identity(n, format="csr")
    total = sp.csr_matrix((n * n, n * n), dtype=complex)
    for op in lindblads:
        s = sp.csr_matrix(op)
        sdag_s = sp.csr_matrix(op.conj().T @ op)
        total = total + sp.kron(s, s.conj()) \
            - 0.5 * (sp.kron(sdag_s, eye) + sp.kron(eye, sdag_s.T))
    return total.tocsr()


class _LindbladRHS:
    """Vectorized right-hand side with the oscillating pieces stacked into a
    single sparse matrix so each evaluation is two matvecs and a phase sum."""

    def __init__(self, ham: CompositeHamiltonian, lindblads: list[np.ndarray]):
        self.dim = ham.static.shape[0]
        static = _commutator_piece(ham.static) + _dissipator_piece(lindblads, self.dim)
        self.static = static
        self.deltas = np.array([d for d, _ in ham.oscillating])
        pieces = []
        for _, v in ham.oscillating:
            pieces.append(_commutator_piece(v))
            pieces.append(_commutator_piece(v.conj().T))
        self.stacked = sp.vstack(pieces, format="csr") if pieces else None

    def __call__(self, t: float, vec: np.ndarray) -> np.ndarray:
        out = self.static @ vec
        if self.stacked is not None:
            chunks = (self.stacked @ vec).reshape(2 * len(self.deltas), -1)
            phases = np.exp(1j * self.deltas * t)
            coeff = np.empty(2 * len(self.deltas), dtype=complex)
            coeff[0::2] = phases
            coeff[1::2] = phases.conj()
            out = out + coeff @ chunks
        return out


def integrate_master(space: HilbertSpace, rho0: np.ndarray, ham: CompositeHamiltonian,
                     lindblads: list[np.ndarray], t_end: float,
                     dt: float = DEFAULT_MASTER_DT, sample_every: int = 500,
                     method_label: str = "full_time_dependent") -> Trajectory:
    """Fixed-step RK4 propagation of the vectorized master equation."""
    dim = space.total_dim
    if rho0.shape != (dim, dim):
        raise ValueError(f"rho0 shape {rho0.shape} does not match space dim {dim}")
    if abs(np.trace(rho0).real - 1.0) > TRACE_TOL or np.max(np.abs(rho0 - rho0.conj().T)) > 1e-12:
        raise ValueError("rho0 must be a trace-1 Hermitian density matrix")

    rhs = _LindbladRHS(ham, lindblads)
    basis = ground_basis(space)
    target = basis[:, TARGET_INDEX]

    def observe(rho):
        pops = np.real(np.einsum("ij,ik,kj->j", basis.conj(), rho, basis))
        fid = target.conj() @ rho @ target
        if abs(fid.imag) > 1e-10:
            raise NumericalFailureError(f"fidelity has imaginary part {fid.imag:.3e}")
        return pops, float(fid.real), float(np.real(np.trace(rho @ rho)))

    n_steps = max(1, int(round(t_end / dt)))
    vec = rho0.reshape(-1).astype(complex)
    pops0, fid0, pur0 = observe(rho0)
    times, pops, fids, purs = [0.0], [pops0], [fid0], [pur0]
    herm_dev_max = 0.0
    min_eig = float(np.linalg.eigvalsh(rho0).min())

    t = 0.0
    for step in range(1, n_steps + 1):
        k1 = rhs(t, vec)
        k2 = rhs(t + 0.5 * dt, vec + 0.5 * dt * k1)
        k3 = rhs(t + 0.5 * dt, vec + 0.5 * dt * k2)
        k4 = rhs(t + dt, vec + dt * k3)
        vec = vec + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = step * dt
        rho = vec.reshape(dim, dim)
        dev = np.max(np.abs(rho - rho.conj().T))
        herm_dev_max = max(herm_dev_max, float(dev))
        rho = 0.5 * (rho + rho.conj().T)
        vec = rho.reshape(-1)
        if step % sample_every == 0 or step == n_steps:
            trace = np.trace(rho).real
            if abs(trace - 1.0) > TRACE_TOL:
                raise NumericalFailureError(f"trace drifted to {trace} at t={t}")
            eig_min = float(np.linalg.eigvalsh(rho).min())
            min_eig = min(min_eig, eig_min)
            if eig_min < POSITIVITY_FLOOR:
                raise StepSizeError(
                    f"positivity violated (min eigenvalue {eig_min:.3e} at t={t}); reduce dt"
                )
            p, f, eta = observe(rho)
            times.append(t)
            pops.append(p)
            fids.append(f)
            purs.append(eta)
    log.debug("integrate_master: herm deviation max %.3e, min eigenvalue %.3e",
              herm_dev_max, min_eig)
    return Trajectory(
        times=np.array(times),
        populations=np.array(pops),
        fidelity=np.array(fids),
        purity=np.array(purs),
        method=method_label,
        diagnostics={"herm_dev_max": herm_dev_max, "min_eigenvalue": min_eig},
    )


def metrics(space: HilbertSpace, rho: np.ndarray) -> Metrics:
    """Fidelity <S13|rho|S13> and purity Tr(rho^2) of a full-space state."""
    target = ground_basis(space)[:, TARGET_INDEX]
    fid = target.conj() @ rho @ target
    if abs(fid.imag) > 1e-10:
        raise NumericalFailureError(f"fidelity has imaginary part {fid.imag:.3e}")
    return Metrics(fidelity=float(fid.real), purity=float(np.real(np.trace(rho @ rho))))


def ground_density(space: HilbertSpace, populations: np.ndarray) -> np.ndarray:
    """Full-space density matrix for an incoherent ground-manifold mixture."""
    basis = ground_basis(space)
    return (basis * populations) @ basis.conj().T


# --- methods used by the CLI ----------------------------------------------------


def run_rate_method(params: SystemParams, p0: np.ndarray, t_end: float,
                    dt: float = DEFAULT_RATE_DT) -> Trajectory:
    return integrate_rate(p0, assemble_rate_matrix(params), t_end, dt=dt)


def run_full_time_dependent(params: SystemParams, p0: np.ndarray, t_end: float,
                            dt: float = DEFAULT_MASTER_DT, sample_every: int = 500) -> Trajectory:
    space = params.space
    rho0 = ground_density(space, p0)
    ham = build_composite_hamiltonian(space, params)
    lindblads = build_lindblad_set(space, params)
    return integrate_master(space, rho0, ham, lindblads, t_end, dt=dt,
                            sample_every=sample_every)


def empirical_rate_matrix(params: SystemParams, t_probe: float = 120.0,
                          dt: float = 0.05, window: tuple[float, float] = (60.0, 120.0)) -> np.ndarray:
    """Rate matrix extracted from per-drive full propagation.

    For each drive k alone (time-independent H(k)), every ground state is
    propagated for t_probe.  After the excited-manifold transient, ground
    populations obey dP/dt = G_k P, so over each sample interval
    P(t+h) - P(t) = G_k int P dt exactly; the generator is recovered by least
    squares over all eight trajectories jointly (which accounts for source
    depletion and secondary flux), its off-diagonal clamped at zero.  The four
    per-drive matrices are summed; this is the "combined at the rate level"
    method.
    """
    space = params.space
    basis = ground_basis(space)
    lindblads = build_lindblad_set(space, params)
    t1, t2 = window
    if not (0.0 <= t1 < t2 <= t_probe):
        raise ValueError(f"window {window} must lie inside (0, {t_probe}]")
    mu = np.zeros((8, 8))
    sample_every = max(1, int(round(1.0 / dt)))
    for k in (1, 2, 3, 4):
        single = SystemParams(
            kappa=params.kappa, gamma=params.gamma,
            omegas=tuple(om if i == k - 1 else 0.0 for i, om in enumerate(params.omegas)),
            deltas=params.deltas, n_max=params.n_max,
        )
        ham = CompositeHamiltonian(static=build_hk(space, k, single), oscillating=())
        gains, integrals = [], []
        for y in range(8):
            rho0 = np.outer(basis[:, y], basis[:, y].conj())
            traj = integrate_master(space, rho0, ham, lindblads, t_probe, dt=dt,
                                    sample_every=sample_every, method_label="probe")
            mask = (traj.times >= t1) & (traj.times <= t2)
            t_win = traj.times[mask]
            pops = traj.populations[mask]
            gains.append(np.diff(pops, axis=0).T)
            steps = np.diff(t_win)
            integrals.append((0.5 * steps * (pops[:-1] + pops[1:]).T))
        gain = np.hstack(gains)          # (8, M) population increments
        integral = np.hstack(integrals)  # (8, M) integrated populations
        gen, *_ = np.linalg.lstsq(integral.T, gain.T, rcond=None)
        mu_k = np.clip(gen.T, 0.0, None)
        np.fill_diagonal(mu_k, 0.0)
        mu += mu_k
    return mu


def run_full_independent(params: SystemParams, p0: np.ndarray, t_end: float,
                         dt: float = DEFAULT_RATE_DT, **probe_kwargs) -> Trajectory:
    mu = empirical_rate_matrix(params, **probe_kwargs)
    return integrate_rate(p0, mu, t_end, dt=dt, method_label="full_independent")


# --- flagged validation mode: 8-dim effective master equation --------------------


def effective_liouvillian(params: SystemParams) -> np.ndarray:
    """Dense 64x64 Liouvillian of the effective 8-dim Lindblad model (keeps
    ground-manifold coherences; used to validate the rate-model discard)."""
    eye = np.eye(8)
    h = sum(effective_hamiltonian(k, params) for k in (1, 2, 3, 4))
    liou = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for k in (1, 2, 3, 4):
        for op in effective_lindblads(k, params):
            sdag_s = op.conj().T @ op
            liou += np.kron(op, op.conj()) \
                - 0.5 * (np.kron(sdag_s, eye) + np.kron(eye, sdag_s.T))
    return liou


def effective_me_steady_state(params: SystemParams) -> np.ndarray:
    """Steady 8x8 density matrix of the effective master equation."""
    kernel = scipy.linalg.null_space(effective_liouvillian(params), rcond=1e-10)
    if kernel.shape[1] != 1:
        raise NonUniqueSteadyStateError(
            f"effective Liouvillian kernel has dimension {kernel.shape[1]}"
        )
    rho = kernel[:, 0].reshape(8, 8)
    rho = rho / np.trace(rho)
    return 0.5 * (rho + rho.conj().T)
