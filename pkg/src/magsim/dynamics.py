"""Schrodinger and Lindblad time evolution with a fixed-step RK4 integrator.

The step size resolves the fastest angular frequency present in H(t)
(h <= 1/(50 * max|omega|)) and never exceeds duration/1000, so runs are
reproducible bit-for-bit for identical inputs.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .hamiltonian import RotatingTermHamiltonian
from .hilbert import OperatorMatrix, QuantumState, SystemLayout


class IntegrationError(RuntimeError):
    """Step control failure (norm or trace drift beyond bound)."""


class PositivityError(IntegrationError):
    """Density matrix developed a negative eigenvalue below tolerance."""


@dataclass(frozen=True)
class StepControl:
    """Fixed-step integrator settings."""

    freq_resolution: float = 50.0  # steps per fastest angular period / (2 pi)
    min_substeps: int = 1000  # lower bound on steps per segment
    max_step: float | None = None  # explicit cap in ns, overrides nothing else
    samples: int = 400  # target number of recorded output samples
    norm_tol: float = 1e-8  # ket norm drift bound
    trace_tol: float = 1e-6  # density trace drift bound
    positivity_tol: float = 1e-6  # abort below -positivity_tol

    def step_size(self, duration: float, max_frequency: float) -> float:
        h = duration / self.min_substeps
        if max_frequency > 0:
            h = min(h, 1.0 / (self.freq_resolution * max_frequency))
        if self.max_step is not None:
            h = min(h, self.max_step)
        return h


@dataclass
class SimulationResult:
    """Sampled trajectory of one evolution (or a concatenation of segments)."""

    layout: SystemLayout
    times: np.ndarray  # ns
    populations: np.ndarray  # (n_samples, total_dim) per-basis-state probability
    norms: np.ndarray  # ket norm or density trace at each sample
    final_state: QuantumState
    fidelity_series: np.ndarray | None = None
    min_eigenvalue: float | None = None  # most negative eigenvalue seen (density)
    metadata: dict = field(default_factory=dict)

    def occupation_series(self, label: str, value: int) -> np.ndarray:
        """Probability of subsystem `label` being in local state `value`, per sample."""
        mask = np.array(
            [
                self.layout.basis_occupations(i)[label] == value
                for i in range(self.layout.total_dim)
            ]
        )
        return self.populations[:, mask].sum(axis=1)

    @property
    def final_fidelity(self) -> float | None:
        if self.fidelity_series is None or len(self.fidelity_series) == 0:
            return None
        return float(self.fidelity_series[-1])

    def extend(self, other: "SimulationResult") -> "SimulationResult":
        """Append a later segment (its time grid continues this one's)."""
        fid = None
        if self.fidelity_series is not None and other.fidelity_series is not None:
            fid = np.concatenate([self.fidelity_series, other.fidelity_series])
        min_eig = self.min_eigenvalue
        if other.min_eigenvalue is not None:
            min_eig = other.min_eigenvalue if min_eig is None else min(min_eig, other.min_eigenvalue)
        return SimulationResult(
            layout=self.layout,
            times=np.concatenate([self.times, other.times]),
            populations=np.vstack([self.populations, other.populations]),
            norms=np.concatenate([self.norms, other.norms]),
            final_state=other.final_state,
            fidelity_series=fid,
            min_eigenvalue=min_eig,
            metadata={**self.metadata, **other.metadata},
        )


@dataclass(frozen=True)
class CollapseSet:
    """Lindblad collapse channels: list of (operator, rate in 1/ns)."""

    channels: tuple  # tuple of (OperatorMatrix, float)

    def __post_init__(self):
        for op, rate in self.channels:
            if rate < 0:
                raise ValueError("collapse rates must be >= 0")

    def __len__(self):
        return len(self.channels)


def fidelity(rho: QuantumState, target: QuantumState) -> float:
    """<target| rho |target> for a ket target (squared overlap when rho is pure)."""
    if rho.layout != target.layout:
        raise ValueError("state and target layouts do not match")
    t = target.vector
    if rho.is_ket:
        return float(np.abs(np.vdot(t, rho.vector)) ** 2)
    return float(np.real(np.vdot(t, rho.matrix @ t)))


def _as_terms(hamiltonian, layout: SystemLayout) -> RotatingTermHamiltonian:
    if isinstance(hamiltonian, RotatingTermHamiltonian):
        return hamiltonian
    if isinstance(hamiltonian, OperatorMatrix):
        return RotatingTermHamiltonian(layout, hamiltonian.matrix, [])
    if isinstance(hamiltonian, np.ndarray):
        return RotatingTermHamiltonian(layout, hamiltonian, [])
    raise TypeError(f"unsupported Hamiltonian object {type(hamiltonian)!r}")


def _sample_stride(n_steps: int, samples: int) -> int:
    return max(1, n_steps // max(1, samples))


def evolve_ket(
    state: QuantumState,
    hamiltonian,
    duration: float,
    step_control: StepControl | None = None,
    t_start: float = 0.0,
    target: QuantumState | None = None,
) -> SimulationResult:
    """Integrate i d|psi>/dt = H(t) |psi> (hbar = 1) over [t_start, t_start+duration]."""
    if not state.is_ket:
        raise ValueError("evolve_ket requires a pure-state ket")
    if duration <= 0:
        raise ValueError("duration must be positive")
    ctrl = step_control or StepControl()
    terms = _as_terms(hamiltonian, state.layout)

    h = ctrl.step_size(duration, terms.max_frequency())
    n_steps = max(1, int(np.ceil(duration / h)))
    h = duration / n_steps
    stride = _sample_stride(n_steps, ctrl.samples)

    psi = state.vector.astype(complex).copy()
    static_only = terms.is_static
    h_static = terms.static if static_only else None

    def deriv(t, vec):
        mat = h_static if static_only else terms.at(t)
        return -1j * (mat @ vec)

    times, pops, norms, fids = [], [], [], []

    def record(t, vec):
        times.append(t)
        pops.append(np.abs(vec) ** 2)
        norms.append(float(np.linalg.norm(vec)))
        if target is not None:
            fids.append(float(np.abs(np.vdot(target.vector, vec)) ** 2))

    record(t_start, psi)
    t = t_start
    for step in range(n_steps):
        k1 = deriv(t, psi)
        k2 = deriv(t + 0.5 * h, psi + 0.5 * h * k1)
        k3 = deriv(t + 0.5 * h, psi + 0.5 * h * k2)
        k4 = deriv(t + h, psi + h * k3)
        psi = psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = t_start + (step + 1) * h
        if (step + 1) % stride == 0 or step + 1 == n_steps:
            record(t, psi)

    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > ctrl.norm_tol * max(1.0, abs(state.norm())):
        raise IntegrationError(
            f"ket norm drifted to {norm:.12f} after {n_steps} steps of {h:.3g} ns; "
            "reduce the step size"
        )

    return SimulationResult(
        layout=state.layout,
        times=np.asarray(times),
        populations=np.asarray(pops),
        norms=np.asarray(norms),
        final_state=QuantumState(state.layout, psi),
        fidelity_series=np.asarray(fids) if target is not None else None,
        metadata={"steps": n_steps, "step_size": h},
    )


def evolve_lindblad(
    state: QuantumState,
    hamiltonian,
    collapse: CollapseSet,
    duration: float,
    step_control: StepControl | None = None,
    t_start: float = 0.0,
    target: QuantumState | None = None,
) -> SimulationResult:
    """Integrate the master equation

        drho/dt = -i[H, rho] + sum_X kappa_X (X rho X^dag - {X^dag X, rho}/2)

    with Hermiticity restored by symmetrization after every step.
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    ctrl = step_control or StepControl()
    terms = _as_terms(hamiltonian, state.layout)
    dim = state.layout.total_dim

    ops = []
    k_total = np.zeros((dim, dim), dtype=complex)
    for op, rate in collapse.channels:
        if rate == 0.0:
            continue
        mat = op.matrix if isinstance(op, OperatorMatrix) else np.asarray(op, dtype=complex)
        ops.append((sp.csr_matrix(mat), float(rate)))
        k_total += rate * (mat.conj().T @ mat)
    # X^dag X is diagonal for every annihilation-type channel; use the fast
    # elementwise path when that holds.
    k_diag = np.real(np.diag(k_total))
    diagonal_k = np.max(np.abs(k_total - np.diag(np.diag(k_total)))) == 0.0

    h = ctrl.step_size(duration, terms.max_frequency())
    n_steps = max(1, int(np.ceil(duration / h)))
    h = duration / n_steps
    stride = _sample_stride(n_steps, ctrl.samples)

    rho = state.matrix.astype(complex).copy()
    static_only = terms.is_static
    h_static = terms.static if static_only else None

    def deriv(t, dm):
        mat = h_static if static_only else terms.at(t)
        out = -1j * (mat @ dm - dm @ mat)
        if ops:
            if diagonal_k:
                out -= 0.5 * (k_diag[:, None] * dm + dm * k_diag[None, :])
            else:
                out -= 0.5 * (k_total @ dm + dm @ k_total)
            for x, rate in ops:
                b = x @ dm
                out += rate * np.conj((x @ np.conj(b).T)).T
        return out

    times, pops, norms, fids = [], [], [], []
    min_eig = 0.0
    tvec = target.vector if target is not None else None

    def record(t, dm):
        nonlocal min_eig
        times.append(t)
        pops.append(np.real(np.diag(dm)))
        trace = float(np.trace(dm).real)
        norms.append(trace)
        if tvec is not None:
            fids.append(float(np.real(np.vdot(tvec, dm @ tvec))))
        low = float(np.linalg.eigvalsh(dm)[0])
        min_eig = min(min_eig, low)
        if low < -ctrl.positivity_tol:
            raise PositivityError(
                f"density matrix eigenvalue {low:.3e} at t = {t:.3f} ns; "
                "step size too coarse"
            )
        if abs(trace - 1.0) > ctrl.trace_tol:
            raise IntegrationError(
                f"density trace drifted to {trace:.9f} at t = {t:.3f} ns"
            )

    record(t_start, rho)
    t = t_start
    for step in range(n_steps):
        k1 = deriv(t, rho)
        k2 = deriv(t + 0.5 * h, rho + 0.5 * h * k1)
        k3 = deriv(t + 0.5 * h, rho + 0.5 * h * k2)
        k4 = deriv(t + h, rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        rho = 0.5 * (rho + rho.conj().T)
        t = t_start + (step + 1) * h
        if (step + 1) % stride == 0 or step + 1 == n_steps:
            record(t, rho)

    return SimulationResult(
        layout=state.layout,
        times=np.asarray(times),
        populations=np.asarray(pops),
        norms=np.asarray(norms),
        final_state=QuantumState(state.layout, rho),
        fidelity_series=np.asarray(fids) if target is not None else None,
        min_eigenvalue=min_eig,
        metadata={"steps": n_steps, "step_size": h},
    )
