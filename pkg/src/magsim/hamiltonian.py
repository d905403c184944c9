"""Interaction-picture and dispersive-effective Hamiltonian builders.

The time-dependent Hamiltonian is kept as a sum of rotating terms

    H(t) = sum_k [ M_k exp(i w_k t) + M_k^dag exp(-i w_k t) ],

with constant matrices M_k built once per segment. The integrator evaluates
H(t) by phase-weighting these matrices, which is cheap compared to the
matrix products in the equations of motion.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .hilbert import (
    OperatorMatrix,
    SystemLayout,
    annihilation,
    number_operator,
    qubit_excited_projector,
    qubit_ops,
)
from .parameters import PhysicalParams, ParameterError


class _Decoupled:
    """Sentinel: the corresponding coupling term is omitted entirely."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "DECOUPLED"


DECOUPLED = _Decoupled()


@dataclass(frozen=True)
class SegmentConfig:
    """Coupling configuration for one protocol segment.

    magnon_detuning[n] is the interaction-picture detuning delta_n in rad/ns
    for magnon n+1, or DECOUPLED for an ideal switch-off of that coupling.
    """

    magnon_detuning: tuple
    qubit_cavity_active: bool = False
    include_residual_qm: bool = False

    def __post_init__(self):
        if self.qubit_cavity_active and any(
            d is not DECOUPLED and d == 0.0 for d in self.magnon_detuning
        ):
            warnings.warn(
                "qubit-cavity coupling active while a magnon is resonant; "
                "the protocols never co-activate these",
                stacklevel=3,
            )

    @property
    def n_magnons(self) -> int:
        return len(self.magnon_detuning)


@dataclass
class RotatingTermHamiltonian:
    """H(t) = static + sum_k (M_k e^{i w_k t} + h.c.), all matrices dense."""

    layout: SystemLayout
    static: np.ndarray
    terms: list  # list of (matrix, angular frequency) with frequency != 0
    time_offset: float = 0.0  # evaluation uses t + time_offset (global clock)

    def at(self, t: float) -> np.ndarray:
        h = self.static.copy()
        tau = t + self.time_offset
        for mat, freq in self.terms:
            phased = np.exp(1j * freq * tau) * mat
            h += phased
            h += phased.conj().T
        return h

    def operator_at(self, t: float) -> OperatorMatrix:
        return OperatorMatrix(self.layout, self.at(t))

    def max_frequency(self) -> float:
        """Largest angular frequency scale present (phases and matrix norms)."""
        scales = [2.0 * np.linalg.norm(self.static, 2)]
        for mat, freq in self.terms:
            scales.append(abs(freq))
            scales.append(2.0 * np.linalg.norm(mat, 2))
        return float(max(scales))

    @property
    def is_static(self) -> bool:
        return not self.terms


def build_full_terms(
    layout: SystemLayout,
    params: PhysicalParams,
    config: SegmentConfig,
) -> RotatingTermHamiltonian:
    """Interaction-picture Hamiltonian for one segment as rotating terms.

    Active magnon n contributes lambda_m[n] (a_n m_n^dag e^{i delta_n t} + h.c.);
    the qubit, when active, contributes lambda_q (a_n sigma^+ e^{i Delta0 t} + h.c.)
    for every cavity; the optional residual qubit-magnon terms are static
    (lambda_q lambda_m[n] / Delta0)(sigma^+ m_n + h.c.).
    """
    if config.n_magnons != params.n_magnons:
        raise ParameterError(
            f"config has {config.n_magnons} magnons, params {params.n_magnons}"
        )
    magnons = layout.labels_of_kind("boson")[: params.n_magnons]
    cavities = layout.labels_of_kind("boson")[params.n_magnons :]
    if len(cavities) != params.n_magnons:
        raise ParameterError("layout does not match the magnon/cavity roster")

    dim = layout.total_dim
    static = np.zeros((dim, dim), dtype=complex)
    terms = []

    def add(mat: np.ndarray, freq: float):
        if freq == 0.0:
            nonlocal static
            static = static + mat + mat.conj().T
        else:
            terms.append((mat, freq))

    sigma, sigma_plus, _ = qubit_ops(layout)
    for n, (m_label, a_label) in enumerate(zip(magnons, cavities)):
        delta = config.magnon_detuning[n]
        if delta is not DECOUPLED:
            a = annihilation(layout, a_label).matrix
            m_dag = annihilation(layout, m_label).dagger().matrix
            add(params.lambda_m[n] * (a @ m_dag), float(delta))
        if config.qubit_cavity_active:
            a = annihilation(layout, a_label).matrix
            add(params.lambda_q * (a @ sigma_plus.matrix), params.delta0)
        if config.include_residual_qm:
            m = annihilation(layout, m_label).matrix
            coupling = params.lambda_q * params.lambda_m[n] / params.delta0
            add(coupling * (sigma_plus.matrix @ m), 0.0)

    return RotatingTermHamiltonian(layout, static, terms)


def build_full_hamiltonian(
    layout: SystemLayout,
    params: PhysicalParams,
    config: SegmentConfig,
    t: float,
) -> OperatorMatrix:
    """Full interaction-picture Hamiltonian evaluated at time t."""
    return build_full_terms(layout, params, config).operator_at(t)


def build_effective_hamiltonian(
    layout: SystemLayout,
    params: PhysicalParams,
    n_cavities: int | None = None,
) -> OperatorMatrix:
    """Dispersive cavity-exchange Hamiltonian mediated by the detuned qubit.

    H_eff = (lambda_q^2/Delta0) [ sigma_z (sum_n a_n^dag a_n
            + sum_{l<n} (a_l a_n^dag + h.c.)) + N |e><e| ].

    Time-independent; requires the far-detuning guard.
    """
    params.check_far_detuning()
    if n_cavities is None:
        n_cavities = params.n_magnons
    # Cavities are the last n_cavities bosonic modes, which also admits
    # reduced layouts holding only the cavities and the qubit.
    cavities = layout.labels_of_kind("boson")[-n_cavities:]

    dim = layout.total_dim
    exchange = np.zeros((dim, dim), dtype=complex)
    for label in cavities:
        exchange += number_operator(layout, label).matrix
    ops = [annihilation(layout, label).matrix for label in cavities]
    for l in range(len(ops)):
        for n in range(l + 1, len(ops)):
            hop = ops[l] @ ops[n].conj().T
            exchange += hop + hop.conj().T

    _, _, sigma_z = qubit_ops(layout)
    proj_e = qubit_excited_projector(layout).matrix
    h = params.lambda_eff * (sigma_z.matrix @ exchange + n_cavities * proj_e)
    return OperatorMatrix(layout, h)


def build_effective_terms(
    layout: SystemLayout,
    params: PhysicalParams,
    n_cavities: int | None = None,
) -> RotatingTermHamiltonian:
    h = build_effective_hamiltonian(layout, params, n_cavities)
    return RotatingTermHamiltonian(layout, h.matrix, [])
