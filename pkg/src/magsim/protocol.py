"""Timed entanglement protocols, their analytic oracles and target states.

A protocol is an ordered list of segments, each fixing which couplings are
active (and at which detunings) for a closed-form duration. Executing a
schedule threads one state through all segments under the chosen engine.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    CollapseSet,
    SimulationResult,
    StepControl,
    evolve_ket,
    evolve_lindblad,
)
from .hamiltonian import (
    DECOUPLED,
    SegmentConfig,
    build_effective_terms,
    build_full_terms,
)
from .hilbert import QuantumState, SystemLayout, annihilation, basis_ket, build_layout, qubit_ops
from .parameters import ParameterError, PhysicalParams

ENGINES = ("ideal-effective", "full-unitary", "lindblad")

# Largest magnon count with an equal-probability entangled state; beyond it
# min|C_1|^2 = ((n-2)/n)^2 exceeds max|C_k|^2 = 4/n^2 and the two branches
# never cross.
MAX_ISOPROBABILITY_N = 4


class IsoprobabilityUnattainable(ValueError):
    """Equal-probability entanglement requested for n >= 5, where none exists."""


class ProtocolError(ValueError):
    """Schedule construction or execution misuse."""


@dataclass(frozen=True)
class Segment:
    config: SegmentConfig
    duration: float  # ns
    description: str = ""

    def __post_init__(self):
        if self.duration <= 0:
            raise ProtocolError("segment durations must be strictly positive")


@dataclass(frozen=True)
class ProtocolSchedule:
    segments: tuple[Segment, ...]
    n_magnons: int
    params: PhysicalParams
    # Final-state coefficients on the single-excitation magnon basis.
    target_coefficients: tuple[complex, ...]

    @property
    def total_duration(self) -> float:
        return sum(s.duration for s in self.segments)

    @property
    def qubit_segment(self) -> Segment:
        active = [s for s in self.segments if s.config.qubit_cavity_active]
        if len(active) != 1:
            raise ProtocolError("schedule must contain exactly one qubit segment")
        return active[0]

    def to_text(self) -> str:
        """Line-oriented serialization: one segment per line."""
        lines = []
        for seg in self.segments:
            dets = ",".join(
                "DECOUPLED" if d is DECOUPLED else f"{float(d):.12g}"
                for d in seg.config.magnon_detuning
            )
            qubit = "on" if seg.config.qubit_cavity_active else "off"
            line = f"detunings={dets} qubit={qubit} duration_ns={seg.duration:.12g}"
            if seg.description:
                line += f" # {seg.description}"
            lines.append(line)
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class TargetState:
    """Normalized coefficients over the single-excitation magnon basis."""

    coefficients: tuple[complex, ...]
    layout: SystemLayout

    def __post_init__(self):
        total = sum(abs(c) ** 2 for c in self.coefficients)
        if abs(total - 1.0) > 1e-12:
            raise ProtocolError(f"target coefficients not normalized: sum = {total}")

    def to_ket(self) -> QuantumState:
        magnons = self.layout.labels_of_kind("boson")[: len(self.coefficients)]
        vec = np.zeros(self.layout.total_dim, dtype=complex)
        for coeff, label in zip(self.coefficients, magnons):
            vec[self.layout.basis_index({label: 1})] = coeff
        return QuantumState(self.layout, vec)


def analytic_coefficients(n: int, lambda_eff: float, t: float) -> np.ndarray:
    """Closed-form cavity amplitudes of the dispersive exchange.

    Starting from one photon in cavity 1 the amplitudes are
    C_1 = (e^{i n L t} + (n - 1)) / n and C_k = (e^{i n L t} - 1) / n for
    k >= 2, with L the dispersive exchange rate.
    """
    if n < 2:
        raise ProtocolError("n must be >= 2")
    phase = np.exp(1j * n * lambda_eff * t)
    coeffs = np.full(n, (phase - 1.0) / n, dtype=complex)
    coeffs[0] = (phase + (n - 1.0)) / n
    return coeffs


def isoprobability_time(n: int, lambda_eff: float) -> float | None:
    """Smallest t > 0 with |C_1|^2 = |C_2|^2, or None when no such t exists.

    Equality requires cos(n * L * t) = (2 - n)/2, which has no solution for
    n >= 5.
    """
    if n < 2:
        raise ProtocolError("n must be >= 2")
    c = (2.0 - n) / 2.0
    if abs(c) > 1.0:
        return None
    return math.acos(c) / (n * lambda_eff)


def min_p1(n: int) -> float:
    """Minimum over t of |C_1|^2: ((n-2)/n)^2."""
    return ((n - 2.0) / n) ** 2


def max_p2(n: int) -> float:
    """Maximum over t of |C_2|^2: 4/n^2."""
    return 4.0 / n**2


def target_state(
    layout: SystemLayout,
    params: PhysicalParams,
    n: int,
    qubit_segment_duration: float | None = None,
) -> TargetState:
    """Final magnon-sector target ket of the n-magnon protocol.

    For n = 2 this is the single-excitation Bell state (|10> + |01>)/sqrt(2);
    for n >= 3 it carries the accumulated overall minus sign and the exchange
    coefficients -C_k evaluated at the qubit-segment duration.
    """
    if n == 2:
        inv = 1.0 / math.sqrt(2.0)
        return TargetState((inv, inv), layout)
    if qubit_segment_duration is None:
        qubit_segment_duration = isoprobability_time(n, params.lambda_eff)
        if qubit_segment_duration is None:
            raise IsoprobabilityUnattainable(
                f"no equal-probability time exists for n = {n}"
            )
    coeffs = -analytic_coefficients(n, params.lambda_eff, qubit_segment_duration)
    return TargetState(tuple(coeffs), layout)


def _detunings(n: int, resonant: tuple[int, ...], idle_detuning: float | None):
    return tuple(
        0.0 if k in resonant else (DECOUPLED if idle_detuning is None else idle_detuning)
        for k in range(n)
    )


def two_magnon_bell_schedule(
    params: PhysicalParams,
    idle_detuning: float | None = None,
    include_residual_qm: bool = False,
) -> ProtocolSchedule:
    """Three-step Bell-state protocol for two magnons.

    Half swap of magnon 1 into cavity 1 (T1 = pi/4 lambda_m1), dispersive
    photon transfer between the cavities (T2 = pi/2 lambda_eff), full swap of
    cavity 2 into magnon 2 (T3 = pi/2 lambda_m2).
    """
    if params.n_magnons != 2:
        raise ParameterError("two-magnon schedule requires exactly 2 magnons")
    params.check_far_detuning()
    t1 = math.pi / (4.0 * params.lambda_m[0])
    t2 = math.pi / (2.0 * params.lambda_eff)
    t3 = math.pi / (2.0 * params.lambda_m[1])
    segs = (
        Segment(
            SegmentConfig(_detunings(2, (0,), idle_detuning), False, include_residual_qm),
            t1,
            "half swap magnon 1 <-> cavity 1",
        ),
        Segment(
            SegmentConfig(_detunings(2, (), idle_detuning), True, include_residual_qm),
            t2,
            "dispersive photon transfer cavity 1 -> cavity 2",
        ),
        Segment(
            SegmentConfig(_detunings(2, (1,), idle_detuning), False, include_residual_qm),
            t3,
            "full swap cavity 2 -> magnon 2",
        ),
    )
    inv = 1.0 / math.sqrt(2.0)
    return ProtocolSchedule(segs, 2, params, (inv, inv))


def n_magnon_schedule(
    params: PhysicalParams,
    n: int,
    equalize: bool = True,
    qubit_segment_duration: float | None = None,
    sequential_swaps: bool = False,
    idle_detuning: float | None = None,
    include_residual_qm: bool = False,
) -> ProtocolSchedule:
    """W-type entanglement protocol for n >= 2 magnons.

    Full swap of magnon 1 into cavity 1 (pi/2 lambda_m1), one dispersive
    exchange segment among all cavities, then resonant swaps of every cavity
    into its magnon -- simultaneously when all magnon couplings are equal,
    sequentially otherwise (or on request).
    """
    if n < 2:
        raise ProtocolError("n must be >= 2")
    if params.n_magnons != n:
        raise ParameterError(f"params describe {params.n_magnons} magnons, not {n}")
    params.check_far_detuning()
    if equalize:
        t2 = isoprobability_time(n, params.lambda_eff)
        if t2 is None:
            raise IsoprobabilityUnattainable(
                f"equal-probability entanglement does not exist for n = {n}"
            )
    else:
        if qubit_segment_duration is None:
            raise ProtocolError(
                "qubit_segment_duration required when equalize is False"
            )
        t2 = qubit_segment_duration

    segs = [
        Segment(
            SegmentConfig(_detunings(n, (0,), idle_detuning), False, include_residual_qm),
            math.pi / (2.0 * params.lambda_m[0]),
            "full swap magnon 1 -> cavity 1",
        ),
        Segment(
            SegmentConfig(_detunings(n, (), idle_detuning), True, include_residual_qm),
            t2,
            "dispersive exchange among all cavities",
        ),
    ]
    equal_couplings = len(set(params.lambda_m)) == 1
    if equal_couplings and not sequential_swaps:
        segs.append(
            Segment(
                SegmentConfig(
                    _detunings(n, tuple(range(n)), idle_detuning),
                    False,
                    include_residual_qm,
                ),
                math.pi / (2.0 * params.lambda_m[0]),
                "simultaneous swaps cavities -> magnons",
            )
        )
    else:
        for k in range(n):
            segs.append(
                Segment(
                    SegmentConfig(
                        _detunings(n, (k,), idle_detuning), False, include_residual_qm
                    ),
                    math.pi / (2.0 * params.lambda_m[k]),
                    f"swap cavity {k + 1} -> magnon {k + 1}",
                )
            )

    coeffs = tuple(-analytic_coefficients(n, params.lambda_eff, t2))
    return ProtocolSchedule(tuple(segs), n, params, coeffs)


def collapse_from_params(layout: SystemLayout, params: PhysicalParams) -> CollapseSet:
    """Decay channels of every magnon, every cavity and the qubit."""
    n = params.n_magnons
    magnons = layout.labels_of_kind("boson")[:n]
    cavities = layout.labels_of_kind("boson")[n:]
    channels = []
    for label, rate in zip(magnons, params.kappa_m):
        channels.append((annihilation(layout, label), rate))
    for label, rate in zip(cavities, params.kappa_a):
        channels.append((annihilation(layout, label), rate))
    sigma, _, _ = qubit_ops(layout)
    channels.append((sigma, params.gamma_q))
    return CollapseSet(tuple(channels))


def initial_state(layout: SystemLayout) -> QuantumState:
    """Single excitation in magnon 1, everything else vacuum, qubit in |g>."""
    first_magnon = layout.labels_of_kind("boson")[0]
    return basis_ket(layout, {first_magnon: 1})


def execute(
    schedule: ProtocolSchedule,
    engine: str,
    step_control: StepControl | None = None,
    boson_truncation: int = 2,
    phase_reset: bool = False,
    start: QuantumState | None = None,
) -> SimulationResult:
    """Run a schedule under one of the three engines.

    ideal-effective: ket evolution, dispersive Hamiltonian for the qubit
    segment; full-unitary: ket evolution under the full interaction-picture
    Hamiltonian; lindblad: density-matrix evolution with all decay channels.
    """
    if engine not in ENGINES:
        raise ProtocolError(f"unknown engine {engine!r}; expected one of {ENGINES}")
    params = schedule.params
    layout = build_layout(schedule.n_magnons, boson_truncation)
    target = TargetState(schedule.target_coefficients, layout).to_ket()

    state = start if start is not None else initial_state(layout)
    collapse = None
    if engine == "lindblad":
        state = state.to_density()
        collapse = collapse_from_params(layout, params)

    result: SimulationResult | None = None
    cursor = 0.0
    for seg in schedule.segments:
        if engine == "ideal-effective" and seg.config.qubit_cavity_active:
            terms = build_effective_terms(layout, params)
        else:
            terms = build_full_terms(layout, params, seg.config)
        t_start = 0.0 if phase_reset else cursor
        if engine == "lindblad":
            part = evolve_lindblad(
                state, terms, collapse, seg.duration, step_control, t_start, target
            )
        else:
            part = evolve_ket(
                state, terms, seg.duration, step_control, t_start, target
            )
        if phase_reset:
            part.times = part.times + cursor
        state = part.final_state
        cursor += seg.duration
        result = part if result is None else result.extend(part)

    result.metadata.update(
        {
            "engine": engine,
            "total_duration_ns": schedule.total_duration,
            "boson_truncation": boson_truncation,
        }
    )
    if state.is_ket:
        result.metadata["final_overlap"] = complex(
            np.vdot(target.vector, state.vector)
        )
    return result
