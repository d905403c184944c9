"""Command-line front end: protocol runs, sweeps, traces and validation.

Config files are line-oriented `key = value` with `#` comments; numeric keys
carry a unit suffix (_ghz, _mhz, _ns). Outputs are CSV (sweeps, traces) or a
flat key = value summary (runs), printed with 12 significant digits so that
repeated invocations diff clean.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, fields

import numpy as np

from .dynamics import StepControl, evolve_ket, evolve_lindblad, CollapseSet, fidelity
from .hamiltonian import build_effective_terms, build_full_terms, SegmentConfig, DECOUPLED
from .hilbert import BOSON, QUBIT, Subsystem, SystemLayout, annihilation, basis_ket, build_layout, total_excitation_operator
from .parameters import (
    FarDetuningError,
    ParameterError,
    PhysicalParams,
    ghz_to_angular,
    mhz_to_angular,
    mhz_to_rate,
)
from .protocol import (
    ENGINES,
    IsoprobabilityUnattainable,
    ProtocolError,
    analytic_coefficients,
    execute,
    isoprobability_time,
    max_p2,
    min_p1,
    n_magnon_schedule,
    two_magnon_bell_schedule,
)
from .sweeps import (
    SWEEPABLE,
    SweepSpec,
    default_trace_tmax,
    probability_trace,
    run_sweep,
    trace_to_csv,
)


class ConfigError(ValueError):
    """Malformed or physically invalid run configuration."""


_FLOAT_KEYS = {
    "omega_q_ghz",
    "omega_a_ghz",
    "lambda_q_mhz",
    "lambda_m_mhz",
    "kappa_m_mhz",
    "kappa_a_mhz",
    "gamma_q_mhz",
    "idle_detuning_ghz",
    "step_ns",
}
_INT_KEYS = {"n", "truncation"}
_BOOL_KEYS = {"equalize", "residual_qm", "phase_reset", "sequential_swaps"}
_STR_KEYS = {"engine"}
_RATE_KEYS = {"kappa_m_mhz", "kappa_a_mhz", "gamma_q_mhz"}
# Physical names a user might write without the required unit suffix.
_UNSUFFIXED = {
    "omega_q",
    "omega_a",
    "lambda_q",
    "lambda_m",
    "kappa_m",
    "kappa_a",
    "gamma_q",
    "idle_detuning",
    "step",
}


@dataclass
class RunConfig:
    """Validated run configuration; defaults are the benchmark parameter set."""

    omega_q_ghz: float = 7.92
    omega_a_ghz: float = 6.98
    lambda_q_mhz: float = 83.2
    lambda_m_mhz: float = 15.3
    kappa_m_mhz: float = 1.06
    kappa_a_mhz: float = 1.35
    gamma_q_mhz: float = 1.2
    n: int = 2
    engine: str = "lindblad"
    equalize: bool = True
    truncation: int = 2
    step_ns: float | None = None
    idle_detuning_ghz: float | None = None
    residual_qm: bool = False
    phase_reset: bool = False
    sequential_swaps: bool = False

    def validate(self):
        for key in _RATE_KEYS:
            if getattr(self, key) < 0:
                raise ConfigError(f"{key} must be >= 0")
        if self.n < 2:
            raise ConfigError("n must be >= 2")
        if self.truncation < 2:
            raise ConfigError("truncation must be >= 2")
        if self.engine not in ENGINES:
            raise ConfigError(f"engine must be one of {ENGINES}")
        if self.step_ns is not None and self.step_ns <= 0:
            raise ConfigError("step_ns must be positive")
        if self.engine == "ideal-effective":
            try:
                self.physical_params().check_far_detuning()
            except FarDetuningError as exc:
                raise ConfigError(str(exc)) from exc

    def physical_params(self) -> PhysicalParams:
        return PhysicalParams(
            omega_q=ghz_to_angular(self.omega_q_ghz),
            omega_a=ghz_to_angular(self.omega_a_ghz),
            lambda_q=mhz_to_angular(self.lambda_q_mhz),
            lambda_m=(mhz_to_angular(self.lambda_m_mhz),) * self.n,
            kappa_a=(mhz_to_rate(self.kappa_a_mhz),) * self.n,
            kappa_m=(mhz_to_rate(self.kappa_m_mhz),) * self.n,
            gamma_q=mhz_to_rate(self.gamma_q_mhz),
        )

    def schedule(self):
        params = self.physical_params()
        idle = (
            ghz_to_angular(self.idle_detuning_ghz)
            if self.idle_detuning_ghz is not None
            else None
        )
        if self.n == 2:
            return two_magnon_bell_schedule(
                params, idle_detuning=idle, include_residual_qm=self.residual_qm
            )
        return n_magnon_schedule(
            params,
            self.n,
            equalize=self.equalize,
            sequential_swaps=self.sequential_swaps,
            idle_detuning=idle,
            include_residual_qm=self.residual_qm,
        )

    def step_control(self) -> StepControl | None:
        if self.step_ns is None:
            return None
        return StepControl(max_step=self.step_ns)


def parse_config(text: str) -> RunConfig:
    """Parse `key = value` configuration text; empty text yields all defaults."""
    cfg = RunConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for stmt in line.split(","):
            stmt = stmt.strip()
            if not stmt:
                continue
            if "=" not in stmt:
                raise ConfigError(f"line {lineno}: expected key = value, got {stmt!r}")
            key, _, value = stmt.partition("=")
            key, value = key.strip(), value.strip()
            if key in _UNSUFFIXED:
                raise ConfigError(
                    f"line {lineno}: key {key!r} is missing its unit suffix "
                    "(_ghz, _mhz or _ns)"
                )
            if key in _FLOAT_KEYS:
                try:
                    setattr(cfg, key, float(value))
                except ValueError:
                    raise ConfigError(f"line {lineno}: non-numeric value for {key}: {value!r}")
            elif key in _INT_KEYS:
                try:
                    setattr(cfg, key, int(value))
                except ValueError:
                    raise ConfigError(f"line {lineno}: non-integer value for {key}: {value!r}")
            elif key in _BOOL_KEYS:
                if value.lower() in ("true", "yes", "on", "1"):
                    setattr(cfg, key, True)
                elif value.lower() in ("false", "no", "off", "0"):
                    setattr(cfg, key, False)
                else:
                    raise ConfigError(f"line {lineno}: non-boolean value for {key}: {value!r}")
            elif key in _STR_KEYS:
                setattr(cfg, key, value)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
    try:
        cfg.validate()
    except ConfigError:
        raise
    except (ParameterError, ProtocolError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _load_config(args) -> RunConfig:
    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
    else:
        cfg = RunConfig()
    # Command-line flags override the config file.
    for name in ("n", "engine", "step_ns", "truncation", "idle_detuning_ghz"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    for name in ("residual_qm", "phase_reset", "sequential_swaps"):
        if getattr(args, name, False):
            setattr(cfg, name, True)
    if getattr(args, "no_equalize", False):
        cfg.equalize = False
    cfg.validate()
    return cfg


def _write(args, text: str):
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_run(args) -> int:
    cfg = _load_config(args)
    schedule = cfg.schedule()
    result = execute(
        schedule,
        cfg.engine,
        step_control=cfg.step_control(),
        boson_truncation=cfg.truncation,
        phase_reset=cfg.phase_reset,
    )
    layout = result.layout
    lines = [
        f"engine = {cfg.engine}",
        f"n = {cfg.n}",
        f"total_duration_ns = {_fmt(schedule.total_duration)}",
        f"fidelity = {_fmt(result.final_fidelity)}",
        f"final_norm = {_fmt(float(result.norms[-1]))}",
    ]
    if result.min_eigenvalue is not None:
        lines.append(f"min_eigenvalue = {_fmt(result.min_eigenvalue)}")
    pops = result.final_state.populations()
    magnons = layout.labels_of_kind(BOSON)[: cfg.n]
    for label in magnons:
        idx = layout.basis_index({label: 1})
        lines.append(f"population[{label}=1] = {_fmt(float(pops[idx]))}")
    lines.append(f"population[vacuum] = {_fmt(float(pops[layout.basis_index({})]))}")
    excited = result.final_state.reduced_probability(layout.qubit_label, 1)
    lines.append(f"population[qubit=e] = {_fmt(excited)}")
    _write(args, "\n".join(lines) + "\n")
    return 0


def _cmd_schedule(args) -> int:
    cfg = _load_config(args)
    _write(args, cfg.schedule().to_text())
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    if args.param == "lambda_q":
        convert = mhz_to_angular
        unit = "rad/ns (input MHz)"
    else:
        convert = mhz_to_rate
        unit = "1/ns (input MHz)"
    spec = SweepSpec(
        parameter=args.param,
        start=convert(args.start),
        stop=convert(args.stop),
        points=args.points,
        base_params=cfg.physical_params(),
        n=cfg.n,
        equalize=cfg.equalize,
        engine=cfg.engine,
        recompute_durations=not args.frozen_durations,
        step_control=cfg.step_control(),
        boson_truncation=cfg.truncation,
    )
    result = run_sweep(spec)
    result.metadata["units"] = unit
    _write(args, result.to_csv())
    return 0


def _cmd_trace(args) -> int:
    cfg = _load_config(args)
    lam = cfg.physical_params().lambda_eff
    tmax = args.tmax if args.tmax is not None else default_trace_tmax(cfg.n, lam)
    trace = probability_trace(cfg.n, lam, tmax, args.samples)
    _write(args, trace_to_csv(trace))
    return 0


def _check(name: str, ok: bool, detail: str = "") -> bool:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"{status} {name}{suffix}")
    return ok


def _cavity_qubit_layout(n: int, truncation: int = 2) -> SystemLayout:
    subs = [Subsystem(f"a{i+1}", BOSON, truncation) for i in range(n)]
    subs.append(Subsystem("q", QUBIT, 2))
    return SystemLayout(tuple(subs))


def _cmd_validate(args) -> int:
    cfg = _load_config(args)
    ok = True
    rng = np.random.default_rng(12345)

    # Hermiticity and excitation conservation of the generators.
    for n in (2, 3):
        cfg_n = RunConfig(n=n)
        params = cfg_n.physical_params()
        layout = build_layout(n)
        n_exc = total_excitation_operator(layout)
        config = SegmentConfig((0.0,) + (DECOUPLED,) * (n - 1), False)
        worst_h = 0.0
        worst_c = 0.0
        for t in rng.uniform(0.0, 50.0, size=5):
            for seg in (config, SegmentConfig((DECOUPLED,) * n, True)):
                h = build_full_terms(layout, params, seg).operator_at(float(t))
                worst_h = max(worst_h, float(np.max(np.abs(h.matrix - h.matrix.conj().T))))
                worst_c = max(worst_c, float(np.max(np.abs(h.commutator(n_exc).matrix))))
        h_eff = build_effective_terms(layout, params).operator_at(0.0)
        worst_h = max(worst_h, float(np.max(np.abs(h_eff.matrix - h_eff.matrix.conj().T))))
        worst_c = max(worst_c, float(np.max(np.abs(h_eff.commutator(n_exc).matrix))))
        ok &= _check(f"hermiticity-and-conservation-n{n}", worst_h <= 1e-12 and worst_c <= 1e-12,
                     f"max dev {max(worst_h, worst_c):.2e}")

    # Exchange oracle: integrated amplitudes vs the closed form.
    params2 = RunConfig(n=2).physical_params()
    lam = params2.lambda_eff
    for n in (2, 3, 4, 5):
        layout = _cavity_qubit_layout(n)
        pn = RunConfig(n=n).physical_params()
        terms = build_effective_terms(layout, pn)
        psi0 = basis_ket(layout, {"a1": 1})
        period = 2.0 * math.pi / (n * pn.lambda_eff)
        worst = 0.0
        for frac in np.linspace(0.01, 1.0, 25):
            t = float(frac * period)
            res = evolve_ket(psi0, terms, t)
            expected = analytic_coefficients(n, pn.lambda_eff, t)
            for k in range(n):
                idx = layout.basis_index({f"a{k+1}": 1})
                worst = max(worst, abs(res.final_state.vector[idx] - expected[k]))
        ok &= _check(f"exchange-oracle-n{n}", worst < 1e-7, f"max amp err {worst:.2e}")

    # Normalization of the closed-form coefficients.
    worst = 0.0
    for _ in range(2000):
        n = int(rng.integers(2, 9))
        t = float(rng.uniform(0.0, 1000.0))
        worst = max(worst, abs(np.sum(np.abs(analytic_coefficients(n, lam, t)) ** 2) - 1.0))
    ok &= _check("coefficient-normalization", worst < 1e-14, f"max dev {worst:.2e}")

    # Single decaying mode against the analytic exponential.
    layout1 = SystemLayout((Subsystem("a1", BOSON, 2), Subsystem("q", QUBIT, 2)))
    kappa = 0.01
    rho0 = basis_ket(layout1, {"a1": 1}).to_density()
    collapse = CollapseSet(((annihilation(layout1, "a1"), kappa),))
    res = evolve_lindblad(rho0, np.zeros((4, 4), dtype=complex), collapse, 5.0 / kappa)
    n_series = res.occupation_series("a1", 1)
    expected = np.exp(-kappa * res.times)
    worst = float(np.max(np.abs(n_series - expected)))
    ok &= _check("single-mode-decay", worst < 1e-6, f"max dev {worst:.2e}")

    # Equal-probability boundary.
    iso_ok = (
        abs(isoprobability_time(3, lam) - 2.0 * math.pi / (9.0 * lam)) < 1e-12
        and abs(isoprobability_time(4, lam) - math.pi / (4.0 * lam)) < 1e-12
        and all(isoprobability_time(n, lam) is None for n in range(5, 11))
        and abs(min_p1(4) - max_p2(4)) < 1e-15
    )
    ok &= _check("isoprobability-boundary", iso_ok)

    # Ideal protocol exactness for n = 2 and 3.
    for n in (2, 3):
        cfg_n = RunConfig(n=n)
        sched = cfg_n.schedule()
        res = execute(sched, "ideal-effective")
        f = res.final_fidelity
        ok &= _check(f"ideal-protocol-n{n}", f > 0.999999, f"fidelity {f:.9f}")

    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magsim",
        description="Magnon entanglement protocol simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="path to key = value config file")
    common.add_argument("--n", type=int, help="number of magnons")
    common.add_argument("--engine", choices=ENGINES)
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--step-ns", dest="step_ns", type=float, help="integrator step cap")
    common.add_argument("--truncation", type=int, help="bosonic truncation (default 2)")
    common.add_argument("--no-equalize", dest="no_equalize", action="store_true")
    common.add_argument("--sequential-swaps", dest="sequential_swaps", action="store_true")
    common.add_argument("--residual-qm", dest="residual_qm", action="store_true")
    common.add_argument("--phase-reset", dest="phase_reset", action="store_true")
    common.add_argument(
        "--idle-detuning-ghz", dest="idle_detuning_ghz", type=float,
        help="numeric detuning for idle magnons instead of ideal switch-off",
    )

    p_run = sub.add_parser("run", parents=[common], help="execute a protocol")
    p_run.set_defaults(func=_cmd_run)

    p_sched = sub.add_parser("schedule", parents=[common], help="print the timed plan")
    p_sched.set_defaults(func=_cmd_schedule)

    p_sweep = sub.add_parser("sweep", parents=[common], help="fidelity parameter sweep")
    p_sweep.add_argument("--param", required=True, choices=SWEEPABLE)
    p_sweep.add_argument("--from", dest="start", type=float, required=True, help="range start (MHz)")
    p_sweep.add_argument("--to", dest="stop", type=float, required=True, help="range end (MHz)")
    p_sweep.add_argument("--points", type=int, required=True)
    p_sweep.add_argument("--frozen-durations", dest="frozen_durations", action="store_true")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_trace = sub.add_parser("trace", parents=[common], help="analytic probability trace")
    p_trace.add_argument("--tmax", type=float, help="trace length in ns (default one period)")
    p_trace.add_argument("--samples", type=int, default=400)
    p_trace.set_defaults(func=_cmd_trace)

    p_val = sub.add_parser("validate", parents=[common], help="oracle and sanity suite")
    p_val.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParameterError, ProtocolError, IsoprobabilityUnattainable, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
