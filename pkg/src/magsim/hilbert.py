"""Tensor-product Hilbert space of truncated bosonic modes and one qubit.

Canonical subsystem order is: magnon modes m1..mN, cavity modes a1..aN,
qubit q. Basis indices in all outputs (populations, CSV columns) follow
this order, with the last subsystem varying fastest (row-major kron).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

BOSON = "boson"
QUBIT = "qubit"

# Qubit basis: index 0 = |g>, index 1 = |e>.
QUBIT_GROUND = 0
QUBIT_EXCITED = 1


class LayoutError(ValueError):
    """Invalid layout construction or a label/dimension mismatch."""


@dataclass(frozen=True)
class Subsystem:
    label: str
    kind: str
    dim: int


@dataclass(frozen=True)
class SystemLayout:
    """Ordered roster of subsystems defining the tensor-product basis."""

    subsystems: tuple[Subsystem, ...]

    def __post_init__(self):
        labels = [s.label for s in self.subsystems]
        if len(set(labels)) != len(labels):
            raise LayoutError("subsystem labels must be unique")
        for s in self.subsystems:
            if s.kind not in (BOSON, QUBIT):
                raise LayoutError(f"unknown subsystem kind {s.kind!r}")
            if s.dim < 2:
                raise LayoutError(f"subsystem {s.label}: local dim must be >= 2")
            if s.kind == QUBIT and s.dim != 2:
                raise LayoutError(f"qubit {s.label} must have local dim 2")

    @property
    def total_dim(self) -> int:
        return int(np.prod([s.dim for s in self.subsystems]))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.subsystems)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.subsystems)

    def index(self, label: str) -> int:
        for i, s in enumerate(self.subsystems):
            if s.label == label:
                return i
        raise LayoutError(f"unknown subsystem label {label!r}")

    def subsystem(self, label: str) -> Subsystem:
        return self.subsystems[self.index(label)]

    def labels_of_kind(self, kind: str) -> tuple[str, ...]:
        return tuple(s.label for s in self.subsystems if s.kind == kind)

    @property
    def qubit_label(self) -> str:
        qubits = self.labels_of_kind(QUBIT)
        if len(qubits) != 1:
            raise LayoutError("layout does not contain exactly one qubit")
        return qubits[0]

    def basis_index(self, occupations: dict[str, int]) -> int:
        """Flat index of the product basis state with the given occupations."""
        idx = 0
        for s in self.subsystems:
            idx = idx * s.dim + occupations.get(s.label, 0)
        return idx

    def basis_occupations(self, index: int) -> dict[str, int]:
        """Inverse of basis_index."""
        occ = {}
        for s in reversed(self.subsystems):
            occ[s.label] = index % s.dim
            index //= s.dim
        return occ


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense complex operator on the full Hilbert space of a layout."""

    layout: SystemLayout
    matrix: np.ndarray

    def __post_init__(self):
        d = self.layout.total_dim
        if self.matrix.shape != (d, d):
            raise LayoutError(
                f"matrix shape {self.matrix.shape} does not match total dim {d}"
            )

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.layout, self.matrix.conj().T)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T))) <= tol

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check(other)
        return OperatorMatrix(self.layout, self.matrix + other.matrix)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check(other)
        return OperatorMatrix(self.layout, self.matrix - other.matrix)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check(other)
        return OperatorMatrix(self.layout, self.matrix @ other.matrix)

    def __mul__(self, scalar: complex) -> "OperatorMatrix":
        return OperatorMatrix(self.layout, scalar * self.matrix)

    __rmul__ = __mul__

    def commutator(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check(other)
        return OperatorMatrix(
            self.layout, self.matrix @ other.matrix - other.matrix @ self.matrix
        )

    def expectation(self, state: "QuantumState") -> float:
        if state.is_ket:
            val = np.vdot(state.vector, self.matrix @ state.vector)
        else:
            val = np.trace(self.matrix @ state.matrix)
        return complex(val).real

    def _check(self, other: "OperatorMatrix"):
        if other.layout is not self.layout and other.layout != self.layout:
            raise LayoutError("operator layouts do not match")


class StateValidationError(ValueError):
    """State fails its norm / trace / positivity bookkeeping."""


@dataclass
class QuantumState:
    """Pure ket or density matrix on a layout."""

    layout: SystemLayout
    data: np.ndarray

    @property
    def is_ket(self) -> bool:
        return self.data.ndim == 1

    @property
    def vector(self) -> np.ndarray:
        if not self.is_ket:
            raise StateValidationError("state is a density matrix, not a ket")
        return self.data

    @property
    def matrix(self) -> np.ndarray:
        if self.is_ket:
            return np.outer(self.data, self.data.conj())
        return self.data

    def to_density(self) -> "QuantumState":
        return QuantumState(self.layout, self.matrix)

    def norm(self) -> float:
        if self.is_ket:
            return float(np.linalg.norm(self.data))
        return float(np.trace(self.data).real)

    def populations(self) -> np.ndarray:
        if self.is_ket:
            return np.abs(self.data) ** 2
        return np.real(np.diag(self.data))

    def validate(
        self,
        norm_tol: float = 1e-10,
        herm_tol: float = 1e-12,
        eig_tol: float = 1e-8,
    ):
        if self.is_ket:
            if abs(np.linalg.norm(self.data) - 1.0) > norm_tol:
                raise StateValidationError("ket norm deviates from 1")
        else:
            if np.max(np.abs(self.data - self.data.conj().T)) > herm_tol:
                raise StateValidationError("density matrix is not Hermitian")
            if abs(np.trace(self.data).real - 1.0) > norm_tol:
                raise StateValidationError("density matrix trace deviates from 1")
            if np.linalg.eigvalsh(self.data)[0] < -eig_tol:
                raise StateValidationError("density matrix has a negative eigenvalue")

    def reduced_probability(self, label: str, value: int) -> float:
        """Probability of finding subsystem `label` in local basis state `value`."""
        pops = self.populations()
        total = 0.0
        for idx, p in enumerate(pops):
            if p == 0.0:
                continue
            if self.layout.basis_occupations(idx)[label] == value:
                total += p
        return float(total)


def build_layout(n_magnons: int, boson_truncation: int = 2) -> SystemLayout:
    """Layout with n magnon modes, n cavity modes and one qubit.

    Order: m1..mN, a1..aN, q.
    """
    if n_magnons < 1:
        raise LayoutError("n_magnons must be >= 1")
    if boson_truncation < 2:
        raise LayoutError("boson_truncation must be >= 2")
    subs = [Subsystem(f"m{i+1}", BOSON, boson_truncation) for i in range(n_magnons)]
    subs += [Subsystem(f"a{i+1}", BOSON, boson_truncation) for i in range(n_magnons)]
    subs.append(Subsystem("q", QUBIT, 2))
    return SystemLayout(tuple(subs))


def _embed(layout: SystemLayout, label: str, local: np.ndarray) -> np.ndarray:
    factors = [
        local if s.label == label else np.eye(s.dim, dtype=complex)
        for s in layout.subsystems
    ]
    return reduce(np.kron, factors)


def embed_operator(layout: SystemLayout, label: str, local: np.ndarray) -> OperatorMatrix:
    """Embed a single-subsystem operator, acting as identity elsewhere."""
    s = layout.subsystem(label)
    local = np.asarray(local, dtype=complex)
    if local.shape != (s.dim, s.dim):
        raise LayoutError(
            f"local operator shape {local.shape} does not match dim {s.dim} of {label!r}"
        )
    return OperatorMatrix(layout, _embed(layout, label, local))


def annihilation(layout: SystemLayout, label: str) -> OperatorMatrix:
    """Embedded truncated lowering operator: a|n> = sqrt(n)|n-1>."""
    s = layout.subsystem(label)
    if s.kind != BOSON:
        raise LayoutError(f"{label!r} is not a bosonic subsystem")
    local = np.diag(np.sqrt(np.arange(1, s.dim, dtype=float)), k=1).astype(complex)
    return OperatorMatrix(layout, _embed(layout, label, local))


def creation(layout: SystemLayout, label: str) -> OperatorMatrix:
    return annihilation(layout, label).dagger()


def number_operator(layout: SystemLayout, label: str) -> OperatorMatrix:
    s = layout.subsystem(label)
    if s.kind != BOSON:
        raise LayoutError(f"{label!r} is not a bosonic subsystem")
    local = np.diag(np.arange(s.dim, dtype=float)).astype(complex)
    return OperatorMatrix(layout, _embed(layout, label, local))


def qubit_ops(layout: SystemLayout) -> tuple[OperatorMatrix, OperatorMatrix, OperatorMatrix]:
    """(sigma, sigma_plus, sigma_z) for the qubit, embedded in the full space.

    sigma = |g><e|, sigma_plus = |e><g|, sigma_z = |e><e| - |g><g|.
    """
    label = layout.qubit_label
    g, e = QUBIT_GROUND, QUBIT_EXCITED
    sigma = np.zeros((2, 2), dtype=complex)
    sigma[g, e] = 1.0
    sigma_z = np.zeros((2, 2), dtype=complex)
    sigma_z[e, e] = 1.0
    sigma_z[g, g] = -1.0
    return (
        OperatorMatrix(layout, _embed(layout, label, sigma)),
        OperatorMatrix(layout, _embed(layout, label, sigma.conj().T)),
        OperatorMatrix(layout, _embed(layout, label, sigma_z)),
    )


def qubit_excited_projector(layout: SystemLayout) -> OperatorMatrix:
    label = layout.qubit_label
    proj = np.zeros((2, 2), dtype=complex)
    proj[QUBIT_EXCITED, QUBIT_EXCITED] = 1.0
    return OperatorMatrix(layout, _embed(layout, label, proj))


def basis_ket(layout: SystemLayout, occupations: dict[str, int | str] | None = None) -> QuantumState:
    """Normalized product basis ket; unspecified labels default to vacuum / |g>.

    Qubit occupation may be given as 'g' / 'e' or 0 / 1.
    """
    occupations = dict(occupations or {})
    resolved: dict[str, int] = {}
    for label, occ in occupations.items():
        s = layout.subsystem(label)
        if s.kind == QUBIT and isinstance(occ, str):
            if occ not in ("g", "e"):
                raise StateValidationError(f"qubit occupation must be 'g' or 'e', got {occ!r}")
            occ = QUBIT_GROUND if occ == "g" else QUBIT_EXCITED
        occ = int(occ)
        if not 0 <= occ < s.dim:
            raise StateValidationError(
                f"occupation {occ} out of range for subsystem {label!r} (dim {s.dim})"
            )
        resolved[label] = occ
    vec = np.zeros(layout.total_dim, dtype=complex)
    vec[layout.basis_index(resolved)] = 1.0
    return QuantumState(layout, vec)


def total_excitation_operator(layout: SystemLayout) -> OperatorMatrix:
    """Sum of all bosonic number operators plus the qubit |e><e| projector."""
    total = np.zeros((layout.total_dim, layout.total_dim), dtype=complex)
    for label in layout.labels_of_kind(BOSON):
        total += number_operator(layout, label).matrix
    total += qubit_excited_projector(layout).matrix
    return OperatorMatrix(layout, total)
