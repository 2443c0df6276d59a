"""Dense complex linear algebra for small labelled tensor-product systems.

Everything in this module is exact to floating-point rounding: states and
operators are dense ``complex128`` arrays over a handful of labelled
subsystems (a few dozen joint dimensions at most), basis order is
lexicographic with the first subsystem most significant, and norms/unitarity
are enforced at ``ALG_TOL``.

The Born-rule entry points (`born_joint`, `joint_probability_table`,
`correlator`) compute joint outcome probabilities for two spin-1/2
subsystems measured along rotated directions. Measurement directions are
parametrised by a single angle via the real rotation

    up(theta)   = cos(theta/2) |up> + sin(theta/2) |down>
    down(theta) = -sin(theta/2) |up> + cos(theta/2) |down>

which keeps every amplitude in the two-wing protocols real.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

ALG_TOL = 1e-12  # algebraic identities: norms, unitarity, probability sums

DimSpec = tuple[tuple[str, int], ...]


class LabelCollisionError(ValueError):
    """Two tensor factors share a subsystem label."""


class SubsystemError(KeyError):
    """Unknown subsystem label, or a subsystem of the wrong dimension."""


class NormalizationError(ValueError):
    """State norm differs from 1 beyond ALG_TOL."""


def _as_dims(dims: Iterable[tuple[str, int]]) -> DimSpec:
    out = tuple((str(label), int(d)) for label, d in dims)
    labels = [label for label, _ in out]
    if len(set(labels)) != len(labels):
        raise LabelCollisionError(f"duplicate subsystem label in {labels}")
    for label, d in out:
        if d < 1:
            raise ValueError(f"subsystem {label!r} has non-positive dimension {d}")
    return out


class StateVector:
    """Normalised pure state over an ordered sequence of labelled subsystems.

    ``amps[i]`` is the amplitude of the joint basis state whose multi-index is
    the lexicographic decomposition of ``i`` (first subsystem most
    significant). Instances are immutable; the amplitude array is read-only.
    """

    __slots__ = ("dims", "amps")

    def __init__(self, dims: Iterable[tuple[str, int]], amps: Sequence[complex] | np.ndarray):
        dims = _as_dims(dims)
        arr = np.array(amps, dtype=np.complex128).reshape(-1)
        expected = math.prod(d for _, d in dims)
        if arr.size != expected:
            raise ValueError(f"expected {expected} amplitudes for dims {dims}, got {arr.size}")
        if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
            raise ValueError("non-finite amplitude")
        n2 = float(np.vdot(arr, arr).real)
        if abs(n2 - 1.0) > ALG_TOL:
            raise NormalizationError(f"squared norm {n2!r} differs from 1 beyond {ALG_TOL}")
        arr.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amps", arr)

    def __setattr__(self, name, value):
        raise AttributeError("StateVector is immutable")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.dims)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.dims)

    @property
    def dim(self) -> int:
        return self.amps.size

    def axis(self, label: str) -> int:
        """Position of a subsystem in the tensor order."""
        for k, (name, _) in enumerate(self.dims):
            if name == label:
                return k
        raise SubsystemError(f"unknown subsystem {label!r}; have {self.labels}")

    def size_of(self, label: str) -> int:
        return self.dims[self.axis(label)][1]

    def as_tensor(self) -> np.ndarray:
        return self.amps.reshape(self.sizes)

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amps, self.amps).real))

    def allclose(self, other: "StateVector", tol: float = ALG_TOL) -> bool:
        """Amplitude-by-amplitude agreement (no global-phase forgiveness)."""
        return self.dims == other.dims and bool(np.max(np.abs(self.amps - other.amps)) <= tol)

    def __repr__(self) -> str:
        return f"StateVector(dims={self.dims})"


@dataclass(frozen=True)
class Operator:
    """Dense linear map on a labelled joint space; ``unitary`` is checked."""

    dims: DimSpec
    matrix: np.ndarray
    unitary: bool = False

    def __post_init__(self):
        dims = _as_dims(self.dims)
        object.__setattr__(self, "dims", dims)
        mat = np.asarray(self.matrix, dtype=np.complex128)
        dim = math.prod(d for _, d in dims)
        if mat.shape != (dim, dim):
            raise ValueError(f"operator shape {mat.shape} does not match joint dimension {dim}")
        if self.unitary:
            dev = np.max(np.abs(mat.conj().T @ mat - np.eye(dim)))
            if dev > ALG_TOL:
                raise ValueError(f"operator flagged unitary but max |U^H U - I| = {dev!r}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    def apply(self, state: StateVector) -> StateVector:
        if state.dims != self.dims:
            raise SubsystemError(f"operator dims {self.dims} do not match state dims {state.dims}")
        return StateVector(self.dims, self.matrix @ state.amps)


def ket(label: str, amps: Sequence[complex], dim: int | None = None) -> StateVector:
    """Single-subsystem state; ``dim`` defaults to ``len(amps)``."""
    arr = np.asarray(amps, dtype=np.complex128)
    return StateVector(((label, dim if dim is not None else arr.size),), arr)


def up(label: str) -> StateVector:
    return ket(label, [1.0, 0.0])


def down(label: str) -> StateVector:
    return ket(label, [0.0, 1.0])


def tensor(*states: StateVector) -> StateVector:
    """Tensor product of states over disjoint subsystem labels."""
    if not states:
        raise ValueError("tensor of no factors")
    dims: list[tuple[str, int]] = []
    amps = np.ones(1, dtype=np.complex128)
    for s in states:
        dims.extend(s.dims)
        amps = np.kron(amps, s.amps)
    return StateVector(dims, amps)


def singlet(label1: str = "s1", label2: str = "s2") -> StateVector:
    """(|up down> - |down up>)/sqrt(2) on two labelled qubits."""
    amps = np.zeros(4, dtype=np.complex128)
    amps[1] = 1.0 / math.sqrt(2.0)
    amps[2] = -1.0 / math.sqrt(2.0)
    return StateVector(((label1, 2), (label2, 2)), amps)


def rotated_basis_matrix(theta: float) -> np.ndarray:
    """2x2 real matrix whose columns are the rotated up/down spin states."""
    if not math.isfinite(theta):
        raise ValueError(f"angle must be finite, got {theta!r}")
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=np.float64)


def spin_basis(theta: float, label: str = "spin") -> tuple[StateVector, StateVector]:
    """Orthonormal eigenstates of spin along the direction at angle ``theta``."""
    w = rotated_basis_matrix(theta)
    return ket(label, w[:, 0]), ket(label, w[:, 1])


def _positions(dims: DimSpec, labels: Sequence[str]) -> list[int]:
    index = {name: k for k, (name, _) in enumerate(dims)}
    pos = []
    for label in labels:
        if label not in index:
            raise SubsystemError(f"unknown subsystem {label!r}; have {tuple(index)}")
        pos.append(index[label])
    if len(set(pos)) != len(pos):
        raise LabelCollisionError(f"repeated subsystem in {labels}")
    return pos


def embed_block(dims: Iterable[tuple[str, int]], block: np.ndarray, labels: Sequence[str]) -> np.ndarray:
    """Extend a matrix acting on the listed subsystems (in the listed order,
    first label most significant) by the identity on all other subsystems.
    """
    dims = _as_dims(dims)
    sizes = [d for _, d in dims]
    n = len(sizes)
    pos = _positions(dims, labels)
    block = np.asarray(block, dtype=np.complex128)
    block_dim = math.prod(sizes[k] for k in pos)
    if block.shape != (block_dim, block_dim):
        raise ValueError(f"block shape {block.shape} does not match subsystems {labels}")
    order = pos + [k for k in range(n) if k not in pos]
    rest = math.prod(sizes[k] for k in order[len(pos):]) if len(order) > len(pos) else 1
    big = np.kron(block, np.eye(rest, dtype=np.complex128))
    perm_sizes = [sizes[k] for k in order]
    t = big.reshape(perm_sizes + perm_sizes)
    inv = np.argsort(order)
    t = np.transpose(t, list(inv) + [n + int(i) for i in inv])
    full = math.prod(sizes)
    return np.ascontiguousarray(t.reshape(full, full))


def measurement_unitary(
    dims: Iterable[tuple[str, int]], theta: float, system: str, apparatus: str
) -> Operator:
    """Pointer-copy unitary for measuring ``system`` along angle ``theta``.

    On the (system, apparatus) pair it keeps the apparatus in its first
    indicator state when the system is in the rotated up state and flips it
    when the system is in the rotated down state; the apparatus-down sector
    is exchanged consistently (a CNOT in the rotated product basis). All
    other subsystems are untouched.
    """
    dims = _as_dims(dims)
    for label in (system, apparatus):
        pos = _positions(dims, [label])[0]
        if dims[pos][1] != 2:
            raise SubsystemError(f"subsystem {label!r} must be a qubit, has dimension {dims[pos][1]}")
    w = rotated_basis_matrix(theta)
    p_up = np.outer(w[:, 0], w[:, 0])
    p_down = np.outer(w[:, 1], w[:, 1])
    flip = np.array([[0.0, 1.0], [1.0, 0.0]])
    block = np.kron(p_up, np.eye(2)) + np.kron(p_down, flip)
    return Operator(dims, embed_block(dims, block, [system, apparatus]), unitary=True)


_EIGENVALUE_COLUMN = {"up": 0, "down": 1}

Outcome = tuple[str, str, float]  # (subsystem label, "up"|"down", angle in radians)


def _outcome_vector(spec: Outcome) -> tuple[str, np.ndarray]:
    label, eigenvalue, angle = spec
    if eigenvalue not in _EIGENVALUE_COLUMN:
        raise ValueError(f"rotated eigenvalue must be 'up' or 'down', got {eigenvalue!r}")
    return str(label), rotated_basis_matrix(float(angle))[:, _EIGENVALUE_COLUMN[eigenvalue]]


def born_joint(state: StateVector, outcome_a: Outcome, outcome_b: Outcome) -> float:
    """Joint probability of two rotated spin outcomes on a shared state.

    Projects the state onto both outcome eigenstates and returns the squared
    norm of the result. The four probabilities at a fixed angle pair sum to 1.
    """
    n2 = float(np.vdot(state.amps, state.amps).real)
    if abs(n2 - 1.0) > ALG_TOL:
        raise NormalizationError(f"state squared norm {n2!r} differs from 1 beyond {ALG_TOL}")
    label_a, vec_a = _outcome_vector(outcome_a)
    label_b, vec_b = _outcome_vector(outcome_b)
    ax_a, ax_b = state.axis(label_a), state.axis(label_b)
    if label_a == label_b:
        raise LabelCollisionError("joint outcomes must address two distinct subsystems")
    for label, ax in ((label_a, ax_a), (label_b, ax_b)):
        if state.dims[ax][1] != 2:
            raise SubsystemError(f"subsystem {label!r} must be a qubit")
    t = state.as_tensor()
    # Contract the higher axis first so the lower index stays valid.
    (ax1, v1), (ax2, v2) = sorted(((ax_a, vec_a), (ax_b, vec_b)), key=lambda p: -p[0])
    t = np.tensordot(np.conjugate(v1), t, axes=([0], [ax1]))
    t = np.tensordot(np.conjugate(v2), t, axes=([0], [ax2]))
    return float(np.sum(np.abs(t) ** 2))


def _two_qubit_matrix(state: StateVector, system_a: str | None, system_b: str | None) -> np.ndarray:
    if system_a is None or system_b is None:
        if len(state.dims) != 2:
            raise SubsystemError(
                "state must have exactly two subsystems unless systems are named explicitly"
            )
        system_a, system_b = state.labels
    ax_a, ax_b = state.axis(system_a), state.axis(system_b)
    if state.dims[ax_a][1] != 2 or state.dims[ax_b][1] != 2 or len(state.dims) != 2:
        raise SubsystemError("joint probability tables require a two-qubit state")
    m = state.as_tensor()
    return m if (ax_a, ax_b) == (0, 1) else m.T


def joint_probability_table(
    state: StateVector,
    angles_a: Sequence[float],
    angles_b: Sequence[float],
    system_a: str | None = None,
    system_b: str | None = None,
) -> np.ndarray:
    """All Born probabilities over an angle grid, shape (n_a, n_b, 2, 2).

    Entry ``[i, j, p, q]`` equals ``born_joint`` at angles ``(angles_a[i],
    angles_b[j])`` for outcomes (up, down)[p] and (up, down)[q]; the two
    routes agree to rounding.
    """
    m = _two_qubit_matrix(state, system_a, system_b)
    wa = np.stack([rotated_basis_matrix(t) for t in angles_a])  # (na, 2, cols)
    wb = np.stack([rotated_basis_matrix(t) for t in angles_b])
    amp = np.einsum("akp,kl,blq->abpq", wa, m, wb)
    return np.abs(amp) ** 2


def correlator(state: StateVector, angle_a: float, angle_b: float) -> float:
    """Expectation of the +/-1 outcome product at one angle pair (up -> +1)."""
    p = joint_probability_table(state, [angle_a], [angle_b])[0, 0]
    return float(p[0, 0] + p[1, 1] - p[0, 1] - p[1, 0])


def correlator_matrix(
    state: StateVector, angles_a: Sequence[float], angles_b: Sequence[float]
) -> np.ndarray:
    p = joint_probability_table(state, angles_a, angles_b)
    return p[:, :, 0, 0] + p[:, :, 1, 1] - p[:, :, 0, 1] - p[:, :, 1, 0]
