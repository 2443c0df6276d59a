"""Branch-by-branch unitary simulation of two-wing spin measurements.

The protocols evolve a single universal state by local pointer-copy
unitaries and read it out as branches: amplitudes over declared pointer
bases, one basis per subsystem. Nothing here samples or collapses; the
evolution is deterministic and the branch weights reproduce the Born-rule
joint probabilities.

`run_parallel_epr` runs the aligned-measurement protocol, whose final state
has two perfectly anticorrelated branches. `run_nonparallel` runs the
general protocol with a relative angle between the wings; after the two
local measurements each wing is definite only relative to its own
apparatus, and cross-wing definiteness appears only after a comparison
interaction that copies both apparatus readings into a four-state pointer
(an interaction that must sit in the overlap of the measurements' future
light cones; see the stage events). `einstein_boxes` runs the one-particle,
two-detector splitting protocol whose induced behaviour is no-signalling
yet violates outcome independence with an empty hidden variable.

Definiteness is operationalised by amplitude support: a region is definite
relative to a conditioning branch iff the relative state restricted to the
region occupies a single pointer-basis label combination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import spacetime
from .behavior import Behavior, HiddenVariableModel, Scenario, validate
from .causality import CheckReport, check_outcome_independence
from .qstate import (
    StateVector,
    embed_block,
    ket,
    measurement_unitary,
    rotated_basis_matrix,
    singlet,
    tensor,
    up,
)

BRANCH_CUTOFF = 1e-12
DEFINITE_TOL = 1e-9


class EmptyBranchError(ValueError):
    """Conditioning basis state has (numerically) zero overlap."""


class ComparerStateError(ValueError):
    """Comparison pointer is absent, has the wrong dimension, or is not ready."""


@dataclass(frozen=True)
class PointerBasis:
    """Labelled orthonormal basis; columns of ``matrix`` are the basis states."""

    labels: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.complex128)
        d = len(self.labels)
        if mat.shape != (d, d):
            raise ValueError(f"pointer basis needs a {d}x{d} matrix, got {mat.shape}")
        if np.max(np.abs(mat.conj().T @ mat - np.eye(d))) > 1e-12:
            raise ValueError("pointer basis columns are not orthonormal")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))

    @classmethod
    def computational(cls, labels: Sequence[str]) -> "PointerBasis":
        return cls(tuple(labels), np.eye(len(labels)))

    @classmethod
    def spin(cls, theta: float) -> "PointerBasis":
        return cls(("up", "down"), rotated_basis_matrix(theta))

    def column(self, label: str) -> np.ndarray:
        try:
            return self.matrix[:, self.labels.index(str(label))]
        except ValueError:
            raise KeyError(f"unknown pointer label {label!r}; have {self.labels}") from None


def default_pointer(dim: int) -> PointerBasis:
    if dim == 2:
        return PointerBasis.computational(("up", "down"))
    return PointerBasis.computational(tuple(str(i) for i in range(dim)))


SPIN_POINTER = PointerBasis.computational(("up", "down"))
COMPARER_POINTER = PointerBasis.computational(("uu", "ud", "du", "dd"))


@dataclass(frozen=True)
class Branch:
    """One pointer-basis component of the state: labels, amplitude, weight."""

    labels: Mapping[str, str]
    amplitude: complex

    @property
    def weight(self) -> float:
        return abs(self.amplitude) ** 2

    def label_text(self) -> str:
        return " ".join(f"{k}={v}" for k, v in self.labels.items())


def _resolve_bases(
    state: StateVector, pointer_bases: Mapping[str, PointerBasis] | None
) -> list[PointerBasis]:
    given = dict(pointer_bases) if pointer_bases else {}
    out = []
    for label, dim in state.dims:
        basis = given.get(label, default_pointer(dim))
        if len(basis.labels) != dim:
            raise ValueError(f"pointer basis for {label!r} has wrong dimension")
        out.append(basis)
    return out


def _pointer_tensor(state: StateVector, bases: Sequence[PointerBasis]) -> np.ndarray:
    t = state.as_tensor()
    n = t.ndim
    for axis, basis in enumerate(bases):
        t = np.moveaxis(np.tensordot(basis.matrix.conj().T, t, axes=([1], [axis])), 0, axis)
    return t


def decompose(
    state: StateVector,
    pointer_bases: Mapping[str, PointerBasis] | None = None,
    cutoff: float = BRANCH_CUTOFF,
) -> tuple[Branch, ...]:
    """Branches of the state in the declared pointer bases, in basis order.

    Components with |amplitude| <= cutoff are dropped; the surviving weights
    sum to 1 up to the discarded mass.
    """
    bases = _resolve_bases(state, pointer_bases)
    t = _pointer_tensor(state, bases)
    labels = state.labels
    branches = []
    for idx in np.ndindex(*t.shape):
        amp = complex(t[idx])
        if abs(amp) > cutoff:
            branches.append(
                Branch({labels[k]: bases[k].labels[i] for k, i in enumerate(idx)}, amp)
            )
    return tuple(branches)


def relative_state(
    state: StateVector,
    conditioning: Mapping[str, str],
    pointer_bases: Mapping[str, PointerBasis] | None = None,
) -> StateVector:
    """Normalised state of the remaining subsystems relative to a branch.

    ``conditioning`` maps subsystem labels to pointer labels; the partial
    inner product with that basis state is taken and renormalised.
    """
    if not conditioning:
        raise ValueError("conditioning must name at least one subsystem")
    bases = _resolve_bases(state, pointer_bases)
    t = state.as_tensor()
    pairs = sorted(
        ((state.axis(sub), bases[state.axis(sub)].column(lab)) for sub, lab in conditioning.items()),
        key=lambda p: -p[0],
    )
    for axis, vec in pairs:
        t = np.tensordot(np.conjugate(vec), t, axes=([0], [axis]))
    norm = float(np.sqrt(np.sum(np.abs(t) ** 2)))
    if norm <= BRANCH_CUTOFF:
        raise EmptyBranchError(f"conditioning {dict(conditioning)!r} has zero overlap")
    remaining = tuple(d for d in state.dims if d[0] not in conditioning)
    return StateVector(remaining, t.reshape(-1) / norm)


def is_definite_relative(
    state: StateVector,
    region: Iterable[str],
    conditioning: Mapping[str, str],
    pointer_bases: Mapping[str, PointerBasis] | None = None,
    tol: float = DEFINITE_TOL,
) -> bool:
    """True iff the region has a single pointer configuration in the branch.

    The relative state is expanded in the declared pointer bases and the
    region subsystems' label patterns are collected over components with
    |amplitude| > tol; definiteness means exactly one pattern survives,
    i.e. the relative state factors as |region pattern> (x) |rest>.
    """
    region = tuple(region)
    rel = relative_state(state, conditioning, pointer_bases)
    for sub in region:
        rel.axis(sub)  # raises SubsystemError for unknown/conditioned-away labels
    patterns = set()
    for branch in decompose(rel, pointer_bases, cutoff=tol):
        patterns.add(tuple(branch.labels[sub] for sub in region))
    return len(patterns) == 1


@dataclass(frozen=True)
class Stage:
    """Named snapshot of the protocol: state, event, bases, and branches."""

    name: str
    state: StateVector
    event: spacetime.Event
    pointer_bases: dict[str, PointerBasis]
    branches: tuple[Branch, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "branches", decompose(self.state, self.pointer_bases))


@dataclass(frozen=True)
class ProtocolTrace:
    stages: tuple[Stage, ...]

    def __post_init__(self):
        report = spacetime.validate_protocol([s.event for s in self.stages])
        if not report.passed:
            raise ValueError(f"stage events are not causally ordered: {report.to_dict()}")

    @property
    def final_branches(self) -> tuple[Branch, ...]:
        return self.stages[-1].branches

    def stage(self, name: str) -> Stage:
        for s in self.stages:
            if s.name == name:
                return s
        raise KeyError(f"no stage named {name!r}; have {[s.name for s in self.stages]}")


_EV_PREP = spacetime.Event(0.0, 0.0, spacetime.Role.PREPARATION, "source")
_EV_A = spacetime.Event(3.0, -2.0, spacetime.Role.MEASUREMENT_A, "measurement A")
_EV_B = spacetime.Event(3.0, 2.0, spacetime.Role.MEASUREMENT_B, "measurement B")
_EV_COMPARE = spacetime.Event(7.0, 0.0, spacetime.Role.COMPARISON, "comparison")


def _two_wing_initial() -> StateVector:
    return tensor(up("m_A"), singlet("s1", "s2"), up("m_B"))


def run_parallel_epr() -> ProtocolTrace:
    """Aligned-measurement protocol: two branches, perfectly anticorrelated.

    Both wings measure along the same axis; the final state has amplitude
    +1/sqrt(2) on (m_A=up, s1=up, s2=down, m_B=down) and -1/sqrt(2) on the
    flipped pattern. Cross-wing definiteness already holds here: relative to
    either apparatus reading, the far wing shows the opposite outcome.
    """
    psi0 = _two_wing_initial()
    u_a = measurement_unitary(psi0.dims, 0.0, "s1", "m_A")
    u_b = measurement_unitary(psi0.dims, 0.0, "s2", "m_B")
    after_a = u_a.apply(psi0)
    final = u_b.apply(after_a)
    bases = {"m_A": SPIN_POINTER, "s1": SPIN_POINTER, "s2": SPIN_POINTER, "m_B": SPIN_POINTER}
    return ProtocolTrace(
        (
            Stage("preparation", psi0, _EV_PREP, bases),
            Stage("measurement-a", after_a, _EV_A, bases),
            Stage("measurement-b", final, _EV_B, bases),
        )
    )


def comparison_measurement(
    state: StateVector,
    apparatus_a: str = "m_A",
    apparatus_b: str = "m_B",
    comparer: str = "C",
) -> StateVector:
    """Unitarily copy the two apparatus readings into a four-state pointer.

    The comparer must be present, four-dimensional, and entirely in its
    ready (first) indicator state; the interaction is the permutation
    c -> c XOR (reading pair), a two-bit generalisation of a CNOT.
    """
    ax_c = state.axis(comparer)
    if state.dims[ax_c][1] != 4:
        raise ComparerStateError(f"comparer {comparer!r} must have dimension 4")
    probe = np.moveaxis(state.as_tensor(), ax_c, 0)
    stray = float(np.sqrt(np.sum(np.abs(probe[1:]) ** 2)))
    if stray > BRANCH_CUTOFF:
        raise ComparerStateError(
            f"comparer {comparer!r} is not in its ready state (stray amplitude {stray:.3g})"
        )
    block = np.zeros((16, 16))
    for x in range(2):
        for y in range(2):
            for c in range(4):
                block[x * 8 + y * 4 + (c ^ (2 * x + y)), x * 8 + y * 4 + c] = 1.0
    full = embed_block(state.dims, block, [apparatus_a, apparatus_b, comparer])
    return StateVector(state.dims, full @ state.amps)


def run_nonparallel(theta: float) -> ProtocolTrace:
    """General protocol with relative angle ``theta`` between the wings.

    Stage progression: the prepared state; the same state viewed in the
    rotated pointer basis of the far spin; the state after each local
    measurement; and the state after the comparison interaction, whose
    branches carry the four reading pairs on the comparer with the
    Born-rule weights for angles (0, theta).
    """
    if not math.isfinite(theta):
        raise ValueError(f"theta must be finite, got {theta!r}")
    psi0 = _two_wing_initial()
    z_bases = {"m_A": SPIN_POINTER, "s1": SPIN_POINTER, "s2": SPIN_POINTER, "m_B": SPIN_POINTER}
    rot_bases = dict(z_bases)
    rot_bases["s2"] = PointerBasis.spin(theta)

    u_a = measurement_unitary(psi0.dims, 0.0, "s1", "m_A")
    u_b = measurement_unitary(psi0.dims, theta, "s2", "m_B")
    after_a = u_a.apply(psi0)
    after_b = u_b.apply(after_a)

    with_comparer = tensor(after_b, ket("C", [1.0, 0.0, 0.0, 0.0]))
    compared = comparison_measurement(with_comparer)
    cmp_bases = dict(rot_bases)
    cmp_bases["C"] = COMPARER_POINTER

    rotated_view_event = spacetime.Event(0.0, 0.0, spacetime.Role.OTHER, "rotated-basis view")
    return ProtocolTrace(
        (
            Stage("preparation", psi0, _EV_PREP, z_bases),
            Stage("rotated-view", psi0, rotated_view_event, rot_bases),
            Stage("measurement-a", after_a, _EV_A, rot_bases),
            Stage("measurement-b", after_b, _EV_B, rot_bases),
            Stage("comparison", compared, _EV_COMPARE, cmp_bases),
        )
    )


def einstein_boxes() -> tuple[ProtocolTrace, Behavior, CheckReport]:
    """One particle split over two boxes, opened by local detectors.

    The particle starts in (|L> + |R>)/sqrt(2); each detector flips from
    ``empty`` to ``found`` iff the particle is on its side. The final state
    has two equal-weight branches with strictly anticorrelated findings. The
    induced one-setting behaviour is returned together with its outcome
    independence report for the empty hidden variable, which fails with
    violation 1/2 even though nothing here is entangled between two
    particles to begin with.
    """
    box_pointer = PointerBasis.computational(("empty", "found"))
    particle_pointer = PointerBasis.computational(("L", "R"))
    psi0 = tensor(
        ket("d_L", [1.0, 0.0]),
        ket("particle", [1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0)]),
        ket("d_R", [1.0, 0.0]),
    )
    flip = np.array([[0.0, 1.0], [1.0, 0.0]])
    eye = np.eye(2)
    p_left = np.diag([1.0, 0.0])
    p_right = np.diag([0.0, 1.0])
    open_left = embed_block(
        psi0.dims, np.kron(p_left, flip) + np.kron(p_right, eye), ["particle", "d_L"]
    )
    open_right = embed_block(
        psi0.dims, np.kron(p_right, flip) + np.kron(p_left, eye), ["particle", "d_R"]
    )
    after_left = StateVector(psi0.dims, open_left @ psi0.amps)
    final = StateVector(psi0.dims, open_right @ after_left.amps)

    bases = {"d_L": box_pointer, "particle": particle_pointer, "d_R": box_pointer}
    trace = ProtocolTrace(
        (
            Stage("preparation", psi0, _EV_PREP, bases),
            Stage(
                "open-left",
                after_left,
                spacetime.Event(3.0, -2.0, spacetime.Role.MEASUREMENT_A, "open left box"),
                bases,
            ),
            Stage(
                "open-right",
                final,
                spacetime.Event(3.0, 2.0, spacetime.Role.MEASUREMENT_B, "open right box"),
                bases,
            ),
        )
    )

    scenario = Scenario(
        settings_a=("open",),
        settings_b=("open",),
        outcomes_a=("empty", "found"),
        outcomes_b=("empty", "found"),
        context={"source": "einstein-boxes"},
    )
    table = np.zeros(scenario.shape)
    outcome_index = {"empty": 0, "found": 1}
    for branch in trace.final_branches:
        iA = outcome_index[branch.labels["d_L"]]
        iB = outcome_index[branch.labels["d_R"]]
        table[0, 0, iA, iB] += branch.weight
    induced = validate(Behavior(scenario, table))
    model = HiddenVariableModel(scenario, [(1.0, induced)])
    return trace, induced, check_outcome_independence(model)
