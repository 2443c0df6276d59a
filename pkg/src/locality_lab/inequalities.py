"""CHSH and original-form Bell functionals with classical and quantum bounds.

Outcome encoding is fixed throughout: the first outcome label on each side
maps to +1, the second to -1. The CHSH combination is

    S = E(a,b) - E(a,b') + E(a',b) + E(a',b')

whose local bound |S| <= 2 is recovered here by exhaustive enumeration of
the 16 deterministic strategies of the 2x2x2 scenario, and whose quantum
maximum is located by a deterministic coarse grid scan plus derivative-free
compass refinement over the four measurement angles.

`bell_1964` evaluates the original-form slack 1 + E(b,c) - |E(a,b) - E(a,c)|,
which presupposes perfect anticorrelation at equal settings; the slack is
still computed when that precondition fails, but the result is flagged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from .behavior import Behavior, Scenario, angle_label
from .qstate import StateVector, correlator_matrix

CORRELATOR_TOL = 1e-12
ANTICORRELATION_TOL = 1e-9


class ScenarioShapeError(ValueError):
    """The operation needs a two-setting, two-outcome scenario."""


@dataclass(frozen=True)
class CorrelatorSet:
    """Expectation values E(a, b) of the +/-1 outcome product over a grid."""

    settings_a: tuple[str, ...]
    settings_b: tuple[str, ...]
    values: np.ndarray  # shape (n_a, n_b)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (len(self.settings_a), len(self.settings_b)):
            raise ValueError(f"correlator grid shape {vals.shape} does not match settings")
        if np.max(np.abs(vals)) > 1.0 + CORRELATOR_TOL:
            raise ValueError("correlator magnitude exceeds 1 beyond tolerance")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "settings_a", tuple(str(s) for s in self.settings_a))
        object.__setattr__(self, "settings_b", tuple(str(s) for s in self.settings_b))

    @classmethod
    def from_behavior(cls, behavior: Behavior) -> "CorrelatorSet":
        sc = behavior.scenario
        if len(sc.outcomes_a) != 2 or len(sc.outcomes_b) != 2:
            raise ScenarioShapeError("correlators need binary outcomes on both sides")
        t = behavior.table
        values = t[:, :, 0, 0] + t[:, :, 1, 1] - t[:, :, 0, 1] - t[:, :, 1, 0]
        return cls(sc.settings_a, sc.settings_b, values)

    @classmethod
    def from_state(
        cls, state: StateVector, angles_a: Sequence[float], angles_b: Sequence[float]
    ) -> "CorrelatorSet":
        """Born-rule correlators of a two-qubit state over angle grids."""
        return cls(
            tuple(angle_label(t) for t in angles_a),
            tuple(angle_label(t) for t in angles_b),
            correlator_matrix(state, [float(t) for t in angles_a], [float(t) for t in angles_b]),
        )

    def _index(self, side: str, key: str | int) -> int:
        labels = self.settings_a if side == "a" else self.settings_b
        if isinstance(key, int):
            return key
        try:
            return labels.index(str(key))
        except ValueError:
            raise KeyError(f"unknown setting {key!r} on side {side!r}; have {labels}") from None

    def value(self, a: str | int, b: str | int) -> float:
        return float(self.values[self._index("a", a), self._index("b", b)])


def _as_correlators(source: Behavior | CorrelatorSet) -> CorrelatorSet:
    return source if isinstance(source, CorrelatorSet) else CorrelatorSet.from_behavior(source)


@dataclass(frozen=True)
class ChshResult:
    value: float
    settings: tuple[str, str, str, str]  # (a, a', b, b')
    terms: tuple[float, float, float, float]  # E(a,b), E(a,b'), E(a',b), E(a',b')

    def __post_init__(self):
        if abs(self.value) > 4.0 + 4 * CORRELATOR_TOL:
            raise ValueError(f"|S| = {abs(self.value)!r} exceeds the algebraic maximum 4")

    @property
    def magnitude(self) -> float:
        return abs(self.value)

    def to_dict(self) -> dict:
        a, ap, b, bp = self.settings
        e_ab, e_abp, e_apb, e_apbp = self.terms
        return {
            "value": self.value,
            "magnitude": self.magnitude,
            "settings": {"a": a, "a_prime": ap, "b": b, "b_prime": bp},
            "correlators": {"E(a,b)": e_ab, "E(a,b')": e_abp, "E(a',b)": e_apb, "E(a',b')": e_apbp},
        }


def chsh(
    source: Behavior | CorrelatorSet,
    a: str | int,
    a_prime: str | int,
    b: str | int,
    b_prime: str | int,
) -> ChshResult:
    """S = E(a,b) - E(a,b') + E(a',b) + E(a',b') for the named settings."""
    corr = _as_correlators(source)
    e_ab = corr.value(a, b)
    e_abp = corr.value(a, b_prime)
    e_apb = corr.value(a_prime, b)
    e_apbp = corr.value(a_prime, b_prime)
    names = (
        corr.settings_a[corr._index("a", a)],
        corr.settings_a[corr._index("a", a_prime)],
        corr.settings_b[corr._index("b", b)],
        corr.settings_b[corr._index("b", b_prime)],
    )
    return ChshResult(e_ab - e_abp + e_apb + e_apbp, names, (e_ab, e_abp, e_apb, e_apbp))


@dataclass(frozen=True)
class StrategyRow:
    """One deterministic local strategy: +/-1 responses per setting, and its S."""

    responses_a: tuple[int, int]
    responses_b: tuple[int, int]
    s: float


@dataclass(frozen=True)
class ClassicalBound:
    bound: float
    strategies: tuple[StrategyRow, ...]

    @property
    def maximizers(self) -> tuple[StrategyRow, ...]:
        return tuple(r for r in self.strategies if abs(r.s) == self.bound)


def classical_bound(scenario: Scenario) -> ClassicalBound:
    """Exhaustive enumeration of the 16 deterministic local strategies.

    The enumeration itself is the oracle: it returns max |S| = 2 together
    with every strategy row, so mixtures can be checked against it.
    """
    if scenario.shape != (2, 2, 2, 2):
        raise ScenarioShapeError(f"need a 2x2-setting binary scenario, got shape {scenario.shape}")
    rows = []
    for ra in product((1, -1), repeat=2):
        for rb in product((1, -1), repeat=2):
            e = lambda i, j: float(ra[i] * rb[j])
            s = e(0, 0) - e(0, 1) + e(1, 0) + e(1, 1)
            rows.append(StrategyRow(ra, rb, s))
    return ClassicalBound(max(abs(r.s) for r in rows), tuple(rows))


def _chsh_from_grid(e: np.ndarray, ia: int, iap: int, ib: int, ibp: int) -> float:
    return float(e[ia, ib] - e[ia, ibp] + e[iap, ib] + e[iap, ibp])


def quantum_max(
    state: StateVector,
    grid_step: float = math.pi / 24,
    refine_iters: int = 60,
) -> ChshResult:
    """Best |S| over measurement angles for a two-qubit state.

    Deterministic: a coarse scan of all angle quadruples on a uniform grid
    over [0, 2pi), then compass (pattern) search with a shrinking step from
    the best grid point. The returned value is the maximum over everything
    evaluated, so refinement can only improve on the scan.
    """
    if grid_step <= 0.0:
        raise ValueError("grid_step must be positive")
    m = int(math.ceil(2.0 * math.pi / grid_step))
    grid = np.arange(m) * grid_step
    e = correlator_matrix(state, grid, grid)
    s = (
        e[:, None, :, None]
        - e[:, None, None, :]
        + e[None, :, :, None]
        + e[None, :, None, :]
    )
    flat = int(np.argmax(np.abs(s)))
    ia, iap, ib, ibp = np.unravel_index(flat, s.shape)
    best = np.array([grid[ia], grid[iap], grid[ib], grid[ibp]])
    best_val = _chsh_from_grid(e, ia, iap, ib, ibp)

    def evaluate(angles: np.ndarray) -> float:
        em = correlator_matrix(state, angles[:2], angles[2:])
        return _chsh_from_grid(em, 0, 1, 0, 1)

    step = grid_step / 2.0
    for _ in range(refine_iters):
        improved = False
        candidate = best
        candidate_val = best_val
        for k in range(4):
            for delta in (step, -step):
                trial = best.copy()
                trial[k] += delta
                val = evaluate(trial)
                if abs(val) > abs(candidate_val):
                    candidate, candidate_val = trial, val
                    improved = True
        if improved:
            best, best_val = candidate, candidate_val
        else:
            step /= 2.0
    a, ap, b, bp = (float(x) for x in best)
    em = correlator_matrix(state, [a, ap], [b, bp])
    return ChshResult(
        best_val,
        (angle_label(a), angle_label(ap), angle_label(b), angle_label(bp)),
        (float(em[0, 0]), float(em[0, 1]), float(em[1, 0]), float(em[1, 1])),
    )


@dataclass(frozen=True)
class Bell1964Result:
    """Slack of 1 + E(b,c) - |E(a,b) - E(a,c)| plus the precondition status."""

    slack: float
    settings: tuple[str, str, str]
    terms: dict[str, float]
    anticorrelation_ok: bool
    max_equal_setting_deviation: float

    @property
    def satisfied(self) -> bool:
        return self.slack >= 0.0

    def to_dict(self) -> dict:
        a, b, c = self.settings
        return {
            "slack": self.slack,
            "satisfied": self.satisfied,
            "settings": {"a": a, "b": b, "c": c},
            "terms": dict(self.terms),
            "anticorrelation_ok": self.anticorrelation_ok,
            "max_equal_setting_deviation": self.max_equal_setting_deviation,
        }


def bell_1964(
    corr: CorrelatorSet,
    a: str | int,
    b: str | int,
    c_setting: str | int,
    anticorrelation_tol: float = ANTICORRELATION_TOL,
) -> Bell1964Result:
    """Original-form three-setting inequality slack.

    The derivation presupposes E(s, s) = -1 at every setting present on both
    sides; the worst deviation from that is reported, and a violation of the
    precondition flags (but does not suppress) the computed slack.
    """
    shared = [s for s in corr.settings_a if s in corr.settings_b]
    deviation = max((abs(corr.value(s, s) + 1.0) for s in shared), default=math.inf)
    e_bc = corr.value(b, c_setting)
    e_ab = corr.value(a, b)
    e_ac = corr.value(a, c_setting)
    slack = 1.0 + e_bc - abs(e_ab - e_ac)
    names = (
        corr.settings_a[corr._index("a", a)],
        corr.settings_b[corr._index("b", b)],
        corr.settings_b[corr._index("b", c_setting)],
    )
    return Bell1964Result(
        slack,
        names,
        {"E(b,c)": e_bc, "E(a,b)": e_ab, "E(a,c)": e_ac},
        deviation <= anticorrelation_tol,
        deviation,
    )


# -- CSV emission --------------------------------------------------------------


def correlators_to_csv(corr: CorrelatorSet) -> str:
    """Correlator grid as CSV text with columns a, b, E."""
    lines = ["a,b,E"]
    for ia, a in enumerate(corr.settings_a):
        for ib, b in enumerate(corr.settings_b):
            lines.append(f"{a},{b},{format(float(corr.values[ia, ib]), '.17g')}")
    return "\n".join(lines) + "\n"


def landscape_slice_to_csv(
    state: StateVector,
    base: Sequence[float],
    vary: int,
    angles: Sequence[float],
) -> str:
    """CHSH values along one angle axis, for plotting; columns angle, S.

    ``base`` is the (a, a', b, b') quadruple and ``vary`` the index swept.
    """
    if not 0 <= vary < 4:
        raise ValueError("vary must index one of the four angles")
    lines = ["angle,S"]
    work = [float(x) for x in base]
    for t in angles:
        work[vary] = float(t)
        em = correlator_matrix(state, work[:2], work[2:])
        lines.append(f"{format(float(t), '.17g')},{format(_chsh_from_grid(em, 0, 1, 0, 1), '.17g')}")
    return "\n".join(lines) + "\n"
