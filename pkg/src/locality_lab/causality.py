"""Executable probabilistic locality conditions for bipartite models.

Each checker scans a behaviour or hidden-variable model for the worst
violation of one condition and reports it quantitatively:

  * no-signalling        -- observable marginals ignore the far setting;
  * parameter independence -- lambda-conditional marginals ignore the far
                              setting;
  * outcome independence -- conditioning on the far outcome (given both
                            settings and lambda) leaves near-outcome
                            probabilities unchanged;
  * factorizability      -- each lambda-conditional joint splits into the
                            product of its one-sided marginals;
  * determinism          -- the conclusion of the reduction theorem:
                            factorizability plus perfect anticorrelation at
                            parallel settings forces every lambda-conditional
                            marginal there to 0 or 1.

Conditional probabilities are defined only on conditioning events with
probability above ``zero_cutoff``; skipped cells are counted, never treated
as vacuous passes. Reports carry the maximal violation and a witness for it
(ties broken lexicographically), so they can back quantitative tests.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .behavior import Behavior, HiddenVariableModel, average

DEFAULT_TOL = 1e-9
DEFAULT_DET_TOL = 1e-6
ZERO_CUTOFF = 1e-12


class Condition(enum.Enum):
    NO_SIGNALLING = "no-signalling"
    PARAMETER_INDEPENDENCE = "parameter-independence"
    OUTCOME_INDEPENDENCE = "outcome-independence"
    FACTORIZABILITY = "factorizability"
    DETERMINISM = "determinism"


class PositivityError(ValueError):
    """A checker requiring strictly positive tables met a zero entry."""


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one condition check.

    ``passed`` is None only when a check's hypotheses were unsatisfied and no
    pass/fail verdict applies (see `suppes_zanotti_reduction`); otherwise
    ``passed`` iff ``max_violation <= tol``. The witness names the cell
    achieving the maximal violation.
    """

    condition: Condition
    passed: bool | None
    max_violation: float
    tol: float
    witness: dict | None = None
    skipped_cells: int = 0
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "condition": self.condition.value,
            "passed": self.passed,
            "max_violation": self.max_violation,
            "witness": self.witness,
            "skipped_cells": self.skipped_cells,
            "tol": self.tol,
            "notes": list(self.notes),
        }


def _argmax_cell(arr: np.ndarray) -> tuple[float, tuple[int, ...]]:
    """Maximum and its lexicographically first index (arr must be nonempty)."""
    flat = np.argmax(arr)
    return float(arr.reshape(-1)[flat]), tuple(int(i) for i in np.unravel_index(flat, arr.shape))


def _marginal_shift(marg: np.ndarray) -> np.ndarray:
    """d[x, y, y', O] = marg[x, y, O] - marg[x, y', O] over the far setting."""
    return np.abs(marg[:, :, None, :] - marg[:, None, :, :])


def check_no_signalling(behavior: Behavior, tol: float = DEFAULT_TOL) -> CheckReport:
    """Observable-level marginal independence of the far setting."""
    sc = behavior.scenario
    d_a = _marginal_shift(behavior.marginal_a())  # (a, b, b', A)
    d_b = _marginal_shift(np.transpose(behavior.marginal_b(), (1, 0, 2)))  # (b, a, a', B)
    max_a, cell_a = _argmax_cell(d_a)
    max_b, cell_b = _argmax_cell(d_b)
    if max_a >= max_b:
        value = max_a
        ia, ib, ibp, iA = cell_a
        witness = {
            "side": "A",
            "a": sc.settings_a[ia],
            "b": sc.settings_b[ib],
            "b_prime": sc.settings_b[ibp],
            "outcome": sc.outcomes_a[iA],
        }
    else:
        value = max_b
        ib, ia, iap, iB = cell_b
        witness = {
            "side": "B",
            "b": sc.settings_b[ib],
            "a": sc.settings_a[ia],
            "a_prime": sc.settings_a[iap],
            "outcome": sc.outcomes_b[iB],
        }
    return CheckReport(Condition.NO_SIGNALLING, value <= tol, value, tol, witness)


def check_parameter_independence(model: HiddenVariableModel, tol: float = DEFAULT_TOL) -> CheckReport:
    """Lambda-conditional marginal independence of the far setting."""
    sc = model.scenario
    tables = model.stacked_tables()
    d_a = _marginal_shift_l(tables.sum(axis=4))  # (l, a, b, b', A)
    d_b = _marginal_shift_l(np.transpose(tables.sum(axis=3), (0, 2, 1, 3)))  # (l, b, a, a', B)
    max_a, cell_a = _argmax_cell(d_a)
    max_b, cell_b = _argmax_cell(d_b)
    if max_a >= max_b:
        value = max_a
        il, ia, ib, ibp, iA = cell_a
        witness = {
            "lambda": il,
            "side": "A",
            "a": sc.settings_a[ia],
            "b": sc.settings_b[ib],
            "b_prime": sc.settings_b[ibp],
            "outcome": sc.outcomes_a[iA],
        }
    else:
        value = max_b
        il, ib, ia, iap, iB = cell_b
        witness = {
            "lambda": il,
            "side": "B",
            "b": sc.settings_b[ib],
            "a": sc.settings_a[ia],
            "a_prime": sc.settings_a[iap],
            "outcome": sc.outcomes_b[iB],
        }
    return CheckReport(Condition.PARAMETER_INDEPENDENCE, value <= tol, value, tol, witness)


def _marginal_shift_l(marg: np.ndarray) -> np.ndarray:
    return np.abs(marg[:, :, :, None, :] - marg[:, :, None, :, :])


def check_outcome_independence(
    model: HiddenVariableModel,
    tol: float = DEFAULT_TOL,
    zero_cutoff: float = ZERO_CUTOFF,
) -> CheckReport:
    """Far-outcome conditioning leaves near-outcome probabilities unchanged.

    Cells whose conditioning event has probability <= zero_cutoff are
    skipped and counted in the report.
    """
    sc = model.scenario
    best = -1.0
    witness: dict | None = None
    skipped = 0
    for il, (_, b) in enumerate(model.lambdas):
        t = b.table
        marg_a = t.sum(axis=3)  # (a, b, A)
        marg_b = t.sum(axis=2)  # (a, b, B)
        for side in ("A", "B"):
            if side == "A":
                cond_prob = marg_b[:, :, None, :]  # P(B|a,b) broadcast over A
                joint = t
                base = marg_a[:, :, :, None]
            else:
                cond_prob = marg_a[:, :, :, None]  # P(A|a,b) broadcast over B
                joint = t
                base = marg_b[:, :, None, :]
            defined = np.broadcast_to(cond_prob, joint.shape) > zero_cutoff
            skipped += int(joint.size - np.count_nonzero(defined))
            diff = np.zeros_like(joint)
            np.divide(joint, cond_prob, out=diff, where=defined)
            diff = np.abs(diff - base)
            diff[~defined] = -np.inf
            value, (ia, ib, iA, iB) = _argmax_cell(diff)
            if value > best:
                best = value
                near, far = ("A", "B") if side == "A" else ("B", "A")
                witness = {
                    "lambda": il,
                    "side": near,
                    "a": sc.settings_a[ia],
                    "b": sc.settings_b[ib],
                    "outcome": (sc.outcomes_a[iA] if near == "A" else sc.outcomes_b[iB]),
                    "conditioned_on": {
                        "side": far,
                        "outcome": (sc.outcomes_b[iB] if far == "B" else sc.outcomes_a[iA]),
                    },
                }
    if best < 0.0:  # every conditioning event was skipped
        best = 0.0
        witness = None
    return CheckReport(Condition.OUTCOME_INDEPENDENCE, best <= tol, best, tol, witness, skipped)


def check_factorizability(model: HiddenVariableModel, tol: float = DEFAULT_TOL) -> CheckReport:
    """Per-lambda product structure of the joint table.

    Marginals are taken at the same setting pair as the joint cell; when
    parameter independence holds they coincide with the lambda marginals,
    otherwise the report is annotated and the pair-specific marginals are
    used as a diagnostic.
    """
    sc = model.scenario
    tables = model.stacked_tables()
    marg_a = tables.sum(axis=4)
    marg_b = tables.sum(axis=3)
    product = marg_a[:, :, :, :, None] * marg_b[:, :, :, None, :]
    value, (il, ia, ib, iA, iB) = _argmax_cell(np.abs(tables - product))
    witness = {
        "lambda": il,
        "a": sc.settings_a[ia],
        "b": sc.settings_b[ib],
        "A": sc.outcomes_a[iA],
        "B": sc.outcomes_b[iB],
    }
    notes: tuple[str, ...] = ()
    pi = check_parameter_independence(model, tol)
    if not pi.passed:
        notes = (
            "parameter independence fails "
            f"(max shift {pi.max_violation:.6g}); pair-specific marginals used",
        )
    return CheckReport(Condition.FACTORIZABILITY, value <= tol, value, tol, witness, 0, notes)


def jarrett_equivalence(model: HiddenVariableModel, tol: float = DEFAULT_TOL) -> bool:
    """factorizability <=> (parameter independence and outcome independence).

    Requires strictly positive tables so every conditional is defined; on
    such tables the equivalence is an algebraic identity.
    """
    sc = model.scenario
    for il, (_, b) in enumerate(model.lambdas):
        if np.min(b.table) <= 0.0:
            cell = np.unravel_index(int(np.argmin(b.table)), b.table.shape)
            ia, ib, iA, iB = (int(i) for i in cell)
            raise PositivityError(
                f"lambda {il} has a non-positive entry at "
                f"(a={sc.settings_a[ia]!r}, b={sc.settings_b[ib]!r}, "
                f"A={sc.outcomes_a[iA]!r}, B={sc.outcomes_b[iB]!r})"
            )
    fact = check_factorizability(model, tol).passed
    pi = check_parameter_independence(model, tol).passed
    oi = check_outcome_independence(model, tol).passed
    return fact == (pi and oi)


def _parallel_pairs(model: HiddenVariableModel, parallel) -> list[tuple[int, int]]:
    sc = model.scenario
    if parallel is None:
        pairs = [
            (ia, sc.settings_b.index(label))
            for ia, label in enumerate(sc.settings_a)
            if label in sc.settings_b
        ]
    else:
        pairs = [(sc.setting_index("a", a), sc.setting_index("b", b)) for a, b in parallel]
    if not pairs:
        raise ValueError("no parallel setting pair (no shared labels and none declared)")
    return pairs


def suppes_zanotti_reduction(
    model: HiddenVariableModel,
    tol: float = DEFAULT_TOL,
    det_tol: float = DEFAULT_DET_TOL,
    parallel: list[tuple[str, str]] | None = None,
) -> CheckReport:
    """Reduction to determinism at the parallel settings.

    Hypotheses: factorizability within ``tol`` and perfect anticorrelation of
    the averaged behaviour at every parallel pair (outcomes matched by index,
    P(A = B | s, s) <= tol). When both hold, asserts the conclusion: every
    lambda-conditional marginal at the tested settings lies within
    ``det_tol`` of {0, 1}. When the hypotheses fail, the report carries
    ``passed = None``, a "hypotheses-unsatisfied" note, and the hypothesis
    deficit as ``max_violation``.
    """
    sc = model.scenario
    if len(sc.outcomes_a) != len(sc.outcomes_b):
        raise ValueError("anticorrelation needs index-matched outcome lists of equal length")
    pairs = _parallel_pairs(model, parallel)

    fact = check_factorizability(model, tol)
    avg = average(model)
    same = [float(sum(avg.table[ia, ib, i, i] for i in range(len(sc.outcomes_a)))) for ia, ib in pairs]
    deficit = max(same)
    if not fact.passed or deficit > tol:
        notes = (
            "hypotheses-unsatisfied: "
            f"factorizability max violation {fact.max_violation:.6g} (tol {tol:g}), "
            f"anticorrelation deficit {deficit:.6g} (tol {tol:g})",
        )
        slack = max(fact.max_violation if not fact.passed else 0.0, deficit if deficit > tol else 0.0)
        return CheckReport(Condition.DETERMINISM, None, slack, det_tol, None, 0, notes)

    worst = 0.0
    witness: dict | None = None
    for il, (_, b) in enumerate(model.lambdas):
        marg_a = b.marginal_a()
        marg_b = b.marginal_b()
        for ia, ib in pairs:
            for side, marg, outcomes in (("A", marg_a[ia, ib], sc.outcomes_a),
                                         ("B", marg_b[ia, ib], sc.outcomes_b)):
                for io, p in enumerate(marg):
                    dist = min(abs(p), abs(1.0 - p))
                    if dist > worst:
                        worst = dist
                        witness = {
                            "lambda": il,
                            "side": side,
                            "setting": sc.settings_a[ia],
                            "outcome": outcomes[io],
                            "marginal": float(p),
                        }
    return CheckReport(Condition.DETERMINISM, worst <= det_tol, worst, det_tol, witness)
