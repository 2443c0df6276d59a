"""Finite probabilistic models of bipartite experiments.

A `Scenario` fixes the finite setting and outcome labels for the two wings
plus free-form context metadata. A `Behavior` is the observable conditional
probability table P(A, B | a, b) stored dense as a (n_a, n_b, k_A, k_B)
array. A `HiddenVariableModel` is a finite weighted ensemble of behaviours
sharing one scenario; `average` recovers the observable behaviour.

Generators:
  * `from_quantum` packages the Born rule over an angle grid for a two-qubit
    state,
  * `sign_model` samples the classic local deterministic strategy for the
    singlet correlations: a hidden unit vector on the sphere with each wing
    answering with the sign of the projection onto its own measurement
    direction (one wing negated), which anticorrelates equal settings
    pointwise.

The JSON layout used for files on disk is
``{"scenario": {...}, "table": [...]}`` for a behaviour and
``{"scenario": {...}, "lambdas": [{"weight": w, "table": [...]}]}`` for a
model; tables are dense row-major in (a, b, A, B) order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .qstate import ALG_TOL, StateVector, born_joint

_CHUNK = 1 << 17  # Monte Carlo draw size; fixed so any worker split resamples identically


class BehaviorError(ValueError):
    """A probability table violates its invariants."""


class NegativeEntryError(BehaviorError):
    pass


class TableNormalizationError(BehaviorError):
    pass


class ModelError(ValueError):
    """A hidden-variable ensemble violates its invariants."""


def angle_label(theta: float) -> str:
    """Stable text label for an angle-valued setting."""
    return format(float(theta), ".12g")


def _unique_nonempty(name: str, labels: Sequence[str]) -> tuple[str, ...]:
    out = tuple(str(x) for x in labels)
    if not out:
        raise ValueError(f"{name} must be nonempty")
    if len(set(out)) != len(out):
        raise ValueError(f"{name} labels must be unique, got {out}")
    return out


@dataclass(frozen=True, eq=True)
class Scenario:
    """Finite setting/outcome labels for the two wings plus context metadata.

    Context entries describe the fixed experimental arrangement (everything
    but the settings chosen at the wings); they are carried as inert strings
    and never conditioned on.
    """

    settings_a: tuple[str, ...]
    settings_b: tuple[str, ...]
    outcomes_a: tuple[str, ...] = ("up", "down")
    outcomes_b: tuple[str, ...] = ("up", "down")
    context: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "settings_a", _unique_nonempty("settings_a", self.settings_a))
        object.__setattr__(self, "settings_b", _unique_nonempty("settings_b", self.settings_b))
        object.__setattr__(self, "outcomes_a", _unique_nonempty("outcomes_a", self.outcomes_a))
        object.__setattr__(self, "outcomes_b", _unique_nonempty("outcomes_b", self.outcomes_b))
        object.__setattr__(self, "context", {str(k): str(v) for k, v in dict(self.context).items()})

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (
            len(self.settings_a),
            len(self.settings_b),
            len(self.outcomes_a),
            len(self.outcomes_b),
        )

    def setting_index(self, side: str, label: str) -> int:
        labels = self.settings_a if side == "a" else self.settings_b
        try:
            return labels.index(str(label))
        except ValueError:
            raise KeyError(f"unknown setting {label!r} on side {side!r}; have {labels}") from None


class Behavior:
    """Dense conditional probability table P(A, B | a, b) over a scenario.

    The constructor only checks the shape; call `validate` to enforce the
    probability invariants (generators in this module always do).
    """

    __slots__ = ("scenario", "table")

    def __init__(self, scenario: Scenario, table: np.ndarray | Sequence):
        arr = np.asarray(table, dtype=np.float64)
        if arr.shape != scenario.shape:
            arr = arr.reshape(scenario.shape)
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "scenario", scenario)
        object.__setattr__(self, "table", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Behavior is immutable")

    def marginal_a(self) -> np.ndarray:
        """P(A | a, b), shape (n_a, n_b, k_A)."""
        return self.table.sum(axis=3)

    def marginal_b(self) -> np.ndarray:
        """P(B | a, b), shape (n_a, n_b, k_B)."""
        return self.table.sum(axis=2)

    def __repr__(self) -> str:
        return f"Behavior(shape={self.scenario.shape})"


def validate(behavior: Behavior, tol: float = ALG_TOL) -> Behavior:
    """Return the behaviour iff its invariants hold; raise naming the first bad cell."""
    sc = behavior.scenario
    t = behavior.table
    if not np.all(np.isfinite(t)):
        raise BehaviorError("table contains non-finite entries")
    for (ia, ib, iA, iB), value in np.ndenumerate(t):
        if value < -tol or value > 1.0 + tol:
            raise NegativeEntryError(
                "entry out of [0, 1] at cell "
                f"(a={sc.settings_a[ia]!r}, b={sc.settings_b[ib]!r}, "
                f"A={sc.outcomes_a[iA]!r}, B={sc.outcomes_b[iB]!r}): {value!r}"
            )
    sums = t.sum(axis=(2, 3))
    for (ia, ib), total in np.ndenumerate(sums):
        if abs(total - 1.0) > tol:
            raise TableNormalizationError(
                f"P(.,.|a,b) sums to {total!r} at "
                f"(a={sc.settings_a[ia]!r}, b={sc.settings_b[ib]!r}); deficit {total - 1.0!r}"
            )
    return behavior


class HiddenVariableModel:
    """Finite weighted ensemble of conditional behaviours over one scenario."""

    __slots__ = ("scenario", "lambdas")

    def __init__(self, scenario: Scenario, lambdas: Iterable[tuple[float, Behavior]]):
        lams = tuple((float(w), b) for w, b in lambdas)
        if not lams:
            raise ModelError("model needs at least one hidden-variable value")
        for w, b in lams:
            if w < 0.0:
                raise ModelError(f"negative weight {w!r}")
            if b.scenario != scenario:
                raise ModelError("all conditionals must share the model scenario")
        total = math.fsum(w for w, _ in lams)
        if abs(total - 1.0) > ALG_TOL:
            raise ModelError(f"weights sum to {total!r}, not 1")
        object.__setattr__(self, "scenario", scenario)
        object.__setattr__(self, "lambdas", lams)

    def __setattr__(self, name, value):
        raise AttributeError("HiddenVariableModel is immutable")

    def stacked_tables(self) -> np.ndarray:
        """All conditional tables as one (n_lambda, n_a, n_b, k_A, k_B) array."""
        return np.stack([b.table for _, b in self.lambdas])

    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.lambdas])

    def __repr__(self) -> str:
        return f"HiddenVariableModel(n_lambda={len(self.lambdas)}, shape={self.scenario.shape})"


def average(model: HiddenVariableModel) -> Behavior:
    """Mixture behaviour P(A,B|a,b) = sum_lambda w P(A,B|a,b,lambda).

    Accumulates term by term in lambda order so the result is bitwise equal
    to a naive per-cell loop over the same order.
    """
    acc = np.zeros(model.scenario.shape, dtype=np.float64)
    for w, b in model.lambdas:
        acc += w * b.table
    return validate(Behavior(model.scenario, acc))


def from_quantum(
    state: StateVector,
    settings_a: Sequence[float],
    settings_b: Sequence[float],
    context: Mapping[str, str] | None = None,
) -> Behavior:
    """Behaviour induced by the Born rule on a two-qubit state over angle grids."""
    if len(state.dims) != 2 or any(d != 2 for _, d in state.dims):
        raise ValueError(
            "from_quantum needs a bare two-qubit state (factor out apparatus "
            f"subsystems first); got dims {state.dims}"
        )
    angles_a = [float(t) for t in settings_a]
    angles_b = [float(t) for t in settings_b]
    scenario = Scenario(
        settings_a=tuple(angle_label(t) for t in angles_a),
        settings_b=tuple(angle_label(t) for t in angles_b),
        context=dict(context) if context is not None else {"source": "born-rule"},
    )
    sys_a, sys_b = state.labels[0], state.labels[1]
    table = np.empty(scenario.shape)
    for ia, ta in enumerate(angles_a):
        for ib, tb in enumerate(angles_b):
            for iA, out_a in enumerate(("up", "down")):
                for iB, out_b in enumerate(("up", "down")):
                    table[ia, ib, iA, iB] = born_joint(state, (sys_a, out_a, ta), (sys_b, out_b, tb))
    return validate(Behavior(scenario, table))


def _plane_directions(angles: Sequence[float]) -> np.ndarray:
    a = np.asarray(angles, dtype=np.float64)
    return np.stack([np.sin(a), np.zeros_like(a), np.cos(a)], axis=1)  # (k, 3)


def _response_signs(draws: np.ndarray, directions: np.ndarray) -> np.ndarray:
    # sign convention: sign(0) := +1
    return np.where(draws @ directions.T >= 0.0, 1, -1).astype(np.int8)


def sign_model(
    settings_a: Sequence[float],
    settings_b: Sequence[float],
    n_samples: int,
    seed: int,
) -> tuple[HiddenVariableModel, np.ndarray]:
    """Sampled sign-strategy ensemble and its empirical correlators E(a, b).

    Each hidden value is an isotropic direction; wing A answers
    sign(a_hat . lambda), wing B answers -sign(b_hat . lambda), so equal
    settings anticorrelate exactly for every sample. Identical sampled
    strategies are merged, so weights are multiples of 1/n_samples; the
    ensemble average and every checker result are unchanged by the merge.
    Correlators come from integer counts, hence E(a, a) = -1.0 exactly.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    angles_a = [float(t) for t in settings_a]
    angles_b = [float(t) for t in settings_b]
    dirs_a = _plane_directions(angles_a)
    dirs_b = _plane_directions(angles_b)
    ka, kb = len(angles_a), len(angles_b)
    if ka + kb > 40:
        raise ValueError("too many settings for the packed sampler (ka + kb > 40)")

    pattern_counts: dict[int, int] = {}
    prod_sums = np.zeros((ka, kb), dtype=np.int64)
    weights_pow = 1 << np.arange(ka + kb, dtype=np.int64)
    children = np.random.SeedSequence(seed).spawn(-(-n_samples // _CHUNK))
    remaining = n_samples
    for child in children:
        m = min(_CHUNK, remaining)
        remaining -= m
        rng = np.random.default_rng(child)
        # Signs depend only on the draw's direction, so the isotropic
        # gaussian can be used unnormalised.
        draws = rng.standard_normal((m, 3))
        resp_a = _response_signs(draws, dirs_a)
        resp_b = -_response_signs(draws, dirs_b)
        prod_sums += resp_a.astype(np.int64).T @ resp_b.astype(np.int64)
        bits = np.concatenate([resp_a > 0, resp_b > 0], axis=1)
        packed = bits @ weights_pow
        keys, counts = np.unique(packed, return_counts=True)
        for key, count in zip(keys.tolist(), counts.tolist()):
            pattern_counts[key] = pattern_counts.get(key, 0) + count

    scenario = Scenario(
        settings_a=tuple(angle_label(t) for t in angles_a),
        settings_b=tuple(angle_label(t) for t in angles_b),
        context={"source": "sign-model", "n_samples": str(n_samples), "seed": str(seed)},
    )
    lambdas = []
    for key in sorted(pattern_counts):
        bits = [(key >> i) & 1 for i in range(ka + kb)]
        idx_a = [0 if bit else 1 for bit in bits[:ka]]  # +1 -> "up" (index 0)
        idx_b = [0 if bit else 1 for bit in bits[ka:]]
        table = np.zeros(scenario.shape)
        for ia in range(ka):
            for ib in range(kb):
                table[ia, ib, idx_a[ia], idx_b[ib]] = 1.0
        lambdas.append((pattern_counts[key] / n_samples, validate(Behavior(scenario, table))))
    correlators = prod_sums / float(n_samples)
    return HiddenVariableModel(scenario, lambdas), correlators


# -- JSON interchange ---------------------------------------------------------


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "settings_a": list(scenario.settings_a),
        "settings_b": list(scenario.settings_b),
        "outcomes_a": list(scenario.outcomes_a),
        "outcomes_b": list(scenario.outcomes_b),
        "context": dict(scenario.context),
    }


def scenario_from_dict(obj: Mapping) -> Scenario:
    try:
        return Scenario(
            settings_a=tuple(obj["settings_a"]),
            settings_b=tuple(obj["settings_b"]),
            outcomes_a=tuple(obj.get("outcomes_a", ("up", "down"))),
            outcomes_b=tuple(obj.get("outcomes_b", ("up", "down"))),
            context=obj.get("context", {}),
        )
    except (KeyError, TypeError) as exc:
        raise BehaviorError(f"malformed scenario object: {exc}") from exc


def behavior_to_dict(behavior: Behavior) -> dict:
    return {
        "scenario": scenario_to_dict(behavior.scenario),
        "table": [float(x) for x in behavior.table.reshape(-1)],
    }


def model_to_dict(model: HiddenVariableModel) -> dict:
    return {
        "scenario": scenario_to_dict(model.scenario),
        "lambdas": [
            {"weight": float(w), "table": [float(x) for x in b.table.reshape(-1)]}
            for w, b in model.lambdas
        ],
    }


def from_dict(obj: Mapping) -> Behavior | HiddenVariableModel:
    """Parse either a behaviour or a model; tables are validated."""
    if not isinstance(obj, Mapping) or "scenario" not in obj:
        raise BehaviorError("expected an object with a 'scenario' field")
    scenario = scenario_from_dict(obj["scenario"])
    size = math.prod(scenario.shape)
    if "table" in obj:
        flat = np.asarray(obj["table"], dtype=np.float64)
        if flat.size != size:
            raise BehaviorError(f"table has {flat.size} entries, scenario needs {size}")
        return validate(Behavior(scenario, flat))
    if "lambdas" in obj:
        lams = []
        for k, lam in enumerate(obj["lambdas"]):
            try:
                weight = float(lam["weight"])
                flat = np.asarray(lam["table"], dtype=np.float64)
            except (KeyError, TypeError) as exc:
                raise BehaviorError(f"malformed lambda entry {k}: {exc}") from exc
            if flat.size != size:
                raise BehaviorError(f"lambda {k} table has {flat.size} entries, needs {size}")
            lams.append((weight, validate(Behavior(scenario, flat))))
        return HiddenVariableModel(scenario, lams)
    raise BehaviorError("object carries neither 'table' nor 'lambdas'")
