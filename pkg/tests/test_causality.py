"""Locality-condition checkers over behaviours and hidden-variable models.

Claims covered:
  - no-signalling passes for Born-rule and product behaviours and pins a
    constructed 0.2 marginal shift with the right witness;
  - parameter independence holds exactly for the sign ensemble, degenerates
    to no-signalling for the empty hidden variable, and flags a
    far-setting-dependent deterministic strategy with violation 1;
  - outcome independence fails by exactly 1/2 for the singlet at parallel
    settings with empty hidden variable, passes for deterministic and
    per-lambda-product conditionals;
  - factorizability fails by exactly 1/4 for the parallel singlet with empty
    hidden variable and holds exactly for products;
  - on strictly positive tables, factorizability <=> (PI and OI), and a
    PI-passing OI-failing model also fails factorizability;
  - determinism of every conditional implies outcome independence at zero
    tolerance; exact per-lambda factorizability implies no-signalling of the
    average;
  - the reduction to determinism validates its hypotheses, exhibits the
    anticorrelation deficit of the uniform-lambda counterexample family, and
    certifies 0/1 marginals when the hypotheses hold.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from locality_lab.behavior import (
    Behavior,
    HiddenVariableModel,
    Scenario,
    average,
    from_quantum,
    sign_model,
    validate,
)
from locality_lab.causality import (
    Condition,
    PositivityError,
    check_factorizability,
    check_no_signalling,
    check_outcome_independence,
    check_parameter_independence,
    jarrett_equivalence,
    suppes_zanotti_reduction,
)
from locality_lab.qstate import singlet, tensor, up

BINARY = Scenario(("a0", "a1"), ("b0", "b1"))


def product_behavior(scenario, marg_a, marg_b):
    """Per-setting product table from one-sided marginals."""
    table = np.einsum("ax,by->abxy", np.asarray(marg_a), np.asarray(marg_b))
    return validate(Behavior(scenario, table))


def deterministic_behavior(scenario, idx_a, idx_b):
    table = np.zeros(scenario.shape)
    for ia in range(len(scenario.settings_a)):
        for ib in range(len(scenario.settings_b)):
            table[ia, ib, idx_a[ia], idx_b[ib]] = 1.0
    return validate(Behavior(scenario, table))


def empty_lambda(behavior):
    return HiddenVariableModel(behavior.scenario, [(1.0, behavior)])


@pytest.fixture(scope="module")
def singlet_grid():
    return from_quantum(singlet(), [0.0, math.pi / 2], [math.pi / 4, 3 * math.pi / 4])


@pytest.fixture(scope="module")
def singlet_parallel():
    return from_quantum(singlet(), [0.0], [0.0])


class TestNoSignalling:
    def test_singlet_grid_passes(self, singlet_grid):
        report = check_no_signalling(singlet_grid)
        assert report.passed and report.max_violation < 1e-12

    def test_product_behaviour_passes(self):
        b = from_quantum(tensor(up("s1"), up("s2")), [0.0, 0.8], [0.3, 1.9])
        assert check_no_signalling(b).passed

    def test_constructed_shift_detected_with_witness(self):
        # P(A|a) moves by 0.2 when b flips; B side stays uniform.
        table = np.empty(BINARY.shape)
        for ia in range(2):
            table[ia, 0] = np.outer([0.5, 0.5], [0.5, 0.5])
            table[ia, 1] = np.outer([0.7, 0.3], [0.5, 0.5])
        report = check_no_signalling(validate(Behavior(BINARY, table)))
        assert not report.passed
        assert report.max_violation == pytest.approx(0.2, abs=1e-12)
        assert report.witness["side"] == "A"
        assert {report.witness["b"], report.witness["b_prime"]} == {"b0", "b1"}


class TestParameterIndependence:
    def test_sign_model_exact(self):
        model, _ = sign_model([0.0, 1.2], [0.5, 2.0], 3000, seed=1)
        report = check_parameter_independence(model)
        assert report.passed and report.max_violation == 0.0

    def test_empty_lambda_equals_no_signalling(self, singlet_grid):
        report = check_parameter_independence(empty_lambda(singlet_grid))
        ns = check_no_signalling(singlet_grid)
        assert report.passed
        assert report.max_violation == pytest.approx(ns.max_violation, abs=1e-15)

    def test_far_setting_dependent_strategy_flagged(self):
        # A answers up under b0 and down under b1: a 1964-style locality breach.
        table = np.zeros(BINARY.shape)
        table[:, 0, 0, 0] = 1.0
        table[:, 1, 1, 0] = 1.0
        model = empty_lambda(validate(Behavior(BINARY, table)))
        report = check_parameter_independence(model)
        assert not report.passed
        assert report.max_violation == pytest.approx(1.0, abs=1e-12)
        assert report.witness["side"] == "A"


class TestOutcomeIndependence:
    def test_singlet_parallel_violation_half(self, singlet_parallel):
        report = check_outcome_independence(empty_lambda(singlet_parallel))
        assert not report.passed
        assert report.max_violation == pytest.approx(0.5, abs=1e-12)

    def test_deterministic_conditionals_pass(self):
        model = HiddenVariableModel(
            BINARY,
            [
                (0.5, deterministic_behavior(BINARY, [0, 1], [1, 0])),
                (0.5, deterministic_behavior(BINARY, [1, 0], [0, 1])),
            ],
        )
        report = check_outcome_independence(model, tol=0.0)
        assert report.passed and report.max_violation == 0.0
        assert report.skipped_cells > 0  # zero-probability conditioning skipped, counted

    def test_product_conditionals_pass(self):
        rng = np.random.default_rng(0)
        marg_a = rng.uniform(0.2, 0.8, size=(2, 1))
        marg_b = rng.uniform(0.2, 0.8, size=(2, 1))
        b = product_behavior(
            BINARY,
            np.concatenate([marg_a, 1 - marg_a], axis=1),
            np.concatenate([marg_b, 1 - marg_b], axis=1),
        )
        assert check_outcome_independence(empty_lambda(b)).max_violation < 1e-12


class TestFactorizability:
    def test_sign_model_exact(self):
        model, _ = sign_model([0.0, 2.2], [0.7], 2000, seed=3)
        report = check_factorizability(model)
        assert report.passed and report.max_violation == 0.0

    def test_singlet_parallel_violation_quarter(self, singlet_parallel):
        report = check_factorizability(empty_lambda(singlet_parallel))
        assert not report.passed
        assert report.max_violation == pytest.approx(0.25, abs=1e-12)

    def test_correlated_deterministic_mixture_passes(self):
        model = HiddenVariableModel(
            BINARY,
            [
                (0.5, deterministic_behavior(BINARY, [0, 0], [0, 0])),
                (0.5, deterministic_behavior(BINARY, [1, 1], [1, 1])),
            ],
        )
        assert check_factorizability(model).max_violation == 0.0

    def test_annotates_when_pi_fails(self):
        table = np.zeros(BINARY.shape)
        table[:, 0, 0, 0] = 1.0
        table[:, 1, 1, 0] = 1.0
        report = check_factorizability(empty_lambda(validate(Behavior(BINARY, table))))
        assert report.notes and "parameter independence fails" in report.notes[0]


def positive_product_model(rng, n_lambda=2):
    lams = []
    weights = rng.dirichlet(np.ones(n_lambda))
    weights[-1] = 1.0 - float(weights[:-1].sum())
    for w in weights:
        pa = rng.uniform(0.1, 0.9, size=2)
        pb = rng.uniform(0.1, 0.9, size=2)
        marg_a = np.stack([pa, 1 - pa], axis=1)
        marg_b = np.stack([pb, 1 - pb], axis=1)
        lams.append((float(w), product_behavior(BINARY, marg_a, marg_b)))
    return HiddenVariableModel(BINARY, lams)


def positive_arbitrary_model(rng, n_lambda=2):
    lams = []
    weights = rng.dirichlet(np.ones(n_lambda))
    weights[-1] = 1.0 - float(weights[:-1].sum())
    for w in weights:
        t = rng.uniform(0.05, 1.0, size=BINARY.shape)
        t /= t.sum(axis=(2, 3), keepdims=True)
        lams.append((float(w), validate(Behavior(BINARY, t))))
    return HiddenVariableModel(BINARY, lams)


def pi_passing_oi_failing_model(rng):
    """Product marginals plus correlated noise: PI intact, OI broken."""
    pa = rng.uniform(0.35, 0.65, size=2)
    pb = rng.uniform(0.35, 0.65, size=2)
    eps = 0.05
    table = np.empty(BINARY.shape)
    for ia in range(2):
        for ib in range(2):
            base = np.outer([pa[ia], 1 - pa[ia]], [pb[ib], 1 - pb[ib]])
            table[ia, ib] = base + eps * np.array([[1.0, -1.0], [-1.0, 1.0]])
    return empty_lambda(validate(Behavior(BINARY, table)))


class TestJarrettDecomposition:
    def test_equivalence_on_random_positive_models(self):
        rng = np.random.default_rng(2024)
        for k in range(60):
            if k % 3 == 0:
                model = positive_product_model(rng)
            elif k % 3 == 1:
                model = positive_arbitrary_model(rng)
            else:
                model = pi_passing_oi_failing_model(rng)
            assert jarrett_equivalence(model, tol=1e-9)

    def test_pi_passing_oi_failing_breaks_factorizability(self):
        model = pi_passing_oi_failing_model(np.random.default_rng(7))
        assert check_parameter_independence(model).passed
        assert not check_outcome_independence(model).passed
        assert not check_factorizability(model).passed

    def test_product_model_passes_all(self):
        model = positive_product_model(np.random.default_rng(8))
        assert check_parameter_independence(model).passed
        assert check_outcome_independence(model).passed
        assert check_factorizability(model).passed

    def test_zero_entry_rejected(self):
        model = empty_lambda(deterministic_behavior(BINARY, [0, 1], [1, 0]))
        with pytest.raises(PositivityError):
            jarrett_equivalence(model)


class TestStructuralImplications:
    @given(hst.integers(min_value=0, max_value=10_000))
    @settings(max_examples=40, deadline=None)
    def test_determinism_implies_outcome_independence_at_zero(self, seed):
        rng = np.random.default_rng(seed)
        lams = []
        weights = rng.dirichlet(np.ones(3))
        weights[-1] = 1.0 - float(weights[:-1].sum())
        for w in weights:
            idx_a = rng.integers(0, 2, size=2)
            idx_b = rng.integers(0, 2, size=2)
            lams.append((float(w), deterministic_behavior(BINARY, idx_a, idx_b)))
        report = check_outcome_independence(HiddenVariableModel(BINARY, lams), tol=0.0)
        assert report.passed

    @given(hst.integers(min_value=0, max_value=10_000))
    @settings(max_examples=40, deadline=None)
    def test_factorizable_model_average_is_no_signalling(self, seed):
        model = positive_product_model(np.random.default_rng(seed), n_lambda=3)
        assert check_factorizability(model, tol=1e-12).passed
        assert check_no_signalling(average(model), tol=1e-12).passed


PARALLEL = Scenario(("s0", "s1", "xa"), ("s0", "s1", "xb"))


def anticorrelated_product_lambda(rng):
    """Deterministic at the shared settings, stochastic product elsewhere."""
    resp = rng.integers(0, 2, size=2)
    qa, qb = rng.uniform(0.1, 0.9, size=2)
    marg_a = np.vstack([np.eye(2)[resp], [qa, 1 - qa]])
    marg_b = np.vstack([np.eye(2)[1 - resp], [qb, 1 - qb]])
    return product_behavior(PARALLEL, marg_a, marg_b)


class TestSuppesZanottiReduction:
    def test_two_strategy_mixture_satisfies_conclusion(self):
        sc = Scenario(("s0",), ("s0",))
        model = HiddenVariableModel(
            sc, [(0.5, deterministic_behavior(sc, [0], [1])), (0.5, deterministic_behavior(sc, [1], [0]))]
        )
        report = suppes_zanotti_reduction(model)
        assert report.condition is Condition.DETERMINISM
        assert report.passed is True
        assert report.max_violation == 0.0

    def test_uniform_lambda_family_rejected_at_hypotheses(self):
        sc = Scenario(("s0",), ("s0",))
        uniform = validate(Behavior(sc, np.full(sc.shape, 0.25)))
        det = deterministic_behavior(sc, [0], [1])
        model = HiddenVariableModel(sc, [(0.5, uniform), (0.5, det)])
        report = suppes_zanotti_reduction(model)
        assert report.passed is None
        assert any("hypotheses-unsatisfied" in note for note in report.notes)
        assert report.max_violation >= 0.25 - 1e-12  # anticorrelation deficit

    def test_nonfactorizable_variant_also_rejected(self):
        sc = Scenario(("s0",), ("s0",))
        anti = validate(Behavior(sc, np.array([[[[0.0, 0.5], [0.5, 0.0]]]])))
        model = HiddenVariableModel(sc, [(1.0, anti)])
        report = suppes_zanotti_reduction(model)
        assert report.passed is None
        assert report.max_violation >= 0.25 - 1e-12  # factorizability deficit

    def test_sign_model_parallel_settings_deterministic(self):
        model, _ = sign_model([0.0, 1.0], [0.0, 1.0], 2000, seed=11)
        report = suppes_zanotti_reduction(model)
        assert report.passed is True
        assert report.max_violation == 0.0

    def test_random_passing_models_conclude_determinism(self):
        rng = np.random.default_rng(99)
        for _ in range(25):
            weights = rng.dirichlet(np.ones(3))
            weights[-1] = 1.0 - float(weights[:-1].sum())
            model = HiddenVariableModel(
                PARALLEL, [(float(w), anticorrelated_product_lambda(rng)) for w in weights]
            )
            report = suppes_zanotti_reduction(model, tol=1e-9, det_tol=1e-6)
            assert report.passed is True

    def test_missing_parallel_pair_rejected(self):
        model = empty_lambda(product_behavior(BINARY, np.full((2, 2), 0.5), np.full((2, 2), 0.5)))
        with pytest.raises(ValueError, match="parallel"):
            suppes_zanotti_reduction(model)


class TestEinsteinBoxesProperty:
    def test_boxes_behavior_fails_oi_passes_ns(self):
        from locality_lab.everett import einstein_boxes

        _, induced, oi_report = einstein_boxes()
        assert not oi_report.passed
        assert oi_report.max_violation == pytest.approx(0.5, abs=1e-12)
        ns = check_no_signalling(induced)
        assert ns.passed and ns.max_violation < 1e-12


class TestReportSerialization:
    def test_report_dict_fields(self, singlet_parallel):
        report = check_outcome_independence(empty_lambda(singlet_parallel))
        payload = report.to_dict()
        assert set(payload) >= {"condition", "passed", "max_violation", "witness", "skipped_cells"}
        assert payload["condition"] == "outcome-independence"
        assert payload["passed"] is False
