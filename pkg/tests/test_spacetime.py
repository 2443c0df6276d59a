"""Minkowski interval classification, cone predicates, and protocol checks.

Claims covered:
  - interval classification matches the sign of (dt)^2 - (dx)^2 with the
    lightlike boundary included, and is symmetric in its arguments;
  - future-cone membership is antisymmetric for timelike pairs and admits
    the lightlike boundary;
  - protocol validation accepts the overlap point (4, 0) and rejects (2, 0)
    for measurements at (1, -2) and (1, 2), rejects timelike measurement
    pairs, and is invariant under boosts of rapidity +/-0.5 and +/-1.0;
  - the early-slab screening check reproduces the worked cone intervals and
    flags slabs where the backward cones still overlap.
"""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from locality_lab.spacetime import (
    Event,
    IntervalClass,
    Role,
    RoleCountError,
    SlabError,
    boost,
    in_future_lightcone,
    interval_class,
    region3_screens,
    validate_protocol,
)

ORIGIN = Event(0.0, 0.0)

finite = hst.floats(min_value=-50, max_value=50, allow_nan=False, allow_infinity=False)


def wing_events(t=1.0, x=2.0):
    return [
        Event(t, -x, Role.MEASUREMENT_A, "A"),
        Event(t, x, Role.MEASUREMENT_B, "B"),
    ]


class TestIntervalClass:
    @pytest.mark.parametrize(
        "event,expected",
        [
            (Event(1.0, 0.0), IntervalClass.TIMELIKE),
            (Event(1.0, 1.0), IntervalClass.LIGHTLIKE),
            (Event(0.0, 5.0), IntervalClass.SPACELIKE),
        ],
    )
    def test_classification(self, event, expected):
        assert interval_class(ORIGIN, event) is expected

    @given(finite, finite, finite, finite)
    @settings(max_examples=100, deadline=None)
    def test_symmetric(self, t1, x1, t2, x2):
        e1, e2 = Event(t1, x1), Event(t2, x2)
        assert interval_class(e1, e2) is interval_class(e2, e1)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            Event(float("inf"), 0.0)


class TestFutureCone:
    def test_examples(self):
        assert in_future_lightcone(Event(2.0, 0.0), ORIGIN)
        assert not in_future_lightcone(Event(1.0, 5.0), ORIGIN)
        assert in_future_lightcone(Event(1.0, 1.0), ORIGIN)  # boundary admitted

    @given(finite, finite, finite, finite)
    @settings(max_examples=100, deadline=None)
    def test_antisymmetric_for_timelike_pairs(self, t1, x1, t2, x2):
        e1, e2 = Event(t1, x1), Event(t2, x2)
        if interval_class(e1, e2) is IntervalClass.TIMELIKE:
            assert in_future_lightcone(e1, e2) != in_future_lightcone(e2, e1)


class TestValidateProtocol:
    def test_overlap_point_accepted(self):
        report = validate_protocol(wing_events() + [Event(4.0, 0.0, Role.COMPARISON, "C")])
        assert report.passed
        assert [c.passed for c in report.checks] == [True, True, True]

    def test_early_comparison_rejected(self):
        report = validate_protocol(wing_events() + [Event(2.0, 0.0, Role.COMPARISON, "C")])
        assert not report.passed
        failed = {c.name for c in report.checks if not c.passed}
        assert failed == {"comparison-in-future-cone-of-a", "comparison-in-future-cone-of-b"}

    def test_timelike_measurements_rejected(self):
        events = [
            Event(0.0, 0.0, Role.MEASUREMENT_A),
            Event(3.0, 0.0, Role.MEASUREMENT_B),
        ]
        report = validate_protocol(events)
        assert not report.passed
        assert report.checks[0].name == "measurements-spacelike"

    def test_role_multiset_enforced(self):
        with pytest.raises(RoleCountError):
            validate_protocol([Event(0.0, 0.0, Role.MEASUREMENT_A)])
        with pytest.raises(RoleCountError):
            validate_protocol(wing_events() + wing_events())

    @pytest.mark.parametrize("rapidity", [0.5, -0.5, 1.0, -1.0])
    @pytest.mark.parametrize("comparison_t", [4.0, 2.0])
    def test_boost_invariance(self, rapidity, comparison_t):
        events = wing_events() + [Event(comparison_t, 0.0, Role.COMPARISON, "C")]
        before = [c.passed for c in validate_protocol(events).checks]
        after = [c.passed for c in validate_protocol([boost(e, rapidity) for e in events]).checks]
        assert before == after


class TestRegion3:
    def test_worked_slab_passes(self):
        report = region3_screens(wing_events(t=2.0, x=2.0), (0.5, 1.0))
        assert report.passed
        assert report.cones[0].at_ceiling == (-3.0, -1.0)
        assert report.cones[1].at_ceiling == (1.0, 3.0)

    def test_late_thin_slab_passes(self):
        report = region3_screens(wing_events(t=2.0, x=2.0), (1.8, 1.9))
        assert report.passed
        assert report.cones[0].at_floor == pytest.approx((-2.2, -1.8))
        assert report.cones[1].at_floor == pytest.approx((1.8, 2.2))

    def test_overlapping_cones_flagged(self):
        report = region3_screens(wing_events(t=2.0, x=2.0), (-0.5, 0.5))
        assert not report.disjoint
        assert not report.passed

    def test_slab_after_measurement_rejected(self):
        with pytest.raises(SlabError):
            region3_screens(wing_events(t=2.0, x=2.0), (1.0, 2.5))
        with pytest.raises(SlabError):
            region3_screens(wing_events(t=2.0, x=2.0), (1.0, 0.5))
