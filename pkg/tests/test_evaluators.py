"""
Tests for the concrete distance strategies.
"""
import pytest

from domain.coarse_calculus import rho
from domain.entities import HeintzeModel, SolTypeModel
from domain.exceptions import EvaluatorError, InvalidModelError
from domain.lamplighter import conjugate_element, lamp_a, lamp_multiply, lamp_t, wreath_generators
from domain.value_objects import FrameMetric, GroupPoint, LampElement
from infrastructure.evaluators import (
    FactorLatticeEvaluator,
    HyperbolicEvaluator,
    LatticeEvaluator,
    RhoEvaluator,
    WordMetricEvaluator,
)

H2 = HeintzeModel((1.0,))
SOL = SolTypeModel.sol()


class TestLatticeEvaluator:

    def test_vertical_pair(self):
        evaluator = LatticeEvaluator(H2, h=0.1)
        p, q = GroupPoint((0.0,), (), 0.0), GroupPoint((0.0,), (), 3.0)
        assert evaluator.evaluate(p, q).value == pytest.approx(3.0, abs=1e-9)
        assert evaluator.evaluate_halved(p, q).value == pytest.approx(3.0, abs=1e-9)

    def test_factor_projection(self):
        evaluator = FactorLatticeEvaluator(SOL, factor="up")
        projected = evaluator.project(GroupPoint((1.0,), (2.0,), 3.0))
        assert projected == GroupPoint((1.0,), (0.0,), 3.0)
        assert evaluator.name == "lattice-up"

    def test_factor_needs_soltype(self):
        with pytest.raises(InvalidModelError):
            FactorLatticeEvaluator(H2)
        with pytest.raises(InvalidModelError):
            FactorLatticeEvaluator(SOL, factor="sideways")


class TestClosedForms:

    def test_hyperbolic(self):
        evaluator = HyperbolicEvaluator(H2)
        estimate = evaluator.evaluate(GroupPoint((0.0,), (), 0.0), GroupPoint((0.0,), (), 3.0))
        assert estimate.value == pytest.approx(3.0)
        assert not estimate.upper_bound

    def test_hyperbolic_needs_plane(self):
        with pytest.raises(InvalidModelError):
            HyperbolicEvaluator(SOL)

    def test_rho_matches_domain_formula(self):
        p, q = GroupPoint((0.0,), (0.0,), 0.0), GroupPoint((2.0,), (-1.5,), 0.5)
        assert RhoEvaluator(SOL).evaluate(p, q).value == pytest.approx(rho(SOL, p, q, FrameMetric.identity(3)))

    def test_rho_needs_soltype(self):
        with pytest.raises(InvalidModelError):
            RhoEvaluator(H2)


class TestWordMetricEvaluator:

    def test_distance(self):
        evaluator = WordMetricEvaluator(wreath_generators(2), radius_cap=10)
        assert evaluator.evaluate(LampElement.identity(2), conjugate_element(2, 3)).value == 7.0
        assert evaluator.name == "word-wreath"

    def test_left_invariant(self):
        evaluator = WordMetricEvaluator(wreath_generators(2), radius_cap=10)
        f, g, h = lamp_t(2), lamp_a(2), conjugate_element(2, 2)
        shifted = evaluator.evaluate(lamp_multiply(f, g), lamp_multiply(f, h)).value
        assert shifted == evaluator.evaluate(g, h).value

    def test_cap_exceeded(self):
        evaluator = WordMetricEvaluator(wreath_generators(2), radius_cap=6)
        with pytest.raises(EvaluatorError):
            evaluator.evaluate(LampElement.identity(2), conjugate_element(2, 3))
