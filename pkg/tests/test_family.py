import numpy as np
import pytest

from fiberbergman import polyalg
from fiberbergman.errors import (
    BaseActionTrivial,
    CentralFiberRequested,
    ComponentDividesF1,
    ComponentReducible,
    FactorizationMismatch,
    NonEquivariant,
    NotHomogeneous,
    ParseError,
)
from fiberbergman.family import (
    CENTRAL,
    builtin_families,
    cstar_weight_check,
    fiber_id,
    fiber_poly,
    fiber_poly_exact,
    load_family,
)
from fiberbergman.fibergeom import track_points


CONIC = {"F0": "Y^2", "F1": "-X*Z", "components": [["Y", 2]]}


class TestLoad:
    def test_conic(self):
        fam = load_family(CONIC)
        assert fam.degree == 2 and fam.multiplicities == (2,)

    def test_cuspidal(self):
        fam = load_family({"F0": "X*Y^2", "F1": "-Z^3", "components": [["X", 1], ["Y", 2]]})
        assert fam.degree == 3

    def test_wrong_multiplicity(self):
        with pytest.raises(FactorizationMismatch):
            load_family({**CONIC, "components": [["Y", 1]]})

    def test_proportional_product_refused(self):
        with pytest.raises(FactorizationMismatch):
            load_family({**CONIC, "F0": "2*Y^2"})

    def test_component_divides_f1(self):
        with pytest.raises(ComponentDividesF1):
            load_family({"F0": "Y^2", "F1": "X*Y", "components": [["Y", 2]]})

    def test_degree_mismatch(self):
        with pytest.raises(NotHomogeneous):
            load_family({"F0": "Y^2", "F1": "X", "components": [["Y", 2]]})

    def test_reducible_quadric_component(self):
        with pytest.raises(ComponentReducible):
            load_family({"F0": "X*Y", "F1": "Z^2", "components": [["X*Y", 1]]})

    def test_missing_key(self):
        with pytest.raises(ParseError):
            load_family({"F0": "Y^2"})

    def test_bad_weights(self):
        with pytest.raises(NonEquivariant):
            load_family({**CONIC, "weights": [1, 1, 1, 1]})

    def test_builtins_load(self):
        assert {"conic", "cuspidal", "reduced", "line"} <= set(builtin_families())


class TestFiberPoly:
    def test_t_one(self, conic):
        assert fiber_poly(conic, 1).terms() == {(0, 2, 0): 1, (1, 0, 1): -1}

    def test_t_minus_one(self, conic):
        assert fiber_poly(conic, -1).terms() == {(0, 2, 0): 1, (1, 0, 1): 1}

    def test_zero_refused(self, conic):
        with pytest.raises(CentralFiberRequested):
            fiber_poly(conic, 0)
        with pytest.raises(CentralFiberRequested):
            fiber_id(0.0)

    def test_exact_central(self, conic):
        assert fiber_poly_exact(conic, CENTRAL) == conic.F0
        assert fiber_id("central") is CENTRAL

    @pytest.mark.parametrize("name", ["conic", "cuspidal", "reduced", "line"])
    def test_component_valuations(self, name):
        from fiberbergman.family import builtin_family

        fam = builtin_family(name)
        for comp in fam.components:
            assert polyalg.valuation(fam.F0, comp.poly) == comp.multiplicity
            assert polyalg.valuation(fam.F1, comp.poly) == 0

    def test_tracked_points_on_fiber(self, conic, cuspidal):
        for fam, x0 in ((conic, [1, 0, 1]), (cuspidal, [1, 0, 1]), (cuspidal, [0, 1, 1])):
            for t in (1e-2, 1e-5):
                for p in track_points(fam, x0, t):
                    assert abs(fiber_poly(fam, t).eval(p / np.linalg.norm(p))) <= 1e-9


class TestWeights:
    def test_conic(self, conic):
        assert cstar_weight_check(conic) == (2, 1)

    def test_trivial_base_action(self):
        fam = load_family({**CONIC, "weights": [0, 1, 2, 0]})
        with pytest.raises(BaseActionTrivial):
            cstar_weight_check(fam)

    def test_non_equivariant(self):
        with pytest.raises(NonEquivariant):
            load_family({**CONIC, "weights": [1, 1, 1, 1]})

    @pytest.mark.parametrize("name", ["conic", "cuspidal", "reduced", "line"])
    def test_identity_holds_exactly(self, name):
        from fiberbergman.family import builtin_family

        fam = builtin_family(name)
        c, wt = cstar_weight_check(fam)
        wx, wy, wz, _ = fam.weights
        # every monomial of F0 + t F1 carries total weight c
        for mono in fam.F0.terms:
            assert mono[0] * wx + mono[1] * wy + mono[2] * wz == c
        for mono in fam.F1.terms:
            assert mono[0] * wx + mono[1] * wy + mono[2] * wz + wt == c

    def test_numeric_identity(self, conic):
        lam, t = 1.7, 0.3
        c, wt = cstar_weight_check(conic)
        w = conic.weights
        z = np.array([0.4 + 0.1j, -1.2, 0.7j])
        scaled = z * lam ** np.array(w[:3])
        lhs = fiber_poly(conic, lam ** wt * t).eval(scaled)
        assert abs(lhs - lam ** c * fiber_poly(conic, t).eval(z)) < 1e-12
