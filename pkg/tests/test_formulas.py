import os
from fractions import Fraction

import pytest

import formulas
from exact import PiScalar, ball_volume, sphere_area
from formulas import FORMULA_REGISTRY, IndexRangeError
from symbolic import (
    AtomKind, FormulaPoly, exact_bindings, mci_proj, poly_substitute, quermass,
    rho, vol_proj, width,
)

GOLDEN = os.path.join(os.path.dirname(__file__), "golden", "formulas.txt")


def _golden_cases():
    cases = []
    with open(GOLDEN, "r", encoding="utf-8") as f:
        for line in f:
            if not line.strip() or line.startswith("#"):
                continue
            formula_id, params, expected = (part.strip() for part in line.split("|", 2))
            values = {k: int(v) for k, v in (item.split("=") for item in params.split())}
            cases.append((formula_id, values, expected))
    return cases


@pytest.mark.parametrize("formula_id,params,expected", _golden_cases())
def test_golden_canonical_strings(formula_id, params, expected):
    assert str(FORMULA_REGISTRY[formula_id].build(**params)) == expected


def _triples(n_max=8):
    for n in range(2, n_max + 1):
        for r in range(1, n):
            for l in range(n):
                yield n, r, l


class TestTheoremSweeps:

    def test_theorem1_is_the_substituted_constant_width_expansion(self):
        for n, r, l in _triples():
            expected = poly_substitute(formulas.wc_expansion(n, r, l), formulas.santalo_bindings(n, r))
            assert formulas.theorem1(n, r, l) == expected, (n, r, l)

    def test_theorem2_is_the_transfer_of_theorem1(self):
        for n, r, l in _triples():
            assert formulas.theorem2(n, r, l) == formulas.transfer_theorem1(n, r, l), (n, r, l)

    def test_residual_vanishes_exactly_at_top_index(self):
        for n, r, l in _triples(6):
            residual = formulas.theorem1_residual(n, r, l)
            assert residual.is_zero() == (l == n - 1), (n, r, l)

    def test_theorem1_atoms(self):
        for n, r, l in _triples(5):
            kinds = {atom.kind for atom in formulas.theorem1(n, r, l).atoms()}
            assert kinds <= {AtomKind.VOL_PROJ, AtomKind.MCI_PROJ, AtomKind.RHO, AtomKind.WIDTH}
            assert (AtomKind.VOL_PROJ in kinds) == (l <= n - r - 1)


class TestCases:

    def test_theorem_case(self):
        assert formulas.theorem_case(4, 2, 3) == 1
        assert formulas.theorem_case(4, 2, 2) == 1
        assert formulas.theorem_case(4, 2, 1) == 2
        assert formulas.theorem_case(4, 2, 0) == 3

    def test_index_errors_state_the_range(self):
        with pytest.raises(IndexRangeError, match="1..3"):
            formulas.theorem1(4, 4, 0)
        with pytest.raises(IndexRangeError, match="0..3"):
            formulas.theorem2(4, 2, 4)
        with pytest.raises(IndexRangeError):
            formulas.theorem1(1, 1, 0)

    def test_case_specific_ids_reject_other_cases(self):
        with pytest.raises(IndexRangeError):
            FORMULA_REGISTRY["thm-1.1-case1"].build(n=2, r=1, l=0)
        with pytest.raises(IndexRangeError):
            FORMULA_REGISTRY["thm-1.2-case2"].build(n=4, r=2, l=0)
        with pytest.raises(IndexRangeError):
            FORMULA_REGISTRY["eq-2.8"].build(n=3, r=1, q=0)
        assert FORMULA_REGISTRY["thm-1.1-case3"].build(n=4, r=1, l=0) == formulas.theorem1(4, 1, 0)

    def test_missing_parameters(self):
        with pytest.raises(IndexRangeError, match="--l"):
            FORMULA_REGISTRY["thm-1.1"].build(n=2, r=1)


class TestClassicalIdentities:

    def test_residual_at_the_unit_ball(self):
        values = {vol_proj(1): 2, mci_proj(1, 0): 2, width(): 2, rho(): Fraction(1, 2)}
        residual = poly_substitute(formulas.theorem1_residual(2, 1, 0), exact_bindings(values))
        assert residual.constant_value() == PiScalar.pi_power(1, 4) - 8

    def test_unit_distance_steiner_has_no_rho(self):
        p = formulas.steiner_volume(3, rho_symbolic=False)
        assert rho() not in p.atoms()
        assert p == sum((formulas.binomial(3, i) * FormulaPoly.atom(quermass(3, i)) for i in range(4)),
                        FormulaPoly.zero())

    def test_constant_width_reduction_closes_on_balls(self):
        for n in range(1, 7):
            R = Fraction(3, 2)
            values = {quermass(n, k): ball_volume(n) * R ** (n - k) for k in range(n + 1)}
            values[width()] = 2 * R
            for s in range(n + 1):
                reduced = poly_substitute(formulas.constant_width_reduce(n, s), exact_bindings(values))
                assert reduced.constant_value() == ball_volume(n) * R ** (n - s)

    def test_parallel_constant_width_expansion(self):
        for n in range(1, 6):
            for l in range(n + 1):
                composed = FormulaPoly.zero()
                for j in range(n - l + 1):
                    composed += formulas.binomial(n - l, j) * FormulaPoly.atom(rho()) ** j \
                        * formulas.constant_width_reduce(n, l + j)
                assert formulas.parallel_constwidth_quermass(n, l) == composed

    def test_quermass_transfer_matches_mci_transfer(self):
        for n in range(2, 7):
            bindings = formulas.quermass_to_mci_bindings(n)
            for r in range(1, n):
                for j in range(1, r + 1):
                    lhs = poly_substitute(formulas.quermass_transfer(n, r, j), bindings)
                    assert lhs == formulas.grassmann_mci_transfer(n, r, j - 1) * Fraction(1, r)

    def test_santalo_disc_in_space(self):
        # unit disc in R^3: (M_0, M_1, M_2) = (2 pi, pi^2, 4 pi)
        disc = {vol_proj(2): PiScalar.pi_power(1), mci_proj(2, 0): sphere_area(1), mci_proj(2, 1): sphere_area(1)}
        expected = [PiScalar.pi_power(1, 2), PiScalar.pi_power(2), PiScalar.pi_power(1, 4)]
        for q in range(3):
            value = poly_substitute(formulas.santalo_project(3, 2, q), exact_bindings(disc))
            assert value.constant_value() == expected[q]

    def test_santalo_vanishes_below_codimension(self):
        assert formulas.santalo_project(5, 2, 0).is_zero()
        assert formulas.santalo_project(5, 2, 1).is_zero()
        assert not formulas.santalo_project(5, 2, 2).is_zero()

    def test_grassmann_constant_formula(self):
        value = FORMULA_REGISTRY["eq-2.4"].build(n=4, r=2).constant_value()
        assert value == formulas.grassmann_measure(4, 2)
