import math
from fractions import Fraction
from unittest.mock import patch

import numpy as np
import pytest

from exact import PiScalar
from symbolic import (
    Atom,
    AtomIndexError,
    AtomKind,
    FormulaPoly,
    SubstitutionError,
    SymbolicError,
    UnboundAtomError,
    exact_bindings,
    mci_body,
    mci_flat,
    mci_proj,
    poly_arith,
    poly_equal,
    poly_eval,
    poly_substitute,
    quermass,
    rho,
    sigma,
    vol_proj,
    width,
)

R = FormulaPoly.atom(rho())
H = FormulaPoly.atom(width())

ATOM_POOL = (rho(), width(), sigma(), quermass(3, 1), vol_proj(2))


def _random_coefficient(rng):
    k = int(rng.integers(0, 3))
    return PiScalar.pi_power(k, Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 5))))


def _random_terms(rng, atoms=ATOM_POOL, max_terms=4):
    terms = []
    for _ in range(int(rng.integers(1, max_terms + 1))):
        mono = [(atom, int(rng.integers(0, 3))) for atom in atoms if rng.random() < 0.5]
        terms.append((mono, _random_coefficient(rng)))
    return terms


def _random_poly(rng, atoms=ATOM_POOL, max_terms=4):
    return FormulaPoly(_random_terms(rng, atoms, max_terms))


def _magnitude(poly, values):
    return math.fsum(abs(coef.to_float()) * math.prod(abs(values[a]) ** e for a, e in mono)
                     for mono, coef in poly.terms.items())


class TestAtoms:

    def test_names(self):
        assert str(vol_proj(2)) == "V'_2"
        assert str(mci_proj(1, 0)) == "M'(1,0)"
        assert str(mci_body(3, 2)) == "M(3,2)"
        assert str(mci_flat(4, 1)) == "Mflat(4,1)"
        assert str(quermass(3, 3)) == "W(3,3)"
        assert str(width()) == "h"
        assert str(rho()) == "rho"
        assert str(sigma()) == "sigma"

    def test_index_ranges(self):
        with pytest.raises(AtomIndexError):
            mci_body(3, 3)
        with pytest.raises(AtomIndexError):
            quermass(3, 4)
        with pytest.raises(AtomIndexError):
            Atom(AtomKind.VOL_PROJ, (0,))
        with pytest.raises(AtomIndexError):
            Atom(AtomKind.RHO, (1,))

    def test_atoms_are_value_objects(self):
        assert mci_body(3, 1) == Atom(AtomKind.MCI_BODY, (3, 1))
        assert len({rho(), rho(), width()}) == 2


class TestFormulaPoly:

    def test_normalization_drops_zero_terms(self):
        p = R * 2 + H - R * 2
        assert p == H
        assert list(p.terms) == [((width(), 1),)]

    def test_canonical_order_and_string(self):
        p = FormulaPoly.atom(mci_proj(1, 0)) * R * PiScalar.pi_power(1) \
            + FormulaPoly.atom(vol_proj(1)) * -2 \
            + FormulaPoly.atom(mci_proj(1, 0)) * H * PiScalar.pi_power(1)
        assert str(p) == "(-2)*V'_1 + (pi)*M'(1,0)*h + (pi)*M'(1,0)*rho"

    def test_exponents_print_with_caret(self):
        assert str(H ** 2 * Fraction(1, 2)) == "(1/2)*h^2"
        assert str(FormulaPoly.zero()) == "0"
        assert str(FormulaPoly.constant(PiScalar.pi_power(2, 3))) == "(3*pi^2)"

    def test_ring_identities(self):
        a = R + H * 3
        b = H - 1
        assert a * b == b * a
        assert (a + b) ** 2 == a ** 2 + a * b * 2 + b ** 2
        assert a - a == FormulaPoly.zero()

    def test_degree_and_atoms(self):
        p = R ** 3 * H + R
        assert p.degree(rho()) == 3
        assert p.degree(width()) == 1
        assert p.degree(sigma()) == 0
        assert p.atoms() == [width(), rho()]

    def test_constant_value(self):
        assert FormulaPoly.constant(7).constant_value() == 7
        assert FormulaPoly.zero().constant_value() == 0
        with pytest.raises(SymbolicError):
            (R + 1).constant_value()

    def test_exponent_cap(self):
        with patch("config.EXPONENT_CAP", 4):
            with pytest.raises(SymbolicError):
                R ** 5

    def test_negative_power(self):
        with pytest.raises(SymbolicError):
            R ** -1

    def test_poly_arith_and_equal(self):
        assert poly_equal(poly_arith(R, H, "add"), H + R)
        assert poly_equal(poly_arith(R, H, "mul"), H * R)
        with pytest.raises(SymbolicError):
            poly_arith(R, H, "div")

    def test_hash_follows_equality(self):
        assert hash(R * H + 1) == hash(1 + H * R)


class TestSubstitution:

    def test_simultaneous_substitution(self):
        p = R * 2 + H
        q = poly_substitute(p, {rho(): FormulaPoly.atom(sigma()) + 1})
        assert q == FormulaPoly.atom(sigma()) * 2 + 2 + H

    def test_identity_binding_is_skipped(self):
        assert poly_substitute(R + H, {rho(): R}) == R + H

    def test_cyclic_binding_rejected(self):
        with pytest.raises(SubstitutionError):
            poly_substitute(R + H, {rho(): H, width(): R})

    def test_substitute_method_and_powers(self):
        p = R ** 3
        assert p.substitute({rho(): H + 1}) == (H + 1) ** 3

    def test_exact_bindings_produce_constants(self):
        p = R * H + PiScalar.pi_power(1)
        value = poly_substitute(p, exact_bindings({rho(): Fraction(1, 2), width(): 2}))
        assert value.constant_value() == PiScalar.pi_power(1) + 1


class TestRandomizedLaws:

    def test_normalization_ignores_term_order(self):
        rng = np.random.default_rng(21)
        for _ in range(1000):
            terms = _random_terms(rng, max_terms=6)
            shuffled = [terms[k] for k in rng.permutation(len(terms))]
            reversed_monomials = [(list(reversed(mono)), coef) for mono, coef in shuffled]
            p, q = FormulaPoly(terms), FormulaPoly(reversed_monomials)
            assert p == q
            assert str(p) == str(q)
            assert hash(p) == hash(q)

    def test_substitution_is_multiplicative(self):
        rng = np.random.default_rng(22)
        replacement_atoms = (sigma(), width(), vol_proj(2))
        for _ in range(200):
            p, q = _random_poly(rng), _random_poly(rng)
            bindings = {rho(): _random_poly(rng, replacement_atoms, 3),
                        quermass(3, 1): _random_poly(rng, replacement_atoms, 2)}
            assert poly_substitute(p * q, bindings) == poly_substitute(p, bindings) * poly_substitute(q, bindings)
            assert poly_substitute(p + q, bindings) == poly_substitute(p, bindings) + poly_substitute(q, bindings)

    def test_evaluation_commutes_with_substitution(self):
        rng = np.random.default_rng(23)
        replacement_atoms = (sigma(), width(), vol_proj(2))
        for _ in range(200):
            p = _random_poly(rng)
            bindings = {rho(): _random_poly(rng, replacement_atoms, 3),
                        quermass(3, 1): _random_poly(rng, replacement_atoms, 2)}
            values = {atom: float(rng.uniform(-1.0, 1.0)) for atom in replacement_atoms}
            composed = dict(values)
            composed.update({atom: poly_eval(replacement, values) for atom, replacement in bindings.items()})
            expanded = poly_substitute(p, bindings)
            # rounding on either side is bounded by sums of absolute term values
            magnitudes = dict(values)
            magnitudes.update({atom: _magnitude(replacement, values) for atom, replacement in bindings.items()})
            bound = max(_magnitude(expanded, values), _magnitude(p, magnitudes))
            assert poly_eval(expanded, values) == pytest.approx(poly_eval(p, composed), abs=1e-10 * bound + 1e-12)


class TestEvaluation:

    def test_poly_eval(self):
        p = R ** 2 * PiScalar.pi_power(1) + H * 2
        assert poly_eval(p, {rho(): 0.5, width(): 1.5}) == pytest.approx(np.pi / 4 + 3.0, rel=1e-15)

    def test_unbound_atom_is_named(self):
        with pytest.raises(UnboundAtomError) as info:
            poly_eval(R + H, {rho(): 1.0})
        assert info.value.atom == width()
        assert "h" in str(info.value)

    def test_evaluate_many_matches_scalar_evaluation(self):
        p = R ** 2 * H - FormulaPoly.atom(vol_proj(2)) * PiScalar.pi_power(1)
        rhos = np.array([0.0, 0.25, 1.0])
        vols = np.array([1.0, 2.0, 3.0])
        many = p.evaluate_many({rho(): rhos, width(): 2.0, vol_proj(2): vols})
        single = [p.evaluate({rho(): a, width(): 2.0, vol_proj(2): b}) for a, b in zip(rhos, vols)]
        np.testing.assert_allclose(many, single, rtol=1e-14)

    def test_evaluate_many_of_zero(self):
        assert float(FormulaPoly.zero().evaluate_many({})) == 0.0
