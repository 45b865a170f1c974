import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

import config
from exact import PiScalar, as_pi_scalar

logger = logging.getLogger("Symbolic")


class SymbolicError(ValueError):
    pass


class SubstitutionError(SymbolicError):
    """Raised for cyclic bindings."""


class UnboundAtomError(SymbolicError):
    def __init__(self, atom):
        self.atom = atom
        super().__init__(f"atom {atom} is not bound")

    def __str__(self):
        return f"atom {self.atom} is not bound"


class AtomIndexError(SymbolicError):
    pass


class AtomKind(Enum):
    # value = (rank, number of indices)
    VOL_PROJ = (0, 1)
    MCI_PROJ = (1, 2)
    QUERMASS_PROJ = (2, 2)
    MCI_BODY = (3, 2)
    MCI_FLAT = (4, 2)
    QUERMASS = (5, 2)
    WIDTH = (6, 0)
    RHO = (7, 0)
    SIGMA = (8, 0)

    @property
    def rank(self):
        return self.value[0]


_ATOM_NAMES = {
    AtomKind.MCI_PROJ: "M'",
    AtomKind.QUERMASS_PROJ: "W'",
    AtomKind.MCI_BODY: "M",
    AtomKind.MCI_FLAT: "Mflat",
    AtomKind.QUERMASS: "W",
    AtomKind.WIDTH: "h",
    AtomKind.RHO: "rho",
    AtomKind.SIGMA: "sigma",
}


@dataclass(frozen=True)
class Atom:
    """A formal symbol: a measure of a body in a stated dimension, or a scalar variable."""

    kind: AtomKind
    indices: tuple = ()

    def __post_init__(self):
        idx = tuple(int(v) for v in self.indices)
        object.__setattr__(self, "indices", idx)
        if len(idx) != self.kind.value[1]:
            raise AtomIndexError(f"{self.kind.name} takes {self.kind.value[1]} indices, got {idx}")
        if not idx:
            return
        dim = idx[0]
        if dim < 1:
            raise AtomIndexError(f"{self.kind.name} dimension must be >= 1, got {dim}")
        if len(idx) == 2:
            i = idx[1]
            upper = dim if self.kind in (AtomKind.QUERMASS, AtomKind.QUERMASS_PROJ) else dim - 1
            if not 0 <= i <= upper:
                raise AtomIndexError(f"{self.kind.name}({dim},{i}) index outside 0..{upper}")

    @property
    def sort_key(self):
        return (self.kind.rank, self.indices)

    def __str__(self):
        if self.kind is AtomKind.VOL_PROJ:
            return f"V'_{self.indices[0]}"
        name = _ATOM_NAMES[self.kind]
        if self.indices:
            return f"{name}({self.indices[0]},{self.indices[1]})"
        return name

    def __repr__(self):
        return f"Atom({self})"


def rho():
    return Atom(AtomKind.RHO)


def sigma():
    return Atom(AtomKind.SIGMA)


def width():
    return Atom(AtomKind.WIDTH)


def vol_proj(r):
    return Atom(AtomKind.VOL_PROJ, (r,))


def mci_proj(r, i):
    return Atom(AtomKind.MCI_PROJ, (r, i))


def quermass_proj(r, i):
    return Atom(AtomKind.QUERMASS_PROJ, (r, i))


def mci_body(n, i):
    return Atom(AtomKind.MCI_BODY, (n, i))


def mci_flat(n, i):
    return Atom(AtomKind.MCI_FLAT, (n, i))


def quermass(n, i):
    return Atom(AtomKind.QUERMASS, (n, i))


def _monomial(pairs):
    """Canonical monomial: tuple of (atom, exponent) sorted by atom order, zero exponents dropped."""
    merged = {}
    for atom, exp in pairs:
        merged[atom] = merged.get(atom, 0) + exp
    for atom, exp in merged.items():
        if exp < 0:
            raise SymbolicError(f"negative exponent on {atom}")
        if exp > config.EXPONENT_CAP:
            raise SymbolicError(f"exponent {exp} on {atom} exceeds cap {config.EXPONENT_CAP}")
    return tuple(sorted(((a, e) for a, e in merged.items() if e), key=lambda ae: ae[0].sort_key))


def _monomial_key(mono):
    return tuple((atom.kind.rank, atom.indices, exp) for atom, exp in mono)


def _mono_mul(m1, m2):
    return _monomial(list(m1) + list(m2))


def _as_poly(value):
    if isinstance(value, FormulaPoly):
        return value
    if isinstance(value, Atom):
        return FormulaPoly.atom(value)
    scalar = as_pi_scalar(value)
    if scalar is not None:
        return FormulaPoly.constant(scalar)
    return None


class FormulaPoly:
    """Polynomial over PiScalar in Atoms. Immutable and normalized on construction."""

    __slots__ = ("_terms",)

    def __init__(self, terms=None):
        merged = {}
        for mono, coef in (terms.items() if isinstance(terms, dict) else (terms or ())):
            mono = _monomial(mono)
            coef = coef if isinstance(coef, PiScalar) else as_pi_scalar(coef)
            merged[mono] = merged.get(mono, PiScalar.zero()) + coef
        self._terms = {m: c for m, c in sorted(merged.items(), key=lambda mc: _monomial_key(mc[0])) if c}

    # --- constructors ---
    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def constant(cls, value):
        return cls([((), value)])

    @classmethod
    def atom(cls, atom, exponent=1):
        return cls([(((atom, exponent),), PiScalar.one())])

    # --- inspection ---
    @property
    def terms(self):
        return dict(self._terms)

    def is_zero(self):
        return not self._terms

    def atoms(self):
        found = set()
        for mono in self._terms:
            found.update(atom for atom, _ in mono)
        return sorted(found, key=lambda a: a.sort_key)

    def degree(self, atom):
        return max((dict(mono).get(atom, 0) for mono in self._terms), default=0)

    def constant_value(self):
        if not self._terms:
            return PiScalar.zero()
        if list(self._terms) != [()]:
            raise SymbolicError(f"polynomial {self} is not constant")
        return self._terms[()]

    # --- arithmetic ---
    def __add__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        merged = dict(self._terms)
        for mono, coef in other._terms.items():
            merged[mono] = merged.get(mono, PiScalar.zero()) + coef
        return FormulaPoly(merged)

    __radd__ = __add__

    def __neg__(self):
        return FormulaPoly({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        product = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                mono = _mono_mul(m1, m2)
                product[mono] = product.get(mono, PiScalar.zero()) + c1 * c2
        return FormulaPoly(product)

    __rmul__ = __mul__

    def __pow__(self, exponent):
        if not isinstance(exponent, int) or exponent < 0:
            raise SymbolicError(f"polynomial powers must be non-negative integers, got {exponent!r}")
        result = FormulaPoly.constant(1)
        for _ in range(exponent):
            result = result * self
        return result

    # --- comparison ---
    def __eq__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    # --- substitution / evaluation ---
    def substitute(self, bindings):
        return poly_substitute(self, bindings)

    def evaluate(self, numeric_bindings):
        return poly_eval(self, numeric_bindings)

    def evaluate_many(self, array_bindings):
        """Evaluates term by term over numpy arrays (all bindings broadcast together)."""
        total = None
        for mono, coef in self._terms.items():
            value = coef.to_float()
            for atom, exp in mono:
                if atom not in array_bindings:
                    raise UnboundAtomError(atom)
                value = value * np.asarray(array_bindings[atom], dtype=float) ** exp
            total = value if total is None else total + value
        return np.asarray(0.0 if total is None else total, dtype=float)

    # --- serialization ---
    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for mono, coef in self._terms.items():
            text = f"({coef})"
            for atom, exp in mono:
                text += f"*{atom}" if exp == 1 else f"*{atom}^{exp}"
            parts.append(text)
        return " + ".join(parts)

    def __repr__(self):
        return f"FormulaPoly('{self}')"


def poly_arith(a, b, op):
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise SymbolicError(f"unknown polynomial operation {op!r}")


def poly_substitute(p, bindings):
    """Simultaneous substitution of atoms by polynomials; replacements may not mention replaced atoms."""
    active = {}
    for atom, replacement in bindings.items():
        replacement = _as_poly(replacement)
        if replacement is None:
            raise SubstitutionError(f"binding for {atom} is not a polynomial")
        if replacement == FormulaPoly.atom(atom):
            continue
        active[atom] = replacement
    for atom, replacement in active.items():
        clash = [a for a in replacement.atoms() if a in active]
        if clash:
            raise SubstitutionError(f"cyclic binding: {atom} -> {replacement} mentions {clash[0]}")

    powers = {}

    def power(atom, exp):
        key = (atom, exp)
        if key not in powers:
            powers[key] = active[atom] ** exp
        return powers[key]

    result = {}
    for mono, coef in p.terms.items():
        kept = [(atom, exp) for atom, exp in mono if atom not in active]
        term = FormulaPoly([(kept, coef)])
        for atom, exp in mono:
            if atom in active:
                term = term * power(atom, exp)
        for m, c in term.terms.items():
            result[m] = result.get(m, PiScalar.zero()) + c
    logger.debug(f"Substituted {len(active)} atom(s) into {len(p.terms)} term(s)")
    return FormulaPoly(result)


def poly_eval(p, numeric_bindings):
    """Float value of p; pi enters only when each coefficient is converted."""
    values = []
    for mono, coef in p.terms.items():
        value = 1.0
        for atom, exp in mono:
            if atom not in numeric_bindings:
                raise UnboundAtomError(atom)
            value *= float(numeric_bindings[atom]) ** exp
        values.append(coef.to_float() * value)
    return math.fsum(values)


def poly_equal(a, b):
    return a == b


def exact_bindings(values):
    """Turns a map of atom -> Fraction/PiScalar into constant-polynomial bindings."""
    return {atom: FormulaPoly.constant(v if isinstance(v, PiScalar) else PiScalar.rational(Fraction(v)))
            for atom, v in values.items()}
