import math
from fractions import Fraction
from functools import lru_cache

Rational = Fraction


class DomainError(ValueError):
    """An argument lies outside the domain of an exact constant."""


class DivisionError(DomainError):
    """Division by anything other than a single nonzero monomial."""


def as_pi_scalar(value):
    if isinstance(value, PiScalar):
        return value
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return PiScalar({0: Fraction(value)} if value else None)
    return None


class PiScalar:
    """
    Exact element of Q[pi]: a finite sum of q_k * pi^k with rational q_k and
    non-negative integer k. Immutable; zero coefficients are never stored.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms=None):
        cleaned = {}
        for k, q in (terms or {}).items():
            k = int(k)
            if k < 0:
                raise DomainError(f"negative pi exponent {k}")
            q = Fraction(q)
            if q:
                cleaned[k] = cleaned.get(k, Fraction(0)) + q
        self._terms = tuple(sorted((k, q) for k, q in cleaned.items() if q))

    # --- constructors ---
    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def one(cls):
        return cls({0: 1})

    @classmethod
    def rational(cls, q):
        return cls({0: q})

    @classmethod
    def pi_power(cls, k, q=1):
        return cls({k: q})

    # --- inspection ---
    @property
    def terms(self):
        return dict(self._terms)

    def is_zero(self):
        return not self._terms

    def is_monomial(self):
        return len(self._terms) == 1

    def __bool__(self):
        return bool(self._terms)

    # --- arithmetic ---
    def __add__(self, other):
        other = as_pi_scalar(other)
        if other is None:
            return NotImplemented
        merged = dict(self._terms)
        for k, q in other._terms:
            merged[k] = merged.get(k, Fraction(0)) + q
        return PiScalar(merged)

    __radd__ = __add__

    def __neg__(self):
        return PiScalar({k: -q for k, q in self._terms})

    def __sub__(self, other):
        other = as_pi_scalar(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = as_pi_scalar(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = as_pi_scalar(other)
        if other is None:
            return NotImplemented
        product = {}
        for k1, q1 in self._terms:
            for k2, q2 in other._terms:
                product[k1 + k2] = product.get(k1 + k2, Fraction(0)) + q1 * q2
        return PiScalar(product)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_pi_scalar(other)
        if other is None:
            return NotImplemented
        if not other.is_monomial():
            raise DivisionError(f"cannot divide by non-monomial {other}")
        (k, q), = other._terms
        quotient = {}
        for k1, q1 in self._terms:
            if k1 < k:
                raise DivisionError(f"{self} / {other} leaves a negative pi power")
            quotient[k1 - k] = q1 / q
        return PiScalar(quotient)

    def __pow__(self, exponent):
        if not isinstance(exponent, int) or exponent < 0:
            raise DomainError(f"PiScalar powers must be non-negative integers, got {exponent!r}")
        result = PiScalar.one()
        for _ in range(exponent):
            result = result * self
        return result

    # --- comparison ---
    def __eq__(self, other):
        other = as_pi_scalar(other)
        if other is None:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(("PiScalar", self._terms))

    # --- conversion ---
    def to_float(self):
        return math.fsum(float(q) * math.pi ** k for k, q in self._terms)

    def __float__(self):
        return self.to_float()

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for idx, (k, q) in enumerate(self._terms):
            if idx == 0:
                parts.append(_format_term(k, q))
            elif q < 0:
                parts.append(" - " + _format_term(k, -q))
            else:
                parts.append(" + " + _format_term(k, q))
        return "".join(parts)

    def __repr__(self):
        return f"PiScalar('{self}')"

    @classmethod
    def parse(cls, text):
        """Inverse of str(): reads 'q', 'pi', 'q*pi^k' terms joined by ' + ' / ' - '."""
        text = text.strip()
        if text == "0":
            return cls()
        terms = {}
        for raw in text.replace(" - ", " + -").split(" + "):
            term = raw.strip()
            if not term:
                raise DomainError(f"malformed PiScalar text {text!r}")
            negative = term.startswith("-")
            if negative:
                term = term[1:]
            try:
                if "pi" in term:
                    coef_s, pi_s = term.split("*", 1) if "*" in term else ("1", term)
                    if pi_s == "pi":
                        k = 1
                    elif pi_s.startswith("pi^"):
                        k = int(pi_s[3:])
                    else:
                        raise ValueError(pi_s)
                else:
                    coef_s, k = term, 0
                q = Fraction(coef_s)
            except (ValueError, ZeroDivisionError) as e:
                raise DomainError(f"malformed PiScalar term {raw!r}: {e}") from e
            terms[k] = terms.get(k, Fraction(0)) + (-q if negative else q)
        return cls(terms)


def _format_term(k, q):
    if k == 0:
        return str(q)
    base = "pi" if k == 1 else f"pi^{k}"
    if q == 1:
        return base
    if q == -1:
        return "-" + base
    return f"{q}*{base}"


def binomial(n, k):
    """C(n, k) as a Rational; zero when k < 0 or k > n."""
    if n < 0:
        raise DomainError(f"binomial requires n >= 0, got n={n}")
    if k < 0 or k > n:
        return Fraction(0)
    return Fraction(math.comb(n, k))


@lru_cache(maxsize=None)
def sphere_area(m):
    """O_m = 2 pi^((m+1)/2) / Gamma((m+1)/2), the surface area of the unit m-sphere."""
    if m < 0:
        raise DomainError(f"sphere_area requires m >= 0, got m={m}")
    if m % 2 == 1:
        k = (m + 1) // 2
        return PiScalar.pi_power(k, Fraction(2, math.factorial(k - 1)))
    k = m // 2
    return PiScalar.pi_power(k, Fraction(2 * 4 ** k * math.factorial(k), math.factorial(2 * k)))


def o_chain(hi, lo):
    """Product O_hi * O_{hi-1} * ... * O_lo; the empty product (hi < lo) is 1."""
    result = PiScalar.one()
    for m in range(lo, hi + 1):
        result = result * sphere_area(m)
    return result


def ball_volume(m):
    """kappa_m = O_{m-1}/m, with kappa_0 = 1."""
    if m < 0:
        raise DomainError(f"ball_volume requires m >= 0, got m={m}")
    if m == 0:
        return PiScalar.one()
    return sphere_area(m - 1) / m


@lru_cache(maxsize=None)
def grassmann_measure(n, r):
    """Total measure of G_{r,n-r}: O_{n-1}...O_{n-r} / (O_{r-1}...O_0)."""
    if n < 2 or not 1 <= r <= n - 1:
        raise DomainError(f"grassmann_measure requires n >= 2 and 1 <= r <= n-1, got n={n}, r={r}")
    return o_chain(n - 1, n - r) / o_chain(r - 1, 0)


def kubota_coefficient(n, r):
    """(n-r) O_{n-1} / (n O_{n-r-1}): W_r is this factor times the mean (n-r)-projection volume."""
    if n < 2 or not 1 <= r <= n - 1:
        raise DomainError(f"kubota_coefficient requires n >= 2 and 1 <= r <= n-1, got n={n}, r={r}")
    return sphere_area(n - 1) * (n - r) / (sphere_area(n - r - 1) * n)
