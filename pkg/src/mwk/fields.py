"""Exact arithmetic for small finite fields F_{p^d} (p odd) and for the
multiplicative structure of the rational function field F_q(t).

Field elements are encoded as integers in [0, q): the base-p digits of the
encoding are the coefficients (low to high) of the residue polynomial modulo
the field's defining polynomial.  Units additionally carry a discrete-log
form (an exponent of the field's fixed primitive element), which makes square
classes and n-th powers O(1).

Units of F_q(t) are kept in fully factored form: a constant of the base field
times a product of monic irreducible polynomials with integer exponents.
Unique factorization makes equality, valuations and residue-field reductions
exact and cheap.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .errors import (
    DegreeBound,
    EvenCharacteristic,
    FieldMismatch,
    NotPrime,
    NotRegularAtPlace,
    SizeBound,
    ZeroPolynomial,
)

DEFAULT_SIZE_BOUND = 10_000
DEFAULT_DEGREE_BOUND = 12


def size_bound():
    return int(os.environ.get("MWK_SIZE_BOUND", DEFAULT_SIZE_BOUND))


def _is_prime(n):
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def factorint(n):
    """Prime factorization of a positive integer as {prime: multiplicity}."""
    out = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


class FiniteField:
    """The field F_{p^d} with a deterministically chosen modulus and generator.

    The modulus is the lexicographically smallest monic irreducible polynomial
    of degree d over F_p (coefficients compared low to high), and the
    generator is the smallest element (in integer encoding) of multiplicative
    order p^d - 1.  Instances are cached by (p, d) and compared by identity.
    """

    def __init__(self, p, d, modulus):
        self.p = p
        self.d = d
        self.q = p**d
        self.modulus = modulus  # coefficient tuple over F_p, low to high, monic
        self._irreducibles = {}  # degree -> list of monic irreducible Polys
        self._embeddings = {}  # id(bigger field) -> encoding map list
        self._build_tables()

    # -- encoding helpers ------------------------------------------------

    def _decode(self, x):
        p, d = self.p, self.d
        out = []
        for _ in range(d):
            out.append(x % p)
            x //= p
        return out

    def _encode(self, digits):
        out = 0
        for c in reversed(digits):
            out = out * self.p + (c % self.p)
        return out

    # -- raw element arithmetic ------------------------------------------

    def add(self, a, b):
        if self.d == 1:
            return (a + b) % self.p
        da, db = self._decode(a), self._decode(b)
        return self._encode([(x + y) % self.p for x, y in zip(da, db)])

    def neg(self, a):
        if self.d == 1:
            return (-a) % self.p
        return self._encode([(-x) % self.p for x in self._decode(a)])

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def _mul_raw(self, a, b):
        # polynomial multiplication modulo self.modulus, no tables
        p, d = self.p, self.d
        if self.d == 1:
            return (a * b) % p
        da, db = self._decode(a), self._decode(b)
        prod = [0] * (2 * d - 1)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    prod[i + j] = (prod[i + j] + x * y) % p
        # reduce modulo the monic modulus
        for i in range(len(prod) - 1, d - 1, -1):
            c = prod[i]
            if c:
                prod[i] = 0
                for j in range(d):
                    prod[i - d + j] = (prod[i - d + j] - c * self.modulus[j]) % p
        return self._encode(prod[:d])

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        return self._exp[(self._dlog[a] + self._dlog[b]) % (self.q - 1)]

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("zero has no inverse")
        return self._exp[(-self._dlog[a]) % (self.q - 1)]

    def pow(self, a, e):
        if a == 0:
            if e <= 0:
                raise ZeroDivisionError("0 ** nonpositive")
            return 0
        return self._exp[(self._dlog[a] * e) % (self.q - 1)]

    def _pow_raw(self, a, e):
        r = 1
        while e:
            if e & 1:
                r = self._mul_raw(r, a)
            a = self._mul_raw(a, a)
            e >>= 1
        return r

    def _build_tables(self):
        order = self.q - 1
        fac = factorint(order)
        gen = None
        for a in range(2, self.q):
            if all(self._pow_raw(a, order // ell) != 1 for ell in fac):
                gen = a
                break
        if gen is None:  # q == 2 cannot happen (p odd), q == 3 -> a = 2 works
            raise SizeBound(f"no generator found for q={self.q}")
        self.generator = gen
        exp = [1] * order
        for k in range(1, order):
            exp[k] = self._mul_raw(exp[k - 1], gen)
        self._exp = exp
        self._dlog = {v: k for k, v in enumerate(exp)}

    # -- units -------------------------------------------------------------

    def unit(self, value):
        """The unit with the given integer encoding."""
        if self.d == 1:
            value %= self.p
        if value == 0 or value < 0 or value >= self.q:
            raise ZeroDivisionError(f"{value} is not a unit encoding of {self!r}")
        return FFUnit(self, self._dlog[value])

    def unit_exp(self, k):
        return FFUnit(self, k % (self.q - 1))

    def one_unit(self):
        return FFUnit(self, 0)

    def minus_one(self):
        return FFUnit(self, (self.q - 1) // 2)

    def gen_unit(self):
        return FFUnit(self, 1 % (self.q - 1))

    def units(self):
        return [FFUnit(self, k) for k in range(self.q - 1)]

    # -- embeddings --------------------------------------------------------

    def embedding(self, big):
        """Encoding map of the canonical embedding into a compatible extension.

        The class of x in self = F_p[x]/(modulus) is sent to the smallest root
        (in integer encoding) of the modulus inside `big`.
        """
        if big is self:
            return None  # identity
        if big.p != self.p or big.d % self.d != 0:
            raise FieldMismatch(f"no embedding F_{self.q} -> F_{big.q}")
        key = id(big)
        found = self._embeddings.get(key)
        if found is not None:
            return found
        root = None
        for a in range(big.q):
            acc, pw = 0, 1
            for c in self.modulus:
                if c:
                    acc = big.add(acc, big.mul(c, pw))
                pw = big._mul_raw(pw, a)
            if acc == 0:
                root = a
                break
        if root is None:
            raise FieldMismatch("modulus has no root in extension")
        table = [0] * self.q
        for v in range(self.q):
            img, pw = 0, 1
            for c in self._decode(v):
                if c:
                    img = big.add(img, big.mul(c, pw))
                pw = big._mul_raw(pw, root)
            table[v] = img
        self._embeddings[key] = table
        return table

    def embed_value(self, big, value):
        table = self.embedding(big)
        return value if table is None else table[value]

    def __repr__(self):
        return f"F_{self.q}" if self.d > 1 else f"F_{self.p}"


_FIELD_CACHE = {}


def _monic_candidates(p, d):
    # all monic degree-d coefficient tuples over F_p, lexicographic low-to-high
    total = p**d
    for idx in range(total):
        digits = []
        x = idx
        for _ in range(d):
            digits.append(x % p)
            x //= p
        yield tuple(digits) + (1,)


def _poly_divides_intmod(p, g, f):
    # trial division of coefficient tuples over F_p (monic divisor g)
    f = list(f)
    dg = len(g) - 1
    while len(f) - 1 >= dg:
        c = f[-1]
        if c:
            shift = len(f) - 1 - dg
            for j in range(dg + 1):
                f[shift + j] = (f[shift + j] - c * g[j]) % p
        f.pop()
    return all(c == 0 for c in f)


def _irreducible_over_prime(p, coeffs, smaller):
    d = len(coeffs) - 1
    if d == 1:
        return True
    for k in range(1, d // 2 + 1):
        for g in smaller[k]:
            if _poly_divides_intmod(p, g, coeffs):
                return False
    return True


def ff_build(p, d=1, bound=None):
    """Deterministic model of F_{p^d}: smallest modulus, smallest generator."""
    key = (p, d)
    cached = _FIELD_CACHE.get(key)
    if cached is not None:
        return cached
    if p == 2:
        raise EvenCharacteristic("characteristic 2 is excluded")
    if not _is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if d < 1:
        raise SizeBound("extension degree must be >= 1")
    limit = bound if bound is not None else size_bound()
    if p**d > limit:
        raise SizeBound(f"p^d = {p ** d} exceeds bound {limit}")
    # find the lexicographically smallest monic irreducible of degree d
    smaller = {k: [] for k in range(1, d // 2 + 1)}
    for k in sorted(smaller):
        for cand in _monic_candidates(p, k):
            if _irreducible_over_prime(p, cand, smaller):
                smaller[k].append(cand)
    modulus = None
    for cand in _monic_candidates(p, d):
        if _irreducible_over_prime(p, cand, smaller):
            modulus = cand
            break
    fld = FiniteField(p, d, modulus)
    _FIELD_CACHE[key] = fld
    return fld


def ff_build_q(q, bound=None):
    """ff_build from a prime power q."""
    fac = factorint(q)
    if len(fac) != 1:
        raise NotPrime(f"{q} is not a prime power")
    (p, d), = fac.items()
    return ff_build(p, d, bound)


@dataclass(frozen=True)
class FFUnit:
    """A unit of a finite field, stored as generator^exponent."""

    field: FiniteField
    exp: int

    def __post_init__(self):
        object.__setattr__(self, "exp", self.exp % (self.field.q - 1))

    @property
    def value(self):
        return self.field._exp[self.exp]

    def mul(self, other):
        if other.field is not self.field:
            raise FieldMismatch("units of different fields")
        return FFUnit(self.field, self.exp + other.exp)

    def inv(self):
        return FFUnit(self.field, -self.exp)

    def pow(self, e):
        return FFUnit(self.field, self.exp * e)

    def negate(self):
        """The unit -u."""
        return FFUnit(self.field, self.exp + (self.field.q - 1) // 2)

    def is_square(self):
        return self.exp % 2 == 0

    def is_one(self):
        return self.exp == 0

    def square_class(self):
        return self.exp % 2

    def embed(self, big):
        return big.unit(self.field.embed_value(big, self.value))

    def __str__(self):
        return str(self.value)


# ---------------------------------------------------------------------------
# polynomials over a finite field
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Poly:
    """A univariate polynomial over a finite field, coefficients low to high.

    The zero polynomial has an empty coefficient tuple; otherwise the leading
    coefficient is nonzero.
    """

    field: FiniteField
    coeffs: tuple

    @staticmethod
    def make(field, coeffs):
        coeffs = [c % field.q if 0 <= c < field.q else c for c in coeffs]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        return Poly(field, tuple(coeffs))

    @staticmethod
    def zero(field):
        return Poly(field, ())

    @staticmethod
    def const(field, c):
        return Poly.make(field, [c])

    @staticmethod
    def var(field):
        return Poly(field, (0, 1))

    @property
    def degree(self):
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def is_zero(self):
        return not self.coeffs

    def is_one(self):
        return self.coeffs == (1,)

    def is_monic(self):
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def lead(self):
        if not self.coeffs:
            raise ZeroPolynomial("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def add(self, other):
        F = self.field
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = F.add(out[i], c)
        return Poly.make(F, out)

    def neg(self):
        F = self.field
        return Poly(F, tuple(F.neg(c) for c in self.coeffs))

    def sub(self, other):
        return self.add(other.neg())

    def mul(self, other):
        F = self.field
        if self.is_zero() or other.is_zero():
            return Poly.zero(F)
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            if x:
                for j, y in enumerate(other.coeffs):
                    if y:
                        out[i + j] = F.add(out[i + j], F.mul(x, y))
        return Poly(F, tuple(out))

    def scale(self, c):
        F = self.field
        if c == 0:
            return Poly.zero(F)
        return Poly(F, tuple(F.mul(c, x) for x in self.coeffs))

    def divmod(self, other):
        if other.is_zero():
            raise ZeroPolynomial("division by the zero polynomial")
        F = self.field
        rem = list(self.coeffs)
        db = other.degree
        inv_lead = F.inv(other.lead())
        quo = [0] * max(len(rem) - db, 0)
        while len(rem) - 1 >= db and rem:
            c = F.mul(rem[-1], inv_lead)
            shift = len(rem) - 1 - db
            if c:
                quo[shift] = c
                for j in range(db + 1):
                    rem[shift + j] = F.sub(rem[shift + j], F.mul(c, other.coeffs[j]))
            rem.pop()
        return Poly.make(F, quo), Poly.make(F, rem)

    def mod(self, other):
        return self.divmod(other)[1]

    def monic(self):
        if self.is_zero():
            raise ZeroPolynomial("cannot normalize the zero polynomial")
        return self.scale(self.field.inv(self.lead()))

    def eval_in(self, big, point, coeff_map=None):
        """Evaluate at `point` in the (possibly larger) field `big`.

        coeff_map maps coefficient encodings into `big`; None means identity.
        """
        acc = 0
        for c in reversed(self.coeffs):
            img = c if coeff_map is None else coeff_map[c]
            acc = big.add(big.mul(acc, point), img)
        return acc

    def __str__(self):
        from .exprtext import format_poly

        return format_poly(self)


def monic_irreducibles(field, deg):
    """All monic irreducible polynomials of the given degree, lexicographic."""
    cache = field._irreducibles
    if deg in cache:
        return cache[deg]
    if field.q**deg > 10 * size_bound() * field.q:
        raise DegreeBound(f"too many degree-{deg} candidates over F_{field.q}")
    out = []
    for cand in _candidate_polys(field, deg):
        if _is_irreducible(field, cand):
            out.append(cand)
    cache[deg] = out
    return out


def _candidate_polys(field, deg):
    total = field.q**deg
    for idx in range(total):
        digits = []
        x = idx
        for _ in range(deg):
            digits.append(x % field.q)
            x //= field.q
        yield Poly(field, tuple(digits) + (1,))


def _is_irreducible(field, f):
    d = f.degree
    if d <= 0:
        return False
    if d == 1:
        return True
    for k in range(1, d // 2 + 1):
        for g in monic_irreducibles(field, k):
            if f.mod(g).is_zero():
                return False
    return True


def is_irreducible(f):
    return _is_irreducible(f.field, f if f.is_monic() else f.monic())


def poly_factor(f, degree_cap=DEFAULT_DEGREE_BOUND):
    """Factor a nonzero polynomial into monic irreducibles by trial division.

    Returns (leading unit, {monic irreducible Poly: multiplicity}).
    """
    if f.is_zero():
        raise ZeroPolynomial("cannot factor the zero polynomial")
    if f.degree > degree_cap:
        raise DegreeBound(f"degree {f.degree} exceeds factorization cap {degree_cap}")
    field = f.field
    lead = field.unit(f.lead())
    rem = f.monic()
    out = {}
    k = 1
    while rem.degree >= 1:
        if k > rem.degree // 2:
            out[rem] = out.get(rem, 0) + 1
            break
        for g in monic_irreducibles(field, k):
            while True:
                quo, r = rem.divmod(g)
                if r.is_zero():
                    out[g] = out.get(g, 0) + 1
                    rem = quo
                else:
                    break
            if rem.degree < 1:
                break
        k += 1
    return lead, out


# ---------------------------------------------------------------------------
# the rational function field F_q(t) and its places
# ---------------------------------------------------------------------------


class RatFuncField:
    """The rational function field F_q(t), seen through its unit group."""

    def __init__(self, base):
        self.base = base
        self._residue_cache = {}

    def var_poly(self):
        return Poly.var(self.base)

    def unit_one(self):
        return RatFuncUnit(self, 0, ())

    def minus_one(self):
        return RatFuncUnit(self, (self.base.q - 1) // 2, ())

    def constant(self, u):
        if isinstance(u, FFUnit):
            if u.field is not self.base:
                raise FieldMismatch("constant from a different base field")
            return RatFuncUnit(self, u.exp, ())
        return RatFuncUnit(self, self.base.unit(u).exp, ())

    def t_unit(self):
        return RatFuncUnit(self, 0, ((self.var_poly(), 1),))

    def from_poly(self, f):
        if f.is_zero():
            raise ZeroPolynomial("0 is not a unit of F_q(t)")
        lead, fac = poly_factor(f)
        return RatFuncUnit(
            self, lead.exp, tuple(sorted(fac.items(), key=_factor_sort_key))
        )

    def from_fraction(self, num, den):
        return self.from_poly(num).mul(self.from_poly(den).inv())

    def residue_data(self, place):
        found = self._residue_cache.get(place)
        if found is None:
            found = _ResidueData(self, place)
            self._residue_cache[place] = found
        return found

    def __repr__(self):
        return f"{self.base!r}(t)"


_RF_CACHE = {}


def rat_func_field(base):
    f = _RF_CACHE.get(id(base))
    if f is None:
        f = RatFuncField(base)
        _RF_CACHE[id(base)] = f
    return f


def _factor_sort_key(item):
    poly, _ = item
    return (poly.degree, poly.coeffs)


@dataclass(frozen=True)
class RatFuncUnit:
    """A unit of F_q(t): constant times a product of monic irreducibles.

    `factors` is a sorted tuple of (monic irreducible Poly, nonzero exponent);
    `const_exp` is the discrete log of the leading constant in the base field.
    Equality of units is literal equality of the factored data.
    """

    rf: RatFuncField
    const_exp: int
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "const_exp", self.const_exp % (self.rf.base.q - 1))

    @property
    def field(self):
        return self.rf

    def constant_unit(self):
        return FFUnit(self.rf.base, self.const_exp)

    def mul(self, other):
        if other.rf is not self.rf:
            raise FieldMismatch("units of different function fields")
        acc = dict(self.factors)
        for p, e in other.factors:
            newe = acc.get(p, 0) + e
            if newe:
                acc[p] = newe
            else:
                acc.pop(p, None)
        return RatFuncUnit(
            self.rf,
            self.const_exp + other.const_exp,
            tuple(sorted(acc.items(), key=_factor_sort_key)),
        )

    def inv(self):
        return RatFuncUnit(
            self.rf, -self.const_exp, tuple((p, -e) for p, e in self.factors)
        )

    def pow(self, e):
        if e == 0:
            return self.rf.unit_one()
        return RatFuncUnit(
            self.rf, self.const_exp * e, tuple((p, k * e) for p, k in self.factors)
        )

    def negate(self):
        return self.mul(self.rf.minus_one())

    def is_one(self):
        return self.const_exp == 0 and not self.factors

    def is_constant(self):
        return not self.factors

    def valuation(self, place):
        if place.poly is None:
            return -sum(e * p.degree for p, e in self.factors)
        return dict(self.factors).get(place.poly, 0)

    def support(self):
        return [Place(self.rf, p) for p, _ in self.factors]

    def to_fraction(self, degree_cap=3 * DEFAULT_DEGREE_BOUND):
        """Expand to a (numerator, denominator) pair of polynomials."""
        base = self.rf.base
        num = Poly.const(base, FFUnit(base, self.const_exp).value)
        den = Poly.const(base, 1)
        for p, e in self.factors:
            for _ in range(abs(e)):
                if e > 0:
                    num = num.mul(p)
                else:
                    den = den.mul(p)
            if num.degree > degree_cap or den.degree > degree_cap:
                raise DegreeBound("fraction expansion exceeds the degree cap")
        return num, den

    def __str__(self):
        from .exprtext import format_rat_unit

        return format_rat_unit(self)


def unit_normalize(num, den):
    """The canonical RatFuncUnit num/den for two nonzero polynomials."""
    if num.is_zero() or den.is_zero():
        raise ZeroPolynomial("unit_normalize needs nonzero polynomials")
    rf = rat_func_field(num.field)
    return rf.from_fraction(num, den)


@dataclass(frozen=True)
class Place:
    """A place of F_q(t): a monic irreducible polynomial, or infinity."""

    rf: RatFuncField
    poly: object  # Poly or None (infinity)

    def __post_init__(self):
        if self.poly is not None:
            if not self.poly.is_monic() or not _is_irreducible(self.poly.field, self.poly):
                raise NotRegularAtPlace("places are monic irreducible polynomials")

    @property
    def is_infinity(self):
        return self.poly is None

    @property
    def degree(self):
        return 1 if self.poly is None else self.poly.degree

    def uniformizer(self):
        if self.poly is None:
            return RatFuncUnit(self.rf, 0, ((self.rf.var_poly(), -1),))
        return RatFuncUnit(self.rf, 0, ((self.poly, 1),))

    def __str__(self):
        if self.poly is None:
            return "infinity"
        from .exprtext import format_poly

        return format_poly(self.poly)


def place_at(rf, poly_or_inf):
    if poly_or_inf is None:
        return Place(rf, None)
    return Place(rf, poly_or_inf if poly_or_inf.is_monic() else poly_or_inf.monic())


class _ResidueData:
    """Residue field of a place, with the multiplicative reduction map."""

    def __init__(self, rf, place):
        base = rf.base
        self.place = place
        if place.is_infinity:
            self.kappa = base
            self._theta = None
            self._coeff_map = None
        else:
            self.kappa = ff_build(base.p, base.d * place.poly.degree)
            table = base.embedding(self.kappa)
            self._coeff_map = table  # None when kappa is base itself
            # smallest root of the place polynomial inside kappa
            theta = None
            for a in range(self.kappa.q):
                if place.poly.eval_in(self.kappa, a, table) == 0:
                    theta = a
                    break
            if theta is None:
                raise NotRegularAtPlace("place polynomial has no root in residue field")
            self._theta = theta

    def reduce_unit(self, u):
        """Reduce a unit of valuation 0 at the place to a residue-field unit."""
        if u.valuation(self.place) != 0:
            raise NotRegularAtPlace(f"unit has nonzero valuation at {self.place}")
        base = u.rf.base
        kappa = self.kappa
        if self.place.is_infinity:
            # all stored factors are monic: the leading coefficient is the constant
            return FFUnit(base, u.const_exp)
        acc = base.embed_value(kappa, FFUnit(base, u.const_exp).value)
        for p, e in u.factors:
            val = p.eval_in(kappa, self._theta, self._coeff_map)
            if val == 0:
                raise NotRegularAtPlace("factor vanishes at the place")
            acc = kappa.mul(acc, kappa.pow(val, e % (kappa.q - 1)))
        return kappa.unit(acc)


def residue_field(place):
    """Residue field of a place together with its reduction map."""
    data = place.rf.residue_data(place)
    return data.kappa, data.reduce_unit
