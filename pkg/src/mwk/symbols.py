"""The free graded ring of symbols eta^d [a_1, ..., a_r].

Expressions are exact integer combinations of terms (eta power, ordered unit
tuple).  The eta power is stored separately per term, so centrality of eta is
structural; the unit lists stay ordered because the ring is non-commutative
before evaluation.  No relations are imposed here: equality modulo the
defining relations is delegated to the closed-form model over F_q and to the
valuation oracle over F_q(t).
"""

from __future__ import annotations

from .errors import DegreeBound, FieldMismatch, Inhomogeneous
from .fields import FFUnit, FiniteField, Poly, RatFuncField


def _unit_field(u):
    return u.field


class SymExpr:
    """An integer combination of terms eta^d [a_1, ..., a_r] over one field.

    terms maps (d, units tuple) to a nonzero integer coefficient; like terms
    are always merged and zero coefficients dropped.
    """

    __slots__ = ("field", "terms")

    def __init__(self, field, terms=None):
        self.field = field
        merged = {}
        if terms:
            for key, coeff in terms.items() if isinstance(terms, dict) else terms:
                if coeff:
                    newc = merged.get(key, 0) + coeff
                    if newc:
                        merged[key] = newc
                    else:
                        del merged[key]
        self.terms = merged

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(field):
        return SymExpr(field)

    @staticmethod
    def const(field, c):
        return SymExpr(field, {(0, ()): c} if c else None)

    @staticmethod
    def one(field):
        return SymExpr.const(field, 1)

    @staticmethod
    def eta(field, power=1):
        return SymExpr(field, {(power, ()): 1})

    @staticmethod
    def bracket(*units):
        """The pure symbol [a_1, ..., a_r]."""
        if not units:
            raise ValueError("bracket needs at least one unit")
        field = _unit_field(units[0])
        for u in units[1:]:
            if _unit_field(u) is not field:
                raise FieldMismatch("bracket entries from different fields")
        return SymExpr(field, {(0, tuple(units)): 1})

    @staticmethod
    def angle(a):
        """The unit form <a> = 1 + eta [a]."""
        field = _unit_field(a)
        return SymExpr(field, {(0, ()): 1, (1, (a,)): 1})

    @staticmethod
    def h_elem(field):
        """h = <1> + <-1> = 2 + eta [-1]."""
        return SymExpr(field, {(0, ()): 2, (1, (_minus_one(field),)): 1})

    @staticmethod
    def eps_elem(field):
        """eps = -<-1> = -1 - eta [-1]."""
        return SymExpr(field, {(0, ()): -1, (1, (_minus_one(field),)): -1})

    # -- ring structure ------------------------------------------------------

    def add(self, other):
        self._check(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            newc = out.get(key, 0) + c
            if newc:
                out[key] = newc
            else:
                del out[key]
        return SymExpr(self.field, out)

    def neg(self):
        return SymExpr(self.field, {k: -c for k, c in self.terms.items()})

    def sub(self, other):
        return self.add(other.neg())

    def scale(self, c):
        if not c:
            return SymExpr.zero(self.field)
        return SymExpr(self.field, {k: c * v for k, v in self.terms.items()})

    def mul(self, other):
        self._check(other)
        out = {}
        for (d1, u1), c1 in self.terms.items():
            for (d2, u2), c2 in other.terms.items():
                key = (d1 + d2, u1 + u2)
                newc = out.get(key, 0) + c1 * c2
                if newc:
                    out[key] = newc
                else:
                    del out[key]
        return SymExpr(self.field, out)

    def eta_mul(self, power=1):
        """Multiply by eta^power (eta is central by the third defining relation)."""
        return SymExpr(self.field, {(d + power, u): c for (d, u), c in self.terms.items()})

    def pow(self, e):
        if e < 0:
            raise ValueError("negative symbolic powers are not defined")
        out = SymExpr.one(self.field)
        for _ in range(e):
            out = out.mul(self)
        return out

    def _check(self, other):
        if other.field is not self.field:
            raise FieldMismatch("expressions over different fields")

    # -- inspection ----------------------------------------------------------

    def is_structurally_zero(self):
        return not self.terms

    def term_degrees(self):
        return {len(u) - d for (d, u) in self.terms}

    def is_homogeneous(self):
        return len(self.term_degrees()) <= 1

    def degree(self, default=None):
        degs = self.term_degrees()
        if not degs:
            return default
        if len(degs) > 1:
            raise Inhomogeneous(f"mixed degrees {sorted(degs)}")
        return degs.pop()

    def max_term_size(self):
        return max((len(u) + d for (d, u) in self.terms), default=0)

    def support_places(self):
        """All finite places appearing in the factorization of any unit entry."""
        from .fields import Place

        assert isinstance(self.field, RatFuncField)
        seen = {}
        for (_, units) in self.terms:
            for u in units:
                for p, _ in u.factors:
                    seen[p] = True
        return [Place(self.field, p) for p in seen]

    def map_units(self, fn, new_field):
        """Apply fn to every unit entry, producing an expression over new_field."""
        return SymExpr(
            new_field,
            [((d, tuple(fn(u) for u in units)), c) for (d, units), c in self.terms.items()],
        )

    def sorted_terms(self):
        def key(item):
            (d, units), _ = item
            return (len(units) - d, d, tuple(_unit_sort_key(u) for u in units))

        return sorted(self.terms.items(), key=key)

    def __eq__(self, other):
        return (
            isinstance(other, SymExpr)
            and other.field is self.field
            and other.terms == self.terms
        )

    def __hash__(self):
        return hash((id(self.field), frozenset(self.terms.items())))

    def __str__(self):
        from .exprtext import format_expr

        return format_expr(self)

    __repr__ = __str__


def _unit_sort_key(u):
    if isinstance(u, FFUnit):
        return (0, u.exp)
    return (1, u.const_exp, tuple((p.coeffs, e) for p, e in u.factors))


def _minus_one(field):
    return field.minus_one()


def embed_expr(expr, target_field):
    """Embed an expression over F_q into F_{q^k} or into F_q(t)."""
    src = expr.field
    if target_field is src:
        return expr
    if isinstance(target_field, RatFuncField):
        if isinstance(src, RatFuncField):
            raise FieldMismatch("cannot embed one function field in another")
        base = target_field.base
        return expr.map_units(
            lambda u: target_field.constant(u.embed(base)), target_field
        )
    if isinstance(src, FiniteField) and isinstance(target_field, FiniteField):
        return expr.map_units(lambda u: u.embed(target_field), target_field)
    raise FieldMismatch("unsupported embedding")


# ---------------------------------------------------------------------------
# constructors for the standard elements and rewrite helpers
# ---------------------------------------------------------------------------


def power_symbol(a, e):
    """[a^e] expanded by the unit-power relation.

    For e > 0 this is sum_{i<e} <(-1)^i> [a]; for e < 0 it is eps times the
    corresponding sum for -e; for e = 0 it is the empty expression.
    Exact products are kept in the written order ([-1] precedes [a]).
    """
    field = _unit_field(a)
    if e == 0:
        return SymExpr.zero(field)
    mag = abs(e)
    m1 = _minus_one(field)
    terms = {(0, (a,)): mag}
    odd = mag // 2
    if odd:
        terms[(1, (m1, a))] = odd
    expr = SymExpr(field, terms)
    if e < 0:
        expr = SymExpr.eps_elem(field).mul(expr)
    return expr


def rewrite_mw2(a, b):
    """[a] + [b] + eta [a][b]; evaluates equal to [ab]."""
    field = _unit_field(a)
    return SymExpr(field, [((0, (a,)), 1), ((0, (b,)), 1), ((1, (a, b)), 1)])


def angle_bracket(a, b):
    """<a>[b]; evaluates equal to [ab] - [a]."""
    return SymExpr.angle(a).mul(SymExpr.bracket(b))


def eta_reduce(expr):
    """Rewrite a positive-degree expression as a combination of pure symbols.

    Each eta is absorbed by splitting the first two entries through the
    product relation, eta [a][b] = [ab] - [a] - [b]; every step is an exact
    identity, so the class is unchanged.  Requires every term to keep at
    least two entries while eta powers remain (degree >= 1)."""
    field = expr.field
    out = {}
    stack = [((d, units), c) for (d, units), c in expr.terms.items()]
    while stack:
        (d, units), c = stack.pop()
        if not c:
            continue
        if d == 0:
            out[(0, units)] = out.get((0, units), 0) + c
            continue
        if len(units) < 2:
            raise Inhomogeneous("cannot reduce eta terms of nonpositive degree")
        a, b, rest = units[0], units[1], units[2:]
        stack.append(((d - 1, (a.mul(b),) + rest), c))
        stack.append(((d - 1, (a,) + rest), -c))
        stack.append(((d - 1, (b,) + rest), -c))
    return SymExpr(field, out)


# ---------------------------------------------------------------------------
# relation generators of the standard presentation
# ---------------------------------------------------------------------------


def steinberg_generator(d, units):
    """eta^d [a_1, ..., a_r] with some adjacent pair summing to 1."""
    field = _unit_field(units[0])
    return SymExpr(field, {(d, tuple(units)): 1})


def twisted_tensor_generator(d, prefix, b, bp, suffix):
    """The three-term difference expressing [.. b b' ..] via [.. b ..], [.. b' ..]."""
    field = _unit_field(b)
    prefix, suffix = tuple(prefix), tuple(suffix)
    return SymExpr(
        field,
        [
            ((d, prefix + (b.mul(bp),) + suffix), 1),
            ((d, prefix + (b,) + suffix), -1),
            ((d, prefix + (bp,) + suffix), -1),
            ((d + 1, prefix + (b, bp) + suffix), -1),
        ],
    )


def witt_generator(e, units, position):
    """2 eta^e [units] + eta^{e+1} [units with -1 inserted at position]."""
    field = _unit_field(units[0])
    units = tuple(units)
    inserted = units[:position] + (_minus_one(field),) + units[position:]
    return SymExpr(field, [((e, units), 2), ((e + 1, inserted), 1)])


def _ff_unit_pairs_summing_to_one(field):
    """(a, b) with a, b units of F_q and a + b = 1."""
    out = []
    for a in range(2, field.q):  # skip a = 1 (would force b = 0)
        b = field.sub(1, a)
        if b != 0:
            out.append((field.unit(a), field.unit(b)))
    return out


def relation_generators(
    field, n, d_max, sampler=None, rng=None, per_family=20, exhaustive_bound=2000
):
    """Yield (kind, SymExpr) pairs that are zero in degree-n Milnor-Witt K-theory.

    Over a finite field, a family whose free-entry count keeps the instance
    space under the exhaustive bound is enumerated completely; otherwise
    (and always over F_q(t)) unit entries are drawn from the sampler.
    Kinds are "steinberg", "twisted_tensor" and "witt".
    """
    if n < 0:
        raise DegreeBound("relation generators need degree >= 0")
    if sampler is None:
        sampler = _default_sampler(field, rng)
    finite = isinstance(field, FiniteField)

    def units_for(count):
        return tuple(sampler() for _ in range(count))

    def all_tuples(count):
        out = [()]
        for _ in range(count):
            out = [t + (u,) for t in out for u in field.units()]
        return out

    def exhaustive(count):
        return finite and (field.q - 1) ** max(count, 1) <= exhaustive_bound

    # Steinberg: adjacent pair (a, 1-a) somewhere in the tuple
    for d in range(0, d_max + 1):
        r = n + d
        if r < 2:
            continue
        if exhaustive(r - 2):
            pairs = _ff_unit_pairs_summing_to_one(field)
            for i in range(r - 1):
                for (a, b) in pairs:
                    for rest in all_tuples(r - 2):
                        units = rest[:i] + (a, b) + rest[i:]
                        yield "steinberg", steinberg_generator(d, units)
        else:
            for _ in range(per_family):
                pair = _sample_steinberg_pair(field, sampler)
                if pair is None:
                    continue
                i = (rng.randrange(r - 1)) if rng else 0
                rest = units_for(r - 2)
                units = rest[:i] + pair + rest[i:]
                yield "steinberg", steinberg_generator(d, units)

    # twisted tensor: split one entry as a product b * b'
    for d in range(0, d_max):
        r = n + d
        if r < 1:
            continue
        if exhaustive(r + 1):
            for i in range(r):
                for rest in all_tuples(r - 1):
                    for b in field.units():
                        for bp in field.units():
                            yield "twisted_tensor", twisted_tensor_generator(
                                d, rest[:i], b, bp, rest[i:]
                            )
        else:
            for _ in range(per_family):
                i = (rng.randrange(r)) if rng else 0
                pre = units_for(i)
                suf = units_for(r - 1 - i)
                yield "twisted_tensor", twisted_tensor_generator(
                    d, pre, sampler(), sampler(), suf
                )

    # Witt: twice an eta-level generator plus the -1-inserted one above it
    for e in range(1, d_max):
        r = n + e
        if r < 1:
            continue
        if exhaustive(r):
            for units in all_tuples(r):
                for pos in range(r + 1):
                    yield "witt", witt_generator(e, units, pos)
        else:
            for _ in range(per_family):
                units = units_for(r)
                pos = (rng.randrange(r + 1)) if rng else 0
                yield "witt", witt_generator(e, units, pos)


def _sample_steinberg_pair(field, sampler, attempts=50):
    """A pair (a, 1-a) of units, drawn through the sampler."""
    for _ in range(attempts):
        a = sampler()
        b = one_minus(a)
        if b is not None:
            return (a, b)
    return None


def one_minus(a):
    """1 - a as a unit, or None if a = 1."""
    if isinstance(a, FFUnit):
        v = a.field.sub(1, a.value)
        return None if v == 0 else a.field.unit(v)
    num, den = a.to_fraction()
    diff = den.sub(num)
    if diff.is_zero():
        return None
    return a.rf.from_fraction(diff, den)


def _default_sampler(field, rng):
    import random

    r = rng or random.Random(0)
    if isinstance(field, FiniteField):
        return lambda: FFUnit(field, r.randrange(field.q - 1))
    base = field.base

    def sample():
        while True:
            num = Poly.make(base, [r.randrange(base.q) for _ in range(r.randrange(1, 4))])
            if not num.is_zero():
                break
        while True:
            den = Poly.make(base, [r.randrange(base.q) for _ in range(r.randrange(1, 3))])
            if not den.is_zero():
                break
        return field.from_fraction(num, den)

    return sample
