"""The operation calculus: divided powers via the truncated generating
series, the twisted combinations sigma and f, coefficient sequences with
their shift transforms, and the executable admissibility table.

Values are computed through one of two interchangeable oracles: the
closed-form model over F_q (exact pairs), or symbolic expressions over
F_q(t) compared through the valuation oracle.  Operations evaluate a
presentation (or any expression written in the presentation generators)
to a value, which is then multiplied by a coefficient living over the
base field.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

from .errors import (
    FieldMismatch,
    Inhomogeneous,
    NotAdmissible,
    TorsionViolation,
)
from .fields import FiniteField, RatFuncField
from .model import (
    MILNOR,
    MOD2,
    MW,
    WITT,
    MWElem,
    eval_model,
    minus_one_power,
    model_to_sym,
    theory_group_is_trivial,
    theory_torsion_test,
)
from .symbols import SymExpr, _unit_sort_key, embed_expr
from .valuation import is_zero as val_is_zero


def delta(n):
    """Parity flag: 1 for odd n, 0 for even n."""
    return n % 2


# ---------------------------------------------------------------------------
# evaluation oracles
# ---------------------------------------------------------------------------


class ModelOracle:
    """Values are closed-form model elements over a finite field."""

    def __init__(self, field, base=None):
        self.field = field
        self.base = base or field

    def one(self):
        return MWElem.one(self.field)

    def zero(self, degree):
        return MWElem.zero(self.field, degree)

    def bracket(self, units):
        out = MWElem.one(self.field)
        for u in units:
            out = out.mul(MWElem.from_unit(u))
        return out

    def minus_one_power(self, k):
        return minus_one_power(self.field, k)

    def from_base(self, elem):
        if elem.field is self.field:
            return elem
        return eval_model(embed_expr(model_to_sym(elem), self.field), elem.degree)

    def is_zero(self, value, theory=MW, degree=None):
        if isinstance(value, SymExpr):
            if value.is_structurally_zero():
                return True
            value = eval_model(value, degree)
        return value.is_zero_in(theory)

    def equal(self, a, b, theory=MW, degree=None):
        return self.is_zero(a.sub(b), theory, degree)


class ValuationOracle:
    """Values are symbolic expressions over F_q(t); equality goes through
    the canonical form of the split exact sequence.

    Operation values are deliberate products (symbol times twist times
    coefficient representative), so the oracle runs with a wider term-size
    cap than the default valuation-module input bound.
    """

    term_cap = 20

    def __init__(self, rf):
        self.field = rf
        self.base = rf.base

    def one(self):
        return SymExpr.one(self.field)

    def zero(self, degree=None):
        return SymExpr.zero(self.field)

    def bracket(self, units):
        return SymExpr.bracket(*units)

    def minus_one_power(self, k):
        if k == 0:
            return self.one()
        m1 = self.field.minus_one()
        return SymExpr.bracket(*([m1] * k))

    def from_base(self, elem):
        return embed_expr(model_to_sym(elem), self.field)

    def is_zero(self, value, theory=MW, degree=None):
        return val_is_zero(value, degree, theory, self.term_cap)

    def equal(self, a, b, theory=MW, degree=None):
        return self.is_zero(a.sub(b), theory, degree)


def oracle_for(field):
    if isinstance(field, RatFuncField):
        return ValuationOracle(field)
    if isinstance(field, FiniteField):
        return ModelOracle(field)
    raise FieldMismatch(f"no oracle for {field!r}")


# ---------------------------------------------------------------------------
# presentations of elements by signed pure symbols
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Presentation:
    """A signed sum of pure symbols of fixed length n."""

    n: int
    entries: tuple  # of (sign in {+1, -1}, units tuple of length n)

    def __post_init__(self):
        for sign, units in self.entries:
            if sign not in (1, -1) or len(units) != self.n:
                raise Inhomogeneous("malformed presentation entry")

    @property
    def positives(self):
        return sum(1 for s, _ in self.entries if s == 1)

    @property
    def negatives(self):
        return sum(1 for s, _ in self.entries if s == -1)

    def as_expr(self, field):
        return SymExpr(field, [((0, units), sign) for sign, units in self.entries])

    def append(self, sign, units):
        return Presentation(self.n, self.entries + ((sign, tuple(units)),))

    @staticmethod
    def empty(n):
        return Presentation(n, ())

    @staticmethod
    def of_symbols(n, *unit_tuples):
        return Presentation(n, tuple((1, tuple(us)) for us in unit_tuples))


# ---------------------------------------------------------------------------
# truncated series (index -> value; missing index means zero)
# ---------------------------------------------------------------------------


def _series_mul(a, b, trunc):
    out = {}
    for i, va in a.items():
        for j, vb in b.items():
            k = i + j
            if k > trunc:
                continue
            prod = va.mul(vb)
            out[k] = out[k].add(prod) if k in out else prod
    return {k: v for k, v in out.items() if not _value_is_structural_zero(v)}


def _value_is_structural_zero(v):
    if isinstance(v, SymExpr):
        return v.is_structurally_zero()
    return v.is_zero()


def _series_pow(s, k, trunc):
    out = None
    for _ in range(k):
        out = dict(s) if out is None else _series_mul(out, s, trunc)
    return out if out is not None else {}


def _factor_series(oracle, symbol_value, n, exponent, trunc, inverse_mode="twisted"):
    """(1 + [symbol] t)^exponent, truncated."""
    if exponent == 0:
        return {0: oracle.one()}
    if exponent > 0:
        base = {0: oracle.one(), 1: symbol_value}
        return _series_pow(base, exponent, trunc)
    if inverse_mode == "twisted":
        # coefficients (-1)^j [-1]^{n(j-1)} [symbol]
        inv = {0: oracle.one()}
        for j in range(1, trunc + 1):
            coeff = oracle.minus_one_power(n * (j - 1)).mul(symbol_value)
            inv[j] = coeff if j % 2 == 0 else coeff.neg()
    else:
        # plain geometric series sum (-[symbol])^j
        inv = {0: oracle.one()}
        power = None
        for j in range(1, trunc + 1):
            power = symbol_value if power is None else power.mul(symbol_value)
            inv[j] = power if j % 2 == 0 else power.neg()
    return _series_pow(inv, -exponent, trunc)


def lambda_series(x, n, trunc, oracle, inverse_mode="twisted"):
    """Coefficients of the divided-power generating series of x (before the
    action on a coefficient), as {l: value}, truncated at degree `trunc`.

    x is an expression in the presentation generators: every term is
    eta^d [a_1, ..., a_{d+n}] with d >= 0.  Each term of multiplicity m
    contributes, per subset J of its first d+1 entries, a factor
    (1 + [prod_J, tail] t)^((-1)^(d+1-|J|) m).
    """
    if isinstance(x, Presentation):
        x = x.as_expr(oracle.field)
    if x.field is not oracle.field:
        raise FieldMismatch("presentation over the wrong field")
    series = {0: oracle.one()}
    term_order = lambda kv: (kv[0][0], tuple(_unit_sort_key(u) for u in kv[0][1]))
    for (d, units), mult in sorted(x.terms.items(), key=term_order):
        if len(units) - d != n:
            raise Inhomogeneous(
                f"term eta^{d} of length {len(units)} is not of degree {n}"
            )
        head, tail = units[: d + 1], units[d + 1 :]
        if any(u.is_one() for u in tail):
            continue  # every factor contains a [1] entry and collapses to 1
        for size in range(1, d + 2):
            for J in combinations(range(d + 1), size):
                prod = head[J[0]]
                for idx in J[1:]:
                    prod = prod.mul(head[idx])
                if prod.is_one():
                    continue
                exponent = mult if (d + 1 - size) % 2 == 0 else -mult
                value = oracle.bracket((prod,) + tail)
                factor = _factor_series(oracle, value, n, exponent, trunc, inverse_mode)
                series = _series_mul(series, factor, trunc)
    return series


def divided_power_series(n, x, y, trunc, oracle=None, theory=MW, skip_check=False):
    """The truncated generating-series coefficients acting on y: the list
    [lambda_0(x).y, lambda_1(x).y, ..., lambda_trunc(x).y]."""
    oracle = oracle or _oracle_of(x)
    require_torsion(n, y, theory, skip_check)
    series = lambda_series(x, n, trunc, oracle)
    y_val = oracle.from_base(y)
    out = []
    for l in range(trunc + 1):
        v = series.get(l)
        if v is None:
            out.append(_zero_value(oracle, y.degree + l * n))
        else:
            out.append(v.mul(y_val))
    return out


# ---------------------------------------------------------------------------
# the operations lambda, sigma and f
# ---------------------------------------------------------------------------


def require_torsion(n, y, theory=MW, skip_check=False):
    """Odd source degree needs an h-torsion coefficient (in the target theory)."""
    if skip_check or delta(n) == 0:
        return
    if not theory_torsion_test(y, "h", theory):
        raise TorsionViolation(
            f"degree-{n} divided powers need an h-torsion coefficient"
        )


def _act(value, y, oracle):
    """Right action of a value on a base-field coefficient."""
    return value.mul(oracle.from_base(y))


def lambda_eval(n, l, y, x, oracle=None, theory=MW, skip_check=False, inverse_mode="twisted"):
    """The l-th divided power of x acting on y."""
    oracle = oracle or _oracle_of(x)
    require_torsion(n, y, theory, skip_check)
    series = lambda_series(x, n, l, oracle, inverse_mode)
    coeff = series.get(l)
    if coeff is None:
        return _zero_value(oracle, y.degree + l * n)
    return _act(coeff, y, oracle)


def sigma_operator_values(series, n, lmax, oracle):
    """Values sigma_l(x) for l = 0..lmax from a lambda series, before the
    coefficient action: sigma_l = sum_j C(floor((l-1)/2), j) [-1]^{nj} lambda_{l-j}."""
    out = {}
    for l in range(lmax + 1):
        if l == 0:
            out[0] = series.get(0)
            continue
        acc = None
        m = (l - 1) // 2
        for j in range(m + 1):
            lam = series.get(l - j)
            if lam is None:
                continue
            term = oracle.minus_one_power(n * j).mul(lam) if j else lam
            c = comb(m, j)
            if c != 1:
                term = term.scale(c)
            acc = term if acc is None else acc.add(term)
        if acc is not None:
            out[l] = acc
    return out


def sigma_eval(n, l, y, x, oracle=None, theory=MW, skip_check=False):
    oracle = oracle or _oracle_of(x)
    require_torsion(n, y, theory, skip_check)
    series = lambda_series(x, n, l, oracle)
    value = sigma_operator_values(series, n, l, oracle).get(l)
    if value is None:
        return _zero_value(oracle, y.degree + l * n)
    return _act(value, y, oracle)


def f_eval(n, l, y, x, oracle=None, theory=MW, skip_check=False, direct=False):
    """The inverse-series divided power: f_l = (-1)^l sum_i C(l-1,i) [-1]^{ni} lambda_{l-i}.

    With direct=True the value is computed from the inverted generating
    series (the l-th coefficient of the series of -x) instead.
    """
    oracle = oracle or _oracle_of(x)
    require_torsion(n, y, theory, skip_check)
    if l == 0:
        return _act(oracle.one(), y, oracle)
    if direct:
        neg = _negate_presentation(x, oracle)
        series = lambda_series(neg, n, l, oracle)
        coeff = series.get(l)
        if coeff is None:
            return _zero_value(oracle, y.degree + l * n)
        return _act(coeff, y, oracle)
    series = lambda_series(x, n, l, oracle)
    acc = None
    for i in range(l):
        lam = series.get(l - i)
        if lam is None:
            continue
        term = oracle.minus_one_power(n * i).mul(lam) if i else lam
        c = comb(l - 1, i)
        if c != 1:
            term = term.scale(c)
        acc = term if acc is None else acc.add(term)
    if acc is None:
        return _zero_value(oracle, y.degree + l * n)
    if l % 2 == 1:
        acc = acc.neg()
    return _act(acc, y, oracle)


def f_lambda_convert(coeffs, n, field):
    """Rewrite sum_l lambda_l . a_l as sum_m f_m . b_m (and conversely).

    The conversion b_m = sum_i (-1)^(m+i) C(m+i-1, i) [-1]^{ni} a_{m+i} is an
    involution on coefficient tuples; m = 0 passes through.
    """
    L = len(coeffs) - 1
    out = []
    for m in range(L + 1):
        if m == 0:
            out.append(coeffs[0])
            continue
        acc = None
        for i in range(0, L - m + 1):
            a = coeffs[m + i]
            term = minus_one_power(field, n * i).mul(a) if i else a
            c = comb(m + i - 1, i)
            if c != 1:
                term = term.scale(c)
            if (m + i) % 2 == 1:
                term = term.neg()
            acc = term if acc is None else acc.add(term)
        out.append(acc)
    return out


def _negate_presentation(x, oracle):
    if isinstance(x, Presentation):
        return Presentation(x.n, tuple((-s, u) for s, u in x.entries))
    return x.neg()


def _zero_value(oracle, degree):
    if isinstance(oracle, ModelOracle):
        return oracle.zero(degree)
    return SymExpr.zero(oracle.field)


def _oracle_of(x):
    field = x.field if isinstance(x, SymExpr) else None
    if field is None:
        raise FieldMismatch("pass an oracle when evaluating a Presentation")
    return oracle_for(field)


# ---------------------------------------------------------------------------
# coefficient sequences and their shift calculus
# ---------------------------------------------------------------------------

# (first constrained index, torsion kinds) per (source, target) row
ADMISSIBILITY_RULES = {
    (MILNOR, MILNOR): (2, ("delta_two", "tau")),
    (MILNOR, WITT): (2, ("delta_two", "tau")),
    (MILNOR, MW): (2, ("delta_two", "tau")),
    (WITT, MILNOR): (1, ("two",)),
    (WITT, WITT): (None, ()),
    (WITT, MW): (1, ("h",)),
    (MW, MILNOR): (2, ("delta_two",)),
    (MW, WITT): (None, ()),
    (MW, MW): (2, ("delta_h",)),
    (MW, MOD2): (None, ()),
}


def _passes_torsion(a, kind, n, target):
    if kind == "delta_two":
        return delta(n) == 0 or theory_torsion_test(a, "2", target)
    if kind == "two":
        return theory_torsion_test(a, "2", target)
    if kind == "delta_h":
        return delta(n) == 0 or theory_torsion_test(a, "h", target)
    if kind == "h":
        return theory_torsion_test(a, "h", target)
    if kind == "tau":
        return theory_torsion_test(a, "tau", target, n)
    raise ValueError(f"unknown torsion kind {kind}")


class OpSequence:
    """The coefficient sequence (a_l) of an operation sum_l sigma_l . a_l.

    Coefficients are model elements over the base field; a_l sits in target
    degree m - n*l.  Torsion flags per index record which constraints the
    admissibility table imposes and whether they hold.
    """

    __slots__ = ("source", "target", "n", "m", "field", "coeffs")

    def __init__(self, source, target, n, m, field, coeffs):
        if n < 1:
            raise NotAdmissible("source degree must be >= 1")
        if (source, target) not in ADMISSIBILITY_RULES:
            raise NotAdmissible(f"no admissibility row for {source} -> {target}")
        self.source = source
        self.target = target
        self.n = n
        self.m = m
        self.field = field
        coeffs = tuple(coeffs)
        for l, a in enumerate(coeffs):
            if a.field is not field:
                raise FieldMismatch("coefficient over the wrong base field")
            if a.degree != m - n * l:
                raise Inhomogeneous(
                    f"coefficient {l} has degree {a.degree}, expected {m - n * l}"
                )
        self.coeffs = coeffs

    @property
    def trunc(self):
        return len(self.coeffs) - 1

    def coeff(self, l):
        if 0 <= l < len(self.coeffs):
            return self.coeffs[l]
        return MWElem.zero(self.field, self.m - self.n * l)

    def tau(self, a):
        return minus_one_power(self.field, self.n).mul(a)

    def torsion_flags(self):
        """Per-index record of the imposed torsion constraints and results."""
        start, kinds = ADMISSIBILITY_RULES[(self.source, self.target)]
        flags = []
        for l, a in enumerate(self.coeffs):
            if start is None or l < start:
                flags.append({"index": l, "constraints": [], "ok": True})
                continue
            entry = {
                "index": l,
                "constraints": list(kinds),
                "ok": all(_passes_torsion(a, k, self.n, self.target) for k in kinds),
            }
            flags.append(entry)
        return flags

    def admissible(self):
        start, kinds = ADMISSIBILITY_RULES[(self.source, self.target)]
        for l, a in enumerate(self.coeffs):
            deg = self.m - self.n * l
            if theory_group_is_trivial(self.field, self.target, deg):
                if not a.is_zero_in(self.target):
                    return False
            if start is not None and l >= start:
                if not all(_passes_torsion(a, k, self.n, self.target) for k in kinds):
                    return False
        return True

    def require_admissible(self):
        if not self.admissible():
            raise NotAdmissible("sequence violates the admissibility table")

    # -- evaluation -----------------------------------------------------------

    def apply(self, x, oracle=None):
        """Evaluate sum_l sigma_l(x) . a_l through the oracle of x's field."""
        self.require_admissible()
        oracle = oracle or _oracle_of(x)
        L = self.trunc
        series = lambda_series(x, self.n, L, oracle)
        sig = sigma_operator_values(series, self.n, L, oracle)
        acc = None
        for l, a in enumerate(self.coeffs):
            if a.is_zero_in(self.target):
                continue
            op_val = sig.get(l)
            if op_val is None:
                continue
            term = op_val.mul(oracle.from_base(a))
            acc = term if acc is None else acc.add(term)
        if acc is None:
            return _zero_value(oracle, self.m)
        return acc

    # -- the shift transform ----------------------------------------------------

    def shift(self, sign):
        """The coefficient transform of the positive or negative shift.

        plus:  b_l = a_{l+1} + [l odd]  tau a_{l+2}
        minus: b_l = a_{l+1} + [l even] tau a_{l+2}
        """
        self.require_admissible()
        if sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")
        parity = 1 if sign == +1 else 0
        out = []
        for l in range(max(self.trunc, 1)):
            b = self.coeff(l + 1)
            if l % 2 == parity:
                b = b.add(self.tau(self.coeff(l + 2)))
            out.append(b)
        return OpSequence(self.source, self.target, self.n, self.m - self.n, self.field, out)

    def shifted(self, plus, minus, minus_first=True):
        seq = self
        first, second = (-1, +1) if minus_first else (+1, -1)
        count_first = minus if minus_first else plus
        count_second = plus if minus_first else minus
        for _ in range(count_first):
            seq = seq.shift(first)
        for _ in range(count_second):
            seq = seq.shift(second)
        return seq

    def g_map(self, minus_first=True):
        """Recover the coefficients: the l-th entry is the value at 0 of the
        operation shifted floor((l+1)/2) times positively and floor(l/2)
        times negatively (evaluation at 0 reads off the 0-th coefficient)."""
        out = []
        for l in range(len(self.coeffs)):
            seq = self.shifted((l + 1) // 2, l // 2, minus_first)
            out.append(seq.coeff(0))
        return out

    def roundtrip_ok(self):
        got = self.g_map()
        return all(
            g.sub(a).is_zero_in(self.target) for g, a in zip(got, self.coeffs)
        )

    # -- the filtration ----------------------------------------------------------

    def filtration_degree(self):
        """Largest d with a_l in filtration level max(d - n*l, 0) for all l;
        None (infinity) for the zero sequence."""
        self.require_admissible()
        levels = []
        for l, a in enumerate(self.coeffs):
            if a.is_zero_in(self.target):
                continue
            levels.append(self.n * l + max(self.m - self.n * l, 0))
        return min(levels) if levels else None

    def __eq__(self, other):
        return (
            isinstance(other, OpSequence)
            and (other.source, other.target, other.n, other.m) == (self.source, self.target, self.n, self.m)
            and other.coeffs == self.coeffs
        )

    def __repr__(self):
        return (
            f"OpSequence({self.source}->{self.target}, n={self.n}, m={self.m}, "
            f"coeffs={list(self.coeffs)!r})"
        )

    def to_json(self):
        return {
            "source_theory": self.source,
            "target_theory": self.target,
            "source_degree": self.n,
            "target_degree": self.m,
            "coefficients": [a.to_json() for a in self.coeffs],
            "torsion_flags": self.torsion_flags(),
        }


def admissible(source, target, n, m, field, coeffs):
    """The executable admissibility predicate of the classification table."""
    try:
        seq = OpSequence(source, target, n, m, field, coeffs)
    except (NotAdmissible, Inhomogeneous):
        return False
    return seq.admissible()
