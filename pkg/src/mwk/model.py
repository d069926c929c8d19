"""Closed-form model of Milnor-Witt K-theory of a finite field.

An element of degree n is a compatible pair (Milnor part, Witt part):

* the Milnor part lives in Z (n = 0), in Z/(q-1) via discrete logs (n = 1),
  and in the zero group otherwise;
* the Witt part is a class in the Witt ring W(F_q), encoded as a canonical
  pair (rank mod h, discriminant) and constrained to I^max(n,0); over a
  finite field I^2 = 0, so only degrees <= 1 carry Witt information.

Compatibility says the Milnor part mod 2 equals the class of the Witt part
in I^n/I^{n+1}.  Negative degrees are pure Witt classes.  The module also
provides the independent presentation oracle: the standard generators and
relations truncated at a maximal eta power, resolved by integer Smith normal
form, for cross-checking the closed-form groups.
"""

from __future__ import annotations

from .errors import (
    DegreeMismatch,
    FieldMismatch,
    Inhomogeneous,
    SizeBound,
)
from .fields import FFUnit, FiniteField
from .symbols import SymExpr

MW = "MW"
MILNOR = "Milnor"
WITT = "Witt"
MOD2 = "Mod2Milnor"

THEORIES = (MW, MILNOR, WITT, MOD2)


def _disc_minus_one(field):
    # discriminant of -1: nontrivial exactly when q = 3 mod 4
    return 1 if field.q % 4 == 3 else 0


def _w_canonical(field, rank, disc):
    """Canonical representative (rank in {0,1}, disc) of a Witt class."""
    r = rank % 2
    k = (rank - r) // 2
    return (r, (disc + k * _disc_minus_one(field)) % 2)


def _w_add(field, w1, w2):
    return _w_canonical(field, w1[0] + w2[0], w1[1] + w2[1])


def _w_neg(field, w):
    return _w_canonical(field, -w[0], w[1])


def _w_mul(field, w1, w2):
    r1, d1 = w1
    r2, d2 = w2
    return _w_canonical(field, r1 * r2, r2 * d1 + r1 * d2)


def _w_scale(field, c, w):
    return _w_canonical(field, c * w[0], c * w[1])


W_ZERO = (0, 0)
W_ONE = (1, 0)


def _milnor_mod(field, n, value):
    if n == 0:
        return value
    if n == 1:
        return value % (field.q - 1)
    return 0


class MWElem:
    """An element of degree-n Milnor-Witt K-theory of F_q in pair form."""

    __slots__ = ("field", "degree", "milnor", "witt")

    def __init__(self, field, degree, milnor, witt):
        milnor = _milnor_mod(field, degree, milnor)
        if degree < 0:
            milnor = 0
        if degree >= 2:
            witt = W_ZERO
        self.field = field
        self.degree = degree
        self.milnor = milnor
        self.witt = witt
        if degree == 1 and witt[0] != 0:
            raise DegreeMismatch("degree-1 Witt part must lie in I")
        if not self._compatible():
            raise DegreeMismatch(
                f"incompatible pair (degree {degree}, milnor {milnor}, witt {witt})"
            )

    def _compatible(self):
        n = self.degree
        if n == 0:
            return self.milnor % 2 == self.witt[0]
        if n == 1:
            return self.milnor % 2 == self.witt[1]
        return True

    # -- constructors --------------------------------------------------------

    @staticmethod
    def zero(field, degree):
        return MWElem(field, degree, 0, W_ZERO)

    @staticmethod
    def one(field):
        return MWElem(field, 0, 1, W_ONE)

    @staticmethod
    def from_unit(u):
        """[a]: Milnor symbol {a} paired with the Pfister-type class <a> - <1>."""
        return MWElem(u.field, 1, u.exp, (0, u.exp % 2))

    @staticmethod
    def angle(u):
        """<a> = 1 + eta [a] in degree 0."""
        return MWElem(u.field, 0, 1, (1, u.exp % 2))

    @staticmethod
    def h(field):
        return MWElem(field, 0, 2, W_ZERO)

    @staticmethod
    def eps(field):
        return MWElem(field, 0, -1, W_ONE)

    @staticmethod
    def witt_class(field, degree, w):
        """The pure Witt element of negative degree."""
        if degree >= 0:
            raise DegreeMismatch("pure Witt classes live in negative degrees")
        return MWElem(field, degree, 0, w)

    # -- arithmetic ------------------------------------------------------------

    def _check(self, other):
        if other.field is not self.field:
            raise FieldMismatch("elements over different fields")

    def add(self, other):
        self._check(other)
        if other.degree != self.degree:
            raise DegreeMismatch(f"degrees {self.degree} and {other.degree}")
        return MWElem(
            self.field,
            self.degree,
            self.milnor + other.milnor,
            _w_add(self.field, self.witt, other.witt),
        )

    def neg(self):
        return MWElem(self.field, self.degree, -self.milnor, _w_neg(self.field, self.witt))

    def sub(self, other):
        return self.add(other.neg())

    def scale(self, c):
        return MWElem(
            self.field, self.degree, c * self.milnor, _w_scale(self.field, c, self.witt)
        )

    def mul(self, other):
        self._check(other)
        n, m = self.degree, other.degree
        if n == 0:
            milnor = self.milnor * other.milnor
        elif m == 0:
            milnor = self.milnor * other.milnor
        else:
            milnor = 0  # positive-degree Milnor products die in K^M_{>=2} = 0
        return MWElem(
            self.field, n + m, milnor, _w_mul(self.field, self.witt, other.witt)
        )

    def eta_mul(self, power=1):
        """Multiply by eta^power: kill the Milnor part, keep the Witt class."""
        out = self
        for _ in range(power):
            out = MWElem(out.field, out.degree - 1, 0, out.witt)
        return out

    def h_mul(self):
        return MWElem.h(self.field).mul(self)

    def is_zero(self):
        return self.milnor == 0 and self.witt == W_ZERO

    # -- projections to the companion theories --------------------------------

    def project(self, theory):
        """The invariant of this element's image in the given theory."""
        if theory == MW:
            return (self.milnor, self.witt)
        if theory == MILNOR:
            return self.milnor
        if theory == WITT:
            return self.witt
        if theory == MOD2:
            return self.milnor % 2 if self.degree >= 0 else 0
        raise ValueError(f"unknown theory {theory}")

    def is_zero_in(self, theory):
        zero = 0 if theory in (MILNOR, MOD2) else (W_ZERO if theory == WITT else (0, W_ZERO))
        return self.project(theory) == zero

    def __eq__(self, other):
        return (
            isinstance(other, MWElem)
            and other.field is self.field
            and other.degree == self.degree
            and other.milnor == self.milnor
            and other.witt == self.witt
        )

    def __hash__(self):
        return hash((id(self.field), self.degree, self.milnor, self.witt))

    def __repr__(self):
        return f"MW(deg={self.degree}, milnor={self.milnor}, witt={self.witt})"

    def to_json(self):
        return {
            "degree": self.degree,
            "milnor": self.milnor,
            "witt": list(self.witt),
        }


def eval_model(expr, degree=None):
    """Ring-homomorphic evaluation of a symbolic expression over F_q."""
    field = expr.field
    if not isinstance(field, FiniteField):
        raise FieldMismatch("eval_model needs an expression over a finite field")
    if degree is None:
        degree = expr.degree()
        if degree is None:
            raise Inhomogeneous("cannot infer the degree of an empty expression")
    acc = MWElem.zero(field, degree)
    for (d, units), coeff in expr.terms.items():
        if len(units) - d != degree:
            raise Inhomogeneous("expression mixes degrees")
        term = MWElem.one(field)
        for u in units:
            term = term.mul(MWElem.from_unit(u))
        term = term.eta_mul(d).scale(coeff)
        acc = acc.add(term)
    return acc


def torsion_test(y, kind, n=None):
    """h-torsion, 2-torsion or tau_n-torsion of a model element."""
    if kind == "h":
        return y.h_mul().is_zero()
    if kind == "2":
        return y.add(y).is_zero()
    if kind == "tau":
        if n is None:
            raise ValueError("tau-torsion needs the source degree n")
        t = minus_one_power(y.field, n - 1)
        return t.mul(y).is_zero()
    raise ValueError(f"unknown torsion kind {kind}")


def theory_torsion_test(y, kind, theory, n=None):
    """Torsion tests taken inside a companion theory (on projections)."""
    if kind == "h":
        return y.h_mul().is_zero_in(theory)
    if kind == "2":
        return y.add(y).is_zero_in(theory)
    if kind == "tau":
        t = minus_one_power(y.field, n - 1)
        return t.mul(y).is_zero_in(theory)
    raise ValueError(f"unknown torsion kind {kind}")


def minus_one_power(field, k):
    """The model element [-1]^k (k >= 0)."""
    out = MWElem.one(field)
    m1 = MWElem.from_unit(field.minus_one())
    for _ in range(k):
        out = out.mul(m1)
    return out


def base_change(elem, target):
    """Extension of scalars along F_q -> F_{q^k}: the Milnor part follows the
    unit embedding, the Witt part extends the form."""
    from .symbols import embed_expr

    if target is elem.field:
        return elem
    return eval_model(embed_expr(model_to_sym(elem), target), elem.degree)


def model_to_sym(elem):
    """A symbolic representative over F_q evaluating to the given element."""
    field = elem.field
    n = elem.degree
    g = field.gen_unit()
    if elem.is_zero():
        return SymExpr.zero(field)
    if n >= 2:
        return SymExpr.zero(field)
    if n == 1:
        return SymExpr.bracket(FFUnit(field, elem.milnor))
    if n == 0:
        for j in (0, 1):
            cand = SymExpr.const(field, elem.milnor).add(
                SymExpr.bracket(g.pow(j)).eta_mul()
            )
            if eval_model(cand, 0) == elem:
                return cand
        raise DegreeMismatch("no degree-0 representative found")
    # negative degrees: eta^{|n|} times a degree-0 combination
    for c in range(4):
        for j in (0, 1):
            cand = SymExpr.const(field, c).add(SymExpr.bracket(g.pow(j)).eta_mul())
            cand = cand.eta_mul(-n)
            if eval_model(cand, n) == elem:
                return cand
    raise DegreeMismatch("no negative-degree representative found")


# ---------------------------------------------------------------------------
# enumeration of the model groups
# ---------------------------------------------------------------------------


def model_elements(field, degree, rank_window=2):
    """All elements of the degree-n model group (rank restricted to a window
    of size rank_window around 0 when the group is infinite)."""
    if degree >= 2:
        return [MWElem.zero(field, degree)]
    if degree == 1:
        return [MWElem(field, 1, m, (0, m % 2)) for m in range(field.q - 1)]
    if degree == 0:
        out = []
        for r in range(-rank_window, rank_window + 1):
            for delta in (0, 1):
                out.append(MWElem(field, 0, r, (r % 2, delta)))
        return out
    return [
        MWElem(field, degree, 0, (r, delta)) for r in (0, 1) for delta in (0, 1)
    ]


def theory_elements(field, theory, degree, rank_window=2):
    """One model representative per element of the theory's degree-n group."""
    seen = {}
    for elem in model_elements(field, degree, rank_window):
        key = elem.project(theory)
        if key not in seen:
            seen[key] = elem
    return list(seen.values())


def theory_group_is_trivial(field, theory, degree):
    if theory in (MILNOR, MOD2):
        return degree < 0 or degree >= 2
    return degree >= 2  # Witt and MW: I^n = 0 over F_q for n >= 2


# ---------------------------------------------------------------------------
# abstract structure of a finite abelian group given by elements and addition
# ---------------------------------------------------------------------------


def _order_of(x, add, zero):
    n, acc = 1, x
    while acc != zero:
        acc = add(acc, x)
        n += 1
    return n


def finite_abelian_invariants(elements, add, neg, zero):
    """Invariant factors d_1 | d_2 | ... of a finite abelian group.

    Splits off a maximal-order cyclic subgroup and recurses on the quotient,
    representing quotient elements as frozensets of coset members.
    """
    elements = list(elements)
    if len(elements) <= 1:
        return []
    best = max(elements, key=lambda x: _order_of(x, add, zero))
    e = _order_of(best, add, zero)
    cyclic = []
    acc = zero
    for _ in range(e):
        cyclic.append(acc)
        acc = add(acc, best)
    cyc_set = set(cyclic)
    cosets = {}
    for x in elements:
        coset = frozenset(add(x, c) for c in cyc_set)
        cosets[coset] = x
    rep_of = {}
    for coset in cosets:
        for member in coset:
            rep_of[member] = coset

    def q_add(a, b):
        return rep_of[add(cosets[a], cosets[b])]

    def q_neg(a):
        return rep_of[neg(cosets[a])]

    q_zero = rep_of[zero]
    sub = finite_abelian_invariants(list(cosets), q_add, q_neg, q_zero)
    return sub + [e]


def group_structure_model(field, n, rank_window=4):
    """Invariant factors of the degree-n group, derived by enumeration.

    Finite factors come first in divisibility order; a trailing 0 denotes a
    free Z summand (only in degree 0, where the rank splits off).
    """
    from .fields import size_bound

    if field.q > size_bound():
        raise SizeBound(f"q = {field.q} exceeds the enumeration bound")
    if n >= 2:
        return []
    if n == 1:
        elems = model_elements(field, 1)
        facs = finite_abelian_invariants(
            elems, lambda a, b: a.add(b), lambda a: a.neg(), MWElem.zero(field, 1)
        )
        return [f for f in facs if f != 1]
    if n == 0:
        # the rank splits off a free summand; the complement is the finite
        # torsion subgroup {pairs of rank 0}, enumerated exhaustively
        one = MWElem.one(field)
        torsion = [e for e in model_elements(field, 0, rank_window) if e.milnor == 0]
        for e in model_elements(field, 0, rank_window):
            t = e.sub(one.scale(e.milnor))
            if t not in torsion:
                raise SizeBound("rank splitting failed")  # pragma: no cover
        facs = finite_abelian_invariants(
            torsion, lambda a, b: a.add(b), lambda a: a.neg(), MWElem.zero(field, 0)
        )
        return [f for f in facs if f != 1] + [0]
    elems = model_elements(field, n)
    facs = finite_abelian_invariants(
        elems, lambda a, b: a.add(b), lambda a: a.neg(), MWElem.zero(field, n)
    )
    return [f for f in facs if f != 1]


# ---------------------------------------------------------------------------
# Smith normal form and the presentation oracle
# ---------------------------------------------------------------------------


def smith_normal_form(rows, ncols=None):
    """Diagonal invariant factors d_1 | d_2 | ... of an integer matrix.

    Exact textbook algorithm: pick the smallest nonzero entry as pivot,
    reduce its row and column by floor division (remainders strictly shrink
    the pivot), then repair divisibility of the remaining block.  Returns
    min(nrows, ncols) entries in divisibility order, zeros last.
    """
    mat = [list(r) for r in rows]
    if ncols is None:
        ncols = max((len(r) for r in mat), default=0)
    for r in mat:
        r.extend([0] * (ncols - len(r)))
    nrows = len(mat)
    size = min(nrows, ncols)
    t = 0
    while t < size:
        best, pi, pj = None, None, None
        for i in range(t, nrows):
            row = mat[i]
            for j in range(t, ncols):
                v = row[j]
                if v and (best is None or abs(v) < best):
                    best, pi, pj = abs(v), i, j
        if best is None:
            break
        mat[t], mat[pi] = mat[pi], mat[t]
        if pj != t:
            for row in mat:
                row[t], row[pj] = row[pj], row[t]
        if mat[t][t] < 0:
            mat[t] = [-v for v in mat[t]]
        p = mat[t][t]
        dirty = False
        for i in range(t + 1, nrows):
            v = mat[i][t]
            if v:
                q = v // p
                if q:
                    top = mat[t]
                    mat[i] = [x - q * y for x, y in zip(mat[i], top)]
                if mat[i][t]:
                    dirty = True
        if dirty:
            continue
        for j in range(t + 1, ncols):
            v = mat[t][j]
            if v:
                q = v // p
                if q:
                    for i in range(t, nrows):
                        mat[i][j] -= q * mat[i][t]
                if mat[t][j]:
                    dirty = True
        if dirty:
            continue
        clean = True
        for i in range(t + 1, nrows):
            if any(mat[i][j] % p for j in range(t + 1, ncols)):
                mat[t] = [x + y for x, y in zip(mat[t], mat[i])]
                clean = False
                break
        if clean:
            t += 1
    diag = [abs(mat[i][i]) for i in range(t)]
    diag.extend([0] * (size - len(diag)))
    return diag


def _insert_row(basis, row):
    """Insert an integer row into an echelon lattice basis (dict: lead -> row).

    Row operations only (subtraction and swap), so the Z-row-span is
    preserved; used to compress many relation rows before the final SNF.
    """
    while True:
        lead = None
        for j, v in enumerate(row):
            if v:
                lead = j
                break
        if lead is None:
            return
        held = basis.get(lead)
        if held is None:
            basis[lead] = row if row[lead] > 0 else [-v for v in row]
            return
        a, c = held[lead], row[lead]
        q = c // a
        if q:
            row = [x - q * y for x, y in zip(row, held)]
        if row[lead]:
            basis[lead] = row
            row = held


def invariant_factors_of_presentation(num_generators, relation_rows):
    """Invariant factors of Z^g / (row span), 1s dropped, 0s for free rank."""
    diag = smith_normal_form(relation_rows, num_generators) if relation_rows else []
    finite = [d for d in diag if d not in (0, 1)]
    rank = sum(1 for d in diag if d != 0)
    free = num_generators - rank
    return sorted(finite) + [0] * free


def _merge_pairs(pairs):
    out = {}
    for key, c in pairs:
        newc = out.get(key, 0) + c
        if newc:
            out[key] = newc
        else:
            out.pop(key, None)
    return out


class _Presentation:
    """The standard presentation of degree-n Milnor-Witt K-theory, truncated
    at eta power d_max, with eta-positive generators eliminated along the
    twisted-tensor pivots."""

    def __init__(self, field, n, d_max, bound=None):
        if n < 0:
            raise SizeBound("presentation oracle needs n >= 0")
        from .fields import size_bound

        limit = bound if bound is not None else size_bound()
        self.field = field
        self.n = n
        self.d_max = d_max
        units = list(range(1, field.q))  # unit encodings
        for d in range(d_max + 1):
            if (field.q - 1) ** (n + d) > limit:
                raise SizeBound(
                    f"generator count (q-1)^{n + d} exceeds bound {limit}"
                )
        self.units = units
        self._rewrite_cache = {}
        # residual generators: eta^0 tuples, plus eta^1 singletons when n = 0
        self.base_gens = []
        if n >= 1:
            self.base_gens = [(0, t) for t in self._tuples(n)]
        else:
            self.base_gens = [(0, ())]
            if d_max >= 1:
                self.base_gens.extend((1, (a,)) for a in units)
        self.base_index = {g: i for i, g in enumerate(self.base_gens)}

    def _tuples(self, r):
        out = [()]
        for _ in range(r):
            out = [t + (a,) for t in out for a in self.units]
        return out

    def _eliminable(self, gen):
        d, tup = gen
        return d >= 1 and len(tup) >= 2

    def _rewrite(self, gen):
        """Expand a generator into a combination of residual generators."""
        if gen in self.base_index:
            return {gen: 1}
        cached = self._rewrite_cache.get(gen)
        if cached is not None:
            return cached
        d, tup = gen
        assert self._eliminable(gen), gen
        F = self.field
        b, bp, rest = tup[0], tup[1], tup[2:]
        parts = _merge_pairs(
            [
                ((d - 1, (F.mul(b, bp),) + rest), 1),
                ((d - 1, (b,) + rest), -1),
                ((d - 1, (bp,) + rest), -1),
            ]
        )
        out = {}
        for sub, c in parts.items():
            for base, cc in self._rewrite(sub).items():
                newc = out.get(base, 0) + c * cc
                if newc:
                    out[base] = newc
                else:
                    del out[base]
        self._rewrite_cache[gen] = out
        return out

    def _row(self, combo):
        row = [0] * len(self.base_gens)
        for gen, c in combo.items():
            for base, cc in self._rewrite(gen).items():
                row[self.base_index[base]] += c * cc
        return row

    def relation_combos(self):
        """All relations (as generator -> coefficient dicts) except the
        twisted-tensor pivots at position 0, which define the elimination."""
        F = self.field
        n, d_max = self.n, self.d_max
        minus_one = F._exp[(F.q - 1) // 2]
        # Steinberg relations: adjacent entries summing to 1
        for d in range(d_max + 1):
            r = n + d
            if r < 2:
                continue
            for tup in self._tuples(r):
                if any(F.add(tup[i], tup[i + 1]) == 1 for i in range(r - 1)):
                    yield {(d, tup): 1}
        # twisted tensor relations at positions i >= 1 (position 0 is the pivot set)
        for d in range(d_max):
            r = n + d
            for i in range(1, r):
                for pre in self._tuples(i):
                    for b in self.units:
                        for bp in self.units:
                            for suf in self._tuples(r - 1 - i):
                                yield _merge_pairs(
                                    [
                                        ((d, pre + (F.mul(b, bp),) + suf), 1),
                                        ((d, pre + (b,) + suf), -1),
                                        ((d, pre + (bp,) + suf), -1),
                                        ((d + 1, pre + (b, bp) + suf), -1),
                                    ]
                                )
        # Witt relations: 2 eta^e [tuple] + eta^{e+1} [tuple with -1 inserted]
        for e in range(1, d_max):
            r = n + e
            if r < 1:
                continue
            for tup in self._tuples(r):
                for pos in range(r + 1):
                    inserted = tup[:pos] + (minus_one,) + tup[pos:]
                    yield {(e, tup): 2, (e + 1, inserted): 1}

    def relation_rows(self):
        for combo in self.relation_combos():
            row = self._row(combo)
            if any(row):
                yield row

    def invariant_factors(self):
        basis = {}
        for row in self.relation_rows():
            _insert_row(basis, row)
        diag = smith_normal_form(list(basis.values()), len(self.base_gens))
        finite = sorted(d for d in diag if d not in (0, 1))
        free = len(self.base_gens) - sum(1 for d in diag if d != 0)
        return finite + [0] * free


def snf_oracle(field, n, d_max, bound=None):
    """Presentation-based invariant factors with an empirical stabilization report.

    Returns {"factors": per-d list, "stabilized": bool, "final": last factors}.
    """
    per_d = []
    for d in range(d_max + 1):
        per_d.append(_Presentation(field, n, d, bound).invariant_factors())
    stabilized = len(per_d) >= 2 and per_d[-1] == per_d[-2]
    return {"factors": per_d, "stabilized": stabilized, "final": per_d[-1]}


def presentation_matrix_triples(field, n, d_max):
    """The relation matrix in sparse (row, col, value) triple format."""
    pres = _Presentation(field, n, d_max)
    triples = []
    for i, row in enumerate(pres.relation_rows()):
        for j, v in enumerate(row):
            if v:
                triples.append((i, j, v))
    return {"generators": len(pres.base_gens), "triples": triples}
