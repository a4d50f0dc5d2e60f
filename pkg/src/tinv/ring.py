"""Exact arithmetic in graded polynomial rings over Z, Q and prime fields.

Variables carry internal degree -2, so a monomial of total exponent k has
internal degree -2k.  All coefficient arithmetic is exact; there is no
floating point anywhere in this package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction


class Domain:
    """Base class for the closed set of coefficient domains {Z, Q, F_p}."""

    name = "?"

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def is_zero(self, a):
        return a == 0

    def is_unit(self, a):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def of_int(self, n: int):
        return n

    def __repr__(self):
        return self.name


class _ZZ(Domain):
    name = "ZZ"

    def is_unit(self, a):
        return a == 1 or a == -1

    def inv(self, a):
        if a == 1 or a == -1:
            return a
        raise ZeroDivisionError(f"{a} is not a unit in ZZ")


class _QQ(Domain):
    name = "QQ"

    def is_unit(self, a):
        return a != 0

    def inv(self, a):
        return Fraction(1, 1) / a

    def of_int(self, n: int):
        return Fraction(n)


class GF(Domain):
    """Prime field F_p with elements stored as ints in [0, p)."""

    def __init__(self, p: int):
        if p < 2 or any(p % q == 0 for q in range(2, int(p**0.5) + 1)):
            raise ValueError(f"{p} is not prime")
        self.p = p
        self.name = f"GF({p})"

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def is_unit(self, a):
        return a % self.p != 0

    def inv(self, a):
        return pow(a, self.p - 2, self.p)

    def of_int(self, n: int):
        return n % self.p

    def __eq__(self, other):
        return isinstance(other, GF) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))


ZZ = _ZZ()
QQ = _QQ()
GF2 = GF(2)
GF3 = GF(3)


@dataclass
class VarTable:
    """Ordered table of live variables.

    Regions of a diagram map to variable slots here; exactly one region (the
    unbounded one) is gauged to zero and owns no slot.  Eliminating a
    variable during scanning produces a *new* table with the slot removed.
    """

    names: tuple[str, ...] = ()
    region_of: dict = field(default_factory=dict)  # var name -> region id
    gauge_region: object = None

    def __post_init__(self):
        self.index = {n: i for i, n in enumerate(self.names)}

    @property
    def n(self) -> int:
        return len(self.names)

    def slot(self, name: str) -> int:
        return self.index[name]

    def drop(self, name: str) -> "VarTable":
        keep = tuple(x for x in self.names if x != name)
        reg = {k: v for k, v in self.region_of.items() if k != name}
        return VarTable(keep, reg, self.gauge_region)

    def __contains__(self, name: str) -> bool:
        return name in self.index


class Poly:
    """Sparse multivariate polynomial: {exponent tuple: nonzero coeff}.

    Exponent tuples are dense over the live variable table (`nvars` slots).
    Internal degree of a monomial is -2 * sum(exponents).
    """

    __slots__ = ("dom", "nvars", "terms")

    def __init__(self, dom: Domain, nvars: int, terms: dict | None = None):
        self.dom = dom
        self.nvars = nvars
        self.terms = terms or {}

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero(dom: Domain, nvars: int) -> "Poly":
        return Poly(dom, nvars, {})

    @staticmethod
    def const(dom: Domain, nvars: int, c) -> "Poly":
        c = dom.of_int(c) if isinstance(c, int) else c
        if dom.is_zero(c):
            return Poly(dom, nvars, {})
        return Poly(dom, nvars, {(0,) * nvars: c})

    @staticmethod
    def var(dom: Domain, nvars: int, slot: int, c=1) -> "Poly":
        e = [0] * nvars
        e[slot] = 1
        c = dom.of_int(c) if isinstance(c, int) else c
        if dom.is_zero(c):
            return Poly(dom, nvars, {})
        return Poly(dom, nvars, {tuple(e): c})

    # -- predicates ---------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def constant_term(self):
        z = (0,) * self.nvars
        return self.terms.get(z, self.dom.of_int(0))

    def unit_constant(self):
        """The coefficient if self is a unit constant, else None."""
        if len(self.terms) != 1:
            return None
        (e, c), = self.terms.items()
        if sum(e) == 0 and self.dom.is_unit(c):
            return c
        return None

    def degree(self) -> int | None:
        """Internal degree when homogeneous, else raises ValueError.

        The zero polynomial returns None (any degree).
        """
        degs = {-2 * sum(e) for e in self.terms}
        if not degs:
            return None
        if len(degs) > 1:
            raise ValueError(f"inhomogeneous polynomial: degrees {sorted(degs)}")
        return degs.pop()

    def is_homogeneous(self) -> bool:
        try:
            self.degree()
            return True
        except ValueError:
            return False

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other: "Poly") -> "Poly":
        self._check(other)
        dom = self.dom
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = dom.add(out.get(e, dom.of_int(0)), c)
            if dom.is_zero(s):
                out.pop(e, None)
            else:
                out[e] = s
        return Poly(dom, self.nvars, out)

    def __neg__(self) -> "Poly":
        dom = self.dom
        return Poly(dom, self.nvars, {e: dom.neg(c) for e, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        self._check(other)
        dom = self.dom
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = dom.add(out.get(e, dom.of_int(0)), dom.mul(c1, c2))
                if dom.is_zero(s):
                    out.pop(e, None)
                else:
                    out[e] = s
        return Poly(dom, self.nvars, out)

    def scale(self, c) -> "Poly":
        dom = self.dom
        c = dom.of_int(c) if isinstance(c, int) else c
        if dom.is_zero(c):
            return Poly.zero(dom, self.nvars)
        return Poly(dom, self.nvars, {e: dom.mul(v, c) for e, v in self.terms.items()})

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Poly)
            and self.nvars == other.nvars
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def _check(self, other: "Poly"):
        if self.dom is not other.dom and self.dom != other.dom:
            raise ValueError(f"mixed coefficient domains {self.dom} and {other.dom}")
        if self.nvars != other.nvars:
            raise ValueError("mixed variable tables")

    # -- variable-level operations -------------------------------------

    def max_exp(self, slot: int) -> int:
        return max((e[slot] for e in self.terms), default=0)

    def mentions(self, slot: int) -> bool:
        return any(e[slot] for e in self.terms)

    def coeff_of_var(self, slot: int):
        """Coefficient of x_slot when self is linear; None if x_slot absent."""
        c = None
        for e, v in self.terms.items():
            if e[slot] == 1 and sum(e) == 1:
                c = v
            elif e[slot] != 0:
                raise ValueError("not linear in requested variable")
        return c

    def substitute(self, slot: int, r: "Poly") -> "Poly":
        """Replace x_slot by the polynomial r (same table)."""
        self._check(r)
        dom = self.dom
        out = Poly.zero(dom, self.nvars)
        powers = {0: Poly.const(dom, self.nvars, 1)}
        for e, c in self.terms.items():
            k = e[slot]
            if k not in powers:
                p = powers[max(powers)]
                for _ in range(max(powers), k):
                    p = p * r
                    powers[max(powers) + 1] = p
            rest = list(e)
            rest[slot] = 0
            mono = Poly(dom, self.nvars, {tuple(rest): c})
            out = out + mono * powers[k]
        return out

    def drop_slot(self, slot: int) -> "Poly":
        """Remove an unused variable slot (compaction after elimination)."""
        out = {}
        for e, c in self.terms.items():
            if e[slot] != 0:
                raise ValueError("dropping a slot that is still in use")
            out[e[:slot] + e[slot + 1:]] = c
        return Poly(self.dom, self.nvars - 1, out)

    def insert_slot(self, slot: int) -> "Poly":
        out = {e[:slot] + (0,) + e[slot:]: c for e, c in self.terms.items()}
        return Poly(self.dom, self.nvars + 1, out)

    def divmod_linear(self, slot: int, r: "Poly") -> tuple["Poly", "Poly"]:
        """Divide by (x_slot - r), with r free of x_slot.

        Returns (q, rem) with self = q*(x_slot - r) + rem and rem free of
        x_slot; exact in any domain since the divisor is monic in x_slot.
        """
        if r.mentions(slot):
            raise ValueError("divisor must be free of the variable")
        rem = self
        q = Poly.zero(self.dom, self.nvars)
        while rem.mentions(slot):
            # peel the highest x_slot-power terms
            d = rem.max_exp(slot)
            lead = {}
            for e, c in rem.terms.items():
                if e[slot] == d:
                    le = list(e)
                    le[slot] = d - 1
                    lead[tuple(le)] = c
            leadp = Poly(self.dom, self.nvars, lead)
            q = q + leadp
            x = Poly.var(self.dom, self.nvars, slot)
            rem = rem - leadp * (x - r)
        return q, rem

    def quad_split(self, slot: int):
        """Write self = alpha*x + beta modulo (x^2 + h), x = x_slot.

        Requires self to be a polynomial in x over the rest; returns
        (alpha, beta) given h (both free of x).  Used by delooping.
        """
        raise NotImplementedError("use quad_reduce")

    def quad_reduce(self, slot: int, h: "Poly") -> tuple["Poly", "Poly"]:
        """Reduce modulo x^2 + h (h free of x = x_slot): self = q*(x^2+h) + a*x + b.

        Returns (a, b), both free of x.
        """
        if h.mentions(slot):
            raise ValueError("h must be free of the variable")
        dom = self.dom
        rem = self
        while rem.max_exp(slot) >= 2:
            d = rem.max_exp(slot)
            lead = {}
            for e, c in rem.terms.items():
                if e[slot] == d:
                    le = list(e)
                    le[slot] = d - 2
                    lead[tuple(le)] = c
            leadp = Poly(dom, self.nvars, lead)
            x = Poly.var(dom, self.nvars, slot)
            rem = rem - leadp * (x * x + h)
        a = {}
        b = {}
        for e, c in rem.terms.items():
            le = list(e)
            if e[slot] == 1:
                le[slot] = 0
                a[tuple(le)] = c
            else:
                b[tuple(e)] = c
        return Poly(dom, self.nvars, a), Poly(dom, self.nvars, b)

    def map_coeffs(self, dom: Domain, f) -> "Poly":
        out = {}
        for e, c in self.terms.items():
            v = f(c)
            if not dom.is_zero(v):
                out[e] = v
        return Poly(dom, self.nvars, out)

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for e, c in sorted(self.terms.items()):
            mono = "*".join(
                f"x{i}" + (f"^{k}" if k > 1 else "")
                for i, k in enumerate(e)
                if k
            )
            bits.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(bits)


def potential(dom: Domain, nvars: int, boundary_edges: list[Poly]) -> Poly:
    """(1/3) * sum of cubes of signed boundary edge variables.

    The edge variables must sum to zero; the result then has integer
    coefficients, computed without ever leaving the base domain.
    """
    total = Poly.zero(dom, nvars)
    for e in boundary_edges:
        total = total + e
    if not total.is_zero():
        raise ValueError("boundary edge variables do not sum to zero")
    # sum x_e^3 = 3 * elementary symmetric correction; compute in QQ when
    # over ZZ and verify integrality, exactness is mandatory.
    if dom is ZZ:
        acc = Poly.zero(QQ, nvars)
        third = Fraction(1, 3)
        for e in boundary_edges:
            eq = e.map_coeffs(QQ, lambda c: Fraction(c))
            acc = acc + (eq * eq * eq).scale(third)
        out = {}
        for mono, c in acc.terms.items():
            if c.denominator != 1:
                raise ValueError("potential is not integral (malformed boundary)")
            out[mono] = int(c)
        return Poly(ZZ, nvars, out)
    acc = Poly.zero(dom, nvars)
    for e in boundary_edges:
        acc = acc + e * e * e
    if isinstance(dom, GF) and dom.p == 3:
        raise ValueError("potential needs 3 invertible or ZZ")
    third = dom.inv(dom.of_int(3))
    return acc.scale(third)
