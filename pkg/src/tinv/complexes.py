"""Bigraded free modules with a filtered differential squaring to a potential.

A `MultiFact` is a finitely generated free module with generators carrying
(internal, filtration) bidegrees and a differential D, stored as a sparse
matrix of polynomials, satisfying D^2 = w * Id.  The differential splits
into buckets by how much it raises the filtration; bucket entries are
homogeneous of internal degree -3.

Reductions (Gaussian elimination of unit entries, elimination of a linear
Koszul row, delooping of a quadratic Koszul row, homological perturbation)
all return the (P, I, H) maps of a deformation retract so endomorphisms can
be transported through them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ring import Domain, Poly, ZZ

Vec = dict  # gen index -> Poly


def vec_add(u: Vec, v: Vec) -> Vec:
    out = dict(u)
    for g, p in v.items():
        s = out.get(g)
        s = p if s is None else s + p
        if s.is_zero():
            out.pop(g, None)
        else:
            out[g] = s
    return out


def vec_scale(u: Vec, p: Poly) -> Vec:
    if p.is_zero():
        return {}
    out = {}
    for g, q in u.items():
        r = q * p
        if not r.is_zero():
            out[g] = r
    return out


class MultiFact:
    """Free bigraded module with differential D, D^2 = w * Id."""

    def __init__(self, dom: Domain, nvars: int, w: Poly, gens, d):
        self.dom = dom
        self.nvars = nvars
        self.w = w
        self.gens = list(gens)  # list of (internal, filtration)
        self.d = {k: v for k, v in d.items() if not v.is_zero()}

    @property
    def rank(self) -> int:
        return len(self.gens)

    def entry(self, t: int, s: int) -> Poly:
        return self.d.get((t, s), Poly.zero(self.dom, self.nvars))

    def columns(self):
        cols: dict[int, Vec] = {s: {} for s in range(self.rank)}
        for (t, s), p in self.d.items():
            cols[s][t] = p
        return cols

    def apply(self, v: Vec) -> Vec:
        out: Vec = {}
        for s, p in v.items():
            for (t, s2), q in self.d.items():
                if s2 == s:
                    r = q * p
                    if r.is_zero():
                        continue
                    acc = out.get(t)
                    acc = r if acc is None else acc + r
                    if acc.is_zero():
                        out.pop(t, None)
                    else:
                        out[t] = acc
        return out

    def apply_fast(self, cols, v: Vec) -> Vec:
        out: Vec = {}
        for s, p in v.items():
            for t, q in cols[s].items():
                r = q * p
                if r.is_zero():
                    continue
                acc = out.get(t)
                acc = r if acc is None else acc + r
                if acc.is_zero():
                    out.pop(t, None)
                else:
                    out[t] = acc
        return out

    def bucket(self, t: int, s: int) -> int:
        return self.gens[t][1] - self.gens[s][1]

    def buckets_present(self):
        return sorted({self.bucket(t, s) for (t, s) in self.d})

    def shift(self, di: int, dj: int) -> "MultiFact":
        gens = [(a + di, b + dj) for (a, b) in self.gens]
        return MultiFact(self.dom, self.nvars, self.w, gens, dict(self.d))

    def map_entries(self, f) -> "MultiFact":
        d = {}
        for k, p in self.d.items():
            q = f(p)
            if not q.is_zero():
                d[k] = q
        return MultiFact(self.dom, self.nvars, f(self.w), self.gens, d)

    def verify(self, check_parity: bool = False) -> list[str]:
        """Check D^2 = w*Id, per-entry homogeneity of degree (-3, >=0).

        Returns a list of violation descriptions (empty means pass).
        """
        bad = []
        for (t, s), p in self.d.items():
            try:
                deg = p.degree()
            except ValueError:
                bad.append(f"entry ({t},{s}) inhomogeneous")
                continue
            want = self.gens[s][0] - self.gens[t][0] - 3
            if deg is not None and deg != want:
                bad.append(f"entry ({t},{s}) degree {deg} != {want}")
            b = self.bucket(t, s)
            if b < 0:
                bad.append(f"entry ({t},{s}) lowers filtration by {-b}")
            if check_parity and b % 2 == 0 and b > 0:
                bad.append(f"entry ({t},{s}) in even bucket {b}")
        cols = self.columns()
        rows: dict[int, Vec] = {t: {} for t in range(self.rank)}
        for (t, s), p in self.d.items():
            rows[t][s] = p
        for u in range(self.rank):
            # compute row u of D^2 as sum over t of D[u,t] * row_t(D)
            acc: Vec = {}
            for t, p in rows[u].items():
                for s, q in rows[t].items():
                    r = p * q
                    if r.is_zero():
                        continue
                    a = acc.get(s)
                    a = r if a is None else a + r
                    if a.is_zero():
                        acc.pop(s, None)
                    else:
                        acc[s] = a
            for s, p in acc.items():
                want = self.w if s == u else Poly.zero(self.dom, self.nvars)
                if p != want:
                    bad.append(f"D^2 entry ({u},{s}) = {p} != {want}")
            if u not in acc and not self.w.is_zero():
                bad.append(f"D^2 entry ({u},{u}) = 0 != w")
        return bad


@dataclass
class LinOp:
    """Map between two complexes given by columns, or by a direct applier.

    Maps arising from variable elimination are only linear over a subring
    (they substitute or divide in the coefficients), so they carry an
    `applier` and must not be rebuilt from their columns.
    """

    src: MultiFact
    tgt: MultiFact
    col: object  # callable: src gen index -> Vec over tgt
    applier: object = None  # optional callable Vec -> Vec

    def apply(self, v: Vec) -> Vec:
        if self.applier is not None:
            return self.applier(v)
        out: Vec = {}
        for g, p in v.items():
            out = vec_add(out, vec_scale(self.col(g), p))
        return out

    def matrix(self) -> dict:
        m = {}
        for s in range(self.src.rank):
            for t, p in self.col(s).items():
                m[(t, s)] = p
        return m

    @staticmethod
    def from_matrix(src: MultiFact, tgt: MultiFact, mat: dict) -> "LinOp":
        cols: dict[int, Vec] = {}
        for (t, s), p in mat.items():
            if not p.is_zero():
                cols.setdefault(s, {})[t] = p
        return LinOp(src, tgt, lambda s: cols.get(s, {}))

    @staticmethod
    def identity(c: MultiFact) -> "LinOp":
        one = Poly.const(c.dom, c.nvars, 1)
        return LinOp(c, c, lambda s: {s: one})

    def then(self, other: "LinOp") -> "LinOp":
        return LinOp(self.src, other.tgt, lambda s: other.apply(self.col(s)))


@dataclass
class ReductionStep:
    """(P, I, H) data of one deformation retract from `big` to `small`."""

    big: MultiFact
    small: MultiFact
    P: LinOp
    I: LinOp
    H: LinOp
    kind: str = ""

    def transport(self, f: LinOp) -> LinOp:
        """Push an endomorphism of `big` down to `small`: P o f o I."""
        return LinOp(
            self.small,
            self.small,
            lambda s: self.P.apply(f.apply(self.I.col(s))),
        )


def row_edeg(a: Poly, b: Poly) -> int:
    """Internal degree of the e generator of the rank-2 factor for (a, b)."""
    da = None if a.is_zero() else a.degree()
    if da is None:
        db = None if b.is_zero() else b.degree()
        if db is None:
            raise ValueError("K(0,0) row has no well-defined grading")
        da = -6 - db
    return da + 3


def koszul(dom: Domain, nvars: int, rows, shift=(0, 0)) -> MultiFact:
    """Koszul factorization of sum(a_i * b_i) from rows [(a_i, b_i)].

    Generators are subsets of rows (bitmask order); choosing row i
    contributes internal degree deg(a_i) + 3.  An odd internal shift
    negates the differential (the shift factor sits first in the sign
    rule), so all sign bookkeeping is by true internal-degree parity.
    """
    n = len(rows)
    edeg = [row_edeg(a, b) for a, b in rows]
    w = Poly.zero(dom, nvars)
    for a, b in rows:
        w = w + a * b
    gens = []
    for m in range(1 << n):
        d_int = shift[0] + sum(edeg[i] for i in range(n) if m >> i & 1)
        gens.append((d_int, shift[1]))
    d = {}
    base = -1 if shift[0] % 2 else 1
    for m in range(1 << n):
        sign = base
        for i in range(n):
            if m >> i & 1:
                p = rows[i][0]
                m2 = m & ~(1 << i)
            else:
                p = rows[i][1]
                m2 = m | (1 << i)
            if not p.is_zero():
                q = p.scale(sign)
                d[(m2, m)] = q
            if m >> i & 1:
                sign = -sign
    return MultiFact(dom, nvars, w, gens, d)


def tensor(c1: MultiFact, c2: MultiFact) -> MultiFact:
    """Graded tensor product; sign rule keyed on internal-degree parity."""
    if c1.dom is not c2.dom and c1.dom != c2.dom:
        raise ValueError("mixed domains")
    n2 = c2.rank
    gens = []
    for (a1, b1) in c1.gens:
        for (a2, b2) in c2.gens:
            gens.append((a1 + a2, b1 + b2))
    d = {}
    for (t, s), p in c1.d.items():
        for g2 in range(n2):
            d[(t * n2 + g2, s * n2 + g2)] = p
    for g1, (a1, _) in enumerate(c1.gens):
        sgn = -1 if a1 % 2 else 1
        for (t, s), p in c2.d.items():
            key = (g1 * n2 + t, g1 * n2 + s)
            q = p.scale(sgn)
            if key in d:
                q = d[key] + q
                if q.is_zero():
                    del d[key]
                    continue
            d[key] = q
    return MultiFact(c1.dom, c1.nvars, c1.w + c2.w, gens, d)


def check_sdr(step: ReductionStep, probes=None, probes_small=None) -> list[str]:
    """Verify the five retract identities and that P, I are chain maps.

    `probes` scale big-side basis vectors; `probes_small` (default: just 1,
    since elimination steps are only linear over the smaller ring) scale
    small-side basis vectors.
    """
    big, small = step.big, step.small
    P, I, H = step.P, step.I, step.H
    dom, nv = big.dom, big.nvars
    one = Poly.const(dom, nv, 1)
    probes = [one] + list(probes or [])
    probes_small = [one] + list(probes_small or [])
    bad = []

    def eq(u: Vec, v: Vec, msg: str):
        diff = vec_add(u, {g: -p for g, p in v.items()})
        if diff:
            bad.append(msg)

    for s in range(small.rank):
        for pr in probes_small:
            v = {s: pr}
            eq(P.apply(I.apply(v)), v, f"PI != 1 at {s}")
            eq(H.apply(I.apply(v)), {}, f"HI != 0 at {s}")
            eq(
                big.apply(I.apply(v)),
                I.apply(small.apply(v)),
                f"I not chain map at {s}",
            )
    for g in range(big.rank):
        for pr in probes:
            v = {g: pr}
            eq(P.apply(H.apply(v)), {}, f"PH != 0 at {g}")
            eq(H.apply(H.apply(v)), {}, f"H^2 != 0 at {g}")
            eq(
                small.apply(P.apply(v)),
                P.apply(big.apply(v)),
                f"P not chain map at {g}",
            )
            lhs = vec_add(H.apply(big.apply(v)), big.apply(H.apply(v)))
            rhs = vec_add(v, {k: -p for k, p in I.apply(P.apply(v)).items()})
            eq(lhs, rhs, f"HD + DH != 1 - IP at {g}")
    return bad


def gauss_eliminate(c: MultiFact, s: int, t: int) -> tuple[MultiFact, ReductionStep]:
    """Cancel the unit constant entry D[t,s]; removes generators s and t."""
    u = c.entry(t, s).unit_constant()
    if u is None:
        raise ValueError(f"entry ({t},{s}) is not a unit constant")
    dom, nv = c.dom, c.nvars
    cinv = dom.inv(u)
    keep = [g for g in range(c.rank) if g not in (s, t)]
    old_of_new = keep
    new_of_old = {g: i for i, g in enumerate(keep)}
    gens = [c.gens[g] for g in keep]

    col_s: Vec = {}
    row_t: Vec = {}
    for (a, b), p in c.d.items():
        if b == s and a not in (s, t):
            col_s[a] = p
        if a == t and b not in (s, t):
            row_t[b] = p

    d = {}
    for (a, b), p in c.d.items():
        if a in (s, t) or b in (s, t):
            continue
        d[(new_of_old[a], new_of_old[b])] = p
    for a, pa in col_s.items():
        for b, pb in row_t.items():
            key = (new_of_old[a], new_of_old[b])
            q = (pa * pb).scale(dom.neg(cinv))
            if key in d:
                q = d[key] + q
                if q.is_zero():
                    del d[key]
                    continue
                d[key] = q
            elif not q.is_zero():
                d[key] = q
    small = MultiFact(dom, nv, c.w, gens, d)

    minus_cinv = dom.neg(cinv)

    def pcol(g: int) -> Vec:
        if g == s:
            return {}
        if g == t:
            return {new_of_old[a]: p.scale(minus_cinv) for a, p in col_s.items()}
        return {new_of_old[g]: Poly.const(dom, nv, 1)}

    def icol(x: int) -> Vec:
        g = old_of_new[x]
        out = {g: Poly.const(dom, nv, 1)}
        p = row_t.get(g)
        if p is not None:
            out[s] = p.scale(minus_cinv)
        return out

    def hcol(g: int) -> Vec:
        if g == t:
            return {s: Poly.const(dom, nv, cinv)}
        return {}

    step = ReductionStep(
        big=c,
        small=small,
        P=LinOp(c, small, pcol),
        I=LinOp(small, c, icol),
        H=LinOp(c, c, hcol),
        kind=f"gauss({s},{t})",
    )
    return small, step


def perturb(
    c: MultiFact,
    small_gens,
    small_w: Poly,
    p0,
    i0,
    h0,
    d0p,
    d1_cols,
    max_iter: int | None = None,
) -> tuple[MultiFact, ReductionStep]:
    """Lift a retract of vertical factorizations through the higher terms.

    p0, i0, h0: column maps of the vertical retract (callables Vec -> Vec
    for p0/h0 applied to vectors, gen -> Vec for i0 and d0p).
    d1_cols: columns of the filtration-raising part of D on `c`.
    The series sum((D1 h0)^k D1) truncates because D1 raises filtration and
    the support is finite.
    """
    dom, nv = c.dom, c.nvars
    filts = [b for (_, b) in c.gens]
    diam = (max(filts) - min(filts) + 1) if filts else 1
    limit = max_iter or (diam + 2)

    def d1_apply(v: Vec) -> Vec:
        out: Vec = {}
        for g, p in v.items():
            out = vec_add(out, vec_scale(d1_cols.get(g, {}), p))
        return out

    # The homotopy convention here is 1 - IP = HD + DH; the classical
    # perturbation formulas apply to the opposite convention, so run them
    # with -h0 throughout and negate the resulting homotopy at the end.
    def hneg(v: Vec) -> Vec:
        return {g: -p for g, p in h0(v).items()}

    d_new = {}
    i_cols = {}
    for snew in range(len(small_gens)):
        iv = i0(snew)
        col = dict(d0p(snew))
        icol = dict(iv)
        cur = d1_apply(iv)
        it = 0
        while cur:
            col = vec_add(col, p0(cur))
            nxt = hneg(cur)
            icol = vec_add(icol, nxt)
            cur = d1_apply(nxt)
            it += 1
            if it > limit:
                raise RuntimeError("perturbation series failed to terminate")
        for t, p in col.items():
            if not p.is_zero():
                d_new[(t, snew)] = p
        i_cols[snew] = icol
    small = MultiFact(dom, nv, small_w, small_gens, d_new)

    def p_apply(v: Vec) -> Vec:
        out = p0(v)
        cur = d1_apply(hneg(v))
        it = 0
        while cur:
            out = vec_add(out, p0(cur))
            cur = d1_apply(hneg(cur))
            it += 1
            if it > limit:
                raise RuntimeError("perturbation series failed to terminate")
        return out

    def h_apply(v: Vec) -> Vec:
        hv = hneg(v)
        out = dict(hv)
        cur = d1_apply(hv)
        it = 0
        while cur:
            nxt = hneg(cur)
            out = vec_add(out, nxt)
            cur = d1_apply(nxt)
            it += 1
            if it > limit:
                raise RuntimeError("perturbation series failed to terminate")
        return {g: -p for g, p in out.items()}

    one = Poly.const(dom, nv, 1)
    step = ReductionStep(
        big=c,
        small=small,
        P=LinOp(c, small, lambda g: p_apply({g: one}), applier=p_apply),
        I=LinOp(small, c, lambda s: i_cols.get(s, {})),
        H=LinOp(c, c, lambda g: h_apply({g: one}), applier=h_apply),
        kind="perturb",
    )
    return small, step


# ---------------------------------------------------------------------------
# Koszul-level moves on explicit row data
# ---------------------------------------------------------------------------


@dataclass
class KoszulData:
    """Rows (a_i, b_i) plus a bidegree shift; complex = koszul(rows)."""

    dom: Domain
    nvars: int
    rows: list
    shift: tuple = (0, 0)

    def build(self) -> MultiFact:
        return koszul(self.dom, self.nvars, self.rows, self.shift)


def basis_change(kd: KoszulData, i: int, j: int, lam: Poly, kind: str):
    """Row moves on Koszul data, with the explicit isomorphism.

    kind='row':    a_j += lam*a_i,  b_i -= lam*b_j
    kind='mixed':  b_i -= lam*a_j,  b_j += lam*a_i
    Returns (new KoszulData, U, Uinv) with U: old complex -> new complex.
    """
    if i == j:
        raise ValueError("rows must differ")
    rows = [list(r) for r in kd.rows]
    dom, nv = kd.dom, kd.nvars
    if kind == "row":
        rows[j][0] = rows[j][0] + lam * rows[i][0]
        rows[i][1] = rows[i][1] - lam * rows[j][1]
        # U = 1 - lam * N,  N: gens with j chosen, i not -> swap to i chosen
        def ncol(m: int) -> Vec:
            if (m >> j & 1) and not (m >> i & 1):
                return {(m & ~(1 << j)) | (1 << i): Poly.const(dom, nv, 1)}
            return {}
    elif kind == "mixed":
        rows[i][1] = rows[i][1] - lam * rows[j][0]
        rows[j][1] = rows[j][1] + lam * rows[i][0]
        def ncol(m: int) -> Vec:
            if not (m >> j & 1) and not (m >> i & 1):
                return {m | (1 << i) | (1 << j): Poly.const(dom, nv, 1)}
            return {}
    else:
        raise ValueError(f"unknown kind {kind!r}")
    new = KoszulData(dom, nv, [tuple(r) for r in rows], kd.shift)
    old_c = kd.build()
    new_c = new.build()

    def ucol(m: int) -> Vec:
        out = {m: Poly.const(dom, nv, 1)}
        for g, p in ncol(m).items():
            out = vec_add(out, {g: -(p * lam)})
        return out

    def uinvcol(m: int) -> Vec:
        out = {m: Poly.const(dom, nv, 1)}
        for g, p in ncol(m).items():
            out = vec_add(out, {g: p * lam})
        return out

    U = LinOp(old_c, new_c, ucol)
    Uinv = LinOp(new_c, old_c, uinvcol)
    return new, U, Uinv


def koszul_nullhomotopy(kd: KoszulData, row: int, which: str) -> LinOp:
    """Nullhomotopy of multiplication by a_row ('a') or b_row ('b').

    For which='a': h sends the row's f to its e; HD + DH = a_row * Id.
    """
    c = kd.build()
    dom, nv = kd.dom, kd.nvars
    one = Poly.const(dom, nv, 1)

    def hcol(m: int) -> Vec:
        sign = 1
        for l in range(row):
            if m >> l & 1:
                sign = -sign
        if which == "a":
            if not (m >> row & 1):
                return {m | (1 << row): one.scale(sign)}
        elif which == "b":
            if m >> row & 1:
                return {m & ~(1 << row): one.scale(sign)}
        else:
            raise ValueError("which must be 'a' or 'b'")
        return {}

    return LinOp(c, c, hcol)
