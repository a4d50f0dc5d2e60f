"""Scan state: a direct sum of Koszul objects plus filtration-raising entries.

Each object is a Koszul factorization (row list + bidegree shift); its
generators are row subsets.  The full differential of the state is kept
materialized, but the block-diagonal vertical part is always exactly the
Koszul differential of the row data, which is what makes variable
elimination and delooping applicable at any time.

All reductions here are deformation retracts (or isomorphisms), so every
page of the filtration spectral sequence from the second onward, the total
homology, and the transported module action are preserved.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .ring import Domain, Poly, VarTable
from .complexes import (
    LinOp,
    MultiFact,
    ReductionStep,
    Vec,
    koszul,
    perturb,
    row_edeg,
    vec_add,
    vec_scale,
)


class KillBlocked(Exception):
    """Raised when a variable cannot be eliminated from some object yet."""


class ResourceCap(Exception):
    """Generator count exceeded the configured cap."""


@dataclass
class Obj:
    """Koszul object: rows with sign flags and a bidegree shift.

    A flag of -1 on row i means the row's differential acts with an extra
    minus sign (the parity of the shifts accumulated before the row was
    tensored on); it is isomorphic to negating both row entries.
    """

    rows: list  # list of (a: Poly, b: Poly)
    shift: tuple  # (internal, filtration)
    base: int = 0
    flags: list = None

    def __post_init__(self):
        if self.flags is None:
            self.flags = [1] * len(self.rows)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def rank(self) -> int:
        return 1 << len(self.rows)

    def gen_bidegree(self, mask: int) -> tuple:
        d = self.shift[0]
        for i, (a, b) in enumerate(self.rows):
            if mask >> i & 1:
                d += row_edeg(a, b)
        return (d, self.shift[1])

    def row_sign(self, i: int, mask: int) -> int:
        s = self.flags[i]
        for j in range(i):
            if mask >> j & 1:
                s = -s
        return s


def _vertical_entries(obj: Obj, skip_row: int | None = None):
    """(local target, local source, poly) for the object's Koszul differential."""
    n = obj.nrows
    for m in range(1 << n):
        below = 1
        for i in range(n):
            a, b = obj.rows[i]
            sign = obj.flags[i] * below
            if skip_row is None or i != skip_row:
                if m >> i & 1:
                    if not a.is_zero():
                        yield (m & ~(1 << i), m, a.scale(sign))
                else:
                    if not b.is_zero():
                        yield (m | (1 << i), m, b.scale(sign))
            if m >> i & 1:
                below = -below


class RowState:
    """Materialized complex + object metadata, kept in sync."""

    def __init__(self, dom: Domain, vt: VarTable, objs: list, higher: dict, w: Poly):
        self.dom = dom
        self.vt = vt
        self.objs = objs
        self._set_bases()
        self.w = w
        self.C = self._materialize(higher)

    # -- bookkeeping ----------------------------------------------------

    def _set_bases(self):
        base = 0
        for o in self.objs:
            o.base = base
            base += o.rank
        self._rank = base

    @property
    def rank(self) -> int:
        return self._rank

    @property
    def nvars(self) -> int:
        return self.vt.n

    def obj_of_gen(self, g: int) -> tuple[Obj, int]:
        for o in self.objs:
            if o.base <= g < o.base + o.rank:
                return o, g - o.base
        raise IndexError(g)

    def _materialize(self, higher: dict) -> MultiFact:
        gens = []
        for o in self.objs:
            for m in range(o.rank):
                gens.append(o.gen_bidegree(m))
        d = dict(higher)
        for o in self.objs:
            for t, s, p in _vertical_entries(o):
                key = (o.base + t, o.base + s)
                d[key] = d.get(key, Poly.zero(self.dom, self.nvars)) + p
        return MultiFact(self.dom, self.nvars, self.w, gens, d)

    def vertical_keys(self) -> set:
        keys = set()
        for o in self.objs:
            for t, s, _ in _vertical_entries(o):
                keys.add((o.base + t, o.base + s))
        return keys

    def higher(self) -> dict:
        vk = self.vertical_keys()
        out = {}
        for k, p in self.C.d.items():
            if k in vk:
                o, _ = self.obj_of_gen(k[0])
                lt, ls = k[0] - o.base, k[1] - o.base
                vert = Poly.zero(self.dom, self.nvars)
                for t, s, q in _vertical_entries(o):
                    if (t, s) == (lt, ls):
                        vert = vert + q
                rem = p - vert
                if not rem.is_zero():
                    out[k] = rem
            else:
                out[k] = p
        return out

    def live_slots(self) -> set:
        used = set()
        for p in list(self.C.d.values()) + [self.w]:
            for e in p.terms:
                for i, k in enumerate(e):
                    if k:
                        used.add(i)
        for o in self.objs:
            for a, b in o.rows:
                for p in (a, b):
                    for e in p.terms:
                        for i, k in enumerate(e):
                            if k:
                                used.add(i)
        return used

    # -- tensoring in a new piece ---------------------------------------

    def tensor_piece(self, summands, saddles, w_piece: Poly, cap: int | None = None):
        """Tensor a local piece onto the state (state factor first).

        summands: list of (row | None, shift) - each becomes one summand;
            a None row means a rank-1 summand with no new row.
        saddles: list of (s_from, gen_from, s_to, gen_to, poly) between
            piece summand generators (gen 0 = f, 1 = e), filtration-raising.
        """
        old_objs = self.objs
        old_d = self.C.d
        news = []
        piece_index = {}  # (old obj idx, summand idx) -> new obj
        for oi, o in enumerate(old_objs):
            for si, (row, sh) in enumerate(summands):
                rows = o.rows + ([row] if row is not None else [])
                flags = list(o.flags)
                if row is not None:
                    flags.append(-1 if (o.shift[0] + sh[0]) % 2 else 1)
                no = Obj(rows=rows, shift=(o.shift[0] + sh[0], o.shift[1] + sh[1]),
                         flags=flags)
                piece_index[(oi, si)] = no
                news.append(no)
        base = 0
        for o in news:
            o.base = base
            base += o.rank
        if cap is not None and base > cap:
            raise ResourceCap(f"generator count {base} exceeds cap {cap}")

        def new_index(oi: int, m: int, si: int, mu: int) -> int:
            o = old_objs[oi]
            no = piece_index[(oi, si)]
            nm = m | (mu << o.nrows) if summands[si][0] is not None else m
            return no.base + nm

        gen_geo = {}  # old global gen -> (oi, m, parity)
        for oi, o in enumerate(old_objs):
            for m in range(o.rank):
                gen_geo[o.base + m] = (oi, m, o.gen_bidegree(m)[0] & 1)

        d = {}
        # old entries, copied diagonally over the piece states
        for (t, s), p in old_d.items():
            ot, mt, _ = gen_geo[t]
            os_, ms, _ = gen_geo[s]
            for si, (row, sh) in enumerate(summands):
                rng = [0, 1] if row is not None else [0]
                for mu in rng:
                    key = (new_index(ot, mt, si, mu), new_index(os_, ms, si, mu))
                    d[key] = d.get(key, Poly.zero(self.dom, self.nvars)) + p
        # piece entries (vertical + saddles) with state-parity signs; the
        # vertical sign also carries the summand shift parity so that the
        # materialized vertical equals the Koszul convention of the object
        for g, (oi, m, par) in gen_geo.items():
            sgn = -1 if par else 1
            for si, (row, sh) in enumerate(summands):
                if row is not None:
                    a, b = row
                    vsgn = -sgn if sh[0] % 2 else sgn
                    if not b.is_zero():
                        key = (new_index(oi, m, si, 1), new_index(oi, m, si, 0))
                        d[key] = d.get(key, Poly.zero(self.dom, self.nvars)) + b.scale(vsgn)
                    if not a.is_zero():
                        key = (new_index(oi, m, si, 0), new_index(oi, m, si, 1))
                        d[key] = d.get(key, Poly.zero(self.dom, self.nvars)) + a.scale(vsgn)
            for (sf, gf, st, gt, p) in saddles:
                key = (new_index(oi, m, st, gt), new_index(oi, m, sf, gf))
                d[key] = d.get(key, Poly.zero(self.dom, self.nvars)) + p.scale(sgn)
        d = {k: v for k, v in d.items() if not v.is_zero()}
        self.objs = news
        self._set_bases()
        self.w = self.w + w_piece
        self.C = MultiFact(self.dom, self.nvars, self.w, self.C.gens, {})
        # gens list rebuilt from objects
        gens = []
        for o in self.objs:
            for m in range(o.rank):
                gens.append(o.gen_bidegree(m))
        self.C = MultiFact(self.dom, self.nvars, self.w, gens, d)

    # -- basis change (within one object) --------------------------------

    def basis_change(self, oi: int, i: int, j: int, lam: Poly, kind: str, phi=None):
        """Apply a Koszul row move to object oi; conjugates the state.

        Returns the transported phi (if given).
        """
        o = self.objs[oi]
        rows = [list(r) for r in o.rows]
        if kind == "row":
            rows[j][0] = rows[j][0] + lam * rows[i][0]
            rows[i][1] = rows[i][1] - lam * rows[j][1]

            def nmask(m):
                if (m >> j & 1) and not (m >> i & 1):
                    return (m & ~(1 << j)) | (1 << i)
                return None
        elif kind == "mixed":
            rows[i][1] = rows[i][1] - lam * rows[j][0]
            rows[j][1] = rows[j][1] + lam * rows[i][0]

            def nmask(m):
                if not (m >> j & 1) and not (m >> i & 1):
                    return m | (1 << i) | (1 << j)
                return None
        else:
            raise ValueError(kind)
        # U = 1 - lam*N ; conjugate D and phi by U (flag-adjusted)
        ff = o.flags[i] * o.flags[j]
        lam = lam.scale(ff)
        one = Poly.const(self.dom, self.nvars, 1)

        def ucol(g: int) -> Vec:
            out = {g: one}
            if o.base <= g < o.base + o.rank:
                m2 = nmask(g - o.base)
                if m2 is not None:
                    out[o.base + m2] = -lam
            return out

        def uinvcol(g: int) -> Vec:
            out = {g: one}
            if o.base <= g < o.base + o.rank:
                m2 = nmask(g - o.base)
                if m2 is not None:
                    out[o.base + m2] = lam
            return out

        def conj(entries: dict) -> dict:
            cols: dict[int, Vec] = {}
            for (t, s), p in entries.items():
                cols.setdefault(s, {})[t] = p
            out = {}
            for s in range(self.rank):
                # column of U D U^-1 at s
                v = uinvcol(s)
                img: Vec = {}
                for g, c in v.items():
                    img = vec_add(img, vec_scale(cols.get(g, {}), c))
                res: Vec = {}
                for g, c in img.items():
                    res = vec_add(res, vec_scale(ucol(g), c))
                for t, c in res.items():
                    if not c.is_zero():
                        out[(t, s)] = c
            return out

        newd = conj(self.C.d)
        o.rows = [tuple(r) for r in rows]
        self.C = MultiFact(self.dom, self.nvars, self.w, self.C.gens, newd)
        if phi is not None:
            return conj(phi)
        return None

    def negate_row_e(self, oi: int, k: int, phi=None):
        """Negate the e generator of row k (flips b_k and incident entries)."""
        o = self.objs[oi]
        a, b = o.rows[k]
        o.rows[k] = (-a, -b)

        def flip(entries):
            out = {}
            for (t, s), p in entries.items():
                ft = o.base <= t < o.base + o.rank and (t - o.base) >> k & 1
                fs = o.base <= s < o.base + o.rank and (s - o.base) >> k & 1
                out[(t, s)] = -p if (ft != fs) else p
            return out

        self.C = MultiFact(self.dom, self.nvars, self.w, self.C.gens, flip(self.C.d))
        if phi is not None:
            return flip(phi)
        return None

    # -- variable elimination --------------------------------------------

    def plan_kill(self, slot: int):
        """Choose a mechanism per object for removing variable `slot`.

        Returns list of ('id'|'linex'|'sqex', data) aligned with objects.
        Raises KillBlocked when some object cannot expose the variable.
        """
        plans = []
        x = Poly.var(self.dom, self.nvars, slot)
        for oi, o in enumerate(self.objs):
            in_rows = any(
                a.mentions(slot) or b.mentions(slot) for a, b in o.rows
            )
            if not in_rows:
                plans.append(("id", None))
                continue
            pick = None
            for k, (a, b) in enumerate(o.rows):
                if not a.mentions(slot):
                    continue
                try:
                    c = a.coeff_of_var(slot)
                except ValueError:
                    raise KillBlocked(f"obj {oi}: nonlinear a-entry in row {k}")
                if c is None:
                    continue
                if self.dom.is_unit(c):
                    pick = ("linex", (k, c))
                    break
            if pick is None:
                # try a quadratic row: a = 0, b monic-ish quadratic in x
                for k, (a, b) in enumerate(o.rows):
                    if a.is_zero() and b.mentions(slot) and b.max_exp(slot) == 2:
                        others_clean = all(
                            not (a2.mentions(slot) or b2.mentions(slot))
                            for k2, (a2, b2) in enumerate(o.rows)
                            if k2 != k
                        )
                        if others_clean:
                            pick = ("sqex", k)
                            break
            if pick is None:
                raise KillBlocked(f"obj {oi}: variable x{slot} not exposed")
            plans.append(pick)
        return plans

    def kill(self, slot: int, phi=None, check: bool = False):
        """Eliminate variable `slot` from the whole state.

        Every object must expose the variable: either some row has a-entry
        +-(x - r) (row removed, x := r substituted), or some row is
        (0, +-((x-u)^2 + h)) with the object's other rows clean (the module
        doubles into internal shifts -1 and +1).  Entries elsewhere may
        mention x freely; the perturbation series folds them in.

        Returns (step, phi') and compacts the variable slot away.
        """
        plans = self.plan_kill(slot)
        dom, nv = self.dom, self.nvars
        x = Poly.var(dom, nv, slot)
        one = Poly.const(dom, nv, 1)

        # normalize sqex rows to monic +(y^2 + h)
        for oi, (kind, data) in enumerate(plans):
            if kind != "sqex":
                continue
            o = self.objs[oi]
            k = data
            b = o.rows[k][1]
            coeff2 = None
            for e, c in b.terms.items():
                if e[slot] == 2 and sum(e) == 2:
                    coeff2 = c
            if coeff2 is None or not dom.is_unit(coeff2):
                raise KillBlocked(f"obj {oi}: quadratic row not unital in x{slot}")
            if coeff2 == dom.of_int(-1):
                if phi is not None:
                    phi = self.negate_row_e(oi, k, phi)
                else:
                    self.negate_row_e(oi, k)
            elif coeff2 != dom.of_int(1):
                raise KillBlocked(f"obj {oi}: x{slot}^2 coefficient {coeff2}")

        # per-object reduction data
        new_objs = []
        obj_plan = []
        for oi, (kind, data) in enumerate(plans):
            o = self.objs[oi]
            if kind == "id":
                no = Obj(rows=list(o.rows), shift=o.shift, flags=list(o.flags))
                obj_plan.append(("id", o, [no], None))
                new_objs.append(no)
            elif kind == "linex":
                k, c = data
                a, b = o.rows[k]
                # a = c*x + rest, c unit: x - r := inv(c)*a, r = x - inv(c)*a
                cinv = dom.inv(c)
                r = x - a.scale(cinv)
                rows2 = [
                    (
                        a2.substitute(slot, r),
                        b2.substitute(slot, r),
                    )
                    for k2, (a2, b2) in enumerate(o.rows)
                    if k2 != k
                ]
                flags2 = [f for k2, f in enumerate(o.flags) if k2 != k]
                no = Obj(rows=rows2, shift=o.shift, flags=flags2)
                obj_plan.append(("linex", o, [no], (k, c, r)))
                new_objs.append(no)
            else:  # sqex
                k = data
                a, b = o.rows[k]
                # b = x^2 + c1*x + c0, write as (x-u)^2 + h
                c1 = Poly.zero(dom, nv)
                c0 = Poly.zero(dom, nv)
                for e, cc in b.terms.items():
                    if e[slot] == 2:
                        if sum(e) != 2:
                            raise KillBlocked("quadratic row has mixed x^2 term")
                    elif e[slot] == 1:
                        le = list(e)
                        le[slot] = 0
                        c1 = c1 + Poly(dom, nv, {tuple(le): cc})
                    else:
                        c0 = c0 + Poly(dom, nv, {e: cc})
                if dom is not None and any(
                    isinstance(cc, int) and cc % 2 for cc in c1.terms.values()
                ):
                    raise KillBlocked("cannot complete the square over ZZ")
                half = {e: (cc // 2 if isinstance(cc, int) else cc / 2)
                        for e, cc in c1.terms.items()}
                e_half = Poly(dom, nv, half)
                u = -e_half
                h = c0 - e_half * e_half
                rows2 = [r2 for k2, r2 in enumerate(o.rows) if k2 != k]
                flags2 = [f for k2, f in enumerate(o.flags) if k2 != k]
                lo = Obj(rows=list(rows2), shift=(o.shift[0] - 1, o.shift[1]),
                         flags=list(flags2))
                hi = Obj(rows=list(rows2), shift=(o.shift[0] + 1, o.shift[1]),
                         flags=list(flags2))
                obj_plan.append(("sqex", o, [lo, hi], (k, u, h)))
                new_objs.append(lo)
                new_objs.append(hi)

        base = 0
        for o in new_objs:
            o.base = base
            base += o.rank

        # vertical part being cancelled: the chosen rows' own entries
        vk_cols: dict[int, Vec] = {}
        for kind, o, _, data in obj_plan:
            if kind == "id":
                continue
            k = data[0]
            for t, s, p in _vertical_entries_row_only(o, k):
                vk_cols.setdefault(o.base + s, {})[o.base + t] = p
        d1_cols: dict[int, Vec] = {}
        for (t, s), p in self.C.d.items():
            sub = vk_cols.get(s, {}).get(t)
            q = p if sub is None else p - sub
            if not q.is_zero():
                d1_cols.setdefault(s, {})[t] = q

        # assemble p0 / i0 / h0
        def mask_drop(m: int, k: int) -> int:
            low = m & ((1 << k) - 1)
            highpart = (m >> (k + 1)) << k
            return low | highpart

        def mask_insert(m: int, k: int, bit: int) -> int:
            low = m & ((1 << k) - 1)
            highpart = (m >> k) << (k + 1)
            return low | highpart | (bit << k)

        def tau(o: Obj, k: int, m_old: int) -> int:
            # (-1)^{# chosen rows strictly above k} (old-mask indexing)
            cnt = bin(m_old >> (k + 1)).count("1")
            return -1 if cnt % 2 else 1

        def sigma(o: Obj, k: int, m: int) -> int:
            return o.row_sign(k, m)

        def i0(gnew: int) -> Vec:
            for (kind, o, nos, data) in obj_plan:
                for ci, no in enumerate(nos):
                    if no.base <= gnew < no.base + no.rank:
                        m = gnew - no.base
                        if kind == "id":
                            return {o.base + m: one}
                        if kind == "linex":
                            k = data[0]
                            return {o.base + mask_insert(m, k, 0): one}
                        k, u, h = data
                        mold = mask_insert(m, k, 1)
                        t = tau(o, k, mold)
                        if ci == 0:  # lo copy ~ y * e
                            return {o.base + mold: (x - u).scale(t)}
                        return {o.base + mold: one.scale(t)}
            raise IndexError(gnew)

        old_objs = list(self.objs)
        plan_of_obj = {id(o): (kind, o, nos, data) for (kind, o, nos, data) in obj_plan}

        def obj_of(g: int):
            for o in old_objs:
                if o.base <= g < o.base + o.rank:
                    return o, g - o.base
            raise IndexError(g)

        def p0(v: Vec) -> Vec:
            out: Vec = {}
            for g, c in v.items():
                o, m = obj_of(g)
                kind, _, nos, data = plan_of_obj[id(o)]
                if kind == "id":
                    out = vec_add(out, {nos[0].base + m: c})
                elif kind == "linex":
                    k, cu, r = data
                    if not (m >> k & 1):
                        out = vec_add(
                            out,
                            {nos[0].base + mask_drop(m, k): c.substitute(slot, r)},
                        )
                else:
                    k, u, h = data
                    if m >> k & 1:
                        al, be = _quad_reduce_shifted(c, slot, u, h)
                        mnew = mask_drop(m, k)
                        t = tau(o, k, m)
                        if not al.is_zero():
                            out = vec_add(out, {nos[0].base + mnew: al.scale(t)})
                        if not be.is_zero():
                            out = vec_add(out, {nos[1].base + mnew: be.scale(t)})
            return out

        def h0(v: Vec) -> Vec:
            out: Vec = {}
            for g, c in v.items():
                o, m = obj_of(g)
                kind, _, nos, data = plan_of_obj[id(o)]
                if kind == "id":
                    continue
                if kind == "linex":
                    k, cu, r = data
                    if not (m >> k & 1):
                        q, rem = c.divmod_linear(slot, r)
                        if not q.is_zero():
                            coef = dom.mul(dom.of_int(sigma(o, k, m)), dom.inv(cu))
                            out = vec_add(out, {o.base + (m | (1 << k)): q.scale(coef)})
                else:
                    k, u, h = data
                    if m >> k & 1:
                        q = _quad_quotient_shifted(c, slot, u, h)
                        if not q.is_zero():
                            s = sigma(o, k, m)
                            out = vec_add(out, {o.base + (m & ~(1 << k)): q.scale(s)})
            return out

        def d0p(gnew: int) -> Vec:
            return {}

        small_gens = []
        for o in new_objs:
            for m in range(o.rank):
                small_gens.append(o.gen_bidegree(m))
        # potential after the kill (substitution must leave it unchanged for
        # interior variables; allow the general ring map anyway)
        w_new = self.w
        if w_new.mentions(slot):
            raise KillBlocked("potential mentions the dying variable")

        small, step = perturb(
            self.C, small_gens, w_new, p0, i0, h0, d0p, d1_cols,
            max_iter=4 * (len({b for _, b in self.C.gens}) + 2),
        )

        phi_new = None
        if phi is not None:
            f = LinOp.from_matrix(self.C, self.C, phi)
            phi_new = step.transport(f).matrix()

        # compact the dead slot away
        for p in small.d.values():
            if p.mentions(slot):
                raise AssertionError("variable survived its own elimination")
        name = self.vt.names[slot]
        self.vt = self.vt.drop(name)
        newd = {k: p.drop_slot(slot) for k, p in small.d.items()}
        self.w = w_new.drop_slot(slot)
        for o in new_objs:
            o.rows = [
                (a.drop_slot(slot), b.drop_slot(slot)) for a, b in o.rows
            ]
        self.objs = new_objs
        self._set_bases()
        self.C = MultiFact(self.dom, self.vt.n, self.w, small.gens, newd)
        if phi_new is not None:
            phi_new = {k: p.drop_slot(slot) for k, p in phi_new.items()
                       if not p.is_zero()}
        if check:
            bad = self.C.verify()
            if bad:
                raise AssertionError(f"kill broke the state: {bad[:3]}")
        return step, phi_new

    # -- gaussian pass on unit entries ------------------------------------

    def gauss_once(self, phi=None, max_bucket: int = 1):
        """Cancel one unit constant entry between row-free generators.

        Only entries in buckets 0..max_bucket are touched, and a candidate
        is skipped unless every correction term lands in a valid bucket.
        Returns (True, phi') when something was cancelled.
        """
        rowfree = set()
        for o in self.objs:
            if o.nrows == 0:
                rowfree.add(o.base)
        cand = []
        for (t, s), p in self.C.d.items():
            if t in rowfree and s in rowfree and p.unit_constant() is not None:
                b = self.C.bucket(t, s)
                if 0 <= b <= max_bucket:
                    cand.append((b, t, s))
        cand.sort()
        for b, t, s in cand:
            ok = True
            for (y, s2), p in self.C.d.items():
                if s2 != s or y == t:
                    continue
                for (t2, xg), q in self.C.d.items():
                    if t2 != t or xg == s:
                        continue
                    nb = self.C.bucket(y, s) + self.C.bucket(t, xg) - b
                    if nb < 0:
                        ok = False
                        break
                    if nb == 0 and not (y in rowfree and xg in rowfree):
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                continue
            return True, self._apply_gauss(s, t, phi)
        return False, phi

    def _apply_gauss(self, s: int, t: int, phi):
        from .complexes import gauss_eliminate

        small, step = gauss_eliminate(self.C, s, t)
        phi_new = None
        if phi is not None:
            f = LinOp.from_matrix(self.C, self.C, phi)
            phi_new = step.transport(f).matrix()
        # rebuild objects: the two cancelled generators sat in row-free objects
        rebuilt = []
        for o in self.objs:
            gs = [o.base + m for m in range(o.rank)]
            if s in gs or t in gs:
                if o.nrows != 0:
                    raise AssertionError("gauss touched a structured object")
                continue
            rebuilt.append(o)
        self.objs = rebuilt
        self._set_bases()
        self.C = small
        self.w = small.w
        return phi_new

    def gauss_pass(self, phi=None, max_bucket: int = 1):
        changed = True
        while changed:
            changed, phi = self.gauss_once(phi, max_bucket)
        return phi

    # -- folding ----------------------------------------------------------

    def fold_all(self):
        """Forget row structure: every generator becomes a rank-1 object."""
        new_objs = []
        for o in self.objs:
            for m in range(o.rank):
                new_objs.append(Obj(rows=[], shift=o.gen_bidegree(m)))
        self.objs = new_objs
        self._set_bases()
        # C unchanged (same gens, same differential)


def _vertical_entries_row_only(obj: Obj, k: int):
    n = obj.nrows
    a, b = obj.rows[k]
    for m in range(1 << n):
        sign = obj.row_sign(k, m)  # flag convention
        if m >> k & 1:
            if not a.is_zero():
                yield (m & ~(1 << k), m, a.scale(sign))
        else:
            if not b.is_zero():
                yield (m | (1 << k), m, b.scale(sign))


def _quad_reduce_shifted(c: Poly, slot: int, u: Poly, h: Poly):
    """alpha, beta with c = q*((x-u)^2 + h) + alpha*(x-u) + beta."""
    x = Poly.var(c.dom, c.nvars, slot)
    shifted = c.substitute(slot, x + u)
    return shifted.quad_reduce(slot, h)


def _quad_quotient_shifted(c: Poly, slot: int, u: Poly, h: Poly) -> Poly:
    x = Poly.var(c.dom, c.nvars, slot)
    shifted = c.substitute(slot, x + u)
    al, be = shifted.quad_reduce(slot, h)
    num = shifted - al * x - be
    q, rem = _divmod_monic_quad(num, slot, h)
    if not rem.is_zero():
        raise AssertionError("quadratic division left a remainder")
    return q.substitute(slot, x - u)


def _divmod_monic_quad(c: Poly, slot: int, h: Poly):
    dom, nv = c.dom, c.nvars
    x = Poly.var(dom, nv, slot)
    modp = x * x + h
    rem = c
    q = Poly.zero(dom, nv)
    while rem.max_exp(slot) >= 2:
        d = rem.max_exp(slot)
        lead = {}
        for e, cc in rem.terms.items():
            if e[slot] == d:
                le = list(e)
                le[slot] = d - 2
                lead[tuple(le)] = cc
        leadp = Poly(dom, nv, lead)
        q = q + leadp
        rem = rem - leadp * modp
    return q, rem
