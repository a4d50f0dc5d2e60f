"""Assembly engine: tensor elementary pieces one at a time, simplifying
after every step.

The state is a sum of Koszul objects (rowstate.RowState).  After each
crossing is tensored on, every region of the diagram that has just become
interior gets its variable eliminated: Koszul row moves expose the variable
in each object (as a linear entry, or as a quadratic one on a closed loop),
and the elimination or delooping retract is lifted through the
filtration-raising differentials.  Unit entries between row-free
generators are then cancelled.  All steps are deformation retracts or
isomorphisms up to one filtration level, so the second spectral-sequence
page onward, the total homology, and the basepoint action survive.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass, field

from .ring import ZZ, Poly, VarTable
from .diagrams import Diagram, DiagramError
from .pieces import POS, NEG, piece_summands
from .rowstate import KillBlocked, Obj, ResourceCap, RowState


DEFAULT_CAP = 1 << 20


@dataclass
class ScanConfig:
    cap: int = DEFAULT_CAP
    seed: int = 0
    check: bool = False  # verify D^2 = w after every step


@dataclass
class ScannedComplex:
    """Fully reduced filtered complex, over Z or Z[x].

    Entries are polynomials in the surviving basepoint variable (none for
    the reduced theory).  The global filtration shift by -n_minus has been
    applied.  `phi` names the basepoint action: multiplication by x.
    """

    gens: list  # (internal, filtration)
    d: dict  # (t, s) -> Poly
    nvars: int  # 0 or 1
    n_minus: int
    reduced: bool

    @property
    def rank(self):
        return len(self.gens)

    def entry_int(self, t, s):
        p = self.d.get((t, s))
        if p is None:
            return 0
        return p.constant_term()

    def buckets(self):
        return sorted({self.gens[t][1] - self.gens[s][1] for (t, s) in self.d})


def choose_order(d: Diagram, seed: int = 0):
    """Greedy crossing order minimizing the open-edge frontier."""
    n = d.n
    if n == 0:
        return []
    slots = d.edge_slots()
    rng = random.Random(seed)
    edges_of = [set(cr) for cr in d.crossings]
    best_order = None
    best_cost = None
    starts = list(range(n))
    for start in starts[: min(n, 8)]:
        used = {start}
        order = [start]
        frontier = set(edges_of[start])
        cost = (len(frontier), 1)
        total = len(frontier)
        while len(used) < n:
            cands = []
            for ci in range(n):
                if ci in used:
                    continue
                shared = len(edges_of[ci] & frontier)
                if shared == 0:
                    continue
                newf = len(frontier ^ edges_of[ci])
                cands.append((newf, -shared, ci))
            if not cands:
                cands = [
                    (len(frontier | edges_of[ci]), 0, ci)
                    for ci in range(n)
                    if ci not in used
                ]
            cands.sort()
            _, _, ci = cands[0]
            used.add(ci)
            order.append(ci)
            frontier ^= edges_of[ci]
            total = max(total, len(frontier))
        if best_cost is None or total < best_cost:
            best_cost = total
            best_order = order
    return best_order


def _expose(state: RowState, slot: int, phi=None):
    """Koszul row moves making `slot` eliminable in every object."""
    dom, nv = state.dom, state.nvars
    for oi, o in enumerate(state.objs):
        # combine rows whose a-entries mention the variable
        guard = 0
        while True:
            guard += 1
            if guard > 4 * (o.nrows + 1):
                break
            rows_ax = []
            for k, (a, b) in enumerate(o.rows):
                if a.mentions(slot):
                    try:
                        c = a.coeff_of_var(slot)
                    except ValueError:
                        raise KillBlocked(f"nonlinear a-entry for x{slot}")
                    rows_ax.append((k, c))
            if len(rows_ax) >= 2:
                (k1, c1), (k2, c2) = rows_ax[0], rows_ax[1]
                if c2 % c1 == 0:
                    lam = Poly.const(dom, nv, -(c2 // c1))
                    phi = state.basis_change(oi, k1, k2, lam, "row", phi)
                elif c1 % c2 == 0:
                    lam = Poly.const(dom, nv, -(c1 // c2))
                    phi = state.basis_change(oi, k2, k1, lam, "row", phi)
                else:
                    break
                continue
            if len(rows_ax) == 1:
                break  # linex will handle it; substitution cleans the rest
            # no a-entry carries x: concentrate the b-entries
            rows_bx = [
                k for k, (a, b) in enumerate(o.rows) if b.mentions(slot)
            ]
            if len(rows_bx) == 1:
                k = rows_bx[0]
                a, b = o.rows[k]
                if a.is_zero() and b.max_exp(slot) == 2:
                    phi = _evenize(state, oi, k, slot, phi)
                break
            if len(rows_bx) == 0:
                break
            progressed = False
            for i in rows_bx:
                for j in rows_bx:
                    if i == j:
                        continue
                    ai, bi = o.rows[i]
                    aj, bj = o.rows[j]
                    lam = _proportional(aj, ai)
                    if lam is None:
                        continue
                    # move makes a_j zero and b_i gains lam^-1... use the
                    # row move with source i: a_j += (-lam) a_i kills a_j,
                    # b_i -= (-lam) b_j = b_i + lam b_j
                    newb = bi + bj.scale(lam)
                    if newb.mentions(slot):
                        continue
                    lam_p = Poly.const(dom, nv, -lam)
                    phi = state.basis_change(oi, i, j, lam_p, "row", phi)
                    progressed = True
                    break
                if progressed:
                    break
            if not progressed:
                break
    return phi


def _evenize(state: RowState, oi: int, k: int, slot: int, phi=None):
    """Make the x-linear coefficient of the quadratic row even.

    Subtracting (mu * x) * a_j from b_k via the mixed row move shifts the
    linear coefficient by mu * a_j without touching anything else (the
    quadratic row has a = 0, so the move has no side effect).
    """
    dom, nv = state.dom, state.nvars
    o = state.objs[oi]
    b = o.rows[k][1]
    c1 = {}
    for e, c in b.terms.items():
        if e[slot] == 1:
            le = list(e)
            le[slot] = 0
            c1[tuple(le)] = c
    if all(c % 2 == 0 for c in c1.values()):
        return phi
    c1p = Poly(dom, nv, c1)
    x = Poly.var(dom, nv, slot)
    for j, (aj, bj) in enumerate(o.rows):
        if j == k or aj.is_zero() or aj.mentions(slot):
            continue
        for mu in (1, -1):
            cand = c1p - aj.scale(mu)
            if all(c % 2 == 0 for c in cand.terms.values()):
                lam = x.scale(mu)
                return state.basis_change(oi, k, j, lam, "mixed", phi)
    return phi


def _proportional(u: Poly, v: Poly):
    """Integer lam with u = lam * v, if one exists (v != 0)."""
    if v.is_zero():
        return None
    try:
        (e0, c0) = next(iter(v.terms.items()))
    except StopIteration:
        return None
    c1 = u.terms.get(e0)
    if c1 is None or c1 % c0 != 0:
        return None
    lam = c1 // c0
    if u == v.scale(lam):
        return lam
    return None


def scan(d: Diagram, reduced: bool, config: ScanConfig | None = None):
    """Scan a diagram into a fully reduced filtered complex.

    For a knot: the reduced flavor returns a complex over Z; the unreduced
    one keeps a single variable (the basepoint region) and the action is
    multiplication by it.  Extra crossingless circles are chained on with
    quadratic rows as for planar unlinks.
    """
    config = config or ScanConfig()
    order = choose_order(d, config.seed)
    faces, corner_face = d.faces() if d.n else ([], {})
    nfaces = len(faces)

    # choose gauge and basepoint faces at the last crossing
    if d.n:
        last = order[-1]
        gauge = corner_face[(last, 0)]
        bp = corner_face[(last, 1)]
        if gauge == bp:
            bp = corner_face[(last, 2)]
        if gauge == bp:
            raise DiagramError("degenerate face structure at basepoint")
    else:
        gauge = bp = None

    # variables: all faces except gauge; reduced also drops bp
    names = []
    for f in range(nfaces):
        if f == gauge:
            continue
        if reduced and f == bp:
            continue
        names.append(f"f{f}")
    # circles get one variable each (their interiors)
    ncirc = d.circles
    circ_names = [f"c{i}" for i in range(ncirc)]
    if reduced and d.n == 0 and ncirc:
        circ_names = circ_names[1:]  # basepoint circle variable is killed
    vt = VarTable(tuple(names + circ_names))
    nv = vt.n

    def face_poly(f):
        nm = f"f{f}"
        if nm in state.vt:
            return Poly.var(ZZ, state.vt.n, state.vt.slot(nm))
        return Poly.zero(ZZ, state.vt.n)

    state = RowState(ZZ, vt, [Obj(rows=[], shift=(0, 0))], {},
                     Poly.zero(ZZ, nv))
    phi = None

    remaining = [len(faces[f]) for f in range(nfaces)]
    pending = []

    def try_kill(slot_name):
        nonlocal phi
        if slot_name not in state.vt:
            return True
        slot = state.vt.slot(slot_name)
        if slot not in state.live_slots():
            # unused variable: drop it silently
            _drop_unused(state, slot)
            return True
        try:
            phi2 = _expose(state, slot, phi)
            step, phi3 = state.kill(slot, phi2, check=config.check)
            phi = phi3 if phi2 is not None else None
            return True
        except KillBlocked:
            return False

    for ci in order:
        quad = tuple(face_poly(corner_face[(ci, k)]) for k in range(4))
        # in the slot frame pinned to the incoming under-strand, the
        # filtration-0 resolution is the (1,3)-diagonal for either sign;
        # handedness lives in the corner-face structure and the n- shift
        kind = NEG
        summands, saddles, w = piece_summands(kind, quad)
        state.tensor_piece(summands, saddles, w, cap=config.cap)
        if config.check:
            bad = state.C.verify()
            if bad:
                raise AssertionError(f"state broken after crossing {ci}: {bad[:3]}")
        newly = []
        for k in range(4):
            f = corner_face[(ci, k)]
            remaining[f] -= 1
        for f in range(nfaces):
            if remaining[f] == 0:
                remaining[f] = -1  # process once
                if f == gauge or (f == bp):
                    continue
                newly.append(f)
        work = pending + [f"f{f}" for f in newly]
        pending = []
        for nm in sorted(set(work)):
            if not try_kill(nm):
                pending.append(nm)
        phi = state.gauss_pass(phi)

    # resolve stragglers
    again = True
    guard = 0
    while pending and again and guard < 2 * len(pending) + 4:
        guard += 1
        again = False
        still = []
        for nm in pending:
            if try_kill(nm):
                again = True
            else:
                still.append(nm)
        pending = still
        phi = state.gauss_pass(phi)

    # crossingless circles
    if ncirc and d.n == 0:
        # pure unlink: chain of quadratic rows between consecutive circles;
        # the variables are the output, nothing gets killed
        def circ_poly(i):
            nm = f"c{i}"
            if nm in state.vt:
                return Poly.var(ZZ, state.vt.n, state.vt.slot(nm))
            return Poly.zero(ZZ, state.vt.n)

        for i in range(1, ncirc):
            b = circ_poly(i) * circ_poly(i) - circ_poly(i - 1) * circ_poly(i - 1)
            state.tensor_piece(
                [((Poly.zero(ZZ, state.vt.n), b), (0, 0))],
                [], Poly.zero(ZZ, state.vt.n), cap=config.cap)
    elif ncirc:
        # split circles beside a diagram with crossings: attach each to the
        # basepoint region and deloop it away
        for i in range(ncirc):
            nm = f"c{i}"
            anchor = Poly.zero(ZZ, state.vt.n)
            if not reduced and f"f{bp}" in state.vt:
                anchor = Poly.var(ZZ, state.vt.n, state.vt.slot(f"f{bp}"))
            cur = Poly.var(ZZ, state.vt.n, state.vt.slot(nm))
            b = cur * cur - anchor * anchor
            state.tensor_piece(
                [((Poly.zero(ZZ, state.vt.n), b), (0, 0))],
                [], Poly.zero(ZZ, state.vt.n), cap=config.cap)
            if not try_kill(nm):
                raise KillBlocked(f"split circle {nm} could not be delooped")
        phi = state.gauss_pass(phi)

    state.fold_all()
    phi = state.gauss_pass(phi)

    live = {state.vt.names[s] for s in state.live_slots()}
    keep = set()
    if not reduced and d.n:
        keep = {f"f{bp}"}
    elif d.n == 0 and ncirc:
        keep = set(state.vt.names)  # unlink output keeps its variables
    extra = live - keep
    if extra:
        raise KillBlocked(f"variables survived the scan: {sorted(extra)}")
    # compact away any dead slots
    for nm in list(state.vt.names):
        if nm not in keep and nm in state.vt:
            _drop_unused(state, state.vt.slot(nm))

    gens = [(i, f - d.n_minus) for (i, f) in state.C.gens]
    return ScannedComplex(
        gens=gens,
        d=dict(state.C.d),
        nvars=state.vt.n,
        n_minus=d.n_minus,
        reduced=reduced,
    )


def _drop_unused(state: RowState, slot: int):
    name = state.vt.names[slot]
    state.vt = state.vt.drop(name)
    state.w = state.w.drop_slot(slot)
    newd = {k: p.drop_slot(slot) for k, p in state.C.d.items()}
    for o in state.objs:
        o.rows = [(a.drop_slot(slot), b.drop_slot(slot)) for a, b in o.rows]
    from .complexes import MultiFact

    state.C = MultiFact(state.dom, state.vt.n, state.w, state.C.gens, newd)
