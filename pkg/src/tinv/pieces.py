"""Local factorizations for the four basic tangle pieces and a dotted arc.

A piece sees four region variables (v0, v1, v2, v3) read counterclockwise
from its marked corner.  Writing q = v1 - v2 + v3 - v0, the local potential
is w = (v0 - v2)(v1 - v3)q, and the two planar pieces are the rank-2
factorizations

    row0 = (v0 - v2, (v1 - v3) q)        row1 = (v1 - v3, (v0 - v2) q)

A crossing is a cone on the saddle between them: the positive one has row0
at filtration 0 (internal shift +1) and row1 at filtration 1 (shift -1),
the negative one the other way around.  A dotted arc placed with its sides
at v0 and v2 is the same rank-2 factorization as row0.
"""

from __future__ import annotations

from .ring import Domain, Poly
from .rowstate import Obj, RowState
from .complexes import MultiFact

P0, P1, POS, NEG, ARC = "P0", "P1", "POS", "NEG", "ARC"


def local_q(quad) -> Poly:
    v0, v1, v2, v3 = quad
    return v1 - v2 + v3 - v0


def local_potential(quad) -> Poly:
    v0, v1, v2, v3 = quad
    return (v0 - v2) * (v1 - v3) * local_q(quad)


def planar_rows(quad):
    v0, v1, v2, v3 = quad
    q = local_q(quad)
    return (v0 - v2, (v1 - v3) * q), (v1 - v3, (v0 - v2) * q)


def piece_summands(kind: str, quad):
    """(summands, saddles, w) in the form RowState.tensor_piece expects."""
    row0, row1 = planar_rows(quad)
    q = local_q(quad)
    dom, nv = q.dom, q.nvars
    minus_one = Poly.const(dom, nv, -1)
    if kind in (P0, ARC):
        return [(row0, (0, 0))], [], local_potential(quad)
    if kind == P1:
        return [(row1, (0, 0))], [], local_potential(quad)
    if kind == POS:
        summands = [(row0, (1, 0)), (row1, (-1, 1))]
    elif kind == NEG:
        summands = [(row1, (1, 0)), (row0, (-1, 1))]
    else:
        raise ValueError(kind)
    # saddle: e of summand 0 -> f of summand 1 with -1; f -> e with q
    saddles = [
        (0, 1, 1, 0, minus_one),
        (0, 0, 1, 1, q),
    ]
    return summands, saddles, local_potential(quad)


def elementary(dom: Domain, vt, kind: str, quad) -> MultiFact:
    """Standalone factorization of one piece (generators f, e per summand)."""
    nv = quad[0].nvars
    st = RowState(dom, vt, [Obj(rows=[], shift=(0, 0))], {},
                  Poly.zero(dom, nv))
    summands, saddles, w = piece_summands(kind, quad)
    st.tensor_piece(summands, saddles, w)
    return st.C


def saddle_map(quad, direction: str):
    """Matrix of the elementary saddle as a map K(row_src) -> K(row_tgt){1}.

    Generators indexed 0 = f, 1 = e on both sides.  Satisfies
    s d_src + d_tgt s = 0 against the unshifted Koszul differentials.
    """
    q = local_q(quad)
    dom, nv = q.dom, q.nvars
    if direction not in ("01", "10"):
        raise ValueError(direction)
    return {
        (0, 1): Poly.const(dom, nv, -1),  # e -> f
        (1, 0): q,  # f -> e
    }


def identity_like_maps(quad):
    """The degree-(−1,·) comparison maps between the two planar pieces.

    I01: K(row0) -> K(row1) and I10: K(row1) -> K(row0), both with unit
    entries on f -> f and e -> e.
    """
    dom, nv = quad[0].dom, quad[0].nvars
    one = Poly.const(dom, nv, 1)
    return {(0, 0): one, (1, 1): one}


def crossing_change_maps(quad):
    """c_plus: C(NEG piece) -> C(POS piece) and c_minus back.

    Generators ordered (f, e) of summand 0 then summand 1 on both sides, so
    NEG = (f,e of row1 at filt 0; f,e of row0 at filt 1) and POS = (f,e of
    row0 at filt 0; f,e of row1 at filt 1).  Each map sends generators to
    the generators of the same planar type with unit coefficient, plus one
    multiplication component; c_plus is filtered, c_minus lowers the
    filtration by at most 2.
    """
    v0, v1, v2, v3 = quad
    dom, nv = v0.dom, v0.nvars
    one = Poly.const(dom, nv, 1)
    u = v0 - v1 - v2 + v3
    cplus = {
        (0, 0): one, (1, 1): one,   # unit maps, summand 0 to summand 0
        (0, 2): u, (1, 3): u,       # multiplication, summand 1 to summand 0
        (2, 2): one, (3, 3): one,   # unit maps, summand 1 to summand 1
    }
    cminus = {
        (0, 0): one, (1, 1): one,
        (0, 2): -u, (1, 3): -u,
        (2, 2): one, (3, 3): one,
    }
    return cplus, cminus
