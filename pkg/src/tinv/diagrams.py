"""Planar diagram combinatorics: PD codes, braid closures, faces, colorings.

Crossings are 4-tuples of 1-based edge labels listed counterclockwise
starting from the incoming under-strand edge.  A crossing is positive when
the over-strand enters at the last slot (so that an all-positive diagram
is the right-handed torus braid closure).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field


class DiagramError(ValueError):
    pass


@dataclass
class Diagram:
    crossings: list  # [(a, b, c, d)] edge ids, CCW from incoming under
    nedges: int
    over_in: list  # per crossing: 1 or 3, the slot where the over-strand enters
    circles: int = 0  # crossingless closed components

    def __post_init__(self):
        self.signs = [1 if o == 3 else -1 for o in self.over_in]
        self._components = None
        self._faces = None

    @property
    def n(self) -> int:
        return len(self.crossings)

    @property
    def writhe(self) -> int:
        return sum(self.signs)

    @property
    def n_plus(self) -> int:
        return sum(1 for s in self.signs if s > 0)

    @property
    def n_minus(self) -> int:
        return sum(1 for s in self.signs if s < 0)

    # -- strands and components -----------------------------------------

    def edge_slots(self):
        """edge -> list of (crossing, slot)."""
        out = {}
        for ci, cr in enumerate(self.crossings):
            for s, e in enumerate(cr):
                out.setdefault(e, []).append((ci, s))
        return out

    def components(self):
        """Edge sets of the link components (each a list of edges)."""
        if self._components is not None:
            return self._components
        parent = {}

        def find(x):
            while parent.get(x, x) != x:
                parent[x] = parent.get(parent[x], parent[x])
                x = parent[x]
            return x

        def union(x, y):
            parent.setdefault(x, x)
            parent.setdefault(y, y)
            rx, ry = find(x), find(y)
            if rx != ry:
                parent[rx] = ry

        for cr in self.crossings:
            union(cr[0], cr[2])
            union(cr[1], cr[3])
        comps = {}
        for e in range(1, self.nedges + 1):
            comps.setdefault(find(e), []).append(e)
        self._components = list(comps.values())
        return self._components

    def orientations(self):
        """Per crossing, the set of incoming slots: {0, over_in}."""
        return [{0, o} for o in self.over_in]

    # -- faces ------------------------------------------------------------

    def faces(self):
        """Faces of the planar embedding as corner cycles.

        Returns (faces, corner_face) where faces is a list of corner lists
        and corner_face maps (crossing, corner index 0..3) to a face index;
        corner i lies between slots i and i+1 mod 4.
        """
        if self._faces is not None:
            return self._faces
        slots = self.edge_slots()
        for e, ends in slots.items():
            if len(ends) != 2:
                raise DiagramError(f"edge {e} does not have two ends")
        # darts: (crossing, slot) meaning: travel along the edge at this
        # slot away from the crossing; the mate dart is the other end.
        def mate(ci, s):
            e = self.crossings[ci][s]
            (c1, s1), (c2, s2) = slots[e]
            if (c1, s1) == (ci, s):
                return (c2, s2)
            return (c1, s1)

        seen = set()
        faces = []
        corner_face = {}
        for ci in range(self.n):
            for s in range(4):
                if (ci, s) in seen:
                    continue
                cyc = []
                cur = (ci, s)
                while cur not in seen:
                    seen.add(cur)
                    cj, sj = mate(*cur)
                    # arriving at (cj, sj): the face continues through the
                    # corner between slots sj-1, sj and leaves at slot sj-1
                    nxt = (cj, (sj - 1) % 4)
                    cyc.append((cj, (sj - 1) % 4))
                    cur = nxt
                fid = len(faces)
                faces.append(cyc)
                for corner in cyc:
                    corner_face[corner] = fid
        nverts = self.n
        euler = nverts - self.nedges + len(faces)
        if euler != 2:
            raise DiagramError(f"not a planar 4-regular code: V-E+F = {euler}")
        self._faces = (faces, corner_face)
        return self._faces

    def checkerboard(self):
        """2-coloring of faces, colors 0/1; faces across an edge differ."""
        faces, corner_face = self.faces()
        color = {0: 0}
        # adjacency: at crossing, corners i and i+1 share the edge at slot i+1
        adj = {f: set() for f in range(len(faces))}
        for ci in range(self.n):
            for i in range(4):
                f1 = corner_face[(ci, i)]
                f2 = corner_face[(ci, (i + 1) % 4)]
                adj[f1].add(f2)
                adj[f2].add(f1)
        todo = [0]
        while todo:
            f = todo.pop()
            for g in adj[f]:
                if g not in color:
                    color[g] = 1 - color[f]
                    todo.append(g)
                elif color[g] == color[f]:
                    raise DiagramError("diagram is not checkerboard colorable")
        return [color[f] for f in range(len(faces))]


def parse_pd(text: str) -> Diagram:
    """Parse `PD[X(a,b,c,d),...]`; orientations inferred.

    Under-strand orientation is part of the format (first slot incoming);
    over-strand directions are propagated along components, with the
    edge-numbering convention (b = d + 1 mod 2n) used for free choices.
    """
    text = text.strip()
    m = re.fullmatch(r"PD\[(.*)\]", text, re.S)
    if not m:
        raise DiagramError("expected PD[...]")
    body = m.group(1).strip()
    crossings = []
    if body:
        for part in re.findall(r"X\(([^()]*)\)", body):
            nums = [int(t) for t in part.split(",")]
            if len(nums) != 4:
                raise DiagramError(f"crossing needs 4 edges: {part}")
            crossings.append(tuple(nums))
        rebuilt = ",".join(f"X({a},{b},{c},{d})" for a, b, c, d in crossings)
        stripped = re.sub(r"\s", "", body)
        if stripped != rebuilt:
            raise DiagramError("malformed PD body")
    if not crossings:
        return Diagram([], 0, [], circles=1)
    labels = sorted({e for cr in crossings for e in cr})
    if labels != list(range(1, len(labels) + 1)):
        raise DiagramError("edge labels must be 1..m")
    nedges = len(labels)
    counts = {}
    for cr in crossings:
        for e in cr:
            counts[e] = counts.get(e, 0) + 1
    if any(v != 2 for v in counts.values()):
        raise DiagramError("each edge label must occur exactly twice")

    # orient: slot 0 incoming, slot 2 outgoing (under); propagate overs
    # edge direction: +1 means head at this (crossing, slot)
    slot_dir = {}
    for ci, cr in enumerate(crossings):
        slot_dir[(ci, 0)] = 1
        slot_dir[(ci, 2)] = -1
    ends = {}
    for ci, cr in enumerate(crossings):
        for s, e in enumerate(cr):
            ends.setdefault(e, []).append((ci, s))
    over_in = [None] * len(crossings)

    def set_over(ci, slot_in):
        if slot_in not in (1, 3):
            raise DiagramError("over-strand slot must be 1 or 3")
        if over_in[ci] is None:
            over_in[ci] = slot_in
            slot_dir[(ci, slot_in)] = 1
            slot_dir[(ci, 4 - slot_in)] = -1
            return True
        return over_in[ci] == slot_in

    changed = True
    while changed:
        changed = False
        for e, ee in ends.items():
            dirs = [slot_dir.get(k) for k in ee]
            if dirs[0] is not None and dirs[1] is None:
                k = ee[1]
                d = -dirs[0]
                ci, s = k
                if s in (1, 3):
                    if not set_over(ci, s if d == 1 else (4 - s)):
                        raise DiagramError("orientation inconsistency")
                    changed = True
            elif dirs[1] is not None and dirs[0] is None:
                k = ee[0]
                d = -dirs[1]
                ci, s = k
                if s in (1, 3):
                    if not set_over(ci, s if d == 1 else (4 - s)):
                        raise DiagramError("orientation inconsistency")
                    changed = True
            elif dirs[0] is not None and dirs[1] is not None:
                if dirs[0] == dirs[1]:
                    raise DiagramError("orientation inconsistency")
        if not changed:
            # free over-strands left: use the numbering convention
            for ci in range(len(crossings)):
                if over_in[ci] is None:
                    a, b, c, d = crossings[ci]
                    guess = 3 if (b - d) % nedges == 1 else 1
                    set_over(ci, guess)
                    changed = True
                    break
    return Diagram(crossings, nedges, over_in)


def parse_braid(word, strands: int | None = None) -> Diagram:
    """Closure of a braid word (list of nonzero ints).

    Letter +i crosses strand i over strand i+1 and yields a positive
    crossing; strands run upward.
    """
    if isinstance(word, str):
        word = [int(t) for t in word.replace(",", " ").split()]
    if any(w == 0 for w in word):
        raise DiagramError("0 is not a braid generator")
    k = strands or (max(abs(w) for w in word) + 1 if word else 2)
    if word and max(abs(w) for w in word) + 1 > k:
        raise DiagramError("generator index exceeds strand count")

    fresh = [0]

    def new_edge():
        fresh[0] += 1
        return fresh[0]

    start = [new_edge() for _ in range(k)]
    cur = list(start)
    crossings = []
    over_in = []
    for w in word:
        i = abs(w) - 1
        eL, eR = cur[i], cur[i + 1]
        nL, nR = new_edge(), new_edge()
        if w > 0:
            # under: SE in -> NW out; over: SW in -> NE out
            crossings.append((eR, nR, nL, eL))
            over_in.append(3)
        else:
            # under: SW in -> NE out; over: SE in -> NW out
            crossings.append((eL, eR, nR, nL))
            over_in.append(1)
        cur[i], cur[i + 1] = nL, nR
    # close up: identify cur[p] with start[p]
    parent = list(range(fresh[0] + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    circles = 0
    for p in range(k):
        a, b = find(start[p]), find(cur[p])
        if a == b:
            circles += 1
        else:
            parent[a] = b
    relabel = {}
    out_cross = []
    for cr in crossings:
        t = []
        for e in cr:
            r = find(e)
            if r not in relabel:
                relabel[r] = len(relabel) + 1
            t.append(relabel[r])
        out_cross.append(tuple(t))
    if not out_cross:
        return Diagram([], 0, [], circles=k)
    return Diagram(out_cross, len(relabel), over_in, circles=circles)


def mirror(d: Diagram) -> Diagram:
    """Swap over/under everywhere (reverses all crossing signs).

    The tuple is re-read from the new incoming under-strand; the cyclic
    (counterclockwise) order is preserved.
    """
    crossings = []
    over_in = []
    for (a, b, c, d4), o in zip(d.crossings, d.over_in):
        if o == 3:
            # over was d->b; now b,d go under: new under-in = d, tuple
            # CCW from d: (d, a, b, c); old under a->c becomes over, its
            # entry slot is 1 (a sits at slot 1 of the new tuple)
            crossings.append((d4, a, b, c))
            over_in.append(1)
        else:
            # over was b->d; new under-in = b: (b, c, d, a); over enters
            # where a sits: slot 3
            crossings.append((b, c, d4, a))
            over_in.append(3)
    return Diagram(crossings, d.nedges, over_in, circles=d.circles)
