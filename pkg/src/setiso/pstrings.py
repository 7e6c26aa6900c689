"""The data model of the generalized string isomorphism problem.

A partitioned domain carries families of per-class strings.  Occupancy
statistics and the virtual size (the recursion progress measure, robust to
renormalization) live here, together with the hypergraph encoding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .perm import Permutation


def funcnorm(d: int) -> int:
    """Normalization-cost exponent; any fixed monotone O(log d) choice works."""
    return max(1, math.ceil(math.log2(max(d, 2))))


@dataclass(frozen=True)
class VirtualSizeConfig:
    d: int = 2

    @property
    def exponent(self) -> int:
        return funcnorm(self.d) + 1


@dataclass(frozen=True)
class PPartition:
    """A partition of {0..n-1} with dense class ids."""

    n: int
    class_of: tuple[int, ...]

    def __post_init__(self):
        if len(self.class_of) != self.n:
            raise ValueError("class_of must assign a class to every point")
        ids = set(self.class_of)
        if self.n and ids != set(range(len(ids))):
            raise ValueError("class ids must be dense from 0")

    @classmethod
    def trivial(cls, n: int) -> "PPartition":
        return cls(n, (0,) * n) if n else cls(0, ())

    @classmethod
    def discrete(cls, n: int) -> "PPartition":
        return cls(n, tuple(range(n)))

    @classmethod
    def from_classes(cls, n: int, classes: Iterable[Iterable[int]]) -> "PPartition":
        """Classes renumbered by minimum element."""
        classes = sorted((sorted(c) for c in classes), key=lambda c: c[0])
        table = [-1] * n
        for i, c in enumerate(classes):
            for p in c:
                if table[p] != -1:
                    raise ValueError("classes overlap at point %d" % p)
                table[p] = i
        if any(t == -1 for t in table):
            raise ValueError("classes do not cover the domain")
        return cls(n, tuple(table))

    @property
    def num_classes(self) -> int:
        return len(set(self.class_of)) if self.n else 0

    def members(self, class_id: int) -> tuple[int, ...]:
        return tuple(p for p in range(self.n) if self.class_of[p] == class_id)

    def classes(self) -> list[tuple[int, ...]]:
        out: list[list[int]] = [[] for _ in range(self.num_classes)]
        for p, c in enumerate(self.class_of):
            out[c].append(p)
        return [tuple(c) for c in out]

    def is_invariant_under(self, g: Permutation) -> bool:
        mapped = {}
        for p in range(self.n):
            c = self.class_of[p]
            ci = self.class_of[g.images[p]]
            if mapped.setdefault(c, ci) != ci:
                return False
        return True

    def image_class(self, class_id: int, g: Permutation) -> int:
        return self.class_of[g.images[self.members(class_id)[0]]]

    def apply(self, g: Permutation) -> "PPartition":
        return PPartition.from_classes(self.n, [
            [g.images[p] for p in c] for c in self.classes()
        ])


@dataclass(frozen=True)
class PString:
    """A pair (class id, string on the members of that class).

    Letters are listed in increasing point order of the class members.
    """

    class_id: int
    letters: tuple[int, ...]

    def letter_at(self, partition: PPartition, point: int) -> int:
        members = partition.members(self.class_id)
        return self.letters[members.index(point)]


class PStringFamily:
    """A duplicate-free set of P-strings over one partition."""

    __slots__ = ("partition", "members", "sentinel")

    def __init__(self, partition: PPartition, members: Iterable[PString],
                 sentinel: Optional[int] = None):
        seen = set()
        ordered = []
        for m in members:
            size = len(partition.members(m.class_id))
            if len(m.letters) != size:
                raise ValueError(
                    "string support of class %d has %d letters, class has %d points"
                    % (m.class_id, len(m.letters), size))
            key = (m.class_id, m.letters)
            if key in seen:
                raise ValueError("duplicate member (%d, %r)" % (m.class_id, m.letters))
            seen.add(key)
            ordered.append(m)
        self.partition = partition
        self.members = tuple(sorted(ordered, key=lambda m: (m.class_id, m.letters)))
        self.sentinel = sentinel

    # -- basic views -------------------------------------------------------

    def occupancy(self, class_id: int) -> int:
        return sum(1 for m in self.members if m.class_id == class_id)

    def occupancy_profile(self) -> tuple[int, ...]:
        counts = [0] * self.partition.num_classes
        for m in self.members:
            counts[m.class_id] += 1
        return tuple(counts)

    def strings_of(self, class_id: int) -> list[PString]:
        return [m for m in self.members if m.class_id == class_id]

    def is_completely_occupied(self) -> bool:
        return all(c >= 1 for c in self.occupancy_profile())

    def is_simple(self) -> bool:
        return all(c <= 1 for c in self.occupancy_profile())

    def is_balanced(self) -> bool:
        profile = self.occupancy_profile()
        return len(set(profile)) <= 1

    def max_color(self) -> int:
        return max((max(m.letters) for m in self.members if m.letters), default=-1)

    def key(self) -> frozenset:
        return frozenset((m.class_id, m.letters) for m in self.members)

    def __eq__(self, other) -> bool:
        return (isinstance(other, PStringFamily)
                and self.partition == other.partition
                and self.members == other.members)

    def __hash__(self) -> int:
        return hash((self.partition, self.members))

    def __repr__(self) -> str:
        return "PStringFamily(%d classes, %d members)" % (
            self.partition.num_classes, len(self.members))

    # -- group action and restriction ---------------------------------------

    def apply(self, g: Permutation) -> "PStringFamily":
        part = self.partition
        out = []
        for m in self.members:
            pts = part.members(m.class_id)
            image_pts = sorted(g.images[p] for p in pts)
            target = part.class_of[image_pts[0]]
            letters = [0] * len(pts)
            pos = {p: i for i, p in enumerate(image_pts)}
            for p, letter in zip(pts, m.letters):
                letters[pos[g.images[p]]] = letter
            out.append(PString(target, tuple(letters)))
        return PStringFamily(part, out, sentinel=self.sentinel)

    def restrict(self, points: Sequence[int]) -> "PStringFamily":
        """Induced family on the partition cut down to ``points``.

        Duplicates arising from the restriction are collapsed.
        """
        pts = sorted(set(points))
        if not pts:
            raise ValueError("cannot restrict to an empty point set")
        part = self.partition
        old_classes = [c for c in range(part.num_classes) if any(part.class_of[p] == c for p in pts)]
        kept = {c: [p for p in pts if part.class_of[p] == c] for c in old_classes}
        new_part = PPartition.from_classes(len(pts), [
            [pts.index(p) for p in kept[c]] for c in old_classes
        ])
        remap = {c: new_part.class_of[pts.index(kept[c][0])] for c in old_classes}
        seen = set()
        out = []
        for m in self.members:
            if m.class_id not in remap:
                continue
            old_pts = part.members(m.class_id)
            letters = tuple(letter for p, letter in zip(old_pts, m.letters) if p in set(kept[m.class_id]))
            key = (remap[m.class_id], letters)
            if key not in seen:
                seen.add(key)
                out.append(PString(*key))
        return PStringFamily(new_part, out, sentinel=self.sentinel)

    def virtual_size(self, cfg: VirtualSizeConfig) -> int:
        e = cfg.exponent
        total = 0
        for class_id, pts in enumerate(self.partition.classes()):
            total += len(pts) * self.occupancy(class_id) ** e
        return total


def make_family(partition: PPartition, strings: Iterable[PString],
                sentinel: Optional[int] = None) -> PStringFamily:
    """Validated family, padded so every class is occupied.

    Empty classes receive one sentinel string of a reserved color (the
    maximum used color id plus one unless given), recorded on the family.
    """
    base = PStringFamily(partition, strings)
    profile = base.occupancy_profile()
    if all(c >= 1 for c in profile):
        return PStringFamily(partition, base.members, sentinel=sentinel)
    if sentinel is None:
        sentinel = base.max_color() + 1
    padded = list(base.members)
    for class_id, count in enumerate(profile):
        if count == 0:
            size = len(partition.members(class_id))
            padded.append(PString(class_id, (sentinel,) * size))
    return PStringFamily(partition, padded, sentinel=sentinel)


def restrict_family(fam: PStringFamily, points: Sequence[int]) -> PStringFamily:
    return fam.restrict(points)


def virtual_size(fam: PStringFamily, cfg: VirtualSizeConfig) -> int:
    return fam.virtual_size(cfg)


def harmonize_sentinels(x: PStringFamily, y: PStringFamily) -> tuple[PStringFamily, PStringFamily]:
    """Re-pad a pair with one shared sentinel so padded strings compare equal."""
    if x.sentinel == y.sentinel:
        return x, y

    def live(fam: PStringFamily) -> list[PString]:
        if fam.sentinel is None:
            return list(fam.members)
        # padding uses a color unused by real strings, so all-sentinel
        # strings are exactly the padding
        return [m for m in fam.members if any(l != fam.sentinel for l in m.letters)]

    lx, ly = live(x), live(y)
    joint = max((l for m in lx + ly for l in m.letters), default=-1) + 1
    return (make_family(x.partition, lx, sentinel=joint),
            make_family(y.partition, ly, sentinel=joint))


# -- hypergraphs ---------------------------------------------------------------

@dataclass(frozen=True)
class Hypergraph:
    n: int
    edges: frozenset  # frozenset of frozenset of vertices

    def __post_init__(self):
        for e in self.edges:
            for v in e:
                if not 0 <= v < self.n:
                    raise ValueError("hyperedge vertex %r out of range" % (v,))

    def apply(self, g: Permutation) -> "Hypergraph":
        return Hypergraph(self.n, frozenset(frozenset(g.images[v] for v in e) for e in self.edges))


def hypergraph_to_family(h: Hypergraph) -> PStringFamily:
    """Each edge becomes its 0/1 characteristic string on the trivial partition."""
    part = PPartition.trivial(h.n)
    strings = [
        PString(0, tuple(1 if v in e else 0 for v in range(h.n)))
        for e in sorted(h.edges, key=sorted)
    ]
    return make_family(part, strings)


def family_to_hypergraph(fam: PStringFamily) -> Hypergraph:
    """Set-of-strings to hypergraph over Omega x Sigma, one edge per string."""
    if fam.partition.num_classes != 1:
        raise ValueError("only trivial-partition families encode hypergraphs")
    n = fam.partition.n
    alphabet = sorted({l for m in fam.members for l in m.letters})
    index = {(a, s): a * len(alphabet) + i for a in range(n) for i, s in enumerate(alphabet)}
    edges = frozenset(
        frozenset(index[(a, m.letters[a])] for a in range(n)) for m in fam.members
    )
    return Hypergraph(n * len(alphabet), edges)
