"""Shared context for subgroups of a fixed p-group S inside an ambient group.

Subgroups of S are bitmasks over the sorted member list of S, so object-set
membership, overgroup tests and conjugation all run on machine integers.
"""

from __future__ import annotations

from typing import Iterable

from .group_core import FiniteGroup


def get_context(amb: FiniteGroup, s_members: Iterable[int], p: int) -> "SContext":
    """Interned SContext constructor: contexts with the same member list share
    their subgroup enumeration and caches."""
    key = (tuple(sorted(s_members)), p)
    pool = getattr(amb, "_sctx_pool", None)
    if pool is None:
        pool = {}
        amb._sctx_pool = pool
    ctx = pool.get(key)
    if ctx is None:
        ctx = SContext(amb, key[0], p)
        pool[key] = ctx
    return ctx


class SContext:
    """The p-group S realized inside an ambient FiniteGroup."""

    def __init__(self, amb: FiniteGroup, s_members: Iterable[int], p: int):
        self.amb = amb
        self.p = p
        self.s_list: tuple[int, ...] = tuple(sorted(s_members))
        self.s_pos: dict[int, int] = {g: i for i, g in enumerate(self.s_list)}
        self.ns = len(self.s_list)
        self.full_mask = (1 << self.ns) - 1
        self.s_set = frozenset(self.s_list)
        self._subgroups: tuple[int, ...] | None = None
        self._closure_cache: dict[int, int] = {}
        self._norm_cache: dict[int, int] = {}
        self._cent_cache: dict[int, int] = {}
        self._over_cache: dict[int, tuple[int, ...]] = {}
        e = amb.e
        self.trivial_mask = 1 << self.s_pos[e]

    # -- mask basics -----------------------------------------------------

    def mask_of(self, amb_indices: Iterable[int]) -> int:
        m = 0
        for g in amb_indices:
            m |= 1 << self.s_pos[g]
        return m

    def members(self, mask: int) -> tuple[int, ...]:
        return tuple(self.s_list[i] for i in range(self.ns) if mask >> i & 1)

    def size(self, mask: int) -> int:
        return mask.bit_count()

    def key(self, mask: int) -> tuple[int, int]:
        return (mask.bit_count(), mask)

    # -- subgroup structure ----------------------------------------------

    def closure_mask(self, mask: int) -> int:
        """Subgroup of S generated by the masked members."""
        cached = self._closure_cache.get(mask)
        if cached is not None:
            return cached
        amb = self.amb
        members = {amb.e}
        frontier = [g for g in self.members(mask) if g != amb.e]
        members.update(frontier)
        while frontier:
            new = []
            for x in frontier:
                ix = amb.inv(x)
                if ix not in members:
                    members.add(ix)
                    new.append(ix)
                for y in list(members):
                    for z in (amb.mul(x, y), amb.mul(y, x)):
                        if z not in members:
                            members.add(z)
                            new.append(z)
            frontier = new
        out = self.mask_of(members)
        self._closure_cache[mask] = out
        return out

    def is_subgroup_mask(self, mask: int) -> bool:
        return mask != 0 and self.closure_mask(mask) == mask

    def subgroups(self) -> tuple[int, ...]:
        """All subgroup masks of S, sorted by (order, mask)."""
        if self._subgroups is None:
            cyclic = {self.closure_mask(1 << i) for i in range(self.ns)}
            cyclic.add(self.trivial_mask)
            found = set(cyclic)
            worklist = list(found)
            while worklist:
                new = set()
                for a in worklist:
                    for b in found:
                        if a | b == a or a | b == b:
                            continue
                        j = self.closure_mask(a | b)
                        if j not in found and j not in new:
                            new.add(j)
                found |= new
                worklist = list(new)
            self._subgroups = tuple(sorted(found, key=self.key))
        return self._subgroups

    def overgroups(self, mask: int) -> tuple[int, ...]:
        out = self._over_cache.get(mask)
        if out is None:
            out = tuple(m for m in self.subgroups() if m & mask == mask)
            self._over_cache[mask] = out
        return out

    def conj_mask(self, mask: int, g: int) -> int | None:
        """Image of the masked subgroup under x -> x^g, None if it leaves S."""
        out = 0
        amb = self.amb
        for x in self.members(mask):
            y = amb.conj(x, g)
            pos = self.s_pos.get(y)
            if pos is None:
                return None
            out |= 1 << pos
        return out

    def normalizer_mask(self, mask: int) -> int:
        out = self._norm_cache.get(mask)
        if out is None:
            mem = frozenset(self.members(mask))
            out = 0
            for i, s in enumerate(self.s_list):
                if all(self.amb.conj(x, s) in mem for x in mem):
                    out |= 1 << i
            self._norm_cache[mask] = out
        return out

    def centralizer_mask(self, mask: int) -> int:
        out = self._cent_cache.get(mask)
        if out is None:
            mem = self.members(mask)
            out = 0
            for i, s in enumerate(self.s_list):
                if all(self.amb.conj(x, s) == x for x in mem):
                    out |= 1 << i
            self._cent_cache[mask] = out
        return out

    def center_mask(self) -> int:
        return self.centralizer_mask(self.full_mask)

    def product_mask(self, a: int, b: int) -> int:
        """The set product AB as a mask (a subgroup when one factor
        normalizes the other)."""
        amb = self.amb
        out = 0
        for x in self.members(a):
            for y in self.members(b):
                out |= 1 << self.s_pos[amb.mul(x, y)]
        return out

    def nontrivial(self) -> tuple[int, ...]:
        return tuple(m for m in self.subgroups() if m != self.trivial_mask)
