"""Finite permutation groups with brute-force local analysis.

Elements are permutations of {0..degree-1} stored as image tuples; a
FiniteGroup keeps a canonically sorted element list and does all arithmetic
on element indices.  Subgroups are frozensets of indices.  Everything here
is deterministic: every "least"/"first" choice uses the lexicographic order
of the image tuples.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import SizeBoundError

Perm = tuple[int, ...]

SUBGROUP_ENUM_BOUND = 400
CLOSURE_BOUND = 10_000


def identity_perm(degree: int) -> Perm:
    return tuple(range(degree))


def mul_perm(a: Perm, b: Perm) -> Perm:
    """Compose permutations acting on the right: point^(a*b) = (point^a)^b."""
    return tuple(b[a[k]] for k in range(len(a)))


def inv_perm(a: Perm) -> Perm:
    out = [0] * len(a)
    for i, v in enumerate(a):
        out[v] = i
    return tuple(out)


def cycles_to_perm(cycles: Sequence[Sequence[int]], degree: int) -> Perm:
    p = list(range(degree))
    for cyc in cycles:
        for i, pt in enumerate(cyc):
            p[pt] = cyc[(i + 1) % len(cyc)]
    return tuple(p)


def perm_to_cycles(p: Perm) -> list[list[int]]:
    seen: set[int] = set()
    out = []
    for i in range(len(p)):
        if i in seen or p[i] == i:
            seen.add(i)
            continue
        cyc = [i]
        j = p[i]
        while j != i:
            seen.add(j)
            cyc.append(j)
            j = p[j]
        seen.add(i)
        out.append(cyc)
    return out


class FiniteGroup:
    """A finite permutation group given by its full, sorted element list."""

    def __init__(self, elements: Iterable[Perm], name: str = "G"):
        self.elements: tuple[Perm, ...] = tuple(sorted(elements))
        if not self.elements:
            raise ValueError("empty element list")
        self.degree = len(self.elements[0])
        self.index: dict[Perm, int] = {g: i for i, g in enumerate(self.elements)}
        self.n = len(self.elements)
        self.e = self.index[identity_perm(self.degree)]
        self._inv = tuple(self.index[inv_perm(g)] for g in self.elements)
        self._mul_cache: dict[tuple[int, int], int] = {}
        self.name = name

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name}, order={self.n}, degree={self.degree})"

    def mul(self, i: int, j: int) -> int:
        key = (i, j)
        out = self._mul_cache.get(key)
        if out is None:
            out = self.index[mul_perm(self.elements[i], self.elements[j])]
            if len(self._mul_cache) < 4_000_000:
                self._mul_cache[key] = out
        return out

    def inv(self, i: int) -> int:
        return self._inv[i]

    def conj(self, x: int, g: int) -> int:
        """x^g = g^-1 x g."""
        return self.mul(self.mul(self._inv[g], x), g)

    def prod(self, word: Sequence[int]) -> int:
        out = self.e
        for i in word:
            out = self.mul(out, i)
        return out

    @lru_cache(maxsize=None)
    def order_of(self, i: int) -> int:
        k, x = 1, i
        while x != self.e:
            x = self.mul(x, i)
            k += 1
        return k

    def elements_of_p_power_order(self, p: int) -> list[int]:
        return [i for i in range(self.n) if _is_p_power(self.order_of(i), p)]

    def validate(self, assoc_bound: int = 200) -> None:
        """Spot-check the group axioms (exhaustive associativity when small)."""
        e = self.e
        for i in range(self.n):
            assert self.mul(e, i) == i == self.mul(i, e)
            assert self.mul(i, self._inv[i]) == e
        rng = range(self.n)
        if self.n <= assoc_bound:
            triples = ((i, j, k) for i in rng for j in rng for k in rng)
        else:
            step = max(1, self.n // 17)
            sample = list(rng)[::step]
            triples = ((i, j, k) for i in sample for j in sample for k in sample)
        for i, j, k in triples:
            assert self.mul(self.mul(i, j), k) == self.mul(i, self.mul(j, k))


@dataclass(frozen=True)
class Subgroup:
    """A subgroup handle: parent group plus the sorted member index set."""

    parent: FiniteGroup
    members: frozenset[int]

    def __post_init__(self):
        if self.parent.e not in self.members:
            raise ValueError("subgroup must contain the identity")

    @property
    def order(self) -> int:
        return len(self.members)

    def key(self) -> tuple[int, ...]:
        return tuple(sorted(self.members))

    def __repr__(self) -> str:
        return f"Subgroup(order={self.order} of {self.parent.name})"


def make_group(generators: Sequence[Perm], name: str = "G",
               size_bound: int = CLOSURE_BOUND) -> FiniteGroup:
    """Close a generator list under composition.

    Raises SizeBoundError once the closure exceeds ``size_bound`` and
    ValueError on mixed degrees.  The trivial group comes from [()] or
    from a list of identity permutations.
    """
    gens = [tuple(g) for g in generators]
    if not gens:
        raise ValueError("need at least one generator (possibly the identity)")
    degree = len(gens[0])
    if any(len(g) != degree for g in gens):
        raise ValueError("generator degree mismatch")
    for g in gens:
        if sorted(g) != list(range(degree)):
            raise ValueError(f"not a permutation: {g}")
    e = identity_perm(degree)
    seen = {e}
    frontier = [e]
    while frontier:
        new = []
        for x in frontier:
            for g in gens:
                y = mul_perm(x, g)
                if y not in seen:
                    seen.add(y)
                    if len(seen) > size_bound:
                        raise SizeBoundError(
                            f"closure exceeds size bound {size_bound}")
                    new.append(y)
        frontier = new
    return FiniteGroup(seen, name=name)


def direct_product_group(G: FiniteGroup, H: FiniteGroup, name: str = "",
                         size_bound: int = 200_000) -> FiniteGroup:
    """G x H acting on the disjoint union of the two point sets."""
    dg = G.degree
    elements = set()
    for g in G.elements:
        for h in H.elements:
            elements.add(g + tuple(dg + pt for pt in h))
            if len(elements) > size_bound:
                raise SizeBoundError("direct product exceeds size bound")
    return FiniteGroup(elements, name=name or f"{G.name}x{H.name}")


# -- subgroup machinery ------------------------------------------------------

def subgroup_closure(G: FiniteGroup, seed: Iterable[int]) -> frozenset[int]:
    members = {G.e}
    frontier = list(set(seed) - members)
    members.update(frontier)
    while frontier:
        new = []
        for x in frontier:
            for y in list(members):
                for z in (G.mul(x, y), G.mul(y, x)):
                    if z not in members:
                        members.add(z)
                        new.append(z)
            ix = G.inv(x)
            if ix not in members:
                members.add(ix)
                new.append(ix)
        frontier = new
    return frozenset(members)


def is_subgroup(G: FiniteGroup, members: frozenset[int]) -> bool:
    if G.e not in members:
        return False
    return all(G.mul(x, y) in members for x in members for y in members)


def all_subgroups(G: FiniteGroup,
                  bound: int = SUBGROUP_ENUM_BOUND) -> list[frozenset[int]]:
    """Every subgroup exactly once, sorted by (order, member list).

    Layered closure: all cyclic subgroups first, then pairwise joins to a
    fixpoint.  Every subgroup is a join of the cyclic subgroups it contains,
    so the fixpoint is complete.
    """
    if G.n > bound:
        raise SizeBoundError(f"|G|={G.n} exceeds subgroup enumeration bound {bound}")
    cyclics = {subgroup_closure(G, [i]) for i in range(G.n)}
    found = set(cyclics)
    worklist = sorted(found, key=lambda s: (len(s), tuple(sorted(s))))
    while worklist:
        new = set()
        for a in worklist:
            for b in found:
                if a <= b or b <= a:
                    continue
                j = subgroup_closure(G, a | b)
                if j not in found and j not in new:
                    new.add(j)
        found |= new
        worklist = sorted(new, key=lambda s: (len(s), tuple(sorted(s))))
    return sorted(found, key=lambda s: (len(s), tuple(sorted(s))))


def centralizer_g(G: FiniteGroup, xs: Iterable[int]) -> frozenset[int]:
    xs = list(xs)
    return frozenset(g for g in range(G.n)
                     if all(G.conj(x, g) == x for x in xs))


def normalizer_g(G: FiniteGroup, members: frozenset[int]) -> frozenset[int]:
    return frozenset(g for g in range(G.n)
                     if all(G.conj(x, g) in members for x in members))


def center_g(G: FiniteGroup) -> frozenset[int]:
    return centralizer_g(G, range(G.n))


def conjugate_subgroup(G: FiniteGroup, members: frozenset[int], g: int) -> frozenset[int]:
    return frozenset(G.conj(x, g) for x in members)


def is_normal(G: FiniteGroup, members: frozenset[int]) -> bool:
    return normalizer_g(G, members) == frozenset(range(G.n))


def normal_closure_g(G: FiniteGroup, seed: Iterable[int]) -> frozenset[int]:
    members = subgroup_closure(G, seed)
    while True:
        extra = {G.conj(x, g) for x in members for g in range(G.n)} - members
        if not extra:
            return members
        members = subgroup_closure(G, members | extra)


def normal_subgroups(G: FiniteGroup) -> list[frozenset[int]]:
    """All normal subgroups, via joins of normal closures of single elements."""
    atoms = {normal_closure_g(G, [i]) for i in range(G.n)}
    found = set(atoms)
    worklist = list(atoms)
    while worklist:
        new = set()
        for a in worklist:
            for b in found:
                j = subgroup_closure(G, a | b)
                if j not in found and j not in new:
                    new.add(j)
        found |= new
        worklist = list(new)
    return sorted(found, key=lambda s: (len(s), tuple(sorted(s))))


def _is_p_power(n: int, p: int) -> bool:
    while n % p == 0:
        n //= p
    return n == 1


def p_part(n: int, p: int) -> int:
    k = 1
    while n % (k * p) == 0:
        k *= p
    return k


def sylow(G: FiniteGroup, p: int) -> frozenset[int]:
    """The canonically least Sylow p-subgroup (= least maximal p-subgroup).

    Grows one Sylow subgroup along the normalizer chain, then returns the
    least conjugate; all maximal p-subgroups are conjugate, so this is the
    canonical minimum.  p not dividing |G| yields the trivial subgroup.
    """
    target = p_part(G.n, p)
    S = frozenset([G.e])
    while len(S) < target:
        N = normalizer_g(G, S)
        grown = None
        for x in sorted(N - S):
            if not _is_p_power(G.order_of(x), p):
                continue
            cand = subgroup_closure(G, S | {x})
            if _is_p_power(len(cand), p):
                grown = cand
                break
        if grown is None:  # cannot happen by Sylow theory
            raise RuntimeError("sylow growth stalled")
        S = grown
    return min((conjugate_subgroup(G, S, g) for g in range(G.n)),
               key=lambda s: tuple(sorted(s)))


def o_p(G: FiniteGroup, p: int) -> frozenset[int]:
    """Largest normal p-subgroup, computed as the intersection of the Sylow
    p-subgroup's conjugates."""
    S = sylow(G, p)
    out = set(S)
    for g in range(G.n):
        out &= conjugate_subgroup(G, S, g)
        if len(out) == 1:
            break
    return frozenset(out)


def o_upper_p(G: FiniteGroup, p: int, cross_check_bound: int = 2000) -> frozenset[int]:
    """O^p(G): the subgroup generated by all elements of order prime to p.

    For groups within ``cross_check_bound`` the equivalent characterisation
    (smallest normal subgroup with p-group quotient) is asserted.
    """
    gens = [i for i in range(G.n) if G.order_of(i) % p != 0]
    K = subgroup_closure(G, gens)
    if G.n <= cross_check_bound:
        assert is_normal(G, K)
        assert _is_p_power(G.n // len(K), p)
        for N in normal_subgroups(G):
            if _is_p_power(G.n // len(N), p):
                assert K <= N, "O^p is not minimal among p-power-index normals"
    return K


def is_char_p(G: FiniteGroup, p: int) -> bool:
    """True iff C_G(O_p(G)) <= O_p(G)."""
    Q = o_p(G, p)
    return centralizer_g(G, Q) <= Q


def has_strongly_p_embedded(G: FiniteGroup, p: int,
                            bound: int = SUBGROUP_ENUM_BOUND) -> bool:
    """True iff some H < G with p | |H| meets all its distinct conjugates in
    p'-order subgroups.  Scans subgroups largest-first and short-circuits."""
    if G.n % p != 0:
        return False
    full = frozenset(range(G.n))
    subs = all_subgroups(G, bound=bound)
    for H in sorted(subs, key=len, reverse=True):
        if len(H) == G.n or len(H) % p != 0:
            continue
        if all(len(H & conjugate_subgroup(G, H, g)) % p != 0
               for g in range(G.n) if g not in H):
            return True
        _ = full
    return False


def quotient_group(G: FiniteGroup, N: frozenset[int]) -> tuple[FiniteGroup, dict[int, int]]:
    """G/N as a permutation group on the right cosets of N.

    Returns the quotient group and the projection index map g -> index of
    the coset permutation of g.  Requires N normal.
    """
    if not is_normal(G, N):
        raise ValueError("quotient by a non-normal subgroup")
    cosets: list[frozenset[int]] = []
    coset_of: dict[int, int] = {}
    for g in range(G.n):
        if g in coset_of:
            continue
        cs = frozenset(G.mul(n, g) for n in N)
        idx = len(cosets)
        cosets.append(cs)
        for x in cs:
            coset_of[x] = idx
    perm_of: dict[int, Perm] = {}
    for g in range(G.n):
        perm_of[g] = tuple(coset_of[G.mul(min(cosets[c]), g)] for c in range(len(cosets)))
    Q = FiniteGroup(set(perm_of.values()), name=f"{G.name}/N")
    proj = {g: Q.index[perm_of[g]] for g in range(G.n)}
    return Q, proj


def subgroup_as_group(G: FiniteGroup, members: frozenset[int]) -> tuple[FiniteGroup, dict[int, int]]:
    """Re-realize a subgroup as a standalone FiniteGroup (restricted action).

    Uses the right regular action on the member list when the natural point
    action is unfaithful; here the point action of a permutation group is
    always faithful, so we just re-use the ambient permutations.
    """
    H = FiniteGroup((G.elements[i] for i in members), name=f"{G.name}|sub")
    emb = {H.index[G.elements[i]]: i for i in members}
    return H, emb


def commutator_set(G: FiniteGroup, A: Iterable[int], B: Iterable[int]) -> frozenset[int]:
    """[A, B] = <a^-1 b^-1 a b>."""
    gens = []
    A, B = list(A), list(B)
    for a in A:
        ia = G.inv(a)
        for b in B:
            gens.append(G.prod((ia, G.inv(b), a, b)))
    return subgroup_closure(G, gens)


def derived_subgroup(G: FiniteGroup) -> frozenset[int]:
    return commutator_set(G, range(G.n), range(G.n))
