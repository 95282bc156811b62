"""Partial groups: a set with an inversion and a product defined on a
down-closed set of words.

Backends share one interface (elements, inversion, word-domain oracle,
product); all the structure theory (closures, normality, quotients,
homomorphism checks, central products) is generic over that interface.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Sequence

from .errors import DomainError, NormalityError
from .group_core import FiniteGroup

Word = tuple  # finite sequence of elements (possibly empty)


class PartialGroup:
    """Abstract base: concrete backends fill in the element set, inversion
    and the domain/product oracles."""

    backend = "abstract"
    elements: tuple

    def identity(self):
        raise NotImplementedError

    def inv(self, x):
        raise NotImplementedError

    def in_domain(self, word: Word) -> bool:
        raise NotImplementedError

    def raw_prod(self, word: Word):
        """Product of a word assumed to be in the domain."""
        raise NotImplementedError

    # -- shared derived operations --------------------------------------

    def prod(self, word: Word):
        if not self.in_domain(word):
            raise DomainError(f"word not in domain: {word!r}")
        return self.raw_prod(word)

    def conj_defined(self, x, f) -> bool:
        return self.in_domain((self.inv(f), x, f))

    def conj(self, x, f):
        w = (self.inv(f), x, f)
        if not self.in_domain(w):
            raise DomainError("not in conjugation domain")
        return self.raw_prod(w)

    def conj_domain(self, f) -> list:
        """D(f) = elements x with (f^-1, x, f) in the domain."""
        return [x for x in self.elements if self.conj_defined(x, f)]

    def size(self) -> int:
        return len(self.elements)


class GroupBacked(PartialGroup):
    """A finite group seen as a partial group: every word composable."""

    backend = "GroupBacked"

    def __init__(self, G: FiniteGroup):
        self.G = G
        self.elements = tuple(range(G.n))

    def identity(self):
        return self.G.e

    def inv(self, x):
        return self.G.inv(x)

    def in_domain(self, word: Word) -> bool:
        return all(x in self.G.index.values() or 0 <= x < self.G.n for x in word)

    def raw_prod(self, word: Word):
        return self.G.prod(word)


class SubsetRestricted(PartialGroup):
    """A partial subgroup with the inherited product (domain cut to words
    over the subset)."""

    backend = "SubsetRestricted"

    def __init__(self, parent: PartialGroup, members: Iterable):
        self.parent = parent
        memberset = set(members)
        self.elements = tuple(x for x in parent.elements if x in memberset)
        self._members = frozenset(self.elements)

    def identity(self):
        return self.parent.identity()

    def inv(self, x):
        return self.parent.inv(x)

    def in_domain(self, word: Word) -> bool:
        return all(x in self._members for x in word) and self.parent.in_domain(word)

    def raw_prod(self, word: Word):
        return self.parent.raw_prod(word)


class DirectProductPG(PartialGroup):
    """Pairs with coordinatewise product; a word is composable iff both
    coordinate words are."""

    backend = "DirectProduct"

    def __init__(self, P1: PartialGroup, P2: PartialGroup):
        self.P1, self.P2 = P1, P2
        self.elements = tuple(itertools.product(P1.elements, P2.elements))

    def identity(self):
        return (self.P1.identity(), self.P2.identity())

    def inv(self, x):
        return (self.P1.inv(x[0]), self.P2.inv(x[1]))

    def in_domain(self, word: Word) -> bool:
        return (self.P1.in_domain(tuple(x[0] for x in word))
                and self.P2.in_domain(tuple(x[1] for x in word)))

    def raw_prod(self, word: Word):
        return (self.P1.raw_prod(tuple(x[0] for x in word)),
                self.P2.raw_prod(tuple(x[1] for x in word)))


class QuotientPG(PartialGroup):
    """Quotient by a partial normal subgroup: elements are the
    inclusion-maximal right cosets Nf; a word of cosets is composable iff
    some lift is, and the product is the coset of the lifted product."""

    backend = "Quotient"

    def __init__(self, parent: PartialGroup, N: frozenset):
        if not is_partial_normal(parent, N):
            raise NormalityError("quotient requires a partial normal subgroup")
        self.parent = parent
        self.N = N
        cosets = {}
        for f in parent.elements:
            cs = frozenset(parent.raw_prod((n, f)) for n in N
                           if parent.in_domain((n, f)))
            cosets.setdefault(cs, min(_sort_key(x) for x in cs))
        maximal = [cs for cs in cosets
                   if not any(cs < other for other in cosets if other is not cs)]
        # maximal cosets must partition the parent element set
        covered: dict[Any, frozenset] = {}
        for cs in maximal:
            for x in cs:
                if x in covered:
                    raise NormalityError("maximal cosets do not partition")
                covered[x] = cs
        if len(covered) != len(parent.elements):
            raise NormalityError("maximal cosets do not cover")
        self.coset_of = covered
        self.elements = tuple(sorted(maximal, key=lambda cs: min(_sort_key(x) for x in cs)))
        self._rep = {cs: min(cs, key=_sort_key) for cs in self.elements}

    def project(self, x):
        return self.coset_of[x]

    def identity(self):
        return self.coset_of[self.parent.identity()]

    def inv(self, x):
        return self.coset_of[self.parent.inv(self._rep[x])]

    def _lifts(self, word: Word):
        return itertools.product(*[tuple(cs) for cs in word])

    def in_domain(self, word: Word) -> bool:
        if not word:
            return True
        return any(self.parent.in_domain(w) for w in self._lifts(word))

    def raw_prod(self, word: Word):
        if not word:
            return self.identity()
        products = {self.coset_of[self.parent.raw_prod(w)]
                    for w in self._lifts(word) if self.parent.in_domain(w)}
        if len(products) != 1:
            raise NormalityError(f"coset product not well-defined on {word!r}")
        return next(iter(products))


def _sort_key(x):
    if isinstance(x, frozenset):
        return (1, tuple(sorted(x, key=_sort_key)))
    if isinstance(x, tuple):
        return (2, tuple(_sort_key(v) for v in x))
    return (0, x)


# -- axioms ------------------------------------------------------------------

@dataclass
class AxiomReport:
    passed: bool
    exact: bool
    violations: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def add(self, axiom: str, witness) -> None:
        self.passed = False
        self.violations.append((axiom, witness))


def check_axioms(PG: PartialGroup, word_len_bound: int = 4,
                 pair_budget: int = 6_000_000) -> AxiomReport:
    """Verify the four partial-group axioms on all words of length <= bound.

    For locality-backed partial groups the result is flagged exact (the
    chain-domain structure reduces any word to length-3 configurations);
    for other backends the report is a bounded certificate.
    """
    if word_len_bound < 3:
        raise ValueError("word_len_bound must be >= 3")
    exact = getattr(PG, "is_locality_backed", False)
    report = AxiomReport(passed=True, exact=exact)
    if not exact:
        report.notes.append("bounded certificate")
    els = PG.elements
    one = PG.identity()
    if not PG.in_domain(()) or PG.raw_prod(()) != one:
        report.add("PG2", "empty word")
    for x in els:
        if not PG.in_domain((x,)) or PG.raw_prod((x,)) != x:
            report.add("PG2", (x,))
        if PG.inv(PG.inv(x)) != x:
            report.add("inversion-involutive", x)

    n = len(els)
    lengths = [k for k in range(2, word_len_bound + 1) if n ** k <= pair_budget]
    if lengths and lengths[-1] < min(word_len_bound, 3):
        report.exact = False
        report.notes.append("element count forced a smaller scan bound")

    domain_words: dict[int, list[Word]] = {1: [(x,) for x in els]}
    for k in lengths:
        words_k = []
        prev = domain_words[k - 1]
        for w in prev:
            for x in els:
                wx = w + (x,)
                if PG.in_domain(wx):
                    words_k.append(wx)
                    # PG1: prefixes/suffixes of domain words are in the domain
                    if not PG.in_domain(wx[1:]) or not PG.in_domain(wx[:-1]):
                        report.add("PG1", wx)
        domain_words[k] = words_k

    for k, words_k in domain_words.items():
        if k < 2:
            continue
        for w in words_k:
            # PG4
            winv = tuple(PG.inv(x) for x in reversed(w))
            if not PG.in_domain(winv + w):
                report.add("PG4", w)
            elif PG.raw_prod(winv + w) != one:
                report.add("PG4-product", w)
            # PG3 with every contiguous inner segment collapsed
            for i in range(len(w)):
                for j in range(i + 1, len(w) + 1):
                    mid = PG.raw_prod(w[i:j])
                    w2 = w[:i] + (mid,) + w[j:]
                    if not PG.in_domain(w2):
                        report.add("PG3", (w, i, j))
                    elif PG.raw_prod(w2) != PG.raw_prod(w):
                        report.add("PG3-product", (w, i, j))
    return report


# -- centralizers, commuting predicates --------------------------------------

def centralizer_p(PG: PartialGroup, X: Iterable) -> frozenset:
    """C_L(X) = {y : x in D(y) and x^y = x for all x in X}."""
    X = list(X)
    out = []
    for y in PG.elements:
        iy = PG.inv(y)
        if all(PG.in_domain((iy, x, y)) and PG.raw_prod((iy, x, y)) == x for x in X):
            out.append(y)
    return frozenset(out)


def normalizer_p(PG: PartialGroup, X: Iterable) -> frozenset:
    Xs = frozenset(X)
    out = []
    for y in PG.elements:
        iy = PG.inv(y)
        if all(PG.in_domain((iy, x, y)) for x in Xs):
            if frozenset(PG.raw_prod((iy, x, y)) for x in Xs) == Xs:
                out.append(y)
    return frozenset(out)


def center(PG: PartialGroup) -> frozenset:
    return centralizer_p(PG, PG.elements)


def commutes(PG: PartialGroup, X: Iterable, Y: Iterable) -> bool:
    """X commutes elementwise with Y: (x,y) in D forces (y,x) in D and xy = yx."""
    Y = list(Y)
    for x in X:
        for y in Y:
            if PG.in_domain((x, y)):
                if not PG.in_domain((y, x)):
                    return False
                if PG.raw_prod((x, y)) != PG.raw_prod((y, x)):
                    return False
    return True


def fixes_under_conjugation(PG: PartialGroup, X: Iterable, Y: Iterable) -> bool:
    """X fixes Y under conjugation: y in D(x) forces y^x = y."""
    Y = list(Y)
    for x in X:
        ix = PG.inv(x)
        for y in Y:
            if PG.in_domain((ix, y, x)) and PG.raw_prod((ix, y, x)) != y:
                return False
    return True


# -- closures ----------------------------------------------------------------

def partial_subgroup_closure(PG: PartialGroup, X: Iterable) -> frozenset:
    """Smallest partial subgroup containing X.

    Fixpoint over inversion and pairwise products of composable words;
    pairwise products reach the full closure because PG3 folds longer
    domain words into length-2 configurations.
    """
    members = {PG.identity()}
    frontier = list(set(X) - members)
    members.update(frontier)
    while frontier:
        new = []
        for x in frontier:
            ix = PG.inv(x)
            if ix not in members:
                members.add(ix)
                new.append(ix)
            for y in list(members):
                for w in ((x, y), (y, x)):
                    if PG.in_domain(w):
                        z = PG.raw_prod(w)
                        if z not in members:
                            members.add(z)
                            new.append(z)
        frontier = new
    return frozenset(members)


def normal_closure(PG: PartialGroup, X: Iterable) -> frozenset:
    """Smallest subset containing X closed under inversion, products of
    composable pairs, and every defined conjugation x -> x^f, f in L."""
    full = len(PG.elements)
    members = {PG.identity()}
    frontier = list(set(X) - members)
    members.update(frontier)
    conj_all = getattr(PG, "conj_scan", None)
    while frontier:
        new = []
        for x in frontier:
            ix = PG.inv(x)
            if ix not in members:
                members.add(ix)
                new.append(ix)
            if conj_all is not None:
                images = conj_all(x)
            else:
                images = (PG.raw_prod((PG.inv(f), x, f)) for f in PG.elements
                          if PG.conj_defined(x, f))
            for z in images:
                if z not in members:
                    members.add(z)
                    new.append(z)
            if len(members) == full:
                return frozenset(PG.elements)
            for y in list(members):
                for w in ((x, y), (y, x)):
                    if PG.in_domain(w):
                        z = PG.raw_prod(w)
                        if z not in members:
                            members.add(z)
                            new.append(z)
            if len(members) == full:
                return frozenset(PG.elements)
        frontier = new
    return frozenset(members)


def is_partial_subgroup(PG: PartialGroup, H: frozenset) -> bool:
    if PG.identity() not in H:
        return False
    for x in H:
        if PG.inv(x) not in H:
            return False
        for y in H:
            if PG.in_domain((x, y)) and PG.raw_prod((x, y)) not in H:
                return False
    return True


def is_partial_normal(PG: PartialGroup, N: Iterable) -> bool:
    """N is a partial subgroup with n^f in N for every defined conjugation."""
    N = frozenset(N)
    if not is_partial_subgroup(PG, N):
        return False
    conj_all = getattr(PG, "conj_scan", None)
    for n in N:
        if conj_all is not None:
            if any(z not in N for z in conj_all(n)):
                return False
        else:
            for f in PG.elements:
                if PG.conj_defined(n, f) and PG.conj(n, f) not in N:
                    return False
    return True


# -- quotients and homomorphisms ---------------------------------------------

def quotient(PG: PartialGroup, N: Iterable) -> tuple[QuotientPG, Callable]:
    """Quotient partial group plus the natural projection map."""
    Q = QuotientPG(PG, frozenset(N))
    return Q, Q.project


def is_homomorphism(PG1: PartialGroup, PG2: PartialGroup, mapping: dict,
                    word_len_bound: int = 3) -> bool:
    """Check D(alpha*) <= D~ and product preservation on words up to the bound."""
    els = PG1.elements
    if set(mapping) != set(els):
        return False
    if mapping[PG1.identity()] != PG2.identity():
        return False
    for k in range(1, word_len_bound + 1):
        if len(els) ** k > 2_000_000:
            break
        for w in itertools.product(els, repeat=k):
            if PG1.in_domain(w):
                w2 = tuple(mapping[x] for x in w)
                if not PG2.in_domain(w2):
                    return False
                if mapping[PG1.raw_prod(w)] != PG2.raw_prod(w2):
                    return False
    return True


def is_isomorphism(PG1: PartialGroup, PG2: PartialGroup, mapping: dict,
                   word_len_bound: int = 3) -> bool:
    """Bijective homomorphism whose word map hits exactly the codomain domain."""
    if len(set(mapping.values())) != len(mapping) or len(mapping) != len(PG2.elements):
        return False
    if not is_homomorphism(PG1, PG2, mapping, word_len_bound):
        return False
    inverse = {v: k for k, v in mapping.items()}
    return is_homomorphism(PG2, PG1, inverse, word_len_bound)


def is_simple(PG: PartialGroup) -> bool:
    """Exactly two partial normal subgroups ({1} and L)."""
    from .normal_structure import pn_lattice
    return len(pn_lattice(PG).members) == 2


def direct_product(P1: PartialGroup, P2: PartialGroup) -> DirectProductPG:
    return DirectProductPG(P1, P2)


# -- internal central products -----------------------------------------------

def product_of_sets(PG: PartialGroup, *sets: Iterable) -> frozenset:
    """X1 X2 ... Xn = {Pi(x1..xn) : word composable}."""
    out = set()
    for w in itertools.product(*[list(s) for s in sets]):
        if PG.in_domain(w):
            out.add(PG.raw_prod(w))
    return frozenset(out)


def central_product_check(PG: PartialGroup, factors: Sequence[Iterable],
                          width_bound: int = 3,
                          require_cover: bool = True) -> tuple[bool, Any]:
    """Internal central product test for a list of partial subgroups.

    Checks (P) L = L1...Lk, (C1) L1 x ... x Lk <= D, and the matrix
    condition (C2) for all k x n matrices with rows in the factors and
    n <= width_bound.  (C2) is a bounded certificate; on regular localities
    the commuting predicate is the exact criterion and is what the
    normal-structure layer uses as primary evidence.  Returns (ok, witness).
    """
    factors = [tuple(f) for f in factors]
    if require_cover:
        covered = product_of_sets(PG, *factors)
        if covered != frozenset(PG.elements):
            return False, ("P", "product does not cover the partial group")
    for w in itertools.product(*factors):
        if not PG.in_domain(w):
            return False, ("C1", w)
    k = len(factors)
    for n in range(1, width_bound + 1):
        if any(len(f) ** n > 300_000 for f in factors):
            break
        rows_iter = [itertools.product(f, repeat=n) for f in factors]
        for rows in itertools.product(*rows_iter):
            cols = [tuple(rows[i][j] for i in range(k)) for j in range(n)]
            if any(not PG.in_domain(c) for c in cols):
                continue
            w = tuple(PG.raw_prod(c) for c in cols)
            rows_in = [PG.in_domain(r) for r in rows]
            if PG.in_domain(w) != all(rows_in):
                return False, ("C2-domain", rows)
            if PG.in_domain(w):
                lhs = PG.raw_prod(w)
                rhs_word = tuple(PG.raw_prod(r) for r in rows)
                if not PG.in_domain(rhs_word) or PG.raw_prod(rhs_word) != lhs:
                    return False, ("C2-product", rows)
    return True, None
