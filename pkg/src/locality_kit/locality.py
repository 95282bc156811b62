"""Localities (L, Delta, S): partial groups whose word domain is controlled
by chains of objects inside a maximal p-subgroup S.

Every locality here is realized inside an ambient finite group: the carrier
is a subset of the group, the product is the group product, and the domain
oracle is the S_w-in-Delta criterion.  Validity is never assumed from the
construction; check_locality_axioms is the authority.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import (CertificationError, DomainError, ObjectSetError,
                     PreconditionError, TheoremViolation)
from .group_core import (FiniteGroup, Subgroup, has_strongly_p_embedded, is_char_p,
                         o_p, o_upper_p, p_part, quotient_group, subgroup_as_group,
                         sylow)
from .partial_group import PartialGroup, product_of_sets
from .subgroups import SContext, get_context


class Locality(PartialGroup):
    """(L, Delta, S) with domain oracle ``word in D iff S_w in Delta``.

    ``delta`` is a frozenset of subgroup masks over ``ctx.s_list``.  The
    constructor never certifies; call check_locality_axioms.
    """

    backend = "LocalityBacked"
    is_locality_backed = True

    def __init__(self, ctx: SContext, carrier: Iterable[int],
                 delta: frozenset[int], name: str = "L"):
        self.ctx = ctx
        self.amb = ctx.amb
        self.p = ctx.p
        self.delta = frozenset(delta)
        self.carrier = frozenset(carrier)
        self.elements = tuple(sorted(self.carrier))
        self.name = name
        self._pmap: dict[int, list[int]] = {}
        self._sf: dict[int, int] = {}
        for f in self.elements:
            pm = []
            for s in ctx.s_list:
                t = self.amb.conj(s, f)
                pm.append(ctx.s_pos.get(t, -1))
            self._pmap[f] = pm
            self._sf[f] = sum(1 << i for i, v in enumerate(pm) if v >= 0)

    def __repr__(self) -> str:
        return f"Locality({self.name}, |L|={len(self.elements)}, |S|={self.ctx.ns}, p={self.p})"

    # -- partial group interface -----------------------------------------

    def identity(self):
        return self.amb.e

    def inv(self, x):
        return self.amb.inv(x)

    def in_domain(self, word) -> bool:
        m = self.s_w_mask(word)
        return m is not None and m in self.delta

    def raw_prod(self, word):
        return self.amb.prod(word)

    # -- S_w machinery -----------------------------------------------------

    def s_w_mask(self, word) -> int | None:
        """Mask of S_w, or None when a letter is outside the carrier."""
        ns = self.ctx.ns
        cur = list(range(ns))
        for f in word:
            pm = self._pmap.get(f)
            if pm is None:
                return None
            for i in range(ns):
                c = cur[i]
                if c >= 0:
                    cur[i] = pm[c]
        mask = 0
        for i in range(ns):
            if cur[i] >= 0:
                mask |= 1 << i
        return mask

    def s_w(self, word) -> frozenset[int]:
        """S_w as an ambient member set (asserts letters lie in the carrier)."""
        m = self.s_w_mask(word)
        if m is None:
            raise DomainError("word contains elements outside the carrier")
        return frozenset(self.ctx.members(m))

    def sf_mask(self, f: int) -> int:
        return self._sf[f]

    @property
    def S(self) -> frozenset[int]:
        return self.ctx.s_set

    @property
    def s_mask(self) -> int:
        return self.ctx.full_mask

    def domain_is_full(self) -> bool:
        """True iff every word over the carrier is composable."""
        m = self.ctx.full_mask
        for f in self.elements:
            m &= self._sf[f]
        return m in self.delta and all(
            self.ctx.conj_mask(m, f) == m for f in self.elements)

    def conj_scan(self, x: int):
        """All conjugates x^f over f in the carrier where defined (fast path
        used by the generic closure algorithms)."""
        amb = self.amb
        ns = self.ctx.ns
        delta = self.delta
        pmx = [None] * ns
        for i, s in enumerate(self.ctx.s_list):
            pmx[i] = self.ctx.s_pos.get(amb.conj(s, x), -1)
        out = []
        for f in self.elements:
            pmf = self._pmap[f]
            pmfi = self._pmap[amb.inv(f)]
            mask = 0
            for i in range(ns):
                c = pmfi[i]
                if c >= 0:
                    c = pmx[c]
                    if c >= 0 and pmf[c] >= 0:
                        mask |= 1 << i
            if mask in delta:
                out.append(amb.conj(x, f))
        return out

    # -- locality-specific operations --------------------------------------

    def normalizer_set(self, P: frozenset[int]) -> frozenset[int]:
        """N_L(P) as an element set (a group when P is an object)."""
        pm = self.ctx.mask_of(P)
        out = []
        for f in self.elements:
            if self._sf[f] & pm == pm and self.ctx.conj_mask(pm, f) == pm:
                out.append(f)
        return frozenset(out)

    def normalizer_pair_set(self, P: frozenset[int], Q: frozenset[int]) -> frozenset[int]:
        """Transporter N_L(P, Q) = {f : P <= S_f, P^f = Q}."""
        pm, qm = self.ctx.mask_of(P), self.ctx.mask_of(Q)
        return frozenset(f for f in self.elements
                         if self._sf[f] & pm == pm and self.ctx.conj_mask(pm, f) == qm)

    def centralizer_set(self, X: Iterable[int]) -> frozenset[int]:
        X = list(X)
        out = []
        for f in self.elements:
            fi = self.amb.inv(f)
            if all(self.in_domain((fi, x, f)) and self.amb.conj(x, f) == x for x in X):
                out.append(f)
        return frozenset(out)

    def normalizer_group(self, P: frozenset[int]) -> tuple[FiniteGroup, dict[int, int]]:
        """N_L(P) as a FiniteGroup plus local->ambient index map (P must be
        an object so that the normalizer is closed under all words)."""
        if self.ctx.mask_of(P) not in self.delta:
            raise PreconditionError("normalizer_group requires an object P in Delta")
        return subgroup_as_group(self.amb, self.normalizer_set(P))

    def o_p_locality(self) -> frozenset[int]:
        """O_p(L) = intersection of all S_w; certified against the largest
        subgroup of S normalized by the whole carrier."""
        m = self.ctx.full_mask
        for f in self.elements:
            m &= self._sf[f]
        # length-1 words suffice: S_w over longer words only shrinks the mask
        best = self.ctx.trivial_mask
        for cand in self.ctx.subgroups():
            if all(self._sf[f] & cand == cand and self.ctx.conj_mask(cand, f) == cand
                   for f in self.elements):
                if cand.bit_count() > best.bit_count():
                    best = cand
        m = self.ctx.closure_mask(m)
        if best != m:
            raise CertificationError("O_p(L) disagreement between S_w intersection "
                                     "and the normalized-subgroup scan")
        return frozenset(self.ctx.members(m))

    def restriction(self, delta2: frozenset[int], name: str = "") -> "Locality":
        if not delta2 or not delta2 <= self.delta:
            raise PreconditionError("restriction needs a nonempty subset of Delta")
        carrier = [f for f in self.elements if self._sf[f] in delta2]
        return Locality(self.ctx, carrier, delta2, name or self.name + "|restr")


# -- constructing localities from finite groups -------------------------------


def objects_f_closed(ctx: SContext, delta: frozenset[int],
                     conj_source: Iterable[int]) -> tuple[bool, object]:
    """Overgroup-closure in S plus closure under conjugation by the given
    ambient elements (into S).  Returns (ok, witness)."""
    for m in delta:
        if not ctx.is_subgroup_mask(m):
            return False, ("not-a-subgroup", m)
        for over in ctx.overgroups(m):
            if over not in delta:
                return False, ("missing-overgroup", m, over)
    for m in delta:
        for g in conj_source:
            img = ctx.conj_mask(m, g)
            if img is not None and img not in delta:
                return False, ("missing-conjugate", m, g)
    return True, None


def from_group(G: FiniteGroup, p: int, delta_masks: Iterable[int] | None = None,
               ctx: SContext | None = None, name: str = "L",
               certify: bool = True) -> Locality:
    """Build ({g : S_g in Delta}, Delta, S) inside G and certify it.

    ``delta_masks`` defaults to all subgroups of S.  The membership rule is
    the length-1 chain test; validity is certified post hoc, not assumed.
    """
    if ctx is None:
        ctx = get_context(G, sylow(G, p), p)
    if delta_masks is None:
        delta_masks = ctx.subgroups()
    delta = frozenset(delta_masks)
    ok, witness = objects_f_closed(ctx, delta, range(G.n))
    if not ok:
        raise ObjectSetError(f"Delta is not closed: {witness}")
    carrier = []
    for g in range(G.n):
        m = 0
        for i, s in enumerate(ctx.s_list):
            t = G.conj(s, g)
            pos = ctx.s_pos.get(t)
            if pos is not None:
                m |= 1 << i
        if m in delta:
            carrier.append(g)
    L = Locality(ctx, carrier, delta, name=name)
    if certify:
        report = check_locality_axioms(L)
        if not report.passed:
            raise CertificationError(f"locality axioms fail: {report.violations[:3]}")
    return L


@dataclass
class LocalityReport:
    passed: bool
    violations: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def add(self, what: str, witness) -> None:
        self.passed = False
        self.violations.append((what, witness))


def check_locality_axioms(L: Locality, closure_scan_bound: int = 600) -> LocalityReport:
    """Verify the three locality bullets exactly.

    S-maximality is decided by the Sylow criterion S in Syl_p(N_L(S)) (a
    p-subgroup strictly above S would already grow inside the normalizer);
    for small carriers the direct closure scan over p-elements is run too.
    """
    ctx = L.ctx
    report = LocalityReport(passed=True)
    amb = L.amb

    if amb.e not in L.carrier:
        report.add("identity-missing", None)
    if not ctx.s_set <= L.carrier:
        report.add("S-not-in-carrier", None)
    if ctx.full_mask not in L.delta:
        report.add("S-not-an-object", None)
    if p_part(ctx.ns, ctx.p) != ctx.ns:
        report.add("S-not-a-p-group", ctx.ns)

    ok, witness = objects_f_closed(ctx, L.delta, L.elements)
    if not ok:
        report.add("Delta-not-closed", witness)

    # carrier is exactly {f : S_f in Delta} and is inversion/product closed
    for f in L.elements:
        if L._sf[f] not in L.delta:
            report.add("carrier-element-without-object", f)
        if amb.inv(f) not in L.carrier:
            report.add("carrier-not-inversion-closed", f)

    # S maximal among p-subgroups of L
    NS = L.normalizer_set(ctx.s_set)
    NSg, emb = subgroup_as_group(amb, NS)
    if len(sylow(NSg, ctx.p)) != ctx.ns:
        report.add("S-not-maximal", "larger p-subgroup inside N_L(S)")
    if len(L.elements) <= closure_scan_bound:
        from .partial_group import partial_subgroup_closure
        for x in L.elements:
            n = amb.order_of(x)
            if n == 1 or p_part(n, ctx.p) != n:
                continue
            Q = partial_subgroup_closure(L, ctx.members(ctx.full_mask) + (x,))
            if all(p_part(amb.order_of(y), ctx.p) == amb.order_of(y) for y in Q):
                if len(Q) > ctx.ns:
                    report.add("S-not-maximal", ("p-subgroup-closure", x))

    # products of composable pairs stay in the carrier
    for f in L.elements:
        sf = L._sf[f]
        for g in L.elements:
            m = 0
            pmg = L._pmap[g]
            pmf = L._pmap[f]
            for i in range(ctx.ns):
                c = pmf[i]
                if c >= 0 and pmg[c] >= 0:
                    m |= 1 << i
            if m in L.delta and amb.mul(f, g) not in L.carrier:
                report.add("carrier-not-product-closed", (f, g))
        _ = sf
    return report


# -- fusion extraction ---------------------------------------------------------

def fusion_system(L: Locality):
    """F_S(L): fusion system generated by the conjugation germs c_f|S_f."""
    from .fusion import FusionSystem, generate_from_germs
    germs = []
    for f in L.elements:
        germs.append((L._sf[f], f))
    return generate_from_germs(L.ctx, germs)


def fusion_system_of(L: Locality, H: Iterable[int]):
    """F_{S cap H}(H) for a partial subgroup H of L."""
    from .fusion import generate_from_germs
    H = frozenset(H)
    t_list = sorted(ctx_member for ctx_member in L.ctx.s_set & H)
    sub_ctx = get_context(L.amb, t_list, L.p)
    germs = []
    for f in sorted(H):
        m = 0
        for i, s in enumerate(sub_ctx.s_list):
            if L.conj_defined(s, f):
                t = L.amb.conj(s, f)
                pos = sub_ctx.s_pos.get(t)
                if pos is not None and L._sf[f] >> L.ctx.s_pos[s] & 1:
                    m |= 1 << i
        germs.append((m, f))
    return generate_from_germs(sub_ctx, germs)


def is_objective_char_p(L: Locality) -> bool:
    for m in sorted(L.delta, key=L.ctx.key):
        NPg, _ = subgroup_as_group(L.amb, L.normalizer_set(frozenset(L.ctx.members(m))))
        if not is_char_p(NPg, L.p):
            return False
    return True


def is_linking(L: Locality) -> bool:
    from .fusion import fcr_set
    if not is_objective_char_p(L):
        return False
    F = fusion_system(L)
    return fcr_set(F) <= L.delta


def commutes_strongly(L: Locality, X: Iterable[int], Y: Iterable[int]) -> bool:
    X, Y = list(X), list(Y)
    for x in X:
        for y in Y:
            mxy = L.s_w_mask((x, y))
            if mxy is None or mxy not in L.delta:
                continue
            myx = L.s_w_mask((y, x))
            if myx != mxy or myx not in L.delta:
                return False
            if L.amb.mul(x, y) != L.amb.mul(y, x):
                return False
    return True


# -- radical objects -----------------------------------------------------------

def radical_objects(L: Locality, N: frozenset[int]) -> tuple[int, ...]:
    """{P in Delta : O_p(N_N(P)) <= P} (N-radical objects), as masks."""
    out = []
    for m in sorted(L.delta, key=L.ctx.key):
        P = frozenset(L.ctx.members(m))
        NN = L.normalizer_set(P) & N
        NNg, emb = subgroup_as_group(L.amb, NN)
        Q = frozenset(emb[i] for i in o_p(NNg, L.p))
        if Q <= P:
            out.append(m)
    return tuple(out)


def r_delta(L: Locality, N: frozenset[int]) -> tuple[int, ...]:
    """R_Delta(SN): P = S, or N_{SN}(P)/P has a strongly p-embedded subgroup
    and N_S(P) is Sylow in N_{SN}(P)."""
    SN = product_of_sets(L, L.ctx.s_set, N)
    out = []
    for m in sorted(L.delta, key=L.ctx.key):
        if m == L.ctx.full_mask:
            out.append(m)
            continue
        P = frozenset(L.ctx.members(m))
        NSNP = L.normalizer_set(P) & SN
        G1, emb = subgroup_as_group(L.amb, NSNP)
        inv_emb = {v: k for k, v in emb.items()}
        NS_P = frozenset(inv_emb[s] for s in L.ctx.members(L.ctx.normalizer_mask(m)))
        if len(NS_P) != p_part(len(G1), L.p):
            continue
        Pl = frozenset(inv_emb[x] for x in P)
        Q, _proj = quotient_group(G1, Pl)
        if has_strongly_p_embedded(Q, L.p):
            out.append(m)
    return tuple(out)


# -- the up-relation and Alperin-style decomposition ---------------------------

def up_relation(L: Locality, N: frozenset[int], fP: tuple[int, frozenset[int]],
                gQ: tuple[int, frozenset[int]]) -> bool:
    """(f,P) up_N (g,Q): some x in N_N(P,Q), y in N_N(P^f, Q^g) with xg = fy."""
    f, P = fP
    g, Q = gQ
    ctx = L.ctx
    pm, qm = ctx.mask_of(P), ctx.mask_of(Q)
    if L._sf[f] & pm != pm or L._sf[g] & qm != qm:
        raise PreconditionError("need P <= S_f and Q <= S_g")
    Pf = frozenset(ctx.members(ctx.conj_mask(pm, f)))
    Qg = frozenset(ctx.members(ctx.conj_mask(qm, g)))
    xs = L.normalizer_pair_set(P, Q) & N
    ys = L.normalizer_pair_set(Pf, Qg) & N
    for x in xs:
        if not L.in_domain((x, g)):
            continue
        xg = L.amb.mul(x, g)
        for y in ys:
            if L.in_domain((f, y)) and L.amb.mul(f, y) == xg:
                return True
    return False


def is_up_maximal(L: Locality, N: frozenset[int], f: int) -> bool:
    """f is up_N-maximal: (f, S_f) up_N (g, Q) forces |Q| = |S_f|."""
    Sf = frozenset(L.ctx.members(L._sf[f]))
    size = len(Sf)
    for g in L.elements:
        sg = L._sf[g]
        for qm in L.ctx.subgroups():
            if qm & sg != qm or qm.bit_count() <= size:
                continue
            if up_relation(L, N, (f, Sf), (g, frozenset(L.ctx.members(qm)))):
                return False
    return True


def alperin_decompose(L: Locality, N: frozenset[int], n: int,
                      depth: int = 6) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Write n in N as Pi(t, n_1..n_k) with S_w = S_n, t in N cap S,
    n_i in O^p(N_N(R_i)) with S_{n_i} = R_i in R_Delta(SN).

    Breadth-first over the allowed generator pool; existence is guaranteed,
    so exhausting the (twice-doubled) depth raises TheoremViolation.
    """
    ctx = L.ctx
    amb = L.amb
    T = sorted(ctx.s_set & N)
    radmasks = r_delta(L, N)
    pool: list[tuple[int, int]] = []  # (element, its R mask)
    for m in radmasks:
        P = frozenset(ctx.members(m))
        NN = L.normalizer_set(P) & N
        NNg, emb = subgroup_as_group(amb, NN)
        op_local = o_upper_p(NNg, L.p, cross_check_bound=0)
        for i in sorted(op_local):
            x = emb[i]
            if L._sf[x] == m:
                pool.append((x, m))
    target_mask = L._sf[n]

    def search(max_depth: int):
        # states: word so far (starting with t in T), current product, S_w mask
        starts = []
        for t in T:
            starts.append(((t,), t, L._sf[t]))
        seen = set()
        frontier = starts
        for _ in range(max_depth + 1):
            new = []
            for word, prodv, mask in frontier:
                if prodv == n and mask == target_mask:
                    return word
                key = (prodv, mask)
                if key in seen:
                    continue
                seen.add(key)
                for x, _m in pool:
                    w2 = word + (x,)
                    m2 = L.s_w_mask(w2)
                    if m2 in L.delta and m2 & target_mask == target_mask:
                        new.append((w2, amb.mul(prodv, x), m2))
            frontier = new
        return None

    for d in (depth, 2 * depth):
        w = search(d)
        if w is not None:
            rs = tuple(L._sf[x] for x in w[1:])
            return w, rs
    raise TheoremViolation(f"no decomposition found for element {n} at depth {2*depth}")


# -- restrictions along smaller carriers (im-partial subgroups) -----------------

def im_partial_restriction(L: Locality, H: frozenset[int], gamma: frozenset[int],
                           X: frozenset[int], name: str = "H|Gamma") -> Locality:
    """H|_Gamma with the Gamma-chain domain inside T = S cap H.

    Verifies that Gamma is closed under H-conjugation and overgroups in T,
    and conditions (Q1) <P, X> in Delta and (Q2) on transporters for the
    supplied X.  The result is a chain-domain partial group realized with
    Sylow carrier T; locality axioms are certified separately by callers
    that need them.
    """
    ctx = L.ctx
    t_members = sorted(ctx.s_set & H)
    sub_ctx = get_context(L.amb, t_members, L.p)
    # gamma is given as masks over sub_ctx
    for m in gamma:
        if not sub_ctx.is_subgroup_mask(m):
            raise ObjectSetError(f"Gamma member is not a subgroup of T: {m}")
        for over in sub_ctx.overgroups(m):
            if over not in gamma:
                raise ObjectSetError(f"Gamma not overgroup-closed in T: {m} < {over}")
    for m in gamma:
        for h in sorted(H):
            img = sub_ctx.conj_mask(m, h)
            if img is not None and img not in gamma:
                mem = frozenset(sub_ctx.members(m))
                if mem <= L.s_w(()):  # only meaningful when conjugation is defined in L
                    if all(L.conj_defined(x, h) for x in mem):
                        raise ObjectSetError(f"Gamma not H-conjugation closed: {m}^{h}")
    xm = ctx.mask_of(X) if X else ctx.trivial_mask
    for m in gamma:
        px = ctx.closure_mask(ctx.mask_of(sub_ctx.members(m)) | xm)
        if px not in L.delta:
            raise ObjectSetError(f"(Q1) fails: <P, X> not an object for P={m}")
    for m1 in gamma:
        for m2 in gamma:
            P1 = frozenset(sub_ctx.members(m1))
            P2 = frozenset(sub_ctx.members(m2))
            trans = {h for h in H
                     if all(L.conj_defined(x, h) for x in P1)
                     and frozenset(L.amb.conj(x, h) for x in P1) == P2}
            p1x = frozenset(ctx.members(ctx.closure_mask(ctx.mask_of(P1) | xm)))
            p2x = frozenset(ctx.members(ctx.closure_mask(ctx.mask_of(P2) | xm)))
            for h in trans:
                if not (all(L.conj_defined(x, h) for x in p1x)
                        and frozenset(L.amb.conj(x, h) for x in p1x) == p2x):
                    raise ObjectSetError(f"(Q2) fails for ({m1},{m2}) at {h}")
    carrier = []
    for f in sorted(H):
        m = 0
        for i, s in enumerate(sub_ctx.s_list):
            if L.conj_defined(s, f):
                pos = sub_ctx.s_pos.get(L.amb.conj(s, f))
                if pos is not None:
                    m |= 1 << i
        if m in gamma:
            carrier.append(f)
    return Locality(sub_ctx, carrier, frozenset(gamma), name=name)
