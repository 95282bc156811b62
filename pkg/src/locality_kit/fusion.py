"""Explicit finite fusion systems over a p-group S.

Morphisms are stored per domain subgroup as sorted (source, image) pair
tuples on ambient element indices; Hom(P,Q) is derived by filtering images.
Closure under composition, restriction, inversion and inner maps is a
worklist fixpoint over the generating germs.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import PreconditionError
from .group_core import FiniteGroup, o_upper_p, p_part, sylow
from .subgroups import SContext, get_context

Morphism = tuple  # sorted tuple of (src, dst) ambient index pairs


def _map_dom_mask(ctx: SContext, m: Morphism) -> int:
    out = 0
    for s, _ in m:
        out |= 1 << ctx.s_pos[s]
    return out


def _map_img_mask(ctx: SContext, m: Morphism) -> int:
    out = 0
    for _, t in m:
        out |= 1 << ctx.s_pos[t]
    return out


def _restrict(m: Morphism, members: Iterable[int]) -> Morphism:
    members = set(members)
    return tuple(p for p in m if p[0] in members)


def _invert(m: Morphism) -> Morphism:
    return tuple(sorted((t, s) for s, t in m))


def _compose(m1: Morphism, m2: Morphism) -> Morphism:
    d2 = dict(m2)
    return tuple(sorted((s, d2[t]) for s, t in m1))


def _is_injective_hom(amb: FiniteGroup, m: Morphism) -> bool:
    d = dict(m)
    if len(set(d.values())) != len(d):
        return False
    for x in d:
        for y in d:
            z = amb.mul(x, y)
            if z not in d or d[z] != amb.mul(d[x], d[y]):
                return False
    return True


class FusionSystem:
    """A fusion system over ctx.s_list given by closed per-domain map sets."""

    def __init__(self, ctx: SContext, maps: dict[int, frozenset[Morphism]]):
        self.ctx = ctx
        self.p = ctx.p
        self._maps = maps
        self._cache: dict = {}

    def __repr__(self) -> str:
        total = sum(len(v) for v in self._maps.values())
        return f"FusionSystem(|S|={self.ctx.ns}, maps={total})"

    @property
    def s_mask(self) -> int:
        return self.ctx.full_mask

    def subgroups(self) -> tuple[int, ...]:
        return self.ctx.subgroups()

    def maps_from(self, mask: int) -> frozenset[Morphism]:
        return self._maps.get(mask, frozenset())

    def homs(self, P: int, Q: int) -> list[Morphism]:
        return [m for m in self.maps_from(P)
                if _map_img_mask(self.ctx, m) & Q == _map_img_mask(self.ctx, m)]

    def auts(self, P: int) -> list[Morphism]:
        return [m for m in self.maps_from(P) if _map_img_mask(self.ctx, m) == P]

    def conjugates(self, P: int) -> tuple[int, ...]:
        out = self._cache.get(("conj", P))
        if out is None:
            out = tuple(sorted({_map_img_mask(self.ctx, m) for m in self.maps_from(P)},
                               key=self.ctx.key))
            self._cache[("conj", P)] = out
        return out

    def same_maps(self, other: "FusionSystem") -> bool:
        if self.ctx.s_list != other.ctx.s_list:
            return False
        keys = set(self._maps) | set(other._maps)
        return all(self.maps_from(k) == other.maps_from(k) for k in keys)

    # -- automorphism groups -------------------------------------------------

    def aut_group(self, P: int) -> tuple[FiniteGroup, dict]:
        """Aut_F(P) as a permutation group on the members of P, plus a map
        from morphisms to group element indices."""
        members = self.ctx.members(P)
        pos = {g: i for i, g in enumerate(members)}
        perms = {}
        for m in self.auts(P):
            d = dict(m)
            perms[m] = tuple(pos[d[g]] for g in members)
        G = FiniteGroup(set(perms.values()), name="AutF")
        return G, {m: G.index[pm] for m, pm in perms.items()}

    def aut_s(self, P: int) -> set[Morphism]:
        """Aut_S(P): automorphisms induced by conjugation inside S."""
        out = self._cache.get(("aut_s", P))
        if out is None:
            out = set()
            nm = self.ctx.normalizer_mask(P)
            for s in self.ctx.members(nm):
                out.add(tuple(sorted((x, self.ctx.amb.conj(x, s))
                                     for x in self.ctx.members(P))))
            self._cache[("aut_s", P)] = out
        return out

    # -- conjugacy-position predicates ----------------------------------------

    def is_fully_normalized(self, P: int) -> bool:
        out = self._cache.get(("fn", P))
        if out is None:
            n = self.ctx.normalizer_mask(P).bit_count()
            out = all(self.ctx.normalizer_mask(Q).bit_count() <= n
                      for Q in self.conjugates(P))
            self._cache[("fn", P)] = out
        return out

    def is_fully_centralized(self, P: int) -> bool:
        out = self._cache.get(("fc", P))
        if out is None:
            n = self.ctx.centralizer_mask(P).bit_count()
            out = all(self.ctx.centralizer_mask(Q).bit_count() <= n
                      for Q in self.conjugates(P))
            self._cache[("fc", P)] = out
        return out

    def is_fully_automized(self, P: int) -> bool:
        G, _ = self.aut_group(P)
        return len(self.aut_s(P)) == p_part(G.n, self.p)

    def is_receptive(self, Q: int) -> bool:
        amb = self.ctx.amb
        auts_q = self.aut_s(Q)
        for P in self.conjugates(Q):
            for phi in self.maps_from(P):
                if _map_img_mask(self.ctx, phi) != Q:
                    continue
                dphi = dict(phi)
                iphi = {v: k for k, v in dphi.items()}
                n_phi = []
                for g in self.ctx.members(self.ctx.normalizer_mask(P)):
                    comp = tuple(sorted((q, dphi[amb.conj(iphi[q], g)])
                                        for q in self.ctx.members(Q)))
                    if comp in auts_q:
                        n_phi.append(g)
                n_mask = self.ctx.mask_of(n_phi)
                if not self.ctx.is_subgroup_mask(n_mask):
                    return False
                if not any(_restrict(m, dphi) == phi for m in self.maps_from(n_mask)):
                    return False
        return True

    def is_saturated(self) -> bool:
        out = self._cache.get("saturated")
        if out is not None:
            return out
        out = self._saturated()
        self._cache["saturated"] = out
        return out

    def _saturated(self) -> bool:
        seen: set[int] = set()
        for P in self.subgroups():
            if P in seen:
                continue
            cls = self.conjugates(P)
            seen.update(cls)
            if not any(self.is_fully_automized(Q) and self.is_receptive(Q)
                       for Q in cls):
                return False
        return True


# -- generation ----------------------------------------------------------------

def germ_of(ctx: SContext, dom_mask: int, f: int) -> Morphism:
    return tuple(sorted((s, ctx.amb.conj(s, f)) for s in ctx.members(dom_mask)))


def generate_from_germs(ctx: SContext, germs: Iterable[tuple[int, int]]) -> FusionSystem:
    """Fusion system generated by conjugation germs (dom_mask, element)."""
    seeds = set()
    for mask, f in germs:
        seeds.add(germ_of(ctx, mask, f))
        seeds.add(germ_of(ctx, ctx.conj_mask(mask, f), ctx.amb.inv(f)))
    for i in range(ctx.ns):  # inner maps
        seeds.add(germ_of(ctx, ctx.full_mask, ctx.s_list[i]))
    return generate(ctx, seeds)


def generate(ctx: SContext, seed_maps: Iterable[Morphism]) -> FusionSystem:
    """Least fusion system containing the seeds and the inner maps: fixpoint
    over restriction to subgroups, composition, and inversion of
    isomorphisms onto images."""
    amb = ctx.amb
    seeds = set()
    for m in seed_maps:
        if not _is_injective_hom(amb, m):
            raise PreconditionError(f"seed is not an injective homomorphism: {m}")
        seeds.add(tuple(sorted(m)))
        seeds.add(_invert(m))
    for s in ctx.s_list:
        seeds.add(germ_of(ctx, ctx.full_mask, s))
    by_dom: dict[int, set[Morphism]] = {}
    work: list[Morphism] = []

    def add(m: Morphism) -> None:
        dm = _map_dom_mask(ctx, m)
        bucket = by_dom.setdefault(dm, set())
        if m not in bucket:
            bucket.add(m)
            work.append(m)

    for sigma in seeds:
        dm = _map_dom_mask(ctx, sigma)
        for P in ctx.subgroups():
            if P & dm == P:
                add(_restrict(sigma, ctx.members(P)))
    while work:
        m = work.pop()
        img = _map_img_mask(ctx, m)
        for sigma in seeds:
            sd = _map_dom_mask(ctx, sigma)
            if img & sd == img:
                add(_compose(m, _restrict(sigma, [t for _, t in m])))
    return FusionSystem(ctx, {k: frozenset(v) for k, v in by_dom.items()})


def group_fusion(G: FiniteGroup, p: int, ctx: SContext | None = None) -> FusionSystem:
    """F_S(G) for S the canonical Sylow p-subgroup."""
    if ctx is None:
        ctx = get_context(G, sylow(G, p), p)
    germs = []
    for g in range(G.n):
        mask = 0
        for i, s in enumerate(ctx.s_list):
            if G.conj(s, g) in ctx.s_pos:
                mask |= 1 << i
        germs.append((mask, g))
    return generate_from_germs(ctx, germs)


# -- normality inside F, local subsystems ---------------------------------------

def extends_fixing(F: FusionSystem, phi: Morphism, X: int,
                   pointwise: bool) -> bool:
    """Does phi extend to a member of Hom_F(<dom(phi), X>, S) normalizing X
    (or fixing it pointwise)?  Backed by a per-(big, X, dom) restriction
    index so repeated queries are set lookups."""
    ctx = F.ctx
    dom = _map_dom_mask(ctx, phi)
    big = ctx.closure_mask(dom | X)
    key = ("ext", big, X, pointwise, dom)
    idx = F._cache.get(key)
    if idx is None:
        xs = ctx.members(X)
        xset = frozenset(xs)
        dom_members = ctx.members(dom)
        good = set()
        for psi in F.maps_from(big):
            d = dict(psi)
            if pointwise:
                ok = all(d[x] == x for x in xs)
            else:
                ok = frozenset(d[x] for x in xs) == xset
            if ok:
                good.add(tuple(sorted((s, d[s]) for s in dom_members)))
        idx = frozenset(good)
        F._cache[key] = idx
    return phi in idx


def is_normal_subgroup_in(F: FusionSystem, X: int) -> bool:
    ctx = F.ctx
    if ctx.normalizer_mask(X) != ctx.full_mask:
        return False
    return all(extends_fixing(F, phi, X, pointwise=False)
               for Q in F.subgroups() for phi in F.maps_from(Q))


def is_central_subgroup_in(F: FusionSystem, X: int) -> bool:
    ctx = F.ctx
    if X & ctx.center_mask() != X:
        return False
    return all(extends_fixing(F, phi, X, pointwise=True)
               for Q in F.subgroups() for phi in F.maps_from(Q))


def o_p_fusion(F: FusionSystem) -> int:
    """O_p(F): the largest subgroup with N_F(P) = F."""
    out = F._cache.get("o_p")
    if out is None:
        normals = [P for P in F.subgroups() if is_normal_subgroup_in(F, P)]
        out = max(normals, key=lambda m: m.bit_count())
        assert all(P & out == P for P in normals), "normal p-subgroups not directed"
        F._cache["o_p"] = out
    return out


def z_fusion(F: FusionSystem) -> int:
    """Z(F): the largest central subgroup."""
    out = F._cache.get("z")
    if out is None:
        out = F.ctx.trivial_mask
        for P in F.subgroups():
            if P.bit_count() > out.bit_count() and is_central_subgroup_in(F, P):
                out = P
        F._cache["z"] = out
    return out


def _sub_system(F: FusionSystem, carrier_mask: int, X: int,
                pointwise: bool) -> FusionSystem:
    ctx = F.ctx
    sub_ctx = get_context(ctx.amb, ctx.members(carrier_mask), ctx.p)
    maps: dict[int, set[Morphism]] = {}
    for Q in F.subgroups():
        if Q & carrier_mask != Q:
            continue
        for phi in F.maps_from(Q):
            if _map_img_mask(ctx, phi) & carrier_mask != _map_img_mask(ctx, phi):
                continue
            if extends_fixing(F, phi, X, pointwise=pointwise):
                sub_mask = sum(1 << sub_ctx.s_pos[s] for s, _ in phi)
                maps.setdefault(sub_mask, set()).add(phi)
    return FusionSystem(sub_ctx, {k: frozenset(v) for k, v in maps.items()})


def normalizer_system(F: FusionSystem, X: int) -> FusionSystem:
    """N_F(X) over N_S(X); requires X fully normalized."""
    out = F._cache.get(("nsys", X))
    if out is None:
        if not F.is_fully_normalized(X):
            raise PreconditionError("normalizer_system requires a fully normalized X")
        out = _sub_system(F, F.ctx.normalizer_mask(X), X, pointwise=False)
        F._cache[("nsys", X)] = out
    return out


def centralizer_system(F: FusionSystem, X: int) -> FusionSystem:
    """C_F(X) over C_S(X); requires X fully centralized."""
    out = F._cache.get(("csys", X))
    if out is None:
        if not F.is_fully_centralized(X):
            raise PreconditionError("centralizer_system requires a fully centralized X")
        out = _sub_system(F, F.ctx.centralizer_mask(X), X, pointwise=True)
        F._cache[("csys", X)] = out
    return out


def inner_fusion(ctx: SContext, carrier_mask: int) -> FusionSystem:
    sub_ctx = get_context(ctx.amb, ctx.members(carrier_mask), ctx.p)
    return generate(sub_ctx, [])



def _f_cached(key):
    """Memoize a module-level F-query on the fusion system object."""
    def deco(fn):
        def wrapped(F, *args):
            k = (key,) + args
            out = F._cache.get(k)
            if out is None:
                out = fn(F, *args)
                F._cache[k] = out
            return out
        wrapped.__name__ = fn.__name__
        wrapped.__doc__ = fn.__doc__
        return wrapped
    return deco

# -- taxonomies ------------------------------------------------------------------

@_f_cached("centric_set")
def centric_set(F: FusionSystem) -> frozenset[int]:
    ctx = F.ctx
    return frozenset(P for P in F.subgroups()
                     if all(ctx.centralizer_mask(Q) & Q == ctx.centralizer_mask(Q)
                            for Q in F.conjugates(P)))


@_f_cached("radical_set")
def radical_set(F: FusionSystem) -> frozenset[int]:
    """F-radical: some fully normalized conjugate Q has O_p(N_F(Q)) = Q."""
    out = []
    for P in F.subgroups():
        for Q in F.conjugates(P):
            if F.is_fully_normalized(Q):
                NQ = normalizer_system(F, Q)
                op_mask_local = o_p_fusion(NQ)
                op_ambient = frozenset(NQ.ctx.members(op_mask_local))
                if op_ambient == frozenset(F.ctx.members(Q)):
                    out.append(P)
                    break
    return frozenset(out)


def fcr_set(F: FusionSystem) -> frozenset[int]:
    return centric_set(F) & radical_set(F)


def is_constrained(F: FusionSystem) -> bool:
    return o_p_fusion(F) in centric_set(F)


@_f_cached("quasicentric_set")
def quasicentric_set(F: FusionSystem) -> frozenset[int]:
    """P with C_F(Q) the inner fusion of C_S(Q) at every fully centralized
    conjugate (agreement across representatives asserted)."""
    out = []
    for P in F.subgroups():
        verdicts = []
        for Q in F.conjugates(P):
            if F.is_fully_centralized(Q):
                CQ = centralizer_system(F, Q)
                inner = inner_fusion(F.ctx, F.ctx.centralizer_mask(Q))
                verdicts.append(CQ.same_maps(inner))
        assert verdicts and len(set(verdicts)) == 1, "F^q witness disagreement"
        if verdicts[0]:
            out.append(P)
    return frozenset(out)


@_f_cached("subcentric_set")
def subcentric_set(F: FusionSystem) -> frozenset[int]:
    """P with O_p(N_F(Q)) centric, at every fully normalized conjugate."""
    if not F.is_saturated():
        raise PreconditionError("subcentric set needs a saturated fusion system")
    fc = centric_set(F)
    out = []
    for P in F.subgroups():
        verdicts = []
        for Q in F.conjugates(P):
            if F.is_fully_normalized(Q):
                NQ = normalizer_system(F, Q)
                op_ambient = frozenset(NQ.ctx.members(o_p_fusion(NQ)))
                verdicts.append(F.ctx.mask_of(op_ambient) in fc)
        assert verdicts and len(set(verdicts)) == 1, "F^s witness disagreement"
        if verdicts[0]:
            out.append(P)
    return frozenset(out)


def is_strongly_closed(F: FusionSystem, T: int) -> bool:
    ctx = F.ctx
    for x in ctx.members(T):
        cyc = ctx.closure_mask(1 << ctx.s_pos[x])
        for m in F.maps_from(cyc):
            if dict(m)[x] not in set(ctx.members(T)):
                return False
    return True


def is_weakly_closed(F: FusionSystem, T: int) -> bool:
    return F.conjugates(T) == (T,)


def focal(F: FusionSystem) -> int:
    ctx = F.ctx
    amb = ctx.amb
    gens = set()
    for P in F.subgroups():
        for m in F.maps_from(P):
            for x, y in m:
                gens.add(amb.mul(amb.inv(x), y))
    return ctx.closure_mask(ctx.mask_of(gens))


def hyperfocal(F: FusionSystem) -> int:
    """hyp(F) = <x^-1 (x a) : a in O^p(Aut_F(P)), P <= S> (standard p'-gen form)."""
    ctx = F.ctx
    amb = ctx.amb
    gens = set()
    for P in F.subgroups():
        G, of_m = F.aut_group(P)
        op = o_upper_p(G, ctx.p, cross_check_bound=0)
        for m, gi in of_m.items():
            if gi in op:
                for x, y in m:
                    gens.add(amb.mul(amb.inv(x), y))
    return ctx.closure_mask(ctx.mask_of(gens))


@_f_cached("f_r_c")
def f_r_c_set(F: FusionSystem, R: int) -> frozenset[int]:
    """F_R^c: U <= R with C_R(U*) <= U* for every F-conjugate U* inside R."""
    ctx = F.ctx
    out = []
    for U in F.subgroups():
        if U & R != U:
            continue
        ok = True
        for U2 in F.conjugates(U):
            if U2 & R == U2:
                cr = ctx.centralizer_mask(U2) & R
                if cr & U2 != cr:
                    ok = False
                    break
        if ok:
            out.append(U)
    return frozenset(out)


# -- products and morphisms -------------------------------------------------------

def star_product(big_ctx: SContext, F1: FusionSystem, F2: FusionSystem) -> FusionSystem:
    """F1 * F2 over S1S2, generated by the maps phi1 * phi2.

    Preconditions ([S1,S2] = 1 and S1 cap S2 central in each factor) are
    checked; well-definedness of each product germ is asserted.
    """
    amb = big_ctx.amb
    s1 = set(F1.ctx.s_list)
    s2 = set(F2.ctx.s_list)
    for x in s1:
        for y in s2:
            if amb.mul(x, y) != amb.mul(y, x):
                raise PreconditionError("factors do not commute elementwise")
    inter = s1 & s2
    for Fi in (F1, F2):
        zm = z_fusion(Fi)
        zmem = set(Fi.ctx.members(zm))
        if not inter <= zmem:
            raise PreconditionError("S1 cap S2 is not central in a factor")
    germs = []
    for P1 in F1.subgroups():
        for phi1 in F1.maps_from(P1):
            d1 = dict(phi1)
            for P2 in F2.subgroups():
                for phi2 in F2.maps_from(P2):
                    d2 = dict(phi2)
                    prod_map = {}
                    ok = True
                    for x1 in d1:
                        for x2 in d2:
                            z = amb.mul(x1, x2)
                            img = amb.mul(d1[x1], d2[x2])
                            if prod_map.setdefault(z, img) != img:
                                ok = False
                                break
                        if not ok:
                            break
                    if not ok:
                        raise PreconditionError("phi1*phi2 not well-defined")
                    germs.append(tuple(sorted(prod_map.items())))
    return generate(big_ctx, germs)


def induces_isomorphism(F: FusionSystem, F2: FusionSystem, alpha: dict[int, int]) -> bool:
    """alpha: S -> S~ bijective homomorphism; checks phi in Hom_F(P,Q) iff
    alpha^-1 phi alpha in Hom_F~(P alpha, Q alpha)."""
    ctx, ctx2 = F.ctx, F2.ctx
    if set(alpha) != set(ctx.s_list) or set(alpha.values()) != set(ctx2.s_list):
        return False
    amb, amb2 = ctx.amb, ctx2.amb
    for x in ctx.s_list:
        for y in ctx.s_list:
            if alpha[amb.mul(x, y)] != amb2.mul(alpha[x], alpha[y]):
                return False
    ialpha = {v: k for k, v in alpha.items()}
    for P in F.subgroups():
        img_mask = ctx2.mask_of(alpha[s] for s in ctx.members(P))
        transported = {tuple(sorted((alpha[s], alpha[t]) for s, t in m))
                       for m in F.maps_from(P)}
        if transported != set(F2.maps_from(img_mask)):
            return False
    _ = ialpha
    return True


def delta_set(F: FusionSystem, L) -> frozenset[int]:
    """delta(F) = {P <= S : P cap F*(L) in F^s}, from any linking locality L
    over F (independence from the choice is a separate suite check)."""
    from .normal_structure import f_star
    ctx = F.ctx
    fstar = f_star(L)
    tstar = ctx.mask_of(fstar & set(ctx.s_list))
    fs = subcentric_set(F)
    out = frozenset(P for P in F.subgroups() if (P & tstar) in fs
                    or ctx.closure_mask(P & tstar) in fs)
    fcr = fcr_set(F)
    assert fcr <= out <= fs, "delta(F) sandwich violated"
    for P in out:
        for Q in F.conjugates(P):
            assert Q in out, "delta(F) not closed under conjugacy"
        for over in ctx.overgroups(P):
            assert over in out, "delta(F) not overgroup-closed"
    return out
