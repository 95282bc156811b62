"""Partial normal subgroup lattices and the structure theory built on them:
products, the commuting-complement N^perp, p- and p'-residuals, centric
radical classification, the generalized Fitting subgroup, regularity,
repleteness, components and layers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import (CertificationError, NormalityError, PreconditionError,
                     SizeBoundError)
from .group_core import o_p, o_upper_p, subgroup_as_group
from .locality import (Locality, fusion_system, is_linking, r_delta)
from .partial_group import (PartialGroup, QuotientPG, SubsetRestricted, center,
                            commutes, is_partial_normal, product_of_sets, quotient)

LATTICE_MEMBER_BOUND = 4096


def _cache(obj) -> dict:
    c = getattr(obj, "_lk_cache", None)
    if c is None:
        c = {}
        obj._lk_cache = c
    return c


def _member_key(members: frozenset) -> tuple:
    from .partial_group import _sort_key
    return (len(members), tuple(sorted(members, key=_sort_key)))


@dataclass
class PNLattice:
    """All partial normal subgroups of a partial group.

    atoms are the element normal closures; members are all joins of atoms
    (deduplicated), each member certified partial normal.
    """

    pg: PartialGroup
    atoms: tuple[frozenset, ...]
    members: tuple[frozenset, ...]
    _perp: dict = field(default_factory=dict, repr=False)

    def member_index(self, N: frozenset) -> int:
        return self.members.index(N)


def _atom_closure(PG: PartialGroup, x) -> tuple[frozenset, frozenset]:
    """Normal closure of {x}; also returns the inversion/conjugation orbit of
    x inside it (every orbit element has the same closure)."""
    full = len(PG.elements)
    one = PG.identity()
    members = {one, x}
    orbit = {x}
    frontier = [x]
    conj_all = getattr(PG, "conj_scan", None)
    while frontier:
        new = []
        for y in frontier:
            in_orbit = y in orbit
            iy = PG.inv(y)
            if iy not in members:
                members.add(iy)
                new.append(iy)
            if in_orbit:
                orbit.add(iy)
            if conj_all is not None:
                images = conj_all(y)
            else:
                images = [PG.raw_prod((PG.inv(f), y, f)) for f in PG.elements
                          if PG.conj_defined(y, f)]
            for z in images:
                if in_orbit:
                    orbit.add(z)
                if z not in members:
                    members.add(z)
                    new.append(z)
            if len(members) == full:
                return frozenset(PG.elements), frozenset(orbit)
            for w0 in list(members):
                for w in ((y, w0), (w0, y)):
                    if PG.in_domain(w):
                        z = PG.raw_prod(w)
                        if z not in members:
                            members.add(z)
                            new.append(z)
            if len(members) == full:
                return frozenset(PG.elements), frozenset(orbit)
        frontier = new
    return frozenset(members), frozenset(orbit)


def join_pn(PG: PartialGroup, M: frozenset, N: frozenset) -> frozenset:
    """MN = {Pi(m, n) : (m, n) composable}; the join of partial normal
    subgroups (products of partial normals are partial normal)."""
    if M <= N:
        return N
    if N <= M:
        return M
    out = set()
    for m in M:
        for n in N:
            if PG.in_domain((m, n)):
                out.add(PG.raw_prod((m, n)))
    return frozenset(out)


def pn_lattice(PG: PartialGroup, max_members: int = LATTICE_MEMBER_BOUND,
               certify: bool = True) -> PNLattice:
    """Complete list of partial normal subgroups, deterministic order.

    Atoms are the closures <<x>>; completeness follows because every partial
    normal subgroup is the join of the atoms of its elements.  Atom closures
    agree along conjugation/inversion orbits, which prunes recomputation.
    """
    cache = _cache(PG)
    if "pn_lattice" in cache:
        return cache["pn_lattice"]
    atoms: dict[frozenset, None] = {}
    assigned: set = set()
    for x in PG.elements:
        if x in assigned:
            continue
        closure, orbit = _atom_closure(PG, x)
        assigned |= orbit
        atoms[closure] = None
    atom_list = sorted(atoms, key=_member_key)
    found: set[frozenset] = set(atom_list)
    found.add(frozenset([PG.identity()]))
    worklist = list(found)
    while worklist:
        new = set()
        for a in worklist:
            for b in list(found):
                j = join_pn(PG, a, b)
                if j not in found and j not in new:
                    new.add(j)
                    if len(found) + len(new) > max_members:
                        raise SizeBoundError("instance-too-rich: lattice exceeds "
                                             f"{max_members} members")
        found |= new
        worklist = list(new)
    members = tuple(sorted(found, key=_member_key))
    if certify:
        full = frozenset(PG.elements)
        for N in members:
            if N == full or len(N) == 1:
                continue
            if not is_partial_normal(PG, N):
                raise CertificationError("lattice member fails normality check")
    lat = PNLattice(PG, tuple(atom_list), members)
    cache["pn_lattice"] = lat
    return lat


def product_pn(L: Locality, M: frozenset, N: frozenset) -> frozenset:
    """MN with the Theorem-level assertions: MN = NM is partial normal,
    (MN) cap S = (M cap S)(N cap S), and every f in MN splits as f = mn
    with S_f = S_{(m,n)}."""
    for X in (M, N):
        if not is_partial_normal(L, X):
            raise NormalityError("product_pn needs partial normal inputs")
    MN = join_pn(L, M, N)
    NM = join_pn(L, N, M)
    if MN != NM:
        raise CertificationError("MN != NM")
    if not is_partial_normal(L, MN):
        raise CertificationError("MN not partial normal")
    S = L.S
    lhs = MN & S
    rhs = product_of_sets(L, M & S, N & S)
    if lhs != rhs:
        raise CertificationError("(MN) cap S != (M cap S)(N cap S)")
    for f in MN:
        sf = L.sf_mask(f)
        if not any(L.in_domain((m, n)) and L.raw_prod((m, n)) == f
                   and L.s_w_mask((m, n)) == sf
                   for m in M for n in N):
            raise CertificationError(f"no splitting witness with S_f = S_(m,n) for {f}")
    return MN


# -- N^perp ----------------------------------------------------------------------

def n_perp(L: Locality, N: frozenset) -> frozenset:
    """Largest partial normal subgroup commuting with N: the join of all
    commuting lattice atoms (products of commuting partial normals commute)."""
    lat = pn_lattice(L)
    key = ("n_perp", N)
    cached = lat._perp.get(key)
    if cached is not None:
        return cached
    perp = frozenset([L.identity()])
    for A in lat.atoms:
        if commutes(L, A, N):
            perp = join_pn(L, A, perp)
    if not commutes(L, perp, N):
        raise CertificationError("join of commuting atoms fails to commute")
    for M in lat.members:
        if commutes(L, M, N) and not M <= perp:
            raise CertificationError("a commuting member escapes N^perp")
    if perp not in lat.members:
        raise CertificationError("N^perp is not a lattice member")
    lat._perp[key] = perp
    return perp


def c_s_of(L: Locality, N: frozenset) -> frozenset:
    """C_S(N) = S cap C_L(N)."""
    out = []
    for s in sorted(L.S):
        si = L.amb.inv(s)
        if all(L.in_domain((si, n, s)) and L.amb.conj(n, s) == n for n in N):
            out.append(s)
    return frozenset(out)


def normalizer_locality_of_t(L: Locality, T: frozenset) -> Locality:
    """(N_L(T), Delta, S) as a locality on the same context."""
    carrier = L.normalizer_set(T)
    return Locality(L.ctx, carrier, L.delta, name=f"{L.name}|N(T)")


def n_perp_formula(L: Locality, N: frozenset) -> frozenset:
    """C_S(N) O^p_{L_T}(C_L(T)) with T = N cap S; valid on linking localities
    whose object set contains delta(F) (so C_S°(N) = C_S(N))."""
    F = cached_fusion(L)
    from .fusion import delta_set
    if not frozenset(delta_set(F, L)) <= L.delta:
        raise PreconditionError("n_perp_formula needs delta(F) <= Delta")
    T = N & L.S
    LT = normalizer_locality_of_t(L, T)
    CT = L.centralizer_set(T)
    if not CT <= LT.carrier:
        raise CertificationError("C_L(T) escapes N_L(T)")
    K = p_residual(LT, CT)
    return frozenset(product_of_sets(L, c_s_of(L, N), K))


# -- residuals --------------------------------------------------------------------

def p_residual(L: Locality, N: frozenset) -> frozenset:
    """O^p_L(N), computed two ways and compared: the intersection of
    {K normal : (N cap S) K = N}, and the normal closure of the groups
    O^p(N_N(P)) over P in R_Delta(SN)."""
    cache = _cache(L)
    key = ("p_residual", N)
    if key in cache:
        return cache[key]
    lat = pn_lattice(L)
    T = N & L.S
    candidates = [K for K in lat.members
                  if K <= N and product_of_sets(L, T, K) == N]
    if not candidates:
        raise CertificationError("no K with TK = N; N itself should qualify")
    way1 = frozenset.intersection(*candidates)
    gens: set = set()
    for m in r_delta(L, N):
        P = frozenset(L.ctx.members(m))
        NN = L.normalizer_set(P) & N
        NNg, emb = subgroup_as_group(L.amb, NN)
        for i in o_upper_p(NNg, L.p, cross_check_bound=0):
            gens.add(emb[i])
    from .partial_group import normal_closure
    way2 = normal_closure(L, gens)
    if way1 != way2:
        raise CertificationError("p-residual disagreement between lattice "
                                 "intersection and Alperin generation")
    cache[key] = way1
    return way1


def p_prime_residual(L: Locality, N: frozenset) -> frozenset:
    """O^{p'}_L(N) = intersection of {K normal : N cap S <= K <= N}."""
    lat = pn_lattice(L)
    T = N & L.S
    candidates = [K for K in lat.members if T <= K <= N]
    return frozenset.intersection(*candidates)


# -- classification ----------------------------------------------------------------

@dataclass(frozen=True)
class Classification:
    member: frozenset
    is_centric: bool
    is_radical: bool
    is_centric_radical: bool
    perp: frozenset
    z_circ_supported: bool
    csn_equivalence_ok: bool | None  # None when unsupported


def cached_fusion(L: Locality):
    cache = _cache(L)
    if "fusion" not in cache:
        cache["fusion"] = fusion_system(L)
    return cache["fusion"]


def o_p_set(L: Locality) -> frozenset:
    cache = _cache(L)
    if "o_p" not in cache:
        cache["o_p"] = L.o_p_locality()
    return cache["o_p"]


def supports_z_circ(L: Locality) -> bool:
    """C_S°/Z° are computed only when Delta contains delta(F) (there the
    paper identifies them with C_S/Z); elsewhere they would require a
    non-constructive expansion."""
    from .fusion import delta_set
    F = cached_fusion(L)
    try:
        return frozenset(delta_set(F, L)) <= L.delta
    except Exception:
        return False


def z_of(L: Locality, N: frozenset) -> frozenset:
    """Z(N) for the inherited partial-group structure on N."""
    return center(SubsetRestricted(L, N))


def classify(L: Locality, N: frozenset) -> Classification:
    perp = n_perp(L, N)
    centric = perp <= N
    radical = o_p_set(L) <= N
    supported = supports_z_circ(L)
    equiv = None
    if supported:
        equiv = (centric == (perp == z_of(L, N)))
    return Classification(N, centric, radical, centric and radical, perp,
                          supported, equiv)


def f_star(L: Locality) -> frozenset:
    """F*(L) = intersection of all centric radical partial normal subgroups;
    asserted to be itself centric radical, with pairwise intersections of
    centric radicals centric radical."""
    cache = _cache(L)
    if "f_star" in cache:
        return cache["f_star"]
    lat = pn_lattice(L)
    crs = [N for N in lat.members
           if n_perp(L, N) <= N and o_p_set(L) <= N]
    if not crs:
        raise CertificationError("no centric radical members (L itself qualifies)")
    out = frozenset.intersection(*crs)
    for A, B in itertools.combinations(crs, 2):
        AB = A & B
        if not (n_perp(L, AB) <= AB and o_p_set(L) <= AB):
            raise CertificationError("intersection of centric radicals is not "
                                     "centric radical")
    if not (n_perp(L, out) <= out and o_p_set(L) <= out):
        raise CertificationError("F*(L) is not centric radical")
    cache["f_star"] = out
    return out


def is_regular(L: Locality) -> bool:
    from .fusion import delta_set
    return frozenset(delta_set(cached_fusion(L), L)) == L.delta


def is_subcentric(L: Locality) -> bool:
    from .fusion import subcentric_set
    return frozenset(subcentric_set(cached_fusion(L))) == L.delta


# -- repleteness --------------------------------------------------------------------

def _x_pq_mask(L: Locality, T_mask: int, cs_t_mask: int, op_mask: int,
               P: int, Q: int) -> int:
    ctx = L.ctx
    m = ctx.product_mask(P & T_mask, Q & cs_t_mask)
    m = ctx.product_mask(m, op_mask)
    return ctx.closure_mask(m)


def _replete_data(L: Locality, N: frozenset):
    ctx = L.ctx
    T = N & L.S
    T_mask = ctx.mask_of(T)
    LT = normalizer_locality_of_t(L, T)
    CT = L.centralizer_set(T)
    cs_t_mask = ctx.mask_of(frozenset(ctx.members(ctx.centralizer_mask(T_mask))))
    op_mask = ctx.mask_of(o_p_set(L))
    return ctx, T_mask, LT, CT, cs_t_mask, op_mask


def is_n_replete(L: Locality, N: frozenset) -> tuple[bool, object]:
    """X_{P,Q} = (P cap T)(Q cap C_S(T)) O_p(L) lies in Delta for all
    P in R_Delta(SN) and Q in R_Delta(S C_L(T)); returns (ok, witness)."""
    ctx, T_mask, LT, CT, cs_t_mask, op_mask = _replete_data(L, N)
    for P in r_delta(L, N):
        for Q in r_delta(LT, CT):
            x = _x_pq_mask(L, T_mask, cs_t_mask, op_mask, P, Q)
            if x not in L.delta:
                return False, (P, Q, x)
    return True, None


def is_weakly_n_replete(L: Locality, N: frozenset) -> tuple[bool, object]:
    ctx, T_mask, LT, CT, cs_t_mask, op_mask = _replete_data(L, N)
    for P in r_delta(L, N):
        x = _x_pq_mask(L, T_mask, cs_t_mask, op_mask, P, ctx.full_mask)
        if x not in L.delta:
            return False, (P, x)
    return True, None


# -- subnormal subgroups, quasisimplicity, components --------------------------------

def subnormal_subgroups(PG: PartialGroup) -> list[tuple[frozenset, tuple]]:
    """All partial subnormal subgroups with one witnessing chain each
    (chains listed top-down, ending at the subgroup)."""
    cache = _cache(PG)
    if "subnormal" in cache:
        return cache["subnormal"]
    full = frozenset(PG.elements)
    found: dict[frozenset, tuple] = {full: (full,)}
    frontier = [full]
    while frontier:
        new = []
        for H in frontier:
            sub = PG if H == full else SubsetRestricted(PG, H)
            for K in pn_lattice(sub).members:
                if K not in found:
                    found[K] = found[H] + (K,)
                    new.append(K)
        frontier = new
    out = sorted(found.items(), key=lambda kv: _member_key(kv[0]))
    cache["subnormal"] = out
    return out


def o_p_residual_inherited(PG: PartialGroup, S_members: frozenset) -> frozenset:
    """O^p of a partial group with designated maximal p-subgroup: the
    intersection of the partial normal subgroups N with SN = PG."""
    full = frozenset(PG.elements)
    lat = pn_lattice(PG)
    cands = [N for N in lat.members
             if product_of_sets(PG, S_members & full, N) == full]
    return frozenset.intersection(*cands) if cands else full


def is_quasisimple(L: Locality) -> bool:
    """L = O^p(L) and L/Z(L) simple (quotient built with the exact domain,
    simplicity read off the quotient's lattice)."""
    full = frozenset(L.elements)
    if o_p_residual_inherited(L, L.S) != full:
        return False
    Z = center(L)
    Q, _proj = quotient(L, frozenset(Z))
    return len(pn_lattice(Q).members) == 2


def _quasisimple_inherited(PG: PartialGroup, H: frozenset, S_members: frozenset) -> bool:
    sub = SubsetRestricted(PG, H)
    if o_p_residual_inherited(sub, S_members & H) != H:
        return False
    Z = center(sub)
    Q, _proj = quotient(sub, frozenset(Z))
    return len(pn_lattice(Q).members) == 2


def components(L: Locality) -> list[frozenset]:
    """All quasisimple partial subnormal subgroups (L assumed regular; the
    suites certify that precondition)."""
    cache = _cache(L)
    if "components" in cache:
        return cache["components"]
    out = []
    for H, _chain in subnormal_subgroups(L):
        if len(H) == 1:
            continue
        if _quasisimple_inherited(L, H, L.S):
            out.append(H)
    cache["components"] = out
    return out


def layer(L: Locality) -> frozenset:
    """E(L) = product of all components; well-definedness under reordering is
    asserted, as is E(L) normal in L."""
    comps = components(L)
    if not comps:
        return frozenset([L.identity()])
    results = set()
    for order in itertools.permutations(comps):
        prod = order[0]
        for K in order[1:]:
            prod = join_pn(L, prod, K)
        results.add(prod)
    if len(results) != 1:
        raise CertificationError("component product depends on the ordering")
    E = results.pop()
    if not is_partial_normal(L, E):
        raise CertificationError("E(L) is not partial normal")
    return E


def layer_general(L: Locality) -> frozenset:
    """E(L) := O^p_L(F*(L)) for linking localities."""
    return p_residual(L, f_star(L))


def sub_locality(L: Locality, N: frozenset, name: str = "") -> Locality:
    """(N, delta(E), T) with delta(E) = {P <= T : P C_S(N) in Delta}, the
    regular-locality structure on a partial normal subgroup."""
    ctx = L.ctx
    T = N & L.S
    from .subgroups import get_context
    sub_ctx = get_context(L.amb, T, L.p)
    csn_mask = ctx.mask_of(c_s_of(L, N))
    delta_e = []
    for m in sub_ctx.subgroups():
        up = ctx.closure_mask(ctx.product_mask(ctx.mask_of(sub_ctx.members(m)), csn_mask))
        if up in L.delta:
            delta_e.append(m)
    return Locality(sub_ctx, N, frozenset(delta_e), name=name or f"{L.name}|sub")


# -- reports --------------------------------------------------------------------------

def classification_report(L: Locality) -> list[dict]:
    """Per-member table; ids index the lattice member list."""
    lat = pn_lattice(L)
    comps = components(L)
    E = layer_general(L)
    rows = []
    for i, N in enumerate(lat.members):
        cl = classify(L, N)
        op = p_residual(L, N)
        opp = p_prime_residual(L, N)
        rows.append({
            "id": i,
            "size": len(N),
            "s_intersection": sorted(N & L.S),
            "centric": cl.is_centric,
            "radical": cl.is_radical,
            "centric_radical": cl.is_centric_radical,
            "perp_id": lat.member_index(cl.perp),
            "op_id": lat.member_index(op) if op in lat.members else None,
            "opp_id": lat.member_index(opp) if opp in lat.members else None,
            "is_component": N in comps,
            "in_layer": N <= E,
        })
    return rows
