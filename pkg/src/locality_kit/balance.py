"""Normalizer localities N_L(X)|_{N_F(X)^s} and the E-balance verification."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import CertificationError, PreconditionError
from .fusion import (FusionSystem, delta_set, normalizer_system, subcentric_set)
from .locality import Locality, check_locality_axioms, im_partial_restriction
from .normal_structure import (cached_fusion, components, is_subcentric, layer,
                               layer_general, p_residual, pn_lattice, f_star,
                               _cache)
from .subgroups import get_context


@dataclass
class NormalizerLocality:
    """N_L(X) restricted to the subcentric objects of N_F(X)."""

    base: Locality
    x_members: frozenset
    loc: Locality          # carrier N_L(X)|_Gamma over N_S(X)
    gamma: frozenset       # masks over loc.ctx


def _fully_normalized_in(F: FusionSystem, x_mask: int) -> bool:
    return F.is_fully_normalized(x_mask)


def normalizer_locality(L: Locality, X: frozenset) -> NormalizerLocality:
    """Build (N_L(X)|_{N_F(X)^s}, N_F(X)^s, N_S(X)) and certify it is a
    subcentric locality over N_F(X)."""
    cache = _cache(L)
    key = ("normalizer_locality", X)
    if key in cache:
        return cache[key]
    F = cached_fusion(L)
    ctx = L.ctx
    x_mask = ctx.mask_of(X)
    if not _fully_normalized_in(F, x_mask):
        raise PreconditionError("X must be fully F-normalized")
    if not is_subcentric(L):
        raise PreconditionError("the ambient locality must be subcentric")
    NFX = normalizer_system(F, x_mask)
    gamma = frozenset(subcentric_set(NFX))
    # Lemma-level identity: N_F(X)^s = {P <= N_S(X) : PX in F^s}
    fs = frozenset(subcentric_set(F))
    sub_ctx = NFX.ctx
    direct = frozenset(
        m for m in sub_ctx.subgroups()
        if ctx.closure_mask(ctx.mask_of(sub_ctx.members(m)) | x_mask) in fs)
    if direct != gamma:
        raise CertificationError("N_F(X)^s mismatch with {P : PX in F^s}")
    H = L.normalizer_set(X)
    loc = im_partial_restriction(L, H, gamma, X, name=f"{L.name}|N({sorted(X)})")
    report = check_locality_axioms(loc)
    if not report.passed:
        raise CertificationError(f"normalizer locality axioms fail: {report.violations[:3]}")
    FN = cached_fusion(loc)
    if not FN.same_maps(NFX):
        raise CertificationError("fusion system of N_L(X)|Gamma is not N_F(X)")
    if not is_subcentric(loc):
        raise CertificationError("normalizer locality is not subcentric")
    out = NormalizerLocality(L, X, loc, gamma)
    cache[key] = out
    return out


def normalizer_regular(L: Locality, X: frozenset) -> Locality:
    """Restriction of the normalizer locality to delta(N_F(X))."""
    NL = normalizer_locality(L, X)
    FN = cached_fusion(NL.loc)
    d = frozenset(delta_set(FN, NL.loc))
    return NL.loc.restriction(d, name=NL.loc.name + "|delta")


def check_e_balance(L: Locality, X: frozenset) -> tuple[bool, object]:
    """E(N^delta_L(X)) <= E(N_L(X)) <= E(L) as element sets inside L.

    Returns (ok, witness); a failing element would indicate an
    implementation bug, reported with its subnormal chain.
    """
    NL = normalizer_locality(L, X)
    Ld = normalizer_regular(L, X)
    e_delta = layer(Ld)
    e_mid = layer_general(NL.loc)
    e_top = layer_general(L)
    if not e_delta <= e_mid:
        bad = sorted(e_delta - e_mid)[0]
        return False, ("E(N^delta) escapes E(N_L(X))", bad, _chain_of(Ld, bad))
    if not e_mid <= e_top:
        bad = sorted(e_mid - e_top)[0]
        return False, ("E(N_L(X)) escapes E(L)", bad, _chain_of(NL.loc, bad))
    return True, None


def _chain_of(L: Locality, element) -> tuple:
    """A witnessing subnormal chain of a component containing the element."""
    from .normal_structure import subnormal_subgroups, components as comps_of
    for H, chain in subnormal_subgroups(L):
        if element in H and H in comps_of(L):
            return chain
    return ()


def fully_normalized_subgroups(L: Locality) -> list[frozenset]:
    """All fully F-normalized subgroups of S, canonical order."""
    F = cached_fusion(L)
    out = []
    for m in L.ctx.subgroups():
        if F.is_fully_normalized(m):
            out.append(frozenset(L.ctx.members(m)))
    return out


def iterated_normalizer_consistency(L: Locality, X: frozenset, Y: frozenset) -> bool:
    """N_{N_L(X)}(Y) = (N_L(X) cap N_L(Y))|_Gamma = N_{N_L(Y)}(X) with
    Gamma = {P <= N_S(X) cap N_S(Y) : PXY in F^s}: carriers and domains of
    the three descriptions must agree."""
    F = cached_fusion(L)
    ctx = L.ctx
    xm, ym = ctx.mask_of(X), ctx.mask_of(Y)
    if not (F.is_fully_normalized(xm) and F.is_fully_normalized(ym)):
        raise PreconditionError("X and Y must be fully normalized")
    nx = frozenset(ctx.members(ctx.normalizer_mask(xm)))
    ny = frozenset(ctx.members(ctx.normalizer_mask(ym)))
    if not (X <= ny and Y <= nx):
        raise PreconditionError("X and Y must normalize each other")
    NLX = normalizer_locality(L, X)
    FX = cached_fusion(NLX.loc)
    y_sub = NLX.loc.ctx.mask_of(Y)
    if not FX.is_fully_normalized(y_sub):
        raise PreconditionError("Y must be fully N_F(X)-normalized")
    inner1 = normalizer_locality(NLX.loc, Y).loc
    NLY = normalizer_locality(L, Y)
    inner2 = normalizer_locality(NLY.loc, X).loc

    fs = frozenset(subcentric_set(F))
    xym = ctx.closure_mask(xm | ym)
    both = L.normalizer_set(X) & L.normalizer_set(Y)
    mid_ctx = get_context(L.amb, frozenset(ctx.members(ctx.normalizer_mask(xm)))
                          & frozenset(ctx.members(ctx.normalizer_mask(ym))), L.p)
    gamma = frozenset(m for m in mid_ctx.subgroups()
                      if ctx.closure_mask(ctx.mask_of(mid_ctx.members(m)) | xym) in fs)
    mid = im_partial_restriction(L, both, gamma, frozenset(ctx.members(xym)),
                                 name="mid")
    for A, B in ((inner1, mid), (mid, inner2), (inner1, inner2)):
        if frozenset(A.elements) != frozenset(B.elements):
            return False
        if A.ctx.s_list != B.ctx.s_list or A.delta != B.delta:
            return False
    return True
