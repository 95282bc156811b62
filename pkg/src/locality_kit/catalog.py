"""Instance catalog and the spec -> certified locality builder.

Instance specs are JSON-shaped dicts: a base instance carries generator
cycles, a prime and a delta directive; derived instances reference other
instances through "product" or "restrict".  Builds are cached by a content
hash of the fully resolved spec.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

from .errors import PreconditionError
from .fusion import fcr_set, group_fusion, subcentric_set, delta_set
from .group_core import FiniteGroup, cycles_to_perm, direct_product_group, make_group, sylow
from .locality import Locality, from_group
from .subgroups import get_context

CATALOG: dict[str, dict] = {
    "S4_p2_all": {
        "group": [[[0, 1]], [[0, 1, 2, 3]]], "degree": 4, "prime": 2, "delta": "all"},
    "A4_p2_all": {
        "group": [[[0, 1, 2]], [[1, 2, 3]]], "degree": 4, "prime": 2, "delta": "all"},
    "SL23_p2_all": {
        "group": [[[0, 3, 6], [1, 7, 4]], [[0, 5, 1, 2], [3, 6, 7, 4]]],
        "degree": 8, "prime": 2, "delta": "all"},
    "S3_p3_all": {
        "group": [[[0, 1, 2]], [[0, 1]]], "degree": 3, "prime": 3, "delta": "all"},
    "A5_p2_nontrivial": {
        "group": [[[0, 1, 2, 3, 4]], [[0, 1, 2]]], "degree": 5, "prime": 2,
        "delta": "nontrivial"},
    "A5xA5_p2": {
        "product": ["A5_p2_nontrivial", "A5_p2_nontrivial"], "delta": "product"},
    "A4xA4_p2_all": {
        "product": ["A4_p2_all", "A4_p2_all"], "delta": "product"},
    "PSL32_p2_fs": {
        "group": [[[0, 3, 1], [2, 4, 5]], [[1, 5], [2, 6]]],
        "degree": 7, "prime": 2, "delta": "fs"},
    "PSL32_p2_deltaF": {"restrict": "PSL32_p2_fs", "delta": "deltaF"},
    "PSL32_p2_fcr": {"restrict": "PSL32_p2_fs", "delta": "fcr"},
    "PSL32xA4_p2_fs": {
        "product": ["PSL32_p2_fs", "A4_p2_all"], "delta": "fs"},
    "PSL32xA4_p2_deltaF": {"restrict": "PSL32xA4_p2_fs", "delta": "deltaF"},
}

# 2-component product; heavy, so not part of the default catalog
EXTENDED_CATALOG: dict[str, dict] = {
    "PSL32xPSL32_p2_fs": {
        "product": ["PSL32_p2_fs", "PSL32_p2_fs"], "delta": "fs"},
}

_BUILD_CACHE: dict[str, Locality] = {}


def catalog_names(extended: bool = False) -> list[str]:
    names = list(CATALOG)
    if extended:
        names += list(EXTENDED_CATALOG)
    return names


def _spec_of(name_or_spec) -> dict:
    if isinstance(name_or_spec, str):
        spec = CATALOG.get(name_or_spec) or EXTENDED_CATALOG.get(name_or_spec)
        if spec is None:
            raise KeyError(f"unknown instance {name_or_spec!r}")
        return dict(spec, name=name_or_spec)
    return dict(name_or_spec)


def _resolved(spec: dict) -> dict:
    """Inline referenced instances so the content hash is self-contained."""
    out = dict(spec)
    for key in ("product", "restrict"):
        if key in out:
            refs = out[key] if isinstance(out[key], list) else [out[key]]
            out[key + "_resolved"] = [_resolved(_spec_of(r)) for r in refs]
    return out


def spec_hash(spec: dict) -> str:
    return hashlib.sha256(
        json.dumps(_resolved(spec), sort_keys=True).encode()).hexdigest()


def resolve_delta(G: FiniteGroup, p: int, ctx: SContext, directive) -> frozenset[int]:
    """Turn a delta directive into a set of subgroup masks over ctx."""
    if isinstance(directive, list):
        masks = set()
        for gen_lists in directive:
            members = {G.index[cycles_to_perm(c, G.degree)] for c in gen_lists}
            masks.add(ctx.closure_mask(ctx.mask_of(members & set(ctx.s_list))))
        return frozenset(masks)
    if directive == "all":
        return frozenset(ctx.subgroups())
    if directive == "nontrivial":
        return frozenset(ctx.nontrivial())
    F = group_fusion(G, p, ctx)
    if directive == "fcr":
        return frozenset(fcr_set(F))
    if directive == "fs":
        return frozenset(subcentric_set(F))
    if directive == "deltaF":
        L_fs = from_group(G, p, subcentric_set(F), ctx=ctx, name="aux_fs")
        return frozenset(delta_set(F, L_fs))
    raise PreconditionError(f"unknown delta directive {directive!r}")


def build(name_or_spec) -> Locality:
    """Resolve, construct, and certify an instance; cached by content hash."""
    spec = _spec_of(name_or_spec)
    h = spec_hash(spec)
    if h in _BUILD_CACHE:
        return _BUILD_CACHE[h]
    name = spec.get("name", "instance")
    if "restrict" in spec:
        base = build(spec["restrict"])
        ctx = base.ctx
        # delta directives resolve against the base ambient group
        delta = resolve_delta(base.amb, base.p, ctx, spec["delta"])
        L = base.restriction(frozenset(delta) & base.delta, name=name)
    elif "product" in spec:
        f1, f2 = (build(r) for r in spec["product"])
        amb = direct_product_group(f1.amb, f2.amb, name=name + "_amb")
        deg1 = f1.amb.degree
        s_members = set()
        for a in f1.ctx.s_list:
            pa = f1.amb.elements[a]
            for b in f2.ctx.s_list:
                pb = f2.amb.elements[b]
                s_members.add(amb.index[pa + tuple(deg1 + pt for pt in pb)])
        p = f1.p
        if p != f2.p:
            raise PreconditionError("product factors must share the prime")
        ctx = get_context(amb, s_members, p)
        directive = spec["delta"]
        if directive == "product":
            seeds = set()
            for m1 in f1.delta:
                mem1 = [f1.amb.elements[a] for a in f1.ctx.members(m1)]
                for m2 in f2.delta:
                    mem2 = [f2.amb.elements[b] for b in f2.ctx.members(m2)]
                    members = {amb.index[pa + tuple(deg1 + pt for pt in pb)]
                               for pa in mem1 for pb in mem2}
                    seeds.add(ctx.mask_of(members))
            delta = frozenset(m for m in ctx.subgroups()
                              if any(m & s == s for s in seeds))
        else:
            delta = resolve_delta(amb, p, ctx, directive)
        L = from_group(amb, p, delta, ctx=ctx, name=name)
    else:
        gens = [cycles_to_perm(c, spec["degree"]) for c in spec["group"]]
        G = make_group(gens, name=name + "_amb", size_bound=spec.get("bound", 10_000))
        p = spec["prime"]
        ctx = get_context(G, sylow(G, p), p)
        delta = resolve_delta(G, p, ctx, spec["delta"])
        L = from_group(G, p, delta, ctx=ctx, name=name)
    _BUILD_CACHE[h] = L
    return L
