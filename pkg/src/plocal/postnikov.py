"""p-local Postnikov stages of BSL_n, BPGL_n and BP(m,n).

Homotopy groups come from Bott periodicity.  Stage cohomology is assembled as
a Künneth product of Eilenberg–MacLane layers for as long as every k-invariant
group vanishes; the order and detection of the first possibly nontrivial
k-invariant k_{2p} of BSL_p are then determined by comparison with the
torsion-free ring H^*(BSL_p; Z_(p)) = Z_(p)[c_2, ..., c_p].
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial

from .coeff import FgModule, cyclic, valuation
from .errors import InconsistencyError, OutOfRangeError, PreconditionError
from .graded import (BocksteinPair, GradedCohomology, point_cohomology, kunneth, uct_reduce,
                     Generator, GradedRingPresentation, free_cohomology)
from .serre import _check_prime, em_cohomology, max_admissible_degree


@dataclass(frozen=True)
class Citation:
    key: str
    statement: str
    source: str


@dataclass(frozen=True)
class SeededFacts:
    """Externally known constants the engine consumes but does not derive."""

    citations: tuple[Citation, ...] = (
        Citation("epsilon",
                 "H^5(K(Z/p,2); Z) ≅ Z/p^ε with ε(p) = 1 for odd p and ε(2) = 2",
                 "H. Cartan, Séminaire Cartan 1954/55, exposés 2–11 (cohomology of K(Π,n))"),
        Citation("bsl_cohomology",
                 "H^*(BSL_n(C); Z_(p)) = Z_(p)[c_2, ..., c_n], torsion-free",
                 "A. Borel, Sur la cohomologie des espaces fibrés principaux (1953); "
                 "J. Milnor and J. Stasheff, Characteristic Classes, §14"),
        Citation("selfmap_dichotomy",
                 "every self-map of BG (G compact connected simple) is either rationally "
                 "trivial or of the form Bα∘ψ^k",
                 "S. Jackowski, J. McClure and B. Oliver, Homotopy classification of self-maps "
                 "of BG via G-actions, Ann. of Math. 135 (1992)"),
        Citation("bott",
                 "π_i(BU) = Z for even i ≥ 2 and 0 for odd i; π_{2n+1}(BSL_n(C)) = Z/(n!)",
                 "R. Bott, The stable homotopy of the classical groups, Ann. of Math. 70 (1959)"),
    )

    def epsilon(self, p: int) -> int:
        return 2 if p == 2 else 1

    def citation(self, key: str) -> Citation:
        for c in self.citations:
            if c.key == key:
                return c
        raise KeyError(key)

    def bsl_ring(self, n: int, p: int, cutoff: int) -> GradedCohomology:
        gens = tuple(Generator(f"c_{i}", 2 * i) for i in range(2, n + 1))
        return free_cohomology(GradedRingPresentation(gens, cutoff, p), f"BSL_{n}")


SEEDED = SeededFacts()


# ---------------------------------------------------------------------------
# spaces and homotopy


@dataclass(frozen=True)
class Space:
    kind: str  # bsl | bpgl | bp
    n: int
    m: int | None = None

    def __post_init__(self):
        if self.kind not in ("bsl", "bpgl", "bp"):
            raise PreconditionError(f"unknown space kind {self.kind!r}")
        if self.n < 2:
            raise PreconditionError("rank must be at least 2")
        if self.kind == "bp" and (self.m is None or self.m < 1):
            raise PreconditionError("BP(m,n) needs m ≥ 1")

    @property
    def label(self) -> str:
        if self.kind == "bsl":
            return f"BSL_{self.n}"
        if self.kind == "bpgl":
            return f"BPGL_{self.n}"
        return f"BP({self.m},{self.n})"

    @classmethod
    def parse(cls, text: str) -> "Space":
        t = text.replace(" ", "")
        if mt := re.fullmatch(r"BSL_?(\d+)", t, re.I):
            return cls("bsl", int(mt[1]))
        if mt := re.fullmatch(r"BPGL_?(\d+)", t, re.I):
            return cls("bpgl", int(mt[1]))
        if mt := re.fullmatch(r"BP\((\d+),(\d+)\)", t, re.I):
            return cls("bp", int(mt[2]), int(mt[1]))
        raise PreconditionError(f"cannot parse space {text!r}")


def _as_space(space) -> Space:
    return space if isinstance(space, Space) else Space.parse(space)


def localized_cyclic(order: int, p: int) -> FgModule:
    """Z/order ⊗ Z_(p)."""
    e = int(valuation(order, p)) if order > 1 else 0
    return cyclic(p, e) if e else FgModule(p)


@dataclass(frozen=True)
class HomotopyTable:
    space: Space
    prime: int
    range: int
    groups: tuple[tuple[int, FgModule], ...]

    def group(self, i: int) -> FgModule:
        if i > self.range:
            raise OutOfRangeError(f"π_{i} is beyond the table range {self.range}", self.range)
        for d, g in self.groups:
            if d == i:
                return g
        return FgModule(self.prime)

    def nonzero(self):
        return [(d, g) for d, g in self.groups if not g.is_zero()]


def homotopy_table(space, p: int, range_: int) -> HomotopyTable:
    sp = _as_space(space)
    _check_prime(p)
    n = sp.n
    if range_ > 2 * n + 1:
        raise OutOfRangeError(f"{sp.label}: Bott periodicity describes π_i only for i ≤ {2 * n + 1}",
                              2 * n + 1)
    groups = []
    for i in range(1, range_ + 1):
        if i % 2 == 0 and 4 <= i <= 2 * n:
            g = FgModule(p, 1)
        elif i == 2 * n + 1:
            g = localized_cyclic(factorial(n), p)
        elif i == 2 and sp.kind == "bpgl":
            g = localized_cyclic(n, p)
        elif i == 2 and sp.kind == "bp":
            g = localized_cyclic(sp.m, p)
        else:
            g = FgModule(p)
        groups.append((i, g))
    return HomotopyTable(sp, p, range_, tuple(groups))


# ---------------------------------------------------------------------------
# stages


@dataclass(frozen=True)
class Layer:
    degree: int
    group: FgModule
    cohomology: GradedCohomology | None = None
    note: str = ""

    @property
    def label(self) -> str:
        if self.group.free_rank == 1 and not self.group.torsion_exponents:
            return f"K(Z_({self.group.prime}),{self.degree})"
        return f"K({self.group},{self.degree})"


@dataclass(frozen=True)
class SplitCheck:
    degree: int
    verdict: str  # yes | unknown
    witness: FgModule


@dataclass(frozen=True)
class KInvariantRecord:
    level: int
    degree: int
    coefficient: FgModule
    ambient: FgModule
    order: int
    detected: bool
    sigma: str
    rho: str
    bockstein: BocksteinPair
    restriction: str
    checks: tuple[tuple[str, str], ...]
    dim_gap: int
    citations: tuple[Citation, ...]


@dataclass
class PostnikovStage:
    space: Space
    prime: int
    level: int
    layers: tuple[Layer, ...]
    cohomology: GradedCohomology | None
    split_checks: tuple[SplitCheck, ...] = ()
    k_invariants: tuple[KInvariantRecord, ...] = ()
    cohomology_level: int = 0
    notes: tuple[str, ...] = ()
    citations: tuple[Citation, ...] = ()

    def mod_p_dim(self, k: int) -> int:
        if self.cohomology is None:
            raise PreconditionError("stage cohomology was not computed")
        return uct_reduce(self.cohomology, k)[0]


def gem_split_check(stage: PostnikovStage, next_layer: Layer) -> tuple[str, FgModule]:
    """Vanishing test for the k-invariant group H^{m+1}(stage; π_m).

    Returns ("yes", 0) when the group vanishes and ("unknown", group) otherwise.
    """
    H = stage.cohomology
    if H is None:
        raise PreconditionError(f"stage τ≤{stage.level} has no computed cohomology")
    m, pi = next_layer.degree, next_layer.group
    p = stage.prime
    if stage.level == 0:
        return "yes", FgModule(p)
    need = m + 1 if not pi.torsion_exponents else m + 2
    if H.cutoff < need:
        raise OutOfRangeError(f"gem_split_check needs stage cohomology through degree {need}; "
                              f"known through {H.cutoff}", H.cutoff)
    witness = coefficient_group(H, m + 1, pi)
    return ("yes" if witness.is_zero() else "unknown"), witness


def coefficient_group(H: GradedCohomology, k: int, pi: FgModule) -> FgModule:
    """H^k(X; π) from integral p-local cohomology by universal coefficients."""
    p = H.prime
    g = H.group(k)
    free, tors = 0, []
    if pi.free_rank:
        free += g.free_rank * pi.free_rank
        tors += list(g.torsion_exponents) * pi.free_rank
    if pi.torsion_exponents:
        g1 = H.group(k + 1)
        for e in pi.torsion_exponents:
            tors += [e] * g.free_rank
            tors += [min(e, f) for f in g.torsion_exponents]
            tors += [min(e, f) for f in g1.torsion_exponents]
    return FgModule(p, free, tuple(sorted(tors)))


def _layer_cohomology(degree: int, p: int, cutoff: int) -> GradedCohomology:
    return em_cohomology(degree, p, cutoff)


@lru_cache(maxsize=None)
def _build(space: Space, p: int, up_to: int, cutoff: int) -> PostnikovStage:
    table = homotopy_table(space, p, up_to)
    layers = []
    notes = []
    cites = [SEEDED.citation("bott")]
    stage_h = point_cohomology(p, cutoff, "pt")
    level = 0
    computing = True
    checks = []
    for d, g in table.nonzero():
        if d == 2 and space.kind != "bsl":
            layers.append(Layer(d, g, None, "K(Z/p,2) layer: cohomology is not computed; stages "
                                         "reuse the BSL tower in degrees ≥ 3"))
            notes.append(f"{space.label}: degrees ≥ 3 use the BSL_{space.n} tower")
            continue
        stage = PostnikovStage(space, p, level, tuple(layers), stage_h if computing else None)
        layer = Layer(d, g)
        if computing:
            verdict, witness = gem_split_check(stage, layer)
            checks.append(SplitCheck(d, verdict, witness))
            if verdict == "yes" and not g.torsion_exponents:
                lh = _layer_cohomology(d, p, cutoff)
                layer = Layer(d, g, lh)
                stage_h = lh if level == 0 else kunneth(stage_h, lh, cutoff)
                stage_h = GradedCohomology(p, cutoff, stage_h.by_degree, stage_h.generators,
                                           f"τ≤{d} {space.label}")
                level = d
            else:
                computing = False
                notes.append(f"stage cohomology computed through τ≤{level}; layer {layer.label} "
                             f"{'has torsion coefficients' if g.torsion_exponents else 'may not split'}")
        layers.append(layer)
    kinv = ()
    if space.kind in ("bsl", "bpgl") and space.n == p and up_to >= 2 * p + 1:
        rec = k_invariant_order(p)
        kinv = (rec,)
        cites += list(rec.citations)
    return PostnikovStage(space, p, up_to, tuple(layers), stage_h, tuple(checks), kinv,
                          level, tuple(notes), tuple(dict.fromkeys(cites)))


def build_tower(space, p: int, up_to: int, cutoff: int | None = None) -> PostnikovStage:
    """The Postnikov stage τ≤up_to of a space, with GEM cohomology where it splits."""
    sp = _as_space(space)
    _check_prime(p)
    if cutoff is None:
        cutoff = up_to + 3
        for d, g in homotopy_table(sp, p, up_to).nonzero():
            if g.free_rank:
                cutoff = min(cutoff, max_admissible_degree(d, p))
    if up_to < 0 or cutoff < 0:
        raise PreconditionError("degrees must be nonnegative")
    return _build(sp, p, up_to, cutoff)


def truncation_compare(n: int, k: int) -> str:
    """What an n-equivalence induces on H^k."""
    if n < 1 or k < 0:
        raise PreconditionError("need n ≥ 1 and k ≥ 0")
    if k <= n - 1:
        return "iso"
    if k == n:
        return "injection"
    return "no-information"


@lru_cache(maxsize=None)
def k_invariant_order(p: int) -> KInvariantRecord:
    """Order and detection of k_{2p} ∈ H^{2p+2}(τ≤2p BSL_p; Z/p)."""
    _check_prime(p)
    top = 2 * p + 3
    stage = build_tower(Space("bsl", p), p, 2 * p, top)
    if stage.cohomology_level != 2 * p:
        raise InconsistencyError(f"τ≤{2 * p} BSL_{p} did not split as a GEM")
    gem = stage.cohomology
    bsl = SEEDED.bsl_ring(p, p, top)
    checks = []
    # (a) free parts agree through 2p+2
    for k in range(0, 2 * p + 3):
        a, b = gem.free_rank(k), bsl.free_rank(k)
        if a != b:
            raise InconsistencyError(f"free rank of H^{k}: GEM {a} vs BSL_{p} {b}")
    checks.append(("free ranks", f"H^k(GEM) and H^k(BSL_{p}) have equal free rank for k ≤ {2 * p + 2}"))
    # (b) H^{2p+3}(GEM) = Z/p·ρ, restricting to a generator on the K(Z_(p),4) factor
    g = gem.group(top)
    if g.free_rank or g.torsion_exponents != (1,):
        raise InconsistencyError(f"H^{top}(GEM) = {g}, expected Z/{p}")
    rho = next(c for c in gem.classes(top) if not c.free)
    factor = rho.parts[0] if rho.parts else rho.name
    if any(x != "1" for x in rho.parts[1:]) or factor == "1":
        raise InconsistencyError(f"ρ = {rho.name} does not come from the K(Z_({p}),4) factor")
    checks.append(("torsion", f"H^{top}(GEM) = Z/{p}·{rho.name}, from the K(Z_({p}),4) factor"))
    # (c) mod-p dimension gap
    d_gem, pairs = uct_reduce(gem, 2 * p + 2)
    d_bsl, _ = uct_reduce(bsl, 2 * p + 2)
    gap = d_gem - d_bsl
    if gap != 1:
        raise InconsistencyError(f"mod-{p} dimension gap at {2 * p + 2} is {gap}, expected 1")
    checks.append(("dimension gap",
                   f"dim H^{2 * p + 2}(GEM; F_{p}) = {d_gem}, dim H^{2 * p + 2}(BSL_{p}; F_{p}) = {d_bsl}"))
    pair = next(pr for pr in pairs if pr.rho == rho.name)
    coeff = cyclic(p, 1)
    ambient = coefficient_group(gem, 2 * p + 2, coeff)
    order = p  # nonzero (the gap) in an F_p-vector space
    if ambient.exponent() is None or order > p ** ambient.exponent():
        raise InconsistencyError("order does not divide the exponent of the ambient group")
    return KInvariantRecord(
        level=2 * p, degree=2 * p + 2, coefficient=coeff, ambient=ambient, order=order,
        detected=True, sigma=pair.sigma, rho=rho.name, bockstein=pair,
        restriction=f"i^*k_{{{2 * p}}} = u·{pair.sigma}, β({pair.sigma}) = {rho.name} on K(Z_({p}),4)",
        checks=tuple(checks), dim_gap=gap,
        citations=(SEEDED.citation("bsl_cohomology"),))


def stage_admissible(p: int, layer_degree: int) -> int:
    return max_admissible_degree(layer_degree, p)
