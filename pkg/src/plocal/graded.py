"""Truncated graded-commutative rings and graded cohomology with named classes."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .coeff import FgModule
from .errors import OutOfRangeError, PreconditionError, UnderdeterminedError

Monomial = tuple  # tuple of (generator name, exponent), exponents > 0, in ring order
ONE_CLASS = "1"


@dataclass(frozen=True)
class Generator:
    name: str
    degree: int

    @property
    def exterior(self) -> bool:
        return self.degree % 2 == 1


@dataclass(frozen=True)
class GradedRingPresentation:
    """Free graded-commutative ring: polynomial on even, exterior on odd generators."""

    generators: tuple[Generator, ...]
    cutoff: int
    prime: int | None = None  # None: rational coefficients

    def generator(self, name) -> Generator:
        for g in self.generators:
            if g.name == name:
                return g
        raise KeyError(name)


def format_monomial(m: Monomial) -> str:
    if not m:
        return ONE_CLASS
    return "·".join(name if e == 1 else f"{name}^{e}" for name, e in m)


def monomial_degree(gens: Sequence[Generator], m: Monomial) -> int:
    deg = {g.name: g.degree for g in gens}
    return sum(deg[n] * e for n, e in m)


def monomial_basis(ring: GradedRingPresentation, degree: int) -> list[Monomial]:
    """All monomials of the given degree, exterior generators used at most once."""
    if degree > ring.cutoff:
        raise OutOfRangeError(f"degree {degree} exceeds cutoff {ring.cutoff}", ring.cutoff)
    if degree < 0:
        return []
    gens = ring.generators
    out = []

    def rec(i, remaining, acc):
        if remaining == 0:
            out.append(tuple(acc))
            return
        if i == len(gens):
            return
        g = gens[i]
        top = min(1, remaining // g.degree) if g.exterior else remaining // g.degree
        for e in range(top, 0, -1):
            rec(i + 1, remaining - e * g.degree, acc + [(g.name, e)])
        rec(i + 1, remaining, acc)

    rec(0, degree, [])
    return out


def monomial_product(gens: Sequence[Generator], m1: Monomial, m2: Monomial):
    """(sign, monomial) for m1*m2, or (0, None) when an exterior square appears."""
    order = {g.name: i for i, g in enumerate(gens)}
    odd = {g.name for g in gens if g.exterior}
    e1, e2 = dict(m1), dict(m2)
    sign = 1
    # moving each odd factor of m2 left past the odd factors of m1 that sort after it
    for b in e2:
        if b in odd:
            for a in e1:
                if a in odd and order[a] > order[b]:
                    sign = -sign
    merged = dict(e1)
    for n, e in e2.items():
        merged[n] = merged.get(n, 0) + e
    for n, e in merged.items():
        if n in odd and e > 1:
            return 0, None
    return sign, tuple(sorted(merged.items(), key=lambda t: order[t[0]]))


def _as_element(x) -> dict:
    if isinstance(x, Mapping):
        return {k: Fraction(v) for k, v in x.items() if v}
    return {tuple(x): Fraction(1)}


def multiply(ring: GradedRingPresentation, x, y) -> dict:
    """Koszul-signed product of two elements (monomials or {monomial: coeff})."""
    a, b = _as_element(x), _as_element(y)
    out: dict = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            d = monomial_degree(ring.generators, m1) + monomial_degree(ring.generators, m2)
            if d > ring.cutoff:
                raise OutOfRangeError(f"product degree {d} exceeds cutoff {ring.cutoff}", ring.cutoff)
            s, m = monomial_product(ring.generators, m1, m2)
            if s:
                out[m] = out.get(m, 0) + s * c1 * c2
    return {m: c for m, c in out.items() if c}


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CohomologyClass:
    """One cyclic summand of a cohomology group, with its generator's name.

    ``exponent`` 0 means a free summand, e > 0 means Z/p^e.  Free decomposable
    classes carry their ``monomial`` in the generator algebra; opaque classes
    (discovered torsion, Tor terms) have ``monomial=None``.
    """

    name: str
    degree: int
    exponent: int = 0
    monomial: Monomial | None = None
    parts: tuple[str, ...] = ()
    note: str = ""

    @property
    def free(self) -> bool:
        return self.exponent == 0


@dataclass(frozen=True)
class BocksteinPair:
    sigma_degree: int
    sigma: str
    rho: str
    rho_exponent: int = 1


@dataclass(frozen=True)
class GradedCohomology:
    """H^* through ``cutoff`` as a list of named cyclic summands per degree."""

    prime: int | None
    cutoff: int
    by_degree: tuple[tuple[CohomologyClass, ...], ...]
    generators: tuple[Generator, ...] = ()
    label: str = ""
    notes: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if len(self.by_degree) != self.cutoff + 1:
            raise PreconditionError("by_degree must cover degrees 0..cutoff")

    def classes(self, k: int) -> tuple[CohomologyClass, ...]:
        self._check(k)
        return self.by_degree[k]

    def _check(self, k):
        if k > self.cutoff:
            raise OutOfRangeError(f"{self.label or 'cohomology'} known only through degree "
                                  f"{self.cutoff}; degree {k} requested", self.cutoff)

    def group(self, k: int) -> FgModule:
        if k < 0:
            return FgModule(self.prime)
        cl = self.classes(k)
        return FgModule(self.prime, sum(1 for c in cl if c.free),
                        tuple(c.exponent for c in cl if not c.free),
                        tuple(c.name for c in cl if c.free) + tuple(
                            c.name for c in sorted((c for c in cl if not c.free), key=lambda c: c.exponent)))

    def free_rank(self, k: int) -> int:
        return self.group(k).free_rank

    def find(self, name: str) -> CohomologyClass:
        for cl in self.by_degree:
            for c in cl:
                if c.name == name:
                    return c
        raise KeyError(name)

    def find_monomial(self, degree: int, monomial: Monomial) -> CohomologyClass | None:
        if degree > self.cutoff:
            return None
        for c in self.by_degree[degree]:
            if c.monomial == monomial:
                return c
        return None

    def ring(self) -> GradedRingPresentation:
        return GradedRingPresentation(self.generators, self.cutoff, self.prime)

    def product(self, x: str, y: str) -> dict:
        """Product of two named classes as {class name: coefficient}.

        Only products of free classes with known monomials are defined.
        """
        a, b = self.find(x), self.find(y)
        if a.monomial is None or b.monomial is None or not a.free or not b.free:
            raise UnderdeterminedError(f"product {x}·{y} is not determined (opaque or torsion class)")
        d = a.degree + b.degree
        self._check(d)
        s, m = monomial_product(self.generators, a.monomial, b.monomial)
        if not s:
            return {}
        c = self.find_monomial(d, m)
        if c is None:
            raise UnderdeterminedError(f"product {x}·{y} = {format_monomial(m)} has no recorded class")
        return {c.name: Fraction(s)}

    def product_table(self) -> dict:
        """All defined products of free monomial classes within the cutoff."""
        free = [c for cl in self.by_degree for c in cl if c.free and c.monomial is not None and c.monomial]
        table = {}
        for a in free:
            for b in free:
                if a.degree + b.degree <= self.cutoff:
                    try:
                        table[(a.name, b.name)] = self.product(a.name, b.name)
                    except UnderdeterminedError:
                        pass
        return table

    def torsion_degrees(self) -> list[int]:
        return [k for k, cl in enumerate(self.by_degree) if any(not c.free for c in cl)]

    def extend(self, degree: int, new: Iterable[CohomologyClass], generators=()) -> "GradedCohomology":
        if degree != self.cutoff + 1:
            raise PreconditionError("extend must add exactly the next degree")
        return replace(self, cutoff=degree, by_degree=self.by_degree + (tuple(new),),
                       generators=self.generators + tuple(generators))

    def truncate(self, cutoff: int) -> "GradedCohomology":
        self._check(cutoff)
        return replace(self, cutoff=cutoff, by_degree=self.by_degree[:cutoff + 1])

    def table(self) -> list[tuple[int, int, tuple[int, ...], tuple[str, ...]]]:
        rows = []
        for k in range(self.cutoff + 1):
            g = self.group(k)
            rows.append((k, g.free_rank, g.torsion_exponents, g.generator_names or ()))
        return rows


def point_cohomology(prime, cutoff: int = 0, label: str = "pt") -> GradedCohomology:
    by = ((CohomologyClass(ONE_CLASS, 0, 0, ()),),) + ((),) * cutoff
    return GradedCohomology(prime, cutoff, by, (), label)


def free_cohomology(ring: GradedRingPresentation, label: str = "") -> GradedCohomology:
    """Cohomology that is the free graded-commutative ring itself."""
    by = []
    for k in range(ring.cutoff + 1):
        by.append(tuple(CohomologyClass(format_monomial(m), k, 0, m) for m in monomial_basis(ring, k)))
    return GradedCohomology(ring.prime, ring.cutoff, tuple(by), ring.generators, label)


def tensor_label(a: str, b: str) -> str:
    if a == ONE_CLASS:
        return b
    if b == ONE_CLASS:
        return a
    return f"{a}⊗{b}"


def _parts(c: CohomologyClass) -> tuple[str, ...]:
    return c.parts if c.parts else (c.name,)


def kunneth(X: GradedCohomology, Y: GradedCohomology, cutoff: int) -> GradedCohomology:
    """Cohomology of a product: tensor terms plus Tor terms one degree up."""
    for H, tag in ((X, X.label or "left factor"), (Y, Y.label or "right factor")):
        if H.cutoff < cutoff:
            raise OutOfRangeError(f"{tag} is known only through degree {H.cutoff}; "
                                  f"degree {H.cutoff + 1} is missing for cutoff {cutoff}", H.cutoff)
    if X.prime != Y.prime:
        raise PreconditionError("coefficient rings differ")
    xnames = {g.name for g in X.generators}
    if any(g.name in xnames for g in Y.generators):
        raise PreconditionError("factors share generator names")
    nx = len(_parts(X.by_degree[0][0])) if X.by_degree[0] else 1
    ny = len(_parts(Y.by_degree[0][0])) if Y.by_degree[0] else 1
    by = []
    for k in range(cutoff + 1):
        cl = []
        for a_deg in range(k + 1):
            for a in X.by_degree[a_deg]:
                for b in Y.by_degree[k - a_deg]:
                    if a.free and b.free:
                        e = 0
                    elif a.free or b.free:
                        e = a.exponent or b.exponent
                    else:
                        e = min(a.exponent, b.exponent)
                    mono = None
                    if a.monomial is not None and b.monomial is not None and e == 0:
                        mono = a.monomial + b.monomial
                    cl.append(CohomologyClass(tensor_label(a.name, b.name), k, e, mono,
                                              _parts(a) + _parts(b)))
        for a_deg in range(k):
            for a in X.by_degree[a_deg]:
                for b in Y.by_degree[k - 1 - a_deg]:
                    if not a.free and not b.free:
                        cl.append(CohomologyClass(f"Tor({a.name},{b.name})", k,
                                                  min(a.exponent, b.exponent), None,
                                                  ("Tor",) * (nx + ny), "Tor term"))
        by.append(tuple(cl))
    label = " × ".join(l for l in (X.label, Y.label) if l)
    return GradedCohomology(X.prime, cutoff, tuple(by), X.generators + Y.generators, label)


def uct_reduce(H: GradedCohomology, k: int):
    """Dimension of H^k(-; F_p) and the Bockstein pairs it contains."""
    if k + 1 > H.cutoff:
        raise OutOfRangeError(f"degree {k + 1} is needed but {H.label or 'cohomology'} "
                              f"is known only through {H.cutoff}", H.cutoff - 1)
    if H.prime is None:
        return H.free_rank(k), []
    g, g1 = H.group(k), H.group(k + 1)
    dim = g.free_rank + len(g.torsion_exponents) + len(g1.torsion_exponents)
    rhos = [c for c in H.classes(k + 1) if not c.free]
    pairs = []
    for i, c in enumerate(rhos):
        sigma = "σ" if len(rhos) == 1 else f"σ_{i + 1}"
        pairs.append(BocksteinPair(k, sigma, c.name, c.exponent))
    return dim, pairs
