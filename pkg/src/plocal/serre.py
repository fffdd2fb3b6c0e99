"""First-quadrant cohomological Serre spectral sequences and the loop-space solver.

The solver computes H^*(K(Z,n); Z_(p)) from H^*(K(Z,n-1); Z_(p)) by demanding
that the spectral sequence of K(Z,n-1) -> * -> K(Z,n) converge to the
cohomology of a point.  Base degrees are determined one at a time: with the base
known below D, every class of total degree D-1 that survives all differentials
into known cells must be carried isomorphically onto new classes of H^D.

Differentials are never guessed.  On a page d_r is one of
  * zero, because source or target vanishes;
  * Leibniz-determined from a transgression rule (``d_n(ι_{n-1}) = ι_n``);
  * a recorded convergence differential (a kill found at an earlier degree);
  * zero because the only admissible image, ker(d_r) on the target, is zero.
Anything else raises :class:`UnderdeterminedError`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .coeff import (ONE, ZERO, LatticeSolver, Subquotient, columns_to_matrix, inverse,
                    is_unit, kernel_basis, span_basis)
from .errors import (InconsistencyError, OutOfRangeError, PreconditionError,
                     UnderdeterminedError)
from .graded import (CohomologyClass, Generator, GradedCohomology, GradedRingPresentation,
                     format_monomial, free_cohomology, monomial_product, point_cohomology,
                     tensor_label)


@dataclass(frozen=True)
class TransgressionRule:
    fiber_class: str
    base_class: str
    page: int


@dataclass(frozen=True)
class KillRecord:
    """A differential forced by convergence: survivor generators -> new base classes."""

    source: tuple[int, int]
    page: int
    representatives: tuple[tuple[Fraction, ...], ...]
    targets: tuple[tuple[str, Fraction], ...]


@dataclass(frozen=True)
class TransgressionRules:
    rules: tuple[TransgressionRule, ...] = ()
    kills: tuple[KillRecord, ...] = ()

    def kill(self, source, page):
        for k in self.kills:
            if k.source == source and k.page == page:
                return k
        return None


def fundamental_rule(n: int) -> TransgressionRule:
    return TransgressionRule(f"ι_{n - 1}", f"ι_{n}", n)


# ---------------------------------------------------------------------------
# pages


@dataclass
class Cell:
    s: int
    t: int
    gens: tuple[tuple[CohomologyClass, CohomologyClass], ...]
    num: list
    den: list
    exact: bool
    deferred_page: int | None = None
    settled_page: int | None = None

    @property
    def dim(self):
        return len(self.gens)

    @property
    def names(self):
        return [tensor_label(b.name, f.name) for b, f in self.gens]

    def subquotient(self, p) -> Subquotient:
        return Subquotient(self.num, self.den, self.dim, p, self.names)

    def index(self, base_name, fiber_name):
        for i, (b, f) in enumerate(self.gens):
            if b.name == base_name and f.name == fiber_name:
                return i
        return None


@dataclass
class SpectralPage:
    """E_r of a first-quadrant spectral sequence, cells (s,t) with s+t <= max_total.

    Cells with s >= ``open_column`` are unknown (the base is not yet known
    there); differentials landing in (open_column, 0) are deferred.  Cells of
    total degree <= ``exact_through`` are computed exactly; higher ones are
    upper bounds used only as targets.
    """

    r: int
    prime: int
    base: GradedCohomology
    fiber: GradedCohomology
    cells: dict
    max_total: int
    open_column: int | None
    exact_through: int
    rules: TransgressionRules
    excluded: frozenset = frozenset()
    differentials: dict = field(default_factory=dict)
    history: list = field(default_factory=list)

    def module(self, s, t):
        c = self.cells.get((s, t))
        if c is None:
            from .coeff import FgModule
            return FgModule(self.prime)
        return c.subquotient(self.prime).module()

    def nonzero_cells(self):
        return sorted(k for k, c in self.cells.items() if not c.subquotient(self.prime).is_zero())

    def status(self, s, t):
        if s < 0 or t < 0:
            return "zero"
        if (s <= self.base.cutoff and not self.base.by_degree[s]) or \
                (t <= self.fiber.cutoff and not self.fiber.by_degree[t]):
            return "zero"
        if self.open_column is not None and s >= self.open_column:
            return "open" if (s == self.open_column and t == 0) else "virtual"
        if s > self.base.cutoff:
            return "virtual"
        if t > self.fiber.cutoff or s + t > self.max_total or (s, t) in self.excluded:
            return "unknown"
        return "cell" if (s, t) in self.cells else "zero"


def e2_page(base: GradedCohomology, fiber: GradedCohomology, range_: int,
            rules: TransgressionRules | None = None, *, open_column: int | None = None,
            exact_through: int | None = None, strict: bool = True) -> SpectralPage:
    """E_2^{s,t} = H^s(base) ⊗ H^t(fiber) for s+t <= range_.

    The fiber must be torsion-free in every degree t paired with a nonzero
    positive base degree s (s+t <= range_); otherwise the local-coefficient
    Tor terms would be needed.  Cells of total degree <= exact_through
    (default range_ - 1) are tracked exactly; the rest are upper bounds, since
    their outgoing differentials leave the range.
    """
    p = base.prime
    if exact_through is None:
        exact_through = range_ - 1
    if fiber.prime != p:
        raise PreconditionError("base and fiber use different coefficients")
    excluded = set()
    cells = {}
    top_s = base.cutoff if open_column is None else min(base.cutoff, open_column - 1)
    for s in range(0, min(top_s, range_) + 1):
        bcl = base.by_degree[s]
        for t in range(0, min(fiber.cutoff, range_ - s) + 1):
            fcl = fiber.by_degree[t]
            if not bcl or not fcl:
                continue
            if s > 0 and any(not f.free for f in fcl):
                if strict:
                    raise PreconditionError(
                        f"out of transgressive range: fiber torsion in degree {t} meets base "
                        f"degree {s} at bidegree ({s},{t})")
                excluded.add((s, t))
                continue
            gens = []
            for b in bcl:
                for f in fcl:
                    gens.append((b, f))
            dim = len(gens)
            num = [tuple(ONE if i == j else ZERO for i in range(dim)) for j in range(dim)]
            den = []
            for j, (b, f) in enumerate(gens):
                e = b.exponent if not b.free else f.exponent
                if e:
                    den.append(tuple(Fraction(p) ** e if i == j else ZERO for i in range(dim)))
            exact = s + t <= exact_through
            cells[(s, t)] = Cell(s, t, tuple(gens), num, den, exact)
    return SpectralPage(2, p, base, fiber, cells, range_, open_column, exact_through,
                        rules or TransgressionRules(), frozenset(excluded))


# ---------------------------------------------------------------------------
# differentials


class _Diff:
    """Result of computing d_r on one cell."""

    __slots__ = ("kind", "images", "message")

    def __init__(self, kind, images=None, message=""):
        self.kind = kind  # zero | map | virtual | deferred | undetermined
        self.images = images
        self.message = message


def _rule_table(page: SpectralPage):
    return {r.fiber_class: r for r in page.rules.rules}


def _algebra(page: SpectralPage):
    gens = list(page.base.generators)
    names = {g.name for g in gens}
    for rule in page.rules.rules:
        if rule.base_class not in names:
            gens.append(Generator(rule.base_class, rule.page))
    return gens


def _base_monomial(page, name):
    try:
        c = page.base.find(name)
        return c.monomial
    except KeyError:
        for rule in page.rules.rules:
            if rule.base_class == name:
                return ((name, 1),)
    return None


def leibniz(page: SpectralPage, b: CohomologyClass, f: CohomologyClass, r: int):
    """d_r(b⊗f) as {(base monomial, fiber monomial): coeff}; None if not determined.

    Uses d(b⊗f) = (-1)^{|b|} (b⊗1)·d(1⊗f) with d applied to f by the graded
    Leibniz rule from the transgressions of its factors.
    """
    if not (b.free and f.free) or b.monomial is None or f.monomial is None:
        return None
    rules = _rule_table(page)
    fgens = {g.name: g.degree for g in page.fiber.generators}
    pages = []
    for x, _ in f.monomial:
        if x not in rules:
            return None
        pages.append(rules[x].page)
    if not f.monomial:
        return {}
    if r < min(pages):
        return {}
    if any(pg != r for pg in pages):
        return None
    alg = _algebra(page)
    out = {}
    prefix = 0
    for idx, (x, e) in enumerate(f.monomial):
        dx = _base_monomial(page, rules[x].base_class)
        if dx is None:
            return None
        coeff = e if fgens[x] % 2 == 0 else 1
        sign = -1 if (prefix * fgens[x]) % 2 else 1
        rest = list(f.monomial)
        if e == 1:
            rest.pop(idx)
        else:
            rest[idx] = (x, e - 1)
        s, m = monomial_product(alg, b.monomial, dx)
        if s:
            key = (m, tuple(rest))
            val = Fraction((-1) ** b.degree * sign * s * coeff)
            out[key] = out.get(key, 0) + val
        prefix += fgens[x] * e
    return {k: v for k, v in out.items() if v}


def _lookup_target(page, target_key, sym):
    """Convert a symbolic Leibniz value into target-cell coordinates."""
    s2, t2 = target_key
    cell = page.cells[target_key]
    vec = [ZERO] * cell.dim
    for (bm, fm), c in sym.items():
        bc = page.base.find_monomial(s2, bm)
        fc = page.fiber.find_monomial(t2, fm)
        if bc is None or fc is None:
            raise InconsistencyError(
                f"Leibniz value {format_monomial(bm)}⊗{format_monomial(fm)} has no class in E^({s2},{t2})")
        i = cell.index(bc.name, fc.name)
        vec[i] += c
    return tuple(vec)


def _combine(cell: Cell, v, per_gen):
    """Linear extension of per-generator symbolic values to the vector v."""
    out = {}
    for i, c in enumerate(v):
        if c:
            g = per_gen[i]
            if g is None:
                return None
            for k, x in g.items():
                out[k] = out.get(k, 0) + c * x
    return {k: x for k, x in out.items() if x}


def _source_of(key, r):
    s, t = key
    return (s - r, t + r - 1)


def _target_of(key, r):
    s, t = key
    return (s + r, t - r + 1)


def _preimage(page, num, images, target: Cell | None, tdim):
    """Basis of {z in span(num) : d z lies in the target's boundary lattice}."""
    p = page.prime
    k = len(num)
    den = list(target.den) if target is not None else []
    if k == 0:
        return []
    rows = [[images[j][i] for j in range(k)] + [-d[i] for d in den] for i in range(tdim)]
    if tdim == 0:
        return list(num)
    sol = kernel_basis(rows, k + len(den), p)
    cs = span_basis([v[:k] for v in sol], k, p)
    return [tuple(sum((c[j] * num[j][i] for j in range(k) if c[j]), ZERO)
                  for i in range(len(num[0]))) for c in cs]


def _virtual_images(images):
    keys = sorted({key for img in images for key in img}, key=repr)
    return keys, [tuple(img.get(key, ZERO) for key in keys) for img in images]


class _PageDifferentials:
    def __init__(self, page: SpectralPage):
        self.page = page
        self.memo = {}

    def get(self, key) -> _Diff:
        if key not in self.memo:
            self.memo[key] = _Diff("undetermined", message="cycle")  # recursion guard
            self.memo[key] = self._compute(key)
        return self.memo[key]

    def _compute(self, key) -> _Diff:
        page, r, p = self.page, self.page.r, self.page.prime
        cell = page.cells[key]
        sq = cell.subquotient(p)
        if sq.is_zero():
            return _Diff("zero")
        tkey = _target_of(key, r)
        st = page.status(*tkey)
        if st == "zero":
            return _Diff("zero")
        kill = page.rules.kill(key, r)
        if kill is not None:
            return self._kill_map(key, cell, kill)
        if st == "open":
            return _Diff("deferred")
        if st == "cell" and page.cells[tkey].subquotient(p).is_zero():
            return _Diff("zero")
        if st == "unknown":
            return _Diff("undetermined", message=f"target E^{tkey} lies outside the known range")
        lz = self._leibniz(key, virtual=(st != "cell"))
        if lz is not None:
            return lz
        # not Leibniz-determined: the image must lie in ker(d_r) of the target
        if st != "cell":
            return _Diff("undetermined", message=f"d_{r} on E^{key} into unknown E^{tkey}")
        tcell = page.cells[tkey]
        tdiff = self.get(tkey)
        if tdiff.kind == "zero":
            adm = tcell.subquotient(p)
        elif tdiff.kind in ("map", "virtual"):
            ker = self.kernel(tkey, tdiff)
            adm = Subquotient(span_basis(ker + tcell.den, tcell.dim, p), tcell.den, tcell.dim, p)
        elif tdiff.kind == "deferred" and (lz := self._leibniz(tkey, virtual=True)) is not None:
            ker = self.kernel(tkey, lz)
            adm = Subquotient(span_basis(ker + tcell.den, tcell.dim, p), tcell.den, tcell.dim, p)
        else:
            return _Diff("undetermined", message=f"d_{r} on E^{key} -> E^{tkey} is not determined")
        if adm.is_zero():
            return _Diff("zero")
        return _Diff("undetermined",
                     message=f"d_{r}: E^{key} -> E^{tkey} is not determined "
                             f"(admissible image {adm.module()})")

    def _leibniz(self, key, virtual):
        page = self.page
        cell = page.cells[key]
        per_gen = [leibniz(page, b, f, page.r) for b, f in cell.gens]
        syms = [_combine(cell, v, per_gen) for v in cell.num]
        if any(s is None for s in syms):
            return None
        if all(not s for s in syms):
            return _Diff("zero")
        if not virtual:
            return _Diff("map", [_lookup_target(page, _target_of(key, page.r), s) for s in syms])
        return _Diff("virtual", syms)

    def kernel(self, key, diff: _Diff):
        page = self.page
        cell = page.cells[key]
        if diff.kind == "zero":
            return list(cell.num)
        if diff.kind == "map":
            tkey = _target_of(key, page.r)
            tcell = page.cells[tkey]
            return _preimage(page, cell.num, diff.images, tcell, tcell.dim)
        if diff.kind == "virtual":
            keys, vecs = _virtual_images(diff.images)
            return _preimage(page, cell.num, vecs, None, len(keys))
        return list(cell.num)

    def incoming(self, key):
        """Image vectors of d_r arriving at key (in key's ambient coordinates)."""
        skey = _source_of(key, self.page.r)
        if skey not in self.page.cells:
            return _Diff("zero")
        return self.get(skey)

    def _kill_map(self, key, cell, kill: KillRecord):
        page, p = self.page, self.page.prime
        tkey = _target_of(key, page.r)
        if page.status(*tkey) != "cell":
            return _Diff("undetermined", message=f"recorded differential from E^{key} has no target")
        tcell = page.cells[tkey]
        inc = self.incoming(key)
        extra = list(inc.images) if inc.kind == "map" else []
        quot = Subquotient(cell.num, list(cell.den) + extra, cell.dim, p)
        mod = quot.module()
        Z = [quot.coords(z) for z in kill.representatives]
        if len(Z) != mod.ngens:
            raise InconsistencyError(f"recorded differential from E^{key} does not match the page")
        Zinv = inverse(columns_to_matrix(Z, mod.ngens)) if Z else []
        tvecs = []
        for name, coeff in kill.targets:
            i = tcell.index(name, "1")
            if i is None:
                raise InconsistencyError(f"class {name} missing from E^{tkey}")
            tvecs.append((i, coeff))
        images = []
        for v in cell.num:
            y = quot.coords(v)
            c = [sum((Zinv[i][j] * y[j] for j in range(len(y))), ZERO) for i in range(len(Z))]
            img = [ZERO] * tcell.dim
            for ci, (i, coeff) in zip(c, tvecs):
                img[i] += ci * coeff
            images.append(tuple(img))
        return _Diff("map", images)


def _in_span(vec, gens, dim, p):
    basis = span_basis(gens, dim, p)
    return LatticeSolver(basis, dim, p).solve(vec) is not None


def page_turn(page: SpectralPage, rules: TransgressionRules | None = None) -> SpectralPage:
    """Compute d_r on every cell and return E_{r+1}.

    Raises UnderdeterminedError when an exactly-tracked cell supports a
    differential that the rules do not determine.
    """
    if rules is not None:
        page.rules = rules
    p, r = page.prime, page.r
    diffs = _PageDifferentials(page)
    for key in sorted(page.cells):
        d = diffs.get(key)
        page.differentials[key] = d
        if d.kind == "undetermined" and page.cells[key].exact:
            raise UnderdeterminedError(f"page {r}: {d.message}")
    _check_dd(page, diffs)
    new_cells = {}
    for key in sorted(page.cells):
        cell = page.cells[key]
        out = page.differentials[key]
        inc = diffs.incoming(key)
        if out.kind == "map":
            num = diffs.kernel(key, out)
        elif out.kind == "virtual":
            num = diffs.kernel(key, out) if not cell.exact else list(cell.num)
        else:
            num = list(cell.num)
        den = list(cell.den)
        if inc.kind == "map":
            den = den + [v for v in inc.images if any(v)]
            den = span_basis(den, cell.dim, p) if den else []
        elif inc.kind == "undetermined" and cell.exact:
            raise UnderdeterminedError(f"page {r}: incoming differential at E^{key}: {inc.message}")
        num = span_basis(num + den, cell.dim, p) if (num or den) else []
        nc = Cell(cell.s, cell.t, cell.gens, num, den, cell.exact, cell.deferred_page, cell.settled_page)
        if out.kind == "deferred":
            nc.deferred_page = r
        changed = (inc.kind == "map" and any(any(v) for v in inc.images)) or out.kind == "map"
        if changed and cell.deferred_page is not None and cell.deferred_page < r:
            before = cell.subquotient(p).module()
            after = nc.subquotient(p).module()
            if before != after:
                raise InconsistencyError(
                    f"E^{key} changed on page {r} after its convergence differential on page "
                    f"{cell.deferred_page}")
        new_cells[key] = nc
    nxt = SpectralPage(r + 1, p, page.base, page.fiber, new_cells, page.max_total,
                       page.open_column, page.exact_through, page.rules, page.excluded)
    nxt.history = page.history + [page]
    return nxt


def _check_dd(page, diffs):
    """d_r ∘ d_r = 0 wherever two consecutive differentials are known maps."""
    p, r = page.prime, page.r
    for key, d in page.differentials.items():
        if d.kind != "map":
            continue
        mid = _target_of(key, r)
        d2 = page.differentials.get(mid)
        if d2 is None or d2.kind not in ("map", "virtual"):
            continue
        mcell = page.cells[mid]
        solver = LatticeSolver(mcell.num, mcell.dim, p)
        for img in d.images:
            if not any(img):
                continue
            c = solver.solve(img)
            if c is None:
                raise InconsistencyError(f"d_{r} image from E^{key} is not a cycle in E^{mid}")
            if d2.kind == "map":
                tcell = page.cells[_target_of(mid, r)]
                out = tuple(sum((c[j] * d2.images[j][i] for j in range(len(c))), ZERO)
                            for i in range(tcell.dim))
                if any(out) and not _in_span(out, tcell.den, tcell.dim, p):
                    raise InconsistencyError(f"d_{r}∘d_{r} ≠ 0 starting at E^{key}")
            else:
                acc = {}
                for j, cj in enumerate(c):
                    for k2, x in d2.images[j].items():
                        acc[k2] = acc.get(k2, 0) + cj * x
                if any(acc.values()):
                    raise InconsistencyError(f"d_{r}∘d_{r} ≠ 0 starting at E^{key}")


def run_pages(page: SpectralPage) -> SpectralPage:
    """Turn pages until no differential can be nonzero; return the final page."""
    while page.r <= page.max_total + 1:
        page = page_turn(page)
    return page


# ---------------------------------------------------------------------------
# loop-space solver


@dataclass
class SolveResult:
    base: GradedCohomology
    rules: TransgressionRules
    kill_pages: dict = field(default_factory=dict)  # new class -> (source, page)
    solved_through: int = 0
    notes: list = field(default_factory=list)


def _opaque_name(n, degree, p):
    if n == 3 and degree == 2 * p + 2:
        return f"j_{p}"
    return f"t_{{{n},{degree}}}"


def solve_step(fiber, n, base, rules, D, p, notes):
    """Determine H^D(base). Returns (classes, new generators, kill records)."""
    page = e2_page(base, fiber, D + 1, rules, open_column=D, exact_through=D - 1, strict=False)
    final = run_pages(page)
    survivors = []
    for key in sorted(final.cells):
        s, t = key
        cell = final.cells[key]
        if s + t != D - 1 or D - 1 == 0:
            continue
        sq = cell.subquotient(p)
        if sq.is_zero():
            continue
        if t == 0:
            raise InconsistencyError(
                f"inconsistent input: base class in degree {s} survives to E_infinity")
        if cell.deferred_page != t + 1:
            raise UnderdeterminedError(f"survivor at E^{key} has no unique killing target")
        survivors.append((key, cell, sq))
    if not survivors:
        return [], [], []
    mods = [sq.module() for _, _, sq in survivors]
    if len(survivors) > 1 and any(m.torsion_exponents for m in mods):
        raise UnderdeterminedError(
            f"degree {D}: several survivors {[k for k, _, _ in survivors]} with torsion; "
            "the extension is not determined")
    classes, gens, kills = [], [], []
    rule_tab = {r.fiber_class: r for r in rules.rules}
    alg = _algebra(page)
    used = set()
    for key, cell, sq in survivors:
        mod = sq.module()
        if mod.torsion_exponents and not mod.is_cyclic():
            raise UnderdeterminedError(f"degree {D}: survivor at E^{key} is not cyclic ({mod})")
        r_kill = cell.deferred_page
        targets = []
        for rep, e in zip(mod.basis_change, mod.orders):
            support = [cell.gens[i] for i, c in enumerate(rep) if c]
            if any(not b.free for b, _ in support):
                raise UnderdeterminedError(
                    f"degree {D}: killing E^{key} requires products with the torsion class "
                    f"{next(b.name for b, _ in support if not b.free)}")
            name, mono, coeff = None, None, ONE
            if e == 0:
                per_gen = [leibniz(page, b, f, r_kill) for b, f in cell.gens]
                sym = _combine(cell, rep, per_gen)
                if sym and len(sym) == 1:
                    (bm, fm), c = next(iter(sym.items()))
                    if fm == () and is_unit(c, p):
                        name, mono, coeff = format_monomial(bm), bm, c
            if name is None:
                name = _opaque_name(n, D, p)
                if name in used:
                    name = f"{name}'{len(used)}"
            used.add(name)
            if mono is not None and len(mono) == 1 and mono[0][1] == 1:
                g = mono[0][0]
                if not any(x.name == g for x in base.generators):
                    gens.append(Generator(g, D))
            note = f"d_{r_kill} from E^({key[0]},{key[1]})"
            classes.append(CohomologyClass(name, D, e, mono, (), note))
            targets.append((name, coeff))
            notes.append((name, key, r_kill))
        kills.append(KillRecord(key, r_kill, tuple(mod.basis_change), tuple(targets)))
    del alg, rule_tab
    return classes, gens, kills


def solve_loopspace(fiber: GradedCohomology, n: int, max_total: int,
                    rules: TransgressionRules | None = None, *, stop_on_underdetermined=False):
    p = fiber.prime
    if fiber.cutoff < max_total - 1:
        raise OutOfRangeError(f"fiber known through {fiber.cutoff}; solving through {max_total} "
                              f"needs degree {max_total - 1}", fiber.cutoff + 1)
    if rules is None:
        names = {c.name for cl in fiber.by_degree for c in cl}
        rules = TransgressionRules((fundamental_rule(n),) if f"ι_{n - 1}" in names else ())
    base = point_cohomology(p, 0, f"K(Z,{n})")
    notes = []
    kill_pages = {}
    for D in range(1, max_total + 1):
        step_notes = []
        try:
            classes, gens, kills = solve_step(fiber, n, base, rules, D, p, step_notes)
        except UnderdeterminedError:
            if stop_on_underdetermined:
                return SolveResult(base, rules, kill_pages, D - 1, notes)
            raise
        base = base.extend(D, classes, gens)
        rules = TransgressionRules(rules.rules, rules.kills + tuple(kills))
        for name, key, page in step_notes:
            kill_pages[name] = (key, page)
            if name.startswith("j_") and page != 2 * p - 1:
                notes.append(f"{name} killed on page {page}, not 2p-1 = {2 * p - 1}")
    return SolveResult(base, rules, kill_pages, max_total, notes)


def convergence_audit(fiber: GradedCohomology, result: SolveResult) -> list:
    """Rerun the spectral sequence with the solved base; return nonzero E_infinity cells.

    Checked: every cell of total degree 1..N-1 and the base cell (N,0); cells of
    total degree N may still support differentials into the unknown degree N+1.
    """
    N = result.base.cutoff
    page = e2_page(result.base, result.fiber if hasattr(result, "fiber") else fiber, N + 1,
                   result.rules, open_column=N + 1, exact_through=N - 1, strict=False)
    final = run_pages(page)
    bad = []
    for key, cell in sorted(final.cells.items()):
        s, t = key
        if (1 <= s + t <= N - 1 or key == (N, 0)) and not cell.subquotient(final.prime).is_zero():
            bad.append(key)
    return bad


def loopspace_solve(fiber: GradedCohomology, n: int, max_total: int) -> GradedCohomology:
    """Base cohomology of K(Z,n) through max_total from that of its loop space."""
    res = solve_loopspace(fiber, n, max_total)
    bad = convergence_audit(fiber, res)
    if bad:
        raise InconsistencyError(f"E_infinity nonzero at {bad}")
    return res.base


# ---------------------------------------------------------------------------
# Eilenberg-MacLane spaces


def seed_kz2(p: int, cutoff: int) -> GradedCohomology:
    ring = GradedRingPresentation((Generator("ι_2", 2),), cutoff, p)
    return free_cohomology(ring, "K(Z,2)")


_SEED_LIMIT_SLACK = 8


@lru_cache(maxsize=None)
def _maximal_stage(n: int, p: int) -> SolveResult:
    """K(Z,n) solved as far as the engine can certify."""
    if n == 3:
        limit = 4 * p + _SEED_LIMIT_SLACK
        fiber = seed_kz2(p, limit)
    else:
        prev = _maximal_stage(n - 1, p)
        fiber = prev.base
        limit = fiber.cutoff + 1
    res = solve_loopspace(fiber, n, limit, stop_on_underdetermined=True)
    res.base = GradedCohomology(p, res.base.cutoff, res.base.by_degree, res.base.generators,
                                f"K(Z,{n})", tuple(res.notes))
    bad = convergence_audit(fiber, res)
    if bad:
        raise InconsistencyError(f"K(Z,{n}) at p={p}: E_infinity nonzero at {bad}")
    res.fiber = fiber
    return res


def max_admissible_degree(n: int, p: int) -> int:
    if n == 2:
        return 10 ** 9
    return _maximal_stage(n, p).solved_through


def em_cohomology(n: int, p: int, max_degree: int) -> GradedCohomology:
    """H^*(K(Z,n); Z_(p)) through max_degree, with named classes."""
    if n < 2:
        raise PreconditionError("n must be at least 2")
    _check_prime(p)
    if max_degree < 0:
        raise PreconditionError("max_degree must be nonnegative")
    if n == 2:
        return seed_kz2(p, max_degree)
    adm = max_admissible_degree(n, p)
    if max_degree > adm:
        raise OutOfRangeError(
            f"K(Z,{n}) at p={p}: degree {max_degree} is beyond the certified range; "
            f"maximal admissible degree is {adm}", adm)
    return _maximal_stage(n, p).base.truncate(max_degree)


def em_solve_result(n: int, p: int) -> SolveResult:
    return _maximal_stage(n, p)


def _check_prime(p):
    if p < 2 or any(p % q == 0 for q in range(2, int(p ** 0.5) + 1)):
        raise PreconditionError(f"{p} is not prime")
