"""Exact linear algebra over the local ring Z_(p) and over Q.

Scalars are stored internally as ``fractions.Fraction`` whose denominators are
prime to p; :class:`PLocalScalar` is the validated public wrapper.  Matrices are
lists of rows.  A vector is a tuple of Fractions.

Finitely generated Z_(p)-modules are handled through lattices: a subquotient
``Z/B`` with ``B <= Z <= Z_(p)^n``.  Everything reduces to Smith normal form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .errors import MalformedMapError, PreconditionError

ZERO = Fraction(0)
ONE = Fraction(1)


def valuation(x, p: int) -> float:
    """p-adic valuation of a rational; ``inf`` for zero."""
    x = Fraction(x)
    if x == 0:
        return float("inf")
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def is_unit(x, p: int) -> bool:
    return valuation(x, p) == 0


@dataclass(frozen=True)
class PLocalScalar:
    """An element of Z_(p): numerator/denominator with p not dividing denominator."""

    numerator: int
    denominator: int
    prime: int

    def __post_init__(self):
        if self.denominator == 0:
            raise PreconditionError("denominator must be nonzero")
        q = Fraction(self.numerator, self.denominator)
        if q.denominator % self.prime == 0:
            raise PreconditionError(f"{q} is not {self.prime}-local")
        object.__setattr__(self, "numerator", q.numerator)
        object.__setattr__(self, "denominator", q.denominator)

    @classmethod
    def of(cls, x, p: int) -> "PLocalScalar":
        q = to_local(x, p)
        return cls(q.numerator, q.denominator, p)

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    @property
    def valuation(self):
        return valuation(self.as_fraction(), self.prime)

    def is_unit(self) -> bool:
        return self.valuation == 0

    def _other(self, other):
        if isinstance(other, PLocalScalar):
            if other.prime != self.prime:
                raise PreconditionError("mixed primes")
            return other.as_fraction()
        return to_local(other, self.prime)

    def __add__(self, other):
        return PLocalScalar.of(self.as_fraction() + self._other(other), self.prime)

    __radd__ = __add__

    def __sub__(self, other):
        return PLocalScalar.of(self.as_fraction() - self._other(other), self.prime)

    def __rsub__(self, other):
        return PLocalScalar.of(self._other(other) - self.as_fraction(), self.prime)

    def __mul__(self, other):
        return PLocalScalar.of(self.as_fraction() * self._other(other), self.prime)

    __rmul__ = __mul__

    def __neg__(self):
        return PLocalScalar(-self.numerator, self.denominator, self.prime)

    def inverse(self) -> "PLocalScalar":
        if not self.is_unit():
            raise PreconditionError(f"{self} is not a unit in Z_({self.prime})")
        return PLocalScalar(self.denominator, self.numerator, self.prime)

    def __str__(self):
        if self.denominator == 1:
            return str(self.numerator)
        return f"{self.numerator}/{self.denominator}"


def to_local(x, p: int | None) -> Fraction:
    """Coerce int / Fraction / PLocalScalar to a Fraction, checking p-locality."""
    if isinstance(x, PLocalScalar):
        if p is not None and x.prime != p:
            raise PreconditionError("mixed primes")
        return x.as_fraction()
    q = Fraction(x)
    if p is not None and q.denominator % p == 0:
        raise PreconditionError(f"{q} is not {p}-local")
    return q


# ---------------------------------------------------------------------------
# dense matrix helpers


def identity(n: int) -> list[list[Fraction]]:
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def matmul(A, B):
    if not A:
        return []
    inner = len(B)
    ncols = len(B[0]) if B else 0
    out = []
    for row in A:
        new = [ZERO] * ncols
        for k in range(inner):
            a = row[k]
            if a:
                bk = B[k]
                for j in range(ncols):
                    if bk[j]:
                        new[j] += a * bk[j]
        out.append(new)
    return out


def transpose(A, ncols: int | None = None):
    if not A:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*A)]


def columns_to_matrix(vectors: Sequence[Sequence[Fraction]], dim: int):
    """Matrix (dim x len(vectors)) whose columns are the given vectors."""
    return [[vectors[j][i] for j in range(len(vectors))] for i in range(dim)]


def inverse(A):
    n = len(A)
    M = [list(row) + [ONE if i == j else ZERO for j in range(n)] for i, row in enumerate(A)]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            raise PreconditionError("singular matrix")
        M[c], M[piv] = M[piv], M[c]
        inv = ONE / M[c][c]
        M[c] = [v * inv for v in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return [row[n:] for row in M]


def determinant(A) -> Fraction:
    n = len(A)
    M = [list(r) for r in A]
    det = ONE
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return ZERO
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = -det
        det *= M[c][c]
        for r in range(c + 1, n):
            if M[r][c] != 0:
                f = M[r][c] / M[c][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return det


# ---------------------------------------------------------------------------
# Smith normal form over Z_(p)


def smith_normal_form(M, p: int):
    """Return ``(U, D, V)`` with ``U*M*V == D`` over Z_(p).

    D is diagonal with entries ``p**e`` (nondecreasing e) followed by zeros; U
    and V have unit determinant.  Pivots are chosen by minimal p-valuation, so
    every elimination step divides exactly in Z_(p).
    """
    A = [[to_local(x, p) for x in row] for row in M]
    m = len(A)
    n = len(A[0]) if m else 0
    U = identity(m)
    V = identity(n)
    for k in range(min(m, n)):
        best = None
        for i in range(k, m):
            row = A[i]
            for j in range(k, n):
                if row[j] != 0:
                    v = valuation(row[j], p)
                    if best is None or v < best[0]:
                        best = (v, i, j)
                        if v == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        v, i, j = best
        if i != k:
            A[k], A[i] = A[i], A[k]
            U[k], U[i] = U[i], U[k]
        if j != k:
            for row in A:
                row[k], row[j] = row[j], row[k]
            for row in V:
                row[k], row[j] = row[j], row[k]
        unit = A[k][k] / Fraction(p) ** v
        if unit != 1:
            inv = ONE / unit
            A[k] = [x * inv for x in A[k]]
            U[k] = [x * inv for x in U[k]]
        piv = A[k][k]
        rowk, urowk = A[k], U[k]
        for i in range(k + 1, m):
            if A[i][k] != 0:
                f = A[i][k] / piv
                A[i] = [a - f * b for a, b in zip(A[i], rowk)]
                U[i] = [a - f * b for a, b in zip(U[i], urowk)]
        for j in range(k + 1, n):
            if rowk[j] != 0:
                f = rowk[j] / piv
                for row in A:
                    if row[k] != 0:
                        row[j] -= f * row[k]
                for row in V:
                    if row[k] != 0:
                        row[j] -= f * row[k]
    return U, A, V


def _diag_rank(D) -> int:
    r = 0
    while r < min(len(D), len(D[0]) if D else 0) and D[r][r] != 0:
        r += 1
    return r


def kernel_basis(M, ncols: int, p: int) -> list[tuple]:
    """Basis of {x in Z_(p)^ncols : M x = 0}."""
    if not M:
        return [tuple(ONE if i == j else ZERO for i in range(ncols)) for j in range(ncols)]
    U, D, V = smith_normal_form(M, p)
    r = _diag_rank(D)
    return [tuple(V[i][j] for i in range(ncols)) for j in range(r, ncols)]


def span_basis(vectors: Iterable[Sequence], dim: int, p: int) -> list[tuple]:
    """A basis of the Z_(p)-span of the given vectors (a free module)."""
    vectors = [tuple(v) for v in vectors if any(x != 0 for x in v)]
    if not vectors:
        return []
    A = columns_to_matrix(vectors, dim)
    U, D, V = smith_normal_form(A, p)
    r = _diag_rank(D)
    Uinv = inverse(U)
    return [tuple(Uinv[i][j] * D[j][j] for i in range(dim)) for j in range(r)]


class LatticeSolver:
    """Solves ``basis . c = v`` for c over Z_(p), for a fixed free basis."""

    def __init__(self, basis: Sequence[Sequence], dim: int, p: int):
        self.k = len(basis)
        self.dim = dim
        self.p = p
        if self.k:
            A = columns_to_matrix(basis, dim)
            self.U, self.D, self.V = smith_normal_form(A, p)
            if _diag_rank(self.D) != self.k:
                raise PreconditionError("lattice basis is not independent")

    def solve(self, v, exact: bool = True):
        """Coordinates of v, or None when v is not in the lattice."""
        if self.k == 0:
            return () if all(x == 0 for x in v) else None
        Uv = [sum((self.U[i][j] * v[j] for j in range(self.dim) if v[j]), ZERO) for i in range(self.dim)]
        if any(Uv[i] != 0 for i in range(self.k, self.dim)):
            return None
        y = []
        for i in range(self.k):
            q = Uv[i] / self.D[i][i]
            if exact and q.denominator % self.p == 0:
                return None
            y.append(q)
        return tuple(sum((self.V[i][j] * y[j] for j in range(self.k)), ZERO) for i in range(self.k))


# ---------------------------------------------------------------------------
# modules


def _fmt_group(prime, free_rank, torsion):
    ring = "Q" if prime is None else f"Z_({prime})"
    parts = []
    if free_rank == 1:
        parts.append(ring)
    elif free_rank > 1:
        parts.append(f"{ring}^{free_rank}")
    for e in torsion:
        parts.append(f"Z/{prime}" if e == 1 else f"Z/{prime}^{e}")
    return " + ".join(parts) if parts else "0"


@dataclass(frozen=True, eq=False)
class FgModule:
    """Z_(p)^free_rank + sum_i Z/p^{e_i}; ``prime=None`` means a Q-vector space.

    Generator order is fixed: the free generators first, then the torsion
    generators in the (ascending) order of ``torsion_exponents``.
    ``basis_change`` holds, per generator, its representative in the
    coordinates of whatever presentation produced this module.
    """

    prime: int | None
    free_rank: int = 0
    torsion_exponents: tuple[int, ...] = ()
    generator_names: tuple[str, ...] | None = None
    basis_change: tuple[tuple, ...] | None = None

    def __post_init__(self):
        t = tuple(sorted(int(e) for e in self.torsion_exponents))
        if any(e <= 0 for e in t) or self.free_rank < 0:
            raise PreconditionError("invalid module data")
        if self.prime is None and t:
            raise PreconditionError("a Q-vector space has no torsion")
        object.__setattr__(self, "torsion_exponents", t)

    def __eq__(self, other):
        if not isinstance(other, FgModule):
            return NotImplemented
        return (self.prime, self.free_rank, self.torsion_exponents) == (
            other.prime, other.free_rank, other.torsion_exponents)

    def __hash__(self):
        return hash((self.prime, self.free_rank, self.torsion_exponents))

    @classmethod
    def zero(cls, prime):
        return cls(prime)

    @property
    def ngens(self) -> int:
        return self.free_rank + len(self.torsion_exponents)

    @property
    def orders(self) -> tuple[int, ...]:
        """Per-generator exponent, 0 meaning free."""
        return (0,) * self.free_rank + self.torsion_exponents

    def is_zero(self) -> bool:
        return self.ngens == 0

    def is_cyclic(self) -> bool:
        return self.ngens <= 1

    def exponent(self) -> int | None:
        """Largest e with an element of order p^e; None if there is a free part."""
        if self.free_rank:
            return None
        return max(self.torsion_exponents, default=0)

    def dim_mod_p(self) -> int:
        return self.ngens

    def __str__(self):
        return _fmt_group(self.prime, self.free_rank, self.torsion_exponents)

    def __repr__(self):
        return f"FgModule({self})"


def direct_sum(*mods: FgModule) -> FgModule:
    prime = mods[0].prime if mods else None
    return FgModule(prime, sum(m.free_rank for m in mods),
                    tuple(e for m in mods for e in m.torsion_exponents))


def tensor(M: FgModule, N: FgModule) -> FgModule:
    free = M.free_rank * N.free_rank
    tors = [e for e in M.torsion_exponents for _ in range(N.free_rank)]
    tors += [e for e in N.torsion_exponents for _ in range(M.free_rank)]
    tors += [min(a, b) for a in M.torsion_exponents for b in N.torsion_exponents]
    return FgModule(M.prime, free, tuple(tors))


def tor(M: FgModule, N: FgModule) -> FgModule:
    return FgModule(M.prime, 0, tuple(min(a, b) for a in M.torsion_exponents
                                      for b in N.torsion_exponents))


def cyclic(prime, e: int) -> FgModule:
    """Z/p^e for e >= 1, Z_(p) for e == 0."""
    return FgModule(prime, 1, ()) if e == 0 else FgModule(prime, 0, (e,))


def canonical_module(generator_count: int, relations, prime: int,
                     names: Sequence[str] | None = None) -> FgModule:
    """Canonical form of Z_(p)^n / (row span of ``relations``).

    ``basis_change`` of the result gives each canonical generator as a vector in
    the original n generators.
    """
    n = generator_count
    rels = [[to_local(x, prime) for x in row] for row in relations]
    for row in rels:
        if len(row) != n:
            raise PreconditionError("relation row length differs from generator count")
    rels = [row for row in rels if any(row)]
    if not rels:
        basis = tuple(tuple(ONE if i == j else ZERO for i in range(n)) for j in range(n))
        return FgModule(prime, n, (), _names(names, n, basis), basis)
    U, D, V = smith_normal_form(rels, prime)
    r = _diag_rank(D)
    free, tors = [], []
    for j in range(n):
        col = tuple(V[i][j] for i in range(n))
        if j < r:
            e = int(valuation(D[j][j], prime))
            if e > 0:
                tors.append((e, col))
        else:
            free.append(col)
    tors.sort(key=lambda t: t[0])
    basis = tuple(free) + tuple(c for _, c in tors)
    return FgModule(prime, len(free), tuple(e for e, _ in tors), _names(names, n, basis), basis)


def _names(names, n, basis):
    if names is None:
        return None
    out = []
    for vec in basis:
        terms = [(c, names[i]) for i, c in enumerate(vec) if c != 0]
        if len(terms) == 1 and terms[0][0] == 1:
            out.append(terms[0][1])
        else:
            out.append(" + ".join(n_ if c == 1 else f"{c}*{n_}" for c, n_ in terms))
    return tuple(out)


class Subquotient:
    """The module Z/B for lattices B <= Z <= Z_(p)^dim.

    ``num`` is a basis of Z, ``den`` a generating set of B (B must lie in Z).
    """

    def __init__(self, num, den, dim: int, p: int, names: Sequence[str] | None = None):
        self.dim = dim
        self.p = p
        self.num = [tuple(v) for v in num]
        self.den = [tuple(v) for v in den]
        self.names = names

    @cached_property
    def _zsolver(self) -> LatticeSolver:
        return LatticeSolver(self.num, self.dim, self.p)

    @cached_property
    def _presentation(self):
        rels = []
        for b in self.den:
            c = self._zsolver.solve(b)
            if c is None:
                raise MalformedMapError("denominator lattice is not contained in numerator lattice")
            rels.append(c)
        k = len(self.num)
        mod = canonical_module(k, rels, self.p)
        reps = []
        for vec in mod.basis_change:
            amb = tuple(sum((vec[j] * self.num[j][i] for j in range(k) if vec[j]), ZERO)
                        for i in range(self.dim))
            reps.append(amb)
        # coordinate change: old Z-coords x = W y, W columns = mod.basis_change
        # keep only the nontrivial generators; invert the full change of basis.
        if k:
            full = self._full_basis(mod, rels, k)
            Winv = inverse(columns_to_matrix(full, k))
        else:
            Winv = []
        names = _names(self.names, self.dim, reps) if self.names is not None else None
        module = FgModule(self.p, mod.free_rank, mod.torsion_exponents, names, tuple(reps))
        return module, Winv

    def _full_basis(self, mod, rels, k):
        # recompute SNF column basis including unit-diagonal (trivial) directions,
        # in the order: kept generators first, then trivial ones.
        rels = [r for r in rels if any(r)]
        if not rels:
            return list(mod.basis_change)
        U, D, V = smith_normal_form(rels, self.p)
        r = _diag_rank(D)
        kept = list(mod.basis_change)
        trivial = [tuple(V[i][j] for i in range(k)) for j in range(r)
                   if valuation(D[j][j], self.p) == 0]
        return kept + trivial

    def module(self) -> FgModule:
        return self._presentation[0]

    def is_zero(self) -> bool:
        return self.module().is_zero()

    def contains(self, v) -> bool:
        return self._zsolver.solve(v) is not None

    def coords(self, v) -> tuple:
        """Coordinates of v (an element of Z) on the canonical generators.

        Torsion coordinates are returned unreduced.
        """
        c = self._zsolver.solve(v)
        if c is None:
            raise MalformedMapError("vector does not lie in the numerator lattice")
        module, Winv = self._presentation
        n = module.ngens
        return tuple(sum((Winv[i][j] * c[j] for j in range(len(c)) if c[j]), ZERO) for i in range(n))

    def is_boundary(self, v) -> bool:
        """True when v lies in B."""
        c = self.coords(v)
        for x, e in zip(c, self.module().orders):
            if e == 0:
                if x != 0:
                    return False
            elif valuation(x, self.p) < e:
                return False
        return True


# ---------------------------------------------------------------------------
# module maps


def _relation_lattice(M: FgModule) -> list[tuple]:
    n = M.ngens
    out = []
    for i, e in enumerate(M.orders):
        if e:
            out.append(tuple(Fraction(M.prime) ** e if j == i else ZERO for j in range(n)))
    return out


def _unit_vectors(n):
    return [tuple(ONE if i == j else ZERO for i in range(n)) for j in range(n)]


@dataclass(frozen=True, eq=False)
class ModuleMap:
    """A homomorphism between canonical modules, as a matrix on their generators.

    Column j is the image of domain generator j (free generators first).
    """

    domain: FgModule
    codomain: FgModule
    matrix: tuple[tuple[Fraction, ...], ...] = field(default=())

    def __post_init__(self):
        p = self.domain.prime
        rows = tuple(tuple(to_local(x, p) for x in row) for row in self.matrix)
        if len(rows) != self.codomain.ngens or any(len(r) != self.domain.ngens for r in rows):
            if not (self.codomain.ngens == 0 or self.domain.ngens == 0):
                raise MalformedMapError("matrix shape does not match domain/codomain")
            rows = tuple(tuple(ZERO for _ in range(self.domain.ngens)) for _ in range(self.codomain.ngens))
        object.__setattr__(self, "matrix", rows)

    def column(self, j):
        return tuple(self.matrix[i][j] for i in range(self.codomain.ngens))

    def validate(self):
        p = self.domain.prime
        for j, e in enumerate(self.domain.orders):
            if not e:
                continue
            col = self.column(j)
            for x, f in zip(col, self.codomain.orders):
                y = x * Fraction(p) ** e
                if y == 0:
                    continue
                if f == 0 or valuation(y, p) < f:
                    raise MalformedMapError(
                        f"generator {j} has order p^{e} but its image is not annihilated by p^{e}")


def map_homology(f: ModuleMap):
    """Return canonical (kernel, image, cokernel) of f.

    ``basis_change`` on the kernel is in domain coordinates, on image and
    cokernel in codomain coordinates.
    """
    f.validate()
    p = f.domain.prime
    a, c = f.domain.ngens, f.codomain.ngens
    Rd, Rc = _relation_lattice(f.domain), _relation_lattice(f.codomain)
    cols = [f.column(j) for j in range(a)]
    # kernel: x with f(x) in Rc, modulo Rd
    if a == 0:
        kern = Subquotient([], [], 0, p)
    else:
        big = [list(f.matrix[i]) + [-r[i] for r in Rc] for i in range(c)]
        sol = kernel_basis(big, a + len(Rc), p) if c else _unit_vectors(a)
        xs = span_basis([v[:a] for v in sol], a, p)
        kern = Subquotient(xs, Rd, a, p)
    img_lat = span_basis(cols + Rc, c, p)
    image = Subquotient(img_lat, Rc, c, p)
    coker = Subquotient(_unit_vectors(c), img_lat, c, p)
    return kern.module(), image.module(), coker.module()
