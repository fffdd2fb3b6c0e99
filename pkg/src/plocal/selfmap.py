"""Constraint propagation for self-maps of the p-local Postnikov tower of BPGL_p.

A self-map f induces endomorphisms φ_2 of π_2 = Z/p, φ_4 of π_4 = Z_(p) and
φ_{2p+1} of π_{2p+1} = Z/p.  Each derivation step enumerates the residues the
unknowns can take and discards those contradicting a naturality equation; a
step fires only when every premise it cites is available.  Endomorphisms of
Z_(p) are tracked only through their residue mod p^ε (unit vs. divisible by p).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

from .errors import PreconditionError
from .postnikov import SEEDED, KInvariantRecord, homotopy_table, k_invariant_order
from .serre import _check_prime

PREMISES = ("phi2_invertible", "epsilon", "bott_iso", "k_invariant")


@dataclass(frozen=True)
class TraceStep:
    fact: str
    justification: str
    cites: tuple[str, ...]


@dataclass
class SelfMapModel:
    prime: int
    phi2: int
    phi4_residues: tuple[int, ...]
    phi4_modulus: int
    phi_top_residues: tuple[int, ...]
    trace: list = field(default_factory=list)
    premises: tuple[str, ...] = ()

    @property
    def phi4(self) -> str:
        if all(gcd(r, self.prime) == 1 for r in self.phi4_residues):
            return "unit"
        if all(r % self.prime == 0 for r in self.phi4_residues):
            return "divisible"
        return "unconstrained"

    @property
    def phi_top(self) -> str:
        if all(r % self.prime for r in self.phi_top_residues):
            return "invertible"
        if self.phi_top_residues == (0,):
            return "zero"
        return "unconstrained"

    @property
    def top_degree(self) -> int:
        return 2 * self.prime + 1

    def conclusions(self) -> dict:
        return {"phi_2": "invertible" if self.phi2 % self.prime else "not invertible",
                "phi_4": self.phi4, f"phi_{self.top_degree}": self.phi_top}


def propagate_selfmap(p: int, phi2: int = 1, *, premises=None,
                      k_record: KInvariantRecord | None = None) -> SelfMapModel:
    """Derive what φ_2 forces on φ_4 and φ_{2p+1}.

    ``premises`` restricts the facts the derivation may use (default: all of
    PREMISES); removing any one of them leaves φ_{2p+1} unconstrained.
    """
    _check_prime(p)
    allowed = set(PREMISES if premises is None else premises)
    unknown = allowed - set(PREMISES)
    if unknown:
        raise PreconditionError(f"unknown premises {sorted(unknown)}")
    if "phi2_invertible" in allowed and phi2 % p == 0:
        allowed.discard("phi2_invertible")
    if "k_invariant" in allowed:
        if k_record is None:
            k_record = k_invariant_order(p)
        elif k_record.level != 2 * p or k_record.coefficient.prime != p:
            raise PreconditionError(f"k-invariant record is not the one for k_{{{2 * p}}} at p={p}")
    eps = SEEDED.epsilon(p)
    modulus = p ** eps
    model = SelfMapModel(p, phi2 % p, tuple(range(modulus)), modulus, tuple(range(p)),
                         premises=tuple(sorted(allowed)))
    trace = model.trace
    if "phi2_invertible" not in allowed:
        trace.append(TraceStep("no conclusions", "φ_2 is not assumed invertible; the hypothesis "
                               "of every step is unavailable", ()))
        return model
    trace.append(TraceStep(f"φ_2 ≡ {phi2 % p} is invertible on π_2 = Z/{p}", "assumption",
                           ("phi2_invertible",)))

    # (1) first Postnikov extension: f^*x = φ_4·x for the generator x of H^5(K(Z/p,2); Z)
    if "epsilon" in allowed:
        # K(φ_2, 2) is an equivalence, so f^*x generates Z/p^ε; f^*x = φ_4·x.
        keep = tuple(r for r in model.phi4_residues if gcd(r, modulus) == 1)
        model.phi4_residues = keep
        trace.append(TraceStep(
            f"φ_4 is a p-local unit (residues mod {modulus}: {list(keep)})",
            f"H^5(K(Z/{p},2); Z) ≅ Z/{p}^{eps} is generated by the k-invariant x of the first "
            f"extension; an equivalence pulls x back to a generator, and naturality gives "
            f"f^*x = φ_4·x",
            ("phi2_invertible", "epsilon")))

    # (2) φ_4 unit => equivalence on the K(Z_(p),4) layer (π_4 of BSL_p and BPGL_p agree)
    layer_equivalence = False
    if model.phi4 == "unit" and "bott_iso" in allowed:
        bsl = homotopy_table("BSL_%d" % p, p, 2 * p + 1)
        bpgl = homotopy_table("BPGL_%d" % p, p, 2 * p + 1)
        if all(bsl.group(i) == bpgl.group(i) for i in range(3, 2 * p + 2)):
            layer_equivalence = True
            trace.append(TraceStep(
                f"f induces an equivalence of K(Z_({p}),4) and acts on π_{2 * p + 1} through "
                f"the BSL_{p} tower",
                f"π_i(BSL_{p}) → π_i(BPGL_{p}) is an isomorphism for 3 ≤ i ≤ {2 * p + 1} and "
                f"φ_4 is a unit",
                ("bott_iso", "step 1")))

    # (3) β(i^*k) = u·ρ on K(Z_(p),4): c·(u σ) = φ_4·(u σ) in H^{2p+2}(K(Z_(p),4); Z/p)
    if layer_equivalence and "k_invariant" in allowed:
        restricted = 1 if k_record.detected else 0
        per_u = []
        for u in range(1, p):
            allowed_c = set()
            for c in range(p):
                for r in model.phi4_residues:
                    if (c * u * restricted - r * u * restricted) % p == 0:
                        allowed_c.add(c)
            per_u.append(tuple(sorted(allowed_c)))
        if len(set(per_u)) != 1:
            raise PreconditionError("derivation depends on the unit u")
        model.phi_top_residues = per_u[0]
        trace.append(TraceStep(
            f"φ_{2 * p + 1} ≡ φ_4 (mod {p}) is invertible (residues {list(per_u[0])})",
            f"k_{{{2 * p}}} has order {k_record.order} and i^*k_{{{2 * p}}} = u·{k_record.sigma} ≠ 0 "
            f"with β({k_record.sigma}) = {k_record.rho}; naturality of β(i^*k) under f gives "
            f"φ_{2 * p + 1}·u·{k_record.sigma} = φ_4·u·{k_record.sigma} for every unit u",
            ("step 2", f"k_invariant_order({p})")))
    return model
