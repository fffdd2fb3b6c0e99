import pytest
from hypothesis import given, settings, strategies as st

from plocal.coeff import FgModule
from plocal.errors import (InconsistencyError, OutOfRangeError, PreconditionError,
                           UnderdeterminedError)
from plocal.graded import (CohomologyClass, Generator, GradedCohomology, GradedRingPresentation,
                           free_cohomology, monomial_degree, monomial_product, point_cohomology)
from plocal.serre import (SolveResult, TransgressionRule, TransgressionRules, convergence_audit,
                          e2_page, em_cohomology, em_solve_result, leibniz, loopspace_solve,
                          max_admissible_degree, page_turn, run_pages, seed_kz2, solve_loopspace)


def groups(H):
    return {k: (g.free_rank, g.torsion_exponents) for k in range(H.cutoff + 1)
            if not (g := H.group(k)).is_zero()}


# ---------------------------------------------------------------------------
# E2 and pages


def test_e2_of_path_loop_fibration_over_kz3():
    base = free_cohomology(GradedRingPresentation((Generator("ι_3", 3),), 10, 5), "B")
    fiber = seed_kz2(5, 10)
    page = e2_page(base, fiber, 10)
    assert page.module(3, 2) == FgModule(5, 1)
    assert page.module(6, 2) == FgModule(5)  # ι_3^2 = 0
    assert page.cells[(3, 4)].names == ["ι_3⊗ι_2^2"]


def test_e2_rejects_fiber_torsion_against_positive_base_degree():
    fiber = em_cohomology(3, 3, 10)  # j_3 in degree 8
    base = free_cohomology(GradedRingPresentation((Generator("ι_4", 4),), 14, 3), "B")
    with pytest.raises(PreconditionError, match="transgressive range"):
        e2_page(base, fiber, 12)


def test_transgression_page_kills_fundamental_class():
    base = free_cohomology(GradedRingPresentation((Generator("ι_3", 3),), 8, 7), "B")
    fiber = seed_kz2(7, 8)
    rules = TransgressionRules((TransgressionRule("ι_2", "ι_3", 3),))
    page = e2_page(base, fiber, 8, rules)
    e3 = page_turn(page)
    assert e3.r == 3
    e4 = page_turn(e3)
    # d_3(ι_2^k) = k ι_3⊗ι_2^{k-1}, a unit multiple at p = 7 for k < 7
    for key in [(0, 2), (0, 4), (3, 0), (3, 2)]:
        assert e4.module(*key).is_zero()
    assert e4.module(0, 0) == FgModule(7, 1)


def test_transgression_leaves_torsion_where_k_is_divisible_by_p():
    p = 3
    base = free_cohomology(GradedRingPresentation((Generator("ι_3", 3),), 12, p), "B")
    fiber = seed_kz2(p, 12)
    rules = TransgressionRules((TransgressionRule("ι_2", "ι_3", 3),))
    final = run_pages(e2_page(base, fiber, 12, rules))
    # d_3(ι_2^3) = 3 ι_3⊗ι_2^2 leaves Z/3 at (3,4)
    assert final.module(3, 4) == FgModule(3, 0, (1,))
    assert final.module(0, 6).is_zero()


def test_opaque_differential_into_nonzero_target_is_underdetermined():
    base = free_cohomology(GradedRingPresentation((Generator("x", 2),), 6, 5), "B")
    by = ((CohomologyClass("1", 0, 0, ()),), (CohomologyClass("y", 1, 0, None),), (), (), (), (), ())
    fiber = GradedCohomology(5, 6, by, (), "F")
    page = e2_page(base, fiber, 6)
    with pytest.raises(UnderdeterminedError, match="not determined"):
        page_turn(page)


def test_leibniz_value_without_base_class_is_inconsistent():
    ring = GradedRingPresentation((Generator("y", 3),), 8, 5)
    base = free_cohomology(ring, "B")
    fiber = seed_kz2(5, 8)
    rules = TransgressionRules((TransgressionRule("ι_2", "ι_3", 3),))
    page = page_turn(e2_page(base, fiber, 8, rules))
    with pytest.raises(InconsistencyError):
        page_turn(page)


# ---------------------------------------------------------------------------
# Leibniz fuzz


def _fuzz_setup(kind):
    if kind == "poly":
        bgens = (Generator("ι_3", 3), Generator("u", 4), Generator("w", 5))
        fgens = (Generator("ι_2", 2),)
        rule = TransgressionRule("ι_2", "ι_3", 3)
    else:
        bgens = (Generator("u", 2), Generator("ι_4", 4), Generator("w", 5))
        fgens = (Generator("ι_3", 3),)
        rule = TransgressionRule("ι_3", "ι_4", 4)
    base = free_cohomology(GradedRingPresentation(bgens, 4, 7), "B")
    fiber = free_cohomology(GradedRingPresentation(fgens, 4, 7), "F")
    page = e2_page(base, fiber, 4, TransgressionRules((rule,)))
    return page, bgens, fgens, rule.page


def _mul(bgens, fgens, x, y):
    out = {}
    for (b1, f1), c1 in x.items():
        for (b2, f2), c2 in y.items():
            sb, mb = monomial_product(bgens, b1, b2)
            sf, mf = monomial_product(fgens, f1, f2)
            if sb and sf:
                sign = (-1) ** (monomial_degree(fgens, f1) * monomial_degree(bgens, b2))
                key = (mb, mf)
                out[key] = out.get(key, 0) + sign * sb * sf * c1 * c2
    return {k: v for k, v in out.items() if v}


def _d(page, bgens, fgens, r, x):
    out = {}
    for (b, f), c in x.items():
        bc = CohomologyClass("b", monomial_degree(bgens, b), 0, b)
        fc = CohomologyClass("f", monomial_degree(fgens, f), 0, f)
        for key, v in leibniz(page, bc, fc, r).items():
            out[key] = out.get(key, 0) + c * v
    return {k: v for k, v in out.items() if v}


def _add(x, y):
    out = dict(x)
    for k, v in y.items():
        out[k] = out.get(k, 0) + v
    return {k: v for k, v in out.items() if v}


@st.composite
def page_elements(draw, bgens, fgens):
    def mono(gens):
        m = []
        for g in gens:
            e = draw(st.integers(0, 1 if g.exterior else 3))
            if e:
                m.append((g.name, e))
        return tuple(m)
    return {(mono(bgens), mono(fgens)): draw(st.integers(1, 4))}


SETUPS = {kind: _fuzz_setup(kind) for kind in ("poly", "ext")}


@settings(max_examples=1000, deadline=None)
@given(st.data())
def test_leibniz_identity_fuzz(data):
    kind = data.draw(st.sampled_from(sorted(SETUPS)))
    page, bgens, fgens, r = SETUPS[kind]
    x = data.draw(page_elements(bgens, fgens))
    y = data.draw(page_elements(bgens, fgens))
    (bx, fx), = x
    deg_x = monomial_degree(bgens, bx) + monomial_degree(fgens, fx)
    lhs = _d(page, bgens, fgens, r, _mul(bgens, fgens, x, y))
    rhs = _add(_mul(bgens, fgens, _d(page, bgens, fgens, r, x), y),
               {k: (-1) ** deg_x * v for k, v in
                _mul(bgens, fgens, x, _d(page, bgens, fgens, r, y)).items()})
    assert lhs == rhs
    assert _d(page, bgens, fgens, r, _d(page, bgens, fgens, r, x)) == {}


def test_leibniz_is_zero_before_the_transgression_page():
    page, bgens, fgens, r = SETUPS["poly"]
    b = CohomologyClass("u", 4, 0, (("u", 1),))
    f = CohomologyClass("ι_2^2", 4, 0, (("ι_2", 2),))
    assert leibniz(page, b, f, 2) == {}
    assert leibniz(page, b, f, 3) == {((("ι_3", 1), ("u", 1)), (("ι_2", 1),)): 2}


# ---------------------------------------------------------------------------
# Eilenberg-MacLane spaces


@pytest.mark.parametrize("p", [2, 3, 5])
def test_kz3_table_and_kill_page(p):
    H = em_cohomology(3, p, 2 * p + 4)
    assert groups(H) == {0: (1, ()), 3: (1, ()), 2 * p + 2: (0, (1,))}
    res = em_solve_result(3, p)
    assert H.classes(2 * p + 2)[0].name == f"j_{p}"
    assert res.kill_pages[f"j_{p}"] == ((3, 2 * p - 2), 2 * p - 1)


def test_kz3_p2_torsion_class_has_no_products():
    H = em_cohomology(3, 2, 8)
    with pytest.raises(UnderdeterminedError):
        H.product("j_2", "ι_3")


def test_kz4_p3_table():
    H = em_cohomology(4, 3, 11)
    assert groups(H) == {0: (1, ()), 4: (1, ()), 8: (1, ()), 9: (0, (1,))}
    assert H.classes(8)[0].name == "ι_4^2"
    assert H.classes(9)[0].name == "t_{4,9}"


def test_kz5_p3_first_torsion():
    H = em_cohomology(5, 3, 12)
    assert groups(H) == {0: (1, ()), 5: (1, ()), 10: (0, (1,))}


@pytest.mark.parametrize("n,p,adm", [(3, 5, 14), (3, 2, 8), (4, 3, 11), (5, 3, 12), (6, 5, 17)])
def test_maximal_admissible_degree(n, p, adm):
    assert max_admissible_degree(n, p) == adm
    with pytest.raises(OutOfRangeError) as err:
        em_cohomology(n, p, adm + 1)
    assert err.value.max_admissible == adm


def test_range_request_past_torsion_product_is_underdetermined():
    with pytest.raises(UnderdeterminedError):
        solve_loopspace(seed_kz2(5, 16), 3, 15)


def test_em_input_validation():
    with pytest.raises(PreconditionError):
        em_cohomology(1, 3, 5)
    with pytest.raises(PreconditionError):
        em_cohomology(3, 4, 5)
    assert groups(em_cohomology(2, 3, 6)) == {0: (1, ()), 2: (1, ()), 4: (1, ()), 6: (1, ())}


@pytest.mark.parametrize("n,p", [(3, 3), (3, 5), (4, 3), (4, 5), (5, 3), (6, 3), (4, 2)])
def test_convergence_audit_after_solve(n, p):
    res = em_solve_result(n, p)
    assert convergence_audit(res.fiber, res) == []


def test_loopspace_solve_matches_stage():
    H = loopspace_solve(seed_kz2(7, 16), 3, 17)
    assert groups(H) == {0: (1, ()), 3: (1, ()), 16: (0, (1,))}


def test_convergence_audit_detects_tampered_base():
    res = em_solve_result(3, 5)
    by = list(res.base.by_degree)
    by[5] = (CohomologyClass("z", 5, 0, None),)
    bad = GradedCohomology(5, res.base.cutoff, tuple(by), res.base.generators, "tampered")
    tampered = SolveResult(bad, res.rules, res.kill_pages, res.solved_through)
    # an extra class either survives to E_infinity or forces an undetermined differential
    try:
        bad_cells = convergence_audit(res.fiber, tampered)
    except UnderdeterminedError:
        return
    assert bad_cells
