import pytest

from plocal.coeff import FgModule
from plocal.errors import OutOfRangeError, PreconditionError
from plocal.postnikov import (SEEDED, Layer, PostnikovStage, Space, build_tower,
                              coefficient_group, gem_split_check, homotopy_table,
                              k_invariant_order, localized_cyclic, truncation_compare)
from plocal.graded import point_cohomology
from plocal.rational import PartSpec, partition_betti


def test_homotopy_table_bsl5():
    t = homotopy_table("BSL_5", 5, 11)
    assert [d for d, g in t.nonzero()] == [4, 6, 8, 10, 11]
    assert t.group(11) == FgModule(5, 0, (1,))
    assert t.group(4) == FgModule(5, 1)


def test_homotopy_table_bpgl3_has_pi2():
    t = homotopy_table(Space("bpgl", 3), 3, 7)
    assert t.group(2) == FgModule(3, 0, (1,))
    assert t.group(7) == FgModule(3, 0, (1,))
    assert t.group(6) == FgModule(3, 1)


def test_homotopy_table_prime_to_p_torsion_vanishes():
    t = homotopy_table("BSL_2", 5, 5)
    assert t.group(5).is_zero()
    assert homotopy_table("BP(2,6)", 3, 13).group(2).is_zero()
    assert localized_cyclic(24, 2) == FgModule(2, 0, (3,))


def test_homotopy_table_range_rejected():
    with pytest.raises(OutOfRangeError):
        homotopy_table("BSL_3", 3, 8)


def test_space_parsing():
    assert Space.parse("BP(2,6)") == Space("bp", 6, 2)
    assert Space.parse("bpgl_4").label == "BPGL_4"
    with pytest.raises(PreconditionError):
        Space.parse("BU")


def test_tower_single_layer():
    st = build_tower("BSL_5", 5, 4, cutoff=8)
    assert [l.degree for l in st.layers] == [4]
    assert st.cohomology.group(8) == FgModule(5, 1)


def test_tower_bsl3_at_3_is_gem_through_6():
    st = build_tower("BSL_3", 3, 6, cutoff=10)
    assert [l.label for l in st.layers] == ["K(Z_(3),4)", "K(Z_(3),6)"]
    assert [c.verdict for c in st.split_checks] == ["yes", "yes"]
    assert st.cohomology.group(10) == FgModule(3, 1)  # ι_4⊗ι_6


def test_tower_bsl5_is_four_layer_gem():
    st = build_tower("BSL_5", 5, 10)
    assert [l.degree for l in st.layers] == [4, 6, 8, 10]
    assert all(c.verdict == "yes" for c in st.split_checks)
    assert st.cohomology_level == 10


def test_torsion_layer_stops_the_gem():
    st = build_tower("BSL_3", 3, 7)
    assert st.split_checks[-1].verdict == "unknown"
    assert st.cohomology_level == 6
    assert st.k_invariants and st.k_invariants[0].order == 3


def test_bpgl_reuses_bsl_tower_above_degree_two():
    a = build_tower("BPGL_3", 3, 6)
    b = build_tower("BSL_3", 3, 6)
    assert a.layers[0].degree == 2 and a.layers[0].cohomology is None
    assert a.cohomology.table() == b.cohomology.table()


def test_gem_split_check_examples():
    st = build_tower("BSL_3", 3, 4)
    assert gem_split_check(st, Layer(6, FgModule(3, 1))) == ("yes", FgModule(3))
    st6 = build_tower("BSL_3", 3, 6)
    verdict, witness = gem_split_check(st6, Layer(7, FgModule(3, 0, (1,))))
    assert verdict == "unknown" and not witness.is_zero()
    point = PostnikovStage(Space("bsl", 3), 3, 0, (), point_cohomology(3, 0))
    assert gem_split_check(point, Layer(4, FgModule(3, 1)))[0] == "yes"


def test_gem_split_check_needs_range():
    st = build_tower("BSL_3", 3, 6, cutoff=7)
    with pytest.raises(OutOfRangeError):
        gem_split_check(st, Layer(7, FgModule(3, 0, (1,))))


def test_coefficient_group_universal_coefficients():
    st = build_tower("BSL_3", 3, 6)
    # H^9 = Z/3, H^8 = Z_(3): H^8(-; Z/3) = Z/3 ⊕ Tor(Z/3, Z/3)
    assert coefficient_group(st.cohomology, 8, FgModule(3, 0, (1,))) == FgModule(3, 0, (1, 1))


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_k_invariant_order(p):
    rec = k_invariant_order(p)
    assert rec.order == p and rec.detected
    assert rec.dim_gap == 1
    assert rec.degree == 2 * p + 2
    assert rec.rho == f"t_{{4,{2 * p + 3}}}"
    assert rec.bockstein.sigma_degree == 2 * p + 2
    assert rec.ambient.exponent() == 1


@pytest.mark.parametrize("p", [3, 5, 7])
def test_free_ranks_match_partition_counts(p):
    st = build_tower(f"BSL_{p}", p, 2 * p, cutoff=2 * p + 3)
    for k in range(0, p + 2):
        assert st.cohomology.free_rank(2 * k) == partition_betti(PartSpec.ranges((2, p)), k)


def test_truncation_compare():
    assert truncation_compare(7, 6) == "iso"
    assert truncation_compare(7, 7) == "injection"
    assert truncation_compare(7, 8) == "no-information"
    assert truncation_compare(1, 0) == "iso"
    with pytest.raises(PreconditionError):
        truncation_compare(0, 0)


def test_seeded_facts():
    assert SEEDED.epsilon(2) == 2 and SEEDED.epsilon(3) == 1
    assert SEEDED.bsl_ring(3, 3, 12).group(12) == FgModule(3, 2)
    assert "Jackowski" in SEEDED.citation("selfmap_dichotomy").source
