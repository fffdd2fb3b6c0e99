import pytest

from plocal.errors import PreconditionError
from plocal.postnikov import k_invariant_order
from plocal.selfmap import PREMISES, propagate_selfmap


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_chain_derives_top_invertible(p):
    model = propagate_selfmap(p, 1)
    assert model.phi4 == "unit"
    assert model.phi_top == "invertible"
    assert model.conclusions()[f"phi_{2 * p + 1}"] == "invertible"
    assert any(f"k_invariant_order({p})" in s.cites for s in model.trace)


def test_p2_uses_epsilon_two():
    model = propagate_selfmap(2, 1)
    assert model.phi4_modulus == 4
    assert model.phi4_residues == (1, 3)


@pytest.mark.parametrize("p", [2, 3, 5, 7])
@pytest.mark.parametrize("dropped", PREMISES)
def test_ablation_breaks_the_derivation(p, dropped):
    model = propagate_selfmap(p, 1, premises=[x for x in PREMISES if x != dropped])
    assert model.phi_top == "unconstrained"


def test_phi2_zero_gives_no_conclusions():
    model = propagate_selfmap(3, 0)
    assert model.phi4 == "unconstrained" and model.phi_top == "unconstrained"
    assert model.trace[0].fact == "no conclusions"


def test_any_unit_phi2_works():
    for phi2 in (1, 2, 4):
        assert propagate_selfmap(5, phi2).phi_top == "invertible"


def test_every_step_cites_its_premises():
    model = propagate_selfmap(3, 1)
    assert [s.cites for s in model.trace] == [
        ("phi2_invertible",), ("phi2_invertible", "epsilon"), ("bott_iso", "step 1"),
        ("step 2", "k_invariant_order(3)")]


def test_wrong_k_record_rejected():
    with pytest.raises(PreconditionError):
        propagate_selfmap(3, 1, k_record=k_invariant_order(5))
    with pytest.raises(PreconditionError):
        propagate_selfmap(3, 1, premises=["nonsense"])
