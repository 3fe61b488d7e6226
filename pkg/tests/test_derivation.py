import numpy as np
import pytest

from towerforms.tower import (
    AlgebraElement,
    diagonal_projection,
    identity,
    normalized_trace,
    random_element,
)
from towerforms.expectations import cond_expect
from towerforms.forms import commutator_form_eval
from towerforms.derivation import (
    BimoduleVector,
    bimodule_inner,
    bimodule_left,
    bimodule_right,
    bimodule_to_json,
    derive,
)

X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def commutator_oracle(p: np.ndarray, b: np.ndarray) -> np.ndarray:
    return p @ b - b @ p


def test_derive_frozen_example():
    f = derive(AlgebraElement(1, X), 1)
    np.testing.assert_array_equal(f.components[0].entries, [[0.0, 1.0], [-1.0, 0.0]])
    np.testing.assert_array_equal(f.components[1].entries, [[0.0, -1.0], [1.0, 0.0]])


def test_derive_matches_commutator_oracle():
    rng = np.random.default_rng(90)
    for level, n in [(2, 2), (3, 2), (3, 1)]:
        d = 2 ** level
        a = AlgebraElement(level, rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
        f = derive(a, n)
        b = cond_expect(a, n).entries
        assert f.level == n and len(f.components) == 2 ** n
        for j, comp in enumerate(f.components):
            p = diagonal_projection(n, j).entries
            np.testing.assert_allclose(comp.entries, commutator_oracle(p, b), atol=1e-13)


def test_derive_kills_diagonal_and_unit():
    d = AlgebraElement(2, np.diag([1.0, 2.0, 3.0, 4.0]))
    assert all(np.abs(c.entries).max() == 0.0 for c in derive(d, 2).components)
    assert all(np.abs(c.entries).max() == 0.0 for c in derive(identity(3), 2).components)


def test_derive_is_linear():
    rng = np.random.default_rng(91)
    a = AlgebraElement(2, rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    b = AlgebraElement(2, rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    lam = 1.2 - 0.7j
    lhs = derive(lam * a + b, 2)
    fa, fb = derive(a, 2), derive(b, 2)
    for l, ca, cb in zip(lhs.components, fa.components, fb.components):
        np.testing.assert_allclose(l.entries, lam * ca.entries + cb.entries, atol=1e-13)


def test_derive_vanishes_iff_expectation_diagonal():
    a = AlgebraElement(2, np.kron(X, np.eye(2)))
    f = derive(a, 1)
    assert any(np.abs(c.entries).max() > 0.5 for c in f.components)
    diag_only = AlgebraElement(2, np.kron(X, X))  # level-1 expectation vanishes
    assert all(np.abs(c.entries).max() == 0.0 for c in derive(diag_only, 1).components)


# --------------------------------------------------------------------------
# bimodule structure
# --------------------------------------------------------------------------


def test_bimodule_vector_validates_shape():
    with pytest.raises(ValueError, match="components"):
        BimoduleVector(1, (identity(1),))
    with pytest.raises(ValueError, match="carrier"):
        BimoduleVector(1, (identity(1), identity(2)))


def test_unit_acts_trivially():
    f = derive(AlgebraElement(1, X), 1)
    one = identity(1)
    for g in (bimodule_left(one, f), bimodule_right(f, one)):
        for cf, cg in zip(f.components, g.components):
            np.testing.assert_array_equal(cf.entries, cg.entries)


def test_left_action_matches_componentwise_oracle():
    f = derive(AlgebraElement(1, X), 1)
    p1 = diagonal_projection(1, 0)
    g = bimodule_left(p1, f)
    for cf, cg in zip(f.components, g.components):
        np.testing.assert_array_equal(cg.entries, p1.entries @ cf.entries)


def test_actions_commute_and_associate():
    rng = np.random.default_rng(92)
    f = derive(AlgebraElement(2, rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))), 2)
    a = AlgebraElement(2, rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    b = AlgebraElement(2, rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    lhs = bimodule_right(bimodule_left(a, f), b)
    rhs = bimodule_left(a, bimodule_right(f, b))
    for cl, cr in zip(lhs.components, rhs.components):
        np.testing.assert_allclose(cl.entries, cr.entries, atol=1e-12)
    lhs2 = bimodule_left(a @ b, f)
    rhs2 = bimodule_left(a, bimodule_left(b, f))
    for cl, cr in zip(lhs2.components, rhs2.components):
        np.testing.assert_allclose(cl.entries, cr.entries, atol=1e-12)


def test_action_level_mismatch_rejected():
    f = derive(AlgebraElement(1, X), 1)
    with pytest.raises(ValueError, match="mismatch"):
        bimodule_left(identity(2), f)


def test_inner_product_frozen_example():
    f = derive(AlgebraElement(1, X), 1)
    np.testing.assert_allclose(bimodule_inner(f, f).entries, 2.0 * np.eye(2), atol=0)


def test_inner_product_of_zero():
    z = AlgebraElement(1, np.zeros((2, 2)))
    f = derive(z, 1)
    assert np.abs(bimodule_inner(f, f).entries).max() == 0.0


def test_inner_product_adjoint_symmetry_and_psd():
    rng = np.random.default_rng(93)
    for _ in range(10):
        a = AlgebraElement(2, rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
        b = AlgebraElement(2, rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
        f, g = derive(a, 2), derive(b, 2)
        fg = bimodule_inner(f, g)
        gf = bimodule_inner(g, f)
        np.testing.assert_allclose(fg.entries.conj().T, gf.entries, atol=1e-12)
        ff = bimodule_inner(f, f)
        assert np.linalg.eigvalsh(ff.entries)[0] >= -1e-12
        assert normalized_trace(ff).real >= -1e-12


def test_inner_product_mismatch_rejected():
    f = derive(AlgebraElement(1, X), 1)
    g = derive(identity(2), 2)
    with pytest.raises(ValueError, match="mismatch"):
        bimodule_inner(f, g)


# --------------------------------------------------------------------------
# Leibniz rule and energy identity
# --------------------------------------------------------------------------


def test_leibniz_anchor_squares_to_zero():
    # d(X^2) = d(1) = 0 and the two action terms cancel exactly
    x = AlgebraElement(1, X)
    lhs = derive(x @ x, 1)
    rhs = bimodule_right(derive(x, 1), x) + bimodule_left(x, derive(x, 1))
    for cl, cr in zip(lhs.components, rhs.components):
        assert np.abs(cl.entries).max() == 0.0
        assert np.abs(cr.entries).max() < 1e-14


def test_leibniz_holds_at_own_level():
    rng = np.random.default_rng(94)
    for n in (1, 2, 3):
        d = 2 ** n
        for _ in range(30):
            a = AlgebraElement(n, rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
            b = AlgebraElement(n, rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
            lhs = derive(a @ b, n)
            rhs = bimodule_right(derive(a, n), b) + bimodule_left(a, derive(b, n))
            for cl, cr in zip(lhs.components, rhs.components):
                assert np.abs(cl.entries - cr.entries).max() < 1e-10


def test_leibniz_genuinely_fails_above_its_level():
    """Conditioning is not multiplicative, so for generic higher-level
    inputs the product rule composed with the expectation breaks; the
    boundary is real, not a tolerance artifact."""
    rng = np.random.default_rng(99)
    a = AlgebraElement(2, rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    b = AlgebraElement(2, rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    lhs = derive(a @ b, 1)
    rhs = bimodule_right(derive(a, 1), cond_expect(b, 1)) + bimodule_left(
        cond_expect(a, 1), derive(b, 1)
    )
    err = max(
        np.abs(cl.entries - cr.entries).max()
        for cl, cr in zip(lhs.components, rhs.components)
    )
    assert err > 1e-2


def test_energy_identity():
    rng = np.random.default_rng(95)
    for n in (1, 2):
        for _ in range(20):
            a = AlgebraElement(3, rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8)))
            f = derive(a, n)
            energy = normalized_trace(bimodule_inner(f, f)).real
            assert abs(energy - commutator_form_eval(a, n)) < 1e-10


def test_actions_are_componentwise_by_construction():
    """Strong-locality witness: the carrier is a direct sum of trivial
    one-component bimodules, i.e. both actions touch components
    independently."""
    rng = np.random.default_rng(96)
    f = derive(AlgebraElement(2, rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))), 2)
    a = random_element(2, "general", 97)
    left = bimodule_left(a, f)
    right = bimodule_right(f, a)
    for j in range(len(f.components)):
        np.testing.assert_array_equal(left.components[j].entries, (a @ f.components[j]).entries)
        np.testing.assert_array_equal(right.components[j].entries, (f.components[j] @ a).entries)


def test_bimodule_serializes_as_matrix_array():
    f = derive(AlgebraElement(1, X), 1)
    arr = bimodule_to_json(f)
    assert isinstance(arr, list) and len(arr) == 2
    assert arr[0]["level"] == 1 and "re" in arr[0] and "im" in arr[0]
