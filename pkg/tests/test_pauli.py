"""Pauli algebra: expansion, products, rotations, frame toggling."""

import numpy as np
import pytest

from helpers import CLASSICAL_MIX, MAXIMALLY_MIXED, PHI_PLUS, random_density_matrix

from zzsim.pauli import (
    LABELS,
    MATRICES,
    ControlAction,
    Rotation,
    apply_local_rotation,
    check_density_matrix,
    commutes_with,
    encoded_bloch,
    hadamard_frame_toggle,
    pauli_expand,
    pauli_product,
    pauli_reconstruct,
)


def test_labels_row_major_ixyz_order():
    assert len(LABELS) == 16
    assert LABELS[:4] == ("II", "IX", "IY", "IZ")
    assert LABELS[4] == "XI"
    assert LABELS.index("ZZ") == 15


def test_expand_maximally_mixed():
    table = pauli_expand(MAXIMALLY_MIXED)
    assert table["II"] == pytest.approx(1.0, abs=1e-12)
    for s in LABELS[1:]:
        assert table[s] == pytest.approx(0.0, abs=1e-12)


def test_expand_bell_state():
    table = pauli_expand(PHI_PLUS)
    expected = {"II": 1.0, "XX": 1.0, "YY": -1.0, "ZZ": 1.0}
    for s in LABELS:
        assert table[s] == pytest.approx(expected.get(s, 0.0), abs=1e-12)


def test_expand_classical_mixture():
    table = pauli_expand(CLASSICAL_MIX)
    expected = {"II": 1.0, "ZZ": 1.0}
    for s in LABELS:
        assert table[s] == pytest.approx(expected.get(s, 0.0), abs=1e-12)


def test_expand_rejects_non_unit_trace():
    with pytest.raises(ValueError):
        pauli_expand(np.eye(4, dtype=complex))


def test_reconstruct_examples():
    zero = {s: 0.0 for s in LABELS} | {"II": 1.0}
    assert np.allclose(pauli_reconstruct(zero), MAXIMALLY_MIXED, atol=1e-15)
    zz_only = dict(zero, ZZ=1.0)
    assert np.allclose(pauli_reconstruct(zz_only), CLASSICAL_MIX, atol=1e-15)
    assert np.allclose(pauli_reconstruct(pauli_expand(PHI_PLUS)), PHI_PLUS, atol=1e-12)
    with pytest.raises(ValueError):
        pauli_reconstruct(dict(zero, II=0.5))


def test_round_trip_random_states():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(1000):
        rho = random_density_matrix(rng)
        back = pauli_reconstruct(pauli_expand(rho))
        worst = max(worst, np.abs(back - rho).max())
    assert worst < 1e-12


def test_product_examples():
    assert pauli_product("II", "XY") == pauli_product("XY", "II")
    assert pauli_product("II", "XY").phase == 1
    assert pauli_product("II", "XY").string == "XY"
    assert pauli_product("ZZ", "ZZ").phase == 1
    assert pauli_product("ZZ", "ZZ").string == "II"
    p = pauli_product("ZZ", "XX")
    assert p.phase == -1 and p.string == "YY"


def test_product_matches_matrices_and_associativity():
    for a in LABELS:
        for b in LABELS:
            p = pauli_product(a, b)
            assert np.allclose(p.phase * MATRICES[p.string], MATRICES[a] @ MATRICES[b])
    for a in LABELS:
        for b in LABELS:
            ab = pauli_product(a, b)
            for c in LABELS:
                left = pauli_product(ab.string, c)
                bc = pauli_product(b, c)
                right = pauli_product(a, bc.string)
                assert ab.phase * left.phase == bc.phase * right.phase
                assert left.string == right.string


def test_product_phase_reflects_commutation():
    for a in LABELS:
        for b in LABELS:
            phase = pauli_product(a, b).phase
            if commutes_with(a, b):
                assert phase in (1, -1)
            else:
                assert phase in (1j, -1j)


def test_commutant_of_zz():
    commuting = {s for s in LABELS if commutes_with(s, "ZZ")}
    assert commuting == {"II", "ZZ", "ZI", "IZ", "XX", "XY", "YX", "YY"}
    assert len([s for s in LABELS if not commutes_with(s, "ZZ")]) == 8
    assert commutes_with("XX", "ZZ")
    assert not commutes_with("XZ", "ZZ")
    assert commutes_with("II", "ZZ")


def test_zero_angle_rotation_is_identity():
    rng = np.random.default_rng(3)
    rho = random_density_matrix(rng)
    out = apply_local_rotation(rho, ControlAction.identity())
    assert np.allclose(out, rho, atol=1e-15)


def test_hadamard_angle_rotation_maps_zz_mixture_to_xx_mixture():
    axis = (1.0 / np.sqrt(2.0), 0.0, 1.0 / np.sqrt(2.0))
    action = ControlAction(Rotation(axis, np.pi), Rotation(axis, np.pi))
    out = apply_local_rotation(CLASSICAL_MIX, action)
    table = pauli_expand(out)
    assert table["XX"] == pytest.approx(1.0, abs=1e-12)
    for s in LABELS[1:]:
        if s != "XX":
            assert table[s] == pytest.approx(0.0, abs=1e-12)


def test_quarter_turn_on_qubit1_moves_encoded_bloch_z_to_x():
    rho = CLASSICAL_MIX  # encoded-1 Bloch (0, 0, 1)
    out = apply_local_rotation(rho, ControlAction.rotate_qubit1((0, 1, 0), np.pi / 2))
    bloch = encoded_bloch(pauli_expand(out), "one")
    assert (bloch.x, bloch.y, bloch.z) == pytest.approx((1.0, 0.0, 0.0), abs=1e-12)


def test_rotations_preserve_purity_and_eigenvalues():
    rng = np.random.default_rng(5)
    for _ in range(50):
        rho = random_density_matrix(rng)
        axis1 = rng.standard_normal(3)
        axis2 = rng.standard_normal(3)
        action = ControlAction(
            Rotation(tuple(axis1 / np.linalg.norm(axis1)), rng.uniform(-np.pi, np.pi)),
            Rotation(tuple(axis2 / np.linalg.norm(axis2)), rng.uniform(-np.pi, np.pi)),
        )
        out = apply_local_rotation(rho, action)
        assert np.trace(out).real == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(
            np.linalg.eigvalsh(out), np.linalg.eigvalsh(rho), atol=1e-12
        )
        restored = apply_local_rotation(out, action.inverse())
        assert np.allclose(restored, rho, atol=1e-12)


def test_correlation_sum_invariant_under_local_rotations():
    rng = np.random.default_rng(7)
    labels = [a + b for a in "XYZ" for b in "XYZ"]
    for _ in range(50):
        rho = random_density_matrix(rng)
        before = sum(pauli_expand(rho)[s] ** 2 for s in labels)
        axis = rng.standard_normal(3)
        action = ControlAction(
            Rotation(tuple(axis / np.linalg.norm(axis)), rng.uniform(-np.pi, np.pi)),
            Rotation((0.0, 1.0, 0.0), rng.uniform(-np.pi, np.pi)),
        )
        after = sum(pauli_expand(apply_local_rotation(rho, action))[s] ** 2 for s in labels)
        assert after == pytest.approx(before, abs=1e-10)


def test_frame_toggle_involution_and_axis_swap():
    rng = np.random.default_rng(9)
    rho = random_density_matrix(rng)
    assert np.allclose(hadamard_frame_toggle(hadamard_frame_toggle(rho)), rho, atol=1e-12)

    toggled = pauli_expand(hadamard_frame_toggle(CLASSICAL_MIX))
    assert toggled["XX"] == pytest.approx(1.0, abs=1e-12)
    assert toggled["ZZ"] == pytest.approx(0.0, abs=1e-12)

    assert np.allclose(hadamard_frame_toggle(PHI_PLUS), PHI_PLUS, atol=1e-12)


def test_frame_toggle_coefficient_map():
    # Swap X and Z on each factor, one sign flip per Y factor.
    rng = np.random.default_rng(13)
    rho = random_density_matrix(rng)
    before = pauli_expand(rho)
    after = pauli_expand(hadamard_frame_toggle(rho))
    swap = {"I": "I", "X": "Z", "Z": "X", "Y": "Y"}
    for s in ("XY", "ZY", "YY", "XZ", "IZ", "YX"):
        image = swap[s[0]] + swap[s[1]]
        sign = (-1) ** s.count("Y")
        assert after[image] == pytest.approx(sign * before[s], abs=1e-12)


def test_encoded_bloch_examples():
    for which in ("one", "two"):
        b = encoded_bloch(pauli_expand(MAXIMALLY_MIXED), which)
        assert (b.x, b.y, b.z) == (0.0, 0.0, 0.0)
    b1 = encoded_bloch(pauli_expand(CLASSICAL_MIX), "one")
    assert (b1.x, b1.y, b1.z) == pytest.approx((0.0, 0.0, 1.0), abs=1e-12)
    b2 = encoded_bloch(pauli_expand(PHI_PLUS), "two")
    assert (b2.x, b2.y, b2.z) == pytest.approx((1.0, 0.0, 0.0), abs=1e-12)
    with pytest.raises(ValueError):
        encoded_bloch(pauli_expand(PHI_PLUS), "three")


def test_encoded_bloch_length_bounded():
    rng = np.random.default_rng(17)
    for _ in range(200):
        table = pauli_expand(random_density_matrix(rng))
        for which in ("one", "two"):
            assert encoded_bloch(table, which).length_sq <= 1.0 + 1e-9


def test_check_density_matrix_rejects_bad_inputs():
    good = np.eye(4, dtype=complex) / 4
    check_density_matrix(good)
    with pytest.raises(ValueError):
        check_density_matrix(np.eye(4, dtype=complex))
    bad = good.copy()
    bad[0, 1] = 0.1
    with pytest.raises(ValueError):
        check_density_matrix(bad)
    with pytest.raises(ValueError):
        check_density_matrix(np.diag([1.1, 0.1, -0.2, 0.0]).astype(complex))
