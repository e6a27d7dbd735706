import math
from fractions import Fraction

import numpy as np
import pytest

from qsdc_lab._adversary import (
    ATTACK_TYPES,
    CHI,
    MITM,
    AttackModel,
    DoS,
    EntangleMeasure,
    InterceptResend,
    NoAttack,
    answer_identity_challenge,
    detection_prob_intercept,
    dos_apply,
    dos_decoy_pass_exact,
    dos_decoy_pass_prob,
    dos_unitary_pass,
    entangle_attach,
    entangle_decoy_pass_exact,
    entangle_decoy_pass_prob,
    entangling_unitary,
    eve_message_distinguishability,
    impersonate_alice_session,
    impersonate_bob_session,
    intercept,
    intercept_decoy_survival,
    intercept_resend,
    mitm_decoy_pass_exact,
    mitm_replace,
    p_corr_bound,
    p_corr_intermediate,
    validate_weights,
)
from qsdc_lab._config import ProtocolConfig
from qsdc_lab._protocol import encode_identity_B, encode_message_qubits
from qsdc_lab._quantum_core import (
    BB84_STATES,
    KET_0,
    KET_1,
    KET_PLUS,
    X_BASIS,
    Z_BASIS,
    apply,
    computational_state,
    probability_of,
    rotation_gate,
    tensor,
)


@pytest.fixture
def rng():
    return np.random.default_rng(17)


def test_attack_registry():
    assert set(ATTACK_TYPES) == {
        "none",
        "impersonate_alice",
        "impersonate_bob",
        "intercept_resend",
        "entangle_measure",
        "dos",
        "mitm",
    }


def test_intercept_unknown_attack(rng: np.random.Generator):
    with pytest.raises(NotImplementedError) as exc_info:
        intercept(AttackModel(), [KET_0], rng)

    assert "Unsupported attack model" in exc_info.value.args[0]


def test_no_attack_passes_through(rng: np.random.Generator):
    sequence = [KET_0, KET_PLUS]
    out, record = intercept(NoAttack(), sequence, rng)

    assert out is sequence
    assert record.outcomes == ()


# Intercept-resend ----


def test_intercept_resend_matching_basis(rng: np.random.Generator):
    sequence = encode_message_qubits("0110", 30)
    resent, record = intercept_resend(sequence, 30, rng)

    assert all(a.isclose(b) for a, b in zip(resent, sequence))
    assert record.outcomes == ((0, 0), (1, 1), (2, 1), (3, 0))
    assert record.theta0 == 30.0


def test_intercept_resend_draws_angle(rng: np.random.Generator):
    _, record = intercept(InterceptResend(), [KET_0] * 3, rng)

    assert record.theta0 is not None
    assert 1 <= record.theta0 <= 360


def test_intercept_decoy_survival_is_angle_independent():
    for theta0 in range(1, 361):
        assert intercept_decoy_survival(theta0) == pytest.approx(0.75, abs=1e-10)


def test_intercept_resend_z_decoy_at_45_degrees():
    # |0⟩ resent as |+⟩ or |−⟩, then read in Z: cos⁴45° + sin⁴45°
    basis = X_BASIS
    survival = sum(
        probability_of(KET_0, basis, i) * probability_of(basis.vectors[i], Z_BASIS, 0) for i in (0, 1)
    )

    assert survival == pytest.approx(0.5)


@pytest.mark.parametrize("m, expected", [(0, 0.0), (1, 0.25), (4, 175 / 256)])
def test_detection_prob_intercept(m: int, expected: float):
    assert detection_prob_intercept(m) == pytest.approx(expected)


def test_p_corr_bound():
    exact, holds = p_corr_bound(360, 21, 6)

    assert exact == pytest.approx(1 / (360 * 54264))
    assert holds
    assert p_corr_bound(360, 6, 6)[0] == pytest.approx(1 / 360)


def test_p_corr_bound_large_sequences():
    exact, holds = p_corr_bound(360, 10_000, 50)

    assert 0.0 < exact < 0.5**50
    assert holds


def test_p_corr_intermediate_bounds_exact():
    for l in range(1, 31):
        for n in range(1, l + 1):
            assert Fraction(math.comb(l, n)) >= Fraction(l, n) ** n
            assert p_corr_bound(360, l, n)[0] <= p_corr_intermediate(360, l, n) * (1 + 1e-12)


def test_p_corr_bound_raises():
    with pytest.raises(ValueError):
        p_corr_bound(360, 4, 5)


# Entangle-measure ----


def test_entangling_unitary_columns():
    u = entangling_unitary(0.9).matrix

    assert u[0, 0].real == pytest.approx(math.sqrt(0.9))
    assert u[5, 0].real == pytest.approx(math.sqrt(0.1))
    assert u[2, 4].real == pytest.approx(math.sqrt(0.1))
    assert u[7, 4].real == pytest.approx(math.sqrt(0.9))


def test_entangle_attach_fidelity():
    joint = entangle_attach(KET_0, 0.9)

    assert joint.dim == 8
    assert probability_of(joint, Z_BASIS, 0) == pytest.approx(0.9)
    assert probability_of(entangle_attach(KET_1, 1.0), Z_BASIS, 1) == pytest.approx(1.0)


@pytest.mark.parametrize("fidelity", [0.0, 0.3, 0.9, 1.0])
def test_entangle_attach_diagonal_input(fidelity: float):
    assert probability_of(entangle_attach(KET_PLUS, fidelity), X_BASIS, 0) == pytest.approx(0.5)


@pytest.mark.parametrize("fidelity, expected", [(1.0, 0.75), (0.5, 0.5), (0.8, 0.65)])
def test_entangle_decoy_pass(fidelity: float, expected: float):
    assert entangle_decoy_pass_prob(fidelity) == pytest.approx(expected)
    assert entangle_decoy_pass_exact(fidelity) == pytest.approx(expected)


def test_entangle_measure_raises():
    with pytest.raises(ValueError):
        EntangleMeasure(1.5)


def test_entangle_intercept_keeps_ancillas(rng: np.random.Generator):
    out, record = intercept(EntangleMeasure(0.8), [KET_0, KET_PLUS], rng)

    assert [q.dim for q in out] == [8, 8]
    assert record.entangled_positions == (0, 1)


@pytest.mark.parametrize("theta, fidelity", [(45, 0.5), (7, 1.0), (200, 0.8)])
def test_eve_message_distinguishability_matches_partial_trace(theta: int, fidelity: float):
    u_e = entangling_unitary(fidelity)

    rhos = []
    for bit in (0, 1):
        joint = apply(u_e, tensor(apply(rotation_gate(theta), computational_state(bit)), CHI))
        psi = joint.amplitudes.reshape(2, 4)
        rho = np.zeros((4, 4), dtype=complex)
        for q in range(2):
            for i in range(4):
                for j in range(4):
                    rho[i, j] += psi[q, i] * np.conj(psi[q, j])
        rhos.append(rho)

    expected = 0.5 * np.abs(np.linalg.eigvalsh(rhos[0] - rhos[1])).sum()

    assert eve_message_distinguishability(theta, fidelity) == pytest.approx(expected, abs=1e-10)


# Denial of service ----


def test_validate_weights_raises():
    with pytest.raises(ValueError) as exc_info:
        validate_weights((1.0, 1.0, 0.0, 0.0))

    assert "Σ w_i² = 1" in exc_info.value.args[0]

    with pytest.raises(ValueError) as exc_info:
        validate_weights((1.0, 0.0))

    assert "exactly 4 entries" in exc_info.value.args[0]

    with pytest.raises(ValueError):
        DoS((0.5, 0.5, 0.5, 0.6))


def test_dos_identity_leaves_sequence(rng: np.random.Generator):
    sequence = [KET_0, KET_1, KET_PLUS] * 5
    out, _ = dos_apply(sequence, (1.0, 0.0, 0.0, 0.0), rng)

    assert all(a.isclose(b) for a, b in zip(out, sequence))


def test_dos_bit_flip_hits_half(rng: np.random.Generator):
    sequence = [KET_0] * 40
    out, record = dos_apply(sequence, (0.0, 1.0, 0.0, 0.0), rng)

    disturbed = {pos for pos, _ in record.disturbed_positions}
    assert all(idx == 1 for _, idx in record.disturbed_positions)
    assert 0 < len(disturbed) < 40
    for pos, q in enumerate(out):
        assert q.isclose(KET_1 if pos in disturbed else KET_0)


@pytest.mark.parametrize(
    "weights, expected",
    [
        ((1.0, 0.0, 0.0, 0.0), 1.0),
        ((0.0, 1.0, 0.0, 0.0), 0.5),
        ((0.0, 0.0, 1.0, 0.0), 0.0),
        ((0.5, 0.5, 0.5, 0.5), 0.5),
    ],
)
def test_dos_unitary_pass(weights: tuple, expected: float):
    assert dos_unitary_pass(weights) == pytest.approx(expected)
    assert dos_decoy_pass_prob(weights) == pytest.approx((1 + expected) / 2)


def test_dos_pass_formula_matches_four_state_average():
    rng = np.random.default_rng(1)
    for _ in range(20):
        w = rng.normal(size=4)
        w = w / np.linalg.norm(w)
        formula = w[0] ** 2 + (w[1] ** 2 + w[3] ** 2) / 2

        assert dos_decoy_pass_exact(w) == pytest.approx((1 + formula) / 2, abs=1e-10)


# Man in the middle ----


def test_mitm_replace(rng: np.random.Generator):
    fabricated = mitm_replace(30, rng)

    assert len(fabricated) == 30
    assert all(any(q.isclose(s) for s in BB84_STATES.values()) for q in fabricated)
    assert mitm_decoy_pass_exact() == pytest.approx(0.5)


def test_mitm_keeps_original(rng: np.random.Generator):
    sequence = [KET_0, KET_1]
    _, record = intercept(MITM(), sequence, rng)

    assert record.kept_sequence == (KET_0, KET_1)


# Impersonation ----


def test_answer_identity_challenge(rng: np.random.Generator):
    sequence = encode_identity_B("0000", "1010")
    r, record = answer_identity_challenge(sequence, [[0], [1], [2], [3]], "1010", rng)

    assert len(r) == 4
    assert record.true_id_b1 == "1010"
    assert record.guessed_id_b1 is not None and len(record.guessed_id_b1) == 4
    assert record.guess_correct == (record.guessed_id_b1 == "1010")


def test_impersonate_alice_session():
    config = ProtocolConfig(n=4, c=1, k=32, m=2)
    outcome = impersonate_alice_session(config, np.random.default_rng(8))

    assert outcome.status == "AbortedAuthA"


def test_impersonate_bob_session():
    config = ProtocolConfig(n=4, c=1, k=16, m=2)
    outcome = impersonate_bob_session(config, np.random.default_rng(8))

    assert outcome.status == "AbortedAuthB"
    assert outcome.eve is not None
    assert outcome.eve.guess_correct is not None
