import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deletia import qsim, zqcore
from deletia.qsim import (
    DensityOp,
    Ensemble,
    RegisterLayout,
    QState,
    ZeroProbabilityProjection,
    apply_classical,
    basis_state,
    controlled_phase_oracle,
    drop_segment,
    ensemble_trace_distance,
    jacobi_eigvalsh,
    marginal_probs,
    measure,
    pauli_twirl_channel,
    phase_oracle,
    prepare_weighted,
    project,
    project_prob,
    qft,
    qft_inverse,
    trace_distance,
)


def rand_state(layout, rng):
    a = rng.normal(size=layout.dim) + 1j * rng.normal(size=layout.dim)
    return QState(layout, a / np.linalg.norm(a))


def test_layout_basics():
    lay = RegisterLayout([("X", (5, 5)), ("Y", (3,))])
    assert lay.dim == 75
    assert lay.axes("Y") == [2]
    assert lay.seg_dim("X") == 25
    with pytest.raises(KeyError):
        lay.axes("Z")
    with pytest.raises(ValueError):
        RegisterLayout([("X", (2,)), ("X", (2,))])


def test_layout_guard():
    with pytest.raises(ValueError):
        RegisterLayout([("X", (2,) * 23)])


def test_prepare_weighted_uniform():
    lay = RegisterLayout([("X", (2, 2))])
    st_ = prepare_weighted(lay, "X", np.ones(4))
    np.testing.assert_allclose(st_.amps, 0.5)


def test_prepare_weighted_singleton():
    lay = RegisterLayout([("X", (3, 3))])
    st_ = prepare_weighted(lay, "X", {(2, 1): 1.0})
    want = basis_state(lay, {"X": (2, 1)})
    np.testing.assert_allclose(st_.amps, want.amps)


def test_prepare_weighted_gaussian_matches_pmf():
    # amplitudes prop. to rho_sigma measure as the sigma/sqrt(2) table
    q, m, sigma = 5, 2, 20.0
    lay = RegisterLayout([("X", (q,) * m)])
    w = np.array([zqcore.rho_sigma(zqcore.ZqVector(list(x), q), sigma)
                  for x in itertools.product(range(q), repeat=m)])
    st_ = prepare_weighted(lay, "X", w)
    # wide enough that the table's norm truncation is vacuous
    table = zqcore.truncated_gaussian_pmf(
        zqcore.GaussianParams(sigma / math.sqrt(2), q, m))
    np.testing.assert_allclose(marginal_probs(st_, "X"), table, atol=1e-12)


def test_prepare_weighted_rejects_all_zero():
    lay = RegisterLayout([("X", (2,))])
    with pytest.raises(ValueError):
        prepare_weighted(lay, "X", {0: 0.0})


def test_apply_classical_identity():
    lay = RegisterLayout([("X", (3,)), ("Y", (3,))])
    st_ = basis_state(lay, {"X": (2,)})
    out = apply_classical(st_, lambda x: (x,), "X", "Y")
    want = basis_state(lay, {"X": (2,), "Y": (2,)})
    np.testing.assert_allclose(out.amps, want.amps)


def test_apply_classical_pushforward():
    rng = np.random.default_rng(1)
    lay = RegisterLayout([("X", (4,)), ("Y", (5,))])
    w = rng.random(4) + 0.1
    st_ = prepare_weighted(lay, "X", w)
    f = lambda x: ((2 * x + 1) % 5,)
    out = apply_classical(st_, f, "X", "Y")
    got = marginal_probs(out, "Y")
    want = np.zeros(5)
    probs = w**2 / np.sum(w**2)
    for x in range(4):
        want[f(x)[0]] += probs[x]
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_apply_classical_inverse_restores():
    rng = np.random.default_rng(2)
    lay = RegisterLayout([("X", (3, 3)), ("Y", (3,))])
    st_ = rand_state(lay, rng)
    f = lambda x: ((x[0] + 2 * x[1]) % 3,)
    g = lambda x: ((-(x[0] + 2 * x[1])) % 3,)
    out = apply_classical(apply_classical(st_, f, "X", "Y"), g, "X", "Y")
    np.testing.assert_allclose(out.amps, st_.amps, atol=1e-12)


def test_apply_classical_preserves_amplitude_multiset():
    rng = np.random.default_rng(3)
    lay = RegisterLayout([("X", (4,)), ("Y", (4,))])
    st_ = rand_state(lay, rng)
    out = apply_classical(st_, lambda x: ((x * x + 1) % 4,), "X", "Y")
    assert sorted(np.round(np.abs(st_.amps), 12)) == sorted(np.round(np.abs(out.amps), 12))


def test_measure_deterministic_on_basis_state():
    lay = RegisterLayout([("X", (5,)), ("Y", (2,))])
    st_ = basis_state(lay, {"X": (3,)})
    out = measure(st_, "X", np.random.default_rng(0))
    assert out.value == (3,) and out.probability == pytest.approx(1.0)


def test_measure_seed_determinism():
    lay = RegisterLayout([("X", (7,))])
    st_ = prepare_weighted(lay, "X", np.arange(1, 8, dtype=float))
    a = measure(st_, "X", np.random.default_rng(42))
    b = measure(st_, "X", np.random.default_rng(42))
    assert a.value == b.value and a.probability == b.probability


def test_qft_zero_state_uniform():
    lay = RegisterLayout([("X", (5, 5))])
    out = qft(basis_state(lay), "X")
    np.testing.assert_allclose(np.abs(out.amps), 1 / 5, atol=1e-12)


def test_qft_twice_negates():
    q = 5
    lay = RegisterLayout([("X", (q,))])
    for x in range(q):
        out = qft(qft(basis_state(lay, {"X": (x,)}), "X"), "X")
        want = basis_state(lay, {"X": ((-x) % q,)})
        np.testing.assert_allclose(out.amps, want.amps, atol=1e-10)


@pytest.mark.parametrize("q,m", [(q, m) for q in range(2, 14) for m in (1, 2)])
def test_qft_unitarity(q, m):
    lay = RegisterLayout([("X", (q,) * m)])
    dim = q**m
    cols = []
    for i in range(dim):
        amps = np.zeros(dim, dtype=complex)
        amps[i] = 1.0
        cols.append(qft(QState(lay, amps), "X").amps)
    F = np.stack(cols, axis=1)
    np.testing.assert_allclose(F.conj().T @ F, np.eye(dim), atol=1e-10)


def test_qft_preserves_inner_products():
    rng = np.random.default_rng(4)
    lay = RegisterLayout([("X", (5, 5))])
    a, b = rand_state(lay, rng), rand_state(lay, rng)
    lhs = np.vdot(qft(a, "X").amps, qft(b, "X").amps)
    assert lhs == pytest.approx(np.vdot(a.amps, b.amps), abs=1e-10)
    roundtrip = qft_inverse(qft(a, "X"), "X")
    np.testing.assert_allclose(roundtrip.amps, a.amps, atol=1e-10)


def test_phase_oracle_zero_vector_is_identity():
    rng = np.random.default_rng(5)
    lay = RegisterLayout([("X", (5, 5))])
    st_ = rand_state(lay, rng)
    out = phase_oracle(st_, "X", (0, 0))
    np.testing.assert_allclose(out.amps, st_.amps)


def test_pauli_z_involution():
    rng = np.random.default_rng(6)
    lay = RegisterLayout([("X", (2, 2, 2))])
    st_ = rand_state(lay, rng)
    out = phase_oracle(phase_oracle(st_, "X", (1, 0, 1)), "X", (1, 0, 1))
    np.testing.assert_allclose(out.amps, st_.amps, atol=1e-12)


def test_controlled_phase_amplitudes():
    # CZ^z on (|0>+|1>)_C |x>: control amplitudes (1, (-1)^{<x,z>})/sqrt2
    lay = RegisterLayout([("C", (2,)), ("X", (2, 2))])
    z = (1, 1)
    for x in itertools.product((0, 1), repeat=2):
        amps = np.zeros(lay.dim, dtype=complex)
        i0 = lay.value_index("X", x)
        amps[i0] = 1 / math.sqrt(2)
        amps[4 + i0] = 1 / math.sqrt(2)
        out = controlled_phase_oracle(QState(lay, amps), "C", "X", z)
        sign = (-1) ** (sum(a * b for a, b in zip(x, z)) % 2)
        assert out.amps[i0] == pytest.approx(1 / math.sqrt(2))
        assert out.amps[4 + i0] == pytest.approx(sign / math.sqrt(2))


def test_pauli_twirl_fixed_point_and_plus_state():
    lay = RegisterLayout([("X", (2,))])
    diag = DensityOp(lay, np.diag([0.3, 0.7]).astype(complex))
    out = pauli_twirl_channel(diag, "X")
    np.testing.assert_allclose(out.matrix, diag.matrix, atol=1e-15)
    plus = QState(lay, np.array([1, 1]) / math.sqrt(2))
    out = pauli_twirl_channel(DensityOp.from_state(plus), "X")
    np.testing.assert_allclose(out.matrix, np.eye(2) / 2, atol=1e-15)


def test_pauli_twirl_equals_diagonal_extraction():
    # oracle: zero the off-diagonal blocks of the twirled segment directly
    rng = np.random.default_rng(7)
    lay = RegisterLayout([("X", (2, 2)), ("Z", (3,))])
    rho = DensityOp.mixture([(0.5, rand_state(lay, rng)), (0.5, rand_state(lay, rng))])
    out = pauli_twirl_channel(rho, "X")
    t = rho.matrix.reshape(2, 2, 3, 2, 2, 3).copy()
    for i in (0, 1):
        for j in (0, 1):
            for k in (0, 1):
                for l in (0, 1):
                    if (i, j) != (k, l):
                        t[i, j, :, k, l, :] = 0
    np.testing.assert_allclose(out.matrix, t.reshape(12, 12), atol=1e-12)
    # off-diagonal blocks vanish entirely
    got = out.matrix.reshape(2, 2, 3, 2, 2, 3)
    assert np.max(np.abs(got[0, 0, :, 1, 1, :])) < 1e-12


def test_project_examples():
    lay = RegisterLayout([("X", (2,))])
    plus = QState(lay, np.array([1, 1]) / math.sqrt(2))
    minus = QState(lay, np.array([1, -1]) / math.sqrt(2))
    p, post = project(plus, "X", plus)
    assert p == pytest.approx(1.0)
    assert project_prob(plus, "X", minus) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ZeroProbabilityProjection):
        project(plus, "X", minus)
    # |0> onto (|0> + (-1)^s |1>)/sqrt2 always succeeds with prob 1/2
    zero = basis_state(lay)
    for s in (1, -1):
        phi = np.array([1, s]) / math.sqrt(2)
        assert project_prob(zero, "X", phi) == pytest.approx(0.5)


def test_trace_distance_examples():
    lay = RegisterLayout([("X", (2,))])
    zero = DensityOp.from_state(basis_state(lay))
    one = DensityOp.from_state(basis_state(lay, {"X": (1,)}))
    plus = DensityOp.from_state(QState(lay, np.array([1, 1]) / math.sqrt(2)))
    assert trace_distance(zero, zero) == pytest.approx(0.0, abs=1e-12)
    assert trace_distance(zero, one) == pytest.approx(1.0, abs=1e-12)
    assert trace_distance(zero, plus) == pytest.approx(1 / math.sqrt(2), abs=1e-10)


def test_trace_distance_triangle_and_symmetry():
    rng = np.random.default_rng(8)
    lay = RegisterLayout([("X", (2, 2))])
    rhos = [DensityOp.from_state(rand_state(lay, rng)) for _ in range(3)]
    d01 = trace_distance(rhos[0], rhos[1])
    d12 = trace_distance(rhos[1], rhos[2])
    d02 = trace_distance(rhos[0], rhos[2])
    assert d01 == pytest.approx(trace_distance(rhos[1], rhos[0]), abs=1e-10)
    assert d02 <= d01 + d12 + 1e-9


def test_trace_distance_zero_iff_equal():
    rng = np.random.default_rng(9)
    lay = RegisterLayout([("X", (2, 2))])
    a = DensityOp.from_state(rand_state(lay, rng))
    b = DensityOp(lay, a.matrix.copy())
    assert trace_distance(a, b) < 1e-12
    c = DensityOp.from_state(rand_state(lay, rng))
    if np.max(np.abs(a.matrix - c.matrix)) > 1e-9:
        assert trace_distance(a, c) > 1e-9


def test_trace_distance_monotone_under_partial_trace():
    rng = np.random.default_rng(10)
    lay = RegisterLayout([("A", (2,)), ("B", (3,))])
    for _ in range(5):
        x = DensityOp.from_state(rand_state(lay, rng))
        y = DensityOp.from_state(rand_state(lay, rng))
        full = trace_distance(x, y)
        red = trace_distance(qsim.partial_trace(x, ["A"]), qsim.partial_trace(y, ["A"]))
        assert red <= full + 1e-9


def test_jacobi_matches_numpy():
    rng = np.random.default_rng(11)
    for n in (2, 5, 16, 40):
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        h = (a + a.conj().T) / 2
        got = jacobi_eigvalsh(h)
        want = np.sort(np.linalg.eigvalsh(h))
        np.testing.assert_allclose(got, want, atol=1e-9)


@given(st.integers(min_value=0, max_value=10**6))
@settings(max_examples=30, deadline=None)
def test_norm_preserved_under_random_ops(seed):
    rng = np.random.default_rng(seed)
    lay = RegisterLayout([("C", (2,)), ("X", (3, 3))])
    st_ = rand_state(lay, rng)
    st_ = qft(st_, "X")
    st_ = phase_oracle(st_, "X", tuple(rng.integers(0, 3, size=2)))
    st_ = apply_classical(st_, lambda c: ((c + 1) % 2,), "C", "C") \
        if False else st_
    st_ = qft_inverse(st_, "X")
    assert st_.norm() == pytest.approx(1.0, abs=1e-10)


def test_drop_segment():
    lay = RegisterLayout([("X", (3,)), ("Y", (4,))])
    st_ = basis_state(lay, {"X": (2,), "Y": (3,)})
    red = drop_segment(st_, "Y", (3,))
    assert red.layout.names() == ["X"]
    want = basis_state(red.layout, {"X": (2,)})
    np.testing.assert_allclose(red.amps, want.amps)


def test_dump_format():
    lay = RegisterLayout([("X", (2, 2))])
    st_ = QState(lay, np.array([1, 0, 0, 1]) / math.sqrt(2))
    lines = st_.dump().splitlines()
    assert lines[0].startswith("0,0  ")
    assert lines[1].startswith("1,1  ")
    assert len(lines) == 2


def test_ensemble_trace_distance():
    lay = RegisterLayout([("X", (2,))])
    zero = basis_state(lay)
    one = basis_state(lay, {"X": (1,)})
    a = Ensemble([(0.5, ("y",), zero), (0.5, ("n",), one)])
    b = Ensemble([(0.5, ("y",), zero), (0.5, ("n",), one)])
    assert ensemble_trace_distance(a, b) == pytest.approx(0.0, abs=1e-12)
    c = Ensemble([(0.5, ("y",), one), (0.5, ("n",), one)])
    assert ensemble_trace_distance(a, c) == pytest.approx(0.5, abs=1e-12)
    # classical-only branches compare by mass
    d = Ensemble([(1.0, ("y",), None)])
    e = Ensemble([(0.25, ("y",), None), (0.75, ("n",), None)])
    assert ensemble_trace_distance(d, e) == pytest.approx(0.75, abs=1e-12)


def test_dump_golden_file():
    from pathlib import Path

    from deletia import configs, dualregev

    keys = dualregev.dr_keygen(configs.DR_EXACT, np.random.default_rng(0))
    st_, _ = dualregev.gen_gauss(keys.pk, configs.DR_EXACT.sigma,
                                 np.random.default_rng(1))
    golden = Path(__file__).parent / "golden" / "gengauss_coset_seed01.dump"
    assert st_.dump() == golden.read_text()
