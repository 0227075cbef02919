"""Cumulants, SDL signatures, Haar sampling and the distance diagnostic."""

import numpy as np
import pytest

from qdamp import (
    DimensionMismatchError,
    EmptyEnsembleError,
    HaarReference,
    MomentAccumulator,
    NotAProbabilityVectorError,
    SDLSignature,
    cumulants,
    cumulants_batch,
    distance_to_haar,
    ensemble_sdl,
    haar_reference,
    haar_state,
)
from qdamp.majorization import haar_probs_batch


def haar_mean_cumulant(d, k):
    """Order statistics of the uniform simplex: E[C(k)] = sum_{i<=k} (1/d) sum_{j=i..d} 1/j."""
    return sum((1.0 / d) * sum(1.0 / j for j in range(i, d + 1)) for i in range(1, k + 1))


def random_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


# --- cumulants ------------------------------------------------------------------


def test_cumulants_examples():
    np.testing.assert_array_equal(cumulants([1, 0, 0, 0]), [1, 1, 1, 1])
    np.testing.assert_allclose(
        cumulants([0.25, 0.25, 0.25, 0.25]), [0.25, 0.5, 0.75, 1.0], atol=1e-15
    )
    np.testing.assert_allclose(cumulants([0.1, 0.6, 0.3]), [0.6, 0.9, 1.0], atol=1e-12)
    assert cumulants([0.1, 0.6, 0.3])[-1] == 1.0


def test_cumulants_permutation_invariant():
    rng = np.random.default_rng(5)
    p = rng.dirichlet(np.ones(16))
    base = cumulants(p)
    for _ in range(10):
        np.testing.assert_array_equal(cumulants(rng.permutation(p)), base)


def test_cumulants_majorization_bounds():
    rng = np.random.default_rng(7)
    uniform = cumulants(np.full(16, 1 / 16))
    for _ in range(50):
        c = cumulants(rng.dirichlet(np.ones(16)))
        assert np.all(c <= 1.0 + 1e-12)
        assert np.all(c >= uniform - 1e-12)
        assert np.all(np.diff(c) >= -1e-15)


def test_cumulants_rejects_bad_input():
    with pytest.raises(NotAProbabilityVectorError):
        cumulants([0.5, 0.6])
    with pytest.raises(NotAProbabilityVectorError):
        cumulants([1.1, -0.1])
    # a tiny negative is clamped, not rejected
    c = cumulants([1.0 + 1e-13, -1e-13])
    assert c[-1] == 1.0


# --- SDL ------------------------------------------------------------------------


def test_sdl_identical_members_is_zero():
    c = cumulants([0.5, 0.3, 0.2])
    sig = ensemble_sdl([c, c, c], depth=4)
    np.testing.assert_array_equal(sig.sdl, np.zeros(3))
    assert sig.depth == 4


def test_sdl_two_member_example():
    a = np.array([0.6, 1.0])
    b = np.array([0.8, 1.0])
    sig = ensemble_sdl([a, b], depth=1)
    assert sig.sdl[0] == pytest.approx(0.1, abs=1e-15)
    assert sig.sdl[-1] == 0.0


def test_sdl_errors():
    with pytest.raises(EmptyEnsembleError):
        ensemble_sdl(np.zeros((1, 4)), depth=0)
    with pytest.raises(EmptyEnsembleError):
        ensemble_sdl(np.zeros((0, 4)), depth=0)


def test_sdl_last_entry_zero_for_real_ensembles():
    rng = np.random.default_rng(13)
    cs = cumulants_batch(rng.dirichlet(np.ones(32), size=500))
    sig = ensemble_sdl(cs, depth=0)
    assert sig.sdl[-1] == 0.0
    assert np.all(sig.sdl >= 0.0)


def test_moment_accumulator_merge_matches_direct():
    rng = np.random.default_rng(17)
    data = rng.uniform(size=(40, 6))
    whole = MomentAccumulator(6)
    whole.add_batch(data)
    left = MomentAccumulator(6)
    right = MomentAccumulator(6)
    left.add_batch(data[:23])
    for row in data[23:]:
        right.add(row)
    left.merge(right)
    assert left.count == whole.count
    np.testing.assert_allclose(left.std(), whole.std(), atol=1e-13)
    state = MomentAccumulator.from_state(*left.state())
    np.testing.assert_array_equal(state.std(), left.std())


def test_moment_accumulator_guards():
    acc = MomentAccumulator(3)
    with pytest.raises(EmptyEnsembleError):
        acc.mean()
    acc.add(np.ones(3))
    with pytest.raises(EmptyEnsembleError):
        acc.std()


# --- Haar sampling -----------------------------------------------------------------


def test_haar_state_is_normalized():
    rng = np.random.default_rng(19)
    for d in (2, 5, 64):
        psi = haar_state(rng, d)
        assert psi.shape == (d,)
        assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)


def test_haar_first_cumulant_order_statistics():
    assert haar_mean_cumulant(2, 1) == pytest.approx(0.75)
    assert haar_mean_cumulant(4, 1) == pytest.approx(25 / 48)
    rng = np.random.default_rng(23)
    m = 20_000
    for d in (2, 4):
        c1 = cumulants_batch(haar_probs_batch(rng, m, d))[:, 0]
        se = c1.std(ddof=1) / np.sqrt(m)
        assert abs(c1.mean() - haar_mean_cumulant(d, 1)) < 3 * se


def test_haar_mean_coordinate_is_uniform():
    rng = np.random.default_rng(29)
    p = haar_probs_batch(rng, 20_000, 8)
    se = p.std(ddof=1) / np.sqrt(20_000)
    assert np.all(np.abs(p.mean(axis=0) - 1 / 8) < 4 * se)


def test_haar_unitary_invariance():
    rng = np.random.default_rng(31)
    d, m = 4, 20_000
    u = random_unitary(rng, d)
    probs_plain = haar_probs_batch(rng, m, d)
    z = rng.standard_normal((m, d)) + 1j * rng.standard_normal((m, d))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    rotated = z @ u.T
    probs_rot = np.abs(rotated) ** 2
    c_plain = cumulants_batch(probs_plain)
    c_rot = cumulants_batch(probs_rot)
    for k in range(d):
        se = np.sqrt(
            c_plain[:, k].var(ddof=1) / m + c_rot[:, k].var(ddof=1) / m
        )
        if se == 0.0:
            continue
        assert abs(c_plain[:, k].mean() - c_rot[:, k].mean()) < 3 * se


# --- Haar reference and distance ------------------------------------------------------


def test_haar_reference_deterministic():
    a = haar_reference(16, 400, 77)
    b = haar_reference(16, 400, 77)
    np.testing.assert_array_equal(a.sdl, b.sdl)
    c = haar_reference(16, 400, 78)
    assert not np.array_equal(a.sdl, c.sdl)
    assert a.sdl[-1] == 0.0


def test_haar_reference_json_round_trip():
    ref = haar_reference(8, 300, 5)
    doc = ref.to_json_doc()
    back = HaarReference.from_json_doc(doc)
    assert back.d == ref.d and back.m_haar == ref.m_haar and back.seed == ref.seed
    np.testing.assert_allclose(back.sdl, ref.sdl, atol=0)


def test_distance_examples():
    ref = haar_reference(8, 300, 5)
    sig = SDLSignature(0, ref.sdl.copy())
    assert distance_to_haar(sig, ref) == 0.0
    zero = SDLSignature(0, np.zeros(8))
    assert distance_to_haar(zero, ref) == pytest.approx(np.linalg.norm(ref.sdl))
    with pytest.raises(DimensionMismatchError):
        distance_to_haar(SDLSignature(0, np.zeros(4)), ref)
