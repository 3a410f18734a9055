import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dissipative_lattice.observables import (
    DEFAULT_PAIRS,
    concurrence,
    initial_state,
    observable_record,
    pair_states,
    partial_trace,
    spin_z,
    spin_z_all,
    tau2,
)

UP = np.array([1, 0], dtype=complex)
DN = np.array([0, 1], dtype=complex)


def ket(*parts):
    out = parts[0]
    for p in parts[1:]:
        out = np.kron(out, p)
    return out


def proj(psi):
    return np.outer(psi, psi.conj())


def random_state(rng, d, rank=None):
    g = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng):
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / abs(np.diag(r)))


def wootters_reference(rho):
    # textbook route: eigenvalues of R = sqrt(sqrt(rho) rho~ sqrt(rho))
    from scipy.linalg import sqrtm
    sy = np.array([[0, -1j], [1j, 0]])
    yy = np.kron(sy, sy)
    s = sqrtm(rho)
    R = sqrtm(s @ yy @ rho.conj() @ yy @ s)
    ev = np.sort(np.linalg.eigvalsh(0.5 * (R + R.conj().T)))[::-1]
    return max(0.0, ev[0] - ev[1] - ev[2] - ev[3])


# -- initial states ------------------------------------------------------------

def test_separable_state():
    np.testing.assert_allclose(spin_z_all(initial_state("separable", 7)), 0.5)


def test_max_entangled_state():
    rho = initial_state("max_entangled", 7)
    assert concurrence(partial_trace(rho, [1, 2])) == pytest.approx(1.0, abs=1e-12)
    for i in range(1, 8):
        for j in range(i + 1, 8):
            if (i, j) != (1, 2):
                assert concurrence(partial_trace(rho, [i, j])) < 1e-12
    expected = proj((ket(UP, DN) + ket(DN, UP)) / np.sqrt(2))
    np.testing.assert_allclose(partial_trace(rho, [1, 2]), expected, atol=1e-15)
    np.testing.assert_allclose(spin_z_all(rho)[2:], -0.5)


def test_w_state_magnetization():
    np.testing.assert_allclose(spin_z_all(initial_state("w_state", 7)), -5 / 14, atol=1e-15)


def test_initial_state_aliases_and_errors():
    np.testing.assert_array_equal(initial_state("psi_m", 3), initial_state("max_entangled", 3))
    with pytest.raises(ValueError):
        initial_state("ghz", 3)
    with pytest.raises(ValueError):
        initial_state("separable", 1)


@pytest.mark.parametrize("kind", ["separable", "w_state", "max_entangled"])
def test_initial_states_are_pure(kind):
    rho = initial_state(kind, 4)
    assert np.trace(rho).real == pytest.approx(1)
    assert np.trace(rho @ rho).real == pytest.approx(1)


# -- partial trace -------------------------------------------------------------

def test_partial_trace_of_product():
    rng = np.random.default_rng(0)
    locals_ = [random_state(rng, 2) for _ in range(4)]
    rho = locals_[0]
    for r in locals_[1:]:
        rho = np.kron(rho, r)
    np.testing.assert_allclose(partial_trace(rho, [2, 4]), np.kron(locals_[1], locals_[3]), atol=1e-14)
    # order of keep sets the qubit order of the output
    np.testing.assert_allclose(partial_trace(rho, [4, 2]), np.kron(locals_[3], locals_[1]), atol=1e-14)


def test_partial_trace_random_states():
    rng = np.random.default_rng(1)
    for _ in range(100):
        rho = random_state(rng, 16, rank=rng.integers(1, 17))
        i, j = rng.choice(4, 2, replace=False) + 1
        r2 = partial_trace(rho, [i, j])
        assert np.trace(r2).real == pytest.approx(1, abs=1e-12)
        assert np.max(np.abs(r2 - r2.conj().T)) < 1e-14
        assert np.linalg.eigvalsh(r2)[0] > -1e-10


def test_partial_trace_errors():
    rho = initial_state("separable", 3)
    with pytest.raises(ValueError):
        partial_trace(rho, [1, 1])
    with pytest.raises(ValueError):
        partial_trace(rho, [1, 4])


def test_pair_states_matches_partial_trace():
    rho = random_state(np.random.default_rng(2), 8)
    states = pair_states(rho, [(1, 3), (3, 2)])
    np.testing.assert_allclose(states[(1, 3)], partial_trace(rho, [1, 3]))
    np.testing.assert_allclose(states[(3, 2)], partial_trace(rho, [3, 2]))


# -- concurrence -----------------------------------------------------------------

@pytest.mark.parametrize("psi", [
    (ket(UP, UP) + ket(DN, DN)) / np.sqrt(2),
    (ket(UP, UP) - ket(DN, DN)) / np.sqrt(2),
    (ket(UP, DN) + ket(DN, UP)) / np.sqrt(2),
    (ket(UP, DN) - ket(DN, UP)) / np.sqrt(2),
])
def test_bell_states(psi):
    assert concurrence(proj(psi)) == pytest.approx(1.0, abs=1e-12)


def test_product_states():
    rng = np.random.default_rng(3)
    for _ in range(20):
        assert concurrence(np.kron(random_state(rng, 2), random_state(rng, 2))) < 1e-7


@pytest.mark.parametrize("p", [0.0, 0.2, 1 / 3, 0.5, 0.8, 1.0])
def test_werner_states(p):
    phi = (ket(UP, UP) + ket(DN, DN)) / np.sqrt(2)
    rho = p * proj(phi) + (1 - p) * np.eye(4) / 4
    assert concurrence(rho) == pytest.approx(max(0.0, (3 * p - 1) / 2), abs=1e-12)


def test_werner_half():
    phi = (ket(UP, UP) + ket(DN, DN)) / np.sqrt(2)
    assert concurrence(0.5 * proj(phi) + 0.5 * np.eye(4) / 4) == pytest.approx(0.25, abs=1e-12)


def test_pure_state_formula():
    # |psi> = a|00> + b|11>  ->  C = 2|ab|
    for a in np.linspace(0, 1, 7):
        b = np.sqrt(1 - a ** 2)
        assert concurrence(proj(a * ket(UP, UP) + b * ket(DN, DN))) == pytest.approx(2 * a * b, abs=1e-7)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_concurrence_matches_sqrtm_reference(seed):
    rng = np.random.default_rng(seed)
    rho = random_state(rng, 4, rank=int(rng.integers(2, 5)))
    assert concurrence(rho) == pytest.approx(wootters_reference(rho), abs=1e-7)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_local_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    # generic entangled state: a pure state with full-rank admixture
    rho = 0.85 * random_state(rng, 4, rank=1) + 0.15 * random_state(rng, 4)
    U = np.kron(random_unitary(rng), random_unitary(rng))
    assert abs(concurrence(U @ rho @ U.conj().T) - concurrence(rho)) < 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_swap_symmetry(seed):
    rng = np.random.default_rng(seed)
    rho = random_state(rng, 8, rank=2)
    for i, j in [(1, 2), (1, 3), (2, 3)]:
        assert concurrence(partial_trace(rho, [i, j])) == concurrence(partial_trace(rho, [j, i]))


def test_rank_deficient_local_unitary_invariance():
    # zero eigenvalues of rho rho~ turn round-off into sqrt(eps) ~ 1e-8 errors
    rng = np.random.default_rng(12)
    for _ in range(50):
        rho = random_state(rng, 4, rank=2)
        U = np.kron(random_unitary(rng), random_unitary(rng))
        assert abs(concurrence(U @ rho @ U.conj().T) - concurrence(rho)) < 1e-7


def test_concurrence_rejects_bad_input():
    with pytest.raises(ValueError):
        concurrence(np.eye(2))
    with pytest.raises(ValueError, match="positive"):
        concurrence(np.diag([1.2, -0.2, 0, 0]))


# -- tau2 and Sz ------------------------------------------------------------------

def test_tau2_values():
    assert tau2(initial_state("max_entangled", 5), 1) == pytest.approx(1.0, abs=1e-12)
    assert tau2(initial_state("separable", 5), 3) == 0.0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_tau2_bounds(seed):
    rng = np.random.default_rng(seed)
    rho = random_state(rng, 16, rank=1)
    for s in range(1, 5):
        cs = [concurrence(partial_trace(rho, [s, j])) for j in range(1, 5) if j != s]
        t = tau2(rho, s)
        assert t >= max(c ** 2 for c in cs) - 1e-15
        assert t <= 3


def test_spin_z_extremes():
    assert spin_z(initial_state("separable", 3), 2) == 0.5
    down = np.zeros((8, 8))
    down[-1, -1] = 1
    assert spin_z(down, 3) == -0.5
    with pytest.raises(ValueError):
        spin_z(down, 4)
    with pytest.raises(ValueError, match="imaginary"):
        spin_z(np.diag([0.5, 0.5j]), 1)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_spin_z_in_range(seed):
    sz = spin_z_all(random_state(np.random.default_rng(seed), 8))
    assert np.all(np.abs(sz) <= 0.5)


def test_observable_record():
    rho = initial_state("max_entangled", 7)
    rec = observable_record(rho, 2.5)
    assert rec.time == 2.5
    assert rec.concurrences[(1, 2)] == pytest.approx(1.0)
    assert rec.tau2[1] == pytest.approx(1.0)
    assert rec.tau2[4] == 0
    row = rec.row(DEFAULT_PAIRS, (1, 4))
    assert len(row) == 1 + 4 + 2 + 7
    # reversed pairs read the same reduced state
    rec2 = observable_record(rho, 0, pairs=[(2, 1)], tau2_sites=())
    assert rec2.concurrences[(2, 1)] == rec.concurrences[(1, 2)]
    for s, t in rec.tau2.items():
        assert t >= max(rec.concurrences.get((min(s, j), max(s, j)), 0) ** 2 for j in range(1, 8) if j != s)
