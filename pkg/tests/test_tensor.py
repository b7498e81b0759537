import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crsp_power.tensor import (
    SIGMA_Z,
    DensityOperator,
    PureState,
    SystemLayout,
    apply_unitary,
    binary_entropy,
    equatorial_random,
    equatorial_states,
    fidelity,
    generalized_pauli,
    generalized_x_basis,
    haar_random_pure,
    haar_random_states,
    haar_random_unitary,
    hermitian_eigenvalues,
    kron,
    partial_trace,
    project,
    von_neumann_entropy,
)

from oracles import brute_partial_trace, brute_project, embed, jacobi_eigenvalues

KET0 = PureState([1, 0])
KET1 = PureState([0, 1])
PLUS = PureState(np.array([1, 1]) / np.sqrt(2))
MINUS = PureState(np.array([1, -1]) / np.sqrt(2))
PHI_PLUS = PureState(np.array([1, 0, 0, 1]) / np.sqrt(2), SystemLayout.of([2, 2]))

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def random_layout_state(seed, dims):
    return PureState(haar_random_states(int(np.prod(dims)), 1, seed)[0], SystemLayout.of(dims))


# -- kron -------------------------------------------------------------------

def test_kron_identities():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_basis_product():
    s = kron(KET0, KET1)
    assert np.array_equal(s.amplitudes, PureState.basis([0, 1]).amplitudes)
    assert s.layout.dims == (2, 2)


def test_kron_sigma_z_sign_pattern():
    assert np.array_equal(np.diag(kron(SIGMA_Z, SIGMA_Z)).real, [1, -1, -1, 1])


def test_kron_rejects_mixed_kinds():
    with pytest.raises(TypeError):
        kron(KET0, KET0.density())


# -- apply_unitary ----------------------------------------------------------

def test_apply_identity_is_noop():
    s = random_layout_state(3, [2, 3])
    out = apply_unitary(s, np.eye(3), [1])
    assert np.allclose(out.amplitudes, s.amplitudes, atol=1e-14)


def test_apply_sigma_z_on_first_qubit():
    out = apply_unitary(kron(PLUS, KET0), SIGMA_Z, [0])
    assert np.allclose(out.amplitudes, kron(MINUS, KET0).amplitudes)


def test_apply_z3_on_qutrit_one():
    # Z_3 |1> = exp(2 pi i / 3) |1>
    s = PureState([0, 1, 0])
    out = apply_unitary(s, generalized_pauli(3, "Z"), [0])
    assert np.allclose(out.amplitudes, [0, -0.5 + 0.8660254037844386j, 0], atol=1e-15)


def test_apply_unitary_dimension_mismatch():
    with pytest.raises(ValueError):
        apply_unitary(PHI_PLUS, np.eye(3), [0])


def test_apply_rejects_non_unitary():
    with pytest.raises(ValueError):
        apply_unitary(PHI_PLUS, np.diag([1.0, 0.5]), [0])


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_apply_unitary_matches_embedded_matrix(seed):
    dims = [2, 3, 2]
    s = random_layout_state(seed, dims)
    u = haar_random_unitary(6, seed)
    out = apply_unitary(s, u, [1, 2])
    ref = embed(u, dims, [1, 2]) @ s.amplitudes
    assert np.allclose(out.amplitudes, ref, atol=1e-12)
    assert abs(np.linalg.norm(out.amplitudes) - 1) < 1e-10


def test_apply_unitary_by_label_and_noncontiguous_targets():
    lay = SystemLayout.of([2, 2, 2], ["a", "b", "c"])
    s = PureState.basis([1, 0, 0]).relabel(lay)
    cnot = np.eye(4)[[0, 1, 3, 2]]
    out = apply_unitary(s, cnot, ["a", "c"])
    assert np.allclose(out.amplitudes, PureState.basis([1, 0, 1]).amplitudes)


# -- project ----------------------------------------------------------------

def test_project_bell_onto_zero():
    p, post = project(PHI_PLUS, KET0, [0])
    assert p == pytest.approx(0.5, abs=1e-12)
    assert np.allclose(post.amplitudes, [1, 0])


def test_project_product_state():
    phi = haar_random_pure(2, 11)
    chi = haar_random_pure(3, 12)
    s = kron(phi, chi)
    p, post = project(s, chi, [1])
    assert p == pytest.approx(1.0, abs=1e-12)
    assert abs(np.vdot(post.amplitudes, phi.amplitudes)) == pytest.approx(1.0, abs=1e-12)


def test_project_impossible_outcome():
    p, post = project(kron(KET0, KET0), KET1, [0])
    assert p == 0.0 and post is None


def test_project_requires_normalised_direction():
    with pytest.raises(ValueError):
        project(PHI_PLUS, np.array([1.0, 1.0]), [0])


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(0, 2))
def test_project_matches_digit_loops(seed, target):
    dims = [2, 3, 2]
    s = random_layout_state(seed, dims)
    direction = haar_random_pure(dims[target], seed + 1).amplitudes
    p, post = project(s, direction, [target])
    p_ref, post_ref = brute_project(s.amplitudes, dims, direction, target)
    assert p == pytest.approx(p_ref, abs=1e-12)
    assert np.allclose(post.amplitudes * np.sqrt(p), post_ref, atol=1e-12)


# -- partial trace ----------------------------------------------------------

def test_partial_trace_product():
    phi, chi = haar_random_pure(2, 1), haar_random_pure(2, 2)
    rho = partial_trace(kron(phi, chi), [0])
    assert np.allclose(rho.matrix, phi.projector(), atol=1e-12)


def test_partial_trace_bell_is_maximally_mixed():
    assert np.allclose(partial_trace(PHI_PLUS, [1]).matrix, np.eye(2) / 2)


def test_partial_trace_of_controller_dephases():
    a, b = np.sqrt(0.7), np.sqrt(0.3)
    phi = haar_random_pure(2, 5)
    # layout C, B: a|0>|phi> + b|1> sigma_z|phi>
    amps = a * np.kron([1, 0], phi.amplitudes) + b * np.kron([0, 1], SIGMA_Z @ phi.amplitudes)
    rho = partial_trace(PureState(amps, SystemLayout.of([2, 2])), [1])
    expected = a**2 * phi.projector() + b**2 * SIGMA_Z @ phi.projector() @ SIGMA_Z
    assert np.allclose(rho.matrix, expected, atol=1e-12)


def test_partial_trace_empty_keep():
    with pytest.raises(ValueError):
        partial_trace(PHI_PLUS, [])


@settings(max_examples=25, deadline=None)
@given(seeds, st.sampled_from([[0], [1], [2], [0, 2], [1, 2]]))
def test_partial_trace_matches_digit_loops(seed, keep):
    dims = [2, 3, 2]
    s = random_layout_state(seed, dims)
    fast = partial_trace(s, keep).matrix
    slow = brute_partial_trace(s.amplitudes, dims, keep)
    assert np.allclose(fast, slow, atol=1e-12)
    # density-operator input goes through a different contraction
    assert np.allclose(partial_trace(s.density(), keep).matrix, slow, atol=1e-12)
    DensityOperator(fast).check()


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_partial_trace_of_kron_recovers_factor(seed):
    rng = np.random.default_rng(seed)
    g1 = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    g2 = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    r1 = g1 @ g1.conj().T
    r1 /= np.trace(r1)
    r2 = g2 @ g2.conj().T
    r2 /= np.trace(r2)
    joint = kron(DensityOperator(r1), DensityOperator(r2))
    assert np.max(np.abs(partial_trace(joint, [0]).matrix - r1)) <= 1e-10


# -- fidelity ---------------------------------------------------------------

def test_fidelity_pure_self():
    phi = haar_random_pure(4, 8)
    assert fidelity(phi, phi.density()) == pytest.approx(1.0, abs=1e-12)


def test_fidelity_against_maximally_mixed():
    assert fidelity(KET0, DensityOperator(np.eye(2) / 2)) == pytest.approx(0.5)


def test_fidelity_plus_against_balanced_dephasing():
    rho = 0.5 * PLUS.projector() + 0.5 * SIGMA_Z @ PLUS.projector() @ SIGMA_Z
    assert fidelity(PLUS, rho) == pytest.approx(0.5, abs=1e-15)


def test_fidelity_dimension_mismatch():
    with pytest.raises(ValueError):
        fidelity(KET0, np.eye(3) / 3)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_fidelity_unitary_invariance(seed):
    phi = haar_random_pure(3, seed)
    rho = 0.6 * haar_random_pure(3, seed + 1).projector() + 0.4 * np.eye(3) / 3
    u = haar_random_unitary(3, seed + 2)
    rotated = PureState(u @ phi.amplitudes)
    assert fidelity(rotated, u @ rho @ u.conj().T) == pytest.approx(fidelity(phi, rho), abs=1e-12)


# -- eigenvalues and entropy ------------------------------------------------

def test_eigenvalues_diagonal():
    assert np.allclose(hermitian_eigenvalues(np.diag([0.3, 0.7])), [0.7, 0.3])


def test_eigenvalues_reject_non_hermitian():
    with pytest.raises(ValueError):
        hermitian_eigenvalues(np.array([[0, 1], [0, 0]]))


@settings(max_examples=15, deadline=None)
@given(seeds, st.integers(2, 6))
def test_eigenvalues_match_jacobi(seed, n):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = g @ g.conj().T
    rho /= np.trace(rho)
    ev = hermitian_eigenvalues(rho)
    assert np.allclose(ev, jacobi_eigenvalues(rho), atol=1e-10)
    assert ev.sum() == pytest.approx(1.0, abs=1e-9)
    assert np.all(np.diff(ev) <= 1e-15)


def test_eigenvalues_of_ms3_controller():
    from crsp_power.channels import make_ms3
    c, d = 0.8, 0.6
    rho_c = partial_trace(make_ms3(c, d).state, ["C"])
    assert np.allclose(hermitian_eigenvalues(rho_c), [(1 + d) / 2, (1 - d) / 2], atol=1e-12)


def test_entropy_pure_is_zero():
    assert von_neumann_entropy(haar_random_pure(5, 0).density()) == pytest.approx(0.0, abs=1e-9)


def test_entropy_maximally_mixed_qubit():
    assert von_neumann_entropy(np.eye(2) / 2) == pytest.approx(1.0, abs=1e-12)


def test_entropy_binary():
    assert von_neumann_entropy(np.diag([0.8, 0.2])) == pytest.approx(0.7219280948873623, abs=1e-12)
    assert binary_entropy(0.8) == pytest.approx(0.7219280948873623, abs=1e-15)


@pytest.mark.parametrize("d", [2, 3, 5, 8])
def test_entropy_maximally_mixed(d):
    assert von_neumann_entropy(np.eye(d) / d) == pytest.approx(np.log2(d), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds, st.sampled_from([(2, 2), (2, 3), (3, 4), (2, 8)]))
def test_entropy_symmetric_across_pure_bipartition(seed, dims):
    s = random_layout_state(seed, dims)
    sa = von_neumann_entropy(partial_trace(s, [0]))
    sb = von_neumann_entropy(partial_trace(s, [1]))
    assert abs(sa - sb) <= 1e-8
    assert 0 <= sa <= np.log2(min(dims)) + 1e-9


# -- random states ----------------------------------------------------------

def test_haar_sample_normalised():
    for s in range(20):
        assert abs(np.linalg.norm(haar_random_pure(4, s).amplitudes) - 1) < 1e-12


def test_haar_rejects_small_dimension():
    with pytest.raises(ValueError):
        haar_random_pure(1, 0)


def test_haar_is_seed_deterministic():
    assert np.array_equal(haar_random_pure(3, 42).amplitudes, haar_random_pure(3, 42).amplitudes)


@pytest.mark.parametrize("D", [2, 3, 5])
def test_haar_first_moment(D):
    x = np.abs(haar_random_states(D, 100_000, 2024)[:, 0]) ** 2
    se = x.std(ddof=1) / np.sqrt(x.size)
    assert abs(x.mean() - 1 / D) <= 3 * se


def test_haar_sigma_z_second_moment():
    phi = haar_random_states(2, 100_000, 99)
    x = np.abs(np.einsum("nx,nx->n", phi.conj(), phi @ SIGMA_Z.T)) ** 2
    se = x.std(ddof=1) / np.sqrt(x.size)
    assert abs(x.mean() - 1 / 3) <= 3 * se


def test_haar_unitary_is_unitary():
    u = haar_random_unitary(5, 3)
    assert np.allclose(u.conj().T @ u, np.eye(5), atol=1e-12)


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_equatorial_magnitudes_and_zero_z(N):
    phi = equatorial_states(N, 200, N)
    assert np.allclose(np.abs(phi), 2 ** (-N / 2), atol=1e-15)
    for k in range(N):
        z = np.ones(2**N)
        z[(np.arange(2**N) >> (N - 1 - k)) & 1 == 1] = -1
        assert np.max(np.abs((np.abs(phi) ** 2) @ z)) < 1e-14


def test_equatorial_single_qubit_form():
    s = equatorial_random(1, 7).amplitudes
    rel = s[1] / s[0]
    assert abs(abs(rel) - 1) < 1e-12 and abs(abs(s[0]) - 2**-0.5) < 1e-15


def test_equatorial_rejects_zero_qubits():
    with pytest.raises(ValueError):
        equatorial_random(0, 1)


# -- qudit operators --------------------------------------------------------

def test_pauli_z_qubit_is_sigma_z():
    assert np.allclose(generalized_pauli(2, "Z", 1), np.diag([1, -1]))


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_pauli_cyclicity_and_traces(d):
    z = generalized_pauli(d, "Z")
    x = generalized_pauli(d, "X")
    assert np.allclose(np.linalg.matrix_power(z, d), np.eye(d))
    assert np.allclose(np.linalg.matrix_power(x, d), np.eye(d))
    for k in range(1, d):
        assert abs(np.trace(generalized_pauli(d, "Z", k))) < 1e-12
    assert np.allclose(generalized_pauli(d, "Z", d + 1), z)
    # X|j> = |j+1 mod d>
    assert np.allclose(x @ np.eye(d)[:, d - 1], np.eye(d)[:, 0])


def test_pauli_bad_kind():
    with pytest.raises(ValueError):
        generalized_pauli(3, "Y")


def test_x_basis_qubit_plus():
    assert np.allclose(generalized_x_basis(2, 0).amplitudes, PLUS.amplitudes)


def test_x_basis_qutrit_one():
    w = -0.5 + 0.8660254037844386j
    expected = np.array([1, w, w * w]) / np.sqrt(3)
    assert np.allclose(generalized_x_basis(3, 1).amplitudes, expected, atol=1e-15)


@pytest.mark.parametrize("d", [2, 3, 4, 7])
def test_x_basis_orthonormal(d):
    B = np.array([generalized_x_basis(d, k).amplitudes for k in range(d)])
    assert np.allclose(B.conj() @ B.T, np.eye(d), atol=1e-12)


def test_x_basis_index_range():
    with pytest.raises(ValueError):
        generalized_x_basis(3, 3)


def test_pure_state_rejects_unnormalised():
    with pytest.raises(ValueError):
        PureState([1, 1])


def test_density_check_flags_bad_trace():
    with pytest.raises(ValueError):
        DensityOperator(np.eye(2)).check()
