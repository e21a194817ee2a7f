import numpy as np
import pytest

from swapnet.channel import (
    Channel,
    ChannelSpec,
    apply_channel,
    build_channel,
    channel_superoperator,
    iterate_channel,
    unitality_error,
)
from swapnet.core import (
    HamiltonianSpec,
    StateSpec,
    build_hamiltonian,
    build_network_hamiltonian,
    build_swap_operator,
    make_initial_state,
    pair_list,
    purity,
)


def expm_hermitian(h, dt=1.0):
    """Brute-force e^{i h dt} for oracle comparisons."""
    evals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(1j * evals * dt)) @ vecs.conj().T


def haar_state(n, seed):
    return make_initial_state(StateSpec(kind="haar_random_pure", seed=seed), n)


ISING3 = build_hamiltonian(HamiltonianSpec(family="ising", n=3, j_z=0.4, h=0.1))
XX3 = build_hamiltonian(HamiltonianSpec(family="xx", n=3, j_x=0.4, h=0.1))


class TestSpecResolution:
    def test_uniform_split(self):
        pairs, probs, kappas = ChannelSpec().resolve(3)
        assert pairs == [(0, 1), (0, 2), (1, 2)]
        assert np.allclose(probs, 0.8 / 3)
        assert np.allclose(kappas, 1.0)

    def test_mapping_with_reversed_keys(self):
        spec = ChannelSpec(pair_probabilities={(1, 0): 0.5, (0, 2): 0.2, (2, 1): 0.1})
        _, probs, _ = spec.resolve(3)
        assert np.allclose(probs, [0.5, 0.2, 0.1])

    def test_sequence_kappa(self):
        _, _, kappas = ChannelSpec(kappa=[0.5, 1.0, 1.5]).resolve(3)
        assert np.allclose(kappas, [0.5, 1.0, 1.5])

    def test_validation_errors(self):
        with pytest.raises(ValueError):
            ChannelSpec(p0=0.0).resolve(3)
        with pytest.raises(ValueError):
            ChannelSpec(p0=1.0).resolve(3)
        with pytest.raises(ValueError):
            ChannelSpec(pair_probabilities=[0.5, 0.2, 0.2]).resolve(3)
        with pytest.raises(ValueError):
            ChannelSpec(pair_probabilities={(0, 1): 0.9, (0, 2): -0.05,
                                            (1, 2): -0.05}).resolve(3)
        with pytest.raises(ValueError):
            ChannelSpec(pair_probabilities={(0, 1): 0.8}).resolve(3)
        with pytest.raises(ValueError):
            ChannelSpec(pair_probabilities={(0, 3): 0.8}).resolve(3)
        with pytest.raises(ValueError):
            ChannelSpec(kappa=[1.0, 2.0]).resolve(3)
        with pytest.raises(ValueError):
            ChannelSpec().resolve(1)


class TestBuildModes:
    def test_diagonal_hamiltonian_keeps_phases(self):
        ch = build_channel(ISING3)
        assert ch.mode == "product"
        assert ch.u0_phases is not None
        assert np.allclose(ch.u0_phases, np.exp(1j * np.diag(ISING3).real))

    def test_nondiagonal_commuting_is_product(self):
        ch = build_channel(XX3)
        assert ch.mode == "product"
        assert ch.u0_phases is None
        assert np.allclose(ch.u0 @ ch.u0.conj().T, np.eye(8), atol=1e-12)

    def test_site_dependent_field_goes_dense(self):
        h = build_network_hamiltonian(3, jz=0.4, hz=[0.1, 0.2, 0.3])
        ch = build_channel(h)
        assert ch.mode == "dense"
        assert ch.unitary_stack.shape == (4, 8, 8)

    def test_weights_sum_exactly_to_one(self):
        for ch in (build_channel(ISING3), build_channel(XX3)):
            assert ch.weights.sum() == 1.0
            assert np.allclose(ch.weights[1:], ch.probs)

    def test_non_hermitian_rejected(self):
        bad = np.eye(4, dtype=complex)
        bad[0, 1] = 0.2
        with pytest.raises(ValueError):
            build_channel(bad)

    def test_unitaries_are_unitary(self):
        for h in (ISING3, XX3):
            ch = build_channel(h)
            for p, u in ch.unitaries():
                assert p > 0
                assert np.allclose(u @ u.conj().T, np.eye(8), atol=1e-10)


class TestApply:
    def test_matches_brute_force_mixture(self):
        # N=2: one pair, dense expm oracle for both mixture members
        h = build_hamiltonian(HamiltonianSpec(family="ising", n=2, j_z=0.4, h=0.1))
        ch = build_channel(h)
        rho = haar_state(2, 3)
        u0 = expm_hermitian(h)
        u1 = expm_hermitian(h + build_swap_operator(0, 1, 2))
        expected = 0.2 * u0 @ rho @ u0.conj().T + 0.8 * u1 @ rho @ u1.conj().T
        assert np.allclose(apply_channel(ch, rho), expected, atol=1e-12)

    def test_matches_brute_force_noncommuting(self):
        h = build_network_hamiltonian(3, jz=0.4, hz=[0.1, 0.2, 0.3])
        ch = build_channel(h)
        rho = haar_state(3, 4)
        expected = ch.weights[0] * expm_hermitian(h) @ rho @ expm_hermitian(h).conj().T
        for k, (m, n) in enumerate(pair_list(3)):
            u = expm_hermitian(h + build_swap_operator(m, n, 3))
            expected += ch.weights[k + 1] * u @ rho @ u.conj().T
        assert np.allclose(apply_channel(ch, rho), expected, atol=1e-12)

    def test_zero_kappa_is_unitary(self):
        ch = build_channel(ISING3, ChannelSpec(kappa=0.0))
        rho = haar_state(3, 5)
        u0 = np.diag(ch.u0_phases)
        assert np.allclose(apply_channel(ch, rho), u0 @ rho @ u0.conj().T, atol=1e-13)
        out = rho
        for _ in range(50):
            out = apply_channel(ch, out)
        assert np.isclose(purity(out), 1.0, atol=1e-12)

    def test_superoperator_consistent_with_apply(self):
        for h in (ISING3, XX3, build_network_hamiltonian(3, jz=0.4, hz=[0.1, 0.2, 0.3])):
            ch = build_channel(h)
            s = channel_superoperator(ch)
            rho = haar_state(3, 6)
            direct = apply_channel(ch, rho)
            via_vec = (s @ rho.reshape(-1)).reshape(8, 8)
            assert np.allclose(direct, via_vec, atol=1e-12)

    def test_unitality(self):
        for h in (ISING3, XX3, build_network_hamiltonian(3, jz=0.4, hz=[0.1, 0.2, 0.3])):
            assert unitality_error(build_channel(h)) <= 1e-12

    def test_trace_and_hermiticity_preserved(self):
        ch = build_channel(XX3)
        rho = haar_state(3, 7)
        out = apply_channel(ch, rho)
        assert abs(np.trace(out) - 1.0) < 1e-14
        assert np.max(np.abs(out - out.conj().T)) < 1e-14

    def test_shape_mismatch(self):
        ch = build_channel(ISING3)
        with pytest.raises(ValueError):
            apply_channel(ch, np.eye(4, dtype=complex) / 4)


class TestIterate:
    def test_zero_steps(self):
        ch = build_channel(ISING3)
        rho = haar_state(3, 8)
        traj = iterate_channel(ch, rho, 0)
        assert traj.steps.size == 1
        assert np.array_equal(traj.final_state, rho)
        assert traj.records["sx"].shape == (1, 3)

    def test_bitwise_deterministic(self):
        ch = build_channel(XX3)
        rho = haar_state(3, 9)
        a = iterate_channel(ch, rho, 200)
        b = iterate_channel(ch, rho, 200)
        assert np.array_equal(a.final_state, b.final_state)
        assert np.array_equal(a.records["sx"], b.records["sx"])

    def test_rotating_frame_matches_direct_application(self):
        # product channel with non-diagonal U0 iterates in the rotating frame;
        # the recorded view must agree with literal repeated application
        ch = build_channel(XX3)
        rho = haar_state(3, 10)
        traj = iterate_channel(ch, rho, 60)
        direct = rho
        for _ in range(60):
            direct = apply_channel(ch, direct)
        assert np.allclose(traj.final_state, direct, atol=1e-12)

    def test_invariants_hold_over_long_run(self):
        ch = build_channel(ISING3)
        traj = iterate_channel(ch, haar_state(3, 11), 500,
                               record=("sx", "entropy"), validate_stride=1)
        rep = traj.invariants
        rep.unitality_error = unitality_error(ch)
        assert rep.passed()
        assert rep.max_trace_error <= 1e-12
        assert rep.min_entropy_increment >= -1e-10

    def test_entropy_monotone_nondecreasing(self):
        ch = build_channel(XX3)
        traj = iterate_channel(ch, haar_state(3, 12), 300, record=("entropy",))
        assert np.min(np.diff(traj.records["entropy"])) >= -1e-10

    def test_total_mz_conserved(self):
        # swaps and a U(1)-symmetric U0 both commute with total z
        for h in (ISING3, XX3):
            ch = build_channel(h)
            traj = iterate_channel(ch, haar_state(3, 13), 300, record=("total_mz",))
            mz = traj.records["total_mz"]
            assert np.max(np.abs(mz - mz[0])) < 1e-10

    def test_loschmidt_starts_at_purity(self):
        ch = build_channel(ISING3)
        rho = haar_state(3, 14)
        traj = iterate_channel(ch, rho, 10, record=("loschmidt",))
        assert np.isclose(traj.records["loschmidt"][0], purity(rho))

    def test_snapshots(self):
        ch = build_channel(ISING3)
        traj = iterate_channel(ch, haar_state(3, 15), 25, record=("sx",),
                               snapshot_stride=10)
        assert sorted(traj.snapshots) == [0, 10, 20]
        assert np.array_equal(traj.snapshots[0], haar_state(3, 15))

    def test_series_accessors(self):
        ch = build_channel(ISING3)
        traj = iterate_channel(ch, haar_state(3, 16), 20,
                               record=("sx", "entropy"), sites=(0, 2))
        assert traj.series("sx", 2).shape == (21,)
        assert traj.series("entropy").shape == (21,)
        with pytest.raises(KeyError):
            traj.series("sy", 0)
        with pytest.raises(KeyError):
            traj.series("sx", 1)
        with pytest.raises(ValueError):
            traj.series("sx")

    def test_rejects_unknown_record(self):
        ch = build_channel(ISING3)
        with pytest.raises(ValueError):
            iterate_channel(ch, haar_state(3, 17), 5, record=("sx", "energy"))
        with pytest.raises(ValueError):
            iterate_channel(ch, haar_state(3, 17), 5, sites=(0, 3))
        with pytest.raises(ValueError):
            iterate_channel(ch, haar_state(3, 17), -1)


class TestSpectralStructure:
    def test_eigenvalues_in_unit_disk(self):
        for h in (ISING3, XX3):
            evals = np.linalg.eigvals(channel_superoperator(build_channel(h)))
            assert np.max(np.abs(evals)) <= 1.0 + 1e-12

    def test_identity_is_fixed_point(self):
        s = channel_superoperator(build_channel(XX3))
        v = (np.eye(8, dtype=complex) / 8).reshape(-1)
        assert np.allclose(s @ v, v, atol=1e-13)

    def test_unimodular_count_matches_class_count(self):
        # persistent eigenvalues: one per attractor class, C(n+3, 3) of them
        for n, h in ((2, build_hamiltonian(HamiltonianSpec(family="ising", n=2,
                                                           j_z=0.4, h=0.1))),
                     (3, ISING3)):
            evals = np.linalg.eigvals(channel_superoperator(build_channel(h)))
            n_unimodular = int(np.sum(np.abs(np.abs(evals) - 1.0) <= 1e-8))
            expected = {2: 10, 3: 20}[n]
            assert n_unimodular == expected


class TestSynchronization:
    def test_single_site_trajectories_converge(self):
        # distinct product-state sites end up with identical Bloch vectors
        up = np.array([1.0, 0.0], dtype=complex)
        plus = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)
        plus_i = np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2)
        psi = np.kron(np.kron(up, plus), plus_i)
        rho0 = np.outer(psi, psi.conj())

        ch = build_channel(ISING3)
        traj = iterate_channel(ch, rho0, 2000, record=("sx", "sy", "sz"))

        def spread(step):
            bloch = np.stack([traj.records[c][step] for c in ("sx", "sy", "sz")])
            dists = [np.linalg.norm(bloch[:, i] - bloch[:, j])
                     for i in range(3) for j in range(i + 1, 3)]
            return max(dists)

        early = max(spread(s) for s in range(6))
        late = max(spread(s) for s in range(1995, 2001))
        assert early > 0.5
        assert late < 0.05
        assert late < 0.1 * early
