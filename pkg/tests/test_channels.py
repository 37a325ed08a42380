import math

import numpy as np
import pytest

from edlab import (
    BumpState,
    FlipChannel,
    GaussianState,
    InvariantViolation,
    ProbeSpec,
    RandomState,
    SlitChannel,
    VonNeumannChannel,
    apply_flip,
    apply_slit,
    apply_von_neumann,
    density_from_kraus,
    distribution,
    embed_joint,
    kraus_of,
    make_grid,
    make_state,
    momentum_distribution_of,
    probe_grid_for,
    reduce_system,
    trace_distance,
)
from edlab.channels import pure_density

from conftest import make_vn_channel, random_amplitudes


class TestFlip:
    def test_reflects_translated_gaussian(self, std_grid):
        psi = make_state(std_grid, GaussianState(1, 0, 1))
        target = make_state(std_grid, GaussianState(-1, 0, 1))
        assert np.max(np.abs(apply_flip(psi).amplitudes - target.amplitudes)) < 1e-12

    def test_fixes_even_gaussian(self, std_grid):
        psi = make_state(std_grid, GaussianState(0, 0, 1))
        assert np.max(np.abs(apply_flip(psi).amplitudes - psi.amplitudes)) < 1e-12

    def test_reflects_offset_bump(self):
        grid = make_grid(1024, -16, 16)
        psi = make_state(grid, BumpState(0.5, 0.25))
        target = make_state(grid, BumpState(-0.5, 0.25))
        assert np.max(np.abs(apply_flip(psi).amplitudes - target.amplitudes)) < 1e-12

    def test_exact_index_permutation(self, corpus):
        for _, psi in corpus:
            flipped = apply_flip(psi)
            assert np.array_equal(flipped.amplitudes, psi.amplitudes[::-1])

    def test_even_state_momentum_distribution_unchanged(self, std_grid):
        psi = make_state(std_grid, GaussianState(0, 0, 1.5))
        before = distribution(psi, "momentum")
        after = distribution(apply_flip(psi), "momentum")
        assert np.max(np.abs(before.weights - after.weights)) < 1e-12

    def test_requires_symmetric_domain(self):
        g = make_grid(256, 0, 32)
        psi = make_state(g, GaussianState(16, 0, 1))
        with pytest.raises(InvariantViolation, match="symmetric"):
            apply_flip(psi)


class TestEmbedJoint:
    def test_unit_norm(self, std_grid, vn_default):
        channel, psi = vn_default
        joint = embed_joint(psi, channel.probe)
        assert abs(joint.norm() - 1.0) < 1e-12

    def test_marginals_factorize(self, std_grid, vn_default):
        channel, psi = vn_default
        joint = embed_joint(psi, channel.probe)
        sys_m = joint.system_marginal()
        probe_m = joint.probe_marginal()
        assert np.max(np.abs(sys_m - np.abs(psi.amplitudes) ** 2)) < 1e-12
        assert np.max(np.abs(probe_m - np.abs(channel.probe.ready_state.amplitudes) ** 2)) < 1e-12


class TestVonNeumann:
    def test_conditional_shift_recenters_pointer(self):
        # near-position-eigenstate: pointer marginal recenters at g * x0
        grid = make_grid(2048, -8, 8)
        psi = make_state(grid, GaussianState(2.0, 0.0, 0.1))
        channel = make_vn_channel(grid, psi, 1.0, 0.5)
        joint = apply_von_neumann(embed_joint(psi, channel.probe), 1.0, "forward")
        probe_m = joint.probe_marginal()
        mean = np.sum(channel.probe.grid.x * probe_m) * channel.probe.grid.dx
        assert mean == pytest.approx(2.0, abs=1e-9)
        var = np.sum(channel.probe.grid.x**2 * probe_m) * channel.probe.grid.dx - mean**2
        assert var == pytest.approx(0.5**2 + 1.0**2 * 0.1**2, rel=1e-6)

    def test_unitarity_and_inverse(self, std_grid, vn_default):
        channel, psi = vn_default
        joint = embed_joint(psi, channel.probe)
        forward = apply_von_neumann(joint, channel.g, "forward")
        assert abs(forward.norm() - 1.0) < 1e-12
        back = apply_von_neumann(forward, channel.g, "adjoint")
        assert np.max(np.abs(back.amplitudes - joint.amplitudes)) < 1e-12

    def test_zero_gain_rejected(self, vn_default):
        channel, _ = vn_default
        with pytest.raises(ValueError, match="nonzero"):
            VonNeumannChannel(0.0, channel.probe)

    def test_tiny_gain_is_continuous(self, std_grid, vn_default):
        # first-order response: ||U_g Psi - Psi|| = g * sqrt(<x^2><p_probe^2>) = g here
        channel, psi = vn_default
        joint = embed_joint(psi, channel.probe)
        for g in (1e-9, 1e-10):
            nudged = apply_von_neumann(joint, g, "forward")
            delta = np.sqrt(
                np.sum(np.abs(nudged.amplitudes - joint.amplitudes) ** 2) * joint.measure
            )
            assert delta == pytest.approx(g, rel=1e-3)

    def test_confinement_error_raised(self, std_grid):
        psi = make_state(std_grid, GaussianState(0, 0, 1))
        small = make_grid(256, -2, 2)
        channel = VonNeumannChannel(1.0, ProbeSpec(small, 0.25))
        with pytest.raises(InvariantViolation, match="confinement"):
            apply_von_neumann(embed_joint(psi, channel.probe), 1.0, "forward")

    def test_unitary_on_corpus(self, std_grid, corpus):
        for _, psi in corpus[:6]:
            channel = make_vn_channel(std_grid, psi, 1.0, 0.5)
            joint = apply_von_neumann(embed_joint(psi, channel.probe), 1.0, "forward")
            assert abs(joint.norm() - 1.0) < 1e-12


class TestSlit:
    def test_wide_slit_passes_bump_untouched(self, std_grid):
        psi = make_state(std_grid, BumpState(0, 1))
        out = apply_slit(psi, 0.0, 4.0)
        assert out.pass_probability == pytest.approx(1.0, abs=1e-12)
        assert np.max(np.abs(out.pass_state.amplitudes - psi.amplitudes)) < 1e-12
        assert out.fail_state is None  # zero-probability branch flagged

    def test_gaussian_pass_probability_matches_erf(self, std_grid):
        psi = make_state(std_grid, GaussianState(0, 0, 2))
        out = apply_slit(psi, 0.0, 1.0)
        oracle = math.erf(0.5 / (2.0 * math.sqrt(2.0)))
        assert out.pass_probability == pytest.approx(oracle, rel=1e-3)

    def test_full_domain_slit(self, std_grid):
        psi = make_state(std_grid, GaussianState(0, 0, 1))
        out = apply_slit(psi, 0.0, 32.0)
        assert out.pass_probability == pytest.approx(1.0, abs=1e-12)
        assert out.fail_probability == 0.0

    def test_probabilities_sum_to_one(self, corpus):
        for _, psi in corpus:
            out = apply_slit(psi, 0.5, 2.0)
            assert out.pass_probability + out.fail_probability == pytest.approx(1.0, abs=1e-12)

    def test_slit_outside_domain(self, std_grid):
        psi = make_state(std_grid, GaussianState(0, 0, 1))
        with pytest.raises(InvariantViolation, match="domain"):
            apply_slit(psi, 15.0, 4.0)

    def test_narrow_slit_collapses_passing_state(self, std_grid):
        # the passing branch is confined to the slit: spread ~ width/sqrt(12)
        # (nearly flat across a narrow slit), far below the input spread
        from edlab import moments

        width = 1.0
        psi = make_state(std_grid, GaussianState(0, 0, 2))
        out = apply_slit(psi, 0.0, width)
        m = moments(out.pass_state)
        assert m.delta_x < width
        assert m.delta_x == pytest.approx(width / math.sqrt(12.0), rel=0.2)
        assert m.delta_x * m.delta_p >= 0.5 * (1 - 1e-9)


class TestKraus:
    def completeness_defect(self, channel, grid, psi_amp):
        total = 0.0
        for k in kraus_of(channel, grid):
            total += np.sum(np.abs(k(psi_amp)) ** 2) * grid.dx
        return abs(total - 1.0)

    def test_slit_completeness(self, std_grid):
        channel = SlitChannel(0.0, 3.0)
        for seed in range(50):
            amp = random_amplitudes(std_grid, seed)
            assert self.completeness_defect(channel, std_grid, amp) < 1e-10

    def test_flip_kraus_norm_preserving(self, std_grid):
        (k,) = kraus_of(FlipChannel(), std_grid)
        for seed in range(50):
            amp = random_amplitudes(std_grid, seed)
            assert np.sum(np.abs(k(amp)) ** 2) == pytest.approx(np.sum(np.abs(amp) ** 2))

    def test_von_neumann_completeness(self, std_grid, vn_default):
        channel, _ = vn_default
        for seed in range(50):
            amp = random_amplitudes(std_grid, seed)
            assert self.completeness_defect(channel, std_grid, amp) < 1e-8


class TestDensityOperator:
    def test_product_state_is_pure(self, vn_default):
        channel, psi = vn_default
        rho = reduce_system(embed_joint(psi, channel.probe))
        assert rho.purity() == pytest.approx(1.0, abs=1e-10)
        assert abs(np.real(np.trace(rho.matrix)) * rho.grid.dx - 1.0) < 1e-10

    def test_coupling_entangles(self, std_grid):
        psi = make_state(std_grid, GaussianState(0, 0, 1))
        channel = make_vn_channel(std_grid, psi, 1.0, 0.25)
        joint = apply_von_neumann(embed_joint(psi, channel.probe), 1.0, "forward")
        assert reduce_system(joint).purity() < 0.9

    def test_momentum_distribution_of_pure_gaussian(self, std_grid):
        psi = make_state(std_grid, GaussianState(0, 0, 1))
        d = momentum_distribution_of(pure_density(psi))
        assert np.all(d.weights >= 0)
        std = d.std()
        assert std == pytest.approx(0.5, rel=1e-9)

    def test_flip_density_reflects_momentum(self, std_grid):
        psi = make_state(std_grid, GaussianState(0, 1.0, 1))
        before = distribution(psi, "momentum")
        after = momentum_distribution_of(density_from_kraus(FlipChannel(), psi))
        # p -> -p on the integer-offset momentum grid is reverse-and-roll
        reflected = np.roll(before.weights[::-1], 1)
        assert np.max(np.abs(after.weights - reflected)) < 1e-10

    def test_flip_density_even_state_unchanged(self, std_grid):
        from edlab import SymmetricPairState

        psi = make_state(std_grid, SymmetricPairState(3.0, 1.0))
        before = distribution(psi, "momentum")
        after = momentum_distribution_of(density_from_kraus(FlipChannel(), psi))
        assert np.max(np.abs(after.weights - before.weights)) < 1e-10

    def test_spectrum_csv(self, std_grid, tmp_path):
        from edlab.channels import density_spectrum_to_csv

        psi = make_state(std_grid, GaussianState(0, 0, 1))
        channel = make_vn_channel(std_grid, psi, 1.0, 0.25)
        rho = reduce_system(apply_von_neumann(embed_joint(psi, channel.probe), 1.0, "forward"))
        path = tmp_path / "spectrum.csv"
        density_spectrum_to_csv(rho, str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == "index,eigenvalue"
        assert len(lines) == std_grid.n_points + 1
        top = float(lines[1].split(",")[1])
        assert 0 < top < 1  # entangled: no unit eigenvalue

    def test_dilation_consistency_small_grid(self):
        grid = make_grid(64, -8, 8)
        for spec in (BumpState(0.0, 2.0), RandomState(5, 4)):
            psi = make_state(grid, spec)
            probe_grid = probe_grid_for(grid, psi, 1.0, 0.5, 64)
            channel = VonNeumannChannel(1.0, ProbeSpec(probe_grid, 0.5))
            via_joint = reduce_system(
                apply_von_neumann(embed_joint(psi, channel.probe), 1.0, "forward")
            )
            via_kraus = density_from_kraus(channel, psi)
            assert trace_distance(via_joint, via_kraus) < 1e-7
