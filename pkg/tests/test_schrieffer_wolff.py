import numpy as np
import pytest
import scipy.linalg

from hamuniv.circuits import acceptance_operator
from hamuniv.kitaev import build_kitaev, ground_space, history_state, spectral_gap_above
from hamuniv.operators import DenseOperator, Subspace, SystemLayout
from hamuniv.schrieffer_wolff import SWProblem, sw_bounds, sw_exact, sw_series

from conftest import cnot_verifier, random_hermitian

X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def two_level_problem(v: float, delta: float = 1.0) -> SWProblem:
    lay = SystemLayout((2,))
    h0 = DenseOperator(lay, np.diag([0.0, 1.0]).astype(complex), hermitian=True)
    h1 = DenseOperator(lay, v * X, hermitian=True)
    minus = Subspace.from_basis(lay, np.array([[1.0], [0.0]], dtype=complex))
    return SWProblem(h0=h0, h1=h1, delta=delta, minus=minus)


def random_problem(rng, dim: int, ratio: float = 0.1) -> SWProblem:
    k = int(rng.integers(1, dim))
    basis, _ = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    low = np.sort(rng.uniform(0.0, 0.5, size=k))
    high = np.sort(rng.uniform(1.0, 2.0, size=dim - k))
    h0_m = (basis * np.concatenate([low, high])) @ basis.conj().T
    lay = SystemLayout((dim,))
    h0 = DenseOperator(lay, (h0_m + h0_m.conj().T) / 2, hermitian=True)
    delta = float(rng.uniform(1.0, 5.0))
    h1_m = random_hermitian(rng, dim)
    h1_m *= ratio * delta * rng.uniform(0.2, 1.0) / np.linalg.norm(h1_m, 2)
    h1 = DenseOperator(lay, h1_m, hermitian=True)
    minus = Subspace.from_basis(lay, basis[:, :k])
    return SWProblem(h0=h0, h1=h1, delta=delta, minus=minus)


class TestSWProblemValidation:
    def test_off_block_h0_rejected(self):
        lay = SystemLayout((2,))
        h0 = DenseOperator(lay, X, hermitian=True)
        minus = Subspace.from_basis(lay, np.array([[1.0], [0.0]], dtype=complex))
        with pytest.raises(ValueError, match="off-block"):
            SWProblem(h0=h0, h1=DenseOperator(lay, np.zeros((2, 2)), hermitian=True), delta=1.0, minus=minus)

    def test_large_perturbation_rejected(self):
        with pytest.raises(ValueError, match="delta/2"):
            two_level_problem(v=0.6, delta=1.0)

    def test_lambda0_computed(self):
        prob = two_level_problem(0.1)
        assert prob.lambda0 == pytest.approx(0.0, abs=1e-12)


class TestSWExact:
    def test_zero_perturbation(self):
        prob = two_level_problem(0.0)
        exp = sw_exact(prob)
        assert np.abs(exp.s_exact).max() <= 1e-9
        expected = prob.delta * np.diag([0.0, 0.0])  # Delta H0 restricted to H_-
        assert np.abs(exp.h_eff_restricted() - expected[:1, :1]).max() <= 1e-9

    def test_two_level_closed_form(self):
        v, delta = 0.2, 1.0
        exp = sw_exact(two_level_problem(v, delta))
        closed = (delta - np.sqrt(delta**2 + 4 * v**2)) / 2
        assert exp.h_eff_restricted()[0, 0].real == pytest.approx(closed, abs=1e-12)

    def test_block_diagonal_perturbation_gives_zero_generator(self, rng):
        lay = SystemLayout((4,))
        h0 = DenseOperator(lay, np.diag([0.0, 0.2, 1.0, 1.5]).astype(complex), hermitian=True)
        minus = Subspace.from_basis(lay, np.eye(4, dtype=complex)[:, :2])
        block = np.zeros((4, 4), dtype=complex)
        block[:2, :2] = random_hermitian(rng, 2, scale=0.1)
        block[2:, 2:] = random_hermitian(rng, 2, scale=0.1)
        h1 = DenseOperator(lay, block, hermitian=True)
        prob = SWProblem(h0=h0, h1=h1, delta=2.0, minus=minus)
        exp = sw_exact(prob)
        assert np.abs(exp.s_exact).max() <= 1e-9
        expected = prob.delta * h0.entries[:2, :2] + block[:2, :2]
        assert np.abs(exp.h_eff_restricted() - expected).max() <= 1e-9

    def test_generator_properties(self, rng):
        prob = random_problem(rng, 8)
        exp = sw_exact(prob)
        s = exp.s_exact
        assert np.abs(s + s.conj().T).max() <= 1e-10  # anti-Hermitian
        assert np.linalg.norm(s, 2) < np.pi / 2
        p = prob.minus.projector.entries
        q = np.eye(8) - p
        assert np.linalg.norm(p @ s @ p, 2) <= 1e-10
        assert np.linalg.norm(q @ s @ q, 2) <= 1e-10
        w = scipy.linalg.expm(s)
        rotated = w @ prob.perturbed().entries @ w.conj().T
        assert np.linalg.norm(p @ rotated @ q, 2) <= 1e-9

    def test_effective_spectrum_matches_low_band(self, rng):
        for _ in range(5):
            prob = random_problem(rng, 10)
            exp = sw_exact(prob)
            low = np.linalg.eigvalsh(prob.perturbed().entries)[: prob.minus.dim]
            eff = np.linalg.eigvalsh(exp.h_eff_restricted())
            assert np.abs(low - eff).max() <= 1e-9


class TestSWSeries:
    def test_zero_ground_block(self):
        prob = two_level_problem(0.1)
        order0 = sw_series(prob, 0)[0]
        assert np.abs(order0.entries).max() <= 1e-12

    def test_diagonal_perturbation_passes_through(self, rng):
        lay = SystemLayout((3,))
        h0 = DenseOperator(lay, np.diag([0.0, 0.0, 1.0]).astype(complex), hermitian=True)
        minus = Subspace.from_basis(lay, np.eye(3, dtype=complex)[:, :2])
        h1 = DenseOperator(lay, np.diag([0.1, -0.2, 0.05]).astype(complex), hermitian=True)
        prob = SWProblem(h0=h0, h1=h1, delta=1.0, minus=minus)
        order1 = sw_series(prob, 1)[1]
        assert np.abs(order1.entries - np.diag([0.1, -0.2, 0.0])).max() <= 1e-12

    def test_order_beyond_one_rejected(self):
        with pytest.raises(ValueError, match="out of scope"):
            sw_series(two_level_problem(0.1), 2)

    def test_kitaev_first_order_matrix_elements(self):
        # elements of the first-order term between history states match
        # kappa/(T+1) (delta_ab - Q_ab) in the computational witness basis
        circuit = cnot_verifier()
        kappa = 0.05
        kh = build_kitaev(circuit, kappa)
        h0 = kh.h0()
        gap0 = spectral_gap_above(h0, 1e-8)
        lay = kh.layout
        kernel = ground_space(h0, 1e-8)
        h0_norm = DenseOperator(lay, h0.entries / gap0, hermitian=True)
        h1 = DenseOperator(lay, kappa * kh.h_out.entries, hermitian=True)
        prob = SWProblem(h0=h0_norm, h1=h1, delta=gap0, minus=kernel)
        order1 = sw_series(prob, 1)[1].entries
        t_steps = circuit.n_steps
        basis = np.eye(circuit.witness_dim, dtype=complex)
        etas = [history_state(circuit, basis[:, i]).vector for i in range(circuit.witness_dim)]
        q = acceptance_operator(circuit).q.entries
        for i in range(len(etas)):
            for j in range(len(etas)):
                measured = np.vdot(etas[i], order1 @ etas[j])
                expected = kappa / (t_steps + 1) * ((i == j) - q[i, j])
                assert abs(measured - expected) <= 1e-9


class TestSWBounds:
    def test_zero_perturbation_all_zero(self):
        bounds = sw_bounds(two_level_problem(0.0))
        assert bounds.s_norm_measured <= 1e-12
        assert bounds.truncation_measured <= 1e-12
        assert bounds.ok

    def test_two_level_sweep_within_bound(self):
        delta = 1.0
        for v in (0.1, 0.05, 0.025, 0.0125):
            bounds = sw_bounds(two_level_problem(v, delta))
            closed = abs((delta - np.sqrt(delta**2 + 4 * v**2)) / 2)
            assert bounds.truncation_measured == pytest.approx(closed, abs=1e-12)
            assert bounds.truncation_measured <= v**2 / delta + 2 * v**4 / delta**3
            assert bounds.ok

    def test_truncation_slope_is_order_plus_one(self):
        delta = 1.0
        vs = np.array([0.1 / 2**k for k in range(5)])
        errs = np.array([sw_bounds(two_level_problem(v, delta)).truncation_measured for v in vs])
        slope = np.polyfit(np.log(vs), np.log(errs), 1)[0]
        assert abs(slope - 2.0) <= 0.1

    def test_random_instances_within_bounds(self, rng):
        for _ in range(100):
            dim = int(rng.integers(2, 17))
            prob = random_problem(rng, dim)
            bounds = sw_bounds(prob)
            assert bounds.s_norm_measured <= bounds.s_norm_bound + 1e-12
            assert bounds.truncation_measured <= bounds.truncation_bound + 1e-12


class TestSinThetaOnKitaev:
    def test_low_space_close_to_history_span(self):
        circuit = cnot_verifier()
        for kappa in (0.05, 0.025, 0.0125):
            kh = build_kitaev(circuit, kappa)
            h_mk = kh.h_mk()
            vals, vecs = np.linalg.eigh(h_mk.entries)
            keep = vals <= kappa / 2
            basis = np.eye(circuit.witness_dim, dtype=complex)
            etas = np.stack(
                [history_state(circuit, basis[:, i]).vector for i in range(2)], axis=1
            )
            p_r = vecs[:, keep] @ vecs[:, keep].conj().T
            p_g = etas @ etas.conj().T
            assert int(keep.sum()) == 2
            assert np.linalg.norm(p_r - p_g, 2) <= circuit.n_steps**3 * kappa
