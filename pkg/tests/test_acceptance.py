"""Acceptance criteria, one test per criterion, each printing a PASS line.

Tolerances are fixed here and match the certified bounds exactly; nothing is
calibrated after the fact.
"""

import time

import numpy as np
import pytest
import scipy.linalg

from hamuniv.circuits import acceptance_operator, idle_prefix
from hamuniv.kitaev import (
    build_kitaev,
    check_hmk_lemma,
    check_idling_faithfulness,
    geometrical_bound,
    ground_space,
    history_state,
    spectral_gap_above,
)
from hamuniv.operators import DenseOperator, Subspace, SystemLayout, subspace_distance
from hamuniv.schrieffer_wolff import SWProblem, sw_bounds, sw_series
from hamuniv.simulation import (
    check_dynamics,
    check_partition_function,
    plain_encoding,
    verify_simulation,
)
from hamuniv.universality import TargetHamiltonian, end_to_end, qpe_verifier, witness_family

from conftest import (
    cnot_verifier,
    identity_verifier,
    random_hermitian,
    random_verifier,
    x_flag_verifier,
)

from test_schrieffer_wolff import random_problem, two_level_problem


def _passed(num: int, text: str) -> None:
    print(f"[PASS] criterion {num}: {text}")


def test_criterion_01_history_state_ground_space():
    rng = np.random.default_rng(1)
    fixtures = [
        identity_verifier(2),
        x_flag_verifier(),
        cnot_verifier(),
        random_verifier(rng, 4, n_witness=1),
        random_verifier(rng, 6, n_witness=2),
    ]
    for circuit in fixtures:
        kh = build_kitaev(circuit, kappa=min(0.01, 0.9 / (2 * circuit.n_steps**3)))
        h0 = kh.h0()
        basis = np.eye(circuit.witness_dim, dtype=complex)
        for i in range(circuit.witness_dim):
            eta = history_state(circuit, basis[:, i]).vector
            assert np.linalg.norm(h0.entries @ eta) <= 1e-9
        kernel = ground_space(h0, 1e-8)
        assert kernel.dim == circuit.witness_dim
    _passed(1, "H_0 annihilates history states; kernel dim = witness dim on 5 fixtures")


def test_criterion_02_spectral_gap_scaling():
    t_values = np.arange(3, 11)
    gaps = []
    for t_steps in t_values:
        kh = build_kitaev(identity_verifier(int(t_steps)), kappa=0.9 / (2 * t_steps**3))
        gaps.append(spectral_gap_above(kh.h0(), 1e-8))
    gaps = np.array(gaps)
    products = gaps * t_values.astype(float) ** 3
    assert products.min() > 0.5
    exponent = np.polyfit(np.log(t_values.astype(float)), np.log(gaps), 1)[0]
    assert exponent >= -3.3
    _passed(2, f"gap(H_0) T^3 >= {products.min():.2f}; fitted exponent {exponent:.2f} >= -3.3")


def _cnot_kappa_sweep():
    circuit = cnot_verifier()
    t = circuit.n_steps
    kappa_star = 1.0 / (4.0 * t**3 * (t + 1))  # g = 1 for the CNOT verifier
    reports = []
    for k in range(5):
        kappa = kappa_star / 2**k
        reports.append((kappa, check_hmk_lemma(build_kitaev(circuit, kappa))))
    return t, reports


def test_criterion_03_perturbative_spectrum():
    t, reports = _cnot_kappa_sweep()
    kappas, deviations = [], []
    for kappa, report in reports:
        for row in report.rows:
            assert row.deviation <= 10.0 * t**3 * kappa**2
        kappas.append(kappa)
        deviations.append(max(row.deviation for row in report.rows))
    slope = np.polyfit(np.log(kappas), np.log(deviations), 1)[0]
    assert abs(slope - 2.0) <= 0.2
    _passed(3, f"deviations within 10 T^3 kappa^2 over 4 octaves; slope {slope:.3f}")


def test_criterion_04_projector_bound():
    t, reports = _cnot_kappa_sweep()
    for kappa, report in reports:
        assert report.projector_distance <= 10.0 * t**3 * kappa
    _passed(4, "low-space vs accepting-history projector distance within 10 T^3 kappa")


def test_criterion_05_idling_faithfulness():
    base = cnot_verifier(trailing_idles=2)  # computation occupies 3 steps
    kappa = 1e-5
    measured = []
    for idle in (1, 3, 9):  # L/T' = 1/4, 1/2, 3/4
        circuit = idle_prefix(base, idle)
        report = check_idling_faithfulness(circuit, idle, kappa=kappa)
        assert report.measured_squared <= report.bound + 1e-9
        measured.append(report.measured_distance)
    all_idle = check_idling_faithfulness(identity_verifier(4), 4, kappa=kappa)  # L/T' = 1
    assert all_idle.measured_squared <= all_idle.bound + 1e-9
    measured.append(all_idle.measured_distance)
    assert all(a >= b - 1e-12 for a, b in zip(measured, measured[1:]))
    _passed(5, "idling distance squared within 2(1 - sqrt(L/T')); monotone in L")


def _random_gapped(rng, dim):
    mult = int(rng.integers(1, max(2, dim // 2)))
    basis, _ = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    ground = float(rng.uniform(-1.0, 1.0))
    gap = float(rng.uniform(0.2, 2.0))
    rest = ground + gap + np.sort(rng.uniform(0.0, 2.0, size=dim - mult))
    vals = np.concatenate([np.full(mult, ground), rest])
    m = (basis * vals) @ basis.conj().T
    return DenseOperator(SystemLayout((dim,)), (m + m.conj().T) / 2, hermitian=True)


def test_criterion_06_geometrical_lemma():
    rng = np.random.default_rng(6)
    for _ in range(50):
        dim = int(rng.integers(2, 17))
        report = geometrical_bound(_random_gapped(rng, dim), _random_gapped(rng, dim))
        assert report.actual >= report.bound - 1e-9
    # 2D rank-1 equality case
    h1 = DenseOperator(SystemLayout((2,)), np.diag([0.0, 1.0]).astype(complex), hermitian=True)
    minus = np.array([1.0, -1.0]) / np.sqrt(2)
    h2 = DenseOperator(SystemLayout((2,)), np.outer(minus, minus), hermitian=True)
    report = geometrical_bound(h1, h2)
    assert abs(report.actual - report.bound) <= 1e-10
    _passed(6, "50 random instances respect the bound; 2D rank-1 case achieves equality")


def test_criterion_07_schrieffer_wolff():
    # closed-form two-level instance and its scaling
    deltas = 1.0
    vs = np.array([0.1 / 2**k for k in range(5)])
    errors = []
    for v in vs:
        bounds = sw_bounds(two_level_problem(float(v), deltas))
        assert bounds.truncation_measured <= bounds.truncation_bound + 1e-12
        errors.append(bounds.truncation_measured)
    slope = np.polyfit(np.log(vs), np.log(errors), 1)[0]
    assert abs(slope - 2.0) <= 0.1

    rng = np.random.default_rng(7)
    for _ in range(100):
        prob = random_problem(rng, int(rng.integers(2, 17)))
        bounds = sw_bounds(prob)
        assert bounds.truncation_measured <= bounds.truncation_bound + 1e-12
        assert bounds.s_norm_measured <= bounds.s_norm_bound + 1e-12

    # Kitaev first-order matrix elements
    circuit = cnot_verifier()
    kappa = 0.05
    kh = build_kitaev(circuit, kappa)
    h0 = kh.h0()
    gap0 = spectral_gap_above(h0, 1e-8)
    kernel = ground_space(h0, 1e-8)
    prob = SWProblem(
        h0=DenseOperator(kh.layout, h0.entries / gap0, hermitian=True),
        h1=DenseOperator(kh.layout, kappa * kh.h_out.entries, hermitian=True),
        delta=gap0,
        minus=kernel,
    )
    order1 = sw_series(prob, 1)[1].entries
    q = acceptance_operator(circuit).q.entries
    basis = np.eye(circuit.witness_dim, dtype=complex)
    t = circuit.n_steps
    for i in range(circuit.witness_dim):
        eta_i = history_state(circuit, basis[:, i]).vector
        for j in range(circuit.witness_dim):
            eta_j = history_state(circuit, basis[:, j]).vector
            expected = kappa / (t + 1) * ((i == j) - q[i, j])
            assert abs(np.vdot(eta_i, order1 @ eta_j) - expected) <= 1e-9
    _passed(7, f"SW truncation within bound (slope {slope:.3f}); Kitaev first-order elements match")


def test_criterion_08_simulation_certificates():
    rng = np.random.default_rng(8)
    # exact block simulation
    h = random_hermitian(rng, 3)
    delta = float(np.linalg.norm(h, 2) + 1.0)
    hp = np.zeros((7, 7), dtype=complex)
    hp[:3, :3] = h
    hp[3:, 3:] = np.diag(2 * delta + np.arange(1.0, 5.0))
    exact = verify_simulation(h, hp, plain_encoding(np.eye(7, 3, dtype=complex), 3), delta)
    assert exact.eta_measured <= 1e-9
    assert exact.epsilon_measured <= 1e-9

    for _ in range(10):
        d_t = int(rng.integers(2, 5))
        pad = int(rng.integers(2, 5))
        h = random_hermitian(rng, d_t)
        delta = float(np.linalg.norm(h, 2) + 2.0)
        total = d_t + pad
        hp = np.zeros((total, total), dtype=complex)
        hp[:d_t, :d_t] = h
        hp[d_t:, d_t:] = np.diag(2 * delta + np.arange(1.0, pad + 1.0))
        u = scipy.linalg.expm(1j * random_hermitian(rng, total, scale=0.01))
        hp_rot = u @ hp @ u.conj().T
        enc = plain_encoding(np.eye(total, d_t, dtype=complex), d_t)
        report = verify_simulation(h, hp_rot, enc, delta)
        for row in report.eigen_table:
            assert row.difference <= report.epsilon_measured + 1e-9
        for beta in (0.0, 0.1, 1.0, 10.0):
            err, bound, ok = check_partition_function(
                h, hp_rot, enc, delta, beta, report=report
            )
            assert ok, f"beta={beta}: {err} > {bound}"
        rho = enc.image_projector() / d_t
        for t_val in (0.0, 0.5, 2.0):
            dist, bound, ok = check_dynamics(
                h, hp_rot, enc, rho, t_val, report.epsilon_measured, report.eta_measured
            )
            assert ok, f"t={t_val}: {dist} > {bound}"
    _passed(8, "exact blocks give eta = eps = 0; transfer, partition, dynamics bounds hold x10")


def test_criterion_09_yes_hamiltonian_verifier():
    target = TargetHamiltonian.from_matrix(np.diag([0.0, 0.5]).astype(complex), (2,))
    for a in (2.0, 8.0, 32.0):
        fam = witness_family(target, a=a, m=2, tau=np.pi)
        assert fam.exact_phases
        circuit = qpe_verifier(target, a, 2, tau=np.pi, fam=fam)
        acc = acceptance_operator(circuit)
        vals = np.sort(acc.eigen.values)[::-1]
        assert vals[2] == pytest.approx(0.5, abs=1e-9)  # next-largest eigenvalue
        top = acc.eigen.vectors[:, acc.eigen.values >= 1 - 1e-9]
        lay = circuit.witness_layout()
        dist = subspace_distance(
            Subspace.from_basis(lay, top), Subspace.from_basis(lay, fam.states)
        )
        assert dist <= 10.0 / a
    _passed(9, "top eigenspace within 10/a of the witness span; second eigenvalue 1/2")


def test_criterion_10_end_to_end_universality():
    start = time.time()
    target = TargetHamiltonian.from_matrix(np.diag([0.0, 0.5]).astype(complex), (2,))
    etas = []
    for a in (2.0, 8.0, 32.0):
        report = end_to_end(target, a=a, m=2, idle_steps=1, tau=np.pi)
        assert report.hmk.ok
        for lam_target, _lam_sim, diff in report.final_table:
            assert diff <= report.epsilon_prime + 1e-9
        table_targets = sorted({round(t, 6) for t, _, _ in report.final_table})
        assert table_targets == [0.0, 0.5]
        etas.append(report.eta_prime)
    assert etas[0] > etas[1] > etas[2]
    elapsed = time.time() - start
    assert elapsed <= 120.0
    _passed(
        10,
        f"composite certificates match {{0, 1/2}} within eps'; eta' decreasing "
        f"({etas[0]:.3f} > {etas[1]:.3f} > {etas[2]:.3f}); {elapsed:.0f}s <= 120s",
    )


def test_criterion_11_cli_determinism(tmp_path):
    from hamuniv.cli import main
    from hamuniv.serialize import canonical_json, circuit_to_dict, operator_to_dict

    lay2 = SystemLayout((2,))
    diag01 = operator_to_dict(
        DenseOperator(lay2, np.diag([0.0, 1.0]).astype(complex), hermitian=True)
    )
    cnot_doc = circuit_to_dict(cnot_verifier())
    h0 = operator_to_dict(
        DenseOperator(lay2, np.diag([0.0, 1.0]).astype(complex), hermitian=True)
    )
    h1 = operator_to_dict(
        DenseOperator(lay2, 0.2 * np.array([[0, 1], [1, 0]], dtype=complex), hermitian=True)
    )
    h_small = random_hermitian(np.random.default_rng(11), 2)
    delta = float(np.linalg.norm(h_small, 2) + 1.0)
    hp = np.zeros((4, 4), dtype=complex)
    hp[:2, :2] = h_small
    hp[2:, 2:] = np.diag([2 * delta + 1.0, 2 * delta + 2.0])
    v = np.eye(4, 2, dtype=complex)
    fixtures = {
        "spectrum": {"operator": diag01},
        "compile": {"circuit": cnot_doc},
        "history": {"circuit": cnot_doc},
        "hmk-check": {"circuit": cnot_doc, "kappa": 0.02},
        "sw": {"h0": h0, "h1": h1, "delta": 1.0, "minus_dim": 1},
        "verify-sim": {
            "h": operator_to_dict(DenseOperator(lay2, h_small, hermitian=True)),
            "h_prime": operator_to_dict(DenseOperator(SystemLayout((4,)), hp, hermitian=True)),
            "v": {"rows": 4, "cols": 2,
                  "entries": [[float(z.real), float(z.imag)] for z in v.reshape(-1)]},
            "delta": delta,
            "beta": [0.0, 1.0],
            "t": [0.5],
        },
        "universal-demo": {
            "h_target": operator_to_dict(
                DenseOperator(lay2, np.zeros((2, 2), dtype=complex), hermitian=True)
            ),
            "a": 2.0,
            "m": 1,
            "L": 1,
            "delta": 1e6,
        },
    }
    for command, obj in fixtures.items():
        inp = tmp_path / f"{command}.json"
        inp.write_text(canonical_json(obj) + "\n")
        outputs = []
        for run_idx in (1, 2):
            out = tmp_path / f"{command}-{run_idx}.out"
            code = main([command, "--input", str(inp), "--output", str(out), "--seed", "0"])
            assert code == 0, f"{command} exited {code}"
            blob = out.read_bytes()
            for suffix in ("eigen_table", "final_table"):
                side = tmp_path / f"{command}-{run_idx}.{suffix}.csv"
                if side.exists():
                    blob += side.read_bytes()
            outputs.append(blob)
        assert outputs[0] == outputs[1], f"{command} reports differ between identical runs"
    _passed(11, "byte-identical reports for every fixture under identical seeds")
