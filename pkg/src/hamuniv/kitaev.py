"""Circuit-to-Hamiltonian compilation and spectral diagnostics.

Builds the modified clock Hamiltonian H_MK = H_in + H_prop + kappa H_out +
H_clock for a verifier circuit, in either of two clock representations:

  * CLOCK_SUBSPACE: one clock site of dimension T+1 (default; H_clock = 0);
  * UNARY_FULL_SPACE: T clock qubits with time t encoded as |1^t 0^(T-t)>,
    plus the penalty H_clock that pushes illegal clock states to energy >= 1.

The propagation term uses the standard endpoint forms (at t = 1 condition
only on clock qubit 2 being 0, at t = T only on qubit T-1 being 1); history
states annihilate H_0 = H_in + H_prop + H_clock by construction, which the
tests assert rather than trusting index bookkeeping.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .circuits import (
    AcceptanceOperator,
    VerifierCircuit,
    acceptance_gap,
    acceptance_operator,
    accepting_eigenvectors,
    apply_gate_to_vector,
    initial_state,
)
from .config import DEFAULT, Config
from .operators import (
    ClusterSplitError,
    DenseOperator,
    Register,
    Subspace,
    SystemLayout,
    cluster_bounds,
    eigh,
    hermitize,
    projector_distance_from_bases,
    tensor_embed,
)

# above this dimension, low-spectrum analyses switch to the subset eigensolver
_PARTIAL_EIGH_DIM = 1200


class ClockRep(enum.Enum):
    CLOCK_SUBSPACE = "clock-subspace"
    UNARY_FULL_SPACE = "unary-full-space"


def kappa_limit(t_steps: int) -> float:
    """Upper limit 1/(2 T^3) for the output-penalty weight."""
    return 1.0 / (2.0 * t_steps**3)


def default_kappa(gap: float, t_steps: int) -> float:
    """kappa = g / (4 T^3 (T+1)): factor-2 margin inside the lemma hypothesis."""
    return gap / (4.0 * t_steps**3 * (t_steps + 1))


def _kitaev_layout(circuit: VerifierCircuit, rep: ClockRep) -> SystemLayout:
    base = circuit.layout
    t = circuit.n_steps
    if rep is ClockRep.CLOCK_SUBSPACE:
        clock_dims: tuple[int, ...] = (t + 1,)
    else:
        clock_dims = (2,) * t
    clock_sites = tuple(range(base.n_sites, base.n_sites + len(clock_dims)))
    registers = base.registers + (Register("clock", clock_sites, role="clock"),)
    return SystemLayout(base.site_dims + clock_dims, registers, dim_cap=base.dim_cap)


def _pinned_projector(circuit: VerifierCircuit, site: int, keep_state: int) -> np.ndarray:
    """1 - |keep><keep| on one circuit site, embedded in the circuit space."""
    d = circuit.layout.site_dims[site]
    local = np.eye(d, dtype=complex)
    local[keep_state, keep_state] = 0.0
    return tensor_embed(
        DenseOperator(SystemLayout((d,)), local, hermitian=True), (site,), circuit.layout
    ).entries


def _unary_time_index(t: int, n_clock: int) -> int:
    """Flat index of |1^t 0^(T-t)> in the clock-qubit factor (clock qubit k at digit k-1)."""
    return (1 << t) - 1


@dataclass(frozen=True)
class KitaevHamiltonian:
    """Components of the modified clock Hamiltonian for one verifier circuit."""

    h_in: DenseOperator
    h_prop: DenseOperator
    h_out: DenseOperator
    h_clock: DenseOperator
    kappa: float
    t_steps: int
    circuit: VerifierCircuit
    rep: ClockRep

    @property
    def layout(self) -> SystemLayout:
        return self.h_prop.layout

    def h0(self) -> DenseOperator:
        """Unpenalized part H_in + H_prop + H_clock (annihilates history states)."""
        m = self.h_in.entries + self.h_prop.entries + self.h_clock.entries
        return DenseOperator(self.layout, m, hermitian=True, validate=False)

    def h_mk(self) -> DenseOperator:
        m = self.h0().entries + self.kappa * self.h_out.entries
        return DenseOperator(self.layout, m, hermitian=True, validate=False)


def build_kitaev(
    circuit: VerifierCircuit,
    kappa: float,
    rep: ClockRep = ClockRep.CLOCK_SUBSPACE,
    config: Config | None = None,
) -> KitaevHamiltonian:
    t_steps = circuit.n_steps
    if not 0 < kappa < kappa_limit(t_steps):
        raise ValueError(f"kappa {kappa} outside (0, 1/(2 T^3)) = (0, {kappa_limit(t_steps)})")
    layout = _kitaev_layout(circuit, rep)
    c_dim = circuit.layout.total_dim

    pin = np.zeros((c_dim, c_dim), dtype=complex)
    for site in circuit.ancilla_sites:  # flag qubit and ancillas, all pinned to |0> at t = 0
        pin += _pinned_projector(circuit, site, keep_state=0)
    reject = _pinned_projector(circuit, circuit.output_site, keep_state=1)

    embedded = [
        tensor_embed(g.unitary, g.targets, circuit.layout).entries for g in circuit.gates
    ]

    if rep is ClockRep.CLOCK_SUBSPACE:
        total = layout.total_dim
        eye_c = np.eye(c_dim, dtype=complex)

        def block(h: np.ndarray, a: int, b: int) -> np.ndarray:
            # clock is the slowest site: full index = circuit + c_dim * time
            return h[a * c_dim : (a + 1) * c_dim, b * c_dim : (b + 1) * c_dim]

        h_in = np.zeros((total, total), dtype=complex)
        block(h_in, 0, 0)[:] = pin
        h_out = np.zeros((total, total), dtype=complex)
        block(h_out, t_steps, t_steps)[:] = reject
        h_prop = np.zeros((total, total), dtype=complex)
        for t in range(1, t_steps + 1):
            u = embedded[t - 1]
            block(h_prop, t, t)[:] += 0.5 * eye_c
            block(h_prop, t - 1, t - 1)[:] += 0.5 * eye_c
            block(h_prop, t, t - 1)[:] -= 0.5 * u
            block(h_prop, t - 1, t)[:] -= 0.5 * u.conj().T
        h_clock = np.zeros((total, total), dtype=complex)
    else:
        total = layout.total_dim
        first_clock = circuit.layout.n_sites
        eye2 = np.eye(2, dtype=complex)
        proj0 = np.diag([1.0, 0.0]).astype(complex)
        proj1 = np.diag([0.0, 1.0]).astype(complex)
        flip01 = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)  # |1><0|

        def embed_clock(ops: dict[int, np.ndarray]) -> np.ndarray:
            # ops maps clock-qubit number (1-based) to a 2x2 matrix
            sites = tuple(first_clock + k - 1 for k in sorted(ops))
            local = None
            for k in sorted(ops):  # ascending sites: later factors are slower
                local = ops[k] if local is None else np.kron(ops[k], local)
            dims = tuple(2 for _ in sites)
            return tensor_embed(
                DenseOperator(SystemLayout(dims), local), sites, layout
            ).entries

        def embed_circ(m: np.ndarray) -> np.ndarray:
            return np.kron(np.eye(total // c_dim, dtype=complex), m)

        h_in = embed_circ(pin) @ embed_clock({1: proj0})
        h_out = embed_circ(reject) @ embed_clock({t_steps: proj1})
        h_clock = np.zeros((total, total), dtype=complex)
        for t in range(1, t_steps):
            h_clock += embed_clock({t: proj0, t + 1: proj1})
        h_prop = np.zeros((total, total), dtype=complex)
        for t in range(1, t_steps + 1):
            u_full = embed_circ(embedded[t - 1])
            before: dict[int, np.ndarray] = {t: proj0}
            after: dict[int, np.ndarray] = {t: proj1}
            move: dict[int, np.ndarray] = {t: flip01}
            if t > 1:
                for d in (before, after, move):
                    d[t - 1] = proj1
            if t < t_steps:
                for d in (before, after, move):
                    d[t + 1] = proj0
            fwd = u_full @ embed_clock(move)
            h_prop += 0.5 * (
                embed_clock(before) + embed_clock(after) - fwd - fwd.conj().T
            )

    # every component is an elementwise-Hermitian combination of Hermitian
    # blocks and adjoint pairs, so no symmetrization pass is needed
    return KitaevHamiltonian(
        h_in=DenseOperator(layout, h_in, hermitian=True, validate=False),
        h_prop=DenseOperator(layout, h_prop, hermitian=True, validate=False),
        h_out=DenseOperator(layout, h_out, hermitian=True, validate=False),
        h_clock=DenseOperator(layout, h_clock, hermitian=True, validate=False),
        kappa=kappa,
        t_steps=t_steps,
        circuit=circuit,
        rep=rep,
    )


@dataclass(frozen=True)
class HistoryState:
    """Uniform superposition over partially applied circuit states with the clock."""

    vector: np.ndarray
    witness: np.ndarray
    rep: ClockRep
    idle_split: int | None = None

    def __post_init__(self):
        norm = float(np.linalg.norm(self.vector))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"history state norm {norm} deviates from 1 beyond 1e-12")


def _circuit_snapshots(circuit: VerifierCircuit, witness: np.ndarray) -> list[np.ndarray]:
    states = [initial_state(circuit, witness)]
    for gate in circuit.gates:
        states.append(apply_gate_to_vector(states[-1], gate, circuit.layout))
    return states


def _clock_block_matrix(
    circuit: VerifierCircuit, snapshots: list[np.ndarray], rep: ClockRep
) -> np.ndarray:
    """Rows indexed by the clock factor, columns by the circuit space."""
    t_steps = circuit.n_steps
    c_dim = circuit.layout.total_dim
    if rep is ClockRep.CLOCK_SUBSPACE:
        return np.asarray(snapshots)
    blocks = np.zeros((2**t_steps, c_dim), dtype=complex)
    for t, snap in enumerate(snapshots):
        blocks[_unary_time_index(t, t_steps)] = snap
    return blocks


def history_state(
    circuit: VerifierCircuit,
    witness: np.ndarray,
    rep: ClockRep = ClockRep.CLOCK_SUBSPACE,
    idle_split: int | None = None,
) -> HistoryState:
    witness = np.asarray(witness, dtype=complex).reshape(-1)
    if abs(np.linalg.norm(witness) - 1.0) > 1e-12:
        raise ValueError("witness state must be normalized")
    snapshots = _circuit_snapshots(circuit, witness)
    blocks = _clock_block_matrix(circuit, snapshots, rep)
    vec = blocks.reshape(-1) / np.sqrt(circuit.n_steps + 1)
    return HistoryState(vector=vec, witness=witness, rep=rep, idle_split=idle_split)


def idling_state(
    circuit: VerifierCircuit,
    witness: np.ndarray,
    idle_steps: int,
    rep: ClockRep = ClockRep.CLOCK_SUBSPACE,
) -> np.ndarray:
    """Normalized component of the history state over clock times 0..L.

    Requires the first L gates to act as the identity, so every retained
    snapshot equals the input configuration.
    """
    t_steps = circuit.n_steps
    if not 0 <= idle_steps <= t_steps:
        raise ValueError(f"idle window {idle_steps} outside [0, {t_steps}]")
    for g in circuit.gates[:idle_steps]:
        if not g.is_identity():
            raise ValueError(f"gate {g.label!r} inside the idle window is not the identity")
    witness = np.asarray(witness, dtype=complex).reshape(-1)
    snap0 = initial_state(circuit, witness)
    c_dim = circuit.layout.total_dim
    n_clock = t_steps + 1 if rep is ClockRep.CLOCK_SUBSPACE else 2**t_steps
    blocks = np.zeros((n_clock, c_dim), dtype=complex)
    for t in range(idle_steps + 1):
        row = t if rep is ClockRep.CLOCK_SUBSPACE else _unary_time_index(t, t_steps)
        blocks[row] = snap0
    return blocks.reshape(-1) / np.sqrt(idle_steps + 1)


def _low_spectrum(entries: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Lowest k eigenpairs (ascending); switches solver by dimension."""
    d = entries.shape[0]
    k = min(k, d)
    if d <= _PARTIAL_EIGH_DIM or k == d:
        vals, vecs = np.linalg.eigh(entries)
        return vals[:k], vecs[:, :k]
    vals, vecs = scipy.linalg.eigh(entries, subset_by_index=(0, k - 1), driver="evr")
    return vals, vecs


def ground_space(
    h: DenseOperator, threshold: float, config: Config | None = None
) -> Subspace:
    """Span of eigenvectors with eigenvalue <= threshold (cluster-guarded cut)."""
    cfg = config or DEFAULT
    es = eigh(h, cfg)
    vals = es.values
    k = int(np.searchsorted(vals, threshold, side="right"))
    tol = cfg.cluster_rtol * max(1.0, float(np.abs(vals).max()))
    if 0 < k < len(vals) and vals[k] - vals[k - 1] < tol:
        raise ClusterSplitError(
            f"threshold {threshold} splits a degeneracy cluster "
            f"({vals[k-1]} vs {vals[k]} within {tol})"
        )
    return Subspace.from_basis(h.layout, es.vectors[:, :k])


def spectral_gap_above(
    h: DenseOperator, threshold: float, config: Config | None = None
) -> float:
    """lambda_(k+1) - lambda_k where k = dim ground_space(h, threshold)."""
    cfg = config or DEFAULT
    es = eigh(h, cfg)
    vals = es.values
    k = int(np.searchsorted(vals, threshold, side="right"))
    tol = cfg.cluster_rtol * max(1.0, float(np.abs(vals).max()))
    if k == len(vals):
        raise ValueError("threshold above the full spectrum: no gap is defined")
    if k == 0:
        raise ValueError("no eigenvalue at or below the threshold")
    if vals[k] - vals[k - 1] < tol:
        raise ClusterSplitError(f"threshold {threshold} splits a degeneracy cluster")
    return float(vals[k] - vals[k - 1])


def _accepting_history_basis(
    kh_circuit: VerifierCircuit, acc: AcceptanceOperator, rep: ClockRep, tol: float = 1e-9
) -> np.ndarray:
    phis = accepting_eigenvectors(acc, kh_circuit.completeness, tol)
    cols = [
        history_state(kh_circuit, phis[:, i], rep).vector for i in range(phis.shape[1])
    ]
    if not cols:
        dim = kh_circuit.layout.total_dim * (
            kh_circuit.n_steps + 1
            if rep is ClockRep.CLOCK_SUBSPACE
            else 2**kh_circuit.n_steps
        )
        return np.zeros((dim, 0), dtype=complex)
    return np.stack(cols, axis=1)


@dataclass(frozen=True)
class HmkRow:
    q_eigenvalue: float
    predicted: float
    matched: float
    deviation: float
    within_bound: bool


@dataclass(frozen=True)
class HmkReport:
    """Per-eigenvalue comparison of H_MK's low band against kappa (1 - lambda_i)/(T+1)."""

    rows: tuple[HmkRow, ...]
    kappa: float
    t_steps: int
    acceptance_gap: float
    deviation_bound: float
    projector_distance: float
    projector_bound: float
    gap_above_low_space: float
    low_space_dim: int
    deviations_ok: bool
    projector_ok: bool

    @property
    def ok(self) -> bool:
        return self.deviations_ok and self.projector_ok


def check_hmk_lemma(
    kh: KitaevHamiltonian,
    config: Config | None = None,
    _low: tuple[np.ndarray, np.ndarray] | None = None,
) -> HmkReport:
    """Compare H_MK's low spectrum and low subspace with the first-order predictions.

    Requires the acceptance gap hypothesis g > 2 T^3 (T+1) kappa; reports, for
    every acceptance eigenvalue, the matched H_MK eigenvalue, its deviation
    from kappa (1 - lambda)/(T+1) against C_dev T^3 kappa^2, and the distance
    between the measured low subspace and the accepting history-state span
    against C_proj T^3 kappa.
    """
    cfg = config or DEFAULT
    circuit = kh.circuit
    t = kh.t_steps
    kappa = kh.kappa
    acc = acceptance_operator(circuit, cfg)
    gap_info = acceptance_gap(acc, circuit.completeness)
    # no eigenvalue below completeness means the hypothesis holds vacuously
    g = gap_info.gap if gap_info.gapped else float("inf")
    hypothesis = 2.0 * t**3 * (t + 1) * kappa
    if g <= hypothesis:
        raise ValueError(
            f"acceptance gap g = {g} does not exceed 2 T^3 (T+1) kappa = {hypothesis}"
        )

    w = circuit.witness_dim
    if _low is not None:
        vals, vecs = _low
    else:
        vals, vecs = _low_spectrum(kh.h_mk().entries, w + 8)

    q_desc = np.sort(acc.eigen.values)[::-1]
    predicted = kappa * (1.0 - q_desc) / (t + 1)
    matched = vals[:w]
    dev_bound = cfg.c_dev * t**3 * kappa**2
    rows = tuple(
        HmkRow(
            q_eigenvalue=float(q_desc[i]),
            predicted=float(predicted[i]),
            matched=float(matched[i]),
            deviation=float(abs(matched[i] - predicted[i])),
            within_bound=bool(abs(matched[i] - predicted[i]) <= dev_bound),
        )
        for i in range(w)
    )

    threshold = kappa * (1.0 - circuit.completeness) / (t + 1) + t**3 * kappa**2
    k_low = int(np.searchsorted(vals, threshold, side="right"))
    scale = max(1.0, float(np.abs(vals).max()))
    if 0 < k_low < len(vals) and vals[k_low] - vals[k_low - 1] < cfg.cluster_rtol * scale:
        raise ClusterSplitError("low-space threshold lands inside a degeneracy cluster")
    s0_basis = vecs[:, :k_low]
    c0_basis = _accepting_history_basis(circuit, acc, kh.rep)
    proj_distance = projector_distance_from_bases(s0_basis, c0_basis)
    proj_bound = cfg.c_proj * t**3 * kappa
    gap_above = float(vals[k_low] - vals[k_low - 1]) if k_low > 0 else float(vals[0])

    return HmkReport(
        rows=rows,
        kappa=kappa,
        t_steps=t,
        acceptance_gap=float(g),
        deviation_bound=float(dev_bound),
        projector_distance=float(proj_distance),
        projector_bound=float(proj_bound),
        gap_above_low_space=gap_above,
        low_space_dim=k_low,
        deviations_ok=all(r.within_bound for r in rows),
        projector_ok=bool(proj_distance <= proj_bound),
    )


@dataclass(frozen=True)
class IdlingReport:
    """Distance between accepting history states and their idling encodings."""

    idle_steps: int
    t_steps: int
    accepting_dim: int
    measured_distance: float
    measured_squared: float
    bound: float
    ok: bool


def check_idling_faithfulness(
    circuit: VerifierCircuit,
    idle_steps: int,
    kappa: float,
    c: float | None = None,
    rep: ClockRep = ClockRep.CLOCK_SUBSPACE,
    config: Config | None = None,
) -> IdlingReport:
    """Check |P_C0 - P_E(L)|^2 <= 2 (1 - sqrt(L / T')) on an idled circuit.

    `circuit` is the already-idled circuit of length T'; its first
    `idle_steps` gates must be identities. The idling encoding maps each
    accepting eigenvector phi to |phi, 0> (x) uniform clock over times 0..L.
    """
    cfg = config or DEFAULT
    t_prime = circuit.n_steps
    if not 0 <= idle_steps <= t_prime:
        raise ValueError(f"idle window {idle_steps} outside [0, {t_prime}]")
    for g in circuit.gates[:idle_steps]:
        if not g.is_identity():
            raise ValueError(f"gate {g.label!r} inside the idle window is not the identity")
    completeness = circuit.completeness if c is None else c
    acc = acceptance_operator(circuit, cfg)
    gap_info = acceptance_gap(acc, completeness)
    if gap_info.gapped:
        hypothesis = 2.0 * t_prime**3 * (t_prime + 1) * kappa
        if gap_info.gap <= hypothesis:
            raise ValueError(
                f"acceptance gap {gap_info.gap} does not exceed "
                f"2 T'^3 (T'+1) kappa = {hypothesis}"
            )
    phis = accepting_eigenvectors(acc, completeness)
    n_acc = phis.shape[1]
    bound = 2.0 * (1.0 - np.sqrt(idle_steps / t_prime)) if t_prime else 0.0
    if n_acc == 0:
        return IdlingReport(idle_steps, t_prime, 0, 0.0, 0.0, float(bound), True)
    c0 = np.stack(
        [history_state(circuit, phis[:, i], rep).vector for i in range(n_acc)], axis=1
    )
    enc = np.stack(
        [idling_state(circuit, phis[:, i], idle_steps, rep) for i in range(n_acc)], axis=1
    )
    distance = projector_distance_from_bases(c0, enc)
    squared = distance**2
    return IdlingReport(
        idle_steps=idle_steps,
        t_steps=t_prime,
        accepting_dim=n_acc,
        measured_distance=float(distance),
        measured_squared=float(squared),
        bound=float(bound),
        ok=bool(squared <= bound + 1e-9),
    )


@dataclass(frozen=True)
class GeometricalReport:
    bound: float
    actual: float
    a1: float
    a2: float
    gap: float
    angle: float

    @property
    def ok(self) -> bool:
        return self.actual >= self.bound - 1e-9


def geometrical_bound(
    h1: DenseOperator, h2: DenseOperator, config: Config | None = None
) -> GeometricalReport:
    """Ground energy of h1 + h2 against a1 + a2 + 2 Lambda sin^2(theta/2).

    a_i are the ground energies, Lambda the smaller of the two gaps above the
    (possibly degenerate) ground clusters, theta the minimal principal angle
    between the ground spaces.
    """
    cfg = config or DEFAULT
    reports = []
    for h in (h1, h2):
        es = eigh(h, cfg)
        vals = es.values
        tol = cfg.cluster_rtol * max(1.0, float(np.abs(vals).max()))
        start, stop = cluster_bounds(vals, tol)[0]
        if stop == len(vals):
            raise ValueError("ground cluster spans the full spectrum: zero gap")
        reports.append((float(vals[0]), float(vals[stop] - vals[0]), es.vectors[:, :stop]))
    (a1, gap1, b1), (a2, gap2, b2) = reports
    lam = min(gap1, gap2)
    overlaps = np.linalg.svd(b1.conj().T @ b2, compute_uv=False)
    cos_theta = float(np.clip(overlaps.max(initial=0.0), 0.0, 1.0))
    theta = float(np.arccos(cos_theta))
    bound = a1 + a2 + 2.0 * lam * np.sin(theta / 2.0) ** 2
    total = DenseOperator(
        h1.layout, hermitize(h1.entries + h2.entries), hermitian=True
    )
    actual = float(np.linalg.eigvalsh(total.entries)[0])
    return GeometricalReport(
        bound=float(bound), actual=actual, a1=a1, a2=a2, gap=float(lam), angle=theta
    )
