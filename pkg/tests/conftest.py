import numpy as np
import pytest

from hamuniv.circuits import Gate, VerifierCircuit, identity_gate
from hamuniv.operators import Register, SystemLayout


def random_hermitian(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (a + a.conj().T) / 2


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(a)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_state(rng: np.random.Generator, d: int) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def flag_witness_layout(n_witness: int = 1) -> SystemLayout:
    """Output qubit at site 0, witness qubits following."""
    return SystemLayout(
        (2,) * (1 + n_witness),
        registers=(
            Register("flag", (0,), role="flag"),
            Register("witness", tuple(range(1, 1 + n_witness)), role="witness"),
        ),
    )


def cnot_to_flag_gate(layout: SystemLayout) -> Gate:
    """CNOT with the witness qubit (site 1) controlling the output qubit (site 0)."""
    m = np.zeros((4, 4), dtype=complex)
    for flag in range(2):
        for wit in range(2):
            m[(flag ^ wit) + 2 * wit, flag + 2 * wit] = 1.0
    return Gate.from_matrix(m, (0, 1), layout, label="cnot")


def cnot_verifier(trailing_idles: int = 0) -> VerifierCircuit:
    """Verifier accepting exactly the witness |1>: Q = |1><1|, c = 1."""
    layout = flag_witness_layout(1)
    gates = [cnot_to_flag_gate(layout)]
    gates += [identity_gate(layout, 0) for _ in range(trailing_idles)]
    return VerifierCircuit(
        layout=layout,
        gates=tuple(gates),
        witness_register=("witness",),
        output_site=0,
        completeness=1.0,
        soundness=0.5,
    )


def identity_verifier(t_steps: int, n_witness: int = 1, completeness: float = 1.0) -> VerifierCircuit:
    layout = flag_witness_layout(n_witness)
    return VerifierCircuit(
        layout=layout,
        gates=tuple(identity_gate(layout, 0) for _ in range(t_steps)),
        witness_register=("witness",),
        output_site=0,
        completeness=completeness,
        soundness=completeness / 2,
    )


def x_flag_verifier() -> VerifierCircuit:
    """Single X gate on the output qubit: every witness accepts."""
    layout = flag_witness_layout(1)
    x = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    gate = Gate.from_matrix(x, (0,), layout, label="x-flag")
    return VerifierCircuit(
        layout=layout,
        gates=(gate,),
        witness_register=("witness",),
        output_site=0,
        completeness=1.0,
        soundness=0.5,
    )


def random_verifier(rng: np.random.Generator, t_steps: int, n_witness: int = 1) -> VerifierCircuit:
    """Random gates over the flag + witness qubits."""
    layout = flag_witness_layout(n_witness)
    n_sites = layout.n_sites
    gates = []
    for k in range(t_steps):
        size = int(rng.integers(1, min(2, n_sites) + 1))
        targets = tuple(int(t) for t in rng.choice(n_sites, size=size, replace=False))
        dim = int(np.prod([layout.site_dims[t] for t in targets]))
        gates.append(Gate.from_matrix(random_unitary(rng, dim), targets, layout, label=f"g{k}"))
    return VerifierCircuit(
        layout=layout,
        gates=tuple(gates),
        witness_register=("witness",),
        output_site=0,
        completeness=0.9,
        soundness=0.2,
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)
