"""Numerical Schrieffer-Wolff transformation and its error bounds.

For H~ = Delta H0 + H1 with H0 block-diagonal against Pi_-/Pi_+, the
generator S is obtained exactly: e^S is the direct rotation carrying the
perturbed low spectral subspace R onto H_-, and S its principal matrix
logarithm (valid since |S| < pi/2 by construction for admissible problems).
Series coefficients are produced only through first order, which is all the
low-band analysis needs; higher coefficients are out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .config import DEFAULT, Config
from .operators import (
    ClusterSplitError,
    DenseOperator,
    Subspace,
    direct_rotation,
    hermitize,
    op_norm,
)

OFF_BLOCK_TOL = 1e-10


@dataclass(frozen=True)
class SWProblem:
    """H~ = delta * h0 + h1 with a designated low block H_- of h0.

    h0 must be block-diagonal against the H_-/H_+ split, with spectrum on
    H_- inside [0, lambda0], lambda0 < 1, and spectrum on H_+ at or above 1
    (the normalized-gap convention; callers rescale). |h1| < delta/2.
    """

    h0: DenseOperator
    h1: DenseOperator
    delta: float
    minus: Subspace
    lambda0: float = 0.0

    def __post_init__(self):
        if not (self.h0.hermitian and self.h1.hermitian):
            raise ValueError("h0 and h1 must carry the hermitian flag")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        p_minus = self.minus.projector.entries
        d = self.h0.dim
        p_plus = np.eye(d) - p_minus
        off = np.linalg.norm(p_minus @ self.h0.entries @ p_plus, 2)
        if off > OFF_BLOCK_TOL:
            raise ValueError(f"h0 off-block norm {off:.3e} exceeds {OFF_BLOCK_TOL}")
        b = self.minus.basis
        low_vals = np.linalg.eigvalsh(hermitize(b.conj().T @ self.h0.entries @ b))
        if low_vals.size and low_vals.min() < -1e-9:
            raise ValueError("h0 has negative eigenvalues on H_-")
        lam0 = float(low_vals.max(initial=0.0))
        if lam0 >= 1.0:
            raise ValueError(f"largest h0 eigenvalue on H_- is {lam0} >= 1")
        object.__setattr__(self, "lambda0", lam0)
        if self.minus.dim < d:
            comp = scipy.linalg.null_space(b.conj().T)
            high_vals = np.linalg.eigvalsh(hermitize(comp.conj().T @ self.h0.entries @ comp))
            if high_vals.min() < 1.0 - 1e-9:
                raise ValueError(
                    f"h0 spectrum on H_+ starts at {high_vals.min()}, below the normalized gap 1"
                )
        h1_norm = op_norm(self.h1)
        if h1_norm >= self.delta / 2:
            raise ValueError(f"|h1| = {h1_norm} is not below delta/2 = {self.delta / 2}")

    def perturbed(self) -> DenseOperator:
        m = self.delta * self.h0.entries + self.h1.entries
        return DenseOperator(self.h0.layout, hermitize(m), hermitian=True)


@dataclass(frozen=True)
class SWExpansion:
    """Exact generator and effective Hamiltonian, plus first-order data and bounds."""

    s_exact: np.ndarray  # anti-Hermitian generator, block-off-diagonal
    h_eff_exact: DenseOperator  # supported on H_-
    h_eff_orders: tuple[DenseOperator, DenseOperator]  # (Delta H0 Pi_-, Pi_- H1 Pi_-)
    bounds: dict[str, float]
    problem: SWProblem

    def h_eff_restricted(self) -> np.ndarray:
        """h_eff_exact in the H_- basis (dim_- x dim_- matrix)."""
        b = self.problem.minus.basis
        return hermitize(b.conj().T @ self.h_eff_exact.entries @ b)


def sw_series(prob: SWProblem, k: int = 1) -> list[DenseOperator]:
    """Leading effective-Hamiltonian terms [Delta H0 Pi_-, Pi_- H1 Pi_-]."""
    if k > 1:
        raise ValueError("series coefficients beyond first order are out of scope")
    p = prob.minus.projector.entries
    layout = prob.h0.layout
    order0 = DenseOperator(layout, hermitize(prob.delta * (prob.h0.entries @ p)), hermitian=True)
    terms = [order0]
    if k >= 1:
        terms.append(DenseOperator(layout, hermitize(p @ prob.h1.entries @ p), hermitian=True))
    return terms


def sw_exact(prob: SWProblem, config: Config | None = None) -> SWExpansion:
    """Exact block-diagonalizing rotation e^S and effective Hamiltonian on H_-."""
    cfg = config or DEFAULT
    h_t = prob.perturbed()
    vals, vecs = np.linalg.eigh(h_t.entries)
    k = prob.minus.dim
    d = h_t.dim
    if 0 < k < d:
        tol = cfg.cluster_rtol * max(1.0, float(np.abs(vals).max()))
        if vals[k] - vals[k - 1] < tol:
            raise ClusterSplitError(
                "the perturbed low subspace is not spectrally separated at the cut"
            )
    r_space = Subspace.from_basis(h_t.layout, vecs[:, :k])
    w = direct_rotation(r_space, prob.minus).entries
    s = scipy.linalg.logm(w)
    s = (s - s.conj().T) / 2  # scrub rounding: the generator is anti-Hermitian
    s_norm = float(np.linalg.norm(s, 2))
    if s_norm >= np.pi / 2:
        raise ValueError(f"|S| = {s_norm} reached pi/2: principal branch invalid")
    p = prob.minus.projector.entries
    p_plus = np.eye(d) - p
    block_diag = np.linalg.norm(p @ s @ p, 2) + np.linalg.norm(p_plus @ s @ p_plus, 2)
    if block_diag > 1e-9:
        raise ValueError(f"generator has block-diagonal residue {block_diag:.3e}")
    rotated = w @ h_t.entries @ w.conj().T
    off = np.linalg.norm(p @ rotated @ p_plus, 2)
    if off > 1e-9 * max(1.0, op_norm(h_t)):
        raise ValueError(f"e^S failed to block-diagonalize: off-block norm {off:.3e}")
    h_eff = DenseOperator(h_t.layout, hermitize(p @ rotated @ p), hermitian=True)
    orders = tuple(sw_series(prob, 1))
    bounds = _bound_values(prob, s, h_eff, orders, 1, cfg)
    return SWExpansion(
        s_exact=s, h_eff_exact=h_eff, h_eff_orders=orders, bounds=bounds, problem=prob
    )


def _bound_values(
    prob: SWProblem,
    s: np.ndarray,
    h_eff: DenseOperator,
    orders: tuple[DenseOperator, ...],
    k: int,
    cfg: Config,
) -> dict[str, float]:
    h1_norm = op_norm(prob.h1)
    factor = 1.0 + prob.lambda0 / (np.pi * prob.delta)
    s_bound = cfg.c_sw * h1_norm / prob.delta * factor
    trunc_bound = cfg.c_sw * prob.delta ** (-k) * h1_norm ** (k + 1) * factor
    truncated = sum(term.entries for term in orders[: k + 1])
    measured_trunc = float(np.linalg.norm(h_eff.entries - truncated, 2))
    return {
        "s_norm_measured": float(np.linalg.norm(s, 2)),
        "s_norm_bound": float(s_bound),
        "truncation_order": float(k),
        "truncation_measured": measured_trunc,
        "truncation_bound": float(trunc_bound),
    }


@dataclass(frozen=True)
class SWBounds:
    s_norm_measured: float
    s_norm_bound: float
    truncation_measured: float
    truncation_bound: float
    order: int

    @property
    def ok(self) -> bool:
        return (
            self.s_norm_measured <= self.s_norm_bound + 1e-12
            and self.truncation_measured <= self.truncation_bound + 1e-12
        )


def sw_bounds(prob: SWProblem, k: int = 1, config: Config | None = None) -> SWBounds:
    """Evaluate the |S| and order-k truncation bounds next to their measured values."""
    if k > 1:
        raise ValueError("series coefficients beyond first order are out of scope")
    cfg = config or DEFAULT
    expansion = sw_exact(prob, cfg)
    values = _bound_values(
        prob, expansion.s_exact, expansion.h_eff_exact, expansion.h_eff_orders, k, cfg
    )
    return SWBounds(
        s_norm_measured=values["s_norm_measured"],
        s_norm_bound=values["s_norm_bound"],
        truncation_measured=values["truncation_measured"],
        truncation_bound=values["truncation_bound"],
        order=k,
    )
