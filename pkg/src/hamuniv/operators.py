"""Dense complex operator algebra on multi-site layouts.

Conventions used throughout the package:
  * little-endian site ordering: site 0 is the fastest-varying index of the
    flattened Hilbert space, so an operator O on site 1 of a two-site system
    has matrix kron(O, eye(d0));
  * Hermitian eigendecompositions are deterministic: ascending eigenvalues,
    degenerate clusters ordered by the index of each vector's first
    significant component, phases fixed so that component is real positive.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass

import numpy as np

from .config import DEFAULT, Config

PHASE_TOL = 1e-8  # first component above this magnitude anchors the phase


class DimensionCapError(ValueError):
    """A construction would exceed the configured dense-dimension cap."""


class ClusterSplitError(ValueError):
    """A spectral threshold lands inside a degeneracy cluster."""


@dataclass(frozen=True)
class Register:
    """Named contiguous range of sites with a role tag (witness, clock, ...)."""

    name: str
    sites: tuple[int, ...]
    role: str = ""

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        object.__setattr__(self, "sites", sites)
        if len(sites) == 0:
            raise ValueError(f"register {self.name!r} has no sites")
        if list(sites) != list(range(sites[0], sites[0] + len(sites))):
            raise ValueError(f"register {self.name!r} sites {sites} not contiguous ascending")


@dataclass(frozen=True)
class SystemLayout:
    """Ordered site dimensions plus named registers; the coordinate system of every operator."""

    site_dims: tuple[int, ...]
    registers: tuple[Register, ...] = ()
    dim_cap: int = DEFAULT.dim_cap

    def __post_init__(self):
        dims = tuple(int(d) for d in self.site_dims)
        object.__setattr__(self, "site_dims", dims)
        object.__setattr__(self, "registers", tuple(self.registers))
        if any(d < 2 for d in dims):
            raise ValueError(f"site dimensions must be >= 2, got {dims}")
        total = 1
        for d in dims:
            total *= d
            if total > self.dim_cap:
                raise DimensionCapError(
                    f"total dimension {'x'.join(map(str, dims))} exceeds cap {self.dim_cap}"
                )
        seen: set[int] = set()
        for reg in self.registers:
            for s in reg.sites:
                if not 0 <= s < len(dims):
                    raise ValueError(f"register {reg.name!r} site {s} outside layout")
                if s in seen:
                    raise ValueError(f"site {s} belongs to more than one register")
                seen.add(s)

    @property
    def n_sites(self) -> int:
        return len(self.site_dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.site_dims, dtype=np.int64))

    def register(self, name: str) -> Register:
        for reg in self.registers:
            if reg.name == name:
                return reg
        raise KeyError(f"no register named {name!r}")

    def strides(self) -> np.ndarray:
        """stride[k] multiplies site k's digit in the flat index (little-endian)."""
        return np.concatenate(([1], np.cumprod(self.site_dims[:-1]))).astype(np.int64)

    def digit_table(self) -> np.ndarray:
        """(n_sites, total_dim) array: digit_table[k, i] is site k's digit of index i."""
        out = np.empty((self.n_sites, self.total_dim), dtype=np.int64)
        rem = np.arange(self.total_dim, dtype=np.int64)
        for k, d in enumerate(self.site_dims):
            out[k] = rem % d
            rem //= d
        return out

    def basis_index(self, digits: dict[int, int]) -> int:
        """Flat index of the product basis state with the given site digits (others 0)."""
        strides = self.strides()
        idx = 0
        for site, digit in digits.items():
            if not 0 <= digit < self.site_dims[site]:
                raise ValueError(f"digit {digit} out of range for site {site}")
            idx += digit * strides[site]
        return int(idx)


def basis_vector(layout: SystemLayout, digits: dict[int, int] | None = None) -> np.ndarray:
    vec = np.zeros(layout.total_dim, dtype=complex)
    vec[layout.basis_index(digits or {})] = 1.0
    return vec


@dataclass(frozen=True)
class DenseOperator:
    """Complex square matrix tagged with its layout and a Hermitian flag.

    validate=False skips the Hermitian residual check and the defensive copy;
    it is for internal constructors that hand over ownership of an array that
    is Hermitian by construction.
    """

    layout: SystemLayout
    entries: np.ndarray
    hermitian: bool = False
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool = True):
        m = np.asarray(self.entries, dtype=complex)
        d = self.layout.total_dim
        if m.shape != (d, d):
            raise ValueError(f"entries shape {m.shape} does not match layout dimension {d}")
        if validate:
            if self.hermitian:
                scale = np.abs(m).max()
                if scale > 0 and np.abs(m - m.conj().T).max() > 1e-12 * scale:
                    raise ValueError(
                        "operator flagged hermitian is not hermitian to 1e-12 (max norm)"
                    )
            m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    @classmethod
    def identity(cls, layout: SystemLayout) -> "DenseOperator":
        return cls(layout, np.eye(layout.total_dim, dtype=complex), hermitian=True)


def hermitize(m: np.ndarray) -> np.ndarray:
    """Average away sub-tolerance asymmetry accumulated by sums of products."""
    return (m + m.conj().T) / 2


@dataclass(frozen=True)
class EigenSystem:
    """Deterministic spectral data of a Hermitian operator."""

    values: np.ndarray
    vectors: np.ndarray  # orthonormal columns, vectors[:, i] <-> values[i]
    source: DenseOperator


@dataclass(frozen=True)
class Subspace:
    """Orthonormal basis with its projector."""

    basis: np.ndarray  # shape (D, dim)
    projector: DenseOperator
    dim: int

    @classmethod
    def from_basis(cls, layout: SystemLayout, basis: np.ndarray) -> "Subspace":
        b = np.asarray(basis, dtype=complex)
        if b.ndim == 1:
            b = b[:, None]
        gram = b.conj().T @ b
        if np.abs(gram - np.eye(b.shape[1])).max() > 1e-10:
            raise ValueError("basis columns are not orthonormal to 1e-10")
        proj = DenseOperator(layout, hermitize(b @ b.conj().T), hermitian=True)
        return cls(basis=b, projector=proj, dim=b.shape[1])


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    out = vectors.copy()
    for i in range(out.shape[1]):
        col = out[:, i]
        sig = np.nonzero(np.abs(col) > PHASE_TOL)[0]
        anchor = sig[0] if sig.size else int(np.argmax(np.abs(col)))
        a = col[anchor]
        if abs(a) > 0:
            out[:, i] = col * (a.conjugate() / abs(a))
    return out


def _first_significant(col: np.ndarray) -> int:
    sig = np.nonzero(np.abs(col) > PHASE_TOL)[0]
    return int(sig[0]) if sig.size else int(np.argmax(np.abs(col)))


def cluster_bounds(values: np.ndarray, tol: float) -> list[tuple[int, int]]:
    """Half-open [start, stop) index ranges of degeneracy clusters in ascending values."""
    bounds = []
    start = 0
    for i in range(1, len(values)):
        if values[i] - values[i - 1] > tol:
            bounds.append((start, i))
            start = i
    bounds.append((start, len(values)))
    return bounds


def eigh(op: DenseOperator, config: Config | None = None) -> EigenSystem:
    """Full Hermitian eigendecomposition with the deterministic ordering/phase convention."""
    if not op.hermitian:
        raise ValueError("eigh requires the hermitian flag")
    cfg = config or DEFAULT
    values, vectors = np.linalg.eigh(op.entries)
    vectors = _fix_phases(vectors)
    tol = cfg.cluster_rtol * max(1.0, float(np.abs(values).max(initial=0.0)))
    for start, stop in cluster_bounds(values, tol):
        if stop - start > 1:
            keys = [_first_significant(vectors[:, j]) for j in range(start, stop)]
            order = np.argsort(keys, kind="stable") + start
            vectors[:, start:stop] = vectors[:, order]
    values = values.copy()
    values.flags.writeable = False
    vectors.flags.writeable = False
    return EigenSystem(values=values, vectors=vectors, source=op)


def op_norm(op: DenseOperator | np.ndarray) -> float:
    """Largest singular value."""
    m = op.entries if isinstance(op, DenseOperator) else np.asarray(op)
    return float(np.linalg.norm(m, 2))


def expm_i(op: DenseOperator, t: float) -> DenseOperator:
    """exp(i H t) via eigendecomposition; exact unitarity up to rounding."""
    if not op.hermitian:
        raise ValueError("expm_i requires a Hermitian operator")
    values, vectors = np.linalg.eigh(op.entries)
    u = (vectors * np.exp(1j * values * t)) @ vectors.conj().T
    return DenseOperator(op.layout, u, hermitian=False)


def tensor_embed(
    local_op: DenseOperator, target_sites: tuple[int, ...] | list[int], layout: SystemLayout
) -> DenseOperator:
    """Embed an operator on target_sites into the full layout (identity elsewhere).

    The local operator's own layout lists the target sites' dimensions in
    target order, with target_sites[0] the fastest-varying local index.
    """
    targets = tuple(int(t) for t in target_sites)
    if len(set(targets)) != len(targets):
        raise ValueError("target sites must be distinct")
    for t in targets:
        if not 0 <= t < layout.n_sites:
            raise ValueError(f"target site {t} outside layout")
    local_dims = tuple(layout.site_dims[t] for t in targets)
    if local_op.layout.site_dims != local_dims:
        raise ValueError(
            f"local operator dims {local_op.layout.site_dims} do not match "
            f"target site dims {local_dims}"
        )
    d_loc = local_op.dim
    total = layout.total_dim
    digits = layout.digit_table()
    loc_strides = np.concatenate(([1], np.cumprod(local_dims[:-1]))).astype(np.int64)
    loc_index = np.zeros(total, dtype=np.int64)
    for site, stride in zip(targets, loc_strides):
        loc_index += digits[site] * stride
    rest_sites = [s for s in range(layout.n_sites) if s not in targets]
    rest_index = np.zeros(total, dtype=np.int64)
    stride = 1
    for s in rest_sites:
        rest_index += digits[s] * stride
        stride *= layout.site_dims[s]
    order = np.lexsort((rest_index, loc_index))
    groups = order.reshape(d_loc, total // d_loc)
    out = np.zeros((total, total), dtype=complex)
    loc = local_op.entries
    for a in range(d_loc):
        for b in range(d_loc):
            if loc[a, b] != 0:
                out[groups[a], groups[b]] = loc[a, b]
    return DenseOperator(layout, out, hermitian=local_op.hermitian)


def subspace_distance(s1: Subspace, s2: Subspace) -> float:
    """Operator norm of the projector difference (sine of the largest principal angle)."""
    p1, p2 = s1.projector.entries, s2.projector.entries
    if p1.shape != p2.shape:
        raise ValueError("subspaces live in different ambient dimensions")
    return float(np.linalg.norm(p1 - p2, 2))


@dataclass(frozen=True)
class DirectRotation:
    """Unitary acting as w_small on span(q_span) and as the identity elsewhere.

    The direct rotation between subspaces is nontrivial only on the joint
    column span of their bases, so it is kept factored; materialize with
    .matrix() when the ambient dimension is small.
    """

    q_span: np.ndarray  # orthonormal columns, shape (D, r)
    w_small: np.ndarray  # r x r unitary
    dim: int

    def apply_left(self, m: np.ndarray) -> np.ndarray:
        """W @ m without forming the D x D matrix."""
        qm = self.q_span.conj().T @ m
        return m + self.q_span @ (self.w_small @ qm - qm)

    def matrix(self) -> np.ndarray:
        eye_r = np.eye(self.w_small.shape[0])
        return np.eye(self.dim, dtype=complex) + self.q_span @ (
            (self.w_small - eye_r) @ self.q_span.conj().T
        )


def direct_rotation_factored(basis_from: np.ndarray, basis_to: np.ndarray) -> DirectRotation:
    """Factored polar form of P_to P_from + (1 - P_to)(1 - P_from)."""
    if basis_from.shape != basis_to.shape:
        raise ValueError(
            f"subspace shapes differ: {basis_from.shape} vs {basis_to.shape}"
        )
    d = basis_from.shape[0]
    stack = np.hstack([basis_from, basis_to])
    q, _ = np.linalg.qr(stack)
    bf = q.conj().T @ basis_from
    bt = q.conj().T @ basis_to
    r = q.shape[1]
    eye_r = np.eye(r)
    a_small = (bt @ bt.conj().T) @ (bf @ bf.conj().T) + (eye_r - bt @ bt.conj().T) @ (
        eye_r - bf @ bf.conj().T
    )
    u, s, vh = np.linalg.svd(a_small)
    if s.size and s.min() <= 1e-12:
        raise ValueError("subspace distance >= 1: direct rotation not uniquely defined")
    return DirectRotation(q_span=q, w_small=u @ vh, dim=d)


def direct_rotation(s_from: Subspace, s_to: Subspace) -> DenseOperator:
    """Minimal unitary W with W P_from W^dag = P_to (polar form of the direct rotation).

    W is the unitary polar factor of P_to P_from + (1 - P_to)(1 - P_from),
    defined whenever the subspace distance is below 1, and satisfies
    |W - 1| <= sqrt(2) |P_from - P_to|.
    """
    if s_from.dim != s_to.dim:
        raise ValueError(f"subspace dimensions differ: {s_from.dim} vs {s_to.dim}")
    if s_from.projector.entries.shape != s_to.projector.entries.shape:
        raise ValueError("subspaces live in different ambient dimensions")
    rot = direct_rotation_factored(s_from.basis, s_to.basis)
    return DenseOperator(s_from.projector.layout, rot.matrix(), hermitian=False)


def projector_distance_from_bases(b1: np.ndarray, b2: np.ndarray) -> float:
    """|B1 B1^dag - B2 B2^dag| computed in the joint column span."""
    if b1.shape[1] == 0 and b2.shape[1] == 0:
        return 0.0
    q, _ = np.linalg.qr(np.hstack([b1, b2]))
    x1 = q.conj().T @ b1
    x2 = q.conj().T @ b2
    return float(np.linalg.norm(x1 @ x1.conj().T - x2 @ x2.conj().T, 2))
