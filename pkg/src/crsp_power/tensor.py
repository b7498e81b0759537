"""Dense state-vector and density-matrix arithmetic on multi-qudit systems.

Amplitude indices are mixed-radix numbers whose most significant digit is
subsystem 0, so ``|01>`` on two qubits is index 1 and reads left to right the
same way a ket does.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

ATOL = 1e-10

_AUTO_LABEL = re.compile(r"q\d+")

ROLES = ("sender", "receiver", "controller", "ancilla")


@dataclass(frozen=True, order=True)
class Party:
    """Owner of one or more subsystems, e.g. ``Party("controller", 2)``."""

    role: str
    index: int = 1

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown party role {self.role!r}")

    def __str__(self):
        if self.role == "receiver":
            return "receiver"
        return f"{self.role}{self.index}"


SENDER = Party("sender", 1)
RECEIVER = Party("receiver", 1)
CONTROLLER = Party("controller", 1)


def controller(i: int = 1) -> Party:
    return Party("controller", i)


def sender(i: int = 1) -> Party:
    return Party("sender", i)


@dataclass(frozen=True)
class Subsystem:
    label: str
    dim: int
    owner: Party | None = None

    def __post_init__(self):
        if int(self.dim) < 2:
            raise ValueError(f"subsystem {self.label!r} has dimension {self.dim} < 2")


@dataclass(frozen=True)
class SystemLayout:
    """Ordered subsystems of a composite system."""

    subsystems: tuple[Subsystem, ...]

    def __post_init__(self):
        object.__setattr__(self, "subsystems", tuple(self.subsystems))
        labels = [s.label for s in self.subsystems]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate subsystem labels in {labels}")

    @classmethod
    def of(cls, dims: Iterable[int], labels: Sequence[str] | None = None,
           owners: Sequence[Party | None] | None = None) -> "SystemLayout":
        dims = [int(d) for d in dims]
        labels = list(labels) if labels is not None else [f"q{i}" for i in range(len(dims))]
        owners = list(owners) if owners is not None else [None] * len(dims)
        return cls(tuple(Subsystem(l, d, o) for l, d, o in zip(labels, dims, owners)))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.subsystems)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.subsystems)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))

    def __len__(self):
        return len(self.subsystems)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no subsystem labelled {label!r} in {self.labels}") from None

    def indices(self, targets: Iterable[int | str]) -> list[int]:
        """Resolve a mix of labels and integer positions to positions."""
        out = []
        for t in targets:
            i = self.index(t) if isinstance(t, str) else int(t)
            if not 0 <= i < len(self):
                raise IndexError(f"subsystem index {i} out of range")
            out.append(i)
        if len(set(out)) != len(out):
            raise ValueError(f"repeated subsystem in {list(targets)}")
        return out

    def owned_by(self, party: Party) -> list[int]:
        return [i for i, s in enumerate(self.subsystems) if s.owner == party]

    def parties(self) -> list[Party]:
        return sorted({s.owner for s in self.subsystems if s.owner is not None})

    def select(self, idx: Iterable[int]) -> "SystemLayout":
        return SystemLayout(tuple(self.subsystems[i] for i in idx))

    def without(self, idx: Iterable[int]) -> "SystemLayout":
        drop = set(idx)
        return SystemLayout(tuple(s for i, s in enumerate(self.subsystems) if i not in drop))

    def __add__(self, other: "SystemLayout") -> "SystemLayout":
        subs = self.subsystems + other.subsystems
        if all(_AUTO_LABEL.fullmatch(s.label) and s.owner is None for s in subs):
            subs = tuple(Subsystem(f"q{i}", s.dim) for i, s in enumerate(subs))
        return SystemLayout(subs)


def _default_layout(dim: int) -> SystemLayout:
    return SystemLayout.of([dim])


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray
    layout: SystemLayout = field(default=None)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        if self.layout is None:
            object.__setattr__(self, "layout", _default_layout(amps.size))
        if self.layout.total_dim != amps.size:
            raise ValueError(
                f"{amps.size} amplitudes do not fit layout dims {self.layout.dims}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > ATOL:
            raise ValueError(f"state norm {norm!r} differs from 1")

    @classmethod
    def normalized(cls, amplitudes, layout: SystemLayout | None = None) -> "PureState":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        return cls(amps / np.linalg.norm(amps), layout)

    @classmethod
    def basis(cls, digits: Sequence[int], dims: Sequence[int] | None = None) -> "PureState":
        """Computational basis ket, e.g. ``PureState.basis([0, 1])`` is |01>."""
        dims = list(dims) if dims is not None else [2] * len(digits)
        amps = np.zeros(int(np.prod(dims)), dtype=complex)
        amps[np.ravel_multi_index(tuple(digits), dims)] = 1.0
        return cls(amps, SystemLayout.of(dims))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def relabel(self, layout: SystemLayout) -> "PureState":
        return PureState(self.amplitudes, layout)

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def density(self) -> "DensityOperator":
        return DensityOperator(self.projector(), self.layout)


@dataclass(frozen=True)
class DensityOperator:
    matrix: np.ndarray
    layout: SystemLayout = field(default=None)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if self.layout is None:
            object.__setattr__(self, "layout", _default_layout(m.shape[0]))
        if self.layout.total_dim != m.shape[0]:
            raise ValueError(f"matrix of size {m.shape[0]} does not fit layout {self.layout.dims}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def check(self, atol: float = ATOL, eig_tol: float = 1e-9) -> "DensityOperator":
        """Raise ``ValueError`` unless Hermitian, unit-trace and PSD."""
        m = self.matrix
        if np.max(np.abs(m - m.conj().T), initial=0.0) > atol:
            raise ValueError("density operator is not Hermitian")
        tr = np.trace(m)
        if abs(tr - 1.0) > atol:
            raise ValueError(f"density operator has trace {tr!r}")
        if hermitian_eigenvalues(m)[-1] < -eig_tol:
            raise ValueError("density operator has a negative eigenvalue")
        return self


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, DensityOperator):
        return x.matrix
    if isinstance(x, PureState):
        return x.projector()
    return np.asarray(x, dtype=complex)


# ---------------------------------------------------------------------------
# composition


def kron(a, b):
    """Tensor product of two states or operators of the same kind.

    ``PureState`` and ``DensityOperator`` operands concatenate their layouts;
    plain arrays go through ``np.kron``.
    """
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(a.amplitudes, b.amplitudes), a.layout + b.layout)
    if isinstance(a, DensityOperator) and isinstance(b, DensityOperator):
        return DensityOperator(np.kron(a.matrix, b.matrix), a.layout + b.layout)
    if isinstance(a, (PureState, DensityOperator)) or isinstance(b, (PureState, DensityOperator)):
        raise TypeError(f"cannot kron {type(a).__name__} with {type(b).__name__}")
    return np.kron(np.asarray(a), np.asarray(b))


def kron_all(factors):
    out = factors[0]
    for f in factors[1:]:
        out = kron(out, f)
    return out


def is_unitary(u: np.ndarray, atol: float = ATOL) -> bool:
    u = np.asarray(u)
    return (u.ndim == 2 and u.shape[0] == u.shape[1]
            and np.allclose(u.conj().T @ u, np.eye(u.shape[0]), rtol=0, atol=atol))


def apply_operator(amplitudes: np.ndarray, op: np.ndarray, dims: Sequence[int],
                   targets: Sequence[int]) -> np.ndarray:
    """Apply ``op`` to the ``targets`` factors of an unnormalised vector."""
    dims = list(dims)
    targets = list(targets)
    tdim = int(np.prod([dims[t] for t in targets]))
    op = np.asarray(op, dtype=complex)
    if op.shape != (tdim, tdim):
        raise ValueError(f"operator shape {op.shape} does not match target dimension {tdim}")
    n = len(dims)
    rest = [i for i in range(n) if i not in targets]
    psi = np.asarray(amplitudes, dtype=complex).reshape(dims)
    psi = np.transpose(psi, targets + rest).reshape(tdim, -1)
    psi = (op @ psi).reshape([dims[t] for t in targets] + [dims[r] for r in rest])
    return np.transpose(psi, np.argsort(targets + rest)).reshape(-1)


def apply_unitary(state: PureState, u: np.ndarray, targets: Sequence[int | str]) -> PureState:
    """Apply a unitary to the listed subsystems (positions or labels)."""
    if not is_unitary(u):
        raise ValueError("operator is not unitary")
    idx = state.layout.indices(targets)
    amps = apply_operator(state.amplitudes, u, state.layout.dims, idx)
    return PureState(amps, state.layout)


def project(state: PureState, direction, targets: Sequence[int | str]) -> tuple[float, PureState | None]:
    """Project ``targets`` onto ``direction`` and return (probability, post-state).

    The post-state lives on the remaining subsystems and is renormalised. When
    the outcome is impossible (probability <= 1e-12) the post-state is None.
    If every subsystem is projected, the post-state is None as well.
    """
    d = direction.amplitudes if isinstance(direction, PureState) else np.asarray(direction, dtype=complex)
    d = d.reshape(-1)
    if abs(np.linalg.norm(d) - 1.0) > ATOL:
        raise ValueError("projection direction is not normalised")
    layout = state.layout
    idx = layout.indices(targets)
    dims = list(layout.dims)
    tdim = int(np.prod([dims[t] for t in idx]))
    if d.size != tdim:
        raise ValueError(f"direction of size {d.size} does not match target dimension {tdim}")
    rest = [i for i in range(len(dims)) if i not in idx]
    psi = state.amplitudes.reshape(dims).transpose(idx + rest).reshape(tdim, -1)
    post = d.conj() @ psi
    prob = float(np.real(np.vdot(post, post)))
    if prob <= 1e-12 or not rest:
        return prob, None
    return prob, PureState(post / np.sqrt(prob), layout.select(rest))


def partial_trace(rho, keep: Iterable[int | str]) -> DensityOperator:
    """Reduced density operator on ``keep``, in layout order.

    Accepts a ``PureState`` (contracted directly, without forming the full
    projector) or a ``DensityOperator``.
    """
    layout = rho.layout
    keep = sorted(layout.indices(keep))
    if not keep:
        raise ValueError("partial trace needs a nonempty set of subsystems to keep")
    dims = list(layout.dims)
    n = len(dims)
    drop = [i for i in range(n) if i not in keep]
    kdim = int(np.prod([dims[i] for i in keep]))
    if isinstance(rho, PureState):
        psi = rho.amplitudes.reshape(dims).transpose(keep + drop).reshape(kdim, -1)
        red = psi @ psi.conj().T
    else:
        m = rho.matrix.reshape(dims + dims)
        perm = keep + drop
        ddim = int(np.prod([dims[i] for i in drop]))
        m = m.transpose(perm + [n + p for p in perm]).reshape(kdim, ddim, kdim, ddim)
        red = np.einsum("ajbj->ab", m)
    return DensityOperator(red, layout.select(keep))


def fidelity(target, rho) -> float:
    """<phi|rho|phi> for a pure target and a density operator (or pure state)."""
    phi = target.amplitudes if isinstance(target, PureState) else np.asarray(target, dtype=complex)
    if isinstance(rho, PureState):
        return float(abs(np.vdot(phi, rho.amplitudes)) ** 2)
    m = _as_matrix(rho)
    if m.shape != (phi.size, phi.size):
        raise ValueError(f"target of size {phi.size} vs operator of shape {m.shape}")
    return float(np.real(np.vdot(phi, m @ phi)))


def hermitian_eigenvalues(m, atol: float = ATOL) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix in descending order."""
    m = _as_matrix(m)
    scale = max(1.0, float(np.max(np.abs(m), initial=0.0)))
    if np.max(np.abs(m - m.conj().T), initial=0.0) > atol * scale:
        raise ValueError("matrix is not Hermitian")
    return np.linalg.eigvalsh((m + m.conj().T) / 2)[::-1]


def von_neumann_entropy(rho, cutoff: float = 1e-12) -> float:
    """Entropy in bits; eigenvalues below ``cutoff`` contribute nothing."""
    ev = hermitian_eigenvalues(rho)
    ev = ev[ev > cutoff]
    return float(max(0.0, -np.sum(ev * np.log2(ev))))


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


# ---------------------------------------------------------------------------
# random states


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def haar_random_states(D: int, n: int, seed) -> np.ndarray:
    """``n`` Haar-random unit vectors of dimension D as rows of an (n, D) array."""
    if D < 2:
        raise ValueError(f"dimension must be at least 2, got {D}")
    rng = _rng(seed)
    z = rng.standard_normal((n, D)) + 1j * rng.standard_normal((n, D))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def haar_random_pure(D: int, seed) -> PureState:
    return PureState(haar_random_states(D, 1, seed)[0])


def equatorial_states(N: int, n: int, seed) -> np.ndarray:
    """``n`` random N-qubit equatorial states: equal magnitudes, uniform phases."""
    if N < 1:
        raise ValueError(f"need at least one qubit, got N={N}")
    rng = _rng(seed)
    theta = rng.uniform(0.0, 2 * np.pi, size=(n, 2 ** N))
    return np.exp(1j * theta) * 2.0 ** (-N / 2)


def equatorial_random(N: int, seed) -> PureState:
    return PureState(equatorial_states(N, 1, seed)[0], SystemLayout.of([2] * N))


def haar_random_unitary(D: int, seed) -> np.ndarray:
    """Haar unitary from the QR decomposition of a complex Ginibre matrix."""
    rng = _rng(seed)
    z = (rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


# ---------------------------------------------------------------------------
# qudit operators


def generalized_pauli(d: int, kind: str, power: int = 1) -> np.ndarray:
    """Clock (``"Z"``) or shift (``"X"``) operator on a d-level system, raised to ``power``.

    Z|j> = w^j |j> with w = exp(2 pi i / d), and X|j> = |j+1 mod d>.
    """
    if d < 2:
        raise ValueError(f"d must be at least 2, got {d}")
    j = np.arange(d)
    kind = kind.upper()
    if kind == "Z":
        return np.diag(np.exp(2j * np.pi * ((j * power) % d) / d))
    if kind == "X":
        u = np.zeros((d, d), dtype=complex)
        u[(j + power) % d, j] = 1.0
        return u
    raise ValueError(f"kind must be 'X' or 'Z', got {kind!r}")


SIGMA_Z = generalized_pauli(2, "Z")
SIGMA_X = generalized_pauli(2, "X")


def generalized_x_basis(d: int, k: int) -> PureState:
    """Fourier basis vector |k>_x = d^(-1/2) sum_j exp(2 pi i jk/d) |j>."""
    if not 0 <= k < d:
        raise ValueError(f"basis index {k} out of range for d={d}")
    j = np.arange(d)
    return PureState(np.exp(2j * np.pi * j * k / d) / np.sqrt(d))
