"""Average non-conditioned fidelity, control power and the controller-entropy audit."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import channels as ch
from .protocols import (
    MixerModel,
    ProtocolBundle,
    ProtocolError,
    builtin,
    protocol_params,
    reduce_receiver,
    run_conditioned,
)
from .tensor import (
    Party,
    PureState,
    SystemLayout,
    equatorial_states,
    fidelity,
    haar_random_states,
    partial_trace,
    von_neumann_entropy,
)

ANALYTIC_TOL = 1e-6
ENTROPY_TOL = 1e-9
BLOCK_SIZE = 4096

ACCEPTABLE = "acceptable"
INSUFFICIENT = "insufficient"


def classical_limit(D: int) -> float:
    """Best fidelity reachable with classical correlations alone, 2/(1+D)."""
    if D < 2:
        raise ValueError(f"dimension must be at least 2, got {D}")
    return 2 / (1 + D)


def power_bound(D: int) -> float:
    """Minimum acceptable control power (D-1)/(D+1)."""
    if D < 2:
        raise ValueError(f"dimension must be at least 2, got {D}")
    return (D - 1) / (D + 1)


def control_power(f_avg: float) -> float:
    if not -1e-12 <= f_avg <= 1 + 1e-12:
        raise ValueError(f"average fidelity {f_avg} outside [0, 1]")
    return 1.0 - f_avg


def verdict(P: float, D: int, tolerance: float = ANALYTIC_TOL) -> str:
    return ACCEPTABLE if P >= power_bound(D) - tolerance else INSUFFICIENT


# ---------------------------------------------------------------------------
# target ensembles and averaging


@dataclass(frozen=True)
class TargetEnsemble:
    """Targets to average over: ``haar``, ``equatorial`` (qubits only) or ``fixed``.

    Samples are drawn in blocks of ``BLOCK_SIZE``; block ``k`` is seeded from
    ``(seed, k)``, so the draw does not depend on how blocks are scheduled.
    """

    kind: str
    dim: int
    samples: int = 1
    seed: int | None = None
    state: PureState | None = None

    def __post_init__(self):
        if self.kind not in ("haar", "equatorial", "fixed"):
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.dim < 2:
            raise ValueError(f"ensemble dimension must be at least 2, got {self.dim}")
        if self.samples < 1:
            raise ValueError("need at least one sample")
        if self.kind == "equatorial" and 2 ** self.n_qubits != self.dim:
            raise ValueError(f"equatorial ensemble needs a power-of-two dimension, got {self.dim}")
        if self.kind == "fixed":
            if self.state is None or self.state.dim != self.dim:
                raise ValueError("fixed ensemble needs a state of matching dimension")
        elif self.seed is None:
            raise ValueError("random ensembles need an explicit seed")

    @property
    def n_qubits(self) -> int:
        return int(round(math.log2(self.dim)))

    def block(self, k: int) -> np.ndarray:
        n = min(BLOCK_SIZE, self.samples - k * BLOCK_SIZE)
        if self.kind == "fixed":
            return np.tile(self.state.amplitudes, (n, 1))
        rng = np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(k,)))
        if self.kind == "haar":
            return haar_random_states(self.dim, n, rng)
        return equatorial_states(self.n_qubits, n, rng)

    @property
    def n_blocks(self) -> int:
        return -(-self.samples // BLOCK_SIZE)

    def targets(self) -> np.ndarray:
        return np.concatenate([self.block(k) for k in range(self.n_blocks)])


def mixer_fidelities(mixer: MixerModel, targets: np.ndarray) -> np.ndarray:
    """Row-wise <phi| sum_j p_j U_j |phi><phi| U_j^dagger |phi>."""
    out = np.zeros(targets.shape[0])
    for p, u in mixer.terms:
        amp = np.einsum("nx,nx->n", targets.conj(), targets @ u.T)
        out += p * np.abs(amp) ** 2
    return out


def engine_fidelities(bundle: ProtocolBundle, targets: np.ndarray) -> np.ndarray:
    if bundle.script is None:
        raise ValueError(f"{bundle.protocol_id} has no step script; use the mixer route")
    out = np.empty(targets.shape[0])
    for i, amps in enumerate(targets):
        phi = PureState(amps)
        joint = run_conditioned(bundle.channel, bundle.script, phi)
        out[i] = fidelity(phi, reduce_receiver(joint, bundle.absent_controller))
    return out


def _mean_stderr(values: np.ndarray) -> tuple[float, float]:
    n = values.size
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((values - mean) ** 2) / (n - 1)
    return mean, math.sqrt(var / n)


def sample_fidelities(bundle: ProtocolBundle, ensemble: TargetEnsemble, route: str = "mixer",
                      workers: int = 1) -> np.ndarray:
    if ensemble.dim != bundle.dim:
        raise ValueError(f"ensemble dimension {ensemble.dim} does not match protocol dimension {bundle.dim}")
    if route == "mixer":
        def work(k):
            return mixer_fidelities(bundle.mixer, ensemble.block(k))
    elif route == "engine":
        def work(k):
            return engine_fidelities(bundle, ensemble.block(k))
    else:
        raise ValueError(f"unknown route {route!r}")
    blocks = range(ensemble.n_blocks)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, blocks))
    else:
        parts = [work(k) for k in blocks]
    return np.concatenate(parts)


def average_ncf_mc(bundle: ProtocolBundle, ensemble: TargetEnsemble, route: str = "mixer",
                   workers: int = 1) -> tuple[float, float]:
    """Monte Carlo mean of <phi|rho_B|phi> and its standard error.

    ``route="engine"`` runs the full step script for every target instead of
    the mixer closed form; it is much slower and meant for cross-checks.
    """
    return _mean_stderr(sample_fidelities(bundle, ensemble, route, workers))


def average_ncf_analytic(mixer: MixerModel, kind: str = "haar") -> float:
    """Haar average sum_j p_j (D + |tr U_j|^2) / (D (D + 1))."""
    if kind != "haar":
        raise ValueError(f"no closed form for {kind!r} ensembles")
    D = mixer.dim
    return float(sum(p * (D + abs(np.trace(u)) ** 2) for p, u in mixer.terms) / (D * (D + 1)))


# ---------------------------------------------------------------------------
# entropy


@dataclass(frozen=True)
class EntropyAudit:
    party: str
    entropy: float
    required: float
    passed: bool


def party_entropy(channel: ch.ChannelSpec, party: Party) -> float:
    idx = channel.layout.owned_by(party)
    if not idx:
        raise ValueError(f"{party} owns no subsystem of channel {channel.name}")
    return von_neumann_entropy(partial_trace(channel.state, idx))


def controller_entropy_audit(channel: ch.ChannelSpec, controller: Party, D_target: int) -> EntropyAudit:
    """Check S(rho_C) >= log2 D on the channel before any protocol step."""
    S = party_entropy(channel, controller)
    required = math.log2(D_target)
    return EntropyAudit(str(controller), S, required, S >= required - ENTROPY_TOL)


def classify_unit(S: float, tol: float = ENTROPY_TOL) -> str:
    return "=1" if abs(S - 1.0) <= tol else ("<1" if S < 1.0 else ">1")


@dataclass(frozen=True)
class EntropyRow:
    name: str
    entropies: tuple[float, float, float]
    classes: tuple[str, str, str]


def entropy_table(channels: Sequence[ch.ChannelSpec]) -> list[EntropyRow]:
    """Single-party entropies (sender, receiver, controller) of three-party channels."""
    rows = []
    for chan in channels:
        parties = chan.layout.parties()
        roles = {p.role: p for p in parties}
        if len(parties) != 3 or set(roles) != {"sender", "receiver", "controller"}:
            raise ValueError(f"{chan.name} is not a sender/receiver/controller channel")
        S = tuple(party_entropy(chan, roles[r]) for r in ("sender", "receiver", "controller"))
        rows.append(EntropyRow(chan.name, S, tuple(classify_unit(s) for s in S)))
    return rows


def table_one(ms_d: float = 0.6, pghz_a2: float = 0.8) -> list[EntropyRow]:
    """GHZ, MS and PGHZ rows for the three-qubit channel comparison."""
    c = math.sqrt(1.0 - ms_d * ms_d)
    a, b = math.sqrt(pghz_a2), math.sqrt(1.0 - pghz_a2)
    chans = [ch.make_ghz(3), ch.make_ms3(c, ms_d), ch.make_pghz3(a, b)]
    rows = entropy_table(chans)
    names = ("GHZ", "MS", "PGHZ")
    return [EntropyRow(n, r.entropies, r.classes) for n, r in zip(names, rows)]


# ---------------------------------------------------------------------------
# reports


@dataclass
class PowerReport:
    protocol: str
    params: dict
    dimension: int
    ensemble: str
    samples: int
    seed: int | None
    average_ncf: float
    average_ncf_analytic: float | None
    average_ncf_mc: float | None
    average_ncf_stderr: float | None
    control_power: float
    classical_limit: float
    power_bound: float
    verdict: str
    verdict_tolerance: float
    success_probability: float | None
    controller_entropy: dict = field(default_factory=dict)
    entropy_required: float = 0.0
    entropy_verdict: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _clean_params(params: dict) -> dict:
    out = {}
    for k, v in sorted(params.items()):
        if isinstance(v, (tuple, list, np.ndarray)):
            v = [complex(x).real if complex(x).imag == 0 else str(complex(x)) for x in v]
        elif isinstance(v, (np.floating, np.integer)):
            v = v.item()
        out[k] = v
    return out


def analyze(protocol_id: str, params: dict | None = None, ensemble: str | None = None,
            samples: int = 10_000, seed: int | None = None, tol: float = ANALYTIC_TOL,
            route: str = "mixer", workers: int = 1) -> PowerReport:
    """Full control-power analysis of one built-in protocol.

    The headline average NCF is the Haar closed form when the ensemble is
    Haar and the Monte Carlo estimate otherwise. ``samples=0`` skips Monte
    Carlo (only allowed for Haar ensembles).
    """
    bundle = builtin(protocol_id, **(params or {}))
    kind = ensemble or bundle.default_ensemble
    D = bundle.dim

    analytic = average_ncf_analytic(bundle.mixer) if kind == "haar" else None
    mc = se = None
    ens = None
    if samples > 0:
        ens = TargetEnsemble(kind, D, samples, seed)
        mc, se = average_ncf_mc(bundle, ens, route, workers)
    elif analytic is None:
        raise ValueError(f"{kind} ensembles need Monte Carlo samples")

    f_avg = analytic if analytic is not None else mc
    P = control_power(f_avg)
    v_tol = tol if analytic is not None else max(3 * se, tol)

    success = None
    if bundle.script is not None:
        ref = ens.block(0)[0] if ens is not None else np.eye(D, dtype=complex)[0]
        success = run_conditioned(bundle.channel, bundle.script, PureState(ref)).success_probability

    audits = [controller_entropy_audit(bundle.channel, c, D) for c in bundle.channel.controllers()]
    return PowerReport(
        protocol=protocol_id,
        params=_clean_params(bundle.params),
        dimension=D,
        ensemble=kind,
        samples=samples,
        seed=seed,
        average_ncf=f_avg,
        average_ncf_analytic=analytic,
        average_ncf_mc=mc,
        average_ncf_stderr=se,
        control_power=P,
        classical_limit=classical_limit(D),
        power_bound=power_bound(D),
        verdict=verdict(P, D, v_tol),
        verdict_tolerance=v_tol,
        success_probability=success,
        controller_entropy={a.party: a.entropy for a in audits},
        entropy_required=math.log2(D),
        entropy_verdict="pass" if all(a.passed for a in audits) else "fail",
    )


def sweep(protocol_id: str, param: str, grid: Sequence, params: dict | None = None,
          ensemble: str | None = None, samples: int = 10_000, seed: int | None = None,
          tol: float = ANALYTIC_TOL, route: str = "mixer", workers: int = 1) -> list[PowerReport]:
    """One report per grid value of ``param``; every point reuses ``seed``."""
    names = {p.name: p for p in protocol_params(protocol_id)}
    if param not in names:
        raise ProtocolError(f"{protocol_id} has no parameter {param!r}; choose from {sorted(names)}")
    cast = names[param].kind
    base = dict(params or {})
    return [analyze(protocol_id, {**base, param: cast(x)}, ensemble, samples, seed, tol, route, workers)
            for x in grid]
