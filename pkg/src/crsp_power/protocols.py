"""Protocol engine for controlled remote state preparation.

Everything the senders, the receiver and the cooperating controllers do is
run first and conditioned on success; the controller under study acts last,
so what is left is an ensemble of pure states on the receiver's and that
controller's subsystems. Tracing the controller out gives the state the
receiver holds if the controller refuses to cooperate.

Each built-in protocol also carries a :class:`MixerModel`, the closed form of
that traced-out state as a mixture of unitaries applied to the target.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import channels as ch
from .tensor import (
    ATOL,
    CONTROLLER,
    RECEIVER,
    SENDER,
    SIGMA_Z,
    DensityOperator,
    Party,
    PureState,
    apply_operator,
    apply_unitary,
    controller,
    generalized_pauli,
    generalized_x_basis,
    is_unitary,
    kron_all,
    partial_trace,
    project,
)


class ProtocolError(ValueError):
    """Unknown protocol or invalid protocol parameters."""


class DegenerateProtocolError(RuntimeError):
    """Every branch of the protocol was rejected for this target."""


# ---------------------------------------------------------------------------
# mixer models


@dataclass(frozen=True)
class MixerModel:
    """Receiver state sum_j p_j U_j |phi><phi| U_j^dagger; term 0 is the identity."""

    terms: tuple[tuple[float, np.ndarray], ...]

    def __post_init__(self):
        terms = tuple((float(p), np.asarray(u, dtype=complex)) for p, u in self.terms)
        object.__setattr__(self, "terms", terms)
        if not terms:
            raise ValueError("mixer needs at least one term")
        if abs(sum(p for p, _ in terms) - 1.0) > ATOL:
            raise ValueError("mixer weights do not sum to 1")
        if any(p < 0 for p, _ in terms):
            raise ValueError("mixer weights must be non-negative")
        dim = terms[0][1].shape[0]
        for _, u in terms:
            if u.shape != (dim, dim) or not is_unitary(u):
                raise ValueError("mixer corrections must be unitaries of equal dimension")
        if not np.allclose(terms[0][1], np.eye(dim), rtol=0, atol=ATOL):
            raise ValueError("first mixer term must be the identity")

    @property
    def dim(self) -> int:
        return self.terms[0][1].shape[0]

    @property
    def weights(self) -> np.ndarray:
        return np.array([p for p, _ in self.terms])

    @classmethod
    def uniform(cls, unitaries: Sequence[np.ndarray]) -> "MixerModel":
        w = 1.0 / len(unitaries)
        return cls(tuple((w, u) for u in unitaries))


def mixer_rho(mixer: MixerModel, target: PureState) -> DensityOperator:
    phi = target.amplitudes
    if phi.size != mixer.dim:
        raise ValueError(f"target dimension {phi.size} does not match mixer dimension {mixer.dim}")
    rho = np.zeros((phi.size, phi.size), dtype=complex)
    for p, u in mixer.terms:
        v = u @ phi
        rho += p * np.outer(v, v.conj())
    return DensityOperator(rho, target.layout)


def z_strings(d: int, n: int) -> list[np.ndarray]:
    """All d**n tensor products of clock-operator powers, identity first."""
    z = [generalized_pauli(d, "Z", k) for k in range(d)]
    return [kron_all([z[k] for k in ks]) for ks in itertools.product(range(d), repeat=n)]


# ---------------------------------------------------------------------------
# step scripts


@dataclass(frozen=True)
class TargetBasisMeasurement:
    """Joint measurement of sender subsystems in the basis fixed by the target."""

    subsystems: tuple[str, ...]
    label: str = "target"


@dataclass(frozen=True)
class XBasisMeasurement:
    """Each listed subsystem measured separately in its Fourier (X) basis."""

    subsystems: tuple[str, ...]
    label: str


@dataclass(frozen=True)
class FilterStep:
    """Local diagonal Kraus filter; the reject outcome is discarded at once."""

    subsystem: str
    kraus_diag: tuple[complex, ...]
    label: str

    def __post_init__(self):
        if np.max(np.abs(self.kraus_diag)) > 1 + ATOL:
            raise ValueError("filter Kraus entries must have modulus at most 1")


@dataclass(frozen=True)
class FeedForward:
    """Outcome-dependent unitaries; ``rule(record)`` returns (U, labels) pairs."""

    rule: Callable[[Mapping], Sequence[tuple[np.ndarray, tuple[str, ...]]]]


@dataclass(frozen=True)
class SuccessPredicate:
    accept: Callable[[Mapping], bool]


@dataclass(frozen=True)
class StepScript:
    steps: tuple
    absent_controller: Party = CONTROLLER
    name: str = ""


def _step_subsystems(step) -> tuple[str, ...]:
    if isinstance(step, (TargetBasisMeasurement, XBasisMeasurement)):
        return step.subsystems
    if isinstance(step, FilterStep):
        return (step.subsystem,)
    return ()


@dataclass(frozen=True)
class ConditionedJointState:
    """Successful branches over the receiver and the absent controller.

    ``weights`` are renormalised to sum to 1; ``branch_probabilities`` are the
    unconditioned probabilities, which sum to ``success_probability``.
    ``filter_acceptance`` is one minus the probability discarded by filters.
    """

    weights: tuple[float, ...]
    states: tuple[PureState, ...]
    records: tuple[dict, ...]
    branch_probabilities: tuple[float, ...]
    success_probability: float
    filter_acceptance: float = 1.0
    rejected_probability: float = 0.0

    @property
    def ensemble(self) -> list[tuple[float, PureState]]:
        return list(zip(self.weights, self.states))

    @property
    def layout(self):
        return self.states[0].layout

    def density(self) -> DensityOperator:
        m = sum(w * s.projector() for w, s in self.ensemble)
        return DensityOperator(m, self.layout)


def rsp_basis(target: PureState) -> np.ndarray:
    """Orthonormal measurement basis (rows) whose first element is conj(target).

    Projecting the sender half of a maximally entangled pair onto row 0 leaves
    the receiver in the target. The rest is completed by Gram-Schmidt over
    the computational basis, always taking the candidate with the largest
    remaining component.
    """
    phi = target.amplitudes if isinstance(target, PureState) else np.asarray(target, dtype=complex)
    D = phi.size
    basis = [phi.conj() / np.linalg.norm(phi)]
    remaining = list(range(D))
    while len(basis) < D:
        Q = np.array(basis)
        best, best_norm, best_vec = None, -1.0, None
        for i in remaining:
            e = np.zeros(D, dtype=complex)
            e[i] = 1.0
            r = e - Q.T @ (Q.conj() @ e)
            nrm = np.linalg.norm(r)
            if nrm > best_norm + 1e-12:
                best, best_norm, best_vec = i, nrm, r
        remaining.remove(best)
        basis.append(best_vec / best_norm)
    return np.array(basis)


def run_conditioned(channel: ch.ChannelSpec, script: StepScript, target: PureState) -> ConditionedJointState:
    """Enumerate every outcome branch of ``script`` on ``channel`` and keep the successes."""
    layout = channel.layout
    protected = {layout.subsystems[i].label for i in layout.owned_by(script.absent_controller)}
    if not protected:
        raise ValueError(f"{script.absent_controller} owns no subsystem of channel {channel.name}")
    for step in script.steps:
        touched = set(_step_subsystems(step)) & protected
        if touched:
            raise ValueError(f"step {step} acts on the absent controller's subsystems {sorted(touched)}")

    # (unconditioned probability, normalised state, outcome record)
    branches: list[tuple[float, PureState, dict]] = [(1.0, channel.state, {})]
    filtered_out = 0.0
    rejected = 0.0
    basis = None

    for step in script.steps:
        new = []
        if isinstance(step, TargetBasisMeasurement):
            if basis is None:
                basis = rsp_basis(target)
            for p, st, rec in branches:
                for k, vec in enumerate(basis):
                    q, post = project(st, vec, step.subsystems)
                    if post is None:
                        rejected += p * q
                        continue
                    new.append((p * q, post, {**rec, step.label: k}))
        elif isinstance(step, XBasisMeasurement):
            for p, st, rec in branches:
                sub = [(p, st, ())]
                for lab in step.subsystems:
                    d = st.layout.subsystems[st.layout.index(lab)].dim
                    nxt = []
                    for q0, s0, out in sub:
                        for k in range(d):
                            q, post = project(s0, generalized_x_basis(d, k), [lab])
                            if post is None:
                                rejected += q0 * q
                                continue
                            nxt.append((q0 * q, post, out + (k,)))
                    sub = nxt
                new.extend((q, s, {**rec, step.label: out}) for q, s, out in sub)
        elif isinstance(step, FilterStep):
            for p, st, rec in branches:
                i = st.layout.index(step.subsystem)
                raw = apply_operator(st.amplitudes, np.diag(step.kraus_diag), st.layout.dims, [i])
                q = float(np.real(np.vdot(raw, raw)))
                filtered_out += p * (1.0 - q)
                if q <= 1e-12:
                    continue
                new.append((p * q, PureState(raw / np.sqrt(q), st.layout), {**rec, step.label: "accept"}))
        elif isinstance(step, FeedForward):
            for p, st, rec in branches:
                for u, labels in step.rule(rec):
                    st = apply_unitary(st, u, labels)
                new.append((p, st, rec))
        elif isinstance(step, SuccessPredicate):
            for p, st, rec in branches:
                if step.accept(rec):
                    new.append((p, st, rec))
                else:
                    rejected += p
        else:
            raise TypeError(f"unknown step {step!r}")
        branches = new

    if not branches:
        raise DegenerateProtocolError(f"{script.name or 'protocol'} has zero success probability for this target")
    for _, st, _ in branches:
        extra = [s.label for s in st.layout.subsystems
                 if s.owner not in (RECEIVER, script.absent_controller)]
        if extra:
            raise ValueError(f"subsystems {extra} are left unmeasured at the end of the script")

    probs = tuple(p for p, _, _ in branches)
    success = float(sum(probs))
    return ConditionedJointState(
        weights=tuple(p / success for p in probs),
        states=tuple(st for _, st, _ in branches),
        records=tuple(rec for _, _, rec in branches),
        branch_probabilities=probs,
        success_probability=success,
        filter_acceptance=1.0 - filtered_out,
        rejected_probability=rejected,
    )


def reduce_receiver(joint: ConditionedJointState, absent: Party = CONTROLLER) -> DensityOperator:
    """Receiver state when ``absent`` withholds cooperation."""
    layout = joint.layout
    if not layout.owned_by(absent):
        raise ValueError(f"{absent} owns nothing in the joint state")
    keep = layout.owned_by(RECEIVER)
    rho = sum(w * partial_trace(s, keep).matrix for w, s in joint.ensemble)
    return DensityOperator(rho, layout.select(keep))


# ---------------------------------------------------------------------------
# built-in protocols


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: type
    domain: str
    default: object = None
    doc: str = ""


@dataclass(frozen=True)
class ProtocolBundle:
    protocol_id: str
    params: dict
    channel: ch.ChannelSpec
    mixer: MixerModel
    script: StepScript | None
    dim: int
    absent_controller: Party = CONTROLLER
    default_ensemble: str = "haar"

    @property
    def n_qubits(self) -> int | None:
        n = int(round(np.log2(self.dim)))
        return n if 2 ** n == self.dim else None


def _accept_outcome(label, value=0):
    return SuccessPredicate(lambda rec: rec[label] == value)


def _ms_ab(params) -> tuple[float, float]:
    given = [k for k in ("b2", "a2") if params.get(k) is not None]
    cd = params.get("c") is not None or params.get("d") is not None
    if len(given) + cd != 1:
        raise ProtocolError("give exactly one of b2, a2, or the pair c, d")
    if cd:
        if params.get("c") is None or params.get("d") is None:
            raise ProtocolError("c and d must be given together")
        try:
            return ch.ms_controller_form(float(params["c"]), float(params["d"]))
        except ValueError as e:
            raise ProtocolError(str(e)) from None
    b2 = float(params["b2"]) if given == ["b2"] else 1.0 - float(params["a2"])
    if not 0.0 <= b2 <= 0.5:
        raise ProtocolError(f"b2 must lie in [0, 0.5] (a >= b), got {b2}")
    return float(np.sqrt(1.0 - b2)), float(np.sqrt(b2))


def _ms_mixer(a, b):
    return MixerModel(((a * a, np.eye(2)), (b * b, SIGMA_Z)))


def _p1(params):
    a, b = _ms_ab(params)
    script = StepScript((TargetBasisMeasurement(("A",), "A"), _accept_outcome("A")), CONTROLLER, "P1")
    return ch.make_ms3_controller_form(a, b), script, _ms_mixer(a, b), 2, {"a": a, "b": b}


def _p2(params):
    a, b = _ms_ab(params)
    script = StepScript((
        XBasisMeasurement(("A1",), "A1"),
        FeedForward(lambda rec: [(SIGMA_Z, ("B",))] if rec["A1"][0] == 1 else []),
        TargetBasisMeasurement(("A2",), "A2"),
        _accept_outcome("A2"),
    ), CONTROLLER, "P2")
    return ch.make_ms4_controller_form(a, b), script, _ms_mixer(a, b), 2, {"a": a, "b": b}


def _p3(params):
    N = int(params["N"])
    link = int(params["link"])
    if N < 1:
        raise ProtocolError(f"N must be at least 1, got {N}")
    if not 0 <= link < N:
        raise ProtocolError(f"link qubit {link} out of range for N={N}")
    parts = []
    for k in range(N):
        if k == link:
            parts.append(ch.make_ghz(3, [f"A{k}", "C", f"B{k}"], [SENDER, CONTROLLER, RECEIVER]))
        else:
            parts.append(ch.make_bell("phi+", (f"A{k}", f"B{k}")))
    channel = ch.tensor_channels(parts, f"equatorial-{N}")
    script = StepScript((TargetBasisMeasurement(tuple(f"A{k}" for k in range(N)), "A"),
                         _accept_outcome("A")), CONTROLLER, "P3")
    zs = [np.eye(2)] * N
    zs[link] = SIGMA_Z
    mixer = MixerModel(((0.5, np.eye(2 ** N)), (0.5, kron_all(zs))))
    return channel, script, mixer, 2 ** N, {}


def _brown_decoder() -> np.ndarray:
    """Receiver unitary sending the Bell state paired with sender bits x to |x>."""
    w = np.zeros((4, 4), dtype=complex)
    for prefix, bell in ch.BROWN_TERMS:
        w[int(prefix[:2], 2)] = ch.bell_vector(bell).conj()
    return w


def _p4(params):
    zz = np.kron(SIGMA_Z, SIGMA_Z)
    script = StepScript((
        TargetBasisMeasurement(("A1", "A2"), "A"),
        _accept_outcome("A"),
        FeedForward(lambda rec: [(_brown_decoder(), ("B1", "B2"))]),
    ), CONTROLLER, "P4")
    mixer = MixerModel(((0.5, np.eye(4)), (0.5, zz)))
    return ch.make_brown(), script, mixer, 4, {}


def _parity_correction(d, label, target):
    # outcome k of an X-basis measurement leaves a phase w^(-jk) on branch |j..j>
    def rule(rec):
        k = sum(rec[label]) % d
        return [(generalized_pauli(d, "Z", k), (target,))] if k else []
    return FeedForward(rule)


def _check_absent(params, M):
    absent = int(params["absent"]) if params.get("absent") is not None else M
    if not 1 <= absent <= M:
        raise ProtocolError(f"absent controller {absent} out of range 1..{M}")
    return absent


def _p5(params):
    N, M = int(params["N"]), int(params["M"])
    a2 = float(params["a2"])
    if N < 1 or M < 1:
        raise ProtocolError("N and M must be at least 1")
    if not 0.0 < a2 < 1.0:
        raise ProtocolError(f"a2 must lie in (0, 1), got {a2}")
    a, b = np.sqrt(a2), np.sqrt(1.0 - a2)
    absent = _check_absent(params, M)
    parts = [ch.make_pghz(a, b, M, copy=n) for n in range(1, N + 1)]
    channel = ch.tensor_channels(parts, f"pghz^{N}")
    lo = min(a, b)
    steps = []
    for n in range(1, N + 1):
        steps.append(FilterStep(f"B_{n}", (lo / a, lo / b), f"filter_{n}"))
        xs = (f"A1_{n}",) + tuple(f"C{m}_{n}" for m in range(1, M + 1) if m != absent)
        steps.append(XBasisMeasurement(xs, f"x_{n}"))
        steps.append(_parity_correction(2, f"x_{n}", f"B_{n}"))
    steps.append(TargetBasisMeasurement(tuple(f"A2_{n}" for n in range(1, N + 1)), "A2"))
    steps.append(_accept_outcome("A2"))
    script = StepScript(tuple(steps), controller(absent), "P5")
    mixer = MixerModel.uniform(z_strings(2, N))
    return channel, script, mixer, 2 ** N, {"a": float(a), "b": float(b), "absent": absent}


def _p6(params):
    d, M, N = int(params["d"]), int(params["M"]), int(params["N"])
    if d < 2 or M < 1 or N < 1:
        raise ProtocolError("need d >= 2, M >= 1, N >= 1")
    coeffs = params.get("coeffs")
    coeffs = np.full(d, 1 / np.sqrt(d), dtype=complex) if coeffs is None else np.asarray(coeffs, dtype=complex)
    if coeffs.size != d:
        raise ProtocolError(f"expected {d} GGC coefficients, got {coeffs.size}")
    if abs(np.vdot(coeffs, coeffs).real - 1.0) > ATOL:
        raise ProtocolError("GGC coefficients are not normalised")
    if np.min(np.abs(coeffs)) < 1e-12:
        raise ProtocolError("GGC coefficients must all be nonzero")
    absent = _check_absent(params, M)
    parts = [ch.make_ggc(coeffs, M, copy=n) for n in range(1, N + 1)]
    channel = ch.tensor_channels(parts, f"ggc^{N}")
    lo = np.min(np.abs(coeffs))
    uniform = np.allclose(coeffs, coeffs[0], rtol=0, atol=1e-14)
    steps = []
    for n in range(1, N + 1):
        if not uniform:
            steps.append(FilterStep(f"A0_{n}", tuple(lo / coeffs), f"filter_{n}"))
        xs = tuple(f"C{m}_{n}" for m in range(1, M + 1) if m != absent)
        if xs:
            steps.append(XBasisMeasurement(xs, f"x_{n}"))
            steps.append(_parity_correction(d, f"x_{n}", f"B_{n}"))
    steps.append(TargetBasisMeasurement(tuple(f"A0_{n}" for n in range(1, N + 1)), "A0"))
    steps.append(_accept_outcome("A0"))
    script = StepScript(tuple(steps), controller(absent), "P6")
    mixer = MixerModel.uniform(z_strings(d, N))
    return channel, script, mixer, d ** N, {"absent": absent}


def _p7(params):
    d = int(params["d"])
    if d < 2:
        raise ProtocolError(f"d must be at least 2, got {d}")
    channel = ch.tensor_channels([
        ch.make_generalized_bell(d, 0, 0, ("A1", "B1"), (SENDER, RECEIVER)),
        ch.make_generalized_bell(d, 0, 0, ("A2", "C1"), (SENDER, CONTROLLER)),
        ch.make_generalized_bell(d, 0, 0, ("B2", "C2"), (RECEIVER, CONTROLLER)),
    ], "gbell^3")
    mixer = MixerModel.uniform(z_strings(d, 2))
    return channel, None, mixer, d * d, {}


PROTOCOLS = {
    "P1": ("single-qubit CRSP over the three-qubit MS channel", _p1, (
        ParamSpec("b2", float, "[0, 0.5]", None, "controller-form weight b^2"),
        ParamSpec("a2", float, "[0.5, 1]", None, "alternative to b2: a^2 = 1 - b^2"),
        ParamSpec("c", float, "(0, 1], c^2 + d^2 = 1", None, "MS coefficient c (with d)"),
        ParamSpec("d", float, "[0, 1), c^2 + d^2 = 1", None, "MS coefficient d (with c)"),
    )),
    "P2": ("single-qubit CJRSP with two senders over the four-qubit MS channel", _p2, (
        ParamSpec("b2", float, "[0, 0.5]", None, "controller-form weight b^2"),
        ParamSpec("a2", float, "[0.5, 1]", None, "alternative to b2: a^2 = 1 - b^2"),
        ParamSpec("c", float, "(0, 1], c^2 + d^2 = 1", None, "MS coefficient c (with d)"),
        ParamSpec("d", float, "[0, 1), c^2 + d^2 = 1", None, "MS coefficient d (with c)"),
    )),
    "P3": ("N-qubit equatorial CRSP over N-1 Bell pairs and one GHZ state", _p3, (
        ParamSpec("N", int, ">= 1", 1, "number of target qubits"),
        ParamSpec("link", int, "[0, N)", 0, "target qubit carried by the GHZ state"),
    )),
    "P4": ("two-qubit CRSP over the five-qubit Brown state", _p4, ()),
    "P5": ("N-qubit CJRSP over N partially entangled GHZ states with filtering", _p5, (
        ParamSpec("N", int, ">= 1", 1, "number of target qubits"),
        ParamSpec("M", int, ">= 1", 1, "number of controllers"),
        ParamSpec("a2", float, "(0, 1)", 0.8, "PGHZ weight a^2"),
        ParamSpec("absent", int, "[1, M]", None, "controller who withholds cooperation (default M)"),
    )),
    "P6": ("qudit CRSP over generalized GHZ-class states", _p6, (
        ParamSpec("d", int, ">= 2", 2, "qudit dimension"),
        ParamSpec("M", int, ">= 1", 1, "number of controllers"),
        ParamSpec("N", int, ">= 1", 1, "number of target qudits"),
        ParamSpec("coeffs", tuple, "nonzero, normalised", None, "GGC coefficients (default uniform)"),
        ParamSpec("absent", int, "[1, M]", None, "controller who withholds cooperation (default M)"),
    )),
    "P7": ("two-qudit CRSP over three generalized Bell states", _p7, (
        ParamSpec("d", int, ">= 2", 2, "qudit dimension"),
    )),
}


def protocol_params(protocol_id: str) -> tuple[ParamSpec, ...]:
    if protocol_id not in PROTOCOLS:
        raise ProtocolError(f"unknown protocol {protocol_id!r}; known: {', '.join(PROTOCOLS)}")
    return PROTOCOLS[protocol_id][2]


def builtin(protocol_id: str, **params) -> ProtocolBundle:
    """Channel, step script, mixer model and target dimension of a built-in protocol.

    >>> builtin("P1", b2=0.2).mixer.weights
    array([0.8, 0.2])
    """
    specs = {p.name: p for p in protocol_params(protocol_id)}
    unknown = sorted(k for k, v in params.items() if k not in specs and v is not None)
    if unknown:
        raise ProtocolError(f"{protocol_id} does not take parameter(s) {', '.join(unknown)}")
    full = {name: (params[name] if params.get(name) is not None else spec.default)
            for name, spec in specs.items()}
    factory = PROTOCOLS[protocol_id][1]
    channel, script, mixer, dim, derived = factory(full)
    given = {k: v for k, v in full.items() if v is not None}
    absent = script.absent_controller if script is not None else CONTROLLER
    return ProtocolBundle(
        protocol_id=protocol_id,
        params={**given, **derived},
        channel=channel,
        mixer=mixer,
        script=script,
        dim=dim,
        absent_controller=absent,
        default_ensemble="equatorial" if protocol_id == "P3" else "haar",
    )
