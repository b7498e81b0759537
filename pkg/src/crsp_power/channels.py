"""Entangled resource states shared by senders, controllers and the receiver."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .tensor import (
    ATOL,
    CONTROLLER,
    RECEIVER,
    SENDER,
    Party,
    PureState,
    Subsystem,
    SystemLayout,
    controller,
    kron,
    sender,
)

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class ChannelSpec:
    name: str
    state: PureState
    parameters: dict = field(default_factory=dict)

    @property
    def layout(self) -> SystemLayout:
        return self.state.layout

    def controllers(self) -> list[Party]:
        return [p for p in self.layout.parties() if p.role == "controller"]


def _layout(labels: Sequence[str], owners: Sequence[Party], d: int = 2) -> SystemLayout:
    return SystemLayout(tuple(Subsystem(l, d, o) for l, o in zip(labels, owners)))


def _ket(bits: str, d: int = 2) -> np.ndarray:
    v = np.zeros(d ** len(bits), dtype=complex)
    v[int(bits, d)] = 1.0
    return v


def bell_vector(variant: str) -> np.ndarray:
    """Two-qubit Bell vector; ``Psi+-`` is taken as (|01> +- |10>)/sqrt(2)."""
    table = {
        "phi+": _ket("00") + _ket("11"),
        "phi-": _ket("00") - _ket("11"),
        "psi+": _ket("01") + _ket("10"),
        "psi-": _ket("01") - _ket("10"),
    }
    key = variant.lower().replace("⁺", "+").replace("⁻", "-").replace("φ", "phi").replace("ψ", "psi")
    if key not in table:
        raise ValueError(f"unknown Bell variant {variant!r}")
    return table[key] / SQRT2


def make_bell(variant: str = "phi+", labels=("A", "B"), owners=(SENDER, RECEIVER)) -> ChannelSpec:
    return ChannelSpec("bell", PureState(bell_vector(variant), _layout(labels, owners)),
                       {"variant": variant})


def make_ghz(n: int = 3, labels: Sequence[str] | None = None,
             owners: Sequence[Party] | None = None) -> ChannelSpec:
    """(|0...0> + |1...1>)/sqrt(2) with one qubit per party.

    Default ownership for n = 3 is sender A, receiver B, controller C.
    """
    if n < 2:
        raise ValueError(f"GHZ state needs at least 2 qubits, got {n}")
    if labels is None:
        labels = ["A", "B", "C"] if n == 3 else [f"q{i}" for i in range(n)]
    if owners is None:
        owners = [SENDER, RECEIVER, CONTROLLER] if n == 3 else [None] * n
    amps = _ket("0" * n) + _ket("1" * n)
    return ChannelSpec("ghz", PureState(amps / SQRT2, _layout(labels, owners)), {"n": n})


def _check_cd(c: float, d: float):
    if abs(c * c + d * d - 1.0) > ATOL:
        raise ValueError(f"MS parameters need c^2 + d^2 = 1, got c={c}, d={d}")
    if c <= 0:
        raise ValueError(f"MS parameter c must be positive, got {c}")


def make_ms3(c: float, d: float) -> ChannelSpec:
    """(|000> + c|111> + d|110>)/sqrt(2) on sender A, receiver B, controller C."""
    _check_cd(c, d)
    amps = (_ket("000") + c * _ket("111") + d * _ket("110")) / SQRT2
    layout = _layout(["A", "B", "C"], [SENDER, RECEIVER, CONTROLLER])
    return ChannelSpec("ms3", PureState(amps, layout), {"c": c, "d": d})


def make_ms4(c: float, d: float) -> ChannelSpec:
    """(|0000> - c|1111> + d|1110>)/sqrt(2) on senders A1, A2, receiver B, controller C."""
    _check_cd(c, d)
    amps = (_ket("0000") - c * _ket("1111") + d * _ket("1110")) / SQRT2
    layout = _layout(["A1", "A2", "B", "C"], [sender(1), sender(2), RECEIVER, CONTROLLER])
    return ChannelSpec("ms4", PureState(amps, layout), {"c": c, "d": d})


def ms_controller_form(c: float, d: float) -> tuple[float, float]:
    """Coefficients (a, b) of the controller-diagonal form of an MS channel.

    Both MS channels read (|0..0>|u>_C + |1..1>|v>_C)/sqrt(2) with <u|v> = d,
    so a^2 - b^2 = d and a^2 + b^2 = 1.
    """
    _check_cd(c, d)
    a2 = (1.0 + d) / 2.0
    return float(np.sqrt(a2)), float(np.sqrt(1.0 - a2))


def ms_controller_states(c: float, d: float, variant: str = "ms3") -> tuple[np.ndarray, np.ndarray]:
    """Controller states (u, v) paired with the all-0 and all-1 branches."""
    u = np.array([1.0, 0.0], dtype=complex)
    v = np.array([d, c] if variant == "ms3" else [d, -c], dtype=complex)
    return u, v


def ms_rotation_unitary(c: float, d: float, variant: str = "ms3") -> np.ndarray:
    """Controller unitary taking an MS channel to its controller-diagonal form.

    It maps u -> a|0> + b|1> and v -> a|0> - b|1>.
    """
    a, b = ms_controller_form(c, d)
    u, v = ms_controller_states(c, d, variant)
    e0 = (u + v) / (2 * a)
    e1 = (u - v) / (2 * b)
    return np.outer([1, 0], e0.conj()) + np.outer([0, 1], e1.conj())


def make_ms3_controller_form(a: float, b: float) -> ChannelSpec:
    """a|0>_C |Phi+>_AB + b|1>_C |Phi->_AB, laid out as A, B, C."""
    _check_ab(a, b)
    phi_p, phi_m = bell_vector("phi+"), bell_vector("phi-")
    amps = a * np.kron(phi_p, [1, 0]) + b * np.kron(phi_m, [0, 1])
    layout = _layout(["A", "B", "C"], [SENDER, RECEIVER, CONTROLLER])
    return ChannelSpec("ms3-rotated", PureState(amps, layout), {"a": a, "b": b})


def make_ms4_controller_form(a: float, b: float) -> ChannelSpec:
    """a|0>_C |GHZ+>_A1A2B + b|1>_C |GHZ->_A1A2B, laid out as A1, A2, B, C."""
    _check_ab(a, b)
    g_p = (_ket("000") + _ket("111")) / SQRT2
    g_m = (_ket("000") - _ket("111")) / SQRT2
    amps = a * np.kron(g_p, [1, 0]) + b * np.kron(g_m, [0, 1])
    layout = _layout(["A1", "A2", "B", "C"], [sender(1), sender(2), RECEIVER, CONTROLLER])
    return ChannelSpec("ms4-rotated", PureState(amps, layout), {"a": a, "b": b})


def _check_ab(a: float, b: float):
    if abs(a * a + b * b - 1.0) > ATOL:
        raise ValueError(f"need a^2 + b^2 = 1, got a={a}, b={b}")


def pghz_layout(m_controllers: int, copy: int | None = None) -> SystemLayout:
    sfx = "" if copy is None else f"_{copy}"
    labels = [f"A1{sfx}", f"A2{sfx}"] + [f"C{m}{sfx}" for m in range(1, m_controllers + 1)] + [f"B{sfx}"]
    owners = [sender(1), sender(2)] + [controller(m) for m in range(1, m_controllers + 1)] + [RECEIVER]
    return _layout(labels, owners)


def make_pghz(a: float, b: float, m_controllers: int = 1, copy: int | None = None) -> ChannelSpec:
    """a|0...0> + b|1...1> over A1, A2, C1..CM, B (M + 3 qubits)."""
    _check_ab(a, b)
    if m_controllers < 1:
        raise ValueError("PGHZ channel needs at least one controller")
    n = m_controllers + 3
    amps = a * _ket("0" * n) + b * _ket("1" * n)
    return ChannelSpec("pghz", PureState(amps, pghz_layout(m_controllers, copy)),
                       {"a": a, "b": b, "M": m_controllers})


def make_pghz3(a: float, b: float) -> ChannelSpec:
    """Three-qubit a|000> + b|111> on sender A, receiver B, controller C."""
    _check_ab(a, b)
    amps = a * _ket("000") + b * _ket("111")
    layout = _layout(["A", "B", "C"], [SENDER, RECEIVER, CONTROLLER])
    return ChannelSpec("pghz3", PureState(amps, layout), {"a": a, "b": b})


BROWN_TERMS = (("001", "phi-"), ("010", "psi-"), ("100", "phi+"), ("111", "psi+"))


def make_brown() -> ChannelSpec:
    """Five-qubit Brown state over A1, A2 (sender), C (controller), B1, B2 (receiver)."""
    amps = sum(np.kron(_ket(prefix), bell_vector(bell)) for prefix, bell in BROWN_TERMS) / 2
    layout = _layout(["A1", "A2", "C", "B1", "B2"],
                     [SENDER, SENDER, CONTROLLER, RECEIVER, RECEIVER])
    return ChannelSpec("brown", PureState(amps, layout), {})


def ggc_layout(d: int, m_controllers: int, copy: int | None = None) -> SystemLayout:
    sfx = "" if copy is None else f"_{copy}"
    labels = [f"A0{sfx}"] + [f"C{m}{sfx}" for m in range(1, m_controllers + 1)] + [f"B{sfx}"]
    owners = [SENDER] + [controller(m) for m in range(1, m_controllers + 1)] + [RECEIVER]
    return _layout(labels, owners, d)


def make_ggc(coeffs: Sequence[complex], m_controllers: int = 1, copy: int | None = None) -> ChannelSpec:
    """sum_j a_j |j>^(M+2) over sender A0, controllers C1..CM and receiver B."""
    coeffs = np.asarray(coeffs, dtype=complex)
    d = coeffs.size
    if d < 2:
        raise ValueError("GGC state needs at least two coefficients")
    if abs(np.vdot(coeffs, coeffs).real - 1.0) > ATOL:
        raise ValueError("GGC coefficients are not normalised")
    if m_controllers < 1:
        raise ValueError("GGC channel needs at least one controller")
    n = m_controllers + 2
    amps = np.zeros(d ** n, dtype=complex)
    stride = sum(d ** k for k in range(n))
    amps[np.arange(d) * stride] = coeffs
    return ChannelSpec("ggc", PureState(amps, ggc_layout(d, m_controllers, copy)),
                       {"coeffs": tuple(coeffs), "M": m_controllers})


def generalized_bell_vector(d: int, k: int, l: int) -> np.ndarray:
    """d^(-1/2) sum_{j=0}^{d-1} exp(2 pi i jk/d) |j>|j+l mod d>."""
    if not (0 <= k < d and 0 <= l < d):
        raise ValueError(f"Bell indices ({k}, {l}) out of range for d={d}")
    amps = np.zeros(d * d, dtype=complex)
    j = np.arange(d)
    amps[j * d + (j + l) % d] = np.exp(2j * np.pi * j * k / d) / np.sqrt(d)
    return amps


def make_generalized_bell(d: int, k: int = 0, l: int = 0, labels=("A", "B"),
                          owners=(SENDER, RECEIVER)) -> ChannelSpec:
    return ChannelSpec("gbell", PureState(generalized_bell_vector(d, k, l), _layout(labels, owners, d)),
                       {"d": d, "k": k, "l": l})


def tensor_channels(channels: Sequence[ChannelSpec], name: str | None = None) -> ChannelSpec:
    """Kronecker product of channels with concatenated layouts."""
    if not channels:
        raise ValueError("need at least one channel")
    state = channels[0].state
    for ch in channels[1:]:
        state = kron(state, ch.state)  # duplicate labels are rejected by SystemLayout
    params = {"parts": tuple(ch.name for ch in channels)}
    return ChannelSpec(name or "+".join(ch.name for ch in channels), state, params)


CHANNEL_IDS = ("bell", "brown", "gbell", "ggc", "ghz", "ms3", "ms4", "pghz")
