"""Shot-level execution of the transistor pulse sequence.

One shot: prepare the qubit in (|g>+|e>)/sqrt2, reflect the gate pulse off
cavity I (conditional phase per photon), close the Ramsey loop with a second
pi/2 of phase theta (plus an optional pi_ef), then transmit the signal window
through cavity II with possible qubit jumps, and read out the transmitted
photon number through the linear detection chain.

The gate stage is modeled in the Fock basis: an instantaneous
conditional-phase-plus-loss channel whose scalar statistics (eta, dark flip)
carry the pulse-bandwidth and internal-loss imperfections computed in
:mod:`photon_transistor.cavity`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

import numpy as np

from . import measurement
from .cavity import (
    CavityParams,
    PulseShape,
    gate_carrier_frequency,
    gating_efficiency,
    pulse_survival,
    reflection_coeff,
    shifted_frequency,
    transmission_coeff,
)
from .errors import InsufficientDataError
from .hilbert import DEFAULT_FOCK_CUTOFF, QuantumState
from .qubit import exponential_time

if TYPE_CHECKING:  # pragma: no cover
    from .device import DeviceParams

GATE_SOURCES = ("coherent", "single_photon")
SIGNAL_TARGETS = ("resonant_with_e", "resonant_with_f", "bare")


@dataclass(frozen=True)
class ProtocolConfig:
    """Pulse-sequence settings for one experiment.

    theta: phase of the second pi/2 pulse (0 = normally open, pi = normally
    closed).  subspace "gf" adds the pi_ef pulse after the second pi/2, so the
    signal stage sees the larger |f>-state dispersive shift.  ``gate_source``
    selects Poissonian weak-coherent statistics or an ideal 0/1 single-photon
    source emitting one photon with probability n_g.
    """

    theta: float = 0.0
    subspace: str = "ge"
    n_g: float = 0.18
    gate_pulse: PulseShape = field(default_factory=lambda: PulseShape("gaussian", 960.0))
    n_s: float = 37.2
    signal_duration: float = 10.0  # us
    signal_detuning_target: str = "resonant_with_e"
    eta_override: float | None = None
    dark_flip: float = 0.04
    n_shots: int = 10000
    seed: int = 12345
    gate_source: str = "coherent"
    signal_flip_rate_per_photon: float = 1e-7  # 1/(us * signal photon)
    fock_cutoff: int = DEFAULT_FOCK_CUTOFF

    def __post_init__(self):
        if self.n_g < 0 or self.n_s < 0:
            raise ValueError("photon numbers must be >= 0")
        if self.n_shots < 1:
            raise ValueError("n_shots must be >= 1")
        if self.subspace not in ("ge", "gf"):
            raise ValueError(f"unknown subspace {self.subspace!r}")
        if self.gate_source not in GATE_SOURCES:
            raise ValueError(f"unknown gate_source {self.gate_source!r}")
        if self.signal_detuning_target not in SIGNAL_TARGETS:
            raise ValueError(f"unknown signal_detuning_target {self.signal_detuning_target!r}")
        if not 0.0 <= self.dark_flip <= 1.0:
            raise ValueError("dark_flip must be a probability")
        if self.eta_override is not None and not 0.0 <= self.eta_override <= 1.0:
            raise ValueError("eta_override must be a probability")
        if self.gate_source == "single_photon" and self.n_g > 1.0:
            raise ValueError("single_photon source needs n_g <= 1")
        if self.signal_duration <= 0:
            raise ValueError("signal_duration must be positive")


@dataclass(frozen=True)
class ShotRecord:
    """Outcome of one Monte Carlo trial."""

    gate_flip_happened: bool
    qubit_level_at_signal_start: str
    jump_time: float | None
    true_transmitted_photons: float
    detected_reading: float | None = None
    label: str | None = None
    conditional_gate_field: QuantumState | None = None


# ---------------------------------------------------------------------------
# gate stage


def _loss_kraus(r_amp: complex, d: int) -> list[np.ndarray]:
    """Beam-splitter Kraus set for complex transmissivity r (|r| <= 1)."""
    s = abs(r_amp) ** 2
    loss_amp = math.sqrt(max(1.0 - s, 0.0))
    ops = []
    for k in range(d):
        e = np.zeros((d, d), dtype=complex)
        for n in range(k, d):
            e[n - k, n] = math.sqrt(math.comb(n, k)) * r_amp ** (n - k) * loss_amp**k
        ops.append(e)
    return ops


def gate_interaction(qubit_field: QuantumState, c: CavityParams, p: PulseShape) -> QuantumState:
    """Reflect the gate field off cavity I, entangling it with the qubit.

    Each Fock component |n> acquires the branch reflection amplitude r_level^n
    (relative phase (-1)^n between |g> and |e> at the matched operating point)
    and photons survive with probability |r|^2.  For a lossless cavity and a
    |1> input on (|g>+|e>)/sqrt2 this reproduces the maximally entangled
    (|1>|g> - |1>|e>)/sqrt2 up to a global phase.
    """
    if len(qubit_field.dims) != 2 or qubit_field.dims[0] != 3:
        raise ValueError("gate_interaction expects dims = (3, field_cutoff)")
    d = qubit_field.dims[1]
    f_c = gate_carrier_frequency(c, p)
    branch = {lev: reflection_coeff(c, f_c, lev) for lev in ("g", "e", "f")}
    kraus_by_level = {lev: _loss_kraus(r, d) for lev, r in branch.items()}
    proj = [np.zeros((3, 3), dtype=complex) for _ in range(3)]
    for i in range(3):
        proj[i][i, i] = 1.0
    rho = np.zeros_like(qubit_field.rho)
    for k in range(d):
        m = sum(
            np.kron(proj[i], kraus_by_level[lev][k])
            for i, lev in enumerate(("g", "e", "f"))
        )
        rho += m @ qubit_field.rho @ m.conj().T
    return QuantumState(qubit_field.dims, rho)


def _flip_given_photons(n: int, eta: float, dark_flip: float) -> float:
    """Flip-per-photon parity model: odd photon numbers flip with prob eta."""
    return eta if n % 2 == 1 else dark_flip


def coherent_flip_probability(n_g: float, eta: float, dark_flip: float = 0.0) -> float:
    """Qubit flip probability under a weak coherent gate pulse.

    beta = sum_n Poisson(n; n_g) q(n) with q(odd) = eta and q(even) = dark_flip,
    truncated once the Poisson tail drops below 1e-10.
    """
    if not 0.0 <= eta <= 1.0 or not 0.0 <= dark_flip <= 1.0:
        raise ValueError("eta and dark_flip must be probabilities")
    if n_g < 0:
        raise ValueError("n_g must be >= 0")
    if n_g == 0.0:
        return dark_flip
    beta = 0.0
    cum = 0.0
    n = 0
    w = math.exp(-n_g)
    n_stop = 20 + int(2 * n_g + 10 * math.sqrt(n_g))  # Poisson tail is gone by here
    while True:
        beta += w * _flip_given_photons(n, eta, dark_flip)
        cum += w
        if 1.0 - cum < 1e-10 or n > n_stop:
            break
        n += 1
        w *= n_g / n
    return beta


# ---------------------------------------------------------------------------
# shot sampling


def _signal_frequency(cfg: ProtocolConfig, device: "DeviceParams") -> float:
    c = device.cavity_II
    if cfg.signal_detuning_target == "resonant_with_e":
        return shifted_frequency(c, "e")
    if cfg.signal_detuning_target == "resonant_with_f":
        return shifted_frequency(c, "f")
    return c.f0 + device.semiclassical.bare_offset


def resolve_eta(cfg: ProtocolConfig, device: "DeviceParams") -> float:
    if cfg.eta_override is not None:
        return cfg.eta_override
    return gating_efficiency(device.cavity_I, cfg.gate_pulse)


def _sample_gate_photons(cfg: ProtocolConfig, rng: np.random.Generator) -> int:
    if cfg.gate_source == "single_photon":
        return int(rng.random() < cfg.n_g)
    return int(rng.poisson(cfg.n_g))


def _excited_level(cfg: ProtocolConfig) -> str:
    return "f" if cfg.subspace == "gf" else "e"


def run_shot(cfg: ProtocolConfig, device: "DeviceParams", rng) -> ShotRecord:
    """One trial of the full sequence; deterministic given the rng stream."""
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    eta = resolve_eta(cfg, device)

    n_photons = _sample_gate_photons(cfg, gen)
    flip = gen.random() < _flip_given_photons(n_photons, eta, cfg.dark_flip)

    # second pi/2 with phase theta closes the Ramsey loop; the gate photon's
    # conditional pi phase swaps the interference port
    p_ground = math.cos(cfg.theta / 2.0) ** 2 if flip else math.sin(cfg.theta / 2.0) ** 2
    level = "g" if gen.random() < p_ground else _excited_level(cfg)

    rates = device.qubit_rates
    extra = cfg.signal_flip_rate_per_photon * cfg.n_s
    if level == "g":
        rate = rates.thermal_excitation_rate + extra
        dest = "e"
    elif level == "e":
        rate = 1.0 / rates.T1_ge + extra
        dest = "g"
    else:
        rate = 1.0 / rates.T1_ef + extra
        dest = "e"
    t_jump = exponential_time(rate, gen)
    jump_time = t_jump if t_jump < cfg.signal_duration else None

    f_sig = _signal_frequency(cfg, device)
    t2 = {lev: abs(transmission_coeff(device.cavity_II, f_sig, lev)) ** 2 for lev in "gef"}
    if jump_time is None:
        true_tx = cfg.n_s * t2[level]
    else:
        frac = jump_time / cfg.signal_duration
        true_tx = cfg.n_s * (frac * t2[level] + (1.0 - frac) * t2[dest])

    reading = measurement.detect(true_tx, device.detection, gen)
    return ShotRecord(
        gate_flip_happened=bool(flip),
        qubit_level_at_signal_start=level,
        jump_time=jump_time,
        true_transmitted_photons=true_tx,
        detected_reading=reading,
    )


def run_experiment(cfg: ProtocolConfig, device: "DeviceParams") -> list[ShotRecord]:
    """n_shots independent trials with per-shot spawned RNG streams."""
    eta = resolve_eta(cfg, device)
    cfg_fixed = replace(cfg, eta_override=eta)
    streams = np.random.SeedSequence(cfg.seed).spawn(cfg.n_shots)
    return [run_shot(cfg_fixed, device, np.random.default_rng(s)) for s in streams]


def label_records(records: list[ShotRecord], threshold: float | None = None):
    """Classify detected readings into on/off; returns (records, threshold, counts)."""
    readings = [r.detected_reading for r in records]
    if any(v is None for v in readings):
        raise InsufficientDataError("records carry no detected readings")
    if threshold is None:
        threshold, labels, counts = measurement.kmeans_1d(readings)
    else:
        labels = [measurement.ON if v >= threshold else measurement.OFF for v in readings]
        counts = {
            measurement.ON: sum(1 for l in labels if l == measurement.ON),
            measurement.OFF: sum(1 for l in labels if l == measurement.OFF),
        }
    out = [replace(r, label=l) for r, l in zip(records, labels)]
    return out, threshold, counts


# ---------------------------------------------------------------------------
# conditional gate-field reconstruction


def _photon_prior(cfg: ProtocolConfig, n_max: int) -> np.ndarray:
    prior = np.zeros(n_max)
    if cfg.gate_source == "single_photon":
        prior[0] = 1.0 - cfg.n_g
        if n_max > 1:
            prior[1] = cfg.n_g
        return prior
    if cfg.n_g == 0.0:
        prior[0] = 1.0
        return prior
    n = np.arange(n_max, dtype=float)
    lgam = np.array([math.lgamma(k + 1) for k in range(n_max)])
    return np.exp(-cfg.n_g + n * math.log(cfg.n_g) - lgam)


def _binomial_loss_diag(n: int, survival: float, d: int) -> np.ndarray:
    """Diagonal Fock weights of |n><n| after per-photon survival s."""
    out = np.zeros(d)
    for k in range(min(n, d - 1) + 1):
        out[k] = math.comb(n, k) * survival**k * (1.0 - survival) ** (n - k)
    return out


def conditional_gate_field(
    records: list[ShotRecord],
    condition: str,
    cfg: ProtocolConfig,
    device: "DeviceParams",
) -> QuantumState:
    """Reflected gate-field state conditioned on the transistor label.

    Bayesian mixture over the source photon-number distribution: the label
    likelihood P(label | n) combines the parity flip model with the empirical
    per-branch label rates P(label | flip) estimated from the records, and the
    per-Fock reflected states carry the pulse-averaged reflection loss.
    """
    if condition not in (measurement.ON, measurement.OFF):
        raise ValueError("condition must be 'on' or 'off'")
    labeled = [r for r in records if r.label is not None]
    if not labeled:
        raise InsufficientDataError("no labeled records; classify the shots first")
    subset = [r for r in labeled if r.label == condition]
    if not subset:
        raise InsufficientDataError(f"no records labeled {condition!r}")

    n_flip = sum(1 for r in labeled if r.gate_flip_happened)
    n_noflip = len(labeled) - n_flip
    match_flip = sum(1 for r in labeled if r.gate_flip_happened and r.label == condition)
    match_noflip = sum(
        1 for r in labeled if not r.gate_flip_happened and r.label == condition
    )
    p_cond_flip = match_flip / n_flip if n_flip else 0.0
    p_cond_noflip = match_noflip / n_noflip if n_noflip else 0.0

    eta = resolve_eta(cfg, device)
    d = cfg.fock_cutoff
    prior = _photon_prior(cfg, d)
    q = np.array([_flip_given_photons(n, eta, cfg.dark_flip) for n in range(d)])
    likelihood = q * p_cond_flip + (1.0 - q) * p_cond_noflip
    post = prior * likelihood
    total = post.sum()
    if total <= 0:
        raise InsufficientDataError("condition has zero posterior probability")
    post /= total

    s = pulse_survival(device.cavity_I, cfg.gate_pulse)
    diag = np.zeros(d)
    for n, w in enumerate(post):
        if w > 0:
            diag += w * _binomial_loss_diag(n, s, d)
    rho = np.diag(diag.astype(complex))
    return QuantumState((d,), rho / np.trace(rho))
