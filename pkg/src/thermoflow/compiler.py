"""Encode linear-algebra problems into device configurations and decode the
stationary drain flows back into numbers.

Encoding: a non-negative vector a (or each matrix row) becomes a mode's
normalized coupling weights, the input vector b becomes reservoir occupancies
via temperatures, and the result is read off the spectral energy flow into the
cold drain: value = -J[kappa][0] / (w_kappa * gamma[kappa][0]), times the
recorded row scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from thermoflow import physics
from thermoflow.physics import (
    T_FLOOR,
    ConfigError,
    DeviceConfig,
    FlowReport,
    Mode,
    Reservoir,
    bose_occupancy,
    inverse_temperature,
)

# Absolute floating-point cushion folded into every error bound; covers the
# occupancy round trip (~1e-15 rel) and flow-sum cancellation across reservoirs.
_FP_CUSHION = 1e-11


@dataclass(frozen=True)
class EncodeSettings:
    """Compiler knobs with their defaults.

    drain_ratio is gamma[kappa][0] / sum_{j>=1} gamma[kappa][j]; it must be
    small for the cold-drain readout to be accurate. total_rate only sets flow
    magnitudes and settling time and cancels in decode.
    """

    base_frequency: float = 1.0
    drain_ratio: float = 1e-4
    total_rate: float = 1.0
    group_tol: float = 1e-3
    occupancy_floor: float = 1e-12

    def validate(self):
        if self.base_frequency <= 0.0:
            raise ConfigError("base_frequency must be positive")
        if not 0.0 < self.drain_ratio <= 0.01:
            raise ConfigError("drain_ratio must be in (0, 0.01]")
        if self.total_rate <= 0.0:
            raise ConfigError("total_rate must be positive")
        if not 0.0 < self.group_tol <= 0.1:
            raise ConfigError("group_tol must be in (0, 0.1]")
        if self.occupancy_floor <= 0.0:
            raise ConfigError("occupancy_floor must be positive")


@dataclass(frozen=True)
class GroupSpec:
    """One group of close-frequency modes computing against a shared input vector."""

    group_id: int
    mode_indices: tuple
    base_frequency: float
    spread: float  # relative half-width of the frequency layout
    max_occupancy_dev: float  # realized max relative occupancy deviation
    degenerate: bool  # True when the spread fell back to exactly 0
    input_occupancies: np.ndarray  # effective input vector at the base frequency


@dataclass(frozen=True)
class CompiledProgram:
    """A target problem mapped onto a device plus everything needed to decode."""

    config: DeviceConfig
    groups: tuple
    drain_ratio: float
    row_scales: np.ndarray
    occupancy_floor: float
    target_shape: tuple
    row_dots: np.ndarray  # per-mode dot of normalized row with its group input
    kind: str = "matvec"  # "scalar" | "matvec"


@dataclass(frozen=True)
class DecodedResult:
    """Decoded output values with the raw drain flows and per-entry error bounds."""

    values: np.ndarray
    raw_flows: np.ndarray
    error_bound: np.ndarray

    @property
    def value(self) -> float:
        """Scalar view for single-output programs."""
        return float(np.asarray(self.values).reshape(-1)[0])


def _check_matrix(p: np.ndarray):
    if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] < 1:
        raise ConfigError("matrix must be 2-D and non-empty")
    if np.any(p < 0.0):
        raise ConfigError("matrix entries must be non-negative")
    if np.any(p.sum(axis=1) <= 0.0):
        raise ConfigError("matrix has an all-zero row")


def _group_deviation(base_frequency, delta, temperatures, base_occ):
    """Max relative occupancy deviation over non-drain reservoirs at the two
    extreme frequencies base*(1 +- delta)."""
    dev = 0.0
    for sign in (-1.0, 1.0):
        occ = bose_occupancy(base_frequency * (1.0 + sign * delta), temperatures[1:])
        dev = max(dev, float(np.max(np.abs(occ - base_occ) / base_occ)))
    return dev


def _solve_spread(base_frequency, temperatures, group_tol):
    """Largest relative half-width delta such that reservoir occupancies across
    [w(1-delta), w(1+delta)] stay within group_tol of their base values.

    Bisection; falls back to delta = 0 (degenerate, exactly equal frequencies)
    when even a vanishing spread violates the tolerance.
    """
    base_occ = bose_occupancy(base_frequency, temperatures[1:])
    lo, hi = 0.0, 0.9
    if _group_deviation(base_frequency, 1e-13, temperatures, base_occ) > group_tol:
        return 0.0, True
    if _group_deviation(base_frequency, hi, temperatures, base_occ) <= group_tol:
        return hi, False
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if _group_deviation(base_frequency, mid, temperatures, base_occ) <= group_tol:
            lo = mid
        else:
            hi = mid
    return lo, False


def _compile_groups(tasks, b, settings: EncodeSettings, kind: str) -> CompiledProgram:
    """Shared encoder: tasks is a list of (matrix, base_frequency) sharing the
    reservoir set; group 1's base frequency defines the temperature encoding."""
    settings.validate()
    b = np.asarray(b, dtype=float)
    if b.ndim != 1:
        raise ConfigError("input vector must be 1-D")
    if np.any(b < 0.0):
        raise ConfigError("input vector entries must be non-negative")
    n = b.size

    b_floored = np.maximum(b, settings.occupancy_floor)
    w_base = tasks[0][1]
    temps = np.empty(n + 1)
    temps[0] = T_FLOOR
    temps[1:] = inverse_temperature(w_base, b_floored)

    modes = []
    rows = []
    groups = []
    row_scales = []
    row_dots = []
    for gid, (p, w_g) in enumerate(tasks, start=1):
        p = np.asarray(p, dtype=float)
        _check_matrix(p)
        if p.shape[1] != n:
            raise ConfigError(
                f"matrix has {p.shape[1]} columns but input vector has {n} entries"
            )
        if w_g <= 0.0:
            raise ConfigError("group base frequency must be positive")
        m = p.shape[0]
        scales = p.sum(axis=1)
        p_hat = p / scales[:, None]

        if m == 1:
            spread, degenerate = 0.0, False
            deltas = np.zeros(1)
        else:
            spread, degenerate = _solve_spread(w_g, temps, settings.group_tol)
            deltas = np.linspace(-spread, spread, m)

        input_occ = bose_occupancy(w_g, temps[1:])
        base_occ = input_occ.copy()
        max_dev = 0.0
        start = len(modes)
        for i in range(m):
            w_kappa = w_g * (1.0 + deltas[i])
            modes.append(Mode(frequency=w_kappa, group_id=gid))
            occ_i = bose_occupancy(w_kappa, temps[1:])
            max_dev = max(max_dev, float(np.max(np.abs(occ_i - base_occ) / base_occ)))
            row = np.empty(n + 1)
            row[1:] = settings.total_rate * p_hat[i]
            row[0] = settings.drain_ratio * row[1:].sum()
            rows.append(row)
            row_scales.append(scales[i])
            row_dots.append(float(p_hat[i] @ input_occ))
        groups.append(
            GroupSpec(
                group_id=gid,
                mode_indices=tuple(range(start, start + m)),
                base_frequency=w_g,
                spread=spread,
                max_occupancy_dev=max_dev,
                degenerate=degenerate,
                input_occupancies=input_occ,
            )
        )

    _check_group_separation(groups)

    reservoirs = [Reservoir(temperature=T_FLOOR, is_drain=True)]
    reservoirs += [Reservoir(temperature=t) for t in temps[1:]]
    config = DeviceConfig(
        modes=tuple(modes), reservoirs=tuple(reservoirs), couplings=np.array(rows)
    )
    return CompiledProgram(
        config=config,
        groups=tuple(groups),
        drain_ratio=settings.drain_ratio,
        row_scales=np.array(row_scales),
        occupancy_floor=settings.occupancy_floor,
        target_shape=tuple(np.asarray(tasks[0][0]).shape),
        row_dots=np.array(row_dots),
        kind=kind,
    )


def _check_group_separation(groups):
    """Groups must sit at well-separated base frequencies: gaps at least 10x the
    larger intra-group absolute spread, and frequency intervals disjoint."""
    if len(groups) < 2:
        return
    spans = []
    for g in groups:
        half = g.spread * g.base_frequency
        spans.append((g.base_frequency - half, g.base_frequency + half, g))
    spans.sort(key=lambda s: s[0])
    for (lo1, hi1, g1), (lo2, hi2, g2) in zip(spans, spans[1:]):
        if lo2 <= hi1:
            raise ConfigError(
                f"groups {g1.group_id} and {g2.group_id} overlap in frequency"
            )
        gap = g2.base_frequency - g1.base_frequency
        need = 10.0 * max(g1.spread * g1.base_frequency, g2.spread * g2.base_frequency)
        if gap < need:
            raise ConfigError(
                f"groups {g1.group_id} and {g2.group_id} are closer than 10x "
                f"the intra-group spread"
            )


def encode_scalar_product(
    a,
    b,
    base_frequency: float = 1.0,
    drain_ratio: float = 1e-4,
    total_rate: float = 1.0,
    occupancy_floor: float = 1e-12,
) -> CompiledProgram:
    """Compile the scalar product (a, b) of non-negative vectors onto one mode.

    a is auto-normalized with the scale recorded; b maps to reservoir
    occupancies via temperatures (zero entries are floored, see EncodeSettings).
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 1:
        raise ConfigError("a must be a 1-D vector")
    settings = EncodeSettings(
        base_frequency=base_frequency,
        drain_ratio=drain_ratio,
        total_rate=total_rate,
        occupancy_floor=occupancy_floor,
    )
    return _compile_groups([(a[None, :], base_frequency)], b, settings, "scalar")


def encode_matvec(
    p,
    b,
    base_frequency: float = 1.0,
    group_tol: float = 1e-3,
    drain_ratio: float = 1e-4,
    total_rate: float = 1.0,
    occupancy_floor: float = 1e-12,
) -> CompiledProgram:
    """Compile P @ b for a non-negative row matrix P: one mode per row, frequencies
    spread as widely as the group-closeness tolerance allows."""
    p = np.asarray(p, dtype=float)
    settings = EncodeSettings(
        base_frequency=base_frequency,
        drain_ratio=drain_ratio,
        total_rate=total_rate,
        group_tol=group_tol,
        occupancy_floor=occupancy_floor,
    )
    return _compile_groups([(p, base_frequency)], b, settings, "matvec")


def encode_parallel_matvec(
    tasks,
    b,
    group_tol: float = 1e-3,
    drain_ratio: float = 1e-4,
    total_rate: float = 1.0,
    occupancy_floor: float = 1e-12,
) -> CompiledProgram:
    """Compile several matrices at well-separated base frequencies sharing one
    reservoir set. Group 1 computes against b; group g computes against the
    occupancy vector re-evaluated at its own base frequency (functionally
    dependent on b). tasks: sequence of (matrix, base_frequency)."""
    if not tasks:
        raise ConfigError("need at least one (matrix, base_frequency) task")
    tasks = [(np.asarray(p, dtype=float), float(w)) for p, w in tasks]
    settings = EncodeSettings(
        base_frequency=tasks[0][1],
        drain_ratio=drain_ratio,
        total_rate=total_rate,
        group_tol=group_tol,
        occupancy_floor=occupancy_floor,
    )
    return _compile_groups(tasks, b, settings, "matvec")


def estimate_encoding_error(program: CompiledProgram) -> np.ndarray:
    """Per-mode upper bound on |decoded - ideal row dot input|.

    Terms, per mode kappa with normalized row dot d = row_dots[kappa]:
      - drain-weight term  eps/(1+eps) * d: the drain's share of the coupling
        weights suppresses the readout by 1/(1+eps);
      - group-spread term  max_occupancy_dev * d: the mode reads occupancies at
        its own frequency, not the group base;
      - occupancy floor: zero input entries were floored;
      - residual drain occupancy at the group base frequency;
      - a fixed floating-point cushion.
    All scaled by the recorded row scale.
    """
    eps = program.drain_ratio
    bounds = np.empty(program.row_dots.size)
    for group in program.groups:
        n0 = bose_occupancy(group.base_frequency, T_FLOOR)
        for kappa in group.mode_indices:
            d = program.row_dots[kappa]
            raw = (
                eps / (1.0 + eps) * d
                + group.max_occupancy_dev * d
                + program.occupancy_floor
                + n0
                + _FP_CUSHION * (d + 1.0)
            )
            bounds[kappa] = program.row_scales[kappa] * raw
    return bounds


def _decode_modes(program: CompiledProgram, flows: FlowReport, mode_indices):
    config = program.config
    values = []
    raw = []
    for kappa in mode_indices:
        g0 = config.couplings[kappa, 0]
        if g0 <= 0.0:
            raise ConfigError(f"mode {kappa} has zero drain coupling; decode undefined")
        j0 = flows.per_channel[kappa, 0]
        w = config.modes[kappa].frequency
        values.append(program.row_scales[kappa] * (-j0 / (w * g0)))
        raw.append(j0)
    return np.array(values), np.array(raw)


def decode_scalar_product(program: CompiledProgram, flows: FlowReport) -> DecodedResult:
    """Read the scalar product off the drain flow: row_scale * (-J_0 / (w gamma_0))."""
    values, raw = _decode_modes(program, flows, program.groups[0].mode_indices[:1])
    bound = estimate_encoding_error(program)[:1]
    return DecodedResult(values=values, raw_flows=raw, error_bound=bound)


def decode_matvec(program: CompiledProgram, flows: FlowReport) -> DecodedResult:
    """Per-mode decode assembled into the output vector, with per-entry bounds."""
    if len(program.groups) != 1:
        raise ConfigError(
            "decode_matvec expects a single group; use parallel_group_products"
        )
    values, raw = _decode_modes(program, flows, program.groups[0].mode_indices)
    return DecodedResult(
        values=values, raw_flows=raw, error_bound=estimate_encoding_error(program)
    )


def parallel_group_products(program: CompiledProgram, flows: FlowReport):
    """Decode every group of a multi-group program; group g's result approximates
    P_g @ n(w_g, T), the input re-evaluated at that group's base frequency."""
    bounds = estimate_encoding_error(program)
    results = []
    for group in program.groups:
        values, raw = _decode_modes(program, flows, group.mode_indices)
        results.append(
            DecodedResult(
                values=values,
                raw_flows=raw,
                error_bound=bounds[list(group.mode_indices)],
            )
        )
    return results


def signed_split(a):
    """Split A into non-negative parts with A = A_plus - A_minus exactly."""
    a = np.asarray(a, dtype=float)
    return np.where(a > 0.0, a, 0.0), np.where(a < 0.0, -a, 0.0)


def run_matvec(p, b, **settings) -> DecodedResult:
    """Convenience end-to-end pipeline: encode, solve stationary flows, decode."""
    program = encode_matvec(p, b, **settings)
    return decode_matvec(program, physics.stationary_flows(program.config))


def signed_matvec(a, b, **settings) -> DecodedResult:
    """A @ b for a mixed-sign matrix via the split A = A_plus - A_minus.

    Each part runs through the non-negative pipeline; all-zero rows of a part
    contribute exactly 0 with zero bound. Error bounds of the parts add.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ConfigError("matrix must be 2-D")
    if np.any(np.all(a == 0.0, axis=1)):
        raise ConfigError("matrix has an all-zero row")
    a_plus, a_minus = signed_split(a)
    m = a.shape[0]

    values = np.zeros(m)
    bounds = np.zeros(m)
    raw = np.zeros((2, m))
    for sign, part, slot in ((1.0, a_plus, 0), (-1.0, a_minus, 1)):
        live = ~np.all(part == 0.0, axis=1)
        if not live.any():
            continue
        result = run_matvec(part[live], b, **settings)
        values[live] += sign * result.values
        bounds[live] += result.error_bound
        raw[slot, live] = result.raw_flows
    return DecodedResult(values=values, raw_flows=raw, error_bound=bounds)
