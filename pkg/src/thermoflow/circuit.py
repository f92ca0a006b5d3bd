"""Electrical analogy: per-mode star circuits and the crossbar equivalent.

Mapping per mode kappa: wire potential phi_j = n_j(w_kappa, T_j), nominal
conductance w_kappa gamma[kappa][j]. Branch currents are measured in units of
energy flow per frequency quantum, I = J/w: factoring the mode frequency out
of the current scale means the solves use branch resistance 1/gamma, and then
Ohm's law, the weighted node potential (same formula as the weighted occupancy)
and Kirchhoff closure all hold simultaneously with I * w reproducing the
stationary flows exactly. Stacking the per-mode stars and lifting every
reservoir column to a common bar potential Phi_j through series resistors
r[kappa][j] gives the crossbar.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from thermoflow.physics import (
    ConfigError,
    DeviceConfig,
    occupancy_table,
    stationary_flows,
)

# Branch status labels in a crossbar.
ABSENT = "absent"  # zero coupling: no element at this crossing
SERIES = "series"  # current-carrying branch with a computed series resistor
NEGATIVE = "negative"  # series resistor came out negative (flagged, kept as computed)
PASSTHROUGH = "passthrough"  # zero current and phi == Phi: r = 0 works
OPEN = "open"  # zero current but phi != Phi: branch left disconnected


class SolvabilityError(ValueError):
    """A bar-potential policy violates its solvability condition."""


@dataclass(frozen=True)
class StarCircuit:
    """n wires with resistances R_j and end potentials phi_j joined at one node.

    labels optionally records which reservoir index each wire corresponds to
    (zero-coupling links are omitted as open branches).
    """

    resistances: np.ndarray
    potentials: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        r = np.asarray(self.resistances, dtype=float)
        p = np.asarray(self.potentials, dtype=float)
        if r.shape != p.shape or r.ndim != 1 or r.size == 0:
            raise ConfigError("resistances and potentials must be equal-length vectors")
        if np.any(r <= 0.0):
            raise ConfigError("resistances must be positive")
        object.__setattr__(self, "resistances", r)
        object.__setattr__(self, "potentials", p)


@dataclass(frozen=True)
class CrossbarCircuit:
    """Crossbar equivalent of a device: K mode bars crossing n+1 reservoir bars."""

    frequencies: np.ndarray  # (K,)
    conductances: np.ndarray  # (K, n+1), w_kappa gamma[kappa][j]; 0 marks absent
    node_potentials: np.ndarray  # (K, n+1), phi[kappa][j] = n_j(w_kappa, T_j)
    bar_potentials: np.ndarray  # (n+1,), Phi_j
    series_resistors: np.ndarray  # (K, n+1), r[kappa][j]
    branch_status: np.ndarray  # (K, n+1), status labels
    currents: np.ndarray  # (K, n+1), I[kappa][j] = J[kappa][j]/w_kappa


def star_node_potential(circuit: StarCircuit) -> float:
    """Central-node potential: conductance-weighted mean of the wire potentials."""
    g = 1.0 / circuit.resistances
    return float((circuit.potentials * g).sum() / g.sum())


def star_currents(circuit: StarCircuit) -> np.ndarray:
    """Wire currents I_j = (phi_j - phi_tilde)/R_j; they sum to zero (Kirchhoff)."""
    return (circuit.potentials - star_node_potential(circuit)) / circuit.resistances


def oqs_to_star(config: DeviceConfig, mode_index: int) -> StarCircuit:
    """Map one mode to its star circuit: phi_j = n_j(w, T_j), R_j = 1/gamma so the
    Ohm currents come out in J/w units (star_currents(...) * w equals the flows).

    Zero-coupling links become open branches and are omitted; the returned
    labels name the included reservoirs.
    """
    row = config.couplings[mode_index]
    occ = occupancy_table(config)[mode_index]
    included = np.flatnonzero(row > 0.0)
    return StarCircuit(
        resistances=1.0 / row[included],
        potentials=occ[included],
        labels=tuple(int(j) for j in included),
    )


def _resolve_bar_potentials(phi, active, policy, group_tol):
    """Phi_j per policy. Columns with no active branch get Phi_j = 0."""
    k, n1 = phi.shape
    col_max = np.where(active, phi, -np.inf).max(axis=0)
    has_branch = active.any(axis=0)
    col_max = np.where(has_branch, col_max, 0.0)

    if policy == "max":
        return col_max
    if isinstance(policy, tuple) and len(policy) == 2 and policy[0] == "fixed":
        value = np.broadcast_to(np.asarray(policy[1], dtype=float), (n1,)).copy()
        bad = has_branch & (value < col_max)
        if bad.any():
            j = int(np.flatnonzero(bad)[0])
            raise SolvabilityError(
                f"fixed bar potential {value[j]} below max node potential "
                f"{col_max[j]} on reservoir bar {j} (need Phi_j >= max_kappa n_j)"
            )
        return value
    if policy == "grouped":
        # Valid only when every column's active potentials agree within group_tol:
        # then Phi_j is that shared value and every series resistor is 0.
        for j in range(n1):
            vals = phi[active[:, j], j]
            if vals.size == 0:
                continue
            scale = max(abs(vals).max(), 1e-300)
            # deviation from the column midpoint, so modes compiled against a
            # group tolerance pass the same tolerance here
            if 0.5 * (vals.max() - vals.min()) > group_tol * scale:
                raise SolvabilityError(
                    f"grouped policy needs matching occupancies on bar {j}; "
                    f"spread exceeds tolerance {group_tol}"
                )
        return col_max
    raise ConfigError(f"unknown bar potential policy: {policy!r}")


def build_crossbar(
    config: DeviceConfig, policy="max", group_tol: float = 1e-3
) -> CrossbarCircuit:
    """Construct the crossbar with series resistors r = (Phi_j - phi)/I per branch.

    policy: "max" (Phi_j = max_kappa phi[kappa][j], default), ("fixed", value(s))
    with value >= that max, or "grouped" (all r = 0; only valid when the modes
    share occupancies within group_tol). Zero-current branches get r = 0 and are
    marked passthrough when phi == Phi_j, otherwise open. Negative resistors
    (current flowing out of a reservoir below its bar potential) are kept as
    computed but flagged.
    """
    flows = stationary_flows(config)
    w = config.frequencies
    phi = occupancy_table(config)
    g = config.couplings
    active = g > 0.0
    currents = np.where(active, flows.per_channel / w[:, None], 0.0)

    bar = _resolve_bar_potentials(phi, active, policy, group_tol)

    k, n1 = g.shape
    r = np.zeros((k, n1))
    status = np.full((k, n1), ABSENT, dtype=object)
    if policy == "grouped":
        status[active] = PASSTHROUGH
    else:
        for kappa in range(k):
            for j in range(n1):
                if not active[kappa, j]:
                    continue
                i = currents[kappa, j]
                drop = bar[j] - phi[kappa, j]
                if i != 0.0:
                    r[kappa, j] = drop / i
                    status[kappa, j] = NEGATIVE if r[kappa, j] < 0.0 else SERIES
                elif drop == 0.0:
                    status[kappa, j] = PASSTHROUGH
                else:
                    status[kappa, j] = OPEN

    r[r == 0.0] = 0.0  # normalize -0.0 from zero drops over negative currents
    return CrossbarCircuit(
        frequencies=w,
        conductances=w[:, None] * g,
        node_potentials=phi,
        bar_potentials=bar,
        series_resistors=r,
        branch_status=status,
        currents=currents,
    )


def crossbar_currents(crossbar: CrossbarCircuit) -> np.ndarray:
    """Re-solve the crossbar forward: per mode bar, a star with branch resistance
    R + r and source potentials Phi_j; open and absent branches carry no current.
    Reproduces the mapped currents (hence J/w) for any Phi policy.

    Degenerate case: with a uniform Phi across reservoir bars, the derived
    series resistors make the net branch conductance sum to exactly zero, so
    Kirchhoff alone leaves the mode-bar potential free (any value satisfies the
    node equation). The free potential is then pinned from the inner star
    (junction potentials weighted by the main conductances), which is the limit
    every non-degenerate perturbation of Phi selects.
    """
    k, n1 = crossbar.conductances.shape
    out = np.zeros((k, n1))
    for kappa in range(k):
        connected = [
            j
            for j in range(n1)
            if crossbar.branch_status[kappa, j] in (SERIES, NEGATIVE, PASSTHROUGH)
        ]
        if not connected:
            continue
        # Branch resistance in J/w current units: 1/gamma + r, with
        # 1/gamma = w / (nominal conductance).
        g_main = crossbar.conductances[kappa, connected] / crossbar.frequencies[kappa]
        r_tot = 1.0 / g_main + crossbar.series_resistors[kappa, connected]
        phi = crossbar.bar_potentials[connected]
        g = 1.0 / r_tot
        if abs(g.sum()) > 1e-8 * np.abs(g).sum():
            node = (phi * g).sum() / g.sum()
        else:
            inner = crossbar.node_potentials[kappa, connected]
            node = (inner * g_main).sum() / g_main.sum()
        out[kappa, connected] = (phi - node) * g
    return out


# --- netlist export -----------------------------------------------------------
#
# SPICE-compatible subset, one element per line:
#   R<name> <node+> <node-> <ohms>
#   V<name> <node+> <node-> DC <volts>
# Header comment carries a content hash; trailing ".end". Node naming: star
# circuits use n_center / n_res<j>; crossbars use mode bars b_<kappa>,
# reservoir bars c_<j> and junction nodes x_<kappa>_<j>. Values are shortest
# round-trip float reprs, so export is byte-deterministic.


def _star_elements(circuit: StarCircuit):
    labels = circuit.labels or tuple(range(circuit.resistances.size))
    elements = []
    for j, res in zip(labels, circuit.resistances):
        elements.append(("R", f"R{j}", f"n_res{j}", "n_center", float(res)))
    for j, phi in zip(labels, circuit.potentials):
        elements.append(("V", f"V{j}", f"n_res{j}", "0", float(phi)))
    return elements


def _crossbar_elements(circuit: CrossbarCircuit):
    k, n1 = circuit.conductances.shape
    elements = []
    for j in range(n1):
        elements.append(("V", f"V{j}", f"c_{j}", "0", float(circuit.bar_potentials[j])))
    for kappa in range(k):
        for j in range(n1):
            if circuit.branch_status[kappa, j] in (ABSENT, OPEN):
                continue
            elements.append(
                (
                    "R",
                    f"Rs_{kappa}_{j}",
                    f"c_{j}",
                    f"x_{kappa}_{j}",
                    float(circuit.series_resistors[kappa, j]),
                )
            )
            elements.append(
                (
                    "R",
                    f"Rg_{kappa}_{j}",
                    f"x_{kappa}_{j}",
                    f"b_{kappa}",
                    float(circuit.frequencies[kappa] / circuit.conductances[kappa, j]),
                )
            )
    return elements


def format_netlist(header_hash: str, elements) -> str:
    lines = [f"* thermoflow netlist {header_hash}"]
    for kind, name, pos, neg, value in elements:
        if kind == "R":
            lines.append(f"{name} {pos} {neg} {value!r}")
        else:
            lines.append(f"{name} {pos} {neg} DC {value!r}")
    lines.append(".end")
    return "\n".join(lines) + "\n"


def parse_netlist(text: str):
    """Parse our own netlist subset back into (header_hash, elements); round-trips
    byte-identically through format_netlist."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("* thermoflow netlist "):
        raise ConfigError("missing netlist header")
    header_hash = lines[0].removeprefix("* thermoflow netlist ")
    if not lines[-1] == ".end":
        raise ConfigError("missing .end terminator")
    elements = []
    for line in lines[1:-1]:
        parts = line.split()
        if parts[0].startswith("R") and len(parts) == 4:
            elements.append(("R", parts[0], parts[1], parts[2], float(parts[3])))
        elif parts[0].startswith("V") and len(parts) == 5 and parts[3] == "DC":
            elements.append(("V", parts[0], parts[1], parts[2], float(parts[4])))
        else:
            raise ConfigError(f"unparseable netlist line: {line!r}")
    return header_hash, elements


def export_netlist(circuit, fmt: str = "spice") -> str:
    """Deterministic netlist text for a star or crossbar circuit."""
    if fmt != "spice":
        raise ConfigError(f"unsupported netlist format: {fmt!r}")
    if isinstance(circuit, StarCircuit):
        elements = _star_elements(circuit)
    elif isinstance(circuit, CrossbarCircuit):
        elements = _crossbar_elements(circuit)
    else:
        raise ConfigError(f"cannot export {type(circuit).__name__} as a netlist")
    digest = hashlib.sha256(
        "\n".join(repr(e) for e in elements).encode()
    ).hexdigest()[:16]
    return format_netlist(digest, elements)
