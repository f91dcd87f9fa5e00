"""Command line front end.

One executable, ``okd``, drives every experiment through a flat
ExperimentConfig. Settings come from an optional key=value config file plus
flags, flags winning. Every run writes a comma-separated table with a header
row (floats carry 12 significant digits) and a ``<out>.manifest`` companion
that echoes the full configuration; feeding a manifest back through
``--config`` reproduces the exact same output bytes.
"""

import argparse
import math
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

from . import __version__
from .addressing import (
    AddressRegistry,
    Topology,
    address_matched,
    allocate,
    capacity,
    export_registry,
    resolution_for_epsilon,
)
from .adversary import (
    GuessStrategy,
    ResetPolicy,
    eve_guess,
    offline_flip_attack,
    tap_session,
)
from .noise import NoiseConfig
from .optics import (
    PhaseFrame,
    UNIT_INPUT,
    channel_fields,
    forward_mzi,
    interference,
    measure,
    propagate,
    round_trip,
    visibility,
)
from .protocol import (
    ChannelConfig,
    ClassifierConfig,
    DUAL_REFERENCE,
    IDENTITY_REFERENCE,
    ProtocolVariant,
    run_reference,
    run_session,
)

COMMANDS = (
    "session",
    "sweep-fig2",
    "sweep-fig3",
    "sweep-fig4",
    "table1",
    "tableS1",
    "attack",
    "network-demo",
    "capacity",
)

SWEEP_STEP = math.pi / 100.0
TRACE_HEADER = ("slot", "x", "v_a", "y", "psi1", "z", "m_a", "v_b", "m_b", "final")


class ConfigError(ValueError):
    """Invalid or missing experiment configuration."""


@dataclass
class ExperimentConfig:
    command: str = ""
    slots: int = 1000
    variant: str = "dual"
    phi2: float = 0.0
    psi2: float = 0.0
    alice_knows: bool = True
    epsilon: float = 0.05
    seed: int = 12345
    noise_sigma: float = 0.0
    lock_interval: int = 1
    out: str = "okd-out.csv"


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("yes", "true", "1"):
        return True
    if lowered in ("no", "false", "0"):
        return False
    raise ConfigError(f"invalid value for field alice_knows: {text!r}")


def load_config_file(path: str) -> dict[str, str]:
    lines = Path(path).read_text().splitlines()
    values: dict[str, str] = {}
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"malformed config line: {raw!r}")
        values[key.strip()] = value.strip()
    return values


def build_config(
    file_values: dict[str, str] | None, flag_values: dict[str, object]
) -> ExperimentConfig:
    cfg = ExperimentConfig()
    known = {f.name: f.type for f in fields(ExperimentConfig)}
    if file_values:
        for key, text in file_values.items():
            if key == "artifact_version":  # reserved manifest key, ignored on load
                continue
            if key not in known:
                raise ConfigError(f"unknown config field: {key}")
            if key == "alice_knows":
                setattr(cfg, key, _parse_bool(text))
            else:
                caster = {"command": str, "variant": str, "out": str}.get(key)
                try:
                    if caster is None:
                        caster = int if key in ("slots", "seed", "lock_interval") else float
                    setattr(cfg, key, caster(text))
                except ValueError as exc:
                    raise ConfigError(f"invalid value for field {key}: {text!r}") from exc
    for key, value in flag_values.items():
        if value is not None:
            setattr(cfg, key, value)
    return cfg


def validate_config(cfg: ExperimentConfig) -> None:
    if cfg.command not in COMMANDS:
        raise ConfigError(
            f"invalid value for field command: {cfg.command!r} (choose from {', '.join(COMMANDS)})"
        )
    if cfg.slots < 1:
        raise ConfigError(f"invalid value for field slots: {cfg.slots} (must be >= 1)")
    if cfg.variant not in ("dual", "identity"):
        raise ConfigError(f"invalid value for field variant: {cfg.variant!r}")
    for name in ("phi2", "psi2"):
        value = getattr(cfg, name)
        if not 0.0 <= value <= math.pi:
            raise ConfigError(f"invalid value for field {name}: {value} (range [0, pi])")
    if not 0.0 < cfg.epsilon < 1.0:
        raise ConfigError(f"invalid value for field epsilon: {cfg.epsilon} (range (0, 1))")
    if cfg.noise_sigma < 0.0:
        raise ConfigError(f"invalid value for field noise_sigma: {cfg.noise_sigma}")
    if cfg.lock_interval < 0:
        raise ConfigError(f"invalid value for field lock_interval: {cfg.lock_interval}")


def _format_cell(value) -> str:
    if value is None:
        return "X"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def write_table(path: str | Path, header: tuple[str, ...], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_format_cell(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_manifest(cfg: ExperimentConfig) -> Path:
    path = Path(str(cfg.out) + ".manifest")
    lines = []
    for f in fields(ExperimentConfig):
        value = getattr(cfg, f.name)
        if isinstance(value, bool):
            text = "yes" if value else "no"
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append(f"{f.name}={text}")
    lines.append(f"artifact_version={__version__}")
    path.write_text("\n".join(lines) + "\n")
    return path


def _variant(cfg: ExperimentConfig) -> ProtocolVariant:
    return (
        ProtocolVariant.DUAL_RELATION
        if cfg.variant == "dual"
        else ProtocolVariant.IDENTITY_ONLY
    )


def _noise(cfg: ExperimentConfig) -> NoiseConfig:
    return NoiseConfig(
        phase_drift_sigma=cfg.noise_sigma,
        lock_interval=cfg.lock_interval,
        rng_seed=cfg.seed,
    )


def _trace_rows(traces):
    for t in traces:
        # an unclear forward reading keeps its visibility in the y column
        y_cell = t.v_a if t.y is None else t.y
        yield (t.slot_index, t.x, t.v_a, y_cell, t.psi1, t.z, t.m_a, t.v_b, t.m_b, t.final)


def _sweep_grid() -> list[float]:
    return [k * SWEEP_STEP for k in range(200)]


def _port_visibility(fields_pair) -> float:
    return visibility(abs(fields_pair.upper) ** 2, abs(fields_pair.lower) ** 2)


_SWEEP_QUANTITIES = {
    "V56": lambda f: _port_visibility(propagate(forward_mzi(f), UNIT_INPUT)),
    "IN56": lambda f: interference(propagate(forward_mzi(f), UNIT_INPUT)),
    "VB": lambda f: _port_visibility(round_trip(f, UNIT_INPUT)),
    "V78": lambda f: _port_visibility(channel_fields(f, UNIT_INPUT)),
    "IN78": lambda f: interference(channel_fields(f, UNIT_INPUT)),
}


def _frame_with(template: PhaseFrame, symbol: str, value: float) -> PhaseFrame:
    if symbol == "base":  # both base phases move together
        return replace(template, phi1=value, psi1=value)
    if symbol in ("phi1", "phi2", "psi1", "psi2"):
        return replace(template, **{symbol: value})
    raise ConfigError(f"unknown sweep symbol: {symbol}")


def sweep(
    quantity: str,
    template: PhaseFrame,
    symbol: str,
    start: float,
    stop: float,
    step: float,
) -> list[tuple[float, float]]:
    """Evaluate one named observable while a single phase walks a grid.

    ``symbol`` picks the phase that varies ("base" moves phi1 and psi1 in
    lockstep); the other phases come from ``template``. The grid runs from
    ``start`` to ``stop`` exclusive in increments of ``step``.
    """
    if quantity not in _SWEEP_QUANTITIES:
        raise ConfigError(f"unknown sweep quantity: {quantity}")
    if step <= 0.0:
        raise ConfigError(f"invalid value for field step: {step} (must be > 0)")
    count = int(math.floor((stop - start) / step + 1e-9))
    if count < 1:
        raise ConfigError("sweep range is empty")
    evaluate = _SWEEP_QUANTITIES[quantity]
    return [
        (start + k * step, evaluate(_frame_with(template, symbol, start + k * step)))
        for k in range(count)
    ]


def sweep_forward_rows(phi2: float) -> list[tuple[float, float, float]]:
    """Forward visibility and interference against the base phase, with the
    transmitter's control-phase compensation applied."""
    rows = []
    for base in _sweep_grid():
        frame = PhaseFrame(phi1=base + phi2, phi2=phi2, psi1=0.0, psi2=0.0)
        out = propagate(forward_mzi(frame), UNIT_INPUT)
        vis = visibility(abs(out.upper) ** 2, abs(out.lower) ** 2)
        rows.append((base, vis, interference(out)))
    return rows


def sweep_return_rows(phi2: float, psi2: float) -> list[tuple[float, float]]:
    """Round-trip visibility against the base phase with the receiver's base
    tracking the transmitter's, both uncompensated."""
    template = PhaseFrame(phi1=0.0, phi2=phi2, psi1=0.0, psi2=psi2)
    return sweep("VB", template, "base", 0.0, 2.0 * math.pi, SWEEP_STEP)


def sweep_inbound_rows(phi2: float, psi2: float) -> list[tuple[float, ...]]:
    """In-channel return pair observables against the tracked base phase."""
    rows = []
    for base in _sweep_grid():
        frame = PhaseFrame(phi1=base, phi2=phi2, psi1=base, psi2=psi2)
        f = channel_fields(frame, UNIT_INPUT)
        i7 = abs(f.upper) ** 2
        i8 = abs(f.lower) ** 2
        rows.append((base, i7, i8, visibility(i7, i8), interference(f)))
    return rows


def network_demo(
    n_nodes: int, slots: int, epsilon: float, seed: int, noise: NoiseConfig | None = None
) -> tuple[AddressRegistry, list[tuple]]:
    """Allocate a small registry, run one matched session per node and one
    deliberately mismatched pairing (first transmitter to third receiver)."""
    registry = AddressRegistry(Topology.N_TO_N, resolution_for_epsilon(epsilon))
    for k in range(n_nodes):
        allocate(registry, f"node-{k + 1}")
    rows = []
    pairings = [(k, k) for k in range(n_nodes)] + [(0, 2 % n_nodes)]
    for index, (tx, rx) in enumerate(pairings):
        tx_addr, rx_addr = registry.entries[tx], registry.entries[rx]
        matched = address_matched(tx_addr, rx_addr)
        channel = ChannelConfig(tx_addr.control_phase, rx_addr.control_phase, matched)
        _, keys = run_session(
            slots,
            channel=channel,
            noise=noise,
            classifier=ClassifierConfig(epsilon, seed + index),
        )
        final_bits = len(keys.final_bob)
        status = "accepted" if matched and final_bits > 0 else "rejected"
        rows.append(
            (
                tx_addr.label,
                rx_addr.label,
                tx_addr.control_phase,
                rx_addr.control_phase,
                matched,
                slots,
                final_bits,
                status,
            )
        )
    return registry, rows


def _run_session_command(cfg: ExperimentConfig) -> None:
    traces, keys = run_session(
        cfg.slots,
        channel=ChannelConfig(cfg.phi2, cfg.psi2, cfg.alice_knows),
        noise=_noise(cfg),
        variant=_variant(cfg),
        classifier=ClassifierConfig(cfg.epsilon, cfg.seed),
    )
    write_table(cfg.out, TRACE_HEADER, _trace_rows(traces))
    kept = len(keys.final_bob)
    print(
        f"session: {cfg.slots} slots, {kept} final bits, "
        f"keys match: {'yes' if keys.final_bob == keys.final_alice else 'no'}"
    )


def _run_attack_command(cfg: ExperimentConfig) -> None:
    traces, _ = run_session(
        cfg.slots,
        channel=ChannelConfig(cfg.phi2, cfg.psi2, cfg.alice_knows),
        noise=_noise(cfg),
        variant=_variant(cfg),
        classifier=ClassifierConfig(cfg.epsilon, cfg.seed),
    )
    records = tap_session(traces)
    outcomes = (
        ("random", eve_guess(records, GuessStrategy.RANDOM, rng_seed=cfg.seed + 1)),
        (
            "max-visibility",
            eve_guess(records, GuessStrategy.MAX_VISIBILITY, rng_seed=cfg.seed + 2),
        ),
        (
            "max-visibility-oracle",
            eve_guess(
                records,
                GuessStrategy.MAX_VISIBILITY,
                rng_seed=cfg.seed + 3,
                reference_oracle=True,
            ),
        ),
        (
            "offline-no-reset",
            offline_flip_attack(records, ResetPolicy.NO_RESET, rng_seed=cfg.seed + 4),
        ),
        (
            "offline-random-reset",
            offline_flip_attack(
                records, ResetPolicy.RANDOM_RESET, rng_seed=cfg.seed + 5, epoch_length=1
            ),
        ),
    )
    rows = [
        (name, cfg.slots, o.success_rate, o.mutual_information_estimate)
        for name, o in outcomes
    ]
    write_table(
        cfg.out, ("attack", "slots", "success_rate", "mutual_information_bits"), rows
    )


def run(cfg: ExperimentConfig) -> None:
    """Execute one configured command and write its table plus manifest."""
    validate_config(cfg)
    if cfg.command == "session":
        _run_session_command(cfg)
    elif cfg.command == "sweep-fig2":
        write_table(cfg.out, ("phi1", "V56", "IN56"), sweep_forward_rows(cfg.phi2))
    elif cfg.command == "sweep-fig3":
        write_table(cfg.out, ("phi1", "VB"), sweep_return_rows(cfg.phi2, cfg.psi2))
    elif cfg.command == "sweep-fig4":
        write_table(
            cfg.out,
            ("phi1", "I7", "I8", "V78", "IN78"),
            sweep_inbound_rows(cfg.phi2, cfg.psi2),
        )
    elif cfg.command in ("table1", "tableS1"):
        reference = DUAL_REFERENCE if cfg.command == "table1" else IDENTITY_REFERENCE
        traces, _ = run_reference(
            reference,
            channel=ChannelConfig(cfg.phi2, cfg.psi2, cfg.alice_knows),
            classifier=ClassifierConfig(cfg.epsilon, cfg.seed),
        )
        write_table(cfg.out, TRACE_HEADER, _trace_rows(traces))
    elif cfg.command == "attack":
        _run_attack_command(cfg)
    elif cfg.command == "network-demo":
        registry, rows = network_demo(3, cfg.slots, cfg.epsilon, cfg.seed, _noise(cfg))
        write_table(
            cfg.out,
            ("transmitter", "receiver", "phi2", "psi2", "matched", "slots", "final_bits", "status"),
            rows,
        )
        Path(str(cfg.out) + ".registry").write_text(export_registry(registry))
    elif cfg.command == "capacity":
        resolution = resolution_for_epsilon(cfg.epsilon)
        write_table(
            cfg.out,
            ("epsilon", "resolution_rad", "capacity"),
            [(cfg.epsilon, resolution, capacity(resolution))],
        )
    write_manifest(cfg)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="okd",
        description="Simulator for deterministic key distribution over a "
        "phase-addressed interferometric channel.",
    )
    parser.add_argument("--config", help="key=value settings file; flags override it")
    parser.add_argument("--command", choices=COMMANDS, help="experiment to run")
    parser.add_argument("--slots", type=int, help="number of protocol slots")
    parser.add_argument("--variant", choices=("dual", "identity"), help="key derivation rule")
    parser.add_argument("--phi2", type=float, help="transmitter control phase, radians")
    parser.add_argument("--psi2", type=float, help="receiver control phase, radians")
    parser.add_argument(
        "--alice-knows",
        choices=("yes", "no"),
        dest="alice_knows",
        help="whether the receiver shares the channel address",
    )
    parser.add_argument("--epsilon", type=float, help="visibility tolerance")
    parser.add_argument("--seed", type=int, help="master RNG seed")
    parser.add_argument(
        "--noise-sigma", type=float, dest="noise_sigma", help="phase drift per slot, radians"
    )
    parser.add_argument(
        "--lock-interval", type=int, dest="lock_interval", help="slots between phase locks"
    )
    parser.add_argument("--out", help="output table path")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        file_values = load_config_file(args.config) if args.config else None
        flag_values = {
            "command": args.command,
            "slots": args.slots,
            "variant": args.variant,
            "phi2": args.phi2,
            "psi2": args.psi2,
            "alice_knows": None if args.alice_knows is None else args.alice_knows == "yes",
            "epsilon": args.epsilon,
            "seed": args.seed,
            "noise_sigma": args.noise_sigma,
            "lock_interval": args.lock_interval,
            "out": args.out,
        }
        cfg = build_config(file_values, flag_values)
        if not cfg.command:
            raise ConfigError("command is required (flag --command or config file)")
        run(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
