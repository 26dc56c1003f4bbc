"""Batch command-line front end.

Subcommands::

    probs        outcome table of one protocol at one parameter point
    fisher       classical/quantum information sweep as CSV or JSON
    simulate     Monte-Carlo experiment + MLE summary with a JSON-lines trace
    memory-demo  time-bin encode/decode transcript and resource comparison
    validate     run the built-in invariant suite

Configuration is a flat JSON object with a ``schema_version`` field;
unknown keys are rejected.  Exit codes: 0 success, 2 configuration error,
3 numerical-invariant violation.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analytic
from .errors import ConfigError, NumericalInvariantError, QTelescopyError
from .estimation import (
    DEFAULT_SCHEDULE,
    ExperimentPlan,
    crb_report,
    mle_phase,
    run_experiment,
)
from .fisher import G_BOUNDARY, classical_fisher, qfi_matrix, saturability_check, sld
from .gates import beam_splitter
from .protocols import (
    Herald,
    ProtocolConfig,
    Variant,
    bell_register,
    bin_digits,
    classify_herald,
    cnot_distribution,
    decode_time_bin,
    direct_distribution,
    encode_time_bin_modified,
    gottesman_distribution,
    memory_resources,
    pairs_for_bins,
    run_memory_unmodified,
    BELL_MINUS,
    BELL_PLUS,
)
from .sources import (
    StellarSource,
    conditional_g_derivative,
    conditional_phi_derivative,
    single_photon_conditional,
)
from .state_engine import apply_unitary, fock

SCHEMA_VERSION = 1
PROTOCOLS = ("cnot", "direct", "gottesman")


@dataclass(frozen=True)
class RunConfig:
    """Validated run parameters shared by all subcommands."""

    schema_version: int = SCHEMA_VERSION
    protocol: str = "cnot"
    epsilon: float = 0.1
    g: float = 1.0
    phi: float = 0.7
    delta: float = 0.0
    delta_schedule: tuple[float, ...] | None = None
    eta: float = 1.0
    variant: str = "cnot_sequence"
    swap_bases: bool = False
    n_bins: int = 7
    n_windows: int = 1000
    seed: int | None = None
    phi_values: tuple[float, ...] | None = None
    g_values: tuple[float, ...] | None = None
    delta_values: tuple[float, ...] | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged = {f.name: raw.get(f.name, getattr(cls, f.name)) for f in dataclasses.fields(cls)}
        cfg = cls(**_coerce_types(merged))
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        for key in ("delta_schedule", "phi_values", "g_values", "delta_values"):
            if out[key] is not None:
                out[key] = list(out[key])
        return out

    def validate(self) -> None:
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(
                f"unsupported schema_version {self.schema_version}; expected {SCHEMA_VERSION}"
            )
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}")
        for name, value, lo, hi in (
            ("epsilon", self.epsilon, 0.0, 1.0),
            ("g", self.g, 0.0, 1.0),
            ("eta", self.eta, 0.0, 1.0),
        ):
            if not lo <= value <= hi:
                raise ConfigError(f"{name} must lie in [{lo}, {hi}], got {value}")
        if self.n_bins < 1:
            raise ConfigError(f"n_bins must be >= 1, got {self.n_bins}")
        if self.n_windows < 1:
            raise ConfigError(f"n_windows must be >= 1, got {self.n_windows}")
        if self.delta_schedule is not None and len(self.delta_schedule) == 0:
            raise ConfigError("delta_schedule, when given, must not be empty")
        try:
            Variant.parse(self.variant)
        except ValueError as exc:
            raise ConfigError(str(exc))

    def source(self) -> StellarSource:
        return StellarSource(self.phi, self.g, self.epsilon)

    def schedule(self) -> tuple[float, ...]:
        if self.delta_schedule is not None:
            return self.delta_schedule
        return tuple(DEFAULT_SCHEDULE)


def _coerce_types(merged: dict) -> dict:
    def float_tuple(value, name):
        if value is None:
            return None
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{name} must be a list of numbers")
        try:
            return tuple(float(v) for v in value)
        except (TypeError, ValueError):
            raise ConfigError(f"{name} must be a list of numbers")

    for key in ("delta_schedule", "phi_values", "g_values", "delta_values"):
        merged[key] = float_tuple(merged[key], key)
    for key in ("epsilon", "g", "phi", "delta", "eta"):
        try:
            merged[key] = float(merged[key])
        except (TypeError, ValueError):
            raise ConfigError(f"{key} must be a number, got {merged[key]!r}")
    for key in ("schema_version", "n_bins", "n_windows"):
        if not isinstance(merged[key], int) or isinstance(merged[key], bool):
            raise ConfigError(f"{key} must be an integer, got {merged[key]!r}")
    if merged["seed"] is not None and (
        not isinstance(merged["seed"], int) or isinstance(merged["seed"], bool)
    ):
        raise ConfigError(f"seed must be an integer or null, got {merged['seed']!r}")
    if not isinstance(merged["swap_bases"], bool):
        raise ConfigError("swap_bases must be a boolean")
    for key in ("protocol", "variant"):
        if not isinstance(merged[key], str):
            raise ConfigError(f"{key} must be a string")
    return merged


def load_config(path: str | None, seed_override: int | None) -> RunConfig:
    if path is None:
        raw: dict = {}
    else:
        try:
            raw = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}")
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
    if seed_override is not None:
        raw = dict(raw, seed=seed_override)
    return RunConfig.from_dict(raw)


# ---------------------------------------------------------------------------
# output helpers


def fmt_float(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if np.isnan(x):
        return "nan"
    return "%.17g" % x


def _emit_table(header: list[str], rows: list[list], args, stem: str) -> None:
    """Write one tabular result as CSV (default) or JSON."""
    if args.format == "json":
        payload = [dict(zip(header, row)) for row in rows]
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
        suffix = ".json"
    else:
        lines = [",".join(header)]
        for row in rows:
            cells = []
            for cell in row:
                if isinstance(cell, float):
                    cells.append(fmt_float(cell))
                elif cell is None:
                    cells.append("")
                else:
                    text_cell = str(cell)
                    if "," in text_cell:
                        text_cell = '"' + text_cell + '"'
                    cells.append(text_cell)
            lines.append(",".join(cells))
        text = "\n".join(lines) + "\n"
        suffix = ".csv"
    _write_or_print(text, args, stem + suffix)


def _write_or_print(text: str, args, filename: str) -> None:
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / filename).write_text(text)
        print(f"wrote {out_dir / filename}")
    else:
        sys.stdout.write(text)


def _label_text(label) -> str:
    if isinstance(label, tuple):
        return "(" + ",".join(f"{v:+d}" if v < 0 else str(v) for v in label) + ")"
    return str(label)


# ---------------------------------------------------------------------------
# subcommands


def cmd_probs(args) -> int:
    cfg = load_config(args.config, args.seed)
    source = cfg.source()
    if cfg.protocol == "cnot":
        table = cnot_distribution(source, ProtocolConfig(cfg.delta, cfg.eta, cfg.variant))
        reference = analytic.cnot_outcome_table(cfg.phi, cfg.g, cfg.epsilon, cfg.delta, cfg.eta)
    elif cfg.protocol == "direct":
        table = direct_distribution(source, cfg.delta, cfg.swap_bases)
        reference = analytic.direct_outcome_table(cfg.phi, cfg.g, cfg.delta, cfg.swap_bases)
    else:
        table = gottesman_distribution(source, cfg.delta)
        reference = None

    rows = []
    for label in sorted(set(table) | set(reference or {})):
        p = table.get(label, 0.0)
        if reference is None:
            rows.append([_label_text(label), float(p), None, None])
        else:
            ref = reference.get(label, 0.0)
            rows.append([_label_text(label), float(p), float(ref), float(abs(p - ref))])
    header = ["label", "probability", "analytic_reference_probability", "abs_diff"]
    _emit_table(header, rows, args, f"probs_{cfg.protocol}")
    return 0


def _fisher_row(cfg: RunConfig, phi: float, g: float, delta: float) -> list:
    from .estimation import _window_model

    source = StellarSource(phi, g, cfg.epsilon)
    model = _window_model(cfg.protocol, delta, cfg.epsilon, cfg.eta, source.n_max)
    scale = cfg.epsilon if model.units == "per_event" else 1.0
    at_boundary = g >= G_BOUNDARY
    wrt = ("phi",) if at_boundary else ("phi", "g")
    fmat = classical_fisher(model, (phi, g), wrt=wrt)
    f_pp = scale * fmat.phi_phi
    f_gg = np.nan if at_boundary else scale * fmat.g_g
    f_pg = np.nan if at_boundary else scale * fmat.phi_g

    rho = single_photon_conditional(StellarSource(phi, g, cfg.epsilon))
    drho_phi = conditional_phi_derivative(phi, g)
    h_pp = cfg.epsilon * qfi_matrix(rho, drho_phi=drho_phi).phi_phi
    if at_boundary:
        h_gg = h_pg = sat = np.nan
    else:
        drho_g = conditional_g_derivative(phi, g)
        qmat = qfi_matrix(rho, drho_phi, drho_g)
        h_gg = cfg.epsilon * qmat.g_g
        h_pg = cfg.epsilon * qmat.phi_g
        sat = saturability_check(rho, sld(rho, drho_phi), sld(rho, drho_g))
    return [phi, g, delta, f_pp, f_gg, f_pg, h_pp, h_gg, h_pg, sat]


def cmd_fisher(args) -> int:
    cfg = load_config(args.config, args.seed)
    phis = cfg.phi_values or (cfg.phi,)
    gs = cfg.g_values or (cfg.g,)
    deltas = cfg.delta_values or (cfg.delta,)
    rows = []
    for phi in phis:
        for g in gs:
            for delta in deltas:
                rows.append(_fisher_row(cfg, phi, g, delta))
    header = [
        "phi",
        "g",
        "delta",
        "f_phiphi",
        "f_gg",
        "f_phig",
        "h_phiphi",
        "h_gg",
        "h_phig",
        "saturability",
    ]
    _emit_table(header, rows, args, f"fisher_{cfg.protocol}")
    return 0


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, args.seed)
    plan = ExperimentPlan(
        protocol=cfg.protocol,
        source=cfg.source(),
        delta_schedule=cfg.schedule(),
        n_windows=cfg.n_windows,
        seed=cfg.seed,
        eta=cfg.eta,
        variant=cfg.variant,
        swap_bases=cfg.swap_bases,
    )
    records = run_experiment(plan)
    report = mle_phase(records, plan)
    info = crb_report(cfg.protocol, plan.source, plan.delta_schedule, cfg.eta)

    trace_lines = []
    for w, record in enumerate(records):
        payload = {
            "window": w,
            "arrival_bin": None,
            "herald": record.herald.value,
            "record": list(record.counts) if record.counts is not None else (
                list(record.labels) if record.labels is not None else None
            ),
            "decoded_bin": None,
            "seed": cfg.seed,
        }
        trace_lines.append(json.dumps(payload, sort_keys=True))
    _write_or_print("\n".join(trace_lines) + "\n", args, "trace.jsonl")

    summary = {
        "protocol": cfg.protocol,
        "phi_true": cfg.phi,
        "phi_hat": report.phi_hat,
        "empirical_mse": report.empirical_mse,
        "crb": report.crb,
        "n_windows": cfg.n_windows,
        "n_heralded": report.n_heralded,
        "n_vacuum": report.n_vacuum,
        "fisher_per_window": info.fisher_per_window,
        "delta_schedule": list(plan.delta_schedule),
        "seed": cfg.seed,
    }
    if args.format == "json":
        text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
        _write_or_print(text, args, "summary.json")
    else:
        keys = sorted(summary)
        _emit_table(keys, [[summary[k] for k in keys]], args, "summary")
    return 0


def _pair_symbol(vec) -> str:
    if abs(abs(np.vdot(BELL_PLUS, vec)) - 1.0) < 1e-9:
        return "|Φ+⟩"
    if abs(abs(np.vdot(BELL_MINUS, vec)) - 1.0) < 1e-9:
        return "|Φ−⟩"
    return "|?⟩"


def cmd_memory_demo(args) -> int:
    cfg = load_config(args.config, args.seed)
    n_bins = cfg.n_bins
    n_pairs = pairs_for_bins(n_bins)
    rng_seed = cfg.seed if cfg.seed is not None else 0
    lines = [f"time-bin memory demo: N={n_bins} ({n_pairs} Bell pairs)"]
    lines.append("arrival -> encoded pairs -> decoded")
    fresh = bell_register(n_pairs)
    for arrival in [None] + list(range(1, n_bins + 1)):
        register = encode_time_bin_modified(fresh, arrival)
        pattern = "".join(_pair_symbol(p) for p in register.pairs)
        decoded = decode_time_bin(register, rng_seed)
        left = "no photon" if arrival is None else f"bin {arrival}"
        right = "no photon" if decoded is None else f"bin {decoded}"
        note = " (ancilla unchanged)" if arrival is None else ""
        lines.append(f"  {left:>9} -> {pattern}{note} -> {right}")
        if decoded != arrival:
            raise NumericalInvariantError(f"round-trip failed: {arrival} -> {decoded}")

    modified = memory_resources(n_bins, modified=True)
    original = memory_resources(n_bins, modified=False)
    lines.append("resources per window:")
    lines.append(
        f"  modified:   {modified.n_pairs} Bell pairs = "
        f"{modified.total_ancilla_qubits} ancilla qubits, "
        f"{modified.encode_gates_per_lab} encode gate slots per lab"
    )
    lines.append(
        f"  unmodified: {original.n_pairs} Bell pairs + {original.memory_qubits} memory qubits = "
        f"{original.total_ancilla_qubits} ancilla qubits, "
        f"{original.encode_gates_per_lab} encode gate slots per lab"
    )
    halved = modified.total_ancilla_qubits * 2 == original.total_ancilla_qubits
    lines.append(f"  ancilla qubits halved: {'yes' if halved else 'NO'}")

    source = cfg.source()
    sample_bin = min(3, n_bins)
    run = run_memory_unmodified(n_bins, sample_bin, source, cfg.delta, rng_seed)
    lines.append(
        f"unmodified sample run (bin {sample_bin}): decoded={run.decoded}, "
        f"n_minus={run.n_minus}, final outcome={run.outcome:+d}"
    )
    _write_or_print("\n".join(lines) + "\n", args, "memory_demo.txt")
    return 0


# ---------------------------------------------------------------------------
# validate: built-in invariant suite


def _validate_checks():
    n_max = 2

    def beam_splitter_bunching():
        state = apply_unitary(fock((1, 1), n_max), beam_splitter(0, 1, n_max))
        from .state_engine import basis_index

        residual = abs(state.amplitudes[basis_index((1, 1), n_max)])
        return residual < 1e-12, f"|11> residual after balanced splitter = {residual:.2e}"

    def circuit_matches_reference():
        worst = 0.0
        for phi in (0.3, 2.2):
            for delta in (0.15, 1.0):
                for g in (0.5, 1.0):
                    for eta in (1.0, 0.6):
                        src = StellarSource(phi, g, 0.1)
                        sim = cnot_distribution(src, ProtocolConfig(delta, eta))
                        ref = analytic.cnot_outcome_table(phi, g, 0.1, delta, eta)
                        keys = set(sim) | set(ref)
                        worst = max(
                            worst,
                            max(abs(sim.get(k, 0.0) - ref.get(k, 0.0)) for k in keys),
                        )
        return worst < 1e-12, f"worst |circuit - reference| = {worst:.2e}"

    def wiring_variants_agree():
        worst = 0.0
        for phi, delta, g, eta in ((0.4, 0.3, 1.0, 1.0), (1.7, 0.9, 0.5, 0.55)):
            src = StellarSource(phi, g, 0.1)
            a = cnot_distribution(src, ProtocolConfig(delta, eta, Variant.CNOT_SEQUENCE))
            b = cnot_distribution(src, ProtocolConfig(delta, eta, Variant.PARITY_FEED_FORWARD))
            keys = set(a) | set(b)
            worst = max(worst, max(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys))
        return worst < 1e-12, f"worst |A - B| = {worst:.2e}"

    def heralds_sound():
        from .protocols import cnot_branches

        src = StellarSource(0.8, 0.7, 0.2)
        for name, present, _, table in cnot_branches(src, ProtocolConfig(0.4, 0.7)):
            for label in table:
                herald = classify_herald(label)
                if present and name in ("plus", "minus") and herald is not Herald.PHOTON_ARRIVED:
                    return False, f"photon branch produced {label} with herald {herald}"
                if present and name == "vacuum" and herald is not Herald.VACUUM:
                    return False, f"vacuum branch produced {label} with herald {herald}"
        return True, "photon windows agree, vacuum windows disagree"

    def distributions_normalized():
        src = StellarSource(1.1, 0.8, 0.3)
        totals = [
            sum(cnot_distribution(src, ProtocolConfig(0.5, 0.7)).values()),
            sum(gottesman_distribution(src, 0.5).values()),
            sum(direct_distribution(src, 0.5).values()),
        ]
        worst = max(abs(t - 1.0) for t in totals)
        return worst < 1e-10, f"worst |sum - 1| = {worst:.2e}"

    def sld_closed_forms():
        worst = 0.0
        for g in (0.3, 0.7):
            for phi in (0.0, 1.0, 2.5):
                rho = single_photon_conditional(StellarSource(phi, g, 0.1))
                l_phi = sld(rho, conditional_phi_derivative(phi, g))
                l_g = sld(rho, conditional_g_derivative(phi, g))
                worst = max(worst, np.abs(l_phi - analytic.sld_phi(phi, g)).max())
                worst = max(worst, np.abs(l_g - analytic.sld_g(phi, g)).max())
                residual = np.abs(
                    (l_phi @ rho + rho @ l_phi) / 2.0 - conditional_phi_derivative(phi, g)
                ).max()
                worst = max(worst, residual)
        return worst < 1e-10, f"worst SLD deviation = {worst:.2e}"

    def memory_round_trip():
        for arrival in [None] + list(range(1, 8)):
            register = encode_time_bin_modified(bell_register(3), arrival)
            if decode_time_bin(register, 5) != arrival:
                return False, f"round-trip failed at arrival {arrival}"
        halved = (
            memory_resources(7, True).total_ancilla_qubits * 2
            == memory_resources(7, False).total_ancilla_qubits
        )
        return halved, "round-trip exact; ancilla count halved"

    def direct_matches_reference():
        worst = 0.0
        for phi, delta, g in ((0.0, 0.0, 1.0), (0.9, 0.4, 0.6)):
            sim = direct_distribution(StellarSource(phi, g, 0.1), delta)
            ref = analytic.direct_outcome_table(phi, g, delta)
            worst = max(worst, max(abs(sim[k] - ref[k]) for k in ref))
        return worst < 1e-12, f"worst |direct - reference| = {worst:.2e}"

    return [
        ("beam_splitter_bunching", beam_splitter_bunching),
        ("circuit_matches_reference", circuit_matches_reference),
        ("wiring_variants_agree", wiring_variants_agree),
        ("heralds_sound", heralds_sound),
        ("distributions_normalized", distributions_normalized),
        ("sld_closed_forms", sld_closed_forms),
        ("memory_round_trip", memory_round_trip),
        ("direct_matches_reference", direct_matches_reference),
    ]


def cmd_validate(args) -> int:
    failures = 0
    for name, check in _validate_checks():
        try:
            ok, detail = check()
        except QTelescopyError as exc:
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        status = "PASS" if ok else "FAIL"
        print(f"{status} {name}: {detail}")
        if not ok:
            failures += 1
    if failures:
        print(f"{failures} invariant check(s) failed")
        return 3
    print("all invariant checks passed")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON config file")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--out", metavar="DIR", help="write outputs into DIR instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    parser = argparse.ArgumentParser(
        prog="qtelescopy",
        description="few-mode photonic simulator and estimation toolkit for "
        "long-baseline stellar interferometry",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("probs", parents=[common], help="outcome probabilities").set_defaults(
        fn=cmd_probs
    )
    sub.add_parser("fisher", parents=[common], help="information sweep").set_defaults(
        fn=cmd_fisher
    )
    sub.add_parser("simulate", parents=[common], help="Monte-Carlo run + MLE").set_defaults(
        fn=cmd_simulate
    )
    sub.add_parser(
        "memory-demo", parents=[common], help="time-bin memory transcript"
    ).set_defaults(fn=cmd_memory_demo)
    sub.add_parser("validate", parents=[common], help="run invariant checks").set_defaults(
        fn=cmd_validate
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalInvariantError as exc:
        print(f"numerical invariant violated: {exc}", file=sys.stderr)
        return 3
    except QTelescopyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
