"""
CLI Commands - Argument parsing, subcommand dispatch and result emission
"""
import argparse
import csv
import io
import json
import logging
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any, TextIO

from pydantic import ValidationError

from core import __version__
from core.app import LabApp
from core.config import (
    SETTING_KEYS,
    LabSettings,
    OutputFormat,
    configure_logging,
    env_settings,
    read_config_file,
    resolve_settings,
)
from core.exceptions import LabError, UsageError
from models.schemas import (
    CliConfig,
    ExperimentConfig,
    ExperimentKind,
    PlanePoint,
    PolymerSide,
    Region,
    ReplicaResult,
    ScaledPoint,
    Subcommand,
)
from services.field_store import field_csv, format_float, profile_header, sidecar_path, write_text
from services.scaling import transversal_fluctuation


logger = logging.getLogger(__name__)

RESULT_PREFIX = ["experiment", "parameter_index", "replica_index", "derived_seed"]


class LabArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors raised instead of printed"""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


# =============================================================================
# Value parsers
# =============================================================================

def parse_floats(text: str, count: int | None = None) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise UsageError(f"expected comma separated numbers, got {text!r}") from e
    if count is not None and len(values) != count:
        raise UsageError(f"expected {count} comma separated numbers, got {text!r}")
    if not values:
        raise UsageError("expected at least one number")
    return values


def parse_plane_point(text: str) -> PlanePoint:
    a, b = parse_floats(text, 2)
    return PlanePoint(a=a, b=b)


def parse_scaled_point(text: str) -> ScaledPoint:
    x, t = parse_floats(text, 2)
    return ScaledPoint(x=x, t=t)


def parse_region(text: str) -> Region:
    """
    a_lo,a_hi,b_lo,b_hi               rectangle
    rect:a_lo,a_hi,b_lo,b_hi          rectangle
    strip:n,half_width,t_max[,t_min]  diagonal strip
    halfplane:offset                  {b - a <= offset}
    """
    kind, _, body = text.partition(":")
    if not body:
        kind, body = "rect", text
    kind = kind.strip().lower()

    if kind in ("rect", "rectangle"):
        return Region.rectangle(*parse_floats(body, 4))
    if kind == "strip":
        values = parse_floats(body)
        if len(values) not in (3, 4):
            raise UsageError(f"strip needs n,half_width,t_max[,t_min], got {body!r}")
        n, half_width, t_max = values[:3]
        t_min = values[3] if len(values) == 4 else 0.0
        return Region.diagonal_strip(n=n, half_width=half_width, t_max=t_max, t_min=t_min)
    if kind in ("halfplane", "half_plane"):
        (offset,) = parse_floats(body, 1)
        return Region.half_plane(offset)
    raise UsageError(f"unknown region kind {kind!r}")


# =============================================================================
# Parser
# =============================================================================

def _common_options() -> argparse.ArgumentParser:
    """Options accepted before or after the subcommand"""
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="key=value config file")
    common.add_argument("--workers", type=int, help="worker processes for campaigns")
    common.add_argument("--log-level", dest="log_level", help="stderr log level")
    common.add_argument("--out", help="output file (stdout when absent)")
    common.add_argument("--format", dest="output_format", choices=[f.value for f in OutputFormat])
    common.add_argument("--point-cap", dest="point_cap", type=float, help="largest expected field size")
    common.add_argument("--k-trunc", dest="k_trunc", type=float, help="strip truncation in transversal units")
    common.add_argument("--psi", type=float, help="inverse slope bound of admissible pairs")
    common.add_argument("--refine", dest="mesh_refine", type=int, help="MTF mesh refinement")
    return common


def build_parser() -> tuple[LabArgumentParser, dict[Subcommand, LabArgumentParser]]:
    common = _common_options()
    parser = LabArgumentParser(
        prog="lpp-lab",
        description="Poissonian last passage percolation lab",
        parents=[common]
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=LabArgumentParser)
    commands: dict[Subcommand, LabArgumentParser] = {}

    def add(command: Subcommand, help_text: str) -> LabArgumentParser:
        commands[command] = sub.add_parser(command.value, help=help_text, parents=[common])
        return commands[command]

    p = add(Subcommand.SAMPLE, "sample a Poisson field")
    p.add_argument("--region", help="region, see parse_region")
    p.add_argument("--rate", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)

    p = add(Subcommand.ENERGY, "energy between two plane points")
    p.add_argument("--field", help="field CSV with JSON sidecar")
    p.add_argument("--u", help="a,b")
    p.add_argument("--v", help="a,b")
    p.add_argument("--allowed", help="constraint region")

    p = add(Subcommand.GEODESIC, "extremal geodesic between two plane points")
    p.add_argument("--field")
    p.add_argument("--u")
    p.add_argument("--v")
    p.add_argument("--side", choices=[s.value for s in PolymerSide], default=PolymerSide.LEFTMOST.value)

    p = add(Subcommand.POLYMER, "leftmost or rightmost polymer between scaled points")
    p.add_argument("--field")
    p.add_argument("--n", type=float)
    p.add_argument("--u", help="x,t")
    p.add_argument("--v", help="x,t")
    p.add_argument("--side", choices=[s.value for s in PolymerSide], default=PolymerSide.LEFTMOST.value)

    p = add(Subcommand.PROFILE, "weight profile on [1, 2]")
    p.add_argument("--field")
    p.add_argument("--n", type=float)

    p = add(Subcommand.MTF, "MTF mesh lower bound")
    p.add_argument("--field")
    p.add_argument("--n", type=float)
    p.add_argument("--t", type=float)

    p = add(Subcommand.CAMPAIGN, "Monte Carlo campaign")
    p.add_argument("--experiment", choices=[k.value for k in ExperimentKind])
    p.add_argument("--n-values", dest="n_values")
    p.add_argument("--t-values", dest="t_values", default="1")
    p.add_argument("--s-values", "--k-values", dest="s_values", default="1")
    p.add_argument("--replicas", type=int, default=100)
    p.add_argument("--base-seed", dest="base_seed", type=int, default=0)
    p.add_argument("--rate", type=float, default=1.0)
    p.add_argument("--grid", type=int, default=256)
    p.add_argument("--tw-matrix-dim", dest="tw_matrix_dim", type=int, default=400)
    p.add_argument("--tw-samples", dest="tw_samples", type=int, default=2000)
    p.add_argument("--no-mesh", dest="no_mesh", action="store_true")
    p.add_argument("--summary", help="write the JSON summary here")
    p.add_argument("--report", help="write a Markdown report here")
    p.add_argument("--store", help="archive the campaign in this SQLite file")

    p = add(Subcommand.ARCHIVE, "list archived campaigns or print one")
    p.add_argument("--store", help="SQLite archive written by campaign --store")
    p.add_argument("--campaign-id", dest="campaign_id", help="campaign to print; lists the archive when absent")
    p.add_argument("--limit", type=int, default=50)

    p = add(Subcommand.SELFTEST, "exact structural suites on random small fields")
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)

    return parser, commands


def apply_file_defaults(
    commands: dict[Subcommand, LabArgumentParser],
    values: dict[str, str]
) -> None:
    """Config-file keys become subcommand defaults, so explicit flags still win"""
    for key, raw in values.items():
        known = False
        for command in commands.values():
            action = next((a for a in command._actions if a.dest == key), None)
            if action is None:
                continue
            known = True
            if isinstance(action, argparse._StoreTrueAction):
                command.set_defaults(**{key: raw.strip().lower() in ("1", "true", "yes", "on")})
            else:
                command.set_defaults(**{key: raw})
        if not known:
            raise UsageError(f"unknown config key {key!r}")


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [f"--{name.replace('_', '-')}" for name in names if getattr(args, name, None) is None]
    if missing:
        raise UsageError(f"{args.command}: missing {', '.join(missing)}")


# =============================================================================
# Emission
# =============================================================================

def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def emit_results(
    results: list[dict[str, Any]],
    fmt: OutputFormat | str,
    destination: str | Path | None = None,
    columns: list[str] | None = None,
    header: dict[str, Any] | None = None,
    stream: TextIO | None = None
) -> None:
    """
    CSV: header row always present, floats with 17 significant digits,
    `header` written to a JSON sidecar when the destination is a file.
    JSON: one document holding `header` keys and a `results` array, floats
    as the shortest decimal that parses back to the same value.
    """
    fmt = OutputFormat(fmt)
    if fmt == OutputFormat.CSV:
        if columns is None:
            columns = []
            for row in results:
                columns.extend(key for key in row if key not in columns)
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        for row in results:
            writer.writerow([_cell(row.get(column)) for column in columns])
        content = buffer.getvalue()
    else:
        document = dict(header or {})
        document["results"] = results
        content = json.dumps(document, indent=2) + "\n"

    if destination is None:
        (stream or sys.stdout).write(content)
        return
    target = Path(destination)
    write_text(target, content)
    if fmt == OutputFormat.CSV and header:
        write_text(sidecar_path(target), json.dumps(header, indent=2) + "\n")


# =============================================================================
# Subcommands
# =============================================================================

Handler = Callable[[LabApp, argparse.Namespace, dict[str, Any]], None]


def cmd_sample(app: LabApp, args: argparse.Namespace, echo: dict[str, Any]) -> None:
    _require(args, "region")
    field = app.sample(parse_region(args.region), rate=args.rate, seed=args.seed)
    if args.out:
        app.save(field, args.out, metadata=echo)
    else:
        sys.stdout.write(field_csv(field))


def cmd_energy(app: LabApp, args: argparse.Namespace, echo: dict[str, Any]) -> None:
    _require(args, "field", "u", "v")
    field = app.load(args.field)
    u, v = parse_plane_point(args.u), parse_plane_point(args.v)
    allowed = parse_region(args.allowed) if args.allowed else None
    value = app.energy(field, u, v, allowed)
    row = {"u_a": u.a, "u_b": u.b, "v_a": v.a, "v_b": v.b, "energy": value}
    emit_results([row], args.output_format, args.out, header={"config": echo})


def cmd_geodesic(app: LabApp, args: argparse.Namespace, echo: dict[str, Any]) -> None:
    _require(args, "field", "u", "v")
    field = app.load(args.field)
    chain = app.geodesic(field, parse_plane_point(args.u), parse_plane_point(args.v), PolymerSide(args.side))
    rows = [{"a": p.a, "b": p.b} for p in chain.path]
    header = {"config": echo, "side": args.side, "energy": chain.energy}
    emit_results(rows, args.output_format, args.out, columns=["a", "b"], header=header)


def cmd_polymer(app: LabApp, args: argparse.Namespace, echo: dict[str, Any]) -> None:
    _require(args, "field", "n", "u", "v")
    field = app.load(args.field)
    p = app.polymer(field, args.n, parse_scaled_point(args.u), parse_scaled_point(args.v), PolymerSide(args.side))
    rows = [{"t": t, "x": x} for t, x in zip(p.t.tolist(), p.x.tolist())]
    header = {
        "config": echo,
        "n": p.n,
        "side": p.side.value,
        "energy": p.chain.energy if p.chain else None,
        "transversal_fluctuation": transversal_fluctuation(p),
    }
    emit_results(rows, args.output_format, args.out, columns=["t", "x"], header=header)


def cmd_profile(app: LabApp, args: argparse.Namespace, echo: dict[str, Any]) -> None:
    _require(args, "field", "n")
    profile = app.profile(app.load(args.field), args.n)
    times, levels = profile.nodes
    rows = [{"d_i": d, "X_i": int(x)} for d, x in zip(times.tolist(), levels.tolist())]
    header = {"config": echo, **profile_header(profile), "jumps": int(profile.jump_times.size)}
    emit_results(rows, args.output_format, args.out, columns=["d_i", "X_i"], header=header)


def cmd_mtf(app: LabApp, args: argparse.Namespace, echo: dict[str, Any]) -> None:
    _require(args, "field", "n", "t")
    value = app.mtf(app.load(args.field), args.n, args.t)
    row = {
        "n": args.n,
        "t": args.t,
        "psi": app.settings.psi,
        "refine": app.settings.mesh_refine,
        "mtf_lower_bound": value,
    }
    emit_results([row], args.output_format, args.out, header={"config": echo})


def cmd_campaign(app: LabApp, args: argparse.Namespace, echo: dict[str, Any]) -> None:
    _require(args, "experiment", "n_values")
    config = ExperimentConfig(
        experiment=ExperimentKind(args.experiment),
        n_values=parse_floats(args.n_values),
        t_values=parse_floats(args.t_values),
        s_or_k_values=parse_floats(args.s_values),
        replicas=args.replicas,
        base_seed=args.base_seed,
        k_trunc=app.settings.k_trunc,
        psi=app.settings.psi,
        mesh_refine=app.settings.mesh_refine,
        mesh=not args.no_mesh,
        rate=args.rate,
        point_cap=app.settings.point_cap,
        grid=args.grid,
        tw_matrix_dim=args.tw_matrix_dim,
        tw_samples=args.tw_samples
    )
    results, summary = app.campaign(config)

    header: dict[str, Any] = {"config": echo, "experiment": config.model_dump(mode="json")}
    if args.store:
        header["campaign_id"] = app.archive(args.store, config, results, summary)
    if args.summary:
        write_text(Path(args.summary), json.dumps({**summary, "invocation": echo}, indent=2) + "\n")
    if args.report:
        write_text(Path(args.report), app.report(summary))

    if OutputFormat(args.output_format) == OutputFormat.JSON:
        header["summary"] = summary
    rows, columns = result_rows(results)
    emit_results(rows, args.output_format, args.out, columns=columns, header=header)


def cmd_archive(app: LabApp, args: argparse.Namespace, echo: dict[str, Any]) -> None:
    _require(args, "store")
    if args.campaign_id is None:
        listing = app.archived_campaigns(args.store, args.limit)
        emit_results(listing, args.output_format, args.out, columns=["id", "experiment", "created_at"],
                     header={"config": echo})
        return

    config, results, summary = app.archived_campaign(args.store, args.campaign_id)
    header: dict[str, Any] = {
        "config": echo,
        "campaign_id": args.campaign_id,
        "experiment": config.model_dump(mode="json"),
    }
    if OutputFormat(args.output_format) == OutputFormat.JSON:
        header["summary"] = summary
    rows, columns = result_rows(results)
    emit_results(rows, args.output_format, args.out, columns=columns, header=header)


def result_rows(results: list[ReplicaResult]) -> tuple[list[dict[str, Any]], list[str]]:
    """Campaign CSV rows: fixed prefix, then sorted parameter and statistic keys"""
    param_keys = sorted({k for r in results for k in r.parameters})
    stat_keys = sorted({k for r in results for k in r.statistics})
    rows = [
        {
            "experiment": r.experiment.value,
            "parameter_index": r.parameter_index,
            "replica_index": r.replica_index,
            "derived_seed": r.derived_seed,
            **r.parameters,
            **r.statistics,
        }
        for r in results
    ]
    return rows, RESULT_PREFIX + param_keys + stat_keys


def cmd_selftest(app: LabApp, args: argparse.Namespace, echo: dict[str, Any]) -> None:
    report = app.selftest(instances=args.instances, seed=args.seed)
    emit_results(report, args.output_format, args.out, columns=["suite", "instances", "failures"],
                 header={"config": echo})
    app.raise_on_failures(report)


HANDLERS: dict[Subcommand, Handler] = {
    Subcommand.SAMPLE: cmd_sample,
    Subcommand.ENERGY: cmd_energy,
    Subcommand.GEODESIC: cmd_geodesic,
    Subcommand.POLYMER: cmd_polymer,
    Subcommand.PROFILE: cmd_profile,
    Subcommand.MTF: cmd_mtf,
    Subcommand.CAMPAIGN: cmd_campaign,
    Subcommand.ARCHIVE: cmd_archive,
    Subcommand.SELFTEST: cmd_selftest,
}


# =============================================================================
# Entry point
# =============================================================================

def resolve_invocation(argv: list[str]) -> tuple[argparse.Namespace, LabSettings, CliConfig]:
    """Parse argv with config file, environment and defaults layered underneath"""
    parser, commands = build_parser()

    # Step 1: the config file, wherever --config appears
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    file_values = read_config_file(known.config) if known.config else {}
    file_settings = {k: v for k, v in file_values.items() if k in SETTING_KEYS}
    apply_file_defaults(commands, {k: v for k, v in file_values.items() if k not in SETTING_KEYS})

    # Step 2: flags
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError("missing subcommand; see --help")
    flag_settings = {k: getattr(args, k) for k in SETTING_KEYS if hasattr(args, k)}

    # Step 3: settings, later layers win
    settings = resolve_settings(env_settings(), file_settings, flag_settings)
    args.output_format = settings.output_format.value
    args.out = getattr(args, "out", None)

    flags = {
        k: str(v) for k, v in sorted(vars(args).items())
        if k not in ("command", "config") and k not in SETTING_KEYS and v is not None
    }
    cli = CliConfig(subcommand=Subcommand(args.command), flags=flags, config_file=known.config)
    return args, settings, cli


def main(argv: list[str] | None = None) -> int:
    """Exit 0 on success, 1 on usage errors, 2 when the request is infeasible"""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args, settings, cli = resolve_invocation(argv)
        configure_logging(settings.log_level)
        echo = {
            "version": __version__,
            **cli.model_dump(mode="json"),
            "settings": settings.model_dump(mode="json"),
        }
        logger.info("running %s", cli.subcommand.value)
        HANDLERS[cli.subcommand](LabApp(settings), args, echo)
        return 0
    except LabError as e:
        return _report_error(type(e).__name__, str(e), e.exit_code)
    except ValidationError as e:
        return _report_error("UsageError", f"invalid parameters: {e}", UsageError.exit_code)
    except SystemExit as e:
        # --help and --version
        return e.code if isinstance(e.code, int) else 0


def _report_error(name: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": name, "message": message}) + "\n")
    return code
