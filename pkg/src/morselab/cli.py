"""Command-line front end: ``morselab <command> --input F --radius R ...``.

Every command writes one JSON report (sorted keys, no timestamps) that
embeds the run configuration, the tool version and any truncation flags,
plus CSV sidecars meant for plotting. Without ``--out`` the JSON goes to
stdout and no sidecars are written.

Exit codes: 0 success, 1 bad input, 2 a resource cap was hit, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from morselab import __version__
from morselab.boundary import (
    boundary_proxy,
    capacity_dim_estimate,
    chain_visual_metric,
    epsilon_max,
    epsilon_prime,
    four_point_delta,
    gromov_products,
)
from morselab.cayley import DEFAULT_VERTEX_CAP, build_ball
from morselab.errors import InputError, MorselabError
from morselab.labelled import LabelledGraph
from morselab.morse import (
    DEFAULT_BUDGET,
    DEFAULT_GEODESIC_CAP,
    GaugeSchedule,
    GaugeTable,
    build_stratum,
    pair_key,
)
from morselab.presentations import load_spec
from morselab.raag_cube import (
    build_hyperplanes,
    contact_graph,
    contact_json,
    distance3_check,
    embedding_report,
)
from morselab.smallcanc import check_c_prime, girth_and_diameter, truncation_embedding_check
from morselab.words import format_word

COMMANDS = ("stratum", "hyperbolicity", "boundary", "raag", "smallcanc")
DEFAULT_CYCLE_CAP = 100_000
CAP_NAMES = ("vertices", "budget", "cycles", "geodesics")


@dataclass
class RunConfig:
    command: str
    input: str
    radius: int | None
    schedule: str = GaugeSchedule.default().to_text()
    bound: str = "cover"
    epsilon: float | None = None
    scales: list[float] | None = None
    threshold: float | None = None
    out: str | None = None
    caps: dict[str, int] = field(default_factory=lambda: {
        "vertices": DEFAULT_VERTEX_CAP,
        "budget": DEFAULT_BUDGET,
        "cycles": DEFAULT_CYCLE_CAP,
        "geodesics": DEFAULT_GEODESIC_CAP,
    })
    threads: int = 1

    def __post_init__(self):
        if self.radius is not None and self.radius < 0:
            raise InputError("radius must be nonnegative")
        for name, value in self.caps.items():
            if value < 1:
                raise InputError(f"cap {name!r} must be positive")
        if self.threads < 1:
            raise InputError("threads must be positive")
        GaugeSchedule.parse(self.schedule)

    def gauge_schedule(self) -> GaugeSchedule:
        return GaugeSchedule.parse(self.schedule)

    def gauge_bound(self) -> GaugeTable:
        return parse_bound(self.bound, self.gauge_schedule(), self.need_radius())

    def need_radius(self) -> int:
        if self.radius is None:
            raise InputError(f"{self.command} needs --radius")
        return self.radius

    def to_json(self) -> dict:
        out = asdict(self)
        out.pop("out")
        return out


def parse_bound(text: str, schedule: GaugeSchedule, radius: int) -> GaugeTable:
    """Gauge bound from the command line.

    ``cover`` is K*R + C, which every geodesic in the ball satisfies; an
    integer B is the linear gauge B*(K + C); ``K,C=N;...`` lists the values
    pair by pair.
    """
    text = text.strip()
    if text == "cover":
        return GaugeTable.covering(schedule, radius)
    if "=" in text:
        values = {}
        for item in text.replace(";", " ").split():
            key, _, value = item.partition("=")
            try:
                k, c = key.split(",")
                values[(Fraction(k), Fraction(c))] = int(value)
            except ValueError as exc:
                raise InputError(f"bad bound entry {item!r}; expected K,C=N") from exc
        missing = [pair_key(p) for p in schedule if p not in values]
        if missing:
            raise InputError(f"bound lacks schedule pairs {missing}")
        return GaugeTable(schedule, {p: values[p] for p in schedule})
    try:
        scale = int(text)
    except ValueError:
        raise InputError(f"bound must be 'cover', an integer or K,C=N pairs, got {text!r}") from None
    if scale < 0:
        raise InputError("bound must be nonnegative")
    return GaugeTable.from_function(schedule, lambda K, C: scale * (K + C))


# ------------------------------------------------------------ commands


class Report:
    """JSON document plus named CSV tables."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.result: dict = {}
        self.truncation: dict = {}
        self.warnings: list[str] = []
        self.tables: dict[str, tuple[list[str], list[list]]] = {}

    def document(self) -> dict:
        return {
            "tool": {"name": "morselab", "version": __version__},
            "command": self.config.command,
            "config": self.config.to_json(),
            "truncation": self.truncation,
            "warnings": self.warnings,
            "result": self.result,
        }


def _load(config: RunConfig):
    path = Path(config.input)
    if not path.is_file():
        raise InputError(f"input file not found: {config.input}")
    return load_spec(path)


def _ball(config: RunConfig, spec):
    return build_ball(spec, config.need_radius(), vertex_cap=config.caps["vertices"])


def _stratum(config: RunConfig, ball, report: Report):
    stratum = build_stratum(ball, config.gauge_bound(), config.gauge_schedule(),
                            geodesic_cap=config.caps["geodesics"], budget=config.caps["budget"])
    report.truncation["stratum_members_flagged"] = sum(m.truncated for m in stratum.members.values())
    report.truncation["stratum_rejected_flagged"] = len(stratum.rejected_truncated)
    return stratum


def _stratum_sphere(stratum) -> list[int]:
    r = stratum.membership_radius
    return [v for v in stratum.vertices if int(stratum.ball.dist[v]) == r]


def cmd_stratum(config: RunConfig) -> Report:
    """Empirical stratum of the ball under a gauge bound."""
    report = Report(config)
    spec = _load(config)
    ball = _ball(config, spec)
    stratum = _stratum(config, ball, report)
    report.result = {"ball_vertices": ball.n_vertices, "stratum": stratum.to_json()}
    rows = [[ball.label(v), int(ball.dist[v]), int(v in stratum),
             int(v in stratum and stratum.members[v].truncated)]
            for v in stratum.candidates]
    report.tables["stratum"] = (["word", "dist", "member", "truncated"], rows)
    return report


def _require_30(stratum) -> int:
    n30 = stratum.bound.values.get((Fraction(3), Fraction(0)))
    if n30 is None:
        raise InputError("this command needs (3,0) in the gauge schedule")
    return n30


def cmd_hyperbolicity(config: RunConfig) -> Report:
    """Four-point delta on the stratum sphere against 8 N(3,0)."""
    report = Report(config)
    spec = _load(config)
    ball = _ball(config, spec)
    stratum = _stratum(config, ball, report)
    n30 = _require_30(stratum)
    points = _stratum_sphere(stratum)
    if not points:
        report.warnings.append("stratum sphere is empty; delta = 0 holds vacuously")
    products = gromov_products(ball, points)
    delta = four_point_delta(products)
    measured = max((m.gauge.values.get((Fraction(3), Fraction(0)), 0)
                    for m in stratum.members.values()), default=0)
    report.result = {
        "points": len(points),
        "sphere_radius": stratum.membership_radius,
        "delta": float(delta),
        "bound": 8 * n30,
        "pass": delta <= 8 * n30,
        "max_member_gauge_3_0": measured,
    }
    rows = [[ball.label(points[i]), ball.label(points[j]), products.doubled[i, j] / 2]
            for i in range(len(points)) for j in range(i, len(points))]
    report.tables["products"] = (["x", "y", "product"], rows)
    return report


def _default_scales(metric: np.ndarray) -> list[float]:
    off = metric[~np.eye(metric.shape[0], dtype=bool)]
    values = sorted({round(float(v), 12) for v in off if v > 0})
    return values or [1.0]


def cmd_boundary(config: RunConfig) -> Report:
    """Visual metric on the stratum sphere and a capacity dimension estimate."""
    report = Report(config)
    spec = _load(config)
    ball = _ball(config, spec)
    stratum = _stratum(config, ball, report)
    points = _stratum_sphere(stratum)
    if not points:
        report.warnings.append("stratum sphere is empty; nothing to measure")
        report.result = {"points": 0}
        return report
    products = gromov_products(ball, points)
    delta = four_point_delta(products)
    limit = epsilon_max(delta)
    eps = config.epsilon if config.epsilon is not None else 0.9 * limit
    if not eps > 0:
        raise InputError("epsilon must be positive")
    proxy = boundary_proxy(ball, points, eps)
    chain = chain_visual_metric(proxy, delta)
    scales = config.scales or _default_scales(chain.d)
    m, certs = capacity_dim_estimate(chain.d, scales)
    report.result = {
        "points": len(points),
        "sphere_radius": stratum.membership_radius,
        "delta": float(delta),
        "epsilon": eps,
        "epsilon_max": limit,
        "epsilon_prime": epsilon_prime(delta, eps),
        "lower_bound_holds": chain.lower_ok,
        "upper_bound_holds": chain.upper_ok,
        "worst_lower_gap": chain.worst_lower,
        "worst_upper_gap": chain.worst_upper,
        "capacity_dimension_estimate": m,
        "certificates": [c.to_json() for c in certs],
        "words": [ball.label(v) for v in points],
    }
    rho = proxy.rho
    rows = [[ball.label(points[i]), ball.label(points[j]), products.doubled[i, j] / 2,
             float(rho[i, j]), float(chain.d[i, j])]
            for i in range(len(points)) for j in range(i + 1, len(points))]
    report.tables["boundary"] = (["x", "y", "product", "rho", "chain"], rows)
    return report


def cmd_raag(config: RunConfig) -> Report:
    """Hyperplanes, contact graph and the wall map on the stratum."""
    report = Report(config)
    spec = _load(config)
    ball = _ball(config, spec)
    walls = build_hyperplanes(ball)
    contact = contact_graph(walls)
    stratum = _stratum(config, ball, report)
    qmap = embedding_report(ball, stratum, walls, contact)
    interior = distance3_check(walls, contact, interior_only=True)
    every = distance3_check(walls, contact, interior_only=False)
    report.truncation["boundary_walls"] = sum(not h.interior for h in walls.walls)
    report.result = {
        "walls": len(walls.walls),
        "interior_walls": sum(h.interior for h in walls.walls),
        "contact_graph": contact_json(walls, contact),
        "embedding": qmap.to_json(ball),
        "lipschitz_holds": qmap.upper_ok,
        "distance3_interior": {"checked": interior.walls_checked,
                               "violations": [list(v) for v in interior.violations]},
        "distance3_all": {"checked": every.walls_checked,
                          "violations": [list(v) for v in every.violations]},
    }
    rows = [[ball.label(x), ball.label(y), d, None if math.isinf(dcg) else int(dcg)]
            for x, y, d, dcg in qmap.pairs]
    report.tables["qmap"] = (["x", "y", "d", "d_cg"], rows)
    return report


def cmd_smallcanc(config: RunConfig) -> Report:
    """Piece certification, optionally with the girth truncation check."""
    report = Report(config)
    spec = _load(config)
    if spec.family == "graphical-sc":
        graph = spec.graph
    elif spec.family == "classical-sc":
        graph = LabelledGraph.from_relators(spec.relators)
    else:
        raise InputError(f"smallcanc needs a small-cancellation family, got {spec.family!r}")
    lam = spec.lam if spec.lam is not None else 1 / 6
    pieces = check_c_prime(graph, lam, cycle_cap=config.caps["cycles"])
    report.truncation["pieces_at_length_cap"] = any(pieces.component_growing)
    report.result = {
        "pieces": pieces.to_json(spec.generators),
        "components": [{"girth": None if math.isinf(g) else int(g), "diameter": d}
                       for g, d in girth_and_diameter(graph)],
    }
    if config.threshold is not None:
        if spec.family != "graphical-sc":
            raise InputError("--threshold needs a graphical small-cancellation input")
        trunc, ball, ball_n, stratum = truncation_embedding_check(
            spec, config.threshold, config.need_radius(), config.gauge_bound(),
            config.gauge_schedule(), budget=config.caps["budget"])
        report.truncation["stratum_members_flagged"] = sum(
            m.truncated for m in stratum.members.values())
        report.result["truncation_check"] = trunc.to_json(ball)
        if trunc.witness_mismatches:
            report.warnings.append("witness distances differ after truncation; "
                                   "gauge underestimation suspected")
    rows = [[c.length, c.max_piece, format_word(c.piece, spec.generators), c.position]
            for c in pieces.cycles]
    report.tables["cycles"] = (["length", "max_piece", "piece", "position"], rows)
    return report


HANDLERS = {
    "stratum": cmd_stratum,
    "hyperbolicity": cmd_hyperbolicity,
    "boundary": cmd_boundary,
    "raag": cmd_raag,
    "smallcanc": cmd_smallcanc,
}


# ------------------------------------------------------------ output


def _plain(obj):
    if isinstance(obj, Fraction):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def render_json(report: Report) -> str:
    return json.dumps(report.document(), sort_keys=True, indent=2, default=_plain) + "\n"


def render_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else _plain(v) if isinstance(v, np.generic) else v
                         for v in row])
    return buf.getvalue()


def write_report(report: Report, out: str | None) -> list[Path]:
    text = render_json(report)
    if out is None:
        sys.stdout.write(text)
        return []
    folder = Path(out)
    folder.mkdir(parents=True, exist_ok=True)
    name = report.config.command
    written = [folder / f"{name}.json"]
    written[0].write_text(text)
    for table, (header, rows) in sorted(report.tables.items()):
        path = folder / f"{name}.{table}.csv"
        path.write_text(render_csv(header, rows))
        written.append(path)
    return written


# ------------------------------------------------------------ argument parsing


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 1); exit 2 is reserved for caps."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _caps(text: str) -> dict[str, int]:
    caps = {}
    for item in text.replace(";", ",").split(","):
        if not item.strip():
            continue
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in CAP_NAMES:
            raise argparse.ArgumentTypeError(
                f"caps look like vertices=N,budget=N,cycles=N,geodesics=N; got {item!r}")
        try:
            caps[key] = int(value)
        except ValueError:
            raise argparse.ArgumentTypeError(f"cap {key!r} needs an integer") from None
    return caps


def _scales(text: str) -> list[float]:
    try:
        return [float(Fraction(s)) for s in text.replace(",", " ").split()]
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad scale list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--input", required=True, help="group spec file (.grp)")
    common.add_argument("--radius", type=int, help="ball radius R")
    common.add_argument("--schedule", default=GaugeSchedule.default().to_text(),
                        help="gauge arguments, e.g. '1,0;3,0' (default: %(default)s)")
    common.add_argument("--bound", default="cover",
                        help="'cover' (K*R+C), an integer B meaning B*(K+C), or 'K,C=N;...'")
    common.add_argument("--epsilon", type=float, help="visual parameter (default 0.9 * epsilon_max)")
    common.add_argument("--scales", type=_scales, help="cover scales for the dimension probe")
    common.add_argument("--threshold", type=float,
                        help="girth threshold for the truncation check (smallcanc)")
    common.add_argument("--out", help="output directory; JSON goes to stdout if omitted")
    common.add_argument("--caps", type=_caps, default={},
                        help="vertices=N,budget=N,cycles=N,geodesics=N")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker count (default: available CPUs)")

    parser = _Parser(prog="morselab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"morselab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, handler in HANDLERS.items():
        sub.add_parser(name, parents=[common], help=(handler.__doc__ or "").strip() or None)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    config = RunConfig(args.command, args.input, args.radius)
    config.caps.update(args.caps)
    config.schedule = args.schedule
    config.bound = args.bound
    config.epsilon = args.epsilon
    config.scales = args.scales
    config.threshold = args.threshold
    config.out = args.out
    config.threads = args.threads
    config.__post_init__()
    return config


def run(config: RunConfig) -> Report:
    if config.command != "smallcanc":
        config.need_radius()
    return HANDLERS[config.command](config)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:      # --help, --version and usage errors
        return int(exc.code or 0)
    try:
        config = config_from_args(args)
        report = run(config)
        write_report(report, config.out)
    except MorselabError as exc:
        print(f"morselab: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"morselab: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to the internal-error code
        print(f"morselab: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    for warning in report.warnings:
        print(f"morselab: warning: {warning}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
