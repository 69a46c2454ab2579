"""Command-line front end: ``randflag {gen,analyze,certify,sweep,poisson}``.

Exit codes are a stable contract: 0 on success (or a certified verdict),
2 when a certifier declines to certify, 1 on any error including usage
errors.  Every JSON output carries a ``config`` block holding the resolved
run configuration; ``--config FILE`` replays it, and the replay reproduces
the file byte-for-byte apart from the ``wall_time`` fields.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Sequence

from .certify import vanishing_pipeline, zuk_certify
from .complex import build_skeleton, count_maximal_cliques, link_graph, skeleton_to_json
from .experiments import (
    STATISTICS,
    TrialConfig,
    critical_p,
    default_jobs,
    expected_maximal_cliques,
    poisson_fit,
    poisson_mean,
    run_trials,
    sweep,
    sweep_csv,
    upper_threshold,
)
from .graph import EdgeListError, Seed, format_edge_list, parse_edge_list, sample_gnp
from .homology import DEFAULT_PRIMES, betti
from .spectral import lambda2, laplacian, spectrum

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CERTIFIED = 2

COMMANDS = ("gen", "analyze", "certify", "sweep", "poisson")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for "not certified".
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass
class RunConfig:
    """Resolved configuration of one CLI run; output paths are not part of it."""

    command: str
    n: int | None = None
    k: int = 1
    p: list[float] | None = None
    c: list[float] | None = None
    eps: float | None = None
    cap: int | None = None
    trials: int = 300
    seed: int = 0
    statistic: str | None = None
    format: str = "json"
    method: str = "modular"
    primes: list[int] = field(default_factory=lambda: list(DEFAULT_PRIMES))
    property_t: bool = False
    audit: bool = False
    input: str | None = None
    betti: bool = False
    maximal_cliques: list[int] = field(default_factory=list)
    lambda2: bool = False
    spectrum: bool = False
    links: list[list[int]] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        return cls(**obj)

    def edge_probability(self) -> float:
        """The single edge probability for gen."""
        if self.eps is not None:
            return upper_threshold(self.n, self.k, self.eps)
        if self.c is not None:
            return critical_p(self.n, self.k, self.c[0])
        return self.p[0]

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.command in ("gen", "sweep", "poisson"):
            if self.n is None:
                raise UsageError(f"{self.command} needs --n")
            if self.n < 0:
                raise UsageError("--n must be non-negative")
            given = sum(x is not None for x in (self.p, self.c, self.eps))
            if given != 1:
                raise UsageError("give exactly one of --p, --c, --eps")
            grid = self.p if self.p is not None else self.c
            if grid is not None and not grid:
                raise UsageError("empty grid")
            if self.command != "sweep" and grid is not None and len(grid) != 1:
                raise UsageError(f"{self.command} takes a single --p or --c value")
            if self.command == "sweep" and self.eps is not None:
                raise UsageError("sweep needs a --p or --c grid")
        if self.command in ("analyze", "certify") and not self.input:
            raise UsageError(f"{self.command} needs an input edge-list file")
        if self.trials <= 0:
            raise UsageError("--trials must be positive")
        if self.k < 1 and self.command in ("certify", "poisson", "sweep"):
            raise UsageError("--k must be at least 1")
        if self.property_t and self.k != 1:
            raise UsageError("--property-t is the k = 1 certificate")
        if not 0 <= self.seed < 2**64:
            raise UsageError("--seed must lie in [0, 2^64)")
        if self.command == "sweep" and self.statistic not in STATISTICS:
            raise UsageError(f"sweep needs --statistic from {STATISTICS}")
        allowed = {
            "gen": ("edge-list", "json"),
            "analyze": ("json",),
            "certify": ("json",),
            "sweep": ("json", "csv"),
            "poisson": ("json",),
        }[self.command]
        if self.format not in allowed:
            raise UsageError(f"{self.command} supports --format {'/'.join(allowed)}")


def _face(text: str) -> list[int]:
    try:
        return sorted(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"face must be comma-separated vertices, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--n", type=int, help="number of vertices")
    common.add_argument("--k", type=int, default=1, help="cohomological degree (default 1)")
    prob = common.add_mutually_exclusive_group()
    prob.add_argument("--p", type=float, nargs="*", help="edge probability (a grid for sweep)")
    prob.add_argument("--c", type=float, nargs="*", help="critical-window offset (a grid for sweep)")
    prob.add_argument("--eps", type=float, help="use the vanishing threshold with this slack as p")
    common.add_argument("--cap", type=int, help="dimension cap of the skeleton")
    common.add_argument("--trials", type=int, default=300)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--records", help="write per-trial JSON lines here (sweep, poisson)")
    common.add_argument("--format", choices=("json", "csv", "edge-list"))
    common.add_argument("--exact", action="store_true", help="exact rational rank instead of modular")
    common.add_argument("--primes", type=lambda s: [int(x) for x in s.split(",")],
                        help="comma-separated primes for the modular rank")
    common.add_argument("--property-t", action="store_true", help="also certify property (T) (k = 1)")
    common.add_argument("--audit", action="store_true", help="cross-check certificates by exact rank")
    common.add_argument("--jobs", type=int, help="worker processes (default from RANDFLAG_JOBS, else 1)")
    common.add_argument("--config", help="replay the config embedded in a JSON output file")

    parser = _Parser(prog="randflag", description="Random flag complexes: sampling, homology, certificates.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("gen", parents=[common], help="sample G(n, p) as an edge list or complex dump")
    an = sub.add_parser("analyze", parents=[common], help="f-vector, Betti numbers, gaps of an edge list")
    an.add_argument("input", nargs="?")
    an.add_argument("--betti", action="store_true")
    an.add_argument("--maximal-cliques", type=int, action="append", default=[], metavar="SIZE")
    an.add_argument("--lambda2", action="store_true", help="spectral gap of the graph")
    an.add_argument("--spectrum", action="store_true", help="full normalized Laplacian spectrum")
    an.add_argument("--link", type=_face, action="append", default=[], metavar="FACE",
                    help="spectral gap of the link of FACE, e.g. 0,3")
    ce = sub.add_parser("certify", parents=[common], help="spectral vanishing certificate")
    ce.add_argument("input", nargs="?")
    sw = sub.add_parser("sweep", parents=[common], help="success fraction over a p or c grid")
    sw.add_argument("--statistic", choices=STATISTICS)
    sub.add_parser("poisson", parents=[common], help="maximal-clique counts against the Poisson limit")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.config:
        with open(args.config) as fh:
            text = fh.read()
        first = text.lstrip().splitlines()[0] if text.strip() else ""
        try:
            obj = json.loads(text)
        except json.JSONDecodeError:
            obj = json.loads(first)
        if "config" not in obj:
            raise ValueError(f"{args.config} has no embedded config")
        cfg = RunConfig.from_json(obj["config"])
        if cfg.command != args.command:
            raise UsageError(f"config is for {cfg.command!r}, not {args.command!r}")
        return cfg
    default_format = {"gen": "edge-list"}.get(args.command, "json")
    cfg = RunConfig(
        command=args.command,
        n=args.n,
        k=args.k,
        p=args.p,
        c=args.c,
        eps=args.eps,
        cap=args.cap,
        trials=args.trials,
        seed=args.seed,
        statistic=getattr(args, "statistic", None),
        format=args.format or default_format,
        method="exact" if args.exact else "modular",
        primes=args.primes or list(DEFAULT_PRIMES),
        property_t=args.property_t,
        audit=args.audit,
        input=getattr(args, "input", None),
        betti=getattr(args, "betti", False),
        maximal_cliques=getattr(args, "maximal_cliques", []),
        lambda2=getattr(args, "lambda2", False),
        spectrum=getattr(args, "spectrum", False),
        links=getattr(args, "link", []),
    )
    return cfg


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _read_graph(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh.read())


# -- subcommands --------------------------------------------------------------


def cmd_gen(cfg: RunConfig, out: str | None) -> int:
    p = cfg.edge_probability()
    g = sample_gnp(cfg.n, p, Seed(cfg.seed))
    meta = {"config": cfg.to_json(), "resolved_p": p}
    if cfg.format == "edge-list":
        _emit(format_edge_list(g), out)
        # The edge-list format has no room for metadata: echo it, and keep a
        # sidecar next to the file so the run can be replayed.
        echo = json.dumps(meta, sort_keys=True)
        if out is None:
            print(echo, file=sys.stderr)
        else:
            print(echo)
            _emit(_dump(meta), out + ".config.json")
        return EXIT_OK
    cap = cfg.cap if cfg.cap is not None else cfg.k + 1
    sk = build_skeleton(g, cap)
    _emit(_dump({**skeleton_to_json(sk), **meta}), out)
    if out is not None:
        print(json.dumps({"seed": cfg.seed, "resolved_p": p}))
    return EXIT_OK


def cmd_analyze(cfg: RunConfig, out: str | None) -> int:
    g = _read_graph(cfg.input)
    cap = cfg.cap if cfg.cap is not None else max(g.n - 1, 0)
    report: dict[str, Any] = {"config": cfg.to_json(), "n": g.n, "edges": g.edge_count}
    sk = build_skeleton(g, cap)
    report["f_vector"] = list(sk.f_vector[: sk.dimension + 1])
    if cfg.betti:
        report["betti"] = betti(sk, cfg.method, primes=tuple(cfg.primes)).to_json()
    if cfg.maximal_cliques:
        report["maximal_cliques"] = {str(s): count_maximal_cliques(g, s) for s in cfg.maximal_cliques}
    if cfg.lambda2:
        report["lambda2"] = lambda2(g)
    if cfg.spectrum:
        report["spectrum"] = spectrum(laplacian(g)).to_json()
    if cfg.links:
        links = []
        full = sk if max(len(f) for f in cfg.links) - 1 <= sk.cap else build_skeleton(g, g.n)
        for face in cfg.links:
            link, labels = link_graph(full, tuple(face))
            links.append({"face": face, "labels": list(labels), "lambda2": lambda2(link)})
        report["links"] = links
    _emit(_dump(report), out)
    return EXIT_OK


def cmd_certify(cfg: RunConfig, out: str | None) -> int:
    g = _read_graph(cfg.input)
    res = vanishing_pipeline(g, cfg.k, audit=cfg.audit)
    report: dict[str, Any] = {"config": cfg.to_json(), **res.to_json()}
    ok = res.certificate.certified
    if cfg.property_t:
        t = zuk_certify(build_skeleton(g, 2))
        report["property_t"] = t.to_json()
        ok = ok and t.certified
    _emit(_dump(report), out)
    return EXIT_OK if ok else EXIT_NOT_CERTIFIED


def _trial_config(cfg: RunConfig, statistic: str) -> TrialConfig:
    p = cfg.p[0] if cfg.p else None
    c = cfg.c[0] if cfg.c else None
    if cfg.eps is not None:
        p = upper_threshold(cfg.n, cfg.k, cfg.eps)
    return TrialConfig(statistic, cfg.n, cfg.k, p, c, cfg.trials, cfg.seed, cfg.method, cfg.audit)


def _write_records(path: str, cfg: RunConfig, groups: Sequence[tuple[float | None, Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps({"config": cfg.to_json()}, sort_keys=True) + "\n")
        for x, record in groups:
            for t in record.trials:
                row = dict(t) if x is None else {"grid": x, **t}
                fh.write(json.dumps(row, sort_keys=True) + "\n")


def cmd_sweep(cfg: RunConfig, out: str | None, jobs: int, records: str | None) -> int:
    axis = "p" if cfg.p is not None else "c"
    grid = cfg.p if cfg.p is not None else cfg.c
    base = _trial_config(cfg, cfg.statistic)
    result = sweep(grid, base, axis=axis, jobs=jobs)
    if records:
        _write_records(records, cfg, list(zip(result.grid, result.records)))
    if cfg.format == "csv":
        header = "# config: " + json.dumps(cfg.to_json(), sort_keys=True) + "\n"
        _emit(header + sweep_csv(result), out)
    else:
        _emit(_dump({"config": cfg.to_json(), **result.summary()}), out)
    return EXIT_OK


def cmd_poisson(cfg: RunConfig, out: str | None, jobs: int, records: str | None) -> int:
    tc = _trial_config(cfg, "maximal_cliques")
    if cfg.c is not None:
        mu = poisson_mean(cfg.k, cfg.c[0])
    else:
        mu = expected_maximal_cliques(cfg.n, cfg.k, tc.edge_probability)
    record = run_trials(tc, jobs)
    fit = poisson_fit(record, mu)
    if records:
        _write_records(records, cfg, [(None, record)])
    summary = {
        **record.summary(),
        "config": cfg.to_json(),
        "trial_config": tc.to_json(),
        "resolved_p": tc.edge_probability,
        "mu": mu,
        "expected_finite_n": expected_maximal_cliques(cfg.n, cfg.k, tc.edge_probability),
        "fit": fit.to_json(),
    }
    _emit(_dump(summary), out)
    return EXIT_OK


def run(cfg: RunConfig, out: str | None = None, jobs: int | None = None, records: str | None = None) -> int:
    cfg.validate()
    jobs = default_jobs() if jobs is None else jobs
    if cfg.command == "gen":
        return cmd_gen(cfg, out)
    if cfg.command == "analyze":
        return cmd_analyze(cfg, out)
    if cfg.command == "certify":
        return cmd_certify(cfg, out)
    if cfg.command == "sweep":
        return cmd_sweep(cfg, out, jobs, records)
    return cmd_poisson(cfg, out, jobs, records)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = config_from_args(args)
        return run(cfg, args.out, args.jobs, args.records)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_ERROR
    except EdgeListError as exc:
        print(f"randflag: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, KeyError, OSError, ArithmeticError) as exc:
        print(f"randflag: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
