"""Command-line front end for desk-scale experiments.

Five subcommands: `topo` writes a network file, `paths` censuses disjoint
overlay paths, `reliability` tabulates analytic and simulated delivery
rates, `simulate` runs full key-exchange sessions, and `attack-sweep`
scans compromise fractions. Every run writes one delimited artifact headed
by a `# kpsec-sim` comment line and, unless --no-fig is given, a PNG next
to it. A `--config` file supplies key=value defaults that explicit flags
override. Exit status is 0 only when the artifact was fully written.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

from . import __version__
from .adversary import (
    OBSERVE,
    SUBSTITUTE_SHARES,
    AdversarySpec,
    MonteCarloEstimate,
    ReliabilityParams,
    attack_sweep,
    crossing_fraction,
    monte_carlo_reliability,
    reliability_analytic,
)
from .crypto import SECP256K1, TOY_GROUP
from .netmodel import save_network
from .paths import path_length_stats, write_stats_csv
from .protocol import (
    Network,
    ProtocolError,
    SessionConfig,
    run_session,
)
from .streams import child_seed, stream
from . import figures

GROUPS = {"secp256k1": SECP256K1, "toy": TOY_GROUP}


def _header(cmd: str, seed: int) -> str:
    return f"# kpsec-sim v{__version__} cmd={cmd} seed={seed}"


def _fig_path(out: str) -> str:
    return str(Path(out).with_suffix(".png"))


def _write_text(out: str, text: str) -> None:
    Path(out).write_text(text)


def _parse_ints(spec: str) -> list[int]:
    """Accepts `3`, `1,2,5`, `1:8`, and `1:9:2` (inclusive ranges)."""
    if ":" in spec:
        parts = [int(p) for p in spec.split(":")]
        if len(parts) == 2:
            lo, hi, step = parts[0], parts[1], 1
        elif len(parts) == 3:
            lo, hi, step = parts
        else:
            raise ValueError(f"bad integer range {spec!r}")
        if step < 1 or hi < lo:
            raise ValueError(f"bad integer range {spec!r}")
        return list(range(lo, hi + 1, step))
    return [int(p) for p in spec.split(",")]


def _parse_floats(spec: str) -> list[float]:
    return [float(p) for p in spec.split(",")]


def _parse_fractions(spec: str) -> list[float]:
    """`a:b:step`, inclusive of b up to rounding, or a comma list."""
    if ":" not in spec:
        return _parse_floats(spec)
    parts = [float(p) for p in spec.split(":")]
    if len(parts) != 3:
        raise ValueError(f"bad fraction range {spec!r}")
    lo, hi, step = parts
    if step <= 0 or hi < lo:
        raise ValueError(f"bad fraction range {spec!r}")
    out = []
    i = 0
    while True:
        x = round(lo + i * step, 10)
        if x > hi + 1e-9:
            break
        out.append(x)
        i += 1
    return out


def _parse_adversary(spec: str, capability: str, seed: int):
    if spec == "none":
        return None
    caps = {
        "observe": frozenset({OBSERVE}),
        "substitute": frozenset({OBSERVE, SUBSTITUTE_SHARES}),
    }[capability]
    kind, _, value = spec.partition(":")
    if kind == "fraction":
        return AdversarySpec(model="fraction", fraction=float(value),
                             capabilities=caps, seed=seed)
    if kind == "count":
        return AdversarySpec(model="count", count=int(value),
                             capabilities=caps, seed=seed)
    raise ValueError(f"unknown adversary {spec!r}, "
                     "expected none, fraction:<p>, or count:<m>")


def _load_or_generate(args, group) -> Network:
    if args.net:
        return Network.load(args.net, group=group)
    if args.n is None or args.k is None:
        raise ValueError("give --net or both --n and --k")
    return Network.generate(args.n, args.k, args.side, args.radio_range,
                            args.seed, group=group)


# -- subcommands -------------------------------------------------------------


def cmd_topo(args) -> None:
    net = Network.generate(args.n, args.k, args.side, args.radio_range,
                           args.seed)
    buf = io.StringIO()
    buf.write(_header("topo", args.seed) + "\n")
    save_network(buf, net.topo, net.keyrings, args.seed)
    _write_text(args.out, buf.getvalue())
    if not args.no_fig:
        figures.plot_topology(net.topo, net.keyrings, _fig_path(args.out))
    print(f"wrote {args.out}: n={net.n} k={net.k} "
          f"physical_edges={net.topo.edge_count()} "
          f"overlay_edges={net.overlay.edge_count()}")


def cmd_paths(args) -> None:
    net = _load_or_generate(args, GROUPS["toy"])
    rng = stream(args.seed, "pair-sample")
    pairs = []
    while len(pairs) < args.pairs:
        s = rng.randrange(net.n)
        d = rng.randrange(net.n)
        if s != d:
            pairs.append((s, d))
    stats = path_length_stats(net.overlay, pairs)
    buf = io.StringIO()
    write_stats_csv(stats, buf, comment=_header("paths", args.seed))
    _write_text(args.out, buf.getvalue())
    if not args.no_fig:
        figures.plot_path_stats(stats, _fig_path(args.out))
    print(f"wrote {args.out}: pairs={len(stats.rows)} "
          f"skipped={stats.skipped} mean_paths={stats.count_mean():.2f}")


def cmd_reliability(args) -> None:
    ps = _parse_floats(args.p)
    des = _parse_ints(args.de)
    rhos = _parse_ints(args.rho)
    rows = []
    for p in ps:
        for de in des:
            for rho in rhos:
                params = ReliabilityParams(p=p, de=de, rho=rho)
                analytic = reliability_analytic(params)
                est = None
                if args.trials > 0:
                    est = monte_carlo_reliability(
                        params, args.trials,
                        seed=child_seed(args.seed, f"mc:{p}:{de}", rho),
                    )
                rows.append((params, analytic, est))
    buf = io.StringIO()
    buf.write(_header("reliability", args.seed) + "\n")
    writer = csv.writer(buf)
    writer.writerow(["p", "de", "rho", "R_analytic", "R_mc", "stderr"])
    for params, analytic, est in rows:
        mc = f"{est.mean:.8f}" if est else ""
        se = f"{est.stderr:.8f}" if est else ""
        writer.writerow([f"{params.p:g}", params.de, params.rho,
                         f"{analytic:.8f}", mc, se])
    _write_text(args.out, buf.getvalue())
    if not args.no_fig:
        fig_rows = [
            {"p": params.p, "de": params.de, "rho": params.rho,
             "R_analytic": analytic,
             "R_mc": est.mean if est else None}
            for params, analytic, est in rows
        ]
        figures.plot_reliability(fig_rows, _fig_path(args.out))
    worst = 0.0
    if args.trials > 0:
        worst = max(abs(est.mean - analytic) for _, analytic, est in rows)
    print(f"wrote {args.out}: cells={len(rows)} trials={args.trials} "
          f"max_mc_gap={worst:.5f}")


def cmd_simulate(args) -> None:
    if args.payload_size < 1:
        raise ValueError("payload size must be at least 1")
    group = GROUPS[args.group]
    net = _load_or_generate(args, group)
    reports = []
    rows = []
    for i in range(args.sessions):
        session_seed = child_seed(args.seed, "session", i)
        adversary = _parse_adversary(
            args.adversary, args.capability,
            seed=child_seed(args.seed, "adversary", i),
        )
        rng = stream(args.seed, "session-pair", i)
        report = None
        for _ in range(64):
            s = rng.randrange(net.n)
            d = rng.randrange(net.n)
            if s == d:
                continue
            cfg = SessionConfig(source=s, destination=d, rho=args.rho,
                                theta=args.theta,
                                payload=bytes(args.payload_size))
            try:
                report = run_session(net, cfg, adversary=adversary,
                                     seed=session_seed)
            except ProtocolError:
                continue
            break
        if report is None:
            rows.append([session_seed, net.n, net.k, args.rho, args.theta,
                         0, "no-usable-pair", 0, 0, 0, 0])
            continue
        reports.append(report)
        rows.append([
            session_seed, net.n, net.k, args.rho, args.theta,
            int(report.success),
            "" if report.success else report.failure_reason,
            report.de_total, report.key_exchange_bytes,
            report.phase_rounds[0] + report.phase_rounds[1],
            report.data_path_physical_hops,
        ])
    buf = io.StringIO()
    buf.write(_header("simulate", args.seed) + "\n")
    writer = csv.writer(buf)
    writer.writerow(["seed", "n", "k", "rho", "theta", "success", "reason",
                     "de_total", "kx_bytes", "kx_rounds", "data_hops"])
    writer.writerows(rows)
    _write_text(args.out, buf.getvalue())
    if not args.no_fig:
        figures.plot_sessions(reports, _fig_path(args.out))
    ok = sum(r.success for r in reports)
    print(f"wrote {args.out}: sessions={args.sessions} success={ok} "
          f"failed={args.sessions - ok}")


def cmd_attack_sweep(args) -> None:
    fractions = _parse_fractions(args.fractions)
    rows = attack_sweep(n=args.n, k=args.k, rho=args.rho, theta=args.theta,
                        fractions=fractions, trials=args.trials,
                        seed=args.seed, jobs=args.jobs)
    buf = io.StringIO()
    buf.write(_header("attack-sweep", args.seed) + "\n")
    writer = csv.writer(buf)
    writer.writerow(["fraction", "trials", "mean_secure_paths",
                     "std_secure_paths", "attack_success_rate"])
    for r in rows:
        writer.writerow([f"{r.fraction:g}", r.trials,
                         f"{r.mean_secure_paths:.6f}",
                         f"{r.std_secure_paths:.6f}",
                         f"{r.attack_success_rate:.6f}"])
    _write_text(args.out, buf.getvalue())
    if not args.no_fig:
        figures.plot_attack_sweep(rows, args.theta, _fig_path(args.out))
    xing = crossing_fraction(rows)
    print(f"wrote {args.out}: fractions={len(rows)} trials={args.trials} "
          f"half-crossing={xing if xing is not None else 'none'}")


# -- wiring ------------------------------------------------------------------


def _add_common(sub) -> None:
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", required=True,
                     help="output file; figure lands next to it as .png")
    sub.add_argument("--no-fig", action="store_true",
                     help="skip figure rendering")
    sub.add_argument("--config",
                     help="key=value file read as defaults; flags override")


def _add_network_source(sub) -> None:
    sub.add_argument("--net", help="network file from the topo subcommand")
    sub.add_argument("--n", type=int)
    sub.add_argument("--k", type=int)
    sub.add_argument("--side", type=float, default=100.0)
    sub.add_argument("--range", dest="radio_range", type=float, default=30.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kpsec-sim",
        description="Key-exchange experiments on keyring overlay networks.",
    )
    parser.add_argument("--version", action="version",
                        version=f"kpsec-sim {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    topo = sub.add_parser("topo", help="generate and save a network")
    topo.add_argument("--n", type=int, required=True)
    topo.add_argument("--k", type=int, required=True)
    topo.add_argument("--side", type=float, default=100.0)
    topo.add_argument("--range", dest="radio_range", type=float,
                      default=30.0)
    _add_common(topo)
    topo.set_defaults(func=cmd_topo)

    paths = sub.add_parser("paths", help="census vertex-disjoint paths")
    _add_network_source(paths)
    paths.add_argument("--pairs", type=int, default=100)
    _add_common(paths)
    paths.set_defaults(func=cmd_paths)

    rel = sub.add_parser("reliability",
                         help="delivery reliability, analytic and simulated")
    rel.add_argument("--p", default="0.05,0.1,0.2",
                     help="compromise probabilities, comma list")
    rel.add_argument("--de", default="1:8",
                     help="relays per path, list or lo:hi[:step]")
    rel.add_argument("--rho", default="1:10",
                     help="disjoint paths, list or lo:hi[:step]")
    rel.add_argument("--trials", type=int, default=0,
                     help="simulation trials per cell, 0 for analytic only")
    _add_common(rel)
    rel.set_defaults(func=cmd_reliability)

    sim = sub.add_parser("simulate", help="run end-to-end sessions")
    _add_network_source(sim)
    sim.add_argument("--rho", type=int, required=True)
    sim.add_argument("--theta", type=int, required=True)
    sim.add_argument("--sessions", type=int, default=100)
    sim.add_argument("--adversary", default="none",
                     help="none, fraction:<p>, or count:<m>")
    sim.add_argument("--capability", choices=("observe", "substitute"),
                     default="observe")
    sim.add_argument("--payload-size", type=int, default=64)
    sim.add_argument("--group", choices=sorted(GROUPS), default="secp256k1")
    _add_common(sim)
    sim.set_defaults(func=cmd_simulate)

    sweep = sub.add_parser("attack-sweep",
                           help="attacker success versus compromise fraction")
    sweep.add_argument("--n", type=int, required=True)
    sweep.add_argument("--k", type=int, required=True)
    sweep.add_argument("--rho", type=int, required=True)
    sweep.add_argument("--theta", type=int, required=True)
    sweep.add_argument("--fractions", default="0.05:0.6:0.05",
                       help="lo:hi:step or comma list")
    sweep.add_argument("--trials", type=int, default=200)
    sweep.add_argument("--jobs", type=int, default=1)
    _add_common(sweep)
    sweep.set_defaults(func=cmd_attack_sweep)

    return parser


_FLAG_KEYS = {"--no-fig"}


def _apply_config(argv: list[str]) -> list[str]:
    """Splice config-file pairs in right after the subcommand so explicit
    flags, which come later, win."""
    path = None
    rest = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok == "--config":
            if i + 1 >= len(argv):
                raise ValueError("--config needs a file argument")
            path = argv[i + 1]
            i += 2
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
            i += 1
        else:
            rest.append(tok)
            i += 1
    if path is None:
        return argv
    injected = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"config line {line!r} is not key=value")
        flag = "--" + key.strip().replace("_", "-")
        value = value.strip()
        if flag in _FLAG_KEYS:
            if value.lower() in ("1", "true", "yes", "on"):
                injected.append(flag)
        else:
            injected.extend([flag, value])
    if rest and not rest[0].startswith("-"):
        return rest[:1] + injected + rest[1:]
    return injected + rest


def main(argv=None) -> int:
    raw = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_apply_config(raw))
        args.func(args)
    except SystemExit:
        raise
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
