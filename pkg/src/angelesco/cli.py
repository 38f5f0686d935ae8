"""Command-line interface.

Subcommands mirror the pipeline stages: ``series``, ``hp``,
``equilibrium``, ``scurve``, ``study``, ``plot``.  Every subcommand
takes --config <path> and --out <dir>; --precision-bits and --seed
override the config.  Exit codes: 0 success, 2 configuration error,
3 numerical failure (partial results are left in the output directory).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .equilibrium import AngelescoProblem, EquilibriumError, solve_angelesco
from .hermite_pade import DegreeVector, solve_first_kind, solve_second_kind
from .measures import IntervalSet
from .persist import ArtifactStore, canonical_json, study_id
from .scalars import Scalar
from .series import expand_jacobi, expand_markov, JacobiSpec
from .study import (
    ConfigError,
    StudyConfig,
    leading_coefficient_study,
    parse_markov_system,
    remainder_study,
    run_zero_distribution_study,
    _parse_rational,
)
from .svgplot import emit_plots, trajectory_portrait_svg, zero_scatter_svg


class NumericalFailure(RuntimeError):
    pass


def _load_config(args) -> dict:
    try:
        doc = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    if args.precision_bits is not None:
        doc.setdefault("scalar", {})
        doc["scalar"] = {"kind": "big-float-complex",
                         "precision_bits": args.precision_bits}
    if args.seed is not None:
        doc["seed"] = args.seed
    return doc


def _scalar_from(doc) -> Scalar:
    return Scalar.from_json(doc.get("scalar", {"kind": "exact-rational"}))


def _store(args, doc) -> ArtifactStore:
    root = Path(args.out) / study_id(doc)
    return ArtifactStore(root)


def cmd_series(args):
    doc = _load_config(args)
    scalar = _scalar_from(doc)
    order = int(doc["order"])
    kind = doc.get("kind", "markov")
    if kind == "markov":
        specs = parse_markov_system(doc["system"])
        out = [expand_markov(s, order, scalar).to_json() for s in specs]
    elif kind == "jacobi":
        spec = JacobiSpec(
            tuple(_parse_number(a) for a in doc["points"]),
            tuple(_parse_number(a) for a in doc["exponents"]),
        )
        out = [expand_jacobi(spec, order, scalar).to_json()]
    else:
        raise ConfigError(f"unknown series kind {kind!r}")
    store = _store(args, doc)
    store.write_json("series.json", out)
    store.finalize(doc)
    print(store.root / "series.json")


def _parse_number(x):
    if isinstance(x, list):
        return complex(x[0], x[1])
    if isinstance(x, str) and "/" in x:
        return _parse_rational(x)
    return x


def cmd_hp(args):
    doc = _load_config(args)
    scalar = _scalar_from(doc)
    specs = parse_markov_system(doc["system"])
    kind = doc.get("kind", "first")
    store = _store(args, doc)
    if kind == "first":
        d = DegreeVector(tuple(doc["degrees"]))
        from .hermite_pade import first_kind_required_orders

        orders = [o + max(d) + 2 for o in first_kind_required_orders(d)]
        series = [expand_markov(s, o, scalar) for s, o in zip(specs, orders)]
        hp = solve_first_kind(series, d)
        store.write_json("hp_first.json", hp.to_json())
    elif kind == "second":
        n = int(doc["n"])
        from .hermite_pade import second_kind_required_order

        order = second_kind_required_order(n, len(specs))
        series = [expand_markov(s, order, scalar) for s in specs]
        hp = solve_second_kind(series, n)
        store.write_json("hp_second.json", hp.to_json())
    else:
        raise ConfigError(f"unknown hp kind {kind!r}")
    store.finalize(doc)
    print(store.root)


def cmd_equilibrium(args):
    doc = _load_config(args)
    sets = tuple(
        IntervalSet(tuple(tuple(float(v) for v in iv) for iv in comp))
        for comp in doc["interval_sets"]
    )
    problem = AngelescoProblem(
        sets,
        masses=tuple(doc["masses"]) if "masses" in doc else None,
        m_per_interval=doc.get("grid_m", 400),
    )
    try:
        sol = solve_angelesco(problem)
    except EquilibriumError as exc:
        raise NumericalFailure(str(exc)) from exc
    store = _store(args, doc)
    store.write_json("equilibrium.json", {
        "w": list(sol.w),
        "energy": sol.energy,
        "sweeps": sol.sweeps,
        "kkt_residuals": [list(r) for r in sol.kkt_residuals],
        "components": [c.to_json() for c in sol.components],
    })
    for k, c in enumerate(sol.components):
        rows = list(zip(c.nodes, c.weights, c.density_estimates()))
        store.write_csv(f"density_{k}.csv", ["node", "weight", "density"], rows)
    store.finalize(doc)
    print(store.root)


def cmd_scurve(args):
    doc = _load_config(args)
    from .scurve import (
        SCurveError,
        chebotarev_solve,
        fuse_partition,
        g_function_Y,
    )

    mode = doc.get("mode", "chebotarev")
    store = _store(args, doc)
    seed = int(doc.get("seed", 0))
    try:
        if mode == "chebotarev":
            pts = [_as_complex(p) for p in doc["points"]]
            res = chebotarev_solve(pts, seed=seed)
            store.write_json("chebotarev.json", res.to_json())
            store.write_text("plots/scurve.svg", trajectory_portrait_svg(res))
        elif mode == "fuse":
            pts = [_as_complex(p) for p in doc["points"]]
            res = fuse_partition(pts, doc["partition"], seed=seed)
            store.write_json("fused.json", res.to_json())
            store.write_text("plots/scurve.svg", trajectory_portrait_svg(res))
        elif mode == "gfunction":
            data = g_function_Y([_as_complex(c) for c in doc["X"]])
            store.write_json("gfunction.json", data.to_json())
        else:
            raise ConfigError(f"unknown scurve mode {mode!r}")
    except SCurveError as exc:
        raise NumericalFailure(str(exc)) from exc
    store.finalize(doc)
    print(store.root)


def _as_complex(p):
    if isinstance(p, list):
        return complex(p[0], p[1])
    return complex(p)


def cmd_study(args):
    doc = _load_config(args)
    cfg = StudyConfig.from_json(doc)
    store = _store(args, doc)
    which = doc.get("studies", ["zero_distribution"])
    runners = {
        "zero_distribution": run_zero_distribution_study,
        "leading_coefficients": leading_coefficient_study,
        "remainder_rates": remainder_study,
    }
    hard_failures = []
    for name in which:
        if name not in runners:
            raise ConfigError(f"unknown study {name!r}")
        sub = ArtifactStore(store.root / name)
        report = runners[name](cfg, sub)
        if report.failures:
            hard_failures.extend(report.failures)
    store.finalize(doc, {"studies": which})
    print(store.root)
    if hard_failures:
        raise NumericalFailure(f"{len(hard_failures)} schedule entries failed; "
                               "partial results persisted")


def cmd_plot(args):
    doc = _load_config(args)
    report_dir = Path(doc["report_dir"])
    eq_doc = json.loads((report_dir / "equilibrium.json").read_text())
    from .measures import GridMeasure

    comps = [GridMeasure.from_json(c) for c in eq_doc["components"]]
    zero_sets_per_n = {}
    raw = report_dir / "raw"
    if raw.exists():
        for sub in sorted(raw.iterdir()):
            hpf = sub / "hp_first.json"
            if not hpf.exists():
                continue
            n = max(json.loads(hpf.read_text())["degrees"])
            zsets = []
            for k in range(len(comps)):
                f = sub / f"first_roots_{k}.json"
                if f.exists():
                    from .measures import DiscreteMeasure

                    m = DiscreteMeasure.from_json(json.loads(f.read_text()))
                    zsets.append([z for z, _ in m.atoms])
            if zsets:
                zero_sets_per_n[n] = zsets
    written = emit_plots(None, comps, zero_sets_per_n, report_dir)
    for rel in written:
        print(report_dir / rel)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="angelesco",
        description="Hermite-Pade / equilibrium / S-curve studies",
    )
    parser.add_argument("--version", action="version", version="angelesco 0.1.0")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in [
        ("series", cmd_series),
        ("hp", cmd_hp),
        ("equilibrium", cmd_equilibrium),
        ("scurve", cmd_scurve),
        ("study", cmd_study),
        ("plot", cmd_plot),
    ]:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default="out")
        p.add_argument("--precision-bits", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.set_defaults(fn=fn)
    args = parser.parse_args(argv)
    try:
        args.fn(args)
    except (ConfigError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
