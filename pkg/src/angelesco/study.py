"""End-to-end studies: zero distributions, leading coefficients, remainders.

A study takes a JSON-serializable configuration (system, degree
schedule, precision, grids, probes, seed), runs the full pipeline per
degree with stage isolation, and persists every intermediate artifact
(polynomials, roots, tables) content-addressed through an
ArtifactStore.  Exact mode makes the outputs byte-reproducible.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .equilibrium import AngelescoProblem, solve_angelesco
from .hermite_pade import (
    DegreeVector,
    first_kind_required_orders,
    normalize,
    remainder_series,
    second_kind_required_order,
    solve_first_kind,
    solve_second_kind,
)
from .measures import (
    DiscreteMeasure,
    IntervalSet,
    counting_measure,
    kolmogorov_distance,
    cauchy_transform,
    potential,
)
from .persist import ArtifactStore, canonical_json, content_hash
from .scalars import EXACT, Scalar
from .series import (
    JacobiDensity,
    MarkovSpec,
    MomentOracle,
    PolynomialDensity,
    expand_markov,
    markov_value,
)


class ConfigError(ValueError):
    pass


class StageFailure(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def _parse_rational(x):
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, float):
        if not x.is_integer():
            raise ConfigError(
                f"non-integer float {x} in exact data; write it as a string "
                "like '1/2'"
            )
        return Fraction(int(x))
    raise ConfigError(f"cannot parse rational from {x!r}")


def parse_density(doc):
    kind = doc.get("type", "polynomial")
    if kind == "polynomial":
        return PolynomialDensity(tuple(_parse_rational(c) for c in doc["coeffs"]))
    if kind == "jacobi":
        return JacobiDensity(
            _parse_rational(doc["alpha"]),
            _parse_rational(doc["beta"]),
            _parse_rational(doc.get("mass", 1)),
        )
    if kind == "moments":
        vals = tuple(_parse_rational(v) for v in doc["values"])
        return MomentOracle(vals)
    raise ConfigError(f"unknown density type {kind!r}")


def parse_markov_system(doc):
    comps = doc.get("components")
    if not comps:
        raise ConfigError("markov system needs a components list")
    specs = []
    for c in comps:
        a, b = c["interval"]
        specs.append(MarkovSpec((_parse_rational(a), _parse_rational(b)),
                                parse_density(c["density"])))
    return specs


@dataclass(frozen=True)
class StudyConfig:
    name: str
    system: dict
    schedule: tuple  # ints, or degree-vector tuples
    scalar: Scalar = EXACT
    grid_m: int = 400
    probe_radius: float = 3.0
    probe_count: int = 8
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        sched = tuple(
            tuple(int(d) for d in entry) if isinstance(entry, (list, tuple))
            else int(entry)
            for entry in self.schedule
        )
        if not sched:
            raise ConfigError("empty degree schedule")
        keys = [max(e) if isinstance(e, tuple) else e for e in sched]
        if any(b <= a for a, b in zip(keys, keys[1:])):
            raise ConfigError("degree schedule must be strictly increasing")
        object.__setattr__(self, "schedule", sched)
        specs = self.markov_specs()
        hull = max(
            max(abs(float(a)), abs(float(b))) for a, b in
            (s.interval for s in specs)
        )
        if self.probe_radius <= hull:
            raise ConfigError(
                f"probe radius {self.probe_radius} must lie strictly outside "
                f"the branch points (max modulus {hull})"
            )

    def markov_specs(self):
        if self.system.get("type", "markov") != "markov":
            raise ConfigError("studies currently ingest markov systems")
        return parse_markov_system(self.system)

    def interval_sets(self):
        out = []
        for s in self.markov_specs():
            a, b = s.interval
            out.append(IntervalSet(((float(a), float(b)),)))
        return out

    def probes(self):
        return [
            self.probe_radius * complex(math.cos(2 * math.pi * k / self.probe_count),
                                        math.sin(2 * math.pi * k / self.probe_count))
            for k in range(self.probe_count)
        ]

    def degree_vector(self, entry) -> DegreeVector:
        s = len(self.markov_specs())
        if isinstance(entry, tuple):
            if len(entry) != s:
                raise ConfigError("degree vector length must match the system")
            return DegreeVector(entry)
        return DegreeVector.diagonal(entry, s)

    def normalization_degree(self, entry) -> int:
        return max(entry) if isinstance(entry, tuple) else int(entry)

    def to_json(self):
        return {
            "name": self.name,
            "system": self.system,
            "schedule": [list(e) if isinstance(e, tuple) else e
                         for e in self.schedule],
            "scalar": self.scalar.to_json(),
            "grid_m": self.grid_m,
            "probe_radius": self.probe_radius,
            "probe_count": self.probe_count,
            "seed": self.seed,
            "workers": self.workers,
        }

    @staticmethod
    def from_json(doc):
        try:
            return StudyConfig(
                name=doc["name"],
                system=doc["system"],
                schedule=tuple(
                    tuple(e) if isinstance(e, list) else e
                    for e in doc["schedule"]
                ),
                scalar=Scalar.from_json(doc.get("scalar", {"kind": "exact-rational"})),
                grid_m=doc.get("grid_m", 400),
                probe_radius=doc.get("probe_radius", 3.0),
                probe_count=doc.get("probe_count", 8),
                seed=doc.get("seed", 0),
                workers=doc.get("workers", 1),
            )
        except KeyError as exc:
            raise ConfigError(f"missing config key {exc}") from exc


@dataclass
class StudyReport:
    study_id: str
    tables: dict  # name -> (header, rows)
    failures: tuple
    equilibrium_w: tuple
    manifest: dict = None


# ---------------------------------------------------------------------------
# shared pipeline pieces
# ---------------------------------------------------------------------------


def _equilibrium_targets(cfg: StudyConfig, masses=None):
    problem = AngelescoProblem(
        tuple(cfg.interval_sets()),
        masses=masses,
        m_per_interval=cfg.grid_m,
    )
    return problem, solve_angelesco(problem)


def _series_for(cfg, orders):
    specs = cfg.markov_specs()
    return [expand_markov(spec, order, cfg.scalar)
            for spec, order in zip(specs, orders)]


def _solve_first(cfg, d: DegreeVector):
    orders = [o + max(d) + 2 for o in first_kind_required_orders(d)]
    series = _series_for(cfg, orders)
    hp = solve_first_kind(series, d)
    return normalize(hp, "unit_c1"), series


def log_abs_exact(fr: Fraction) -> float:
    if fr == 0:
        return float("-inf")
    return _log_int(abs(fr.numerator)) - _log_int(fr.denominator)


def _log_int(n: int) -> float:
    if n.bit_length() <= 900:
        return math.log(n)
    k = n.bit_length() - 64
    return math.log(n >> k) + k * math.log(2.0)


def _log_abs_coeff(c, scalar: Scalar) -> float:
    if scalar.exact:
        return log_abs_exact(Fraction(c))
    with scalar.workprec():
        a = abs(c)
        return float(mpmath.log(a)) if a != 0 else float("-inf")


# ---------------------------------------------------------------------------
# zero-distribution study
# ---------------------------------------------------------------------------


def run_zero_distribution_study(cfg: StudyConfig, store: ArtifactStore = None) -> StudyReport:
    """Counting measures of both Hermite-Pade kinds against equilibrium.

    Per degree: solve first kind (and the second kind for Markov
    systems), split zeros per component, and report the per-component
    Kolmogorov distance and the sup over the probe circle of the Cauchy
    transform gap.  A failing degree is recorded and skipped.
    """
    specs = cfg.markov_specs()
    s = len(specs)
    problem, eq = _equilibrium_targets(cfg)
    probes = cfg.probes()
    rows = {}
    raw_hashes = {}
    failures = []

    def run_entry(idx_entry):
        idx, entry = idx_entry
        d = cfg.degree_vector(entry)
        n_norm = cfg.normalization_degree(entry)
        hp, series = _solve_first(cfg, d)
        hp_second = solve_second_kind(
            _series_for(cfg, [second_kind_required_order(n_norm, s)] * s), n_norm
        )
        artifacts = {
            f"raw/{idx:03d}/hp_first.json": hp.to_json(),
            f"raw/{idx:03d}/hp_second.json": hp_second.to_json(),
        }
        entry_rows = []
        all_second_roots = counting_measure(
            list(hp_second.P), prec_bits=_root_bits(cfg)
        )
        artifacts[f"raw/{idx:03d}/second_roots.json"] = all_second_roots.to_json()
        for k in range(s):
            iv = cfg.interval_sets()[k]
            lam = eq.components[k]
            mu_first = counting_measure(list(hp.q[k]), prec_bits=_root_bits(cfg))
            artifacts[f"raw/{idx:03d}/first_roots_{k}.json"] = mu_first.to_json()
            kol, _ = kolmogorov_distance(mu_first, lam, iv)
            sup = max(
                abs(cauchy_transform(mu_first, z) - cauchy_transform(lam, z))
                for z in probes
            )
            entry_rows.append(
                ("first", n_norm, k, float(kol), float(sup),
                 content_hash(artifacts[f"raw/{idx:03d}/first_roots_{k}.json"]))
            )
            in_k = [
                (z, m) for z, m in all_second_roots.atoms
                if iv.contains(z.real) and abs(z.imag) < 1e-8
            ]
            mass = 1.0 / n_norm
            mu_second = DiscreteMeasure(tuple((z, mass) for z, _ in in_k))
            kol2, _ = kolmogorov_distance(mu_second, lam, iv)
            sup2 = max(
                abs(cauchy_transform(mu_second, z) - cauchy_transform(lam, z))
                for z in probes
            )
            entry_rows.append(
                ("second", n_norm, k, float(kol2), float(sup2),
                 content_hash(artifacts[f"raw/{idx:03d}/second_roots.json"]))
            )
        return idx, entry_rows, artifacts

    results = _run_schedule(cfg, run_entry, failures)
    header = ["kind", "n", "component", "kolmogorov", "sup_cauchy", "artifact"]
    table_rows = []
    for idx in sorted(results):
        entry_rows, artifacts = results[idx]
        raw_hashes.update(artifacts)
        table_rows.extend(entry_rows)
    tables = {"zero_distribution": (header, table_rows)}
    return _package(cfg, store, tables, raw_hashes, failures, eq)


def _root_bits(cfg: StudyConfig) -> int:
    return max(320, cfg.scalar.precision_bits if not cfg.scalar.exact else 0)


def _run_schedule(cfg, fn, failures):
    tasks = list(enumerate(cfg.schedule))
    results = {}
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            futs = {pool.submit(fn, t): t for t in tasks}
            for fut, t in futs.items():
                try:
                    idx, entry_rows, artifacts = fut.result()
                    results[idx] = (entry_rows, artifacts)
                except Exception as exc:  # stage isolation
                    failures.append((t[1], repr(exc)))
    else:
        for t in tasks:
            try:
                idx, entry_rows, artifacts = fn(t)
                results[idx] = (entry_rows, artifacts)
            except Exception as exc:
                failures.append((t[1], repr(exc)))
    return results


def _package(cfg, store, tables, raw_hashes, failures, eq):
    report = StudyReport(
        study_id=content_hash(cfg.to_json())[:12],
        tables=tables,
        failures=tuple(failures),
        equilibrium_w=tuple(eq.w) if eq is not None else (),
    )
    if store is not None:
        for rel, doc in raw_hashes.items():
            store.write_json(rel, doc)
        for name, (header, rows) in tables.items():
            store.write_csv(f"tables/{name}.csv", header, rows)
        eq_doc = {
            "w": list(report.equilibrium_w),
            "components": [c.to_json() for c in eq.components] if eq else [],
        }
        store.write_json("equilibrium.json", eq_doc)
        report.manifest = store.finalize(
            cfg.to_json(), {"failures": [list(f) for f in failures]}
        )
    return report


# ---------------------------------------------------------------------------
# orthogonality checks
# ---------------------------------------------------------------------------


def check_orthogonality(hp, specs, center=0.0, radius=None, ks=None,
                        prec_bits=512, tol=1e-12, max_nodes=2 ** 14):
    """Contour residuals |oint R z^k dz| on a circle enclosing the system.

    Doubles the trapezoid node count until two successive estimates
    agree to ``tol`` relative, spectrally accurate for the analytic
    integrand.  Returns {k: residual}, with values scaled by the
    integrand magnitude so "zero" is meaningful across normalizations.
    """
    intervals = [tuple(map(float, s.interval)) for s in specs]
    hull = max(abs(a) for iv in intervals for a in iv)
    radius = radius or 1.5 * hull + 1.0
    if radius <= hull:
        raise ValueError("contour must enclose all supports")
    d = hp.degrees
    N = d.order_target
    ks = list(range(N - 1)) if ks is None else list(ks)

    with Scalar("big-float-complex", prec_bits).workprec():
        qs = [_poly_mp(qk, prec_bits) for qk in hp.q]
        q0 = _poly_mp(hp.q0, prec_bits)

        def R_at(z):
            acc = _polyval_mp(q0, z)
            for qk, spec in zip(qs, specs):
                acc += _polyval_mp(qk, z) * markov_value(spec, z, prec_bits)
            return acc

        out = {}
        nodes = 64
        cached = {}

        def estimate(nn):
            if nn not in cached:
                zs = [
                    center + radius * mpmath.exp(2j * mpmath.pi * j / nn)
                    for j in range(nn)
                ]
                cached[nn] = (zs, [R_at(z) for z in zs])
            zs, Rv = cached[nn]
            vals = {}
            for k in ks:
                acc = mpmath.mpc(0)
                scale = mpmath.mpf(0)
                for z, rv in zip(zs, Rv):
                    term = rv * z ** k * (1j * z)
                    acc += term
                    scale = max(scale, abs(term))
                vals[k] = (acc * 2 * mpmath.pi / nn, scale * 2 * mpmath.pi)
            return vals

        prev = estimate(nodes)
        while nodes < max_nodes:
            nodes *= 2
            cur = estimate(nodes)
            close = all(
                abs(cur[k][0] - prev[k][0]) <= tol * max(1, cur[k][1])
                for k in ks
            )
            prev = cur
            if close:
                break
        for k in ks:
            val, scale = prev[k]
            out[k] = float(abs(val) / max(scale, mpmath.mpf(1e-300)))
        return out


def _poly_mp(coeffs, prec_bits):
    out = []
    for c in coeffs:
        if isinstance(c, Fraction):
            out.append(mpmath.mpf(c.numerator) / c.denominator)
        else:
            out.append(mpmath.mpc(c))
    return out


def _polyval_mp(coeffs, z):
    acc = mpmath.mpc(0)
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def real_axis_orthogonality(hp, specs, j: int):
    """Exact value of sum_k integral q_k(x) w_k(x) x^j dx over the system.

    Only polynomial densities support the exact route; the result is a
    Fraction that must vanish for j <= N - 2.
    """
    total = Fraction(0)
    for qk, spec in zip(hp.q, specs):
        if not isinstance(spec.density, PolynomialDensity):
            raise ValueError("exact orthogonality needs polynomial densities")
        a, b = Fraction(spec.interval[0]), Fraction(spec.interval[1])
        dens = spec.density.coeffs
        for i, qc in enumerate(qk):
            for m, dc in enumerate(dens):
                e = i + m + j + 1
                total += Fraction(qc) * dc * (b ** e - a ** e) / e
    return total


# ---------------------------------------------------------------------------
# leading-coefficient study
# ---------------------------------------------------------------------------


def leading_coefficient_study(cfg: StudyConfig, store: ArtifactStore = None) -> StudyReport:
    """(1/n) log |c_k| under the c_1 = 1 normalization, against w_k - w_1."""
    problem, eq = _equilibrium_targets(cfg)
    s = len(cfg.markov_specs())
    failures = []
    raw = {}

    def run_entry(idx_entry):
        idx, entry = idx_entry
        d = cfg.degree_vector(entry)
        n_norm = cfg.normalization_degree(entry)
        hp, _ = _solve_first(cfg, d)
        if not hp.normalization.startswith("unit_c1"):
            raise StageFailure(f"c_1 vanished at degree {entry}; skipped")
        artifacts = {f"raw/{idx:03d}/hp_first.json": hp.to_json()}
        entry_rows = []
        for k in range(s):
            ck = hp.leading_coefficients[k]
            log_ck = _log_abs_coeff(ck, hp.scalar)
            rate = log_ck / n_norm
            target = eq.w[k] - eq.w[0]
            entry_rows.append(
                (n_norm, k + 1, rate, target, abs(rate - target),
                 content_hash(artifacts[f"raw/{idx:03d}/hp_first.json"]))
            )
        return idx, entry_rows, artifacts

    results = _run_schedule(cfg, run_entry, failures)
    header = ["n", "component", "log_rate", "target_w_gap", "abs_gap", "artifact"]
    rows = []
    for idx in sorted(results):
        entry_rows, artifacts = results[idx]
        raw.update(artifacts)
        rows.extend(entry_rows)
    return _package(cfg, store, {"leading_coefficients": (header, rows)},
                    raw, failures, eq)


# ---------------------------------------------------------------------------
# remainder study
# ---------------------------------------------------------------------------


def remainder_study(cfg: StudyConfig, store: ArtifactStore = None) -> StudyReport:
    """Probe-to-probe differences of (1/n) log |R_n| against potentials.

    The unknown normalization constant cancels in differences; the
    remainder log-rates converge to U^lambda + const (lambda the total
    equilibrium measure: the remainder decays like z^(-ns-s) at
    infinity while U^lambda ~ -s log|z|), so the target for a probe
    pair (a, b) is U^lambda(z_a) - U^lambda(z_b).
    """
    problem, eq = _equilibrium_targets(cfg)
    probes = cfg.probes()
    pots = [sum(potential(c, z) for c in eq.components) for z in probes]
    failures = []
    raw = {}

    def run_entry(idx_entry):
        idx, entry = idx_entry
        d = cfg.degree_vector(entry)
        n_norm = cfg.normalization_degree(entry)
        hp, series = _solve_first(cfg, d)
        if hp.achieved_order is None:
            raise StageFailure(
                f"remainder vanishes to truncation at degree {entry}; the "
                "rate study does not apply to rational reproduction"
            )
        prec = _remainder_precision(cfg, hp)
        logs = _remainder_logs(hp, cfg.markov_specs(), probes, prec)
        artifacts = {
            f"raw/{idx:03d}/remainder_logs.json": {
                "n": n_norm,
                "probes": [[z.real, z.imag] for z in probes],
                "log_abs": logs,
            }
        }
        entry_rows = []
        h = content_hash(artifacts[f"raw/{idx:03d}/remainder_logs.json"])
        for i in range(len(probes)):
            for j in range(i + 1, len(probes)):
                dev = abs(
                    (logs[i] - logs[j]) / n_norm - (pots[i] - pots[j])
                )
                entry_rows.append((n_norm, i, j, dev, h))
        return idx, entry_rows, artifacts

    results = _run_schedule(cfg, run_entry, failures)
    header = ["n", "probe_a", "probe_b", "deviation", "artifact"]
    rows = []
    for idx in sorted(results):
        entry_rows, artifacts = results[idx]
        raw.update(artifacts)
        rows.extend(entry_rows)
    return _package(cfg, store, {"remainder_rates": (header, rows)},
                    raw, failures, eq)


def _remainder_precision(cfg: StudyConfig, hp) -> int:
    if cfg.scalar.exact:
        bits = max(
            abs(Fraction(c).numerator).bit_length()
            + Fraction(c).denominator.bit_length()
            for qk in (hp.q0,) + hp.q for c in qk
        )
    else:
        bits = cfg.scalar.precision_bits
    N = hp.degrees.order_target
    return int(bits + (N + max(hp.degrees)) * math.log2(cfg.probe_radius + 2) + 128)


def _remainder_logs(hp, specs, probes, prec):
    with Scalar("big-float-complex", prec).workprec():
        qs = [_poly_mp(qk, prec) for qk in hp.q]
        q0 = _poly_mp(hp.q0, prec)
        out = []
        for z in probes:
            zz = mpmath.mpc(z)
            acc = _polyval_mp(q0, zz)
            for qk, spec in zip(qs, specs):
                acc += _polyval_mp(qk, zz) * markov_value(spec, zz, prec)
            if acc == 0:
                raise StageFailure("remainder vanished exactly at a probe")
            out.append(float(mpmath.log(abs(acc))))
        return out
