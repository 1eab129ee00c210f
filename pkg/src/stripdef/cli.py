"""Command line driver: Schottky data -> representation -> cocycle -> scans,
domain and tiling, with JSON/CSV/OBJ artifacts."""

from __future__ import annotations

import csv
import io
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import click
import numpy as np

from . import cocycle as cc
from . import crooked as ck
from . import freegroup as fg
from . import margulis as mg
from . import numcore as nc
from . import posrep as pr

EXIT_PASS, EXIT_FAIL, EXIT_AMBIGUOUS, EXIT_CONFIG = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str, artifact: dict | None = None):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.artifact = artifact or {}


# ----------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    n: int = 1
    schottky: str | None = None
    scales: list | None = None
    max_len: int = 6
    disjoint_samples: int = 1000
    tile_points: int = 1000
    radius: float = 10.0
    max_depth: int = 64
    seed: int = 0
    backend: str = "exact"
    eps_sign: float | None = None
    eps_eq: float | None = None
    out_dir: str = "out"

    def validate(self) -> "RunConfig":
        if int(self.n) < 1:
            raise ConfigError("n must be at least 1")
        if self.backend not in ("exact", "float"):
            raise ConfigError("backend must be 'exact' or 'float'")
        if self.max_len < 1 or self.max_depth < 1:
            raise ConfigError("scan length and max depth must be at least 1")
        if self.radius < 0 or self.tile_points < 0 or self.disjoint_samples < 0:
            raise ConfigError("radius and sample counts must be non-negative")
        if self.scales is not None:
            flat = np.ravel(np.asarray(self.scales, dtype=float))
            if flat.size == 0 or np.any(flat <= 0) or not np.all(np.isfinite(flat)):
                raise ConfigError("arc scales must be positive")
        for name in ("eps_sign", "eps_eq"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f"{name} must be positive")
        return self

    @classmethod
    def from_json(cls, data: dict) -> "RunConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data).validate()
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def tolerance(self) -> dict:
        return {k: v for k, v in (("eps_sign", self.eps_sign), ("eps_eq", self.eps_eq)) if v is not None}


@dataclass
class RunReport:
    stages: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(s.get("status") == "PASS" for s in self.stages.values())

    def to_json(self) -> dict:
        return {"status": "PASS" if self.passed else "FAIL", "stages": self.stages, "timings": self.timings}


# ----------------------------------------------------------------------------
# loading


def load_schottky(path: str | None) -> fg.SchottkyData:
    if path is None:
        return fg.bundled_example()
    try:
        data = json.loads(Path(path).read_text())
        return fg.schottky_from_json(data)
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"cannot read Schottky data from {path}: {exc}") from exc


def parse_scales(text: str | None):
    """'1,2' (one scale per generator) or '1:2,3:4' (plus:minus per generator)."""
    if not text:
        return None
    out = []
    try:
        for part in text.split(","):
            out.append([float(x) for x in part.split(":")] if ":" in part else float(part))
    except ValueError as exc:
        raise ConfigError(f"bad scales {text!r}") from exc
    return out


def _exact_scales(scales):
    """Floats read from the command line become exact decimal fractions."""
    if scales is None:
        return None
    conv = lambda x: nc.frac(repr(float(x)))
    return [[conv(y) for y in s] if isinstance(s, (list, tuple)) else conv(s) for s in scales]


@dataclass
class Context:
    S: fg.SchottkyData
    A: fg.ArcSystem
    rep: pr.Representation
    bmap: pr.BoundaryMap
    av: cc.ArcVectors
    deformation: cc.AffineDeformation
    scales: list | None


def build_context(n: int, schottky: str | None = None, scales=None, backend: str = "exact") -> Context:
    S = load_schottky(schottky)
    if len(scales or []) not in (0, S.N):
        raise ConfigError(f"{S.N} generators but {len(scales)} scales")
    if backend == "float":
        S = fg.SchottkyData([nc.float_array(g) for g in S.gens], S.minus, S.plus)
    A = fg.dual_arc_system(S)
    rep = pr.build_representation(S, n)
    bmap = pr.build_boundary_map(rep, S, A)
    try:
        av = cc.default_arc_vectors(bmap, _exact_scales(scales))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return Context(S, A, rep, bmap, av, cc.deformation_from_arcs(av), scales)


def context_from_files(rep_path: str | None, def_path: str | None, n: int, schottky: str | None,
                       scales, backend: str = "exact") -> Context:
    """Rebuild the pipeline from rep.json / def.json, checking the stored data."""
    if rep_path is None:
        return build_context(n, schottky, scales, backend)
    try:
        data = json.loads(Path(rep_path).read_text())
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read {rep_path}: {exc}") from exc
    if "schottky" not in data:
        raise ConfigError(f"{rep_path} has no Schottky data")
    if def_path is not None:
        try:
            ddata = json.loads(Path(def_path).read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read {def_path}: {exc}") from exc
        scales = ddata.get("scales_input", scales)
    S = fg.schottky_from_json(data["schottky"])
    A = fg.dual_arc_system(S)
    rep = pr.build_representation(S, int(data["n"]))
    stored = [nc.float_array(nc.array_from_json(g)) for g in data["generators"]]
    drift = max(float(np.max(np.abs(nc.float_array(g.M) - h))) for g, h in zip(rep.gens, stored))
    if drift > 1e-9:
        raise ConfigError(f"{rep_path}: generators do not match the Schottky data (drift {drift:.3g})")
    bmap = pr.build_boundary_map(rep, S, A)
    av = cc.default_arc_vectors(bmap, _exact_scales(scales))
    ctx = Context(S, A, rep, bmap, av, cc.deformation_from_arcs(av), scales)
    if def_path is not None:
        stored_def = cc.deformation_from_json(ddata, rep)
        for i in range(1, rep.N + 1):
            if float(np.max(np.abs(stored_def.u_gen[i] - ctx.deformation.u_gen[i]))) > 1e-9:
                raise ConfigError(f"{def_path}: cocycle does not match the arc vectors")
    return ctx


def rep_json(ctx: Context) -> dict:
    out = pr.representation_to_json(ctx.rep, ctx.bmap)
    out["schottky"] = fg.schottky_to_json(ctx.S)
    return out


def def_json(ctx: Context) -> dict:
    out = cc.deformation_to_json(ctx.deformation, _exact_scales(ctx.scales))
    out["scales_input"] = ctx.scales
    return out


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ----------------------------------------------------------------------------
# stages


def semigroup_stage(n: int, trials: int, seed) -> dict:
    """Random positive semigroup elements: group membership, total positivity
    of the SL factorization and the middle-entry bound, all exact."""
    rng = nc.rng(seed)
    fails = []
    k = (2 * n - 1) ** 2
    for t in range(trials):
        params = [Fraction(int(p), int(q)) for p, q in zip(rng.integers(1, 20, k), rng.integers(1, 9, k))]
        try:
            g = pr.positive_semigroup_element(n, params)
            M = pr.sl_product(4 * n - 1, pr.sl_factorization(n, params))
            ok_group = g.form_residual == 0 and g.det_residual == 0
            ok_tp = bool(np.all(M == g.M)) and nc.is_triangular_totally_positive(M, "upper")
            ok_mid = pr.middle_entry(pr.lower_semigroup_element(n, params) @ g.M) >= 1
        except pr.CertificationError as exc:
            fails.append({"trial": t, "error": str(exc)})
            continue
        if not (ok_group and ok_tp and ok_mid):
            fails.append({"trial": t, "params": [str(p) for p in params],
                          "group": ok_group, "tp": ok_tp, "middle": bool(ok_mid)})
    return {"status": "PASS" if not fails else "FAIL", "n": n, "trials": trials,
            "certified": trials - len(fails), "failures": fails[:10]}


def control_coboundary(rep: pr.Representation, seed=0) -> cc.AffineDeformation:
    """u(g) = v - rho(g) v for a random v; exact when the monomial model exists."""
    r = nc.rng(seed)
    if rep.monomial is not None:
        ev = nc.exact_array([Fraction(int(k), 7) for k in r.integers(-20, 21, rep.J.d)])
        return cc.coboundary(rep, nc.float_array(rep.monomial.to_weight(ev)), ev)
    return cc.coboundary(rep, r.normal(size=rep.J.d))


def margulis_stage(ctx: Context, max_len: int, all_words: bool = False):
    report = mg.properness_scan(ctx.deformation, max_len, ctx.bmap, dedupe=not all_words)
    return report


def domain_stage(ctx: Context, check_disjoint: bool, samples: int, seed):
    dom = ck.build_domain(ctx.deformation, ctx.av, ctx.bmap, ctx.A)
    ss = nc.seed_sequence(seed)
    s_side, s_disj = ss.spawn(2)
    side = ck.verify_side_pairing(dom, seed=s_side)
    out = {
        "side_pairing": [asdict(r) for r in side],
        "algebraic_nesting": ck.algebraic_nesting_check(dom, ctx.av, ctx.bmap),
    }
    ok = all(r.passed for r in side) and out["algebraic_nesting"]
    if check_disjoint:
        rep = ck.wall_disjointness(dom, samples=max(1, samples // 2), seed=s_disj)
        out["disjointness"] = {f"{a}{b}": r.to_json() for (a, b), r in rep.items()}
        ok = ok and all(r.passed for r in rep.values())
    out["status"] = "PASS" if ok else "FAIL"
    out["domain"] = ck.domain_to_json(dom)
    return dom, out


def tile_stage(dom: ck.CrookedDomain, points: int, radius: float, max_depth: int, seed):
    report = ck.tiling_experiment(dom, points, radius, max_depth, seed=seed)
    out = report.to_json()
    out["status"] = "PASS" if report.located == report.samples and report.uniqueness_failures == 0 else "FAIL"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{i + 1}" for i in range(4 * dom.n - 1)])
    for p in report.failures:
        w.writerow([f"{x:.17g}" for x in p])
    return out, buf.getvalue()


def run_pipeline(cfg: RunConfig) -> RunReport:
    """gen -> margulis -> domain -> tiling, writing every artifact to cfg.out_dir."""
    cfg.validate()
    out = Path(cfg.out_dir)
    report = RunReport()
    ss = nc.seed_sequence(cfg.seed)
    s_dom, s_tile = ss.spawn(2)
    with nc.use_tolerance(**cfg.tolerance()):
        t = time.perf_counter()
        try:
            ctx = build_context(cfg.n, cfg.schottky, cfg.scales, cfg.backend)
            flags_ok = pr.verify_flag_ping_pong(ctx.rep, ctx.bmap, ctx.A)
        except ConfigError:
            raise
        except (ValueError, pr.CertificationError) as exc:
            raise StageError("gen", str(exc)) from exc
        _write(out / "rep.json", _dump(rep_json(ctx)))
        _write(out / "def.json", _dump(def_json(ctx)))
        report.stages["gen"] = {"status": "PASS" if flags_ok.passed else "FAIL",
                                "flag_pairs_checked": len(flags_ok.pairs_checked),
                                "violations": flags_ok.violations[:10]}
        report.timings["gen"] = time.perf_counter() - t

        t = time.perf_counter()
        scan = margulis_stage(ctx, cfg.max_len)
        _write(out / "alpha.csv", scan.to_csv())
        report.stages["margulis"] = scan.to_json()
        report.timings["margulis"] = time.perf_counter() - t

        t = time.perf_counter()
        dom, dreport = domain_stage(ctx, cfg.disjoint_samples > 0, cfg.disjoint_samples, s_dom)
        _write(out / "domain.json", _dump(dreport))
        report.stages["domain"] = {k: v for k, v in dreport.items() if k != "domain"}
        report.timings["domain"] = time.perf_counter() - t

        t = time.perf_counter()
        tiles, failures = tile_stage(dom, cfg.tile_points, cfg.radius, cfg.max_depth, s_tile)
        _write(out / "tiles.json", _dump(tiles))
        _write(out / "tile_failures.csv", failures)
        report.stages["tile"] = {k: tiles[k] for k in ("status", "samples", "located", "success_fraction",
                                                       "uniqueness_failures", "depth_histogram")}
        report.timings["tile"] = time.perf_counter() - t
    _write(out / "report.json", _dump(report.to_json()))
    return report


# ----------------------------------------------------------------------------
# click


def _fail(code: int, message: str):
    click.echo(message, err=True)
    sys.exit(code)


def _guard(fn):
    """Map library errors onto the documented exit codes."""
    import functools

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            _fail(EXIT_CONFIG, f"config error: {exc}")
        except nc.AmbiguousSignError as exc:
            _fail(EXIT_AMBIGUOUS, f"numeric ambiguity: {exc}")
        except StageError as exc:
            code = EXIT_AMBIGUOUS if isinstance(exc.__cause__, nc.AmbiguousSignError) else EXIT_FAIL
            _fail(code, str(exc))

    return wrapper


common_rep = [
    click.option("--rep", "rep_path", type=click.Path(dir_okay=False), help="rep.json from `gen`."),
    click.option("--def", "def_path", type=click.Path(dir_okay=False), help="def.json from `gen`."),
    click.option("--n", type=int, default=1, show_default=True, help="Used when --rep is absent."),
    click.option("--schottky", type=click.Path(dir_okay=False), help="Schottky JSON (default: bundled example)."),
    click.option("--scales", type=str, default=None, help="Arc scales, e.g. '1,2' or '1:2,3:4'."),
]


def with_rep(fn):
    for opt in reversed(common_rep):
        fn = opt(fn)
    return fn


def _ctx(rep_path, def_path, n, schottky, scales) -> Context:
    if n < 1:
        raise ConfigError("n must be at least 1")
    return context_from_files(rep_path, def_path, n, schottky, parse_scales(scales))


@click.group()
@click.option("--eps-sign", type=float, default=None, help="Sign tolerance override.")
@click.option("--eps-eq", type=float, default=None, help="Equality tolerance override.")
@click.pass_context
def main(cctx, eps_sign, eps_eq):
    """Positive representations into SO(2n,2n-1), strip cocycles, Margulis
    scans and crooked fundamental domains."""
    overrides = {k: v for k, v in (("eps_sign", eps_sign), ("eps_eq", eps_eq)) if v is not None}
    if any(v <= 0 for v in overrides.values()):
        _fail(EXIT_CONFIG, "config error: tolerances must be positive")
    cctx.with_resource(nc.use_tolerance(**overrides))


@main.command()
@click.option("--n", type=int, required=True)
@click.option("--schottky", type=click.Path(dir_okay=False))
@click.option("--scales", type=str, default=None)
@click.option("--out", type=click.Path(dir_okay=False), default="rep.json", show_default=True)
@click.option("--def-out", type=click.Path(dir_okay=False), default=None, help="Also write the cocycle.")
@_guard
def gen(n, schottky, scales, out, def_out):
    """Build the representation and boundary flags; write rep.json."""
    if n < 1:
        raise ConfigError("n must be at least 1")
    ctx = build_context(n, schottky, parse_scales(scales))
    check = pr.verify_flag_ping_pong(ctx.rep, ctx.bmap, ctx.A)
    _write(Path(out), _dump(rep_json(ctx)))
    if def_out:
        _write(Path(def_out), _dump(def_json(ctx)))
    click.echo(f"gen n={n}: flag ping-pong {'PASS' if check.passed else 'FAIL'} ({len(check.pairs_checked)} pairs)")
    sys.exit(EXIT_PASS if check.passed else EXIT_FAIL)


@main.command()
@with_rep
@click.option("--max-len", type=int, default=6, show_default=True)
@click.option("--all-words", is_flag=True, help="Scan every reduced word, not one per conjugacy class.")
@click.option("--coboundary", is_flag=True, help="Control: replace the cocycle by a coboundary.")
@click.option("--corrupt", type=int, default=None, help="Control: swap the arc vectors of generator i.")
@click.option("--csv-out", type=click.Path(dir_okay=False), default=None)
@click.option("--json-out", type=click.Path(dir_okay=False), default=None)
@_guard
def margulis(rep_path, def_path, n, schottky, scales, max_len, all_words, coboundary, corrupt, csv_out, json_out):
    """Margulis invariant scan over reduced words."""
    if max_len < 1:
        raise ConfigError("--max-len must be at least 1")
    ctx = _ctx(rep_path, def_path, n, schottky, scales)
    if coboundary:
        ctx.deformation = control_coboundary(ctx.rep)
    if corrupt is not None:
        if not 1 <= corrupt <= ctx.rep.N:
            raise ConfigError(f"--corrupt must be in 1..{ctx.rep.N}")
        ctx.deformation = cc.deformation_from_arcs(ctx.av.swapped(corrupt))
    report = margulis_stage(ctx, max_len, all_words)
    if coboundary:
        worst = max(abs(r.alpha) for r in report.records)
        ok = worst < 1e-9
        if csv_out:
            _write(Path(csv_out), report.to_csv())
        click.echo(f"coboundary control {'PASS' if ok else 'FAIL'}: max |alpha| = {worst:.3g}")
        sys.exit(EXIT_PASS if ok else EXIT_FAIL)
    if csv_out:
        _write(Path(csv_out), report.to_csv())
    summary = report.to_json()
    if json_out:
        _write(Path(json_out), _dump(summary))
    click.echo(f"{summary['status']} words={summary['words']} min_ratio={summary['min_ratio']:.6g} "
               f"argmin={summary['argmin']} witness={summary['witness']}")
    sys.exit(EXIT_PASS if report.passed else EXIT_FAIL)


@main.command()
@with_rep
@click.option("--check-disjoint", is_flag=True)
@click.option("--samples", type=int, default=1000, show_default=True, help="Points per wall pair.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_guard
def domain(rep_path, def_path, n, schottky, scales, check_disjoint, samples, seed, out):
    """Build the crooked domain; check side pairings and wall disjointness."""
    if samples < 1:
        raise ConfigError("--samples must be positive")
    ctx = _ctx(rep_path, def_path, n, schottky, scales)
    _, rep = domain_stage(ctx, check_disjoint, samples, seed)
    if out:
        _write(Path(out), _dump(rep))
    click.echo(f"domain {rep['status']}: side pairing "
               f"{all(r['passed'] for r in rep['side_pairing'])}, algebraic nesting {rep['algebraic_nesting']}")
    sys.exit(EXIT_PASS if rep["status"] == "PASS" else EXIT_FAIL)


@main.command()
@with_rep
@click.option("--points", type=int, default=1000, show_default=True)
@click.option("--radius", type=float, default=10.0, show_default=True)
@click.option("--max-depth", type=int, default=64, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--failures-csv", type=click.Path(dir_okay=False), default=None)
@_guard
def tile(rep_path, def_path, n, schottky, scales, points, radius, max_depth, seed, out, failures_csv):
    """Locate random points of a ball in the tiles of the crooked domain."""
    if points < 0 or radius < 0 or max_depth < 1:
        raise ConfigError("points and radius must be non-negative and max depth positive")
    ctx = _ctx(rep_path, def_path, n, schottky, scales)
    dom = ck.build_domain(ctx.deformation, ctx.av, ctx.bmap, ctx.A)
    rep, failures = tile_stage(dom, points, radius, max_depth, seed)
    if out:
        _write(Path(out), _dump(rep))
    if failures_csv:
        _write(Path(failures_csv), failures)
    click.echo(f"tile {rep['status']}: located {rep['located']}/{rep['samples']} "
               f"depths {rep['depth_histogram']}")
    if rep["ambiguous"]:
        sys.exit(EXIT_AMBIGUOUS)
    sys.exit(EXIT_PASS if rep["status"] == "PASS" else EXIT_FAIL)


@main.command()
@with_rep
@click.option("--arc", type=str, required=True, help="Wall letter: a, A, b, ... or a signed index.")
@click.option("--bounds", type=float, default=1.0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default="plane.obj", show_default=True)
@_guard
def mesh(rep_path, def_path, n, schottky, scales, arc, bounds, out):
    """OBJ mesh of the translated crooked plane on a wall (n = 1 only)."""
    if bounds <= 0:
        raise ConfigError("--bounds must be positive")
    try:
        letter = int(arc)
    except ValueError:
        try:
            letter = fg.parse_letter(arc)
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"bad arc {arc!r}") from exc
    ctx = _ctx(rep_path, def_path, n, schottky, scales)
    if ctx.rep.n != 1:
        raise ConfigError(f"mesh output needs n = 1 (dimension 3); unsupported dimension {4 * ctx.rep.n - 1}")
    dom = ck.build_domain(ctx.deformation, ctx.av, ctx.bmap, ctx.A)
    try:
        H = dom.wall(letter).halfspace
    except KeyError as exc:
        raise ConfigError(f"no wall {arc!r}") from exc
    V, faces = ck.mesh_emit(H, bounds)
    _write(Path(out), ck.mesh_to_obj(V, faces))
    click.echo(f"wrote {out}: {len(V)} vertices, {len(faces)} faces")


@main.command()
@click.option("--n", type=int, required=True)
@click.option("--trials", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_guard
def semigroup(n, trials, seed, out):
    """Certify random elements of the positive semigroup."""
    if n < 1 or trials < 0:
        raise ConfigError("n must be positive and trials non-negative")
    rep = semigroup_stage(n, trials, seed)
    if out:
        _write(Path(out), _dump(rep))
    click.echo(f"{rep['certified']}/{rep['trials']} TP certifications")
    sys.exit(EXIT_PASS if rep["status"] == "PASS" else EXIT_FAIL)


@main.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None)
@click.option("--out-dir", type=click.Path(file_okay=False), default=None)
@_guard
def run(config_path, out_dir):
    """Full pipeline from a JSON RunConfig."""
    data = {}
    if config_path:
        try:
            data = json.loads(Path(config_path).read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read {config_path}: {exc}") from exc
    if out_dir:
        data["out_dir"] = out_dir
    cfg = RunConfig.from_json(data)
    report = run_pipeline(cfg)
    for name, stage in report.stages.items():
        click.echo(f"{name}: {stage['status']}")
    sys.exit(EXIT_PASS if report.passed else EXIT_FAIL)


if __name__ == "__main__":
    main()
