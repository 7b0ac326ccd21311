"""Command-line front end: deterministic JSON reports over the library.

Reports are canonical: keys sorted, numbers rendered canonically, words
rendered in the text grammar so witnesses can be replayed as inputs.  The
timing block is excluded from the canonical hash, everything else is
byte-reproducible.  Expensive searches are cached by (input hashes,
command, bounds, tool version).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, is_dataclass
from fractions import Fraction
from pathlib import Path

from . import __version__
from .automorphisms import Automorphism, validate
from .dynamics import (SearchReport, atoroidal_search, classify_growth,
                       flare_certify, orbit_lengths, twin_search)
from .errors import FpAutError, ParseError
from .graph_maps import (build_standard_map, check_train_track,
                         constants_report, default_gate_depth, nielsen_search)
from .mapping_torus import conjugacy_pipeline, mapping_torus_abelianization
from .matrices import IntegerMatrix
from .parsing import (parse_word, presentation_from_dict, render_word,
                      word_table_from_dict)
from .words import Word

SCHEMA = 1


@dataclass
class JobConfig:
    command: str
    aut_path: str | None = None
    aut2_path: str | None = None
    element: str | None = None
    bounds: dict = field(default_factory=dict)
    jobs: int = 1
    strict: bool = False
    out_path: str | None = None
    cache_dir: str | None = None


# ---------------------------------------------------------------------------
# serialization

def to_jsonable(x):
    if isinstance(x, Word):
        return render_word(x)
    if isinstance(x, IntegerMatrix):
        return [[str(v) for v in row] for row in x.entries]
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 \
            else str(x.numerator)
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        seq = sorted(x, key=repr) if isinstance(x, (set, frozenset)) else x
        return [to_jsonable(v) for v in seq]
    if is_dataclass(x) and not isinstance(x, type):
        return {k: to_jsonable(v) for k, v in vars(x).items()}
    if isinstance(x, float):
        return float(repr(x)) if x == x else None
    return x


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def load_automorphism(path: str):
    raw = Path(path).read_bytes()
    doc = json.loads(raw)
    pres = presentation_from_dict(doc["group"])
    phi = validate(word_table_from_dict(doc["images"], pres),
                   word_table_from_dict(doc["inverse_images"], pres), pres)
    return phi, _sha256_bytes(raw)


def automorphism_to_dict(phi: Automorphism) -> dict:
    return {
        "group": {"abelian_factors": list(phi.presentation.abelian_ranks),
                  "free_rank": phi.presentation.free_rank},
        "images": {k: render_word(w) for k, w in sorted(phi.images.items())},
        "inverse_images": {k: render_word(w)
                           for k, w in sorted(phi.inverse_images.items())},
    }


# ---------------------------------------------------------------------------
# parallel sharding

def _shard_worker(args):
    kind, phi, kwargs, shard = args
    fn = {"atoroidal": atoroidal_search, "twins": twin_search,
          "flare": flare_certify}[kind]
    return fn(phi, shard=shard, **kwargs)


def _run_sharded(kind: str, phi: Automorphism, kwargs: dict,
                 jobs: int) -> SearchReport:
    if jobs <= 1:
        fn = {"atoroidal": atoroidal_search, "twins": twin_search,
              "flare": flare_certify}[kind]
        return fn(phi, **kwargs)
    t0 = time.perf_counter()
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(_shard_worker,
                              [(kind, phi, kwargs, (s, jobs))
                               for s in range(jobs)]))
    merged = _merge_reports(kind, parts)
    merged.elapsed = time.perf_counter() - t0
    return merged


def _merge_reports(kind: str, parts: list[SearchReport]) -> SearchReport:
    tested = sum(p.tested for p in parts)
    bounds = parts[0].bounds
    if kind in ("atoroidal", "twins"):
        found = [p for p in parts if p.verdict == "witness"]
        if found:
            best = min(found, key=lambda p: p.witness["index"])
            best.tested = tested
            return best
        rep = parts[0]
        rep.tested = tested
        return rep
    # flare: AND the per-exponent profiles, union the counterexamples
    n_max = bounds["n_max"]
    profile = [all(p.profile[n] for p in parts) for n in range(n_max)]
    counter = sorted({w for p in parts for w in p.counterexamples},
                     key=lambda w: w.sort_key())
    for n, ok in enumerate(profile, start=1):
        if ok:
            cert = dict(parts[0].certificate or {})
            cert.update({"exponent": n, "lambda": bounds["lambda_min"]})
            cert.setdefault("empirical", True)
            return SearchReport("exhausted", bounds, certificate=cert,
                                tested=tested, profile=tuple(profile),
                                notes="empirical evidence, not a proof")
    return SearchReport("witness", bounds, counterexamples=counter,
                        tested=tested, profile=tuple(profile),
                        notes="words failing the flare inequality at n_max")


# ---------------------------------------------------------------------------
# commands

def _report_skeleton(cfg: JobConfig, inputs: dict) -> dict:
    return {
        "schema": SCHEMA,
        "tool": {"name": "fpaut", "version": __version__},
        "command": cfg.command,
        "inputs": inputs,
        "bounds": to_jsonable(cfg.bounds),
        "conventions": {
            "length": "cyclic syllable length",
            "factor_norm": "L1 on exponent vectors",
        },
    }


def _search_result(rep: SearchReport) -> dict:
    out = {"verdict": rep.verdict, "tested": rep.tested}
    if rep.witness is not None:
        out["witness"] = to_jsonable({k: v for k, v in rep.witness.items()
                                      if k != "index"})
    if rep.counterexamples:
        out["counterexamples"] = to_jsonable(rep.counterexamples)
    if rep.certificate is not None:
        out["certificate"] = to_jsonable(rep.certificate)
    if rep.notes:
        out["notes"] = rep.notes
    return out


def run(cfg: JobConfig):
    """Execute one job; returns (exit_code, report dict)."""
    phi = aut_hash = None
    if cfg.aut_path:
        phi, aut_hash = load_automorphism(cfg.aut_path)
    inputs = {}
    if cfg.aut_path:
        inputs["aut"] = {"path": os.path.basename(cfg.aut_path),
                         "sha256": aut_hash}
    if cfg.element is not None:
        inputs["element"] = cfg.element
    report = _report_skeleton(cfg, inputs)
    b = cfg.bounds
    exit_code = 0

    if cfg.command == "classify":
        w = parse_word(cfg.element, phi.presentation)
        data = orbit_lengths(phi, w, b["max_iter"])
        verdict = classify_growth(data.lengths, classes=data.classes)
        mass_verdict = classify_growth(data.masses, classes=data.classes)
        report["result"] = {
            "lengths": list(data.lengths),
            "masses": list(data.masses),
            "kind": verdict.kind,
            "heuristic": verdict.heuristic,
            "rate": to_jsonable(verdict.rate),
            "degree": verdict.degree,
            "period": verdict.period,
            "preperiod": verdict.preperiod,
            "mass_kind": mass_verdict.kind,
            "mass_degree": mass_verdict.degree,
            "diagnostics": to_jsonable(verdict.diagnostics),
        }
    elif cfg.command == "atoroidal":
        rep = _run_sharded("atoroidal", phi,
                           {"max_len": b["max_len"], "max_exp": b["max_exp"],
                            "max_iter": b["max_iter"]}, cfg.jobs)
        report["result"] = _search_result(rep)
        exit_code = 1 if rep.verdict == "witness" else 0
    elif cfg.command == "twins":
        rep = _run_sharded("twins", phi,
                           {"max_power": b["max_exp"],
                            "conj_len": b["conj_len"]}, cfg.jobs)
        report["result"] = _search_result(rep)
        exit_code = 1 if rep.verdict == "witness" else 0
    elif cfg.command == "flare":
        rep = _run_sharded("flare", phi,
                           {"min_len": b["min_len"], "max_len": b["max_len"],
                            "max_exp": b["max_exp"], "n_max": b["max_iter"],
                            "lambda_min": b["lambda_min"]}, cfg.jobs)
        report["result"] = _search_result(rep)
        exit_code = 1 if rep.verdict == "witness" else 0
    elif cfg.command == "traintrack":
        m = build_standard_map(phi)
        depth = b.get("depth") or default_gate_depth(phi.presentation)
        verdict = check_train_track(m, depth)
        gates = verdict.gates
        report["result"] = {
            "status": verdict.status,
            "witness": to_jsonable(verdict.witness),
            "depth": depth,
            "base_gate_count": len(gates.gates_at_base()),
            "base_gates": to_jsonable([sorted(map(list, g))
                                       for g in gates.gates_at_base()]),
            "stable": gates.stable,
        }
        exit_code = 1 if verdict.status == "violated" else 0
        if verdict.status == "undecided" and cfg.strict:
            exit_code = 3
    elif cfg.command == "constants":
        m = build_standard_map(phi)
        depth = b.get("depth") or default_gate_depth(phi.presentation)
        rep = constants_report(m, depth)
        report["result"] = {
            "growth_rate": to_jsonable(rep.growth.value),
            "growth_bounds": [to_jsonable(rep.growth.lower),
                              to_jsonable(rep.growth.upper)],
            "error_bound": to_jsonable(rep.growth.error_bound),
            "cancellation": to_jsonable(rep.cancellation),
            "transversality": to_jsonable(rep.transversality),
            "critical_constant": to_jsonable(rep.critical_constant),
            "irreducible": rep.irreducible,
            "growth_eigenvector": to_jsonable(rep.growth_eigenvector),
            "lipschitz": to_jsonable(m.lipschitz),
            "metric": rep.metric,
            "depth": depth,
        }
    elif cfg.command == "nielsen":
        m = build_standard_map(phi)
        found = nielsen_search(m, b["max_len"], b["max_iter"])
        report["result"] = {
            "witnesses": [{
                "start": to_jsonable(w.path.start),
                "steps": to_jsonable(w.path.steps),
                "exponent": w.exponent,
                "element": to_jsonable(w.element),
            } for w in found],
            "count": len(found),
        }
    elif cfg.command == "torus-ab":
        rep = mapping_torus_abelianization(phi)
        report["result"] = {
            "invariant_factors": [str(d) for d in rep.invariant_factors],
            "torsion": [str(d) for d in rep.torsion],
            "free_rank": rep.free_rank,
            "generator_images": to_jsonable(rep.generator_images),
        }
    elif cfg.command == "conjugacy":
        phi2, aut2_hash = load_automorphism(cfg.aut2_path)
        report["inputs"]["aut2"] = {"path": os.path.basename(cfg.aut2_path),
                                    "sha256": aut2_hash}
        verdict = conjugacy_pipeline(phi, phi2, conj_len=b.get("conj_len", 3))
        report["result"] = {
            "status": verdict.status,
            "witness": to_jsonable(verdict.witness),
            "invariant": to_jsonable(verdict.invariant),
            "diagnostics": to_jsonable(verdict.diagnostics),
        }
        exit_code = 1 if verdict.status == "distinguished" else 0
        if verdict.status == "undecided" and cfg.strict:
            exit_code = 3
    else:
        raise ValueError(f"unknown command {cfg.command}")

    if cfg.strict and exit_code == 0 and \
            report.get("result", {}).get("verdict") == "undecided":
        exit_code = 3
    report["canonical_sha256"] = _sha256_bytes(
        canonical_json(report).encode())
    return exit_code, report


# ---------------------------------------------------------------------------
# cache

def _cache_dir(cfg: JobConfig) -> Path | None:
    path = cfg.cache_dir or os.environ.get("FPAUT_CACHE")
    if path is None:
        return None
    return Path(path)


def _cache_key(cfg: JobConfig) -> str:
    ident = {"command": cfg.command, "bounds": to_jsonable(cfg.bounds),
             "version": __version__, "jobs_invariant": True}
    for label, p in (("aut", cfg.aut_path), ("aut2", cfg.aut2_path)):
        if p:
            ident[label] = _sha256_bytes(Path(p).read_bytes())
    if cfg.element is not None:
        ident["element"] = cfg.element
    return _sha256_bytes(canonical_json(ident).encode())


def run_with_cache(cfg: JobConfig):
    cache = _cache_dir(cfg)
    if cache is not None:
        entry = cache / f"{_cache_key(cfg)}.json"
        if entry.exists():
            doc = json.loads(entry.read_text())
            return doc["exit_code"], doc["report"]
    t0 = time.perf_counter()
    exit_code, report = run(cfg)
    elapsed = time.perf_counter() - t0
    if cache is not None:
        cache.mkdir(parents=True, exist_ok=True)
        entry = cache / f"{_cache_key(cfg)}.json"
        entry.write_text(canonical_json({"exit_code": exit_code,
                                         "report": report}))
    report["timing"] = {"seconds": elapsed}
    return exit_code, report


# ---------------------------------------------------------------------------
# argument parsing

def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="fpaut",
        description="exact analysis of automorphisms of free products of "
                    "free-abelian groups and free groups")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, aut2=False, element=False):
        p.add_argument("--aut", required=True, help="automorphism JSON file")
        if aut2:
            p.add_argument("--aut2", required=True,
                           help="second automorphism JSON file")
        if element:
            p.add_argument("--element", required=True,
                           help="word in the text grammar, e.g. 'a1.1^2 x1^-1'")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--strict", action="store_true",
                       help="exit 3 on undecided verdicts")
        p.add_argument("--out", help="also write the JSON report here")
        p.add_argument("--cache-dir", help="cache directory "
                                           "(FPAUT_CACHE overrides the default of no cache)")

    p = sub.add_parser("classify", help="growth of one conjugacy class")
    common(p, element=True)
    p.add_argument("--max-iter", type=int, default=16)

    p = sub.add_parser("atoroidal", help="bounded search for periodic classes")
    common(p)
    p.add_argument("--max-len", type=int, default=4)
    p.add_argument("--max-exp", type=int, default=2)
    p.add_argument("--max-iter", type=int, default=4)

    p = sub.add_parser("twins", help="bounded search for twinned subgroups")
    common(p)
    p.add_argument("--max-exp", type=int, default=2,
                   help="bound on the power of the automorphism")
    p.add_argument("--conj-len", type=int, default=2)

    p = sub.add_parser("flare", help="empirical flare certification")
    common(p)
    p.add_argument("--min-len", type=int, default=2)
    p.add_argument("--max-len", type=int, default=3)
    p.add_argument("--max-exp", type=int, default=1)
    p.add_argument("--max-iter", type=int, default=6)
    p.add_argument("--lambda-min", default="1.1",
                   help="decimal string, must be > 1")

    p = sub.add_parser("traintrack", help="verify the train-track property")
    common(p)
    p.add_argument("--depth", type=int, default=0,
                   help="gate iteration depth (0 = 2(p+k)+4)")

    p = sub.add_parser("constants", help="growth rate, cancellation, critical constant")
    common(p)
    p.add_argument("--depth", type=int, default=0)

    p = sub.add_parser("nielsen", help="bounded search for Nielsen paths")
    common(p)
    p.add_argument("--max-len", type=int, default=2)
    p.add_argument("--max-iter", type=int, default=2)

    p = sub.add_parser("torus-ab", help="mapping torus abelianization")
    common(p)

    p = sub.add_parser("conjugacy", help="conjugacy pipeline for two automorphisms")
    common(p, aut2=True)
    p.add_argument("--conj-len", type=int, default=3)
    return top


_BOUND_KEYS = ("max_len", "max_exp", "max_iter", "min_len", "conj_len",
               "depth", "lambda_min")


def config_from_args(argv) -> JobConfig:
    ns = _build_parser().parse_args(argv)
    bounds = {k: getattr(ns, k) for k in _BOUND_KEYS if hasattr(ns, k)}
    if "lambda_min" in bounds:
        lam = Fraction(str(bounds["lambda_min"]))
        if lam <= 1:
            raise ParseError(0, "--lambda-min must be > 1")
    for key, val in bounds.items():
        if key != "lambda_min" and key != "depth" and val is not None and val < 1:
            raise ParseError(0, f"--{key.replace('_', '-')} must be positive")
    return JobConfig(
        command=ns.command,
        aut_path=getattr(ns, "aut", None),
        aut2_path=getattr(ns, "aut2", None),
        element=getattr(ns, "element", None),
        bounds=bounds,
        jobs=ns.jobs,
        strict=ns.strict,
        out_path=ns.out,
        cache_dir=ns.cache_dir,
    )


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = config_from_args(argv)
        exit_code, report = run_with_cache(cfg)
    except (FpAutError, OSError, KeyError, ValueError, json.JSONDecodeError) as e:
        print(json.dumps({"error": f"{type(e).__name__}: {e}"}), file=sys.stderr)
        return 2
    text = json.dumps(report, sort_keys=True, indent=2)
    print(text)
    if cfg.out_path:
        Path(cfg.out_path).write_text(text + "\n")
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
