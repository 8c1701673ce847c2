"""Command-line front end: one subcommand per computation, JSON (or CSV) artifacts.

Exit status: 0 success, 2 invalid input, 3 result flagged as uncertified or
unstable (the artifact is still written, carrying the flag).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .errors import PolyakovError, ValidationError

EXIT_OK, EXIT_INVALID, EXIT_FLAGGED = 0, 2, 3
COMMANDS = ("spectrum", "zeta", "polyakov", "wp-gram", "mesh-det", "gaussian-check", "covers", "vaut", "bundles")


class _Flagged(Exception):
    def __init__(self, payload: Dict[str, Any], reason: str):
        super().__init__(reason)
        self.payload = payload
        self.reason = reason


def _range(text: str):
    lo, _, hi = text.partition("..")
    return int(lo), int(hi if hi else lo)


def _floats(text: str) -> List[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polyakov", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--model", default=None, help="bolza | fn | explicit")
    p.add_argument("--config", default=None, help="TOML key-value group config")
    p.add_argument("--cutoff", type=float, default=None, help="length cutoff L")
    p.add_argument("--word-limit", type=int, default=None, help="word bound W")
    p.add_argument("--index", type=int, default=None, help="cover index")
    p.add_argument("--tau", default="0,1", help="torus modulus re,im")
    p.add_argument("--grid", type=int, default=32, help="torus grid size n")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--s", default="2", help="comma-separated s values")
    p.add_argument("--K", type=int, default=3, help="extrapolation points for Z'(1)")
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--mumford-table", default=None, help="range lo..hi")
    return p


def _config(args) -> Dict[str, Any]:
    from .hyperbolic import load_group_config

    cfg: Dict[str, Any] = {}
    if args.config:
        cfg.update(load_group_config(args.config))
    if args.model:
        cfg["model"] = args.model
    cfg.setdefault("model", "bolza")
    return cfg


def _group(cfg):
    from .hyperbolic import build_group

    return build_group(cfg)


def _spectrum(G, L: float, W: Optional[int]):
    from .spectrum import DEFAULT_WORD_BOUND, enumerate_spectrum

    return enumerate_spectrum(G, L, word_bound=W or DEFAULT_WORD_BOUND)


def _spectrum_payload(spec) -> dict:
    return json.loads(spec.to_json())


def cmd_spectrum(args, cfg):
    from .errors import UncertifiedSpectrum

    G = _group(cfg)
    L = args.cutoff if args.cutoff is not None else 4.0
    try:
        spec = _spectrum(G, L, args.word_limit)
    except UncertifiedSpectrum as exc:
        raise _Flagged({"spectrum": _spectrum_payload(exc.partial), "certified": False}, str(exc))
    if args.format == "csv":
        return spec.to_csv()
    return {"spectrum": _spectrum_payload(spec), "certified": spec.certified}


def cmd_zeta(args, cfg):
    from .errors import OutsideConvergenceDomain
    from .zeta import zeta_table_csv, zeta_truncated

    s_values = _floats(args.s)
    for s in s_values:
        if not s > 1.0:
            raise OutsideConvergenceDomain(f"s = {s} must exceed 1")
    G = _group(cfg)
    spec = _spectrum(G, args.cutoff if args.cutoff is not None else 5.0, args.word_limit)
    if args.format == "csv":
        return zeta_table_csv(spec, s_values)
    rows = []
    for s in s_values:
        z = zeta_truncated(spec, s)
        rows.append({"s": s, "Z_trunc": z.value, "log_Z": z.log_value, "tail_estimate": z.tail_estimate,
                     "n_max": z.n_max})
    return {"spectrum_cutoff": spec.cutoff, "certified": spec.certified, "values": rows}


def cmd_polyakov(args, cfg):
    from .zeta import polyakov_density

    G = _group(cfg)
    spec = _spectrum(G, args.cutoff if args.cutoff is not None else 6.0, args.word_limit)
    d = polyakov_density(spec, K=args.K, allow_unstable=True)
    payload = json.loads(d.to_json())
    if d.unstable:
        raise _Flagged({"density": payload, "unstable": True}, d.reason)
    return {"density": payload, "unstable": False}


def cmd_wp_gram(args, cfg):
    from .wp import quadratic_differential_basis, wp_volume_density

    G = _group(cfg)
    Q, gram, fallback = quadratic_differential_basis(G, W=args.word_limit or 8)
    return {"gram": json.loads(gram.to_json()), "fallback_used": fallback, "rank": gram.rank,
            "volume_density": wp_volume_density(gram)}


def cmd_mesh_det(args, cfg):
    from .worldsheet import (build_torus_mesh, continuum_torus_det, log_zeta_det, scalar_laplacian_spectrum,
                             torus_det_ratio)

    re_, im_ = _floats(args.tau)
    tau = complex(re_, im_)
    M = build_torus_mesh(tau, args.grid)
    S = build_torus_mesh(1j, args.grid)
    spec = scalar_laplacian_spectrum(M)
    ratio = torus_det_ratio(M, S, spec1=spec)
    return {"tau": [re_, im_], "grid": args.grid, "log_det_prime": log_zeta_det(spec),
            "zero_modes": spec.zero_mode_count, "continuum_unit_area": continuum_torus_det(tau),
            "ratio_to_square_torus": ratio}


def cmd_gaussian(args, cfg):
    from .worldsheet import GaussianModel, gaussian_reduction_check

    rng = np.random.Generator(np.random.Philox(args.seed))
    lam = tuple(float(x) for x in rng.uniform(0.5, 4.0, args.dim))
    out = gaussian_reduction_check(GaussianModel(lam), samples=args.samples, seed=args.seed)
    out["eigenvalues"] = list(lam)
    return out


def cmd_covers(args, cfg):
    from .covers import enumerate_covers

    genus = int(cfg.get("genus", 2))
    census = enumerate_covers(genus, args.index or 2)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["node", "genus", "perms"])
        for i, c in enumerate(census.nodes):
            w.writerow([i, c.genus, json.dumps([list(p) for p in c.perms])])
        return buf.getvalue()
    return json.loads(census.to_json())


def cmd_vaut(args, cfg):
    from .covers import compose_vaut, enumerate_covers, germ_equal, identity_vaut, two_arrow_cycle

    n = args.index or 2
    I = identity_vaut(2)
    nodes = list(enumerate_covers(2, n).nodes)
    counts = {"pairs": 0, "identity": 0, "inverse": 0, "two_arrow_identity": 0, "associativity": 0}
    for H in nodes:
        counts["two_arrow_identity"] += germ_equal(two_arrow_cycle(H, H), I)
        for K in nodes:
            r = two_arrow_cycle(H, K)
            counts["pairs"] += 1
            counts["identity"] += germ_equal(compose_vaut(I, r), r) and germ_equal(compose_vaut(r, I), r)
            counts["inverse"] += germ_equal(compose_vaut(r, r.inverse), I) and germ_equal(compose_vaut(r.inverse, r), I)
            s, u = two_arrow_cycle(K, H), two_arrow_cycle(K, H)
            counts["associativity"] += germ_equal(compose_vaut(compose_vaut(s, r), u), compose_vaut(s, compose_vaut(r, u)))
    ok = (counts["identity"] == counts["inverse"] == counts["associativity"] == counts["pairs"]
          and counts["two_arrow_identity"] == len(nodes))
    payload = {"index": n, "nodes": len(nodes), "passed": counts, "all_passed": ok}
    if not ok:
        raise _Flagged(payload, "a group law failed")
    return payload


def cmd_bundles(args, cfg):
    from .bundles import mumford_table

    lo, hi = _range(args.mumford_table or "-5..6")
    table = mumford_table(lo, hi)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "exponent", "dual"])
        for r in table:
            w.writerow([r["n"], r["exponent"], r["dual"]])
        return buf.getvalue()
    return {"mumford_table": table,
            "weights_over_base": {str(r["n"]): str(Fraction(r["exponent"])) for r in table}}


HANDLERS = {"spectrum": cmd_spectrum, "zeta": cmd_zeta, "polyakov": cmd_polyakov, "wp-gram": cmd_wp_gram,
            "mesh-det": cmd_mesh_det, "gaussian-check": cmd_gaussian, "covers": cmd_covers, "vaut": cmd_vaut,
            "bundles": cmd_bundles}


def _clean(x):
    if isinstance(x, float):
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.generic):
        return _clean(x.item())
    return x


def _config_echo(args, cfg) -> dict:
    echo = {k: v for k, v in vars(args).items() if k not in ("out", "threads")}
    echo["group"] = cfg
    return echo


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _attach_negative_values(argv: Sequence[str]) -> List[str]:
    """``--tau -0.5,1`` and ``--mumford-table -3..4`` would otherwise parse as flags."""
    out: List[str] = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and len(tok) > 1 and tok[0] == "-" \
                and (tok[1].isdigit() or tok[1] == "."):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def _thread_limits(requested: int):
    """Cap the BLAS pools at ``requested`` threads, never above their startup size.

    OpenBLAS sizes its buffers when it loads; raising the count later crashes
    some builds, so a larger request is clipped per library.
    """
    import numpy.linalg  # noqa: F401  load the BLAS libraries before inspecting them
    import scipy.linalg  # noqa: F401
    from threadpoolctl import threadpool_info, threadpool_limits

    want = max(1, int(requested))
    limits = {i["prefix"]: min(want, i["num_threads"]) for i in threadpool_info()}
    return threadpool_limits(limits=limits or want)


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = _parser()
    argv = _attach_negative_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    status, flags, result = EXIT_OK, {"certified": True, "unstable": False}, None
    try:
        cfg = _config(args)
        with _thread_limits(args.threads):
            result = HANDLERS[args.command](args, cfg)
    except _Flagged as fl:
        status, result = EXIT_FLAGGED, fl.payload
        flags = {"certified": False, "unstable": "unstable" in fl.payload, "reason": fl.reason}
    except ValidationError as exc:
        sys.stderr.write(f"polyakov: {exc.code}: {exc}\n")
        return EXIT_INVALID
    except PolyakovError as exc:
        status = EXIT_FLAGGED
        flags = {"certified": False, "unstable": True, "reason": f"{exc.code}: {exc}"}
        result = {"error": exc.code}
    except (OSError, ValueError) as exc:
        sys.stderr.write(f"polyakov: {exc}\n")
        return EXIT_INVALID
    if isinstance(result, str):
        _emit(result, args.out)
        return status
    doc = {"tool": "polyakov", "version": __version__, "command": args.command,
           "config": _config_echo(args, cfg), "flags": flags, "result": result}
    _emit(json.dumps(_clean(doc), indent=1, sort_keys=True) + "\n", args.out)
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
