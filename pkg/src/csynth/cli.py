"""Command line front end: ``csynth {hadamard,synth,lowrank,norm,goodness}``.

Results are JSON documents {"config", "result", "version"} written atomically;
``--timing`` adds wall-clock "seconds" (off by default so reruns are
byte-identical). Exit codes: 0 success, 2 usage or input error, 3 budget
exhausted without certification.
"""
import argparse
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .core import RandomSource, atomic_write_text, read_matrix, write_matrix
from .errors import CSynthError, ValidationError
from .gaussian import approx_error, deviation_bound, factor_via_svd, gaussian_rank_k, make_factor_pair
from .goodness import certification_ranks, certified_s, first_appearances, mutual_incoherence, opt_certificate
from .greedy import POLICIES, run_derandomized
from .hadamard import build_hadamard, character_exponent, hadamard_certificate
from .norm import norm_bounds
from .potential import SCHEDULE_KINDS

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_BUDGET = 3


class InputError(Exception):
    pass


def _fmt_float(x):
    if not math.isfinite(x):
        return "null"
    return "%.17g" % x


def to_json(obj, indent=0):
    """JSON text with floats at 17 significant digits and stable layout."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, np.generic):
        obj = obj.item()
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(to_json(v, indent + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + to_json(v, indent + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _s_field(s):
    return None if s == math.inf else int(s)


def emit(args, result, started):
    doc = {"config": _config(args), "result": result, "version": __version__}
    if args.timing:
        doc["seconds"] = time.perf_counter() - started
    text = to_json(doc) + "\n"
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        atomic_write_text(args.out, text)


def _config(args):
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "timing")}
    return cfg


# --- subcommands ---------------------------------------------------------------

def cmd_hadamard(args):
    h = build_hadamard(args.nu)
    if args.matrix_out:
        write_matrix(args.matrix_out, h.matrix)
    if args.certificate_out:
        write_matrix(args.certificate_out, hadamard_certificate(h))
    return {"nu": h.nu, "order": h.order}, EXIT_OK


def _is_sylvester(A):
    try:
        character_exponent(A)
    except ValidationError:
        return False
    return True


def _synth_inputs(args):
    if (args.nu is None) == (args.matrix is None):
        raise InputError("give exactly one of --nu or --matrix")
    if args.nu is not None:
        h = build_hadamard(args.nu)
        A = np.array(h.matrix)
        Y = np.array(hadamard_certificate(h))
    else:
        A = read_matrix(args.matrix)
        if args.y is not None:
            Y = read_matrix(args.y)
        elif A.shape[0] == A.shape[1] and _is_sylvester(A):
            Y = A / A.shape[0]
        else:
            raise InputError(
                "no --y given: computing Y for a general matrix needs the initialization LP "
                "(minimize sum ||z_i|| ||a_i|| subject to ||I - Z^T A||_inf <= mu), which is not provided"
            )
    shortcut = _is_sylvester(A) if args.hadamard_shortcut is None else args.hadamard_shortcut
    return A, Y, shortcut


def cmd_synth(args):
    if args.s < 1:
        raise InputError("--s must be >= 1")
    A, Y, shortcut = _synth_inputs(args)
    n = A.shape[1]
    k_max = args.k_max if args.k_max is not None else 4 * n
    if k_max < 1:
        raise InputError("--k-max must be >= 1")
    schedule = args.schedule or ("joint" if args.policy == "joint" else "closed")
    refine = args.refine_every
    if refine is None:
        refine = 1 if shortcut else 16
    bisect = args.certify == "bisect"
    if bisect:
        refine = 0
    rng = RandomSource(args.seed)
    ranks = {}
    target = args.s

    def track(state, entry):
        # first rank at which each level 1..s is certified (incumbent or refined)
        mus = [entry["mu"]] + ([entry["mu_refined"]] if entry["mu_refined"] is not None else [])
        level = certified_s(min(mus))
        for s in range(1, target + 1):
            if s <= level and s not in ranks:
                ranks[s] = entry["m"]

    res = run_derandomized(
        Y,
        A,
        policy=args.policy,
        schedule=schedule,
        k_max=k_max,
        target_s=None if bisect else target,
        tol=args.tol,
        rng=rng,
        refine_every=refine,
        shortcut=shortcut,
        variant=args.variant,
        max_draws=args.max_draws,
        callback=track,
    )
    history = [
        {"k": h["k"], "mu": h["mu"], "mu_refined": h["mu_refined"], "beta": h["beta"], "delta": h["delta"], "pick": h["pick"]}
        for h in res.history
    ]
    rows, mu, certified = res.rows, res.mu, res.certified
    if bisect:
        order = [p for p, _ in res.state.picks]
        found = certification_ranks(A, order, range(1, target + 1), args.tol, shortcut)
        ranks = {s: m for s, m in found.items() if m is not None}
        if found[target] is not None:
            rows = first_appearances(order)[: found[target]]
            mu = opt_certificate(A[rows], args.tol, shortcut).mu
            certified = True
        else:
            certified = False
    s_inc = None
    if len(rows) > 1:
        try:
            s_inc = mutual_incoherence(A[rows])[1]
        except ValidationError:
            pass  # some column of the submatrix vanishes
    result = {
        "rows": [int(r) for r in rows],
        "m": len(rows),
        "mu": mu,
        "s_max": _s_field(certified_s(mu)),
        "certified": bool(certified),
        "ranks": {str(s): int(m) for s, m in sorted(ranks.items())},
        "incoherence_s": None if s_inc is None else _s_field(s_inc),
        "steps": len(res.history),
        "history": history,
    }
    return result, EXIT_OK if certified else EXIT_BUDGET


def cmd_lowrank(args):
    if args.k < 1:
        raise InputError("--k must be >= 1")
    if (args.matrix is None) == (args.factors is None):
        raise InputError("give exactly one of --matrix or --factors")
    if args.factors is not None:
        P = read_matrix(args.factors[0])
        Q = read_matrix(args.factors[1])
        f = make_factor_pair(P, Q, args.D)
        A = f.matrix()
    else:
        A = read_matrix(args.matrix)
        f = factor_via_svd(A)
    approx = gaussian_rank_k(f, args.k, RandomSource(args.seed))
    err = approx_error(approx, A)
    m, n = A.shape
    bound = deviation_bound(m, n, args.k, f.D)
    result = {
        "m": m,
        "n": n,
        "k": args.k,
        "D": f.D,
        "error": err,
        "bound": bound,
        "bound_met": bool(err <= bound),
        "scale": approx.scale,
        "left": approx.left,
        "right": approx.right,
    }
    return result, EXIT_OK


def cmd_norm(args):
    A = read_matrix(args.matrix)
    b = norm_bounds(A, args.tol)
    corridor = b.corridor_ok and b.upper <= math.sqrt(min(A.shape)) * b.lower + 1e-10
    return {"lower": b.lower, "upper": b.upper, "upper_source": b.upper_source, "corridor_ok": bool(corridor)}, EXIT_OK


def cmd_goodness(args):
    A = read_matrix(args.matrix)
    cert = opt_certificate(A, args.tol, args.hadamard_shortcut, args.method)
    result = {
        "mu": cert.mu,
        "s_max": _s_field(cert.s_max),
        "s_unbounded": cert.s_max == math.inf,
        "exact": cert.exact,
        "per_i": cert.per_i,
        "witness": cert.witness,
    }
    return result, EXIT_OK


# --- parser ----------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="csynth", description="Sparse-recovery certificates and low-rank uniform-norm approximation.")
    p.add_argument("--version", action="version", version=f"csynth {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", default=None, help="JSON result path (default stdout)")
        sp.add_argument("--timing", action="store_true", help="add wall-clock seconds to the JSON")

    h = sub.add_parser("hadamard", help="write H_nu and its certificate 2^-nu H_nu")
    h.add_argument("--nu", type=int, required=True)
    h.add_argument("--matrix-out", default=None)
    h.add_argument("--certificate-out", default=None)
    common(h)
    h.set_defaults(func=cmd_hadamard)

    s = sub.add_parser("synth", help="select rows of A certifying s-goodness")
    s.add_argument("--nu", type=int, default=None, help="use A = H_nu, Y = 2^-nu H_nu")
    s.add_argument("--matrix", default=None)
    s.add_argument("--y", default=None)
    s.add_argument("--s", type=int, required=True)
    s.add_argument("--policy", choices=POLICIES, default="aprime")
    s.add_argument("--schedule", choices=SCHEDULE_KINDS, default=None)
    s.add_argument("--variant", choices=("first", "best"), default="first", help="policy a scan variant")
    s.add_argument("--k-max", type=int, default=None, help="step budget (default 4n)")
    s.add_argument("--max-draws", type=int, default=None)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--refine-every", type=int, default=None)
    s.add_argument("--certify", choices=("incremental", "bisect"), default="incremental")
    s.add_argument("--hadamard-shortcut", dest="hadamard_shortcut", action="store_true", default=None)
    s.add_argument("--no-hadamard-shortcut", dest="hadamard_shortcut", action="store_false")
    common(s)
    s.set_defaults(func=cmd_synth)

    lr = sub.add_parser("lowrank", help="Gaussian rank-k approximation")
    lr.add_argument("--k", type=int, required=True)
    lr.add_argument("--seed", type=int, default=0)
    lr.add_argument("--matrix", default=None)
    lr.add_argument("--factors", nargs=2, metavar=("P", "Q"), default=None)
    lr.add_argument("--D", type=float, default=None, help="claimed squared row-norm bound for --factors")
    common(lr)
    lr.set_defaults(func=cmd_lowrank)

    nm = sub.add_parser("norm", help="bounds on the factorization norm")
    nm.add_argument("--matrix", required=True)
    nm.add_argument("--tol", type=float, default=1e-10)
    common(nm)
    nm.set_defaults(func=cmd_norm)

    gd = sub.add_parser("goodness", help="certify s-goodness of a matrix")
    gd.add_argument("--matrix", required=True)
    gd.add_argument("--tol", type=float, default=1e-8)
    gd.add_argument("--method", choices=("lp", "smooth"), default="lp")
    gd.add_argument("--hadamard-shortcut", action="store_true")
    common(gd)
    gd.set_defaults(func=cmd_goodness)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "tol", 1.0) <= 0:
        parser.error("--tol must be positive")
    started = time.perf_counter()
    try:
        result, code = args.func(args)
        emit(args, result, started)
    except (InputError, CSynthError, OSError, ValueError) as exc:
        print(f"csynth {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return code


if __name__ == "__main__":
    sys.exit(main())
