"""
Command-line entry point.

Every subcommand resolves its parameters (flags, optionally preceded by a
``--config`` file of ``key=value`` lines), runs one library operation,
writes its artifacts into ``--out-dir`` and records them in
``manifest.json``.  Exit status: 0 success, 1 domain or numerical error,
2 usage error.
"""
import argparse
import json
import os
import platform
import sys

from . import __version__
from .errors import DecolabError
from .hp import ENV_PRECISION, hp, parse_complex

# default Misiurewicz parameter for ``tune`` (relation (4, 1))
DEFAULT_C0 = "-0.1010963638456221+0.9562865108091415i"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n\n{self.format_help()}")


# --------------------------------------------------------------------------
# config files

def read_config(path):
    """
    ``key=value`` lines; ``#`` starts a comment, blank lines are skipped.

    Returns
    -------
    dict
        Keys normalized to lower case with ``-`` in place of ``_``.
    """
    out = {}
    with open(path) as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip().lower().replace("_", "-")] = v.strip()
    return out


def _config_argv(cfg, parser):
    known = {a.option_strings[0][2:] for a in parser._actions if a.option_strings}
    argv = []
    for k, v in cfg.items():
        if k not in known:
            raise UsageError(f"unknown config key {k!r}\n\n{parser.format_help()}")
        argv += [f"--{k}", v]
    return argv


# --------------------------------------------------------------------------
# value parsers

def _complex(text):
    try:
        parse_complex(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))
    return text


def _pixels(text):
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}")


def _mode(text):
    if text == "mandelbrot":
        return text
    if text.startswith("julia:"):
        return ("julia", _complex(text[6:]))
    raise argparse.ArgumentTypeError(f"mode must be mandelbrot or julia:C, got {text!r}")


def _pair(text):
    try:
        a, b = text.split(",")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected L,K, got {text!r}")


def _map_tag(text):
    kind, _, rest = text.partition(":")
    try:
        if kind == "center":
            return ("center", int(rest))
        if kind == "misiurewicz":
            l, k = _pair(rest)
            return ("misiurewicz", l, k)
    except (ValueError, argparse.ArgumentTypeError):
        pass
    raise argparse.ArgumentTypeError(f"map must be center:Q or misiurewicz:L,K, got {text!r}")


# --------------------------------------------------------------------------
# commands

def _cmd_solve_center(a, ctx):
    from .solvers import solve_superattracting_center
    c = solve_superattracting_center(a.period, a.seed, a.tol)
    return {"center": str(c), "center_full": c.to_string(), "precision": c.precision}


def _cmd_solve_misiurewicz(a, ctx):
    from .solvers import MisiurewiczSpec, multiplier_at_misiurewicz, solve_misiurewicz
    spec = MisiurewiczSpec(a.l, a.k)
    c = solve_misiurewicz(spec, a.seed, a.tol)
    mu = multiplier_at_misiurewicz(c, spec)
    return {"c": str(c), "c_full": c.to_string(), "multiplier": str(mu)}


def _cmd_solve_parabolic(a, ctx):
    from .solvers import ParabolicSpec, solve_parabolic_root
    c, z = solve_parabolic_root(ParabolicSpec(a.m, a.num, a.den), a.seed_c, a.seed_z, a.tol)
    return {"c": str(c), "z": str(z), "c_full": c.to_string()}


def _cmd_tune(a, ctx):
    from .solvers import MisiurewiczSpec, tune_misiurewicz
    c = tune_misiurewicz(a.s0, a.p, MisiurewiczSpec(a.l, a.k), a.c0, a.tol)
    return {"c": str(c), "c_full": c.to_string()}


def _cmd_cascade(a, ctx):
    from .solvers import MisiurewiczSpec, cascade, multiplier_at_misiurewicz
    mu = a.mu
    if mu is None and a.misiurewicz is not None:
        mu = multiplier_at_misiurewicz(hp(a.c1), MisiurewiczSpec(*a.misiurewicz))
    fr = None if a.first_ratio is None else float(a.first_ratio)
    rec = cascade(a.c1, a.s_base, a.q_base, a.dq, a.count, mu=mu, first_ratio=fr)
    out = {"law": rec.fitted_law, "exponent": rec.exponent,
           "fit_residual": rec.fit_residual,
           "centers": [[str(s), q] for s, q in rec.centers],
           "error": rec.error}
    if rec.mu is not None:
        out["mu"] = str(rec.mu)
        out["ratio_times_mu"] = [abs(complex(r * rec.mu)) for r in rec.ratios]
    return out


def _cmd_build_model(a, ctx):
    from .models import ModelSpec, build_model_K, build_model_M
    spec = ModelSpec.douady(a.c_prime, a.R, m_max=a.m_max,
                            samples_per_level=a.samples, seed=ctx["seed"])
    cloud = build_model_M(spec) if a.plane == "M" else build_model_K(hp(a.c), spec)
    path = ctx["artifact"](a.out)
    if path.endswith(".bin"):
        cloud.to_binary(path)
    else:
        cloud.to_csv(path)
    return {"points": len(cloud), "dropped": cloud.meta.get("dropped"),
            "R": spec.R}


def _frame(a, center, width):
    from .render import FrameSpec
    return FrameSpec(center, width, a.px, a.max_iter, a.mode, a.color)


def _save_image(img, path, ctx, counts=True):
    p = ctx["artifact"](path)
    img.save(p)
    out = {"image": os.path.basename(p), "interior_pixels": int(img.interior.sum()),
           "center_pixel": int(img.center_pixel()), "engine": img.meta.get("engine")}
    if counts:
        cp = ctx["artifact"](os.path.splitext(path)[0] + ".counts")
        img.save_counts(cp)
    return out


def _cmd_render(a, ctx):
    from .models import PointCloud
    from .render import overlay, render_auto
    img = render_auto(_frame(a, a.center, a.width), a.deep)
    if a.overlay:
        img = overlay(img, PointCloud.from_csv(a.overlay))
    out = _save_image(img, a.out, ctx)
    if "overlay_outside" in img.meta:
        out["overlay_outside"] = img.meta["overlay_outside"]
    return out


def _cmd_zoom(a, ctx):
    from .render import ZoomSchedule, zoom_sequence
    sch = ZoomSchedule(a.center, a.width_start, a.width_end, a.frames)
    imgs = zoom_sequence(sch, _frame(a, a.center, a.width_start), a.deep)
    frames = []
    for n, img in enumerate(imgs, 1):
        r = _save_image(img, f"{a.prefix}{n:03d}.png", ctx, counts=False)
        r["width"] = img.frame.width
        frames.append(r)
    return {"frames": frames}


def _cmd_verify_similarity(a, ctx):
    from .models import ModelSpec
    from .verify import decoration_similarity
    spec = ModelSpec.douady(a.c_prime, a.R)
    rep = decoration_similarity(spec, a.s, a.period, a.window_factor, a.px[0], a.max_iter,
                                threshold=a.threshold)
    rep.artifacts.append("report.json")
    rep.to_json(ctx["artifact"]("report.json"))
    return rep.to_dict()


def _cmd_semihyp(a, ctx):
    from .verify import semihyperbolic_test
    rep = semihyperbolic_test(a.c, a.n_iter, a.delta, a.transient)
    d = rep.to_dict()
    d["classification"] = rep.classification
    return d


def _cmd_winding(a, ctx):
    from .solvers import winding_number
    return {"winding_number": winding_number(a.map, a.center, a.radius, a.samples)}


# --------------------------------------------------------------------------
# parser

def build_parser():
    p = _Parser(prog="decolab", description="Decorated Mandelbrot set toolkit.")
    p.add_argument("--version", action="version", version=f"decolab {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def cmd(name, fn, help_):
        s = sub.add_parser(name, help=help_, description=help_)
        s.set_defaults(func=fn)
        s.add_argument("--config", help="key=value file supplying defaults for flags")
        s.add_argument("--out-dir", default=".", help="artifact directory (default .)")
        s.add_argument("--precision", type=int, help=f"working precision, sets {ENV_PRECISION}")
        s.add_argument("--rng-seed", type=int, default=0)
        return s

    s = cmd("solve-center", _cmd_solve_center, "superattracting center of a given period")
    s.add_argument("--period", type=int, required=True)
    s.add_argument("--seed", type=_complex, required=True)
    s.add_argument("--tol", type=float, default=1e-30)

    s = cmd("solve-misiurewicz", _cmd_solve_misiurewicz, "Misiurewicz parameter (l, k)")
    s.add_argument("--l", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--seed", type=_complex, required=True)
    s.add_argument("--tol", type=float, default=1e-30)

    s = cmd("solve-parabolic", _cmd_solve_parabolic, "parabolic parameter with multiplier e^(2 pi i num/den)")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--num", type=int, default=0)
    s.add_argument("--den", type=int, default=1)
    s.add_argument("--seed-c", type=_complex, required=True)
    s.add_argument("--seed-z", type=_complex, required=True)
    s.add_argument("--tol", type=float, default=1e-30)

    s = cmd("tune", _cmd_tune, "tuned Misiurewicz parameter s0 ⊥ c0")
    s.add_argument("--s0", type=_complex, required=True)
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--l", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--c0", type=_complex, default=DEFAULT_C0)
    s.add_argument("--tol", type=float, default=1e-30)

    s = cmd("cascade", _cmd_cascade, "centers accumulating on c1 and their fitted law")
    s.add_argument("--c1", type=_complex, required=True)
    s.add_argument("--s-base", type=_complex, required=True)
    s.add_argument("--q-base", type=int, required=True)
    s.add_argument("--dq", type=int, required=True)
    s.add_argument("--count", type=int, default=6)
    s.add_argument("--mu", type=_complex)
    s.add_argument("--misiurewicz", type=_pair, metavar="L,K",
                   help="relation of c1; its multiplier is used as mu")
    s.add_argument("--first-ratio", type=float)

    s = cmd("build-model", _cmd_build_model, "decoration cloud of M(c') or K_c(c')")
    s.add_argument("--c-prime", type=_complex, required=True)
    s.add_argument("--R", type=float, default=220.0)
    s.add_argument("--m-max", type=int, default=6)
    s.add_argument("--samples", type=int, default=256)
    s.add_argument("--plane", choices=("M", "K"), default="M")
    s.add_argument("--c", type=_complex, default="0")
    s.add_argument("--out", default="model.csv", help=".csv or .bin")

    def frame_flags(s, width=True):
        s.add_argument("--center", type=_complex, required=True)
        if width:
            s.add_argument("--width", type=float, required=True)
        s.add_argument("--px", type=_pixels, default=(256, 256), metavar="WxH")
        s.add_argument("--max-iter", type=int, default=1000)
        s.add_argument("--mode", type=_mode, default="mandelbrot")
        s.add_argument("--color", choices=("escape", "distance", "binary"), default="escape")
        s.add_argument("--deep", choices=("auto", "on", "off"), default="auto")

    s = cmd("render", _cmd_render, "escape-time / distance image")
    frame_flags(s)
    s.add_argument("--out", default="render.png", help=".png or .ppm")
    s.add_argument("--overlay", metavar="CLOUD.csv")

    s = cmd("zoom", _cmd_zoom, "geometric zoom sequence")
    s.add_argument("--schedule", help="key=value file (alias of --config)")
    frame_flags(s, width=False)
    s.add_argument("--width-start", type=float, required=True)
    s.add_argument("--width-end", type=float, required=True)
    s.add_argument("--frames", type=int, required=True)
    s.add_argument("--prefix", default="frame")

    s = cmd("verify-similarity", _cmd_verify_similarity,
            "align M(c') to the rendered boundary around a center")
    s.add_argument("--c-prime", type=_complex, required=True)
    s.add_argument("--R", type=float, default=220.0)
    s.add_argument("--s", type=_complex, required=True)
    s.add_argument("--period", type=int, required=True)
    s.add_argument("--window-factor", type=float, default=10.0)
    s.add_argument("--px", type=_pixels, default=(300, 300), metavar="WxH")
    s.add_argument("--max-iter", type=int, default=20000)
    s.add_argument("--threshold", type=float, default=0.05)

    s = cmd("semihyp", _cmd_semihyp, "finite-orbit semihyperbolicity heuristic")
    s.add_argument("--c", type=_complex, required=True)
    s.add_argument("--n-iter", type=int, default=10_000)
    s.add_argument("--delta", type=float)
    s.add_argument("--transient", type=int, default=100)

    s = cmd("winding", _cmd_winding, "winding number of a parameter map around 0")
    s.add_argument("--map", type=_map_tag, required=True, metavar="center:Q|misiurewicz:L,K")
    s.add_argument("--center", type=_complex, required=True)
    s.add_argument("--radius", type=float, required=True)
    s.add_argument("--samples", type=int, default=64)
    return p


def _versions():
    import gmpy2
    import numpy
    import scipy
    return {"decolab": __version__, "python": platform.python_version(),
            "numpy": numpy.__version__, "scipy": scipy.__version__,
            "gmpy2": gmpy2.version()}


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    return str(x)


def _config_path(argv):
    for i, t in enumerate(argv):
        for flag in ("--config", "--schedule"):
            if t == flag and i + 1 < len(argv):
                return argv[i + 1]
            if t.startswith(flag + "="):
                return t.split("=", 1)[1]
    return None


def _parse(argv):
    """Flags given on the command line override those from a config file."""
    p = build_parser()
    if not argv:
        raise UsageError(p.format_help())
    cfg_path = _config_path(argv)
    if cfg_path and argv[0] in p._subparsers._group_actions[0].choices:
        sp = p._subparsers._group_actions[0].choices[argv[0]]
        argv = [argv[0]] + _config_argv(read_config(cfg_path), sp) + list(argv[1:])
    if argv[0] in p._subparsers._group_actions[0].choices:
        argv = [argv[0]] + _join_values(argv[1:], p._subparsers._group_actions[0].choices[argv[0]])
    a = p.parse_args(argv)
    if a.command is None:
        raise UsageError(p.format_help())
    return a, argv


def _join_values(argv, parser):
    """``--flag VALUE`` -> ``--flag=VALUE`` so that values like -0.75 parse."""
    takes = {o for a in parser._actions if a.nargs is None and a.option_strings
             for o in a.option_strings}
    out, i = [], 0
    while i < len(argv):
        t = argv[i]
        if t in takes and i + 1 < len(argv):
            out.append(f"{t}={argv[i + 1]}")
            i += 2
        else:
            out.append(t)
            i += 1
    return out


def _replay_argv(argv):
    """``replay MANIFEST [--out-dir DIR]``: the recorded command line."""
    if len(argv) < 2:
        raise UsageError("usage: decolab replay MANIFEST [--out-dir DIR]")
    with open(argv[1]) as fh:
        rec = json.load(fh)
    out = list(rec["argv"])
    rest = argv[2:]
    if rest:
        if len(rest) != 2 or rest[0] != "--out-dir":
            raise UsageError("usage: decolab replay MANIFEST [--out-dir DIR]")
        out += rest
    return out


def run(argv=None):
    """Execute one command; returns the process exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if argv and argv[0] == "replay":
            argv = _replay_argv(argv)
        a, argv = _parse(argv)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return 2
    except (OSError, KeyError, ValueError) as e:
        print(f"decolab: {e}", file=sys.stderr)
        return 2
    if a.precision is not None:
        os.environ[ENV_PRECISION] = str(a.precision)
    os.makedirs(a.out_dir, exist_ok=True)
    artifacts = []

    def artifact(name):
        artifacts.append(name)
        return os.path.join(a.out_dir, name)

    ctx = {"seed": a.rng_seed, "artifact": artifact}
    params = {k: v for k, v in sorted(vars(a).items())
              if k not in ("func", "command", "out_dir", "config", "schedule")}
    # the replayable command line, without the output location
    rec_argv = []
    skip = False
    for t in argv:
        if skip:
            skip = False
            continue
        if t in ("--out-dir", "--config", "--schedule"):
            skip = True
            continue
        if t.startswith(("--out-dir=", "--config=", "--schedule=")):
            continue
        rec_argv.append(t)
    try:
        result = a.func(a, ctx)
        code = 0
    except DecolabError as e:
        result = {"error": f"{type(e).__name__}: {e}"}
        code = 1
    result = _jsonable(result)
    text = json.dumps(result, indent=2, sort_keys=True)
    print(text, file=sys.stdout if code == 0 else sys.stderr)
    with open(os.path.join(a.out_dir, "result.json"), "w") as fh:
        fh.write(text + "\n")
    artifacts.append("result.json")
    manifest = {"command": a.command, "params": _jsonable(params), "argv": rec_argv,
                "versions": _versions(), "artifacts": artifacts, "exit_code": code}
    with open(os.path.join(a.out_dir, "manifest.json"), "w") as fh:
        fh.write(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
