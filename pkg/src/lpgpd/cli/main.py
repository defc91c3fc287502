"""``lpgpd`` command-line front end.

Every command prints one JSON report
``{command, inputs, p, result, witness?, residual?, timing}``.
Exit status: 0 success, 2 domain error, 3 parse/input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from .. import bratteli as br
from ..convolution import convolve, i_norm
from ..cuntz import cuntz_semilattice, leavitt_norm_bounds, parse_point
from ..disintegration import disintegrate
from ..errors import ExpressionSyntaxError, LpgpdError, UnknownName
from ..groupoid import Slice, from_json, label, singleton_slice_semigroup, validate
from ..lpspace import NormConfig, op_norm
from ..measure import cocycle, induce, measure_from_json, uniform_measure
from ..representation import (
    ind_matrix,
    integrate,
    reduced_norm,
    regular_rep,
    rep_from_json,
    validate_rep,
)
from ..semigroup import is_tight_semilattice, is_tight_spatial, rho_from_pi
from .cache import ResultCache, cache_key
from .parser import AlgebraContext, LeavittContext, parse_expression

EXIT_OK, EXIT_DOMAIN, EXIT_PARSE = 0, 2, 3

COMMANDS = ["validate", "inorm", "convolve", "cocycle", "rednorm", "ind", "integrate",
            "tight", "disintegrate", "cuntz-bound", "bratteli"]


class InputError(Exception):
    """Unreadable or malformed input (exit 3)."""


class _ArgParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _ArgParser(prog="lpgpd", description="Finite groupoid L^p operator algebra toolkit")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("-g", "--groupoid", help="groupoid JSON file (or inline JSON)")
    ap.add_argument("-m", "--measure", help="measure JSON file (or inline JSON)")
    ap.add_argument("-e", "--expr", help="element expression")
    ap.add_argument("--rep", help="bundle representation JSON file (or inline JSON)")
    ap.add_argument("--x", action="append", help="base point (object label, or eventually periodic word for cuntz-bound)")
    ap.add_argument("--diagram", help="Bratteli diagram JSON file (or inline JSON)")
    ap.add_argument("--element", help="tower element JSON {level, blocks}")
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--tol", type=float, default=1e-10)
    ap.add_argument("--restarts", type=int, default=32)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--cache", default=None)
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--maxN", type=int, default=6)
    return ap


def _read(src: str | None, what: str):
    if src is None:
        raise InputError(f"missing {what}")
    text = src if src.lstrip().startswith("{") else None
    if text is None:
        try:
            with open(src) as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {what}: {exc}") from None
    try:
        return json.loads(text), text
    except ValueError as exc:
        raise InputError(f"{what} is not valid JSON: {exc}") from None


def _cplx(z):
    return [float(np.real(z)), float(np.imag(z))]


def _vec(v):
    return [_cplx(z) for z in np.asarray(v).ravel()]


class Runner:
    def __init__(self, args):
        self.args = args
        self.cfg = NormConfig(restarts=args.restarts, tol=args.tol, seed=args.seed)
        # the environment variable takes precedence over --cache
        self.cache = ResultCache(os.environ.get("LPGPD_CACHE") or args.cache)
        self.inputs = {}
        self.content = []

    def load(self, attr, what):
        doc, text = _read(getattr(self.args, attr), what)
        self.inputs[what] = getattr(self.args, attr) if not getattr(self.args, attr).lstrip().startswith("{") else "<inline>"
        self.content.append(text)
        return doc

    def groupoid(self):
        doc = self.load("groupoid", "groupoid")
        G = from_json(doc)
        by_label = {label(a): a for a in G.arrows}
        slices = {}
        for name, ids in doc.get("slices", {}).items():
            try:
                slices[name] = Slice(G, frozenset(by_label[str(i)] for i in ids))
            except KeyError as exc:
                raise InputError(f"slice {name!r} names unknown arrow {exc.args[0]!r}") from None
        return G, slices

    def element(self, G, slices):
        if self.args.expr is None:
            raise InputError("missing expression (-e)")
        self.inputs["expr"] = self.args.expr
        self.content.append(self.args.expr)
        return parse_expression(self.args.expr, AlgebraContext(G, slices))

    def measure(self, G):
        if self.args.measure is None:
            return None
        return measure_from_json(self.load("measure", "measure"), G)

    def rep(self, G):
        if self.args.rep is not None:
            return rep_from_json(self.load("rep", "rep"), G, self.args.p)
        mu = self.measure(G) or uniform_measure(G)
        return regular_rep(G, mu, self.args.p)

    def cached(self, command, compute):
        a = self.args
        key = cache_key(command, "\0".join(self.content), p=a.p, tol=a.tol, restarts=a.restarts,
                        seed=a.seed, d=a.d, maxN=a.maxN, x=a.x)
        hit = self.cache.get(key)
        if hit is not None:
            hit["cached"] = True
            return hit
        out = compute()
        self.cache.put(key, out)
        out = dict(out)
        out["cached"] = False
        return out

    # -- commands ----------------------------------------------------------------
    def cmd_validate(self):
        G = from_json(self.load("groupoid", "groupoid"))
        v = validate(G)
        return {"result": {"valid": not v, "violations": v}}, (EXIT_OK if not v else EXIT_DOMAIN)

    def cmd_inorm(self):
        G, sl = self.groupoid()
        return {"result": {"value": i_norm(self.element(G, sl))}}, EXIT_OK

    def cmd_convolve(self):
        G, sl = self.groupoid()
        f = self.element(G, sl)
        return {"result": {"coeffs": f.to_json()["coeffs"], "i_norm": i_norm(f)}}, EXIT_OK

    def cmd_cocycle(self):
        G, _ = self.groupoid()
        mu = self.measure(G)
        if mu is None:
            raise InputError("missing measure (-m)")
        D = cocycle(G, mu)
        return {"result": {"quasi_invariant": induce(G, mu).quasi_invariant,
                           "D": {label(a): v for a, v in D.as_dict().items()}}}, EXIT_OK

    def cmd_rednorm(self):
        G, sl = self.groupoid()
        f = self.element(G, sl)

        def compute():
            est = reduced_norm(G, f, self.args.p, self.cfg)
            return {"result": {"value": est.value, "basepoint": label(est.argmax), "converged": est.converged,
                               "i_norm": i_norm(f)},
                    "witness": _vec(est.witness)}

        return self.cached("rednorm", compute), EXIT_OK

    def cmd_ind(self):
        G, sl = self.groupoid()
        f = self.element(G, sl)
        mu = self.measure(G)

        def compute():
            if mu is not None:
                T = ind_matrix(G, f, self.args.p, mu=mu)
            else:
                if not self.args.x:
                    raise InputError("ind needs --x or -m")
                objs = {label(x): x for x in G.objects}
                if self.args.x[0] not in objs:
                    raise InputError(f"unknown object {self.args.x[0]!r}")
                T = ind_matrix(G, f, self.args.p, x=objs[self.args.x[0]])
            est = op_norm(T, self.cfg)
            return {"result": {"value": est.value, "basis": [label(a) for a in T.dom.labels],
                               "matrix": [_vec(r) for r in T.matrix]},
                    "witness": _vec(est.witness)}

        return self.cached("ind", compute), EXIT_OK

    def cmd_integrate(self):
        G, sl = self.groupoid()
        R = self.rep(G)
        f = self.element(G, sl)
        bad = validate_rep(R)
        if bad:
            raise LpgpdError("invalid representation: " + "; ".join(bad[:3]))

        def compute():
            T = integrate(R, f)
            est = op_norm(T, self.cfg)
            return {"result": {"value": est.value, "i_norm": i_norm(f),
                               "index": [[label(x), k] for x, k in T.index]},
                    "witness": _vec(est.witness)}

        return self.cached("integrate", compute), EXIT_OK

    def cmd_tight(self):
        if self.args.groupoid is None:
            E, beta = cuntz_semilattice(self.args.d, self.args.maxN)
            res = is_tight_semilattice(beta)
            return {"result": {"tight": res.tight, "source": f"cuntz cylinders d={self.args.d} N={self.args.maxN}",
                               "counterexample": res.counterexample and [list(map(str, c)) for c in res.counterexample]}}, EXIT_OK
        G, _ = self.groupoid()
        R = self.rep(G)
        S = singleton_slice_semigroup(G)
        rho = rho_from_pi(lambda f: integrate(R, f), S)
        res = is_tight_spatial(rho)
        return {"result": {"tight": res.tight, "regular": res.regular,
                           "counterexample": res.counterexample and [list(map(str, c)) for c in res.counterexample]}}, EXIT_OK

    def cmd_disintegrate(self):
        G, _ = self.groupoid()
        R = self.rep(G)
        S = singleton_slice_semigroup(G)
        rho = rho_from_pi(lambda f: integrate(R, f), S)
        res = disintegrate(rho, tol=max(self.args.tol, 1e-8))
        return {"result": {"mu": {label(x): float(w) for x, w in zip(G.objects, res.mu.weights)},
                           "fibration": {str(z): label(x) for z, x in sorted(res.q.items())}},
                "residual": res.residual}, EXIT_OK

    def cmd_cuntz_bound(self):
        if self.args.expr is None:
            raise InputError("missing expression (-e)")
        self.inputs["expr"] = self.args.expr
        self.content.append(self.args.expr)
        f = parse_expression(self.args.expr, LeavittContext(self.args.d))
        points = [parse_point(s) for s in (self.args.x or ["0"])]

        def compute():
            b = leavitt_norm_bounds(f, self.args.d, self.args.p, self.args.maxN, points, self.cfg)
            return {"result": {"N": b.Ns, "lower_bounds": b.values,
                               "basepoints": [repr(x) for x in b.basepoints],
                               "coefficient_l1_upper": b.upper}}

        return self.cached("cuntz-bound", compute), EXIT_OK

    def cmd_bratteli(self):
        D = br.diagram_from_json(self.load("diagram", "diagram"))
        out = {"multiplicities": [br.multiplicities(D, k).tolist() for k in range(D.depth)],
               "level_arrows": [br.level_groupoid(D, k).n_arrows for k in range(D.depth)]}
        if self.args.element:
            doc = self.load("element", "element")
            k = int(doc["level"])
            blocks = [np.asarray(b, dtype=float) for b in doc["blocks"]]
            blocks = [b[..., 0] + 1j * b[..., 1] if b.ndim == 3 else b for b in blocks]
            a = br.tower_element(D, k, blocks)
            norms = [br.af_norm(a, self.args.p, self.cfg)]
            while a.level + 1 < D.depth:
                a = br.embed(D, a.level, a)
                norms.append(br.af_norm(a, self.args.p, self.cfg))
            out["af_norm_by_level"] = norms
        return {"result": out}, EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    run = Runner(args)
    t0 = time.perf_counter()
    try:
        body, code = getattr(run, "cmd_" + args.command.replace("-", "_"))()
    except (ExpressionSyntaxError, UnknownName, InputError) as exc:
        body, code = {"error": {"type": type(exc).__name__, "message": str(exc)}}, EXIT_PARSE
    except LpgpdError as exc:
        body, code = {"error": {"type": type(exc).__name__, "message": str(exc)}}, EXIT_DOMAIN
    report = {"command": args.command, "inputs": run.inputs, "p": args.p}
    report.update(body)
    report["timing"] = time.perf_counter() - t0
    print(json.dumps(report, indent=2))
    return code


if __name__ == "__main__":
    sys.exit(main())
