"""Builtin verification suites run by the command line runner.

Each suite takes a typed parameter map and a seed and returns inequality
reports plus free-standing estimates.  Suites only call the public API of the
other modules; all randomness flows from the seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .report import Estimate, InequalityReport

PARAM_KINDS = ("int", "float", "optint", "optfloat", "ints", "floats", "str", "lines")


@dataclass(frozen=True)
class Param:
    """A suite parameter: ``kind`` is one of :data:`PARAM_KINDS`."""

    kind: str
    default: object
    help: str = ""


class ParamError(ValueError):
    pass


def parse_param(p: Param, text: str):
    """Convert the raw text of a config value according to ``p.kind``."""
    text = text.strip()
    try:
        if p.kind == "int":
            return int(text)
        if p.kind == "float":
            return float(text)
        if p.kind in ("optint", "optfloat"):
            if text.lower() in ("", "none", "default"):
                return None
            return int(text) if p.kind == "optint" else float(text)
        if p.kind == "ints":
            return tuple(int(v) for v in text.split(",") if v.strip())
        if p.kind == "floats":
            return tuple(float(v) for v in text.split(",") if v.strip())
        if p.kind in ("str", "lines"):
            return text
    except ValueError:
        raise ParamError(f"expected {p.kind}, got {text!r}") from None
    raise ParamError(f"unknown parameter kind {p.kind!r}")


@dataclass(frozen=True)
class Suite:
    id: str
    description: str
    run: Callable[[dict, int], tuple[list, list]]
    params: dict = field(default_factory=dict)

    def defaults(self) -> dict:
        return {k: (list(p.default) if p.kind == "lines" else p.default) for k, p in self.params.items()}


SUITES: dict[str, Suite] = {}


def suite(id: str, description: str, **params: Param):
    def register(fn):
        SUITES[id] = Suite(id, description, fn, params)
        return fn

    return register


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def _max_ratio(name: str, reports) -> Estimate:
    return Estimate(f"{name} max ratio", max((r.ratio for r in reports), default=0.0), 0.0, "max")


def _check(id: str, model: str, err: float, tol: float, **extra) -> InequalityReport:
    """An accuracy check as a report: ``err <= tol``."""
    return InequalityReport(id, model, float(err), float(tol), float(tol), extra=extra)


# ---------------------------------------------------------------------------
# discrete cube and chains


@suite(
    "theorem1-product-cube",
    "semigroup variance bound with C = 4 e^((1+kappa/rho)^+)/rho on products of two-point chains",
    N=Param("ints", (4, 6, 8), "cube dimensions"),
    p=Param("floats", (0.5, 0.7), "biases"),
    functions=Param("int", 25, "random functions per model"),
    C=Param("optfloat", None, "override of the constant"),
)
def _theorem1(params, seed):
    from .chain import binary_cube_chain, two_point_logsob
    from .cube import BiasedCube, random_function
    from .talagrand import theorem1_report

    rng = _rng(seed)
    out = []
    for N in params["N"]:
        for p in params["p"]:
            pc = binary_cube_chain(N, p)
            rho = two_point_logsob(p)
            cube = BiasedCube(N, p)
            for _ in range(params["functions"]):
                f = random_function(cube, rng)
                out.append(theorem1_report(pc.chain, pc.decomposition, rho, f.values, params["C"], f"cube N={N} p={p:g}"))
    return out, [_max_ratio("theorem1", out)]


@suite(
    "kkl-cube",
    "some coordinate has influence >= a(1-a) log N / (8 C N) on the uniform cube, C = 4e",
    N=Param("ints", (3, 5, 7, 9, 11), "cube dimensions, at most 12"),
    monotone=Param("int", 20, "random monotone sets per dimension"),
    C=Param("float", 4 * math.e),
)
def _kkl(params, seed):
    from .cube import BiasedCube, CubeFunction, kkl_extract, random_monotone_set

    rng = _rng(seed)
    out = []
    for N in params["N"]:
        if N > 12:
            raise ValueError("kkl-cube keeps N <= 12")
        cube = BiasedCube(N)
        par = cube.parity()
        sets = [("dictator", cube.dictator_set(0)), ("majority", cube.majority_set())]
        sets.append(("parity", CubeFunction(cube, (par.values > 0).astype(float))))
        sets += [("monotone", random_monotone_set(cube, rng)) for _ in range(params["monotone"])]
        for name, A in sets:
            r = kkl_extract(A, params["C"])
            out.append(InequalityReport("kkl", f"{name} N={N}", r.bound, r.influence, params["C"], extra={"coordinate": r.coordinate}))
    return out, [_max_ratio("kkl", out)]


@suite(
    "talagrand-biased-cube",
    "variance bound on the p-biased cube with prefactor pq(log p - log q)/(p - q), C = 2e",
    N=Param("ints", (3, 5, 8)),
    p=Param("floats", (0.5, 0.7, 0.9)),
    functions=Param("int", 20),
    C=Param("float", 2 * math.e),
)
def _biased_cube(params, seed):
    from .cube import BiasedCube, random_function, talagrand_rhs, variance

    rng = _rng(seed)
    out = []
    for N in params["N"]:
        for p in params["p"]:
            cube = BiasedCube(N, p)
            for _ in range(params["functions"]):
                f = random_function(cube, rng)
                out.append(InequalityReport("biased-cube-talagrand", f"cube N={N} p={p:g}", variance(f), talagrand_rhs(f, params["C"]), params["C"]))
    return out, [_max_ratio("biased-cube", out)]


@suite(
    "logsob-two-point",
    "numeric log-Sobolev constant of the two-point chain against 2(p - q)/(log p - log q)",
    p=Param("floats", (0.5, 0.6, 0.7, 0.8, 0.9)),
    tol=Param("float", 0.01, "relative tolerance"),
    restarts=Param("int", 32),
)
def _logsob(params, seed):
    from .chain import logsob_constant, two_point_chain, two_point_logsob

    out, est = [], []
    for p in params["p"]:
        chain = two_point_chain(p)
        num = logsob_constant(chain, "numeric", restarts=params["restarts"], seed=seed)
        exact = two_point_logsob(p)
        out.append(_check("logsob-two-point", f"p={p:g}", abs(num - exact), params["tol"] * exact))
        est += [Estimate(f"rho numeric p={p:g}", num, 0.0, "numeric"), Estimate(f"rho exact p={p:g}", exact)]
    return out, est


@suite(
    "hypercontractivity-chains",
    "||P_t f||_2 <= ||f||_p with p = 1 + exp(-2 rho t), and exponential variance decay at rate lambda",
    pairs=Param("int", 100, "random (f, t) pairs per model"),
    p=Param("float", 0.7),
    N=Param("int", 3, "dimension of the product model"),
)
def _hyper(params, seed):
    from .chain import binary_cube_chain, random_functions, spectral_gap, two_point_chain, two_point_logsob
    from .chain import hypercontractivity_check, variance_decay_check

    rng = _rng(seed)
    p = params["p"]
    rho = two_point_logsob(p)
    models = [("two-point", two_point_chain(p)), (f"cube N={params['N']}", binary_cube_chain(params["N"], p).chain)]
    out = []
    for name, chain in models:
        lam = spectral_gap(chain)
        for f in random_functions(chain.n, params["pairs"], rng):
            t = float(rng.exponential(0.5))
            out.append(hypercontractivity_check(chain, rho, t, f))
            out.append(variance_decay_check(chain, lam, f, max(t, 1e-3)))
    return out, [Estimate("rho", rho), _max_ratio("hypercontractivity", out)]


@suite(
    "generator-identity",
    "int |L_i f|^r = (p q^r + p^r q) int |D_i f|^r on the biased cube",
    N=Param("ints", (2, 4, 6, 8)),
    p=Param("float", 0.7),
    r=Param("floats", (1.0, 2.0, 3.0)),
    functions=Param("int", 10),
    tol=Param("float", 1e-12, "relative tolerance"),
)
def _identity(params, seed):
    from .chain import binary_cube_chain
    from .cube import BiasedCube, derivative_moments, random_function

    rng = _rng(seed)
    p = params["p"]
    q = 1.0 - p
    out = []
    for N in params["N"]:
        pc = binary_cube_chain(N, p)
        cube = BiasedCube(N, p)
        w = pc.chain.measure
        for _ in range(params["functions"]):
            f = random_function(cube, rng, "gaussian")
            for r in params["r"]:
                D = derivative_moments(f, r)
                for i in range(N):
                    lhs = float(w @ np.abs(pc.local_generator(i, f.values)) ** r)
                    rhs = (p * q ** r + p ** r * q) * D[i]
                    out.append(_check("generator-identity", f"N={N} r={r:g} i={i}", abs(lhs - rhs), params["tol"] * max(1.0, abs(rhs))))
    return out, []


@suite(
    "symmetric-group-gap",
    "spectral gap 2/(n-1) of the random transposition walk on S_n",
    n=Param("ints", (3, 4)),
    tol=Param("float", 1e-9),
)
def _sn_gap(params, seed):
    from .cayley import build_cayley_chain, symmetric_group
    from .chain import spectral_gap

    out = []
    for n in params["n"]:
        G, S = symmetric_group(n)
        lam = spectral_gap(build_cayley_chain(G, S).chain)
        out.append(_check("symmetric-group-gap", f"S_{n}", abs(lam - 2.0 / (n - 1)), params["tol"], gap=lam))
    return out, []


@suite(
    "cayley-talagrand-symmetric",
    "variance bound 2e/(rho |S|) for the transposition walk on S_n, plus the induced influence lower bound",
    n=Param("ints", (3, 4)),
    functions=Param("int", 20),
    C_influence=Param("float", 8 * math.e, "constant of the influence lower bound"),
)
def _cayley(params, seed):
    from .cayley import build_cayley_chain, max_influence, symmetric_group
    from .chain import logsob_constant
    from .talagrand import corollary2_report, influence_bound_extract

    rng = _rng(seed)
    out, est = [], []
    for n in params["n"]:
        G, S = symmetric_group(n)
        cc = build_cayley_chain(G, S)
        rho = logsob_constant(cc.chain, seed=seed)
        est.append(Estimate(f"rho S_{n}", rho, 0.0, "numeric"))
        C = params["C_influence"]
        for k in range(params["functions"]):
            f = rng.normal(size=G.order) if k % 2 else (rng.random(G.order) < 0.5).astype(float)
            out.append(corollary2_report(cc, f, rho))
            A = (rng.random(G.order) < rng.uniform(0.2, 0.8)).astype(float)
            a = A.mean()
            if 0.0 < a < 1.0:
                bound = influence_bound_extract(a, rho, C)
                out.append(InequalityReport("cayley-influence", f"S_{n} a={a:.3g}", bound, max_influence(cc, A), C))
    return out, est


@suite(
    "orlicz-variance",
    "variance bound through squared Orlicz norms with the frozen comparison constant",
    N=Param("ints", (3, 5)),
    p=Param("floats", (0.5, 0.8)),
    functions=Param("int", 15),
    C_phi=Param("optfloat", None, "defaults to the frozen value"),
)
def _orlicz(params, seed):
    from .chain import binary_cube_chain, two_point_logsob
    from .cube import BiasedCube, random_function
    from .talagrand import interpolated_variance_report, orlicz_variance_report

    rng = _rng(seed)
    out = []
    for N in params["N"]:
        for p in params["p"]:
            pc = binary_cube_chain(N, p)
            rho = two_point_logsob(p)
            cube = BiasedCube(N, p)
            for _ in range(params["functions"]):
                f = random_function(cube, rng).values
                out.append(interpolated_variance_report(pc.chain, pc.decomposition, rho, f))
                out.append(orlicz_variance_report(pc.chain, pc.decomposition, rho, f, params["C_phi"]))
    return out, [_max_ratio("orlicz", out)]


# ---------------------------------------------------------------------------
# gaussian space


@suite(
    "ou-hermite",
    "P_t h_k = exp(-k t) h_k for Hermite polynomials under the Ornstein-Uhlenbeck semigroup",
    k=Param("int", 4, "largest degree"),
    t=Param("floats", (0.05, 0.3, 1.0, 2.5)),
    nodes=Param("int", 20),
    tol=Param("float", 1e-8),
)
def _hermite(params, seed):
    from .gauss.measures import gaussian_grid, hermite
    from .gauss.ou import ou_semigroup_apply

    grid = gaussian_grid(1, params["nodes"])
    x = np.linspace(-3.0, 3.0, 25)[:, None]
    out = []
    for k in range(params["k"] + 1):
        h = hermite(k, 0, 1)
        for t in params["t"]:
            err = np.max(np.abs(ou_semigroup_apply(h, t, x, grid) - math.exp(-k * t) * h.value(x)))
            out.append(_check("ou-hermite", f"k={k} t={t:g}", err, params["tol"]))
    return out, []


@suite(
    "gradient-commutation",
    "|grad_i P_t f| <= exp(kappa t) P_t |grad_i f| pointwise, kappa = -1 for the gaussian",
    dims=Param("ints", (1, 2, 3)),
    functions=Param("int", 5),
    t=Param("floats", (0.1, 0.5, 1.5)),
    kappa=Param("float", -1.0),
)
def _commutation(params, seed):
    from .gauss.measures import ProductMeasure, random_polynomial
    from .gauss.ou import gradient_commutation_check

    rng = _rng(seed)
    out = []
    for d in params["dims"]:
        mu = ProductMeasure.standard_gaussian(d)
        grid = mu.grid(12 if d == 3 else 20)
        X = rng.normal(size=(16, d))
        for _ in range(params["functions"]):
            f = random_polynomial(d, int(rng.integers(1, 4)), rng)
            for t in params["t"]:
                out.append(gradient_commutation_check(f, t, grid, X, params["kappa"]))
    return out, []


@suite(
    "gradient-bound",
    "sqrt(t) sup |grad P_t f| <= 1 for |f| <= 1, with the sign-function probe as sharpness witness",
    functions=Param("int", 10),
    t=Param("floats", (0.01, 0.05, 0.2, 0.6, 1.0)),
    points=Param("int", 12),
)
def _gradient_bound(params, seed):
    from .calibration import bounded_gaussian_functions
    from .gauss.ou import gradient_bound_check, sign_probe, sign_probe_limit

    rng = _rng(seed)
    out = []
    for f, mu, grid in bounded_gaussian_functions(rng, params["functions"]):
        X = np.vstack([np.zeros(mu.dim), rng.normal(size=(params["points"] - 1, mu.dim))])
        for t in params["t"]:
            out.append(gradient_bound_check(f, t, grid, X))
    est = [Estimate(f"sign probe t={t:g}", sign_probe(t)) for t in (1e-1, 1e-2, 1e-4, 1e-6)]
    est += [Estimate("sign probe limit", sign_probe_limit()), Estimate("sharpness threshold", math.sqrt(2 / math.pi) - 0.05)]
    return out, est


@suite(
    "gaussian-l2-talagrand",
    "Var f <= C sum_i ||grad_i f||_2^2 / (1 + log(||grad_i f||_2/||grad_i f||_1)) in gaussian space, C = 4",
    functions=Param("int", 40),
    max_dim=Param("int", 3),
    C=Param("float", 4.0),
)
def _gauss_l2(params, seed):
    from .gauss.inequalities import corollary3_report
    from .gauss.measures import ProductMeasure, random_polynomial

    rng = _rng(seed)
    out = []
    for _ in range(params["functions"]):
        d = int(rng.integers(1, params["max_dim"] + 1))
        mu = ProductMeasure.standard_gaussian(d)
        f = random_polynomial(d, int(rng.integers(1, 4)), rng)
        out.append(corollary3_report(f, mu, params["C"]))
    return out, [_max_ratio("gaussian-l2", out)]


def _decompositions(params, n, rng):
    from .geom import coordinate_decomposition, loomis_whitney, parse_decomposition, random_frame

    if params["term"]:
        return [("config", parse_decomposition([f"term {t}" for t in params["term"]], n))]
    out = [("coordinate", coordinate_decomposition(n)), ("random-frame", random_frame(n, rng))]
    if n >= 2:
        out.insert(1, ("loomis-whitney", loomis_whitney(n)))
    return out


@suite(
    "brascamp-lieb-gaussian",
    "variance bound along a decomposition sum_i c_i Q_i = Id of the identity, constant 4",
    n=Param("ints", (2, 3)),
    functions=Param("int", 10),
    C=Param("float", 4.0),
    term=Param("lines", (), "repeatable 'c=<real> basis=<row-major reals>' lines"),
)
def _bl_gauss(params, seed):
    from .gauss.measures import ProductMeasure, random_polynomial
    from .geom import corollary5_report, projection_commutation_error

    rng = _rng(seed)
    out, est = [], []
    ns = params["n"]
    if params["term"] and len(ns) != 1:
        raise ValueError("explicit decomposition terms need a single n")
    for n in ns:
        grid = ProductMeasure.standard_gaussian(n).grid(12)
        for name, decomp in _decompositions(params, n, rng):
            worst = 0.0
            for _ in range(params["functions"]):
                f = random_polynomial(n, int(rng.integers(1, 4)), rng)
                r = corollary5_report(f, decomp, grid, params["C"])
                out.append(InequalityReport(r.id, f"{name} {r.model}", r.lhs, r.rhs, r.constant, r.slack))
                worst = max(worst, projection_commutation_error(f, decomp, 0.5, grid, rng.normal(size=(8, n))))
            est.append(Estimate(f"projection commutation error {name} n={n}", worst, 0.0, "max"))
    return out, est


@suite(
    "geometric-influence-gaussian",
    "max_i I_i(A) >= a(1-a) (log(N/(a(1-a))))^(1/2) / (C N) for gaussian half-spaces, C = 1",
    N=Param("ints", (1, 2, 4, 8, 16, 32, 64)),
    thresholds=Param("floats", (-3.0, -1.0, 0.0, 0.5, 2.0)),
    C=Param("float", 1.0),
    set=Param("str", "", "optional set specification checked at every N"),
)
def _geo_influence(params, seed):
    from .gauss.influence import analytic_influence, corollary7_check, mollified_influence
    from .gauss.measures import ProductMeasure
    from .gauss.sets import HalfSpace, parse_set_spec

    rng = _rng(seed)
    out, est = [], []
    for N in params["N"]:
        mu = ProductMeasure.standard_gaussian(N)
        sets = [HalfSpace.along_axis(int(rng.integers(N)), t, N) for t in params["thresholds"]]
        if params["set"]:
            sets.append(parse_set_spec(params["set"], N))
        for A in sets:
            out.append(corollary7_check(A, mu, params["C"]))
    mu = ProductMeasure.standard_gaussian(1)
    for t in params["thresholds"]:
        A = HalfSpace.along_axis(0, t, 1)
        m = mollified_influence(A, 0, mu, seed=seed)
        exact = analytic_influence(A, 0, mu)
        est += [m.to_estimate(f"mollified influence t={t:g}"), Estimate(f"exact influence t={t:g}", exact)]
        out.append(_check("mollified-influence", f"t={t:g}", abs(m.value - exact), 0.005 * exact))
    return out, est


@suite(
    "isoperimetric-halfspace",
    "Minkowski content of half-spaces against phi(Phi^-1(a)), and its ratio to a(1-a) log(1/(a(1-a)))^(1/2)",
    a=Param("floats", (1e-4, 1e-3, 1e-2, 0.05, 0.2, 0.5)),
    tol=Param("float", 0.01),
    band=Param("floats", (0.9, 1.5)),
)
def _iso(params, seed):
    from scipy.stats import norm

    from .gauss.influence import isoperimetric_profile, isoperimetric_shape, minkowski_content
    from .gauss.measures import ProductMeasure
    from .gauss.sets import HalfSpace

    lo, hi = params["band"]
    mu = ProductMeasure.standard_gaussian(2)
    out, est = [], []
    for a in params["a"]:
        A = HalfSpace(np.full(2, math.sqrt(0.5)), float(norm.ppf(a)))
        c = minkowski_content(A, mu, seed=seed)
        prof = isoperimetric_profile(a)
        ratio = c.value / isoperimetric_shape(a)
        est += [Estimate(f"minkowski content a={a:g}", c.value, c.std_error, c.method), Estimate(f"profile a={a:g}", prof), Estimate(f"shape ratio a={a:g}", ratio)]
        out.append(_check("isoperimetric-profile", f"a={a:g}", abs(c.value - prof), params["tol"] * prof))
        out.append(InequalityReport("isoperimetric-ratio-upper", f"a={a:g}", ratio, hi, hi))
        out.append(InequalityReport("isoperimetric-ratio-lower", f"a={a:g}", lo, ratio, lo))
    return out, est


@suite(
    "influence-set",
    "geometric influences of one configured set, exact or estimated, with its influence lower bound",
    set=Param("str", "halfspace axis=0 threshold=0.5"),
    N=Param("int", 2),
    method=Param("str", "auto", "auto, analytic, mollified or mc"),
    C=Param("float", 1.0),
)
def _influence_set(params, seed):
    from .gauss.influence import corollary7_check, influences
    from .gauss.measures import ProductMeasure
    from .gauss.sets import parse_set_spec

    mu = ProductMeasure.standard_gaussian(params["N"])
    A = parse_set_spec(params["set"], params["N"])
    kw = {} if params["method"] in ("auto", "analytic") else {"seed": seed}
    ests = influences(A, mu, params["method"], **kw)
    est = [e.to_estimate(f"influence i={i}") for i, e in enumerate(ests)]
    return [corollary7_check(A, mu, params["C"], params["method"], **kw)], est


# ---------------------------------------------------------------------------
# sphere


@suite(
    "sphere-l2-talagrand",
    "Var f <= (4e/n) sum_{i,j} ||D_ij f||_2^2 / (1 + log(||D_ij f||_2/||D_ij f||_1)) on S^(n-1)",
    n=Param("ints", (3, 4)),
    functions=Param("int", 10),
    samples=Param("int", 100000),
)
def _sphere_l2(params, seed):
    from .geom import SphereModel, corollary4_report, random_harmonic, sphere_dirichlet_identity_check

    rng = _rng(seed)
    out = []
    for n in params["n"]:
        model = SphereModel(n, params["samples"], int(rng.integers(2 ** 63)))
        for k in range(params["functions"]):
            f = random_harmonic(n, 1 + k % 2, rng)
            out.append(corollary4_report(f, model))
            out.append(sphere_dirichlet_identity_check(f, model))
    return out, [_max_ratio("sphere-l2", [r for r in out if r.id != "sphere-dirichlet-identity"])]


# ---------------------------------------------------------------------------
# calibrated corpora


def _corpus_suite(id: str, constant_id: str, description: str, cases: int):
    @suite(
        id,
        description,
        cases=Param("int", cases, "number of corpus cases, 0 for all"),
        corpus_seed=Param("optint", None, "defaults to the frozen corpus seed"),
        C=Param("optfloat", None, "defaults to the frozen constant"),
    )
    def run(params, seed):
        from .calibration import corpus, frozen_constant, frozen_seed

        cseed = frozen_seed(constant_id) if params["corpus_seed"] is None else params["corpus_seed"]
        C = frozen_constant(constant_id) if params["C"] is None else params["C"]
        items = corpus(constant_id, cseed)
        if params["cases"] > 0:
            items = items[: params["cases"]]
        out = [case(C) for _, case in items]
        return out, [Estimate(f"{constant_id} constant", C), _max_ratio(constant_id, out)]

    return run


_corpus_suite("gaussian-l1-talagrand", "theorem6", "Var f <= C' sum_i b_i (1 + b_i)/[1 + log+(1/b_i)]^(1/2), b_i = ||grad_i f||_1, for |f| <= 1", 30)
_corpus_suite("interpolated-q", "interp-q", "L^q interpolation between the L1 and L2 gaussian variance bounds, q in [1, 2]", 50)
_corpus_suite("sphere-l1-talagrand", "theorem8", "L1 variance bound on S^(n-1) with constant C/sqrt(n)", 20)
_corpus_suite("brascamp-lieb-l1", "prop9", "L1 variance bound along a decomposition of the identity", 20)
_corpus_suite("section-boundary", "section-boundary", "averaged hyperplane-section boundary measure against the set measure", 60)
_corpus_suite("exp-power-influence", "exp-power", "influence lower bound with exponent beta/2 for exp(-|x|^alpha) products", 0)
_corpus_suite("orlicz-comparison", "c-phi", "interpolation integral against the squared Orlicz norm", 0)


def list_suites() -> list[tuple[str, str]]:
    return [(s.id, s.description) for s in SUITES.values()]
