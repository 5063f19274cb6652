"""Empirically calibrated constants.

Each constant has a seeded corpus of test cases.  Evaluating every case
with the constant set to 1 gives the smallest constant that case needs;
the frozen value is the corpus supremum times ``MARGIN``, rounded up to
three significant digits.  Frozen values and their seeds live in
``data/calibration.json`` and are reproduced by :func:`calibrate`.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from importlib import resources
from typing import Callable, Iterator

import numpy as np

from .report import InequalityReport

MARGIN = 1.25
DATA_FILE = "calibration.json"

Case = tuple[str, Callable[[float], InequalityReport]]


def round_up(x: float, digits: int = 3) -> float:
    if x <= 0:
        return 0.0
    e = math.floor(math.log10(x)) - digits + 1
    return float(f"{math.ceil(x / 10.0 ** e - 1e-9) * 10.0 ** e:.{digits}g}")


@dataclass(frozen=True)
class CalibrationResult:
    id: str
    corpus_seed: int
    corpus_size: int
    sup_ratio: float
    worst_case: str
    value: float
    margin: float = MARGIN

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


# ---------------------------------------------------------------------------
# corpora


def _orlicz_cases(seed: int) -> Iterator[Case]:
    from .talagrand import interpolation_integral
    from .cube import orlicz_norm_values

    rng = _rng(seed)
    for k in range(300):
        n = int(rng.integers(2, 33))
        mu = rng.dirichlet(np.full(n, rng.choice([0.2, 1.0, 5.0])))
        kind = k % 4
        if kind == 0:
            g = rng.random(n)
        elif kind == 1:
            g = np.zeros(n)
            g[rng.integers(n)] = 1.0
        elif kind == 2:
            g = np.where(rng.random(n) < 0.5, 1.0, rng.random() * 1e-2)
        else:
            g = rng.lognormal(0.0, 2.0, n)
        g = g * 10.0 ** rng.uniform(-3, 3)

        def case(C, g=g, mu=mu):
            return InequalityReport("orlicz-comparison", f"n={g.size}", interpolation_integral(g, mu), C * orlicz_norm_values(g, mu) ** 2, C)

        yield f"orlicz#{k}", case


def _unit(rng, n):
    u = rng.normal(size=n)
    return u / np.linalg.norm(u)


def bounded_gaussian_functions(rng, count: int, max_dim: int = 3):
    """Bounded test functions with a quadrature grid fine enough for each."""
    from .gauss import measures as m

    out = []
    for k in range(count):
        N = int(rng.integers(1, max_dim + 1))
        mu = m.ProductMeasure.standard_gaussian(N)
        kind = k % 5
        if kind == 0:
            axis = int(rng.integers(N))
            eps = float(rng.choice([0.3, 0.1, 0.03]))
            t = float(rng.uniform(-2.5, 2.5))
            u = np.eye(N)[axis]
            f = m.mollified_halfspace(u, t, eps)
            fine = m.gaussian_panel_rule(-8.5, 8.5, 1700, 4)
            grid = mu.grid(8, {axis: fine})
        elif kind == 1:
            u = _unit(rng, N) * rng.uniform(0.3, 3.0)
            f = m.tanh_ridge(u, float(rng.normal()))
            grid = mu.panel_grid(64 if N == 3 else 240)
        elif kind == 2 and N >= 2:
            u = _unit(rng, N)
            f = m.mollified_halfspace(u, float(rng.uniform(-2, 2)), 0.3)
            grid = mu.panel_grid(64 if N == 3 else 240)
        elif kind == 3:
            a = rng.uniform(0.2, 2.0, N)
            b = rng.uniform(0, 2 * math.pi)
            f = m.SmoothFunction(
                lambda X, a=a, b=b: np.sin(X @ a + b),
                lambda X, a=a, b=b: np.cos(X @ a + b)[:, None] * a[None, :],
                None,
                True,
                "sine-ridge",
            )
            grid = mu.panel_grid(64 if N == 3 else 240)
        else:
            if N == 1:
                N = 2
                mu = m.ProductMeasure.standard_gaussian(2)
            a = rng.uniform(0.3, 3.0, 2)
            t = m.tanh_ridge([a[0]], float(rng.normal()))
            s = m.tanh_ridge([a[1]], float(rng.normal()))
            f = m.product_function([t, s], [0, 1])
            grid = mu.panel_grid(64 if N == 3 else 240)
        out.append((f, mu, grid))
    return out


def _theorem6_cases(seed: int) -> Iterator[Case]:
    from .gauss.inequalities import theorem6_report

    for k, (f, mu, grid) in enumerate(bounded_gaussian_functions(_rng(seed), 150)):
        yield f"{f.name}#{k}", (lambda C, f=f, mu=mu, grid=grid: theorem6_report(f, mu, c0=C, backend=grid))


Q_GRID = (1.0, 1.25, 1.5, 1.75, 2.0)


def _interp_q_cases(seed: int) -> Iterator[Case]:
    from .gauss.inequalities import interpolated_q_report

    for k, (f, mu, grid) in enumerate(bounded_gaussian_functions(_rng(seed), 60)):
        for q in Q_GRID:
            yield f"{f.name}#{k} q={q}", (lambda C, f=f, mu=mu, grid=grid, q=q: interpolated_q_report(f, mu, q, C, grid))


def sphere_bounded_functions(rng, count: int):
    from .gauss import measures as m

    out = []
    for k in range(count):
        n = int(rng.integers(3, 6))
        kind = k % 3
        if kind == 0:
            f = m.tanh_ridge(_unit(rng, n) * rng.uniform(1.0, 10.0), 0.0)
        elif kind == 1:
            f = m.mollified_halfspace(_unit(rng, n), float(rng.uniform(-0.9, 0.9)), float(rng.choice([0.3, 0.1, 0.03])))
            f = m.SmoothFunction(f.value, f.grad, None, True, "cap")
        else:
            a = rng.uniform(0.5, 5.0, 2)
            f = m.product_function([m.tanh_ridge([a[0]]), m.tanh_ridge([a[1]])], [0, 1])
            f = _pad(f, n)
        out.append((f, n))
    return out


def _pad(f, n: int):
    """Extend a function of the first coordinates to ``R^n``."""
    from .gauss.measures import SmoothFunction

    def grad(X):
        G = np.zeros_like(X)
        g = f.grad(X[:, :2])
        G[:, :2] = g
        return G

    return SmoothFunction(lambda X: f.value(X[:, :2]), grad, None, f.bounded, f.name)


SPHERE_CALIBRATION_SAMPLES = 40000


def _theorem8_cases(seed: int) -> Iterator[Case]:
    from .geom import SphereModel, theorem8_report

    rng = _rng(seed)
    for k, (f, n) in enumerate(sphere_bounded_functions(rng, 90)):
        model = SphereModel(n, SPHERE_CALIBRATION_SAMPLES, seed + k)
        yield f"{f.name}#{k} n={n}", (lambda C, f=f, model=model: theorem8_report(f, model, C))


def _prop9_cases(seed: int) -> Iterator[Case]:
    from .gauss import measures as m
    from .geom import coordinate_decomposition, loomis_whitney, proposition9_report, random_frame

    rng = _rng(seed)
    for k in range(90):
        n = int(rng.integers(2, 4))
        decomp = (coordinate_decomposition(n), loomis_whitney(n), random_frame(n, rng))[k % 3]
        mu = m.ProductMeasure.standard_gaussian(n)
        grid = mu.panel_grid(64 if n == 3 else 240)
        kind = (k // 3) % 3
        if kind == 0:
            f = m.tanh_ridge(_unit(rng, n) * rng.uniform(0.3, 3.0), float(rng.normal()))
        elif kind == 1:
            f = m.mollified_halfspace(_unit(rng, n), float(rng.uniform(-2, 2)), 0.3)
        else:
            a = rng.uniform(0.5, 3.0, 2)
            f = m.product_function([m.tanh_ridge([a[0]]), m.tanh_ridge([a[1]])], [0, 1])
            f = _pad(f, n) if n > 2 else f
        yield f"{f.name}#{k} n={n}", (lambda C, f=f, d=decomp, g=grid: proposition9_report(f, d, g, C))


def _section_cases(seed: int) -> Iterator[Case]:
    from .gauss.sets import Box, HalfSpace
    from .geom import section_boundary_check

    rng = _rng(seed)
    for k in range(120):
        n = int(rng.integers(2, 5))
        if k % 2 == 0:
            A = HalfSpace(_unit(rng, n), float(rng.uniform(-3.5, 3.5)))
        else:
            lo = rng.uniform(-3, 1, n)
            hi = lo + rng.uniform(0.05, 4, n)
            lo[rng.random(n) < 0.3] = -np.inf
            A = Box(lo, hi)
        yield f"{type(A).__name__}#{k} n={n}", (lambda C, A=A: section_boundary_check(A, C=C))


def _exp_power_cases(seed: int) -> Iterator[Case]:
    from .gauss import measures as m
    from .gauss.influence import exp_power_influence_report
    from .gauss.sets import Box, HalfSpace

    rng = _rng(seed)
    for alpha in (1.25, 1.5, 1.75):
        for N in (1, 2, 4, 8):
            mu = m.ProductMeasure(tuple(m.exp_power(alpha) for _ in range(N)))
            fac = mu.factors[0]
            for _ in range(6):
                t = float(rng.uniform(-4, 4))
                A = HalfSpace.along_axis(int(rng.integers(N)), t, N)
                yield f"halfspace alpha={alpha} N={N}", (lambda C, A=A, mu=mu: exp_power_influence_report(A, mu, C))
            for a in (1e-3, 0.05, 0.3, 0.5, 0.8):
                side = float(fac.ppf(a ** (1.0 / N)))
                A = Box(np.full(N, -np.inf), np.full(N, side))
                yield f"box alpha={alpha} N={N} a={a}", (lambda C, A=A, mu=mu: exp_power_influence_report(A, mu, C))


CORPORA: dict[str, Callable[[int], Iterator[Case]]] = {
    "c-phi": _orlicz_cases,
    "theorem6": _theorem6_cases,
    "interp-q": _interp_q_cases,
    "theorem8": _theorem8_cases,
    "prop9": _prop9_cases,
    "section-boundary": _section_cases,
    "exp-power": _exp_power_cases,
}

# seeds of the frozen corpora
CORPUS_SEEDS = {
    "c-phi": 101,
    "theorem6": 202,
    "interp-q": 303,
    "theorem8": 404,
    "prop9": 505,
    "section-boundary": 606,
    "exp-power": 707,
}

DESCRIPTIONS = {
    "c-phi": "interpolation integral against the squared Orlicz norm",
    "theorem6": "scalar c0 in the L1 gaussian variance bound",
    "interp-q": "constant of the L^q interpolated variance bound, q in [1, 2]",
    "theorem8": "constant C in the L1 sphere variance bound (C / sqrt n)",
    "prop9": "constant in the L1 bound along a decomposition of the identity",
    "section-boundary": "constant in the averaged hyperplane-section boundary bound",
    "exp-power": "constant in the exp-power influence lower bound",
}


def corpus(constant_id: str, seed: int) -> list[Case]:
    try:
        make = CORPORA[constant_id]
    except KeyError:
        raise KeyError(f"unknown constant {constant_id!r}; known: {', '.join(CORPORA)}") from None
    return list(make(seed))


def needed_constant(report: InequalityReport) -> float:
    """Constant at which ``report`` (evaluated with constant 1) would be tight."""
    if report.rhs <= 0:
        return 0.0 if report.lhs <= 1e-14 else math.inf
    return max(report.lhs, 0.0) / report.rhs


def calibrate(constant_id: str, seed: int) -> CalibrationResult:
    cases = corpus(constant_id, seed)
    worst, label = 0.0, ""
    for name, run in cases:
        r = needed_constant(run(1.0))
        if r > worst:
            worst, label = r, name
    return CalibrationResult(constant_id, seed, len(cases), float(worst), label, round_up(worst * MARGIN))


def check_corpus(constant_id: str, seed: int, value: float | None = None) -> list[InequalityReport]:
    """Reports for every case of a corpus at the frozen (or given) constant."""
    C = frozen_constant(constant_id) if value is None else value
    return [run(C) for _, run in corpus(constant_id, seed)]


def _load() -> dict:
    try:
        text = resources.files("talagrand_lab").joinpath("data", DATA_FILE).read_text()
    except FileNotFoundError:
        return {}
    return json.loads(text)


_FROZEN: dict | None = None


def frozen_table() -> dict:
    global _FROZEN
    if _FROZEN is None:
        _FROZEN = _load()
    return _FROZEN


def frozen_constant(constant_id: str) -> float:
    table = frozen_table()
    if constant_id not in table:
        raise KeyError(f"no frozen value for {constant_id!r}; run 'talagrand-lab calibrate {constant_id} --corpus-seed <seed> --write'")
    return float(table[constant_id]["value"])


def frozen_seed(constant_id: str) -> int:
    return int(frozen_table()[constant_id]["corpus_seed"])


def write_frozen(result: CalibrationResult) -> None:
    """Store ``result`` in the package data file (source checkouts only)."""
    global _FROZEN
    path = resources.files("talagrand_lab").joinpath("data", DATA_FILE)
    table = _load()
    table[result.id] = asdict(result)
    with open(str(path), "w") as fh:
        json.dump(table, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _FROZEN = None
