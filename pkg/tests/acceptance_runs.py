"""One runner per acceptance criterion.

Each returns ``(passed, report)``; ``report`` is JSON-ready, free of
timings, and must come out byte-identical when the runner is repeated.
"""

import time

import numpy as np

from generators import random_corrected, random_symbol, root_count_winding, small_perturbation
from kskeleton.factorize import dilation_skeleton, skeleton_factor, verify_factorization
from kskeleton.index import analytic_index, family_index, index_of_factorization, numeric_index
from kskeleton.operators import (
    Block,
    HardyProjection,
    TruncationWindow,
    compose,
    laurent_op,
    shift_power,
)
from kskeleton.specmap import auto_grid, winding_map
from kskeleton.symbol import LaurentSymbol, invertibility_margin

SEED = 20240601
ALT_SCHEDULE = (96, 192, 384, 768)
ALT_WINDOW = TruncationWindow(96, 40)


def timed(fn, *args):
    t = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t


def criterion_1():
    rows = []
    ok = True
    for n in range(-5, 6):
        value, rep = numeric_index(shift_power(n))
        good = value == -n and rep.stabilized and rep.window_used <= 256
        ok &= good
        rows.append({"n": n, "index": value, "stabilized": rep.stabilized, "window": rep.window_used})
    return ok, {"criterion": 1, "shifts": rows}


def criterion_2(count=50):
    rng = np.random.default_rng(SEED + 2)
    rows = []
    agree = 0
    for _ in range(count):
        f = random_symbol(rng)
        a = analytic_index(f)
        nval, rep = numeric_index(laurent_op(f))
        same = a == nval == -root_count_winding(f)
        agree += same
        rows.append({
            "lo": f.lo,
            "bandwidth": f.bandwidth,
            "margin": invertibility_margin(f),
            "analytic": a,
            "numeric": nval,
        })
    ok = agree == count and all(r["bandwidth"] <= 6 and r["margin"] >= 0.1 for r in rows)
    return ok, {"criterion": 2, "agreement": agree, "total": count, "symbols": rows}


def criterion_3(count=25):
    rng = np.random.default_rng(SEED + 3)
    rows = []
    ok = True
    for _ in range(count):
        x = random_corrected(rng, max_rank=3)
        fact = skeleton_factor(x)
        rep = verify_factorization(fact, x)
        good = rep.residual <= 1e-8 and rep.stable_under_doubling and rep.residual_doubled <= 1e-8
        ok &= good
        rows.append({
            "n": fact.n,
            "correction_rank": int(np.linalg.matrix_rank(x.correction.dense(x.correction.rows, x.correction.cols))),
            "k_rank": rep.k_rank,
            "residual": rep.residual,
            "residual_doubled": rep.residual_doubled,
            "stable_under_doubling": rep.stable_under_doubling,
        })
    ok &= all(r["correction_rank"] <= 3 for r in rows)
    return ok, {"criterion": 3, "cases": rows}


def criterion_4(trials=100):
    rng = np.random.default_rng(SEED + 4)
    violations = 0
    rows = []
    for _ in range(trials):
        x = random_corrected(rng)
        a = skeleton_factor(x)
        b = skeleton_factor(x, w=ALT_WINDOW, schedule=ALT_SCHEDULE)
        ia, ib = index_of_factorization(a), index_of_factorization(b)
        y = small_perturbation(rng, x)
        c = skeleton_factor(y)
        bad = not (a.n == b.n == ia == ib == c.n)
        violations += bad
        rows.append([a.n, b.n, ia, ib, c.n])
    return violations == 0, {"criterion": 4, "trials": trials, "violations": violations, "n": rows}


def criterion_5(pairs=100):
    rng = np.random.default_rng(SEED + 5)
    violations = 0
    rows = []
    for _ in range(pairs):
        x, y = random_corrected(rng), random_corrected(rng)
        nx, ny = numeric_index(x)[0], numeric_index(y)[0]
        nxy = numeric_index(compose(x, y))[0]
        violations += nxy != nx + ny
        rows.append([nx, ny, nxy])
    return violations == 0, {"criterion": 5, "pairs": pairs, "violations": violations, "n": rows}


def criterion_6():
    rows = []
    ok = True
    for m in (1, 2, 3):
        d = dilation_skeleton(Block(shift_power(m), HardyProjection(), "p", "p"))
        r_p, r_q = d.defect_ranks
        ok &= d.index == -m == r_p - r_q
        rows.append({"m": m, "index": d.index, "defect_ranks": list(d.defect_ranks), "unitarity_defect": d.unitarity_defect})
    return ok, {"criterion": 6, "dilations": rows}


def criterion_7(f_name):
    z = LaurentSymbol.monomial(1)
    symbols = {"z": z, "z^3": LaurentSymbol.monomial(3), "z+1/z": z + LaurentSymbol.monomial(-1)}
    expected = {"z": [0, -1], "z^3": [0, -3], "z+1/z": [0]}
    f = symbols[f_name]
    cmap = winding_map(f, auto_grid(f, 201))
    got = [c.n for c in cmap.components]
    ok = got == expected[f_name] and cmap.grid.nx == cmap.grid.ny == 201
    return ok, {"criterion": 7, "symbol": f_name, **cmap.summary()}


def criterion_8(samples=64):
    z = LaurentSymbol.monomial(1)
    lams = np.exp(2j * np.pi * np.arange(samples) / samples)
    loop = [laurent_op(z - 2 - lam / 4) for lam in lams]
    # adjacent samples differ by |dlam| / 4 < 0.025
    moving = family_index(loop, continuity_budget=0.05)
    constant = family_index([shift_power(1)] * samples, continuity_budget=0.0)
    ok = moving == 0 and constant == -1
    return ok, {"criterion": 8, "samples": samples, "moving_loop": moving, "constant_loop": constant}


RUNNERS = {
    1: (criterion_1,),
    2: (criterion_2,),
    3: (criterion_3,),
    4: (criterion_4,),
    5: (criterion_5,),
    6: (criterion_6,),
    "7z": (criterion_7, "z"),
    "7z3": (criterion_7, "z^3"),
    "7zz": (criterion_7, "z+1/z"),
    8: (criterion_8,),
}
