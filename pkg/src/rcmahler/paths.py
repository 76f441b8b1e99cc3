"""Tracing the curve section over |x| = 1 and pulling paths back to the t-plane.

trace_sections follows the deg_y root branches of P(e^{i phi}, y) around the
circle with collision-aware continuation; extract_S cuts out the oriented
arcs with |y| >= 1 whose endpoints are toric points; pullback transports an
arc to the t-plane through a parametrization; winding accumulates the exact
polyline winding angle, switching to the 1/t chart near infinity.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .polyio import BiPoly, leading_coeff_y
from . import roots as _roots
from .measure import critical_angles, _BranchModuli

__all__ = [
    "TraceError",
    "PullbackError",
    "BranchSheet",
    "TraceResult",
    "Arc",
    "PathSegment",
    "trace_sections",
    "extract_S",
    "toric_scan",
    "pullback",
    "winding",
]

TWO_PI = 2.0 * math.pi
HUGE_T = 1e3  # switch to the 1/t chart beyond this
T_INF = 1e12  # treat |t| beyond this as the point at infinity


class TraceError(RuntimeError):
    """Branch matching stayed ambiguous after maximal refinement."""


class PullbackError(RuntimeError):
    """No parametrization preimage matched an arc node."""


def _chord(a: complex, b: complex) -> float:
    """Chordal (Riemann sphere) distance, safe for huge values."""
    aa, bb = abs(a), abs(b)
    if aa > 1e150 or bb > 1e150:
        ra = 0.0 if aa > 1e150 else 1.0 / a.conjugate() if a != 0 else complex(math.inf, 0)
        rb = 0.0 if bb > 1e150 else 1.0 / b.conjugate() if b != 0 else complex(math.inf, 0)
        if isinstance(ra, complex) and abs(ra) > 1e150:
            return 1.0
        if isinstance(rb, complex) and abs(rb) > 1e150:
            return 1.0
        return _chord(ra, rb)
    return abs(a - b) / math.sqrt((1.0 + aa * aa) * (1.0 + bb * bb))


@dataclass
class BranchSheet:
    phis: np.ndarray
    values: np.ndarray
    branch_points: tuple = ()


@dataclass
class TraceResult:
    sheets: list
    end_perm: tuple
    loops: tuple  # cycles of sheet indices under the end permutation
    p: BiPoly


@dataclass
class Arc:
    phis: list  # increasing, may exceed 2 pi on multi-sheet loops
    ys: list
    closed: bool
    start_point: object = None  # ToricPoint
    end_point: object = None
    p: BiPoly = None  # the curve the arc lives on (for resampling)


@dataclass
class PathSegment:
    phis: list
    ts: list
    u: complex
    v: complex
    closed: bool
    toric_start: object = None
    toric_end: object = None
    resolver: object = None  # callable (phi, t_hint) -> t


# ---------------------------------------------------------------------------
# tracing
# ---------------------------------------------------------------------------


def _all_roots_at(bm: _BranchModuli, phi: float) -> np.ndarray:
    """All deg_y roots of P(e^{i phi}, y); huge values stand in for infinity."""
    c = bm.coeffs_at(phi)
    scale = max(abs(v) for v in c)
    c = [v / scale for v in c]
    d = len(c) - 1
    k_low = 0
    while k_low < d and abs(c[k_low]) <= 1e-280:
        k_low += 1
    k_high = d
    while k_high > k_low and abs(c[k_high]) <= 1e-280:
        k_high -= 1
    vals = [0.0 + 0.0j] * k_low
    if k_high - k_low >= 1:
        vals.extend(bm.body_roots(phi, c, k_low, k_high))
    vals.extend([complex(1e160, 0.0)] * (d - k_high))
    return np.array(sorted(vals, key=lambda v: (round(v.real, 12), round(v.imag, 12))))


def _assign(prev: np.ndarray, cur: np.ndarray):
    """Min-cost matching of root lists in the chordal metric."""
    d = len(prev)
    cost = np.array([[_chord(prev[i], cur[j]) for j in range(d)] for i in range(d)])
    if d <= 7:
        import itertools

        best, best_perm = math.inf, None
        for perm in itertools.permutations(range(d)):
            c = sum(cost[i][perm[i]] for i in range(d))
            if c < best:
                best, best_perm = c, perm
        return list(best_perm)
    # greedy fallback for high degree
    perm = [-1] * d
    used = set()
    for i in np.argsort([min(row) for row in cost]):
        j = min((j for j in range(d) if j not in used), key=lambda j: cost[i][j])
        perm[i] = j
        used.add(j)
    return perm


def _match_ok(prev, cur, perm) -> bool:
    for i in range(len(prev)):
        move = _chord(prev[i], cur[perm[i]])
        if move <= 1e-11:
            continue
        sep = min(
            _chord(prev[i], cur[j]) for j in range(len(cur)) if j != perm[i]
        ) if len(cur) > 1 else math.inf
        if 3.0 * move > sep:
            return False
    return True


def _has_tight_cluster(vals, tol: float = 1e-5) -> bool:
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            if _chord(vals[i], vals[j]) < tol:
                return True
    return False


def trace_sections(p: BiPoly, grid: int = 2048, max_refine: int = 12) -> TraceResult:
    """Continuation-matched root sheets of the section over |x| = 1."""
    if p.deg_y < 1:
        raise ValueError("polynomial must have positive degree in y")
    bm = _BranchModuli(p)
    d = p.deg_y
    crit = critical_angles(p, grid=min(grid, 1024))
    base = TWO_PI / grid
    nodes = set(np.arange(grid) * base) | set(crit)
    # geometric approach nodes around each collision angle: near an m-fold
    # collision the admissible step shrinks proportionally to the distance,
    # so dyadic refinement alone cannot reach it within bounded depth
    for c in crit:
        for k in range(1, 28):
            for sgn in (-1.0, 1.0):
                v = c + sgn * base * 0.5**k
                if 0.0 <= v <= TWO_PI:
                    nodes.add(v)
    nodes = sorted(nodes)
    nodes.append(TWO_PI)

    phis = [nodes[0]]
    layers = [_all_roots_at(bm, nodes[0])]
    branch_marks = []

    def crit_adjacent(a: float, b: float) -> bool:
        # a collision point exerts matching ambiguity over a zone comparable
        # to the interval length; accept cluster passes there
        tol = max(1e-9, 4.0 * (b - a))
        for c in crit:
            for cc in (c, c + TWO_PI):
                if abs(a - cc) < tol or abs(b - cc) < tol:
                    return True
        return False

    for k in range(1, len(nodes)):
        # march from phis[-1] to nodes[k] with adaptive insertion
        stack = [(nodes[k], 0)]
        while stack:
            target, depth = stack.pop()
            a = phis[-1]
            prev = layers[-1]
            cur = _all_roots_at(bm, target)
            perm = _assign(prev, cur)
            if _match_ok(prev, cur, perm):
                phis.append(target)
                layers.append(cur[perm])
                continue
            if depth < max_refine:
                stack.append((target, depth + 1))
                stack.append((0.5 * (a + target), depth + 1))
                continue
            # bottomed out: allow collision pass at a critical angle or for a
            # genuinely tight cluster; otherwise give up
            if crit_adjacent(a, target) or _has_tight_cluster(cur, 1e-4) or _has_tight_cluster(prev, 1e-4):
                phis.append(target)
                layers.append(cur[perm])
                branch_marks.append(target)
            else:
                raise TraceError(
                    f"ambiguous branch matching near phi = {0.5 * (a + target):.12f}"
                )

    values = np.array(layers)  # (n_nodes, d)
    sheets = [
        BranchSheet(phis=np.array(phis), values=values[:, j], branch_points=tuple(branch_marks))
        for j in range(d)
    ]
    # end permutation: sheet j at 2 pi continues as sheet end_perm[j] at 0
    start = values[0]
    finish = values[-1]
    perm = _assign(finish, start)
    # build loops as cycles
    loops = []
    seen = set()
    for j in range(d):
        if j in seen:
            continue
        cyc = [j]
        seen.add(j)
        nxt = perm[j]
        while nxt not in seen:
            cyc.append(nxt)
            seen.add(nxt)
            nxt = perm[nxt]
        loops.append(tuple(cyc))
    return TraceResult(sheets=sheets, end_perm=tuple(perm), loops=tuple(loops), p=p)


# ---------------------------------------------------------------------------
# arc extraction
# ---------------------------------------------------------------------------


class _LoopChain:
    """One closed loop of the section, phi running over [0, 2 pi * L)."""

    def __init__(self, trace: TraceResult, cycle):
        self.bm = _BranchModuli(trace.p)
        phis = []
        ys = []
        base = trace.sheets[cycle[0]].phis
        for i, j in enumerate(cycle):
            sheet = trace.sheets[j]
            offset = TWO_PI * i
            phis.extend((sheet.phis[:-1] + offset).tolist())
            ys.extend(sheet.values[:-1].tolist())
        phis.append(TWO_PI * len(cycle))
        ys.append(trace.sheets[cycle[0]].values[0])
        self.phis = phis
        self.ys = ys

    def y_at(self, phi: float, y_hint: complex) -> complex:
        vals = _all_roots_at(self.bm, phi % TWO_PI)
        return min(vals, key=lambda v: _chord(v, y_hint))


def toric_scan(p: BiPoly, grid: int = 4096):
    """Numeric toric candidates from the sorted-modulus crossing scan.

    Independent of the resultant elimination; used as its cross-check and as
    the fallback for reciprocal polynomials.
    """
    if p.deg_y < 1:
        raise ValueError("polynomial must have positive degree in y")
    bm = _BranchModuli(p)
    phis = np.arange(grid) * (TWO_PI / grid)
    tbl = []
    for ph in phis:
        m = bm.moduli_list(ph)
        tbl.append([v if math.isfinite(v) else 1e300 for v in m])
    tbl = np.array(tbl)
    d = tbl.shape[1]
    near_zero = np.abs(tbl - 1.0).min(axis=1) < 1e-9
    if near_zero.mean() > 0.4:
        from .curve import ToricContinuumError

        raise ToricContinuumError("the section hugs the torus on a large phi set")

    events = []
    for j in range(d):
        g = tbl[:, j] - 1.0
        for i in range(grid):
            a, b = g[i], g[(i + 1) % grid]
            pa = phis[i]
            pb = pa + TWO_PI / grid
            if abs(a) < 1e-10:
                events.append(pa)
            elif a * b < 0:
                lo, hi, glo = pa, pb, a
                for _ in range(60):
                    mid = 0.5 * (lo + hi)
                    gm = bm.moduli_list(mid % TWO_PI)[j] - 1.0
                    if gm == 0.0:
                        lo = hi = mid
                        break
                    if (gm > 0) == (glo > 0):
                        lo = mid
                    else:
                        hi = mid
                events.append(0.5 * (lo + hi))
        # grazing minima of |g|
        absg = np.abs(g)
        for i in range(grid):
            prev_v, cur, nxt = absg[i - 1], absg[i], absg[(i + 1) % grid]
            if cur < prev_v and cur < nxt and cur < 1e-4:
                lo, hi = phis[i] - TWO_PI / grid, phis[i] + TWO_PI / grid
                for _ in range(80):
                    m1 = lo + (hi - lo) * 0.382
                    m2 = lo + (hi - lo) * 0.618
                    f1 = abs(bm.moduli_list(m1 % TWO_PI)[j] - 1.0)
                    f2 = abs(bm.moduli_list(m2 % TWO_PI)[j] - 1.0)
                    if f1 < f2:
                        hi = m2
                    else:
                        lo = m1
                mid = 0.5 * (lo + hi)
                if abs(bm.moduli_list(mid % TWO_PI)[j] - 1.0) < 1e-8:
                    events.append(mid)

    points = []
    for ph in events:
        ph = ph % TWO_PI
        x0 = cmath.exp(1j * ph)
        for nu, _mult in _curve_y_roots(p, x0):
            if abs(abs(nu) - 1.0) < 1e-7:
                if not any(
                    abs(x0 - mu0) < 1e-7 and abs(nu - nu0) < 1e-7 for mu0, nu0 in points
                ):
                    points.append((x0, nu))
    points.sort(key=lambda mn: (round(cmath.phase(mn[0]), 9), round(cmath.phase(mn[1]), 9)))
    return points


def _curve_y_roots(p: BiPoly, x0: complex):
    from .curve import _y_roots_clustered

    return _y_roots_clustered(p, x0)


def extract_S(trace: TraceResult, toric: list):
    """Arcs of the section with |y| >= 1, endpoints matched to toric points."""
    arcs = []
    for cycle in trace.loops:
        chain = _LoopChain(trace, cycle)
        phis, ys = chain.phis, chain.ys
        n = len(phis)
        h = [abs(y) - 1.0 for y in ys]
        if sum(1 for v in h if abs(v) < 1e-9) > 0.4 * n:
            from .curve import ToricContinuumError

            raise ToricContinuumError("the section hugs the torus on a large phi set")

        events = []  # (phi, y) crossing/grazing events along the chain
        for i in range(n - 1):
            if abs(h[i]) < 1e-10:
                events.append((phis[i], ys[i]))
                continue
            if h[i] * h[i + 1] < 0:
                lo, hi = phis[i], phis[i + 1]
                ylo = ys[i]
                glo = h[i]
                for _ in range(60):
                    mid = 0.5 * (lo + hi)
                    ym = chain.y_at(mid, ylo)
                    gm = abs(ym) - 1.0
                    if gm == 0.0:
                        lo = hi = mid
                        ylo = ym
                        break
                    if (gm > 0) == (glo > 0):
                        lo, ylo, glo = mid, ym, gm
                    else:
                        hi = mid
                ph = 0.5 * (lo + hi)
                events.append((ph, chain.y_at(ph, ylo)))
            elif 0 < i < n - 1 and abs(h[i]) < 1e-4 and h[i - 1] > h[i] < h[i + 1] and h[i] > 0:
                # grazing local minimum above the circle: degenerate crossing
                lo, hi = phis[i - 1], phis[i + 1]
                yh = ys[i]
                for _ in range(80):
                    m1 = lo + (hi - lo) * 0.382
                    m2 = lo + (hi - lo) * 0.618
                    f1 = abs(chain.y_at(m1, yh)) - 1.0
                    f2 = abs(chain.y_at(m2, yh)) - 1.0
                    if f1 < f2:
                        hi = m2
                    else:
                        lo = m1
                mid = 0.5 * (lo + hi)
                ym = chain.y_at(mid, yh)
                if abs(ym) - 1.0 < 1e-8:
                    events.append((mid, ym))

        if not events:
            if h[0] > 0:
                arcs.append(Arc(phis=list(phis), ys=list(ys), closed=True, p=trace.p))
            continue

        events.sort(key=lambda e: e[0])
        merged = []
        for ph, y in events:
            if merged and ph - merged[-1][0] < 1e-9:
                continue
            merged.append((ph, y))
        events = merged
        for k in range(len(events)):
            ph_a, y_a = events[k]
            ph_b, y_b = events[(k + 1) % len(events)]
            if k == len(events) - 1:
                ph_b += phis[-1] - phis[0]
            seg_phis = [ph_a]
            seg_ys = [y_a]
            total_span = phis[-1] - phis[0]
            for ph, y in zip(phis, ys):
                for shift in (0.0, total_span):
                    q = ph + shift
                    if ph_a + 1e-12 < q < ph_b - 1e-12:
                        seg_phis.append(q)
                        seg_ys.append(y)
            order = np.argsort(seg_phis)
            seg_phis = [seg_phis[i] for i in order]
            seg_ys = [seg_ys[i] for i in order]
            seg_phis.append(ph_b)
            seg_ys.append(y_b)
            interior = seg_ys[1:-1] or seg_ys
            if max(abs(y) - 1.0 for y in interior) <= 1e-9:
                continue  # this stretch is inside the disk (or grazes it)
            start_pt = _match_toric(toric, seg_phis[0], seg_ys[0])
            end_pt = _match_toric(toric, seg_phis[-1], seg_ys[-1])
            arcs.append(
                Arc(
                    phis=seg_phis,
                    ys=seg_ys,
                    closed=False,
                    start_point=start_pt,
                    end_point=end_pt,
                    p=trace.p,
                )
            )
    return arcs


def _match_toric(toric, phi: float, y: complex):
    x = cmath.exp(1j * phi)
    best, best_d = None, math.inf
    for pt in toric:
        dist = abs(x - pt.mu) + abs(y - pt.nu)
        if dist < best_d:
            best, best_d = pt, dist
    if best is None or best_d > 1e-7:
        raise TraceError(
            f"arc endpoint (phi={phi:.9f}, y={y:.9g}) matches no toric point "
            f"(nearest at distance {best_d:.2e})"
        )
    return best


# ---------------------------------------------------------------------------
# pullback to the t-plane
# ---------------------------------------------------------------------------


def _t_candidates(f, x: complex):
    """Solutions of f(t) = x, including the point at infinity when degrees drop."""
    from .dilog import INFINITY

    num = f.numerator_coeffs()
    den = f.denominator_coeffs()
    n = max(len(num), len(den))
    a = np.zeros(n, dtype=complex)
    a[: len(num)] = num
    a[: len(den)] -= x * den
    scale = np.max(np.abs(a))
    if scale == 0:
        return []
    a = a / scale
    k_high = len(a) - 1
    while k_high > 0 and abs(a[k_high]) < 1e-11:
        k_high -= 1
    out = []
    if k_high < n - 1:
        out.append(INFINITY)
    if k_high >= 1:
        out.extend(_roots._solve_all(a[: k_high + 1], 1e-13).tolist())
    return out


def pullback(arc: Arc, f, g) -> PathSegment:
    """Transport an (x, y) arc to the t-plane through (f, g)."""
    from .dilog import INFINITY, is_infinite

    n = len(arc.phis)

    def g_value(t):
        return g(t)

    def candidates(phi, y):
        x = cmath.exp(1j * (phi % TWO_PI))
        cands = _t_candidates(f, x)
        good = []
        for t in cands:
            gv = g_value(t)
            if _chord(gv, y) < 1e-6:
                good.append(t)
        return good, cands

    # resolve the middle sample first (generically unambiguous), then sweep
    mid = n // 2
    good, cands = candidates(arc.phis[mid], arc.ys[mid])
    if not good:
        raise PullbackError(
            f"no preimage at phi={arc.phis[mid]:.9f}: candidates {cands}"
        )
    good.sort(key=lambda t: (abs(t) if not is_infinite(t) else math.inf,
                             round(getattr(t, 'real', 0.0), 9)))
    ts = [None] * n
    ts[mid] = good[0]

    def resolve(phi, y, t_hint):
        good, cands = candidates(phi, y)
        if not good:
            raise PullbackError(f"no preimage at phi={phi:.9f} (y={y:.6g})")
        return min(good, key=lambda t: _chord(t if not is_infinite(t) else complex(1e160), t_hint if not is_infinite(t_hint) else complex(1e160)))

    for i in range(mid + 1, n):
        ts[i] = resolve(arc.phis[i], arc.ys[i], ts[i - 1])
    for i in range(mid - 1, -1, -1):
        ts[i] = resolve(arc.phis[i], arc.ys[i], ts[i + 1])

    if arc.closed:
        u = v = ts[0]
        toric_start = toric_end = None
    else:
        u = _endpoint_t(f, g, arc.start_point, ts[1 if n > 1 else 0])
        v = _endpoint_t(f, g, arc.end_point, ts[-2 if n > 1 else -1])
        ts[0] = u
        ts[-1] = v
        toric_start = arc.start_point
        toric_end = arc.end_point

    chain = _LoopChainLite(arc)

    def resolver(phi, t_hint):
        y = chain.y_at(phi)
        return resolve(phi, y, t_hint)

    return PathSegment(
        phis=list(arc.phis),
        ts=ts,
        u=u,
        v=v,
        closed=arc.closed,
        toric_start=toric_start,
        toric_end=toric_end,
        resolver=resolver,
    )


class _LoopChainLite:
    """Branch tracker along a fixed arc, for resampling at new angles."""

    def __init__(self, arc: Arc):
        self.arc = arc
        self.bm = _BranchModuli(arc.p) if arc.p is not None else None

    def y_at(self, phi: float) -> complex:
        phis, ys = self.arc.phis, self.arc.ys
        i = int(np.searchsorted(phis, phi))
        i = max(1, min(i, len(phis) - 1))
        w = (phi - phis[i - 1]) / (phis[i] - phis[i - 1]) if phis[i] > phis[i - 1] else 0.0
        y_hint = ys[i - 1] * (1 - w) + ys[i] * w
        if self.bm is None:
            return y_hint
        vals = _all_roots_at(self.bm, phi % TWO_PI)
        return min(vals, key=lambda v: _chord(v, y_hint))


def _endpoint_t(f, g, pt, t_neighbor):
    from .dilog import INFINITY, is_infinite

    cands = _t_candidates(f, pt.mu)
    good = [t for t in cands if _chord(g(t), pt.nu) < 1e-6]
    if not good:
        raise PullbackError(f"no preimage of toric point ({pt.mu:.6g}, {pt.nu:.6g})")
    ref = t_neighbor if not is_infinite(t_neighbor) else complex(1e160)
    return min(
        good,
        key=lambda t: _chord(t if not is_infinite(t) else complex(1e160), ref),
    )


# ---------------------------------------------------------------------------
# winding angles
# ---------------------------------------------------------------------------


def _ratio_phase(ta: complex, tb: complex, a: complex) -> float:
    """Principal phase of (tb - a)/(ta - a), overflow-safe for huge t."""
    if abs(ta) > HUGE_T or abs(tb) > HUGE_T:
        # (tb-a)/(ta-a) = ((1 - a sb) sa) / ((1 - a sa) sb), s = 1/t
        sa, sb = 1.0 / ta, 1.0 / tb
        num = (1.0 - a * sb) * sa
        den = (1.0 - a * sa) * sb
        if num == 0 or den == 0:
            return 0.0
        return cmath.phase(num / den)
    num = tb - a
    den = ta - a
    if num == 0 or den == 0:
        return 0.0
    return cmath.phase(num / den)


def winding(seg: PathSegment, a: complex, max_depth: int = 48) -> float:
    """Accumulated argument of (t - a) along the oriented path.

    Pure polyline winding with adaptive resampling: each chord increment is
    exact, and subdivision guarantees the chord never captures the point, so
    the result is exact up to roundoff for smooth paths.  Beyond |t| = 1e3
    the 1/t chart is used; infinite endpoints contribute through their
    limiting directions, resolved by geometric refinement.
    """
    from .dilog import is_infinite

    a = complex(a)
    pairs = list(zip(seg.phis, seg.ts))
    total = 0.0

    def tail_from_infinity(p_inf: float, p_fin: float, t_fin: complex) -> float:
        """Winding over a stretch whose p_inf end is the point at infinity."""
        # walk phi geometrically toward the infinite end; each step increment
        # is principal; the unresolved piece vanishes like |1/t|
        inc = 0.0
        t_prev = t_fin
        span = p_fin - p_inf
        for k in range(1, 44):
            phi_k = p_inf + span * (0.5**k)
            if seg.resolver is None:
                break
            try:
                t_k = seg.resolver(phi_k, t_prev)
            except PullbackError:
                break
            if is_infinite(t_k):
                break
            inc += _ratio_phase(t_k, t_prev, a)
            t_prev = t_k
            if abs(t_prev) > 1e14:
                break
        return inc

    def finite_inc(pa, ta, pb, tb, depth) -> float:
        inf_a = is_infinite(ta) or abs(ta) > T_INF
        inf_b = is_infinite(tb) or abs(tb) > T_INF
        if inf_a and inf_b:
            return 0.0
        if inf_a:
            return tail_from_infinity(pa, pb, tb)
        if inf_b:
            return -tail_from_infinity(pb, pa, ta)
        inc = _ratio_phase(ta, tb, a)
        if abs(ta) > HUGE_T and abs(tb) > HUGE_T:
            return inc  # far zone: increment is tiny and exact
        da = abs(ta - a)
        db = abs(tb - a)
        if abs(inc) < 0.35 and abs(tb - ta) <= 0.7 * max(min(da, db), 1e-300):
            return inc
        if depth <= 0 or seg.resolver is None:
            return inc
        pm = 0.5 * (pa + pb)
        try:
            tm = seg.resolver(pm, 0.5 * (ta + tb))
        except PullbackError:
            return inc
        return finite_inc(pa, ta, pm, tm, depth - 1) + finite_inc(pm, tm, pb, tb, depth - 1)

    for i in range(len(pairs) - 1):
        (pa, ta), (pb, tb) = pairs[i], pairs[i + 1]
        total += finite_inc(pa, ta, pb, tb, max_depth)

    if seg.closed:
        k = round(total / TWO_PI)
        if abs(total - TWO_PI * k) < 1e-6:
            return TWO_PI * k
    return total
