"""Formal-in-time solutions and two-point values of the tau-structure.

A solution is a Taylor series in the flow times with coefficients that are
exact rational functions of x, layered by powers of eps.  The Taylor
coefficient at a time multi-index I is the iterated flow derivative of the
initial data (flows commute, which is verified, so the order of application
does not matter; a permuted order is re-checked on every mixed coefficient).

Evaluating a tau-structure entry along a solution (jets become x-derivatives
of the running series) gives its two-point value; the cross-derivative
compatibility of the values against the distinguished flow is the exactness
condition for a log of a tau-function to exist.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .diffalg import DiffPoly, EpsSeries
from .hierarchy import Flow, FlowLabel, OmegaTable, verify_integrability
from .ratfunc import RatFunc

TIndex = tuple[int, ...]


class PoleAtExpansionPointError(ValueError):
    pass


class NonCommutingFlowsError(ValueError):
    pass


def _multinomial_factor(exps: TIndex) -> Fraction:
    f = 1
    for e in exps:
        for i in range(2, e + 1):
            f *= i
    return Fraction(1, f)


class TSeries:
    """Series in the flow times and eps, truncated at total t-degree T, eps^K."""

    __slots__ = ("nlabels", "T", "K", "data")

    def __init__(self, nlabels: int, T: int, K: int,
                 data: Mapping[tuple[TIndex, int], RatFunc] | None = None):
        self.nlabels = nlabels
        self.T = T
        self.K = K
        clean: dict[tuple[TIndex, int], RatFunc] = {}
        if data:
            for (exps, q), v in data.items():
                if sum(exps) <= T and q <= K and not v.is_zero():
                    clean[(tuple(exps), q)] = v
        self.data = clean

    @classmethod
    def const(cls, nlabels: int, T: int, K: int, value: RatFunc) -> "TSeries":
        zero_exp = tuple([0] * nlabels)
        return cls(nlabels, T, K, {(zero_exp, 0): value})

    def is_zero(self) -> bool:
        return not self.data

    def __eq__(self, other) -> bool:
        if not isinstance(other, TSeries):
            return NotImplemented
        return (self.nlabels, self.T, self.K) == (other.nlabels, other.T, other.K) \
            and self.data == other.data

    def __add__(self, other: "TSeries") -> "TSeries":
        out = dict(self.data)
        for key, v in other.data.items():
            got = out.get(key)
            s = v if got is None else got + v
            if s.is_zero():
                out.pop(key, None)
            else:
                out[key] = s
        return TSeries(self.nlabels, self.T, self.K, out)

    def __neg__(self) -> "TSeries":
        return TSeries(self.nlabels, self.T, self.K,
                       {k: -v for k, v in self.data.items()})

    def __sub__(self, other: "TSeries") -> "TSeries":
        return self + (-other)

    def __mul__(self, other) -> "TSeries":
        if isinstance(other, (int, Fraction, RatFunc)):
            return TSeries(self.nlabels, self.T, self.K,
                           {k: v * other for k, v in self.data.items()})
        out: dict[tuple[TIndex, int], RatFunc] = {}
        for (e1, q1), v1 in self.data.items():
            for (e2, q2), v2 in other.data.items():
                q = q1 + q2
                if q > self.K:
                    continue
                exps = tuple(a + b for a, b in zip(e1, e2))
                if sum(exps) > self.T:
                    continue
                key = (exps, q)
                got = out.get(key)
                prod = v1 * v2
                out[key] = prod if got is None else got + prod
        return TSeries(self.nlabels, self.T, self.K, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "TSeries":
        out = TSeries.const(self.nlabels, self.T, self.K, RatFunc.const(1))
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    def eps_shift(self, q: int) -> "TSeries":
        return TSeries(self.nlabels, self.T, self.K,
                       {(e, qq + q): v for (e, qq), v in self.data.items()})

    def dx(self) -> "TSeries":
        return TSeries(self.nlabels, self.T, self.K,
                       {k: v.dx() for k, v in self.data.items()})

    def dt(self, j: int) -> "TSeries":
        """Derivative in the j-th time (0-based label position)."""
        out: dict[tuple[TIndex, int], RatFunc] = {}
        for (exps, q), v in self.data.items():
            e = exps[j]
            if e == 0:
                continue
            new = list(exps)
            new[j] = e - 1
            out[(tuple(new), q)] = v * e
        return TSeries(self.nlabels, self.T, self.K, out)

    def truncate_t(self, T: int) -> "TSeries":
        return TSeries(self.nlabels, T, self.K,
                       {k: v for k, v in self.data.items() if sum(k[0]) <= T})

    def coefficient(self, exps: TIndex, q: int) -> RatFunc:
        return self.data.get((tuple(exps), q), RatFunc.const(0))


@dataclass
class FormalSolution:
    """Taylor-in-time solution with rational-in-x coefficients, per eps power."""

    labels: tuple[FlowLabel, ...]
    T: int
    K: int
    initial: tuple[RatFunc, ...]
    coeffs: dict[tuple[int, TIndex], tuple[RatFunc, ...]]  # (alpha, I) -> per-eps

    def series(self, alpha: int) -> TSeries:
        data: dict[tuple[TIndex, int], RatFunc] = {}
        for (a, exps), per_eps in self.coeffs.items():
            if a != alpha:
                continue
            norm = _multinomial_factor(exps)
            for q, v in enumerate(per_eps):
                if not v.is_zero():
                    data[(exps, q)] = v * norm
        return TSeries(len(self.labels), self.T, self.K, data)

    def at_t_zero(self, alpha: int) -> tuple[RatFunc, ...]:
        zero = tuple([0] * len(self.labels))
        return self.coeffs[(alpha, zero)]


def _evaluate_poly(p: DiffPoly, jet) -> RatFunc:
    out = RatFunc.const(0)
    for mono, c in p.terms.items():
        term = RatFunc.const(c)
        for (alpha, m), e in mono:
            term = term * (jet(alpha, m) ** e)
        out = out + term
    return out


def _evaluate_series(s: EpsSeries, jet) -> tuple[RatFunc, ...]:
    return tuple(_evaluate_poly(c, jet) for c in s.components)


def integrate_formal(flows: Sequence[Flow], initial: Sequence[RatFunc],
                     t_degree: int, eps_order: int,
                     commutativity_checked: bool = False) -> FormalSolution:
    """Iterated-flow Taylor solution with the given initial data at t = 0.

    Flows must commute (verified unless the caller vouches); initial data
    must be regular at the expansion point x = 0.  Every mixed Taylor
    coefficient is recomputed through a second application order and must
    agree exactly.
    """
    flows = list(flows)
    labels = tuple(f.label for f in flows)
    ell = len(initial)
    for f in flows:
        if len(f.chars) != ell:
            raise ValueError("flow arity does not match the initial data")
    if not commutativity_checked:
        rep = verify_integrability(flows)
        if not all(r["residual_zero"] for r in rep):
            raise NonCommutingFlowsError("flows do not commute; refusing to integrate")
    for f0 in initial:
        if f0.has_pole_at_zero():
            raise PoleAtExpansionPointError(
                "initial data has a pole at the expansion point x = 0")

    derivs = [f.derivation(eps_order) for f in flows]
    nflows = len(flows)
    zero_idx = tuple([0] * nflows)

    polys: dict[tuple[int, TIndex], EpsSeries] = {}
    for alpha in range(1, ell + 1):
        polys[(alpha, zero_idx)] = EpsSeries.var(alpha, eps_order)
    indices = [zero_idx]
    for total in range(1, t_degree + 1):
        new = []
        for exps in indices:
            if sum(exps) != total - 1:
                continue
            for j in range(nflows):
                cand = list(exps)
                cand[j] += 1
                cand = tuple(cand)
                if (1, cand) in polys:
                    continue
                first = min(i for i in range(nflows) if cand[i] > 0)
                prev = list(cand)
                prev[first] -= 1
                for alpha in range(1, ell + 1):
                    polys[(alpha, cand)] = derivs[first](polys[(alpha, tuple(prev))])
                # mixed-order consistency: apply through the last label too
                last = max(i for i in range(nflows) if cand[i] > 0)
                if last != first:
                    prev2 = list(cand)
                    prev2[last] -= 1
                    for alpha in range(1, ell + 1):
                        alt = derivs[last](polys[(alpha, tuple(prev2))])
                        if not (alt - polys[(alpha, cand)]).is_zero():
                            raise NonCommutingFlowsError(
                                f"mixed Taylor coefficient at {cand} is ambiguous")
                new.append(cand)
        indices.extend(new)

    dcache: dict[tuple[int, int], RatFunc] = {}

    def jet(alpha: int, m: int) -> RatFunc:
        key = (alpha, m)
        got = dcache.get(key)
        if got is None:
            got = initial[alpha - 1] if m == 0 else jet(alpha, m - 1).dx()
            dcache[key] = got
        return got

    coeffs = {}
    for (alpha, exps), s in polys.items():
        coeffs[(alpha, exps)] = _evaluate_series(s, jet)
    return FormalSolution(labels, t_degree, eps_order, tuple(initial), coeffs)


def evaluate_on_solution(entry: DiffPoly, sol: FormalSolution,
                         _jet_cache: dict | None = None) -> TSeries:
    """Two-point value: evaluate a graded entry along the solution."""
    series = EpsSeries.regrade(entry, sol.K, shift=0)
    cache = _jet_cache if _jet_cache is not None else {}

    def jet(alpha: int, m: int) -> TSeries:
        key = (alpha, m)
        got = cache.get(key)
        if got is None:
            got = sol.series(alpha) if m == 0 else jet(alpha, m - 1).dx()
            cache[key] = got
        return got

    nl = len(sol.labels)
    out = TSeries(nl, sol.T, sol.K)
    for q, comp in enumerate(series.components):
        if comp.is_zero():
            continue
        val = TSeries(nl, sol.T, sol.K)
        for mono, c in comp.terms.items():
            term = TSeries.const(nl, sol.T, sol.K, RatFunc.const(c))
            for (alpha, m), e in mono:
                term = term * (jet(alpha, m) ** e)
            val = val + term
        out = out + val.eps_shift(q)
    return out


def two_point_functions(sol: FormalSolution, omega: OmegaTable,
                        one: FlowLabel = (1, 0)) -> dict:
    """Two-point values along the solution plus the compatibility report.

    Checks, through t-degree T-1, that d_{t_i} of the value of
    Omega_{one; j} equals d_{t_j} of the value of Omega_{one; i}: the
    closedness needed for the second log-derivatives to integrate to a
    tau-function.  Also re-checks the flow equations on the coefficients.
    """
    jet_cache: dict = {}
    values: dict[tuple[FlowLabel, FlowLabel], TSeries] = {}
    for i in sol.labels:
        for j in sol.labels:
            values[(i, j)] = evaluate_on_solution(omega.entry(i, j), sol, jet_cache)
    report = []
    tcut = sol.T - 1
    for a, i in enumerate(sol.labels):
        for b, j in enumerate(sol.labels):
            lhs = values[(one, j)].dt(a).truncate_t(tcut)
            rhs = values[(one, i)].dt(b).truncate_t(tcut)
            report.append({
                "check": "two_point_cross_derivative",
                "pair": [list(i), list(j)],
                "residual_zero": (lhs - rhs).is_zero(),
            })
    return {"values": values, "cross_derivatives": report}


def flow_equation_report(sol: FormalSolution, flows: Sequence[Flow]) -> list[dict]:
    """d u / d t_j equals the flow characteristic along the solution (to T-1)."""
    by_label = {f.label: f for f in flows}
    jet_cache: dict = {}
    out = []
    tcut = sol.T - 1
    for b, j in enumerate(sol.labels):
        f = by_label[j]
        for alpha in range(1, len(sol.initial) + 1):
            lhs = sol.series(alpha).dt(b).truncate_t(tcut)
            rhs = evaluate_flow_char(f.chars[alpha - 1], sol, jet_cache).truncate_t(tcut)
            out.append({
                "check": "flow_equation",
                "label": list(j),
                "component": alpha,
                "residual_zero": (lhs - rhs).is_zero(),
            })
    return out


def evaluate_flow_char(char: DiffPoly, sol: FormalSolution,
                       _jet_cache: dict | None = None) -> TSeries:
    """Evaluate a flow characteristic (graded with dispersionless at eps^0)."""
    series = EpsSeries.regrade(char, sol.K, shift=-1)
    cache = _jet_cache if _jet_cache is not None else {}

    def jet(alpha: int, m: int) -> TSeries:
        key = (alpha, m)
        got = cache.get(key)
        if got is None:
            got = sol.series(alpha) if m == 0 else jet(alpha, m - 1).dx()
            cache[key] = got
        return got

    nl = len(sol.labels)
    out = TSeries(nl, sol.T, sol.K)
    for q, comp in enumerate(series.components):
        if comp.is_zero():
            continue
        val = TSeries(nl, sol.T, sol.K)
        for mono, c in comp.terms.items():
            term = TSeries.const(nl, sol.T, sol.K, RatFunc.const(c))
            for (alpha, m), e in mono:
                term = term * (jet(alpha, m) ** e)
            val = val + term
        out = out + val.eps_shift(q)
    return out


def gbgw_initial(real, constants: Sequence[Fraction]) -> list[RatFunc]:
    """Generalized BGW initial data: u_a(x, 0) = C_a / (1 - x)^{m'_a + 1}."""
    from .kacmoody import LoopElement
    out = []
    if len(constants) != real.ell:
        raise ValueError(f"need {real.ell} constants, got {len(constants)}")
    for alpha, v in enumerate(real.v_basis):
        elt = LoopElement.from_vector(real, 0, real.poly_vector(v))
        m_a = -elt.principal_degree()
        one_minus_x = (Fraction(1), Fraction(-1))
        den = (Fraction(1),)
        for _ in range(m_a + 1):
            den = tuple(_conv(den, one_minus_x))
        out.append(RatFunc((Fraction(constants[alpha]),), den))
    return out


def _conv(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out
