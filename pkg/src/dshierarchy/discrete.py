"""Difference polynomial rings, discrete Miura maps, and the differential embedding.

A difference ring has generators u_{a,m} with the shift index m ranging over
a bounded window of integers and the shift automorphism S(u_{a,m}) =
u_{a,m+1}.  Admissible derivations commute with S and are determined by
their characteristic, D(u_{a,m}) = S^m(W_a).  Discrete Miura-type tuples are
inverted order by order in eps exactly as in the differential case, with
shifts in place of total derivatives.

The ring embeds into the eps-completion of the differential ring by

    u_{a,m}  ->  sum_j (eps m)^j / j!  u_{a,j}   (truncated at eps^K),

under which S becomes e^{eps d}.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .diffalg import ArityMismatchError, DiffPoly, EpsSeries
from .linalg import LinearSolver
from .miura import LeadingMapError


class ShiftWindowError(ValueError):
    pass


class DifferenceRing:
    """Difference polynomials in u_{a,m} with m in a bounded window."""

    def __init__(self, arity: int, window: tuple[int, int] = (-8, 8)):
        if arity < 1:
            raise ValueError("arity must be >= 1")
        if window[0] > 0 or window[1] < 0:
            raise ValueError("window must contain shift index 0")
        self.arity = arity
        self.window = (int(window[0]), int(window[1]))

    def var(self, alpha: int, m: int = 0) -> DiffPoly:
        self._check(alpha, m)
        return DiffPoly.dvar(alpha, m)

    def _check(self, alpha: int, m: int):
        if not (1 <= alpha <= self.arity):
            raise ArityMismatchError(f"component {alpha} outside arity {self.arity}")
        if not (self.window[0] <= m <= self.window[1]):
            raise ShiftWindowError(
                f"shift index {m} outside window {self.window}")

    def check_member(self, p: DiffPoly) -> DiffPoly:
        for (alpha, m) in p.variables():
            self._check(alpha, m)
        return p

    # -- the shift automorphism ------------------------------------------------
    def shift(self, p: DiffPoly | EpsSeries, steps: int = 1):
        """S^steps; raises ShiftWindowError when a variable leaves the window."""
        if isinstance(p, EpsSeries):
            return EpsSeries([self.shift(c, steps) for c in p.components], p.order)
        lo, hi = self.window

        def image(alpha: int, m: int) -> DiffPoly:
            mm = m + steps
            if not (lo <= mm <= hi):
                raise ShiftWindowError(
                    f"shift by {steps} pushes u_({alpha},{m}) outside {self.window}")
            return DiffPoly.dvar(alpha, mm)

        return p.substitute(image)


class DiscreteDerivation:
    """Admissible derivation of a difference ring: D(u_{a,m}) = S^m(W_a)."""

    def __init__(self, ring: DifferenceRing, chars: Sequence[DiffPoly],
                 eps_order: int = 0):
        if len(chars) != ring.arity:
            raise ArityMismatchError("characteristic length != ring arity")
        self.ring = ring
        self.order = eps_order
        self.chars = tuple(
            c if isinstance(c, EpsSeries) else EpsSeries.of_poly(c, eps_order)
            for c in chars)
        self._cache: dict[tuple[int, int], EpsSeries] = {}

    def _char_shift(self, alpha: int, m: int) -> EpsSeries:
        key = (alpha, m)
        got = self._cache.get(key)
        if got is None:
            got = self.ring.shift(self.chars[alpha - 1], m)
            self._cache[key] = got
        return got

    def __call__(self, p: DiffPoly | EpsSeries) -> EpsSeries:
        if isinstance(p, DiffPoly):
            p = EpsSeries.of_poly(p, self.order)
        out = EpsSeries.zero(self.order)
        for (alpha, m) in sorted(p.variables()):
            out = out + self._char_shift(alpha, m) * p.partial((alpha, m))
        return out

    def commutator(self, other: "DiscreteDerivation") -> "DiscreteDerivation":
        chars = [self(w2) - other(w1) for w1, w2 in zip(self.chars, other.chars)]
        return DiscreteDerivation(self.ring, chars, self.order)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.chars)


class DiscreteMiuraPair:
    """Discrete Miura tuple with its stagewise inverse (both eps-truncated)."""

    def __init__(self, ring_u: DifferenceRing, ring_v: DifferenceRing,
                 forward: Sequence[EpsSeries], inverse: Sequence[EpsSeries]):
        self.ring_u = ring_u
        self.ring_v = ring_v
        self.forward = tuple(forward)
        self.inverse = tuple(inverse)
        self.arity = len(self.forward)
        self.order = self.forward[0].order

    def phi(self, p: DiffPoly | EpsSeries) -> EpsSeries:
        """v-ring -> u-ring, commuting with the shift."""
        return self._subst(p, self.forward, self.ring_u)

    def psi(self, p: DiffPoly | EpsSeries) -> EpsSeries:
        return self._subst(p, self.inverse, self.ring_v)

    def _subst(self, p, images, ring_target) -> EpsSeries:
        if isinstance(p, DiffPoly):
            p = EpsSeries.of_poly(p, self.order)
        cache: dict[tuple[int, int], EpsSeries] = {}

        def image(alpha: int, m: int) -> EpsSeries:
            key = (alpha, m)
            got = cache.get(key)
            if got is None:
                got = ring_target.shift(images[alpha - 1], m)
                cache[key] = got
            return got

        return p.substitute(image)

    def induce(self, d: DiscreteDerivation) -> DiscreteDerivation:
        """Transport a derivation on the u-ring to the v-ring."""
        chars = [self.psi(d(v)) for v in self.forward]
        return DiscreteDerivation(self.ring_v, chars, self.order)


def check_discrete_miura(values: Sequence[EpsSeries]) -> tuple[bool, DiffPoly]:
    """Jacobian of the eps^0 part in the unshifted generators."""
    from .miura import _det
    ell = len(values)
    jac = [[v.component(0).partial((beta, 0)) for beta in range(1, ell + 1)]
           for v in values]
    det = _det(jac)
    return (not det.is_zero(), det)


def invert_discrete_miura(ring_u: DifferenceRing, values: Sequence[EpsSeries],
                          ring_v: DifferenceRing | None = None) -> DiscreteMiuraPair:
    """Stagewise inversion; the eps^0 part must be affine-linear and unshifted."""
    ell = len(values)
    order = values[0].order
    if ring_v is None:
        ring_v = DifferenceRing(ell, ring_u.window)
    lin = [[Fraction(0)] * ell for _ in range(ell)]
    const = [Fraction(0)] * ell
    for i, v in enumerate(values):
        ring_u.check_member(v.component(0))
        for mono, c in v.component(0).terms.items():
            if not mono:
                const[i] = c
            elif len(mono) == 1 and mono[0][1] == 1 and mono[0][0][1] == 0:
                lin[i][mono[0][0][0] - 1] = c
            else:
                raise LeadingMapError(
                    "leading part of the discrete tuple is not affine-linear "
                    "in the unshifted generators")
    solver = LinearSolver(lin)
    if solver.rank != ell:
        raise LeadingMapError("degenerate leading slice")
    ainv = [solver.solve([Fraction(int(i == j)) for i in range(ell)])
            for j in range(ell)]

    def lin_inverse_image(beta: int, m: int) -> DiffPoly:
        out = DiffPoly.zero()
        for g in range(ell):
            coef = ainv[g][beta - 1]
            if not coef:
                continue
            out = out + DiffPoly.dvar(g + 1, m) * coef
            if m == 0 and const[g]:
                out = out - DiffPoly.const(const[g] * coef)
        return out

    pair = DiscreteMiuraPair(ring_u, ring_v, values,
                             [EpsSeries.zero(order) for _ in range(ell)])
    inverse = list(pair.inverse)
    for stage in range(order + 1):
        for alpha in range(ell):
            pair = DiscreteMiuraPair(ring_u, ring_v, values, inverse)
            residual = pair.phi(inverse[alpha]) - EpsSeries.of_poly(
                DiffPoly.dvar(alpha + 1, 0), order)
            corr = residual.component(stage)
            if corr.is_zero():
                continue
            corr_v = corr.substitute(lin_inverse_image)
            inverse[alpha] = inverse[alpha] - EpsSeries.of_poly(corr_v, order, stage)
    pair = DiscreteMiuraPair(ring_u, ring_v, values, inverse)
    for alpha in range(1, ell + 1):
        target = EpsSeries.of_poly(DiffPoly.dvar(alpha, 0), order)
        if not (pair.phi(pair.inverse[alpha - 1]) - target).is_zero():
            raise RuntimeError("discrete inversion failed to close")
    return pair


def embed_differential(p: DiffPoly | EpsSeries, eps_order: int) -> EpsSeries:
    """Embed a difference polynomial into the differential eps-completion.

    u_{a,m} -> sum_{j<=K} (eps m)^j / j! u_{a,j}; an algebra homomorphism
    sending the shift to e^{eps d} modulo eps^{K+1}.
    """
    if isinstance(p, DiffPoly):
        p = EpsSeries.of_poly(p, eps_order)
    if p.order != eps_order:
        p = p.truncate(eps_order) if p.order > eps_order else \
            EpsSeries(list(p.components), eps_order)

    cache: dict[tuple[int, int], EpsSeries] = {}

    def image(alpha: int, m: int) -> EpsSeries:
        key = (alpha, m)
        got = cache.get(key)
        if got is None:
            comps = []
            fact = 1
            for j in range(eps_order + 1):
                if j > 0:
                    fact *= j
                comps.append(DiffPoly.var(alpha, j) * Fraction(m ** j, fact))
            got = EpsSeries(comps, eps_order)
            cache[key] = got
        return got

    return p.substitute(image)
