"""Unipotent gauge action, canonical form, and gauge invariants.

The gauge group acts on L = d + Lambda + q by conjugation with exponentials
of nilpotent-valued elements S:

    e^{ad S} L = d + Lambda + Q,   Q Borel-valued,

with the convention [S, d] = -d(S).  The canonical form is the unique pair
(S_can, Q_can) with Q_can valued in the gauge subspace V; it is found degree
by degree through the splitting b = V (+) [e, n], which is immediate in the
ordered Borel frame [V-basis | [e, p_j]-basis].

The gauge homomorphism f sends each generator q_i to the corresponding
entry of Q computed with fresh indeterminates S_1..S_{dim n}; an element is
a gauge invariant when f fixes it.  Gauge invariants rewrite as differential
polynomials in the canonical coordinates u_1..u_ell by the substitution that
sends the V-components of q to the u-generators and the complementary
components to zero; the rewrite is certified by substituting the canonical
coordinate expressions back.
"""

from __future__ import annotations

from fractions import Fraction

from .diffalg import DiffPoly
from .kacmoody import LoopElement, LoopRealization
from .linalg import InconsistentSystemError, LinearSolver
from .resolvent import LaxOperator


class NotGaugeInvariantError(ValueError):
    pass


_MAX_NILPOTENCY = 64


def _exp_ad_nilpotent(s: LoopElement, x: LoopElement) -> LoopElement:
    """e^{ad s}(x) for s of strictly negative principal degree (finite sum)."""
    out = x
    term = x
    fact = 1
    for m in range(1, _MAX_NILPOTENCY + 1):
        term = s.bracket(term)
        if term.is_zero():
            return out
        fact *= m
        out = out + term.scale(Fraction(1, fact))
    raise RuntimeError("ad S failed to nilpotate; S is not strictly triangular")


def _phi_ad_nilpotent(s: LoopElement, x: LoopElement) -> LoopElement:
    """phi(ad s)(x), phi(z) = (e^z-1)/z, for nilpotent ad s."""
    out = x
    term = x
    fact = 1
    for m in range(1, _MAX_NILPOTENCY + 1):
        term = s.bracket(term)
        if term.is_zero():
            return out
        fact *= (m + 1)
        out = out + term.scale(Fraction(1, fact))
    raise RuntimeError("ad S failed to nilpotate; S is not strictly triangular")


class GaugeFrame:
    """Nilpotent and Borel frames plus the DS-type splitting data."""

    def __init__(self, real: LoopRealization):
        self.real = real
        self.ell = len(real.v_basis)
        self.dim_n = len(real.nilpotent_basis)
        self.dim_b = self.ell + self.dim_n
        cols = [list(v) for v in real.nilpotent_basis]
        rows = [[cols[c][r] for c in range(len(cols))] for r in range(real.alg.dim)]
        self._nilp_solver = LinearSolver(rows)
        # splitting validated at realization build; keep the ranks on record
        self.splitting_dims = (self.ell, self.dim_n, self.dim_b)

    def nilpotent_element(self, coeffs) -> LoopElement:
        real = self.real
        vec = [DiffPoly.zero()] * real.alg.dim
        for c, p in zip(coeffs, real.nilpotent_basis):
            if isinstance(c, (int, Fraction)):
                c = DiffPoly.const(c)
            for t, pc in enumerate(p):
                if pc:
                    vec[t] = vec[t] + c * pc
        return LoopElement(real, {0: tuple(vec)})

    def nilpotent_coords(self, x: LoopElement):
        if any(k != 0 for k in x.lambda_powers()):
            raise ValueError("element is not lambda-free")
        try:
            return self._nilp_solver.solve(list(x.vector_at(0)), zero=DiffPoly.zero())
        except InconsistentSystemError as exc:
            raise ValueError("element is not nilpotent-valued") from exc

    def generic_s(self, offset: int) -> LoopElement:
        """S = sum S_j p_j with S_j fresh generators starting at offset+1."""
        return self.nilpotent_element(
            [DiffPoly.var(offset + j + 1) for j in range(self.dim_n)])


def gauge_transform(lax: LaxOperator, s: LoopElement) -> LoopElement:
    """Q with e^{ad S}(d + Lambda + q) = d + Lambda + Q; S must be n-valued."""
    frame = GaugeFrame(lax.real)
    frame.nilpotent_coords(s)  # raises when S is not in the nilpotent subalgebra
    return _gauge_q(lax, s)


def _gauge_q(lax: LaxOperator, s: LoopElement) -> LoopElement:
    conj = _exp_ad_nilpotent(s, lax.lam_plus_q)
    correction = _phi_ad_nilpotent(s, s.dx())
    return conj - correction - lax.real.cyclic


class CanonicalForm:
    """The unique (S_can, Q_can) with Q_can valued in the gauge subspace."""

    def __init__(self, lax: LaxOperator, frame: GaugeFrame,
                 s_can: LoopElement, q_can: LoopElement):
        self.lax = lax
        self.frame = frame
        self.s_can = s_can
        self.q_can = q_can
        real = lax.real
        coords = real.borel_coords(q_can.vector_at(0))
        if any(not c.is_zero() for c in coords[frame.ell:]):
            raise ValueError("canonical form is not V-valued")
        self.u_exprs = list(coords[: frame.ell])
        self.s_coeffs = frame.nilpotent_coords(s_can)

    def lax_can(self) -> LoopElement:
        return self.lax.real.cyclic + self.q_can

    def residual(self) -> LoopElement:
        return _gauge_q(self.lax, self.s_can) - self.q_can


def canonical_form(lax: LaxOperator, frame: GaugeFrame | None = None) -> CanonicalForm:
    """Solve for (S_can, Q_can) degree by degree in the Borel frame."""
    real = lax.real
    if frame is None:
        frame = GaugeFrame(real)
    max_depth = -min(real.pdeg[i] for i in range(real.alg.dim))
    s = LoopElement.zero(real)
    for k in range(0, max_depth + 1):
        t = _gauge_q(lax, s)
        m = t.pdeg_slice(-k)
        if m.is_zero():
            continue
        coords = real.borel_coords(m.vector_at(0))
        s_new = frame.nilpotent_element(coords[frame.ell:])
        if not s_new.is_zero():
            s = s + s_new
    q_can = _gauge_q(lax, s)
    cf = CanonicalForm(lax, frame, s, q_can)
    if not cf.residual().is_zero():
        raise RuntimeError("canonical form recursion left a nonzero residual")
    return cf


class GaugeHomomorphism:
    """f: q_i -> Q_i(q, S) with S_1..S_{dim n} fresh differential generators."""

    def __init__(self, lax: LaxOperator, frame: GaugeFrame | None = None):
        real = lax.real
        if frame is None:
            frame = GaugeFrame(real)
        if lax.kind != "borel":
            raise ValueError("the gauge homomorphism acts on the Borel-variable ring")
        self.lax = lax
        self.frame = frame
        self.n_q = lax.arity
        s = frame.generic_s(self.n_q)
        self.s_generic = s
        q_full = _gauge_q(lax, s)
        self.images = real.borel_coords(q_full.vector_at(0))
        self._jet_cache: dict[tuple[int, int], DiffPoly] = {}

    def _jet_image(self, alpha: int, m: int) -> DiffPoly:
        key = (alpha, m)
        got = self._jet_cache.get(key)
        if got is None:
            if alpha > self.n_q:      # S-variables are fixed by f
                got = DiffPoly.var(alpha, m)
            elif m == 0:
                got = self.images[alpha - 1]
            else:
                got = self._jet_image(alpha, m - 1).dx()
            self._jet_cache[key] = got
        return got

    def apply(self, w: DiffPoly) -> DiffPoly:
        return w.substitute(lambda a, m: self._jet_image(a, m))

    def is_invariant(self, w: DiffPoly) -> bool:
        return self.apply(w) == w

    def apply_loop(self, x: LoopElement) -> LoopElement:
        return x.map_coeffs(self.apply)


def gauge_invariance_check(w: DiffPoly, hom: GaugeHomomorphism) -> bool:
    """True when f(w) = w identically in the extended (q, S) ring."""
    return hom.is_invariant(w)


def invariants_as_coordinates(cf: CanonicalForm) -> list[DiffPoly]:
    """The canonical coordinates u_1..u_ell as elements of the q-ring."""
    return list(cf.u_exprs)


def to_invariant_coordinates(cf: CanonicalForm, w: DiffPoly,
                             check: bool = True) -> DiffPoly:
    """Rewrite a gauge invariant as a polynomial in the u-jets.

    The rewrite substitutes the V-components of q by the u-generators and the
    complementary components by zero; with ``check`` the result is certified
    by substituting the canonical coordinate expressions back into it.
    """
    ell = cf.frame.ell

    def section(alpha: int, m: int) -> DiffPoly:
        if alpha <= ell:
            return DiffPoly.var(alpha, m)
        return DiffPoly.zero()

    p = w.substitute(section)
    if check:
        cache: dict[tuple[int, int], DiffPoly] = {}

        def embed(alpha: int, m: int) -> DiffPoly:
            key = (alpha, m)
            got = cache.get(key)
            if got is None:
                if m == 0:
                    got = cf.u_exprs[alpha - 1]
                else:
                    got = embed(alpha, m - 1).dx()
                cache[key] = got
            return got

        if p.substitute(embed) != w:
            raise NotGaugeInvariantError("not a gauge invariant")
    return p
