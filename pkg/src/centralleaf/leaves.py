"""Headline calculators: central-leaf dimension, centraliser dimension,
basic-ness, neutral acceptability, and the closed-formula/slope-oracle
cross check.

The leaf dimension is <2 rho, nu_dominant>; every report recomputes it
through the adjoint slope decomposition (sum of positive-root pairings)
and refuses to emit on disagreement.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Tuple

from .affine import (AffineElement, KottwitzClass, kottwitz,
                     kottwitz_of_translation, newton_point)
from .errors import ConsistencyError, PreconditionError
from .isocrystal import adjoint_rep, nonneg_slope_dim, slopes_via_weights
from .rootdata import RootDatum, dominance_leq, dominant_rep, is_dominant
from . import linalg


@dataclass(frozen=True)
class LeafReport:
    element: AffineElement
    nu_dominant: Tuple[Fraction, ...]
    kappa: KottwitzClass
    basic: bool
    leaf_dim: int
    jb_dim: int
    adjoint_slopes: Tuple[Fraction, ...]
    checked: bool


def leaf_report(datum: RootDatum, x: AffineElement,
                sigma=None) -> LeafReport:
    """Full invariant report for one element.

    leaf_dim is the central-leaf dimension <2 rho, nu>; jb_dim the dimension
    of the twisted centraliser group (the Levi centralising nu); checked is
    the agreement flag of the closed formula with the slope-decomposition
    oracle and must be True for the report to be returned.
    """
    nu = newton_point(x, sigma)
    nu_dom = nu.dominant
    closed = Fraction(datum.pair(datum.two_rho, nu_dom))
    if closed.denominator != 1:
        raise ConsistencyError("<2rho, nu> is not an integer")
    oracle = nonneg_slope_dim(datum, nu_dom)
    checked = int(closed) == oracle
    if not checked:
        raise ConsistencyError(
            f"leaf dimension mismatch: closed formula {closed} vs "
            f"slope oracle {oracle}")
    zero_pairings = sum(1 for alpha in datum.roots
                        if datum.pair(alpha, nu_dom) == 0)
    jb_dim = datum.cochar_rank + zero_pairings
    basic = zero_pairings == len(datum.roots)
    adjoint = slopes_via_weights(adjoint_rep(datum), nu_dom)
    return LeafReport(x, nu_dom, kottwitz(x), basic, int(closed), jb_dim,
                      adjoint, checked)


def mu_average(datum: RootDatum, mu, sigma=None) -> Tuple[Fraction, ...]:
    """Average of mu over the sigma-orbit; mu itself for trivial sigma."""
    mu = tuple(Fraction(v) for v in mu)
    if sigma is None:
        return mu
    ident = linalg.identity(datum.cochar_rank)
    total = list(mu)
    power = sigma
    count = 1
    while not linalg.mat_eq(power, ident):
        moved = linalg.mat_vec(power, mu)
        total = [a + b for a, b in zip(total, moved)]
        power = linalg.mat_mul(power, sigma)
        count += 1
        if count > 10_000:
            raise PreconditionError("sigma does not have finite order")
    return tuple(Fraction(t, count) for t in total)


def neutral_acceptable(datum: RootDatum, x: AffineElement, mu,
                       sigma=None) -> bool:
    """Local-Shimura-datum condition: equal Kottwitz invariants and the
    dominant Newton point below the sigma-averaged mu in dominance order.

    For GL(n) and minuscule mu this is the group-theoretic form of Mazur's
    inequality.
    """
    mu = tuple(int(v) for v in mu)
    if not is_dominant(datum, mu):
        raise PreconditionError("mu must be dominant")
    if kottwitz(x) != kottwitz_of_translation(datum, mu):
        return False
    nu_dom = newton_point(x, sigma).dominant
    avg = dominant_rep(datum, mu_average(datum, mu, sigma))
    return dominance_leq(datum, nu_dom, avg)


@dataclass(frozen=True)
class CrossCheckRow:
    element: AffineElement
    closed: int
    oracle: int
    ok: bool


@dataclass(frozen=True)
class CrossCheckReport:
    rows: Tuple[CrossCheckRow, ...]
    all_pass: bool


def cross_check_dimension(datum: RootDatum,
                          sample: Iterable[AffineElement],
                          sigma=None) -> CrossCheckReport:
    """Check <2 rho, nu> against the positive-root pairing sum elementwise.

    The identity is an algebraic tautology, so any failure indicates an
    implementation bug; that is the point of running it.
    """
    rows = []
    all_pass = True
    for x in sample:
        nu_dom = newton_point(x, sigma).dominant
        closed = Fraction(datum.pair(datum.two_rho, nu_dom))
        oracle = nonneg_slope_dim(datum, nu_dom)
        ok = closed == oracle
        all_pass = all_pass and ok
        rows.append(CrossCheckRow(x, int(closed), oracle, ok))
    return CrossCheckReport(tuple(rows), all_pass)
