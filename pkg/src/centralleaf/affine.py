"""Extended affine Weyl group: group law, length, Bruhat order,
sigma-conjugacy, Newton and Kottwitz maps, decent lifts, admissible sets.

Elements are pairs (translation, finite part) with the finite part stored
as an integer matrix on the cocharacter lattice; the composition law is
(l1, w1)(l2, w2) = (l1 + w1 l2, w1 w2).  All computations are exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from . import linalg
from .errors import (BudgetExceededError, ConfigurationError, ConsistencyError,
                     DatumMismatchError, PreconditionError,
                     UnsupportedOperationError)
from .isocrystal import MonomialIsocrystal, monomial_compose, monomial_identity
from .rootdata import RootDatum, dominant_rep, is_dominant

Vector = Tuple[int, ...]
Matrix = Tuple[Tuple[int, ...], ...]


@dataclass(frozen=True)
class AffineElement:
    datum: RootDatum
    translation: Vector
    finite: Matrix

    def __repr__(self):
        return f"AffineElement(lambda={self.translation}, w={self.finite})"


def identity_element(datum: RootDatum) -> AffineElement:
    return AffineElement(datum, (0,) * datum.cochar_rank,
                         linalg.identity(datum.cochar_rank))


def translation_element(datum: RootDatum, lam) -> AffineElement:
    lam = tuple(int(x) for x in lam)
    if len(lam) != datum.cochar_rank:
        raise PreconditionError("translation vector of wrong length")
    return AffineElement(datum, lam, linalg.identity(datum.cochar_rank))


def simple_element(datum: RootDatum, i: int) -> AffineElement:
    """The i-th finite simple reflection (1-based) as a group element."""
    if not 1 <= i <= datum.rank:
        raise PreconditionError(f"simple reflection index {i} out of range")
    zero = (0,) * datum.cochar_rank
    return AffineElement(datum, zero, datum.simple_reflections[i - 1])


def element(datum: RootDatum, lam, finite=None) -> AffineElement:
    finite = linalg.freeze(finite) if finite is not None \
        else linalg.identity(datum.cochar_rank)
    if not datum.is_weyl(finite):
        raise PreconditionError("finite part is not a Weyl group element")
    return AffineElement(datum, tuple(int(x) for x in lam), finite)


def _same_datum(*xs: AffineElement):
    datum = xs[0].datum
    for x in xs[1:]:
        if x.datum is not datum:
            raise DatumMismatchError("elements live over different root data")
    return datum


def compose(x: AffineElement, y: AffineElement) -> AffineElement:
    datum = _same_datum(x, y)
    lam = tuple(a + b for a, b in zip(x.translation,
                                      linalg.mat_vec(x.finite, y.translation)))
    return AffineElement(datum, lam, linalg.mat_mul(x.finite, y.finite))


def invert(x: AffineElement) -> AffineElement:
    w_inv = linalg.freeze(tuple(int(v) for v in row)
                          for row in linalg.mat_inv(x.finite))
    lam = tuple(-v for v in linalg.mat_vec(w_inv, x.translation))
    return AffineElement(x.datum, lam, w_inv)


def sigma_apply(x: AffineElement, sigma: Optional[Matrix]) -> AffineElement:
    """Apply the lattice automorphism sigma: (l, w) -> (s l, s w s^-1)."""
    if sigma is None:
        return x
    datum = x.datum
    s_inv = linalg.freeze(tuple(int(v) for v in row)
                          for row in linalg.mat_inv(sigma))
    lam = tuple(int(v) for v in linalg.mat_vec(sigma, x.translation))
    w = linalg.mat_mul(linalg.mat_mul(sigma, x.finite), s_inv)
    w = linalg.freeze(tuple(int(v) for v in row) for row in w)
    if not datum.is_weyl(w):
        raise ConfigurationError("sigma does not normalise the Weyl group")
    return AffineElement(datum, lam, w)


def sigma_conjugate(g: AffineElement, x: AffineElement,
                    sigma: Optional[Matrix] = None) -> AffineElement:
    """g * x * sigma(g)^-1."""
    _same_datum(g, x)
    return compose(compose(g, x), invert(sigma_apply(g, sigma)))


# ---------------------------------------------------------------------------
# length and reduced words

def length(x: AffineElement) -> int:
    """Iwahori-Matsumoto length on the extended affine Weyl group."""
    datum = x.datum
    total = 0
    w_chars = datum.char_matrix(x.finite)
    positive = set(datum.positive_roots)
    for alpha in datum.positive_roots:
        w_inv_alpha = tuple(int(v) for v in linalg.mat_vec(w_chars, alpha))
        pairing = datum.pair(alpha, x.translation)
        if w_inv_alpha in positive:
            total += abs(pairing)
        else:
            total += abs(pairing - 1)
    return total


def affine_generators(datum: RootDatum) -> Tuple[AffineElement, ...]:
    """Simple affine generators: finite simples, then one affine reflection
    t^{theta_check} s_theta per irreducible component."""
    cached = getattr(datum, "_affine_gens", None)
    if cached is not None:
        return cached
    gens = [simple_element(datum, i + 1) for i in range(datum.rank)]
    for component in datum.components:
        theta = datum.highest_root(component)
        theta_check = datum.coroot_of(theta)
        n = datum.cochar_rank
        refl = []
        for j in range(n):
            e = tuple(1 if i == j else 0 for i in range(n))
            refl.append(tuple(e[i] - datum.pair(theta, e) * theta_check[i]
                              for i in range(n)))
        mat = linalg.freeze(tuple(refl[j][i] for j in range(n)) for i in range(n))
        gens.append(AffineElement(datum, tuple(theta_check), mat))
    gens = tuple(gens)
    setattr(datum, "_affine_gens", gens)
    return gens


def _word_cache(datum: RootDatum) -> Dict:
    cache = getattr(datum, "_reduced_words", None)
    if cache is None:
        cache = {}
        setattr(datum, "_reduced_words", cache)
    return cache


def omega_and_word(x: AffineElement) -> Tuple[AffineElement, Tuple[int, ...]]:
    """Canonical factorisation x = tau * (product of simple affine gens).

    tau is the length-zero part of x; the word is one fixed reduced word
    built by greedy right descent, lowest generator index first.
    """
    cache = _word_cache(x.datum)
    hit = cache.get(x)
    if hit is not None:
        return hit
    gens = affine_generators(x.datum)
    current = x
    letters: List[int] = []
    cur_len = length(current)
    while cur_len > 0:
        for idx, g in enumerate(gens):
            candidate = compose(current, g)
            cand_len = length(candidate)
            if cand_len < cur_len:
                letters.append(idx)
                current, cur_len = candidate, cand_len
                break
        else:
            raise ConsistencyError("positive-length element with no descent")
    word = tuple(reversed(letters))
    result = (current, word)
    cache[x] = result
    return result


def is_length_zero(x: AffineElement) -> bool:
    return length(x) == 0


def bruhat_leq(x: AffineElement, y: AffineElement) -> bool:
    """Bruhat order on the extended affine Weyl group.

    Elements in different length-zero cosets are incomparable (False).
    The test runs the subword recursion against one fixed reduced word of
    y's affine part; the result is independent of the chosen word.
    """
    _same_datum(x, y)
    tau_x, _ = omega_and_word(x)
    tau_y, word_y = omega_and_word(y)
    if tau_x != tau_y:
        return False
    u = compose(invert(tau_x), x)
    gens = affine_generators(x.datum)
    memo: Dict = {}

    def recurse(u_elem: AffineElement, suffix: Tuple[int, ...]) -> bool:
        if length(u_elem) == 0:
            # inside the affine Weyl group only the identity has length zero
            return u_elem == identity_element(x.datum)
        if not suffix:
            return False
        key = (u_elem, suffix)
        hit = memo.get(key)
        if hit is not None:
            return hit
        s = gens[suffix[0]]
        su = compose(s, u_elem)
        if length(su) < length(u_elem):
            result = recurse(su, suffix[1:])
        else:
            result = recurse(u_elem, suffix[1:])
        memo[key] = result
        return result

    if length(u) == 0:
        return u == identity_element(x.datum)
    return recurse(u, word_y)


# ---------------------------------------------------------------------------
# Newton point, Kottwitz map

@dataclass(frozen=True)
class NewtonPoint:
    vector: Tuple[Fraction, ...]
    dominant: Tuple[Fraction, ...]
    period: int


@dataclass(frozen=True)
class KottwitzClass:
    free: Tuple[int, ...]
    torsion: Tuple[int, ...]
    moduli: Tuple[int, ...]

    def __add__(self, other: "KottwitzClass") -> "KottwitzClass":
        if self.moduli != other.moduli:
            raise DatumMismatchError("Kottwitz classes from different groups")
        free = tuple(a + b for a, b in zip(self.free, other.free))
        tors = tuple((a + b) % d for a, b, d in
                     zip(self.torsion, other.torsion, self.moduli))
        return KottwitzClass(free, tors, self.moduli)


_SIGMA_ORDER_CAP = 10_000


def newton_point(x: AffineElement, sigma: Optional[Matrix] = None) -> NewtonPoint:
    """Newton cocharacter of x: the average of the (w sigma)-orbit of the
    translation part over the minimal period r with (w sigma)^r = 1."""
    datum = x.datum
    w_sigma = x.finite if sigma is None else linalg.mat_mul(x.finite, sigma)
    ident = linalg.identity(datum.cochar_rank)
    total = list(x.translation)
    power = w_sigma
    r = 1
    while not linalg.mat_eq(power, ident):
        moved = linalg.mat_vec(power, x.translation)
        total = [a + b for a, b in zip(total, moved)]
        power = linalg.mat_mul(power, w_sigma)
        r += 1
        if r > _SIGMA_ORDER_CAP:
            raise PreconditionError("w*sigma does not have finite order on X_*")
    vector = tuple(Fraction(t, r) for t in total)
    return NewtonPoint(vector, dominant_rep(datum, vector), r)


def kottwitz(x: AffineElement) -> KottwitzClass:
    """Image of the translation part in the fundamental-group presentation."""
    free, tors = x.datum.pi1.project(x.translation)
    return KottwitzClass(free, tors, x.datum.pi1.torsion)


def kottwitz_of_translation(datum: RootDatum, lam) -> KottwitzClass:
    free, tors = datum.pi1.project(tuple(int(v) for v in lam))
    return KottwitzClass(free, tors, datum.pi1.torsion)


# ---------------------------------------------------------------------------
# decent lifts through the attached representation

@dataclass(frozen=True)
class DecentLift:
    period: int
    matrix: MonomialIsocrystal
    nu: NewtonPoint


def _weight_permutation(datum: RootDatum, action_on_chars: Matrix) -> Tuple[int, ...]:
    weights = datum.rep_weights
    index = {w: i for i, w in enumerate(weights)}
    perm = []
    for w in weights:
        image = tuple(int(v) for v in linalg.mat_vec(action_on_chars, w))
        if image not in index:
            raise UnsupportedOperationError(
                "automorphism does not permute the representation weights")
        perm.append(index[image])
    return tuple(perm)


def rep_lift(x: AffineElement) -> MonomialIsocrystal:
    """Monomial-matrix lift of x in the attached faithful representation.

    The finite part permutes the weight lines; the translation contributes
    the exponent <omega_j, lambda> in column j.
    """
    datum = x.datum
    if datum.rep_weights is None:
        raise UnsupportedOperationError("no faithful representation attached")
    w_inv = linalg.freeze(tuple(int(v) for v in row)
                          for row in linalg.mat_inv(x.finite))
    chars_of_w_inv = datum.char_matrix(w_inv)
    perm = _weight_permutation(datum, chars_of_w_inv)
    exps = tuple(int(datum.pair(w, x.translation)) for w in datum.rep_weights)
    return MonomialIsocrystal(len(perm), perm, exps)


def sigma_rep_matrix(datum: RootDatum, sigma: Optional[Matrix]) -> MonomialIsocrystal:
    if sigma is None:
        return monomial_identity(len(datum.rep_weights))
    s_inv = linalg.freeze(tuple(int(v) for v in row)
                          for row in linalg.mat_inv(sigma))
    perm = _weight_permutation(datum, datum.char_matrix(s_inv))
    return MonomialIsocrystal(len(perm), perm, (0,) * len(perm))


def decent_representative(x: AffineElement,
                          sigma: Optional[Matrix] = None) -> DecentLift:
    """Monomial lift satisfying (b sigma)^r = p^{r nu} sigma^r exactly.

    The verification is symbolic in p: both sides are monomial matrices
    whose permutation and exponent data are compared directly.
    """
    datum = x.datum
    nu = newton_point(x, sigma)
    lift = rep_lift(x)
    s_mono = sigma_rep_matrix(datum, sigma)
    r = nu.period
    twisted = monomial_compose(lift, s_mono)
    power = monomial_identity(lift.size)
    for _ in range(r):
        power = monomial_compose(power, twisted)
    target_exps = []
    for w in datum.rep_weights:
        e = Fraction(datum.pair(w, nu.vector)) * r
        if e.denominator != 1:
            raise ConsistencyError("r*nu pairing is not integral")
        target_exps.append(int(e))
    s_power = monomial_identity(lift.size)
    for _ in range(r):
        s_power = monomial_compose(s_power, s_mono)
    target = monomial_compose(
        MonomialIsocrystal(lift.size, tuple(range(lift.size)), tuple(target_exps)),
        s_power)
    if power != target:
        raise ConsistencyError("decency equation failed for the monomial lift")
    return DecentLift(r, lift, nu)


# ---------------------------------------------------------------------------
# admissible sets

def _subword_products(datum: RootDatum, tau: AffineElement,
                      word: Tuple[int, ...]) -> set:
    gens = affine_generators(datum)
    products = {identity_element(datum)}
    for letter in word:
        products |= {compose(prod, gens[letter]) for prod in products}
    return {compose(tau, prod) for prod in products}


def admissible_set(datum: RootDatum, mu, level: str = "iwahori"):
    """Admissible set of mu: the Bruhat lower set of the translations t^{w mu}.

    Iwahori level returns the set of group elements; hyperspecial level
    returns the dominant translation representatives of the double cosets.
    """
    mu = tuple(int(v) for v in mu)
    if not is_dominant(datum, mu):
        raise PreconditionError("mu must be dominant")
    if level not in ("iwahori", "hyperspecial"):
        raise PreconditionError(f"unknown level {level!r}")
    elements: set = set()
    taus = set()
    for w in datum.weyl_elements:
        lam = tuple(int(v) for v in linalg.mat_vec(w, mu))
        t = translation_element(datum, lam)
        tau, word = omega_and_word(t)
        taus.add(tau)
        elements |= _subword_products(datum, tau, word)
    if len(taus) != 1:
        raise ConsistencyError("translations of one orbit have distinct cosets")
    if level == "iwahori":
        return frozenset(elements)
    reps = {tuple(dominant_rep(datum, x.translation)) for x in elements}
    return tuple(sorted(tuple(int(v) for v in rep) for rep in reps))


# ---------------------------------------------------------------------------
# enumeration and sigma-conjugacy classes

def enumerate_elements(datum: RootDatum, max_length: int,
                       coord_bound) -> List[AffineElement]:
    """All elements of length <= max_length whose translation coordinates
    lie in the window; coord_bound is an int b for [-b, b] or a (lo, hi) pair."""
    if isinstance(coord_bound, int):
        lo, hi = -coord_bound, coord_bound
    else:
        lo, hi = coord_bound
    out = []
    span = range(lo, hi + 1)
    for lam in itertools.product(span, repeat=datum.cochar_rank):
        for w in datum.weyl_elements:
            x = AffineElement(datum, lam, w)
            if length(x) <= max_length:
                out.append(x)
    return out


def _sort_key(x: AffineElement):
    return (length(x), x.translation, x.finite)


@dataclass(frozen=True)
class SigmaClassPartition:
    blocks: Tuple[Tuple[AffineElement, ...], ...]
    length_cap: int
    conjugator_cap: int
    coord_bound: int

    def block_of(self, x: AffineElement) -> Tuple[AffineElement, ...]:
        for block in self.blocks:
            if x in block:
                return block
        raise KeyError("element not in the enumerated window")


_CLASS_BUDGET = 5_000_000


def enumerate_sigma_classes(datum: RootDatum, length_cap: int,
                            sigma: Optional[Matrix] = None,
                            conjugator_cap: Optional[int] = None,
                            coord_bound: Optional[int] = None,
                            budget: int = _CLASS_BUDGET) -> SigmaClassPartition:
    """Partition the length window into sigma-conjugacy classes.

    Conjugators run over elements of length <= conjugator_cap (default
    length_cap + 2), so the result is an upper-bound refinement: blocks can
    only merge, never split, under longer conjugators.  Each block is
    validated to carry constant dominant Newton point and Kottwitz class.
    """
    if conjugator_cap is None:
        conjugator_cap = length_cap + 2
    if coord_bound is None:
        coord_bound = length_cap + 2
    elements = enumerate_elements(datum, length_cap, coord_bound)
    conjugators = enumerate_elements(datum, conjugator_cap, coord_bound + 1)
    if len(elements) * len(conjugators) > budget:
        # the singleton partition is itself a valid upper-bound refinement
        singleton = SigmaClassPartition(
            tuple((x,) for x in sorted(elements, key=_sort_key)),
            length_cap, 0, coord_bound)
        raise BudgetExceededError(
            f"{len(elements)} elements x {len(conjugators)} conjugators "
            f"exceeds the budget of {budget}",
            partial=singleton)
    index = {x: i for i, x in enumerate(elements)}
    parent = list(range(len(elements)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    for g in conjugators:
        g_inv_sigma = invert(sigma_apply(g, sigma))
        for x in elements:
            y = compose(compose(g, x), g_inv_sigma)
            j = index.get(y)
            if j is not None:
                union(index[x], j)

    groups: Dict[int, List[AffineElement]] = {}
    for x, i in index.items():
        groups.setdefault(find(i), []).append(x)
    blocks = tuple(sorted((tuple(sorted(block, key=_sort_key))
                           for block in groups.values()),
                          key=lambda b: _sort_key(b[0])))
    for block in blocks:
        dominants = {newton_point(x, sigma).dominant for x in block}
        kappas = {_sigma_reduced_kappa(datum, x, sigma) for x in block}
        if len(dominants) != 1 or len(kappas) != 1:
            raise ConsistencyError(
                "sigma-conjugacy block with non-constant invariants")
    return SigmaClassPartition(blocks, length_cap, conjugator_cap, coord_bound)


def _sigma_reduced_kappa(datum: RootDatum, x: AffineElement,
                         sigma: Optional[Matrix]):
    """Kottwitz class, reduced to sigma-coinvariants when sigma is nontrivial."""
    kappa = kottwitz(x)
    if sigma is None or linalg.mat_eq(sigma, linalg.identity(datum.cochar_rank)):
        return (kappa.free, kappa.torsion)
    # free part modulo the image of (1 - sigma_bar) on the free quotient
    proj = datum.pi1.projection[:datum.pi1.free_rank]
    if not proj:
        return ((), kappa.torsion)
    columns = []
    n = datum.cochar_rank
    for j in range(n):
        e = tuple(1 if i == j else 0 for i in range(n))
        se = linalg.mat_vec(sigma, e)
        diff = tuple(a - b for a, b in zip(e, se))
        columns.append(tuple(int(v) for v in linalg.mat_vec(proj, diff)))
    from .rootdata import present_quotient
    reduced = present_quotient(len(proj), [c for c in columns if any(c)])
    return (reduced.project(kappa.free), kappa.torsion)
