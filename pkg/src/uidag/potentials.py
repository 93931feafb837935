"""Discrete potential algebra.

A potential is an immutable table over an ordered variable domain, either of
probability kind or utility kind.  All operations are pure; tables are dense
numpy arrays shaped by the domain, flattening to row-major order with the last
domain variable varying fastest.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

PROBABILITY = "probability"
UTILITY = "utility"

NEUTRAL_TOL = 1e-12
ALGEBRA_TOL = 1e-12
MERGE_TOL = 1e-9


class PotentialError(Exception):
    pass


def _token(text: str) -> str:
    if len(text) <= 96:
        return text
    return "h:" + hashlib.sha1(text.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Potential:
    kind: str
    domain: tuple[str, ...]
    values: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != len(self.domain):
            raise PotentialError(
                f"values shape {arr.shape} does not match domain {self.domain}")
        if arr.flags.writeable:
            arr = arr.copy()
            arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        if self.kind == PROBABILITY and arr.size and arr.min() < 0:
            raise PotentialError("probability potential with negative entries")

    @property
    def cards(self) -> dict[str, int]:
        return dict(zip(self.domain, self.values.shape))

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def is_scalar(self) -> bool:
        return not self.domain

    def __repr__(self):
        return f"Potential({self.kind}, {self.domain}, shape={self.values.shape})"


def from_flat(kind: str, domain: tuple[str, ...], cards: dict[str, int],
              flat, provenance: str = "") -> Potential:
    shape = tuple(cards[v] for v in domain)
    arr = np.asarray(flat, dtype=float).reshape(shape)
    return Potential(kind, tuple(domain), arr, provenance)


@dataclass(frozen=True)
class PolicyTable:
    """Chosen state of one decision per configuration of its residual domain."""

    decision: str
    domain: tuple[str, ...]
    cards: tuple[int, ...]
    choices: tuple[int, ...]
    at: str | None = None
    values: Potential | None = None

    def lookup(self, evidence: dict[str, int]) -> int:
        return self.choices[_config_index(self.domain, self.cards, evidence)]


@dataclass(frozen=True)
class ChoiceTable:
    """Winning input index per configuration, from an envelope maximization."""

    domain: tuple[str, ...]
    cards: tuple[int, ...]
    choices: tuple[int, ...]


@dataclass(frozen=True)
class PotentialSets:
    """The probability/utility factor pools threaded through elimination."""

    probability: tuple[Potential, ...] = ()
    utility: tuple[Potential, ...] = ()

    def __post_init__(self):
        if any(p.kind != PROBABILITY for p in self.probability):
            raise PotentialError("non-probability member in probability pool")
        if any(u.kind != UTILITY for u in self.utility):
            raise PotentialError("non-utility member in utility pool")


def _config_index(domain: tuple[str, ...], cards: dict[str, int] | tuple[int, ...],
                  evidence: dict[str, int]) -> int:
    if isinstance(cards, dict):
        shape = tuple(cards[v] for v in domain)
    else:
        shape = tuple(cards)
    idx = 0
    for v, c in zip(domain, shape):
        idx = idx * c + evidence[v]
    return idx


def _union_domain(a: Potential, b: Potential) -> tuple[str, ...]:
    return a.domain + tuple(v for v in b.domain if v not in a.domain)


def _aligned(p: Potential, domain: tuple[str, ...]) -> np.ndarray:
    """View of p's values broadcastable over the given superset domain."""
    pos = {v: i for i, v in enumerate(p.domain)}
    perm = [pos[v] for v in domain if v in pos]
    arr = p.values.transpose(perm) if perm else p.values
    shape = tuple(p.cards[v] if v in pos else 1 for v in domain)
    return arr.reshape(shape)


def _check_cards(a: Potential, b: Potential):
    ca, cb = a.cards, b.cards
    for v in set(ca) & set(cb):
        if ca[v] != cb[v]:
            raise PotentialError(f"cardinality mismatch for {v}: {ca[v]} vs {cb[v]}")


def multiply(p: Potential, q: Potential) -> Potential:
    """Pointwise product over the ordered union domain.

    Probability times probability stays probability; mixing in one utility
    factor yields a utility result.  Two utilities cannot be multiplied.
    """
    if p.kind == UTILITY and q.kind == UTILITY:
        raise PotentialError("cannot multiply two utility potentials")
    _check_cards(p, q)
    domain = _union_domain(p, q)
    vals = _aligned(p, domain) * _aligned(q, domain)
    kind = UTILITY if UTILITY in (p.kind, q.kind) else PROBABILITY
    return Potential(kind, domain, vals,
                     _token(f"mul({p.provenance},{q.provenance})"))


def add(u: Potential, v: Potential) -> Potential:
    """Pointwise sum of two utility potentials over the ordered union domain."""
    if u.kind != UTILITY or v.kind != UTILITY:
        raise PotentialError("add is defined for utility potentials")
    _check_cards(u, v)
    domain = _union_domain(u, v)
    vals = _aligned(u, domain) + _aligned(v, domain)
    return Potential(UTILITY, domain, vals,
                     _token(f"add({u.provenance},{v.provenance})"))


def sum_out(p: Potential, x: str) -> Potential:
    if x not in p.domain:
        raise PotentialError(f"variable {x} not in domain {p.domain}")
    ax = p.domain.index(x)
    domain = p.domain[:ax] + p.domain[ax + 1:]
    return Potential(p.kind, domain, p.values.sum(axis=ax),
                     _token(f"sum[{x}]({p.provenance})"))


def max_out(u: Potential, d: str) -> tuple[Potential, PolicyTable]:
    """Max-marginalize a decision out of a utility table, recording the argmax.

    Ties resolve to the lowest state index.  The returned policy keeps the
    pre-maximization table so alternatives can be inspected later.
    """
    if u.kind != UTILITY:
        raise PotentialError("max_out is defined for utility potentials")
    if d not in u.domain:
        raise PotentialError(f"variable {d} not in domain {u.domain}")
    ax = u.domain.index(d)
    domain = u.domain[:ax] + u.domain[ax + 1:]
    maxed = Potential(UTILITY, domain, u.values.max(axis=ax),
                      _token(f"max[{d}]({u.provenance})"))
    choices = np.argmax(np.moveaxis(u.values, ax, -1), axis=-1)
    table = PolicyTable(decision=d, domain=domain, cards=maxed.values.shape,
                        choices=tuple(int(c) for c in choices.reshape(-1)),
                        values=u)
    return maxed, table


def divide(num: Potential, den: Potential) -> Potential:
    """Pointwise quotient with the 0/0 = 0 convention.

    A nonzero numerator over a zero denominator signals utility mass on an
    impossible configuration and raises.
    """
    if not set(den.domain) <= set(num.domain):
        raise PotentialError("denominator domain must be contained in numerator domain")
    _check_cards(num, den)
    d = np.broadcast_to(_aligned(den, num.domain), num.values.shape)
    zero = d == 0.0
    if np.any(zero & (num.values != 0.0)):
        raise PotentialError("inconsistent potential: nonzero value divided by zero")
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.where(zero, 0.0, num.values / np.where(zero, 1.0, d))
    return Potential(num.kind, num.domain, vals,
                     _token(f"div({num.provenance},{den.provenance})"))


def envelope_max(us: list[Potential] | tuple[Potential, ...]) -> tuple[Potential, ChoiceTable]:
    """Cellwise maximum of several utility tables plus the winning input index.

    Ties resolve to the lowest input index, so the first-listed branch takes
    precedence.
    """
    if len(us) < 2:
        raise PotentialError("envelope_max needs at least two potentials")
    if any(u.kind != UTILITY for u in us):
        raise PotentialError("envelope_max is defined for utility potentials")
    domain = us[0].domain
    cards = dict(us[0].cards)
    for u in us[1:]:
        _check_cards(us[0], u)
        domain = domain + tuple(v for v in u.domain if v not in domain)
        cards.update(u.cards)
    shape = tuple(cards[v] for v in domain)
    stack = np.stack([np.broadcast_to(_aligned(u, domain), shape) for u in us])
    vals = stack.max(axis=0)
    winners = np.argmax(stack == vals, axis=0)
    prov = _token("env(" + ",".join(u.provenance for u in us) + ")")
    choice = ChoiceTable(domain=domain, cards=shape,
                         choices=tuple(int(c) for c in winners.reshape(-1)))
    return Potential(UTILITY, domain, vals, prov), choice


def canonical(p: Potential) -> Potential:
    """Same table with the domain reordered to sorted variable ids."""
    domain = tuple(sorted(p.domain))
    if domain == p.domain:
        return p
    perm = [p.domain.index(v) for v in domain]
    return Potential(p.kind, domain, p.values.transpose(perm), p.provenance)


def approx_equal(a: Potential, b: Potential, tol: float = MERGE_TOL) -> bool:
    """True when both cover the same variables and agree cellwise within tol,
    regardless of domain order."""
    if set(a.domain) != set(b.domain):
        return False
    ca, cb = canonical(a), canonical(b)
    if ca.values.shape != cb.values.shape:
        return False
    if ca.values.size == 0:
        return True
    return float(np.max(np.abs(ca.values - cb.values))) <= tol


def is_neutral(p: Potential, tol: float = NEUTRAL_TOL) -> bool:
    """All-ones table (the multiplicative identity), within tolerance."""
    if p.values.size == 0:
        return True
    return float(np.max(np.abs(p.values - 1.0))) <= tol


def neutral(domain: tuple[str, ...] = (), cards: dict[str, int] | None = None,
            kind: str = PROBABILITY) -> Potential:
    shape = tuple((cards or {})[v] for v in domain)
    return Potential(kind, domain, np.ones(shape), "neutral")


def zero_utility() -> Potential:
    return Potential(UTILITY, (), np.zeros(()), "zero")
