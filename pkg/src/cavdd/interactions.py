"""Pair-interaction term tables shared by the free-space and cavity paths.

A table row corresponds to one operator product tau_2^{uv} tau_1^{ab}.  The
2<-1 strength is evaluated at the source transition frequency omega_ab of
dipole 1, the 1<-2 strength at omega_uv of dipole 2, and the symmetrized
strength is their mean.  Rows are ordered lexicographically in (u, v, a, b)
so emitted tables diff cleanly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Constants, Dipole, LevelPair, ResonanceError, transition_frequency

CLASS_PERMANENT = "permanent"
CLASS_PERMANENT_TRANSITION = "permanent-transition"
CLASS_RESONANT = "resonant"
CLASS_CO_ROTATING = "co-rotating"
CLASS_COUNTER_ROTATING = "counter-rotating"


def classify_term(u, v, a, b, omega_21, omega_12, rtol=1e-9):
    """Class tag for the operator product tau_2^{uv} tau_1^{ab}.

    permanent            both factors diagonal (omega = 0 on both)
    permanent-transition exactly one factor diagonal
    resonant             raising/lowering pairing with omega_ab ~ -omega_uv
    co-rotating          raising/lowering pairing, detuned
    counter-rotating     two raising or two lowering factors
    """
    diag2 = u == v
    diag1 = a == b
    if diag1 and diag2:
        return CLASS_PERMANENT
    if diag1 != diag2:
        return CLASS_PERMANENT_TRANSITION
    scale = max(abs(omega_21), abs(omega_12), 1e-300)
    if abs(omega_21 + omega_12) <= rtol * scale:
        return CLASS_RESONANT
    if omega_21 * omega_12 < 0:
        return CLASS_CO_ROTATING
    return CLASS_COUNTER_ROTATING


@dataclass(frozen=True)
class TermEntry:
    """One (u, v, a, b) row: directional strengths and the symmetrized total."""

    u: int
    v: int
    a: int
    b: int
    term_class: str
    omega_21: float
    omega_12: float
    v_21: complex
    v_12: complex
    v_sym: complex
    status: str = "ok"
    v_21_image: complex | None = None
    v_21_mode: complex | None = None
    v_12_image: complex | None = None
    v_12_mode: complex | None = None
    tail_21: float | None = None
    tail_12: float | None = None
    evaluated: bool = True  # False for identically-zero moment pairs

    @property
    def ok(self):
        return self.status == "ok"


@dataclass(frozen=True)
class InteractionTable:
    entries: tuple

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def lookup(self, u, v, a, b):
        for e in self.entries:
            if (e.u, e.v, e.a, e.b) == (u, v, a, b):
                return e
        raise KeyError(f"no entry ({u}, {v}, {a}, {b})")

    def by_class(self, term_class):
        return [e for e in self.entries if e.term_class == term_class]

    @property
    def n_ok(self):
        return sum(1 for e in self.entries if e.ok)

    @property
    def n_attempted(self):
        return sum(1 for e in self.entries if e.evaluated)

    @property
    def n_failed(self):
        return sum(1 for e in self.entries if e.evaluated and not e.ok)

    def total_sym(self):
        """Sum of symmetrized strengths over successful entries."""
        return sum(e.v_sym for e in self.entries if e.ok)


def build_pair_table(d1: Dipole, d2: Dipole, k: Constants, evaluate) -> InteractionTable:
    """Assemble the full (u, v, a, b) table.

    evaluate(direction, m_field, m_source, omega) -> (value, extras) computes a
    single directional strength; direction is "21" (field dipole 2, source
    dipole 1) or "12".  Zero-moment pairs are emitted as zero rows without
    calling the evaluator.  A ResonanceError from the evaluator marks the row
    as failed but keeps the table.
    """
    n1, n2 = d1.n_levels, d2.n_levels
    entries = []
    for u in range(n2):
        for v in range(n2):
            m2 = d2.moments[u, v]
            w12 = transition_frequency(d2, LevelPair(u, v), k)
            for a in range(n1):
                for b in range(n1):
                    m1 = d1.moments[a, b]
                    w21 = transition_frequency(d1, LevelPair(a, b), k)
                    cls = classify_term(u, v, a, b, w21, w12)
                    base = dict(u=u, v=v, a=a, b=b, term_class=cls,
                                omega_21=w21, omega_12=w12)
                    if not (np.any(m1 != 0) and np.any(m2 != 0)):
                        entries.append(TermEntry(v_21=0.0, v_12=0.0, v_sym=0.0,
                                                 evaluated=False, **base))
                        continue
                    try:
                        v21, x21 = evaluate("21", m2, m1, w21)
                        v12, x12 = evaluate("12", m1, m2, w12)
                    except ResonanceError as err:
                        entries.append(
                            TermEntry(v_21=np.nan, v_12=np.nan, v_sym=np.nan,
                                      status=f"resonance: {err}", **base)
                        )
                        continue
                    entries.append(
                        TermEntry(
                            v_21=v21, v_12=v12, v_sym=0.5 * (v21 + v12),
                            v_21_image=x21.get("image"), v_21_mode=x21.get("mode"),
                            v_12_image=x12.get("image"), v_12_mode=x12.get("mode"),
                            tail_21=x21.get("tail"), tail_12=x12.get("tail"),
                            **base,
                        )
                    )
    return InteractionTable(entries=tuple(entries))
