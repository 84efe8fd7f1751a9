"""Local polarization measurements and count-record simulation.

Settings are pairs of single-qubit bases from {HV, DA, RL}; each setting has
four joint projective outcomes ordered (++, +-, -+, --) where "+" is the
first basis vector (H, D or R). Sampling is multinomial via inverse CDF on a
counter-based uniform stream, so a (master_seed, run_index) pair pins every
count record exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matcore, states
from .errors import DomainError
from .streams import RandomStream

HV = "HV"
DA = "DA"
RL = "RL"
BASES = (HV, DA, RL)

_KETS = {
    HV: (np.array([1.0, 0.0], dtype=complex),
         np.array([0.0, 1.0], dtype=complex)),
    DA: (np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0),
         np.array([1.0, -1.0], dtype=complex) / np.sqrt(2.0)),
    RL: (np.array([1.0, -1.0j], dtype=complex) / np.sqrt(2.0),
         np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2.0)),
}

OUTCOME_LABELS = ("pp", "pm", "mp", "mm")


def basis_kets(basis: str) -> tuple[np.ndarray, np.ndarray]:
    """(plus, minus) single-qubit kets of a basis label."""
    if basis not in _KETS:
        raise DomainError(f"unknown basis {basis!r}, expected one of {BASES}")
    return _KETS[basis]


@dataclass(frozen=True)
class Setting:
    """A joint measurement setting: one local basis per qubit."""

    basis_a: str
    basis_b: str

    def __post_init__(self):
        basis_kets(self.basis_a)
        basis_kets(self.basis_b)

    def label(self) -> str:
        return f"{self.basis_a},{self.basis_b}"

    @staticmethod
    def from_label(label: str) -> "Setting":
        parts = label.split(",")
        if len(parts) != 2:
            raise DomainError(f"bad setting label {label!r}")
        return Setting(parts[0].strip().upper(), parts[1].strip().upper())


DA_DA = Setting(DA, DA)


def setting_projectors(setting: Setting) -> list[np.ndarray]:
    """Four rank-1 joint projectors of a setting, ordered (++, +-, -+, --)."""
    ka = basis_kets(setting.basis_a)
    kb = basis_kets(setting.basis_b)
    projs = []
    for a in range(2):
        for b in range(2):
            ket = np.kron(ka[a], kb[b])
            projs.append(np.outer(ket, ket.conj()))
    return projs


@dataclass
class OutcomeProbabilities:
    """Joint outcome probabilities of one setting."""

    p_pp: float
    p_pm: float
    p_mp: float
    p_mm: float

    def as_array(self) -> np.ndarray:
        return np.array([self.p_pp, self.p_pm, self.p_mp, self.p_mm])


@dataclass
class OutcomeCounts:
    """Shot counts for one setting; components are non-negative integers."""

    n_pp: int
    n_pm: int
    n_mp: int
    n_mm: int

    def __post_init__(self):
        for label, v in zip(OUTCOME_LABELS, self.as_tuple()):
            if v < 0 or int(v) != v:
                raise DomainError(f"count n_{label}={v!r} is not a non-negative integer")

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.n_pp, self.n_pm, self.n_mp, self.n_mm)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=float)

    @property
    def n(self) -> int:
        return int(self.n_pp + self.n_pm + self.n_mp + self.n_mm)


def outcome_probabilities(rho: np.ndarray, setting: Setting) -> OutcomeProbabilities:
    """p_x = Tr(rho P_x) for the four joint projectors of a setting."""
    rho = states.validate_density_matrix(rho)
    probs = []
    for proj in setting_projectors(setting):
        val = np.trace(rho @ proj).real
        probs.append(float(np.clip(val, 0.0, 1.0)))
    total = sum(probs)
    if abs(total - 1.0) > 1e-10:
        raise DomainError(f"setting probabilities sum to {total!r}")
    return OutcomeProbabilities(*probs)


def counts_from_outcome_indices(idx: np.ndarray) -> OutcomeCounts:
    c = np.bincount(idx, minlength=4)
    return OutcomeCounts(int(c[0]), int(c[1]), int(c[2]), int(c[3]))


def _inverse_cdf_sample(probs: np.ndarray, n: int, stream: RandomStream) -> np.ndarray:
    cum = np.cumsum(probs)
    cum[-1] = 1.0  # guard round-off so every uniform lands in a bin
    u = stream.random(n)
    return np.searchsorted(cum, u, side="right").astype(np.intp)


def sample_counts(rho: np.ndarray, setting: Setting, n: int,
                  stream: RandomStream) -> OutcomeCounts:
    """n multinomial shots of a setting on a state."""
    if n < 1:
        raise DomainError(f"shot count must be >= 1, got {n}")
    probs = outcome_probabilities(rho, setting).as_array()
    return counts_from_outcome_indices(_inverse_cdf_sample(probs, n, stream))


def mix_counts(counts_pure: OutcomeCounts, counts_mix: OutcomeCounts, p: float,
               stream: RandomStream) -> OutcomeCounts:
    """Post-process two count records into a statistical mixture.

    Each output shot is drawn from the pure record's empirical distribution
    with probability p, otherwise from the mixed record's; the total is
    preserved at counts_pure.n. Resampling is shot-by-shot (with replacement)
    rather than a deterministic split, so the output carries the statistical
    character of a single mixed-state run.
    """
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"mixing weight out of range: {p!r}")
    n = counts_pure.n
    if n < 1 or counts_mix.n < 1:
        raise DomainError("cannot mix empty count records")
    cum_pure = np.cumsum(counts_pure.as_array() / counts_pure.n)
    cum_mix = np.cumsum(counts_mix.as_array() / counts_mix.n)
    cum_pure[-1] = cum_mix[-1] = 1.0
    pick_pure = stream.random(n) < p
    u = stream.random(n)
    idx = np.where(pick_pure,
                   np.searchsorted(cum_pure, u, side="right"),
                   np.searchsorted(cum_mix, u, side="right")).astype(np.intp)
    return counts_from_outcome_indices(idx)


def counts_record(counts: OutcomeCounts, setting: Setting, seed: int) -> dict:
    """JSON-friendly record of one count dataset."""
    return {
        "setting": setting.label(),
        "n_pp": counts.n_pp,
        "n_pm": counts.n_pm,
        "n_mp": counts.n_mp,
        "n_mm": counts.n_mm,
        "seed": seed,
    }


def counts_from_record(record: dict) -> tuple[OutcomeCounts, Setting]:
    try:
        counts = OutcomeCounts(int(record["n_pp"]), int(record["n_pm"]),
                               int(record["n_mp"]), int(record["n_mm"]))
        setting = Setting.from_label(record.get("setting", "DA,DA"))
    except KeyError as exc:
        raise DomainError(f"counts record missing key {exc}") from exc
    return counts, setting
