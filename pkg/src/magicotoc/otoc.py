"""OTOC evaluation, randomized fluctuation sampling and the Choi-state M2 map.

The correlator evaluated everywhere is

    OTOC(U) = Re (1/d) tr(U^dag A^dag U B^dag U^dag A U B),

which for Hermitian qubit Paulis is the undaggered trace form.  Daggers are
kept so that qutrit clock/shift operators give OTOC = 1 for commuting A, B.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from . import gates
from .circuits import Circuit, apply_circuit_columns, build_clifford_block, circuit_unitary
from .magic import compensated_sum
from .streams import TAG_BOOTSTRAP, TAG_PROBE, stream
from .tensor import DENSE_CAP, WeylLabel, index_to_digits, omega, weyl_phase

EXACT_TRACE_MAX_DIM = 2**10
MODES = ("clifford-circuit", "pauli-twirl")


class DeltaFloorWarning(RuntimeWarning):
    """The measured fluctuation lies below what any state allows."""


# --- Weyl operators as monomial matrices ---------------------------------


@dataclass(frozen=True)
class Monomial:
    """``W |x> = phases[x] |perm[x]>``."""

    perm: np.ndarray
    phases: np.ndarray

    def left(self, m: np.ndarray) -> np.ndarray:
        """``W @ m``."""
        out = np.empty_like(m)
        out[self.perm] = self.phases[:, None] * m
        return out

    def right(self, m: np.ndarray) -> np.ndarray:
        """``m @ W``."""
        return m[:, self.perm] * self.phases[None, :]

    def adjoint(self) -> "Monomial":
        inv = np.argsort(self.perm)
        return Monomial(inv, np.conj(self.phases[inv]))

    def dense(self) -> np.ndarray:
        d = self.perm.size
        out = np.zeros((d, d), dtype=np.complex128)
        out[self.perm, np.arange(d)] = self.phases
        return out


@lru_cache(maxsize=32)
def _digit_table(q: int, n: int) -> np.ndarray:
    table = np.array([index_to_digits(x, q, n) for x in range(q**n)], dtype=np.int64)
    table = table.reshape(q**n, n)
    table.setflags(write=False)
    return table


def weyl_monomial(q: int, label: WeylLabel) -> Monomial:
    n = label.n_sites
    digits = _digit_table(q, n)
    a = np.array(label.a, dtype=np.int64)
    ap = np.array(label.a_prime, dtype=np.int64)
    moved = (digits + ap) % q
    weights = q ** np.arange(n - 1, -1, -1)
    perm = moved @ weights if n else np.zeros(1, dtype=np.int64)
    phase = complex(np.prod([weyl_phase(q, int(x), int(y)) for x, y in zip(a, ap)]))
    phases = phase * omega(q) ** ((moved @ a) % q)
    return Monomial(perm.astype(np.int64), phases.astype(np.complex128))


def butterfly_labels(n_sites: int, a_site: int, b_site: int) -> tuple:
    """A = X (shift) on ``a_site`` and B = Z (clock) on ``b_site``."""
    if a_site == b_site:
        raise ValueError("a_site and b_site must differ so that A and B commute")
    for s in (a_site, b_site):
        if not 0 <= s < n_sites:
            raise IndexError(f"site {s} out of range for {n_sites} sites")
    zero = [0] * n_sites
    ap = list(zero)
    ap[a_site] = 1
    a = list(zero)
    a[b_site] = 1
    return WeylLabel(zero, ap), WeylLabel(a, zero)


def default_sites(n_sites: int) -> tuple:
    """Butterfly on the last site, probe on site 1 (site 0 when only two sites exist)."""
    if n_sites < 2:
        raise ValueError("an OTOC needs at least two sites")
    return n_sites - 1, 1 if n_sites > 2 else 0


# --- exact evaluation -----------------------------------------------------


def otoc_dense_complex(u: np.ndarray, a_op: Monomial, b_op: Monomial) -> complex:
    d = u.shape[0]
    w = u.conj().T @ a_op.left(u)
    return complex(np.vdot(b_op.left(w), b_op.right(w))) / d


def otoc_dense(u: np.ndarray, a_op: Monomial, b_op: Monomial) -> float:
    return otoc_dense_complex(u, a_op, b_op).real


def _as_dense(u, q: int) -> np.ndarray:
    if isinstance(u, Circuit):
        return circuit_unitary(u)
    return np.asarray(u, dtype=np.complex128)


def _register(u, q: int | None) -> tuple:
    if isinstance(u, Circuit):
        return u.q, u.n_sites
    q = 2 if q is None else q
    d = np.asarray(u).shape[0]
    n = round(math.log(d, q))
    if q**n != d:
        raise ValueError(f"dimension {d} is not a power of {q}")
    return q, n


def otoc_exact(u, a_site: int, b_site: int, q: int | None = None) -> float:
    """OTOC of a circuit or dense unitary with A = X_a, B = Z_b.

    Full basis sweep for ``d <= 2**10``; larger circuits use
    :func:`otoc_stochastic`.
    """
    q, n = _register(u, q)
    a_label, b_label = butterfly_labels(n, a_site, b_site)
    d = q**n
    if d > EXACT_TRACE_MAX_DIM:
        if not isinstance(u, Circuit):
            raise ValueError("stochastic trace needs a circuit")
        return otoc_stochastic(u, a_label, b_label, stream(0, TAG_PROBE))[0]
    value = otoc_dense_complex(_as_dense(u, q), weyl_monomial(q, a_label), weyl_monomial(q, b_label))
    if q == 2 and isinstance(u, Circuit) and u.count("T") == 0 and abs(value.imag) > 1e-8:
        raise AssertionError(f"Clifford OTOC has imaginary part {value.imag}")
    return value.real


def otoc_stochastic(
    circuit: Circuit,
    a_label: WeylLabel,
    b_label: WeylLabel,
    rng: np.random.Generator,
    target_se: float = 1e-3,
    batch: int = 8,
    max_probes: int = 4096,
) -> tuple:
    """Unbiased trace estimate with random-phase probe vectors.

    Returns ``(value, standard_error, n_probes)``.  Probes are drawn until the
    standard error drops below ``target_se`` or ``max_probes`` is reached.
    """
    q, d = circuit.q, circuit.dim
    a_op = weyl_monomial(q, a_label)
    b_op = weyl_monomial(q, b_label)
    a_dag, b_dag = a_op.adjoint(), b_op.adjoint()
    samples = []
    while True:
        r = np.exp(2j * np.pi * rng.random((d, batch)))
        v = b_op.left(r)
        v = apply_circuit_columns(v, circuit)
        v = a_op.left(v)
        v = apply_circuit_columns(v, circuit, adjoint=True)
        v = b_dag.left(v)
        v = apply_circuit_columns(v, circuit)
        v = a_dag.left(v)
        v = apply_circuit_columns(v, circuit, adjoint=True)
        samples.extend((np.sum(np.conj(r) * v, axis=0).real / d).tolist())
        se = float(np.std(samples, ddof=1) / math.sqrt(len(samples)))
        if se <= target_se or len(samples) >= max_probes:
            return compensated_sum(samples) / len(samples), se, len(samples)


# --- Heisenberg propagation of Weyl labels through Clifford circuits -------


def _propagate(circuit: Circuit, label: WeylLabel, forward: bool) -> tuple:
    q, n = circuit.q, circuit.n_sites
    a = list(label.a)
    ap = list(label.a_prime)
    phase = 1.0 + 0j
    ops = circuit.ops if forward else reversed(circuit.ops)
    for op in ops:
        fwd, bwd = gates.heisenberg_tables(q, op.gate)
        dest, ph = fwd if forward else bwd
        t = op.targets
        k = len(t)
        local = 0
        for v in [a[s] for s in t] + [ap[s] for s in t]:
            local = local * q + v
        out = dest[local]
        phase *= ph[local]
        digits = index_to_digits(int(out), q, 2 * k)
        for i, s in enumerate(t):
            a[s] = digits[i]
            ap[s] = digits[k + i]
    return WeylLabel(a, ap), phase


def conjugate_forward(circuit: Circuit, label: WeylLabel) -> tuple:
    """Label and phase of ``C T C^dagger`` for a Clifford circuit C."""
    return _propagate(circuit, label, True)


def conjugate_backward(circuit: Circuit, label: WeylLabel) -> tuple:
    """Label and phase of ``C^dagger T C`` for a Clifford circuit C."""
    return _propagate(circuit, label, False)


# --- sampling --------------------------------------------------------------


@dataclass
class OtocSampleSet:
    values: np.ndarray
    sampler_mode: str
    master_seed: int
    n_samples: int
    a_site: int
    b_site: int
    q: int = 2
    n_sites: int = 0
    stream_keys: tuple = ()

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.size != self.n_samples:
            raise ValueError("n_samples does not match the number of values")
        if np.any(np.abs(self.values) > 1 + 1e-9):
            raise ValueError("OTOC values must lie in [-1, 1]")

    @property
    def dim(self) -> int:
        return self.q**self.n_sites


def random_nonidentity_label(q: int, n_sites: int, rng: np.random.Generator) -> WeylLabel:
    idx = int(rng.integers(1, q ** (2 * n_sites)))
    return WeylLabel.from_index(idx, q, n_sites)


def _one_sample(v_dense, q, n, k, mode, master_seed, depth, a_label, b_label, keys=()):
    rng = stream(master_seed, *keys, k)
    if mode == "clifford-circuit":
        c1 = build_clifford_block(q, n, depth, rng)
        c2 = build_clifford_block(q, n, depth, rng)
        p, _ = conjugate_backward(c1, a_label)
        p_prime, _ = conjugate_forward(c2, b_label)
    elif mode == "pauli-twirl":
        p = random_nonidentity_label(q, n, rng)
        p_prime = random_nonidentity_label(q, n, rng)
    else:
        raise ValueError(f"unknown sampler mode {mode!r}; expected one of {MODES}")
    return otoc_dense(v_dense, weyl_monomial(q, p), weyl_monomial(q, p_prime))


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def sample_otoc(
    v,
    n_samples: int,
    sampler_mode: str = "clifford-circuit",
    master_seed: int = 0,
    clifford_depth: int = 10,
    a_site: int | None = None,
    b_site: int | None = None,
    q: int | None = None,
    workers: int = 1,
    stream_keys: tuple = (),
) -> OtocSampleSet:
    """OTOC values of ``U = C1 V C2`` for random Clifford dressings of a fixed V.

    ``clifford-circuit`` draws C1 then C2 as depth-``clifford_depth`` blocks
    from stream ``(master_seed, *stream_keys, k)``; the butterfly and probe
    operators are pushed through the blocks exactly, leaving
    ``Re tr(V^dag P^dag V P'^dag V^dag P V P') / d``.  ``pauli-twirl``
    draws P and P' uniformly from the non-identity Weyl strings instead.
    """
    if n_samples < 2:
        raise ValueError("need at least two samples")
    if sampler_mode not in MODES:
        raise ValueError(f"unknown sampler mode {sampler_mode!r}; expected one of {MODES}")
    q, n = _register(v, q)
    da, db = default_sites(n)
    a_site = da if a_site is None else a_site
    b_site = db if b_site is None else b_site
    a_label, b_label = butterfly_labels(n, a_site, b_site)
    v_dense = _as_dense(v, q)
    if v_dense.shape[0] > DENSE_CAP:
        raise ValueError("V exceeds the dense cap")

    def fn(k):
        return _one_sample(
            v_dense, q, n, k, sampler_mode, master_seed, clifford_depth, a_label, b_label, stream_keys
        )

    values = _map(fn, range(n_samples), workers)
    return OtocSampleSet(
        np.array(values), sampler_mode, master_seed, n_samples, a_site, b_site, q, n,
        tuple(stream_keys),
    )


def sample_otoc_ensemble(
    v_factory: Callable[[int], Circuit],
    n_samples: int,
    sampler_mode: str = "clifford-circuit",
    master_seed: int = 0,
    clifford_depth: int = 10,
    a_site: int | None = None,
    b_site: int | None = None,
    workers: int = 1,
    stream_keys: tuple = (),
) -> OtocSampleSet:
    """Like :func:`sample_otoc`, but sample k dresses its own ``v_factory(k)``.

    The variance of these values estimates the ensemble average of the
    fluctuation, since the Clifford-averaged OTOC does not depend on V.
    """
    if n_samples < 2:
        raise ValueError("need at least two samples")
    if sampler_mode not in MODES:
        raise ValueError(f"unknown sampler mode {sampler_mode!r}; expected one of {MODES}")
    probe = v_factory(0)
    q, n = probe.q, probe.n_sites
    da, db = default_sites(n)
    a_site = da if a_site is None else a_site
    b_site = db if b_site is None else b_site
    a_label, b_label = butterfly_labels(n, a_site, b_site)

    def fn(k):
        v_dense = circuit_unitary(probe if k == 0 else v_factory(k))
        return _one_sample(
            v_dense, q, n, k, sampler_mode, master_seed, clifford_depth, a_label, b_label, stream_keys
        )

    values = _map(fn, range(n_samples), workers)
    return OtocSampleSet(
        np.array(values), sampler_mode, master_seed, n_samples, a_site, b_site, q, n,
        tuple(stream_keys),
    )


def exhaustive_twirl(v, q: int | None = None) -> np.ndarray:
    """OTOC for every ordered pair of non-identity Weyl strings (P, P')."""
    q, n = _register(v, q)
    v_dense = _as_dense(v, q)
    count = q ** (2 * n)
    mons = [weyl_monomial(q, WeylLabel.from_index(i, q, n)) for i in range(1, count)]
    out = np.empty((count - 1, count - 1))
    for i, p in enumerate(mons):
        w = v_dense.conj().T @ p.left(v_dense)
        for j, pp in enumerate(mons):
            out[i, j] = np.vdot(pp.left(w), pp.right(w)).real / v_dense.shape[0]
    return out


# --- statistics and the Choi-state M2 map ----------------------------------


@dataclass(frozen=True)
class DeltaEstimate:
    mean_otoc: float
    delta: float
    delta_std_err: float
    m2_estimate: float
    m2_err: float

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be non-negative")
        if not self.m2_err >= 0 and not math.isnan(self.m2_err):
            raise ValueError("m2_err must be non-negative")


def plugin_variance(values) -> tuple:
    """Population mean and variance ``mean(v^2) - mean(v)^2``."""
    v = np.asarray(values, dtype=np.float64)
    n = v.size
    mean = compensated_sum(v) / n
    second = compensated_sum(v * v) / n
    return mean, max(0.0, second - mean * mean)


def bootstrap_delta_se(values, n_boot: int, rng: np.random.Generator) -> float:
    v = np.asarray(values, dtype=np.float64)
    idx = rng.integers(v.size, size=(n_boot, v.size))
    res = v[idx]
    deltas = np.mean(res * res, axis=1) - np.mean(res, axis=1) ** 2
    return float(np.std(deltas, ddof=1))


def delta_otoc(samples: OtocSampleSet, n_boot: int = 200) -> DeltaEstimate:
    if samples.n_samples < 2:
        raise ValueError("need at least two samples")
    mean, delta = plugin_variance(samples.values)
    se = bootstrap_delta_se(samples.values, n_boot, stream(samples.master_seed, TAG_BOOTSTRAP, *samples.stream_keys))
    if samples.q == 2 and samples.n_sites > 0:
        d = samples.dim
        m2 = m2_from_delta(delta, d)
        err = m2_error(se, delta, d)
    else:
        m2 = err = float("nan")
    return DeltaEstimate(mean, delta, se, m2, err)


def _beta(d: float) -> float:
    return 2 * d * d / (d * d - 1) ** 2


def _alpha(d: float) -> float:
    return (d * d / (d * d - 1)) ** 2


def delta_from_m2(m2: float, d: float) -> float:
    """Clifford-averaged fluctuation predicted from the Choi-state M2."""
    return _alpha(d) * 2.0 ** (-m2) - _beta(d)


def m2_from_delta(delta: float, d: float) -> float:
    """Inverse of :func:`delta_from_m2`; NaN (with a warning) below the floor."""
    arg = (delta + _beta(d)) / _alpha(d)
    if not arg > 0:
        warnings.warn(
            f"delta={delta} below theoretical floor for d={d}", DeltaFloorWarning, stacklevel=2
        )
        return float("nan")
    return -math.log2(arg)


def m2_error(delta_err: float, delta_mean: float, d: float) -> float:
    """``|dM2/d delta| * delta_err = delta_err / ((delta + beta) ln 2)``."""
    denom = (delta_mean + _beta(d)) * math.log(2)
    if not denom > 0:
        raise ValueError("delta_mean + beta must be positive")
    return abs(delta_err) / denom


# --- analytic t-doped references -------------------------------------------

F_NORM = 4.0
F_NORM_PRINTED = 5.0


def _check_d(d: float) -> None:
    if d <= 3:
        raise ValueError(f"the t-doped formula has a pole at d = 3 and needs d > 3, got {d}")


def f_pm(d: float, norm: float = F_NORM) -> tuple:
    """``f_(+/-) = (3d^2 -/+ 3d - 4) / (norm (d^2 - 1))``.

    ``norm = 4`` makes one T gate reproduce M2 = log2(4/3) and the large-d
    decay (3/4)^t; ``norm = 5`` is the variant with a 5 in the denominator.
    """
    base = norm * (d * d - 1)
    return (3 * d * d - 3 * d - 4) / base, (3 * d * d + 3 * d - 4) / base


def expected_delta_tdoped(d: float, t: int, norm: float = F_NORM) -> float:
    """Average fluctuation over t-doped Clifford circuits of dimension d."""
    _check_d(d)
    if t < 0:
        raise ValueError("t must be >= 0")
    fp, fm = f_pm(d, norm)
    d2 = d * d
    inner = (
        (d + 2) * (d + 4) * fp**t / (6 * d * (d + 3))
        + (d - 2) * (d - 4) * fm**t / (6 * d * (d - 3))
        + 2 * (d2 - 4) * ((fp + fm) / 2) ** t / (3 * d2)
    )
    bracket = 4 * (6 - 9 * d2 + d2 * d2) / (d2 * d2 * (d2 - 9)) + (d2 - 1) / d2 * inner
    return d2 * d2 / (d2 - 1) ** 2 * bracket - 2 * d2 / (d2 - 1) ** 2


def asymptotic_delta(t: int) -> float:
    return 0.75**t


def m2_bounds_tdoped(d: float, n_sites: int, t: int, norm: float = F_NORM) -> tuple:
    """(lower, upper) bounds on the average state M2 after t T gates."""
    _check_d(d)
    fp, _ = f_pm(d, norm)
    lower = -math.log2((4 + (d - 1) * fp**t) / (3 + d))
    return lower, float(min(t, n_sites - 1))
