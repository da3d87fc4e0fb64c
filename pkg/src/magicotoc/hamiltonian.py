"""Transverse-field Ising chain and the Clifford-sandwich magic scan."""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .magic import choi_state, stabilizer_renyi_entropy
from .otoc import delta_otoc, m2_error, m2_from_delta, sample_otoc
from .tensor import DENSE_CAP, CapExceededError

_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_Z = np.diag([1.0, -1.0]).astype(np.complex128)


@dataclass(frozen=True)
class TfimParams:
    n_sites: int
    j_coupling: float = 1.0
    h_field: float = 0.5

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValueError("the chain needs at least two sites")


def _embed(ops: dict, n: int) -> np.ndarray:
    return reduce(np.kron, [ops.get(i, np.eye(2, dtype=np.complex128)) for i in range(n)])


def build_tfim(params: TfimParams, cap: int = DENSE_CAP) -> np.ndarray:
    """``H = -J sum_i Z_i Z_{i+1} - h sum_i X_i`` on an open chain."""
    n = params.n_sites
    if 2**n > cap:
        raise CapExceededError(f"2^{n} exceeds the dense cap {cap}")
    h = np.zeros((2**n, 2**n), dtype=np.complex128)
    for i in range(n - 1):
        h -= params.j_coupling * _embed({i: _Z, i + 1: _Z}, n)
    for i in range(n):
        h -= params.h_field * _embed({i: _X}, n)
    return h


def evolution_unitary(h: np.ndarray, t: float, atol: float = 1e-10) -> np.ndarray:
    """``exp(-i h t)`` from the Hermitian eigendecomposition."""
    h = np.asarray(h, dtype=np.complex128)
    if np.max(np.abs(h - h.conj().T)) > atol:
        raise ValueError("Hamiltonian is not Hermitian")
    evals, evecs = np.linalg.eigh(h)
    return (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T


@dataclass
class EvolutionScanResult:
    times: np.ndarray
    delta: np.ndarray
    delta_err: np.ndarray
    m2_exact: np.ndarray
    m2_estimate: np.ndarray
    m2_err: np.ndarray
    n_sites: int

    def __post_init__(self):
        n = len(self.times)
        for name in ("delta", "delta_err", "m2_exact", "m2_estimate", "m2_err"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} has the wrong length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def m2_per_site_exact(self) -> np.ndarray:
        return self.m2_exact / self.n_sites

    def rows(self):
        for i, t in enumerate(self.times):
            yield {
                "time": t,
                "delta": self.delta[i],
                "delta_err": self.delta_err[i],
                "m2_exact": self.m2_exact[i],
                "m2_per_site_exact": self.m2_exact[i] / self.n_sites,
                "m2_estimate": self.m2_estimate[i],
                "m2_err": self.m2_err[i],
            }


def default_times(j_coupling: float = 1.0, n_points: int = 30) -> np.ndarray:
    return np.linspace(0.0, 3.0 / j_coupling, n_points)


def magic_evolution_scan(
    params: TfimParams,
    times,
    n_samples: int = 50,
    clifford_depth: int = 10,
    master_seed: int = 0,
    sampler_mode: str = "clifford-circuit",
    a_site: int | None = None,
    b_site: int | None = None,
    workers: int = 1,
) -> EvolutionScanResult:
    """Exact Choi-state M2 of ``exp(-iHt)`` against the OTOC-fluctuation estimate.

    Time point i samples fresh Clifford dressings from streams
    ``(master_seed, i, k)``.
    """
    n = params.n_sites
    if 2 * n > 12:
        raise CapExceededError("the Choi register of 2N qubits exceeds the Pauli enumeration cap")
    times = np.asarray(times, dtype=np.float64)
    h = build_tfim(params)
    d = 2**n
    out = {k: np.empty(times.size) for k in ("delta", "delta_err", "m2_exact", "m2_est", "m2_err")}
    for i, t in enumerate(times):
        u = evolution_unitary(h, t)
        out["m2_exact"][i] = stabilizer_renyi_entropy(choi_state(u))
        samples = sample_otoc(
            u,
            n_samples,
            sampler_mode,
            master_seed,
            clifford_depth,
            a_site,
            b_site,
            q=2,
            workers=workers,
            stream_keys=(i,),
        )
        est = delta_otoc(samples)
        out["delta"][i] = est.delta
        out["delta_err"][i] = est.delta_std_err
        out["m2_est"][i] = m2_from_delta(est.delta, d)
        out["m2_err"][i] = m2_error(est.delta_std_err, est.delta, d)
    return EvolutionScanResult(
        times, out["delta"], out["delta_err"], out["m2_exact"], out["m2_est"], out["m2_err"], n
    )
