"""Monte-Carlo integration of the positive-P and truncated Wigner equations.

Both representations are stepped with the Euler-Maruyama scheme (the
positive-P equations are Ito equations with multiplicative noise).
Trajectories are processed in fixed-size chunks.  Chunk ``k`` always draws
from the ``k``-th child of ``SeedSequence(seed)``, and chunk sums are reduced
in chunk order, so results depend only on ``(seed, n_traj, chunk_size)`` and
not on how many workers are used.

Ordering of the sampled moments
-------------------------------
Positive-P averages are normally ordered: ``<a^dag a> = <alpha alpha+>``.
Wigner averages are symmetrically ordered, so ``<a^dag a> = <|alpha|^2> - 1/2``.
For the quadrature combinations entering the symmetric criteria no
reordering is needed in the Wigner case: each combination
``Z = sum_j (c_j X_j + d_j Y_j)`` is a single Hermitian operator, and the
symmetrised average of ``Z^2`` equals ``<Z^2>``.  In the positive-P case the
same variance is ``<:Z^2:> + sum_j (c_j^2 + d_j^2)``, i.e. one unit of vacuum
noise is added to every diagonal quadrature entry.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .criteria import SYMMETRIC, symmetric_coefficients
from .model import SystemParams, steady_state

__all__ = [
    "Representation",
    "SdeConfig",
    "EnsembleMoments",
    "step_positive_p",
    "step_wigner",
    "sample_initial",
    "run_ensemble",
    "vijk_timeseries",
    "richardson_check",
    "N_NOISES",
]

N_NOISES = 8
_WIGNER_VARS = 4
_PP_VARS = 8


class Representation(str, enum.Enum):
    POSITIVE_P = "PositiveP"
    TRUNCATED_WIGNER = "TruncatedWigner"


@dataclass(frozen=True)
class SdeConfig:
    """Integration settings.

    ``sample_interval`` is the spacing of the recorded time grid;
    ``divergence_bound=None`` means 1e3 times the largest steady amplitude
    (but at least 1e3).
    """

    representation: Representation = Representation.TRUNCATED_WIGNER
    dt: float = 1e-3
    t_final: float = 40.0
    n_traj: int = 10_000
    seed: int = 0
    divergence_bound: float | None = None
    sample_interval: float = 0.1
    chunk_size: int = 1000
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "representation", Representation(self.representation))
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_final > 0:
            raise ValueError("t_final must be positive")
        if int(self.n_traj) < 1:
            raise ValueError("n_traj must be at least 1")
        if int(self.chunk_size) < 1:
            raise ValueError("chunk_size must be at least 1")
        if self.sample_interval < self.dt:
            raise ValueError("sample_interval must be at least dt")
        if self.divergence_bound is not None and not self.divergence_bound > 0:
            raise ValueError("divergence_bound must be positive")

    def bound_for(self, params: SystemParams) -> float:
        ss = steady_state(params)
        scale = max(1.0, float(np.max(np.abs(ss.amplitudes))))
        bound = 1e3 * scale if self.divergence_bound is None else float(self.divergence_bound)
        if bound <= scale:
            raise ValueError("divergence_bound must exceed the steady-state amplitudes")
        return bound


# --------------------------------------------------------------------------
# single steps


def step_positive_p(state: np.ndarray, params: SystemParams, dt: float, dW: np.ndarray) -> np.ndarray:
    """One Euler-Maruyama step of the positive-P equations.

    Parameters
    ----------
    state : complex array, shape (8, ...)
        ``(a1, a1+, a2, a2+, a3, a3+, b, b+)``.
    dW : real array, shape (8, ...)
        Wiener increments with variance ``dt``.
    """
    p = params
    a1, a1p, a2, a2p, a3, a3p, b, bp = state
    s1 = np.sqrt(0.5 * p.chi1 * b)
    s1p = np.sqrt(0.5 * p.chi1 * bp)
    s2 = np.sqrt(-0.5 * p.chi2 * a2p)
    s2p = np.sqrt(-0.5 * p.chi2 * a2)
    n12p = dW[0] + 1j * dW[1]
    n12m = dW[0] - 1j * dW[1]
    n34p = dW[2] + 1j * dW[3]
    n34m = dW[2] - 1j * dW[3]
    n56p = dW[4] + 1j * dW[5]
    n56m = dW[4] - 1j * dW[5]
    n78p = dW[6] + 1j * dW[7]
    n78m = dW[6] - 1j * dW[7]
    return np.stack([
        a1 + (-p.gamma1 * a1 + p.chi1 * a3p * b) * dt + s1 * n12p,
        a1p + (-p.gamma1 * a1p + p.chi1 * a3 * bp) * dt + s1p * n34p,
        a2 + (-p.gamma2 * a2 + p.chi2 * a3 * b) * dt,
        a2p + (-p.gamma2 * a2p + p.chi2 * a3p * bp) * dt,
        a3 + (-p.gamma3 * a3 + p.chi1 * a1p * b - p.chi2 * a2 * bp) * dt + s1 * n12m + s2 * n56p,
        a3p + (-p.gamma3 * a3p + p.chi1 * a1 * bp - p.chi2 * a2p * b) * dt + s1p * n34m + s2p * n78p,
        b + (p.epsilon - p.gamma0 * b - p.chi1 * a1 * a3 - p.chi2 * a2 * a3p) * dt + s2 * n56m,
        bp + (p.epsilon - p.gamma0 * bp - p.chi1 * a1p * a3p - p.chi2 * a2p * a3) * dt + s2p * n78m,
    ])


def step_wigner(state: np.ndarray, params: SystemParams, dt: float, dW: np.ndarray) -> np.ndarray:
    """One Euler-Maruyama step of the truncated Wigner equations.

    ``state`` is ``(a1, a2, a3, b)`` with shape (4, ...); ``dW`` has shape (8, ...).
    """
    p = params
    a1, a2, a3, b = state
    a1c, a3c, bc = np.conj(a1), np.conj(a3), np.conj(b)
    amp = np.sqrt(0.5 * np.array([p.gamma1, p.gamma2, p.gamma3, p.gamma0]))
    return np.stack([
        a1 + (-p.gamma1 * a1 + p.chi1 * a3c * b) * dt + amp[0] * (dW[0] + 1j * dW[1]),
        a2 + (-p.gamma2 * a2 + p.chi2 * a3 * b) * dt + amp[1] * (dW[2] + 1j * dW[3]),
        a3 + (-p.gamma3 * a3 + p.chi1 * a1c * b - p.chi2 * a2 * bc) * dt + amp[2] * (dW[4] + 1j * dW[5]),
        b + (p.epsilon - p.gamma0 * b - p.chi1 * a1 * a3 - p.chi2 * a2 * a3c) * dt
        + amp[3] * (dW[6] + 1j * dW[7]),
    ])


def sample_initial(representation, n: int, rng: np.random.Generator) -> np.ndarray:
    """Vacuum initial conditions for ``n`` trajectories.

    Wigner samples are ``(xi1 + i xi2) / 2`` per mode with standard normal
    ``xi``; the positive-P vacuum is the origin.
    """
    rep = Representation(representation)
    if rep is Representation.POSITIVE_P:
        return np.zeros((_PP_VARS, n), dtype=complex)
    xi = rng.standard_normal((2, _WIGNER_VARS, n))
    return 0.5 * (xi[0] + 1j * xi[1])


# --------------------------------------------------------------------------
# observables on recorded samples


def _observables(rep: Representation, v: np.ndarray):
    """Amplitudes, intensities and quadratures for recorded states.

    ``v`` has shape (nvar, n).  Returns complex amplitudes (4, n), raw
    intensities (4, n) and quadratures (6, n), all possibly complex in the
    positive-P case.
    """
    if rep is Representation.TRUNCATED_WIGNER:
        amps = v
        inten = (v * np.conj(v)).real
        sig = v[:3]
        quads = np.empty((6, v.shape[1]))
        quads[0::2] = 2.0 * sig.real
        quads[1::2] = 2.0 * sig.imag
        return amps, inten, quads
    a = v[0::2]
    ap = v[1::2]
    inten = a * ap
    quads = np.empty((6, v.shape[1]), dtype=complex)
    quads[0::2] = a[:3] + ap[:3]
    quads[1::2] = -1j * (a[:3] - ap[:3])
    return a, inten, quads


@dataclass
class _ChunkSums:
    count: np.ndarray          # (T,)
    amp: np.ndarray            # (T, 4) complex
    amp_abs2: np.ndarray       # (T, 4)
    inten: np.ndarray          # (T, 4)
    inten2: np.ndarray         # (T, 4)
    q: np.ndarray              # (T, 6)
    qq: np.ndarray             # (T, 6, 6)
    n_divergent: int


def _run_chunk(params: SystemParams, cfg: SdeConfig, n: int, seed_seq, bound: float,
               n_steps: int, every: int) -> _ChunkSums:
    rng = np.random.default_rng(seed_seq)
    rep = cfg.representation
    step = step_positive_p if rep is Representation.POSITIVE_P else step_wigner
    state = sample_initial(rep, n, rng)
    n_samples = n_steps // every + 1
    record = np.empty((n_samples,) + state.shape, dtype=complex)
    record[0] = state
    alive = np.ones(n, dtype=bool)
    sqdt = math.sqrt(cfg.dt)
    block = 256
    k = 0
    with np.errstate(all="ignore"):
        while k < n_steps:
            m = min(block, n_steps - k)
            noise = rng.standard_normal((m, N_NOISES, n)) * sqdt
            for j in range(m):
                state = step(state, params, cfg.dt, noise[j])
                k += 1
                if k % every == 0:
                    bad = ~np.all(np.isfinite(state) & (np.abs(state) < bound), axis=0)
                    if bad.any():
                        alive &= ~bad
                        state[:, bad] = 0.0
                    record[k // every] = state

    keep = record[:, :, alive]
    n_ok = int(alive.sum())
    T = n_samples
    sums = _ChunkSums(
        count=np.full(T, n_ok, dtype=float),
        amp=np.zeros((T, 4), dtype=complex),
        amp_abs2=np.zeros((T, 4)),
        inten=np.zeros((T, 4)),
        inten2=np.zeros((T, 4)),
        q=np.zeros((T, 6)),
        qq=np.zeros((T, 6, 6)),
        n_divergent=n - n_ok,
    )
    if n_ok == 0:
        return sums
    for t in range(T):
        amps, inten, quads = _observables(rep, keep[t])
        inten = inten.real
        sums.amp[t] = amps.sum(axis=1)
        sums.amp_abs2[t] = (np.abs(amps) ** 2).sum(axis=1)
        sums.inten[t] = inten.sum(axis=1)
        sums.inten2[t] = (inten**2).sum(axis=1)
        sums.q[t] = quads.sum(axis=1).real
        sums.qq[t] = (quads @ quads.T).real
    return sums


# --------------------------------------------------------------------------
# ensemble driver


@dataclass
class EnsembleMoments:
    """Trajectory averages on the recorded time grid.

    ``intensity`` holds normally-ordered photon numbers ``<a^dag a>`` for
    (alpha1, alpha2, alpha3, beta); ``quad_cov`` the operator covariance of
    (X1, Y1, X2, Y2, X3, Y3).  Standard errors of means and intensities are
    per-trajectory; those of covariances come from the spread over chunks.
    """

    times: np.ndarray
    representation: Representation
    mean_amplitude: np.ndarray
    amplitude_se: np.ndarray
    intensity: np.ndarray
    intensity_se: np.ndarray
    quad_mean: np.ndarray
    quad_cov: np.ndarray
    quad_cov_se: np.ndarray
    n_traj: int
    n_divergent: int
    unreliable: bool
    batch_cov: np.ndarray = field(repr=False, default=None)

    @property
    def n_used(self) -> int:
        return self.n_traj - self.n_divergent


def _covariance(rep, count, q, qq):
    mean = q / count[:, None]
    cov = qq / count[:, None, None] - mean[:, :, None] * mean[:, None, :]
    if rep is Representation.POSITIVE_P:
        cov = cov + np.eye(6)
    return mean, cov


def run_ensemble(params: SystemParams, config: SdeConfig) -> EnsembleMoments:
    """Integrate ``config.n_traj`` trajectories from vacuum and reduce moments.

    Trajectories leaving ``divergence_bound`` (or becoming non-finite) are
    excluded from all moments and counted; more than 1% divergent marks the
    result unreliable.
    """
    cfg = config
    bound = cfg.bound_for(params)
    n_steps = int(round(cfg.t_final / cfg.dt))
    every = max(1, int(round(cfg.sample_interval / cfg.dt)))
    n_steps = (n_steps // every) * every
    if n_steps == 0:
        raise ValueError("t_final shorter than one sample interval")
    times = np.arange(n_steps // every + 1) * every * cfg.dt

    sizes = [cfg.chunk_size] * (cfg.n_traj // cfg.chunk_size)
    if cfg.n_traj % cfg.chunk_size:
        sizes.append(cfg.n_traj % cfg.chunk_size)
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(sizes))

    def work(i):
        return _run_chunk(params, cfg, sizes[i], seeds[i], bound, n_steps, every)

    if cfg.workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            chunks = list(pool.map(work, range(len(sizes))))
    else:
        chunks = [work(i) for i in range(len(sizes))]

    total = chunks[0]
    acc = {name: getattr(total, name).copy() for name in
           ("count", "amp", "amp_abs2", "inten", "inten2", "q", "qq")}
    for ch in chunks[1:]:
        for name in acc:
            acc[name] += getattr(ch, name)
    n_div = sum(ch.n_divergent for ch in chunks)
    rep = cfg.representation

    with np.errstate(invalid="ignore", divide="ignore"):
        count = acc["count"]
        c = count[:, None]
        mean_amp = acc["amp"] / c
        amp_var = acc["amp_abs2"] / c - np.abs(mean_amp) ** 2
        amp_se = np.sqrt(np.maximum(amp_var, 0) / np.maximum(c - 1, 1))
        mean_int = acc["inten"] / c
        int_var = acc["inten2"] / c - mean_int**2
        int_se = np.sqrt(np.maximum(int_var, 0) / np.maximum(c - 1, 1))
        if rep is Representation.TRUNCATED_WIGNER:
            mean_int = mean_int - 0.5
        quad_mean, quad_cov = _covariance(rep, count, acc["q"], acc["qq"])

        batch = []
        for ch in chunks:
            if ch.count[0] > 1:
                batch.append(_covariance(rep, ch.count, ch.q, ch.qq)[1])
        batch = np.array(batch) if batch else np.empty((0,) + quad_cov.shape)
        if len(batch) > 1:
            cov_se = batch.std(axis=0, ddof=1) / math.sqrt(len(batch))
        else:
            cov_se = np.full_like(quad_cov, np.nan)

    return EnsembleMoments(
        times=times,
        representation=rep,
        mean_amplitude=mean_amp,
        amplitude_se=amp_se,
        intensity=mean_int,
        intensity_se=int_se,
        quad_mean=quad_mean,
        quad_cov=quad_cov,
        quad_cov_se=cov_se,
        n_traj=cfg.n_traj,
        n_divergent=n_div,
        unreliable=n_div > 0.01 * cfg.n_traj,
        batch_cov=batch,
    )


def _vijk(cov: np.ndarray) -> np.ndarray:
    coeffs = symmetric_coefficients()
    out = []
    for key in SYMMETRIC:
        cx, cy = coeffs[key]
        out.append(np.einsum("i,...ij,j->...", cx, cov, cx) + np.einsum("i,...ij,j->...", cy, cov, cy))
    return np.stack(out, axis=-1)


def vijk_timeseries(moments: EnsembleMoments, with_se: bool = False):
    """Symmetric criteria (v123, v312, v231) along the time grid.

    Returns an array of shape (T, 3); with ``with_se`` also the chunk-spread
    standard errors.
    """
    v = _vijk(moments.quad_cov)
    if not with_se:
        return v
    b = moments.batch_cov
    if b is None or len(b) < 2:
        return v, np.full_like(v, np.nan)
    vb = _vijk(b)
    return v, vb.std(axis=0, ddof=1) / math.sqrt(len(b))


def richardson_check(params: SystemParams, config: SdeConfig, n_traj: int | None = None):
    """Compare final mean intensities at steps ``dt`` and ``dt/2`` on one Brownian path.

    Returns ``(coarse, fine, extrapolated)`` intensity vectors (raw, not
    reordered) averaged over ``n_traj`` trajectories; ``extrapolated`` is the
    first-order Richardson estimate ``2 fine - coarse``.
    """
    cfg = config
    n = int(n_traj or min(cfg.n_traj, 256))
    rng = np.random.default_rng(cfg.seed)
    rep = cfg.representation
    step = step_positive_p if rep is Representation.POSITIVE_P else step_wigner
    coarse = sample_initial(rep, n, rng)
    fine = coarse.copy()
    h = 0.5 * cfg.dt
    n_steps = int(round(cfg.t_final / cfg.dt))
    with np.errstate(all="ignore"):
        for _ in range(n_steps):
            w1 = rng.standard_normal((N_NOISES, n)) * math.sqrt(h)
            w2 = rng.standard_normal((N_NOISES, n)) * math.sqrt(h)
            fine = step(step(fine, params, h, w1), params, h, w2)
            coarse = step(coarse, params, cfg.dt, w1 + w2)
    ic = _observables(rep, coarse)[1].real.mean(axis=1)
    if_ = _observables(rep, fine)[1].real.mean(axis=1)
    return ic, if_, 2 * if_ - ic

