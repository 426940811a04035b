"""Metropolis-within-Gibbs sampling of the perturbed Laguerre eigenvalue law.

Each coordinate is updated by a Gaussian random walk in log x, which keeps
points positive and handles the essential singularity at the origin.  In
x-measure the proposal is not symmetric; the log-Jacobian log(y/x) enters
the acceptance ratio.  Independent chains are advanced together as rows of
one array.

Random streams come from numpy's PCG64 bit generator seeded through
SeedSequence; chain c always uses the c-th spawned child, so a chain's
stream does not depend on how many chains run beside it.
"""

from dataclasses import dataclass

import mpmath as mp
import numpy as np
from scipy import stats

from .orthopoly import PerturbedWeight, build_op_system, cd_kernel


class MCDiagnosticError(RuntimeError):
    pass


@dataclass(frozen=True)
class Params:
    n: int
    k: int = 1
    alpha: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        if self.n < 1 or self.k < 1 or self.alpha <= -1 or self.t < 0:
            raise ValueError("invalid ensemble parameters")


def log_weight(x, p):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        pole = (p.t / x) ** p.k if p.t else 0.0
        return p.alpha * np.log(x) - p.n * (x + pole)


def log_joint_density(x, p):
    """Unnormalized log density; -inf for coincident or non-positive points."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        return -np.inf
    diff = np.abs(x[:, None] - x[None, :])[np.triu_indices(len(x), 1)]
    if np.any(diff == 0):
        return -np.inf
    return float(2 * np.sum(np.log(diff)) + np.sum(log_weight(x, p)))


def accept(log_ratio, u):
    """Metropolis rule shared by every sampler in this module."""
    return np.log(u) < log_ratio


def _generators(seed, chains):
    return [np.random.Generator(np.random.PCG64(s))
            for s in np.random.SeedSequence(seed).spawn(chains)]


def _draws(gens, n):
    z = np.stack([g.standard_normal(n) for g in gens])
    u = np.stack([g.random(n) for g in gens])
    return z, u


def _log_density_change(x, i, y, p):
    """log pi(x with x_i -> y) - log pi(x) for every chain."""
    xi = x[:, i]
    others = np.delete(x, i, axis=1)
    with np.errstate(divide="ignore"):
        rep = np.log(np.abs(y[:, None] - others)) - np.log(np.abs(xi[:, None] - others))
    return 2 * rep.sum(axis=1) + log_weight(y, p) - log_weight(xi, p)


def _sweep(x, logd, p, scale, gens):
    z, u = _draws(gens, x.shape[1])
    acc = np.zeros(x.shape[0], dtype=int)
    for i in range(x.shape[1]):
        # overflowing proposals give inf/nan ratios and are rejected
        with np.errstate(over="ignore", invalid="ignore"):
            y = x[:, i] * np.exp(scale * z[:, i])
            d = _log_density_change(x, i, y, p)
            ok = accept(d + scale * z[:, i], u[:, i]) & np.isfinite(d)
        x[ok, i] = y[ok]
        logd[ok] += d[ok]
        acc += ok
    return acc


@dataclass
class ChainResult:
    samples: np.ndarray      # (chains, kept sweeps, n)
    acceptance: float
    proposal_scale: float
    seed: int
    burn_in: int
    log_density: np.ndarray  # cached value per chain at the end

    @property
    def eigenvalues(self):
        return self.samples.reshape(-1)

    @property
    def n_configs(self):
        return self.samples.shape[0] * self.samples.shape[1]


def initial_state(p, chains):
    """Deterministic start: spread points over the bulk (0, 4)."""
    base = 4.0 * (np.arange(1, p.n + 1) - 0.5) / p.n
    return np.tile(base, (chains, 1))


def mh_chain(p, sweeps, seed=0, proposal_scale=None, chains=1, burn_in=None,
             target=0.3, window=200, check_every=1000):
    """Run ``chains`` independent chains for ``sweeps`` kept sweeps each.

    With ``proposal_scale=None`` the scale is tuned toward ``target``
    acceptance during burn-in only, then frozen.  Burn-in defaults to 20%
    of ``sweeps``.  A window of ``window`` sweeps with no accepted move
    raises :class:`MCDiagnosticError`.
    """
    if sweeps < 1:
        raise ValueError("sweeps must be positive")
    if proposal_scale is not None and not proposal_scale > 0:
        raise ValueError("proposal_scale must be positive")
    burn_in = int(0.2 * sweeps) if burn_in is None else int(burn_in)
    if burn_in < 0:
        raise ValueError("burn_in must be non-negative")
    gens = _generators(seed, chains)
    x = initial_state(p, chains)
    logd = np.array([log_joint_density(row, p) for row in x])
    scale = 0.5 / np.sqrt(p.n) if proposal_scale is None else float(proposal_scale)
    tune = proposal_scale is None
    out = np.empty((chains, sweeps, p.n))
    recent, moves, accepted = 0, 0, 0
    for it in range(burn_in + sweeps):
        acc = _sweep(x, logd, p, scale, gens)
        recent += int(acc.sum())
        if (it + 1) % window == 0:
            if recent == 0:
                raise MCDiagnosticError(
                    f"no move accepted in {window} sweeps (scale {scale:.3g})")
            if tune and it < burn_in:
                rate = recent / (window * chains * p.n)
                scale *= np.exp(rate - target)
            recent = 0
        if it >= burn_in:
            out[:, it - burn_in] = x
            moves += chains * p.n
            accepted += int(acc.sum())
        if (it + 1) % check_every == 0:
            fresh = np.array([log_joint_density(row, p) for row in x])
            if np.max(np.abs(fresh - logd)) > 1e-10 * max(1.0, np.max(np.abs(fresh))):
                raise MCDiagnosticError("cached log density drifted from recomputation")
            logd = fresh
    return ChainResult(out, accepted / max(moves, 1), scale, seed, burn_in, logd)


def discrete_metropolis(log_p, steps, seed=0):
    """Two-state Metropolis chain (proposal: flip), for detailed-balance checks.

    Returns (visits, flows) where flows[a, b] counts a -> b moves.
    """
    log_p = np.asarray(log_p, float)
    g = np.random.Generator(np.random.PCG64(seed))
    u = g.random(steps)
    state, visits, flows = 0, np.zeros(2, int), np.zeros((2, 2), int)
    for j in range(steps):
        other = 1 - state
        if accept(log_p[other] - log_p[state], u[j]):
            flows[state, other] += 1
            state = other
        visits[state] += 1
    return visits, flows


# ---------------------------------------------------------------------------
# exact one-point function

class ExactDensity:
    """K_n(x, x) for the perturbed weight, from the orthopoly module."""

    def __init__(self, p, prec=50):
        self.p = p
        self.prec = prec
        w = PerturbedWeight("pLUE", p.n, p.k, p.alpha, p.t, prec=prec)
        self.sys = build_op_system(w, p.n, verify=False)

    def __call__(self, x):
        return cd_kernel(self.sys, self.p.n, x, x)

    def mass(self, a, b):
        """int_a^b K_n(x, x) dx (b may be inf)."""
        with mp.workdps(self.prec):
            pts = [a, b] if b != mp.inf else [a, a + 1, a + 4, mp.inf]
            return float(mp.quad(self, pts))


def _bins(exact, edges):
    return np.array([exact.mass(a, b) for a, b in zip(edges[:-1], edges[1:])])


def default_edges(p, bins=24, xmax=4.5):
    return np.concatenate([np.linspace(0.0, xmax, bins + 1), [np.inf]])


@dataclass
class DensityComparison:
    chi2: float
    dof: int
    p_value: float
    inflation: float
    observed: np.ndarray
    expected: np.ndarray


def density_compare(result, p, edges=None, batches=50, min_expected=5.0,
                    min_samples=100_000, exact=None):
    """Chi-square test of the eigenvalue histogram against K_n(x, x).

    Serial correlation inflates count variances; the inflation factor is
    estimated by batch means and divides the Pearson statistic.
    """
    if result.n_configs < min_samples:
        raise ValueError(f"need at least {min_samples} configurations, got {result.n_configs}")
    edges = default_edges(p) if edges is None else np.asarray(edges, float)
    exact = exact or ExactDensity(p)
    probs = _bins(exact, edges) / p.n
    # merge sparse bins into their right neighbour
    keep = []
    acc_edges = [edges[0]]
    total = result.eigenvalues.size
    run = 0.0
    for j, pr in enumerate(probs):
        run += pr
        if run * total >= min_expected or j == len(probs) - 1:
            acc_edges.append(edges[j + 1])
            keep.append(run)
            run = 0.0
    edges = np.array(acc_edges)
    probs = np.array(keep)
    per_chain = result.samples.shape[1]
    if per_chain < batches:
        raise ValueError("too few sweeps per chain for batch means")
    counts = []
    for c in range(result.samples.shape[0]):
        for chunk in np.array_split(result.samples[c], batches):
            counts.append(np.histogram(chunk.reshape(-1), edges)[0])
    counts = np.array(counts, float)
    observed = counts.sum(axis=0)
    expected = probs / probs.sum() * total
    m = counts.shape[0]
    var_obs = m * counts.var(axis=0, ddof=1)
    iid = expected * (1 - probs / probs.sum())
    inflation = float(np.mean(var_obs / iid))
    chi2 = float(np.sum((observed - expected) ** 2 / expected)) / inflation
    dof = len(observed) - 1
    return DensityComparison(chi2, dof, float(stats.chi2.sf(chi2, dof)), inflation,
                             observed, expected)


def hard_edge_mass(result, x0=0.02):
    """Fraction of all sampled eigenvalues below x0."""
    return float(np.mean(result.eigenvalues < x0))


def exact_hard_edge_mass(p, x0=0.02, prec=50):
    return ExactDensity(p, prec).mass(0, x0) / p.n


def histogram_rows(result, edges):
    counts, edges = np.histogram(result.eigenvalues, edges)
    yield ["left", "right", "count"]
    for a, b, c in zip(edges[:-1], edges[1:], counts):
        yield [repr(float(a)), repr(float(b)), str(int(c))]
