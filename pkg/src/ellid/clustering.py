"""Point-cloud clustering without a known cluster count.

The main fitter is a variational Gaussian mixture: a Dirichlet prior on
the mixing weights and a Normal-Wishart prior on each component's mean
and precision, optimized by mean-field coordinate ascent on the
evidence lower bound (ELBO). Over-provisioned components lose expected
weight during the fit and are pruned after convergence, so only an
upper bound on the number of clusters is required.

k-means and DBSCAN fitters with the same result type are provided as
comparison baselines.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma, gammaln, logsumexp

_DIM = 2
_LOG_2PI = np.log(2.0 * np.pi)


class EmptyInput(ValueError):
    """Clustering requires at least one point."""


@dataclass(frozen=True)
class VigmmConfig:
    n_max: int = 30                       # component budget
    dirichlet_alpha0: float | None = None  # None -> 1 / n_max
    mean_prior_scale: float = 1.0          # beta0
    wishart_dof: float = 3.0               # nu0, must exceed d - 1
    wishart_scale: np.ndarray | None = None  # W0; None -> I / (nu0 * data variance)
    elbo_tol: float = 1e-4                 # relative ELBO change at convergence
    max_iters: int = 200
    weight_prune_threshold: float = 1e-2
    seed: int = 0

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be at least 1")
        if self.wishart_dof <= _DIM - 1:
            raise ValueError("wishart_dof must exceed dimension - 1")
        if not (0 < self.weight_prune_threshold < 1):
            raise ValueError("weight_prune_threshold must lie in (0, 1)")


@dataclass(frozen=True, eq=False)
class MixtureComponent:
    weight: float
    mean: np.ndarray        # (2,)
    covariance: np.ndarray  # (2, 2) SPD


@dataclass(frozen=True, eq=False)
class VigmmPosterior:
    """Variational posterior over the surviving components."""

    alpha: np.ndarray  # Dirichlet concentrations, (J,)
    beta: np.ndarray   # mean precision scales, (J,)
    mean: np.ndarray   # posterior means, (J, 2)
    dof: np.ndarray    # Wishart degrees of freedom, (J,)
    scale: np.ndarray  # Wishart scale matrices, (J, 2, 2)


@dataclass(frozen=True, eq=False)
class ClusterResult:
    components: list[MixtureComponent]
    assignments: np.ndarray       # (n,) index into components
    elbo_trace: np.ndarray        # objective after each iteration
    iterations: int
    posterior: VigmmPosterior | None = None

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.components])

    @property
    def means(self) -> np.ndarray:
        return np.array([c.mean for c in self.components])


def fit_vigmm(points, cfg: VigmmConfig = VigmmConfig()) -> ClusterResult:
    """Fit the variational Gaussian mixture and prune weak components.

    The ELBO trace is nondecreasing up to numerical slack; convergence
    is declared when the relative ELBO change drops below
    ``cfg.elbo_tol`` or ``cfg.max_iters`` is reached. Components whose
    expected weight falls below ``max(threshold, 2/n)`` are dropped
    before the final hard assignment; at least one always survives.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, _DIM)
    n = len(pts)
    if n == 0:
        raise EmptyInput("no points to cluster")

    j = max(1, min(cfg.n_max, n))
    alpha0 = cfg.dirichlet_alpha0 if cfg.dirichlet_alpha0 is not None else 1.0 / cfg.n_max
    beta0 = cfg.mean_prior_scale
    nu0 = cfg.wishart_dof
    m0 = pts.mean(axis=0)
    if cfg.wishart_scale is not None:
        w0 = np.asarray(cfg.wishart_scale, dtype=float).reshape(_DIM, _DIM)
    else:
        var = float(np.trace(np.atleast_2d(np.cov(pts.T)))) / _DIM if n > 1 else 0.0
        if var < 1e-12:
            var = 1.0  # degenerate spread; fall back to unit prior scale
        w0 = np.eye(_DIM) / (nu0 * var)
    w0_inv = np.linalg.inv(w0)
    _, w0_logdet = np.linalg.slogdet(w0)

    rng = np.random.default_rng(cfg.seed)
    centers = _kmeans_pp_init(pts, j, rng)
    labels = np.argmin(((pts[:, None, :] - centers[None]) ** 2).sum(-1), axis=1)
    resp = np.zeros((n, j))
    resp[np.arange(n), labels] = 1.0

    elbo_trace: list[float] = []
    prev_elbo = -np.inf
    alpha = beta = mean = dof = scale = None
    iterations = 0
    for iterations in range(1, cfg.max_iters + 1):
        alpha, beta, mean, dof, scale = _m_step(
            pts, resp, alpha0, beta0, nu0, m0, w0_inv)
        log_rho = _log_resp_unnormalized(pts, alpha, beta, mean, dof, scale)
        lse = logsumexp(log_rho, axis=1)
        resp = np.exp(log_rho - lse[:, None])
        elbo = float(
            lse.sum()
            - _kl_dirichlet(alpha, alpha0)
            - _kl_normal_wishart(mean, beta, scale, dof,
                                 m0, beta0, w0_inv, w0_logdet, nu0)
        )
        elbo_trace.append(elbo)
        if np.isfinite(prev_elbo) and abs(elbo - prev_elbo) <= cfg.elbo_tol * (1.0 + abs(elbo)):
            break
        prev_elbo = elbo

    weights = alpha / alpha.sum()
    threshold = max(cfg.weight_prune_threshold, 2.0 / n)
    keep = np.flatnonzero(weights >= threshold)
    if keep.size == 0:
        keep = np.array([int(np.argmax(weights))])

    posterior = VigmmPosterior(alpha[keep], beta[keep], mean[keep],
                               dof[keep], scale[keep])
    resp_kept = responsibilities(pts, posterior)
    assignments = resp_kept.argmax(axis=1)
    surv_w = weights[keep]
    surv_w = surv_w / surv_w.sum()
    covariances = np.linalg.inv(posterior.dof[:, None, None] * posterior.scale)
    components = [
        MixtureComponent(float(surv_w[i]), posterior.mean[i], covariances[i])
        for i in range(keep.size)
    ]
    return ClusterResult(components, assignments, np.array(elbo_trace),
                         iterations, posterior)


def responsibilities(points, posterior: VigmmPosterior) -> np.ndarray:
    """Per-point membership probabilities under the fitted posterior."""
    pts = np.asarray(points, dtype=float).reshape(-1, _DIM)
    log_rho = _log_resp_unnormalized(pts, posterior.alpha, posterior.beta,
                                     posterior.mean, posterior.dof,
                                     posterior.scale)
    return np.exp(log_rho - logsumexp(log_rho, axis=1)[:, None])


def kmeans_baseline(points, k: int, seed: int = 0,
                    max_iters: int = 100) -> ClusterResult:
    """Lloyd iterations from a k-means++ start; deterministic given seed."""
    pts = np.asarray(points, dtype=float).reshape(-1, _DIM)
    n = len(pts)
    if k < 1 or n < k:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_init(pts, k, rng)
    labels = np.zeros(n, dtype=int)
    trace: list[float] = []
    for it in range(1, max_iters + 1):
        d2 = ((pts[:, None, :] - centers[None]) ** 2).sum(-1)
        new_labels = d2.argmin(axis=1)
        sse = float(d2[np.arange(n), new_labels].sum())
        trace.append(-sse)
        for c in range(k):  # reseed empty clusters at the worst-fit point
            if not np.any(new_labels == c):
                far = int(d2[np.arange(n), new_labels].argmax())
                new_labels[far] = c
        if it > 1 and np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels
        for c in range(k):
            members = pts[labels == c]
            if len(members):
                centers[c] = members.mean(axis=0)
    return _hard_result(pts, labels, k, np.array(trace), it)


def dbscan_baseline(points, eps: float, min_pts: int) -> ClusterResult:
    """Density-connected components; noise joins its nearest cluster.

    Forcing noise points into the nearest cluster (by centroid
    distance) keeps the downstream ellipse cover total over the input.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, _DIM)
    n = len(pts)
    if n == 0:
        raise EmptyInput("no points to cluster")
    if eps <= 0 or min_pts < 1:
        raise ValueError("need eps > 0 and min_pts >= 1")

    tree = cKDTree(pts)
    neighbors = [sorted(nb) for nb in tree.query_ball_point(pts, r=eps)]
    core = np.array([len(nb) >= min_pts for nb in neighbors])
    labels = np.full(n, -1, dtype=int)
    n_clusters = 0
    for i in range(n):
        if labels[i] != -1 or not core[i]:
            continue
        labels[i] = n_clusters
        queue = [i]
        while queue:
            p = queue.pop()
            if not core[p]:
                continue
            for nb in neighbors[p]:
                if labels[nb] == -1:
                    labels[nb] = n_clusters
                    queue.append(nb)
        n_clusters += 1

    if n_clusters == 0:  # no dense core anywhere: one catch-all cluster
        labels[:] = 0
        n_clusters = 1
    noise = labels == -1
    if np.any(noise):
        centroids = np.array([pts[labels == c].mean(axis=0)
                              for c in range(n_clusters)])
        d2 = ((pts[noise][:, None, :] - centroids[None]) ** 2).sum(-1)
        labels[noise] = d2.argmin(axis=1)
    return _hard_result(pts, labels, n_clusters, np.empty(0), 1)


def _hard_result(pts: np.ndarray, labels: np.ndarray, k: int,
                 trace: np.ndarray, iterations: int) -> ClusterResult:
    n = len(pts)
    ridge = 1e-9 * max(float(pts.var()), 1.0)
    components = []
    for c in range(k):
        members = pts[labels == c]
        mean = members.mean(axis=0) if len(members) else pts.mean(axis=0)
        diff = members - mean
        cov = diff.T @ diff / max(len(members), 1) + ridge * np.eye(_DIM)
        components.append(MixtureComponent(len(members) / n, mean, cov))
    return ClusterResult(components, labels.copy(), trace, iterations)


def _kmeans_pp_init(pts: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(pts)
    centers = np.empty((k, _DIM))
    centers[0] = pts[rng.integers(n)]
    d2 = ((pts - centers[0]) ** 2).sum(-1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers[i] = pts[rng.integers(n)]
        else:
            centers[i] = pts[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, ((pts - centers[i]) ** 2).sum(-1))
    return centers


def _m_step(pts, resp, alpha0, beta0, nu0, m0, w0_inv):
    nk = resp.sum(axis=0)
    safe_nk = np.maximum(nk, 1e-300)
    xbar = (resp.T @ pts) / safe_nk[:, None]
    xbar = np.where(nk[:, None] > 1e-12, xbar, m0[None])
    diff = pts[:, None, :] - xbar[None]
    sk = np.einsum("nj,njd,nje->jde", resp, diff, diff)
    alpha = alpha0 + nk
    beta = beta0 + nk
    mean = (beta0 * m0[None] + nk[:, None] * xbar) / beta[:, None]
    dof = nu0 + nk
    dm = xbar - m0[None]
    scale_inv = (w0_inv[None] + sk
                 + (beta0 * nk / (beta0 + nk))[:, None, None]
                 * np.einsum("jd,je->jde", dm, dm))
    scale = np.linalg.inv(scale_inv)
    return alpha, beta, mean, dof, scale


def _log_resp_unnormalized(pts, alpha, beta, mean, dof, scale):
    e_log_pi = digamma(alpha) - digamma(alpha.sum())
    e_log_det = _e_log_det_precision(dof, scale)
    dx = pts[:, None, :] - mean[None]
    quad = np.einsum("njd,jde,nje->nj", dx, scale, dx)
    e_quad = _DIM / beta[None] + dof[None] * quad
    return (e_log_pi[None] + 0.5 * e_log_det[None]
            - 0.5 * _DIM * _LOG_2PI - 0.5 * e_quad)


def _e_log_det_precision(dof, scale):
    _, logdet = np.linalg.slogdet(scale)
    terms = digamma((dof[:, None] - np.arange(_DIM)[None]) / 2.0).sum(axis=1)
    return terms + _DIM * np.log(2.0) + logdet


def _log_gamma_bivariate(a):
    """log of the bivariate multivariate gamma function."""
    return 0.5 * np.log(np.pi) + gammaln(a) + gammaln(a - 0.5)


def _kl_dirichlet(alpha, alpha0):
    j = len(alpha)
    total = alpha.sum()
    return (gammaln(total) - gammaln(alpha).sum()
            - gammaln(j * alpha0) + j * gammaln(alpha0)
            + ((alpha - alpha0) * (digamma(alpha) - digamma(total))).sum())


def _kl_normal_wishart(mean, beta, scale, dof, m0, beta0, w0_inv, w0_logdet, nu0):
    """KL between posterior and prior Normal-Wishart factors, summed."""
    _, logdet_w = np.linalg.slogdet(scale)
    e_log_det = _e_log_det_precision(dof, scale)
    dm = mean - m0[None]
    quad = dof * np.einsum("jd,jde,je->j", dm, scale, dm)
    kl_gauss = 0.5 * (beta0 * quad + _DIM * beta0 / beta - _DIM
                      + _DIM * np.log(beta / beta0))
    tr = np.einsum("de,jed->j", w0_inv, scale)
    kl_wish = ((nu0 - dof) * _DIM / 2.0 * np.log(2.0)
               + nu0 / 2.0 * w0_logdet - dof / 2.0 * logdet_w
               + _log_gamma_bivariate(nu0 / 2.0)
               - _log_gamma_bivariate(dof / 2.0)
               + (dof - nu0) / 2.0 * e_log_det
               + dof / 2.0 * tr - dof * _DIM / 2.0)
    return float(kl_gauss.sum() + kl_wish.sum())
