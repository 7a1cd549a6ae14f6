"""Model profiles: layer geometry, split points, accuracy surrogates,
packet importance.

A profile describes one DNN as seen by the scheduler: per-layer MAC counts
and output feature-map geometry, the admissible split points, a fitted
accuracy surrogate per transmitting split, and per-packet importance scores
used for progressive transmission.  Layer 0 is a pseudo-layer holding the
raw input geometry (split 0 = full offload); the last split point equals the
layer count and means device-only execution (nothing transmitted).

The surrogate is Â(β) = −1/(a0·β − a1) + a2 clipped to [0, 1], with β the
fraction of packets received.  It is monotone non-decreasing on [0, 1]
whenever a0 ≥ 0 and the pole a1/a0 lies outside [0, 1]; with a1 < 0 it is
also concave, which the closed-form power result relies on.  Construction
rejects coefficients whose pole falls inside the unit interval.
"""

import math
from dataclasses import dataclass, field

import numpy as np

_POLE_MARGIN = 1e-9


@dataclass(frozen=True)
class LayerSpec:
    """One layer: MACs to compute it, and its output feature-map geometry."""
    macs: float
    out_maps: int
    map_h: int
    map_w: int

    def __post_init__(self):
        if self.macs < 0:
            raise ValueError("macs must be non-negative")
        if self.out_maps < 1 or self.map_h < 1 or self.map_w < 1:
            raise ValueError("feature geometry must be positive")


@dataclass(frozen=True)
class SurrogateCoefficients:
    a0: float
    a1: float
    a2: float
    degenerate: bool = False

    def __post_init__(self):
        if self.degenerate:
            return
        if self.a0 < 0:
            raise ValueError("a0 must be non-negative")
        if self.a1 == 0:
            raise ValueError("a1 must be non-zero")
        if self.a2 < 0:
            raise ValueError("a2 must be non-negative")
        if self.a0 > 0:
            pole = self.a1 / self.a0
            if -_POLE_MARGIN <= pole <= 1.0 + _POLE_MARGIN:
                raise ValueError(
                    "surrogate pole a1/a0 = %g inside [0, 1]; curve would "
                    "blow up at an admissible fraction" % pole
                )


def surrogate_accuracy(coeffs, beta):
    """Evaluate the accuracy surrogate at received fraction ``beta``.

    The raw curve may exceed 1 (fits are unconstrained above); the returned
    value is clipped to [0, 1].

    >>> c = SurrogateCoefficients(2.0, 2.5, 0.3)
    >>> round(surrogate_accuracy(c, 0.5), 4)
    0.9667
    """
    denom = coeffs.a0 * beta - coeffs.a1
    if denom == 0.0:
        return 1.0
    return float(min(1.0, max(0.0, -1.0 / denom + coeffs.a2)))


def surrogate_from_targets(a0, acc_zero, acc_one):
    """Concave-regime coefficients hitting Â(0)=acc_zero, Â(1)=acc_one.

    Solves a2 − 1/c = acc_zero and a2 − 1/(a0+c) = acc_one for c > 0 and
    returns SurrogateCoefficients with a1 = −c (pole left of zero, so the
    curve is concave and finite on the whole admissible range).
    """
    if a0 <= 0:
        raise ValueError("steepness a0 must be positive")
    if not 0.0 <= acc_zero < acc_one <= 1.0:
        raise ValueError("need 0 <= acc_zero < acc_one <= 1")
    delta = acc_one - acc_zero
    c = (-a0 + math.sqrt(a0 * a0 + 4.0 * a0 / delta)) / 2.0
    return SurrogateCoefficients(a0=a0, a1=-c, a2=acc_zero + 1.0 / c)


def _raw_curve(a0, a1, a2, betas):
    return -1.0 / (a0 * betas - a1) + a2


def fit_surrogate(betas, accs):
    """Least-squares fit of the surrogate to (beta, accuracy) samples.

    Coarse grid over both pole-free regimes (a1 < 0 concave, a1 > a0 convex)
    with the offset a2 solved in closed form per gridpoint, then a
    scipy.optimize.least_squares polish of the winner.  A constant sample set
    returns a flagged degenerate (flat) surrogate.

    Parameters
    ----------
    betas, accs : array_like, same length >= 3, betas in [0, 1].
    """
    from scipy.optimize import least_squares

    betas = np.asarray(betas, dtype=float)
    accs = np.asarray(accs, dtype=float)
    if betas.shape != accs.shape or betas.ndim != 1 or betas.size < 3:
        raise ValueError("need matching 1-d arrays with at least 3 samples")
    if betas.min() < 0.0 or betas.max() > 1.0:
        raise ValueError("betas must lie in [0, 1]")

    if np.ptp(accs) < 1e-12:
        level = float(accs[0])
        if level > 1e-9:
            return SurrogateCoefficients(0.0, 1.0 / level, 0.0, degenerate=True)
        return SurrogateCoefficients(0.0, 1e12, 0.0, degenerate=True)

    def sse(a0, a1):
        pred = -1.0 / (a0 * betas - a1)
        a2 = float(np.mean(accs - pred))
        r = pred + a2 - accs
        return float(r @ r), a2

    best = None
    a0_grid = np.logspace(-2, 3, 60)
    for a0 in a0_grid:
        for c in np.logspace(-3, 3, 60):          # concave: a1 = -c
            err, a2 = sse(a0, -c)
            if best is None or err < best[0]:
                best = (err, a0, -c, a2)
        for m in np.logspace(-3, 2, 40):           # convex: pole at 1 + m
            a1 = a0 * (1.0 + m)
            err, a2 = sse(a0, a1)
            if err < best[0]:
                best = (err, a0, a1, a2)

    _, a0_0, a1_0, a2_0 = best
    concave = a1_0 < 0

    def resid(theta):
        la0, lx, a2 = theta
        a0 = math.exp(la0)
        a1 = -math.exp(lx) if concave else a0 * (1.0 + math.exp(lx))
        return _raw_curve(a0, a1, a2, betas) - accs

    x0 = [math.log(a0_0),
          math.log(-a1_0) if concave else math.log(a1_0 / a0_0 - 1.0),
          a2_0]
    sol = least_squares(resid, x0, method="lm", xtol=1e-15, ftol=1e-15)
    la0, lx, a2 = sol.x
    a0 = math.exp(la0)
    a1 = -math.exp(lx) if concave else a0 * (1.0 + math.exp(lx))
    return SurrogateCoefficients(a0=float(a0), a1=float(a1), a2=float(a2))


@dataclass(frozen=True)
class DnnProfile:
    """A splittable model: layers, admissible splits, surrogates, importance.

    ``layers[0]`` is the raw-input pseudo-layer (macs == 0).  ``surrogates``
    and ``importance`` are keyed by transmitting split point (0..k_m-1);
    split k_m (== len(layers)-1) is device-only execution with accuracy
    ``full_accuracy``.
    """
    name: str
    layers: tuple
    split_points: tuple
    surrogates: dict
    importance: dict
    full_accuracy: float

    def __post_init__(self):
        k_m = len(self.layers) - 1
        if self.layers[0].macs != 0.0:
            raise ValueError("layer 0 is the input pseudo-layer (macs == 0)")
        for s in self.split_points:
            if not 0 <= s <= k_m:
                raise ValueError("split point %d out of range" % s)
            if s < k_m:
                if s not in self.surrogates:
                    raise ValueError("missing surrogate for split %d" % s)
                if s not in self.importance:
                    raise ValueError("missing importance for split %d" % s)
                scores = np.asarray(self.importance[s], dtype=float)
                if scores.shape != (self.layers[s].out_maps,):
                    raise ValueError(
                        "importance for split %d must have one score per "
                        "feature map" % s)
                if scores.min() <= 0:
                    raise ValueError("importance scores must be positive")
        if not 0.0 < self.full_accuracy <= 1.0:
            raise ValueError("full_accuracy must lie in (0, 1]")

    @property
    def k_m(self):
        return len(self.layers) - 1


def local_workload(profile, s):
    """Cumulative device-side MACs when splitting after layer s."""
    return float(sum(l.macs for l in profile.layers[1:s + 1]))


def edge_workload(profile, s):
    """Remaining edge-side MACs when splitting after layer s."""
    return float(sum(l.macs for l in profile.layers[s + 1:]))


def feature_geometry(profile, s):
    """(n_maps, map_h, map_w) of the tensor transmitted at split s."""
    l = profile.layers[s]
    return l.out_maps, l.map_h, l.map_w


def packet_bits(profile, s, quant_bits):
    """Bits per packet (one quantized feature map) at split s."""
    l = profile.layers[s]
    return int(quant_bits) * l.map_h * l.map_w


def payload_bits(profile, s, quant_bits):
    """Total bits of the full feature tensor at split s."""
    l = profile.layers[s]
    return packet_bits(profile, s, quant_bits) * l.out_maps


def importance_order(profile, s):
    """Packet indices at split s, most important first (stable ties)."""
    scores = np.asarray(profile.importance[s], dtype=float)
    return np.argsort(-scores, kind="stable")


def cumulative_importance(profile, s):
    """Normalized importance mass of the first j packets in transmission
    order, j = 0..n_maps; cum[0] == 0.0 and cum[-1] == 1.0 exactly."""
    scores = np.asarray(profile.importance[s], dtype=float)
    ordered = scores[importance_order(profile, s)]
    cum = np.concatenate(([0.0], np.cumsum(ordered)))
    cum /= cum[-1]
    cum[-1] = 1.0
    return cum


def _geometric_scores(n, beta_star, mass_target=0.9):
    # decay ratio set so mass_target of the total (finite, normalized)
    # importance mass sits in the first beta_star fraction of maps:
    # (1 - x^beta_star)/(1 - x) = mass_target with x = r^n.  Descending
    # scores cannot place the mass point past beta = mass_target; such
    # requests degrade to uniform scores.
    from scipy.optimize import brentq

    beta_star = min(max(beta_star, 1.0 / n), 1.0)
    if beta_star >= mass_target - 1e-9:
        return np.ones(n)
    x = brentq(lambda x: (1.0 - x ** beta_star) - mass_target * (1.0 - x),
               1e-300, 1.0 - 1e-9, xtol=1e-15, rtol=1e-14)
    r = x ** (1.0 / n)
    return r ** np.arange(n)


def _mass_knee(coef, realized_target):
    # beta at which the surrogate reaches the realized-accuracy target;
    # concentrating 90% of the importance mass there pins the accuracy a
    # threshold-stopped transmission actually delivers
    c = -coef.a1
    return (1.0 / (coef.a2 - realized_target) - c) / coef.a0


def _build_profile(name, rows, steepness, ceilings, floor, realized,
                   full_accuracy):
    layers = tuple(LayerSpec(*r) for r in rows)
    k_m = len(layers) - 1
    surrogates = {}
    importance = {}
    for s in range(k_m):
        coef = surrogate_from_targets(steepness[s], floor, ceilings[s])
        surrogates[s] = coef
        beta_star = _mass_knee(coef, realized[s])
        importance[s] = _geometric_scores(layers[s].out_maps, beta_star)
    return DnnProfile(name=name, layers=layers,
                      split_points=tuple(range(k_m + 1)),
                      surrogates=surrogates, importance=importance,
                      full_accuracy=full_accuracy)


# Default synthetic classifier profile (1000 classes).  Workloads give a
# 2 GHz device t_local of 0/25/80/170/230/320 ms across the split grid, so
# device-only misses a 300 ms frame but fits relaxed deadlines.  Feature
# tensors are grouped into small 16-bit packets so per-slot packet rounding
# stays a minor correction across the whole power/bandwidth operating range.
# Payload sizes shrink roughly with the transmit window so that deeper
# splits stay useful as per-user bandwidth drops.  Curve ceilings sag with
# depth (8-bit quantization hurts deeper, denser features more) and the
# fitted intercept sits well above chance, as unconstrained hyperbolic fits
# to the saturating region tend to do.  The realized targets set where the
# importance mass concentrates: early packets at every split carry most of
# the recoverable accuracy, with the knee sitting near half the tensor.
_DEFAULT_ROWS = (
    (0.0,   2816, 2, 1),
    (5.0e7, 1290, 2, 1),
    (1.1e8, 687, 2, 1),
    (1.8e8, 302, 2, 1),
    (1.2e8, 128, 2, 1),
    (1.8e8, 1000, 1, 1),
)
_DEFAULT_STEEPNESS = (4.0, 4.0, 4.0, 4.0, 4.0)
_DEFAULT_CEILINGS = (0.80, 0.74, 0.682, 0.61, 0.60)
_DEFAULT_REALIZED = (0.6858, 0.6516, 0.6248, 0.5367, 0.5355)
_DEFAULT_FLOOR = 0.40
FULL_MODEL_ACCURACY = 0.8038


def default_profile():
    return _build_profile("synthetic-cls-1000", _DEFAULT_ROWS,
                          _DEFAULT_STEEPNESS, _DEFAULT_CEILINGS,
                          _DEFAULT_FLOOR, _DEFAULT_REALIZED,
                          FULL_MODEL_ACCURACY)


def tiny_profile():
    """Three-split profile small enough for exhaustive offline enumeration."""
    rows = (
        (0.0,   8, 4, 4),
        (6.0e7, 6, 3, 3),
        (1.4e8, 10, 1, 1),
    )
    return _build_profile("tiny-cls", rows, (5.0, 9.0), (0.80, 0.76),
                          0.40, (0.76, 0.72), 0.81)


def profile_to_dict(profile):
    return {
        "name": profile.name,
        "layers": [[l.macs, l.out_maps, l.map_h, l.map_w]
                   for l in profile.layers],
        "split_points": list(profile.split_points),
        "surrogates": {str(s): [c.a0, c.a1, c.a2]
                       for s, c in profile.surrogates.items()},
        "importance": {str(s): np.asarray(v, dtype=float).tolist()
                       for s, v in profile.importance.items()},
        "full_accuracy": profile.full_accuracy,
    }


def profile_from_dict(d):
    layers = tuple(LayerSpec(float(m), int(n), int(h), int(w))
                   for m, n, h, w in d["layers"])
    surrogates = {int(s): SurrogateCoefficients(*map(float, v))
                  for s, v in d["surrogates"].items()}
    importance = {int(s): np.asarray(v, dtype=float)
                  for s, v in d["importance"].items()}
    return DnnProfile(name=d.get("name", "custom"), layers=layers,
                      split_points=tuple(d["split_points"]),
                      surrogates=surrogates, importance=importance,
                      full_accuracy=float(d["full_accuracy"]))
