"""Named end-to-end recipes, one per acceptance criterion.

Each recipe returns a CriterionResult holding a pass flag, the measured
numbers and the tolerance it was judged against.  The CLI ``acceptance``
subcommand and tests/test_acceptance.py both run these.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .asymptotics import (
    CentreState,
    blowup_moments_spectral,
    centre_coupling_m1,
    classify_blowup,
    classify_global,
    decay_snapshots,
    fit_decay_exponent,
    fit_modulus_exponent,
    fit_nodal_exponent,
    integrate_centre_ode,
    profile_distances,
    track_nodal_point,
)
from .evolution import (
    WrapAroundWarning,
    expansion_coeffs,
    propagate,
    propagation_box,
    raw_moments,
    reconstruct_forward,
    rescale_forward,
    spectral_cutoff,
)
from .grids import CGrid
from .kernel import compute_kernel, fit_phase_law, kernel_derivative, kernel_exact_m1
from .nonlin import branching_slope_check, explicit_pair_minus, explicit_pair_plus, nlep_residual
from .polyalg import SpectralParams, multi_indices_upto, verify_eigenpair
from .regularity import Divergence, PhiSpec, integrate_vertex_ode, petrovskii_integral
from .seqspace import SeqVec, apply_diag_b, inner, l2_norm, resolvent_apply, resolvent_tail, tail_bound


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number:2d} {self.name} ({self.seconds:.1f}s)"


def _timed(number: int, name: str, body: Callable[[], tuple[bool, dict]]) -> CriterionResult:
    t0 = time.perf_counter()
    ok, metrics = body()
    return CriterionResult(number, name, bool(ok), metrics, time.perf_counter() - t0)


# -- 1 -----------------------------------------------------------------------


def exact_spectrum(max_order: int = 8) -> CriterionResult:
    def body():
        count, bad = 0, []
        for m in (1, 2, 3):
            for N in (1, 2):
                sp = SpectralParams(m, N)
                for beta in multi_indices_upto(max_order, N):
                    count += 1
                    if not verify_eigenpair(beta, sp).is_zero():
                        bad.append((m, N, beta))
        return not bad, {"checked": count, "nonzero": bad}

    return _timed(1, "exact spectrum", body)


# -- 2, 3 --------------------------------------------------------------------


def kernel_ground_truth(n: int = 2**14, extent: float = 10.0) -> CriterionResult:
    def body():
        F = compute_kernel(SpectralParams(1, 1), n, extent)
        y = F.axes()[0]
        err = float(np.abs(F.data - kernel_exact_m1(y, N=1)).max())
        mod = np.abs(F.data)
        spread = float(mod.std() / mod.mean())
        return err <= 1e-6 and spread <= 1e-6, {"sup_error": err, "std_over_mean": spread}

    return _timed(2, "kernel ground truth", body)


def wkbj_phase(n: int = 2**14, extent: float = 20.0) -> CriterionResult:
    def body():
        G = compute_kernel(SpectralParams(2, 1), n, extent)
        z, rms = fit_phase_law(G, (5.0, 15.0), 4 / 3)
        z2 = 0.75 * 4 ** (-1 / 3)
        rel = abs(z - z2) / z2
        return rel <= 0.02, {"fitted_z": z, "predicted_z": z2, "rel_error": rel, "fit_rms": rms}

    return _timed(3, "WKBJ phase", body)


# -- 4 -----------------------------------------------------------------------


def global_decay(window: float = 1.0) -> CriterionResult:
    """Decay exponents from sup_{|y|<=window} of the rescaled solution."""

    def body():
        sp = SpectralParams(1, 1)
        n, L = propagation_box(12.3, 50.0, 6.0, sp)
        g = CGrid.centered(n, L)
        y = g.axes()[0]
        data = {0: np.exp(-(y**2)), 1: y * np.exp(-(y**2)), 2: (y**2 - 0.5) * np.exp(-(y**2))}
        ok, out = True, {}
        for l, f in data.items():
            u0 = g.like(f)
            cls = classify_global(u0, sp)
            expo = fit_decay_exponent(decay_snapshots(u0, sp, np.geomspace(1, 50, 8), window=window))
            rel = abs(expo + cls.predicted_exponent) / cls.predicted_exponent
            dist = profile_distances(u0, sp, l, [2, 4, 8, 16])
            mono = all(b < a + 1e-4 for a, b in zip(dist, dist[1:]))
            ok &= cls.l == l and rel <= 0.05 and mono
            out[f"l={l}"] = {"classified": cls.l, "exponent": expo, "rel_error": rel, "profile_distances": dist}
        return ok, out

    return _timed(4, "global decay", body)


# -- 5 -----------------------------------------------------------------------


def _agreement_errors(m: int, times, frame: str, L: int = 12) -> tuple[list[float], list[float]]:
    sp = SpectralParams(m, 1)
    probe = CGrid.centered(4096, 20.0)
    y = probe.axes()[0]
    wmax = spectral_cutoff(probe.like((y**2 + 0.3) * np.exp(-(y**2))))
    n, ext = propagation_box(wmax, max(times), 8.0, sp)
    u0 = CGrid.centered(n, ext)
    y = u0.axes()[0]
    u0 = u0.like((y**2 + 0.3) * np.exp(-(y**2)))
    if frame == "shifted":
        coeffs, shift = expansion_coeffs(u0, L, sp), 1.0
    else:
        coeffs, shift = raw_moments(u0, L), 0.0
    tgt = CGrid.centered(256, 3.0)
    psi = {b: kernel_derivative(b, sp, 256, 3.0, method="contour") for b in multi_indices_upto(L, 1)}
    inside = np.abs(tgt.axes()[0]) <= 3.0
    errs, tails = [], []
    for t in times:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", WrapAroundWarning)
            u = propagate(u0, t, sp)
        st = rescale_forward(u, t, sp, tgt, shift=shift)
        rec, tail = reconstruct_forward(coeffs, psi, st.time, sp)
        errs.append(float(np.abs(st.grid.data - rec.data)[inside].max()))
        tails.append(tail)
    return errs, tails


def semigroup_expansion(times=(1.0, 2.0, 5.0, 10.0, 20.0), frame: str = "shifted") -> CriterionResult:
    """Propagated and rescaled data against the truncated eigen-expansion.

    ``frame="shifted"`` rescales with 1 + t and dual coefficients;
    ``frame="plain"`` rescales with t and raw moments.
    """

    def body():
        out, ok = {}, True
        for m in (1, 2):
            errs, tails = _agreement_errors(m, times, frame)
            ok &= max(errs) <= 1e-3
            out[f"m={m}"] = {"times": list(times), "sup_errors": errs, "first_omitted_term": tails}
        out["frame"] = frame
        return ok, out

    return _timed(5, f"semigroup/expansion agreement ({frame} frame)", body)


# -- 6 -----------------------------------------------------------------------


def blowup_classification() -> CriterionResult:
    """Odd data with M*_0 = 0 by symmetry, plus a non-odd variant for the nodal track."""

    def body():
        sp = SpectralParams(1, 1)
        T = 1.0
        g = CGrid.centered(1024, 16.0)
        y = g.axes()[0]
        u0 = g.like(y * np.exp(-(y**2)))
        bc = classify_blowup(u0, T, sp, L=6)
        conv = all(b < a for a, b in zip(bc.residuals, bc.residuals[1:]))
        psi0 = kernel_derivative((0,), sp, g.shape, 16.0)
        A = g.integrate(np.exp(-(y**2)) * psi0.data)
        K = g.integrate(y**2 * np.exp(-(y**2)) * psi0.data) / A
        u1 = g.like((y + 0.5 * (y**2 - K)) * np.exp(-(y**2)))
        m0 = abs(blowup_moments_spectral(u1, T, sp, 1)[(0,)])
        track = track_nodal_point(u1, T, sp, [T - math.exp(-tau) for tau in np.linspace(2, 6, 9)])
        expo = fit_nodal_exponent(track)
        rel = abs(expo - 0.5) / 0.5
        ok = bc.l == 1 and conv and rel <= 0.05
        return ok, {
            "l": bc.l,
            "profile_residuals": bc.residuals,
            "nodal_data_M0": m0,
            "nodal_exponent": expo,
            "predicted_exponent": 0.5,
            "rel_error": rel,
        }

    return _timed(6, "blow-up classification", body)


# -- 7 -----------------------------------------------------------------------


def centre_ode() -> CriterionResult:
    def body():
        sp = SpectralParams(1, 1)
        c0 = centre_coupling_m1(1)
        tr = integrate_centre_ode(CentreState.critical(1.0, c0, 0, sp))
        drift = float(np.abs(tr.modulus**2 - 1).max())
        st = CentreState.critical(1.0, 1j, 0, sp)
        expo = fit_modulus_exponent(integrate_centre_ode(st), (20.0, 100.0))
        pred = -1 / (st.p_crit - 1)
        rel = abs(expo - pred) / abs(pred)
        return drift <= 1e-10 and rel <= 0.02, {"c0": c0, "modulus_drift": drift, "exponent": expo, "predicted": pred, "rel_error": rel}

    return _timed(7, "centre ODE", body)


# -- 8 -----------------------------------------------------------------------


PETROVSKII_CASES = (
    (("constant_l", (2.0,)), Divergence.DIVERGENT),
    (("petrovskii_sqrtlog", ()), Divergence.DIVERGENT),
    (("petrovskii_eps", (0.5,)), Divergence.CONVERGENT),
    (("power", (1.5,)), Divergence.CONVERGENT),
)


def petrovskii_benchmark(tau_max: float = 1e6) -> CriterionResult:
    def body():
        ok, out = True, {}
        for (fam, params), expect in PETROVSKII_CASES:
            r = petrovskii_integral(PhiSpec(fam, params), tau_max)
            ok &= r.assessment is expect
            out[fam] = {"value": r.value, "ratio": r.ratio, "assessment": r.assessment.value}
        stab = {}
        for (fam, params), span in ((("constant_l", (2.0,)), (math.e, 100.0)), (("power", (1.5,)), (math.e, 20.0))):
            ph = PhiSpec(fam, params)
            a = integrate_vertex_ode(ph, span, 1.0)
            b = integrate_vertex_ode(ph, span, 1.0, rtol=5e-11)
            fa, fb = complex(a.b0[-1], a.d0[-1]), complex(b.b0[-1], b.d0[-1])
            stab[fam] = abs(fa - fb) / abs(fa)
            ok &= stab[fam] < 1e-6
        out["tolerance_halving"] = stab
        return ok, out

    return _timed(8, "Petrovskii benchmark", body)


# -- 9 -----------------------------------------------------------------------


def nonlinear_pairs() -> CriterionResult:
    def body():
        minus = {}
        for m in (1, 2, 3):
            minus[m] = nlep_residual(explicit_pair_minus(m, 1, 0.5), CGrid.centered(128, 10.0))[1]
        plus = nlep_residual(explicit_pair_plus(1.0, 1), CGrid.centered(2048, 20.0), taper=(10.0, 18.0))[1]
        br = branching_slope_check(1)
        ok = max(minus.values()) <= 1e-12 and plus <= 1e-8 and br.slope_rel_error <= 1e-3 and br.anchor_rel_error <= 1e-3
        return ok, {
            "minus_residuals": minus,
            "plus_residual": plus,
            "anchor": br.numeric_anchor,
            "slope": br.numeric_slope,
            "slope_rel_error": br.slope_rel_error,
        }

    return _timed(9, "nonlinear pairs", body)


# -- 10 ----------------------------------------------------------------------


def _random_vec(rng: np.random.Generator, sp: SpectralParams, lo: int, hi: int) -> SeqVec:
    betas = [b for b in multi_indices_upto(hi, sp.N) if sum(b) >= lo]
    vals = rng.normal(size=len(betas)) + 1j * rng.normal(size=len(betas))
    return SeqVec(dict(zip(betas, vals)), sp)


def sequence_space(seed: int = 0) -> CriterionResult:
    def body():
        rng = np.random.default_rng(seed)
        sym = 0.0
        for m in (1, 2, 3):
            sp = SpectralParams(m, 1)
            for _ in range(20):
                v, w = _random_vec(rng, sp, 0, 30), _random_vec(rng, sp, 0, 30)
                a, b = inner(apply_diag_b(v), w), inner(v, apply_diag_b(w))
                sym = max(sym, abs(a - b) / max(abs(a), 1e-300))
        tails = {}
        ok_tail = True
        for m in (1, 2):
            sp = SpectralParams(m, 1)
            for K in (10, 100, 1000):
                v = _random_vec(rng, sp, K, K + 50)
                v = SeqVec({b: a / l2_norm(v) for b, a in v.entries.items()}, sp)
                t = resolvent_tail(v, 1.0, K)
                tails[f"m={m},K={K}"] = t
                ok_tail &= t <= tail_bound(K, sp)
        theta = math.pi / 4
        sp = SpectralParams(1, 1)
        worst = 0.0
        for _ in range(50):
            r = rng.uniform(0.05, 20.0)
            ang = rng.uniform(-(math.pi / 2 + theta), math.pi / 2 + theta) * (1 - 1e-9)
            lam = r * complex(math.cos(ang), math.sin(ang))
            res = resolvent_apply(_random_vec(rng, sp, 0, 40), lam, theta)
            worst = max(worst, res.norm / res.bound)
        ok = sym <= 1e-12 and ok_tail and worst <= 1.0
        return ok, {"symmetry_rel_error": sym, "tails": tails, "worst_norm_over_sector_bound": worst}

    return _timed(10, "sequence-space contracts", body)


RECIPES: dict[int, Callable[[], CriterionResult]] = {
    1: exact_spectrum,
    2: kernel_ground_truth,
    3: wkbj_phase,
    4: global_decay,
    5: semigroup_expansion,
    6: blowup_classification,
    7: centre_ode,
    8: petrovskii_benchmark,
    9: nonlinear_pairs,
    10: sequence_space,
}


def run_all(numbers=None) -> list[CriterionResult]:
    return [RECIPES[k]() for k in (numbers or sorted(RECIPES))]
