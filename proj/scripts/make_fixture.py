#!/usr/bin/env python3
"""Regenerate the bundled city-level fixture (data/hubei_cities.csv).

The series are synthetic.  Each city keeps a stable quantile slot inside a
day-level cross-sectional law whose parameters drift smoothly through the
outbreak: infection speeds follow a heavy-tailed extreme-value pattern,
new-death rates follow a near-normal pattern with a mid-February surge and a
few chaotic reporting days, and recoveries ramp up through March.  After the
surge window the late-epidemic speeds are steered so the cumulative fatality
pattern settles into a smooth bounded shape.  Counts are integers, so small
cities add realistic quantisation noise on top of the slot jitter.  The knobs
below were tuned so the daily cross-sections and the derived parameter traces
land on the documented reference statistics.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import math
import pathlib

import numpy as np

START = dt.date(2020, 1, 23)
END = dt.date(2020, 3, 17)
SPIKE = dt.date(2020, 2, 12)    # reporting catch-up: one-day confirmed surge
LATE = dt.date(2020, 3, 5)      # fitting windows for speed/death end Mar 4

# name, population, initial confirmed, initial recovered
CITIES = [
    ("wuhan",       9_600_000, 3240, 50),
    ("xiaogan",     4_400_000,  744,  3),
    ("huanggang",   4_200_000,  828,  2),
    ("jingzhou",    3_600_000,  576,  2),
    ("xiangyang",   3_300_000,  636,  0),
    ("yichang",     3_000_000,  528,  2),
    ("shiyan",      2_900_000,  444,  0),
    ("jingmen",     2_800_000,  492,  0),
    ("xianning",    2_700_000,  396,  2),
    ("huangshi",    2_600_000,  372,  0),
    ("enshi",       2_500_000,  300,  0),
    ("suizhou",     2_450_000,  336,  0),
    ("ezhou",       2_400_000,  317,  0),
    ("xiantao",     2_300_000,  264,  0),
    ("tianmen",     2_200_000,  236,  0),
    ("qianjiang",   2_100_000,  225,  0),
    ("shennongjia",   2_000_000,  195,  0),
]

KNOBS = {
    # infection-speed cross-section (generalised extreme value pattern)
    "k_jsb": (-0.5248, 0.72549, 1.1917, -0.13403), "k_scale": 0.91,
    "k_shift": -0.012, "k_lo": 0.03, "k_hi": 0.94,
    "mu_v_lo": 5.8e-4, "mu_v_span": 8.8e-4,
    "surge_lo": 13, "surge_hi": 30,
    "ratio_v_lo": 0.36, "ratio_v_span": 0.26,
    "jit_v": 0.005, "slot_lo_v": 0.015, "slot_hi_v": 0.985,
    "spike_scale": 1.22,
    "ar_rho_k": 0.45, "ar_rho": 0.25, "ar_rho_fast": 0.10,
    # death-rate cross-section (normal pattern, surge plus chaotic days)
    "mu_d_base": 0.0019, "mu_d_bump": 0.0042, "bump_center": 19.0, "bump_width": 4.6,
    "ratio_d": 0.565, "ratio_d_noise": 0.05,
    "wild_days": {20: (1.45, 2.6), 26: (1.6, 2.4), 29: (2.1, 2.6), 33: (1.9, 2.4)},
    "rough_days": (9, 11, 14, 17, 24, 27, 31, 35, 38),
        # initial fatality pattern and the late-epidemic target shape
    "psi0_jsb": (-0.15, 0.50, 0.030, 0.008),
    "psi_late_jsb": (-0.15, 0.50, 0.032, 0.0085),
    # recovery ramp
    "rho_base": 0.008, "rho_gain": 0.078, "rho_center": 20.0, "rho_width": 5.0,
    "rho_adjust_from": 10, "rho_adjust_pow": 1.6,
}

# Speed slots: position in the day pattern held by each city (16 = top).
# These stay fixed so the big cities keep the fastest absolute growth; the
# death-rate position a city holds is reshuffled every day instead, so no city
# compounds a permanently extreme death rate.
SPEED_SLOT = [16, 14, 15, 12, 11, 13, 9, 10, 7, 8, 5, 6, 4, 3, 2, 0, 1]
DEATH_SLOT = SPEED_SLOT  # used only for the initial death-count pattern


def normal_quantile(p):
    p = np.asarray(p, dtype=float)
    a = [-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
         1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00]
    b = [-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
         6.680131188771972e+01, -1.328068155288572e+01]
    c = [-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
         -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00]
    d = [7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
         3.754408661907416e+00]
    plow, phigh = 0.02425, 1 - 0.02425
    x = np.empty_like(p)
    lo, hi = p < plow, p > phigh
    mid = ~(lo | hi)
    if lo.any():
        q = np.sqrt(-2 * np.log(p[lo]))
        x[lo] = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
                ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1)
    if hi.any():
        q = np.sqrt(-2 * np.log(1 - p[hi]))
        x[hi] = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
                 ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1)
    if mid.any():
        q = p[mid] - 0.5
        r = q * q
        x[mid] = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / \
                 (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1)
    e = 0.5 * (1 + np.vectorize(math.erf)(x / math.sqrt(2))) - p
    u = e * math.sqrt(2 * math.pi) * np.exp(x * x / 2)
    return x - u / (1 + x * u / 2)


def normal_cdf(x):
    return 0.5 * (1 + np.vectorize(math.erf)(np.asarray(x, dtype=float) / math.sqrt(2)))


def jsb_quantile(u, gamma, delta, lam, xi):
    z = normal_quantile(np.asarray(u, dtype=float))
    return xi + lam / (1.0 + np.exp(-(z - gamma) / delta))


def gev_quantile(p, k, sigma, mu):
    return mu + sigma * ((-np.log(p)) ** (-k) - 1.0) / k


class Wander:
    """AR(1) in probit space: smooth day-to-day, uniform marginal."""

    def __init__(self, rng, rho):
        self.rng, self.rho, self.phi = rng, rho, rng.standard_normal()

    def step(self):
        self.phi = self.rho * self.phi + math.sqrt(1 - self.rho ** 2) * self.rng.standard_normal()
        return float(normal_cdf(self.phi))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=20200123)
    ap.add_argument("--debug", action="store_true")
    ap.add_argument("--out-dir", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    K = KNOBS
    n = len(CITIES)
    days = (END - START).days + 1
    spike_t = (SPIKE - START).days
    late_t = (LATE - START).days

    mid = (np.arange(n) + 0.5) / n
    # cross-section template for daily death rates: short lower tail keeps
    # counts positive at the dispersion used, upper side carries the spread
    death_shape = np.array([
    -1.700124, -1.455042, -1.114240, -0.876144, -0.676694, -0.499993,
    -0.335148, -0.187133, -0.024174, 0.148034, 0.284995, 0.415369,
    0.582510, 0.767848, 1.055432, 1.435364, 2.179141])
    slot_v = mid[np.array(SPEED_SLOT)]
    slot_d = mid[np.array(DEATH_SLOT)]

    tp = np.array([c[1] for c in CITIES], dtype=np.int64)
    cc = np.array([c[2] for c in CITIES], dtype=np.int64)
    cr = np.array([c[3] for c in CITIES], dtype=np.int64)
    # initial deaths follow a bounded smooth ratio pattern over the death slots
    psi0 = jsb_quantile(slot_d, *K["psi0_jsb"])
    cd = np.maximum(np.rint(psi0 * cc), 0).astype(np.int64)

    w_k = Wander(rng, K["ar_rho_k"])
    w_mu = Wander(rng, K["ar_rho_fast"])
    w_ratio = Wander(rng, K["ar_rho_fast"])
    w_mud = Wander(rng, K["ar_rho"])
    w_ratiod = Wander(rng, K["ar_rho"])

    late_psi = None  # frozen per-city final fatality-ratio targets

    rows = [(START, cc.copy(), cd.copy(), cr.copy())]
    for t in range(1, days):
        # --- infection speed targets
        k = float(np.clip(K["k_scale"] * jsb_quantile(w_k.step(), *K["k_jsb"]) + K["k_shift"],
                          K["k_lo"], K["k_hi"]))
        # two regimes: the surge fortnight runs hot, the shoulders run slow,
        # so the day-level location lives near one end or the other
        u_m = w_mu.step()
        if K["surge_lo"] <= t <= K["surge_hi"]:
            x_m = 0.80 + 0.20 * u_m
        else:
            x_m = 0.02 + 0.22 * u_m
        mu_v = K["mu_v_lo"] + K["mu_v_span"] * x_m
        ratio_v = K["ratio_v_lo"] + K["ratio_v_span"] * (0.75 * x_m + 0.25 * w_ratio.step())
        sig_v = ratio_v * mu_v
        if t == spike_t:
            mu_v *= K["spike_scale"]
            sig_v *= K["spike_scale"]
        p_v = np.clip(slot_v + K["jit_v"] * rng.standard_normal(n),
                      K["slot_lo_v"], K["slot_hi_v"])
        v = gev_quantile(p_v, k, sig_v, mu_v)

        if args.debug and t % 7 == 0:
            w = cd / np.maximum(cc, 1)
            print(f"  t={t:2d} psi band [{w.min():.4f}, {w.max():.4f}] ratio {w.max()/w.min():.2f}")
        if t == late_t:
            # freeze a final fatality-ratio shape, ranked like the current
            # ratios and scaled so every city still has deaths to report
            psi_now = cd / np.maximum(cc, 1)
            order = np.argsort(np.argsort(psi_now))
            late_psi = jsb_quantile(mid[order], *K["psi_late_jsb"])
            late_psi *= float(np.max(psi_now / late_psi)) * 1.02
        if late_psi is not None:
            # confirmed growth tapers off once the surge has passed
            v = K["mu_v_lo"] * 0.5 * (0.78 ** (t - late_t))                 * np.maximum(1.0 + 0.3 * rng.standard_normal(n), 0.0)

        new_cases = np.maximum(np.rint(v * (tp - cc)), 0).astype(np.int64)

        # --- death-rate targets
        active = cc - cd - cr
        if late_psi is not None:
            # deaths catch up with reporting after the surge: walk each city
            # onto the frozen fatality-ratio shape, closing the gap faster as
            # the series winds down and exactly on the final day
            tgt = late_psi
            if (t - late_t) in (2, 5, 8, 11):
                tgt = late_psi * np.maximum(1.0 + 0.18 * rng.standard_normal(n), 0.5)
            gap = np.maximum(tgt * (cc + new_cases) - cd, 0.0)
            if t == days - 1:
                new_deaths = np.rint(gap).astype(np.int64)
            else:
                alpha = min(0.25 + 0.05 * (t - late_t), 0.6)
                new_deaths = np.rint(alpha * gap).astype(np.int64)
        else:
            bump = math.exp(-(((t - K["bump_center"]) / K["bump_width"]) ** 2))
            mu_d = (K["mu_d_base"] + K["mu_d_bump"] * bump) * (1.0 + 0.08 * (w_mud.step() - 0.5))
            ratio_d = K["ratio_d"] * (1.0 + K["ratio_d_noise"] * (w_ratiod.step() - 0.5))
            if t in K["wild_days"]:
                fm, fr = K["wild_days"][t]
                mu_d *= fm
                ratio_d *= fr
            if t in K["rough_days"]:
                z_d = normal_quantile(mid)[rng.permutation(n)] + 0.12 * rng.standard_normal(n)
            else:
                z_d = death_shape[rng.permutation(n)]
            delta = np.maximum(mu_d * (1.0 + ratio_d * z_d), 0.0)
            new_deaths = np.maximum(np.rint(delta * active), 0).astype(np.int64)

        rho = K["rho_base"] + K["rho_gain"] / (1.0 + math.exp(-(t - K["rho_center"]) / K["rho_width"]))
        # recovery speed varies by city: places running a high fatality ratio
        # discharge survivors faster, draining their active pool so their death
        # counts grow more slowly; this keeps the ratio cross-section near one
        # smooth bounded shape instead of fanning out
        if t >= K["rho_adjust_from"]:
            psi_c = cd / np.maximum(cc, 1)
            rank = np.argsort(np.argsort(psi_c))
            unit = jsb_quantile(mid[rank], *K["psi_late_jsb"])
            tgt = unit * math.exp(float(np.mean(np.log(psi_c))) - float(np.mean(np.log(unit))))
            adj = np.clip((psi_c / tgt) ** K["rho_adjust_pow"], 0.3, 3.2)
        else:
            adj = 1.0
        new_recov = np.maximum(np.rint(np.minimum(rho * adj, 0.14) * active), 0).astype(np.int64)

        cc = cc + new_cases
        cd = np.minimum(cd + new_deaths, cc)
        cr = np.maximum(np.minimum(cr + new_recov, cc - cd - 1), rows[-1][3])
        rows.append((START + dt.timedelta(days=t), cc.copy(), cd.copy(), cr.copy()))

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "hubei_cities.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date", "city", "cum_confirmed", "cum_deaths", "cum_recovered"])
        for date, ccs, cds, crs in rows:
            for i, (name, *_rest) in enumerate(CITIES):
                w.writerow([date.isoformat(), name, int(ccs[i]), int(cds[i]), int(crs[i])])
    with open(out / "hubei_population.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["city", "population"])
        for name, pop, *_rest in CITIES:
            w.writerow([name, pop])
    print(f"wrote {days} days x {n} cities to {out}")


if __name__ == "__main__":
    main()
