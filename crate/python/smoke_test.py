#!/usr/bin/env python3
"""End-to-end smoke test of the cost2100x Python extension.

Builds nothing itself: it locates the compiled extension under target/
(debug or release), stages it under a scratch directory as an importable
module, and exercises every exported operation once with small inputs.

Run from the repository root (or anywhere) after either of:

    cargo build -p cost2100x-python
    cargo build -p cost2100x-python --release
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def stage_extension() -> Path:
    candidates = [
        REPO / "target" / "release" / "libcost2100x.so",
        REPO / "target" / "debug" / "libcost2100x.so",
    ]
    built = [p for p in candidates if p.exists()]
    if not built:
        sys.exit(
            "extension not built; run `cargo build -p cost2100x-python` first"
        )
    newest = max(built, key=lambda p: p.stat().st_mtime)
    stage = Path(tempfile.mkdtemp(prefix="cost2100x-py-"))
    shutil.copy2(newest, stage / "cost2100x.so")
    sys.path.insert(0, str(stage))
    return newest


def approx(a: float, b: float, tol: float = 1e-9) -> None:
    assert math.isfinite(a), f"{a} not finite"
    assert abs(a - b) <= tol * max(1.0, abs(a), abs(b)), f"{a} != {b} (tol {tol})"


def main() -> None:
    source = stage_extension()
    import cost2100x as cx

    print(f"loaded {source}")

    # --- interval simulation and censored inference -----------------------
    sim = cx.simulate_bsvr(2.6, 40.0, delta0=0.075, seed=7, scale=2.9)
    n = len(sim["intervals"])
    assert n > 0, "expected a nonempty realization"
    assert sim["window"] == (0.0, 40.0)
    assert sim["delta0"] == 0.075
    counts = sim["counts"]
    assert sum(counts.values()) == n
    assert set(sim["classes"]) <= {
        "interior",
        "right_censored",
        "left_censored",
        "doubly_censored",
    }
    print(f"simulate_bsvr: {n} intervals, counts {counts}")

    mle = cx.mle_exponential(sim["intervals"], sim["window"], sim["delta0"])
    assert mle["outcome"] == "estimate"
    assert 0.5 < mle["lambda"] < 10.0 and 0.5 < mle["scale"] < 12.0
    lam_mo, scale_mo = cx.mome(sim["intervals"], sim["window"], sim["delta0"])
    assert lam_mo > 0.0 and scale_mo > 0.0
    print(
        f"mle (lambda, scale) = ({mle['lambda']:.3f}, {mle['scale']:.3f}); "
        f"mome = ({lam_mo:.3f}, {scale_mo:.3f})"
    )

    # The fitted point must (weakly) dominate nearby points in likelihood.
    best = cx.log_likelihood(
        mle["lambda"], sim["intervals"], sim["window"], sim["delta0"],
        scale=mle["scale"],
    )
    for dl, ds in ((1.1, 1.0), (0.9, 1.0), (1.0, 1.1), (1.0, 0.9)):
        other = cx.log_likelihood(
            mle["lambda"] * dl, sim["intervals"], sim["window"], sim["delta0"],
            scale=mle["scale"] * ds,
        )
        assert other <= best + 1e-9, (other, best)
    print(f"log-likelihood at the fit: {best:.3f} (local maximum confirmed)")

    bounds = cx.crlb(2.6, 2.9, 40.0 - 0.075, delta0=0.075)
    assert bounds["crlb_lambda"] > 0.0 and bounds["crlb_scale"] > 0.0
    assert len(bounds["fisher_information"]) == 2
    print(
        f"crlb: var(lambda) >= {bounds['crlb_lambda']:.4g}, "
        f"var(scale) >= {bounds['crlb_scale']:.4g}"
    )

    # --- correlation functions --------------------------------------------
    approx(cx.acf_bs(0.0, scale=2.9), 1.0)
    approx(cx.acf_bs(2.9, scale=2.9), math.exp(-1.0))
    approx(cx.acf_circular(0.0, 3.0), 1.0)
    assert cx.acf_circular(6.0, 3.0) == 0.0
    mid = cx.acf_circular(3.0, 3.0)
    assert 0.0 < mid < 1.0
    mix = cx.acf_circular_mixture(1.0, -19.8, 101.3)
    assert 0.0 < mix < 1.0
    print(f"acf_circular(R, R) = {mid:.6f}, lognormal mixture at 1 m = {mix:.6f}")

    # --- chord geometry and radius recovery --------------------------------
    approx(cx.chord_cdf(2.0, 1.0), 1.0)
    approx(cx.chord_cdf(math.sqrt(2.0), 1.0), 1.0 - math.sqrt(0.5), 1e-12)
    radii = [0.5, 1.0, 2.0]
    true_w = [0.2, 0.5, 0.3]
    grid = [0.05 * k for k in range(1, 60)]
    target = [
        sum(w * cx.chord_cdf(y, r) for w, r in zip(true_w, radii)) for y in grid
    ]
    sol = cx.solve_radius_weights(grid, target, radii)
    assert sol["converged"] and sol["rmse"] < 1e-8
    for w_hat, w in zip(sol["weights"], true_w):
        approx(w_hat, w, 1e-6)
    fit = cx.fit_lognormal_to_pmf(sol["radii"], sol["weights"])
    assert fit["rmse"] < 0.25 and math.isfinite(fit["mu"]) and fit["sigma2"] > 0.0
    print(
        f"radius recovery rmse {sol['rmse']:.2e}; "
        f"lognormal summary mu {fit['mu']:.2f} dB, sigma2 {fit['sigma2']:.2f}"
    )

    # --- component gain and visibility budget ------------------------------
    approx(cx.gain((0.0, 0.0), 1.5, (0.0, 0.0)), 1.0)
    approx(cx.gain((0.0, 0.0), 1.5, (1.5, 0.0)), math.exp(-0.5), 1e-12)
    r = cx.sample_radius(-19.8, 101.3, seed=1)
    assert r > 0.0
    assert cx.required_num_mpcs(100.0, 2.0, 10.0 * math.log10(0.5), 0.0) == 1600
    print(f"sampled radius {r:.4f} m; component budget check passed")

    # --- scenarios and synthesis -------------------------------------------
    indoor = cx.indoor_scenario_toml()
    outdoor = cx.outdoor_scenario_toml()
    assert "M = 32" in indoor and "M = 128" in outdoor
    twin = cx.twin_scenario_toml(30.0, 60.0, 2, 8, 10.0)
    assert "T = 300" in twin
    twin = twin.replace("T = 300", "T = 3")
    field = cx.synthesize(twin, seed=11)
    assert field.dims() == (2, 8, 3, 1)
    users, antennas, snapshots, bins = field.dims()
    energy = field.user_energy(0)
    approx(energy, antennas * snapshots * bins, 1e-6)
    re, im = field.at(0, 0, 0, 0)
    assert math.isfinite(re) and math.isfinite(im)
    kappa = field.condition_numbers()
    assert kappa["finite_count"] + kappa["infinite_count"] == snapshots * bins
    assert kappa["finite_count"] > 0 and kappa["median_db"] >= 0.0
    with tempfile.TemporaryDirectory() as td:
        out = Path(td) / "channel.bin"
        field.save(str(out))
        header = 4 * 8
        payload = 2 * 8 * users * antennas * snapshots * bins
        assert out.stat().st_size == header + payload
    print(
        f"synthesized {field.dims()} tensor, per-user energy {energy:.3f}, "
        f"median condition number {kappa['median_db']:.2f} dB"
    )

    # --- error mapping ------------------------------------------------------
    try:
        cx.mle_exponential([], (0.0, 10.0), 0.0)
    except ValueError as e:
        assert "insufficient_data" in str(e), e
    else:
        raise AssertionError("empty dataset must raise")
    try:
        cx.simulate_bsvr(-1.0, 10.0)
    except ValueError as e:
        assert "invalid_parameter" in str(e), e
    else:
        raise AssertionError("negative rate must raise")
    print("error mapping: core error kinds surface in ValueError messages")

    print("smoke test passed")


if __name__ == "__main__":
    main()
