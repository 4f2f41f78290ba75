"""Acceptance gate: one test per criterion, each printing PASS/FAIL lines.

Criteria 1-5 and 10 are exact property gates.  Criteria 6-8 assert reference
medians for the private arm that this implementation does not reach: the
feature bounds enforced for the noise calibration (per-feature range
1/sqrt(d), response range [-1, 1]) leave the perturbed linear weights with a
per-coordinate signal far below the injected Laplace scale at those
settings, so no post-processing of the released weights can recover the
coefficients to the asserted accuracy.  Those sub-checks run faithfully and
report their measured values; see the failure messages for the numbers.
"""

import math
import os
import time

import numpy as np
import pytest

from dplls import (
    LOGISTIC,
    PrivacyBudget,
    QuadraticObjective,
    SEV,
    SimConfig,
    TransformedParams,
    empirical_sensitivity,
    fit_dp,
    generate_synthetic,
    loglik,
    loglik_grad,
    max_privacy_ratio,
    perturb_weights,
    sensitivity,
    solve_quadratic,
    summarize,
    sweep,
    taylor_weights,
)
from dplls.cli import main as cli_main
from dplls.scaling import apply_scaling, fit_scaling
from helpers import random_standardized

THREADS = 2


class Checks:
    """Collects named sub-checks so one criterion prints every outcome."""

    def __init__(self, criterion):
        self.criterion = criterion
        self.failures = []
        self.start = time.time()

    def check(self, name, ok, detail=""):
        line = f"  [{'pass' if ok else 'FAIL'}] {name}"
        if detail:
            line += f" ({detail})"
        print(line)
        if not ok:
            self.failures.append(f"{name}: {detail}" if detail else name)

    def finish(self):
        elapsed = time.time() - self.start
        status = "PASS" if not self.failures else "FAIL"
        print(f"ACCEPTANCE {self.criterion}: {status} [{elapsed:.1f}s]")
        if self.failures:
            pytest.fail(
                f"criterion {self.criterion}: " + "; ".join(self.failures),
                pytrace=False,
            )


def test_criterion_1_expansion_point_exactness():
    checks = Checks("1 expansion-point exactness")
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 40))
        d = int(rng.integers(1, 6))
        for family, target in ((SEV, -1.0), (LOGISTIC, -2.0 * math.log(2.0))):
            data = random_standardized(rng, n, d, family, y_zero=True)
            value = QuadraticObjective(taylor_weights(data, family)).value(
                np.zeros(d + 1), 1.0
            )
            worst = max(worst, abs(value - n * target) / abs(n * target))
    checks.check("surrogate equals exact log-likelihood at expansion point",
                 worst <= 1e-12, f"worst relative gap {worst:.2e}")
    checks.finish()


def test_criterion_2_sensitivity_soundness():
    checks = Checks("2 sensitivity soundness")
    for family in (SEV, LOGISTIC):
        for d in (1, 2, 5, 10, 25, 38):
            bound = sensitivity(family, d)
            observed = empirical_sensitivity(family, n=5, d=d, trials=10_000, seed=202)
            checks.check(
                f"{family.name} d={d}",
                observed <= bound,
                f"observed {observed:.4f} <= bound {bound:.4f}",
            )
    checks.finish()


def test_criterion_3_privacy_ratio():
    checks = Checks("3 privacy ratio")
    for family in (SEV, LOGISTIC):
        for eps in (0.3, 1.0, 5.0):
            worst = max_privacy_ratio(
                family, 5, PrivacyBudget(eps), pairs=1000, observed_per_pair=10, seed=303
            )
            checks.check(
                f"{family.name} eps={eps}",
                worst <= eps,
                f"max log-ratio {worst:.4f} <= {eps}",
            )
    checks.finish()


def test_criterion_4_gradient_checks():
    checks = Checks("4 gradient checks")
    rng = np.random.default_rng(404)
    worst = 0.0
    for i in range(100):
        family = SEV if i % 2 == 0 else LOGISTIC
        data = random_standardized(rng, 12, 3, family)
        params = TransformedParams(0.5 * rng.normal(size=4), float(rng.uniform(0.5, 2.0)))
        grad = loglik_grad(family, params, data)
        h = 1e-6
        fd = np.empty(5)
        for k in range(5):
            dp = np.zeros(4)
            if k < 4:
                dp[k] = h
                hi = loglik(family, TransformedParams(params.p + dp, params.q), data)
                lo = loglik(family, TransformedParams(params.p - dp, params.q), data)
            else:
                hi = loglik(family, TransformedParams(params.p, params.q + h), data)
                lo = loglik(family, TransformedParams(params.p, params.q - h), data)
            fd[k] = (hi - lo) / (2 * h)
        rel = np.max(np.abs(grad - fd)) / max(1.0, np.max(np.abs(grad)))
        worst = max(worst, rel)
    checks.check("analytic gradients match central differences",
                 worst <= 1e-6, f"worst relative error {worst:.2e}")
    checks.finish()


def test_criterion_5_vanishing_noise_consistency():
    checks = Checks("5 vanishing-noise consistency")
    data, _ = generate_synthetic(10_000, 5, SEV, seed=505)
    std = apply_scaling(data, fit_scaling(data))
    clean, _ = solve_quadratic(taylor_weights(std, SEV))
    clean_beta = clean.to_model().beta
    worst = 0.0
    for seed in range(10):
        private = fit_dp(std, SEV, PrivacyBudget(1e8), seed)
        worst = max(worst, float(np.max(np.abs(private.params.beta - clean_beta))))
    checks.check("DP coefficients approach the noiseless surrogate fit",
                 worst <= 1e-4, f"worst gap {worst:.2e} at eps=1e8 over 10 seeds")
    checks.finish()


def _sweep_medians(factor, config, values):
    records = sweep(factor, config, values, threads=THREADS)
    dp = {r.factor_value: r.dp_summary.median for r in records}
    nondp = {r.factor_value: r.nondp_summary.median for r in records}
    return dp, nondp


def test_criterion_6_logistic_dimension_sweep():
    checks = Checks("6 logistic dimension sweep")
    config = SimConfig(family=LOGISTIC, n=5_000, d=20, epsilon=0.5, repetitions=30)
    targets = {20: (0.45, 0.10), 26: (0.54, 0.12), 32: (0.66, 0.15), 36: (0.79, 0.18)}
    dp, nondp = _sweep_medians("dimension", config, sorted(targets))
    for d, (center, tol) in targets.items():
        checks.check(
            f"DP median at d={d} within {tol} of {center}",
            abs(dp[d] - center) <= tol,
            f"measured {dp[d]:.3f}",
        )
    for d in targets:
        checks.check(
            f"non-DP median at d={d} within 0.10 of 0.40",
            abs(nondp[d] - 0.40) <= 0.10,
            f"measured {nondp[d]:.3f}",
        )
    checks.check(
        "DP median increases from d=20 to d=36",
        dp[36] > dp[20],
        f"{dp[36]:.3f} vs {dp[20]:.3f}",
    )
    checks.finish()


def test_criterion_7_sev_sample_size_sweep():
    checks = Checks("7 sev sample-size sweep")
    config = SimConfig(family=SEV, n=10_000, d=35, epsilon=0.5, repetitions=30)
    targets = {10_000: (0.76, 0.15), 30_000: (0.35, 0.10), 60_000: (0.29, 0.08)}
    dp, nondp = _sweep_medians("sample_size", config, sorted(targets))
    for n, (center, tol) in targets.items():
        checks.check(
            f"DP median at n={n} within {tol} of {center}",
            abs(dp[n] - center) <= tol,
            f"measured {dp[n]:.3f}",
        )
    for n in targets:
        checks.check(
            f"non-DP median at n={n} in [0.19, 0.37]",
            0.19 <= nondp[n] <= 0.37,
            f"measured {nondp[n]:.3f}",
        )
    checks.finish()


def test_criterion_8_sev_epsilon_sweep():
    checks = Checks("8 sev epsilon sweep")
    config = SimConfig(family=SEV, n=10_000, d=25, epsilon=0.5, repetitions=30)
    dp, nondp = _sweep_medians("epsilon", config, [0.3, 1.0, 2.0])
    checks.check("DP median at eps=0.3 within 0.15 of 0.72",
                 abs(dp[0.3] - 0.72) <= 0.15, f"measured {dp[0.3]:.3f}")
    checks.check("DP median at eps=1 within 0.10 of 0.38",
                 abs(dp[1.0] - 0.38) <= 0.10, f"measured {dp[1.0]:.3f}")
    checks.check(
        "DP median at eps=2 within 0.07 of non-DP",
        abs(dp[2.0] - nondp[2.0]) <= 0.07,
        f"measured DP {dp[2.0]:.3f} vs non-DP {nondp[2.0]:.3f}",
    )
    checks.finish()


def _cmapss_paths():
    root = os.environ.get("DPLLS_CMAPSS_DIR")
    if not root:
        return None
    paths = {
        "train": os.path.join(root, "train_FD001.txt"),
        "test": os.path.join(root, "test_FD001.txt"),
        "truth": os.path.join(root, "RUL_FD001.txt"),
    }
    if all(os.path.exists(p) for p in paths.values()):
        return paths
    return None


def test_criterion_9_case_study():
    paths = _cmapss_paths()
    if paths is None:
        print("ACCEPTANCE 9 case study: SKIPPED (set DPLLS_CMAPSS_DIR to the "
              "directory holding train_FD001.txt, test_FD001.txt, RUL_FD001.txt)")
        pytest.skip("SKIPPED: turbofan FD001 files not supplied")
    from dplls.cmapss import CaseStudyConfig, ingest_cmapss, run_case_study, truncate_signals

    checks = Checks("9 case study")
    train, test = ingest_cmapss(paths["train"], paths["test"], paths["truth"])
    train = truncate_signals(train, 150)
    test = truncate_signals(test, 150)
    checks.check("94 training engines after truncation", len(train) == 94, str(len(train)))
    checks.check("37 test engines after truncation", len(test) == 37, str(len(test)))

    records = run_case_study(
        train,
        test,
        CaseStudyConfig(sweep="dimension", k_values=(3,), epsilon=5.0, repetitions=100),
        threads=THREADS,
    )
    dp_med = records[0].dp_summary.median
    nondp_med = records[0].nondp_summary.median
    checks.check("DP median at k=3, eps=5 in [0.14, 0.26]",
                 0.14 <= dp_med <= 0.26, f"measured {dp_med:.3f}")
    checks.check("non-DP median in [0.10, 0.20]",
                 0.10 <= nondp_med <= 0.20, f"measured {nondp_med:.3f}")

    records = run_case_study(
        train,
        test,
        CaseStudyConfig(
            sweep="epsilon", epsilon_values=(0.5, 5.0, 10.0), k=3, repetitions=100
        ),
        threads=THREADS,
    )
    eps_median = {r.factor_value: r.dp_summary.median for r in records}
    checks.check("DP median at eps=0.5 at least 0.5",
                 eps_median[0.5] >= 0.5, f"measured {eps_median[0.5]:.3f}")
    checks.check(
        "DP median at most 0.25 for eps >= 5",
        eps_median[5.0] <= 0.25 and eps_median[10.0] <= 0.25,
        f"measured {eps_median[5.0]:.3f} at 5, {eps_median[10.0]:.3f} at 10",
    )
    checks.finish()


def test_criterion_10_determinism(tmp_path):
    from click.testing import CliRunner

    checks = Checks("10 determinism")
    runner = CliRunner()
    args = ["simulate", "--factor", "epsilon", "--values", "0.5,1.0",
            "--family", "sev", "--n", "200", "--d", "3",
            "--repetitions", "4", "--seed-base", "7"]
    outs = [tmp_path / name for name in ("a", "b", "c")]
    for out, threads in zip(outs, ("1", "1", "3")):
        result = runner.invoke(cli_main, args + ["--out-dir", str(out), "--threads", threads])
        assert result.exit_code == 0, result.output
    names = sorted(p.name for p in outs[0].iterdir() if p.suffix == ".csv")
    same_rerun = all(
        (outs[0] / n).read_bytes() == (outs[1] / n).read_bytes() for n in names
    )
    same_threads = all(
        (outs[0] / n).read_bytes() == (outs[2] / n).read_bytes() for n in names
    )
    checks.check("rerun with same manifest is byte-identical", same_rerun)
    checks.check("thread count does not change output bytes", same_threads)

    from test_cmapss import write_cmapss_files

    paths = write_cmapss_files(
        tmp_path,
        train_lengths=[30, 40, 35, 45, 38, 42, 33, 36, 44, 31],
        test_observed=[32, 36, 30, 34],
        test_rul=[4, 2, 9, 0],
    )
    case_args = ["casestudy", "--train", str(paths["train"]), "--test", str(paths["test"]),
                 "--truth", str(paths["truth"]), "--sweep", "dimension",
                 "--k-values", "2,3", "--epsilon", "2.0", "--repetitions", "3",
                 "--horizon", "25", "--seed-base", "3"]
    case_outs = [tmp_path / name for name in ("ca", "cb")]
    for out, threads in zip(case_outs, ("1", "2")):
        result = runner.invoke(cli_main, case_args + ["--out-dir", str(out), "--threads", threads])
        assert result.exit_code == 0, result.output
    case_names = sorted(p.name for p in case_outs[0].iterdir() if p.suffix == ".csv")
    same_case = all(
        (case_outs[0] / n).read_bytes() == (case_outs[1] / n).read_bytes()
        for n in case_names
    )
    checks.check("case-study output independent of thread count", same_case)
    checks.finish()
