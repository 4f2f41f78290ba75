"""Command-line interface: fit, simulate, casestudy, verify.

Exit codes: 0 success, 1 property-check failure, 2 usage or input error,
3 numerical failure.  All randomness flows from --seed/--seed-base flags;
nothing is ever seeded from the clock.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
import sys

import click
import numpy as np

from . import __version__
from .cmapss import CaseStudyConfig, ingest_cmapss, run_case_study, truncate_signals
from .data import Dataset
from .exceptions import (
    ConvergenceError,
    DegenerateFitError,
    SolverError,
    ValidationError,
)
from .families import Family
from .mechanism import (
    PrivacyBudget,
    empirical_sensitivity,
    max_privacy_ratio,
    perturb_weights,
    sensitivity,
    taylor_weights,
    weight_labels,
)
from .metrics import PREDICT_MODES
from .mle import fit_mle
from .reports import format_float, write_manifest, write_summary
from .scaling import apply_scaling, fit_scaling
from .simulate import SimConfig, sweep
from .solver import fit_dp

_NUMERICAL_FAILURES = (ConvergenceError, DegenerateFitError, SolverError)

_FAMILY_CHOICE = click.Choice(["sev", "logistic", "weibull", "loglogistic"])
_MODE_CHOICE = click.Choice(list(PREDICT_MODES))


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    raise SystemExit(code)


def _load_table(path: str, response: str):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        _fail(2, f"cannot read {path}: {exc}")
    if len(rows) < 2:
        _fail(2, f"{path}: need a header row plus at least one data row")
    header = [h.strip() for h in rows[0]]
    if response not in header:
        _fail(2, f"{path}: no column named {response!r} (columns: {header})")
    y_col = header.index(response)
    predictors = [h for i, h in enumerate(header) if i != y_col]
    x_rows, y_vals = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            _fail(2, f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            values = [float(v) for v in row]
        except ValueError:
            _fail(2, f"{path}:{lineno}: non-numeric value")
        y_vals.append(values[y_col])
        x_rows.append([v for i, v in enumerate(values) if i != y_col])
    return np.array(x_rows), np.array(y_vals), predictors


def _parse_values(text: str, kind):
    try:
        values = [kind(v.strip()) for v in text.split(",") if v.strip()]
    except ValueError:
        _fail(2, f"cannot parse value list {text!r}")
    if not values:
        _fail(2, "empty value list")
    return values


def _echo_records(records):
    click.echo("factor,value,arm,median,q1,q3,count,failures")
    for record in records:
        for arm in ("dp", "nondp"):
            summary = getattr(record, f"{arm}_summary")
            failures = getattr(record, f"{arm}_failures")
            if summary is None:
                stats = ",,,0"
            else:
                stats = (
                    f"{summary.median:.4f},{summary.q1:.4f},"
                    f"{summary.q3:.4f},{summary.count}"
                )
            click.echo(
                f"{record.factor_name},{record.factor_value},{arm},{stats},{failures}"
            )


@click.group()
@click.version_option(version=__version__, prog_name="dplls")
def main():
    """Differentially private log-location-scale regression."""


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(), help="CSV with a header row.")
@click.option("--response", required=True, help="Name of the response column.")
@click.option("--family", default="sev", type=_FAMILY_CHOICE, show_default=True)
@click.option("--epsilon", type=float, default=None, help="Privacy budget (omit with --no-dp).")
@click.option("--no-dp", is_flag=True, help="Fit the exact maximum-likelihood model instead.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--predict-mode", default="location", type=_MODE_CHOICE, show_default=True)
@click.option("--out-dir", default=".", type=click.Path(), show_default=True)
def fit(input_path, response, family, epsilon, no_dp, seed, predict_mode, out_dir):
    """Fit one model to a CSV dataset and write coefficients + diagnostics."""
    x, y, predictors = _load_table(input_path, response)
    fam = Family.parse(family)
    try:
        data = Dataset(x, y, fam)
        spec = fit_scaling(data)
        std = apply_scaling(data, spec)
        if no_dp:
            result = fit_mle(std, fam)
        else:
            if epsilon is None:
                _fail(2, "--epsilon is required unless --no-dp is given")
            if epsilon <= 0:
                _fail(2, "--epsilon must be positive")
            result = fit_dp(std, fam, PrivacyBudget(epsilon), seed)
    except ValidationError as exc:
        _fail(2, str(exc))
    except _NUMERICAL_FAILURES as exc:
        _fail(3, str(exc))

    os.makedirs(out_dir, exist_ok=True)
    coef_path = os.path.join(out_dir, "coefficients.csv")
    terms = ["sigma", "intercept"] + predictors
    values = [result.params.sigma, *result.params.beta]
    with open(coef_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("term,estimate\n")
        for term, value in zip(terms, values):
            fh.write(f"{term},{format_float(value)}\n")

    diag_path = os.path.join(out_dir, "diagnostics.json")
    with open(diag_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(dataclasses.asdict(result.diagnostics), fh, indent=2, sort_keys=True)
        fh.write("\n")

    if not no_dp:
        # Audit trail: the released (already perturbed) surrogate weights.
        noisy = perturb_weights(
            taylor_weights(std, fam), fam, PrivacyBudget(epsilon), seed
        )
        weights_path = os.path.join(out_dir, "weights.csv")
        with open(weights_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("weight,value\n")
            for label, value in zip(weight_labels(data.d), noisy.flatten()):
                fh.write(f"{label},{format_float(value)}\n")

    arm = "nondp" if no_dp else f"dp(epsilon={epsilon})"
    click.echo(f"fitted {fam.name} [{arm}] on n={data.n}, d={data.d}")
    click.echo(f"sigma={result.params.sigma:.6g} objective={result.diagnostics.objective_value:.6g}")
    click.echo(f"wrote {coef_path} and {diag_path}")


@main.command()
@click.option("--factor", required=True, type=click.Choice(sorted(["dimension", "sample_size", "epsilon"])))
@click.option("--values", "values_text", required=True, help="Comma-separated factor values.")
@click.option("--family", default="sev", type=_FAMILY_CHOICE, show_default=True)
@click.option("--n", type=int, default=10000, show_default=True)
@click.option("--d", type=int, default=5, show_default=True)
@click.option("--epsilon", type=float, default=0.5, show_default=True)
@click.option("--repetitions", type=int, default=100, show_default=True)
@click.option("--train-fraction", type=float, default=0.8, show_default=True)
@click.option("--seed-base", type=int, default=0, show_default=True)
@click.option("--predict-mode", default="location", type=_MODE_CHOICE, show_default=True)
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--threads", type=int, default=1, show_default=True)
def simulate(factor, values_text, family, n, d, epsilon, repetitions, train_fraction,
             seed_base, predict_mode, out_dir, threads):
    """Run a seeded synthetic sweep and emit raw + summary CSVs."""
    kind = float if factor == "epsilon" else int
    values = _parse_values(values_text, kind)
    try:
        config = SimConfig(
            family=Family.parse(family),
            n=n,
            d=d,
            epsilon=epsilon,
            repetitions=repetitions,
            train_fraction=train_fraction,
            seed_base=seed_base,
            predict_mode=predict_mode,
        )
        records = sweep(factor, config, values, out_dir=out_dir, threads=threads)
    except ValidationError as exc:
        _fail(2, str(exc))
    except _NUMERICAL_FAILURES as exc:
        _fail(3, str(exc))

    summary_path = write_summary(out_dir, records)
    outputs = [summary_path] + [r.raw_errors_path for r in records]
    write_manifest(
        out_dir,
        command="simulate",
        config={
            "factor": factor,
            "values": values,
            "family": family,
            "n": n,
            "d": d,
            "epsilon": epsilon,
            "repetitions": repetitions,
            "train_fraction": train_fraction,
            "predict_mode": predict_mode,
            "threads": threads,
        },
        outputs=outputs,
        seed_base=seed_base,
    )
    _echo_records(records)
    click.echo(f"wrote {summary_path}")


@main.command()
@click.option("--train", "train_path", required=True, type=click.Path())
@click.option("--test", "test_path", required=True, type=click.Path())
@click.option("--truth", "truth_path", required=True, type=click.Path())
@click.option("--sweep", "sweep_name", required=True, type=click.Choice(["dimension", "epsilon"]))
@click.option("--repetitions", type=int, default=500, show_default=True)
@click.option("--epsilon", type=float, default=5.0, show_default=True, help="Fixed budget for the dimension sweep.")
@click.option("--components", type=int, default=3, show_default=True, help="Fixed k for the epsilon sweep.")
@click.option("--k-values", default="3,4,5,6", show_default=True)
@click.option("--epsilon-values", default="0.3,0.4,0.5,0.6,0.7,0.8,0.9,1,1.5,2,3,4,5,10", show_default=True)
@click.option("--horizon", type=int, default=150, show_default=True)
@click.option("--family", default="sev", type=_FAMILY_CHOICE, show_default=True)
@click.option("--seed-base", type=int, default=0, show_default=True)
@click.option("--predict-mode", default="location", type=_MODE_CHOICE, show_default=True)
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--threads", type=int, default=1, show_default=True)
def casestudy(train_path, test_path, truth_path, sweep_name, repetitions, epsilon,
              components, k_values, epsilon_values, horizon, family, seed_base,
              predict_mode, out_dir, threads):
    """Run the turbofan case study from the three data files."""
    for path in (train_path, test_path, truth_path):
        if not os.path.exists(path):
            _fail(2, f"missing data file: {path}")
    try:
        train_signals, test_signals = ingest_cmapss(train_path, test_path, truth_path)
        train_signals = truncate_signals(train_signals, horizon)
        test_signals = truncate_signals(test_signals, horizon)
        config = CaseStudyConfig(
            sweep=sweep_name,
            k_values=tuple(_parse_values(k_values, int)),
            epsilon_values=tuple(_parse_values(epsilon_values, float)),
            epsilon=epsilon,
            k=components,
            repetitions=repetitions,
            seed_base=seed_base,
            family=Family.parse(family),
            predict_mode=predict_mode,
        )
        records = run_case_study(
            train_signals, test_signals, config, out_dir=out_dir, threads=threads
        )
    except ValidationError as exc:
        _fail(2, str(exc))
    except _NUMERICAL_FAILURES as exc:
        _fail(3, str(exc))

    summary_path = write_summary(out_dir, records)
    outputs = [summary_path] + [r.raw_errors_path for r in records]
    write_manifest(
        out_dir,
        command="casestudy",
        config={
            "sweep": sweep_name,
            "repetitions": repetitions,
            "epsilon": epsilon,
            "components": components,
            "k_values": k_values,
            "epsilon_values": epsilon_values,
            "horizon": horizon,
            "family": family,
            "predict_mode": predict_mode,
            "threads": threads,
            "train_engines": len(train_signals),
            "test_engines": len(test_signals),
        },
        outputs=outputs,
        seed_base=seed_base,
    )
    click.echo(f"{len(train_signals)} training engines, {len(test_signals)} test engines after truncation")
    _echo_records(records)
    click.echo(f"wrote {summary_path}")


@main.command()
@click.option("--family", default="sev", type=_FAMILY_CHOICE, show_default=True)
@click.option("--d", type=int, default=5, show_default=True)
@click.option("--trials", type=int, default=10000, show_default=True)
@click.option("--pairs", type=int, default=1000, show_default=True)
@click.option("--observed", type=int, default=10, show_default=True)
@click.option("--epsilon", "epsilons", type=float, multiple=True, default=(0.3, 1.0, 5.0), show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def verify(family, d, trials, pairs, observed, epsilons, seed):
    """Check the sensitivity bound and the privacy ratio empirically."""
    if trials < 1 or pairs < 1 or observed < 1 or d < 1:
        _fail(2, "trials, pairs, observed, and d must all be >= 1")
    fam = Family.parse(family)
    failed = False

    bound = sensitivity(fam, d)
    observed_max = empirical_sensitivity(fam, n=8, d=d, trials=trials, seed=seed)
    ok = observed_max <= bound + 1e-9
    failed |= not ok
    click.echo(
        f"{'PASS' if ok else 'FAIL'} sensitivity[{fam.name}, d={d}]: "
        f"observed max {observed_max:.6f} <= bound {bound:.6f} over {trials} trials"
    )

    for eps in epsilons:
        if eps <= 0:
            _fail(2, "--epsilon values must be positive")
        ratio = max_privacy_ratio(
            fam, d, PrivacyBudget(eps), pairs=pairs, observed_per_pair=observed, seed=seed
        )
        ok = ratio <= eps + 1e-9
        failed |= not ok
        click.echo(
            f"{'PASS' if ok else 'FAIL'} privacy-ratio[{fam.name}, d={d}, eps={eps}]: "
            f"max log-ratio {ratio:.6f} <= {eps} over {pairs}x{observed} outputs"
        )

    if failed:
        raise SystemExit(1)


if __name__ == "__main__":
    main(sys.argv[1:])
