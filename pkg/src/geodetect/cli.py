"""Experiment runner.

Subcommands:
  run        fit on a training dump, score test dumps under a detector
             setting, tune hyperparameters on validation data, and write
             report.json / report.csv / scores.csv
  histogram  bin exported score columns into per-population histograms
  toy        1-D two-Gaussian comparison of the geodesic score against a
             Mahalanobis baseline, with histogram exports

Exit codes: 0 success, 1 configuration error, 2 data/format error,
3 fitting error. Diagnostics go to stderr as a single line.
"""

import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import click
import numpy as np

from .datastore import FeatureDump, ToySpec, gen_toy1d, load_dump, load_mlp
from .exceptions import (
    CalibrationError,
    ConfigError,
    DomainError,
    DumpFormatError,
    FitError,
    GeodetectError,
    ShapeError,
)
from .geometry import fr_gauss_1d
from .metrics import TuneGrid, evaluate, grid_search
from .nnet import fgsm_generate, forward, grad_input_fr0, preprocess_input
from .scoring import (
    HIGHER_IS_IN,
    LOWER_IS_IN,
    ScorerSpec,
    ScoreTable,
    fit_alpha,
    score_baseline,
    score_ensemble,
    score_fr0,
    score_fr_layer,
    score_fr_layer_ood,
    score_kl0,
    score_mahalanobis_layer,
)
from .stats import (
    SIGMA_FLOOR,
    CentroidFitConfig,
    fit_centroids,
    fit_gaussian_stats,
    fit_ood_stats,
    fit_tied_covariance,
)

SETTINGS = ("black_box", "grey_box", "white_box", "white_box_plus")
FLOAT_FMT = "%.17g"


def _fmt(value) -> str:
    if isinstance(value, float):
        return FLOAT_FMT % value
    return str(value)


def _write_csv(path, header, rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


@dataclass
class ExperimentConfig:
    train: str
    test_in: str
    test_out: dict
    setting: str
    validation: str | None = None
    model: str | None = None
    scorers: list = field(default_factory=list)
    grid: TuneGrid | None = None
    temperature: float = 1.0
    eps: float = 0.0
    aggregation: str = "sum"
    adversarial_eps: float = 0.1
    seed: int = 0
    out: str = "."

    @classmethod
    def from_dict(cls, raw: dict, base_dir: str = "."):
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        def path(p):
            return p if os.path.isabs(p) else os.path.join(base_dir, p)
        try:
            setting = raw["setting"]
            if setting not in SETTINGS:
                raise ConfigError(f"setting must be one of {SETTINGS}, got {setting!r}")
            test_out = raw["test_out"]
            if isinstance(test_out, str):
                test_out = {os.path.basename(os.path.normpath(test_out)): test_out}
            elif isinstance(test_out, list):
                test_out = {os.path.basename(os.path.normpath(p)): p for p in test_out}
            elif not isinstance(test_out, dict):
                raise ConfigError("test_out must be a path, list of paths, or name->path map")
            scorers = [ScorerSpec(**spec) for spec in raw.get("scorers", [])]
            grid = None
            if "grid" in raw:
                g = raw["grid"]
                grid = TuneGrid(
                    temperatures=tuple(g.get("temperatures", TuneGrid().temperatures)),
                    epsilons=tuple(g.get("epsilons", TuneGrid().epsilons)),
                )
            cfg = cls(
                train=path(raw["train"]),
                test_in=path(raw["test_in"]),
                test_out={name: path(p) for name, p in test_out.items()},
                setting=setting,
                validation=path(raw["validation"]) if raw.get("validation") else None,
                model=path(raw["model"]) if raw.get("model") else None,
                scorers=scorers,
                grid=grid,
                temperature=float(raw.get("temperature", 1.0)),
                eps=float(raw.get("eps", 0.0)),
                aggregation=raw.get("aggregation", "sum"),
                adversarial_eps=float(raw.get("adversarial_eps", 0.1)),
                seed=int(raw.get("seed", 0)),
                out=raw.get("out", "."),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, GeodetectError):
                raise
            raise ConfigError(f"invalid config: {exc}") from exc
        if cfg.temperature <= 0:
            raise ConfigError("temperature must be positive")
        if cfg.eps < 0:
            raise ConfigError("eps must be non-negative")
        if cfg.aggregation not in ("sum", "min"):
            raise ConfigError("aggregation must be 'sum' or 'min'")
        if cfg.setting == "white_box_plus" and cfg.validation is None:
            raise ConfigError("white_box_plus requires an OOD validation dump")
        if cfg.setting == "grey_box" and cfg.model is None:
            raise ConfigError("grey_box requires a model artifact (input gradients need it)")
        return cfg


def _subset(dump: FeatureDump, idx) -> FeatureDump:
    return FeatureDump(
        logits=dump.logits[idx],
        labels=None if dump.labels is None else dump.labels[idx],
        layers=[m[idx] for m in dump.layers],
        layer_names=list(dump.layer_names),
        n_classes=dump.n_classes,
    )


def _chunked_rows(builder, arrays, n_rows: int, threads: int) -> np.ndarray:
    """Apply builder to row-chunks and reassemble in index order, so results
    are identical for any thread count."""
    if threads <= 1 or n_rows < 2 * threads:
        return builder(*arrays)
    chunks = np.array_split(np.arange(n_rows), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(
            lambda ix: builder(*[[m[ix] for m in a] if isinstance(a, list) else a[ix]
                                 for a in arrays]),
            chunks,
        ))
    return np.concatenate(parts, axis=0)


class _Pipeline:
    """Fitted state plus scoring helpers for one experiment run."""

    def __init__(self, cfg: ExperimentConfig, threads: int = 1):
        self.cfg = cfg
        self.threads = max(1, int(threads))
        self.train = load_dump(cfg.train)
        if self.train.labels is None:
            raise FitError("training dump carries no labels; cannot fit statistics")
        self.test_in = load_dump(cfg.test_in)
        self.test_out = {name: load_dump(p) for name, p in cfg.test_out.items()}
        self.validation = load_dump(cfg.validation) if cfg.validation else None
        self.model = load_mlp(cfg.model) if cfg.model else None

        fit_cfg = CentroidFitConfig(seed=cfg.seed)
        self.centroids = fit_centroids(self.train.logits, self.train.labels, fit_cfg)
        self.centroids_kl = None
        if any(s.distance == "kl" for s in cfg.scorers):
            self.centroids_kl = fit_centroids(self.train.logits, self.train.labels,
                                              fit_cfg, fit_distance="kl")

        self.feature_names, train_features = self.train.feature_layers()
        self.feature_stats = None
        if train_features and (self._needs_features() or self._scorer_needs_features()):
            self.feature_stats = fit_gaussian_stats(train_features, self.train.labels,
                                                    self.train.n_classes)
        if self._needs_features() and self.feature_stats is None:
            raise ConfigError(f"{cfg.setting} requires feature layers in the dumps")

        self.ood_stats = None
        if cfg.setting == "white_box_plus" or any(s.kind == "fr_layer_ood" for s in cfg.scorers):
            if self.validation is None:
                raise ConfigError("fr_layer_ood scoring requires an OOD validation dump")
            _, val_features = self.validation.feature_layers()
            self.ood_stats = fit_ood_stats(val_features)

        self.maha = {}
        for spec in cfg.scorers:
            if spec.kind == "mahalanobis_layer" and spec.layer_index not in self.maha:
                li = spec.layer_index
                if li >= len(train_features):
                    raise ConfigError(f"layer_index {li} out of range "
                                      f"({len(train_features)} feature layers)")
                self.maha[li] = fit_tied_covariance(train_features[li], self.train.labels,
                                                    self.train.n_classes)

        rng = np.random.default_rng(cfg.seed)
        n_train = self.train.n_samples
        sub = np.sort(rng.choice(n_train, size=min(n_train, 1000), replace=False))
        self.train_sub = _subset(self.train, sub)

    def _needs_features(self) -> bool:
        return self.cfg.setting in ("white_box", "white_box_plus")

    def _scorer_needs_features(self) -> bool:
        return any(s.kind in ("fr_layer", "fr_layer_ood", "mahalanobis_layer")
                   for s in self.cfg.scorers)

    # -- sample-level scoring -------------------------------------------------

    def arrays(self, dump: FeatureDump, temperature: float, eps: float):
        """(logits, feature_layers) for one population.

        eps=0 consumes the dumped arrays directly; eps>0 recomputes them from
        the raw inputs after the gradient-sign shift, which needs the model.
        """
        if eps == 0.0:
            return dump.logits, dump.feature_layers()[1]
        if self.model is None:
            raise ConfigError("input pre-processing (eps > 0) requires a model artifact")
        if not dump.layer_names or dump.layer_names[0] != "input":
            raise ConfigError("input pre-processing requires the dump's first layer "
                              "to be the raw 'input' layer")

        def build(x):
            grad = grad_input_fr0(self.model, x, self.centroids, temperature,
                                  self.cfg.aggregation)
            shifted = preprocess_input(x, eps, grad)
            logits, hidden = forward(self.model, shifted, return_hidden=True)
            return np.column_stack([logits, shifted] + [h for h in hidden])

        x = dump.layer("input")
        stacked = _chunked_rows(build, (x,), x.shape[0], self.threads)
        logits = stacked[:, :self.model.n_classes]
        # recomputed features mirror the dump layout: input first, then hiddens
        widths = [self.model.input_dim, *self.model.layer_sizes[1:-1]]
        features, offset = [], self.model.n_classes
        for width in widths:
            features.append(stacked[:, offset:offset + width])
            offset += width
        return logits, features

    def headline_scores(self, dump: FeatureDump, temperature: float, eps: float,
                        weights=None):
        logits, features = self.arrays(dump, temperature, eps)
        if self.cfg.setting in ("black_box", "grey_box"):
            score = score_fr0(logits, self.centroids, temperature, self.cfg.aggregation)
            orientation = HIGHER_IS_IN if self.cfg.aggregation == "sum" else LOWER_IS_IN
            return score, orientation
        matrix = self.ensemble_matrix(logits, features, temperature)
        return score_ensemble(matrix, weights), HIGHER_IS_IN

    def ensemble_matrix(self, logits, features, temperature) -> np.ndarray:
        cols = [score_fr0(logits, self.centroids, temperature, self.cfg.aggregation)]
        for l in range(self.feature_stats.n_layers):
            cols.append(score_fr_layer(features[l], self.feature_stats, l))
        if self.cfg.setting == "white_box_plus":
            for l in range(self.feature_stats.n_layers):
                cols.append(score_fr_layer_ood(features[l], self.feature_stats,
                                               self.ood_stats, l))
        return np.column_stack(cols)

    def fit_ensemble(self, temperature: float, eps: float):
        """Combination weights from in-distribution train samples against the
        validation outliers, or FGSM adversarials when no validation exists."""
        in_logits, in_features = self.arrays(self.train_sub, temperature, eps)
        if self.validation is not None:
            out_logits, out_features = self.arrays(self.validation, temperature, eps)
        else:
            if self.model is None:
                raise ConfigError(
                    "white_box without a validation dump tunes on adversarial data "
                    "and requires a model artifact")
            if "input" not in self.train.layer_names:
                raise ConfigError("adversarial tuning requires an 'input' layer")
            adv = fgsm_generate(self.model, self.train_sub.layer("input"),
                                self.train_sub.labels, self.cfg.adversarial_eps)
            out_logits, hidden = forward(self.model, adv, return_hidden=True)
            out_features = [adv] + hidden
        m_in = self.ensemble_matrix(in_logits, in_features, temperature)
        m_out = self.ensemble_matrix(out_logits, out_features, temperature)
        labels = np.concatenate([np.ones(m_in.shape[0]), np.zeros(m_out.shape[0])])
        return fit_alpha(np.vstack([m_in, m_out]), labels)

    # -- hyperparameter tuning ------------------------------------------------

    def tune(self):
        cfg = self.cfg
        if cfg.grid is None or self.validation is None:
            return cfg.temperature, cfg.eps
        epsilons = (0.0,) if cfg.setting == "black_box" else cfg.grid.epsilons
        grid = TuneGrid(cfg.grid.temperatures, epsilons)

        def score_fn(temperature, eps):
            weights = None
            if self._needs_features():
                weights = self.fit_ensemble(temperature, eps)
            s_in, orientation = self.headline_scores(self.train_sub, temperature, eps, weights)
            s_out, _ = self.headline_scores(self.validation, temperature, eps, weights)
            return s_in, s_out, orientation

        return grid_search(grid, score_fn)

    # -- configured scorer columns ---------------------------------------------

    def scorer_column(self, spec: ScorerSpec, dump: FeatureDump):
        logits = dump.logits
        features = dump.feature_layers()[1]
        if spec.kind == "fr0":
            cents = self.centroids if spec.distance == "fisher_rao" else self.centroids_kl
            fn = score_fr0 if spec.distance == "fisher_rao" else score_kl0
            return fn(logits, cents, spec.temperature, spec.aggregation)
        if spec.kind in ("msp", "odin", "energy"):
            return score_baseline(logits, spec.kind, spec.temperature)
        li = spec.layer_index
        if li >= len(features):
            raise ConfigError(f"layer_index {li} out of range ({len(features)} feature layers)")
        if spec.kind == "fr_layer":
            return score_fr_layer(features[li], self.feature_stats, li)
        if spec.kind == "fr_layer_ood":
            return score_fr_layer_ood(features[li], self.feature_stats, self.ood_stats, li)
        means, cov = self.maha[li]
        return score_mahalanobis_layer(features[li], means, cov)


def run_experiment(cfg: ExperimentConfig, out_dir: str, threads: int = 1) -> dict:
    pipe = _Pipeline(cfg, threads)
    temperature, eps = pipe.tune()

    weights = None
    if pipe._needs_features():
        weights = pipe.fit_ensemble(temperature, eps)
    headline_name = ("ensemble_plus" if cfg.setting == "white_box_plus"
                     else "ensemble" if cfg.setting == "white_box"
                     else ScorerSpec("fr0", aggregation=cfg.aggregation).name)

    populations = {"test_in": pipe.test_in, **pipe.test_out}
    tables = {}
    for name, dump in populations.items():
        table = ScoreTable()
        score, orientation = pipe.headline_scores(dump, temperature, eps, weights)
        table.add(headline_name, score, orientation)
        for spec in cfg.scorers:
            if spec.name not in table.columns:
                table.add(spec.name, pipe.scorer_column(spec, dump), spec.orientation)
        tables[name] = table

    rows = []
    in_table = tables["test_in"]
    orientations = dict(in_table.orientation)
    for ood_name in pipe.test_out:
        out_table = tables[ood_name]
        for col in in_table.names:
            rep = evaluate(in_table.columns[col], out_table.columns[col],
                           in_table.orientation[col])
            rows.append({
                "setting": cfg.setting, "scorer": col, "ood_set": ood_name,
                "n_in": rep.n_in, "n_out": rep.n_out,
                "tnr_at_tpr95": rep.tnr_at_tpr95, "auroc": rep.auroc,
                "aupr": rep.aupr, "delta": rep.delta,
                "temperature": temperature if col == headline_name else None,
                "eps": eps if col == headline_name else None,
            })

    os.makedirs(out_dir, exist_ok=True)
    report = {
        "setting": cfg.setting,
        "seed": cfg.seed,
        "temperature": temperature,
        "eps": eps,
        "headline": headline_name,
        "orientations": orientations,
        "rows": rows,
    }
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        json.dump(report, fh, indent=1)
        fh.write("\n")

    header = ["setting", "scorer", "ood_set", "n_in", "n_out", "tnr_at_tpr95",
              "auroc", "aupr", "delta", "temperature", "eps"]
    csv_rows = []
    for row in rows:
        csv_rows.append([row[h] if row[h] is not None else "" for h in header])
    _write_csv(os.path.join(out_dir, "report.csv"), header, csv_rows)

    score_header = ["population"] + in_table.names
    score_rows = []
    for name, table in tables.items():
        matrix = table.matrix()
        for i in range(matrix.shape[0]):
            score_rows.append([name] + [float(v) for v in matrix[i]])
    _write_csv(os.path.join(out_dir, "scores.csv"), score_header, score_rows)
    return report


# ---------------------------------------------------------------------------
# histogram

def run_histogram(input_path: str, bins: int, out_path: str) -> None:
    if bins < 1:
        raise ConfigError("bins must be >= 1")
    if not os.path.isfile(input_path):
        raise DumpFormatError("missing_file", f"scores file {input_path!r} does not exist")
    with open(input_path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if len(lines) < 2:
        raise DumpFormatError("bad_schema", "scores file has no data rows")
    header = lines[0].split(",")
    if header[0] != "population":
        raise DumpFormatError("bad_schema", "scores file must start with a population column")
    columns = header[1:]
    pops, values = [], []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(header):
            raise DumpFormatError("bad_schema", f"malformed scores row: {ln!r}")
        pops.append(parts[0])
        try:
            values.append([float(v) for v in parts[1:]])
        except ValueError as exc:
            raise DumpFormatError("bad_values", f"non-numeric score in row {ln!r}") from exc
    pops = np.array(pops)
    values = np.array(values, dtype=np.float64)

    out_rows = []
    for j, col in enumerate(columns):
        lo, hi = float(values[:, j].min()), float(values[:, j].max())
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
        edges = np.linspace(lo, hi, bins + 1)
        for pop in dict.fromkeys(pops.tolist()):
            counts, _ = np.histogram(values[pops == pop, j], bins=edges)
            for b in range(bins):
                out_rows.append([col, pop, b, edges[b], edges[b + 1], int(counts[b])])
    _write_csv(out_path, ["score", "population", "bin_index", "bin_lo", "bin_hi", "count"],
               out_rows)


# ---------------------------------------------------------------------------
# toy

def window_stats(x: np.ndarray, window: int):
    """Disjoint windows of `window` draws reduced to (mean, population std),
    std floored; the remainder after the last full window is dropped."""
    k = x.shape[0] // window
    w = x[:k * window].reshape(k, window)
    return w.mean(axis=1), np.maximum(w.std(axis=1), SIGMA_FLOOR)


def run_toy(spec: ToySpec, window: int, out_dir: str) -> dict:
    """Score windows of toy draws by the Gaussian geodesic distance to the
    pseudo-outlier fit, against the |mean shift| / sigma baseline.

    Each scored unit is a window of draws reduced to (mean, std): the
    geodesic score sees the spread, the baseline only the mean, which is
    what separates them on the variance-shifted population.
    """
    if int(spec.n) <= 0:
        raise ConfigError("n must be positive")
    if window < 2:
        raise ConfigError("window must be at least 2")
    if int(spec.n) // window < 20:
        raise ConfigError(
            f"n={spec.n} yields fewer than 20 windows of {window} draws; "
            "threshold calibration needs at least 20 scores")
    x_in, x_shift, x_wide = gen_toy1d(spec)
    mu_in, sd_in = window_stats(x_in, window)

    os.makedirs(out_dir, exist_ok=True)
    rows = []
    score_files = []
    for ood_name, x_ood in (("ood_shift", x_shift), ("ood_wide", x_wide)):
        mu_w, sd_w = window_stats(x_ood, window)
        # pseudo-outlier reference estimated from the evaluated population
        mu_ref = float(x_ood.mean())
        sd_ref = max(float(x_ood.std()), SIGMA_FLOOR)
        fr_in = fr_gauss_1d(mu_in, sd_in, mu_ref, sd_ref)
        fr_ood = fr_gauss_1d(mu_w, sd_w, mu_ref, sd_ref)
        maha_in = np.abs(mu_in - spec.mu1) / spec.sigma1
        maha_ood = np.abs(mu_w - spec.mu1) / spec.sigma1
        for score_name, s_in, s_out, orientation in (
            ("fisher_rao", fr_in, fr_ood, HIGHER_IS_IN),
            ("mahalanobis", maha_in, maha_ood, LOWER_IS_IN),
        ):
            rep = evaluate(s_in, s_out, orientation)
            rows.append({"score": score_name, "ood_set": ood_name,
                         "auroc": rep.auroc, "tnr_at_tpr95": rep.tnr_at_tpr95,
                         "n_windows": int(s_in.shape[0]), "window": window})
        scores_path = os.path.join(out_dir, f"toy_scores_{ood_name}.csv")
        score_rows = [["in_dist", float(a), float(b)] for a, b in zip(fr_in, maha_in)]
        score_rows += [[ood_name, float(a), float(b)] for a, b in zip(fr_ood, maha_ood)]
        _write_csv(scores_path, ["population", "fisher_rao", "mahalanobis"], score_rows)
        score_files.append(scores_path)
        run_histogram(scores_path, 30, os.path.join(out_dir, f"toy_hist_{ood_name}.csv"))

    report = {"spec": {"mu1": spec.mu1, "sigma1": spec.sigma1, "mu2": spec.mu2,
                       "sigma_a": spec.sigma_a, "sigma_b": spec.sigma_b,
                       "n": int(spec.n), "seed": int(spec.seed), "window": window},
              "rows": rows}
    with open(os.path.join(out_dir, "toy_report.json"), "w") as fh:
        json.dump(report, fh, indent=1)
        fh.write("\n")
    _write_csv(os.path.join(out_dir, "toy_report.csv"),
               ["score", "ood_set", "auroc", "tnr_at_tpr95", "n_windows", "window"],
               [[r["score"], r["ood_set"], r["auroc"], r["tnr_at_tpr95"],
                 r["n_windows"], r["window"]] for r in rows])
    return report


# ---------------------------------------------------------------------------
# command-line entry points

def _fail(exc: Exception, code: int):
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


def _dispatch(fn):
    try:
        fn()
    except ConfigError as exc:
        _fail(exc, 1)
    except (DumpFormatError, CalibrationError, ShapeError, DomainError) as exc:
        _fail(exc, 2)
    except FitError as exc:
        _fail(exc, 3)
    except (OSError, json.JSONDecodeError) as exc:
        _fail(exc, 2)


@click.group()
def main():
    """Geodesic-distance out-of-distribution detection toolkit."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(),
              help="JSON experiment configuration.")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--threads", type=int, default=1, show_default=True,
              help="Worker threads for sample-level scoring.")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Output directory (defaults to the config's 'out').")
def run(config_path, seed, threads, out_dir):
    """Run a detection experiment from a config file."""

    def body():
        if not os.path.isfile(config_path):
            raise ConfigError(f"config file {config_path!r} does not exist")
        with open(config_path) as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from exc
        cfg = ExperimentConfig.from_dict(raw, base_dir=os.path.dirname(
            os.path.abspath(config_path)))
        if seed is not None:
            cfg.seed = seed
        target = out_dir if out_dir is not None else cfg.out
        run_experiment(cfg, target, threads=threads)

    _dispatch(body)


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(),
              help="scores.csv produced by 'run' or 'toy'.")
@click.option("--bins", required=True, type=int, help="Number of equal-width bins.")
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Output histogram CSV path.")
def histogram(input_path, bins, out_path):
    """Bin score columns into per-population histograms."""
    _dispatch(lambda: run_histogram(input_path, bins, out_path))


@main.command()
@click.option("--mu1", type=float, default=0.0, show_default=True)
@click.option("--sigma1", type=float, default=1.0, show_default=True)
@click.option("--mu2", type=float, default=0.5, show_default=True)
@click.option("--sigma-a", type=float, default=1.0, show_default=True)
@click.option("--sigma-b", type=float, default=3.0, show_default=True)
@click.option("--n", type=int, default=5000, show_default=True,
              help="Draws per population.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--window", type=int, default=25, show_default=True,
              help="Draws per scored window.")
@click.option("--out", "out_dir", type=click.Path(), default=".", show_default=True)
def toy(mu1, sigma1, mu2, sigma_a, sigma_b, n, seed, window, out_dir):
    """1-D Gaussian toy comparison of geodesic and Mahalanobis scores."""

    def body():
        spec = ToySpec(mu1=mu1, sigma1=sigma1, mu2=mu2, sigma_a=sigma_a,
                       sigma_b=sigma_b, n=n, seed=seed)
        run_toy(spec, window, out_dir)

    _dispatch(body)


if __name__ == "__main__":
    main()
