"""On-disk formats and seeded synthetic data.

Feature dumps are the exchange format for logits/features extracted from
any external model: a human-readable manifest.json next to raw row-major
little-endian binaries (f32 for data, u32 for labels). In memory everything
is float64; files are decoded explicitly as little-endian so dumps travel
across machines of either endianness.

Fitted artifacts (network parameters, centroids, feature statistics) use
the same layout with float64 binaries, since they must round-trip exactly.
"""

import json
import os
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, DumpFormatError
from .nnet import MlpParams
from .stats import CentroidSet, FeatureStats, OodStats
from .validation import as_matrix, check_labels

DUMP_VERSION = 1
DATA_DTYPE = "f32le"
_F32 = np.dtype("<f4")
_U32 = np.dtype("<u4")
_F64 = np.dtype("<f8")


@dataclass
class FeatureDump:
    """A loaded dump: logits, optional labels, and named feature layers."""

    logits: np.ndarray
    labels: np.ndarray | None
    layers: list
    layer_names: list
    n_classes: int

    @property
    def n_samples(self) -> int:
        return self.logits.shape[0]

    def layer(self, name: str) -> np.ndarray:
        return self.layers[self.layer_names.index(name)]

    def feature_layers(self):
        """(names, matrices) of all layers; a raw "input" layer counts as the
        first feature representation."""
        return list(self.layer_names), list(self.layers)


def _write_bin(path, array, dtype):
    np.ascontiguousarray(array).astype(dtype, copy=False).tofile(path)


def save_dump(directory, logits, labels=None, layers=(), layer_names=None,
              n_classes=None) -> None:
    """Write manifest.json, logits.bin, labels.bin and layer_<i>.bin.

    Data binaries are row-major little-endian float32; labels are uint32.
    """
    logits = as_matrix(logits, "logits")
    n, c = logits.shape
    if n_classes is None:
        n_classes = c
    layers = list(layers)
    if layer_names is None:
        layer_names = [f"layer_{i}" for i in range(len(layers))]
    if len(layer_names) != len(layers):
        raise ConfigError("layer_names must match the number of layers")
    mats = [as_matrix(m, f"layers[{i}]") for i, m in enumerate(layers)]
    for i, m in enumerate(mats):
        if m.shape[0] != n:
            raise ConfigError(f"layers[{i}] has {m.shape[0]} rows, expected {n}")
    os.makedirs(directory, exist_ok=True)

    manifest = {
        "version": DUMP_VERSION,
        "n_samples": n,
        "n_classes": int(n_classes),
        "dtype": DATA_DTYPE,
        "logits_file": "logits.bin",
        "layers": [
            {"name": str(name), "k": int(m.shape[1]), "file": f"layer_{i}.bin"}
            for i, (name, m) in enumerate(zip(layer_names, mats))
        ],
    }
    _write_bin(os.path.join(directory, "logits.bin"), logits, _F32)
    if labels is not None:
        y = check_labels(labels, int(n_classes))
        if y.shape[0] != n:
            raise ConfigError("labels must have one entry per sample")
        manifest["labels_file"] = "labels.bin"
        _write_bin(os.path.join(directory, "labels.bin"), y, _U32)
    for i, m in enumerate(mats):
        _write_bin(os.path.join(directory, f"layer_{i}.bin"), m, _F32)
    with open(os.path.join(directory, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1)
        fh.write("\n")


def _require(manifest, key, types, code="bad_schema"):
    if key not in manifest:
        raise DumpFormatError(code, f"manifest is missing required key {key!r}")
    value = manifest[key]
    if not isinstance(value, types) or isinstance(value, bool):
        raise DumpFormatError(code, f"manifest key {key!r} has invalid type {type(value).__name__}")
    return value


def _read_bin(directory, filename, dtype, rows, cols, what):
    path = os.path.join(directory, str(filename))
    if not os.path.isfile(path):
        raise DumpFormatError("missing_file", f"{what}: file {filename!r} does not exist")
    expected = rows * cols * dtype.itemsize
    actual = os.path.getsize(path)
    if actual != expected:
        raise DumpFormatError(
            "size_mismatch",
            f"{what}: file {filename!r} holds {actual} bytes, expected {expected} "
            f"({rows} x {cols} x {dtype.itemsize})",
        )
    data = np.fromfile(path, dtype=dtype)
    return data.reshape(rows, cols)


def load_dump(directory) -> FeatureDump:
    """Load and validate a dump directory written by save_dump."""
    manifest_path = os.path.join(directory, "manifest.json")
    if not os.path.isfile(manifest_path):
        raise DumpFormatError("missing_manifest", f"no manifest.json under {directory}")
    try:
        with open(manifest_path) as fh:
            manifest = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DumpFormatError("bad_json", f"manifest.json is not valid JSON: {exc}") from exc
    if not isinstance(manifest, dict):
        raise DumpFormatError("bad_schema", "manifest.json must hold a JSON object")

    version = _require(manifest, "version", int)
    if version != DUMP_VERSION:
        raise DumpFormatError("bad_version", f"unknown dump version {version}")
    dtype = _require(manifest, "dtype", str)
    if dtype != DATA_DTYPE:
        raise DumpFormatError("bad_dtype", f"unsupported dtype {dtype!r}")
    n = _require(manifest, "n_samples", int)
    n_classes = _require(manifest, "n_classes", int)
    if n < 1 or n_classes < 2:
        raise DumpFormatError("bad_schema", "n_samples must be >= 1 and n_classes >= 2")
    logits_file = _require(manifest, "logits_file", str)
    layer_specs = _require(manifest, "layers", list)

    logits = _read_bin(directory, logits_file, _F32, n, n_classes, "logits").astype(np.float64)
    if not np.all(np.isfinite(logits)):
        raise DumpFormatError("bad_values", "logits contain non-finite values")

    labels = None
    if "labels_file" in manifest:
        raw = _read_bin(directory, _require(manifest, "labels_file", str), _U32, n, 1, "labels")
        labels = raw.ravel().astype(np.int64)
        if labels.max(initial=0) >= n_classes:
            raise DumpFormatError("bad_labels", "labels exceed n_classes - 1")

    layers, layer_names = [], []
    for i, spec in enumerate(layer_specs):
        if not isinstance(spec, dict):
            raise DumpFormatError("bad_schema", f"layers[{i}] must be an object")
        name = _require(spec, "name", str)
        k = _require(spec, "k", int)
        if k < 1:
            raise DumpFormatError("bad_schema", f"layer {name!r} has invalid width {k}")
        filename = _require(spec, "file", str)
        mat = _read_bin(directory, filename, _F32, n, k, f"layer {name!r}").astype(np.float64)
        if not np.all(np.isfinite(mat)):
            raise DumpFormatError("bad_values", f"layer {name!r} contains non-finite values")
        layers.append(mat)
        layer_names.append(name)
    return FeatureDump(logits=logits, labels=labels, layers=layers,
                       layer_names=layer_names, n_classes=int(n_classes))


# ---------------------------------------------------------------------------
# Fitted-artifact persistence (float64 binaries + artifact.json)

def save_artifact(directory, kind: str, meta: dict, arrays: dict) -> None:
    os.makedirs(directory, exist_ok=True)
    manifest = {"version": DUMP_VERSION, "kind": kind, "dtype": "f64le",
                "meta": meta, "arrays": []}
    for i, (name, arr) in enumerate(arrays.items()):
        arr = np.asarray(arr, dtype=np.float64)
        filename = f"array_{i}.bin"
        manifest["arrays"].append({"name": name, "shape": list(arr.shape), "file": filename})
        _write_bin(os.path.join(directory, filename), arr.ravel(), _F64)
    with open(os.path.join(directory, "artifact.json"), "w") as fh:
        json.dump(manifest, fh, indent=1)
        fh.write("\n")


def load_artifact(directory, expect_kind: str | None = None):
    path = os.path.join(directory, "artifact.json")
    if not os.path.isfile(path):
        raise DumpFormatError("missing_manifest", f"no artifact.json under {directory}")
    try:
        with open(path) as fh:
            manifest = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DumpFormatError("bad_json", f"artifact.json is not valid JSON: {exc}") from exc
    if manifest.get("version") != DUMP_VERSION:
        raise DumpFormatError("bad_version", f"unknown artifact version {manifest.get('version')}")
    if manifest.get("dtype") != "f64le":
        raise DumpFormatError("bad_dtype", f"unsupported artifact dtype {manifest.get('dtype')}")
    kind = manifest.get("kind")
    if expect_kind is not None and kind != expect_kind:
        raise DumpFormatError("bad_kind", f"expected a {expect_kind!r} artifact, found {kind!r}")
    arrays = {}
    for spec in _require(manifest, "arrays", list):
        shape = tuple(int(s) for s in _require(spec, "shape", list))
        rows = int(np.prod(shape)) if shape else 1
        flat = _read_bin(directory, _require(spec, "file", str), _F64, rows, 1,
                         f"array {spec.get('name')!r}")
        arrays[spec["name"]] = flat.ravel().reshape(shape)
    return kind, manifest.get("meta", {}), arrays


def save_mlp(directory, params: MlpParams) -> None:
    arrays = {}
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        arrays[f"w{i}"] = w
        arrays[f"b{i}"] = b
    meta = {"layer_sizes": list(params.layer_sizes), "activation": params.activation}
    save_artifact(directory, "mlp", meta, arrays)


def load_mlp(directory) -> MlpParams:
    _, meta, arrays = load_artifact(directory, expect_kind="mlp")
    sizes = tuple(int(s) for s in meta["layer_sizes"])
    n = len(sizes) - 1
    try:
        weights = tuple(arrays[f"w{i}"] for i in range(n))
        biases = tuple(arrays[f"b{i}"] for i in range(n))
    except KeyError as exc:
        raise DumpFormatError("bad_schema", f"mlp artifact is missing {exc}") from exc
    return MlpParams(sizes, weights, biases, meta.get("activation", "tanh"))


def save_centroids(directory, centroids: CentroidSet) -> None:
    save_artifact(directory, "centroids",
                  {"fit_distance": centroids.fit_distance,
                   "final_loss": centroids.final_loss,
                   "loss_history": list(centroids.loss_history)},
                  {"centroids": centroids.centroids})


def load_centroids(directory) -> CentroidSet:
    _, meta, arrays = load_artifact(directory, expect_kind="centroids")
    return CentroidSet(arrays["centroids"], fit_distance=meta["fit_distance"],
                       final_loss=float(meta["final_loss"]),
                       loss_history=[float(v) for v in meta.get("loss_history", [])])


def save_feature_stats(directory, stats: FeatureStats) -> None:
    arrays = {}
    for l, (m, s) in enumerate(zip(stats.class_means, stats.tied_sigma)):
        arrays[f"means_{l}"] = m
        arrays[f"sigma_{l}"] = s
    save_artifact(directory, "feature_stats", {"n_layers": stats.n_layers}, arrays)


def load_feature_stats(directory) -> FeatureStats:
    _, meta, arrays = load_artifact(directory, expect_kind="feature_stats")
    n_layers = int(meta["n_layers"])
    return FeatureStats(
        class_means=[arrays[f"means_{l}"] for l in range(n_layers)],
        tied_sigma=[arrays[f"sigma_{l}"] for l in range(n_layers)],
    )


def save_ood_stats(directory, stats: OodStats) -> None:
    arrays = {}
    for l, (m, s) in enumerate(zip(stats.mu_prime, stats.sigma_prime)):
        arrays[f"mu_{l}"] = m
        arrays[f"sigma_{l}"] = s
    save_artifact(directory, "ood_stats", {"n_layers": stats.n_layers}, arrays)


def load_ood_stats(directory) -> OodStats:
    _, meta, arrays = load_artifact(directory, expect_kind="ood_stats")
    n_layers = int(meta["n_layers"])
    return OodStats(mu_prime=[arrays[f"mu_{l}"] for l in range(n_layers)],
                    sigma_prime=[arrays[f"sigma_{l}"] for l in range(n_layers)])


# ---------------------------------------------------------------------------
# Seeded synthetic generators

@dataclass(frozen=True)
class ToySpec:
    """1-D three-population setup: in-distribution N(mu1, sigma1^2) plus a
    mean-shifted outlier set N(mu2, sigma_a^2) and a wider one
    N(mu2, sigma_b^2)."""

    mu1: float = 0.0
    sigma1: float = 1.0
    mu2: float = 0.5
    sigma_a: float = 1.0
    sigma_b: float = 3.0
    n: int = 5000
    seed: int = 0

    def __post_init__(self):
        for name in ("sigma1", "sigma_a", "sigma_b"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if int(self.n) < 0:
            raise ConfigError("n must be non-negative")


def gen_toy1d(spec: ToySpec):
    """Seeded draws for the three toy populations, in a fixed order."""
    rng = np.random.default_rng(spec.seed)
    n = int(spec.n)
    x_in = rng.normal(spec.mu1, spec.sigma1, n)
    x_ood_a = rng.normal(spec.mu2, spec.sigma_a, n)
    x_ood_b = rng.normal(spec.mu2, spec.sigma_b, n)
    return x_in, x_ood_a, x_ood_b


@dataclass(frozen=True)
class BlobSpec:
    """Seeded Gaussian-mixture classification data with exact class counts.

    means (C, d) and sigmas (C,) default to seeded draws: means are standard
    normal rows scaled by `separation`, sigmas are all 1.
    """

    d: int
    n_classes: int
    n_per_class: int
    seed: int = 0
    means: tuple | None = None
    sigmas: tuple | None = None
    separation: float = 3.0

    def __post_init__(self):
        if int(self.n_classes) < 2:
            raise ConfigError("need at least 2 classes")
        if int(self.d) < 1 or int(self.n_per_class) < 0:
            raise ConfigError("d must be >= 1 and n_per_class >= 0")


def gen_blobs(spec: BlobSpec):
    """(X, y) with exactly n_per_class samples per class, seeded."""
    rng = np.random.default_rng(spec.seed)
    c, d, n = int(spec.n_classes), int(spec.d), int(spec.n_per_class)
    if spec.means is not None:
        means = np.asarray(spec.means, dtype=np.float64)
        if means.shape != (c, d):
            raise ConfigError(f"means must have shape ({c}, {d})")
    else:
        means = spec.separation * rng.standard_normal((c, d))
    if spec.sigmas is not None:
        sigmas = np.asarray(spec.sigmas, dtype=np.float64)
        if sigmas.shape != (c,) or np.any(sigmas <= 0):
            raise ConfigError(f"sigmas must be {c} positive values")
    else:
        sigmas = np.ones(c)
    xs = [rng.normal(means[i], sigmas[i], size=(n, d)) for i in range(c)]
    y = np.repeat(np.arange(c, dtype=np.int64), n)
    x = np.vstack(xs) if n > 0 else np.empty((0, d))
    return x, y
