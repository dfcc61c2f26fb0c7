"""The five classifier variants: forward pass, analytic gradients, Adam.

All variants share a two-layer ReLU trunk with inverted dropout and a
sigmoid output:

* ``simple`` / ``multitask``: the trunk reads the text vector alone;
  multitask swaps the single output unit for one head per annotator.
* ``socio_multihot`` / ``socio_embedding``: the socio vector (multi-hot
  or externally encoded) is concatenated to the text vector before the
  trunk.
* ``socio_contrastive``: the multi-hot vector first passes through a
  two-layer ReLU projection; the projected rows E are concatenated to
  the text vector, and an L2-normalized copy of E feeds the contrastive
  objective (the raw rows feed the concatenation).

Gradients are hand-derived for exactly these architectures and verified
against central finite differences in the test suite. Dropout is
inverted (activations scaled by 1/(1-p) at train time) so evaluation is
a pure pass-through.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass

import numpy as np

from .batcher import Batch
from .errors import ConfigError, DataError, NumericError
from .features import AnnotatorProfile, SocioSchema, encode_multihot

VARIANTS = ("simple", "multitask", "socio_multihot", "socio_embedding", "socio_contrastive")
NORM_EPS = 1e-12


@dataclass(frozen=True)
class ModelSpec:
    variant: str
    text_dim: int
    socio_width: int = 0
    hidden_dims: tuple[int, int] = (512, 256)
    projection_dims: tuple[int, int] = (64, 128)
    dropout_rate: float = 0.2
    temperature: float = 0.1
    contrastive_weight: float = 1.0
    annotator_count: int = 0
    normalize_embeddings: bool = True

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.text_dim < 1:
            raise ConfigError("text_dim must be >= 1")
        if not (0.0 <= self.dropout_rate < 1.0):
            raise ConfigError(f"dropout_rate must be in [0,1), got {self.dropout_rate}")
        if self.temperature <= 0:
            raise ConfigError(f"temperature must be > 0, got {self.temperature}")
        if self.contrastive_weight < 0:
            raise ConfigError(f"contrastive_weight must be >= 0, got {self.contrastive_weight}")
        if self.variant in ("socio_multihot", "socio_embedding", "socio_contrastive") and self.socio_width < 1:
            raise ConfigError(f"variant {self.variant} needs socio_width >= 1")
        if self.variant == "multitask" and self.annotator_count < 1:
            raise ConfigError("multitask needs annotator_count >= 1")
        if any(d < 1 for d in self.hidden_dims) or any(d < 1 for d in self.projection_dims):
            raise ConfigError("all layer dims must be >= 1")

    @property
    def fused_dim(self) -> int:
        if self.variant in ("simple", "multitask"):
            return self.text_dim
        if self.variant in ("socio_multihot", "socio_embedding"):
            return self.text_dim + self.socio_width
        return self.text_dim + self.projection_dims[1]

    @property
    def head_width(self) -> int:
        return self.annotator_count if self.variant == "multitask" else 1

    def layer_shapes(self) -> list[tuple[int, int]]:
        """(fan_in, fan_out) per layer, input to output along the main path."""
        shapes: list[tuple[int, int]] = []
        if self.variant == "socio_contrastive":
            shapes.append((self.socio_width, self.projection_dims[0]))
            shapes.append((self.projection_dims[0], self.projection_dims[1]))
        shapes.append((self.fused_dim, self.hidden_dims[0]))
        shapes.append((self.hidden_dims[0], self.hidden_dims[1]))
        shapes.append((self.hidden_dims[1], self.head_width))
        return shapes

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: dict) -> "ModelSpec":
        payload = dict(payload)
        payload["hidden_dims"] = tuple(payload["hidden_dims"])
        payload["projection_dims"] = tuple(payload["projection_dims"])
        return cls(**payload)


@dataclass
class ModelParams:
    spec: ModelSpec
    tensors: dict[str, np.ndarray]
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    step: int = 0


@dataclass
class ForwardTrace:
    """Everything the backward pass needs; produced by train-mode forward."""

    mode: str
    fused: np.ndarray
    z_trunk1: np.ndarray
    drop1: np.ndarray | None
    h_trunk1: np.ndarray
    z_trunk2: np.ndarray
    drop2: np.ndarray | None
    h_trunk2: np.ndarray
    logits: np.ndarray
    annotator_index: np.ndarray | None = None
    socio_input: np.ndarray | None = None
    z_proj1: np.ndarray | None = None
    h_proj1: np.ndarray | None = None
    z_proj2: np.ndarray | None = None
    E: np.ndarray | None = None
    E_norms: np.ndarray | None = None
    E_normalized: np.ndarray | None = None

    @property
    def loss_embedding(self) -> np.ndarray:
        """The representation rows the contrastive objective consumes."""
        if self.E is None:
            raise DataError("no socio representation on this trace")
        return self.E_normalized if self.E_normalized is not None else self.E


def _relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def init_params(spec: ModelSpec, seed: int) -> ModelParams:
    """Glorot-uniform weights, zero biases, zero Adam moments.

    Layers draw in ascending index order from one seeded generator, so a
    seed fixes every parameter byte.
    """
    rng = np.random.default_rng(seed)
    tensors: dict[str, np.ndarray] = {}
    for i, (fan_in, fan_out) in enumerate(spec.layer_shapes()):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        tensors[f"layer.{i}.weight"] = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        tensors[f"layer.{i}.bias"] = np.zeros(fan_out, dtype=np.float64)
    zeros = {k: np.zeros_like(t) for k, t in tensors.items()}
    return ModelParams(
        spec=spec,
        tensors=tensors,
        m={k: z.copy() for k, z in zeros.items()},
        v={k: z.copy() for k, z in zeros.items()},
        step=0,
    )


def _dropout_mask(rng: np.random.Generator, shape: tuple[int, ...], rate: float) -> np.ndarray:
    return (rng.random(shape) >= rate) / (1.0 - rate)


def forward(
    params: ModelParams,
    batch: Batch,
    mode: str = "train",
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, ForwardTrace]:
    """Run one batch through the variant's wiring; returns sigmoid probabilities.

    Train mode applies inverted dropout and needs `rng` when the rate is
    nonzero; eval mode is deterministic.
    """
    spec = params.spec
    if mode not in ("train", "eval"):
        raise ConfigError(f"mode must be 'train' or 'eval', got {mode!r}")
    use_dropout = mode == "train" and spec.dropout_rate > 0.0
    if use_dropout and rng is None:
        raise ConfigError("train-mode forward with dropout needs an rng")
    t = params.tensors
    offset = 0
    socio_input = z1 = h1 = z2 = E = norms = E_hat = None

    if spec.variant == "socio_contrastive":
        if batch.socio_multihot is None:
            raise DataError("socio_contrastive batch is missing the multi-hot matrix")
        socio_input = batch.socio_multihot
        z1 = socio_input @ t["layer.0.weight"] + t["layer.0.bias"]
        h1 = _relu(z1)
        z2 = h1 @ t["layer.1.weight"] + t["layer.1.bias"]
        E = _relu(z2)
        norms = np.maximum(np.linalg.norm(E, axis=1, keepdims=True), NORM_EPS)
        E_hat = E / norms if spec.normalize_embeddings else None
        fused = np.concatenate([batch.text, E], axis=1)
        offset = 2
    elif spec.variant == "socio_multihot":
        if batch.socio_multihot is None:
            raise DataError("socio_multihot batch is missing the multi-hot matrix")
        fused = np.concatenate([batch.text, batch.socio_multihot], axis=1)
    elif spec.variant == "socio_embedding":
        if batch.socio_embedding is None:
            raise DataError("socio_embedding batch is missing the socio embedding matrix")
        fused = np.concatenate([batch.text, batch.socio_embedding], axis=1)
    else:
        fused = batch.text
    if fused.shape[1] != spec.fused_dim:
        raise DataError(f"fused input width {fused.shape[1]} != spec width {spec.fused_dim}")

    zt1 = fused @ t[f"layer.{offset}.weight"] + t[f"layer.{offset}.bias"]
    a1 = _relu(zt1)
    d1 = _dropout_mask(rng, a1.shape, spec.dropout_rate) if use_dropout else None
    h_1 = a1 * d1 if d1 is not None else a1
    zt2 = h_1 @ t[f"layer.{offset + 1}.weight"] + t[f"layer.{offset + 1}.bias"]
    a2 = _relu(zt2)
    d2 = _dropout_mask(rng, a2.shape, spec.dropout_rate) if use_dropout else None
    h_2 = a2 * d2 if d2 is not None else a2

    w_head = t[f"layer.{offset + 2}.weight"]
    b_head = t[f"layer.{offset + 2}.bias"]
    if spec.variant == "multitask":
        if batch.annotator_index is None:
            raise DataError("multitask batch is missing annotator head indices")
        all_logits = h_2 @ w_head + b_head
        idx = batch.annotator_index
        known = idx >= 0
        logits = np.empty(len(idx), dtype=np.float64)
        logits[known] = all_logits[known, idx[known]]
        if np.any(~known):
            # head-fallback rule: annotators unseen in training score
            # under the arithmetic mean of all trained heads
            mean_w = w_head.mean(axis=1)
            mean_b = float(b_head.mean())
            logits[~known] = h_2[~known] @ mean_w + mean_b
    else:
        logits = (h_2 @ w_head).ravel() + b_head[0]

    trace = ForwardTrace(
        mode=mode,
        fused=fused,
        z_trunk1=zt1,
        drop1=d1,
        h_trunk1=h_1,
        z_trunk2=zt2,
        drop2=d2,
        h_trunk2=h_2,
        logits=logits,
        annotator_index=batch.annotator_index,
        socio_input=socio_input,
        z_proj1=z1,
        h_proj1=h1,
        z_proj2=z2,
        E=E,
        E_norms=norms,
        E_normalized=E_hat,
    )
    return sigmoid(logits), trace


def backward(
    params: ModelParams,
    trace: ForwardTrace,
    d_logits: np.ndarray,
    dE_loss: np.ndarray | None = None,
) -> dict[str, np.ndarray]:
    """Exact gradients of the scalar loss for every parameter tensor.

    `d_logits` is dL/dlogits; `dE_loss` (socio_contrastive only) is the
    contrastive gradient w.r.t. the representation fed to that loss. With
    `normalize_embeddings` on, the normalization Jacobian is applied here
    before the two E paths merge.
    """
    spec = params.spec
    if trace.mode != "train":
        raise DataError("backward requires a trace from a train-mode forward")
    t = params.tensors
    offset = 2 if spec.variant == "socio_contrastive" else 0
    d_logits = np.asarray(d_logits, dtype=np.float64)
    if d_logits.shape != trace.logits.shape:
        raise DataError(f"d_logits shape {d_logits.shape} != logits shape {trace.logits.shape}")
    grads: dict[str, np.ndarray] = {}

    w_head = t[f"layer.{offset + 2}.weight"]
    if spec.variant == "multitask":
        idx = trace.annotator_index
        if idx is None:
            raise DataError("multitask trace is missing annotator head indices")
        b, a = trace.h_trunk2.shape[0], spec.annotator_count
        d_all = np.zeros((b, a), dtype=np.float64)
        known = idx >= 0
        d_all[known, idx[known]] = d_logits[known]
        if np.any(~known):
            d_all[~known, :] = d_logits[~known, None] / a
        grads[f"layer.{offset + 2}.weight"] = trace.h_trunk2.T @ d_all
        grads[f"layer.{offset + 2}.bias"] = d_all.sum(axis=0)
        dh2 = d_all @ w_head.T
    else:
        grads[f"layer.{offset + 2}.weight"] = trace.h_trunk2.T @ d_logits[:, None]
        grads[f"layer.{offset + 2}.bias"] = np.array([d_logits.sum()])
        dh2 = d_logits[:, None] @ w_head.T

    da2 = dh2 * trace.drop2 if trace.drop2 is not None else dh2
    dz2 = da2 * (trace.z_trunk2 > 0)
    grads[f"layer.{offset + 1}.weight"] = trace.h_trunk1.T @ dz2
    grads[f"layer.{offset + 1}.bias"] = dz2.sum(axis=0)
    dh1 = dz2 @ t[f"layer.{offset + 1}.weight"].T

    da1 = dh1 * trace.drop1 if trace.drop1 is not None else dh1
    dz1 = da1 * (trace.z_trunk1 > 0)
    grads[f"layer.{offset}.weight"] = trace.fused.T @ dz1
    grads[f"layer.{offset}.bias"] = dz1.sum(axis=0)

    if spec.variant == "socio_contrastive":
        d_fused = dz1 @ t[f"layer.{offset}.weight"].T
        dE = d_fused[:, spec.text_dim :].copy()
        if dE_loss is not None:
            dE_loss = np.asarray(dE_loss, dtype=np.float64)
            if dE_loss.shape != trace.E.shape:
                raise DataError(f"dE shape {dE_loss.shape} != E shape {trace.E.shape}")
            if spec.normalize_embeddings:
                # Jacobian of E_hat = E / max(||E||, eps): rows at the
                # clamp scale by 1/eps, others subtract the radial part
                e_hat = trace.E_normalized
                clamped = (trace.E_norms <= NORM_EPS).ravel()
                radial = (dE_loss * e_hat).sum(axis=1, keepdims=True)
                d_from_loss = (dE_loss - radial * e_hat) / trace.E_norms
                if np.any(clamped):
                    d_from_loss[clamped] = dE_loss[clamped] / NORM_EPS
                dE += d_from_loss
            else:
                dE += dE_loss
        dzp2 = dE * (trace.z_proj2 > 0)
        grads["layer.1.weight"] = trace.h_proj1.T @ dzp2
        grads["layer.1.bias"] = dzp2.sum(axis=0)
        dhp1 = dzp2 @ t["layer.1.weight"].T
        dzp1 = dhp1 * (trace.z_proj1 > 0)
        grads["layer.0.weight"] = trace.socio_input.T @ dzp1
        grads["layer.0.bias"] = dzp1.sum(axis=0)
    elif dE_loss is not None:
        raise DataError(f"variant {spec.variant} has no contrastive path for dE")

    return grads


def adam_step(
    params: ModelParams,
    grads: dict[str, np.ndarray],
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> ModelParams:
    """One Adam update with bias correction; mutates and returns `params`.

    Refuses the update (leaving parameters untouched) if any gradient
    component is non-finite.
    """
    if lr <= 0:
        raise ConfigError(f"learning rate must be > 0, got {lr}")
    if set(grads) != set(params.tensors):
        raise DataError(f"gradient keys {sorted(grads)} != parameter keys {sorted(params.tensors)}")
    for name, g in grads.items():
        if g.shape != params.tensors[name].shape:
            raise DataError(f"gradient shape mismatch for {name}")
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient for {name}; update refused at step {params.step + 1}")
    params.step += 1
    bc1 = 1.0 - beta1 ** params.step
    bc2 = 1.0 - beta2 ** params.step
    for name, g in grads.items():
        m = params.m[name]
        v = params.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * np.square(g)
        params.tensors[name] -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
        if not np.all(np.isfinite(params.tensors[name])):
            raise NumericError(f"non-finite parameter {name} after step {params.step}")
    return params


def project_socio(params: ModelParams, multihot: np.ndarray) -> np.ndarray:
    """Eval-mode projection of multi-hot rows to representation rows."""
    t = params.tensors
    h1 = _relu(multihot @ t["layer.0.weight"] + t["layer.0.bias"])
    return _relu(h1 @ t["layer.1.weight"] + t["layer.1.bias"])


def extract_socio_reps(
    params: ModelParams,
    profiles: dict[str, AnnotatorProfile],
    schema: SocioSchema,
) -> dict[str, np.ndarray]:
    """Learned representation per unique annotator; identical profiles map identically."""
    if params.spec.variant != "socio_contrastive":
        raise ConfigError(
            f"socio representations only exist for socio_contrastive, not {params.spec.variant}"
        )
    out: dict[str, np.ndarray] = {}
    for aid, profile in profiles.items():
        vec = encode_multihot(profile, schema)
        out[aid] = project_socio(params, vec[None, :])[0]
    return out


def save_checkpoint(
    params: ModelParams,
    directory: str,
    seed: int,
    annotators: list[str] | None = None,
    schema: SocioSchema | None = None,
) -> str:
    """Write manifest.json plus one little-endian f64 blob per tensor.

    Adam moments are stored alongside weights (`<name>.m.bin` /
    `<name>.v.bin`) so training can resume exactly.
    """
    os.makedirs(directory, exist_ok=True)
    manifest = {
        "spec": params.spec.to_dict(),
        "seed": seed,
        "step": params.step,
        "tensors": {k: list(t.shape) for k, t in params.tensors.items()},
    }
    if annotators is not None:
        manifest["annotators"] = list(annotators)
    if schema is not None:
        manifest["schema"] = schema.to_dict()
    with open(os.path.join(directory, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    for name, tensor in params.tensors.items():
        tensor.astype("<f8").tofile(os.path.join(directory, f"{name}.bin"))
        params.m[name].astype("<f8").tofile(os.path.join(directory, f"{name}.m.bin"))
        params.v[name].astype("<f8").tofile(os.path.join(directory, f"{name}.v.bin"))
    return directory


def load_checkpoint(directory: str) -> tuple[ModelParams, dict]:
    """Inverse of save_checkpoint; returns the params and the raw manifest."""
    manifest_path = os.path.join(directory, "manifest.json")
    if not os.path.exists(manifest_path):
        raise DataError(f"{directory}: no manifest.json")
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    spec = ModelSpec.from_dict(manifest["spec"])
    tensors, m, v = {}, {}, {}
    for name, shape in manifest["tensors"].items():
        shape = tuple(shape)
        for target, suffix in ((tensors, ""), (m, ".m"), (v, ".v")):
            path = os.path.join(directory, f"{name}{suffix}.bin")
            if not os.path.exists(path):
                raise DataError(f"{directory}: missing tensor blob {name}{suffix}.bin")
            arr = np.fromfile(path, dtype="<f8")
            if arr.size != int(np.prod(shape)):
                raise DataError(f"{directory}: blob {name}{suffix} has wrong size")
            target[name] = arr.reshape(shape)
    params = ModelParams(spec=spec, tensors=tensors, m=m, v=v, step=int(manifest["step"]))
    return params, manifest
