"""Forward-only reference of the forest encoder and relation scorer.

One graph-attention layer computes, for node ``i`` and each neighbour
``j`` (self included)::

    rho[i, j] = softmax_j( gelu( U . [W1 r_i ; W2 r_j] ) )
    u_i       = sigmoid( sum_j rho[i, j] W3 r_j )

``encode`` stacks the layers and concatenates the input embeddings with the
last layer output. ``biaffine_score`` turns a subject/object pair into a
label distribution ``softmax(h_s W h_o + W2 . mean(H_hat))``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import erf

Embedder = Callable[[str], np.ndarray]


def gelu(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1.0 + erf(x / np.sqrt(2.0)))


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    z = np.exp(x - np.max(x, axis=axis, keepdims=True))
    return z / np.sum(z, axis=axis, keepdims=True)


@dataclass(frozen=True)
class ForestGraph:
    """Undirected graph with self-loops plus one embedding row per node."""

    adjacency: np.ndarray
    embeddings: np.ndarray

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=bool)
        emb = np.asarray(self.embeddings, dtype=np.float64)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {adj.shape}")
        if emb.ndim != 2 or emb.shape[0] != adj.shape[0]:
            raise ValueError(f"need {adj.shape[0]} embedding rows, got shape {emb.shape}")
        adj = adj | adj.T
        np.fill_diagonal(adj, True)
        object.__setattr__(self, "adjacency", adj)
        object.__setattr__(self, "embeddings", emb)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def dim(self) -> int:
        return self.embeddings.shape[1]


@dataclass(frozen=True)
class GATLayerParams:
    w1: np.ndarray
    w2: np.ndarray
    w3: np.ndarray
    u: np.ndarray


@dataclass(frozen=True)
class EncoderParams:
    layers: tuple[GATLayerParams, ...]
    w_bilinear: np.ndarray  # (2d, L, 2d)
    w_pool: np.ndarray      # (L, 2d)

    def __post_init__(self):
        if not self.layers:
            raise ValueError("at least one GAT layer is required")
        d = self.dim
        for k, layer in enumerate(self.layers):
            for name in ("w1", "w2", "w3"):
                if getattr(layer, name).shape != (d, d):
                    raise ValueError(f"layer {k}: {name} must be {d}x{d}")
            if layer.u.shape != (2 * d,):
                raise ValueError(f"layer {k}: attention vector must have length {2 * d}")
        n_labels = self.w_pool.shape[0]
        if self.w_bilinear.shape != (2 * d, n_labels, 2 * d) or self.w_pool.shape != (n_labels, 2 * d):
            raise ValueError("biaffine parameter shapes disagree with the embedding width")

    @property
    def dim(self) -> int:
        return self.layers[0].w1.shape[0]

    @property
    def n_labels(self) -> int:
        return self.w_pool.shape[0]

    @classmethod
    def init(cls, dim: int, n_labels: int, seed: int = 0, layer_count: int = 2) -> "EncoderParams":
        """Uniform draws in [-1/sqrt(fan_in), 1/sqrt(fan_in)] from ``numpy.random.default_rng(seed)``.

        Draw order: for each layer W1, W2, W3, U; then the bilinear tensor,
        then the pooled-feature matrix.
        """
        if layer_count < 1:
            raise ValueError("layer_count must be >= 1")
        rng = np.random.default_rng(seed)
        a = 1.0 / np.sqrt(dim)
        layers = tuple(
            GATLayerParams(*(rng.uniform(-a, a, size=s) for s in ((dim, dim), (dim, dim), (dim, dim), (2 * dim,))))
            for _ in range(layer_count)
        )
        b = 1.0 / np.sqrt(2 * dim)
        w_bilinear = rng.uniform(-b, b, size=(2 * dim, n_labels, 2 * dim))
        w_pool = rng.uniform(-b, b, size=(n_labels, 2 * dim))
        return cls(layers, w_bilinear, w_pool)

    @classmethod
    def zeros(cls, dim: int, n_labels: int, layer_count: int = 2) -> "EncoderParams":
        z = np.zeros
        layers = tuple(GATLayerParams(z((dim, dim)), z((dim, dim)), z((dim, dim)), z(2 * dim))
                       for _ in range(layer_count))
        return cls(layers, z((2 * dim, n_labels, 2 * dim)), z((n_labels, 2 * dim)))


def attention(graph: ForestGraph, r: np.ndarray, layer: GATLayerParams) -> np.ndarray:
    """Row-stochastic attention matrix; zero outside each neighbour set."""
    d = r.shape[1]
    left = (r @ layer.w1.T) @ layer.u[:d]
    right = (r @ layer.w2.T) @ layer.u[d:]
    scores = gelu(left[:, None] + right[None, :])
    scores = np.where(graph.adjacency, scores, -np.inf)
    return softmax(scores, axis=1)


def gat_layer(graph: ForestGraph, layer: GATLayerParams, r: np.ndarray | None = None) -> np.ndarray:
    if r is None:
        r = graph.embeddings
    if r.shape != (graph.n, layer.w1.shape[0]):
        raise ValueError(f"representation shape {r.shape} does not match graph/params")
    rho = attention(graph, r, layer)
    return sigmoid(rho @ (r @ layer.w3.T))


def encode(graph: ForestGraph, params: EncoderParams) -> np.ndarray:
    """Input embeddings concatenated with the last GAT layer output: n x 2d."""
    if graph.dim != params.dim:
        raise ValueError(f"embedding width {graph.dim} != parameter width {params.dim}")
    r = graph.embeddings
    for layer in params.layers:
        r = gat_layer(graph, layer, r)
    return np.concatenate([graph.embeddings, r], axis=1)


def biaffine_logits(enc: np.ndarray, s_node: int, o_node: int, params: EncoderParams) -> np.ndarray:
    n = enc.shape[0]
    for node in (s_node, o_node):
        if not 0 <= node < n:
            raise IndexError(f"node {node} out of range 0..{n - 1}")
    if enc.shape[1] != 2 * params.dim:
        raise ValueError(f"encoding width {enc.shape[1]} != {2 * params.dim}")
    bilinear = np.einsum("a,alb,b->l", enc[s_node], params.w_bilinear, enc[o_node])
    return bilinear + params.w_pool @ enc.mean(axis=0)


def biaffine_score(enc: np.ndarray, s_node: int, o_node: int, params: EncoderParams) -> np.ndarray:
    return softmax(biaffine_logits(enc, s_node, o_node, params))


class HashEmbedder:
    """Deterministic stand-in for a multilingual encoder: form -> N(0, 1) vector seeded by BLAKE2b."""

    def __init__(self, dim: int, salt: str = ""):
        self.dim = dim
        self.salt = salt
        self._cache: dict[str, np.ndarray] = {}

    def __call__(self, form: str) -> np.ndarray:
        vec = self._cache.get(form)
        if vec is None:
            digest = hashlib.blake2b((self.salt + "\x00" + form).encode("utf-8"), digest_size=8).digest()
            rng = np.random.default_rng(int.from_bytes(digest, "little"))
            vec = rng.standard_normal(self.dim)
            vec.setflags(write=False)
            self._cache[form] = vec
        return vec

    def embed(self, forms: Sequence[str]) -> np.ndarray:
        if not forms:
            return np.zeros((0, self.dim))
        return np.stack([self(f) for f in forms])
