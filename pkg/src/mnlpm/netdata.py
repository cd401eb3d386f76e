"""Multilayer binary network data: containers, file formats, generators, folds.

Networks are undirected and binary, stored as a dense ``(I, I, J)`` adjacency
tensor with structural zeros on the diagonal plus a boolean observation mask of
the same shape (``True`` = observed).  Actor and layer indices are 0-based in
memory; the file formats below use 1-based indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class NetworkParseError(ValueError):
    """Raised when a network file does not conform to its declared grammar."""


class NetworkValidationError(ValueError):
    """Raised when a network violates a structural invariant."""


@dataclass(frozen=True)
class MultilayerNetwork:
    """An undirected binary multilayer network on a common actor set.

    Attributes
    ----------
    adjacency : ndarray of shape (I, I, J), dtype uint8
        ``adjacency[i, i2, j]`` is 1 iff actors ``i`` and ``i2`` are tied in
        layer ``j``.  Symmetric in the first two axes, zero diagonal.
    mask : ndarray of shape (I, I, J), dtype bool
        ``True`` where the dyad is observed, ``False`` where held out.
    actor_labels, layer_labels : tuple of str
    actor_attributes : dict
        Optional per-actor key/value records keyed by 0-based actor index.
    """

    adjacency: np.ndarray
    mask: np.ndarray
    actor_labels: tuple = ()
    layer_labels: tuple = ()
    actor_attributes: dict = field(default_factory=dict)

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=np.uint8)
        adj.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)
        if self.mask is None:
            m = np.ones(adj.shape, dtype=bool)
        else:
            m = np.asarray(self.mask, dtype=bool)
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)
        if not self.actor_labels:
            object.__setattr__(
                self, "actor_labels", tuple(str(i + 1) for i in range(self.n_actors))
            )
        if not self.layer_labels:
            object.__setattr__(
                self, "layer_labels", tuple(str(j + 1) for j in range(self.n_layers))
            )
        violations = validate(self)
        if violations:
            raise NetworkValidationError("; ".join(violations[:5]))

    @property
    def n_actors(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_layers(self) -> int:
        return self.adjacency.shape[2]

    @property
    def n_dyads(self) -> int:
        """Number of unordered actor pairs per layer."""
        I = self.n_actors
        return I * (I - 1) // 2

    def layer(self, j: int) -> np.ndarray:
        """Return the I x I adjacency matrix of layer ``j``."""
        return self.adjacency[:, :, j]

    def edge_count(self, j: int | None = None) -> int:
        """Number of undirected edges in layer ``j`` (or in total)."""
        if j is None:
            return int(self.adjacency.sum()) // 2
        return int(self.adjacency[:, :, j].sum()) // 2

    def density(self, j: int) -> float:
        return self.edge_count(j) / self.n_dyads

    def observed_triples(self) -> np.ndarray:
        """Array of observed (i, i2, j) with i < i2, in lexicographic order."""
        I, J = self.n_actors, self.n_layers
        iu, iv = np.triu_indices(I, k=1)
        out = []
        for j in range(J):
            keep = self.mask[iu, iv, j]
            out.append(np.column_stack([iu[keep], iv[keep], np.full(keep.sum(), j)]))
        return np.concatenate(out) if out else np.empty((0, 3), dtype=int)

    def relabeled(self, perm) -> "MultilayerNetwork":
        """Apply an actor permutation: actor ``perm[i]`` takes slot ``i``."""
        perm = np.asarray(perm)
        adj = self.adjacency[np.ix_(perm, perm)][:, :, :]
        mask = self.mask[np.ix_(perm, perm)][:, :, :]
        labels = tuple(self.actor_labels[p] for p in perm)
        attrs = {
            i: self.actor_attributes[p]
            for i, p in enumerate(perm)
            if p in self.actor_attributes
        }
        return MultilayerNetwork(adj, mask, labels, self.layer_labels, attrs)


@dataclass(frozen=True)
class FoldAssignment:
    """Partition of observed off-diagonal dyad-layer triples into folds.

    ``fold_of_dyad`` maps ``(i, i2, j)`` with ``i < i2`` to a fold index in
    ``range(n_folds)``.
    """

    fold_of_dyad: dict
    n_folds: int

    def triples_in_fold(self, fold: int) -> list:
        return [t for t, f in self.fold_of_dyad.items() if f == fold]

    def fold_sizes(self) -> list:
        sizes = [0] * self.n_folds
        for f in self.fold_of_dyad.values():
            sizes[f] += 1
        return sizes


def validate(net) -> list:
    """Check the structural invariants of a network-shaped object.

    Accepts either a :class:`MultilayerNetwork` or a bare ``(adjacency, mask)``
    pair of arrays, so that invalid raw tensors can be inspected.  Returns a
    list of human-readable violation strings (empty iff valid), each naming
    the offending index triple.
    """
    if isinstance(net, MultilayerNetwork):
        adj, mask = net.adjacency, net.mask
    else:
        adj, mask = net
        adj = np.asarray(adj)
        mask = np.asarray(mask) if mask is not None else np.ones(adj.shape, bool)

    violations = []
    if adj.ndim != 3 or adj.shape[0] != adj.shape[1]:
        return [f"adjacency has shape {adj.shape}, expected (I, I, J)"]
    if mask.shape != adj.shape:
        violations.append(f"mask shape {mask.shape} != adjacency shape {adj.shape}")
        return violations

    bad = ~np.isin(adj, (0, 1))
    for i, i2, j in zip(*np.nonzero(bad)):
        violations.append(f"non-binary entry at ({int(i)}, {int(i2)}, {int(j)})")
    diag = np.nonzero(np.einsum("iij->ij", np.asarray(adj)))
    for i, j in zip(*diag):
        violations.append(f"nonzero diagonal at ({int(i)}, {int(i)}, {int(j)})")
    asym = np.nonzero(adj != adj.transpose(1, 0, 2))
    seen = set()
    for i, i2, j in zip(*asym):
        key = (int(min(i, i2)), int(max(i, i2)), int(j))
        if key not in seen:
            seen.add(key)
            violations.append(f"asymmetric adjacency pair at {key}")
    masym = np.nonzero(mask != mask.transpose(1, 0, 2))
    seen = set()
    for i, i2, j in zip(*masym):
        key = (int(min(i, i2)), int(max(i, i2)), int(j))
        if key not in seen:
            seen.add(key)
            violations.append(f"asymmetric mask pair at {key}")
    return violations


# ---------------------------------------------------------------------------
# File formats
#
# Edge list (UTF-8 text):
#   line 1: "I J"
#   optional "# actor <i> <label> [key=value ...]" lines
#   data lines "j i i2" (layer then unordered actor pair), 1-based
#   "%"-prefixed lines are comments
# Adjacency: "I J" header, then J blocks of I rows of I {0,1} entries,
#   blocks separated by blank lines.
# Mask file: edge-list grammar, listing MISSING triples.
# ---------------------------------------------------------------------------


def _parse_header(line: str, path) -> tuple:
    parts = line.split()
    if len(parts) != 2:
        raise NetworkParseError(f"{path}: header must be 'I J', got {line!r}")
    try:
        I, J = int(parts[0]), int(parts[1])
    except ValueError:
        raise NetworkParseError(f"{path}: non-integer header {line!r}") from None
    if I < 1 or J < 1:
        raise NetworkParseError(f"{path}: header counts must be positive")
    return I, J


def _parse_edge_lines(lines, I, J, path):
    """Yield 0-based (j, i, i2) triples plus actor metadata from data lines."""
    labels = {}
    attrs = {}
    triples = []
    for lineno, raw in lines:
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) < 3 or parts[0] != "actor":
                raise NetworkParseError(f"{path}:{lineno}: bad metadata line {raw!r}")
            idx = int(parts[1]) - 1
            if not 0 <= idx < I:
                raise NetworkParseError(f"{path}:{lineno}: actor index out of range")
            labels[idx] = parts[2]
            attrs[idx] = dict(p.split("=", 1) for p in parts[3:] if "=" in p)
            continue
        parts = line.split()
        if len(parts) != 3:
            raise NetworkParseError(f"{path}:{lineno}: expected 'j i i2', got {raw!r}")
        try:
            j, i, i2 = (int(p) for p in parts)
        except ValueError:
            raise NetworkParseError(f"{path}:{lineno}: non-integer entry") from None
        if not (1 <= j <= J and 1 <= i <= I and 1 <= i2 <= I):
            raise NetworkParseError(f"{path}:{lineno}: index out of range in {raw!r}")
        if i == i2:
            raise NetworkParseError(f"{path}:{lineno}: self-loop ({i}, {i2}, {j})")
        triples.append((j - 1, i - 1, i2 - 1))
    return triples, labels, attrs


def load_network(path, format: str = "edge-list") -> MultilayerNetwork:
    """Load a validated network from ``path``.

    Parameters
    ----------
    format : {"edge-list", "adjacency-matrix"}
    """
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    content = [
        (n, ln) for n, ln in enumerate(lines, 1) if ln.strip() and not ln.strip().startswith("%")
    ]
    if not content:
        raise NetworkParseError(f"{path}: empty file")
    if format == "edge-list":
        I, J = _parse_header(content[0][1], path)
        triples, labels, attrs = _parse_edge_lines(content[1:], I, J, path)
        adj = np.zeros((I, I, J), dtype=np.uint8)
        for j, i, i2 in triples:
            adj[i, i2, j] = adj[i2, i, j] = 1
        actor_labels = tuple(labels.get(i, str(i + 1)) for i in range(I))
        return MultilayerNetwork(adj, None, actor_labels, (), attrs)
    if format == "adjacency-matrix":
        I, J = _parse_header(content[0][1], path)
        rows = [ln for _, ln in content[1:]]
        if len(rows) != I * J:
            raise NetworkParseError(
                f"{path}: expected {I * J} matrix rows, found {len(rows)}"
            )
        adj = np.zeros((I, I, J), dtype=np.uint8)
        for j in range(J):
            for i in range(I):
                parts = rows[j * I + i].split()
                if len(parts) != I:
                    raise NetworkParseError(
                        f"{path}: row {i + 1} of block {j + 1} has {len(parts)} entries"
                    )
                vals = [int(p) for p in parts]
                if any(v not in (0, 1) for v in vals):
                    raise NetworkParseError(
                        f"{path}: non-binary entry in block {j + 1} row {i + 1}"
                    )
                adj[i, :, j] = vals
        return MultilayerNetwork(adj, None)
    raise ValueError(f"unknown format {format!r}")


def save_network(net: MultilayerNetwork, path, format: str = "edge-list") -> None:
    """Write ``net`` to ``path`` in the given format (mask is not persisted)."""
    I, J = net.n_actors, net.n_layers
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{I} {J}\n")
        if format == "edge-list":
            for i in range(I):
                label = net.actor_labels[i]
                extra = net.actor_attributes.get(i, {})
                if label != str(i + 1) or extra:
                    kv = " ".join(f"{k}={v}" for k, v in extra.items())
                    fh.write(f"# actor {i + 1} {label}{' ' + kv if kv else ''}\n")
            iu, iv = np.triu_indices(I, k=1)
            for j in range(J):
                present = net.adjacency[iu, iv, j] == 1
                for i, i2 in zip(iu[present], iv[present]):
                    fh.write(f"{j + 1} {i + 1} {i2 + 1}\n")
        elif format == "adjacency-matrix":
            for j in range(J):
                for i in range(I):
                    fh.write(" ".join(str(v) for v in net.adjacency[i, :, j]) + "\n")
                if j < J - 1:
                    fh.write("\n")
        else:
            raise ValueError(f"unknown format {format!r}")


def load_mask(net: MultilayerNetwork, path) -> MultilayerNetwork:
    """Apply a mask file (edge-list grammar, listing missing triples)."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    content = [(n, ln) for n, ln in enumerate(lines, 1) if ln.strip()]
    if not content:
        raise NetworkParseError(f"{path}: empty mask file")
    I, J = _parse_header(content[0][1], path)
    if (I, J) != (net.n_actors, net.n_layers):
        raise NetworkParseError(f"{path}: mask header {I} {J} does not match network")
    triples, _, _ = _parse_edge_lines(content[1:], I, J, path)
    mask = net.mask.copy()
    for j, i, i2 in triples:
        mask[i, i2, j] = mask[i2, i, j] = False
    return MultilayerNetwork(
        net.adjacency, mask, net.actor_labels, net.layer_labels, net.actor_attributes
    )


# ---------------------------------------------------------------------------
# Generators and fold machinery
# ---------------------------------------------------------------------------


def erdos_renyi(I: int, J: int, p: float, seed=None) -> MultilayerNetwork:
    """Independent Bernoulli(p) multilayer network, symmetric, zero diagonal."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must be in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    adj = np.zeros((I, I, J), dtype=np.uint8)
    iu, iv = np.triu_indices(I, k=1)
    for j in range(J):
        draws = (rng.random(iu.size) < p).astype(np.uint8)
        adj[iu, iv, j] = draws
        adj[iv, iu, j] = draws
    return MultilayerNetwork(adj, None)


def make_folds(net: MultilayerNetwork, F: int, seed=None) -> FoldAssignment:
    """Random partition of observed dyad-layer triples into F near-equal folds."""
    if F < 2:
        raise ValueError("fold count must be at least 2")
    triples = net.observed_triples()
    n = len(triples)
    if n < F:
        raise ValueError(f"only {n} observed triples, cannot make {F} folds")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    assignment = {}
    for rank, idx in enumerate(order):
        i, i2, j = triples[idx]
        assignment[(int(i), int(i2), int(j))] = rank % F
    return FoldAssignment(assignment, F)


def apply_fold_mask(
    net: MultilayerNetwork, folds: FoldAssignment, held_out_fold: int
) -> MultilayerNetwork:
    """Copy of ``net`` whose mask is False exactly on the held-out fold."""
    if not 0 <= held_out_fold < folds.n_folds:
        raise ValueError(f"fold {held_out_fold} not in range({folds.n_folds})")
    mask = net.mask.copy()
    for (i, i2, j), f in folds.fold_of_dyad.items():
        if f == held_out_fold:
            mask[i, i2, j] = mask[i2, i, j] = False
    return MultilayerNetwork(
        net.adjacency, mask, net.actor_labels, net.layer_labels, net.actor_attributes
    )
