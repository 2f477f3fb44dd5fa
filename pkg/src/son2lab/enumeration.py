"""Generator systems, exact word balls and Cartan clouds.

A word ball of radius R is built breadth-first with exact deduplication:
the dictionary key of an element is its full canonical entry list, so two
words land on the same node only when the matrices are bit-identical.
Layers are completed one at a time, which makes recorded word lengths
minimal and the result independent of the number of workers.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .liegroup import CHAMBER_TOL, FormError, GMatrix, as_gmatrix, cartan_projections, identity
from .scalars import QuadRational, _check_d

TAGS = ("gamma1", "gamma2", "delta", "stable")
DEFAULT_MEMORY_BUDGET = 8 * 2**30


class GeneratorFileError(ValueError):
    """Malformed or inconsistent generator file."""


@dataclass(frozen=True)
class Generator:
    label: str
    tag: str | None
    matrix: GMatrix
    inverse: str
    primary: bool = True


@dataclass
class GeneratorSystem:
    """Symmetric labeled generating set of a subgroup of SO(n,2).

    ``generators`` is closed under inverses (``Generator.inverse`` names
    the partner, possibly itself).  ``kind`` is ``"amalgam"``, ``"hnn"`` or
    ``"untagged"``.
    """

    n: int
    d: int
    generators: tuple
    name: str = ""
    description: str = ""
    kind: str = "untagged"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.generators = tuple(self.generators)
        self._labels = {g.label: i for i, g in enumerate(self.generators)}
        self.inverse_index = [self._labels[g.inverse] for g in self.generators]

    def __len__(self):
        return len(self.generators)

    @property
    def labels(self):
        return [g.label for g in self.generators]

    @property
    def matrices(self):
        return [g.matrix for g in self.generators]

    def index(self, label):
        return self._labels[label]

    def __getitem__(self, label):
        return self.generators[self._labels[label]]

    def evaluate(self, word):
        """Product of the generators named by ``word`` (labels or indices), left to right."""
        g = identity(self.n, self.d)
        for w in word:
            i = w if isinstance(w, (int, np.integer)) else self._labels[w]
            g = g @ self.generators[i].matrix
        return g

    def tagged(self, tag):
        return [g for g in self.generators if g.tag == tag]

    def to_dict(self):
        gens = []
        for g in self.generators:
            gens.append({
                "label": g.label,
                "tag": g.tag,
                "inverse": g.inverse,
                "matrix": [[list(t) for t in row] for row in g.matrix.triples()],
            })
        out = {"n": self.n, "d": self.d, "name": self.name,
               "description": self.description, "generators": gens}
        if self.meta:
            out["meta"] = self.meta
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())

    def sha256(self):
        return hashlib.sha256(self.to_json().encode()).hexdigest()

    def check(self):
        """Re-validate invariants (form preservation, inverse pairing, coloring)."""
        validate_system(self)
        return self


def _inverse_label(label, taken):
    cand = label.swapcase() if len(label) == 1 and label.isalpha() else label + "^-1"
    if cand in taken:
        cand = label + "^-1"
    while cand in taken:
        cand += "'"
    return cand


def _parse_matrix(raw, d, label):
    try:
        if raw and isinstance(raw[0], str):
            raise TypeError
        if raw and isinstance(raw[0][0], (int, float)):
            # flat list of triples
            size = math.isqrt(len(raw))
            if size * size != len(raw):
                raise GeneratorFileError(f"generator {label!r}: flat matrix is not square")
            raw = [raw[i * size:(i + 1) * size] for i in range(size)]
        rows = []
        for row in raw:
            out = []
            for t in row:
                if isinstance(t, str):
                    out.append(QuadRational.from_text(t, d))
                else:
                    a, b, den = t
                    if any(isinstance(v, float) for v in (a, b, den)):
                        raise GeneratorFileError(f"generator {label!r}: entries must be integers")
                    out.append(QuadRational(a, b, den, d))
            rows.append(out)
    except GeneratorFileError:
        raise
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise GeneratorFileError(f"generator {label!r}: cannot parse matrix ({exc})") from exc
    return rows


def system_from_dict(doc, source="<dict>"):
    """Build and validate a :class:`GeneratorSystem` from its JSON document."""
    try:
        n = int(doc["n"])
        d = int(doc.get("d", 1))
        raw_gens = doc["generators"]
    except (KeyError, TypeError, ValueError) as exc:
        raise GeneratorFileError(f"{source}: missing or invalid header field ({exc})") from exc
    try:
        _check_d(d)
    except ValueError as exc:
        raise GeneratorFileError(f"{source}: {exc}") from exc
    if n < 2:
        raise GeneratorFileError(f"{source}: n must be >= 2")
    entries = []
    for k, item in enumerate(raw_gens):
        label = str(item.get("label", f"g{k}"))
        tag = item.get("tag")
        if tag is not None and tag not in TAGS:
            raise GeneratorFileError(f"{source}: generator {label!r} has unknown tag {tag!r}")
        rows = _parse_matrix(item.get("matrix"), d, label)
        try:
            g = as_gmatrix(rows, n=n, d=d, label=f"generator {label!r}")
        except FormError as exc:
            raise GeneratorFileError(f"{source}: {exc}") from exc
        entries.append((label, tag, g, item.get("inverse")))
    labels = [e[0] for e in entries]
    if len(set(labels)) != len(labels):
        raise GeneratorFileError(f"{source}: duplicate generator labels")
    by_label = {e[0]: e for e in entries}
    gens = []
    placed = set()
    taken = set(labels)
    for label, tag, g, inv_label in entries:
        if label in placed:
            continue
        ginv = g.inv()
        partner = None
        if inv_label is not None:
            if inv_label not in by_label:
                raise GeneratorFileError(f"{source}: inverse {inv_label!r} of {label!r} is missing")
            partner = by_label[inv_label]
            if partner[2] != ginv:
                raise GeneratorFileError(
                    f"{source}: {inv_label!r} is not the exact inverse of {label!r}")
        else:
            partner = next((e for e in entries if e[2] == ginv and e[0] not in placed), None)
        gens.append(Generator(label, tag, g, label if g == ginv else None))
        placed.add(label)
        if g == ginv:
            continue
        if partner is None:
            new = _inverse_label(label, taken)
            taken.add(new)
            gens[-1] = Generator(label, tag, g, new)
            gens.append(Generator(new, tag, ginv, label, primary=False))
            placed.add(new)
        else:
            if partner[1] != tag:
                raise GeneratorFileError(
                    f"{source}: inverse pair {label!r}/{partner[0]!r} carries different tags")
            gens[-1] = Generator(label, tag, g, partner[0])
            gens.append(Generator(partner[0], tag, partner[2], label, primary=False))
            placed.add(partner[0])
    system = GeneratorSystem(n, d, gens, name=str(doc.get("name", "")),
                             description=str(doc.get("description", "")),
                             meta=dict(doc.get("meta", {})))
    system.kind = coloring_kind(system, source)
    return system


def coloring_kind(system, source="system"):
    tags = {g.tag for g in system.generators}
    if tags == {None}:
        return "untagged"
    if None in tags:
        raise GeneratorFileError(f"{source}: coloring must tag every generator or none")
    if "stable" in tags:
        if "gamma2" in tags:
            raise GeneratorFileError(f"{source}: HNN coloring cannot use gamma2")
        return "hnn"
    if "gamma2" not in tags:
        raise GeneratorFileError(f"{source}: amalgam coloring needs gamma2-tagged generators")
    return "amalgam"


def validate_system(system):
    for g in system.generators:
        as_gmatrix(g.matrix, n=system.n, label=f"generator {g.label!r}")
        partner = system[g.inverse]
        if not (g.matrix @ partner.matrix).is_identity():
            raise GeneratorFileError(f"{g.label!r} and {partner.label!r} are not inverse")
        if partner.tag != g.tag:
            raise GeneratorFileError(f"inverse pair {g.label!r}/{partner.label!r} tags differ")
    coloring_kind(system)


def load_generators(path):
    """Read and validate a generator file (JSON).

    Raises
    ------
    GeneratorFileError
        On parse errors, non-form-preserving matrices (naming the
        generator) or inconsistent inverse pairs / coloring.
    """
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise GeneratorFileError(f"{path}: not valid JSON ({exc})") from exc
    return system_from_dict(doc, source=str(path))


def make_system(n, gens, d=1, name="", description="", meta=None):
    """Build a system from ``[(label, tag, matrix), ...]`` (inverses auto-completed)."""
    doc = {"n": n, "d": d, "name": name, "description": description,
           "generators": [{"label": lab, "tag": tag, "matrix": m.triples()}
                          for lab, tag, m in gens]}
    if meta:
        doc["meta"] = meta
    return system_from_dict(doc, source=name or "system")


# ---------------------------------------------------------------------------
# word balls
# ---------------------------------------------------------------------------

_WORKER_GENS = None


def _init_worker(triples):
    global _WORKER_GENS
    _WORKER_GENS = [GMatrix(A, B, den, d, reduced=True) for A, B, den, d in triples]


def _expand_chunk(parents):
    out = []
    for A, B, den, d in parents:
        x = GMatrix(A, B, den, d, reduced=True)
        for s in _WORKER_GENS:
            y = x @ s
            out.append((y.key, y.A, y.B, y.den))
    return out


def _element_bytes(g):
    ints = g.A.ravel().tolist() + ([] if g.B is None else g.B.ravel().tolist())
    return 2 * sum(sys.getsizeof(v) for v in ints) + 400


class BudgetExceeded(MemoryError):
    pass


def _bfs(system, R, workers=1, memory_budget=DEFAULT_MEMORY_BUDGET, window=None):
    """Yield layers ``(k, elements, parents, gens)`` of the word ball.

    ``parents`` index into the previous layer.  With ``window`` set, keys
    older than that many layers are dropped (symmetric generating sets only
    reach layers k-1, k, k+1 from layer k).
    """
    gens = system.matrices
    e = identity(system.n, system.d)
    seen = {e.key: 0}
    layer_keys = [[e.key]]
    layer = [e]
    used = _element_bytes(e)
    yield 0, layer, [-1], [-1]
    pool = None
    if workers > 1:
        pool = ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker,
            initargs=([(g.A, g.B, g.den, g.d) for g in gens],))
    try:
        for k in range(1, R + 1):
            if pool is None:
                products = ((x @ s for s in gens) for x in layer)
                stream = (y for row in products for y in row)
            else:
                size = max(1, math.ceil(len(layer) / (4 * workers)))
                chunks = [[(x.A, x.B, x.den, x.d) for x in layer[i:i + size]]
                          for i in range(0, len(layer), size)]
                stream = (GMatrix(A, B, den, system.d, reduced=True)
                          for res in pool.map(_expand_chunk, chunks)
                          for _, A, B, den in res)
            new, parents, letters, keys = [], [], [], []
            ngen = len(gens)
            for pos, y in enumerate(stream):
                key = y.key
                if key in seen:
                    continue
                seen[key] = k
                new.append(y)
                parents.append(pos // ngen)
                letters.append(pos % ngen)
                keys.append(key)
                if len(new) % 4096 == 1:
                    used_now = used + len(new) * _element_bytes(y)
                    if used_now > memory_budget:
                        raise BudgetExceeded(
                            f"memory budget of {memory_budget} bytes exceeded in layer {k}")
            if new:
                used += len(new) * _element_bytes(new[-1])
            layer_keys.append(keys)
            if window is not None and len(layer_keys) > window:
                for old in layer_keys[-window - 1]:
                    seen.pop(old, None)
                layer_keys[-window - 1] = []
                used = sum(len(lk) for lk in layer_keys) * _element_bytes(layer[-1])
            yield k, new, parents, letters
            layer = new
    finally:
        if pool is not None:
            pool.shutdown()


@dataclass
class WordBall:
    """Exact ball of radius ``radius`` in the Cayley graph.

    Elements are stored in BFS order; ``lengths[i]`` is the minimal word
    length and the witness word is recovered from ``parent``/``letter``.
    """

    system: GeneratorSystem
    radius: int
    elements: list
    lengths: np.ndarray
    parent: np.ndarray
    letter: np.ndarray
    layer_counts: list
    complete: bool = True
    note: str = ""

    def __post_init__(self):
        self.index = {g.key: i for i, g in enumerate(self.elements)}

    def __len__(self):
        return len(self.elements)

    def __contains__(self, g):
        return g.key in self.index

    def lookup(self, g):
        """``(length, word)`` for an element of the ball, or None."""
        i = self.index.get(g.key)
        if i is None:
            return None
        return int(self.lengths[i]), self.word(i)

    def word(self, i):
        labels = self.system.labels
        out = []
        while i > 0:
            out.append(labels[self.letter[i]])
            i = self.parent[i]
        return tuple(reversed(out))

    def layer(self, k):
        start = sum(self.layer_counts[:k])
        return self.elements[start:start + self.layer_counts[k]]

    def to_json(self):
        """Ball file: the generator system plus the BFS tree (``parent``, ``letter``)."""
        doc = {"format": "son2lab-ball", "radius": self.radius, "complete": self.complete,
               "note": self.note, "layer_counts": list(self.layer_counts),
               "generators": self.system.to_dict(),
               "parent": self.parent.tolist(), "letter": self.letter.tolist()}
        return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())

    def stats_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["layer", "count"])
        for k, c in enumerate(self.layer_counts):
            w.writerow([k, c])
        return buf.getvalue()


def ball(system, R, workers=1, memory_budget=DEFAULT_MEMORY_BUDGET):
    """Exact BFS word ball of radius ``R``.

    If the memory budget is exceeded the partial ball is returned with
    ``complete=False``; it must not be used for counting.
    """
    if R < 0:
        raise ValueError("radius must be >= 0")
    elements, lengths, parent, letter, counts = [], [], [], [], []
    offset_prev = 0
    complete = True
    note = ""
    try:
        for k, new, parents, letters in _bfs(system, R, workers, memory_budget):
            base = len(elements)
            elements.extend(new)
            lengths.extend([k] * len(new))
            parent.extend([offset_prev + p for p in parents] if k else [0])
            letter.extend(letters if k else [-1])
            counts.append(len(new))
            offset_prev = base
    except BudgetExceeded as exc:
        complete = False
        note = str(exc)
    return WordBall(system, R, elements, np.array(lengths, dtype=np.int64),
                    np.array(parent, dtype=np.int64), np.array(letter, dtype=np.int64),
                    counts, complete, note)


def load_ball(path):
    """Rebuild a :class:`WordBall` from a ball file by replaying its BFS tree exactly."""
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != "son2lab-ball":
        raise GeneratorFileError(f"{path}: not a ball file")
    system = system_from_dict(doc["generators"], source=str(path))
    parent = np.array(doc["parent"], dtype=np.int64)
    letter = np.array(doc["letter"], dtype=np.int64)
    counts = list(doc["layer_counts"])
    gens = system.matrices
    elements = [identity(system.n, system.d)]
    for i in range(1, len(parent)):
        elements.append(elements[parent[i]] @ gens[letter[i]])
    lengths = np.repeat(np.arange(len(counts)), counts).astype(np.int64)
    return WordBall(system, int(doc["radius"]), elements, lengths, parent, letter, counts,
                    bool(doc.get("complete", True)), str(doc.get("note", "")))


# ---------------------------------------------------------------------------
# Cartan clouds
# ---------------------------------------------------------------------------

@dataclass
class CartanCloud:
    """Cartan projections and word lengths of the non-identity ball elements."""

    mu: np.ndarray
    wordlen: np.ndarray
    n: int
    d: int
    radius: int
    generator_hash: str = ""
    layer_counts: list = field(default_factory=list)
    identity_count: int = 1
    diagnostics: list = field(default_factory=list)
    complete: bool = True

    def __len__(self):
        return len(self.wordlen)

    @property
    def norms(self):
        return np.hypot(self.mu[:, 0], self.mu[:, 1])

    def meta(self):
        return {"n": self.n, "d": self.d, "radius": self.radius,
                "generator_hash": self.generator_hash,
                "layer_counts": list(self.layer_counts),
                "identity_count": self.identity_count,
                "diagnostics": [list(x) for x in self.diagnostics],
                "complete": self.complete}

    def to_csv(self):
        buf = io.StringIO()
        buf.write("v1,v2,wordlen\n")
        for (v1, v2), L in zip(self.mu.tolist(), self.wordlen.tolist()):
            buf.write(f"{v1!r},{v2!r},{L}\n")
        return buf.getvalue()

    def save(self, path):
        """Write the CSV and a ``.meta.json`` sidecar."""
        with open(path, "w") as fh:
            fh.write(self.to_csv())
        with open(str(path) + ".meta.json", "w") as fh:
            json.dump(self.meta(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        with open(str(path) + ".meta.json") as fh:
            meta = json.load(fh)
        mu = data[:, :2] if len(data) else np.zeros((0, 2))
        wl = data[:, 2].astype(np.int64) if len(data) else np.zeros(0, dtype=np.int64)
        return cls(mu, wl, meta["n"], meta["d"], meta["radius"], meta.get("generator_hash", ""),
                   meta.get("layer_counts", []), meta.get("identity_count", 1),
                   [tuple(x) for x in meta.get("diagnostics", [])], meta.get("complete", True))

    def layer_minima(self, form):
        """``[(k, min form(mu) over |gamma| = k)]`` for k = 1..R."""
        vals = form(self.mu)
        out = []
        for k in range(1, self.radius + 1):
            sel = self.wordlen == k
            if np.any(sel):
                out.append((k, float(np.min(vals[sel]))))
        return out


def _project(elements, lengths, tol=CHAMBER_TOL, batch=8192):
    mus, lens, diags = [], [], []
    for i in range(0, len(elements), batch):
        chunk = elements[i:i + batch]
        mu, errs = cartan_projections(chunk, tol)
        bad = {j for j, _ in errs}
        diags.extend((int(lengths[i + j]), msg) for j, msg in errs)
        keep = [j for j in range(len(chunk)) if j not in bad]
        mus.append(mu[keep])
        lens.append(np.asarray(lengths[i:i + batch])[keep])
    if not mus:
        return np.zeros((0, 2)), np.zeros(0, dtype=np.int64), diags
    return np.vstack(mus), np.concatenate(lens).astype(np.int64), diags


def cartan_cloud(wb, allow_partial=False, tol=CHAMBER_TOL):
    """One ``(mu, |gamma|)`` pair per non-identity element of a complete ball.

    Elements whose projection fails the pairing checks are left out and
    listed in ``diagnostics`` as ``(word length, message)``.
    """
    if not wb.complete and not allow_partial:
        raise ValueError(f"ball is incomplete ({wb.note}); refusing to build a counting cloud")
    mu, lens, diags = _project(wb.elements[1:], wb.lengths[1:], tol)
    return CartanCloud(mu, lens, wb.system.n, wb.system.d, wb.radius, wb.system.sha256(),
                       list(wb.layer_counts), 1, diags, wb.complete)


def stream_cloud(system, R, workers=1, memory_budget=DEFAULT_MEMORY_BUDGET, tol=CHAMBER_TOL):
    """Cartan cloud of the radius-R ball without keeping old layers.

    Only the keys of three consecutive layers are held in memory and each
    layer is projected before it is discarded.
    """
    mus, lens, diags, counts = [], [], [], []
    complete = True
    try:
        for k, new, _, _ in _bfs(system, R, workers, memory_budget, window=2):
            counts.append(len(new))
            if k == 0:
                continue
            mu, L, dg = _project(new, [k] * len(new), tol)
            mus.append(mu)
            lens.append(L)
            diags.extend(dg)
    except BudgetExceeded:
        complete = False
    mu = np.vstack(mus) if mus else np.zeros((0, 2))
    L = np.concatenate(lens) if lens else np.zeros(0, dtype=np.int64)
    return CartanCloud(mu, L, system.n, system.d, R, system.sha256(), counts, 1, diags, complete)
