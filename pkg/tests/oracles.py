"""Independent oracles for the test suite.

Deliberately naive reimplementations (plain loops, math.fsum) of the
documented recipes and scoring semantics, kept separate from the
package code paths they check.
"""

import math

import numpy as np
from PIL import Image

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def oracle_fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) % (1 << 64)
    return h


def _oracle_project_normalize(features, matrix) -> list:
    # projection as an explicit weighted row sum, norm via fsum
    dim = matrix.shape[1]
    acc = [0.0] * dim
    for i, f in enumerate(features):
        if f != 0.0:
            row = matrix[i]
            for j in range(dim):
                acc[j] += f * float(row[j])
    norm = math.sqrt(math.fsum(x * x for x in acc))
    assert norm > 1e-12, "oracle projection collapsed to zero"
    return [x / norm for x in acc]


def oracle_text_embed(text: str, dim: int, seed: int) -> list:
    """Recipe: lowercase -> char 3-grams -> FNV-1a64 mod 4096 counts ->
    seeded Gaussian projection -> unit norm."""
    s = text.lower()
    grams = [s[i : i + 3] for i in range(len(s) - 2)] if len(s) >= 3 else [s]
    counts = [0.0] * 4096
    for g in grams:
        counts[oracle_fnv1a64(g.encode("utf-8")) % 4096] += 1.0
    matrix = np.random.Generator(np.random.PCG64(seed)).standard_normal((4096, dim))
    return _oracle_project_normalize(counts, matrix)


def oracle_image_embed(source, dim: int, seed: int) -> list:
    """Recipe: grayscale -> 16x16 cell means -> (v-127.5)/127.5 ->
    seeded Gaussian projection -> unit norm."""
    import io as _io

    img = Image.open(_io.BytesIO(source) if isinstance(source, bytes) else source)
    gray = img.convert("L")
    w, h = gray.size
    px = gray.load()
    feats = []
    for i in range(16):
        r0, r1 = (i * h) // 16, ((i + 1) * h) // 16
        if r1 <= r0:
            r0 = min(r0, h - 1)
            r1 = r0 + 1
        for j in range(16):
            c0, c1 = (j * w) // 16, ((j + 1) * w) // 16
            if c1 <= c0:
                c0 = min(c0, w - 1)
                c1 = c0 + 1
            total = 0
            for y in range(r0, r1):
                for x in range(c0, c1):
                    total += px[x, y]
            mean = total / ((r1 - r0) * (c1 - c0))
            feats.append((mean - 127.5) / 127.5)
    matrix = np.random.Generator(np.random.PCG64(seed)).standard_normal((256, dim))
    return _oracle_project_normalize(feats, matrix)


def oracle_brute_force_search(entries, query_vec, k: int):
    """Linear scan in the engine's documented semantics: store vectors
    and the query quantized to f32, score = f64 dot (fsum), clamp to
    [-1, 1], order by (-score, id), top k.

    entries: iterable of (record_id, vector-like); returns
    [(record_id, score)].
    """
    q32 = [float(np.float32(x)) for x in np.asarray(query_vec, dtype=np.float64)]
    scored = []
    for rid, vec in entries:
        v32 = [float(np.float32(x)) for x in np.asarray(vec, dtype=np.float64)]
        s = math.fsum(a * b for a, b in zip(v32, q32))
        s = max(-1.0, min(1.0, s))
        scored.append((rid, s))
    scored.sort(key=lambda t: (-t[1], t[0]))
    return scored[:k]


def oracle_cosine_f32(a_vec, b_vec) -> float:
    """f64 fsum dot of f32-quantized unit vectors, unclamped."""
    a = [float(np.float32(x)) for x in np.asarray(a_vec, dtype=np.float64)]
    b = [float(np.float32(x)) for x in np.asarray(b_vec, dtype=np.float64)]
    return math.fsum(x * y for x, y in zip(a, b))


def recall_at_k(approx_ids, exact_ids) -> float:
    if not exact_ids:
        return 1.0
    return len(set(approx_ids) & set(exact_ids)) / len(exact_ids)
