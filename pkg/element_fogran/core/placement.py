"""
(K, d) MDS intra-file coded caching

Each file is cut into d plain subfiles and encoded with a d x K Vandermonde generator
over a prime field into K coded subfiles, one per EN. Any d of them recover the file.

Byte <-> symbol mapping: 2 bytes per symbol, big-endian, so every symbol is below
2**16 < p for the default field GF(65537). Files are zero-padded to a whole number of
symbol columns; the original byte length travels with every coded subfile.
"""
from __future__ import annotations

import functools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import galois
import numpy as np

from .topology import Topology
from .utils import get_config

logger = logging.getLogger(__name__)

SYMBOL_BYTES = 2


@functools.lru_cache(maxsize=None)
def _galois_field(p: int):
    return galois.GF(p)


@dataclass(frozen=True)
class PrimeField:
    """Prime field GF(p) used for the MDS code."""

    p: int

    def __post_init__(self):
        if not galois.is_prime(self.p):
            raise ValueError(f"Field modulus must be prime, got p={self.p}")

    @property
    def gf(self):
        return _galois_field(self.p)

    @classmethod
    def default(cls) -> "PrimeField":
        return cls(get_config("fogran.field_prime"))


@dataclass(frozen=True, eq=False)
class PlacementScheme:
    """MDS generator and the field it lives in.

    Attributes:
        topology (Topology): network the placement is built for.
        field (PrimeField): coding field.
        generator (galois.FieldArray): d x K matrix, column i-1 holds EN i's coefficients.
    """

    topology: Topology
    field: PrimeField
    generator: galois.FieldArray

    @property
    def k(self) -> int:
        return self.topology.k

    @property
    def d(self) -> int:
        return self.topology.d

    def column(self, en: int) -> galois.FieldArray:
        return self.generator[:, en - 1]


@dataclass(frozen=True)
class Library:
    """N files of identical byte length.

    Attributes:
        files (tuple[bytes]): payloads; file ids are 1-based positions in this tuple.
    """

    files: tuple

    def __post_init__(self):
        if not self.files:
            raise ValueError("Library must hold at least one file")
        lengths = {len(f) for f in self.files}
        if len(lengths) != 1:
            raise ValueError(f"All files must have the same length, got {sorted(lengths)}")
        if 0 in lengths:
            raise ValueError("Files must not be empty")

    @property
    def n_files(self) -> int:
        return len(self.files)

    @property
    def file_bytes(self) -> int:
        return len(self.files[0])

    def file(self, file_id: int) -> bytes:
        if not 1 <= file_id <= self.n_files:
            raise IndexError(f"file id must be in [1, {self.n_files}], got {file_id}")
        return self.files[file_id - 1]


@dataclass(frozen=True, eq=False)
class CodedSubfile:
    """Coded subfile of one file cached at one EN.

    Attributes:
        file_id (int): 1-based file index.
        en_index (int): caching EN.
        payload (np.ndarray): field symbols, length ceil(F_sym / d).
        n_bytes (int): byte length of the original file.
    """

    file_id: int
    en_index: int
    payload: np.ndarray
    n_bytes: int

    def __len__(self):
        return len(self.payload)


@dataclass(frozen=True)
class DemandVector:
    """User j requests file `demands[j-1]`."""

    demands: tuple

    def __post_init__(self):
        object.__setattr__(self, "demands", tuple(int(n) for n in self.demands))
        if any(n < 1 for n in self.demands):
            raise ValueError(f"Demanded file ids start at 1, got {list(self.demands)}")

    def __len__(self):
        return len(self.demands)

    def __iter__(self):
        return iter(self.demands)

    def demand(self, user: int) -> int:
        return self.demands[user - 1]

    def validate(self, k: int, n_files: int):
        if len(self.demands) != k:
            raise ValueError(f"Demand vector must have {k} entries, got {len(self.demands)}")
        bad = [n for n in self.demands if not 1 <= n <= n_files]
        if bad:
            raise ValueError(f"Demanded file ids must be in [1, {n_files}], got {bad}")


# ---------- library and demand helpers ----------


def make_library(n_files: int, file_bytes: int, rng: np.random.Generator) -> Library:
    """Library of `n_files` random payloads of `file_bytes` bytes each."""
    if n_files < 1:
        raise ValueError(f"n_files must be >= 1, got {n_files}")
    return Library(tuple(rng.bytes(file_bytes) for _ in range(n_files)))


def canonical_demands(k: int, n_files: int) -> DemandVector:
    """User j demands file ((j-1) mod N) + 1."""
    return DemandVector(tuple((j - 1) % n_files + 1 for j in range(1, k + 1)))


def worst_case_demands(k: int, n_files: int) -> DemandVector:
    """All-distinct demands when N >= K, the canonical demands otherwise."""
    return canonical_demands(k, n_files)


def random_demands(k: int, n_files: int, rng: np.random.Generator) -> DemandVector:
    return DemandVector(tuple(rng.integers(1, n_files + 1, size=k).tolist()))


# ---------- coding ----------


def build_placement(t: Topology, field: PrimeField = None) -> PlacementScheme:
    """Vandermonde placement: column i is (a_i^0, ..., a_i^(d-1)) with a_i = i.

    Args:
        t (Topology): network to place for.
        field (PrimeField, optional): coding field. Defaults to the configured prime.

    Returns:
        PlacementScheme: MDS placement; any d columns are linearly independent.
    """
    field = field or PrimeField.default()
    if field.p <= t.k:
        raise ValueError(f"Field too small: need p > K={t.k}, got p={field.p}")

    powers = [[pow(alpha, e, field.p) for alpha in t.ens] for e in range(t.d)]
    generator = field.gf(np.array(powers, dtype=np.int64))
    logger.debug(f"MDS placement over GF({field.p}) for {t}")
    return PlacementScheme(topology=t, field=field, generator=generator)


def _to_symbols(payload: bytes, d: int) -> np.ndarray:
    padded = payload + b"\x00" * (-len(payload) % SYMBOL_BYTES)
    symbols = np.frombuffer(padded, dtype=">u2").astype(np.int64)
    return np.concatenate([symbols, np.zeros(-len(symbols) % d, dtype=np.int64)])


def _to_bytes(symbols: np.ndarray, n_bytes: int) -> bytes:
    if np.any(symbols >= 2 ** (8 * SYMBOL_BYTES)):
        raise RuntimeError("Decoded symbol does not fit a payload symbol")
    return symbols.astype(">u2").tobytes()[:n_bytes]


def encode(scheme: PlacementScheme, lib: Library) -> dict:
    """Encode every file of the library into its K coded subfiles.

    Returns:
        dict: {(en_index, file_id): CodedSubfile}
    """
    gf, d = scheme.field.gf, scheme.d
    if scheme.field.p <= 2 ** (8 * SYMBOL_BYTES):
        raise ValueError(
            f"Payload symbols are {8 * SYMBOL_BYTES} bits wide, need p > 2**16,"
            f" got p={scheme.field.p}"
        )
    cache = {}
    for file_id, payload in enumerate(lib.files, start=1):
        # (d x n_positions): plain subfile r holds symbols r, r+d, r+2d, ...
        plain = gf(_to_symbols(payload, d).reshape(-1, d).T)
        coded = (scheme.generator.T @ plain).view(np.ndarray)  # (K x n_positions)
        for en in scheme.topology.ens:
            row = coded[en - 1].astype(np.int64)
            row.flags.writeable = False
            cache[(en, file_id)] = CodedSubfile(file_id, en, row, len(payload))
    return cache


def decode(scheme: PlacementScheme, file_id: int, parts: Iterable[CodedSubfile]) -> bytes:
    """Recover a file from d coded subfiles cached at d distinct ENs."""
    parts = sorted(parts, key=lambda part: part.en_index)
    ens = [part.en_index for part in parts]
    if len(set(ens)) != len(ens):
        raise ValueError(f"Coded subfiles must come from distinct ENs, got ENs {ens}")
    if len(parts) != scheme.d:
        raise ValueError(f"Exactly d={scheme.d} coded subfiles needed, got {len(parts)}")
    if {part.file_id for part in parts} != {file_id}:
        raise ValueError(
            f"All coded subfiles must belong to file {file_id},"
            f" got {sorted({part.file_id for part in parts})}"
        )

    gf = scheme.field.gf
    system = scheme.generator[:, np.array(ens) - 1].T  # (d x d)
    received = gf(np.vstack([part.payload for part in parts]))
    try:
        plain = np.linalg.solve(system, received)
    except np.linalg.LinAlgError as e:
        raise RuntimeError(f"MDS system for ENs {ens} is singular: {e}")
    symbols = plain.view(np.ndarray).T.reshape(-1).astype(np.int64)
    return _to_bytes(symbols, parts[0].n_bytes)


def decodability_rank(scheme: PlacementScheme, en_set: Iterable[int]) -> int:
    """Rank of the generator columns of `en_set` over the coding field."""
    ens = sorted(set(en_set))
    if not ens:
        return 0
    for en in ens:
        if not 1 <= en <= scheme.k:
            raise IndexError(f"EN index must be in [1, {scheme.k}], got {en}")
    return int(np.linalg.matrix_rank(scheme.generator[:, np.array(ens) - 1]))


def cache_fraction(scheme: PlacementScheme, lib: Library) -> Fraction:
    """Fraction of the (padded) library each EN stores; equals 1/d."""
    file_symbols = len(_to_symbols(lib.file(1), scheme.d))
    stored = lib.n_files * (file_symbols // scheme.d)
    return Fraction(stored, lib.n_files * file_symbols)
