"""Source abstraction: anything that emits infinite words and exposes the
Dirichlet series of its fundamental probabilities.

A source assigns to every finite word w the probability p_w that an emitted
word starts with w.  All cost analysis downstream consumes only:

  * lambda_k(s, k)   =  sum over |w| = k of p_w^s
  * lambda_series(s) =  sum over all finite w (including the empty word)
                        of p_w^s, with a certified truncation bound
  * entropy()        =  Shannon entropy rate in nats
  * emit(n, seed)    =  n reproducible pseudorandom words

Emission is reproducible and prefix-stable: the same (seed, n) always yields
the same words, and deepening a word never changes symbols already seen.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .words import WordBatch


@dataclass(frozen=True)
class DirichletValue:
    """A numerically evaluated Dirichlet-series value with a certified
    absolute error bound.  bound == 0.0 means closed form (machine
    precision only)."""

    value: float
    bound: float = 0.0

    def __float__(self) -> float:
        return float(self.value)


class Source:
    """Base class; concrete sources fill in the emitter and the series."""

    name = "source"

    # -- emission ------------------------------------------------------

    def emit(self, n: int, seed, *, trial: int | None = None) -> WordBatch:
        """Return a batch of n words.

        seed may be an int or a numpy SeedSequence.  When `trial` is given,
        the stream for that trial index is spawned from the seed, so trial
        t of a simulation is reproducible in isolation.
        """
        ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        if trial is not None:
            ss = np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + (int(trial),))
        rng = np.random.Generator(np.random.PCG64(ss))
        return WordBatch(n, self._emitter(n, rng))

    def _emitter(self, n: int, rng: np.random.Generator):
        """Return extend(rows) -> (rows, n) symbol block closure."""
        raise NotImplementedError

    def emit_words(self, n: int, max_len: int, seed) -> np.ndarray:
        """n words truncated at max_len symbols, as an (n, max_len) array.

        Raises IndistinguishableWords when two words agree on the whole
        prefix, since downstream tree builders could not separate them.
        """
        from .errors import IndistinguishableWords
        m = self.emit(n, seed).matrix(int(max_len)).T
        if n > 1:
            order = np.lexsort(m.T[::-1])
            sm = m[order]
            if not np.all((sm[1:] != sm[:-1]).any(axis=1)):
                raise IndistinguishableWords(
                    f"two of {n} emitted words agree on {max_len} symbols")
        return m

    # -- Dirichlet data ------------------------------------------------

    def lambda_k(self, s, k: int):
        raise NotImplementedError

    def lambda_series(self, s) -> DirichletValue:
        raise NotImplementedError

    def entropy(self) -> float:
        raise NotImplementedError

    # -- misc ----------------------------------------------------------

    def describe(self) -> dict:
        return {"name": self.name}

    def prefix_probabilities(self, depth: int):
        """All (word, p_w) at exactly the given depth.  Only meaningful for
        sources with finitely many branches; used by small-depth checks."""
        raise NotImplementedError


def from_config(cfg) -> Source:
    """Build a source from a JSON-style dict (or a JSON string / builtin
    token, see parse_source_token)."""
    if isinstance(cfg, str):
        return parse_source_token(cfg)
    kind = cfg.get("type")
    if kind == "memoryless":
        from .simple import Memoryless
        return Memoryless(cfg["probs"])
    if kind == "markov":
        from .simple import Markov
        return Markov(cfg["initial"], cfg["transition"])
    if kind == "dynamical":
        from .dynamics import from_dynamical_config
        return from_dynamical_config(cfg)
    raise ValueError(f"unknown source type: {kind!r}")


def parse_source_token(token: str) -> Source:
    """CLI source syntax: inline JSON (starts with '{'), a path to a JSON
    file, or a builtin token:

        uniform:R            memoryless uniform over R symbols
        memoryless:p1,p2,... memoryless with the given probabilities
        gauss                continued-fraction map source
        rary:R               R-ary interval expansion source
    """
    token = token.strip()
    if token.startswith("{"):
        return from_config(json.loads(token))
    if token.startswith("uniform:"):
        r = int(token.split(":", 1)[1])
        from .simple import Memoryless
        return Memoryless([1.0 / r] * r)
    if token.startswith("memoryless:"):
        probs = [float(x) for x in token.split(":", 1)[1].split(",")]
        from .simple import Memoryless
        return Memoryless(probs)
    if token == "gauss":
        from .dynamics import gauss_source
        return gauss_source()
    if token.startswith("rary:"):
        r = int(token.split(":", 1)[1])
        from .dynamics import rary_source
        return rary_source(r)
    # fall through: treat as file path
    with open(token) as f:
        return from_config(json.load(f))
