"""Counter-based random streams for reproducible, splittable sampling.

Every random draw in a stochastic run comes from a Philox stream keyed by
(seed, step, phase, occupation).  Philox is counter-based, so distinct keys
give statistically independent streams on every platform, runs are exactly
reproducible from the seed alone, and per-occupation sampling could be
farmed out concurrently without changing the results.  Draws are merged in
ascending occupation order.
"""

from __future__ import annotations

import numpy as np

# Phase tags inside one simulation step.
PHASE_DRAWS = 0        # binomial separations / openings, per occupation
PHASE_APPLICATIONS = 1  # multinomial application routing, per source occupation
PHASE_MATCHING = 2     # urn assignment and winner selection, per target occupation
PHASE_SPELLS = 3       # which spell bins the hired workers came from, per source

_MAX_OCC = 1 << 20
_MAX_PHASE = 1 << 4


class StreamFactory:
    """Hands out the (seed, step, phase, occupation)-keyed generator.

    A single Philox bit generator is re-keyed per request, which is an order
    of magnitude cheaper than constructing a fresh Generator and yields the
    identical stream.  The returned Generator is shared state: draw from it
    before requesting the next stream.
    """

    def __init__(self, seed: int):
        seed = int(seed)
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.seed = seed
        self._key = np.zeros(2, dtype=np.uint64)
        self._key[0] = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
        self._bitgen = np.random.Philox(key=self._key.copy())
        self._gen = np.random.Generator(self._bitgen)
        self._template = self._bitgen.state

    def stream(self, step: int, phase: int, occupation: int) -> np.random.Generator:
        if not (0 <= occupation < _MAX_OCC and 0 <= phase < _MAX_PHASE):
            raise ValueError("phase/occupation out of key range")
        state = self._template
        state["state"]["key"][0] = self._key[0]
        state["state"]["key"][1] = (
            (np.uint64(step) << np.uint64(24))
            | (np.uint64(phase) << np.uint64(20))
            | np.uint64(occupation)
        )
        state["state"]["counter"][:] = 0
        state["buffer_pos"] = 4
        state["has_uint32"] = 0
        state["uinteger"] = 0
        self._bitgen.state = state
        return self._gen
